"""Exact scalar arithmetic and integer/field linear algebra.

Everything downstream runs over one of three coefficient rings:

* ``ZZ``     -- arbitrary-precision integers,
* ``QQ``     -- rationals (``fractions.Fraction``),
* ``GF(p)``  -- the prime field Z/p.

No floating point is used anywhere in the package.  Matrices are dense
row-major lists of ring elements.  The two computational workhorses are
Smith normal form over the integers (with transformation matrices, so
that homology generators and induced maps can be extracted) and Gaussian
elimination over the fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class Ring:
    """A coefficient ring: Z, Q, or a prime field GF(p).

    Elements are plain Python objects (int, Fraction, or int mod p);
    the ring object bundles the arithmetic so callers never branch on
    the ring kind themselves.
    """

    def __init__(self, tag):
        if tag in ("Z", "Q"):
            self.tag = tag
            self.p = 0
        elif tag.startswith("F"):
            p = int(tag[1:])
            if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
                raise ValueError(f"not a prime field tag: {tag}")
            self.tag = tag
            self.p = p
        else:
            raise ValueError(f"unknown ring tag: {tag}")

    @property
    def is_field(self):
        return self.tag != "Z"

    @property
    def characteristic(self):
        return self.p if self.p else 0

    def zero(self):
        return Fraction(0) if self.tag == "Q" else 0

    def one(self):
        return Fraction(1) if self.tag == "Q" else 1 % self.p if self.p else 1

    def of(self, n):
        """Coerce an integer (or Fraction, over Q) into the ring."""
        if self.tag == "Q":
            return Fraction(n)
        if self.p:
            if isinstance(n, Fraction):
                if n.denominator % self.p == 0:
                    raise ZeroDivisionError(f"denominator divisible by {self.p}")
                return n.numerator * pow(n.denominator, -1, self.p) % self.p
            return n % self.p
        if isinstance(n, Fraction):
            if n.denominator != 1:
                raise ValueError(f"{n} is not an integer")
            return n.numerator
        return n

    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.p else a * b

    def neg(self, a):
        return (-a) % self.p if self.p else -a

    def inv(self, a):
        if self.p:
            return pow(a, -1, self.p)
        if self.tag == "Q":
            return Fraction(1) / a
        if a in (1, -1):
            return a
        raise ZeroDivisionError(f"{a} is not invertible over Z")

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        if self.p:
            return a % self.p != 0
        if self.tag == "Q":
            return a != 0
        return a in (1, -1)

    def to_str(self, a):
        return str(a)

    def from_str(self, s):
        if self.tag == "Q":
            return Fraction(s)
        return int(s) % self.p if self.p else int(s)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"Ring({self.tag!r})"


ZZ = Ring("Z")
QQ = Ring("Q")


def GF(p):
    return Ring(f"F{p}")


class Matrix:
    """Dense exact matrix over a :class:`Ring` (row-major)."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring, rows, cols, entries=None):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        if entries is None:
            z = ring.zero()
            self.entries = [[z] * cols for _ in range(rows)]
        else:
            if len(entries) != rows or any(len(r) != cols for r in entries):
                raise ValueError("entry grid does not match shape")
            self.entries = [list(r) for r in entries]

    @classmethod
    def identity(cls, ring, n):
        m = cls(ring, n, n)
        one = ring.one()
        for i in range(n):
            m.entries[i][i] = one
        return m

    @classmethod
    def from_rows(cls, ring, rows):
        rows = [list(r) for r in rows]
        cols = len(rows[0]) if rows else 0
        return cls(ring, len(rows), cols, rows)

    def copy(self):
        return Matrix(self.ring, self.rows, self.cols, self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.ring == other.ring
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"Matrix({self.ring.tag}, {self.rows}x{self.cols})"

    def is_zero(self):
        return all(all(x == 0 for x in row) for row in self.entries)

    def transpose(self):
        return Matrix(
            self.ring, self.cols, self.rows,
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        R = self.ring
        return Matrix(
            R, self.rows, self.cols,
            [[R.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __sub__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        R = self.ring
        return Matrix(
            R, self.rows, self.cols,
            [[R.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def scale(self, c):
        R = self.ring
        return Matrix(R, self.rows, self.cols, [[R.mul(c, a) for a in row] for row in self.entries])

    def __mul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} * {other.rows}x{other.cols}")
        R = self.ring
        out = Matrix(R, self.rows, other.cols)
        orows = other.entries
        for i, row in enumerate(self.entries):
            orow = out.entries[i]
            for k, a in enumerate(row):
                if a == 0:
                    continue
                for j, b in enumerate(orows[k]):
                    if b != 0:
                        orow[j] = R.add(orow[j], R.mul(a, b))
        return out

    def apply(self, vec):
        """Matrix times column vector (a list of ring elements)."""
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        R = self.ring
        out = []
        for row in self.entries:
            s = R.zero()
            for a, b in zip(row, vec):
                if a != 0 and b != 0:
                    s = R.add(s, R.mul(a, b))
            out.append(s)
        return out

    def to_json(self):
        return {
            "ring": self.ring.tag,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[self.ring.to_str(a) for a in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, obj):
        ring = Ring(obj["ring"])
        entries = [[ring.from_str(s) for s in row] for row in obj["entries"]]
        return cls(ring, obj["rows"], obj["cols"], entries)


@dataclass(frozen=True)
class HomologySummary:
    """Isomorphism type of a finitely generated abelian group / vector space.

    ``torsion`` lists invariant factors d_1 | d_2 | ... with every entry
    > 1 (units and zeros are never recorded).  Over a field the torsion
    list is always empty and ``free_rank`` is the dimension.
    """

    free_rank: int
    torsion: tuple = ()

    def __str__(self):
        if not self.torsion:
            return f"free^{self.free_rank}"
        t = " + ".join(f"Z/{d}" for d in self.torsion)
        return f"free^{self.free_rank} + {t}" if self.free_rank else t

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def to_json(self):
        return {"free_rank": self.free_rank, "torsion": [str(d) for d in self.torsion]}


def smith_normal_form(m):
    """Smith normal form over Z.

    Returns ``(d, u, v)`` with ``u * m * v = d``, ``u`` and ``v``
    unimodular, and ``d`` diagonal with non-negative entries satisfying
    d_i | d_{i+1}.  Pivoting always selects a nonzero entry of minimal
    absolute value in the remaining block, which keeps intermediate
    entries small without rational arithmetic.
    """
    if m.ring.tag != "Z":
        raise ValueError("Smith normal form requires the integer ring")
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_op(i, j, c):  # row_i += c * row_j   (on a and u)
        ai, aj = a[i], a[j]
        for k in range(cols):
            ai[k] += c * aj[k]
        ui, uj = u[i], u[j]
        for k in range(rows):
            ui[k] += c * uj[k]

    def col_op(i, j, c):  # col_i += c * col_j   (on a and v)
        for r in a:
            r[i] += c * r[j]
        for r in v:
            r[i] += c * r[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < rows and t < cols:
        # locate minimal nonzero entry in the (t..) block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x != 0 and (best is None or abs(x) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        # clear row and column t; restart if a reduction produced a
        # smaller remainder somewhere (classic size-reduction loop)
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, -q)
                    if a[i][t] != 0:  # nonzero remainder: smaller pivot found
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, -q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        # divisibility fix-up: pivot must divide the rest of the block
        piv = a[t][t]
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % piv != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_op(t, offender, 1)
            continue  # redo the clearing at the same t
        if piv < 0:
            for k in range(cols):
                a[t][k] = -a[t][k]
            for k in range(rows):
                u[t][k] = -u[t][k]
        t += 1

    d = Matrix(ZZ, rows, cols, a)
    return d, Matrix(ZZ, rows, rows, u), Matrix(ZZ, cols, cols, v)


def invariant_factors(m):
    """Nonzero diagonal of the Smith form (in divisibility order)."""
    d, _, _ = smith_normal_form(m)
    out = []
    for i in range(min(m.rows, m.cols)):
        if d.entries[i][i] != 0:
            out.append(d.entries[i][i])
    return out


def _rref(m):
    """Reduced row echelon form over a field; returns (matrix, pivot cols)."""
    R = m.ring
    a = [list(row) for row in m.entries]
    pivots = []
    r = 0
    for c in range(m.cols):
        pr = None
        for i in range(r, m.rows):
            if a[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = R.inv(a[r][c])
        a[r] = [R.mul(inv, x) for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [R.sub(x, R.mul(f, y)) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return Matrix(R, m.rows, m.cols, a), pivots


def rank_and_kernel(m):
    """Rank and a kernel basis.  Fields use Gaussian elimination; over Z
    the kernel basis comes out of the Smith form (it spans the kernel as
    a direct summand, i.e. the kernel is saturated)."""
    R = m.ring
    if not R.is_field:
        if R.tag != "Z":
            raise ValueError("rank_and_kernel supports fields and Z")
        d, _, v = smith_normal_form(m)
        rank = sum(1 for i in range(min(m.rows, m.cols)) if d.entries[i][i] != 0)
        kernel = [[v.entries[i][j] for i in range(m.cols)] for j in range(rank, m.cols)]
        return rank, kernel
    red, pivots = _rref(m)
    rank = len(pivots)
    free = [c for c in range(m.cols) if c not in pivots]
    kernel = []
    for fc in free:
        vec = [R.zero()] * m.cols
        vec[fc] = R.one()
        for r, pc in enumerate(pivots):
            vec[pc] = R.neg(red.entries[r][fc])
        kernel.append(vec)
    return rank, kernel


def rank(m):
    return rank_and_kernel(m)[0]


def solve(m, b):
    """One solution x of m x = b over a field, or None if inconsistent."""
    R = m.ring
    if not R.is_field:
        raise ValueError("solve requires a field")
    aug = Matrix(R, m.rows, m.cols + 1,
                 [row + [bv] for row, bv in zip(m.entries, b)])
    red, pivots = _rref(aug)
    if m.cols in pivots:
        return None
    x = [R.zero()] * m.cols
    for r, pc in enumerate(pivots):
        x[pc] = red.entries[r][m.cols]
    return x


def homology_at(d_in, d_out):
    """Homology ker(d_out)/im(d_in) as a :class:`HomologySummary`.

    ``d_in``  : C_{k+1} -> C_k   (matrix, columns index C_{k+1})
    ``d_out`` : C_k     -> C_{k-1}
    Raises ValueError unless d_out * d_in = 0.

    Over Z the torsion is read off the invariant factors of d_in: the
    image sits inside the saturated submodule ker(d_out), so the
    quotient's torsion is exactly the non-unit part of those factors.
    """
    if d_in.cols and d_out.rows:
        if not (d_out * d_in).is_zero():
            raise ValueError("not a complex: d_out . d_in != 0")
    if d_in.rows != d_out.cols:
        raise ValueError("middle dimensions disagree")
    n = d_out.cols
    if d_in.ring.tag == "Z":
        r_out = rank(d_out) if d_out.rows else 0
        facs = invariant_factors(d_in) if d_in.cols else []
        free = (n - r_out) - len(facs)
        torsion = tuple(f for f in facs if f not in (1,))
        return HomologySummary(free, torsion)
    r_out = rank(d_out) if d_out.rows else 0
    r_in = rank(d_in) if d_in.cols else 0
    return HomologySummary(n - r_out - r_in)


def kernel_basis_integer(m):
    """Columns spanning ker over Z (saturated: a direct summand basis)."""
    _, kernel = rank_and_kernel(m)
    return kernel
