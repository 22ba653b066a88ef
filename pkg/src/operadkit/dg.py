"""Graded modules with differentials, the Koszul sign rule, tensor
products, twists, and cell filtrations.

Conventions (used consistently by every module in the package):

* differentials have degree -1;
* delta(f) = d.f - (-1)^{|f|} f.d for a homomorphism f of degree |f|;
* d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy;
* the symmetry isomorphism sends x (x) y to (-1)^{|x||y|} y (x) x.

A ``GradedModule`` is degreewise free with an ordered basis per degree;
the differential is stored as one matrix per degree (columns indexed by
the degree-k basis, rows by the degree-(k-1) basis).
"""

from __future__ import annotations

from .rings import Matrix, Ring


def koszul_sign_two(p, q):
    """Sign for transposing adjacent symbols of degrees p and q."""
    return -1 if (p % 2) and (q % 2) else 1


def koszul_sign_permutation(perm, degrees):
    """Sign picked up when reordering graded tensor factors.

    ``perm[i]`` is the old position of the factor that ends up in new
    position i; ``degrees`` are indexed by old positions.  The sign is
    (-1)^k where k counts inversions between odd-degree factors.
    """
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j] and (degrees[perm[i]] % 2) and (degrees[perm[j]] % 2):
                sign = -sign
    return sign


class TwistEquationViolation(Exception):
    def __init__(self, degree, message):
        self.degree = degree
        super().__init__(f"twist equation fails first at degree {degree}: {message}")


class GradedModule:
    """Degreewise free module with ordered bases and a degree -1
    differential, delta^2 = 0 (validated on construction)."""

    def __init__(self, ring, basis, differential=None, check=True):
        self.ring = ring
        self.basis = {d: tuple(keys) for d, keys in basis.items() if keys}
        self.differential = dict(differential or {})
        self._index = {
            d: {k: i for i, k in enumerate(keys)} for d, keys in self.basis.items()
        }
        if check:
            self._validate()

    def _validate(self):
        for d, m in self.differential.items():
            if m.cols != self.dim(d) or m.rows != self.dim(d - 1):
                raise ValueError(
                    f"differential at degree {d} has shape {m.rows}x{m.cols}, "
                    f"expected {self.dim(d - 1)}x{self.dim(d)}"
                )
        for d in self.basis:
            a = self.differential.get(d)
            b = self.differential.get(d + 1)
            if a is None or b is None:
                continue
            if a.cols and b.cols and not (a * b).is_zero():
                raise ValueError(f"delta^2 != 0 from degree {d + 1}")

    def degrees(self):
        return sorted(self.basis)

    def dim(self, d):
        return len(self.basis.get(d, ()))

    def total_dim(self):
        return sum(len(v) for v in self.basis.values())

    def index(self, d, key):
        return self._index[d][key]

    def diff_matrix(self, d):
        m = self.differential.get(d)
        if m is None:
            return Matrix(self.ring, self.dim(d - 1), self.dim(d))
        return m

    def degree_of(self, key):
        for d, keys in self.basis.items():
            if key in self._index[d]:
                return d
        raise KeyError(key)

    def diff_lc(self, key):
        """Differential of one basis key as an lc."""
        d = self.degree_of(key)
        m = self.differential.get(d)
        if m is None:
            return {}
        cols = getattr(self, "_sparse_cols", None)
        if cols is None:
            cols = self._sparse_cols = {}
        got = cols.get(d)
        if got is None:
            below = self.basis.get(d - 1, ())
            got = []
            for j in range(m.cols):
                col = {}
                for i, k2 in enumerate(below):
                    c = m.entries[i][j]
                    if c != 0:
                        col[k2] = c
                got.append(col)
            cols[d] = got
        return dict(got[self._index[d][key]])

    def zero_vector(self, d):
        return [self.ring.zero()] * self.dim(d)

    def homology(self):
        """Homology in every degree with a chance of being nonzero, as
        ``{degree: HomologySummary}``; trivial degrees are omitted."""
        from .rings import Matrix, homology_at

        out = {}
        for d in self.degrees():
            n = self.dim(d)
            d_out = self.differential.get(d)
            if d_out is None:
                d_out = Matrix(self.ring, self.dim(d - 1), n)
            d_in = self.differential.get(d + 1)
            if d_in is None:
                d_in = Matrix(self.ring, n, self.dim(d + 1))
            h = homology_at(d_in, d_out)
            if not h.is_trivial():
                out[d] = h
        return out

    def to_json(self):
        return {
            "ring": self.ring.tag,
            "basis": {str(d): [_key_to_json(k) for k in keys] for d, keys in self.basis.items()},
            "differential": {
                str(d): [[self.ring.to_str(a) for a in row] for row in m.entries]
                for d, m in self.differential.items()
                if not m.is_zero()
            },
        }

    @classmethod
    def from_json(cls, obj):
        ring = Ring(obj["ring"])
        basis = {int(d): tuple(_key_from_json(k) for k in keys) for d, keys in obj["basis"].items()}
        diff = {}
        for d, rows in obj.get("differential", {}).items():
            d = int(d)
            n_rows = len(basis.get(d - 1, ()))
            n_cols = len(basis.get(d, ()))
            entries = [[ring.from_str(s) for s in row] for row in rows]
            diff[d] = Matrix(ring, n_rows, n_cols, entries)
        return cls(ring, basis, diff)


def _key_to_json(key):
    # basis keys are strings or nested tuples of strings/ints
    if isinstance(key, tuple):
        return {"t": [_key_to_json(k) for k in key]}
    return key


def _key_from_json(obj):
    if isinstance(obj, dict):
        return tuple(_key_from_json(k) for k in obj["t"])
    return obj


class Homomorphism:
    """Degree-homogeneous linear map between graded modules, stored as
    one matrix per source degree."""

    def __init__(self, source, target, degree, blocks=None):
        self.source = source
        self.target = target
        self.degree = degree
        self.blocks = dict(blocks or {})
        for k, m in self.blocks.items():
            if m.cols != source.dim(k) or m.rows != target.dim(k + degree):
                raise ValueError(f"block at source degree {k} has wrong shape")

    def block(self, k):
        m = self.blocks.get(k)
        if m is None:
            return Matrix(self.source.ring, self.target.dim(k + self.degree), self.source.dim(k))
        return m

    def compose(self, other):
        """self . other (apply ``other`` first)."""
        if other.target is not self.source and other.target.basis != self.source.basis:
            raise ValueError("composition mismatch")
        deg = self.degree + other.degree
        blocks = {}
        for k in other.source.degrees():
            m = self.block(k + other.degree) * other.block(k)
            if not m.is_zero():
                blocks[k] = m
        return Homomorphism(other.source, self.target, deg, blocks)

    def __add__(self, other):
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        blocks = {}
        for k in set(self.blocks) | set(other.blocks):
            m = self.block(k) + other.block(k)
            if not m.is_zero():
                blocks[k] = m
        return Homomorphism(self.source, self.target, self.degree, blocks)

    def __sub__(self, other):
        return self + other.scale(self.source.ring.neg(self.source.ring.one()))

    def scale(self, c):
        return Homomorphism(
            self.source, self.target, self.degree,
            {k: m.scale(c) for k, m in self.blocks.items()},
        )

    def is_zero(self):
        return all(m.is_zero() for m in self.blocks.values())

    def apply(self, k, vec):
        return self.block(k).apply(vec)


def hom_differential(f):
    """delta(f) = d_target . f - (-1)^{|f|} f . d_source."""
    src, tgt = f.source, f.target
    ring = src.ring
    sign = -1 if f.degree % 2 else 1
    blocks = {}
    for k in set(src.degrees()) | {k for k in f.blocks}:
        a = tgt.diff_matrix(k + f.degree) * f.block(k)
        b = f.block(k - 1) * src.diff_matrix(k)
        m = a - b.scale(ring.of(sign))
        if not m.is_zero():
            blocks[k] = m
    return Homomorphism(src, tgt, f.degree - 1, blocks)


def tensor(a, b):
    """Tensor product of graded modules.

    Degree-n basis: pairs (x, y) ordered lexicographically by (degree of
    x, index of x, index of y).  Keys are 2-tuples of the factor keys.
    Differential follows the Koszul rule.
    """
    ring = a.ring
    if ring != b.ring:
        raise ValueError("mixed rings")
    basis = {}
    for ka in a.degrees():
        for kb in b.degrees():
            n = ka + kb
            basis.setdefault(n, [])
            for x in a.basis[ka]:
                for y in b.basis[kb]:
                    basis[n].append((x, y))
    basis = {n: tuple(v) for n, v in basis.items()}
    out = GradedModule(ring, basis, check=False)
    degree_of = {}
    for ka in a.degrees():
        for x in a.basis[ka]:
            degree_of[("a", x)] = ka
    for kb in b.degrees():
        for y in b.basis[kb]:
            degree_of[("b", y)] = kb
    diff = {}
    for n in out.degrees():
        rows = out.dim(n - 1)
        cols = out.dim(n)
        if rows == 0 or cols == 0:
            continue
        m = Matrix(ring, rows, cols)
        for j, (x, y) in enumerate(out.basis[n]):
            ka = degree_of[("a", x)]
            kb = degree_of[("b", y)]
            da = a.diff_matrix(ka)
            ia = a.index(ka, x)
            for i2, x2 in enumerate(a.basis.get(ka - 1, ())):
                c = da.entries[i2][ia]
                if c != 0:
                    r = out.index(n - 1, (x2, y))
                    m.entries[r][j] = ring.add(m.entries[r][j], c)
            db = b.diff_matrix(kb)
            ib = b.index(kb, y)
            sgn = -1 if ka % 2 else 1
            for i2, y2 in enumerate(b.basis.get(kb - 1, ())):
                c = db.entries[i2][ib]
                if c != 0:
                    r = out.index(n - 1, (x, y2))
                    m.entries[r][j] = ring.add(m.entries[r][j], ring.mul(ring.of(sgn), c))
        if not m.is_zero():
            diff[n] = m
    return GradedModule(ring, basis, diff)


def symmetry_iso(a, b):
    """The braiding  a (x) b -> b (x) a,  x (x) y -> (-1)^{|x||y|} y (x) x."""
    ab = tensor(a, b)
    ba = tensor(b, a)
    ring = a.ring
    deg_a = {x: d for d in a.degrees() for x in a.basis[d]}
    deg_b = {y: d for d in b.degrees() for y in b.basis[d]}
    blocks = {}
    for n in ab.degrees():
        m = Matrix(ring, ba.dim(n), ab.dim(n))
        for j, (x, y) in enumerate(ab.basis[n]):
            s = koszul_sign_two(deg_a[x], deg_b[y])
            i = ba.index(n, (y, x))
            m.entries[i][j] = ring.of(s)
        blocks[n] = m
    return Homomorphism(ab, ba, 0, blocks)


class TwistedModule:
    """A graded module together with a degree -1 twist t satisfying
    delta(t) + t^2 = 0, so that (delta + t)^2 = 0."""

    def __init__(self, base, twist):
        self.base = base
        self.twist = twist

    def total(self):
        """The underlying module with total differential delta + t."""
        diff = {}
        for d in self.base.degrees():
            m = self.base.diff_matrix(d) + self.twist.block(d)
            if not m.is_zero():
                diff[d] = m
        return GradedModule(self.base.ring, self.base.basis, diff)


def make_twisted(base, twist):
    """Validate the twist equation delta(t) + t^2 = 0 degree by degree
    and return the :class:`TwistedModule`.  The violation report names
    the first failing degree."""
    if twist.degree != -1:
        raise ValueError("twist must have degree -1")
    dt = hom_differential(twist)
    tt = twist.compose(twist)
    for k in sorted(set(base.degrees()) | set(dt.blocks) | set(tt.blocks)):
        m = dt.block(k) + tt.block(k)
        if not m.is_zero():
            raise TwistEquationViolation(k, "delta(t) + t.t != 0")
    return TwistedModule(base, twist)


def suspend(module, shift):
    """Degree shift: basis of new degree d+shift = old degree d, same
    keys; the differential is multiplied by (-1)^{shift}."""
    ring = module.ring
    basis = {d + shift: keys for d, keys in module.basis.items()}
    sgn = -1 if shift % 2 else 1
    diff = {
        d + shift: m.scale(ring.of(sgn)) for d, m in module.differential.items()
    }
    return GradedModule(ring, basis, diff)


class CellFiltration:
    """Exhaustive increasing filtration of a free module with zero
    differential, recorded as cumulative key sets per stage."""

    def __init__(self, base, stages):
        self.base = base
        self.stages = {lam: frozenset(keys) for lam, keys in stages.items()}

    def stage_of(self, key):
        for lam in sorted(self.stages):
            if key in self.stages[lam]:
                return lam
        raise KeyError(key)


def check_cell_filtration(filtration, twist):
    """Check t(E_lambda) subset E_{lambda-1} for a degree -1 twist on the
    filtered module.  Returns a list of violations (empty = pass)."""
    base = filtration.base
    levels = sorted(filtration.stages)
    for i in range(1, len(levels)):
        if not filtration.stages[levels[i - 1]] <= filtration.stages[levels[i]]:
            raise ValueError("filtration stages are not increasing")
    all_keys = {k for d in base.degrees() for k in base.basis[d]}
    if filtration.stages[levels[-1]] != all_keys:
        raise ValueError("filtration is not exhaustive")
    violations = []
    for d in base.degrees():
        m = twist.block(d)
        if m.is_zero():
            continue
        for j, key in enumerate(base.basis[d]):
            lam = filtration.stage_of(key)
            idx = levels.index(lam)
            allowed = filtration.stages[levels[idx - 1]] if idx > 0 else frozenset()
            for i, key2 in enumerate(base.basis.get(d - 1, ())):
                if m.entries[i][j] != 0 and key2 not in allowed:
                    violations.append((key, key2, d))
    return violations
