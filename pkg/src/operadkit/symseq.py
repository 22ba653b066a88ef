"""Symmetric sequences: arity-graded chain complexes with symmetric
group actions, their composition product over two-level trees, and
coinvariants of finite group actions.

Permutations are tuples of images, 1-based: ``w[i-1] = w(i)``, and all
actions are left actions, ``act(u, act(w, x)) = act(u o w, x)`` with
``(u o w)(i) = u(w(i))``.
"""

from __future__ import annotations

from .dg import GradedModule
from .rings import Matrix
from .treealg import (act_on_key, differential_on_key, key_degree, lc_add,
                      lc_extend)
from .trees import TwoLevelTree, leaf, node, normalize_shape, two_level_trees


# ---------------------------------------------------------------------------
# permutations

def perm_id(n):
    return tuple(range(1, n + 1))


def perm_compose(u, w):
    """(u o w)(i) = u(w(i))."""
    return tuple(u[w[i] - 1] for i in range(len(w)))


def perm_inverse(w):
    inv = [0] * len(w)
    for i, im in enumerate(w):
        inv[im - 1] = i + 1
    return tuple(inv)


def perm_sign(w):
    sign = 1
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            if w[i] > w[j]:
                sign = -sign
    return sign


def adjacent_transposition(n, i):
    """s_i = (i i+1) in Sigma_n, 1 <= i <= n-1."""
    w = list(range(1, n + 1))
    w[i - 1], w[i] = w[i], w[i - 1]
    return tuple(w)


def transposition_word(w):
    """Express w as a product s_{i1} o s_{i2} o ... (bubble sort)."""
    w = list(w)
    word = []
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] > w[i + 1]:
                w[i], w[i + 1] = w[i + 1], w[i]
                word.append(i + 1)
                changed = True
    word.reverse()
    return word


def all_permutations(n):
    from itertools import permutations

    return [tuple(p) for p in permutations(range(1, n + 1))]


# ---------------------------------------------------------------------------

class SymSeq:
    """Arity components (GradedModule each) plus a left Sigma_n action.

    ``act_fn(n, w, key) -> lc`` must be defined at least on adjacent
    transpositions; arbitrary permutations are derived and cached.
    """

    def __init__(self, ring, components, act_fn, name=""):
        self.ring = ring
        self.components = {n: c for n, c in components.items() if c.total_dim()}
        self._act_fn = act_fn
        self.name = name
        self._degree = {}
        for n, comp in self.components.items():
            for d in comp.degrees():
                for k in comp.basis[d]:
                    self._degree[(n, k)] = d
        self._act_cache = {}

    def arities(self):
        return sorted(self.components)

    def component(self, n):
        comp = self.components.get(n)
        if comp is None:
            return GradedModule(self.ring, {})
        return comp

    def dim(self, n):
        return self.component(n).total_dim()

    def degree(self, n, key):
        return self._degree[(n, key)]

    def keys(self, n):
        comp = self.component(n)
        for d in comp.degrees():
            yield from comp.basis[d]

    def diff_lc(self, n, key):
        """Internal differential of one basis key, as an lc."""
        comp = self.component(n)
        d = self.degree(n, key)
        m = comp.diff_matrix(d)
        if m.is_zero():
            return {}
        j = comp.index(d, key)
        out = {}
        for i, k2 in enumerate(comp.basis.get(d - 1, ())):
            c = m.entries[i][j]
            if c != 0:
                out[k2] = c
        return out

    def act(self, n, w, key):
        if w == perm_id(n):
            return {key: self.ring.one()}
        cached = self._act_cache.get((n, w, key))
        if cached is not None:
            return dict(cached)
        out = self._act_fn(n, w, key)
        if out is None:
            # derive from adjacent transpositions: w = s_{i1} o s_{i2} o ...
            word = transposition_word(w)
            out = {key: self.ring.one()}
            for i in reversed(word):
                s = adjacent_transposition(n, i)
                nxt = {}
                for k, c in out.items():
                    lc_extend(self.ring, nxt, self._act_fn(n, s, k), c)
                out = nxt
        self._act_cache[(n, w, key)] = dict(out)
        return out

    def act_lc(self, n, w, lc):
        out = {}
        for k, c in lc.items():
            lc_extend(self.ring, out, self.act(n, w, k), c)
        return out

    def action_matrix(self, n, w):
        comp = self.component(n)
        blocks = {}
        for d in comp.degrees():
            m = Matrix(self.ring, comp.dim(d), comp.dim(d))
            for j, k in enumerate(comp.basis[d]):
                for k2, c in self.act(n, w, k).items():
                    m.entries[comp.index(d, k2)][j] = c
            blocks[d] = m
        return blocks

    def check_action(self, n, perms=None):
        """Left-action law act(u)act(w) = act(uw) and compatibility with
        the differential; returns a list of failures."""
        failures = []
        perms = perms or all_permutations(n)
        for key in self.keys(n):
            for u in perms:
                for w in perms:
                    via = {}
                    for k, c in self.act(n, w, key).items():
                        lc_extend(self.ring, via, self.act(n, u, k), c)
                    direct = self.act(n, perm_compose(u, w), key)
                    if via != direct:
                        failures.append(("composition", n, u, w, key))
            for w in perms:
                a = {}
                for k, c in self.act(n, w, key).items():
                    lc_extend(self.ring, a, self.diff_lc(n, k), c)
                b = {}
                for k, c in self.diff_lc(n, key).items():
                    lc_extend(self.ring, b, self.act(n, w, k), c)
                if a != b:
                    failures.append(("equivariant-differential", n, w, key))
        return failures


def symseq_from_matrices(ring, components, generator_matrices, name=""):
    """Build a SymSeq whose action is given by matrices for the adjacent
    transpositions: generator_matrices[(n, i)] = blocks dict degree->Matrix
    for s_i acting on the arity-n component."""

    def act_fn(n, w, key):
        word = transposition_word(w)
        if len(word) != 1:
            return None  # let SymSeq.act derive it
        i = word[0]
        comp = components[n]
        d = None
        for dd in comp.degrees():
            if key in comp.basis[dd]:
                d = dd
                break
        blocks = generator_matrices[(n, i)]
        m = blocks[d]
        j = comp.index(d, key)
        out = {}
        for r, k2 in enumerate(comp.basis[d]):
            if m.entries[r][j] != 0:
                out[k2] = m.entries[r][j]
        return out

    return SymSeq(ring, components, act_fn, name)


# ---------------------------------------------------------------------------
# composition product over strict two-level trees

def two_level_shape(tl):
    """Shape of a strict two-level tree: root node whose children are
    the block corollas."""
    return normalize_shape(
        node([node([leaf(x) for x in b]) for b in tl.blocks])
    )


class CompositeSeq:
    """The composition product M o N truncated at an arity bound.

    Basis keys are ``(shape, (m_label, n_label_1, ..., n_label_k))`` in
    root-first DFS order over strict two-level shapes; the level-1
    blocks are ordered by minimal input.  Requires N(0) = 0 so that the
    components stay finite.
    """

    def __init__(self, m, n, arity_bound):
        if m.ring != n.ring:
            raise ValueError("mixed rings")
        if n.dim(0):
            raise ValueError("composition requires N(0) = 0")
        self.ring = m.ring
        self.m = m
        self.n = n
        self.arity_bound = arity_bound
        self._keys = {}
        self._components = {}
        for ar in range(0, arity_bound + 1):
            self._keys[ar] = self._enumerate(ar)

    def _enumerate(self, ar):
        out = []
        if ar == 0:
            # no blocks: root in M(0) (allowed for M)
            for mk in self.m.keys(0):
                out.append((("node", ()), (mk,)))
            return out
        for tl in two_level_trees(tuple(range(1, ar + 1))):
            k = len(tl.blocks)
            if self.m.dim(k) == 0:
                continue
            if any(self.n.dim(len(b)) == 0 for b in tl.blocks):
                continue
            shape = two_level_shape(tl)
            label_sets = [list(self.m.keys(k))] + [
                list(self.n.keys(len(b))) for b in tl.blocks
            ]

            def prod(i, chosen):
                if i == len(label_sets):
                    out.append((shape, tuple(chosen)))
                    return
                for lab in label_sets[i]:
                    prod(i + 1, chosen + [lab])

            prod(0, [])
        return out

    def keys(self, ar):
        return self._keys.get(ar, [])

    def deg_of(self, i, label, shape):
        # DFS index 0 = root (M), others = N labels
        if i == 0:
            return self.m.degree(len(shape[1]), label)
        blocks = shape[1]
        return self.n.degree(len(blocks[i - 1][1]), label)

    def key_degree(self, key):
        shape, labels = key
        return sum(self.deg_of(i, lab, shape) for i, lab in enumerate(labels))

    def component(self, ar):
        comp = self._components.get(ar)
        if comp is not None:
            return comp
        by_deg = {}
        for key in self.keys(ar):
            by_deg.setdefault(self.key_degree(key), []).append(key)
        basis = {
            d: tuple(sorted(ks, key=_key_sort))
            for d, ks in by_deg.items()
        }
        mod = GradedModule(self.ring, basis, check=False)
        diff = {}
        for d in mod.degrees():
            rows, cols = mod.dim(d - 1), mod.dim(d)
            if rows == 0 or cols == 0:
                continue
            mat = Matrix(self.ring, rows, cols)
            for j, key in enumerate(mod.basis[d]):
                for key2, c in self.diff_lc(ar, key).items():
                    mat.entries[mod.index(d - 1, key2)][j] = c
            if not mat.is_zero():
                diff[d] = mat
        comp = GradedModule(self.ring, basis, diff)
        self._components[ar] = comp
        return comp

    def diff_lc(self, ar, key):
        shape, labels = key

        def vertex_diff(i, lab):
            if i == 0:
                return self.m.diff_lc(len(shape[1]), lab)
            return self.n.diff_lc(len(shape[1][i - 1][1]), lab)

        return differential_on_key(
            self.ring, shape, labels,
            lambda i, lab: self.deg_of(i, lab, shape), vertex_diff,
        )

    def act(self, ar, w, key):
        shape, labels = key

        def vertex_act(i, arity, u, lab):
            if i == 0:
                return self.m.act(arity, u, lab)
            return self.n.act(arity, u, lab)

        return act_on_key(
            self.ring, shape, labels, w,
            lambda i, lab: self.deg_of(i, lab, shape), vertex_act,
        )

    def as_symseq(self, name=""):
        comps = {ar: self.component(ar) for ar in self._keys}
        return SymSeq(self.ring, comps, lambda n_, w, k: self.act(n_, w, k), name)


def compose(m, n, arity_bound):
    return CompositeSeq(m, n, arity_bound)


class CompositeSplitting:
    """Partition of the (P o P)(n) basis into the four unit/reduced
    summands, with the tautological inclusions."""

    def __init__(self, composite, arity, summands):
        self.composite = composite
        self.arity = arity
        self.summands = summands  # name -> list of composite keys

    def dims(self):
        return {name: len(keys) for name, keys in self.summands.items()}

    def include(self, name, key):
        """Inclusion of a summand basis key into the composite (identity
        on keys by construction)."""
        if key not in self.summands[name]:
            raise KeyError((name, key))
        return {key: self.composite.ring.one()}


def decompose_composite(p, arity):
    """Split (P o P)(arity) for a connected P (P(0) = 0, P(1) = unit
    line) by which vertices carry the unit:

    - ``unit-pair``: unit over unit (arity 1 only);
    - ``reduced-root``: reduced root, every top a unit;
    - ``reduced-top``: unit root, one reduced top;
    - ``two-level``: reduced root and at least one reduced top.

    The summand dims always add up to dim (P o P)(arity).
    """
    if p.dim(0):
        raise ValueError("decompose_composite needs P(0) = 0")
    if p.dim(1) != 1:
        raise ValueError("decompose_composite needs P(1) of rank one")
    unit = next(iter(p.keys(1)))
    composite = CompositeSeq(p, p, arity)
    summands = {"unit-pair": [], "reduced-root": [],
                "reduced-top": [], "two-level": []}
    for key in composite.keys(arity):
        shape, labels = key
        blocks = shape[1]
        root = labels[0]
        root_is_unit = len(blocks) == 1 and root == unit
        tops_reduced = [
            labels[i + 1] for i in range(len(blocks))
            if not (len(blocks[i][1]) == 1 and labels[i + 1] == unit)
        ]
        if root_is_unit and not tops_reduced:
            summands["unit-pair"].append(key)
        elif root_is_unit:
            summands["reduced-top"].append(key)
        elif not tops_reduced:
            summands["reduced-root"].append(key)
        else:
            summands["two-level"].append(key)
    return CompositeSplitting(composite, arity, summands)


def _key_sort(key):
    shape, labels = key
    from .trees import shape_encoding

    return (shape_encoding(shape), repr(labels))


# ---------------------------------------------------------------------------
# coinvariants

class CoinvariantsResult:
    def __init__(self, quotient, projection_fn, torsion):
        self.quotient = quotient          # GradedModule: the free part
        self.projection = projection_fn   # key -> lc over quotient keys
        self.torsion = torsion            # dict degree -> invariant factors

    def project_lc(self, ring, lc):
        out = {}
        for k, c in lc.items():
            lc_extend(ring, out, self.projection(k), c)
        return out


def coinvariants(ring, module, n, act):
    """Coinvariants of a Sigma_n action on a degreewise free module.

    ``act(w, key) -> lc``.  When the action permutes basis vectors up to
    sign, orbits are identified directly: a free orbit contributes one
    basis vector (its minimal representative), an orbit on which some
    group element reverses sign contributes 2-torsion over Z, nothing
    over a field of odd characteristic, and an ordinary generator in
    characteristic 2.  Non-monomial actions fall back to cokernel
    linear algebra (fields only; a non-free integral quotient raises).
    """
    gens = [adjacent_transposition(n, i) for i in range(1, n)] if n > 1 else []
    monomial = True
    for d in module.degrees():
        for k in module.basis[d]:
            for s in gens:
                img = act(s, k)
                if len(img) > 1:
                    monomial = False
                elif img:
                    ((k2, c),) = img.items()
                    if not ring.is_unit(c):
                        monomial = False
        if not monomial:
            break
    if monomial:
        return _monomial_coinvariants(ring, module, gens, act)
    if not ring.is_field:
        raise ValueError(
            "integral coinvariants of a non-monomial action are not "
            "supported (quotient may be non-free)"
        )
    return _cokernel_coinvariants(ring, module, gens, act)


def _monomial_coinvariants(ring, module, gens, act):
    reps = {}          # key -> (rep key, sign relating key ~ sign * rep)
    torsion_reps = set()
    quotient_basis = {}
    for d in module.degrees():
        keys = list(module.basis[d])
        seen = set()
        for start in keys:
            if start in seen:
                continue
            orbit = {start: ring.one()}
            frontier = [start]
            negated = False
            while frontier:
                k = frontier.pop()
                for s in gens:
                    for k2, c in act(s, k).items():
                        val = ring.mul(orbit[k], c)
                        if k2 in orbit:
                            if orbit[k2] != val:
                                negated = True
                        else:
                            orbit[k2] = val
                            frontier.append(k2)
            rep = min(orbit, key=lambda kk: _orbit_sort(kk))
            for k, c in orbit.items():
                seen.add(k)
                # k ~ (c / orbit[rep]) * rep ; signs are units
                rel = ring.mul(c, ring.inv(orbit[rep]))
                reps[k] = (rep, rel)
            if negated:
                if ring.characteristic == 2:
                    quotient_basis.setdefault(d, []).append(rep)
                elif ring.is_field:
                    for k in orbit:
                        reps[k] = (rep, ring.zero())
                else:
                    torsion_reps.add((d, rep))
                    for k in orbit:
                        reps[k] = (rep, ring.zero())
            else:
                quotient_basis.setdefault(d, []).append(rep)

    basis = {d: tuple(ks) for d, ks in quotient_basis.items()}
    quotient = GradedModule(ring, basis, check=False)

    def projection(key):
        rep, rel = reps[key]
        if rel == 0:
            return {}
        return {rep: rel}

    torsion = {}
    for d, _rep in sorted(torsion_reps, key=lambda t: (t[0], _orbit_sort(t[1]))):
        torsion.setdefault(d, []).append(2)
    return CoinvariantsResult(quotient, projection, torsion)


def _orbit_sort(key):
    return repr(key)


def _cokernel_coinvariants(ring, module, gens, act):
    from .rings import rank_and_kernel

    quotient_basis = {}
    proj_rows = {}
    for d in module.degrees():
        keys = list(module.basis[d])
        idx = {k: i for i, k in enumerate(keys)}
        relations = []
        for k in keys:
            for s in gens:
                row = [ring.zero()] * len(keys)
                row[idx[k]] = ring.add(row[idx[k]], ring.neg(ring.one()))
                for k2, c in act(s, k).items():
                    row[idx[k2]] = ring.add(row[idx[k2]], c)
                if any(x != 0 for x in row):
                    relations.append(row)
        if not relations:
            quotient_basis[d] = tuple(keys)
            proj_rows[d] = {k: {k: ring.one()} for k in keys}
            continue
        m = Matrix(ring, len(relations), len(keys), relations)
        from .rings import _rref

        red, pivots = _rref(m)
        free_cols = [c for c in range(len(keys)) if c not in pivots]
        quotient_basis[d] = tuple(keys[c] for c in free_cols)
        rows = {}
        for c in free_cols:
            rows[keys[c]] = {keys[c]: ring.one()}
        for r, pc in enumerate(pivots):
            lc = {}
            for c in free_cols:
                v = red.entries[r][c]
                if v != 0:
                    lc[keys[c]] = ring.neg(v)
            rows[keys[pc]] = lc
        proj_rows[d] = rows

    quotient = GradedModule(ring, {d: b for d, b in quotient_basis.items() if b}, check=False)
    deg_of = {k: d for d, ks in quotient_basis.items() for k in ks}
    all_rows = {}
    for d, rows in proj_rows.items():
        all_rows.update(rows)

    def projection(key):
        return dict(all_rows[key])

    return CoinvariantsResult(quotient, projection, {})
