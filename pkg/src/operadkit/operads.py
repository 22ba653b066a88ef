"""Operads through partial composites, free operads on tree classes,
derivations, quasi-free operads and their morphisms.

Conventions (shared across the package):

* partial composite ``p o_e q`` substitutes q into slot e of p
  (1-based); inputs of q take positions e..e+s-1, later inputs of p
  shift up by s-1;
* the symmetric groups act on the left;
* tree tensors order their factors root-first depth-first, and every
  sign is the Koszul sign of the factor shuffle that the operation
  performs.
"""

from __future__ import annotations

from .dg import GradedModule
from .rings import Matrix
from .symseq import SymSeq, all_permutations, perm_id
from .treealg import (act_on_key, blow_up_key, differential_on_key,
                      graft_keys, lc_extend, lc_scale)
from .trees import enumerate_shapes, leaf, node, normalize_shape, shape_arities
from .trees import shape_encoding, shape_vertex_input_lists


class CheckReport:
    """A list of located failures; empty means the property holds."""

    def __init__(self, title):
        self.title = title
        self.failures = []

    def fail(self, *witness):
        self.failures.append(witness)

    @property
    def ok(self):
        return not self.failures

    def __str__(self):
        if self.ok:
            return f"{self.title}: ok"
        lines = [f"{self.title}: {len(self.failures)} failure(s)"]
        for w in self.failures[:20]:
            lines.append("  " + ", ".join(repr(x) for x in w))
        if len(self.failures) > 20:
            lines.append(f"  ... and {len(self.failures) - 20} more")
        return "\n".join(lines)

    def __repr__(self):
        return f"<CheckReport {self.title}: {'ok' if self.ok else 'FAIL'}>"


class Operad:
    """An operad presented by a SymSeq plus partial composites.

    ``compose_fn(r, s, e, kp, kq) -> lc`` gives ``kp o_e kq`` on basis
    keys; bilinear extension and caching live here.
    """

    def __init__(self, seq, compose_fn, unit_key=None, name="",
                 augmented=True, unit_lc=None):
        self.seq = seq
        self.ring = seq.ring
        self._compose_fn = compose_fn
        self.unit_key = unit_key
        if unit_lc is None:
            if unit_key is None:
                raise ValueError("need unit_key or unit_lc")
            unit_lc = {unit_key: seq.ring.one()}
        self.unit_lc = dict(unit_lc)
        self.name = name
        self.augmented = augmented
        self._cache = {}

    # -- underlying symmetric sequence ------------------------------------
    def arities(self):
        return self.seq.arities()

    def component(self, n):
        return self.seq.component(n)

    def dim(self, n):
        return self.seq.dim(n)

    def keys(self, n):
        return self.seq.keys(n)

    def degree(self, n, key):
        return self.seq.degree(n, key)

    def act(self, n, w, key):
        return self.seq.act(n, w, key)

    def act_lc(self, n, w, lc):
        return self.seq.act_lc(n, w, lc)

    def diff_lc(self, n, key):
        return self.seq.diff_lc(n, key)

    def diff_of_lc(self, n, lc):
        out = {}
        for k, c in lc.items():
            lc_extend(self.ring, out, self.diff_lc(n, k), c)
        return out

    # -- augmentation ------------------------------------------------------
    def is_unit_key(self, key):
        return key == self.unit_key

    def reduced_keys(self, n):
        for k in self.keys(n):
            if not (n == 1 and self.is_unit_key(k)):
                yield k

    def aug_coefficient(self, n, lc):
        """Coefficient of the operadic unit (zero away from arity 1)."""
        if n != 1:
            return self.ring.zero()
        return lc.get(self.unit_key, self.ring.zero())

    # -- composites ----------------------------------------------------------
    def compose_keys(self, r, s, e, kp, kq):
        if not 1 <= e <= r:
            raise ValueError(f"slot {e} out of range for arity {r}")
        ck = (r, s, e, kp, kq)
        got = self._cache.get(ck)
        if got is None:
            got = self._compose_fn(r, s, e, kp, kq)
            self._cache[ck] = got
        return dict(got)

    def compose_lc(self, r, s, e, lcp, lcq):
        out = {}
        for kp, cp in lcp.items():
            for kq, cq in lcq.items():
                lc_extend(self.ring, out, self.compose_keys(r, s, e, kp, kq),
                          self.ring.mul(cp, cq))
        return out


# ---------------------------------------------------------------------------
# axiom checking

def block_permutation(w, e, s):
    """The relabeling W with (w.p) o_{w(e)} q = W.(p o_e q), for
    w in Sigma_r, q of arity s."""
    r = len(w)
    m = w[e - 1]

    def phi(j):
        return j if j < m else j + s - 1

    out = []
    for i in range(1, e):
        out.append(phi(w[i - 1]))
    out.extend(range(m, m + s))
    for i in range(e + 1, r + 1):
        out.append(phi(w[i - 1]))
    return tuple(out)


def shifted_permutation(v, e, r):
    """The relabeling S with p o_e (v.q) = S.(p o_e q), v in Sigma_s."""
    s = len(v)
    out = list(range(1, r + s))
    for t in range(s):
        out[e - 1 + t] = e - 1 + v[t]
    return tuple(out)


def check_operad_axioms(op, arity_bound, rng=None, sample=None):
    """Unit laws, equivariance in both factors, and the linear and
    ramified three-vertex associativity patterns, as exact identities
    on basis elements of arities within the bound."""
    report = CheckReport(f"operad axioms for {op.name or 'operad'}")
    ring = op.ring
    one = ring.one()
    unit = op.unit_lc

    def keys_of(n):
        ks = list(op.keys(n))
        if sample is not None and rng is not None and len(ks) > sample:
            ks = rng.sample(ks, sample)
        return ks

    arities = [n for n in op.arities() if n <= arity_bound]

    # unit laws
    for r in arities:
        for kp in keys_of(r):
            for e in range(1, r + 1):
                got = op.compose_lc(r, 1, e, {kp: one}, unit)
                if got != {kp: one}:
                    report.fail("unit-right", r, e, kp, got)
            got = op.compose_lc(1, r, 1, unit, {kp: one})
            if got != {kp: one}:
                report.fail("unit-left", r, kp, got)

    # equivariance
    for r in arities:
        for s in arities:
            if r + s - 1 > arity_bound or r < 1 or s < 1:
                continue
            perms_r = all_permutations(r)
            perms_s = all_permutations(s)
            if sample is not None and rng is not None:
                perms_r = rng.sample(perms_r, min(sample, len(perms_r)))
                perms_s = rng.sample(perms_s, min(sample, len(perms_s)))
            for kp in keys_of(r):
                for kq in keys_of(s):
                    for e in range(1, r + 1):
                        base = op.compose_keys(r, s, e, kp, kq)
                        for w in perms_r:
                            lhs = {}
                            for k, c in op.act(r, w, kp).items():
                                lc_extend(ring, lhs,
                                          op.compose_keys(r, s, w[e - 1], k, kq), c)
                            rhs = op.act_lc(r + s - 1,
                                            block_permutation(w, e, s), base)
                            if lhs != rhs:
                                report.fail("equivariance-left", r, s, e, w, kp, kq)
                        for v in perms_s:
                            lhs = {}
                            for k, c in op.act(s, v, kq).items():
                                lc_extend(ring, lhs,
                                          op.compose_keys(r, s, e, kp, k), c)
                            rhs = op.act_lc(r + s - 1,
                                            shifted_permutation(v, e, r), base)
                            if lhs != rhs:
                                report.fail("equivariance-right", r, s, e, v, kp, kq)

    # associativity, linear pattern: (p o_e q) o_{e-1+f} x = p o_e (q o_f x)
    for r in arities:
        for s in arities:
            for t in arities:
                if r + s + t - 2 > arity_bound:
                    continue
                for kp in keys_of(r):
                    for kq in keys_of(s):
                        for kx in keys_of(t):
                            dq = op.degree(s, kq)
                            dx = op.degree(t, kx)
                            for e in range(1, r + 1):
                                pq = op.compose_keys(r, s, e, kp, kq)
                                for f in range(1, s + 1):
                                    lhs = {}
                                    for k, c in pq.items():
                                        lc_extend(
                                            ring, lhs,
                                            op.compose_keys(r + s - 1, t,
                                                            e - 1 + f, k, kx), c)
                                    qx = op.compose_keys(s, t, f, kq, kx)
                                    rhs = {}
                                    for k, c in qx.items():
                                        lc_extend(
                                            ring, rhs,
                                            op.compose_keys(r, s + t - 1, e,
                                                            kp, k), c)
                                    if lhs != rhs:
                                        report.fail("associativity-linear",
                                                    (r, s, t), (e, f),
                                                    kp, kq, kx)
                                # ramified: slots e < f of p
                                for f in range(e + 1, r + 1):
                                    lhs = {}
                                    for k, c in pq.items():
                                        lc_extend(
                                            ring, lhs,
                                            op.compose_keys(r + s - 1, t,
                                                            f + s - 1, k, kx), c)
                                    pf = op.compose_keys(r, t, f, kp, kx)
                                    rhs = {}
                                    for k, c in pf.items():
                                        lc_extend(
                                            ring, rhs,
                                            op.compose_keys(r + t - 1, s, e,
                                                            k, kq), c)
                                    sign = -1 if (dq % 2 and dx % 2) else 1
                                    rhs = lc_scale(ring, rhs, ring.of(sign))
                                    if lhs != rhs:
                                        report.fail("associativity-ramified",
                                                    (r, s, t), (e, f),
                                                    kp, kq, kx)
    return report


# ---------------------------------------------------------------------------
# tree composition products

def tree_composite(op, tree, labels):
    """Evaluate the composition product over a tree: one operad element
    per vertex (root-first DFS order), grafted along the tree.

    ``tree`` is a CanonicalTree or a shape; its leaves must be labeled
    1..n.  Returns an lc over the arity-n component.
    """
    shape = getattr(tree, "shape", tree)
    ring = op.ring
    if shape[0] == "leaf":
        if labels:
            raise ValueError("vertex-free tree takes no labels")
        return dict(op.unit_lc)
    slots = shape_vertex_input_lists(shape)
    if len(labels) != len(slots):
        raise ValueError(f"expected {len(slots)} labels, got {len(labels)}")

    cursor = [0]

    def rec(s):
        # returns (lc over op keys of arity len(beta), beta: leaf labels
        # of the subtree in slot-traversal order)
        i = cursor[0]
        cursor[0] += 1
        lab = labels[i]
        k = len(s[1])
        acc = {lab: ring.one()}
        beta = []
        arity = k
        pos = 0  # slots of acc already produced by processed children
        for child in s[1]:
            if child[0] == "leaf":
                beta.append(child[1])
                pos += 1
                continue
            sub, sub_beta = rec(child)
            w = len(sub_beta)
            nxt = {}
            for kp, cp in acc.items():
                for kq, cq in sub.items():
                    lc_extend(ring, nxt,
                              op.compose_keys(arity, w, pos + 1, kp, kq),
                              ring.mul(cp, cq))
            acc = nxt
            beta.extend(sub_beta)
            arity += w - 1
            pos += w
        return acc, beta

    lc, beta = rec(shape)
    n = len(beta)
    if sorted(beta) != list(range(1, n + 1)):
        raise ValueError(f"tree leaves must be labeled 1..{n}, got {beta}")
    w = tuple(beta)
    if w == perm_id(n):
        return lc
    return op.act_lc(n, w, lc)


def composite_key_evaluation(op, ckey):
    """Composition product on a two-level basis key
    ``(shape, (root_label, block_labels...))`` from symseq.compose."""
    shape, labels = ckey
    return tree_composite(op, shape, labels)


# ---------------------------------------------------------------------------
# free operads

class FreeOperad(Operad):
    """The free operad on a reduced SymSeq, truncated at an arity bound.

    Basis keys are ``(shape, labels)``: an isomorphism-class tree shape
    with leaves 1..n and one generator key per vertex in root-first DFS
    order.  The unit is the vertex-free tree.
    """

    def __init__(self, m, arity_bound, name=""):
        if m.dim(0):
            raise ValueError("free operad needs M(0) = 0: arity components "
                             "would be infinite-dimensional")
        if m.dim(1):
            raise ValueError("free operad needs M(1) = 0: unary chains make "
                             "arity components infinite-dimensional")
        self.generators = m
        self.arity_bound = arity_bound
        ring = m.ring
        support = sorted(m.arities())
        unit_key = (("leaf", 1), ())
        components = {}
        key_lists = {1: [unit_key]}
        for n in range(2, arity_bound + 1):
            keys = []
            for shape in enumerate_shapes(tuple(range(1, n + 1)),
                                          allowed_arities=support):
                if shape[0] == "leaf":
                    continue
                arities = shape_arities(shape)
                choices = [list(m.keys(a)) for a in arities]
                if any(not c for c in choices):
                    continue

                def fill(i, chosen):
                    if i == len(choices):
                        keys.append((shape, tuple(chosen)))
                        return
                    for lab in choices[i]:
                        fill(i + 1, chosen + [lab])

                fill(0, [])
            key_lists[n] = sorted(keys, key=_free_key_sort)
        for n, keys in key_lists.items():
            by_deg = {}
            for key in keys:
                by_deg.setdefault(self._key_degree_raw(m, key), []).append(key)
            basis = {d: tuple(ks) for d, ks in by_deg.items()}
            mod = GradedModule(ring, basis, check=False)
            diff = {}
            for d in mod.degrees():
                if mod.dim(d - 1) == 0 or mod.dim(d) == 0:
                    continue
                mat = Matrix(ring, mod.dim(d - 1), mod.dim(d))
                nonzero = False
                for j, key in enumerate(mod.basis[d]):
                    for k2, c in self._internal_diff(m, key).items():
                        mat.entries[mod.index(d - 1, k2)][j] = c
                        nonzero = True
                if nonzero:
                    diff[d] = mat
            components[n] = GradedModule(ring, basis, diff)

        def act_fn(n, w, key):
            shape, labels = key
            if shape[0] == "leaf":
                return {key: ring.one()}
            arities = shape_arities(shape)

            def vertex_act(i, arity, u, lab):
                return m.act(arity, u, lab)

            return act_on_key(ring, shape, labels, w,
                              lambda i, lab: m.degree(arities[i], lab),
                              vertex_act)

        seq = SymSeq(ring, components, act_fn, name=name or "F(M)")

        def compose_fn(r, s, e, kp, kq):
            if kp == unit_key:
                return {kq: ring.one()}
            if kq == unit_key:
                return {kp: ring.one()}
            return graft_keys(ring, kp, r, e, kq, s,
                              self.label_degrees(kp), self.label_degrees(kq))

        super().__init__(seq, compose_fn, unit_key, name=name or "F(M)")

    @staticmethod
    def _key_degree_raw(m, key):
        shape, labels = key
        if shape[0] == "leaf":
            return 0
        arities = shape_arities(shape)
        return sum(m.degree(a, lab) for a, lab in zip(arities, labels))

    def _internal_diff(self, m, key):
        shape, labels = key
        if shape[0] == "leaf":
            return {}
        arities = shape_arities(shape)
        return differential_on_key(
            self.ring if hasattr(self, "ring") else m.ring, shape, labels,
            lambda i, lab: m.degree(arities[i], lab),
            lambda i, lab: m.diff_lc(arities[i], lab))

    def diff_lc(self, n, key):
        """Vertexwise internal differential, straight off the tree."""
        return self._internal_diff(self.generators, key)

    def label_degrees(self, key):
        shape, labels = key
        if shape[0] == "leaf":
            return ()
        arities = shape_arities(shape)
        return tuple(self.generators.degree(a, lab)
                     for a, lab in zip(arities, labels))

    def weight(self, key):
        """Number of vertices (generator factors)."""
        return len(key[1])

    def weight_keys(self, n, r):
        """Basis of the vertex-count-r stage F_r(M) in arity n."""
        return [k for k in self.keys(n) if self.weight(k) == r]

    def eta_key(self, n, genkey):
        """The corolla: image of a generator under M -> F(M)."""
        shape = normalize_shape(node([leaf(i) for i in range(1, n + 1)]))
        return (shape, (genkey,))

    def corolla_generator(self, key):
        """Inverse of eta_key on corollas, None on other keys."""
        shape, labels = key
        if shape[0] == "node" and all(c[0] == "leaf" for c in shape[1]) \
                and len(labels) == 1:
            return labels[0]
        return None


def _free_key_sort(key):
    shape, labels = key
    return (shape_encoding(shape), repr(labels))


def free_operad(m, arity_bound, name=""):
    return FreeOperad(m, arity_bound, name=name)


# ---------------------------------------------------------------------------
# derivations and quasi-free operads

class OperadDerivation:
    """The derivation of a free operad determined by a generator map.

    ``alpha_fn(arity, genkey) -> lc`` over free-operad keys of the same
    arity, homogeneous of the given degree.  The derivation replaces
    one vertex at a time by its image, blown up into the tree; applying
    the degree-d operator at vertex i costs the Koszul sign of moving
    it past the earlier factors.
    """

    def __init__(self, free_op, alpha_fn, degree):
        self.free = free_op
        self.alpha_fn = alpha_fn
        self.degree = degree

    def apply_key(self, n, key):
        ring = self.free.ring
        shape, labels = key
        if shape[0] == "leaf":
            return {}
        arities = shape_arities(shape)
        degs = self.free.label_degrees(key)

        def deg_of(i, lab):
            return degs[i]

        out = {}
        prefix = 0
        for i, lab in enumerate(labels):
            img = self.alpha_fn(arities[i], lab)
            if img:
                sign = ring.of(-1 if (self.degree % 2 and prefix % 2) else 1)
                for ikey, c in img.items():
                    blown = blow_up_key(ring, shape, labels, i, ikey, deg_of,
                                        self.free.label_degrees(ikey))
                    lc_extend(ring, out, blown, ring.mul(sign, c))
            prefix += degs[i]
        return out

    def apply_lc(self, n, lc):
        ring = self.free.ring
        out = {}
        for k, c in lc.items():
            lc_extend(ring, out, self.apply_key(n, k), c)
        return out


def derivation_from_generator_map(free_op, alpha_fn, degree):
    return OperadDerivation(free_op, alpha_fn, degree)


class QuasiFreeOperad(Operad):
    """A free operad with differential twisted by a degree -1 generator
    map alpha; the total differential is internal + the alpha-derivation."""

    def __init__(self, free_op, alpha_fn, name=""):
        self.free = free_op
        self.alpha_fn = alpha_fn
        self.derivation = OperadDerivation(free_op, alpha_fn, -1)
        super().__init__(free_op.seq, free_op._compose_fn, free_op.unit_key,
                         name=name or f"({free_op.name}, twisted)")
        self._total = {}
        self._diff_cache = {}

    def diff_lc(self, n, key):
        got = self._diff_cache.get((n, key))
        if got is None:
            ring = self.ring
            got = dict(self.free.diff_lc(n, key))
            lc_extend(ring, got, self.derivation.apply_key(n, key),
                      ring.one())
            self._diff_cache[(n, key)] = got
        return dict(got)

    def component(self, n):
        """The arity component carrying the *total* differential."""
        got = self._total.get(n)
        if got is not None:
            return got
        base = self.free.component(n)
        diff = {}
        for d in base.degrees():
            rows = base.dim(d - 1)
            if rows == 0 or base.dim(d) == 0:
                continue
            mat = Matrix(self.ring, rows, base.dim(d))
            nz = False
            for j, key in enumerate(base.basis[d]):
                for k2, c in self.diff_lc(n, key).items():
                    mat.entries[base.index(d - 1, k2)][j] = c
                    nz = True
            if nz:
                diff[d] = mat
        mod = GradedModule(self.ring, dict(base.basis), diff, check=False)
        self._total[n] = mod
        return mod

    def weight(self, key):
        return self.free.weight(key)

    def generators(self):
        return self.free.generators


def check_quasi_free(q, arity_bound):
    """The twisting equation on generators, and d_total^2 = 0 on every
    basis key, for arities within the bound; both must agree."""
    report = CheckReport(f"quasi-free structure of {q.name}")
    ring = q.ring
    m = q.free.generators
    for n in sorted(a for a in m.arities() if a <= arity_bound):
        for g in m.keys(n):
            img = q.alpha_fn(n, g)
            resid = {}
            for k, c in img.items():
                lc_extend(ring, resid, q.free.diff_lc(n, k), c)   # d_F(alpha g)
            for k, c in m.diff_lc(n, g).items():
                lc_extend(ring, resid, q.alpha_fn(n, k), c)       # alpha(d_M g)
            for k, c in img.items():
                lc_extend(ring, resid, q.derivation.apply_key(n, k), c)
            if resid:
                report.fail("twisting-equation", n, g, resid)
    for n in sorted(a for a in q.arities() if a <= arity_bound):
        for key in q.keys(n):
            resid = q.diff_of_lc(n, q.diff_lc(n, key))
            if resid:
                report.fail("square-zero", n, key, resid)
    return report


class MorphismEquationViolation(Exception):
    def __init__(self, arity, genkey, residual):
        self.arity = arity
        self.genkey = genkey
        self.residual = residual
        super().__init__(
            f"generator map fails the morphism equation at arity {arity}, "
            f"generator {genkey!r}: residual {residual!r}")


class OperadMorphism:
    """Morphism from a (quasi-)free operad determined by generator images;
    a tree class maps to the tree composite of the vertexwise images."""

    def __init__(self, source, target, f_fn):
        self.source = source        # FreeOperad or QuasiFreeOperad
        self.target = target
        self.f_fn = f_fn

    def apply_key(self, n, key):
        ring = self.target.ring
        shape, labels = key
        if shape[0] == "leaf":
            return dict(self.target.unit_lc)
        arities = shape_arities(shape)
        images = [self.f_fn(a, lab) for a, lab in zip(arities, labels)]
        out = {}

        def expand(i, chosen, coeff):
            if i == len(images):
                lc_extend(ring, out,
                          tree_composite(self.target, shape, chosen), coeff)
                return
            for k, c in images[i].items():
                expand(i + 1, chosen + [k], ring.mul(coeff, c))

        expand(0, [], ring.one())
        return out

    def apply_lc(self, n, lc):
        ring = self.target.ring
        out = {}
        for k, c in lc.items():
            lc_extend(ring, out, self.apply_key(n, k), c)
        return out


def quasi_free_morphism(q, target, f_fn, arity_bound=None):
    """Extend a degree-0 generator map to an operad morphism; raises
    MorphismEquationViolation unless d(f) = phi_f . alpha on generators."""
    if arity_bound is None:
        arity_bound = getattr(q.free, "arity_bound", 0) if hasattr(q, "free") \
            else q.arity_bound
    free = q.free if hasattr(q, "free") else q
    alpha_fn = getattr(q, "alpha_fn", None)
    m = free.generators
    phi = OperadMorphism(q, target, f_fn)
    ring = target.ring
    for n in sorted(a for a in m.arities() if a <= arity_bound):
        for g in m.keys(n):
            resid = {}
            for k, c in f_fn(n, g).items():
                lc_extend(ring, resid, target.diff_lc(n, k), c)
            for k, c in m.diff_lc(n, g).items():
                lc_extend(ring, resid, f_fn(n, k), ring.neg(c))
            if alpha_fn is not None:
                for k, c in alpha_fn(n, g).items():
                    lc_extend(ring, resid, phi.apply_key(n, k), ring.neg(c))
            if resid:
                raise MorphismEquationViolation(n, g, resid)
    return phi


def quasi_free_filtration(q, r):
    """The sub-quasi-free-operad on generators of arity <= r; checks
    that alpha lands in trees on generators of arity <= r-1."""
    m = q.free.generators
    ring = q.ring
    sub_components = {n: m.component(n) for n in m.arities() if n <= r}
    seq = SymSeq(ring, sub_components,
                 lambda n, w, k: m.act(n, w, k),
                 name=f"{m.name}<= {r}" if m.name else "")
    sub_free = FreeOperad(seq, q.free.arity_bound,
                          name=f"{q.free.name}|<={r}")
    report = CheckReport(f"filtration stage {r} of {q.name}")
    for n in sorted(a for a in m.arities() if a <= r):
        for g in m.keys(n):
            for ikey, _c in q.alpha_fn(n, g).items():
                shape, labels = ikey
                if shape[0] == "leaf":
                    report.fail("alpha-image-hits-unit", n, g)
                    continue
                arities = shape_arities(shape)
                if any(a > r - 1 for a in arities):
                    report.fail("alpha-not-in-lower-stage", n, g, ikey)
    sub = QuasiFreeOperad(sub_free, q.alpha_fn, name=f"{q.name}|<={r}")
    return sub, report
