"""Cobar construction of a connected cooperad, twisting cochains and
their associated operad morphisms, and the twisted composite complexes
whose acyclicity witnesses a weak equivalence.

The cobar generators are the desuspended coaugmentation coideal: one
generator per reduced-cooperad basis key, one degree lower.  The
suspension marker is kept implicit; every sign it causes is produced by
the Koszul engine from the recorded degrees.
"""

from __future__ import annotations

from .cooperads import (full_coproduct, reduced_two_vertex_subsets,
                        two_vertex_shape)
from .dg import GradedModule, koszul_sign_permutation
from .operads import (CheckReport, FreeOperad, QuasiFreeOperad,
                      quasi_free_morphism, tree_composite)
from .rings import Matrix
from .symseq import CompositeSeq, SymSeq, all_permutations
from .treealg import lc_add, lc_extend
from .trees import leaf, node


# ---------------------------------------------------------------------------
# generators

def desuspended_generators(d, arity_bound):
    """The reduced part of a cooperad, one degree lower, with the
    differential negated (the degree marker passes the differential)."""
    ring = d.ring
    components = {}
    for n in range(2, arity_bound + 1):
        comp = d.component(n)
        if comp.total_dim() == 0:
            continue
        basis = {deg - 1: tuple(comp.basis[deg]) for deg in comp.degrees()}
        diff = {}
        for deg in comp.degrees():
            m = comp.differential.get(deg)
            if m is not None and not m.is_zero():
                diff[deg - 1] = m.scale(ring.of(-1))
        components[n] = GradedModule(ring, basis, diff)
    return SymSeq(ring, components,
                  lambda n, w, key: d.act(n, w, key),
                  name=f"desusp({d.name or 'D'})")


class CobarOperad(QuasiFreeOperad):
    """Quasi-free operad on the desuspended coideal of a cooperad; the
    twist expands a generator into all its two-vertex coproducts, with
    the sign of the second degree marker passing the bottom factor."""

    def __init__(self, cooperad, arity_bound, name=""):
        self.cooperad = cooperad
        ring = cooperad.ring
        gens = desuspended_generators(cooperad, arity_bound)
        free = FreeOperad(gens, arity_bound,
                          name=name or f"cobar({cooperad.name or 'D'})")

        def beta(n, g):
            out = {}
            for s_set in reduced_two_vertex_subsets(n):
                shape = two_vertex_shape(n, s_set)
                n_b = n - len(s_set) + 1
                for (kb, kt), c in cooperad.rho(n, s_set, g).items():
                    sgn = ring.of(
                        -1 if cooperad.degree(n_b, kb) % 2 else 1)
                    lc_add(ring, out, (shape, (kb, kt)), ring.mul(sgn, c))
            return out

        super().__init__(free, beta,
                         name=name or f"cobar({cooperad.name or 'D'})")


def cobar(d, arity_bound, name=""):
    return CobarOperad(d, arity_bound, name=name)


# ---------------------------------------------------------------------------
# twisting cochains

class TwistingCochain:
    """A degree -1 map from the reduced part of a cooperad to an operad,
    ``theta_fn(n, dkey) -> lc`` over target keys of degree |dkey| - 1."""

    def __init__(self, d, p, theta_fn, name=""):
        self.d = d
        self.p = p
        self.ring = p.ring
        self.theta_fn = theta_fn
        self.name = name

    def theta(self, n, dkey):
        if n == 1:
            return {}
        return self.theta_fn(n, dkey) or {}

    def theta_lc(self, n, lc):
        out = {}
        for k, c in lc.items():
            lc_extend(self.ring, out, self.theta(n, k), c)
        return out


def universal_cochain(cobar_op):
    """The generator inclusion of a cobar operad, as a cochain into it."""
    ring = cobar_op.ring

    def theta_fn(n, dkey):
        return {cobar_op.free.eta_key(n, dkey): ring.one()}

    return TwistingCochain(cobar_op.cooperad, cobar_op, theta_fn,
                           name="universal")


def cochain_equation_sides(t, n, dkey):
    """(lhs, rhs) of the cochain equation on one reduced-cooperad key:
    lhs = d_P(theta g) + theta(d_D g); rhs = the two-vertex coproducts
    of g with theta applied to both factors and composed, the second
    theta passing the bottom factor."""
    ring = t.ring
    d, p = t.d, t.p
    lhs = {}
    for pk, c in t.theta(n, dkey).items():
        lc_extend(ring, lhs, p.diff_lc(n, pk), c)
    lc_extend(ring, lhs, t.theta_lc(n, d.diff_lc(n, dkey)), ring.one())
    rhs = {}
    for s_set in reduced_two_vertex_subsets(n):
        shape = two_vertex_shape(n, s_set)
        n_b = n - len(s_set) + 1
        n_t = len(s_set)
        for (kb, kt), c in d.rho(n, s_set, dkey).items():
            sgn = ring.of(-1 if d.degree(n_b, kb) % 2 else 1)
            for pb, cb in t.theta(n_b, kb).items():
                for pt, ct in t.theta(n_t, kt).items():
                    coeff = ring.mul(ring.mul(sgn, c), ring.mul(cb, ct))
                    lc_extend(ring, rhs,
                              tree_composite(p, shape, (pb, pt)), coeff)
    return lhs, rhs


def cochain_check(t, arity_bound, rng=None):
    """Degree, equivariance, and the cochain equation, per arity."""
    report = CheckReport(f"twisting cochain {t.name or ''}".strip())
    ring = t.ring
    d, p = t.d, t.p
    for n in range(2, arity_bound + 1):
        if n not in d.arities():
            continue
        for dkey in d.keys(n):
            img = t.theta(n, dkey)
            want = d.degree(n, dkey) - 1
            for pk, c in img.items():
                if c != 0 and p.degree(n, pk) != want:
                    report.fail("degree", n, dkey, pk)
            perms = all_permutations(n)
            if rng is not None and len(perms) > 6:
                perms = rng.sample(perms, 6)
            for w in perms:
                lhs = t.theta_lc(n, d.act(n, w, dkey))
                rhs = p.act_lc(n, w, img)
                if lhs != rhs:
                    report.fail("equivariance", n, w, dkey)
            lhs, rhs = cochain_equation_sides(t, n, dkey)
            for k, c in rhs.items():
                lc_add(ring, lhs, k, ring.neg(c))
            if lhs:
                report.fail("cochain-equation", n, dkey, lhs)
    return report


def cochain_to_morphism(t, arity_bound, cobar_op=None):
    """The operad morphism out of the cobar construction extending the
    cochain on generators; raises if the cochain equation fails."""
    if cobar_op is None:
        cobar_op = cobar(t.d, arity_bound)
    return quasi_free_morphism(cobar_op, t.p,
                               lambda n, g: t.theta(n, g),
                               arity_bound=arity_bound)


def morphism_to_cochain(phi):
    """Restrict a morphism out of a cobar operad to the generators."""
    src = phi.source

    def theta_fn(n, dkey):
        return phi.f_fn(n, dkey)

    return TwistingCochain(src.cooperad, phi.target, theta_fn,
                           name="restricted")


# ---------------------------------------------------------------------------
# twisted composites

class TwistedComposite:
    """The composite P o D with the differential twisted by a cochain:
    the twist runs over the two-level coproducts of each D-factor,
    applies theta to the bottom part (unsplit inputs keep trivial
    factors on top), pushes the image into the root, and re-sorts the
    new blocks at the usual Koszul cost."""

    def __init__(self, t, arity_bound):
        self.t = t
        self.p = t.p
        self.d = t.d
        self.ring = t.ring
        self.arity_bound = arity_bound
        self.carrier = CompositeSeq(self.p.seq, self.d.seq, arity_bound)
        self._twist_cache = {}
        self._nu_cache = {}
        self._components = {}

    def _nu(self, n):
        got = self._nu_cache.get(n)
        if got is None:
            got = full_coproduct(self.d, n)
            self._nu_cache[n] = got
        return got

    def twist_key(self, ar, key):
        got = self._twist_cache.get((ar, key))
        if got is None:
            got = self._twist_key(ar, key)
            self._twist_cache[(ar, key)] = got
        return dict(got)

    def _twist_key(self, ar, key):
        ring = self.ring
        p, d, t = self.p, self.d, self.t
        shape, labels = key
        blocks = shape[1]
        k = len(blocks)
        pkey = labels[0]
        dkeys = labels[1:]
        block_inputs = [tuple(lf[1] for lf in b[1]) for b in blocks]
        pdeg = p.degree(k, pkey)
        ddegs = [d.degree(len(bi), dk)
                 for bi, dk in zip(block_inputs, dkeys)]
        out = {}
        for i in range(k):
            n_i = len(block_inputs[i])
            if n_i == 1:
                continue
            prefix = sum(ddegs[:i]) % 2
            for (sh2, labs2), c in self._nu(n_i)[dkeys[i]].items():
                kb = labs2[0]
                tops = labs2[1:]
                n_b = len(sh2[1])
                theta_kb = t.theta(n_b, kb)
                if not theta_kb:
                    continue
                kbdeg = d.degree(n_b, kb)
                exp = pdeg + kbdeg * prefix
                sgn = ring.of(-1 if exp % 2 else 1)
                new_parts = []
                for bj, kt in zip(sh2[1], tops):
                    local = tuple(lf[1] for lf in bj[1])
                    new_parts.append((tuple(block_inputs[i][m - 1]
                                            for m in local), kt))
                for qkey, cq in theta_kb.items():
                    base = ring.mul(ring.mul(sgn, c), cq)
                    for p2, cp in p.compose_keys(k, n_b, i + 1,
                                                 pkey, qkey).items():
                        self._add_canonical(
                            out, block_inputs, dkeys, i, new_parts,
                            p2, ring.mul(base, cp))
        return out

    def _add_canonical(self, out, block_inputs, dkeys, i, new_parts,
                       p2, coeff):
        """Sort the new blocks by least input; act on the root and give
        the factor shuffle its Koszul sign."""
        ring = self.ring
        virtual = [(bi, dk) for bi, dk in zip(block_inputs[:i], dkeys[:i])]
        virtual += new_parts
        virtual += [(bi, dk) for bi, dk in
                    zip(block_inputs[i + 1:], dkeys[i + 1:])]
        k2 = len(virtual)
        order = sorted(range(k2), key=lambda j: virtual[j][0][0])
        degs = [self.d.degree(len(bi), dk) for bi, dk in virtual]
        sgn = ring.of(koszul_sign_permutation(list(order), degs))
        w = [0] * k2
        for pos, src in enumerate(order):
            w[src] = pos + 1
        shape = node(tuple(
            node(tuple(leaf(x) for x in virtual[src][0]))
            for src in order))
        new_dkeys = tuple(virtual[src][1] for src in order)
        for p3, ca in self.p.act(k2, tuple(w), p2).items():
            lc_add(ring, out, (shape, (p3,) + new_dkeys),
                   ring.mul(coeff, ring.mul(sgn, ca)))

    def leibniz_diff(self, ar, key):
        """Internal differential of a two-level key: the operad's full
        differential on the root, then each block at the Koszul cost of
        the factors before it."""
        ring = self.ring
        shape, labels = key
        blocks = shape[1]
        k = len(blocks)
        pkey = labels[0]
        dkeys = labels[1:]
        ns = [len(b[1]) for b in blocks]
        out = {}
        for p2, c in self.p.diff_lc(k, pkey).items():
            lc_add(ring, out, (shape, (p2,) + tuple(dkeys)), c)
        exp = self.p.degree(k, pkey)
        for i in range(k):
            sgn = ring.of(-1 if exp % 2 else 1)
            for dk2, c in self.d.diff_lc(ns[i], dkeys[i]).items():
                new = list(dkeys)
                new[i] = dk2
                lc_add(ring, out, (shape, (pkey,) + tuple(new)),
                       ring.mul(sgn, c))
            exp += self.d.degree(ns[i], dkeys[i])
        return out

    def total_diff(self, ar, key):
        out = self.leibniz_diff(ar, key)
        lc_extend(self.ring, out, self.twist_key(ar, key), self.ring.one())
        return out

    def component(self, ar):
        """The arity component with the total differential."""
        got = self._components.get(ar)
        if got is not None:
            return got
        base = self.carrier.component(ar)
        diff = {}
        for deg in base.degrees():
            rows, cols = base.dim(deg - 1), base.dim(deg)
            if rows == 0 or cols == 0:
                continue
            mat = Matrix(self.ring, rows, cols)
            for j, key in enumerate(base.basis[deg]):
                for key2, c in self.total_diff(ar, key).items():
                    mat.entries[base.index(deg - 1, key2)][j] = c
            if not mat.is_zero():
                diff[deg] = mat
        got = GradedModule(self.ring, dict(base.basis), diff, check=False)
        self._components[ar] = got
        return got

    def root_arity(self, key):
        return len(key[0][1])


def twisted_composite(t, arity_bound):
    return TwistedComposite(t, arity_bound)


def check_twisted_composite(tc, arity_bound=None):
    """Square-zero of the total differential, the unit-arity shape, and
    the strict root-arity increase of the twist."""
    report = CheckReport("twisted composite")
    ring = tc.ring
    bound = arity_bound or tc.arity_bound
    one = tc.component(1)
    if one.total_dim() != 1 or one.degrees() != [0] or one.differential:
        report.fail("unit-arity", {d: one.dim(d) for d in one.degrees()})
    for ar in range(1, bound + 1):
        for key in tc.carrier.keys(ar):
            resid = {}
            for k2, c in tc.total_diff(ar, key).items():
                lc_extend(ring, resid, tc.total_diff(ar, k2), c)
            if resid:
                report.fail("square-zero", ar, key, resid)
            r0 = tc.root_arity(key)
            for k2 in tc.twist_key(ar, key):
                if tc.root_arity(k2) <= r0:
                    report.fail("filtration", ar, key, k2)
    return report


def acyclicity_report(tc, arity_bound=None):
    """Homology of each arity component of the twisted composite:
    ``{arity: {degree: HomologySummary}}`` with trivial entries omitted.
    A cochain inducing a weak equivalence leaves rank one in arity 1,
    degree 0, and nothing anywhere else."""
    bound = arity_bound or tc.arity_bound
    return {ar: tc.component(ar).homology() for ar in range(1, bound + 1)}


def acyclicity_ok(report_by_arity):
    for ar, hom in report_by_arity.items():
        if ar == 1:
            if list(hom) != [0] or hom[0].torsion or hom[0].free_rank != 1:
                return False
        elif hom:
            return False
    return True


def induced_composite_map(tc_src, tc_dst, phi_apply):
    """The map (P o D, twist) -> (Q o D, twist') applying an operad
    morphism to the root factor; a chain map when the target cochain is
    the morphism composed with the source cochain."""
    ring = tc_dst.ring

    def apply_key(ar, key):
        shape, labels = key
        out = {}
        for q, c in phi_apply(len(shape[1]), labels[0]).items():
            lc_add(ring, out, (shape, (q,) + labels[1:]), c)
        return out

    return apply_key


def check_induced_chain_map(tc_src, tc_dst, phi_apply, arity_bound=None):
    report = CheckReport("induced map on twisted composites")
    ring = tc_dst.ring
    bound = arity_bound or min(tc_src.arity_bound, tc_dst.arity_bound)
    f = induced_composite_map(tc_src, tc_dst, phi_apply)
    for ar in range(1, bound + 1):
        for key in tc_src.carrier.keys(ar):
            resid = {}
            for k2, c in tc_src.total_diff(ar, key).items():
                lc_extend(ring, resid, f(ar, k2), c)
            for k2, c in f(ar, key).items():
                lc_extend(ring, resid, tc_dst.total_diff(ar, k2),
                          ring.neg(c))
            if resid:
                report.fail("chain-map", ar, key, resid)
    return report
