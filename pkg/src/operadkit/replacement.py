"""Quasi-free replacements of algebras over an operad.

A twisting cochain theta: D -> P together with a P-algebra A produces a
free P-algebra on the quasi-cofree coalgebra S(D, A).  The generators
keep their own twisted differential (internal plus the coderivation of
the cochain evaluated in A), and the free algebra acquires a second
twist: the derivation extending the coproduct-then-cochain homomorphism
omega.  The result projects onto A and contains it, and the two maps
are inverse on homology.

Everything here is certified rather than assumed: the twisting equation
for omega, square-zero of the combined differential, the counit/unit
identities, the identification of the carrier with the Schur value of
the twisted composite P o D (computed independently), and the homology
agreement with A on a weight truncation -- the last one degree by
degree inside an explicitly computed validity window, since a truncated
complex can only be trusted where no discarded weight can interfere.
"""

from __future__ import annotations

from .coalg import (CofreeMorphism, algebra_to_quasicofree,
                    check_quasicofree_morphism)
from .cobar import TwistingCochain, twisted_composite
from .dg import GradedModule, koszul_sign_permutation
from .operads import CheckReport
from .palg import QuasiFreePAlgebra, SchurValue, free_algebra_morphism
from .rings import (HomologySummary, Matrix, homology_at, invariant_factors,
                    rank, rank_and_kernel, smith_normal_form, solve)
from .treealg import lc_add, lc_extend
from .trees import leaf, node, normalize_shape


# ---------------------------------------------------------------------------
# the coproduct-then-cochain homomorphism
# ---------------------------------------------------------------------------

def restricted_cochain(theta, alg, name=""):
    """Push a cochain D -> P into the endomorphism operad of a
    P-algebra by composing with the structure morphism."""
    ring = alg.ring

    def theta_fn(n, dkey):
        out = {}
        for pkey, c in theta.theta(n, dkey).items():
            lc_extend(ring, out, alg.phi(n, pkey), c)
        return out

    return TwistingCochain(theta.d, alg.end_operad(), theta_fn,
                           name=name or f"{theta.name or 'cochain'}@{alg.name or 'A'}")


def omega_map(qc, theta, sv):
    """omega: generators -> S(P, generators).

    The value-level coproduct of the generator coalgebra followed by
    the cochain on the root factor.  The root is the leftmost tensor
    factor of every coproduct term, so the odd cochain passes nothing
    and picks up no sign there; the inner factors are rewritten to
    class representatives and the outer pair is projected.
    """
    cf = qc.cofree
    ring = cf.ring

    def apply(gen):
        out = {}
        for (root, inner), coeff in cf.coproduct(gen).items():
            th = theta.theta(len(inner), root)
            if not th:
                continue
            choices = [cf.sv.project(y) for y in inner]
            if any(not ch for ch in choices):
                continue

            def spread(i, chosen, c):
                if i == len(choices):
                    for pkey, cp in th.items():
                        lc_add(ring, out, (pkey, tuple(chosen)),
                               ring.mul(c, cp))
                    return
                for gk, cg in choices[i].items():
                    spread(i + 1, chosen + [gk], ring.mul(c, cg))

            spread(0, [], coeff)
        return sv.project_lc(out)

    return apply


# ---------------------------------------------------------------------------
# the replacement
# ---------------------------------------------------------------------------

class Replacement:
    """The twisted free algebra on a quasi-cofree coalgebra.

    Generators are the classes of the coalgebra; the free algebra on
    them carries the generator differential together with the
    derivation extending minus the coproduct-then-cochain map (the
    package-wide convention: the derivation balances the differential
    in the twisting equation).

    When the coalgebra came from an honest algebra over the operad
    (:func:`replacement`), the projection ``epsilon`` onto the algebra
    exists as well; for a bare coalgebra
    (:func:`coalgebra_replacement`) only the inclusion ``eta`` of the
    weight-one complex is available, which is all the homology
    comparisons need.

    The outer Schur construction materialises every basis element with
    at most ``weight_bound`` generator slots, which includes elements
    whose total input weight exceeds the bound; those extras are not
    part of the truncated replacement, and every exported complex and
    certificate restricts to total input weight <= the bound.  The
    differential never raises that weight, so the restriction is a
    subcomplex.
    """

    def __init__(self, theta, gamma, weight_bound, alg=None, name=""):
        if gamma.cofree.d is not theta.d:
            raise ValueError(
                "the coalgebra and the cochain must share the cooperad")
        if weight_bound > max(theta.p.arities()):
            raise ValueError("the operad holds fewer arities than the "
                             "requested weight bound")
        self.theta = theta
        self.p = theta.p
        self.d = theta.d
        self.alg = alg
        self.ring = theta.ring
        self.weight_bound = weight_bound
        self.name = name
        self.gamma = gamma
        self.a_module = gamma.cofree.c
        self.gens = self.gamma.total_module()
        self.sv = SchurValue(self.p, self.gens, weight_bound)
        self.omega = omega_map(self.gamma, theta, self.sv)
        self.carrier = QuasiFreePAlgebra(self.p, self.sv, self._minus_omega,
                                         name=name or "replacement")
        self._eps = (free_algebra_morphism(self.sv, alg, self._eps_gen)
                     if alg is not None else None)
        self._trunc = None
        self._tc = {}
        self._cmp = {}

    def _minus_omega(self, gen):
        ring = self.ring
        return {rep: ring.neg(c) for rep, c in self.omega(gen).items()}

    def _eps_gen(self, g):
        dkey, avec = g
        if len(avec) == 1 and dkey == self.d.counit_key:
            return {avec[0]: self.ring.one()}
        return {}

    def gen_keys(self):
        for deg in self.gens.degrees():
            yield from self.gens.basis[deg]

    @staticmethod
    def total_weight(rep):
        """Total number of algebra inputs across the generator slots."""
        return sum(len(g[1]) for g in rep[1])

    def truncated_reps(self):
        for m in self.sv.weights():
            for rep in self.sv.reps(m):
                if self.total_weight(rep) <= self.weight_bound:
                    yield rep

    def truncated_module(self):
        """The weight-truncated replacement complex."""
        if self._trunc is not None:
            return self._trunc
        by_deg = {}
        for rep in self.truncated_reps():
            by_deg.setdefault(self.sv.rep_degree(rep), []).append(rep)
        basis = {d: tuple(ks) for d, ks in by_deg.items()}
        mod = GradedModule(self.ring, basis, check=False)
        diff = {}
        for deg in mod.degrees():
            rows, cols = mod.dim(deg - 1), mod.dim(deg)
            if rows == 0 or cols == 0:
                continue
            mat = Matrix(self.ring, rows, cols)
            for j, rep in enumerate(mod.basis[deg]):
                for rep2, c in self.carrier.total_diff(rep).items():
                    mat.entries[mod.index(deg - 1, rep2)][j] = c
            if not mat.is_zero():
                diff[deg] = mat
        self._trunc = GradedModule(self.ring, basis, diff, check=False)
        return self._trunc

    # -- structure maps ------------------------------------------------------
    def epsilon(self, rep):
        """Projection to the algebra: evaluate the operad factor on the
        weight-one parts of the generators."""
        if self._eps is None:
            raise ValueError("no algebra to project onto: this replacement "
                             "was built from a bare coalgebra")
        return self._eps(rep)

    def epsilon_lc(self, lc):
        ring = self.ring
        out = {}
        for rep, c in lc.items():
            lc_extend(ring, out, self.epsilon(rep), c)
        return out

    def eta(self, akey):
        """Inclusion of the algebra: the unit operation on the
        weight-one generator presenting the element."""
        ring = self.ring
        out = {}
        inner = self.gamma.cofree.sv.project((self.d.counit_key, (akey,)))
        for g, c in inner.items():
            lc_extend(ring, out,
                      self.sv.project((self.p.unit_key, (g,))), c)
        return out

    def eta_lc(self, lc):
        ring = self.ring
        out = {}
        for akey, c in lc.items():
            lc_extend(ring, out, self.eta(akey), c)
        return out

    def coalgebra_twist_vanishes(self):
        """True when the generator twist is zero, which upgrades the
        weight filtration of the replacement to a weight grading."""
        return not any(self.gamma.alpha_fn(g) for g in self.gen_keys())

    # -- the independent composite model --------------------------------------
    def composite_value(self, bound, twist_sign):
        """S(P o D, A) with the composite's twist scaled by ``twist_sign``,
        built from the composition product directly (no free algebra)."""
        got = self._cmp.get((bound, twist_sign))
        if got is None:
            tc = self._tc.get(bound)
            if tc is None:
                tc = twisted_composite(self.theta, bound)
                self._tc[bound] = tc
            got = SchurValue(_TwistedCompositeSeq(tc, twist_sign),
                             self.a_module, bound)
            self._cmp[(bound, twist_sign)] = got
        return got


def replacement(theta, alg, weight_bound, name=""):
    """The replacement of an algebra over the cochain's operad: the
    generator coalgebra is built from the cochain pushed into the
    algebra's endomorphism operad, and the projection onto the algebra
    comes along."""
    if theta.p is not alg.op:
        raise ValueError(
            "the cochain must land in the operad acting on the algebra")
    gamma = algebra_to_quasicofree(
        restricted_cochain(theta, alg), alg.a, weight_bound,
        name=name or "generators")
    return Replacement(theta, gamma, weight_bound, alg=alg, name=name)


def coalgebra_replacement(theta, gamma, weight_bound, name=""):
    """The replacement of a bare quasi-cofree coalgebra (no projection
    map; the weight-one complex plays the part of the algebra)."""
    return Replacement(theta, gamma, weight_bound, name=name)


class _TwistedCompositeSeq:
    """A twisted composite P o D packaged as a symmetric sequence with
    a chosen sign on its twist, in the shape the Schur construction
    consumes."""

    def __init__(self, tc, twist_sign):
        self.tc = tc
        self.ring = tc.ring
        self.twist_sign = twist_sign

    def keys(self, n):
        return self.tc.carrier.keys(n)

    def dim(self, n):
        return len(self.tc.carrier.keys(n))

    def degree(self, n, key):
        return self.tc.carrier.key_degree(key)

    def act(self, n, w, key):
        return self.tc.carrier.act(n, w, key)

    def diff_lc(self, n, key):
        ring = self.ring
        out = dict(self.tc.leibniz_diff(n, key))
        sgn = ring.of(self.twist_sign)
        for k2, c in self.tc.twist_key(n, key).items():
            lc_add(ring, out, k2, ring.mul(sgn, c))
        return out


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def check_replacement(r):
    """All structural certificates of one replacement:

    * the twisting equation for the omega-derivation on every
      generator (differential part balances derivation part);
    * square-zero of the total differential on the truncation, and the
      differential never raising the total weight;
    * omega preserves the total weight, the generator twist strictly
      drops it;
    * counit identity (projection after inclusion is the identity of
      the algebra) and both structure maps being chain maps;
    * absence of dropped coinvariant torsion in the materialised
      carriers (a free basis is what every later matrix rests on).
    """
    report = CheckReport(f"replacement {r.name}".strip())
    ring = r.ring
    sv = r.sv

    # twisting equation on generators
    for g in r.gen_keys():
        resid = {}
        for rep, c in r.carrier.alpha_fn(g).items():
            n = len(rep[1])
            lc_extend(ring, resid, sv.project_lc(sv.pre_diff(n, rep)), c)
            lc_extend(ring, resid, r.carrier.derivation.apply(rep), c)
        for g2, c in r.gens.diff_lc(g).items():
            lc_extend(ring, resid, r.carrier.alpha_fn(g2), c)
        if resid:
            report.fail("twisting-equation", g, resid)

    # weight behaviour of the two twists
    for g in r.gen_keys():
        wg = len(g[1])
        for rep in r.omega(g):
            if r.total_weight(rep) != wg:
                report.fail("omega-weight", g, rep)
        for g2 in r.gamma.coderivation.apply(g):
            if len(g2[1]) >= wg:
                report.fail("generator-twist-weight", g, g2)

    # square-zero and weight monotonicity on the truncation
    for rep in r.truncated_reps():
        w = r.total_weight(rep)
        sq = {}
        for rep2, c in r.carrier.total_diff(rep).items():
            if r.total_weight(rep2) > w:
                report.fail("weight-raised", rep, rep2)
            lc_extend(ring, sq, r.carrier.total_diff(rep2), c)
        if sq:
            report.fail("square-zero", rep, sq)

    # coinvariant torsion guard
    for n in sv.weights():
        tor = sv.torsion(n)
        if any(tor.values()):
            report.fail("carrier-coinvariant-torsion", n, tor)
    inner = r.gamma.cofree.sv
    for n in inner.weights():
        tor = inner.torsion(n)
        if any(tor.values()):
            report.fail("generator-coinvariant-torsion", n, tor)

    # structure maps
    amod = r.a_module
    akeys = [k for deg in amod.degrees() for k in amod.basis[deg]]
    for a in akeys:
        lhs = r.eta_lc(amod.diff_lc(a))
        for rep, c in r.eta(a).items():
            lc_extend(ring, lhs, r.carrier.total_diff(rep), ring.neg(c))
        if lhs:
            report.fail("eta-chain-map", a, lhs)
    if r.alg is not None:
        for a in akeys:
            got = r.epsilon_lc(r.eta(a))
            lc_add(ring, got, a, ring.neg(ring.one()))
            if got:
                report.fail("counit-identity", a, got)
        for rep in r.truncated_reps():
            resid = r.epsilon_lc(r.carrier.total_diff(rep))
            for ak, c in r.epsilon(rep).items():
                lc_extend(ring, resid, amod.diff_lc(ak), ring.neg(c))
            if resid:
                report.fail("epsilon-chain-map", rep, resid)

    return report


# ---------------------------------------------------------------------------
# identification with the Schur value of the twisted composite
# ---------------------------------------------------------------------------

def ungroup_key(r, rep):
    """Rewrite an outer pair (p, (g_1, ..., g_m)) as a pre-quotient key
    of S(P o D, A): contiguous blocks, with the cooperad labels pulled
    in front of the algebra inputs at the usual Koszul cost.  Returns
    ``(key, sign)``."""
    pkey, gvec = rep
    blocks = []
    dlabels = []
    avec = []
    degs = []
    perm_d = []
    perm_a = []
    pos = 0
    start = 1
    for dk, ak in gvec:
        nj = len(ak)
        blocks.append(node(tuple(leaf(start + t) for t in range(nj))))
        dlabels.append(dk)
        perm_d.append(pos)
        degs.append(r.d.degree(nj, dk))
        for t, a in enumerate(ak):
            perm_a.append(pos + 1 + t)
            degs.append(r.a_module.degree_of(a))
        avec.extend(ak)
        pos += 1 + nj
        start += nj
    shape = normalize_shape(node(tuple(blocks)))
    sgn = koszul_sign_permutation(perm_d + perm_a, degs)
    return ((shape, (pkey,) + tuple(dlabels)), tuple(avec)), sgn


def _ungroup_lc(r, cmp_sv, lc):
    ring = r.ring
    out = {}
    for rep, c in lc.items():
        key, sgn = ungroup_key(r, rep)
        lc_extend(ring, out, cmp_sv.project(key),
                  ring.mul(c, ring.of(sgn)))
    return out


def _preserving_part(r, rep):
    w = r.total_weight(rep)
    return {rep2: c for rep2, c in r.carrier.total_diff(rep).items()
            if r.total_weight(rep2) == w}


def _identification_witness(r, cmp_sv, weight_limit):
    """First representative where the ungrouped weight-preserving part
    of the differential disagrees with the composite-side differential,
    or None."""
    ring = r.ring
    one = ring.one()
    for rep in r.truncated_reps():
        if r.total_weight(rep) > weight_limit:
            continue
        resid = _ungroup_lc(r, cmp_sv, _preserving_part(r, rep))
        for key, c in _ungroup_lc(r, cmp_sv, {rep: one}).items():
            n2 = len(key[1])
            lc_extend(ring, resid,
                      cmp_sv.project_lc(cmp_sv.pre_diff(n2, key)),
                      ring.neg(c))
        if resid:
            return (rep, resid)
    return None


def composite_comparison(r, weight_limit=None):
    """The underlying-object identification, checked two ways:

    * dimension match, per weight and degree, between the truncated
      carrier and the independently computed S(P o D, A);
    * matrix match of the weight-preserving part of the differential
      under the ungrouping map, resolving which sign of the composite
      twist the derivation realises.

    Returns ``(report, matched_sign)``; the sign is None when neither
    choice matches.
    """
    weight_limit = min(weight_limit or r.weight_bound, r.weight_bound)
    report = CheckReport(f"carrier identification {r.name}".strip())

    cmp_sv = None
    matched = None
    attempts = []
    for sign in (-1, 1):
        try:
            sv2 = r.composite_value(weight_limit, sign)
        except ValueError as exc:
            attempts.append((sign, "twist-sign-not-a-complex", str(exc)))
            continue
        if cmp_sv is None:
            cmp_sv = sv2
        bad = _identification_witness(r, sv2, weight_limit)
        if bad is None:
            matched = sign
            cmp_sv = sv2
            break
        attempts.append((sign, "mismatch") + bad)
    if matched is None:
        report.fail("composite-identification", *attempts)

    if cmp_sv is not None:
        got = {}
        for rep in r.truncated_reps():
            w = r.total_weight(rep)
            if w > weight_limit:
                continue
            deg = r.sv.rep_degree(rep)
            got[(w, deg)] = got.get((w, deg), 0) + 1
        want = {}
        for n in range(1, weight_limit + 1):
            comp = cmp_sv.component(n)
            for deg in comp.degrees():
                want[(n, deg)] = comp.dim(deg)
        if got != want:
            keys = sorted(set(got) | set(want))
            for k in keys:
                if got.get(k, 0) != want.get(k, 0):
                    report.fail("carrier-dims", "weight", k[0], "degree",
                                k[1], got.get(k, 0), want.get(k, 0))

    return report, matched


# ---------------------------------------------------------------------------
# windowed homology comparison
# ---------------------------------------------------------------------------

def theta_arity_support(theta, probe_bound=None):
    """Arities where the cochain is nonzero, probed through the
    materialised arities of its cooperad (or a given bound)."""
    d = theta.d
    if probe_bound is None:
        probe_bound = max(d.arities(), default=1)
    return [n for n in range(2, probe_bound + 1)
            if any(theta.theta(n, k) for k in d.keys(n))]


class WindowReport:
    """Outcome of a windowed homology comparison."""

    def __init__(self, report, valid_degrees, threat_degrees, hull,
                 h_truncated, h_algebra, eta_iso, support, max_drop):
        self.report = report
        self.valid_degrees = valid_degrees
        self.threat_degrees = threat_degrees
        self.hull = hull
        self.h_truncated = h_truncated
        self.h_algebra = h_algebra
        self.eta_iso = eta_iso
        self.support = support
        self.max_drop = max_drop

    @property
    def ok(self):
        return self.report.ok

    def __str__(self):
        lines = [str(self.report),
                 f"  valid degrees: {self.valid_degrees}",
                 f"  threat degrees: {sorted(self.threat_degrees)}"]
        for deg in self.valid_degrees:
            ht = self.h_truncated.get(deg, HomologySummary(0))
            ha = self.h_algebra.get(deg, HomologySummary(0))
            lines.append(f"  H_{deg}: truncated {ht} | algebra {ha} | "
                         f"inclusion iso: {self.eta_iso.get(deg)}")
        return "\n".join(lines)


def equivalence_window_check(r, degree_window=None):
    """Compare the homology of the truncated replacement with the
    homology of the algebra, inside the valid degree window.

    A degree is valid when no basis element of total weight above the
    bound can land in it under one application of the total
    differential.  The twist has homological degree -1 and collapses at
    most ``max(support) - 1`` weights at a time, so the threats sit one
    degree above, within the weights just beyond the bound; their
    degree supports are read off the independently built composite.
    An empty window is reported, not fatal.
    """
    w_bound = r.weight_bound
    support = theta_arity_support(r.theta)
    max_drop = max((s - 1 for s in support), default=0)
    threat_degrees = set()
    if max_drop:
        sv2 = None
        for sign in (-1, 1):
            try:
                sv2 = r.composite_value(w_bound + max_drop, sign)
                break
            except ValueError:
                continue
        if sv2 is None:
            raise ValueError("no sign of the composite twist is a complex")
        for n in range(w_bound + 1, w_bound + max_drop + 1):
            comp = sv2.component(n)
            threat_degrees.update(comp.degrees())
            threat_degrees.update(sv2.torsion(n).keys())

    trunc = r.truncated_module()
    h_t = trunc.homology()
    h_a = r.a_module.homology()
    hull = sorted(set(trunc.degrees()) | set(r.a_module.degrees())
                  | set(h_t) | set(h_a))
    valid = [deg for deg in hull if (deg + 1) not in threat_degrees]
    if degree_window is not None:
        lo, hi = degree_window
        valid = [deg for deg in valid if lo <= deg <= hi]

    report = CheckReport(f"windowed homology {r.name}".strip())
    if not valid:
        report.fail("empty-window", "hull", hull,
                    "threats", sorted(threat_degrees))
    eta_iso = {}
    for deg in valid:
        st = h_t.get(deg, HomologySummary(0))
        sa = h_a.get(deg, HomologySummary(0))
        if st != sa:
            report.fail("homology-mismatch", "degree", deg,
                        str(st), str(sa))
        iso = induced_homology_iso(r.eta, r.a_module, trunc, deg)
        eta_iso[deg] = iso
        if not iso:
            report.fail("inclusion-not-homology-iso", "degree", deg)

    return WindowReport(report, valid, threat_degrees, hull, h_t, h_a,
                        eta_iso, support, max_drop)


# ---------------------------------------------------------------------------
# induced maps on homology (exact, fields and the integers)
# ---------------------------------------------------------------------------

def _solve_exact(mat, b):
    """One solution x of mat x = b, or None; Gaussian over fields,
    Smith-form over the integers."""
    ring = mat.ring
    if ring.is_field:
        return solve(mat, b)
    if ring.tag != "Z":
        raise ValueError("exact solving supports fields and Z")
    dd, u, v = smith_normal_form(mat)
    ub = [sum(u.entries[i][k] * b[k] for k in range(mat.rows))
          for i in range(mat.rows)]
    y = [0] * mat.cols
    for i in range(mat.rows):
        di = dd.entries[i][i] if i < min(mat.rows, mat.cols) else 0
        if di == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % di:
                return None
            y[i] = ub[i] // di
    return [sum(v.entries[i][k] * y[k] for k in range(mat.cols))
            for i in range(mat.cols)]


def _kernel_columns(mod, deg):
    """A basis of the degree-``deg`` cycles as matrix columns (saturated
    over the integers)."""
    _, kernel = rank_and_kernel(mod.diff_matrix(deg))
    mat = Matrix(mod.ring, mod.dim(deg), len(kernel))
    for j, vec in enumerate(kernel):
        for i, val in enumerate(vec):
            mat.entries[i][j] = val
    return mat


def chain_map_matrix(apply_fn, src, dst, deg):
    """Matrix of a degree-0 chain map on the degree-``deg`` bases."""
    mat = Matrix(src.ring, dst.dim(deg), src.dim(deg))
    for j, key in enumerate(src.basis.get(deg, ())):
        for k2, c in apply_fn(key).items():
            if dst.degree_of(k2) != deg:
                raise ValueError("map is not homogeneous of degree zero")
            mat.entries[dst.index(deg, k2)][j] = c
    return mat


def induced_homology_iso(apply_fn, src, dst, deg):
    """Whether a degree-0 chain map induces an isomorphism
    H_deg(src) -> H_deg(dst).

    Exact test: the images of the source cycles together with the
    target boundaries must span the target cycles (surjectivity onto
    classes), and the two isomorphism types must agree; a surjection
    between isomorphic finitely generated groups is an isomorphism.
    """
    ring = src.ring
    hs = homology_at(src.diff_matrix(deg + 1), src.diff_matrix(deg))
    ht = homology_at(dst.diff_matrix(deg + 1), dst.diff_matrix(deg))
    if hs != ht:
        return False
    k_t = _kernel_columns(dst, deg)
    if k_t.cols == 0:
        return True
    f_mat = chain_map_matrix(apply_fn, src, dst, deg)
    k_s = _kernel_columns(src, deg)
    cols = []
    for j in range(k_s.cols):
        img = [sum(f_mat.entries[i][k] * k_s.entries[k][j]
                   for k in range(f_mat.cols)) for i in range(f_mat.rows)]
        x = _solve_exact(k_t, img)
        if x is None:
            return False
        cols.append(x)
    d_in = dst.diff_matrix(deg + 1)
    for j in range(d_in.cols):
        x = _solve_exact(k_t, [d_in.entries[i][j] for i in range(d_in.rows)])
        if x is None:
            return False
        cols.append(x)
    stacked = Matrix(ring, k_t.cols, len(cols),
                     [[col[i] for col in cols] for i in range(k_t.cols)])
    if ring.is_field:
        return rank(stacked) == k_t.cols
    facs = invariant_factors(stacked)
    return len(facs) == k_t.cols and all(f == 1 for f in facs)


# ---------------------------------------------------------------------------
# maps between replacements
# ---------------------------------------------------------------------------

def functorial_map(f_fn, src, dst, name=""):
    """The algebra morphism between two replacements induced by
    coalgebra-morphism data on the generators: the extended coalgebra
    morphism is applied in every input slot (degree 0, so no passage
    signs) and the outer pair is projected."""
    if src.p is not dst.p or src.d is not dst.d:
        raise ValueError("replacements must share the operad and cooperad")
    phi = CofreeMorphism(src.gamma.cofree, dst.gamma.cofree, f_fn, name=name)
    ring = src.ring

    def apply(rep):
        pkey, gvec = rep
        images = [phi.apply(g) for g in gvec]
        out = {}
        if any(not img for img in images):
            return out

        def spread(i, chosen, c):
            if i == len(images):
                lc_extend(ring, out,
                          dst.sv.project((pkey, tuple(chosen))), c)
                return
            for gk, cg in images[i].items():
                spread(i + 1, chosen + [gk], ring.mul(c, cg))

        spread(0, [], ring.one())
        return out

    return apply


def check_functorial_map(f_fn, src, dst, name=""):
    """Certificates for an induced map: the generator data satisfies
    the quasi-cofree morphism equation, and the induced map commutes
    with the total differentials on the truncations."""
    report = CheckReport(f"induced algebra morphism ({name or 'f'})")
    pre = check_quasicofree_morphism(f_fn, src.gamma, dst.gamma, name=name)
    for witness in pre.failures:
        report.fail("generator-morphism", *witness)
    apply = functorial_map(f_fn, src, dst, name=name)
    ring = src.ring
    for rep in src.truncated_reps():
        resid = {}
        for rep2, c in src.carrier.total_diff(rep).items():
            lc_extend(ring, resid, apply(rep2), c)
        for rep2, c in apply(rep).items():
            lc_extend(ring, resid, dst.carrier.total_diff(rep2),
                      ring.neg(c))
        if resid:
            report.fail("chain-map", rep, resid)
    return report


def functorial_homology_table(f_fn, src, dst, degrees, name=""):
    """Per-degree verdicts of whether the induced map is a homology
    isomorphism between the truncations."""
    apply = functorial_map(f_fn, src, dst, name=name)
    s_mod = src.truncated_module()
    d_mod = dst.truncated_module()
    return {deg: induced_homology_iso(apply, s_mod, d_mod, deg)
            for deg in degrees}
