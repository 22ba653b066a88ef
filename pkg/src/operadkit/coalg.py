"""Cofree coalgebras over a connected cooperad and their twists.

The carrier of the cofree coalgebra on a chain complex C is the
symmetric-tensor value S(D, C) from :mod:`palg`, graded by weight.  C
itself sits in weight one through the counit key; the structure
projection is the weight-one part.  A quasi-cofree coalgebra is such a
carrier together with a degree -1 corestriction alpha that vanishes in
weight one; its coderivation perturbs the internal differential, and
the perturbed differential squares to zero exactly when alpha solves a
Maurer-Cartan type twisting equation.

The second half of the module treats the classical shape of the same
data: a chain complex with multilinear operations m_n of degree n - 2
(homotopy-associative structures) and their morphisms, checked by a
self-contained evaluator that never touches the coalgebra machinery,
so the two routes can be played against each other.
"""

from __future__ import annotations

from itertools import combinations, product as _cartesian

from .cooperads import full_coproduct
from .dg import GradedModule, koszul_sign_permutation
from .operads import CheckReport
from .palg import SchurValue
from .rings import Matrix
from .symseq import adjacent_transposition, perm_inverse
from .treealg import lc_add, lc_extend


# ---------------------------------------------------------------------------
# cofree coalgebras
# ---------------------------------------------------------------------------

class CofreeCoalgebra:
    """S(D, C) with its counit projection and value-level coproduct.

    ``d`` is a connected cooperad, ``c`` a GradedModule over the same
    ring, and ``weight_bound`` caps the weights that are materialised.
    Elements are linear combinations of class representatives of pairs
    ``(dkey, (ckey_1, ..., ckey_n))``; the representative choices are
    delegated to :class:`palg.SchurValue`.
    """

    def __init__(self, d, c, weight_bound, name=""):
        if d.ring != c.ring:
            raise ValueError("cooperad and module live over different rings")
        self.d = d
        self.c = c
        self.ring = d.ring
        self.weight_bound = weight_bound
        self.name = name
        self.sv = SchurValue(d, c, weight_bound)
        self._nu = {}

    def nu(self, n):
        """All two-level coproduct terms of the weight-n cooperad keys."""
        got = self._nu.get(n)
        if got is None:
            got = full_coproduct(self.d, n)
            self._nu[n] = got
        return got

    def eta(self, ckey):
        """The weight-one key presenting a generator of C."""
        return (self.d.counit_key, (ckey,))

    def epsilon(self, lc):
        """Projection onto the weight-one summand, as an lc over C."""
        out = {}
        for (dkey, ckeys), coeff in lc.items():
            if len(ckeys) == 1 and dkey == self.d.counit_key:
                lc_add(self.ring, out, ckeys[0], coeff)
        return out

    def reps(self):
        """All class representatives, weight by weight."""
        for n in self.sv.weights():
            yield from self.sv.reps(n)

    def rep_degree(self, rep):
        return self.sv.rep_degree(rep)

    def weight(self, rep):
        return len(rep[1])

    def internal_diff(self, rep):
        """Differential inherited from D and C, on representatives."""
        n = len(rep[1])
        return self.sv.project_lc(self.sv.pre_diff(n, rep))

    def coproduct(self, rep):
        """The value-level coproduct of one representative.

        Returns an lc over nested keys ``(root, (y_1, ..., y_k))`` whose
        inner entries y_j are pre-quotient keys of S(D, C); the blocks
        follow the least-input order of the root's slots.  Each term
        carries the sign of shuffling the top-level cooperad factors in
        between the C factors they govern.
        """
        ring = self.ring
        gamma, cvec = rep
        n = len(cvec)
        cdegs = [self.sv.c_degree(ck) for ck in cvec]
        out = {}
        for (shape, labels), coeff in self.nu(n).get(gamma, {}).items():
            blocks = [tuple(lf[1] for lf in b[1]) for b in shape[1]]
            k = len(blocks)
            tops = labels[1:]
            tdegs = [self.d.degree(len(b), t) for b, t in zip(blocks, tops)]
            # regroup root (x) t_1..t_k (x) c_1..c_n into
            # root (x) (t_1, c_{B_1}) (x) (t_2, c_{B_2}) (x) ...
            order = []
            for j in range(k):
                order.append(j)
                order.extend(k + b - 1 for b in blocks[j])
            sgn = koszul_sign_permutation(order, tdegs + cdegs)
            inner = tuple(
                (tops[j], tuple(cvec[b - 1] for b in blocks[j]))
                for j in range(k))
            val = ring.mul(ring.of(sgn), coeff)
            lc_add(ring, out, (labels[0], inner), val)
        return out


# ---------------------------------------------------------------------------
# canonical form for nested (two-story) values
# ---------------------------------------------------------------------------

def _nested_diag_act(cf, w, key):
    """Diagonal action of w on one nested key (monomial actions only)."""
    ring = cf.ring
    root, inner = key
    k = len(inner)
    winv = perm_inverse(w)
    new_inner = tuple(inner[winv[i] - 1] for i in range(k))
    perm = [winv[i] - 1 for i in range(k)]
    degs = [cf.sv.key_degree(len(y[1]), y) for y in inner]
    sgn = ring.of(koszul_sign_permutation(perm, degs))
    img = cf.d.act(k, w, root)
    if len(img) != 1:
        raise ValueError("nested canonical form needs a monomial action")
    ((root2, c),) = img.items()
    return (root2, new_inner), ring.mul(sgn, c)


def _nested_orbit_min(cf, key):
    """Least orbit element under the diagonal action, with the relating
    unit: returns (rep, c) so that the class of ``key`` is c * rep, or
    None when the class dies (self-negating orbit over a field of odd
    characteristic)."""
    ring = cf.ring
    k = len(key[1])
    rel = {key: ring.one()}
    frontier = [key]
    gens = [adjacent_transposition(k, i) for i in range(1, k)]
    dead = False
    while frontier:
        cur = frontier.pop()
        for w in gens:
            nxt, c = _nested_diag_act(cf, w, cur)
            # class(cur) = class(w.cur) = c * class(nxt)
            val = ring.mul(ring.inv(c), rel[cur])
            if nxt in rel:
                if rel[nxt] != val:
                    dead = True
            else:
                rel[nxt] = val
                frontier.append(nxt)
    if dead:
        if cf.ring.is_field() and cf.ring.characteristic() not in (0, 2):
            return None
        raise ValueError("self-negating nested orbit over this ring")
    rep = min(rel, key=repr)
    return rep, ring.inv(rel[rep])


def nested_canonical(cf, nested_lc):
    """Canonical form of an lc over nested keys: rewrite the inner keys
    as class representatives, then normalise each outer key to the least
    element of its orbit.  Two equal two-story values always canonicalise
    to identical dictionaries."""
    ring = cf.ring
    out = {}

    def spread(root, choices, i, chosen, c):
        if i == len(choices):
            got = _nested_orbit_min(cf, (root, tuple(chosen)))
            if got is not None:
                lc_add(ring, out, got[0], ring.mul(c, got[1]))
            return
        for y, cy in choices[i].items():
            spread(root, choices, i + 1, chosen + [y], ring.mul(c, cy))

    for (root, inner), coeff in nested_lc.items():
        choices = [cf.sv.project(y) for y in inner]
        spread(root, choices, 0, [], coeff)
    return out


# ---------------------------------------------------------------------------
# coderivations induced by corestrictions
# ---------------------------------------------------------------------------

class Coderivation:
    """The coderivation of S(D, C) whose weight-one corestriction is a
    given homomorphism alpha: S(D, C) -> C.

    ``alpha_fn`` maps a class representative to an lc over C keys (or a
    falsy value for zero) and is homogeneous of degree ``degree``.  The
    coderivation acts by letting alpha eat every admissible collapsed
    subvalue: for each subset S of the inputs, the cooperad key is split
    by the two-vertex coproduct at S, alpha is applied to the upper
    factor together with the inputs it governs, and the result is put
    back into the slot where S sat.  S of size one uses the counit
    splitting (alpha in one input slot) and S of full size uses the
    other counit splitting (alpha on everything, landing in weight one);
    the latter term is exactly what makes the weight-one corestriction
    of the coderivation equal to alpha again.
    """

    def __init__(self, cofree, alpha_fn, degree=-1):
        self.cofree = cofree
        self.alpha_fn = alpha_fn
        self.degree = degree
        self.ring = cofree.ring

    def alpha(self, lc):
        """alpha on an lc of pre-quotient keys (projected first)."""
        ring = self.ring
        out = {}
        for rep, c in self.cofree.sv.project_lc(lc).items():
            img = self.alpha_fn(rep)
            if img:
                lc_extend(ring, out, img, c)
        return out

    def apply(self, rep):
        """All coderivation terms of one representative, projected."""
        ring = self.ring
        cf = self.cofree
        d = cf.d
        gamma, cvec = rep
        n = len(cvec)
        cdegs = [cf.sv.c_degree(ck) for ck in cvec]
        e = self.degree
        out = {}
        for size in range(1, n + 1):
            for s_tuple in combinations(range(1, n + 1), size):
                if size == n:
                    pairs = {(d.counit_key, gamma): ring.one()}
                elif size == 1:
                    pairs = {(gamma, d.counit_key): ring.one()}
                else:
                    pairs = d.rho(n, s_tuple, gamma)
                if not pairs:
                    continue
                s_set = set(s_tuple)
                pre = [i for i in range(1, n + 1)
                       if i not in s_set and i < s_tuple[0]]
                post = [i for i in range(1, n + 1)
                        if i not in s_set and i > s_tuple[0]]
                # reorder (t, c_1..c_n) -> (c_pre, t, c_S, c_post); the
                # old position of t is 0 and of c_i is i.
                order = list(pre) + [0] + list(s_tuple) + list(post)
                cpre = tuple(cvec[i - 1] for i in pre)
                cpost = tuple(cvec[i - 1] for i in post)
                predeg = sum(cdegs[i - 1] for i in pre)
                for (kb, kt), c in pairs.items():
                    tdeg = d.degree(size, kt)
                    sgn1 = koszul_sign_permutation(order, [tdeg] + cdegs)
                    bdeg = d.degree(n - size + 1, kb)
                    if (e % 2) and ((bdeg + predeg) % 2):
                        sgn1 = -sgn1
                    top = (kt, tuple(cvec[i - 1] for i in s_tuple))
                    img = self.alpha({top: ring.one()})
                    if not img:
                        continue
                    base = ring.mul(ring.of(sgn1), c)
                    for ck2, ca in img.items():
                        lc_add(ring, out, (kb, cpre + (ck2,) + cpost),
                               ring.mul(base, ca))
        return cf.sv.project_lc(out)

    def apply_lc(self, lc):
        ring = self.ring
        out = {}
        for rep, c in lc.items():
            lc_extend(ring, out, self.apply(rep), c)
        return out


def coderivation_from(cofree, alpha_fn, degree=-1, quasi=True):
    """The coderivation determined by a corestriction.

    With ``quasi`` set (the default), the corestriction must vanish on
    the weight-one summand, which is the shape used by twists.
    """
    if quasi:
        _require_trivial_weight_one(cofree, alpha_fn)
    return Coderivation(cofree, alpha_fn, degree)


def _require_trivial_weight_one(cofree, alpha_fn):
    for deg in cofree.c.degrees():
        for ck in cofree.c.basis[deg]:
            for rep in cofree.sv.project(cofree.eta(ck)):
                if alpha_fn(rep):
                    raise ValueError(
                        "corestriction must vanish in weight one")


# ---------------------------------------------------------------------------
# quasi-cofree coalgebras
# ---------------------------------------------------------------------------

class QuasiCofreeCoalgebra:
    """A cofree carrier with a degree -1 twist vanishing in weight one.

    The total differential is the internal one plus the coderivation of
    the twist; it squares to zero exactly when the twisting equation
    holds, and both facts are checkable (:func:`check_quasicofree`).
    """

    def __init__(self, cofree, alpha_fn, name=""):
        self.cofree = cofree
        self.ring = cofree.ring
        self.alpha_fn = alpha_fn
        self.name = name
        self.coderivation = coderivation_from(cofree, alpha_fn, degree=-1)
        self._total = None

    def alpha(self, lc):
        """The twist on an lc of pre-quotient keys."""
        return self.coderivation.alpha(lc)

    def total_diff(self, rep):
        out = self.cofree.internal_diff(rep)
        lc_extend(self.ring, out, self.coderivation.apply(rep))
        return out

    def total_diff_lc(self, lc):
        ring = self.ring
        out = {}
        for rep, c in lc.items():
            lc_extend(ring, out, self.total_diff(rep), c)
        return out

    def total_module(self):
        """The underlying complex with the twisted differential."""
        if self._total is None:
            base = self.cofree.sv.total_module(check=False)
            diff = {}
            for deg in base.degrees():
                rows = base.dim(deg - 1)
                cols = base.dim(deg)
                if rows == 0 or cols == 0:
                    continue
                mat = Matrix(self.ring, rows, cols)
                for j, rep in enumerate(base.basis[deg]):
                    for rep2, c in self.total_diff(rep).items():
                        mat.entries[base.index(deg - 1, rep2)][j] = c
                if not mat.is_zero():
                    diff[deg] = mat
            self._total = GradedModule(self.ring, dict(base.basis), diff,
                                       check=False)
        return self._total


def twisting_equation_residual(qc, rep):
    """d_C(alpha x) + alpha(internal diff x) + alpha(coderivation x).

    This is the weight-one corestriction of the square of the total
    differential at x; the twist solves the twisting equation when it
    vanishes for every representative.
    """
    ring = qc.ring
    cf = qc.cofree
    out = {}
    for ck, c in qc.alpha({rep: ring.one()}).items():
        lc_extend(ring, out, cf.c.diff_lc(ck), c)
    n = len(rep[1])
    lc_extend(ring, out, qc.alpha(cf.sv.pre_diff(n, rep)))
    lc_extend(ring, out, qc.alpha(qc.coderivation.apply(rep)))
    return out


def check_twisting_equation(qc):
    """The twisting equation, representative by representative."""
    report = CheckReport(f"twisting equation ({qc.name or 'twist'})")
    for rep in qc.cofree.reps():
        res = twisting_equation_residual(qc, rep)
        if res:
            report.fail("weight", len(rep[1]), rep, res)
    return report


def square_zero_ok(qc):
    """Whether the twisted total differential squares to zero."""
    mod = qc.total_module()
    for deg in mod.degrees():
        a = mod.differential.get(deg)
        b = mod.differential.get(deg + 1)
        if a is not None and b is not None:
            if not (a * b).is_zero():
                return False
    return True


def check_quasicofree(qc):
    """Full certificate for a quasi-cofree coalgebra.

    Checks, per representative: the twist has degree -1 and strictly
    drops weight; the weight-one corestriction of the coderivation is
    the twist again; the twisting equation holds; and the twisted
    differential squares to zero (the last two verdicts must agree, and
    both are computed).
    """
    report = CheckReport(f"quasi-cofree coalgebra ({qc.name or 'carrier'})")
    ring = qc.ring
    cf = qc.cofree
    for rep in cf.reps():
        n = len(rep[1])
        dsum = cf.rep_degree(rep)
        img = qc.alpha_fn(rep) or {}
        for ck, _c in img.items():
            if cf.c.degree_of(ck) != dsum - 1:
                report.fail("twist degree", rep, ck)
        der = qc.coderivation.apply(rep)
        for rep2, _c in der.items():
            if len(rep2[1]) >= n:
                report.fail("weight drop", rep, rep2)
            if cf.rep_degree(rep2) != dsum - 1:
                report.fail("coderivation degree", rep, rep2)
        back = cf.epsilon(der)
        want = {}
        lc_extend(ring, want, img)
        if back != want:
            report.fail("weight-one corestriction", rep, back, want)
        res = twisting_equation_residual(qc, rep)
        if res:
            report.fail("twisting equation", n, rep, res)
        sq = qc.total_diff_lc(qc.total_diff(rep))
        if sq:
            report.fail("square", n, rep, sq)
    if square_zero_ok(qc) is not (not any(
            f[0] == "square" for f in report.failures)):
        report.fail("square verdicts disagree")
    return report


# ---------------------------------------------------------------------------
# structural certificates for the cofree carrier
# ---------------------------------------------------------------------------

def check_cofree(cf, reps=None):
    """Value-level counit laws and coassociativity data for S(D, C).

    For every representative x the terms of the coproduct with counit
    root must reproduce x inside the single inner factor, the terms with
    all inner factors of weight one must reproduce x as the outer layer,
    and the coproduct must be a chain map for the internal
    differentials.
    """
    report = CheckReport(f"cofree coalgebra ({cf.name or 'S(D,C)'})")
    ring = cf.ring
    chosen = list(reps) if reps is not None else list(cf.reps())
    for rep in chosen:
        rho = cf.coproduct(rep)
        left = {}
        right = {}
        for (root, inner), c in rho.items():
            if len(inner) == 1 and root == cf.d.counit_key:
                lc_extend(ring, left, cf.sv.project(inner[0]), c)
            if all(y[0] == cf.d.counit_key and len(y[1]) == 1
                   for y in inner):
                key = (root, tuple(y[1][0] for y in inner))
                lc_extend(ring, right, cf.sv.project(key), c)
        if left != {rep: ring.one()}:
            report.fail("counit (outer)", rep, left)
        if right != {rep: ring.one()}:
            report.fail("counit (inner)", rep, right)

        lhs = {}
        for rep2, c in cf.internal_diff(rep).items():
            lc_extend(ring, lhs, nested_canonical(cf, cf.coproduct(rep2)), c)
        rhs = {}
        for (root, inner), c in rho.items():
            k = len(inner)
            for r2, cr in cf.d.diff_lc(k, root).items():
                lc_extend(ring, rhs,
                          nested_canonical(cf, {(r2, inner): cr}), c)
            prefix = cf.d.degree(k, root)
            for j, y in enumerate(inner):
                sgn = -1 if prefix % 2 else 1
                for y2, cy in cf.sv.pre_diff(len(y[1]), y).items():
                    term = {(root, inner[:j] + (y2,) + inner[j + 1:]):
                            ring.mul(ring.of(sgn), cy)}
                    lc_extend(ring, rhs, nested_canonical(cf, term), c)
                prefix += cf.sv.key_degree(len(y[1]), y)
        if lhs != rhs:
            report.fail("coproduct chain map", rep)
    return report


def check_coderivation_relation(der, reps=None):
    """The defining relation of a coderivation at the value level.

    The coproduct of der(x) must equal the sum over coproduct terms of x
    of der applied to one inner factor at a time, with the sign of der
    passing the outer cooperad factor and the earlier inner factors.
    Quadratic in the coproduct, so meant for small instances.
    """
    cf = der.cofree
    ring = cf.ring
    e = der.degree
    report = CheckReport("coderivation relation")
    chosen = list(reps) if reps is not None else list(cf.reps())
    for rep in chosen:
        lhs = {}
        for rep2, c in der.apply(rep).items():
            lc_extend(ring, lhs, nested_canonical(cf, cf.coproduct(rep2)), c)
        rhs = {}
        for (root, inner), c in cf.coproduct(rep).items():
            k = len(inner)
            prefix = cf.d.degree(k, root)
            for j, y in enumerate(inner):
                sgn = -1 if (e % 2 and prefix % 2) else 1
                for y2, cy in der.apply_lc(cf.sv.project(y)).items():
                    term = {(root, inner[:j] + (y2,) + inner[j + 1:]):
                            ring.mul(ring.of(sgn), cy)}
                    lc_extend(ring, rhs, nested_canonical(cf, term), c)
                prefix += cf.sv.key_degree(len(y[1]), y)
        if lhs != rhs:
            report.fail("relation", rep)
    return report


# ---------------------------------------------------------------------------
# morphisms of cofree and quasi-cofree coalgebras
# ---------------------------------------------------------------------------

class CofreeMorphism:
    """The coalgebra morphism S(D, A) -> S(D, B) extending a degree-0
    homomorphism f: S(D, A) -> B blockwise along the coproduct."""

    def __init__(self, src, dst, f_fn, name=""):
        if src.d is not dst.d:
            raise ValueError("source and target need the same cooperad")
        self.src = src
        self.dst = dst
        self.f_fn = f_fn
        self.ring = src.ring
        self.name = name

    def f(self, lc):
        """f on an lc of pre-quotient source keys."""
        ring = self.ring
        out = {}
        for rep, c in self.src.sv.project_lc(lc).items():
            img = self.f_fn(rep)
            if img:
                lc_extend(ring, out, img, c)
        return out

    def apply(self, rep):
        """The extended morphism on one representative, projected."""
        ring = self.ring
        out = {}

        def spread(root, choices, i, chosen, c):
            if i == len(choices):
                lc_add(ring, out, (root, tuple(chosen)), c)
                return
            for bk, cb in choices[i].items():
                spread(root, choices, i + 1, chosen + [bk], ring.mul(c, cb))

        for (root, inner), coeff in self.src.coproduct(rep).items():
            # f has degree 0, so the only sign is the regrouping sign
            # already inside the coproduct terms.
            choices = [self.f({y: ring.one()}) for y in inner]
            if any(not ch for ch in choices):
                continue
            spread(root, choices, 0, [], coeff)
        return self.dst.sv.project_lc(out)

    def apply_lc(self, lc):
        ring = self.ring
        out = {}
        for rep, c in lc.items():
            lc_extend(ring, out, self.apply(rep), c)
        return out


def cofree_morphism_from(src, dst, f_fn, name=""):
    """Extend f: S(D, A) -> B to the coalgebra morphism with weight-one
    corestriction f.  The extension never raises weight, and composing
    with the target projection gives back f."""
    return CofreeMorphism(src, dst, f_fn, name=name)


def counit_f(cf):
    """The weight-one projection as morphism data; its extension is the
    identity of S(D, C)."""
    def f_fn(rep):
        return cf.epsilon({rep: cf.ring.one()})
    return f_fn


def weight_one_f(src, g_fn):
    """Morphism data supported in weight one by a generator map A -> B;
    its extension applies g in every input slot."""
    def f_fn(rep):
        dkey, ckeys = rep
        if len(ckeys) == 1 and dkey == src.d.counit_key:
            return g_fn(ckeys[0])
        return {}
    return f_fn


def check_cofree_morphism(phi, reps=None):
    """Degree-0 bookkeeping, weight monotonicity, the corestriction
    property, and compatibility with the value-level coproducts."""
    report = CheckReport(f"cofree morphism ({phi.name or 'phi'})")
    ring = phi.ring
    src, dst = phi.src, phi.dst
    chosen = list(reps) if reps is not None else list(src.reps())
    for rep in chosen:
        dsum = src.rep_degree(rep)
        img = phi.apply(rep)
        for rep2, _c in img.items():
            if dst.rep_degree(rep2) != dsum:
                report.fail("degree", rep, rep2)
            if len(rep2[1]) > len(rep[1]):
                report.fail("weight", rep, rep2)
        back = dst.epsilon(img)
        want = {}
        ff = phi.f_fn(rep)
        if ff:
            lc_extend(ring, want, ff)
        if back != want:
            report.fail("corestriction", rep, back, want)
        # coproduct compatibility: rho_B(phi x) = (phi block-wise) rho_A(x)
        lhs = {}
        for rep2, c in img.items():
            lc_extend(ring, lhs, nested_canonical(dst, dst.coproduct(rep2)),
                      c)
        rhs = {}

        def spread(root, choices, i, chosen_keys, c):
            if i == len(choices):
                term = {(root, tuple(chosen_keys)): c}
                lc_extend(ring, rhs, nested_canonical(dst, term))
                return
            for yk, cy in choices[i].items():
                spread(root, choices, i + 1, chosen_keys + [yk],
                       ring.mul(c, cy))

        for (root, inner), c in src.coproduct(rep).items():
            choices = [phi.apply_lc(src.sv.project(y)) for y in inner]
            if any(not ch for ch in choices):
                continue
            spread(root, choices, 0, [], c)
        if lhs != rhs:
            report.fail("coproduct compatibility", rep)
    return report


def check_quasicofree_morphism(f_fn, src, dst, name=""):
    """Whether morphism data f respects the twisted differentials.

    For each representative x the residual
        d_B(f x) - f(internal diff x) - f(coderivation x)
                                          + beta(extension of f at x)
    must vanish; it is the weight-one corestriction of the failure of
    the extended morphism to be a chain map for the twisted
    differentials, so the extension is a morphism of quasi-cofree
    coalgebras exactly when every residual is zero.  Failures are
    reported with the weight of the witness.
    """
    report = CheckReport(f"quasi-cofree morphism ({name or 'f'})")
    ring = src.ring
    phi = CofreeMorphism(src.cofree, dst.cofree, f_fn, name=name)
    bmod = dst.cofree.c
    for rep in src.cofree.reps():
        dsum = src.cofree.rep_degree(rep)
        resid = {}
        fx = f_fn(rep) or {}
        for bk, c in fx.items():
            if bmod.degree_of(bk) != dsum:
                report.fail("degree", rep, bk)
            lc_extend(ring, resid, bmod.diff_lc(bk), c)
        n = len(rep[1])
        internal = src.cofree.sv.project_lc(src.cofree.sv.pre_diff(n, rep))
        for rep2, c in internal.items():
            img = f_fn(rep2)
            if img:
                lc_extend(ring, resid, img, ring.neg(c))
        for rep2, c in src.coderivation.apply(rep).items():
            img = f_fn(rep2)
            if img:
                lc_extend(ring, resid, img, ring.neg(c))
        for rep2, c in phi.apply(rep).items():
            img = dst.alpha_fn(rep2)
            if img:
                lc_extend(ring, resid, img, c)
        if resid:
            report.fail("morphism equation", "weight", n, rep, resid)
    return report


# ---------------------------------------------------------------------------
# twists from algebras over tree-like operads
# ---------------------------------------------------------------------------

def algebra_to_quasicofree(cochain, a, weight_bound, name=""):
    """The quasi-cofree coalgebra carried by the underlying module of an
    algebra presented through a cochain.

    ``cochain`` is either a twisting cochain into the endomorphism
    operad of ``a`` or an operad morphism out of a tree-like operad
    (which is restricted to its generators first).  The twist evaluates
    the cochain's multilinear operation on the inputs of a class.
    """
    t = cochain
    if hasattr(t, "source"):
        from .cobar import morphism_to_cochain
        t = morphism_to_cochain(t)
    d = t.d
    ring = t.ring
    cf = CofreeCoalgebra(d, a, weight_bound, name=name)

    def alpha_fn(rep):
        dkey, akeys = rep
        n = len(akeys)
        if n == 1:
            return {}
        out = {}
        for (fo, fi), c in t.theta(n, dkey).items():
            if fi == akeys:
                lc_add(ring, out, fo, c)
        return out

    return QuasiCofreeCoalgebra(cf, alpha_fn, name=name or t.name)


def quasicofree_to_cochain(qc, p=None, name=""):
    """Restrict the twist of a quasi-cofree coalgebra back to a cochain
    into the endomorphism operad of the generators (the inverse of
    :func:`algebra_to_quasicofree` on its image)."""
    from .cobar import TwistingCochain
    from .palg import endomorphism_operad
    cf = qc.cofree
    ring = qc.ring
    if p is None:
        p = endomorphism_operad(cf.c, cf.weight_bound)
    akeys = [k for deg in cf.c.degrees() for k in cf.c.basis[deg]]

    def theta_fn(n, dkey):
        out = {}
        for ins in _cartesian(akeys, repeat=n):
            img = qc.alpha({(dkey, tuple(ins)): ring.one()})
            for fo, c in img.items():
                lc_add(ring, out, (fo, tuple(ins)), c)
        return out

    return TwistingCochain(cf.d, p, theta_fn,
                           name=name or f"{qc.name or 'twist'} restricted")


# ---------------------------------------------------------------------------
# homotopy-associative structures, spelled classically
# ---------------------------------------------------------------------------

class AInfinityStructure:
    """A chain complex with operations m_n: A^n -> A of degree n - 2.

    ``m_fn(n, akeys)`` returns the value on a basis tuple for n >= 2 (a
    falsy value meaning zero); the differential of ``a`` plays the role
    of the arity-one operation.  ``arity_bound`` says up to which arity
    the family is recorded; relations are only meaningful within a
    window whose arities stay under the bound.
    """

    def __init__(self, a, m_fn, arity_bound, name=""):
        self.a = a
        self.ring = a.ring
        self.m_fn = m_fn
        self.arity_bound = arity_bound
        self.name = name

    def m(self, n, akeys):
        if n == 1:
            return self.a.diff_lc(akeys[0])
        if n > self.arity_bound:
            return {}
        return self.m_fn(n, tuple(akeys)) or {}


def _insert_inner(s, outer_n, inner_n, slot, akeys):
    """m_outer(1 x ... x m_inner x ... x 1) on one input tuple, with the
    sign of m_inner passing the first slot-1 inputs."""
    ring = s.ring
    a = s.a
    pre = tuple(akeys[:slot - 1])
    mid = tuple(akeys[slot - 1:slot - 1 + inner_n])
    post = tuple(akeys[slot - 1 + inner_n:])
    prefix = sum(a.degree_of(k) for k in pre)
    inner_deg = inner_n - 2
    sgn = ring.of(-1 if (inner_deg % 2 and prefix % 2) else 1)
    out = {}
    for bk, c in s.m(inner_n, mid).items():
        for rk, c2 in s.m(outer_n, pre + (bk,) + post).items():
            lc_add(ring, out, rk, ring.mul(ring.mul(sgn, c), c2))
    return out


def ainfinity_residual(s, n):
    """The arity-n relation defect on every basis tuple.

    The defect is the hom-complex differential of m_n plus the signed
    substitutions of each m_k (2 <= k <= n-1) into each slot of
    m_{n-k+1}, the substitution at slot e carrying (-1)^(e-1+k(r-e))
    for r the outer arity.  Nonzero entries are returned keyed by the
    input tuple.
    """
    ring = s.ring
    a = s.a
    akeys_all = [k for deg in a.degrees() for k in a.basis[deg]]
    residual = {}
    for ins in _cartesian(akeys_all, repeat=n):
        lc = {}
        for bk, c in s.m(n, ins).items():
            lc_extend(ring, lc, a.diff_lc(bk), c)
        outer = 1 if n % 2 else -1
        prefix = 0
        for i, ak in enumerate(ins):
            inner = -1 if prefix % 2 else 1
            for ak2, c in a.diff_lc(ak).items():
                lc_extend(ring, lc,
                          s.m(n, ins[:i] + (ak2,) + ins[i + 1:]),
                          ring.mul(ring.of(outer * inner), c))
            prefix += a.degree_of(ak)
        for k in range(2, n):
            r = n - k + 1
            for e in range(1, r + 1):
                sgn = ring.of(-1 if (e - 1 + k * (r - e)) % 2 else 1)
                lc_extend(ring, lc, _insert_inner(s, r, k, e, ins), sgn)
        if lc:
            residual[ins] = lc
    return residual


def check_ainfinity_classical(s, arity_bound=None):
    """The relations of a homotopy-associative structure up to an arity
    bound, by direct evaluation on all basis tuples.

    Self-contained on purpose: no coalgebras, no operads, just the
    operations and the Koszul rule, so it can serve as an independent
    crosscheck for the coalgebra route.
    """
    bound = arity_bound if arity_bound is not None else s.arity_bound
    report = CheckReport(f"homotopy-associativity ({s.name or 'A'})")
    a = s.a
    akeys_all = [k for deg in a.degrees() for k in a.basis[deg]]
    for n in range(2, bound + 1):
        for ins in _cartesian(akeys_all, repeat=n):
            want = sum(a.degree_of(k) for k in ins) + n - 2
            for bk, _c in s.m(n, ins).items():
                if a.degree_of(bk) != want:
                    report.fail("degree", n, ins, bk)
    for n in range(2, bound + 1):
        for ins, lc in ainfinity_residual(s, n).items():
            report.fail("relation", n, ins, lc)
    return report


class AInfinityMorphism:
    """A family f_n: A^n -> B of degree n - 1 between two structures.

    ``f_fn(n, akeys)`` returns the value on a basis tuple (falsy for
    zero).  The family is recorded up to ``arity_bound``.
    """

    def __init__(self, src, dst, f_fn, arity_bound, name=""):
        self.src = src
        self.dst = dst
        self.ring = src.ring
        self.f_fn = f_fn
        self.arity_bound = arity_bound
        self.name = name

    def f(self, n, akeys):
        if n > self.arity_bound:
            return {}
        return self.f_fn(n, tuple(akeys)) or {}


def _compositions(n, q):
    """All ways to write n as an ordered sum of q positive integers."""
    if q == 1:
        yield (n,)
        return
    for first in range(1, n - q + 2):
        for rest in _compositions(n - first, q - 1):
            yield (first,) + rest


def ainfinity_morphism_residual(fam, n):
    """The arity-n morphism relation defect on every basis tuple.

    One side substitutes each source operation into each slot of a
    component of the family, with the same (-1)^(e-1+k(r-e)) rule as the
    structure relations (the component f_r standing in the outer
    position, m_1 included through the hom-differential convention);
    the other side applies a target operation to a composition
    f_{i_1} x ... x f_{i_q}, with the sign worked out in
    :func:`_morphism_rhs_sign` and each f passing the inputs of the
    earlier blocks.
    """
    ring = fam.ring
    s, t = fam.src, fam.dst
    a = s.a
    akeys_all = [k for deg in a.degrees() for k in a.basis[deg]]
    residual = {}
    for ins in _cartesian(akeys_all, repeat=n):
        lc = {}
        # hom-differential part: d_B(f_n) - (-1)^(n-1) f_n(.. d ..)
        for bk, c in fam.f(n, ins).items():
            lc_extend(ring, lc, t.a.diff_lc(bk), c)
        outer = -1 if n % 2 else 1
        prefix = 0
        for i, ak in enumerate(ins):
            inner = -1 if prefix % 2 else 1
            for ak2, c in a.diff_lc(ak).items():
                lc_extend(ring, lc,
                          fam.f(n, ins[:i] + (ak2,) + ins[i + 1:]),
                          ring.mul(ring.of(outer * inner), c))
            prefix += a.degree_of(ak)
        # source operations inside components of the family, subtracted
        for k in range(2, n + 1):
            r = n - k + 1
            for e in range(1, r + 1):
                sgn = ring.of(1 if (e - 1 + k * (r - e)) % 2 else -1)
                pre = ins[:e - 1]
                mid = ins[e - 1:e - 1 + k]
                post = ins[e - 1 + k:]
                pdeg = sum(a.degree_of(x) for x in pre)
                pass_sgn = -1 if (k % 2 and pdeg % 2) else 1
                for bk, c in s.m(k, mid).items():
                    for rk, c2 in fam.f(r, pre + (bk,) + post).items():
                        lc_add(ring, lc, rk,
                               ring.mul(ring.mul(sgn, ring.of(pass_sgn)),
                                        ring.mul(c, c2)))
        # target operations on blocks of the family, added back
        for q in range(2, n + 1):
            for parts in _compositions(n, q):
                w = _morphism_rhs_sign(parts)
                starts = [sum(parts[:j]) for j in range(q)]
                blocks = [tuple(ins[starts[j]:starts[j] + parts[j]])
                          for j in range(q)]
                fvals = []
                dead = False
                off = 0
                for j in range(q):
                    fdeg = parts[j] - 1
                    pdeg = sum(a.degree_of(x) for x in ins[:off])
                    psgn = -1 if (fdeg % 2 and pdeg % 2) else 1
                    img = fam.f(parts[j], blocks[j])
                    if not img:
                        dead = True
                        break
                    fvals.append((psgn, img))
                    off += parts[j]
                if dead:
                    continue

                def spread(i, chosen, c):
                    if i == q:
                        for rk, cm in t.m(q, tuple(chosen)).items():
                            lc_add(ring, lc, rk,
                                   ring.mul(ring.of(w), ring.mul(c, cm)))
                        return
                    psgn, img = fvals[i]
                    for bk, cb in img.items():
                        spread(i + 1, chosen + [bk],
                               ring.mul(ring.of(psgn), ring.mul(c, cb)))

                spread(0, [], ring.one())
        if lc:
            residual[ins] = lc
    return residual


def _morphism_rhs_sign(parts):
    """Sign on the target-side term indexed by a composition
    (i_1, ..., i_q): (-1) raised to sum over l of (q - l)*(i_l - 1),
    each component's degree counted against the number of components
    standing to its right."""
    q = len(parts)
    total = sum((q - l - 1) * (part - 1) for l, part in enumerate(parts))
    return -1 if total % 2 else 1


def check_ainfinity_morphism(fam, arity_bound=None):
    """The morphism relations up to an arity bound, by direct
    evaluation; self-contained like :func:`check_ainfinity_classical`."""
    bound = arity_bound if arity_bound is not None else fam.arity_bound
    report = CheckReport(f"homotopy morphism ({fam.name or 'f'})")
    a = fam.src.a
    b = fam.dst.a
    akeys_all = [k for deg in a.degrees() for k in a.basis[deg]]
    for n in range(1, bound + 1):
        for ins in _cartesian(akeys_all, repeat=n):
            want = sum(a.degree_of(k) for k in ins) + n - 1
            for bk, _c in fam.f(n, ins).items():
                if b.degree_of(bk) != want:
                    report.fail("degree", n, ins, bk)
    for n in range(1, bound + 1):
        for ins, lc in ainfinity_morphism_residual(fam, n).items():
            report.fail("relation", n, ins, lc)
    return report
