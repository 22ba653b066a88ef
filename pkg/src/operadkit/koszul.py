"""Concrete operad/cooperad instances: the word operad of associative
multiplications, operadic (de)suspension via one-dimensional
endomorphism operads, the arity-graded dual pair used by the cobar
examples, and the rational commutative/Lie pair.
"""

from __future__ import annotations

from .coalg import (AInfinityStructure, CofreeCoalgebra,
                    QuasiCofreeCoalgebra, algebra_to_quasicofree,
                    quasicofree_to_cochain)
from .cooperads import dualize_operad
from .dg import GradedModule
from .operads import Operad
from .palg import endomorphism_operad
from .rings import Matrix
from .symseq import (SymSeq, all_permutations, perm_id, perm_inverse,
                     perm_sign)
from .treealg import lc_add


def assoc_operad(arity_bound, ring, name="assoc"):
    """The operad of associative multiplications: the arity-n component
    is free on all words (permutations) of 1..n in degree 0, the action
    relabels letters, and composites substitute words into letters."""
    components = {}
    for n in range(1, arity_bound + 1):
        components[n] = GradedModule(
            ring, {0: tuple(sorted(all_permutations(n)))})

    def act_fn(n, w, word):
        return {tuple(w[a - 1] for a in word): ring.one()}

    seq = SymSeq(ring, components, act_fn, name=name)

    def compose_fn(r, s, e, p, q):
        word = []
        for a in p:
            if a < e:
                word.append(a)
            elif a == e:
                word.extend(b + e - 1 for b in q)
            else:
                word.append(a + s - 1)
        return {tuple(word): ring.one()}

    return Operad(seq, compose_fn, (1,), name=name)


# ---------------------------------------------------------------------------
# aritywise tensor product and one-dimensional endomorphism operads

def hadamard_operad(p, q, name=""):
    """The aritywise tensor product: keys ``(pk, qk)``, diagonal action,
    composites factorwise with the interchange sign moving the first
    factor's q past the second factor's p."""
    if p.ring != q.ring:
        raise ValueError("mixed rings")
    ring = p.ring
    arities = sorted(set(p.arities()) & set(q.arities()))
    components = {}
    for n in arities:
        by_deg = {}
        for kp in p.keys(n):
            dp = p.degree(n, kp)
            for kq in q.keys(n):
                by_deg.setdefault(dp + q.degree(n, kq), []).append((kp, kq))
        basis = {d: tuple(sorted(ks, key=repr)) for d, ks in by_deg.items()}
        mod = GradedModule(ring, basis, check=False)
        diff = {}
        for d in mod.degrees():
            rows, cols = mod.dim(d - 1), mod.dim(d)
            if rows == 0 or cols == 0:
                continue
            mat = Matrix(ring, rows, cols)
            for j, (kp, kq) in enumerate(mod.basis[d]):
                for kp2, c in p.diff_lc(n, kp).items():
                    mat.entries[mod.index(d - 1, (kp2, kq))][j] = c
                sgn = ring.of(-1 if p.degree(n, kp) % 2 else 1)
                for kq2, c in q.diff_lc(n, kq).items():
                    mat.entries[mod.index(d - 1, (kp, kq2))][j] = \
                        ring.mul(sgn, c)
            if not mat.is_zero():
                diff[d] = mat
        components[n] = GradedModule(ring, basis, diff)

    def act_fn(n, w, key):
        kp, kq = key
        out = {}
        for kp2, cp in p.act(n, w, kp).items():
            for kq2, cq in q.act(n, w, kq).items():
                out[(kp2, kq2)] = ring.mul(cp, cq)
        return out

    seq = SymSeq(ring, components, act_fn,
                 name=name or f"{p.name}x{q.name}")

    def compose_fn(r, s, e, key1, key2):
        kp1, kq1 = key1
        kp2, kq2 = key2
        sgn = ring.of(
            -1 if (q.degree(r, kq1) % 2 and p.degree(s, kp2) % 2) else 1)
        out = {}
        for kp3, cp in p.compose_keys(r, s, e, kp1, kp2).items():
            for kq3, cq in q.compose_keys(r, s, e, kq1, kq2).items():
                out[(kp3, kq3)] = ring.mul(sgn, ring.mul(cp, cq))
        return out

    pu, qu = _single_unit(p), _single_unit(q)
    if pu is not None and qu is not None:
        return Operad(seq, compose_fn, (pu, qu),
                      name=name or f"{p.name}x{q.name}")
    unit_lc = {}
    for kp, cp in p.unit_lc.items():
        for kq, cq in q.unit_lc.items():
            unit_lc[(kp, kq)] = ring.mul(cp, cq)
    return Operad(seq, compose_fn, None, unit_lc=unit_lc,
                  name=name or f"{p.name}x{q.name}")


def _single_unit(p):
    if p.unit_key is not None:
        return p.unit_key
    if len(p.unit_lc) == 1:
        (k, c), = p.unit_lc.items()
        if c == p.ring.one():
            return k
    return None


def shift_endomorphism_operad(ring, arity_bound, shift=1):
    """Endomorphisms of a one-dimensional module placed in the given
    degree: one basis map per arity, degree shift*(1-n), carrying the
    sign representation when the shift is odd.  Tensoring with it
    (Hadamard) shifts an operad's components aritywise."""
    mod = GradedModule(ring, {shift: ("s",)})
    return endomorphism_operad(mod, arity_bound,
                               name=f"shift[{shift}]")


# ---------------------------------------------------------------------------
# the dual cooperad of the shifted word operad, and the pairing cochain

def shifted_word_operad(arity_bound, ring):
    """The word operad tensored with the degree-1 shift endomorphisms:
    rank n! in degree 1-n per arity."""
    susp = shift_endomorphism_operad(ring, arity_bound, 1)
    return hadamard_operad(susp, assoc_operad(arity_bound, ring),
                           name="shifted-assoc")


def koszul_dual_cooperad(arity_bound, ring, name="assoc-dual"):
    """Arity-wise linear dual of the shifted word operad: rank n!
    concentrated in degree n-1, with two-vertex coproducts transposing
    the shifted composites."""
    return dualize_operad(shifted_word_operad(arity_bound, ring),
                          arity_bound, name=name)


def word_key_of_dual(dkey):
    """The permutation word inside a dual-cooperad basis key."""
    return dkey[1]


def koszul_pairing_cochain_fn(ring):
    """The degree -1 arity-2 map from the dual cooperad to the word
    operad: the dual key of a word goes to the word, twisted by the
    sign character (the unique equivariant normalization)."""

    def theta_fn(n, dkey):
        if n != 2:
            return {}
        word = word_key_of_dual(dkey)
        return {word: ring.of(perm_sign(word))}

    return theta_fn


# ---------------------------------------------------------------------------
# homotopy-associative structures as twists over the arity-graded dual
# ---------------------------------------------------------------------------

def identity_word_key(d, n):
    """The arity-n basis key of the dual cooperad carrying the identity
    word.  Its classes are a cross-section of the coinvariants, which is
    what ties multilinear operation families to twists."""
    for key in d.keys(n):
        if word_key_of_dual(key) == perm_id(n):
            return key
    raise KeyError(f"no identity word in arity {n}")


def ainfinity_to_quasicofree(s, weight_bound=None, name="", cooperad=None):
    """Present a homotopy-associative structure as a quasi-cofree
    coalgebra over the arity-graded dual.

    Every class of the carrier contains exactly one key whose word is
    the identity; the twist reads m_n there and transports the value
    along the class identification (a signed relabelling), so no
    equivariance is demanded of the m_n themselves.  Pass a shared
    ``cooperad`` when several structures must live over one object.
    """
    bound = weight_bound if weight_bound is not None else s.arity_bound
    d = cooperad if cooperad is not None else \
        koszul_dual_cooperad(bound, s.ring)
    cf = CofreeCoalgebra(d, s.a, bound, name=name or s.name)
    ring = s.ring

    def alpha_fn(rep):
        dkey, akeys = rep
        n = len(akeys)
        if n == 1:
            return {}
        u = word_key_of_dual(dkey)
        img = cf.sv.diagonal_act(n, perm_inverse(u), rep)
        ((key2, c),) = img.items()
        out = {}
        for ak, cm in s.m(n, key2[1]).items():
            lc_add(ring, out, ak, ring.mul(c, cm))
        return out

    return QuasiCofreeCoalgebra(cf, alpha_fn, name=name or s.name)


def quasicofree_to_ainfinity(qc, arity_bound=None, name=""):
    """Read the operation family back off a twist over the arity-graded
    dual through the identity-word classes (inverse to
    :func:`ainfinity_to_quasicofree`)."""
    cf = qc.cofree
    bound = arity_bound if arity_bound is not None else cf.weight_bound
    ring = qc.ring
    keys = {n: identity_word_key(cf.d, n)
            for n in cf.d.arities() if 2 <= n <= bound}

    def m_fn(n, akeys):
        dkey = keys.get(n)
        if dkey is None:
            return {}
        return qc.alpha({(dkey, tuple(akeys)): ring.one()})

    return AInfinityStructure(cf.c, m_fn, bound, name=name or qc.name)


def ainfinity_to_cochain(s, weight_bound=None, name=""):
    """The cochain into the endomorphism operad matching a structure:
    m-family -> twist -> aritywise restriction."""
    qc = ainfinity_to_quasicofree(s, weight_bound, name=name)
    return quasicofree_to_cochain(qc, name=name or s.name)


def cochain_to_ainfinity(t, a, arity_bound, name=""):
    """The operation family of a cochain into the endomorphism operad
    of a: cochain -> twist -> identity-word readout."""
    qc = algebra_to_quasicofree(t, a, arity_bound, name=name)
    return quasicofree_to_ainfinity(qc, arity_bound, name=name or t.name)
