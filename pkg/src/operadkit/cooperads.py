"""Connected cooperads: two-vertex tree coproducts, their iteration
over arbitrary trees, full composition coproducts, and arity-wise duals
of operads.

A two-vertex tree on inputs 1..n is determined by the input set S of
its top vertex (2 <= |S| <= n-1); the reduced coproduct for that tree
is ``rho(n, S): D(n) -> D(n-|S|+1) (x) D(|S|)``, written on basis keys
as ``rho_fn(n, S, key) -> {(bottom, top): coeff}``.  Both tensor
factors are standardized by the order-preserving relabeling of their
input sets, with the collapsed subtree read as min(S).
"""

from __future__ import annotations

from .dg import GradedModule
from .operads import CheckReport, tree_composite
from .symseq import SymSeq, all_permutations, perm_inverse
from .treealg import act_on_key, lc_add, lc_extend
from .trees import leaf, node, normalize_shape, shape_arities


def two_vertex_shape(n, s_set):
    """The tree on 1..n whose top vertex takes the inputs in s_set."""
    s_set = frozenset(s_set)
    children = [leaf(i) for i in range(1, n + 1) if i not in s_set]
    children.append(node([leaf(i) for i in sorted(s_set)]))
    return normalize_shape(node(children))


def reduced_two_vertex_subsets(n):
    """Input sets S of the top vertex, 2 <= |S| <= n-1, as sorted tuples."""
    from itertools import combinations

    out = []
    for s in range(2, n):
        for comb in combinations(range(1, n + 1), s):
            out.append(comb)
    return out


class Cooperad:
    """A connected cooperad: D(0) = 0, D(1) = free rank one on the
    counit key in degree 0, with two-vertex tree coproducts."""

    def __init__(self, seq, rho_fn, counit_key, name=""):
        if seq.dim(0):
            raise ValueError("cooperad must be connected: D(0) = 0")
        c1 = seq.component(1)
        if seq.dim(1) != 1 or c1.degrees() != [0]:
            raise ValueError("cooperad must be connected: D(1) = free rank "
                             "one in degree 0")
        if c1.basis[0][0] != counit_key:
            raise ValueError("counit key is not the basis of D(1)")
        self.seq = seq
        self.ring = seq.ring
        self._rho_fn = rho_fn
        self.counit_key = counit_key
        self.name = name
        self._cache = {}

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

    def rho(self, n, s_set, key):
        """Two-vertex coproduct for the tree (n, S) on one basis key."""
        s_set = tuple(sorted(s_set))
        if not 2 <= len(s_set) <= n - 1:
            return {}
        ck = (n, s_set, key)
        got = self._cache.get(ck)
        if got is None:
            got = self._rho_fn(n, s_set, key)
            self._cache[ck] = got
        return dict(got)

    def rho_lc(self, n, s_set, lc):
        out = {}
        for k, c in lc.items():
            lc_extend(self.ring, out, self.rho(n, s_set, k), c)
        return out

    def reduced_coproduct_keys(self, n, key):
        """All two-vertex coproducts at once, as an lc over tree-tensor
        keys ``(two_vertex_shape, (bottom, top))``."""
        out = {}
        for s_set in reduced_two_vertex_subsets(n):
            shape = two_vertex_shape(n, s_set)
            for (kb, kt), c in self.rho(n, s_set, key).items():
                lc_add(self.ring, out, (shape, (kb, kt)), c)
        return out


# ---------------------------------------------------------------------------
# iterated coproducts over arbitrary trees

class _Block:
    __slots__ = ("root", "vertices", "slots")

    def __init__(self, root, vertices, slots):
        self.root = root            # DFS index of the block's top vertex
        self.vertices = vertices    # frozenset of DFS indices
        self.slots = slots          # sorted tuple of (label, hangs_from)


class TreeCoproduct:
    """The iterated coproduct ``rho_t: D(n) -> t(D)`` for a tree t with
    every vertex of arity >= 2, computed by cutting internal edges one
    at a time; the result is independent of the cut order (checked
    separately), and the default order is root-most first.

    State: the tree's vertices are partitioned into connected blocks,
    one graded element per block, factors ordered by the DFS index of
    the block's top vertex.  Cutting the edge above vertex w splits the
    block containing w with the two-vertex coproduct of that block's
    collapsed shape; the top factor then moves left to its ordered
    position at the usual Koszul cost.  A block slot is a pair
    (min reachable input label, vertex it hangs from), so a slot lies
    under w exactly when its anchor vertex is in w's subtree.
    """

    def __init__(self, cooperad, tree, edge_order=None):
        shape = getattr(tree, "shape", tree)
        if shape[0] == "leaf":
            raise ValueError("tree must have at least one vertex")
        self.d = cooperad
        self.shape = shape
        self.arities = shape_arities(shape)
        self.parent = {}
        self.leaf_slots = []   # (label, parent vertex) for each input
        self._index_tree()
        self.n = len(self.leaf_slots)
        edges = sorted(v for v in range(len(self.arities)) if v != 0)
        if edge_order is not None:
            if sorted(edge_order) != edges:
                raise ValueError("edge_order must list every non-root vertex")
            edges = list(edge_order)
        self.edge_order = edges

    def _index_tree(self):
        counter = [0]

        def rec(s, par):
            if s[0] == "leaf":
                self.leaf_slots.append((s[1], par))
                return s[1]
            me = counter[0]
            counter[0] += 1
            self.parent[me] = par
            return min(rec(c, me) for c in s[1])

        rec(self.shape, None)

    def apply(self, key):
        """Expand one basis key of D(n) into an lc over (shape, labels)."""
        d = self.d
        ring = d.ring
        if any(a < 2 for a in self.arities):
            return {}
        blocks = [_Block(0, frozenset(range(len(self.arities))),
                         tuple(sorted(self.leaf_slots)))]
        state = {(key,): ring.one()}
        for w in self.edge_order:
            bi = next(i for i, b in enumerate(blocks) if w in b.vertices)
            blk = blocks[bi]
            under = self._subtree_vertices(w, blk.vertices)
            s_positions = tuple(i + 1 for i, sl in enumerate(blk.slots)
                                if sl[1] in under)
            n_b = len(blk.slots)
            top_slots = tuple(sl for sl in blk.slots if sl[1] in under)
            bot_slots = tuple(sorted(
                [sl for sl in blk.slots if sl[1] not in under]
                + [(min(sl[0] for sl in top_slots), self.parent[w])]))
            bot = _Block(blk.root, blk.vertices - under, bot_slots)
            top = _Block(w, under, top_slots)
            # unsorted layout: bot replaces blk, top appended at the end
            unsorted = blocks[:bi] + [bot] + blocks[bi + 1:] + [top]
            top_idx = len(unsorted) - 1
            order = sorted(range(len(unsorted)),
                           key=lambda i: unsorted[i].root)
            target = order.index(top_idx)
            new_blocks = [unsorted[i] for i in order]
            new_state = {}
            for elems, coeff in state.items():
                gamma = elems[bi]
                for (kb, kt), c in d.rho(n_b, s_positions, gamma).items():
                    interim = list(elems)
                    interim[bi] = kb
                    # rho leaves kt right after kb (final slot bi, since
                    # earlier blocks keep their positions); moving kt to
                    # `target` passes the factors strictly between
                    passed = 0
                    for pos in range(bi + 1, target):
                        src = order[pos]
                        passed += d.degree(len(unsorted[src].slots),
                                           interim[src])
                    kt_deg = d.degree(len(top_slots), kt)
                    sign = ring.of(-1 if (kt_deg % 2 and passed % 2) else 1)
                    new_elems = tuple(
                        kt if order[pos] == top_idx else interim[order[pos]]
                        for pos in range(len(new_blocks)))
                    lc_add(ring, new_state, new_elems,
                           ring.mul(coeff, ring.mul(sign, c)))
            blocks = new_blocks
            state = new_state
            if not state:
                return {}
        out = {}
        for elems, coeff in state.items():
            lc_add(ring, out, (self.shape, tuple(elems)), coeff)
        return out

    def _subtree_vertices(self, w, within):
        out = {w}
        grew = True
        while grew:
            grew = False
            for u in within:
                if u not in out and self.parent.get(u) in out:
                    out.add(u)
                    grew = True
        return frozenset(out)


def iterate_coproduct(d, tree, edge_order=None):
    return TreeCoproduct(d, tree, edge_order)


# ---------------------------------------------------------------------------
# full composition coproduct

def full_coproduct(d, n):
    """The coproduct ``nu: D(n) -> (D o D)(n)`` on basis keys, as a dict
    key -> lc over two-level keys (the basis of symseq.compose(d.seq,
    d.seq) at arity n).

    nu collects: the root-unital term (unit on every top), the
    top-unital term (unit root), and one iterated-coproduct term per
    family of disjoint input blocks of size >= 2.
    """
    from itertools import combinations

    ring = d.ring
    out = {}
    unit = d.counit_key
    if n == 1:
        shape = normalize_shape(node([node([leaf(1)])]))
        for key in d.keys(1):
            out[key] = {(shape, (unit, key)): ring.one()}
        return out

    # enumerate families of pairwise-disjoint subsets of 1..n, size >= 2
    def families(avail):
        avail = sorted(avail)
        if not avail:
            yield []
            return
        first = avail[0]
        rest = avail[1:]
        # families not using `first`
        for fam in families(rest):
            yield fam
        # families whose block contains `first`
        for s in range(1, len(rest) + 1):
            for extra in combinations(rest, s):
                block = (first,) + extra
                remaining = [x for x in rest if x not in extra]
                for fam in families(remaining):
                    yield [block] + fam

    fams = [fam for fam in families(range(1, n + 1))]

    for key in d.keys(n):
        lc = {}
        # top-unital term: unit root, the whole of gamma on top
        top_shape = normalize_shape(node([node([leaf(i)
                                                for i in range(1, n + 1)])]))
        lc_add(ring, lc, (top_shape, (unit, key)), ring.one())
        for fam in fams:
            blocks = sorted(fam, key=lambda b: b[0])
            singles = [i for i in range(1, n + 1)
                       if all(i not in b for b in blocks)]
            all_blocks = sorted([tuple([i]) for i in singles] + list(blocks),
                                key=lambda b: b[0])
            shape = normalize_shape(node([node([leaf(x) for x in b])
                                          for b in all_blocks]))
            if not blocks:
                # root-unital term: gamma at the root, units on top
                lc_add(ring, lc, (shape, (key,) + (unit,) * n), ring.one())
                continue
            # iterated coproduct over the height-2 tree with one vertex
            # per size->=2 block
            height2 = normalize_shape(node(
                [leaf(x) for x in singles]
                + [node([leaf(y) for y in b]) for b in blocks]))
            rho_t = iterate_coproduct(d, height2)
            for (sh2, labels), c in rho_t.apply(key).items():
                # labels = (root, block elements in DFS = min-sorted order);
                # insert units at the singleton blocks (degree 0: no signs)
                root_elem = labels[0]
                by_block = dict(zip(sorted(blocks, key=lambda b: min(b)),
                                    labels[1:]))
                full_labels = [root_elem]
                for b in all_blocks:
                    if len(b) == 1:
                        full_labels.append(unit)
                    else:
                        full_labels.append(by_block[b])
                lc_add(ring, lc, (shape, tuple(full_labels)), c)
        out[key] = lc
    return out


def counit_laws_report(d, n):
    """(eps o D).nu = id = (D o eps).nu at one arity."""
    report = CheckReport(f"counit laws for {d.name or 'cooperad'} arity {n}")
    ring = d.ring
    nu = full_coproduct(d, n)
    unit = d.counit_key
    for key, lc in nu.items():
        left = {}   # keep terms with unit root (arity-1 root, unit label)
        right = {}  # keep terms with every top a unit
        for (shape, labels), c in lc.items():
            blocks = shape[1]
            if len(blocks) == 1 and labels[0] == unit:
                lc_add(ring, left, labels[1], c)
            if all(labels[j] == unit for j in range(1, len(labels))):
                lc_add(ring, right, labels[0], c)
        if left != {key: ring.one()}:
            report.fail("counit-left", n, key, left)
        if right != {key: ring.one()}:
            report.fail("counit-right", n, key, right)
    return report


# ---------------------------------------------------------------------------
# cooperad verification

def check_cooperad(d, arity_bound, rng=None):
    """Differential compatibility, equivariance, order-independence of
    iterated coproducts, and counit laws, for arities <= bound."""
    report = CheckReport(f"cooperad structure of {d.name or 'cooperad'}")
    ring = d.ring

    for n in [a for a in d.arities() if 2 <= a <= arity_bound]:
        # differentials commute with every two-vertex coproduct
        for s_set in reduced_two_vertex_subsets(n):
            r_, s_ = n - len(s_set) + 1, len(s_set)
            for key in d.keys(n):
                after = d.rho_lc(n, s_set, d.diff_lc(n, key))
                before = {}
                for (kb, kt), c in d.rho(n, s_set, key).items():
                    for kb2, cb in d.diff_lc(r_, kb).items():
                        lc_add(ring, before, (kb2, kt), ring.mul(c, cb))
                    sgn = ring.of(-1 if d.degree(r_, kb) % 2 else 1)
                    for kt2, ct in d.diff_lc(s_, kt).items():
                        lc_add(ring, before, (kb, kt2),
                               ring.mul(c, ring.mul(sgn, ct)))
                if after != before:
                    report.fail("coproduct-differential", n, s_set, key)
        # degree check: rho is degree 0
        for s_set in reduced_two_vertex_subsets(n):
            r_, s_ = n - len(s_set) + 1, len(s_set)
            for key in d.keys(n):
                for (kb, kt), _c in d.rho(n, s_set, key).items():
                    if d.degree(r_, kb) + d.degree(s_, kt) != d.degree(n, key):
                        report.fail("coproduct-degree", n, s_set, key,
                                    (kb, kt))
        # equivariance of the total reduced coproduct, via the tree-key
        # action engine
        perms = all_permutations(n)
        if rng is not None and len(perms) > 8:
            perms = rng.sample(perms, 8)
        for key in d.keys(n):
            base = d.reduced_coproduct_keys(n, key)
            for w in perms:
                lhs = {}
                for k2, c in d.act(n, w, key).items():
                    lc_extend(ring, lhs, d.reduced_coproduct_keys(n, k2), c)
                rhs = {}
                for (shape, labels), c in base.items():
                    arities = shape_arities(shape)
                    img = act_on_key(
                        ring, shape, labels, w,
                        lambda i, lab: d.degree(arities[i], lab),
                        lambda i, a, u, lab: d.act(a, u, lab))
                    lc_extend(ring, rhs, img, c)
                if lhs != rhs:
                    report.fail("coproduct-equivariance", n, w, key)
        # iterated coproducts: edge-order independence on 3-vertex trees
        from .trees import enumerate_shapes

        support = [a for a in d.arities() if a >= 2]
        shapes3 = [s for s in enumerate_shapes(tuple(range(1, n + 1)),
                                               allowed_arities=support)
                   if s[0] == "node" and len(shape_arities(s)) in (2, 3)]
        for shape in shapes3:
            v = len(shape_arities(shape))
            if v < 2:
                continue
            orders = [None, list(range(v - 1, 0, -1))]
            base_map = None
            for order in orders:
                rho_t = iterate_coproduct(d, shape, edge_order=order)
                cur = {key: rho_t.apply(key) for key in d.keys(n)}
                if base_map is None:
                    base_map = cur
                elif cur != base_map:
                    report.fail("iterate-order-dependence", n, shape, order)
        # counit laws
        sub = counit_laws_report(d, n)
        report.failures.extend(sub.failures)
    return report


# ---------------------------------------------------------------------------
# duals of operads

def dualize_operad(p, arity_bound, name=""):
    """The arity-wise dual cooperad of a connected operad with
    degreewise finite components.

    Basis keys are reused verbatim (read as the dual basis); degrees
    are negated; the differential is the signed transpose
    ``d(x*) = -(-1)^{|x*|} (x*) o d``; the action is
    ``w.(x*) = (w^{-1}-action matrix) transpose``; the two-vertex
    coproduct for (n, S) is the signed transpose of the tree composite
    for the same tree, with the graded pairing sign (-1)^{|b||t|}.
    """
    ring = p.ring
    if p.dim(0):
        raise ValueError("dual cooperad needs a connected operad: P(0) = 0")
    if p.dim(1) != 1:
        raise ValueError("dual cooperad needs P(1) = free rank one")

    components = {}
    for n in [a for a in p.arities() if a <= arity_bound]:
        comp = p.component(n)
        basis = {-deg: tuple(comp.basis[deg]) for deg in comp.degrees()}
        diff = {}
        for deg in comp.degrees():
            mat = comp.diff_matrix(deg)  # P(n)_deg -> P(n)_{deg-1}
            if mat.is_zero():
                continue
            # dual map D_{-(deg-1)} -> D_{-deg} sends x* (x of degree
            # deg-1) to -(-1)^{|x*|} x*.d with |x*| = -(deg-1), i.e. the
            # transpose scaled by (-1)^deg
            sgn = ring.of(-1 if deg % 2 else 1)
            diff[-(deg - 1)] = mat.transpose().scale(sgn)
        components[n] = GradedModule(ring, basis, diff)

    act_tables = {}

    def act_fn(n, w, key):
        tab = act_tables.get((n, w))
        if tab is None:
            tab = {}
            winv = perm_inverse(w)
            for y in p.keys(n):
                for x, c in p.act(n, winv, y).items():
                    tab.setdefault(x, {})[y] = c
            act_tables[(n, w)] = tab
        return dict(tab.get(key, {}))

    seq = SymSeq(ring, components, act_fn,
                 name=name or (p.name + "-dual" if p.name else "dual"))

    tables = {}

    def rho_fn(n, s_set, key):
        table = tables.get((n, s_set))
        if table is None:
            shape = two_vertex_shape(n, s_set)
            r_, s_ = n - len(s_set) + 1, len(s_set)
            table = {}
            for kb in p.keys(r_):
                db = p.degree(r_, kb)
                for kt in p.keys(s_):
                    dt = p.degree(s_, kt)
                    sgn = ring.of(-1 if (db % 2 and dt % 2) else 1)
                    for ck, c in tree_composite(p, shape, (kb, kt)).items():
                        table.setdefault(ck, {})[(kb, kt)] = ring.mul(sgn, c)
            tables[(n, s_set)] = table
        return dict(table.get(key, {}))

    return Cooperad(seq, rho_fn, p.unit_key,
                    name=name or (p.name + "-dual" if p.name else "dual"))
