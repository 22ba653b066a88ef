"""Rooted trees with labelled inputs, their canonical forms, grafting,
partitions into subtrees, and two-level (height <= 2) enumeration.

A tree on a finite input set I has vertices V and one edge for every
element of I ⊔ V: each input and each vertex has exactly one outgoing
edge, exactly one edge ends at the output (target 0), and every edge
chain reaches the output.  This is stored as the attachment map
``attach: I ⊔ V -> V ⊔ {0}``.

Two parallel representations are used:

* :class:`Tree` -- explicit vertices/edges, validates the axioms;
  this is what the public operations accept and return.
* *shapes* -- nested tuples ``("leaf", label)`` / ``("node", children)``
  with children sorted by minimal reachable input label.  Shapes are
  hashable, canonical by construction, and drive all the heavy
  algorithms (free operads, coproducts, differentials).

The canonical textual encoding of a tree names its vertices v1, v2, ...
in root-first depth-first order (children visited in sorted order) and
prints ``(v1: [leaf-or-subtree, ...])``; the no-vertex unit tree on
input i prints as ``i``.
"""

from __future__ import annotations

from functools import lru_cache


# ---------------------------------------------------------------------------
# shapes

def leaf(label):
    return ("leaf", label)


def node(children):
    return ("node", tuple(children))


def is_leaf(shape):
    return shape[0] == "leaf"


def shape_min_label(shape):
    """Minimal input label reachable above this point (None if no input
    occurs, which only happens when 0-ary vertices are present)."""
    if shape[0] == "leaf":
        return shape[1]
    best = None
    for c in shape[1]:
        m = shape_min_label(c)
        if m is not None and (best is None or m < best):
            best = m
    return best


def _child_sort_key(shape):
    m = shape_min_label(shape)
    if m is None:
        return (1, shape_encoding(shape))
    return (0, m)


def normalize_shape(shape):
    """Recursively sort children by minimal reachable label; returns the
    canonical shape together with the permutation data needed for sign
    bookkeeping (handled by callers via vertex orders, not here)."""
    if shape[0] == "leaf":
        return shape
    kids = tuple(normalize_shape(c) for c in shape[1])
    return ("node", tuple(sorted(kids, key=_child_sort_key)))


def shape_inputs(shape):
    if shape[0] == "leaf":
        return [shape[1]]
    out = []
    for c in shape[1]:
        out.extend(shape_inputs(c))
    return out


def shape_vertex_count(shape):
    if shape[0] == "leaf":
        return 0
    return 1 + sum(shape_vertex_count(c) for c in shape[1])


def shape_arities(shape):
    """Vertex arities in root-first DFS order (children in stored order)."""
    if shape[0] == "leaf":
        return []
    out = [len(shape[1])]
    for c in shape[1]:
        out.extend(shape_arities(c))
    return out


def shape_encoding(shape):
    """Canonical textual form; assumes the shape is normalized."""
    counter = [0]

    def rec(s):
        if s[0] == "leaf":
            return str(s[1])
        counter[0] += 1
        name = f"v{counter[0]}"
        inner = ", ".join(rec(c) for c in s[1])
        return f"({name}: [{inner}])"

    return rec(shape)


def shape_vertex_input_lists(shape):
    """For each vertex in DFS order, the ordered list of its in-edge
    sources: input labels for leaf children, and for vertex children the
    minimal reachable label (used to order composition slots)."""
    out = []

    def rec(s):
        if s[0] == "leaf":
            return
        slots = []
        for c in s[1]:
            if c[0] == "leaf":
                slots.append(c[1])
            else:
                slots.append(shape_min_label(c))
        out.append(slots)
        for c in s[1]:
            rec(c)

    rec(shape)
    return out


# ---------------------------------------------------------------------------
# explicit trees

class Tree:
    """Explicit tree: inputs, vertices, and the attachment map.

    ``attach[x]`` is the target of the unique edge leaving x (a vertex
    id, or 0 for the output).  The four axioms are validated: one edge
    per input and per vertex (structural), exactly one root edge, and
    connectivity to the output (no cycles, no orphans).
    """

    def __init__(self, inputs, vertices, attach):
        self.inputs = tuple(inputs)
        self.vertices = tuple(vertices)
        self.attach = dict(attach)
        self._validate()

    def _validate(self):
        members = set(self.inputs) | set(self.vertices)
        if len(members) != len(self.inputs) + len(self.vertices):
            raise ValueError("inputs and vertices must be disjoint and distinct")
        if set(self.attach) != members:
            raise ValueError("attachment map must cover inputs and vertices exactly")
        roots = [x for x, t in self.attach.items() if t == 0]
        if len(roots) != 1:
            raise ValueError(f"need exactly one root edge, found {len(roots)}")
        vset = set(self.vertices)
        for x, t in self.attach.items():
            if t != 0 and t not in vset:
                raise ValueError(f"edge from {x!r} targets unknown vertex {t!r}")
        for x in members:
            seen = set()
            cur = x
            while cur != 0:
                if cur in seen:
                    raise ValueError(f"cycle through {x!r}")
                seen.add(cur)
                cur = self.attach[cur]

    def edges(self):
        """Edges as (source, target) pairs, one per input and vertex."""
        return [(x, self.attach[x]) for x in list(self.inputs) + list(self.vertices)]

    def in_sources(self, v):
        return [x for x in list(self.inputs) + list(self.vertices) if self.attach[x] == v]

    def root(self):
        for x, t in self.attach.items():
            if t == 0:
                return x
        raise AssertionError

    def to_shape(self):
        """Canonical shape (children sorted by minimal reachable label)."""
        kids_of = {v: [] for v in self.vertices}
        for x, t in self.attach.items():
            if t != 0:
                kids_of[t].append(x)

        def build(x):
            if x not in kids_of:  # an input
                return leaf(x)
            return node(build(c) for c in kids_of[x])

        return normalize_shape(build(self.root()))

    def encoding(self):
        return shape_encoding(self.to_shape())


def vertex_inputs(tree, v):
    """In-edge sources of v, sorted by minimal reachable input label
    (inputs count as their own label)."""
    def min_reach(x):
        if x in tree.inputs or x not in set(tree.vertices):
            return (0, x)
        labels = [min_reach(y) for y in tree.in_sources(x)]
        labels = [l for l in labels if l is not None]
        real = [l for l in labels if l[0] == 0]
        if real:
            return (0, min(l[1] for l in real))
        return (1, str(x))

    return tuple(sorted(tree.in_sources(v), key=min_reach))


def tree_from_shape(shape, vertex_prefix="v"):
    """Materialize a canonical shape as a :class:`Tree` with vertices
    named v1, v2, ... in root-first DFS order."""
    inputs = shape_inputs(shape)
    vertices = []
    attach = {}
    counter = [0]

    def rec(s, parent):
        if s[0] == "leaf":
            attach[s[1]] = parent
            return
        counter[0] += 1
        name = f"{vertex_prefix}{counter[0]}"
        vertices.append(name)
        attach[name] = parent
        for c in s[1]:
            rec(c, name)

    if shape[0] == "leaf":
        return Tree(inputs, (), {shape[1]: 0})
    rec(shape, 0)
    return Tree(inputs, vertices, attach)


class CanonicalTree:
    """A tree in canonical form: DFS-named vertices plus the encoding."""

    def __init__(self, tree):
        self.shape = tree.to_shape() if isinstance(tree, Tree) else normalize_shape(tree)
        self.tree = tree_from_shape(self.shape)
        self.vertex_order = tuple(self.tree.vertices)
        self.encoding = shape_encoding(self.shape)

    def __eq__(self, other):
        return isinstance(other, CanonicalTree) and self.encoding == other.encoding

    def __hash__(self):
        return hash(self.encoding)

    def __repr__(self):
        return f"CanonicalTree({self.encoding})"


# ---------------------------------------------------------------------------
# enumeration

def _set_partitions(items):
    """All partitions of a list into nonempty blocks (each a tuple)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + (first,)] + part[i + 1:]
        yield part + [(first,)]


set_partitions = _set_partitions


def enumerate_shapes(labels, min_arity=1, max_vertices=None, allowed_arities=None):
    """Canonical shapes of trees on the given input labels.

    Every vertex arity k must satisfy k >= min_arity and, when given,
    k in allowed_arities.  max_vertices bounds the vertex count (needed
    to terminate when arity-1 vertices are allowed).  The no-vertex unit
    tree appears exactly when there is a single label.
    """
    labels = tuple(sorted(labels))
    if max_vertices is None:
        unary_possible = min_arity <= 1 and (allowed_arities is None
                                             or 1 in allowed_arities)
        if unary_possible:
            raise ValueError("max_vertices required when arity-1 vertices "
                             "are allowed")
        max_vertices = max(1, len(labels) - 1)

    def ok(k):
        if k < min_arity:
            return False
        return allowed_arities is None or k in allowed_arities

    @lru_cache(maxsize=None)
    def rooted(lbls, budget):
        """Shapes with at least one vertex on the label set lbls."""
        out = []
        if budget < 1:
            return out
        for part in _set_partitions(list(lbls)):
            k = len(part)
            if not ok(k):
                continue
            block_opts = []
            for block in part:
                opts = []
                if len(block) == 1:
                    opts.append((leaf(block[0]), 0))
                for sub in rooted(tuple(sorted(block)), budget - 1):
                    opts.append((sub, shape_vertex_count(sub)))
                block_opts.append(opts)

            def assemble(i, used, chosen):
                if i == len(block_opts):
                    out.append(normalize_shape(node(c for c in chosen)))
                    return
                for s, nv in block_opts[i]:
                    if 1 + used + nv <= budget:
                        assemble(i + 1, used + nv, chosen + [s])

            assemble(0, 0, [])
        return out

    results = []
    if len(labels) == 1:
        results.append(leaf(labels[0]))
    seen = set()
    for s in rooted(labels, max_vertices):
        enc = shape_encoding(s)
        if enc not in seen:
            seen.add(enc)
            results.append(s)
    return results


def enumerate_trees(n_or_labels, min_arity=1, max_vertices=None, allowed_arities=None):
    """Tree enumeration (as :class:`CanonicalTree`) on inputs 1..n or on
    an explicit label list."""
    labels = range(1, n_or_labels + 1) if isinstance(n_or_labels, int) else n_or_labels
    return [
        CanonicalTree(tree_from_shape(s))
        for s in enumerate_shapes(tuple(labels), min_arity, max_vertices, allowed_arities)
    ]


# ---------------------------------------------------------------------------
# two-level trees

class TwoLevelTree:
    """Height <= 2 tree presented by its root data.

    ``blocks``  -- tuple of tuples: the input sets of the level-1
                   vertices, ordered by minimal element;
    ``direct``  -- inputs attached directly to the root (empty for the
                   strict two-level form where every input passes
                   through level 1).

    Root arity = len(blocks) + len(direct).
    """

    def __init__(self, blocks, direct=()):
        blocks = tuple(tuple(sorted(b)) for b in blocks)
        self.blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        self.direct = tuple(sorted(direct))
        self.inputs = tuple(sorted([x for b in self.blocks for x in b] + list(self.direct)))

    @property
    def root_arity(self):
        return len(self.blocks) + len(self.direct)

    def root_slots(self):
        """Root in-edge slots in canonical order: each slot is either
        ("block", index) or ("direct", label), ordered by min label."""
        slots = [("block", i, b[0]) for i, b in enumerate(self.blocks)]
        slots += [("direct", x, x) for x in self.direct]
        slots.sort(key=lambda s: s[2])
        return [(s[0], s[1]) for s in slots]

    def completion(self):
        """Insert unit (arity-1) vertices on the direct inputs, giving a
        strict two-level tree."""
        return TwoLevelTree(list(self.blocks) + [(x,) for x in self.direct])

    def to_tree(self):
        vertices = ["w"] + [f"u{i+1}" for i in range(len(self.blocks))]
        attach = {"w": 0}
        for i, b in enumerate(self.blocks):
            attach[f"u{i+1}"] = "w"
            for x in b:
                attach[x] = f"u{i+1}"
        for x in self.direct:
            attach[x] = "w"
        return Tree(self.inputs, vertices, attach)

    def level(self, v):
        return 0 if v == "w" else 1

    def key(self):
        return (self.blocks, self.direct)

    def __eq__(self, other):
        return isinstance(other, TwoLevelTree) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"TwoLevelTree(blocks={self.blocks}, direct={self.direct})"


def two_level_trees(labels, reduced=False, min_block=1):
    """Isomorphism classes of two-level trees on the given inputs.

    reduced=False: strict two-level classes (every input passes through
    a level-1 vertex; one class per set partition of the inputs).

    reduced=True: height-2 classes with at least one level-1 vertex and
    direct root inputs allowed; pair each with its completion (the
    strict class obtained by inserting unit vertices on direct inputs).
    Returns a list of TwoLevelTree (strict) or (TwoLevelTree, completion)
    pairs (reduced).
    """
    labels = tuple(sorted(labels))
    if not reduced:
        return [
            TwoLevelTree([tuple(b) for b in part])
            for part in _set_partitions(list(labels))
            if all(len(b) >= min_block for b in part)
        ]
    out = []
    n = len(labels)
    for direct_mask in range(2 ** n):
        direct = tuple(labels[i] for i in range(n) if direct_mask >> i & 1)
        rest = [x for x in labels if x not in direct]
        if not rest:
            continue  # need at least one level-1 vertex
        for part in _set_partitions(rest):
            if all(len(b) >= min_block for b in part):
                t = TwoLevelTree([tuple(b) for b in part], direct)
                out.append((t, t.completion()))
    return out


# ---------------------------------------------------------------------------
# grafting / blow-up / partitions

def blow_up(tree, v, sub):
    """Replace vertex v by the tree ``sub`` whose input set must equal
    the in-edge sources of v.  Vertex ids of ``sub`` are prefixed to
    avoid clashes.  Returns the new :class:`Tree`."""
    if v not in set(tree.vertices):
        raise ValueError(f"{v!r} is not a vertex")
    if set(sub.inputs) != set(tree.in_sources(v)):
        raise ValueError("replacement inputs must match the in-edge sources of v")
    ren = {w: ("b", v, w) for w in sub.vertices}
    vertices = [w for w in tree.vertices if w != v] + list(ren.values())
    attach = {}
    for x, t in tree.attach.items():
        if x == v:
            continue
        if t == v:
            continue  # re-established through sub below
        attach[x] = t
    for x, t in sub.attach.items():
        xx = ren.get(x, x)
        if t == 0:
            attach[xx] = tree.attach[v]
        else:
            attach[xx] = ren[t]
    return Tree(tree.inputs, vertices, attach)


def subtree_partitions(tree):
    """All partitions of the vertex set into connected blocks, i.e. all
    subsets of internal edges.  For each partition returns
    (blocks, quotient, pieces):

    * blocks   -- tuple of frozensets of vertex ids;
    * quotient -- Tree with one vertex per block (ids = block indices);
    * pieces   -- per block, the induced Tree whose inputs are the
                  original edge sources entering the block.
    """
    internal = [(x, tree.attach[x]) for x in tree.vertices if tree.attach[x] != 0]
    results = []
    vset = list(tree.vertices)
    for mask in range(2 ** len(internal)):
        kept = [internal[i] for i in range(len(internal)) if mask >> i & 1]
        # union-find over kept edges
        parent = {v: v for v in vset}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in kept:
            parent[find(a)] = find(b)
        groups = {}
        for v in vset:
            groups.setdefault(find(v), []).append(v)
        blocks = tuple(frozenset(g) for g in groups.values())
        block_of = {v: i for i, blk in enumerate(blocks) for v in blk}
        # quotient tree
        q_attach = {}
        for i_blk, blk in enumerate(blocks):
            targets = {tree.attach[v] for v in blk if tree.attach[v] == 0 or block_of.get(tree.attach[v]) != i_blk}
            (t,) = targets  # exactly one outgoing edge per connected block of a tree
            q_attach[("blk", i_blk)] = ("blk", block_of[t]) if t != 0 else 0
        for x in tree.inputs:
            q_attach[x] = ("blk", block_of[tree.attach[x]])
        quotient = Tree(tree.inputs, [("blk", i) for i in range(len(blocks))], q_attach)
        # induced pieces
        pieces = []
        for i_blk, blk in enumerate(blocks):
            ins = [x for x in list(tree.inputs) + list(tree.vertices)
                   if tree.attach[x] in blk and (x not in block_of or block_of.get(x) != i_blk)]
            ins = [x for x in ins if x not in blk]
            p_attach = {x: tree.attach[x] for x in ins}
            for v in blk:
                t = tree.attach[v]
                p_attach[v] = t if t in blk else 0
            pieces.append(Tree(ins, sorted(blk, key=str), p_attach))
        results.append((blocks, quotient, tuple(pieces)))
    return results
