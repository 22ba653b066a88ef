"""Sign-exact algebra of labelled tree tensors.

A basis element of a tree-shaped tensor product is a pair
``(shape, labels)``: a canonical shape (see :mod:`operadkit.trees`) and
a tuple of component basis keys, one per vertex in root-first DFS order.
Every structural operation (grafting, input relabelling, vertexwise
differentials, vertex blow-up) first builds a *raw* labelled tree whose
nodes remember which tensor factor currently sits on them, then
canonicalizes; the Koszul sign of the induced factor permutation is the
only place signs are created.  Raw nodes are
``("leaf", label)`` or ``("node", fidx, children)`` where ``fidx``
indexes the current factor order.

Linear combinations are plain dicts ``key -> coefficient``.
"""

from __future__ import annotations

from .dg import koszul_sign_permutation
from .trees import shape_encoding, shape_inputs, shape_min_label


def lc_add(ring, acc, key, coeff):
    if coeff == 0:
        return
    cur = acc.get(key)
    if cur is None:
        acc[key] = coeff
    else:
        s = ring.add(cur, coeff)
        if s == 0:
            del acc[key]
        else:
            acc[key] = s


def lc_extend(ring, acc, other, scalar=None):
    for k, c in other.items():
        lc_add(ring, acc, k, c if scalar is None else ring.mul(scalar, c))


def lc_scale(ring, lc, scalar):
    out = {}
    for k, c in lc.items():
        v = ring.mul(scalar, c)
        if v != 0:
            out[k] = v
    return out


def _sort_key(shape):
    m = shape_min_label(shape)
    if m is None:
        return (1, shape_encoding(shape))
    return (0, m)


def raw_min_label(raw):
    if raw[0] == "leaf":
        return raw[1]
    best = None
    for c in raw[2]:
        m = raw_min_label(c)
        if m is not None and (best is None or m < best):
            best = m
    return best


def raw_of(shape, counter=None):
    """Attach DFS factor indices to a canonical shape."""
    if counter is None:
        counter = [0]
    if shape[0] == "leaf":
        return shape
    idx = counter[0]
    counter[0] += 1
    return ("node", idx, tuple(raw_of(c, counter) for c in shape[1]))


def normalize(raw, degrees):
    """Canonicalize a raw labelled tree.

    Returns ``(sign, shape, perm)``: ``perm[i]`` is the factor index of
    the vertex occupying canonical DFS position i, and ``sign`` is the
    Koszul sign for reordering the factors from the order given by
    ``degrees`` (indexed by fidx) into canonical order.
    """

    def norm(r):
        if r[0] == "leaf":
            return ("leaf", r[1]), []
        items = [norm(c) for c in r[2]]
        items.sort(key=lambda t: _sort_key(t[0]))
        shape = ("node", tuple(t[0] for t in items))
        perm = [r[1]]
        for t in items:
            perm.extend(t[1])
        return shape, perm

    shape, perm = norm(raw)
    sign = koszul_sign_permutation(perm, degrees)
    return sign, shape, tuple(perm)


def relabel_leaves(raw, mapping):
    if raw[0] == "leaf":
        return ("leaf", mapping[raw[1]])
    return ("node", raw[1], tuple(relabel_leaves(c, mapping) for c in raw[2]))


def graft_leaf(raw, label, replacement):
    """Substitute the (unique) leaf with the given label."""
    if raw[0] == "leaf":
        return replacement if raw[1] == label else raw
    return ("node", raw[1], tuple(graft_leaf(c, label, replacement) for c in raw[2]))


def replace_node(raw, fidx, builder):
    """Replace the node carrying factor index ``fidx``; ``builder`` is
    called with its children tuple and returns the new raw subtree."""
    if raw[0] == "leaf":
        return raw
    if raw[1] == fidx:
        return builder(raw[2])
    return ("node", raw[1], tuple(replace_node(c, fidx, builder) for c in raw[2]))


def slot_permutation(old_children_keys, new_children_keys):
    """Permutation u with u(j) = new position of old slot j (1-based
    tuples not needed; returns a tuple perm with perm[new_pos] = old_pos
    suitable for composing module actions)."""
    index = {k: i for i, k in enumerate(new_children_keys)}
    return tuple(index[k] for k in old_children_keys)


# ---------------------------------------------------------------------------
# generic operations on (shape, labels) keys

def key_degree(labels, deg_of):
    return sum(deg_of(i, lab) for i, lab in enumerate(labels))


def act_on_key(ring, shape, labels, w, deg_of, vertex_act):
    """Left action of the permutation w (tuple of images, 1-based) on a
    labelled tree with inputs 1..n.

    ``vertex_act(dfs_index, arity, u, label) -> lc`` applies the
    component's action by u in Sigma_arity to one label, where u is
    given as a tuple with u[j] = image (1-based) of slot j+1.

    Returns an lc of (shape, labels) keys.
    """
    mapping = {i + 1: w[i] for i in range(len(w))}
    raw = relabel_leaves(raw_of(shape), mapping)
    degrees = [deg_of(i, lab) for i, lab in enumerate(labels)]

    # per-vertex slot permutations: old slot order vs sorted new order
    slot_perms = {}

    def collect(r):
        if r[0] == "leaf":
            return
        old_keys = [_sort_key_raw(c) for c in r[2]]
        new_order = sorted(range(len(r[2])), key=lambda j: old_keys[j])
        # u: old slot j (0-based) ends up at position new_pos
        u = [0] * len(r[2])
        for new_pos, j in enumerate(new_order):
            u[j] = new_pos + 1
        slot_perms[r[1]] = tuple(u)
        for c in r[2]:
            collect(c)

    collect(raw)
    sign0, shape2, perm = normalize(raw, degrees)

    # expand the product of per-vertex action images
    terms = [(ring.of(sign0), [])]  # (coeff, chosen labels per fidx order 0..k-1)
    for fidx in range(len(labels)):
        arity = _arity_of_fidx(shape, fidx)
        lc = vertex_act(fidx, arity, slot_perms[fidx], labels[fidx])
        new_terms = []
        for coeff, chosen in terms:
            for lab2, c2 in lc.items():
                new_terms.append((ring.mul(coeff, c2), chosen + [lab2]))
        terms = new_terms
    result = {}
    for coeff, chosen in terms:
        new_labels = tuple(chosen[p] for p in perm)
        lc_add(ring, result, (shape2, new_labels), coeff)
    return result


def _strip_fidx(raw):
    if raw[0] == "leaf":
        return raw
    return ("node", tuple(_strip_fidx(c) for c in raw[2]))


def _sort_key_raw(raw):
    from .trees import normalize_shape

    return _sort_key(normalize_shape(_strip_fidx(raw)))


def _arity_of_fidx(shape, target):
    counter = [0]
    found = []

    def rec(s):
        if s[0] == "leaf" or found:
            return
        idx = counter[0]
        counter[0] += 1
        if idx == target:
            found.append(len(s[1]))
            return
        for c in s[1]:
            rec(c)

    rec(shape)
    return found[0]


def differential_on_key(ring, shape, labels, deg_of, vertex_diff):
    """Vertexwise differential with Koszul prefix signs.

    ``vertex_diff(dfs_index, label) -> lc of labels`` (same component).
    """
    out = {}
    prefix = 0
    for i, lab in enumerate(labels):
        lc = vertex_diff(i, lab)
        if lc:
            sgn = -1 if prefix % 2 else 1
            for lab2, c in lc.items():
                labels2 = labels[:i] + (lab2,) + labels[i + 1:]
                lc_add(ring, out, (shape, labels2), ring.mul(ring.of(sgn), c))
        prefix += deg_of(i, lab)
    return out


def graft_keys(ring, key1, n1, e, key2, n2, deg1, deg2):
    """Operadic grafting of labelled trees: plug tree2 (on inputs 1..n2)
    into input e of tree1 (on inputs 1..n1).  Inputs of the result are
    1..n1+n2-1 with tree2's inputs occupying e..e+n2-1.

    ``deg1``/``deg2`` are the factor degree lists.  Returns (lc of keys).
    The factor order before canonicalization is (factors of tree1) then
    (factors of tree2), matching the tensor x (x) y.
    """
    shape1, labels1 = key1
    shape2, labels2 = key2
    k1 = len(labels1)
    map1 = {}
    for i in range(1, n1 + 1):
        if i < e:
            map1[i] = i
        elif i == e:
            map1[i] = ("hole",)
        else:
            map1[i] = i + n2 - 1
    map2 = {j: e + j - 1 for j in range(1, n2 + 1)}
    raw1 = relabel_leaves(raw_of(shape1), map1)
    raw2 = relabel_leaves(raw_of(shape2, [k1]), map2)
    raw = graft_leaf(raw1, ("hole",), raw2)
    degrees = list(deg1) + list(deg2)
    sign, shape, perm = normalize(raw, degrees)
    labels = labels1 + labels2
    new_labels = tuple(labels[p] for p in perm)
    return {(shape, new_labels): ring.of(sign)}


def blow_up_key(ring, shape, labels, vertex_index, image_key, deg_of, image_degs):
    """Replace the vertex at DFS position ``vertex_index`` by the
    labelled tree ``image_key`` (a key on inputs 1..k, k = the vertex's
    arity); slot j of the removed vertex receives leaf j of the image.

    The factor order before canonicalization is: factors before the
    vertex, then the image's factors, then the remaining factors — i.e.
    the image replaces the vertex's slot in the tensor.  No sign for the
    operator move is applied here (callers add the Koszul prefix sign
    for a degree-carrying operator).
    """
    img_shape, img_labels = image_key
    k = len(labels)
    ki = len(img_labels)
    # re-index factors: 0..vertex_index-1 unchanged; image gets
    # vertex_index..vertex_index+ki-1; the tail shifts by ki-1
    def shift_old(i):
        return i if i < vertex_index else i + ki - 1

    raw0 = raw_of(shape)

    def reindex(r):
        if r[0] == "leaf":
            return r
        return ("node", shift_old(r[1]), tuple(reindex(c) for c in r[2]))

    raw0 = reindex(raw0)

    target = shift_old(vertex_index)  # == vertex_index

    def builder(children):
        # image leaves j=1..arity map to the old children (slot order)
        img_raw = raw_of(img_shape, [vertex_index])
        if sorted(shape_inputs(img_shape)) != list(range(1, len(children) + 1)):
            raise ValueError(
                f"image arity mismatch: vertex has {len(children)} slots, "
                f"image tree is on inputs {shape_inputs(img_shape)}")
        mapping = {j + 1: ("slot", j) for j in range(len(children))}
        img_raw = relabel_leaves(img_raw, mapping)
        for j, child in enumerate(children):
            img_raw = graft_leaf(img_raw, ("slot", j), child)
        return img_raw

    raw = replace_node(raw0, target, builder)
    degrees = [0] * (k + ki - 1)
    for i in range(k):
        if i == vertex_index:
            continue
        degrees[shift_old(i)] = deg_of(i, labels[i])
    for j in range(ki):
        degrees[vertex_index + j] = image_degs[j]
    sign, shape2, perm = normalize(raw, degrees)
    flat = list(labels[:vertex_index]) + list(img_labels) + list(labels[vertex_index + 1:])
    new_labels = tuple(flat[p] for p in perm)
    return {(shape2, new_labels): ring.of(sign)}
