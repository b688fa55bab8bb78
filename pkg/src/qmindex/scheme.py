"""Generic workloads and tree indexing schemes.

An indexing scheme is a rooted tree with a block of dataset points at every
leaf and a decision function at every inner node; answering a range query
walks the tree level by level, expanding exactly the children admitted by
the decision functions and scanning the blocks of the leaves reached.  The
scheme is *consistent* when this traversal never loses a true answer.

Decision functions here are built from per-node certification functions
``f_s`` via the sublevel rule: a child ``s`` is admitted for the query ball
of radius ``eps`` iff ``f_s(center) <= eps``.  For a quasi-metric oracle the
sufficient condition on each ``f_s`` is *left* 1-Lipschitzness
(``f(x) - f(y) <= dist(x, y)``) together with ``f_s <= 0`` on the block of
``s``; for metric oracles ordinary 1-Lipschitz functions do.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

__all__ = [
    "RangeQuery",
    "SearchStats",
    "SearchResult",
    "Workload",
    "IndexScheme",
    "BlockTree",
    "SchemeStructureError",
    "BuildError",
    "FamilyMismatchError",
    "ConsistencyReport",
    "answer",
    "linear_scan_scheme",
    "check_consistency",
    "make_certification",
    "build_cert_tree",
    "build_split_tree",
    "disjoint_sum",
]


class SchemeStructureError(RuntimeError):
    """A decision function produced a node that is not a child of its node."""


class BuildError(ValueError):
    """A certification-tree precondition failed; carries a witness."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class FamilyMismatchError(ValueError):
    """A metric-only certification family was requested for an asymmetric oracle."""


@dataclass(frozen=True)
class RangeQuery:
    """Closed left ball: matches are points with ``dist(center, x) <= radius``."""

    center: Any
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


@dataclass
class SearchStats:
    nodes_visited: int = 0
    decision_evals: int = 0
    leaves_opened: int = 0
    points_scanned: int = 0


@dataclass
class SearchResult:
    """Matches as (dataset index, distance) pairs plus traversal counters."""

    matches: list[tuple[int, Any]]
    stats: SearchStats

    def indices(self) -> set[int]:
        return {i for i, _ in self.matches}


@dataclass(frozen=True)
class Workload:
    """Search domain descriptor, dataset, and the distance generating queries.

    ``dist(center, x)`` is evaluated with the query center first, so an
    asymmetric oracle yields left-ball queries.
    """

    domain: str
    points: tuple
    dist: Callable[[Any, Any], float]

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class IndexScheme:
    """Rooted tree, leaf blocks, and per-inner-node decision functions.

    Nodes are integers with root 0.  ``blocks`` maps each leaf to the set of
    dataset indices it stores; ``decisions`` maps each inner node to a
    function from a query to the admitted subset of its children.  When the
    scheme was assembled from certification functions these are kept in
    ``certs`` (keyed by the certified node, i.e. the child being admitted).
    """

    workload: Workload
    children: list[list[int]]
    parent: list[Optional[int]]
    blocks: dict[int, frozenset[int]]
    decisions: dict[int, Callable[[RangeQuery], Sequence[int]]]
    root: int = 0
    node_members: dict[int, frozenset[int]] = field(default_factory=dict)
    certs: dict[int, Callable[[Any], float]] = field(default_factory=dict)

    def leaves(self) -> list[int]:
        return [t for t, ch in enumerate(self.children) if not ch]

    def inner_nodes(self) -> list[int]:
        return [t for t, ch in enumerate(self.children) if ch]

    def validate(self) -> None:
        n = len(self.children)
        if len(self.parent) != n:
            raise ValueError("parent/children length mismatch")
        for t, ch in enumerate(self.children):
            for s in ch:
                if self.parent[s] != t:
                    raise ValueError(f"node {s} has inconsistent parent")
            if ch and t not in self.decisions:
                raise ValueError(f"inner node {t} lacks a decision function")
            if not ch and t not in self.blocks:
                raise ValueError(f"leaf {t} lacks a block")
        covered = set()
        for b in self.blocks.values():
            covered |= b
        if covered < set(range(len(self.workload.points))):
            missing = min(set(range(len(self.workload.points))) - covered)
            raise ValueError(f"dataset point {missing} is in no leaf block")


def answer(scheme: IndexScheme, query: RangeQuery,
           dist: Callable[[Any, Any], float] | None = None) -> SearchResult:
    """Level-by-level traversal: expand admitted children, scan reached blocks.

    Points appearing in several scanned blocks are evaluated once.  Returns
    exactly the scanned points satisfying the query predicate; whether that
    is *all* matches is the scheme's consistency, not this function's doing.
    """
    if dist is None:
        dist = scheme.workload.dist
    stats = SearchStats()
    matches: list[tuple[int, Any]] = []
    seen: set[int] = set()
    points = scheme.workload.points
    frontier = [scheme.root]
    while frontier:
        next_frontier: list[int] = []
        for t in frontier:
            stats.nodes_visited += 1
            ch = scheme.children[t]
            if ch:
                admitted = list(scheme.decisions[t](query))
                stats.decision_evals += 1
                if not set(admitted) <= set(ch):
                    bad = set(admitted) - set(ch)
                    raise SchemeStructureError(
                        f"decision at node {t} admitted non-children {sorted(bad)}")
                next_frontier.extend(admitted)
            else:
                stats.leaves_opened += 1
                for i in sorted(scheme.blocks[t]):
                    if i in seen:
                        continue
                    seen.add(i)
                    stats.points_scanned += 1
                    d = dist(query.center, points[i])
                    if d <= query.radius:
                        matches.append((i, d))
        frontier = next_frontier
    matches.sort(key=lambda pair: pair[0])
    return SearchResult(matches, stats)


def linear_scan_scheme(workload: Workload) -> IndexScheme:
    """Root with a single leaf holding everything; the trivial consistent scheme."""
    all_idx = frozenset(range(len(workload.points)))
    return IndexScheme(
        workload=workload,
        children=[[1], []],
        parent=[None, 0],
        blocks={1: all_idx},
        decisions={0: lambda q: (1,)},
        node_members={0: all_idx, 1: all_idx},
    )


@dataclass
class ConsistencyReport:
    consistent: bool
    probes_checked: int
    witness: Optional[tuple[RangeQuery, int, int]] = None  # (query, missed point, pruning node)

    def __bool__(self) -> bool:
        return self.consistent


def check_consistency(scheme: IndexScheme, workload: Workload,
                      probes: Sequence[RangeQuery]) -> ConsistencyReport:
    """Compare against a full linear scan on every probe.

    On the first miss, returns the lost dataset index together with the tree
    node whose decision pruned the path towards it.
    """
    if not probes:
        raise ValueError("probes must be nonempty")
    for k, q in enumerate(probes):
        expected = {i for i, x in enumerate(workload.points)
                    if workload.dist(q.center, x) <= q.radius}
        got = answer(scheme, q, workload.dist).indices()
        missing = expected - got
        if missing:
            lost = min(missing)
            pruned_at = _find_pruning_node(scheme, q, lost)
            return ConsistencyReport(False, k + 1, (q, lost, pruned_at))
    return ConsistencyReport(True, len(probes))


def _find_pruning_node(scheme: IndexScheme, query: RangeQuery, lost: int) -> int:
    """First node on a root-to-block path whose decision dropped the lost point."""
    holders = [t for t, b in scheme.blocks.items() if lost in b]
    for leaf in holders:
        path = [leaf]
        while scheme.parent[path[-1]] is not None:
            path.append(scheme.parent[path[-1]])
        path.reverse()
        for t, s in zip(path, path[1:]):
            if s not in set(scheme.decisions[t](query)):
                return t
    return scheme.root


# ---------------------------------------------------------------------------
# Certification functions

_METRIC_FAMILIES = ("gnat", "vp", "mtree")


def make_certification(family: str, params: dict, dist: Callable,
                       *, asymmetric: bool = False) -> Callable[[Any], float]:
    """Build a certification function of a named family.

    Families and their parameters:

    * ``gnat``: ``anchor``, ``median``, ``side`` (+1 admits the inside of the
      median ball, -1 the outside); value ``side * (dist(w, anchor) - median)``.
    * ``vp``: ``vantage_in``, ``vantage_out``; value
      ``(dist(vantage_in, w) - dist(vantage_out, w)) / 2``.
    * ``mtree``: ``anchor``, ``radius`` (precomputed covering radius measured
      from the anchor); value ``dist(anchor, w) - radius``.
    * ``qm_mtree``: ``anchor``, ``radius`` (covering radius measured *towards*
      the anchor); value ``dist(w, anchor) - radius``.  The one family that is
      left 1-Lipschitz for asymmetric oracles.
    * ``custom``: ``func`` is used as-is.

    gnat/vp/mtree assume a symmetric oracle; pass ``asymmetric=True`` to state
    that the oracle is a proper quasi-metric, which rejects those families.
    """
    if family in _METRIC_FAMILIES and asymmetric:
        raise FamilyMismatchError(
            f"family {family!r} requires a metric; the supplied oracle is asymmetric")
    if family == "gnat":
        anchor, median, side = params["anchor"], params["median"], params.get("side", 1)
        return lambda w: side * (dist(w, anchor) - median)
    if family == "vp":
        vin, vout = params["vantage_in"], params["vantage_out"]
        return lambda w: (dist(vin, w) - dist(vout, w)) / 2
    if family == "mtree":
        anchor, radius = params["anchor"], params["radius"]
        return lambda w: dist(anchor, w) - radius
    if family == "qm_mtree":
        anchor, radius = params["anchor"], params["radius"]
        return lambda w: dist(w, anchor) - radius
    if family == "custom":
        return params["func"]
    raise ValueError(f"unknown certification family {family!r}")


@dataclass
class BlockTree:
    """Candidate tree of blocks for :func:`build_cert_tree`.

    ``members[t]`` is the dataset-index content of block ``t`` for every node
    (inner blocks included: the theorem's nesting condition is stated on
    them).  Leaves are nodes without children.
    """

    children: list[list[int]]
    parent: list[Optional[int]]
    members: dict[int, frozenset[int]]

    def leaves(self) -> list[int]:
        return [t for t, ch in enumerate(self.children) if not ch]


def build_cert_tree(workload: Workload, block_tree: BlockTree,
                    certs: dict[int, Callable[[Any], float]],
                    dist: Callable[[Any, Any], float],
                    *, lipschitz_samples: int = 10_000,
                    rng: random.Random | None = None) -> IndexScheme:
    """Assemble a scheme from blocks and certification functions.

    Verifies the two covering conditions exactly over the dataset, verifies
    ``f_t <= 0`` on each certified block exhaustively over its dataset
    members, and spot-checks left 1-Lipschitzness of every certification
    function on randomly sampled dataset pairs (the sample budget is spread
    over the certified nodes).  Consistency of the result then follows from
    the certified-tree theorem whenever the (sampled) hypotheses truly hold.
    """
    rng = rng or random.Random(0)
    points = workload.points
    n = len(points)

    covered = set()
    for t in block_tree.leaves():
        covered |= block_tree.members[t]
    if covered < set(range(n)):
        lost = min(set(range(n)) - covered)
        raise BuildError(f"dataset point {lost} is in no leaf block", lost)

    for t, ch in enumerate(block_tree.children):
        if not ch:
            continue
        union = set()
        for s in ch:
            union |= block_tree.members[s]
        escaped = union - block_tree.members[t]
        if escaped:
            w = min(escaped)
            raise BuildError(
                f"point {w} of a child block escapes its parent block {t}", w)

    non_root = [t for t in range(len(block_tree.children)) if block_tree.parent[t] is not None]
    for t in non_root:
        if t not in certs:
            raise BuildError(f"node {t} lacks a certification function", t)
        f = certs[t]
        for i in sorted(block_tree.members[t]):
            v = f(points[i])
            if v > 0:
                raise BuildError(
                    f"certification at node {t} is positive ({v}) on its own member {i}",
                    (t, i))

    if n >= 2 and non_root:
        per_node = max(1, lipschitz_samples // len(non_root))
        for t in non_root:
            f = certs[t]
            for _ in range(per_node):
                i = rng.randrange(n)
                j = rng.randrange(n)
                x, y = points[i], points[j]
                if f(x) - f(y) > dist(x, y):
                    raise BuildError(
                        f"certification at node {t} is not left 1-Lipschitz: "
                        f"f(x)-f(y) = {f(x) - f(y)} > dist = {dist(x, y)}",
                        (t, i, j))

    decisions = {}
    for t, ch in enumerate(block_tree.children):
        if ch:
            decisions[t] = _sublevel_decision(ch, certs)
    blocks = {t: block_tree.members[t] for t in block_tree.leaves()}
    scheme = IndexScheme(
        workload=workload,
        children=[list(ch) for ch in block_tree.children],
        parent=list(block_tree.parent),
        blocks=blocks,
        decisions=decisions,
        node_members=dict(block_tree.members),
        certs=dict(certs),
    )
    scheme.validate()
    return scheme


def _sublevel_decision(child_ids: Sequence[int], certs: dict[int, Callable]):
    child_ids = tuple(child_ids)

    def decide(query: RangeQuery) -> list[int]:
        return [s for s in child_ids if certs[s](query.center) <= query.radius]

    return decide


# ---------------------------------------------------------------------------
# Recursive split builders for the named families

def build_split_tree(workload: Workload, family: str,
                     dist: Callable[[Any, Any], float],
                     *, leaf_capacity: int = 32,
                     rng: random.Random | None = None,
                     asymmetric: bool = False,
                     lipschitz_samples: int = 10_000) -> IndexScheme:
    """Binary anchor-split tree with certification functions of one family.

    Block-tree construction policy (anchors chosen at random, children split
    around the median anchor distance, recursion stopped at
    ``leaf_capacity``) is deliberately simple; the certified-tree guarantee
    does not depend on the split quality, only on the covering conditions.
    """
    rng = rng or random.Random(0)
    points = workload.points
    children: list[list[int]] = []
    parent: list[Optional[int]] = []
    members: dict[int, frozenset[int]] = {}
    certs: dict[int, Callable] = {}

    def new_node(par: Optional[int]) -> int:
        children.append([])
        parent.append(par)
        return len(children) - 1

    def grow(node: int, idx: list[int]) -> None:
        members[node] = frozenset(idx)
        if len(idx) <= leaf_capacity:
            return
        parts = _split_members(family, idx, points, dist, rng)
        if parts is None:
            return
        for sub_idx, cert_params in parts:
            child = new_node(node)
            children[node].append(child)
            certs[child] = make_certification(
                cert_params.pop("family"), cert_params, dist, asymmetric=asymmetric)
            grow(child, sub_idx)

    root = new_node(None)
    grow(root, list(range(len(points))))
    tree = BlockTree(children, parent, members)
    return build_cert_tree(workload, tree, certs, dist,
                           lipschitz_samples=lipschitz_samples, rng=rng)


def _split_members(family: str, idx: list[int], points, dist, rng):
    """Split block contents in two; returns [(indices, cert params), ...] or None."""
    distinct = {points[i] for i in idx}
    if len(distinct) < 2:
        return None

    if family == "gnat":
        anchor = points[rng.choice(idx)]
        keyed = sorted(idx, key=lambda i: (dist(points[i], anchor), i))
        vals = [dist(points[i], anchor) for i in keyed]
        median = vals[len(vals) // 2]
        near = [i for i in keyed if dist(points[i], anchor) <= median]
        far = [i for i in keyed if dist(points[i], anchor) > median]
        if not far:  # everything at or below the median; fall back to a half split
            near, far = keyed[: len(keyed) // 2], keyed[len(keyed) // 2 :]
            median = max(dist(points[i], anchor) for i in near)
        return [
            (near, {"family": "gnat", "anchor": anchor, "median": median, "side": 1}),
            (far, {"family": "gnat", "anchor": anchor, "median": median, "side": -1}),
        ]

    a_pt, b_pt = _two_anchors(idx, points, rng)
    if family == "vp":
        left = [i for i in idx if dist(a_pt, points[i]) <= dist(b_pt, points[i])]
        leftset = set(left)
        right = [i for i in idx if i not in leftset]
        if not left or not right:
            return None
        return [
            (left, {"family": "vp", "vantage_in": a_pt, "vantage_out": b_pt}),
            (right, {"family": "vp", "vantage_in": b_pt, "vantage_out": a_pt}),
        ]
    if family in ("mtree", "qm_mtree"):
        # mtree measures from the anchor, qm_mtree towards it; use the matching
        # orientation both for assignment and for the covering radius.
        to_anchor = (lambda i, a: dist(points[i], a)) if family == "qm_mtree" \
            else (lambda i, a: dist(a, points[i]))
        left = [i for i in idx if to_anchor(i, a_pt) <= to_anchor(i, b_pt)]
        leftset = set(left)
        right = [i for i in idx if i not in leftset]
        if not left or not right:
            return None
        out = []
        for sub, anchor in ((left, a_pt), (right, b_pt)):
            radius = max(to_anchor(i, anchor) for i in sub)
            out.append((sub, {"family": family, "anchor": anchor, "radius": radius}))
        return out
    raise ValueError(f"unknown split family {family!r}")


def _two_anchors(idx, points, rng):
    i = rng.choice(idx)
    a_pt = points[i]
    others = [j for j in idx if points[j] != a_pt]
    j = rng.choice(others)
    return a_pt, points[j]


# ---------------------------------------------------------------------------
# Disjoint sums

def disjoint_sum(schemes: Sequence[IndexScheme]) -> IndexScheme:
    """Join schemes under a new root that forwards every query to each branch.

    Dataset indices are re-based onto the concatenated dataset.  The
    summands are assumed to share a distance oracle (the usual case: they
    index disjoint parts of one dataset); the first scheme's oracle is used.
    """
    if not schemes:
        raise ValueError("disjoint_sum of an empty collection")
    base = schemes[0].workload

    points: list = []
    children: list[list[int]] = [[]]
    parent: list[Optional[int]] = [None]
    blocks: dict[int, frozenset[int]] = {}
    decisions: dict[int, Callable] = {}
    node_members: dict[int, frozenset[int]] = {}
    certs: dict[int, Callable] = {}

    for sch in schemes:
        node_off = len(children)
        data_off = len(points)
        points.extend(sch.workload.points)
        remap = {t: t + node_off for t in range(len(sch.children))}
        for t, ch in enumerate(sch.children):
            children.append([remap[s] for s in ch])
            parent.append(remap[sch.parent[t]] if sch.parent[t] is not None else 0)
        children[0].append(remap[sch.root])
        for t, b in sch.blocks.items():
            blocks[remap[t]] = frozenset(i + data_off for i in b)
        for t, b in sch.node_members.items():
            node_members[remap[t]] = frozenset(i + data_off for i in b)
        for t, f in sch.decisions.items():
            decisions[remap[t]] = _remapped_decision(f, remap)
        for t, f in sch.certs.items():
            certs[remap[t]] = f

    decisions[0] = lambda q, _roots=tuple(children[0]): _roots
    node_members[0] = frozenset(range(len(points)))
    workload = Workload(
        domain=" + ".join(dict.fromkeys(s.workload.domain for s in schemes)),
        points=tuple(points),
        dist=base.dist,
    )
    scheme = IndexScheme(workload, children, parent, blocks, decisions,
                         node_members=node_members, certs=certs)
    scheme.validate()
    return scheme


def _remapped_decision(f: Callable, remap: dict[int, int]):
    return lambda q: [remap[s] for s in f(q)]
