"""Brute-force, desk-scale recognition oracles.

GLP(q) membership, k-leaf-power membership and leaf rank, decided by
exhaustive enumeration of unrooted series-reduced leaf-labeled topologies
combined with exact rational linear feasibility.  Everything is exact;
answers are decisions, not heuristics.

Search layout per graph: topologies are enumerated in a fixed canonical
order (leaf-insertion order); topologies equivalent under an automorphism
of the input graph are collapsed to their orbit representative.  For each
topology every leaf pair gets a threshold-region assignment consistent
with the parity edge rule, pruned by an exact four-point-condition
consistency check on quartets, and surviving assignments are decided by a
margin-1 exact LP over edge weights and thresholds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from . import exactlp
from .errors import CapacityError, CeilingExceededError
from .glp_core import (
    GlpCertificate,
    SimpleGraph,
    ThresholdSequence,
    graph_from_certificate,
    integerize_certificate,
    is_chordal,
)
from .tree_metric import WeightedTree

TOPOLOGY_LEAF_CAP = 9  # n! leaf placements explode beyond this at desk scale


@dataclass
class RecognitionLimits:
    """Size caps for the brute-force searches (configuration, not constants)."""

    max_leaves_q1: int = 8
    max_leaves_q2: int = 8
    max_leaves_q3: int = 6
    max_leaves_other: int = 5
    leaf_rank_ceiling: int = 64

    def cap_for(self, q: int) -> int:
        if q <= 2:
            return max(self.max_leaves_q1, self.max_leaves_q2) if q == 2 else self.max_leaves_q1
        if q == 3:
            return self.max_leaves_q3
        return self.max_leaves_other


DEFAULT_LIMITS = RecognitionLimits()


@dataclass(frozen=True)
class TopologyCatalog:
    """All series-reduced unrooted topologies on n labeled leaves.

    Topologies are edge tuples over integer vertex ids: leaves are
    0..n-1, internal vertices are n, n+1, ...  No two entries are equal
    under leaf-label-preserving isomorphism.
    """

    n_leaves: int
    topologies: tuple


def iter_topologies(n: int) -> Iterator[tuple]:
    """Yield every series-reduced topology on leaves 0..n-1 exactly once.

    Generation is by leaf insertion: leaf k is added to each topology on
    leaves 0..k-1 either by subdividing an edge or by attaching to an
    existing internal vertex.  Removing the highest leaf inverts the step
    uniquely, so no duplicates are produced.
    """
    if n < 1:
        raise CapacityError("need at least 1 leaf")
    if n == 1:
        yield ()
        return
    adj: dict[int, set[int]] = {0: {1}, 1: {0}}
    next_internal = [n]

    def edges_snapshot():
        return tuple(
            sorted((u, v) for u in adj for v in adj[u] if u < v)
        )

    def rec(k):
        if k == n:
            yield edges_snapshot()
            return
        # attach leaf k to an existing internal vertex
        for v in list(adj):
            if v >= n:  # internal
                adj[v].add(k)
                adj[k] = {v}
                yield from rec(k + 1)
                del adj[k]
                adj[v].discard(k)
        # subdivide an edge and hang leaf k on the new internal vertex
        w = next_internal[0]
        next_internal[0] += 1
        for u, v in [(u, v) for u in adj for v in adj[u] if u < v]:
            adj[u].discard(v)
            adj[v].discard(u)
            adj[w] = {u, v, k}
            adj[u].add(w)
            adj[v].add(w)
            adj[k] = {w}
            yield from rec(k + 1)
            del adj[k]
            del adj[w]
            adj[u].discard(w)
            adj[v].discard(w)
            adj[u].add(v)
            adj[v].add(u)
        next_internal[0] -= 1

    yield from rec(2)


def enumerate_topologies(n: int, max_internal: int | None = None) -> TopologyCatalog:
    """Complete duplicate-free catalog; n is capped at desk scale."""
    if not 1 <= n <= TOPOLOGY_LEAF_CAP:
        raise CapacityError(
            f"topology enumeration supports 1 <= n <= {TOPOLOGY_LEAF_CAP}, got {n}"
        )
    topologies = []
    for edges in iter_topologies(n):
        internals = {v for e in edges for v in e if v >= n}
        if max_internal is not None and len(internals) > max_internal:
            continue
        topologies.append(edges)
    return TopologyCatalog(n, tuple(topologies))


# ---------------------------------------------------------------------------
# graph automorphisms and topology orbit representatives


def graph_automorphisms(graph: SimpleGraph) -> list[tuple[int, ...]]:
    """All vertex permutations (as index tuples) preserving adjacency."""
    vertices = graph.vertices
    n = len(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    rows = [0] * n
    for u, v in graph.edge_list():
        i, j = index[u], index[v]
        rows[i] |= 1 << j
        rows[j] |= 1 << i
    # refine candidates by degree to keep the n! scan cheap
    degree = [bin(r).count("1") for r in rows]
    autos = []
    for perm in itertools.permutations(range(n)):
        ok = True
        for i in range(n):
            if degree[i] != degree[perm[i]]:
                ok = False
                break
            mapped = 0
            row = rows[i]
            j = 0
            while row:
                if row & 1:
                    mapped |= 1 << perm[j]
                row >>= 1
                j += 1
            if mapped != rows[perm[i]]:
                ok = False
                break
        if ok:
            autos.append(perm)
    return autos


def _split_key(edges: tuple, n: int) -> tuple:
    """Nontrivial splits of a topology as canonical leaf bitmasks."""
    if not edges:
        return ()
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    full = (1 << n) - 1
    masks = []
    # leaf mask below each edge, via one DFS from leaf 0
    below: dict[tuple[int, int], int] = {}

    def mask_below(child, parent):
        if (child, parent) in below:
            return below[(child, parent)]
        m = 1 << child if child < n else 0
        for nb in adj[child]:
            if nb != parent:
                m |= mask_below(nb, child)
        below[(child, parent)] = m
        return m

    for u, v in edges:
        if u >= n and v >= n:  # internal edge <=> nontrivial split
            m = mask_below(u, v)
            if m & 1:
                m = full & ~m
            masks.append(m)
    return tuple(sorted(masks))


def _permute_mask_tables(perms, n):
    tables = []
    size = 1 << n
    for perm in perms:
        table = [0] * size
        for m in range(size):
            out = 0
            mm = m
            j = 0
            while mm:
                if mm & 1:
                    out |= 1 << perm[j]
                mm >>= 1
                j += 1
            table[m] = out
        tables.append(table)
    return tables


def _is_orbit_representative(key, tables, full):
    for table in tables:
        remapped = []
        for m in key:
            r = table[m]
            if r & 1:
                r = full & ~r
            remapped.append(r)
        remapped.sort()
        if tuple(remapped) < key:
            return False
    return True


# ---------------------------------------------------------------------------
# region assignments, quartet pruning and the feasibility LP


def _pair_paths(edges: tuple, n: int):
    """For each leaf pair, the set of edge indices on its path."""
    adj: dict[int, list[int]] = {v: [] for e in edges for v in e}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    edge_index = {frozenset(e): i for i, e in enumerate(edges)}
    paths = {}
    for a in range(n):
        parent = {a: None}
        order = [a]
        stack = [a]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in parent:
                    parent[v] = u
                    stack.append(v)
                    order.append(v)
        for b in range(a + 1, n):
            path = []
            v = b
            while parent[v] is not None:
                path.append(edge_index[frozenset((v, parent[v]))])
                v = parent[v]
            paths[(a, b)] = tuple(path)
    return paths


def _region_interval(r: int, q: int):
    """Distance interval for region r as linear forms in the thresholds.

    A form is (const, coeffs over theta_1..theta_q); the upper end of the
    last region is None (unbounded).  Region r means theta_r < d <= theta_{r+1}.
    """
    lo = [1] + [1 if i + 1 <= r else 0 for i in range(q)]
    up = None if r == q else [0] + [1 if i == r else 0 for i in range(q)]
    return lo, up


def _form_sup_nonneg(form, q: int) -> bool:
    """Is sup of a linear form over {theta_1>=1, theta_{i+1}>=theta_i+1} >= 0?

    The recession cone is generated by the suffix indicator vectors, so the
    sup is +inf iff some suffix coefficient sum is positive; otherwise the
    max is attained at the vertex theta = (1, 2, ..., q).
    """
    coeffs = form[1:]
    suffix = 0
    for c in reversed(coeffs):
        suffix += c
        if suffix > 0:
            return True
    value = form[0] + sum(c * (i + 1) for i, c in enumerate(coeffs))
    return value >= 0


class _QuartetRules:
    """Exact necessary conditions on region 4-tuples for one quartet.

    For a quartet with tree split P|P' the two cross sums must be able to
    be equal and the split sum must be able to be <= them, with each
    distance ranging freely over its region interval.  This is a sound
    relaxation used purely for pruning.
    """

    def __init__(self, q: int):
        self.q = q
        self._le_memo: dict = {}

    def _possible_le(self, cats_lo, cats_hi) -> bool:
        key = (cats_lo, cats_hi)
        memo = self._le_memo
        if key in memo:
            return memo[key]
        q = self.q
        ups = [_region_interval(r, q)[1] for r in cats_hi]
        if any(u is None for u in ups):
            memo[key] = True
            return True
        los = [_region_interval(r, q)[0] for r in cats_lo]
        form = [0] * (q + 1)
        for u in ups:
            for i, c in enumerate(u):
                form[i] += c
        for lo in los:
            for i, c in enumerate(lo):
                form[i] -= c
        result = _form_sup_nonneg(form, q)
        memo[key] = result
        return result

    def feasible(self, split_cats, cross1_cats, cross2_cats) -> bool:
        c1 = tuple(sorted(cross1_cats))
        c2 = tuple(sorted(cross2_cats))
        if not (self._possible_le(c1, c2) and self._possible_le(c2, c1)):
            return False
        if split_cats is None:  # star quartet: all three sums equal
            return True
        s = tuple(sorted(split_cats))
        return self._possible_le(s, c1) and self._possible_le(s, c2)


def _quartet_structures(n: int, paths):
    """Per 4-subset: the three pair groupings with the split grouping first,
    or all three marked equal for star quartets."""
    structures = []
    for quad in itertools.combinations(range(n), 4):
        a, b, c, d = quad
        pairings = [
            (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))),
            (((a, c), (b, d)), ((a, b), (c, d)), ((a, d), (b, c))),
            (((a, d), (b, c)), ((a, b), (c, d)), ((a, c), (b, d))),
        ]
        split = None
        for idx, (main, _o1, _o2) in enumerate(pairings):
            (p1, p2) = main
            if not set(paths[p1]) & set(paths[p2]):
                split = idx
                break
        if split is None:
            # star quartet: all three sums are forced equal
            structures.append((quad, None, pairings[0]))
        else:
            structures.append((quad, split, pairings[split]))
    return structures


def _allowed_regions(is_edge: bool, q: int) -> tuple:
    # region r => the pair is below q-r thresholds; edge iff that count is odd
    return tuple(r for r in range(q + 1) if ((q - r) % 2 == 1) == is_edge)


class _TopologySearch:
    """Backtracking region-assignment search for one topology."""

    def __init__(self, edges, n, graph_edges_idx, q, rules: _QuartetRules):
        self.edges = edges
        self.n = n
        self.q = q
        self.rules = rules
        self.paths = _pair_paths(edges, n)
        self.pairs = sorted(self.paths)
        self.pair_pos = {p: i for i, p in enumerate(self.pairs)}
        self.allowed = [
            _allowed_regions(p in graph_edges_idx, q) for p in self.pairs
        ]
        self.assignment = [None] * len(self.pairs)
        # branch on forced pairs first, then natural order
        self.order = sorted(
            range(len(self.pairs)), key=lambda i: (len(self.allowed[i]), i)
        )
        when_assigned = {pair_idx: t for t, pair_idx in enumerate(self.order)}
        # each quartet is checked once, when its last pair gets assigned
        structures = _quartet_structures(n, self.paths)
        self.quartets_by_pair = [[] for _ in self.pairs]
        for quad, split, groups in structures:
            trigger = max(
                (self.pair_pos[p] for g in groups for p in g),
                key=when_assigned.__getitem__,
            )
            self.quartets_by_pair[trigger].append((split, groups))

    def _quartets_ok(self, pair_idx) -> bool:
        assignment = self.assignment
        for split, groups in self.quartets_by_pair[pair_idx]:
            cats = []
            ok = True
            for g in groups:
                c = (assignment[self.pair_pos[g[0]]], assignment[self.pair_pos[g[1]]])
                if c[0] is None or c[1] is None:
                    ok = False
                    break
                cats.append(c)
            if not ok:
                continue
            if split is None:
                if not (
                    self.rules.feasible(None, cats[0], cats[1])
                    and self.rules.feasible(None, cats[0], cats[2])
                    and self.rules.feasible(None, cats[1], cats[2])
                ):
                    return False
            else:
                if not self.rules.feasible(cats[0], cats[1], cats[2]):
                    return False
        return True

    def search(self):
        return self._dfs(0)

    def _dfs(self, depth):
        if depth == len(self.order):
            return self._solve_lp()
        pair_idx = self.order[depth]
        for region in self.allowed[pair_idx]:
            self.assignment[pair_idx] = region
            if self._quartets_ok(pair_idx):
                result = self._dfs(depth + 1)
                if result is not None:
                    return result
        self.assignment[pair_idx] = None
        return None

    def _solve_lp(self):
        """Exact feasibility for the full assignment.

        Variables (all >= 0 after shifting):
          x_e = w_e - 1 for each topology edge,
          y_i = theta_i - theta_{i-1} - 1 (theta_0 = 0),
        so theta_i = i + y_1 + ... + y_i and every strict inequality is a
        margin-1 constraint (no solutions are lost: the system is
        scale-invariant).
        """
        m = len(self.edges)
        q = self.q
        constraints = []
        for pos, pair in enumerate(self.pairs):
            r = self.assignment[pos]
            path = self.paths[pair]
            base = len(path)  # contribution of the +1 shifts
            if r >= 1:
                coeffs = {e: 1 for e in path}
                for j in range(r):
                    coeffs[m + j] = coeffs.get(m + j, 0) - 1
                constraints.append((coeffs, exactlp.GE, r + 1 - base))
            if r < q:
                coeffs = {e: 1 for e in path}
                for j in range(r + 1):
                    coeffs[m + j] = coeffs.get(m + j, 0) - 1
                constraints.append((coeffs, exactlp.LE, (r + 1) - base))
        solution = exactlp.find_feasible_point(m + q, constraints)
        if solution is None:
            return None
        weights = [solution[e] + 1 for e in range(m)]
        thetas = []
        acc = Fraction(0)
        for j in range(q):
            acc += solution[m + j] + 1
            thetas.append(acc)
        return weights, thetas


def _certificate_from(topology_edges, n, labels, weights, thetas) -> GlpCertificate:
    if not topology_edges:  # single leaf
        tree = WeightedTree([], {labels[0]: labels[0]}, vertices=[labels[0]])
        return GlpCertificate(tree, ThresholdSequence(tuple(thetas)))
    name = {}
    for e in topology_edges:
        for v in e:
            if v < n:
                name[v] = labels[v]
            else:
                name[v] = f"int{v - n}"
    tree = WeightedTree(
        [(name[u], name[v], w) for (u, v), w in zip(topology_edges, weights)],
        {labels[i]: labels[i] for i in range(n)},
    )
    return GlpCertificate(tree, ThresholdSequence(tuple(thetas)))


def recognize_glp(
    graph: SimpleGraph, q: int, limits: RecognitionLimits | None = None
) -> GlpCertificate | None:
    """Exhaustive GLP(q) membership decision with certificate.

    Returns an integerized certificate from the first feasible topology in
    orbit-reduced canonical enumeration order, or None when no weighted
    tree and threshold sequence exist.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    limits = limits or DEFAULT_LIMITS
    n = len(graph)
    cap = limits.cap_for(q)
    if n > cap:
        raise CapacityError(f"{n} vertices exceeds the q={q} cap of {cap}")
    labels = list(graph.vertices)
    if n == 1:
        tree = WeightedTree([], {labels[0]: labels[0]}, vertices=[labels[0]])
        thetas = tuple(Fraction(k + 1) for k in range(q))
        return GlpCertificate(tree, ThresholdSequence(thetas))
    if q == 1 and not is_chordal(graph):
        return None

    index = {v: i for i, v in enumerate(labels)}
    graph_edges_idx = {
        tuple(sorted((index[u], index[v]))) for u, v in graph.edge_list()
    }
    autos = [p for p in graph_automorphisms(graph) if p != tuple(range(n))]
    tables = _permute_mask_tables(autos, n) if autos else []
    full = (1 << n) - 1
    rules = _QuartetRules(q)

    for edges in iter_topologies(n):
        if tables:
            key = _split_key(edges, n)
            if not _is_orbit_representative(key, tables, full):
                continue
        search = _TopologySearch(edges, n, graph_edges_idx, q, rules)
        result = search.search()
        if result is not None:
            weights, thetas = result
            cert = _certificate_from(edges, n, labels, weights, thetas)
            assert graph_from_certificate(cert) == graph
            return integerize_certificate(cert)
    return None


# ---------------------------------------------------------------------------
# fixed-threshold (integer k) leaf powers


def _ilp_feasible(num_vars, base_constraints, upper_bound):
    """Integer feasibility by LP-based branch and bound (exact rationals)."""

    def rec(extra):
        solution = exactlp.find_feasible_point(
            num_vars, base_constraints + extra
        )
        if solution is None:
            return None
        for i, v in enumerate(solution):
            if v.denominator != 1:
                lo = v.numerator // v.denominator
                left = rec(extra + [({i: 1}, exactlp.LE, lo)])
                if left is not None:
                    return left
                return rec(extra + [({i: 1}, exactlp.GE, lo + 1)])
        return solution

    bounds = [({i: 1}, exactlp.LE, upper_bound) for i in range(num_vars)]
    return rec(bounds)


def is_k_leaf_power(
    graph: SimpleGraph, k: int, limits: RecognitionLimits | None = None
) -> WeightedTree | None:
    """An integer-weighted tree with d(u,v) <= k exactly on the edges, or None.

    Weights above k+1 are never needed (any heavier edge can be cut to
    k+1 without changing which pairs are within k), so the integer search
    is over the finite box [1, k+1]^edges per topology.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    limits = limits or DEFAULT_LIMITS
    n = len(graph)
    if n > limits.max_leaves_q1:
        raise CapacityError(f"{n} vertices exceeds the cap of {limits.max_leaves_q1}")
    labels = list(graph.vertices)
    if n == 1:
        return WeightedTree([], {labels[0]: labels[0]}, vertices=[labels[0]])
    if not is_chordal(graph):
        return None
    index = {v: i for i, v in enumerate(labels)}
    graph_edges_idx = {
        tuple(sorted((index[u], index[v]))) for u, v in graph.edge_list()
    }
    autos = [p for p in graph_automorphisms(graph) if p != tuple(range(n))]
    tables = _permute_mask_tables(autos, n) if autos else []
    full = (1 << n) - 1

    for edges in iter_topologies(n):
        if tables:
            key = _split_key(edges, n)
            if not _is_orbit_representative(key, tables, full):
                continue
        m = len(edges)
        paths = _pair_paths(edges, n)
        constraints = [({e: 1}, exactlp.GE, 1) for e in range(m)]
        ok_shape = True
        for pair, path in paths.items():
            coeffs = {e: 1 for e in path}
            if pair in graph_edges_idx:
                if len(path) > k:  # every edge weighs >= 1
                    ok_shape = False
                    break
                constraints.append((coeffs, exactlp.LE, k))
            else:
                constraints.append((coeffs, exactlp.GE, k + 1))
        if not ok_shape:
            continue
        solution = _ilp_feasible(m, constraints, k + 1)
        if solution is not None:
            weights = [int(v) for v in solution]
            cert = _certificate_from(edges, n, labels, weights, [Fraction(k)])
            assert graph_from_certificate(cert) == graph
            return cert.tree
    return None


def leaf_rank(
    graph: SimpleGraph, limits: RecognitionLimits | None = None
) -> int | None:
    """Smallest integer k for which the graph is a k-leaf power, or None.

    None means the graph is not a leaf power at all (decided by the
    exhaustive GLP(1) search).  An integerized certificate bounds the
    search from above; the configured ceiling guards the loop.
    """
    limits = limits or DEFAULT_LIMITS
    if len(graph) == 1:
        return 1
    cert = recognize_glp(graph, 1, limits)
    if cert is None:
        return None
    theta = integerize_certificate(cert).thresholds.thresholds[0]
    assert theta.denominator == 1
    upper = int(theta)
    ceiling = min(upper, limits.leaf_rank_ceiling)
    for k in range(1, ceiling + 1):
        if is_k_leaf_power(graph, k, limits) is not None:
            return k
    if upper > limits.leaf_rank_ceiling:
        raise CeilingExceededError(
            f"no k-leaf root found up to the ceiling {limits.leaf_rank_ceiling}"
        )
    raise AssertionError("integerized certificate should witness k = upper")
