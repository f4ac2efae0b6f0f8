"""Spanning-tree and Steiner-tree solvers plus exhaustive test oracles."""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GraphDisconnected, InstanceTooLarge, NegativeWeight, ParameterOutOfRange
from .instances import Seed, SteinerInstance, WeightedGraph, as_seed, format_graph
from .unionfind import UnionFind

BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True)
class Forest:
    """An acyclic edge subset of a host graph.

    ``cost`` is recomputed from the host weights on every access (exactly
    rounded with ``math.fsum``), so equal edge sets always compare equal.
    """

    graph: WeightedGraph
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        canon = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", canon)
        host = self.graph.weight_of
        uf = UnionFind(self.graph.n)
        for e in canon:
            if e not in host:
                raise ParameterOutOfRange(f"edge {e} is not in the host graph")
            if not uf.union(*e):
                raise ParameterOutOfRange(f"edge {e} closes a cycle")

    @property
    def cost(self) -> float:
        host = self.graph.weight_of
        return math.fsum(host[e] for e in self.edges)

    @property
    def vertices(self) -> set[int]:
        return {x for e in self.edges for x in e}

    def to_text(self) -> str:
        """``cost <value>`` header followed by the edge-list format."""
        host = self.graph.weight_of
        sub = WeightedGraph(self.graph.n, tuple((u, v, host[(u, v)]) for u, v in self.edges))
        return f"cost {self.cost!r}\n" + format_graph(sub)


class PredicateKind(enum.Enum):
    SPANNING_TREE = "SpanningTree"
    STEINER_CONNECTIVITY = "SteinerConnectivity"


@dataclass(frozen=True)
class FeasibilityPredicate:
    kind: PredicateKind
    terminals: frozenset[int] = frozenset()

    @classmethod
    def spanning_tree(cls) -> FeasibilityPredicate:
        return cls(PredicateKind.SPANNING_TREE)

    @classmethod
    def steiner(cls, terminals: Iterable[int]) -> FeasibilityPredicate:
        return cls(PredicateKind.STEINER_CONNECTIVITY, frozenset(terminals))


def check_feasible(f: Forest, pred: FeasibilityPredicate) -> bool:
    n = f.graph.n
    uf = UnionFind(n)
    for u, v in f.edges:
        uf.union(u, v)
    if pred.kind is PredicateKind.SPANNING_TREE:
        return len(f.edges) == n - 1 and uf.components == 1
    terms = sorted(pred.terminals)
    if not terms:
        return True
    if any(not (0 <= t < n) for t in terms):
        return False
    root = uf.find(terms[0])
    return all(uf.find(t) == root for t in terms[1:])


def _greedy_tree(g: WeightedGraph, order: Iterable[int]) -> Forest:
    uf = UnionFind(g.n)
    chosen = []
    for i in order:
        u, v, _ = g.edges[i]
        if uf.union(u, v):
            chosen.append((u, v))
            if len(chosen) == g.n - 1:
                break
    if uf.components != 1:
        raise GraphDisconnected(f"graph with n={g.n}, k={g.k} is not connected")
    return Forest(g, tuple(chosen))


def mst(g: WeightedGraph) -> Forest:
    """Kruskal: nondecreasing weight, ties broken by canonical edge order."""
    order = sorted(range(g.k), key=lambda i: (g.edges[i][2], i))
    return _greedy_tree(g, order)


def random_feasible_tree(g: WeightedGraph, seed: Seed | int) -> Forest:
    """Weight-blind spanning tree: the greedy union-find pass run over a
    uniformly random permutation of the edges.

    This is not a uniform spanning tree; the output law is whatever that
    procedure induces.  The cost is still evaluated against the real weights.
    """
    order = as_seed(seed).rng().permutation(g.k).tolist()
    return _greedy_tree(g, order)


def _adjacency(g: WeightedGraph) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
    for u, v, w in g.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def _dijkstra(adj, source: int) -> tuple[list[float], list[int]]:
    dist = [math.inf] * len(adj)
    pred = [-1] * len(adj)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def steiner_2approx(inst: SteinerInstance) -> Forest:
    """Distance-network heuristic for the Steiner tree problem.

    1. shortest paths between all terminal pairs (Dijkstra per terminal);
    2. MST of the terminal metric closure;
    3. expand closure edges back into host paths;
    4. MST of the subgraph induced by the touched vertices, then repeatedly
       delete the lowest-numbered non-terminal leaf.

    The result costs at most ``2 * (1 - 1/alpha)`` times the optimum.
    """
    g = inst.graph
    if any(w < 0 for _, _, w in g.edges):
        raise NegativeWeight("the distance-network heuristic needs nonnegative weights")
    terms = sorted(inst.terminals)
    adj = _adjacency(g)
    paths = {t: _dijkstra(adj, t) for t in terms}
    for t in terms[1:]:
        if math.isinf(paths[terms[0]][0][t]):
            raise GraphDisconnected(f"terminals {terms[0]} and {t} are not connected")

    closure = sorted(
        (paths[a][0][b], i, j)
        for i, a in enumerate(terms)
        for j, b in enumerate(terms)
        if i < j
    )
    uf = UnionFind(len(terms))
    touched = set(terms)
    for _, i, j in closure:
        if not uf.union(i, j):
            continue
        pred = paths[terms[i]][1]
        x = terms[j]
        while x != terms[i]:
            touched.add(x)
            x = pred[x]

    induced = [idx for idx, (u, v, _) in enumerate(g.edges) if u in touched and v in touched]
    order = sorted(induced, key=lambda i: (g.edges[i][2], i))
    uf = UnionFind(g.n)
    tree = set()
    for i in order:
        u, v, _ = g.edges[i]
        if uf.union(u, v):
            tree.add((u, v))

    terminal_set = set(terms)
    degree = {x: 0 for x in touched}
    for u, v in tree:
        degree[u] += 1
        degree[v] += 1
    while True:
        leaves = [x for x, d in degree.items() if d == 1 and x not in terminal_set]
        if not leaves:
            break
        leaf = min(leaves)
        edge = next(e for e in tree if leaf in e)
        tree.remove(edge)
        del degree[leaf]
        other = edge[0] if edge[1] == leaf else edge[1]
        degree[other] -= 1
    return Forest(g, tuple(tree))


# ------------------------------------------------------------ brute force


def _guard_size(g: WeightedGraph) -> None:
    if g.n > BRUTE_FORCE_MAX_N:
        raise InstanceTooLarge(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {g.n}")


def brute_force_mst(g: WeightedGraph) -> Forest:
    """Cheapest spanning tree found by trying every (n-1)-subset of edges."""
    _guard_size(g)
    best = None
    best_cost = math.inf
    for subset in itertools.combinations(range(g.k), g.n - 1):
        uf = UnionFind(g.n)
        if all(uf.union(g.edges[i][0], g.edges[i][1]) for i in subset):
            cost = math.fsum(g.edges[i][2] for i in subset)
            if cost < best_cost:
                best, best_cost = subset, cost
    if best is None:
        raise GraphDisconnected(f"graph with n={g.n}, k={g.k} has no spanning tree")
    return Forest(g, tuple(g.edges[i][:2] for i in best))


def _prim(vertices: Sequence[int], weight: dict[tuple[int, int], float]) -> list[tuple[int, int]] | None:
    """Array-based Prim over the listed vertices; None if they are not connected."""
    verts = list(vertices)
    if len(verts) == 1:
        return []
    inside = {verts[0]}
    best = {v: (weight.get((min(verts[0], v), max(verts[0], v)), math.inf), verts[0]) for v in verts[1:]}
    edges = []
    while best:
        v = min(best, key=lambda x: (best[x][0], x))
        w, parent = best.pop(v)
        if math.isinf(w):
            return None
        edges.append((min(v, parent), max(v, parent)))
        inside.add(v)
        for x in best:
            wx = weight.get((min(v, x), max(v, x)), math.inf)
            if wx < best[x][0]:
                best[x] = (wx, v)
    return edges


def brute_force_steiner(g: WeightedGraph, terminals: Iterable[int]) -> Forest:
    """Exact Steiner tree by enumerating every set of Steiner vertices.

    For nonnegative weights an optimal solution is a spanning tree of the
    subgraph induced by ``terminals`` plus some Steiner vertices, so trying
    all ``2**(n - |T|)`` vertex sets with an independent Prim pass is exhaustive.
    """
    _guard_size(g)
    if any(w < 0 for _, _, w in g.edges):
        raise NegativeWeight("brute-force Steiner oracle assumes nonnegative weights")
    terms = sorted(set(terminals))
    others = [v for v in range(g.n) if v not in set(terms)]
    host = g.weight_of
    best = None
    best_cost = math.inf
    for size in range(len(others) + 1):
        for extra in itertools.combinations(others, size):
            tree = _prim(sorted(terms + list(extra)), host)
            if tree is None:
                continue
            cost = math.fsum(host[e] for e in tree)
            if cost < best_cost:
                best, best_cost = tree, cost
    if best is None:
        raise GraphDisconnected("terminals are not connected")
    return Forest(g, tuple(best))
