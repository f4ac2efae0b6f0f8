"""Seeded random instances: G(n, m) graphs, edge weights, Steiner terminals.

Randomness flows only through :class:`Seed` objects.  A seed is a master
64-bit integer plus a spawn path; ``seed.spawn(i, j)`` derives a child whose
stream depends on nothing but ``(master, path)``, so trials can be generated
in any order or in parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bounds import MomentSpec
from .errors import (
    ConnectivityUnreachable,
    ParameterOutOfRange,
    PreconditionViolated,
)
from .unionfind import UnionFind

MAX_CONNECT_ATTEMPTS = 100_000

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class Seed:
    master: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= self.master < 2**64):
            raise ParameterOutOfRange(f"seed must be an unsigned 64-bit integer, got {self.master}")
        if any(p < 0 for p in self.path):
            raise ParameterOutOfRange(f"spawn keys must be nonnegative, got {self.path}")

    def spawn(self, *keys: int) -> Seed:
        return Seed(self.master, self.path + tuple(int(k) for k in keys))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.master, spawn_key=self.path))


def as_seed(seed: Seed | int) -> Seed:
    return seed if isinstance(seed, Seed) else Seed(int(seed))


# ---------------------------------------------------------------- graphs


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` holds ``(u, v, w)`` with ``u < v``, sorted by ``(u, v)``.
    Build from arbitrary input with :meth:`from_edges`.
    """

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ParameterOutOfRange(f"n must be >= 1, got {self.n}")
        prev = None
        for u, v, _ in self.edges:
            if not (0 <= u < v < self.n):
                raise ParameterOutOfRange(f"edge ({u}, {v}) is not canonical for n={self.n}")
            if prev is not None and (u, v) <= prev:
                raise ParameterOutOfRange(f"edges not sorted or duplicated at ({u}, {v})")
            prev = (u, v)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence]) -> WeightedGraph:
        canon = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 0.0
            if u == v:
                raise ParameterOutOfRange(f"self-loop at {u}")
            canon.append((min(u, v), max(u, v), w))
        canon.sort(key=lambda e: (e[0], e[1]))
        return cls(n, tuple(canon))

    @property
    def k(self) -> int:
        return len(self.edges)

    @cached_property
    def weight_of(self) -> dict[tuple[int, int], float]:
        return {(u, v): w for u, v, w in self.edges}

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    def with_weights(self, weights: Sequence[float]) -> WeightedGraph:
        if len(weights) != self.k:
            raise ParameterOutOfRange(f"expected {self.k} weights, got {len(weights)}")
        return WeightedGraph(self.n, tuple((u, v, float(w)) for (u, v, _), w in zip(self.edges, weights)))

    def is_connected(self) -> bool:
        uf = UnionFind(self.n)
        for u, v, _ in self.edges:
            uf.union(u, v)
        return uf.components == 1


def _pairs_table(n: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def _prufer_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform labelled spanning tree of K_n via a random Pruefer sequence."""
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    pairs = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        pairs.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    pairs.append((u, v))
    return pairs


def sample_gnm(n: int, m_edges: int, seed: Seed | int, require_connected: bool = False
               ) -> tuple[WeightedGraph, int]:
    """Like :func:`gen_gnm` but also returns the number of rejected draws."""
    if n < 2:
        raise ParameterOutOfRange(f"n must be >= 2, got {n}")
    total = n * (n - 1) // 2
    low = n - 1 if require_connected else 0
    if not (low <= m_edges <= total):
        raise ParameterOutOfRange(f"m_edges={m_edges} outside [{low}, {total}] for n={n}")
    rng = as_seed(seed).rng()

    if require_connected and m_edges == n - 1:
        # connected with n-1 edges means spanning tree; sample the conditional law directly
        pairs = sorted(_prufer_tree(n, rng))
        return WeightedGraph(n, tuple((u, v, 0.0) for u, v in pairs)), 0

    table = _pairs_table(n)
    for attempt in range(MAX_CONNECT_ATTEMPTS):
        chosen = np.sort(rng.choice(total, size=m_edges, replace=False))
        pairs = [table[i] for i in chosen]
        if require_connected:
            uf = UnionFind(n)
            for u, v in pairs:
                uf.union(u, v)
            if uf.components != 1:
                continue
        return WeightedGraph(n, tuple((u, v, 0.0) for u, v in pairs)), attempt
    raise ConnectivityUnreachable(
        f"no connected G({n}, {m_edges}) after {MAX_CONNECT_ATTEMPTS} attempts")


def gen_gnm(n: int, m_edges: int, seed: Seed | int, require_connected: bool = False) -> WeightedGraph:
    """Erdos-Renyi G(n, m): uniform over all edge sets of size ``m_edges``.

    With ``require_connected`` the draw is conditioned on connectivity by
    rejection (at most ``MAX_CONNECT_ATTEMPTS`` tries).  Weights are zero.
    """
    return sample_gnm(n, m_edges, seed, require_connected)[0]


# ---------------------------------------------------------- distributions

_FAMILIES = {"uniform": 2, "normal": 2, "exponential": 1, "halfnormal": 1}


def _fmt_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 2**53 else repr(float(x))


@dataclass(frozen=True)
class DistributionSpec:
    """An edge-cost law: ``uniform(a, b)``, ``normal(mu, sigma)``,
    ``exponential(lambda)`` or ``halfnormal(sigma)``.

    The string form ``family:p1[:p2]`` (e.g. ``uniform:0:1``) is both the
    CLI syntax and the ``dist_id`` written to CSV output.
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ParameterOutOfRange(f"unknown distribution family {self.family!r}")
        if len(self.params) != _FAMILIES[self.family]:
            raise ParameterOutOfRange(
                f"{self.family} takes {_FAMILIES[self.family]} parameters, got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise ParameterOutOfRange(f"non-finite parameter in {self.params}")
        if self.family == "uniform" and not self.params[0] < self.params[1]:
            raise ParameterOutOfRange(f"uniform needs a < b, got {self.params}")
        if self.family in ("normal", "halfnormal") and not self.params[-1] > 0:
            raise ParameterOutOfRange(f"{self.family} needs sigma > 0, got {self.params[-1]}")
        if self.family == "exponential" and not self.params[0] > 0:
            raise ParameterOutOfRange(f"exponential needs lambda > 0, got {self.params[0]}")

    @classmethod
    def uniform(cls, a: float, b: float) -> DistributionSpec:
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def normal(cls, mu: float, sigma: float) -> DistributionSpec:
        return cls("normal", (float(mu), float(sigma)))

    @classmethod
    def exponential(cls, lam: float) -> DistributionSpec:
        return cls("exponential", (float(lam),))

    @classmethod
    def halfnormal(cls, sigma: float) -> DistributionSpec:
        return cls("halfnormal", (float(sigma),))

    @classmethod
    def parse(cls, text: str) -> DistributionSpec:
        family, *rest = text.strip().lower().split(":")
        try:
            params = tuple(float(p) for p in rest)
        except ValueError:
            raise ParameterOutOfRange(f"bad distribution spec {text!r}") from None
        return cls(family, params)

    @property
    def dist_id(self) -> str:
        return ":".join([self.family, *(_fmt_number(p) for p in self.params)])

    def __str__(self) -> str:
        return self.dist_id

    @property
    def symmetric(self) -> bool:
        return self.family in ("uniform", "normal")

    @property
    def nonnegative(self) -> bool:
        if self.family == "uniform":
            return self.params[0] >= 0
        return self.family in ("exponential", "halfnormal")

    @property
    def moments(self) -> MomentSpec:
        p = self.params
        if self.family == "uniform":
            return MomentSpec((p[0] + p[1]) / 2, (p[1] - p[0]) / math.sqrt(12))
        if self.family == "normal":
            return MomentSpec(p[0], p[1])
        if self.family == "exponential":
            return MomentSpec(1 / p[0], 1 / p[0])
        return MomentSpec(p[0] * math.sqrt(2 / math.pi), p[0] * math.sqrt(1 - 2 / math.pi))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        p = self.params
        if self.family == "uniform":
            return rng.uniform(p[0], p[1], size)
        if self.family == "normal":
            return rng.normal(p[0], p[1], size)
        if self.family == "exponential":
            return rng.exponential(1 / p[0], size)
        return np.abs(rng.normal(0.0, p[0], size))


def assign_weights(g: WeightedGraph, dist: DistributionSpec, seed: Seed | int) -> WeightedGraph:
    """Give each edge an i.i.d. draw from ``dist`` in canonical edge order."""
    if any(w != 0.0 for _, _, w in g.edges):
        raise PreconditionViolated("graph already carries weights")
    draws = dist.sample(as_seed(seed).rng(), g.k)
    return g.with_weights(draws.tolist())


# ---------------------------------------------------------------- Steiner


@dataclass(frozen=True)
class SteinerInstance:
    graph: WeightedGraph
    terminals: frozenset[int]

    def __post_init__(self):
        if not (2 <= len(self.terminals) <= self.graph.n):
            raise ParameterOutOfRange(
                f"need 2 <= |terminals| <= n, got {len(self.terminals)} for n={self.graph.n}")
        if any(not (0 <= t < self.graph.n) for t in self.terminals):
            raise ParameterOutOfRange(f"terminal outside vertex range: {sorted(self.terminals)}")

    @property
    def alpha(self) -> int:
        return len(self.terminals)


def pick_terminals(g: WeightedGraph, count: int, seed: Seed | int) -> SteinerInstance:
    """Uniformly choose ``count`` distinct terminal vertices."""
    if not (2 <= count <= g.n):
        raise ParameterOutOfRange(f"need 2 <= count <= n, got count={count}, n={g.n}")
    chosen = as_seed(seed).rng().choice(g.n, size=count, replace=False)
    return SteinerInstance(g, frozenset(int(t) for t in chosen))


# ----------------------------------------------------------- edge-list io


def format_graph(g: WeightedGraph) -> str:
    """Edge-list text: ``n m`` on line 1, then ``u v w`` per edge."""
    lines = [f"{g.n} {g.k}"]
    lines.extend(f"{u} {v} {w!r}" for u, v, w in g.edges)
    return "\n".join(lines) + "\n"


def _parse_graph_lines(lines: list[str]) -> tuple[WeightedGraph, list[str]]:
    try:
        n, k = (int(x) for x in lines[0].split())
        edges = []
        for line in lines[1:1 + k]:
            u, v, w = line.split()
            edges.append((int(u), int(v), float(w)))
    except (ValueError, IndexError) as exc:
        raise ParameterOutOfRange(f"malformed edge list: {exc}") from None
    if len(edges) != k:
        raise ParameterOutOfRange(f"edge list declares {k} edges but has {len(edges)}")
    return WeightedGraph.from_edges(n, edges), lines[1 + k:]


def parse_graph(text: str) -> WeightedGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    return _parse_graph_lines(lines)[0]


def format_instance(inst: SteinerInstance) -> str:
    """Graph edge list followed by a ``terminals t1 t2 ...`` line."""
    return format_graph(inst.graph) + "terminals " + " ".join(str(t) for t in sorted(inst.terminals)) + "\n"


def parse_instance(text: str) -> WeightedGraph | SteinerInstance:
    """Parse a graph dump, returning a :class:`SteinerInstance` when a
    terminals line follows the edges."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    g, rest = _parse_graph_lines(lines)
    for line in rest:
        head, *tail = line.split()
        if head == "terminals":
            return SteinerInstance(g, frozenset(int(t) for t in tail))
        raise ParameterOutOfRange(f"unexpected line after edge list: {line!r}")
    return g
