"""Problem generators: random graphs, MC/MVC encodings, indicator models.

Randomness is driven by numpy's PCG64 generator.  Streams are split
deterministically: a value at coefficient index ``i`` under seed ``s`` comes
from the generator seeded with the entropy sequence ``[s, i]``, so generation
is reproducible across platforms and independent of iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .qubo import QuboModel
from .topology import Region

PI1 = "pi1"
PI2 = "pi2"


@dataclass(frozen=True)
class GraphInstance:
    """Undirected simple graph on vertices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]
    density: float
    seed: int

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ModelError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ModelError(f"edge ({u}, {v}) outside vertex range 0..{self.n - 1}")
            if u > v:
                raise ModelError(f"edge ({u}, {v}) not canonically ordered")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def complement_edges(self) -> list[tuple[int, int]]:
        return [
            (u, v)
            for u in range(self.n)
            for v in range(u + 1, self.n)
            if (u, v) not in self.edges
        ]


@dataclass(frozen=True)
class PenaltyWeights:
    """Penalty constants for the encodings; which ordering is required
    depends on the problem (A < B for MC, B < A for MVC)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ModelError("penalty weights must be positive")


MC_DEFAULT = PenaltyWeights(a=1.0, b=2.0)
MVC_DEFAULT = PenaltyWeights(a=2.0, b=1.0)


@dataclass(frozen=True)
class IndicatorSpec:
    """Request for a random indicator model on a hardware region."""

    kind: str
    region: Region
    seed: int

    def __post_init__(self):
        if self.kind not in (PI1, PI2):
            raise ModelError(f"unknown indicator kind {self.kind!r}")


def gen_er_graph(n: int, density: float, seed: int) -> GraphInstance:
    """G(n, p) graph: each of the n(n-1)/2 pairs kept with probability `density`.

    Pair inclusion is decided in lexicographic pair order from a single
    PCG64 stream seeded with `seed`.
    """
    if n < 1:
        raise ModelError(f"vertex count must be >= 1, got {n}")
    if not (0.0 <= density <= 1.0):
        raise ModelError(f"density must lie in [0, 1], got {density}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    draws = rng.random(len(pairs))
    edges = frozenset(p for p, d in zip(pairs, draws) if d < density)
    return GraphInstance(n=n, edges=edges, density=density, seed=seed)


def mc_qubo(g: GraphInstance, w: PenaltyWeights = MC_DEFAULT) -> QuboModel:
    """Maximum-clique encoding: -A on every vertex, +B on every non-edge.

    Requires A < B so that excluding a conflicting vertex always beats
    keeping it; minimizers are then exactly the maximum cliques.
    """
    if not w.a < w.b:
        raise ModelError(f"MC encoding requires A < B, got A={w.a}, B={w.b}")
    linear = {v: -w.a for v in range(g.n)}
    quadratic = {e: w.b for e in g.complement_edges()}
    return QuboModel.from_terms(linear, quadratic, variables=range(g.n))


def mvc_qubo(g: GraphInstance, w: PenaltyWeights = MVC_DEFAULT) -> tuple[QuboModel, float]:
    """Minimum-vertex-cover encoding, returned with its constant offset A*|E|.

    Expands A * sum_E (1-x_u)(1-x_v) + B * sum_V x_v into
    linear B - A*deg(v), quadratic +A per edge, offset A*|E|.
    Requires 0 < B < A.
    """
    if not w.b < w.a:
        raise ModelError(f"MVC encoding requires B < A, got A={w.a}, B={w.b}")
    linear = {v: w.b for v in range(g.n)}
    for u, v in g.edges:
        linear[u] -= w.a
        linear[v] -= w.a
    quadratic = {e: w.a for e in g.edges}
    offset = w.a * g.num_edges
    return QuboModel.from_terms(linear, quadratic, variables=range(g.n)), offset


def _coefficient_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def _draw(kind: str, seed: int, index: int) -> float:
    rng = _coefficient_rng(seed, index)
    if kind == PI1:
        # open interval: endpoint draws (probability zero) are redrawn
        v = rng.uniform(-1.0, 1.0)
        while not -1.0 < v < 1.0:
            v = rng.uniform(-1.0, 1.0)
        return float(v)
    return 1.0 if rng.random() < 0.5 else -1.0


def gen_indicator(spec: IndicatorSpec) -> QuboModel:
    """Random model on a hardware region: one linear coefficient per node,
    one quadratic coefficient per coupler.

    Coefficient indices run over sorted nodes first, then sorted couplers;
    each index gets its own RNG substream (see module docstring), so the
    result is a pure function of (kind, region, seed).
    """
    nodes = sorted(spec.region.nodes)
    couplers = sorted(spec.region.couplers)
    if not nodes:
        raise ModelError("indicator region is empty")
    linear = {
        node: _draw(spec.kind, spec.seed, idx) for idx, node in enumerate(nodes)
    }
    base = len(nodes)
    quadratic = {
        pair: _draw(spec.kind, spec.seed, base + idx)
        for idx, pair in enumerate(couplers)
    }
    return QuboModel.from_terms(linear, quadratic, variables=nodes)


def save_graph(g: GraphInstance, path: str) -> None:
    """Edge-list text format: header `n <count>`, then one `u v` line per edge."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"n {g.n}\n")
        for u, v in sorted(g.edges):
            f.write(f"{u} {v}\n")


def load_graph(path: str) -> GraphInstance:
    """Read the edge-list format written by :func:`save_graph`."""
    from .errors import GraphFormatError

    n = None
    edges: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "n":
                if len(parts) != 2:
                    raise GraphFormatError("expected `n <count>`", line=lineno)
                n = int(parts[1])
                continue
            if len(parts) != 2:
                raise GraphFormatError("expected `u v`", line=lineno)
            u, v = int(parts[0]), int(parts[1])
            if u == v:
                raise GraphFormatError(f"self-loop on vertex {u}", line=lineno)
            edges.add((u, v) if u < v else (v, u))
    if n is None:
        raise GraphFormatError("missing `n <count>` header")
    npairs = n * (n - 1) // 2
    density = len(edges) / npairs if npairs else 0.0
    return GraphInstance(n=n, edges=frozenset(edges), density=density, seed=-1)
