"""Clique minor-embeddings on Chimera, chain handling, and sample decoding.

The clique construction is the deterministic L-shaped scheme: logical
variable v with group g = v // t and offset k = v % t owns the vertical
qubits of column-cell (r, g) for r = 0..g plus the horizontal qubits of
row-cell (g, c) for c = g..G-1, where G = ceil(k_total / t) is the number of
cell blocks in use.  Chains have length G + 1 <= m + 1 and any two chains
meet at an intra-cell coupler.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    CapacityError,
    EmbeddingError,
    EvaluationError,
    GraphFormatError,
    ModelError,
)
from .qubo import QuboModel, Sample
from .topology import HardwareGraph, chimera_node_id


@dataclass(frozen=True)
class Embedding:
    """Mapping logical variable id -> chain of physical qubit ids."""

    chains: dict[int, tuple[int, ...]]
    hardware: HardwareGraph

    @property
    def footprint(self) -> set[int]:
        """All physical qubits claimed by some chain."""
        out: set[int] = set()
        for chain in self.chains.values():
            out.update(chain)
        return out

    @property
    def max_chain_length(self) -> int:
        return max(len(c) for c in self.chains.values())


@dataclass(frozen=True)
class ChainStrengthPolicy:
    """Either a fixed coupling magnitude or the RMS-based heuristic."""

    mode: str  # "fixed" | "utc"
    value: float = 0.0
    prefactor: float = 1.0

    def __post_init__(self):
        if self.mode not in ("fixed", "utc"):
            raise ModelError(f"unknown chain strength mode {self.mode!r}")
        if self.mode == "fixed" and self.value <= 0:
            raise ModelError("fixed chain strength must be positive")
        if self.mode == "utc" and self.prefactor <= 0:
            raise ModelError("utc prefactor must be positive")


@dataclass
class EmbeddingReport:
    """Validation outcome; `violations` lists every failed check."""

    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _chimera_dims(g: HardwareGraph) -> tuple[int, int]:
    match = re.fullmatch(r"chimera\((\d+),(\d+)\)", g.topology_kind)
    if not match:
        raise EmbeddingError(
            f"clique construction needs a generated chimera graph, got {g.topology_kind!r}"
        )
    return int(match.group(1)), int(match.group(2))


def _clique_chains(
    m: int, t: int, k: int, row0: int = 0, col0: int = 0
) -> dict[int, tuple[int, ...]]:
    blocks = math.ceil(k / t)
    chains: dict[int, tuple[int, ...]] = {}
    if k == 1:
        return {0: (chimera_node_id(m, t, row0, col0, 0, 0),)}
    for v in range(k):
        grp, off = divmod(v, t)
        vertical = [
            chimera_node_id(m, t, row0 + r, col0 + grp, 0, off) for r in range(grp + 1)
        ]
        horizontal = [
            chimera_node_id(m, t, row0 + grp, col0 + c, 1, off)
            for c in range(grp, blocks)
        ]
        chains[v] = tuple(vertical + horizontal)
    return chains


def chimera_clique_embedding(
    g: HardwareGraph, k: int, origin: tuple[int, int] = (0, 0)
) -> Embedding:
    """Embed K_k on a defect-free chimera(m, t) graph; supports k <= t*m.

    `origin` places the construction at cell (row, col), so several cliques
    can share one chip without overlapping.
    """
    m, t = _chimera_dims(g)
    if g.defects:
        raise EmbeddingError(
            "clique construction requires a defect-free graph; import an embedding instead"
        )
    if k < 1:
        raise EmbeddingError(f"clique size must be >= 1, got {k}")
    row0, col0 = origin
    avail = m - max(row0, col0)
    if k > t * avail:
        raise CapacityError(k, t * avail)
    chains = _clique_chains(m, t, k, row0=row0, col0=col0)
    return Embedding(chains=chains, hardware=g)


def validate_embedding(
    e: Embedding, logical_edges: Iterable[tuple[int, int]]
) -> EmbeddingReport:
    """Check chain connectivity, disjointness, and coupler coverage.

    Violations are collected, not raised, so a report can show everything
    that is wrong at once.
    """
    violations: list[str] = []
    hardware_nodes = e.hardware.nodes
    adjacency: dict[int, set[int]] = {}
    for u, v in e.hardware.couplers:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)

    owner: dict[int, int] = {}
    for var in sorted(e.chains):
        chain = e.chains[var]
        if not chain:
            violations.append(f"chain {var} is empty")
            continue
        for q in chain:
            if q not in hardware_nodes:
                violations.append(f"chain {var} uses unknown qubit {q}")
            if q in owner and owner[q] != var:
                violations.append(
                    f"chains {owner[q]} and {var} both claim qubit {q}"
                )
            owner[q] = var
        chain_set = set(chain)
        seen = {chain[0]}
        frontier = [chain[0]]
        while frontier:
            cur = frontier.pop()
            for nxt in adjacency.get(cur, ()):
                if nxt in chain_set and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if seen != chain_set:
            violations.append(f"chain {var} is not connected")

    for i, j in sorted(set(logical_edges)):
        if i not in e.chains or j not in e.chains:
            violations.append(f"logical edge ({i}, {j}) references a missing chain")
            continue
        chain_j = set(e.chains[j])
        if not any(chain_j & adjacency.get(q, set()) for q in e.chains[i]):
            violations.append(f"no physical coupler joins chains {i} and {j}")
    return EmbeddingReport(violations)


def utc_chain_strength(model: QuboModel, prefactor: float = 1.0) -> float:
    """RMS-of-couplers heuristic:

        prefactor * sqrt(mean(J^2)) * sqrt(mean logical degree)

    where the degree average runs over all model variables.  This is the
    implemented reading of the uniform-torque-compensation rule.
    """
    if not model.quadratic:
        raise ModelError("chain strength heuristic needs at least one quadratic term")
    sq = [v * v for v in model.quadratic.values()]
    rms = math.sqrt(sum(sq) / len(sq))
    degrees = model.degrees()
    avg_degree = sum(degrees.values()) / len(degrees)
    return prefactor * rms * math.sqrt(avg_degree)


def resolve_chain_strength(model: QuboModel, policy: ChainStrengthPolicy) -> float:
    if policy.mode == "fixed":
        return policy.value
    return utc_chain_strength(model, policy.prefactor)


def _chain_spanning_tree(
    chain: tuple[int, ...], adjacency: Mapping[int, set[int]]
) -> list[tuple[int, int]]:
    # deterministic BFS tree rooted at the smallest qubit id
    chain_set = set(chain)
    root = min(chain)
    seen = {root}
    frontier = [root]
    edges: list[tuple[int, int]] = []
    while frontier:
        cur = frontier.pop(0)
        for nxt in sorted(adjacency.get(cur, ())):
            if nxt in chain_set and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
                edges.append((cur, nxt) if cur < nxt else (nxt, cur))
    return edges


def embed_qubo(
    model: QuboModel, e: Embedding, policy: ChainStrengthPolicy
) -> QuboModel:
    """Map a logical model onto hardware qubits.

    Linear coefficients split equally over chain qubits, quadratic ones
    equally over the physical couplers joining the two chains.  Chain
    integrity terms of the resolved strength are ferromagnetic couplings in
    the Ising frame along a spanning tree of each chain; here they appear
    converted to the qubo frame (-4*cs on the coupler, +2*cs on each
    incident qubit per tree edge), which contributes zero energy to any
    unbroken chain.
    """
    missing = model.variables - e.chains.keys()
    if missing:
        raise EmbeddingError(f"no chain for logical variable {min(missing)}")
    report = validate_embedding(e, model.quadratic.keys())
    if not report.ok:
        raise EmbeddingError("; ".join(report.violations))

    adjacency: dict[int, set[int]] = {}
    for u, v in e.hardware.couplers:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)

    needs_chain_terms = any(len(e.chains[v]) > 1 for v in model.variables)
    strength = resolve_chain_strength(model, policy) if needs_chain_terms else 0.0

    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for var, h in model.linear.items():
        share = h / len(e.chains[var])
        for q in e.chains[var]:
            linear[q] = linear.get(q, 0.0) + share
    for (i, j), coupling in model.quadratic.items():
        between = [
            (p, q) if p < q else (q, p)
            for p in e.chains[i]
            for q in adjacency.get(p, ())
            if q in set(e.chains[j])
        ]
        between = sorted(set(between))
        if not between:
            raise EmbeddingError(f"no physical coupler for logical edge ({i}, {j})")
        share = coupling / len(between)
        for key in between:
            quadratic[key] = quadratic.get(key, 0.0) + share

    for var in sorted(model.variables):
        chain = e.chains[var]
        if len(chain) == 1:
            continue
        for p, q in _chain_spanning_tree(chain, adjacency):
            quadratic[(p, q)] = quadratic.get((p, q), 0.0) - 4.0 * strength
            linear[p] = linear.get(p, 0.0) + 2.0 * strength
            linear[q] = linear.get(q, 0.0) + 2.0 * strength

    variables = set()
    for var in model.variables:
        variables.update(e.chains[var])
    return QuboModel.from_terms(linear, quadratic, variables=variables)


def unembed(
    hardware_sample: Sample, e: Embedding, rng: np.random.Generator
) -> tuple[Sample, float]:
    """Decode chains by majority vote; ties resolved by a coin flip drawn
    from `rng` (one draw per tied chain, in sorted logical-id order).

    Returns the logical sample (qubo frame) and the fraction of chains whose
    qubits disagreed.
    """
    hardware_sample = hardware_sample.to_qubo_frame()
    assignment = hardware_sample.assignment
    decoded: dict[int, int] = {}
    broken = 0
    for var in sorted(e.chains):
        chain = e.chains[var]
        try:
            ones = sum(assignment[q] for q in chain)
        except KeyError as exc:
            raise EvaluationError(
                f"hardware sample missing chain qubit {exc.args[0]}"
            ) from exc
        if 0 < ones < len(chain):
            broken += 1
        if ones * 2 > len(chain):
            decoded[var] = 1
        elif ones * 2 < len(chain):
            decoded[var] = 0
        else:
            decoded[var] = 1 if rng.random() < 0.5 else 0
    return Sample(decoded, frame=hardware_sample.frame), broken / len(e.chains)


def save_embedding(e: Embedding, path: str) -> None:
    """Write `em <k>` header then one `chain <logical_id> <q...>` line each."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"em {len(e.chains)}\n")
        for var in sorted(e.chains):
            qubits = " ".join(str(q) for q in e.chains[var])
            f.write(f"chain {var} {qubits}\n")


def load_embedding(path: str, hardware: HardwareGraph) -> Embedding:
    """Read the format written by :func:`save_embedding` against a hardware
    graph (imported embeddings for e.g. Pegasus chips enter here)."""
    chains: dict[int, tuple[int, ...]] = {}
    declared = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "em" and len(parts) == 2:
                    declared = int(parts[1])
                elif parts[0] == "chain" and len(parts) >= 3:
                    var = int(parts[1])
                    if var in chains:
                        raise GraphFormatError(
                            f"duplicate chain for logical id {var}", line=lineno
                        )
                    chains[var] = tuple(int(q) for q in parts[2:])
                else:
                    raise GraphFormatError(f"unrecognized record {line!r}", line=lineno)
            except ValueError as exc:
                raise GraphFormatError(str(exc), line=lineno) from exc
    if declared is None:
        raise GraphFormatError("missing `em <k>` header")
    if declared != len(chains):
        raise GraphFormatError(
            f"header declares {declared} chains but {len(chains)} were listed"
        )
    return Embedding(chains=chains, hardware=hardware)
