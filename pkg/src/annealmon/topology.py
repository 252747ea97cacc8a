"""Hardware connectivity graphs: Chimera generation, defects, idle regions.

Chimera node indexing is linear:

    id = 2*t*(m*row + col) + (t*side + k)

with ``side`` 0 for the vertical shore and 1 for the horizontal shore, and
``k`` in 0..t-1 the position within the shore.  Vertical qubits couple to the
same-position vertical qubit of the row-adjacent cell, horizontal qubits to
the column-adjacent cell, and the two shores of a cell are completely
connected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import GraphFormatError, ModelError


@dataclass(frozen=True)
class HardwareGraph:
    """Physical qubit/coupler graph with topology metadata and a defect set."""

    nodes: frozenset[int]
    couplers: frozenset[tuple[int, int]]
    topology_kind: str
    defects: frozenset[int] = frozenset()

    def __post_init__(self):
        for u, v in self.couplers:
            if u == v:
                raise ModelError(f"self-coupler on qubit {u}")
            if u > v:
                raise ModelError(f"coupler ({u}, {v}) not canonically ordered")
            if u not in self.nodes or v not in self.nodes:
                raise ModelError(f"coupler ({u}, {v}) references a missing qubit")
        if self.defects & self.nodes:
            raise ModelError("defect set overlaps live nodes")

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_couplers(self) -> int:
        return len(self.couplers)

    def neighbors(self, node: int) -> set[int]:
        out = set()
        for u, v in self.couplers:
            if u == node:
                out.add(v)
            elif v == node:
                out.add(u)
        return out


@dataclass(frozen=True)
class Region:
    """An induced subgraph of a hardware graph (e.g. the idle qubits)."""

    parent: HardwareGraph
    nodes: frozenset[int]
    couplers: frozenset[tuple[int, int]]

    def __post_init__(self):
        if not self.nodes <= self.parent.nodes:
            raise ModelError("region nodes not a subset of the parent graph")
        induced = frozenset(
            (u, v) for u, v in self.parent.couplers if u in self.nodes and v in self.nodes
        )
        if self.couplers != induced:
            raise ModelError("region couplers are not exactly the induced set")


def chimera_node_id(m: int, t: int, row: int, col: int, side: int, k: int) -> int:
    return 2 * t * (m * row + col) + (t * side + k)


def chimera(m: int, t: int = 4) -> HardwareGraph:
    """Ideal m x m grid of K_{t,t} cells.

    Node count is 2*t*m**2, coupler count t**2 * m**2 + 2*t*m*(m-1).
    """
    if m < 1 or t < 1:
        raise ModelError(f"chimera dimensions must be positive, got m={m}, t={t}")
    nodes = frozenset(range(2 * t * m * m))
    couplers: set[tuple[int, int]] = set()
    for row in range(m):
        for col in range(m):
            for k_v in range(t):
                v_id = chimera_node_id(m, t, row, col, 0, k_v)
                for k_h in range(t):
                    couplers.add((v_id, chimera_node_id(m, t, row, col, 1, k_h)))
            if row + 1 < m:
                for k in range(t):
                    a = chimera_node_id(m, t, row, col, 0, k)
                    b = chimera_node_id(m, t, row + 1, col, 0, k)
                    couplers.add((a, b) if a < b else (b, a))
            if col + 1 < m:
                for k in range(t):
                    a = chimera_node_id(m, t, row, col, 1, k)
                    b = chimera_node_id(m, t, row, col + 1, 1, k)
                    couplers.add((a, b) if a < b else (b, a))
    return HardwareGraph(
        nodes=nodes,
        couplers=frozenset(couplers),
        topology_kind=f"chimera({m},{t})",
    )


def apply_defects(g: HardwareGraph, defects: Iterable[int]) -> HardwareGraph:
    """Remove the given qubits and every coupler incident to them."""
    defect_set = set(int(d) for d in defects)
    unknown = defect_set - g.nodes
    if unknown:
        raise ModelError(f"defect ids not present in graph: {sorted(unknown)[:5]}")
    nodes = g.nodes - defect_set
    couplers = frozenset(
        (u, v) for u, v in g.couplers if u not in defect_set and v not in defect_set
    )
    return HardwareGraph(
        nodes=nodes,
        couplers=couplers,
        topology_kind=g.topology_kind,
        defects=g.defects | frozenset(defect_set),
    )


def idle_region(g: HardwareGraph, used: Iterable[int]) -> Region:
    """The induced subgraph over the qubits not in `used`.

    The result may be disconnected; that is fine for indicator use.
    """
    used_set = set(int(u) for u in used)
    if not used_set <= g.nodes:
        unknown = sorted(used_set - g.nodes)
        raise ModelError(f"used ids not present in graph: {unknown[:5]}")
    free = g.nodes - used_set
    if not free:
        raise ModelError("no idle qubits: every node is used")
    couplers = frozenset(
        (u, v) for u, v in g.couplers if u in free and v in free
    )
    return Region(parent=g, nodes=frozenset(free), couplers=couplers)


def export_graph(g: HardwareGraph, path: str) -> None:
    """Write `hw <node_count>` header, then n/c/d lines for nodes,
    couplers, and recorded defects."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"hw {g.num_nodes}\n")
        for node in sorted(g.nodes):
            f.write(f"n {node}\n")
        for u, v in sorted(g.couplers):
            f.write(f"c {u} {v}\n")
        for d in sorted(g.defects):
            f.write(f"d {d}\n")


def import_graph(path: str) -> HardwareGraph:
    """Read the format written by :func:`export_graph`; validates invariants.

    Parse failures report the offending line number; couplers naming unknown
    qubits are rejected.
    """
    nodes: set[int] = set()
    couplers: set[tuple[int, int]] = set()
    defects: set[int] = set()
    declared = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "hw" and len(parts) == 2:
                    declared = int(parts[1])
                elif parts[0] == "n" and len(parts) == 2:
                    nodes.add(int(parts[1]))
                elif parts[0] == "c" and len(parts) == 3:
                    u, v = int(parts[1]), int(parts[2])
                    if u == v:
                        raise GraphFormatError(f"self-coupler on qubit {u}", line=lineno)
                    couplers.add((u, v) if u < v else (v, u))
                elif parts[0] == "d" and len(parts) == 2:
                    defects.add(int(parts[1]))
                else:
                    raise GraphFormatError(f"unrecognized record {line!r}", line=lineno)
            except ValueError as exc:
                raise GraphFormatError(str(exc), line=lineno) from exc
    if declared is None:
        raise GraphFormatError("missing `hw <node_count>` header")
    if declared != len(nodes):
        raise GraphFormatError(
            f"header declares {declared} nodes but {len(nodes)} were listed"
        )
    for u, v in sorted(couplers):
        if u not in nodes or v not in nodes:
            raise GraphFormatError(f"coupler ({u}, {v}) references an unknown qubit")
    if defects & nodes:
        raise GraphFormatError("defect ids overlap live nodes")
    return HardwareGraph(
        nodes=frozenset(nodes),
        couplers=frozenset(couplers),
        topology_kind="imported",
        defects=frozenset(defects),
    )
