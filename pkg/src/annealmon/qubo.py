"""Sparse QUBO/Ising models: evaluation, frame conversion, scaling, combination.

A model is the function

    H(x_1, ..., x_n) = sum_i h_i x_i + sum_{i<j} J_ij x_i x_j

over binary variables (``qubo`` frame, x in {0,1}) or spins (``ising`` frame,
x in {-1,+1}).  Coefficient storage is sparse: an absent term is zero.  Pair
keys are canonicalized to (min id, max id) at construction, so duplicate-key
ambiguity cannot arise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EvaluationError, ModelError

QUBO = "qubo"
ISING = "ising"


def _canonical_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class QuboModel:
    """Immutable sparse quadratic model over integer variable ids.

    Use :meth:`from_terms` to build one; it canonicalizes pair keys,
    accumulates duplicates, and validates the invariants.
    """

    variables: frozenset[int]
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]

    @classmethod
    def from_terms(
        cls,
        linear: Mapping[int, float] | None = None,
        quadratic: Mapping[tuple[int, int], float] | None = None,
        variables: Iterable[int] | None = None,
    ) -> "QuboModel":
        lin: dict[int, float] = {}
        for i, v in (linear or {}).items():
            lin[int(i)] = lin.get(int(i), 0.0) + float(v)
        quad: dict[tuple[int, int], float] = {}
        for (i, j), v in (quadratic or {}).items():
            if i == j:
                raise ModelError(f"pair key ({i}, {j}) is not two distinct ids")
            key = _canonical_pair(int(i), int(j))
            quad[key] = quad.get(key, 0.0) + float(v)
        var_set = set(lin)
        for i, j in quad:
            var_set.add(i)
            var_set.add(j)
        if variables is not None:
            extra = set(int(v) for v in variables)
            if not var_set <= extra:
                missing = sorted(var_set - extra)
                raise ModelError(f"terms reference ids outside `variables`: {missing}")
            var_set = extra
        for i, v in lin.items():
            if not math.isfinite(v):
                raise ModelError(f"non-finite linear coefficient on variable {i}")
        for key, v in quad.items():
            if not math.isfinite(v):
                raise ModelError(f"non-finite quadratic coefficient on pair {key}")
        # absent term == 0, so explicit zeros are dropped; the variable stays
        lin = {i: v for i, v in lin.items() if v != 0.0}
        quad = {k: v for k, v in quad.items() if v != 0.0}
        return cls(frozenset(var_set), lin, quad)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def max_abs_linear(self) -> float:
        return max((abs(v) for v in self.linear.values()), default=0.0)

    def max_abs_quadratic(self) -> float:
        return max((abs(v) for v in self.quadratic.values()), default=0.0)

    def max_abs_coefficient(self) -> float:
        """Largest coefficient magnitude over both linear and quadratic terms."""
        return max(self.max_abs_linear(), self.max_abs_quadratic())

    def scaled(self, factor: float) -> "QuboModel":
        return QuboModel.from_terms(
            {i: v * factor for i, v in self.linear.items()},
            {k: v * factor for k, v in self.quadratic.items()},
            variables=self.variables,
        )

    def degrees(self) -> dict[int, int]:
        """Number of quadratic terms incident to each variable (0 if none)."""
        deg = {i: 0 for i in self.variables}
        for i, j in self.quadratic:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class Sample:
    """An assignment of every model variable to a binary value.

    ``frame`` declares how the values are encoded: {0,1} for ``qubo``,
    {-1,+1} for ``ising``.
    """

    assignment: dict[int, int]
    frame: str = QUBO

    def __post_init__(self):
        if self.frame not in (QUBO, ISING):
            raise ModelError(f"unknown frame {self.frame!r}")
        allowed = (0, 1) if self.frame == QUBO else (-1, 1)
        for i, v in self.assignment.items():
            if v not in allowed:
                raise ModelError(f"variable {i} has value {v}, not in {allowed}")

    def to_qubo_frame(self) -> "Sample":
        if self.frame == QUBO:
            return self
        return Sample({i: (s + 1) // 2 for i, s in self.assignment.items()}, QUBO)


def energy(model: QuboModel, sample: Sample) -> float:
    """Evaluate sum_i h_i x_i + sum_{i<j} J_ij x_i x_j for a qubo-frame sample.

    Terms are summed in canonical order (sorted variable ids, then sorted
    pairs) so repeated evaluations are bit-identical.
    """
    if sample.frame != QUBO:
        raise EvaluationError("energy() expects a qubo-frame sample")
    assignment = sample.assignment
    missing = model.variables - assignment.keys()
    if missing:
        raise EvaluationError(f"assignment missing variable {min(missing)}")
    e = 0.0
    for i in sorted(model.linear):
        e += model.linear[i] * assignment[i]
    for i, j in sorted(model.quadratic):
        e += model.quadratic[(i, j)] * assignment[i] * assignment[j]
    return e


def qubo_ising_convert(model: QuboModel, direction: str) -> tuple[QuboModel, float]:
    """Convert between frames under x = (s + 1) / 2.

    ``direction`` is ``"to_ising"`` or ``"to_qubo"``.  Returns the converted
    model and the constant offset such that, for corresponding assignments,

        energy(input, x) = energy(output, s) + offset   (to_ising)
        energy(input, s) = energy(output, x) + offset   (to_qubo)
    """
    if direction == "to_ising":
        h = {i: v / 2.0 for i, v in model.linear.items()}
        quad: dict[tuple[int, int], float] = {}
        offset = sum(model.linear.values()) / 2.0
        for (i, j), v in model.quadratic.items():
            quad[(i, j)] = v / 4.0
            h[i] = h.get(i, 0.0) + v / 4.0
            h[j] = h.get(j, 0.0) + v / 4.0
            offset += v / 4.0
        return QuboModel.from_terms(h, quad, variables=model.variables), offset
    if direction == "to_qubo":
        h = {i: 2.0 * v for i, v in model.linear.items()}
        quad = {}
        offset = -sum(model.linear.values())
        for (i, j), v in model.quadratic.items():
            quad[(i, j)] = 4.0 * v
            h[i] = h.get(i, 0.0) - 2.0 * v
            h[j] = h.get(j, 0.0) - 2.0 * v
            offset += v
        return QuboModel.from_terms(h, quad, variables=model.variables), offset
    raise ModelError(f"unknown conversion direction {direction!r}")


def autoscale(model: QuboModel) -> tuple[QuboModel, float]:
    """Rescale so quadratic coefficients fit [-2, 2] and linear ones [-1, 1].

    The factor is min(1 / max|h|, 2 / max|J|), treating an absent coefficient
    class as non-binding.  An all-zero model is returned unchanged with
    factor 1.
    """
    max_h = model.max_abs_linear()
    max_j = model.max_abs_quadratic()
    bounds = []
    if max_h > 0.0:
        bounds.append(1.0 / max_h)
    if max_j > 0.0:
        bounds.append(2.0 / max_j)
    if not bounds:
        return model, 1.0
    factor = min(bounds)
    return model.scaled(factor), factor


@dataclass(frozen=True)
class CombinedProgram:
    """A problem model and an indicator model merged over disjoint variables.

    ``combined`` carries the problem coefficients unchanged and the indicator
    coefficients multiplied by ``scale_constant``.
    """

    problem: QuboModel
    indicator: QuboModel
    scale_constant: float
    combined: QuboModel = field(repr=False)


def combine_with_indicator(problem: QuboModel, indicator: QuboModel) -> CombinedProgram:
    """Merge disjoint models, weighting the indicator by C = |Q_P| / |Q_I|.

    |.| is the maximum absolute coefficient over linear and quadratic terms.
    """
    overlap = problem.variables & indicator.variables
    if overlap:
        raise ModelError(f"variable sets overlap: {sorted(overlap)[:5]}")
    qi = indicator.max_abs_coefficient()
    if qi == 0.0:
        raise ModelError("indicator has no nonzero coefficient; scale constant undefined")
    c = problem.max_abs_coefficient() / qi
    lin = dict(problem.linear)
    lin.update({i: c * v for i, v in indicator.linear.items()})
    quad = dict(problem.quadratic)
    quad.update({k: c * v for k, v in indicator.quadratic.items()})
    combined = QuboModel.from_terms(
        lin, quad, variables=problem.variables | indicator.variables
    )
    return CombinedProgram(problem, indicator, c, combined)


def save_qubo(model: QuboModel, path: str) -> None:
    """Write the line-oriented text format: one `i j coeff` record per term.

    i == j denotes a linear term.  Variables without any term are written as
    explicit zero linear records so the variable set round-trips.
    """
    with open(path, "w", encoding="utf-8") as f:
        f.write("# qubo: i j coeff (i == j for linear terms)\n")
        termless = set(model.variables) - set(model.linear)
        for i, j in sorted(model.quadratic):
            termless.discard(i)
            termless.discard(j)
        for i in sorted(set(model.linear) | termless):
            f.write(f"{i} {i} {model.linear.get(i, 0.0)!r}\n")
        for i, j in sorted(model.quadratic):
            f.write(f"{i} {j} {model.quadratic[(i, j)]!r}\n")


def load_qubo(path: str) -> QuboModel:
    """Read the text format written by :func:`save_qubo`."""
    from .errors import GraphFormatError

    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    variables: set[int] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("expected `i j coeff`", line=lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
                v = float(parts[2])
            except ValueError as exc:
                raise GraphFormatError(str(exc), line=lineno) from exc
            if i < 0 or j < 0:
                raise GraphFormatError("negative variable id", line=lineno)
            variables.update((i, j))
            if i == j:
                linear[i] = linear.get(i, 0.0) + v
            else:
                key = _canonical_pair(i, j)
                quadratic[key] = quadratic.get(key, 0.0) + v
    return QuboModel.from_terms(linear, quadratic, variables=variables)
