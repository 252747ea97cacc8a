"""Two-phase use of the indicator: burn-in history, then quality gating.

During burn-in the store only records indicator energies.  Afterwards each
new indicator energy can be ranked against the history (percentile mode) or
normalized against the running min/max and compared with a threshold tau
(gate mode); rejected calls signal that the accompanying problem sample
should be redone later.  Energies can also be stratified post hoc into
low-noise and high-noise sets for histogram comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, NotReadyError


@dataclass(frozen=True)
class GateDecision:
    accept: bool
    normalized_e: float
    percentile: float
    threshold: float


@dataclass(frozen=True)
class StratifiedHistogram:
    """Problem energies split by the indicator's normalized energy."""

    low_set: np.ndarray
    high_set: np.ndarray
    cuts: tuple[float, float]


class BurnInStore:
    """Ordered history of indicator per-call mean energies.

    Gate and percentile queries are refused until `burn_in` values have been
    observed.  `cap`, when set, keeps only the most recent values (drift can
    make very old history misleading).
    """

    def __init__(self, burn_in: int, cap: int | None = None):
        if burn_in < 1:
            raise ModelError("burn-in length must be >= 1")
        if cap is not None and cap < burn_in:
            raise ModelError("history cap cannot be smaller than the burn-in length")
        self.burn_in = burn_in
        self.cap = cap
        self._history: list[float] = []
        self._seen = 0
        self._min = float("inf")
        self._max = float("-inf")

    def __len__(self) -> int:
        return len(self._history)

    @property
    def history(self) -> list[float]:
        return list(self._history)

    @property
    def running_min(self) -> float:
        return self._min

    @property
    def running_max(self) -> float:
        return self._max

    @property
    def ready(self) -> bool:
        return self._seen >= self.burn_in

    def observe(self, indicator_energy: float) -> "BurnInStore":
        """Append one value, updating the running extrema."""
        value = float(indicator_energy)
        self._history.append(value)
        self._seen += 1
        if self.cap is not None and len(self._history) > self.cap:
            del self._history[0]
        self._min = min(self._min, value)
        self._max = max(self._max, value)
        return self

    def _require_ready(self):
        if not self.ready:
            raise NotReadyError(
                f"burn-in incomplete: {self._seen}/{self.burn_in} observations"
            )

    def percentile_rank(self, value: float) -> float:
        """Fraction of stored values strictly below `value`, ties counted half."""
        self._require_ready()
        arr = np.asarray(self._history)
        less = int(np.count_nonzero(arr < value))
        equal = int(np.count_nonzero(arr == value))
        return (less + 0.5 * equal) / arr.size

    def normalize(self, value: float) -> float:
        """Position of `value` within the running [min, max], clamped to [0, 1]."""
        self._require_ready()
        if self._min == self._max:
            raise NotReadyError("degenerate history: all observed values are equal")
        e = (value - self._min) / (self._max - self._min)
        return min(max(e, 0.0), 1.0)

    def gate(self, indicator_energy: float, tau: float) -> GateDecision:
        """Accept the co-sampled problem result iff the normalized indicator
        energy is below tau."""
        if not 0.0 < tau < 1.0:
            raise ModelError(f"threshold must lie in (0, 1), got {tau}")
        e = self.normalize(indicator_energy)
        return GateDecision(
            accept=e < tau,
            normalized_e=e,
            percentile=self.percentile_rank(indicator_energy),
            threshold=tau,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "burn_in": self.burn_in,
                "cap": self.cap,
                "seen": self._seen,
                "history": self._history,
                "min": self._min if self._history else None,
                "max": self._max if self._history else None,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "BurnInStore":
        data = json.loads(text)
        store = cls(burn_in=data["burn_in"], cap=data["cap"])
        store._history = [float(v) for v in data["history"]]
        store._seen = int(data["seen"])
        if data["min"] is not None:
            store._min = float(data["min"])
            store._max = float(data["max"])
        return store

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "BurnInStore":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_json(f.read())


def stratify(
    problem_energies,
    indicator_e_norm,
    low: float = 0.2,
    high: float = 0.8,
) -> StratifiedHistogram:
    """Split problem energies by normalized indicator energy: the low-noise
    set keeps points with e <= low, the high-noise set those with e >= high,
    and the middle band is discarded."""
    p = np.asarray(problem_energies, dtype=np.float64)
    e = np.asarray(indicator_e_norm, dtype=np.float64)
    if p.shape != e.shape:
        raise ModelError(f"length mismatch: {p.shape} vs {e.shape}")
    if not 0.0 <= low < high <= 1.0:
        raise ModelError(f"cuts must satisfy 0 <= low < high <= 1, got ({low}, {high})")
    return StratifiedHistogram(
        low_set=p[e <= low],
        high_set=p[e >= high],
        cuts=(low, high),
    )
