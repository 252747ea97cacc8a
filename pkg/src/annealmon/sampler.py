"""Batched annealer emulation with slowly drifting effective temperature.

The effective inverse temperature follows a mean-reverting random walk

    beta_{t+1} = beta_t + reversion * (beta_mean - beta_t) * dt
                        + volatility * sqrt(dt) * xi_t

clamped at a positive floor; one step is taken per call, not per read, which
matches the per-call granularity of the recorded mean-energy series.  All
state is immutable and all randomness is counter-based (seed plus step
index), so a call is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np

from .errors import ConfigError, ModelError
from .kernels import CompiledQubo, compile_qubo, sample_batch
from .qubo import QuboModel, Sample


def _stream(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


@dataclass(frozen=True)
class NoiseProcessState:
    """Mean-reverting inverse-temperature drift, advanced once per call."""

    beta_mean: float
    reversion: float
    volatility: float
    dt: float
    current_beta: float
    floor: float
    seed: int
    step: int = 0

    def __post_init__(self):
        if self.beta_mean <= 0 or self.dt <= 0 or self.floor <= 0:
            raise ModelError("beta_mean, dt, and floor must be positive")
        if self.reversion < 0 or self.volatility < 0:
            raise ModelError("reversion and volatility must be non-negative")
        if self.current_beta < self.floor:
            raise ModelError("current_beta below the configured floor")

    @classmethod
    def initial(
        cls,
        beta_mean: float,
        reversion: float,
        volatility: float,
        dt: float = 1.0,
        beta0: float | None = None,
        floor: float = 1e-3,
        seed: int = 0,
    ) -> "NoiseProcessState":
        beta0 = beta_mean if beta0 is None else beta0
        return cls(
            beta_mean=beta_mean,
            reversion=reversion,
            volatility=volatility,
            dt=dt,
            current_beta=max(beta0, floor),
            floor=floor,
            seed=seed,
        )


def advance_noise(state: NoiseProcessState) -> NoiseProcessState:
    """One drift step.  The Gaussian innovation for step k comes from the
    substream keyed (seed, k), so advancing is pure and replayable."""
    xi = float(_stream(state.seed, state.step).standard_normal())
    beta = (
        state.current_beta
        + state.reversion * (state.beta_mean - state.current_beta) * state.dt
        + state.volatility * math.sqrt(state.dt) * xi
    )
    beta = max(beta, state.floor)
    return replace(state, current_beta=beta, step=state.step + 1)


@dataclass(frozen=True)
class AnnealCallConfig:
    """Per-call sampling parameters."""

    num_reads: int = 100
    sweeps: int = 10
    reduce_intersample_correlation: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1 or self.sweeps < 1:
            raise ModelError("num_reads and sweeps must be >= 1")


@dataclass(frozen=True)
class SampleBatch:
    """All reads from one call.

    `states` holds raw kernel output (one row per read, columns in the
    compiled model's sorted-variable order); `samples` materializes them as
    assignment maps on demand.
    """

    compiled: CompiledQubo
    states: np.ndarray
    energies: np.ndarray
    call_index: int
    beta_used: float

    @property
    def num_reads(self) -> int:
        return int(self.states.shape[0])

    @property
    def samples(self) -> list[Sample]:
        return [
            Sample(self.compiled.sample_to_assignment(self.states[r]))
            for r in range(self.num_reads)
        ]

    def mean_energy(self) -> float:
        return float(np.mean(self.energies))


def metropolis_sample(
    model: QuboModel | CompiledQubo,
    beta: float,
    sweeps: int,
    rng: np.random.Generator,
) -> Sample:
    """One Metropolis chain: uniform random start, `sweeps` full passes over
    the variables in sorted-id order, single-variable flips accepted with
    probability min(1, exp(-beta * delta))."""
    if beta < 0:
        raise ModelError("beta must be non-negative")
    compiled = model if isinstance(model, CompiledQubo) else compile_qubo(model)
    n = compiled.num_variables
    init_u = rng.random((1, n))
    acc_u = rng.random((1, sweeps * n))
    states, _ = sample_batch(compiled, beta, sweeps, init_u, acc_u)
    return Sample(compiled.sample_to_assignment(states[0]))


def run_call(
    program: QuboModel | CompiledQubo,
    cfg: AnnealCallConfig,
    noise: NoiseProcessState,
) -> tuple[SampleBatch, NoiseProcessState]:
    """Advance the noise once, then draw `num_reads` Metropolis samples at the
    new inverse temperature.

    With `reduce_intersample_correlation` each read consumes its own RNG
    substream keyed (seed, call, read); otherwise one per-call stream feeds
    the reads sequentially.  Energies are evaluated inside the kernel in the
    canonical term order of qubo.energy().
    """
    compiled = program if isinstance(program, CompiledQubo) else compile_qubo(program)
    call_index = noise.step
    advanced = advance_noise(noise)
    beta = advanced.current_beta

    n = compiled.num_variables
    reads = cfg.num_reads
    init_u = np.empty((reads, n), dtype=np.float64)
    acc_u = np.empty((reads, cfg.sweeps * n), dtype=np.float64)
    if cfg.reduce_intersample_correlation:
        for r in range(reads):
            rng = _stream(cfg.seed, call_index, r)
            init_u[r] = rng.random(n)
            acc_u[r] = rng.random(cfg.sweeps * n)
    else:
        rng = _stream(cfg.seed, call_index)
        for r in range(reads):
            init_u[r] = rng.random(n)
            acc_u[r] = rng.random(cfg.sweeps * n)

    states, energies = sample_batch(compiled, beta, cfg.sweeps, init_u, acc_u)
    batch = SampleBatch(
        compiled=compiled,
        states=states,
        energies=energies,
        call_index=call_index,
        beta_used=beta,
    )
    return batch, advanced


class Backend(Protocol):
    """Seam for sampling backends; the simulator is the only one provided.

    A hardware client would implement the same `sample` signature and
    register itself under a new name.
    """

    def sample(self, program: QuboModel, cfg: AnnealCallConfig) -> SampleBatch:
        ...


class SimulatorBackend:
    """Stateful wrapper around run_call: owns the drifting noise process and
    advances it once per sample() call."""

    def __init__(self, noise: NoiseProcessState):
        self._noise = noise
        self._cache: tuple[int, CompiledQubo] | None = None

    @property
    def noise(self) -> NoiseProcessState:
        return self._noise

    def _compiled(self, program: QuboModel | CompiledQubo) -> CompiledQubo:
        if isinstance(program, CompiledQubo):
            return program
        key = id(program)
        if self._cache is None or self._cache[0] != key:
            self._cache = (key, compile_qubo(program))
        return self._cache[1]

    def sample(self, program: QuboModel | CompiledQubo, cfg: AnnealCallConfig) -> SampleBatch:
        batch, self._noise = run_call(self._compiled(program), cfg, self._noise)
        return batch


_BACKENDS: dict[str, type] = {"sim": SimulatorBackend}


def register_backend(name: str, factory: type) -> None:
    _BACKENDS[name] = factory


def create_backend(name: str, noise: NoiseProcessState) -> Backend:
    """Resolve a backend by registry name; unknown names are a config error."""
    try:
        factory = _BACKENDS[name]
    except KeyError:
        raise ConfigError(
            f"unknown backend {name!r}; registered: {sorted(_BACKENDS)}"
        ) from None
    return factory(noise)
