"""Hot numeric kernels for Metropolis sampling of sparse quadratic models.

The inner loop (single-variable-flip sweeps over a CSR adjacency) dominates
experiment runtime, so it is JIT-compiled with numba by default.  Setting the
environment variable ``ANNEALMON_PURE_NUMPY=1`` before import selects the
pure-numpy/Python fallback instead; both paths consume pre-drawn uniform
arrays and produce bit-identical states and energies.  ``benchmarks/
bench_kernels.py`` compares the two.

All randomness is drawn outside the kernels, so the kernels themselves are
deterministic functions of their array arguments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .qubo import QuboModel


def _sample_batch_impl(
    h: np.ndarray,
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    lin_pos: np.ndarray,
    lin_val: np.ndarray,
    pair_i: np.ndarray,
    pair_j: np.ndarray,
    pair_val: np.ndarray,
    beta: float,
    init_u: np.ndarray,
    acc_u: np.ndarray,
):
    reads, n = init_u.shape
    sweeps = acc_u.shape[1] // n
    states = np.empty((reads, n), dtype=np.int8)
    energies = np.empty(reads, dtype=np.float64)
    for r in range(reads):
        x = states[r]
        for i in range(n):
            x[i] = 1 if init_u[r, i] < 0.5 else 0
        idx = 0
        for _ in range(sweeps):
            for i in range(n):
                field = h[i]
                for p in range(indptr[i], indptr[i + 1]):
                    field += weights[p] * x[indices[p]]
                delta = field if x[i] == 0 else -field
                if delta <= 0.0 or acc_u[r, idx] < np.exp(-beta * delta):
                    x[i] = 1 - x[i]
                idx += 1
        # energy in canonical term order, matching qubo.energy()
        e = 0.0
        for t in range(lin_pos.shape[0]):
            e += lin_val[t] * x[lin_pos[t]]
        for t in range(pair_i.shape[0]):
            e += pair_val[t] * x[pair_i[t]] * x[pair_j[t]]
        energies[r] = e
    return states, energies


def _energies_for_states_impl(
    states: np.ndarray,
    lin_pos: np.ndarray,
    lin_val: np.ndarray,
    pair_i: np.ndarray,
    pair_j: np.ndarray,
    pair_val: np.ndarray,
):
    reads = states.shape[0]
    energies = np.empty(reads, dtype=np.float64)
    for r in range(reads):
        e = 0.0
        for t in range(lin_pos.shape[0]):
            e += lin_val[t] * states[r, lin_pos[t]]
        for t in range(pair_i.shape[0]):
            e += pair_val[t] * states[r, pair_i[t]] * states[r, pair_j[t]]
        energies[r] = e
    return energies


def _decode_chains_impl(
    states: np.ndarray,
    chain_indptr: np.ndarray,
    chain_cols: np.ndarray,
    tie_u: np.ndarray,
):
    reads = states.shape[0]
    k = chain_indptr.shape[0] - 1
    logical = np.empty((reads, k), dtype=np.int8)
    broken = np.zeros(reads, dtype=np.float64)
    for r in range(reads):
        for c in range(k):
            lo, hi = chain_indptr[c], chain_indptr[c + 1]
            ones = 0
            for p in range(lo, hi):
                ones += states[r, chain_cols[p]]
            length = hi - lo
            if 0 < ones < length:
                broken[r] += 1.0
            if 2 * ones > length:
                logical[r, c] = 1
            elif 2 * ones < length:
                logical[r, c] = 0
            else:
                logical[r, c] = 1 if tie_u[r, c] < 0.5 else 0
        broken[r] /= k
    return logical, broken


PURE_NUMPY = os.environ.get("ANNEALMON_PURE_NUMPY", "").lower() in ("1", "true", "yes")

if PURE_NUMPY:
    _sample_batch = _sample_batch_impl
    _energies_for_states = _energies_for_states_impl
    _decode_chains = _decode_chains_impl
    _BACKEND = "numpy"
else:
    try:
        import numba

        _sample_batch = numba.njit(cache=True)(_sample_batch_impl)
        _energies_for_states = numba.njit(cache=True)(_energies_for_states_impl)
        _decode_chains = numba.njit(cache=True)(_decode_chains_impl)
        _BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _sample_batch = _sample_batch_impl
        _energies_for_states = _energies_for_states_impl
        _decode_chains = _decode_chains_impl
        _BACKEND = "numpy"


def kernel_backend() -> str:
    """Which implementation is active: ``"numba"`` or ``"numpy"``."""
    return _BACKEND


@dataclass(frozen=True)
class CompiledQubo:
    """Array form of a QuboModel for the kernels.

    Variable ids are mapped to dense positions in sorted-id order; the CSR
    triple holds the symmetric adjacency, and the term arrays repeat the
    model's coefficients in the canonical (sorted) order used by
    qubo.energy().
    """

    var_ids: np.ndarray  # position -> variable id
    h: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    lin_pos: np.ndarray
    lin_val: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    pair_val: np.ndarray

    @property
    def num_variables(self) -> int:
        return int(self.var_ids.shape[0])

    def sample_to_assignment(self, state: np.ndarray) -> dict[int, int]:
        return {int(v): int(state[p]) for p, v in enumerate(self.var_ids)}


def compile_qubo(model: QuboModel) -> CompiledQubo:
    var_ids = np.array(sorted(model.variables), dtype=np.int64)
    pos = {int(v): p for p, v in enumerate(var_ids)}
    n = len(var_ids)

    h = np.zeros(n, dtype=np.float64)
    for i, v in model.linear.items():
        h[pos[i]] = v

    neighbor_lists: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in model.quadratic.items():
        neighbor_lists[pos[i]].append((pos[j], v))
        neighbor_lists[pos[j]].append((pos[i], v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    flat_idx: list[int] = []
    flat_w: list[float] = []
    for p in range(n):
        neighbor_lists[p].sort()
        for q, v in neighbor_lists[p]:
            flat_idx.append(q)
            flat_w.append(v)
        indptr[p + 1] = len(flat_idx)
    indices = np.array(flat_idx, dtype=np.int64)
    weights = np.array(flat_w, dtype=np.float64)

    lin_ids = sorted(model.linear)
    lin_pos = np.array([pos[i] for i in lin_ids], dtype=np.int64)
    lin_val = np.array([model.linear[i] for i in lin_ids], dtype=np.float64)
    pairs = sorted(model.quadratic)
    pair_i = np.array([pos[i] for i, _ in pairs], dtype=np.int64)
    pair_j = np.array([pos[j] for _, j in pairs], dtype=np.int64)
    pair_val = np.array([model.quadratic[p] for p in pairs], dtype=np.float64)

    return CompiledQubo(
        var_ids=var_ids,
        h=h,
        indptr=indptr,
        indices=indices,
        weights=weights,
        lin_pos=lin_pos,
        lin_val=lin_val,
        pair_i=pair_i,
        pair_j=pair_j,
        pair_val=pair_val,
    )


def sample_batch(
    compiled: CompiledQubo,
    beta: float,
    sweeps: int,
    init_u: np.ndarray,
    acc_u: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one Metropolis chain per row of `init_u`.

    init_u has shape (reads, n) and seeds the uniform random start; acc_u has
    shape (reads, sweeps*n) and supplies the acceptance draws in visit order.
    Returns (states, energies).
    """
    n = compiled.num_variables
    if init_u.shape[1] != n or acc_u.shape[1] != sweeps * n:
        raise ValueError("uniform arrays do not match model size / sweep count")
    return _sample_batch(
        compiled.h,
        compiled.indptr,
        compiled.indices,
        compiled.weights,
        compiled.lin_pos,
        compiled.lin_val,
        compiled.pair_i,
        compiled.pair_j,
        compiled.pair_val,
        float(beta),
        init_u,
        acc_u,
    )


def energies_for_states(compiled: CompiledQubo, states: np.ndarray) -> np.ndarray:
    """Evaluate the model on each row of `states` (columns in compiled
    position order), summing terms in the same canonical order as
    qubo.energy() so results are bit-identical to it."""
    return _energies_for_states(
        states,
        compiled.lin_pos,
        compiled.lin_val,
        compiled.pair_i,
        compiled.pair_j,
        compiled.pair_val,
    )


def decode_chain_batch(
    states: np.ndarray,
    chain_indptr: np.ndarray,
    chain_cols: np.ndarray,
    tie_u: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Majority-vote decode of chained columns for a whole batch.

    chain_indptr/chain_cols describe, per logical variable (in sorted-id
    order), which state columns form its chain; tie_u supplies one coin per
    (read, chain).  Returns (logical states, broken-chain fraction per read).
    """
    return _decode_chains(states, chain_indptr, chain_cols, tie_u)
