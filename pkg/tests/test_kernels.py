"""Kernel tests: the jitted path must agree bit-for-bit with the fallback.

The fallback implementation is the same function body without numba, so the
comparison here runs `_sample_batch_impl` (plain Python/numpy) directly
against the active backend.
"""

import numpy as np
import pytest

from annealmon.kernels import (
    _decode_chains_impl,
    _energies_for_states_impl,
    _sample_batch_impl,
    compile_qubo,
    decode_chain_batch,
    energies_for_states,
    kernel_backend,
    sample_batch,
)
from annealmon.problems import gen_er_graph, mc_qubo
from annealmon.qubo import QuboModel, Sample, energy


@pytest.fixture
def model(rng):
    lin = {i: float(rng.uniform(-1, 1)) for i in range(10)}
    quad = {
        (i, j): float(rng.uniform(-1, 1))
        for i in range(10)
        for j in range(i + 1, 10)
        if rng.random() < 0.4
    }
    return QuboModel.from_terms(lin, quad)


def test_compile_positions_sorted():
    m = QuboModel.from_terms({7: 1.0, 2: -1.0}, {(2, 7): 0.5})
    comp = compile_qubo(m)
    assert comp.var_ids.tolist() == [2, 7]
    assert comp.h.tolist() == [-1.0, 1.0]


def test_energy_matches_reference_bitwise(model, rng):
    comp = compile_qubo(model)
    ids = sorted(model.variables)
    states = (rng.random((50, len(ids))) < 0.5).astype(np.int8)
    energies = energies_for_states(comp, states)
    for r in range(states.shape[0]):
        s = Sample({v: int(states[r, p]) for p, v in enumerate(ids)})
        assert energies[r] == energy(model, s)  # exact, same summation order


def test_jit_and_fallback_agree_bitwise(model, rng):
    comp = compile_qubo(model)
    n = comp.num_variables
    sweeps = 7
    init_u = rng.random((20, n))
    acc_u = rng.random((20, sweeps * n))
    states_active, energies_active = sample_batch(comp, 1.3, sweeps, init_u, acc_u)
    states_plain, energies_plain = _sample_batch_impl(
        comp.h, comp.indptr, comp.indices, comp.weights,
        comp.lin_pos, comp.lin_val, comp.pair_i, comp.pair_j, comp.pair_val,
        1.3, init_u, acc_u,
    )
    assert np.array_equal(states_active, states_plain)
    assert np.array_equal(energies_active, energies_plain)


def test_decode_agrees_with_fallback(rng):
    states = (rng.random((30, 9)) < 0.5).astype(np.int8)
    indptr = np.array([0, 3, 5, 9], dtype=np.int64)
    cols = np.arange(9, dtype=np.int64)
    tie_u = rng.random((30, 3))
    got = decode_chain_batch(states, indptr, cols, tie_u)
    want = _decode_chains_impl(states, indptr, cols, tie_u)
    assert np.array_equal(got[0], want[0])
    assert np.array_equal(got[1], want[1])


def test_energies_fallback_agrees(model, rng):
    comp = compile_qubo(model)
    states = (rng.random((15, comp.num_variables)) < 0.5).astype(np.int8)
    got = energies_for_states(comp, states)
    want = _energies_for_states_impl(
        states, comp.lin_pos, comp.lin_val, comp.pair_i, comp.pair_j, comp.pair_val
    )
    assert np.array_equal(got, want)


def test_backend_reported():
    assert kernel_backend() in ("numba", "numpy")


def test_zero_beta_every_flip_accepted():
    m = mc_qubo(gen_er_graph(5, 0.5, 1))
    comp = compile_qubo(m)
    rng = np.random.default_rng(0)
    init_u = rng.random((1, 5))
    acc_u = rng.random((1, 3 * 5))
    states, _ = sample_batch(comp, 0.0, 3, init_u, acc_u)
    # at beta 0 exp(-0) = 1 > u, so all proposals accept: 3 sweeps flip
    # every bit an odd number of times
    start = (init_u[0] < 0.5).astype(np.int8)
    assert np.array_equal(states[0], 1 - start)
