"""Shared brute-force oracles.

These enumerate assignments/subsets directly from the coefficient maps or the
graph, independent of the code paths they are used to check.
"""

import itertools

import numpy as np
import pytest

from annealmon.qubo import QuboModel


def all_states(n: int) -> np.ndarray:
    """All 2^n binary assignments as an (2^n, n) int8 matrix, LSB first."""
    bits = np.arange(1 << n, dtype=np.int64)
    return ((bits[:, None] >> np.arange(n)) & 1).astype(np.int8)


def brute_force_energies(model: QuboModel) -> tuple[list[int], np.ndarray]:
    """Energies of every assignment, computed straight from the term maps."""
    ids = sorted(model.variables)
    pos = {v: p for p, v in enumerate(ids)}
    states = all_states(len(ids))
    energies = np.zeros(states.shape[0])
    for i, h in model.linear.items():
        energies += h * states[:, pos[i]]
    for (i, j), v in model.quadratic.items():
        energies += v * states[:, pos[i]] * states[:, pos[j]]
    return ids, energies


def brute_force_minimizers(model: QuboModel, tol: float = 1e-9):
    """(min energy, set of minimizing assignments as frozensets of chosen ids)."""
    ids, energies = brute_force_energies(model)
    states = all_states(len(ids))
    emin = float(energies.min())
    winners = {
        frozenset(ids[p] for p in range(len(ids)) if states[row, p])
        for row in np.flatnonzero(energies <= emin + tol)
    }
    return emin, winners


def exhaustive_max_cliques(n: int, edges) -> set[frozenset]:
    """All maximum cliques by subset enumeration."""
    edge_set = set(edges)
    best_size = 0
    best: set[frozenset] = {frozenset()}
    for size in range(1, n + 1):
        found = set()
        for combo in itertools.combinations(range(n), size):
            if all(
                (a, b) in edge_set
                for a, b in itertools.combinations(combo, 2)
            ):
                found.add(frozenset(combo))
        if found:
            best_size = size
            best = found
    return best if best_size else {frozenset()}


def exhaustive_min_vertex_covers(n: int, edges) -> set[frozenset]:
    """All minimum vertex covers by subset enumeration."""
    edge_list = list(edges)
    for size in range(0, n + 1):
        found = set()
        for combo in itertools.combinations(range(n), size):
            chosen = set(combo)
            if all(u in chosen or v in chosen for u, v in edge_list):
                found.add(frozenset(combo))
        if found:
            return found
    return {frozenset(range(n))}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
