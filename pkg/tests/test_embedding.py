"""Tests for clique embedding construction, mapping, and decoding."""

import numpy as np
import pytest

from annealmon.embedding import (
    ChainStrengthPolicy,
    Embedding,
    chimera_clique_embedding,
    embed_qubo,
    load_embedding,
    save_embedding,
    unembed,
    utc_chain_strength,
    validate_embedding,
)
from annealmon.errors import CapacityError, EmbeddingError, EvaluationError, ModelError
from annealmon.qubo import QuboModel, Sample, energy
from annealmon.topology import apply_defects, chimera
from conftest import all_states, brute_force_minimizers


def complete_edges(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


class TestCliqueConstruction:
    def test_k8_on_c2(self):
        g = chimera(2, 4)
        e = chimera_clique_embedding(g, 8)
        assert validate_embedding(e, complete_edges(8)).ok
        assert e.max_chain_length <= 3

    def test_k16_on_c4(self):
        g = chimera(4, 4)
        e = chimera_clique_embedding(g, 16)
        assert validate_embedding(e, complete_edges(16)).ok

    def test_single_variable_single_qubit(self):
        e = chimera_clique_embedding(chimera(2, 4), 1)
        assert e.chains == {0: (0,)}

    def test_supported_range(self):
        # every supported (m, k) pair yields a valid K_k embedding; all k for
        # small grids, spot-checked corners for the larger ones
        for m in range(1, 5):
            g = chimera(m, 4)
            for k in range(1, 4 * m + 1):
                e = chimera_clique_embedding(g, k)
                assert validate_embedding(e, complete_edges(k)).ok
                assert e.max_chain_length <= m + 1
        for m in range(5, 9):
            g = chimera(m, 4)
            for k in (1, 2 * m, 4 * m):
                e = chimera_clique_embedding(g, k)
                assert validate_embedding(e, complete_edges(k)).ok
                assert e.max_chain_length <= m + 1

    def test_capacity_error_reports_max(self):
        g = chimera(2, 4)
        with pytest.raises(CapacityError) as err:
            chimera_clique_embedding(g, 9)
        assert err.value.maximum == 8

    def test_defective_graph_rejected(self):
        g = apply_defects(chimera(2, 4), [0])
        with pytest.raises(EmbeddingError):
            chimera_clique_embedding(g, 4)

    def test_origin_offsets_disjoint(self):
        g = chimera(4, 4)
        quads = [(0, 0), (0, 2), (2, 0), (2, 2)]
        footprints = []
        for origin in quads:
            e = chimera_clique_embedding(g, 8, origin=origin)
            assert validate_embedding(e, complete_edges(8)).ok
            footprints.append(e.footprint)
        for i in range(4):
            for j in range(i + 1, 4):
                assert not footprints[i] & footprints[j]


class TestValidateEmbedding:
    def test_identity_embedding(self):
        g = chimera(1, 4)
        chains = {i: (i,) for i in range(8)}
        e = Embedding(chains=chains, hardware=g)
        # logical edges restricted to actual couplers
        edges = [(0, 4), (1, 5), (2, 6)]
        assert validate_embedding(e, edges).ok

    def test_shared_qubit_reported(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0, 4), 1: (4, 1)}, hardware=g)
        report = validate_embedding(e, [])
        assert any("claim qubit 4" in v for v in report.violations)

    def test_broken_chain_reported(self):
        g = chimera(4, 4)
        e = chimera_clique_embedding(g, 10)
        chains = dict(e.chains)
        # delete a middle qubit from the longest chain
        longest = max(chains, key=lambda v: len(chains[v]))
        chain = chains[longest]
        chains[longest] = chain[:1] + chain[2:]
        mutated = Embedding(chains=chains, hardware=g)
        report = validate_embedding(mutated, complete_edges(10))
        assert not report.ok
        assert any("not connected" in v for v in report.violations)

    def test_missing_coupler_reported(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0,), 1: (1,)}, hardware=g)
        report = validate_embedding(e, [(0, 1)])  # two vertical qubits: no coupler
        assert any("no physical coupler" in v for v in report.violations)


class TestChainStrength:
    def test_single_edge(self):
        m = QuboModel.from_terms({}, {(0, 1): 4.0})
        assert utc_chain_strength(m, 1.0) == pytest.approx(4.0)

    def test_regular_graph(self):
        # 4-cycle: 2-regular, all couplings c
        c = -1.5
        m = QuboModel.from_terms(
            {}, {(0, 1): c, (1, 2): c, (2, 3): c, (0, 3): c}
        )
        assert utc_chain_strength(m, 1.0) == pytest.approx(abs(c) * np.sqrt(2))

    def test_linear_in_prefactor(self):
        m = QuboModel.from_terms({}, {(0, 1): 2.0, (1, 2): -3.0})
        assert utc_chain_strength(m, 2.0) == pytest.approx(2 * utc_chain_strength(m, 1.0))

    def test_no_quadratic_terms(self):
        m = QuboModel.from_terms({0: 1.0}, {})
        with pytest.raises(ModelError):
            utc_chain_strength(m, 1.0)

    def test_policy_validation(self):
        with pytest.raises(ModelError):
            ChainStrengthPolicy("fixed", value=0.0)
        with pytest.raises(ModelError):
            ChainStrengthPolicy("other")


class TestEmbedQubo:
    def test_linear_split(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0, 4)}, hardware=g)
        m = QuboModel.from_terms({0: -1.0}, {})
        hw = embed_qubo(m, e, ChainStrengthPolicy("fixed", value=1.0))
        # -0.5 per qubit plus +2*cs from the single tree edge
        assert hw.linear[0] == pytest.approx(-0.5 + 2.0)
        assert hw.linear[4] == pytest.approx(-0.5 + 2.0)
        assert hw.quadratic[(0, 4)] == pytest.approx(-4.0)

    def test_quadratic_split_over_couplers(self):
        g = chimera(1, 4)
        # chains {V0,H0} and {V1,H1}: inter-chain couplers V0-H1 and V1-H0
        e = Embedding(chains={0: (0, 4), 1: (1, 5)}, hardware=g)
        m = QuboModel.from_terms({}, {(0, 1): 2.0})
        hw = embed_qubo(m, e, ChainStrengthPolicy("fixed", value=1.0))
        assert hw.quadratic[(0, 5)] == pytest.approx(1.0)
        assert hw.quadratic[(1, 4)] == pytest.approx(1.0)

    def test_splitting_conservation(self, rng):
        g = chimera(3, 4)
        k = 9
        e = chimera_clique_embedding(g, k)
        lin = {i: float(rng.uniform(-1, 1)) for i in range(k)}
        quad = {
            (i, j): float(rng.uniform(-1, 1))
            for i, j in complete_edges(k)
            if rng.random() < 0.7
        }
        m = QuboModel.from_terms(lin, quad)
        cs = 2.0
        hw = embed_qubo(m, e, ChainStrengthPolicy("fixed", value=cs))
        # subtract chain-integrity terms, then re-aggregate per chain
        tree_lin = {}
        n_tree_edges = sum(len(c) - 1 for c in e.chains.values())
        for var, chain in e.chains.items():
            recombined = 0.0
            for q in chain:
                recombined += hw.linear.get(q, 0.0)
            # each tree edge adds 2cs to both endpoints
            # count tree edges within this chain: len(chain) - 1
            recombined -= 4.0 * cs * (len(chain) - 1)
            assert recombined == pytest.approx(lin.get(var, 0.0), abs=1e-12)
        quad_sum = sum(hw.quadratic.values())
        expected = sum(quad.values()) - 4.0 * cs * n_tree_edges
        assert quad_sum == pytest.approx(expected, rel=1e-12)

    def test_unbroken_energy_identity(self, rng):
        # aligned chains contribute nothing, so hardware energy == logical energy
        g = chimera(2, 4)
        k = 4
        e = chimera_clique_embedding(g, k)
        m = QuboModel.from_terms(
            {i: float(rng.uniform(-1, 1)) for i in range(k)},
            {p: float(rng.uniform(-1, 1)) for p in complete_edges(k)},
        )
        hw = embed_qubo(m, e, ChainStrengthPolicy("fixed", value=3.0))
        ids = sorted(m.variables)
        for row in all_states(k):
            logical = Sample({v: int(row[p]) for p, v in enumerate(ids)})
            lifted = {}
            for var, chain in e.chains.items():
                for q in chain:
                    lifted[q] = logical.assignment[var]
            for q in hw.variables - set(lifted):
                lifted[q] = 0
            assert energy(hw, Sample(lifted)) == pytest.approx(
                energy(m, logical), abs=1e-9
            )

    def test_ground_state_agreement(self, rng):
        # with a dominating chain strength the hardware minimum decodes to the
        # logical minimum (brute force over all hardware states, <= 12 qubits)
        g = chimera(1, 4)
        for trial in range(10):
            k = 4
            e = chimera_clique_embedding(g, k)
            m = QuboModel.from_terms(
                {i: float(rng.uniform(-1, 1)) for i in range(k)},
                {p: float(rng.uniform(-1, 1)) for p in complete_edges(k)},
            )
            cs = 2.0 * m.max_abs_coefficient()
            hw = embed_qubo(m, e, ChainStrengthPolicy("fixed", value=cs))
            hw_ids = sorted(hw.variables)
            _, winners = brute_force_minimizers(hw)
            _, logical_winners = brute_force_minimizers(m)
            decoded = set()
            for w in winners:
                assignment = {q: (1 if q in w else 0) for q in hw_ids}
                tie_rng = np.random.default_rng(0)
                s, broken = unembed(Sample(assignment), e, tie_rng)
                assert broken == 0.0
                decoded.add(frozenset(v for v, b in s.assignment.items() if b))
            assert decoded <= logical_winners

    def test_missing_chain_rejected(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0,)}, hardware=g)
        m = QuboModel.from_terms({0: 1.0, 1: 1.0}, {})
        with pytest.raises(EmbeddingError):
            embed_qubo(m, e, ChainStrengthPolicy("fixed", value=1.0))

    def test_uncoupled_chains_rejected(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0,), 1: (1,)}, hardware=g)
        m = QuboModel.from_terms({}, {(0, 1): 1.0})
        with pytest.raises(EmbeddingError):
            embed_qubo(m, e, ChainStrengthPolicy("fixed", value=1.0))


class TestUnembed:
    @pytest.fixture
    def embedding(self):
        g = chimera(1, 4)
        return Embedding(chains={0: (0, 4, 1)}, hardware=g)

    def test_unanimous(self, embedding):
        s, broken = unembed(
            Sample({0: 1, 4: 1, 1: 1}), embedding, np.random.default_rng(0)
        )
        assert s.assignment == {0: 1}
        assert broken == 0.0

    def test_majority(self, embedding):
        s, broken = unembed(
            Sample({0: 1, 4: 0, 1: 1}), embedding, np.random.default_rng(0)
        )
        assert s.assignment == {0: 1}
        assert broken == 1.0

    def test_tie_deterministic_per_seed(self):
        g = chimera(1, 4)
        e = Embedding(chains={0: (0, 4)}, hardware=g)
        sample = Sample({0: 1, 4: 0})
        first = unembed(sample, e, np.random.default_rng(3))[0]
        second = unembed(sample, e, np.random.default_rng(3))[0]
        assert first == second
        # both outcomes occur across seeds
        outcomes = {
            unembed(sample, e, np.random.default_rng(s))[0].assignment[0]
            for s in range(32)
        }
        assert outcomes == {0, 1}

    def test_missing_qubit(self, embedding):
        with pytest.raises(EvaluationError):
            unembed(Sample({0: 1, 4: 1}), embedding, np.random.default_rng(0))


class TestEmbeddingFile:
    def test_round_trip(self, tmp_path):
        g = chimera(2, 4)
        e = chimera_clique_embedding(g, 6)
        path = tmp_path / "emb.txt"
        save_embedding(e, str(path))
        loaded = load_embedding(str(path), g)
        assert loaded.chains == e.chains

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("em 2\nchain 0 0 4\n")
        from annealmon.errors import GraphFormatError

        with pytest.raises(GraphFormatError):
            load_embedding(str(path), chimera(1, 4))
