"""Tests for the cellular-automaton core, checked against brute-force oracles."""

import numpy as np
import pytest

from macasplice import fca
from macasplice.fca import (
    AttractorId,
    ComplementVector,
    DependencyMatrix,
    EvolutionParams,
    attractor_id,
    enumerate_basins,
    evolve,
    evolve_batch,
    quantize,
    step,
)

import oracles

# three-cell rule used throughout: cell 0 watches itself, cell 1 averages
# cells 0-1, cell 2 averages cells 1-2
CHAIN = DependencyMatrix.from_rows([(0,), (0, 1), (1, 2)])
NO_FLIPS = ComplementVector.zeros(3)


class TestDependencyMatrix:
    def test_from_rows_round_trip(self):
        assert CHAIN.rows() == [(0,), (0, 1), (1, 2)]
        assert CHAIN.masks.tolist() == [2, 3, 3]

    def test_identity(self):
        t = DependencyMatrix.identity(4)
        assert t.rows() == [(0,), (1,), (2,), (3,)]

    def test_empty_row_rejected(self):
        with pytest.raises(ValueError, match="mask 0"):
            DependencyMatrix(np.array([2, 0, 2], dtype=np.uint8))

    def test_out_of_range_dependency_rejected(self):
        with pytest.raises(ValueError, match="left neighbor"):
            DependencyMatrix(np.array([1, 2], dtype=np.uint8))
        with pytest.raises(ValueError, match="right neighbor"):
            DependencyMatrix(np.array([2, 4], dtype=np.uint8))
        with pytest.raises(ValueError):
            DependencyMatrix.from_rows([(0, 2), (1,), (2,)])

    def test_hash_and_eq_on_contents(self):
        again = DependencyMatrix.from_rows([(0,), (0, 1), (1, 2)])
        assert again == CHAIN and hash(again) == hash(CHAIN)
        assert DependencyMatrix.identity(3) != CHAIN


class TestComplementVector:
    def test_validation(self):
        with pytest.raises(ValueError, match="0 or 1"):
            ComplementVector(np.array([0, 2], dtype=np.uint8))

    def test_factories(self):
        assert ComplementVector.zeros(3).bits.tolist() == [0, 0, 0]
        assert ComplementVector.ones(2).bits.tolist() == [1, 1]


class TestStep:
    def test_chain_example(self):
        got = step(CHAIN, NO_FLIPS, [0.0, 1.0, 1.0])
        assert got.tolist() == [0.0, 0.5, 1.0]

    def test_complement_applies_after_mean(self):
        flips = ComplementVector(np.array([1, 0, 0], dtype=np.uint8))
        got = step(CHAIN, flips, [0.0, 1.0, 1.0])
        assert got.tolist() == [1.0, 0.5, 1.0]

    def test_matches_oracle_bitwise(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            rows, flip_bits = oracles.random_rule(rng, 9)
            t = DependencyMatrix.from_rows(rows)
            f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
            s = rng.random(9)
            assert step(t, f, s).tolist() == oracles.oracle_step(rows, flip_bits, s)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            step(CHAIN, ComplementVector.zeros(4), [0.0, 0.0, 0.0])

    def test_range_validation(self):
        with pytest.raises(ValueError, match="\\[0, 1\\]"):
            step(CHAIN, NO_FLIPS, [0.0, 1.5, 0.0])


class TestQuantization:
    def test_eight_level_values(self):
        assert quantize([0.0, 1.0], 8) == (0, 7)
        assert quantize([1 / 3, 2 / 3], 8) == (2, 5)
        # midpoints round up
        assert quantize([0.5], 8) == (4,)

    def test_key_format(self):
        aid = attractor_id([0.0, 0.5, 1.0], 8)
        assert aid.key == "0|4|7"

    def test_id_equality_ignores_kind(self):
        a = AttractorId("1|2", fca.FIXED_POINT)
        b = AttractorId("1|2", fca.PERIOD_2_CYCLE)
        assert a == b and hash(a) == hash(b)
        assert a != AttractorId("1|3")


class TestEvolve:
    def test_identity_rule_is_immediate_fixed_point(self):
        t = DependencyMatrix.identity(3)
        s0 = [0.0, 0.5, 1.0]
        tr = evolve(t, NO_FLIPS, s0)
        assert tr.status == fca.FIXED_POINT
        assert tr.steps == 0
        assert tr.final.tolist() == s0

    def test_chain_converges_to_zero_vector(self):
        # frozen from the brute-force oracle
        tr = evolve(CHAIN, NO_FLIPS, [0.0, 1.0, 1.0])
        assert tr.status == fca.FIXED_POINT
        assert tr.steps == 34
        assert tr.id.key == "0|0|0"
        assert np.allclose(tr.final, 0.0, atol=1e-8)

    def test_complemented_identity_cycles(self):
        t = DependencyMatrix.identity(3)
        f = ComplementVector.ones(3)
        tr = evolve(t, f, [0.0, 0.0, 0.0])
        assert tr.status == fca.PERIOD_2_CYCLE
        assert tr.steps == 2
        # members are the all-zero and all-one states; the smaller quantized
        # member identifies the cycle
        assert tr.id.key == "0|0|0"
        assert tr.final.tolist() == [0.0, 0.0, 0.0]

    def test_truncation_at_step_cap(self):
        params = EvolutionParams(max_steps=1)
        tr = evolve(CHAIN, NO_FLIPS, [0.0, 1.0, 1.0], params)
        assert tr.status == fca.TRUNCATED
        assert tr.steps == 1
        assert tr.final.tolist() == [0.0, 0.5, 1.0]

    def test_matches_oracle_bitwise(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            rows, flip_bits = oracles.random_rule(rng, 7)
            t = DependencyMatrix.from_rows(rows)
            f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
            s0 = rng.integers(0, 4, size=7) / 3.0
            want_final, want_steps, want_status = oracles.oracle_evolve(rows, flip_bits, s0)
            tr = evolve(t, f, s0)
            assert tr.final.tolist() == want_final
            assert tr.steps == want_steps
            assert tr.status == want_status

    def test_finals_stay_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            rows, flip_bits = oracles.random_rule(rng, 12)
            t = DependencyMatrix.from_rows(rows)
            f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
            tr = evolve(t, f, rng.random(12))
            assert tr.final.min() >= 0.0 and tr.final.max() <= 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        rows, flip_bits = oracles.random_rule(rng, 10)
        t = DependencyMatrix.from_rows(rows)
        f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
        s0 = rng.random(10)
        a = evolve(t, f, s0)
        b = evolve(t, f, s0)
        assert a.final.tolist() == b.final.tolist()
        assert (a.steps, a.status, a.id) == (b.steps, b.status, b.id)


class TestEvolveBatch:
    def test_row_results_match_single_evolution(self):
        rng = np.random.default_rng(17)
        rows, flip_bits = oracles.random_rule(rng, 8)
        t = DependencyMatrix.from_rows(rows)
        f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
        states = rng.integers(0, 4, size=(30, 8)) / 3.0
        finals, steps, codes = evolve_batch(t, f, states)
        for i in range(30):
            tr = evolve(t, f, states[i])
            assert finals[i].tolist() == tr.final.tolist()
            assert steps[i] == tr.steps

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError, match="2-d"):
            evolve_batch(CHAIN, NO_FLIPS, np.zeros(3))

    def test_empty_batch(self):
        finals, steps, codes = evolve_batch(CHAIN, NO_FLIPS, np.zeros((0, 3)))
        assert finals.shape == (0, 3) and steps.size == 0 and codes.size == 0


class TestBackends:
    def test_python_backend_always_available(self):
        assert "python" in fca.available_backends()

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError, match="unknown backend"):
            fca.set_backend("fortran")

    @pytest.mark.skipif(
        "compiled" not in fca.available_backends(), reason="compiled kernel not built"
    )
    def test_backends_bit_identical(self):
        rng = np.random.default_rng(99)
        saved = fca.get_backend()
        try:
            for _ in range(10):
                rows, flip_bits = oracles.random_rule(rng, 60)
                t = DependencyMatrix.from_rows(rows)
                f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
                states = rng.integers(0, 4, size=(25, 60)) / 3.0
                fca.set_backend("python")
                fp, sp, cp = evolve_batch(t, f, states)
                fca.set_backend("compiled")
                fc, sc, cc = evolve_batch(t, f, states)
                assert np.array_equal(fp, fc)
                assert np.array_equal(sp, sc)
                assert np.array_equal(cp, cc)
        finally:
            fca.set_backend(saved)


class TestEnumerateBasins:
    def test_chain_partitions_binary_grid(self):
        # frozen from the brute-force oracle: the 2^3 grid splits into the
        # all-zero and all-one basins, four configurations each
        basins = enumerate_basins(CHAIN, NO_FLIPS, 3, 2)
        sizes = {aid.key: len(members) for aid, members in basins.items()}
        assert sizes == {"0|0|0": 4, "7|7|7": 4}

    def test_matches_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            rows, flip_bits = oracles.random_rule(rng, 5)
            t = DependencyMatrix.from_rows(rows)
            f = ComplementVector(np.array(flip_bits, dtype=np.uint8))
            want = oracles.oracle_enumerate_basins(rows, flip_bits, 5, 3)
            got = enumerate_basins(t, f, 5, 3)
            assert {aid.key: members for aid, members in got.items()} == want

    def test_partition_covers_grid_disjointly(self):
        basins = enumerate_basins(DependencyMatrix.identity(4), ComplementVector.zeros(4), 4, 4)
        members = [m for s in basins.values() for m in s]
        assert len(members) == 4**4
        assert len(set(members)) == 4**4

    def test_size_guard(self):
        t = DependencyMatrix.identity(60)
        with pytest.raises(ValueError, match="too large"):
            enumerate_basins(t, ComplementVector.zeros(60), 60, 4)


class TestEvolutionParams:
    def test_defaults(self):
        p = EvolutionParams()
        assert (p.max_steps, p.epsilon, p.quant_levels) == (256, 1e-9, 8)

    def test_validation(self):
        with pytest.raises(ValueError):
            EvolutionParams(max_steps=0)
        with pytest.raises(ValueError):
            EvolutionParams(epsilon=0.0)
        with pytest.raises(ValueError):
            EvolutionParams(quant_levels=1)
