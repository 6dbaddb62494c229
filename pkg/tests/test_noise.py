import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from telegate.noise import (
    BLOCK,
    IDEAL,
    INTERFERENCE_POINTS,
    NoiseError,
    NoiseParams,
    ShotResult,
    axis_grid,
    binomial_sd,
    emission_configs,
    fit_report,
    gate_run,
    is_monotone_nonincreasing,
    noisy_resource,
    run_shots,
    sample_categorical,
    sample_emission,
    zero_noise_gap,
)
from telegate.protocols import ideal_resource, random_pure_state, run_gate
from telegate.protocols.optics import MEASURED_PPBS, drift_weights
from telegate.protocols.states import product_input
from telegate.qubit import fidelity, single_qubit

INPUTS = {"cnot": product_input("H", "+"), "cphase": product_input("+", "+")}


def gate_fidelity(gate, params, level="physical"):
    res = gate_run(gate, INPUTS[gate], params, level=level)
    return fidelity(res.output(), res.ideal())


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"p2": -0.01},
            {"p2": 0.25},
            {"overlap": 1.1},
            {"overlap": -0.1},
            {"ppbs_ports": ((1.2, 0.3), (1.0, 0.3))},
            {"ppbs_ports": ((1.0, 0.3),)},
            {"phase_drift": -1.0},
            {"pair_overlaps": ((("A", "B"), 2.0),)},
        ],
    )
    def test_invalid_values(self, kwargs):
        with pytest.raises(NoiseError):
            NoiseParams(**kwargs)

    def test_round_trip(self):
        p = NoiseParams(p2=0.05, overlap=0.9, ppbs_ports=MEASURED_PPBS, phase_drift=0.1,
                        pair_overlaps=((("A", "C"), 0.8),))
        assert NoiseParams.from_dict(p.to_dict()) == p

    def test_ideal(self):
        assert IDEAL.is_ideal
        assert not IDEAL.replace(p2=0.01).is_ideal


class TestEmission:
    def test_no_double_pairs(self):
        configs, dropped = emission_configs(3, 0.0)
        assert [(c.pairs, c.weight) for c in configs] == [((1, 1, 1), 1.0)]
        assert dropped == 0.0

    @pytest.mark.parametrize("p2", [0.01, 0.05, 0.2])
    def test_truncation_at_eight_photons(self, p2):
        configs, dropped = emission_configs(3, p2)
        assert max(c.photons for c in configs) == 8
        assert dropped == pytest.approx(3 * p2**2 * (1 - p2) + p2**3)
        assert sum(c.weight for c in configs) == pytest.approx(1.0)
        nominal = next(c for c in configs if c.pairs == (1, 1, 1))
        assert nominal.weight == pytest.approx((1 - p2) ** 3 / (1 - dropped))

    def test_two_sources_keep_everything(self):
        configs, dropped = emission_configs(2, 0.1)
        assert dropped == 0.0
        assert len(configs) == 4

    def test_sample_without_p2(self, rng):
        assert all(sample_emission(3, 0.0, rng) == (1, 1, 1) for _ in range(1000))

    def test_sample_frequency(self):
        rng = np.random.default_rng(2)
        n, p2 = 100_000, 0.05
        doubles = sum(sample_emission(1, p2, rng)[0] == 2 for _ in range(n))
        sigma = math.sqrt(n * p2 * (1 - p2))
        assert abs(doubles - n * p2) <= 3 * sigma

    def test_invalid_p2(self, rng):
        with pytest.raises(ValueError):
            sample_emission(2, 1.5, rng)


class TestShots:
    def test_counts_sum_to_accepted(self):
        res = run_shots({"a": 0.2, "b": 0.3}, 10_000, seed=1)
        assert res.accepted + res.rejected == res.shots
        assert 0.0 <= res.frequency("a") <= 1.0

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_independent_of_workers(self, workers):
        probs = {"a": 0.1, "b": 0.25, "c": 0.4}
        shots = 5 * BLOCK + 17
        one = run_shots(probs, shots, seed=99)
        many = run_shots(probs, shots, seed=99, workers=workers)
        assert one == many

    def test_seed_changes_counts(self):
        probs = {"a": 0.5}
        assert run_shots(probs, 1000, seed=1).counts != run_shots(probs, 1000, seed=2).counts

    def test_sequence_seeds_are_streams(self):
        a = sample_categorical([0.5, 0.5], 1000, seed=[7, 0])
        b = sample_categorical([0.5, 0.5], 1000, seed=[7, 1])
        assert not np.array_equal(a, b)

    def test_zero_acceptance_flag(self):
        res = run_shots({"a": 0.0}, 100, seed=3)
        assert res.zero_acceptance
        assert math.isnan(res.frequency("a"))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            run_shots({"a": 0.7, "b": 0.5}, 10, seed=1)
        with pytest.raises(ValueError):
            run_shots({"a": 0.5}, 0, seed=1)
        with pytest.raises(ValueError):
            sample_categorical([1.0], 10, seed=None)

    def test_ideal_truth_table_has_no_wrong_counts(self):
        for control in "HV":
            for target in "HV":
                res = run_gate("cnot", product_input(target, control), ideal_resource("chi"))
                out = res.output()
                probs = {}
                for bits in ("HH", "HV", "VH", "VV"):
                    v = np.kron(single_qubit(bits[0]), single_qubit(bits[1]))
                    probs[bits] = float(np.vdot(v, out.matrix @ v).real)
                shots = run_shots(probs, 10_000, seed=5)
                expected = ("V" if control == "V" and target == "H" else
                            "H" if control == "V" else target) + control
                assert shots.counts[expected] == 10_000

    def test_partial_acceptance_fraction(self):
        res = run_gate("cnot", product_input("H", "+"), ideal_resource("chi"), bsm="partial")
        probs = {k: b.probability for k, b in res.branches.items() if not b.failed}
        shots = run_shots(probs, 100_000, seed=11)
        assert abs(shots.acceptance - 0.25) <= 3 * shots.acceptance_sd

    def test_four_sigma_meta(self):
        p, n = 0.3, 50
        sigma = math.sqrt(n * p * (1 - p))
        inside = sum(
            abs(run_shots({"x": p}, n, seed=s).counts["x"] - n * p) <= 4 * sigma
            for s in range(1000)
        )
        assert inside >= 999

    def test_binomial_sd_against_bootstrap(self):
        res = run_shots({"x": 0.2, "y": 0.5}, 4000, seed=17)
        outcomes = np.repeat([0, 1], [res.counts["x"], res.counts["y"]])
        rng = np.random.default_rng(0)
        boot = [np.mean(rng.choice(outcomes, len(outcomes)) == 0) for _ in range(2000)]
        assert np.std(boot) == pytest.approx(res.frequency_sd("x"), rel=0.1)

    def test_binomial_sd_edge_cases(self):
        assert math.isnan(binomial_sd(0, 0))
        assert binomial_sd(0, 10) == 0.0
        assert binomial_sd(5, 10) == pytest.approx(math.sqrt(0.25 / 10))

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5), st.integers(1, 3000),
           st.integers(0, 2**32 - 1))
    def test_counts_cover_all_shots(self, weights, shots, seed):
        total = sum(weights) or 1.0
        probs = {i: w / total * 0.9 for i, w in enumerate(weights)}
        res = run_shots(probs, shots, seed)
        assert res.accepted + res.rejected == shots
        assert all(c >= 0 for c in res.counts.values())


class TestEngine:
    @pytest.mark.parametrize("gate", ["cnot", "cphase"])
    def test_zero_noise_matches_protocol(self, gate):
        rng = np.random.default_rng(4)
        for _ in range(3):
            a, b = (rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(2))
            inp = product_input(a / np.linalg.norm(a), b / np.linalg.norm(b))
            assert zero_noise_gap(gate, inp) <= 1e-12

    @pytest.mark.parametrize("gate", ["cnot", "cphase"])
    @pytest.mark.parametrize("level", ["physical", "qubit"])
    def test_ideal_fidelity_is_one(self, gate, level):
        assert gate_fidelity(gate, IDEAL, level) == pytest.approx(1.0, abs=1e-9)

    def test_double_pairs_contaminate_cnot(self):
        assert gate_fidelity("cnot", NoiseParams(p2=0.05)) < 1.0

    @pytest.mark.parametrize("gate", ["cnot", "cphase"])
    def test_monotone_in_overlap(self, gate):
        fids = [gate_fidelity(gate, NoiseParams(overlap=v)) for v in (1.0, 0.9, 0.8, 0.7, 0.6)]
        assert is_monotone_nonincreasing(fids)
        assert fids[-1] < fids[0]

    @pytest.mark.parametrize("gate", ["cnot", "cphase"])
    def test_monotone_in_p2(self, gate):
        fids = [gate_fidelity(gate, NoiseParams(p2=p)) for p in (0.0, 0.02, 0.05, 0.1, 0.2)]
        assert is_monotone_nonincreasing(fids)
        assert fids[-1] < fids[0]

    @pytest.mark.parametrize(
        "gate, point",
        [(g, pt) for g, pts in INTERFERENCE_POINTS.items() for pt in pts.values()],
    )
    def test_monotone_per_interference_point(self, gate, point):
        fids = [
            gate_fidelity(gate, NoiseParams(overlap=0.9, pair_overlaps=((point, v),)))
            for v in (0.9, 0.85, 0.8, 0.75, 0.7)
        ]
        assert is_monotone_nonincreasing(fids)

    def test_phase_drift_lowers_cnot_fidelity(self):
        fids = [gate_fidelity("cnot", NoiseParams(phase_drift=s)) for s in (0.0, 0.2, 0.5)]
        assert is_monotone_nonincreasing(fids)
        assert fids[-1] < 1.0

    def test_noisy_resource_reports_probability(self):
        res = noisy_resource("cnot", NoiseParams(ppbs_ports=MEASURED_PPBS))
        assert 0.0 < res.probability < 1.0
        assert res.fidelity() < 1.0

    def test_physical_level_refuses_foreign_bsm(self):
        with pytest.raises(ValueError):
            gate_run("cnot", INPUTS["cnot"], IDEAL, bsm="complete")

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            gate_run("cnot", INPUTS["cnot"], IDEAL, level="logical")

    def test_dropped_weight_reported(self):
        res = gate_run("cnot", INPUTS["cnot"], NoiseParams(p2=0.1))
        assert res.meta["dropped_weight"] == pytest.approx(3 * 0.01 * 0.9 + 0.001)


class TestDriftQuadrature:
    @pytest.mark.parametrize("sigma", [0.0, 0.3, 1.0])
    def test_weights_reproduce_gaussian_characteristic_function(self, sigma):
        nodes, weights = drift_weights(4, sigma)
        for m in range(-4, 5):
            avg = np.sum(weights * np.exp(1j * m * nodes))
            assert avg == pytest.approx(np.exp(-0.5 * sigma**2 * m**2), abs=1e-13)


class TestFit:
    def model(self, params):
        return {"x": 1.0 - params.p2, "y": params.overlap}

    def test_ideal_grid_zero_residual(self):
        rep = fit_report({"x": 1.0, "y": 1.0}, [IDEAL], self.model)
        assert rep.best.residual == 0.0

    def test_picks_minimum_and_keeps_table(self):
        grid = axis_grid(IDEAL, "p2", [0.0, 0.05, 0.1, 0.15])
        rep = fit_report({"x": 0.9}, grid, self.model)
        assert rep.best.params.p2 == pytest.approx(0.1)
        assert len(rep.to_dict()["rows"]) == 4

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            fit_report({"x": 1.0}, [], self.model)

    def test_missing_prediction(self):
        with pytest.raises(KeyError):
            fit_report({"z": 1.0}, [IDEAL], self.model)

    def test_overlap_sweep_is_monotone(self):
        grid = axis_grid(IDEAL, "overlap", [1.0, 0.9, 0.8, 0.7, 0.6])
        rep = fit_report({"f": 1.0}, grid, lambda p: {"f": gate_fidelity("cphase", p)})
        assert is_monotone_nonincreasing([r.predicted["f"] for r in rep.rows])

    @pytest.mark.parametrize("values, expected", [([3, 2, 2, 1], True), ([1, 2], False), ([], True)])
    def test_monotone_helper(self, values, expected):
        assert is_monotone_nonincreasing(values) is expected
