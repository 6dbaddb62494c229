from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from telegate import metrics as M
from telegate.noise import NoiseParams, gate_run
from telegate.protocols import ideal_resource, run_gate
from telegate.protocols.states import CNOT_OUTPUT, CPHASE_OUTPUT, gate_matrix
from telegate.qubit import DensityOp, PureState, basis_state, bell_state

OUTPUT = {"cnot": CNOT_OUTPUT, "cphase": CPHASE_OUTPUT}
RESOURCE = {"cnot": "chi", "cphase": "chi'"}


@dataclass
class FakeResult:
    """Minimal stand-in for a gate run: a fixed channel on the input."""

    rho: DensityOp
    success_fraction: float = 1.0

    def output(self):
        return self.rho


def channel_runner(gate, op=None, dephase=False):
    """Runner applying ``op`` (default: the reference gate) and optionally
    removing all off-diagonal elements in the computational basis."""
    u = gate_matrix(gate) if op is None else op

    def run(inp):
        rho = u @ inp.density().matrix @ u.conj().T
        if dephase:
            rho = np.diag(np.diag(rho))
        return FakeResult(DensityOp(OUTPUT[gate], rho))

    return run


def ideal_runner(gate):
    return lambda inp: run_gate(gate, inp, ideal_resource(RESOURCE[gate]))


class TestEstimate:
    def test_gaussian_propagation(self):
        a, b = M.Estimate(0.79, 0.02), M.Estimate(0.82, 0.02)
        lo = a + b - 1.0
        assert lo.value == pytest.approx(0.61)
        assert lo.sd == pytest.approx(np.hypot(0.02, 0.02))
        c = 2.0 * (a + b) - 3.0
        assert c.sd == pytest.approx(2 * np.hypot(0.02, 0.02))

    def test_min_and_mean(self):
        a, b = M.Estimate(0.5, 0.1), M.Estimate(0.4, 0.2)
        assert M.est_min(a, b) == b
        m = M.est_mean([a, b, M.Estimate(0.6, 0.0)])
        assert m.value == pytest.approx(0.5)
        assert m.sd == pytest.approx(np.hypot(0.1, 0.2) / 3)


class TestTruthTable:
    def test_ideal_cnot(self):
        table = M.exact_table("cnot", "zz", ideal_runner("cnot"))
        table.check_normalized()
        assert M.truth_table_fidelity(table) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("p, expected", [(0.72, 0.72), (0.25, 0.25), (1.0, 1.0)])
    def test_constant_entries(self, p, expected):
        probs = {k: p for k in M.TRUTH_TABLE_ENTRIES}
        assert M.truth_table_fidelity(probs) == pytest.approx(expected)

    def test_missing_entry(self):
        with pytest.raises(M.MetricError):
            M.truth_table_fidelity({("HH", "HH"): 1.0})

    def test_oracle_set_matches_named_entries(self):
        acc = set(M.accepted_outcomes("cnot", "zz"))
        assert acc == set(M.TRUTH_TABLE_ENTRIES)


class TestCorrelations:
    @pytest.mark.parametrize(
        "xx, yy, zz, expected",
        [(0.462, -0.434, 0.403, 0.57475), (1, -1, 1, 1.0), (0, 0, 0, 0.25)],
    )
    def test_examples(self, xx, yy, zz, expected):
        assert M.phi_plus_fidelity_from_correlations(xx, yy, zz) == pytest.approx(expected, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(M.MetricError):
            M.phi_plus_fidelity_from_correlations(1.2, 0, 0)


class TestComplementary:
    def test_ideal_cphase(self):
        fa, fb = M.complementary_fidelities("cphase", ideal_runner("cphase"))
        assert (fa.value, fb.value) == pytest.approx((1.0, 1.0), abs=1e-12)

    def test_ideal_cnot_uses_zz_and_xx(self):
        fa, fb = M.complementary_fidelities("cnot", ideal_runner("cnot"))
        assert (fa.value, fb.value) == pytest.approx((1.0, 1.0), abs=1e-12)

    def test_identity_channel(self):
        run = channel_runner("cphase", np.eye(4))
        f_zx = M.setting_fidelity("cphase", M.exact_table("cphase", "zx", run))
        assert f_zx.value == pytest.approx(0.5, abs=1e-12)

    def test_missing_setting(self):
        with pytest.raises(M.MetricError):
            M.complementary_fidelities("cphase", tables={})

    @pytest.mark.parametrize(
        "fa, fb, lower, upper, conc",
        [
            (0.79, 0.82, 0.61, 0.79, 0.22),
            (1.0, 1.0, 1.0, 1.0, 1.0),
            (0.5, 0.5, 0.0, 0.5, -1.0),
            (0.75, 0.75, 0.5, 0.75, 0.0),
        ],
    )
    def test_bound_arithmetic(self, fa, fb, lower, upper, conc):
        lo, up = M.process_fidelity_bounds(fa, fb)
        assert (lo, up) == pytest.approx((lower, upper), abs=1e-12)
        assert M.concurrence_lower_bound(fa, fb) == pytest.approx(conc, abs=1e-12)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_lower_never_exceeds_upper(self, fa, fb):
        lo, up = M.process_fidelity_bounds(fa, fb)
        assert lo <= up + 1e-15


class TestParallelism:
    def test_ideal(self):
        table = M.exact_table("cphase", "parallelism", ideal_runner("cphase"))
        assert M.parallelism_fidelity(table).value == pytest.approx(1.0, abs=1e-12)
        assert table[("++", "RR")] == pytest.approx(0.5)

    def test_dephased_output(self):
        table = M.exact_table("cphase", "parallelism", channel_runner("cphase", dephase=True))
        assert M.parallelism_fidelity(table).value == pytest.approx(0.5, abs=1e-12)

    def test_wrong_setting(self):
        table = M.exact_table("cphase", "zx", ideal_runner("cphase"))
        with pytest.raises(M.MetricError):
            M.parallelism_fidelity(table)

    @pytest.mark.parametrize(
        "f, average, passed",
        [((0.79, 0.82, 0.81), 0.80666666, True), ((2 / 3,) * 3, 2 / 3, False), ((1, 1, 1), 1.0, True)],
    )
    def test_criterion(self, f, average, passed):
        res = M.parallelism_criterion(*f)
        assert res.average == pytest.approx(average, abs=1e-8)
        assert res.passed is passed

    def test_accepted_set_differs_from_print_in_one_term(self):
        diff = M.printed_outcome_diff()["parallelism_printed"]
        assert diff["printed_only"] == ["P(LR|--)"]
        assert diff["derived_only"] == ["P(LR|-+)"]

    def test_oracle_probabilities_are_halves(self):
        cond = M.ideal_conditional("cphase", "parallelism")
        for key in M.accepted_outcomes("cphase", "parallelism"):
            assert cond[key] == pytest.approx(0.5)


class TestWitness:
    @pytest.mark.parametrize(
        "fid, kind, passed, margin",
        [
            (0.575, "two-qubit-bell", True, 0.075),
            (0.71, "four-qubit-cluster", True, 0.21),
            (0.5, "two-qubit-bell", False, 0.0),
        ],
    )
    def test_examples(self, fid, kind, passed, margin):
        res = M.entanglement_witness(fid, kind)
        assert res.passed is passed
        assert res.margin == pytest.approx(margin)

    def test_unknown_kind(self):
        with pytest.raises(M.MetricError):
            M.entanglement_witness(0.9, "ghz")


class TestCorrectionComparison:
    @pytest.mark.parametrize("gate, inp", [("cphase", "++"), ("cnot", "H+"), ("cnot", "RV")])
    def test_ideal_gate(self, gate, inp):
        res = run_gate(gate, basis_state(inp, "12"), ideal_resource(RESOURCE[gate]))
        comp = M.correction_comparison(res)
        assert len(comp.rows) == 16
        assert comp.corrected_average == pytest.approx(1.0, abs=1e-12)
        assert comp.uncorrected_average == pytest.approx(0.25, abs=1e-12)
        oracle = M.uncorrected_oracle(gate, basis_state(inp, "12"))
        for row in comp.rows:
            assert row.uncorrected == pytest.approx(oracle[row.outcome], abs=1e-12)

    def test_identity_outcome_unchanged(self):
        res = run_gate("cphase", basis_state("++", "12"), ideal_resource("chi'"))
        row = next(r for r in M.correction_comparison(res).rows if r.outcome == ("Phi+", "Phi+"))
        assert row.corrected == pytest.approx(row.uncorrected)

    def test_uncorrected_pattern_for_plus_plus(self):
        values = M.uncorrected_oracle("cphase", basis_state("++", "12")).values()
        for v in values:
            assert min(abs(v - x) for x in (0.0, 0.5, 1.0)) < 1e-12
        assert np.mean(list(values)) == pytest.approx(0.25)

    def test_figure_order_covers_all_outcomes(self):
        order = M.figure_order()
        assert len(order) == 16 and len(set(order)) == 16


class TestProcessOracle:
    @pytest.mark.parametrize("gate", ["cnot", "cphase"])
    def test_reference_channel(self, gate):
        assert M.process_fidelity(M.run_channel(channel_runner(gate), gate), gate) == pytest.approx(1.0, abs=1e-12)

    def test_identity_vs_cphase(self):
        """|Tr(U^dag V)|^2 / 16 for unitary channels: Tr(CZ) = 2."""
        run = channel_runner("cphase", np.eye(4))
        assert M.process_fidelity(M.run_channel(run, "cphase"), "cphase") == pytest.approx(0.25, abs=1e-12)

    def test_choi_of_unitary_is_pure_and_unit_trace(self):
        s = M.superoperator(lambda rho: DensityOp(rho.register, gate_matrix("cnot") @ rho.matrix @ gate_matrix("cnot").T))
        j = M.choi_matrix(s)
        assert np.trace(j).real == pytest.approx(1.0)
        assert np.trace(j @ j).real == pytest.approx(1.0)

    def test_depolarized_channel(self):
        """Mixing the gate with the fully depolarizing map: F = p + (1 - p)/16."""
        p = 0.7
        u = gate_matrix("cnot")

        def channel(rho):
            m = p * u @ rho.matrix @ u.conj().T + (1 - p) * np.eye(4) / 4
            return DensityOp(rho.register, m)

        assert M.process_fidelity(channel, "cnot") == pytest.approx(p + (1 - p) / 16, abs=1e-12)

    def test_noisy_gate_within_bounds(self):
        params = NoiseParams(overlap=0.85, phase_drift=0.3)
        run = lambda inp: gate_run("cphase", inp, params, level="qubit")
        f_pro = M.process_fidelity(M.run_channel(run, "cphase"), "cphase")
        fa, fb = M.complementary_fidelities("cphase", run)
        lo, up = M.process_fidelity_bounds(fa, fb)
        assert lo.value - 1e-9 <= f_pro <= up.value + 1e-9
        res = run(basis_state("++", "12"))
        assert M.output_concurrence(res) >= M.concurrence_lower_bound(fa, fb).value - 1e-9


class TestSampledTables:
    def test_sampled_converges_to_exact(self):
        params = NoiseParams(overlap=0.9)
        run = lambda inp: gate_run("cphase", inp, params)
        exact = M.exact_table("cphase", "zx", run)
        sampled, raw = M.sampled_table("cphase", "zx", run, shots=200_000, seed=3)
        for key, p in exact.probs.items():
            sd = sampled.sd[key]
            assert abs(sampled[key] - p) <= 4 * max(sd, 1e-4)
        assert set(raw) == set(exact.setting.input_labels())

    def test_sampled_table_normalized_within_counts(self):
        run = ideal_runner("cnot")
        table, _ = M.sampled_table("cnot", "zz", run, shots=5000, seed=[1, 2])
        table.check_normalized(tol=1e-12)
        assert M.truth_table_fidelity(table) == 1.0

    def test_setting_fidelity_sd_from_counts(self):
        run = lambda inp: gate_run("cnot", inp, NoiseParams(overlap=0.8))
        table, _ = M.sampled_table("cnot", "zz", run, shots=20_000, seed=9)
        f = M.setting_fidelity("cnot", table)
        assert 0.0 < f.sd < 0.02

    def test_unknown_setting(self):
        with pytest.raises(M.MetricError):
            M.setting("yy")
