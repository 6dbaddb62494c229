import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from telegate.fock import (
    HWP,
    PBS,
    PNR,
    PPBS,
    QWP,
    DetectionPattern,
    FockError,
    FockState,
    ModeId,
    ModeRegistry,
    PairSource,
    PathPhase,
    Phase,
    PolarizationQubit,
    Port,
    SourceConfig,
    SwapPaths,
    UnknownPathError,
    apply_element,
    available_backends,
    coincidence_branches,
    emission_state,
    post_select,
    prepare_plates,
    propagate,
    set_internal_overlap,
    to_qubits,
    use_backend,
)
from telegate.fock.kernel import MAX_PHOTONS
from telegate.protocols import prepare_cluster_chi, prepare_hyper_chi, prepare_lambda
from telegate.protocols.optics import cluster_sources
from telegate.fock.sources import uniform_overlap
from telegate.qubit import fidelity, single_qubit

PATHS = ("a", "b", "c")


def two_source_hom(v, pol_a="H", pol_b="H"):
    src = (
        PairSource.product("A", ("a", "x"), pol_a, "H"),
        PairSource.product("B", ("b", "y"), pol_b, "H"),
    )
    return emission_state(set_internal_overlap(SourceConfig(src), ("A", "B"), v))


def coincidence(state, paths=("a", "b")):
    return post_select(state, DetectionPattern(tuple(Port(p) for p in paths))).probability


def elements_strategy():
    t = st.floats(0.0, 1.0)
    angle = st.floats(-180.0, 180.0)
    pair = st.sampled_from([("a", "b"), ("b", "c"), ("c", "a")])
    path = st.sampled_from(PATHS)
    one = st.one_of(
        st.builds(lambda p, h, v: PPBS(*p, h, v), pair, t, t),
        st.builds(lambda p: PBS(*p), pair),
        st.builds(lambda p: SwapPaths(*p), pair),
        st.builds(HWP, path, angle),
        st.builds(QWP, path, angle),
        st.builds(Phase, path, st.floats(-np.pi, np.pi)),
        st.builds(PathPhase, path, st.floats(-np.pi, np.pi)),
    )
    return st.lists(one, min_size=1, max_size=5)


@st.composite
def fock_states(draw, max_photons=MAX_PHOTONS, fixed_n=True):
    reg = ModeRegistry(PATHS, internal=2)
    n = draw(st.integers(2, max_photons))
    n_terms = draw(st.integers(1, 4))
    terms = []
    for _ in range(n_terms):
        k = n if fixed_n else draw(st.integers(1, max_photons))
        modes = draw(
            st.lists(
                st.tuples(st.sampled_from(PATHS), st.sampled_from("HV"), st.integers(0, 1)),
                min_size=k,
                max_size=k,
            )
        )
        c = draw(st.complex_numbers(min_magnitude=0.1, max_magnitude=1.0))
        terms.append((c, modes))
    return FockState.from_terms(reg, terms).normalized()


class TestElements:
    @pytest.mark.parametrize(
        "element",
        [
            PPBS("a", "b"),
            PPBS("a", "b", 0.3, 0.8),
            PPBS("a", "b", 0.95, 0.30, port_b=(0.96, 0.35)),
            PBS("a", "b"),
            SwapPaths("a", "b"),
            HWP("a", 22.5),
            QWP("a", 10.0),
            Phase("a", 0.4),
            PathPhase("a", 1.1),
        ],
    )
    def test_matrix_is_unitary(self, element):
        m = element.matrix()
        np.testing.assert_allclose(m @ m.conj().T, np.eye(len(m)), atol=1e-10)
        element.check_unitary()

    @pytest.mark.parametrize("t", [-0.1, 1.2])
    def test_ppbs_rejects_bad_transmission(self, t):
        with pytest.raises(ValueError):
            PPBS("a", "b", t, 0.5)

    def test_unregistered_path(self):
        st_ = FockState.single_photon(ModeRegistry(("a",)), "a")
        with pytest.raises(UnknownPathError):
            apply_element(st_, PPBS("a", "zz"))

    def test_h_photon_fully_transmitted(self):
        reg = ModeRegistry(("a", "b"))
        out = apply_element(FockState.single_photon(reg, "a", (1, 0)), PPBS("a", "b", 1.0, 1 / 3))
        assert out.amplitude([("a", "H", 0)]) == pytest.approx(1.0)
        assert out.amplitude([("b", "H", 0)]) == pytest.approx(0.0)

    def test_v_photon_split_with_reflection_phase(self):
        reg = ModeRegistry(("a", "b"))
        out = apply_element(FockState.single_photon(reg, "a", (0, 1)), PPBS("a", "b", 1.0, 1 / 3))
        assert out.amplitude([("a", "V", 0)]) == pytest.approx(np.sqrt(1 / 3))
        assert out.amplitude([("b", "V", 0)]) == pytest.approx(1j * np.sqrt(2 / 3))

    def test_vv_coincidence_amplitude_is_minus_one_third(self):
        reg = ModeRegistry(("a", "b"), internal=1)
        st_ = FockState.from_terms(reg, [(1.0, [("a", "V", 0), ("b", "V", 0)])])
        out = propagate(st_, [PPBS("a", "b")])
        amp = out.amplitude([("a", "V", 0), ("b", "V", 0)])
        assert amp == pytest.approx(-1 / 3, abs=1e-15)
        assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_pbs_routes_by_polarization(self):
        reg = ModeRegistry(("a", "b"))
        out = apply_element(FockState.single_photon(reg, "a", (1, 1)), PBS("a", "b"))
        assert abs(out.amplitude([("a", "H", 0)])) ** 2 == pytest.approx(0.5)
        assert out.amplitude([("b", "V", 0)]) == pytest.approx(1j / np.sqrt(2))

    @pytest.mark.parametrize("name", ["H", "V", "+", "-", "R", "L"])
    def test_prepare_plates_reach_target(self, name):
        reg = ModeRegistry(("a",), internal=1)
        out = propagate(FockState.single_photon(reg, "a"), prepare_plates("a", single_qubit(name)))
        q = to_qubits(out, (PolarizationQubit("q", "a"),))
        assert fidelity(q, q.__class__(("q",), single_qubit(name))) == pytest.approx(1.0, abs=1e-12)

    def test_prepare_plates_random_targets(self, rng):
        reg = ModeRegistry(("a",), internal=1)
        for _ in range(50):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            out = propagate(FockState.single_photon(reg, "a"), prepare_plates("a", v))
            q = to_qubits(out, (PolarizationQubit("q", "a"),))
            assert abs(np.vdot(v, q.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestInterference:
    def test_hom_dip_on_balanced_splitter(self):
        reg = ModeRegistry(("a", "b"), internal=1)
        st_ = FockState.from_terms(reg, [(1.0, [("a", "H", 0), ("b", "H", 0)])])
        out = propagate(st_, [PPBS("a", "b", 0.5, 0.5)])
        assert out.amplitude([("a", "H", 0), ("b", "H", 0)]) == pytest.approx(0.0, abs=1e-15)
        assert out.norm_squared() == pytest.approx(1.0)

    @pytest.mark.parametrize("v", [0.0, 0.25, 0.5, 0.9, 1.0])
    def test_coincidence_follows_overlap(self, v):
        out = propagate(two_source_hom(v), [PPBS("a", "b", 0.5, 0.5)])
        assert coincidence(out) == pytest.approx((1 - v) / 2, abs=1e-12)

    def test_overlap_out_of_range(self):
        cfg = SourceConfig(tuple(cluster_sources()))
        with pytest.raises(FockError):
            set_internal_overlap(cfg, ("A", "B"), 1.5)

    @pytest.mark.parametrize("v", [0.0, 0.3, 0.7, 1.0])
    def test_distinguishability_removes_coherence(self, v):
        out = propagate(two_source_hom(v, "+", "+"), [PBS("a", "b")])
        enc = (PolarizationQubit("a", "a"), PolarizationQubit("b", "b"))
        (br,) = coincidence_branches(out, DetectionPattern((Port("a"), Port("b"))), enc).values()
        m = br.matrix / br.probability
        assert br.probability == pytest.approx(0.5)
        assert m[0, 0] == pytest.approx(0.5)
        assert m[3, 3] == pytest.approx(0.5)
        assert abs(m[0, 3]) == pytest.approx(v / 2, abs=1e-12)


class TestConservation:
    @given(fock_states(), elements_strategy())
    def test_norm_and_photon_number(self, state, elements):
        n = set(state.photon_numbers().tolist())
        out = propagate(state, elements)
        assert out.norm_squared() == pytest.approx(1.0, abs=1e-10)
        assert set(out.photon_numbers().tolist()) <= n

    @given(fock_states(fixed_n=False), elements_strategy())
    def test_sequential_equals_composed(self, state, elements):
        seq = state
        for e in elements:
            seq = propagate(seq, [e])
        both = propagate(state, elements)
        a = dict(zip(seq.keys.tolist(), seq.amplitudes))
        b = dict(zip(both.keys.tolist(), both.amplitudes))
        for k in set(a) | set(b):
            assert a.get(k, 0) == pytest.approx(b.get(k, 0), abs=1e-10)

    @given(fock_states(fixed_n=False))
    def test_ppbs_one_one_is_identity(self, state):
        out = propagate(state, [PPBS("a", "b", 1.0, 1.0), PPBS("b", "c", 1.0, 1.0)])
        a = dict(zip(state.keys.tolist(), state.amplitudes))
        b = dict(zip(out.keys.tolist(), out.amplitudes))
        assert set(a) == set(b)
        for k in a:
            assert b[k] == pytest.approx(a[k], abs=1e-14)

    def test_capacity_is_enforced(self):
        reg = ModeRegistry(("a",))
        with pytest.raises(OverflowError):
            FockState.from_terms(reg, [(1.0, [("a", "H", 0)] * (MAX_PHOTONS + 1))])


class TestBackends:
    @pytest.mark.skipif(len(available_backends()) < 2, reason="compiled kernel not built")
    @given(fock_states(fixed_n=False), elements_strategy())
    def test_compiled_matches_python(self, state, elements):
        outs = []
        for name in ("python", "compiled"):
            with use_backend(name):
                o = propagate(state, elements)
                outs.append(dict(zip(o.keys.tolist(), o.amplitudes)))
        for k in set(outs[0]) | set(outs[1]):
            assert outs[0].get(k, 0) == pytest.approx(outs[1].get(k, 0), abs=1e-12)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            with use_backend("fortran"):
                pass


class TestDetection:
    def test_identity_network_post_selects_everything(self):
        reg = ModeRegistry(("a", "b"))
        st_ = FockState.from_terms(reg, [(1.0, [("a", "H", 0), ("b", "V", 0)])])
        res = post_select(propagate(st_, []), DetectionPattern((Port("a"), Port("b"))))
        assert res.ok and res.probability == pytest.approx(1.0)

    def test_empty_component_is_flagged(self):
        reg = ModeRegistry(("a", "b"))
        st_ = FockState.from_terms(reg, [(1.0, [("a", "H", 0), ("a", "V", 0)])])
        res = post_select(st_, DetectionPattern((Port("a"), Port("b"))))
        assert not res.ok and res.probability == 0.0

    def test_threshold_accepts_bunched_photons(self):
        reg = ModeRegistry(("a", "b"))
        st_ = FockState.from_terms(reg, [(1.0, [("a", "H", 0), ("a", "H", 0), ("b", "V", 0)])])
        st_ = st_.normalized()
        pattern = (Port("a"), Port("b"))
        assert post_select(st_, DetectionPattern(pattern)).probability == pytest.approx(1.0)
        assert post_select(st_, DetectionPattern(pattern, model=PNR)).probability == 0.0

    def test_analysis_basis_resolves_polarization(self):
        reg = ModeRegistry(("a",))
        st_ = FockState.single_photon(reg, "a", single_qubit("+"))
        out = propagate(st_, [])
        pattern = DetectionPattern((Port("a", "DA"),))
        branches = coincidence_branches(out, pattern, ())
        assert set(branches) == {(0,)}
        assert branches[(0,)].probability == pytest.approx(1.0)

    def test_duplicate_ports_rejected(self):
        with pytest.raises(FockError):
            DetectionPattern((Port("a"), Port("a")))

    def test_unknown_analysis_basis(self):
        with pytest.raises(FockError):
            Port("a", "XY")

    def test_double_pair_threshold_probability(self):
        """An extra pair adds photons; threshold detection accepts more events
        than number resolution does."""
        cfg = uniform_overlap(cluster_sources(), 1.0)
        st_ = emission_state(cfg, pairs=[2, 1])
        out = propagate(st_, [PPBS("4", "6")])
        ports = tuple(Port(p) for p in ("3", "4", "5", "6"))
        thr = post_select(out, DetectionPattern(ports)).probability
        pnr = post_select(out, DetectionPattern(ports, model=PNR)).probability
        assert pnr == pytest.approx(0.0)
        assert 0.0 < thr < 1.0


class TestReadout:
    def test_plus_photon(self):
        reg = ModeRegistry(("a",))
        st_ = FockState.single_photon(reg, "a", (1, 1))
        q = to_qubits(st_, (PolarizationQubit("q", "a"),))
        np.testing.assert_allclose(q.amplitudes, single_qubit("+"), atol=1e-15)

    def test_double_occupancy_raises(self):
        reg = ModeRegistry(("a", "b"))
        st_ = FockState.from_terms(reg, [(1.0, [("a", "H", 0), ("a", "V", 0)])])
        with pytest.raises(FockError, match="one photon per encoded qubit"):
            to_qubits(st_, (PolarizationQubit("p", "a"), PolarizationQubit("q", "b")))


class TestPipelines:
    def test_first_ppbs_terms(self):
        """Single-occupancy terms after the overlapping PPBS: H terms untouched,
        one V pair attenuated by sqrt(1/3), both V pairs giving -1/3."""
        st_ = emission_state(uniform_overlap(cluster_sources(), 1.0))
        out = propagate(st_, [PPBS("4", "6")])

        def amp(p3, p4, p5, p6):
            return out.amplitude([("3", p3, 0), ("4", p4, 0), ("5", p5, 0), ("6", p6, 0)])

        s3 = np.sqrt(1 / 3)
        assert amp("H", "H", "H", "H") == pytest.approx(0.5, abs=1e-12)
        assert amp("H", "H", "V", "V") == pytest.approx(0.5 * s3, abs=1e-12)
        assert amp("V", "V", "H", "H") == pytest.approx(0.5 * s3, abs=1e-12)
        assert amp("V", "V", "V", "V") == pytest.approx(-0.5 / 3, abs=1e-12)
        assert amp("H", "V", "H", "V") == pytest.approx(0.0, abs=1e-15)

    def test_cluster_probability_and_fidelity(self):
        res = prepare_cluster_chi()
        assert res.probability == pytest.approx(1 / 9, abs=1e-12)
        assert res.fidelity() == pytest.approx(1.0, abs=1e-9)

    def test_raw_pairs_overlap_with_cluster(self):
        res = prepare_cluster_chi(ppbs=((1.0, 1.0), (1.0, 1.0)), waveplates=False, balance=(1.0, 1.0))
        assert res.probability == pytest.approx(1.0)
        assert res.fidelity() == pytest.approx(0.25, abs=1e-12)

    def test_lambda_then_rails_equals_hyper_state(self):
        lam, hyp = prepare_lambda(), prepare_hyper_chi()
        assert lam.register == hyp.register
        np.testing.assert_allclose(lam.state.matrix, hyp.state.matrix, atol=1e-12)
        assert hyp.fidelity() == pytest.approx(1.0, abs=1e-9)
        assert lam.probability == pytest.approx(hyp.probability, abs=1e-12)
