import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from gensqueeze import (
    Cutoff,
    Family,
    GeneratorSpec,
    NumericalError,
    StateVector,
    StepSchedule,
    ValidationError,
    build_generator,
    evolve_spectral,
    evolve_stepwise,
    fock_state,
    mean_photon,
    step_operator,
    subspace_view,
    trajectory_observables,
    vacuum_state,
)
from gensqueeze.propagation import evolve_spectral_samples


def _series_expm(M, terms=60):
    # plain Taylor series, independent of any eigendecomposition
    out = np.eye(len(M), dtype=complex)
    term = np.eye(len(M), dtype=complex)
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def test_schedule_validation():
    with pytest.raises(ValidationError):
        StepSchedule(1.0, 0.0)
    with pytest.raises(ValidationError):
        StepSchedule(-1.0)
    with pytest.raises(ValidationError):
        StepSchedule(1.005, 0.01)
    with pytest.raises(ValidationError):
        StepSchedule(1.0, 0.01, 0)
    s = StepSchedule(1.0, 0.01, 30)
    assert s.n_steps == 100
    assert s.record_steps()[-1] == 100
    assert np.all(np.diff(s.r_samples()) > 0)


def test_step_operator_zero_is_identity():
    view = subspace_view(build_generator(GeneratorSpec(3, 30)), 0)
    np.testing.assert_allclose(step_operator(view, 0.0), np.eye(10), atol=1e-14)
    with pytest.raises(ValidationError):
        step_operator(view, -0.1)


@pytest.mark.parametrize("dr", [0.01, 0.3, 1.7])
def test_step_operator_two_level(dr):
    view = subspace_view(build_generator(GeneratorSpec(3, 6)), 0)
    c, s = math.cos(math.sqrt(6) * dr), math.sin(math.sqrt(6) * dr)
    U = step_operator(view, dr)
    np.testing.assert_allclose(U, [[c, -s], [s, c]], atol=1e-14)
    np.testing.assert_allclose(U, _series_expm(-1j * dr * view.matrix()), atol=1e-13)


@given(st.integers(1, 5), st.integers(2, 12), st.floats(0.0, 0.05))
@settings(max_examples=30, deadline=None)
def test_step_operator_matches_series(n, m, dr):
    view = subspace_view(build_generator(GeneratorSpec(n, n * m)), 0)
    M = view.matrix()
    # keep ||dr M|| modest so the series converges quickly
    if dr * np.max(np.abs(M)) > 2:
        return
    np.testing.assert_allclose(step_operator(view, dr), _series_expm(-1j * dr * M), atol=1e-11)


def test_step_operator_unitary_large():
    view = subspace_view(build_generator(GeneratorSpec(3, 3000)), 0)
    U = step_operator(view, 0.01)
    err = np.max(np.abs(U.conj().T @ U - np.eye(view.size)))
    assert err < 1e-12


def test_stepwise_coherent_exact():
    traj = evolve_stepwise(vacuum_state(1000), build_generator(GeneratorSpec(1, 1000)), StepSchedule(2.0, 0.01, 200))
    assert abs(traj.mean_photon[-1] - 4.0) <= 1e-8
    assert traj.max_norm_drift <= 1e-10


def test_trisqueeze_second_order():
    r = 0.1
    gen = build_generator(GeneratorSpec(3, 30))
    traj = evolve_stepwise(vacuum_state(30), gen, StepSchedule(r, 0.01), tracked_k=(3,))
    p3 = traj.occupation_series(3)[-1]
    # dense exponential of the full truncated matrix as an independent oracle
    psi = scipy.linalg.expm(-1j * r * gen.to_dense())[:, 0]
    assert p3 == pytest.approx(abs(psi[3]) ** 2, abs=1e-12)
    # <3|psi> = sqrt(6) r (1 - 21 r^2) + O(r^5), so P_3 = 6 r^2 - 252 r^4 + O(r^6)
    assert abs(p3 - 6 * r * r) <= 300 * r ** 4


def test_trisqueeze_perturbative_series_small_r():
    r = 0.01
    traj = evolve_stepwise(vacuum_state(30), build_generator(GeneratorSpec(3, 30)), StepSchedule(r, 0.001), (3,))
    p3 = traj.occupation_series(3)[-1]
    assert abs(p3 - (6 * r * r - 252 * r ** 4)) <= 2e4 * r ** 6


def test_zero_range_single_record():
    traj = trajectory_observables(build_generator(GeneratorSpec(3, 30)), StepSchedule(0.0), (0, 3))
    assert len(traj) == 1
    np.testing.assert_array_equal(traj.occupations[0], [1.0, 0.0])
    assert traj.mean_photon[0] == 0.0 and traj.vacuum_prob[0] == 1.0


def test_spectral_r0_is_identity():
    rng = np.random.default_rng(1)
    state = StateVector.normalized(rng.normal(size=60) + 1j * rng.normal(size=60))
    out = evolve_spectral(state, build_generator(GeneratorSpec(3, 60)), 0.0)
    np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-14)


def test_stepwise_matches_spectral():
    gen = build_generator(GeneratorSpec(3, 300))
    vac = vacuum_state(300)
    traj = evolve_stepwise(vac, gen, StepSchedule(1.0), keep_states=True)
    final = evolve_spectral(vac, gen, 1.0)
    assert np.max(np.abs(traj.state_at(-1).amplitudes - final.amplitudes)) < 1e-8


def test_squeezed_mean_photon_spectral():
    out = evolve_spectral(vacuum_state(4000), build_generator(GeneratorSpec(2, 4000)), 1.0)
    assert mean_photon(out) == pytest.approx(math.sinh(2) ** 2, rel=1e-4)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        evolve_stepwise(vacuum_state(10), build_generator(GeneratorSpec(3, 30)), StepSchedule(0.1))
    with pytest.raises(ValidationError):
        evolve_spectral(vacuum_state(10), build_generator(GeneratorSpec(3, 30)), 0.1)
    with pytest.raises(ValidationError):
        trajectory_observables(build_generator(GeneratorSpec(3, 30)), StepSchedule(0.1), (30,))


def test_residue_support():
    state = evolve_spectral(vacuum_state(300), build_generator(GeneratorSpec(3, 300)), 1.3)
    k = np.arange(300)
    assert np.max(np.abs(state.amplitudes[k % 3 != 0])) < 1e-14


def test_reversibility():
    gen = build_generator(GeneratorSpec(3, 3000))
    vac = vacuum_state(3000)
    back = evolve_spectral(evolve_spectral(vac, gen, 1.2), gen, -1.2)
    assert 1 - abs(back.amplitudes[0]) ** 2 <= 1e-10


@given(st.floats(0, 1.5), st.floats(0, 1.5))
@settings(max_examples=15, deadline=None)
def test_group_property(r1, r2):
    gen = build_generator(GeneratorSpec(4, 1000, Cutoff.SOFT))
    vac = vacuum_state(1000)
    a = evolve_spectral(evolve_spectral(vac, gen, r1), gen, r2)
    b = evolve_spectral(vac, gen, r1 + r2)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-9


def test_non_vacuum_input_touches_other_residues():
    gen = build_generator(GeneratorSpec(3, 60))
    psi = scipy.linalg.expm(-1j * 0.4 * gen.to_dense())[:, 1]
    out = evolve_spectral(fock_state(1, 60), gen, 0.4)
    np.testing.assert_allclose(out.amplitudes, psi, atol=1e-12)


def test_momentum_power_dense_route():
    gen = build_generator(GeneratorSpec(3, 200, family=Family.MOMENTUM_POWER))
    out = evolve_spectral(vacuum_state(200), gen, 0.05)
    psi = scipy.linalg.expm(-1j * 0.05 * gen.to_dense())[:, 0]
    np.testing.assert_allclose(out.amplitudes, psi, atol=1e-10)


def test_methods_agree_on_trajectory():
    gen = build_generator(GeneratorSpec(4, 400, Cutoff.SOFT))
    sched = StepSchedule(1.0, 0.01, 5)
    a = trajectory_observables(gen, sched, (0, 4, 8), method="stepwise")
    b = trajectory_observables(gen, sched, (0, 4, 8), method="spectral")
    np.testing.assert_allclose(a.r_samples, b.r_samples)
    np.testing.assert_allclose(a.occupations, b.occupations, atol=1e-10)
    with pytest.raises(ValidationError):
        trajectory_observables(gen, sched, (0,), method="magic")


def test_n2_vacuum_probability_decreasing():
    traj = trajectory_observables(build_generator(GeneratorSpec(2, 2000)), StepSchedule(2.0))
    assert np.all(np.diff(traj.vacuum_prob) < 0)


def test_norm_drift_guard():
    # a corrupted propagator breaks unitarity and must be reported
    from gensqueeze import propagation

    rows = [(np.array([1.0]), 0.0, 1.0, 1.0), (np.array([1.0]), 0.0, 1.0, 1.0 + 1e-8)]
    with pytest.raises(NumericalError):
        propagation._assemble(rows, [0.0, 0.01], (0,), None)


def test_samples_keep_states():
    gen = build_generator(GeneratorSpec(3, 90))
    traj = evolve_spectral_samples(vacuum_state(90), gen, [0.0, 0.5], keep_states=True)
    assert traj.states.shape == (2, 90)
    with pytest.raises(ValidationError):
        evolve_spectral_samples(vacuum_state(90), gen, [0.0, 0.5]).state_at(0)
