"""Piecewise-exact propagation against an adaptive integrator oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from rydqudit.core import (
    ContractViolation,
    DressedIndex,
    ModelParams,
    PulseParams,
    QuditState,
    build_total,
)
from rydqudit.propagator import (
    PulseSchedule,
    evolve_pulse,
    extract_gate,
    interaction_frame,
    run_schedule,
    schedule_operator,
)


def random_pulse(rng, label=""):
    return PulseParams(
        T=float(rng.uniform(0.1, 8.0)),
        omega_1r=1.0,
        phi_1r=float(rng.uniform(-math.pi, math.pi)),
        omega_01=float(rng.uniform(0.0, 0.5)),
        phi_01=float(rng.uniform(-math.pi, math.pi)),
        delta_01=float(rng.uniform(-1.5, 1.5)),
        label=label,
    )


def random_state(rng, N):
    v = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    return QuditState.from_vector(v, normalize=True)


@pytest.mark.parametrize("seed", range(5))
def test_evolve_pulse_matches_adaptive_integrator(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 5))
    params = ModelParams(N)
    pulse = random_pulse(rng)
    psi0 = random_state(rng, N)
    H = build_total(params, pulse)
    sol = solve_ivp(lambda t, y: -1j * (H @ y), (0.0, pulse.T), psi0.amplitudes,
                    method="DOP853", rtol=1e-12, atol=1e-12)
    out = evolve_pulse(psi0, pulse, params)
    assert np.max(np.abs(out.amplitudes - sol.y[:, -1])) <= 1e-8


def test_evolve_pulse_contracts():
    # dimension mismatch is a configuration error
    state = QuditState.basis_state(3, DressedIndex.ground())
    with pytest.raises(ValueError):
        evolve_pulse(state, PulseParams(1.0), ModelParams(2))
    # a denormalized state is rejected before propagation
    bad = QuditState.basis_state(2, DressedIndex.ground())
    object.__setattr__(bad, "amplitudes", bad.amplitudes * 1.5)
    with pytest.raises(ContractViolation):
        evolve_pulse(bad, PulseParams(1.0), ModelParams(2))


@given(seed=st.integers(0, 500), n_pulses=st.integers(1, 6))
@settings(deadline=None, max_examples=30)
def test_norm_conservation(seed, n_pulses):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 5))
    schedule = PulseSchedule(ModelParams(N),
                             tuple(random_pulse(rng) for _ in range(n_pulses)))
    traj = run_schedule(random_state(rng, N), schedule, samples_per_pulse=4)
    norms = np.linalg.norm(traj.states, axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-9


@given(seed=st.integers(0, 500))
@settings(deadline=None, max_examples=25)
def test_composition(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 5))
    params = ModelParams(N)
    a = PulseSchedule(params, tuple(random_pulse(rng) for _ in range(2)))
    b = PulseSchedule(params, tuple(random_pulse(rng) for _ in range(2)))
    psi0 = random_state(rng, N)
    direct = run_schedule(psi0, a.concat(b), samples_per_pulse=2).final_state
    staged = run_schedule(run_schedule(psi0, a, samples_per_pulse=2).final_state,
                          b, samples_per_pulse=2).final_state
    assert np.max(np.abs(direct.amplitudes - staged.amplitudes)) <= 1e-10


@given(seed=st.integers(0, 500))
@settings(deadline=None, max_examples=25)
def test_time_reversal_under_hamiltonian_negation(seed):
    # evolving under -H for the same duration must undo the pulse
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 5))
    params = ModelParams(N)
    pulse = random_pulse(rng)
    psi0 = random_state(rng, N)
    forward = evolve_pulse(psi0, pulse, params)
    H = build_total(params, pulse)
    w, V = np.linalg.eigh(-H)
    back = V @ (np.exp(-1j * w * pulse.T) * (V.conj().T @ forward.amplitudes))
    assert np.max(np.abs(back - psi0.amplitudes)) <= 1e-10


def test_first_sample_is_initial_state_and_boundaries():
    rng = np.random.default_rng(3)
    params = ModelParams(2)
    pulses = (random_pulse(rng), PulseParams(0.0), random_pulse(rng))
    schedule = PulseSchedule(params, pulses)
    psi0 = random_state(rng, 2)
    traj = run_schedule(psi0, schedule, samples_per_pulse=5)
    assert np.array_equal(traj.states[0], psi0.amplitudes)
    assert len(traj.boundary_indices) == len(pulses) + 1
    # boundary samples sit at the cumulative durations
    t = 0.0
    for k, p in enumerate(pulses):
        t += p.T
        assert traj.times[traj.boundary_indices[k + 1]] == pytest.approx(t)


def test_final_state_matches_sequential_evolve():
    rng = np.random.default_rng(11)
    params = ModelParams(3)
    schedule = PulseSchedule(params, tuple(random_pulse(rng) for _ in range(4)))
    psi = random_state(rng, 3)
    traj = run_schedule(psi, schedule, samples_per_pulse=7)
    for p in schedule.pulses:
        psi = evolve_pulse(psi, p, params)
    assert np.max(np.abs(traj.final_state.amplitudes - psi.amplitudes)) <= 1e-12


@given(seed=st.integers(0, 200))
@settings(deadline=None, max_examples=20)
def test_schedule_operator_unitary(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 5))
    schedule = PulseSchedule(ModelParams(N),
                             tuple(random_pulse(rng) for _ in range(3)))
    U = schedule_operator(schedule)
    dim = 2 * N + 1
    assert np.max(np.abs(U.conj().T @ U - np.eye(dim))) <= 1e-9


def test_extract_gate_report_fields():
    rng = np.random.default_rng(5)
    params = ModelParams(2)
    schedule = PulseSchedule(params, tuple(random_pulse(rng) for _ in range(3)))
    report = extract_gate(schedule)
    assert report.leakage >= 0.0
    assert report.pulse_count == 3
    assert report.total_duration == pytest.approx(schedule.total_duration)
    assert report.gate.shape == (4, 4)
    assert report.full_operator.shape == (5, 5)
    # with the control laser off the ground level decouples, so the
    # restriction is unitary and its self-infidelity vanishes
    bare = PulseSchedule(params, (PulseParams(2.0, 1.0, 0.5),
                                  PulseParams(1.0, 1.0, -1.0, 0.0, 0.0, 0.3)))
    target = schedule_operator(bare)[1:, 1:]
    with_target = extract_gate(bare, target=target)
    assert with_target.infidelity == pytest.approx(0.0, abs=1e-12)
    assert with_target.leakage <= 1e-12


def test_interaction_frame_cancels_pure_diagonal_evolution():
    # detuning-only pulse: framed trajectory must be constant
    params = ModelParams(2)
    pulse = PulseParams(5.0, omega_1r=1e-12, omega_01=0.0, delta_01=0.7)
    schedule = PulseSchedule(params, (pulse,))
    psi0 = random_state(np.random.default_rng(7), 2)
    traj = run_schedule(psi0, schedule, samples_per_pulse=9)
    framed = interaction_frame(traj, schedule)
    assert np.max(np.abs(framed.states - psi0.amplitudes)) <= 1e-9


def test_interaction_frame_requires_matching_schedule():
    params = ModelParams(2)
    schedule = PulseSchedule(params, (PulseParams(1.0),))
    traj = run_schedule(QuditState.basis_state(2, DressedIndex.ground()),
                        schedule, samples_per_pulse=2)
    other = PulseSchedule(params, (PulseParams(1.0), PulseParams(1.0)))
    with pytest.raises(ValueError):
        interaction_frame(traj, other)


def test_schedule_concat_rejects_mismatched_n():
    with pytest.raises(ValueError):
        PulseSchedule(ModelParams(2)).concat(PulseSchedule(ModelParams(3)))
