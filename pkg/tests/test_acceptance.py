"""Acceptance gate: every criterion at its stated tolerance, one line each."""

import math
from functools import cache

import numpy as np
import pytest

from rydqudit.core import DressedIndex, QuditState, hadamard_target
from rydqudit.compiler import (
    CompileOptions,
    compile_full_control,
    compile_phase_gate,
    compile_state_prep,
    compile_unitary,
    invert_full_control,
    measure_projection,
)
from rydqudit.propagator import extract_gate, run_schedule
from rydqudit.metrics import (
    DecayParams,
    decay_survival,
    feasibility_frontier,
    infidelity,
    scan,
)
from rydqudit.fullspace import Geometry, compare_evolution, compare_spectrum
from rydqudit.cli import schedule_from_json, schedule_to_json

DECAY = DecayParams.from_physical(1e4, 2 * math.pi * 300e6)
FRONTIER_RATIOS = list(np.geomspace(3e-3, 6e-2, 14))


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{criterion}: {detail}"


def phase_gate_goal(target: QuditState, Phi: float) -> np.ndarray:
    tp = target.qudit_part()
    return (np.eye(2 * target.N, dtype=complex)
            + (np.exp(1j * Phi) - 1.0) * np.outer(tp, tp.conj()))


@cache
def phase_point(N: int, ratio: float):
    target = QuditState.uniform(N)
    schedule = compile_phase_gate(target, math.pi / 2, CompileOptions(omega_01=ratio))
    rep = extract_gate(schedule, target=phase_gate_goal(target, math.pi / 2))
    return schedule, rep


@cache
def hadamard_point(N: int, ratio: float):
    goal = hadamard_target(N)
    schedule = compile_unitary(goal, CompileOptions(omega_01=ratio))
    rep = extract_gate(schedule, target=goal)
    return schedule, rep


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def test_criterion_1_phase_gate_infidelity():
    _, rep = phase_point(7, 1e-3)
    ok = 3e-5 <= rep.infidelity <= 3e-4
    report("criterion 1 phase-gate infidelity N=7 ratio=1e-3", ok,
           f"eps={rep.infidelity:.3e}, band [3e-5, 3e-4]")


def test_criterion_2_hadamard_infidelity():
    _, rep = hadamard_point(7, 4e-3)
    ok = 1e-2 <= rep.infidelity <= 9e-2
    report("criterion 2 Hadamard infidelity N=7 ratio=4e-3", ok,
           f"eps={rep.infidelity:.3e}, within x3 of 3e-2")


def test_criterion_3_scaling_laws():
    ratios = list(np.geomspace(3e-4, 3e-3, 5))
    eps_r = [phase_point(5, r)[1].infidelity for r in ratios]
    slope_r = loglog_slope(ratios, eps_r)
    Ns = [3, 4, 5, 6, 7]
    eps_n = [hadamard_point(N, 1e-3)[1].infidelity for N in Ns]
    slope_n = loglog_slope(Ns, eps_n)
    ok = 1.7 <= slope_r <= 2.3 and 2.3 <= slope_n <= 3.7
    report("criterion 3 scaling laws", ok,
           f"ratio slope={slope_r:.2f} in [1.7,2.3], N slope={slope_n:.2f} in [2.3,3.7]")


def test_criterion_4_protocol_identities():
    # (a) unitarity and leakage of a compiled schedule
    _, rep = phase_point(7, 1e-3)
    U = rep.full_operator
    unit_dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    ok_a = unit_dev <= 1e-9 and rep.leakage <= 10 * rep.infidelity
    # (b) 20 random states orthogonal to the target stay unchanged
    target = QuditState.uniform(7)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        v = rng.normal(size=15) + 1j * rng.normal(size=15)
        v[0] = 0.0
        v -= np.vdot(target.amplitudes, v) * target.amplitudes
        psi = v / np.linalg.norm(v)
        worst = max(worst, 1.0 - abs(np.vdot(psi, U @ psi)) ** 2)
    ok_b = worst <= 10 * rep.infidelity
    # (c) invert(O) composed with O is the identity
    opts = CompileOptions(omega_01=1e-3)
    state = QuditState.from_vector(
        np.arange(1, 8, dtype=complex) * np.exp(1j * np.linspace(0, 2, 7)) * [0, 1, 1, 1, 1, 1, 1],
        normalize=True)
    o = compile_full_control(state, opts)
    eps_c = infidelity(np.eye(6), extract_gate(o.concat(invert_full_control(o))).gate)
    ok_c = eps_c <= 1e-4
    report("criterion 4 protocol identities", ok_a and ok_b and ok_c,
           f"unitarity={unit_dev:.1e}<=1e-9, leakage={rep.leakage:.1e}<=10eps, "
           f"orthogonal worst={worst:.1e}<=10eps, invert(O)O eps={eps_c:.1e}<=1e-4")


def test_criterion_5_prep_and_measurement():
    opts = CompileOptions(omega_01=1e-3)
    rng = np.random.default_rng(1)
    worst_prep = 0.0
    ground = QuditState.basis_state(5, DressedIndex.ground())
    for _ in range(5):
        v = rng.normal(size=11) + 1j * rng.normal(size=11)
        v[0] = 0.0
        target = QuditState.from_vector(v, normalize=True)
        out = run_schedule(ground, compile_state_prep(target, opts),
                           samples_per_pulse=1).final_state
        worst_prep = max(worst_prep, 1.0 - abs(out.overlap(target)) ** 2)
    worst_meas = 0.0
    for _ in range(20):
        vs = rng.normal(size=(2, 11)) + 1j * rng.normal(size=(2, 11))
        vs[:, 0] = 0.0
        state = QuditState.from_vector(vs[0], normalize=True)
        target = QuditState.from_vector(vs[1], normalize=True)
        p = measure_projection(state, target, opts)
        direct = abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2
        worst_meas = max(worst_meas, abs(p - direct))
    ok = worst_prep <= 1e-3 and worst_meas <= 1e-3
    report("criterion 5 state prep and measurement", ok,
           f"prep worst={worst_prep:.1e}<=1e-3, measurement worst={worst_meas:.1e}<=1e-3")


def test_criterion_6_fullspace_oracle():
    h = math.sqrt(3) / 2
    pulse_kwargs = dict(T=1.0, omega_1r=1.0, omega_01=1e-2)
    from rydqudit.core import PulseParams
    pulse = PulseParams(**pulse_kwargs)
    devs = []
    for V in (1e2, 1e3, 1e4):
        g = Geometry(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.5, h, 0.0)),
                     1.0, 0.5, V, 2)
        devs.append(compare_spectrum(g, pulse))
    overlap = compare_evolution(
        Geometry(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.5, h, 0.0)), 1.0, 0.5, 1e4, 2),
        pulse, 10.0, DressedIndex.branch(-1, 1))
    ok = devs[2] <= 5e-3 and overlap >= 0.999 and devs[0] > devs[1] > devs[2]
    report("criterion 6 full-space oracle", ok,
           f"dev(V=1e4)={devs[2]:.1e}<=5e-3, overlap={overlap:.6f}>=0.999, "
           f"monotone {devs[0]:.1e}>{devs[1]:.1e}>{devs[2]:.1e}")


def test_criterion_7_decay_model():
    # trajectory-averaged Rydberg population over a full Hadamard schedule
    schedule, _ = hadamard_point(5, 1e-3)
    traj = run_schedule(QuditState.uniform(5), schedule, samples_per_pulse=4)
    pops = 0.5 * (1.0 - np.abs(traj.states[:, 0]) ** 2)
    avg = float(np.trapezoid(pops, traj.times) / traj.times[-1])
    ok_pop = 0.3 <= avg <= 0.7
    # feasibility frontier at Gamma_r^-1 = 100 us, omega_1r/2pi = 300 MHz
    had = {v.N: v.feasible for v in feasibility_frontier(
        scan("hadamard", [8, 9], FRONTIER_RATIOS, DECAY))}
    ph = {v.N: v.feasible for v in feasibility_frontier(
        scan("phase", [14, 15, 16], FRONTIER_RATIOS, DECAY))}
    ok_had = had[8] and not had[9]          # max feasible N = 8, inside 8 +- 1
    ok_ph = ph[14] and ph[15] and not ph[16]  # max feasible N = 15, inside 14 +- 2
    report("criterion 7 decay model", ok_pop and ok_had and ok_ph,
           f"avg Rydberg pop={avg:.3f} in [0.3,0.7], Hadamard frontier N=8 "
           f"(N=9 infeasible: {not had[9]}), phase frontier N=15 "
           f"(N=16 infeasible: {not ph[16]})")


def test_criterion_8_determinism_round_trip():
    opts = CompileOptions(omega_01=1e-3)
    target = QuditState.uniform(3)
    a = schedule_to_json(compile_phase_gate(target, 1.0, opts))
    b = schedule_to_json(compile_phase_gate(target, 1.0, opts))
    ok_bytes = a.encode() == b.encode()
    parsed = schedule_from_json(a)
    goal = phase_gate_goal(target, 1.0)
    rep_mem = extract_gate(compile_phase_gate(target, 1.0, opts), target=goal)
    rep_rt = extract_gate(parsed, target=goal)
    traj = run_schedule(target, parsed, samples_per_pulse=2)
    dev = max(
        abs(rep_rt.infidelity - rep_mem.infidelity),
        abs(rep_rt.leakage - rep_mem.leakage),
        abs(rep_rt.total_duration - rep_mem.total_duration),
        abs(decay_survival(traj, DECAY)
            - decay_survival(run_schedule(target, compile_phase_gate(target, 1.0, opts),
                                          samples_per_pulse=2), DECAY)),
        float(np.max(np.abs(rep_rt.full_operator - rep_mem.full_operator))),
    )
    ok = ok_bytes and dev <= 1e-12
    report("criterion 8 determinism and round-trip", ok,
           f"byte-identical={ok_bytes}, report round-trip dev={dev:.1e}<=1e-12")
