"""Dressed-state basis bookkeeping and Hamiltonian construction.

The blockaded N-atom array behaves as a single (2N+1)-level "artificial
molecule" with levels |g,0> and |±,q> for q = 1..N.  This module fixes the
canonical level ordering

    [|g,0>, |-,1>, |+,1>, |-,2>, |+,2>, ..., |-,N>, |+,N>]

and builds the bare (dressing-laser) and control-laser Hamiltonians in that
basis.  All frequencies are expressed in units of the dressing Rabi frequency
(omega_1r = 1 by convention) and all times in its inverse.

Pauli/Bloch conventions for an ordered pair (up, down):
    sigma_z = |up><up| - |down><down|
    sigma_x = |up><down| + h.c.
    sigma_y = -i |up><down| + h.c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAU = 2.0 * math.pi


class ContractViolation(ValueError):
    """A numeric contract was violated (non-unit state, non-unitary matrix, ...)."""


def wrap_phase(x: float) -> float:
    """Normalize an angle to the interval (-pi, pi]."""
    r = math.remainder(float(x), TAU)
    return r if r > -math.pi else math.pi


@dataclass(frozen=True)
class ModelParams:
    """Atom count and dressing Rabi frequency of the artificial molecule."""

    N: int
    omega_1r: float = 1.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"atom count must be >= 1, got {self.N}")
        if not self.omega_1r > 0:
            raise ValueError(f"omega_1r must be positive, got {self.omega_1r}")

    @property
    def dim(self) -> int:
        return 2 * self.N + 1


@dataclass(frozen=True, order=True)
class DressedIndex:
    """One level of the dressed ladder: the ground level or a branch |sign,q>.

    ``q = 0`` with ``sign = 0`` denotes |g,0>; otherwise ``sign`` is +1 or -1
    and ``1 <= q``.
    """

    q: int
    sign: int

    def __post_init__(self) -> None:
        if self.q == 0:
            if self.sign != 0:
                raise ValueError("the ground level carries no branch sign")
        elif self.q < 0 or self.sign not in (-1, 1):
            raise ValueError(f"invalid dressed index (q={self.q}, sign={self.sign})")

    @classmethod
    def ground(cls) -> "DressedIndex":
        return cls(0, 0)

    @classmethod
    def branch(cls, sign: int, q: int) -> "DressedIndex":
        return cls(q, sign)

    @property
    def is_ground(self) -> bool:
        return self.q == 0

    def position(self) -> int:
        """Offset of this level in the canonical ordering."""
        if self.is_ground:
            return 0
        return 2 * self.q - 1 + (1 if self.sign > 0 else 0)

    def __str__(self) -> str:
        if self.is_ground:
            return "g0"
        return f"{'+' if self.sign > 0 else '-'},{self.q}"


def level_ordering(N: int) -> list[DressedIndex]:
    """Canonical list of the 2N+1 levels, ground first."""
    levels = [DressedIndex.ground()]
    for q in range(1, N + 1):
        levels.append(DressedIndex.branch(-1, q))
        levels.append(DressedIndex.branch(+1, q))
    return levels


@dataclass(frozen=True)
class PulseParams:
    """One piecewise-constant control interval.

    ``T`` is the duration (units 1/omega_1r); the remaining fields are the
    amplitudes, phases and detuning of the two lasers during the interval.
    Phases are normalized to (-pi, pi] on construction.
    """

    T: float
    omega_1r: float = 1.0
    phi_1r: float = 0.0
    omega_01: float = 0.0
    phi_01: float = 0.0
    delta_01: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("T", "omega_1r", "phi_1r", "omega_01", "phi_01", "delta_01"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"pulse parameter {name} must be finite")
        if self.T < 0:
            raise ValueError(f"pulse duration must be >= 0, got {self.T}")
        object.__setattr__(self, "phi_1r", wrap_phase(self.phi_1r))
        object.__setattr__(self, "phi_01", wrap_phase(self.phi_01))

    def relabeled(self, label: str) -> "PulseParams":
        return PulseParams(self.T, self.omega_1r, self.phi_1r,
                           self.omega_01, self.phi_01, self.delta_01, label)


@dataclass(frozen=True)
class QuditState:
    """Complex amplitude vector over the 2N+1 dressed levels (unit norm)."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size < 3 or amp.size % 2 == 0:
            raise ValueError(f"amplitude vector must have odd length 2N+1 >= 3, got shape {amp.shape}")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > 1e-10:
            raise ContractViolation(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def N(self) -> int:
        return (self.amplitudes.size - 1) // 2

    @classmethod
    def from_vector(cls, amplitudes, normalize: bool = False) -> "QuditState":
        amp = np.asarray(amplitudes, dtype=complex)
        if normalize:
            norm = np.linalg.norm(amp)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amp = amp / norm
        return cls(amp)

    @classmethod
    def basis_state(cls, N: int, idx: DressedIndex) -> "QuditState":
        amp = np.zeros(2 * N + 1, dtype=complex)
        amp[idx.position()] = 1.0
        return cls(amp)

    @classmethod
    def uniform(cls, N: int) -> "QuditState":
        """Equal superposition of all 2N qudit levels (no ground component)."""
        amp = np.full(2 * N + 1, 1.0 / math.sqrt(2 * N), dtype=complex)
        amp[0] = 0.0
        return cls(amp)

    def ground_population(self) -> float:
        return float(abs(self.amplitudes[0]) ** 2)

    def qudit_part(self) -> np.ndarray:
        """Amplitudes on the 2N qudit levels (ground dropped)."""
        return self.amplitudes[1:].copy()

    def overlap(self, other: "QuditState") -> complex:
        return complex(np.vdot(other.amplitudes, self.amplitudes))


def coupling_K(N: int, q: int) -> float:
    """Same-branch ladder coupling coefficient for the q -> q+1 transition."""
    if not 1 <= q <= N - 1:
        raise ValueError(f"coupling_K requires 1 <= q <= N-1, got q={q}, N={N}")
    return math.sqrt(N - q) / (2.0 * (math.sqrt(q + 1) - math.sqrt(q)))


def coupling_Q(N: int, q: int) -> float:
    """Cross-branch ladder coupling coefficient for the q -> q+1 transition."""
    if not 1 <= q <= N - 1:
        raise ValueError(f"coupling_Q requires 1 <= q <= N-1, got q={q}, N={N}")
    return math.sqrt(N - q) / (2.0 * (math.sqrt(q + 1) + math.sqrt(q)))


def jc_energy(q: int, sign: int, omega_1r: float, phi_1r: float) -> float:
    """Ladder energy of |sign,q> for the diagonal dressing phases 0 and pi.

    For phi_1r = 0 the spectrum is +/- omega_1r*sqrt(q)/2; phi_1r = pi flips
    the branches.  Other phases leave the bare Hamiltonian non-diagonal and
    are handled by the full builders, not this accessor.
    """
    if q < 1:
        raise ValueError(f"jc_energy requires q >= 1, got {q}")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    w = wrap_phase(phi_1r)
    if abs(w) < 1e-12:
        flip = 1.0
    elif abs(abs(w) - math.pi) < 1e-12:
        flip = -1.0
    else:
        raise ValueError(f"jc_energy is defined only for phi_1r in {{0, pi}}, got {phi_1r}")
    return flip * sign * omega_1r * math.sqrt(q) / 2.0


def _pair_block(H: np.ndarray, up: int, down: int, nx: float, ny: float, nz: float,
                scale: float) -> None:
    """Add scale * (n . sigma) on the ordered pair (up, down), in place."""
    H[up, up] += scale * nz
    H[down, down] -= scale * nz
    H[up, down] += scale * (nx - 1j * ny)
    H[down, up] += scale * (nx + 1j * ny)


def build_bare(params: ModelParams, phi_1r: float) -> np.ndarray:
    """Bare Hamiltonian of the dressed ladder for dressing-laser phase phi_1r.

    Block diagonal: zero on |g,0>, and on each doublet {|+,q>, |-,q>} the
    block (omega_1r sqrt(q)/2) * n . sigma with n = (0, -sin phi, cos phi)
    and |+,q> as the "up" member.
    """
    dim = params.dim
    H = np.zeros((dim, dim), dtype=complex)
    nx, ny, nz = 0.0, -math.sin(phi_1r), math.cos(phi_1r)
    for q in range(1, params.N + 1):
        up = DressedIndex.branch(+1, q).position()
        down = DressedIndex.branch(-1, q).position()
        _pair_block(H, up, down, nx, ny, nz, params.omega_1r * math.sqrt(q) / 2.0)
    return H


def build_control(params: ModelParams, omega_01: float, phi_01: float,
                  delta_01: float) -> np.ndarray:
    """Control-laser Hamiltonian in the dressed basis.

    Couplings (all carrying the in-plane axis n = (cos phi_01, sin phi_01, 0),
    prefactor omega_01/2, first-listed state "up"):
      +K_N^q   on {|s,q+1>, |s,q>}          (same branch)
      -Q_N^q   on {|s,q+1>, |-s,q>}         (cross branch)
      +/- sqrt(N/2) on {|+/-,1>, |g,0>}     (minus sign on the |-,1> pair)
    plus the diagonal detuning term -delta_01 * q on every |s,q>.
    """
    if omega_01 < 0:
        raise ValueError(f"omega_01 must be >= 0, got {omega_01}")
    N, dim = params.N, params.dim
    H = np.zeros((dim, dim), dtype=complex)
    nx, ny = math.cos(phi_01), math.sin(phi_01)
    half = omega_01 / 2.0
    for s in (+1, -1):
        for q in range(1, N):
            up = DressedIndex.branch(s, q + 1).position()
            _pair_block(H, up, DressedIndex.branch(s, q).position(),
                        nx, ny, 0.0, half * coupling_K(N, q))
            _pair_block(H, up, DressedIndex.branch(-s, q).position(),
                        nx, ny, 0.0, -half * coupling_Q(N, q))
        _pair_block(H, DressedIndex.branch(s, 1).position(), 0,
                    nx, ny, 0.0, s * half * math.sqrt(N / 2.0))
    for s in (+1, -1):
        for q in range(1, N + 1):
            p = DressedIndex.branch(s, q).position()
            H[p, p] -= delta_01 * q
    return H


def build_total(params: ModelParams, pulse: PulseParams) -> np.ndarray:
    """Bare plus control Hamiltonian for one pulse's parameters."""
    bare = build_bare(ModelParams(params.N, pulse.omega_1r), pulse.phi_1r) \
        if pulse.omega_1r > 0 else np.zeros((params.dim, params.dim), dtype=complex)
    return bare + build_control(params, pulse.omega_01, pulse.phi_01, pulse.delta_01)


def bloch_vector(state: QuditState,
                 pair: tuple[DressedIndex, DressedIndex]) -> tuple[np.ndarray, float]:
    """Bloch coordinates of the state projected onto a two-level subspace.

    ``pair = (up, down)`` fixes the orientation; returns ``(u, weight)`` with
    ``weight`` the population on the pair and ``u`` the unit Bloch vector of
    the projected state (zero vector when the weight vanishes).
    """
    up, down = pair
    if up == down:
        raise ValueError("bloch_vector requires two distinct levels")
    a_up = state.amplitudes[up.position()]
    a_down = state.amplitudes[down.position()]
    weight = float(abs(a_up) ** 2 + abs(a_down) ** 2)
    if weight == 0.0:
        return np.zeros(3), 0.0
    cross = np.conj(a_up) * a_down
    u = np.array([2.0 * cross.real, 2.0 * cross.imag,
                  abs(a_up) ** 2 - abs(a_down) ** 2]) / weight
    return u, weight


def qudit_ordering_permutation(N: int) -> np.ndarray:
    """Canonical position (ground dropped) of each Fourier-ordered qudit level.

    The Fourier ordering used by the generalized Hadamard gate is
    |q_1> = |-,N>, ..., |q_N> = |-,1>, |q_{N+1}> = |+,1>, ..., |q_{2N}> = |+,N>.
    Entry j-1 of the result is the canonical index of |q_j|.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    perm = np.empty(2 * N, dtype=int)
    for j in range(1, N + 1):
        perm[j - 1] = DressedIndex.branch(-1, N + 1 - j).position() - 1
    for j in range(N + 1, 2 * N + 1):
        perm[j - 1] = DressedIndex.branch(+1, j - N).position() - 1
    return perm


def hadamard_target(N: int) -> np.ndarray:
    """Generalized Hadamard (2N-point DFT) gate in the canonical ordering."""
    d = 2 * N
    j, p = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    dft = np.exp(1j * math.pi * j * p / N) / math.sqrt(d)
    perm = qudit_ordering_permutation(N)
    U = np.zeros((d, d), dtype=complex)
    # entry <q_p| U |q_j> lands at canonical row perm[p], column perm[j]
    U[np.ix_(perm, perm)] = dft.T
    return U


def require_unitary(U: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a square complex matrix as unitary within tol (max-abs)."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > tol:
        raise ContractViolation(f"matrix deviates from unitarity by {dev:.3e}")
    return U
