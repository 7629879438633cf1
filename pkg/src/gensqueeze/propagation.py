"""Evolution of states under U_n(r) = exp(-i r H_n).

Two routes are provided. ``evolve_stepwise`` builds the unitary for one small
step ``dr`` and applies it repeatedly as a matrix-vector product, recording
observables along the way. ``evolve_spectral`` jumps directly to any ``r``
from one eigendecomposition. Both work per residue class, so a vacuum input
only ever touches the ``k = 0 mod n`` subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import EigensolverError, NumericalError, ValidationError
from .fockspace import Family, StateVector, build_generator, vacuum_state
from .spectral import _subspace_eigh

NORM_TOL = 1e-10
# above this many rungs the spectral route is the default for trajectories
SPECTRAL_DEFAULT_RUNGS = 12000
# eigenvectors of the momentum-power generator are stored densely
PN_MAX_DIM = 8000


@dataclass(frozen=True)
class StepSchedule:
    r_max: float
    dr: float = 0.01
    record_stride: int = 1

    def __post_init__(self):
        if self.r_max < 0:
            raise ValidationError(f"r_max must be >= 0, got {self.r_max}")
        if self.dr <= 0:
            raise ValidationError(f"dr must be > 0, got {self.dr}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValidationError(f"record_stride must be a positive integer, got {self.record_stride}")
        steps = self.r_max / self.dr
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValidationError(f"r_max / dr = {steps} is not an integer step count")

    @property
    def n_steps(self):
        return int(round(self.r_max / self.dr))

    def record_steps(self):
        steps = list(range(0, self.n_steps + 1, self.record_stride))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.array(steps)

    def r_samples(self):
        return self.record_steps() * self.dr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Observables recorded along an evolution.

    ``occupations[i, j]`` is the probability of photon number ``tracked_k[j]`` at
    ``r_samples[i]``. ``states`` holds amplitude snapshots when requested.
    """

    r_samples: np.ndarray
    tracked_k: tuple
    occupations: np.ndarray
    mean_photon: np.ndarray
    vacuum_prob: np.ndarray
    norm: np.ndarray
    states: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.r_samples)

    @property
    def max_norm_drift(self):
        return float(np.max(np.abs(self.norm - 1.0)))

    def occupation_series(self, k):
        return self.occupations[:, self.tracked_k.index(k)]

    def state_at(self, i):
        if self.states is None:
            raise ValidationError("trajectory was recorded without state snapshots")
        return StateVector(self.states[i])


def _check_dims(state, gen):
    if state.dim != gen.dim:
        raise ValidationError(f"state dimension {state.dim} != generator dimension {gen.dim}")


@lru_cache(maxsize=4)
def _momentum_power_eigh(spec):
    """Eigen-data of the truncated p^n.

    The truncated p is gauge-equivalent to -(a + a^dag): with D = diag(i^k),
    p = -D x D^dag where x is real symmetric tridiagonal with off-diagonal
    sqrt(k+1). Since p^n is formed from the truncated p, it shares the
    eigenvectors of x and has eigenvalues (-lambda_x)^n.
    """
    N = spec.dim
    if N > PN_MAX_DIM:
        raise ValidationError(f"momentum-power propagation limited to dim <= {PN_MAX_DIM}, got {N}")
    try:
        lam, V = scipy.linalg.eigh_tridiagonal(np.zeros(N), np.sqrt(np.arange(1.0, N)), check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigendecomposition failed for matrix of size {N}: {exc}") from exc
    w = (-lam) ** spec.order
    phases = 1j ** (np.arange(N) % 4)
    for a in (w, V, phases):
        a.flags.writeable = False
    return w, V, phases


def _blocks(gen, amplitudes):
    """(photon indices, eigenvalues, eigenvectors, gauge phases) for each populated block.

    Eigenvectors stay in a real gauge-reduced basis and the phases convert
    between bases. The momentum-power family is a single block.
    """
    spec = gen.spec
    if spec.family is Family.MOMENTUM_POWER:
        w, V, phases = _momentum_power_eigh(spec)
        return [(np.arange(spec.dim), w, V, phases)]
    out = []
    for s in range(spec.order):
        idx = np.arange(s, spec.dim, spec.order)
        if not np.any(amplitudes[idx]):
            continue
        view, w, V = _subspace_eigh(spec, s)
        out.append((idx, w, V, view.phases))
    return out


def _propagator(w, V, phases, r):
    """exp(-i r M) for the block, in the Fock basis."""
    U = (V * np.exp(-1j * w * r)) @ V.T
    return phases[:, None] * U * np.conj(phases)[None, :]


def step_operator(view, dr):
    """Unitary exp(-i dr M) of a subspace view, built from its eigendecomposition."""
    if dr < 0:
        raise ValidationError(f"dr must be >= 0, got {dr}")
    _, w, V = _subspace_eigh(view.spec, view.residue)
    return _propagator(w, V, view.phases, dr)


def _record(amps, tracked):
    P = np.abs(amps) ** 2
    return P[list(tracked)], float(np.arange(len(P)) @ P), float(P[0]), float(math.sqrt(P.sum()))


def _assemble(traj_rows, r, tracked, snaps):
    occ, mean, vac, nrm = (np.array(x) for x in zip(*traj_rows))
    norm = np.asarray(nrm, dtype=float)
    drift = np.max(np.abs(norm - 1.0))
    if drift > NORM_TOL:
        raise NumericalError(f"norm drift {drift:.3e} exceeds {NORM_TOL}")
    occ = occ.reshape(len(r), len(tracked))
    states = np.array(snaps) if snaps is not None else None
    return Trajectory(np.asarray(r, dtype=float), tuple(tracked), occ, mean, vac, norm, states)


def _validate_tracked(tracked, N):
    tracked = tuple(int(k) for k in tracked)
    bad = [k for k in tracked if not 0 <= k < N]
    if bad:
        raise ValidationError(f"tracked photon numbers {bad} outside [0, {N})")
    return tracked


def evolve_stepwise(state, gen, schedule, tracked_k=(0,), keep_states=False):
    """Apply the small-step unitary ``schedule.n_steps`` times, recording observables."""
    _check_dims(state, gen)
    tracked = _validate_tracked(tracked_k, gen.dim)
    amps = np.array(state.amplitudes, dtype=complex)
    blocks = [(idx, _propagator(w, V, ph, schedule.dr)) for idx, w, V, ph in _blocks(gen, amps)]
    record_at = set(schedule.record_steps().tolist())
    rows, snaps = [], [] if keep_states else None
    for step in range(schedule.n_steps + 1):
        if step:
            for idx, U in blocks:
                amps[idx] = U @ amps[idx]
        if step in record_at:
            rows.append(_record(amps, tracked))
            if keep_states:
                snaps.append(amps.copy())
    return _assemble(rows, schedule.r_samples(), tracked, snaps)


def evolve_spectral(state, gen, r):
    """Return exp(-i r H) |state> from the eigendecomposition of each populated block."""
    _check_dims(state, gen)
    amps = np.asarray(state.amplitudes)
    out = np.zeros_like(amps)
    for idx, w, V, ph in _blocks(gen, amps):
        y = V @ (np.exp(-1j * w * r) * (V.T @ (np.conj(ph) * amps[idx])))
        out[idx] = ph * y
    return StateVector(out)


def evolve_spectral_samples(state, gen, r_values, tracked_k=(0,), keep_states=False, chunk=256):
    """Record the same observables as ``evolve_stepwise`` at arbitrary ``r`` values."""
    _check_dims(state, gen)
    tracked = _validate_tracked(tracked_k, gen.dim)
    r_values = np.asarray(r_values, dtype=float)
    amps = np.asarray(state.amplitudes)
    blocks = []
    for idx, w, V, ph in _blocks(gen, amps):
        blocks.append((idx, w, V, ph, V.T @ (np.conj(ph) * amps[idx])))
    rows, snaps = [], [] if keep_states else None
    for start in range(0, len(r_values), chunk):
        rs = r_values[start:start + chunk]
        full = np.zeros((gen.dim, len(rs)), dtype=complex)
        for idx, w, V, ph, q in blocks:
            y = V @ (np.exp(-1j * np.outer(w, rs)) * q[:, None])
            full[idx] = ph[:, None] * y
        for j in range(len(rs)):
            rows.append(_record(full[:, j], tracked))
            if keep_states:
                snaps.append(full[:, j].copy())
    return _assemble(rows, r_values, tracked, snaps)


def trajectory_observables(gen, schedule, tracked_k=(0,), method="auto", keep_states=False):
    """Evolve the vacuum and record tracked occupations, P_0, <a^dag a> and the norm.

    ``method`` is ``"stepwise"``, ``"spectral"`` or ``"auto"`` (stepwise unless the
    subspace exceeds ``SPECTRAL_DEFAULT_RUNGS`` rungs).
    """
    if method == "auto":
        rungs = gen.dim if gen.spec.family is Family.MOMENTUM_POWER else gen.spec.rungs
        method = "spectral" if rungs > SPECTRAL_DEFAULT_RUNGS else "stepwise"
    vac = vacuum_state(gen.dim)
    if method == "stepwise":
        return evolve_stepwise(vac, gen, schedule, tracked_k, keep_states)
    if method == "spectral":
        return evolve_spectral_samples(vac, gen, schedule.r_samples(), tracked_k, keep_states)
    raise ValidationError(f"unknown method {method!r}")


def evolve_vacuum(spec, r):
    """Shorthand: U_n(r)|0> for a generator spec, via the spectral route."""
    gen = build_generator(spec)
    return evolve_spectral(vacuum_state(spec.dim), gen, r)
