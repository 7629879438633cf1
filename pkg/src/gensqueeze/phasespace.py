"""Husimi Q and Wigner functions of pure states on rectangular grids.

Coordinates: alpha = x + i p, so the vacuum Q function is exp(-(x^2 + p^2)) / pi
(1/e^2 radius 1) and the vacuum Wigner function is 2 exp(-2(x^2 + p^2)) / pi.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage
from scipy.integrate import trapezoid
from scipy.stats import poisson

from .errors import TailError, ValidationError

TAIL_TOL = 1e-12
MAX_TERMS = 512
# the Wigner quadrature stays accurate and fast well beyond the Q cap
WIGNER_MAX_TERMS = 4096


class FieldKind(enum.Enum):
    HUSIMI = "q"
    WIGNER = "wigner"


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -5.0
    x_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    points_per_axis: int = 201

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValidationError("grid bounds must satisfy min < max on both axes")
        if self.points_per_axis < 2:
            raise ValidationError("need at least 2 points per axis")

    @classmethod
    def parse(cls, text):
        """Square grid from ``"min:max:points"``."""
        try:
            lo, hi, pts = text.split(":")
            lo, hi, pts = float(lo), float(hi), int(pts)
        except ValueError:
            raise ValidationError(f"grid must look like min:max:points, got {text!r}") from None
        return cls(lo, hi, lo, hi, pts)

    @property
    def xs(self):
        return np.linspace(self.x_min, self.x_max, self.points_per_axis)

    @property
    def ps(self):
        return np.linspace(self.p_min, self.p_max, self.points_per_axis)

    def alpha(self):
        """Complex grid, shape (len(ps), len(xs)); rows are p, columns are x."""
        X, P = np.meshgrid(self.xs, self.ps)
        return X + 1j * P

    def max_abs_alpha_sq(self):
        return max(abs(x) for x in (self.x_min, self.x_max)) ** 2 + max(abs(p) for p in (self.p_min, self.p_max)) ** 2


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """Real field values on a grid; ``values[i, j]`` is at (xs[j], ps[i])."""

    grid: GridSpec
    values: np.ndarray
    kind: FieldKind
    terms: int = 0
    leaked_probability: float = 0.0

    def integral(self):
        return float(trapezoid(trapezoid(self.values, self.grid.xs, axis=1), self.grid.ps))

    def value_at(self, x, p):
        """Value at the grid point nearest (x, p)."""
        j = int(np.argmin(np.abs(self.grid.xs - x)))
        i = int(np.argmin(np.abs(self.grid.ps - p)))
        return float(self.values[i, j])


def _evaluation_terms(state, grid, kind):
    """Fock truncation K for the phase-space sums and the probability it drops.

    K is the first index whose tail probability is below ``TAIL_TOL``, capped at
    ``MAX_TERMS`` for Q and ``WIGNER_MAX_TERMS`` for W. A larger leak is fatal for
    W, which sees every Fock component at the origin through the parity. For Q
    the overlap <alpha|k> is Poisson-distributed in k, so a leak is tolerated when
    it provably cannot change any grid value by more than ``TAIL_TOL``.
    """
    P = state.probabilities
    tail = np.cumsum(P[::-1])[::-1]  # tail[K] = sum_{k >= K} P_k
    below = np.flatnonzero(tail < TAIL_TOL)
    K = int(below[0]) if below.size else len(P)
    cap = MAX_TERMS if kind is FieldKind.HUSIMI else WIGNER_MAX_TERMS
    K = max(1, min(K, cap))
    leaked = float(tail[K]) if K < len(P) else 0.0
    if leaked >= TAIL_TOL:
        if kind is FieldKind.HUSIMI:
            reach = poisson.sf(K - 1, grid.max_abs_alpha_sq())
            # |Q - Q_K| <= (2 delta + delta^2) / pi with delta^2 = leaked * reach
            delta = math.sqrt(leaked * reach)
            bound = (2 * delta + delta * delta) / math.pi
        else:
            bound = math.inf
        if bound > TAIL_TOL:
            raise TailError(
                f"probability {leaked:.3e} lies above photon number {K}, the evaluation limit for "
                f"{kind.name.lower()} fields, and would affect the grid",
                leaked,
            )
    return K, leaked


def q_function(state, grid=GridSpec()):
    """Husimi Q(alpha) = |<alpha|psi>|^2 / pi."""
    K, leaked = _evaluation_terms(state, grid, FieldKind.HUSIMI)
    c = state.amplitudes
    alpha = grid.alpha()
    ac = np.conj(alpha)
    term = np.ones_like(alpha)
    acc = c[0] * term
    for k in range(1, K):
        term *= ac / math.sqrt(k)
        acc += c[k] * term
    values = np.abs(acc) ** 2 * np.exp(-np.abs(alpha) ** 2) / math.pi
    return PhaseSpaceField(grid, values, FieldKind.HUSIMI, K, leaked)


@numba.njit(cache=True)
def _wavefunction(c, u):
    # psi(u) = sum_k c_k h_k(u) with normalized Hermite functions; the recurrence
    # runs on rescaled values with a running log-scale so exp(-u^2/2) never underflows
    K = c.shape[0]
    out = np.zeros(u.shape[0], dtype=np.complex128)
    big = 1e150
    logbig = np.log(big)
    for i in range(u.shape[0]):
        x = u[i]
        logs = -0.5 * x * x - 0.25 * np.log(np.pi)
        h_prev = 0.0
        h_cur = 1.0
        acc = c[0] * np.exp(logs)
        for k in range(K - 1):
            h_next = np.sqrt(2.0 / (k + 1)) * x * h_cur - np.sqrt(k / (k + 1.0)) * h_prev
            h_prev = h_cur
            h_cur = h_next
            if abs(h_cur) > big:
                h_cur /= big
                h_prev /= big
                logs += logbig
            acc += c[k + 1] * h_cur * np.exp(logs)
        out[i] = acc
    return out


def wigner_function(state, grid=GridSpec()):
    """Wigner function W(alpha) = (2/pi) <psi| D(alpha) Parity D(alpha)^dag |psi>.

    Evaluated point by point from the position wavefunction,
    W = (2/pi) int psi*(X+y) psi(X-y) exp(2iPy) dy with X = sqrt(2) x, P = sqrt(2) p,
    by trapezoid quadrature on a lattice fine enough to resolve the highest
    Fock component (spectrally accurate for these smooth, decaying integrands).
    """
    K, leaked = _evaluation_terms(state, grid, FieldKind.WIGNER)
    c = np.ascontiguousarray(state.amplitudes[:K], dtype=np.complex128)
    X = math.sqrt(2) * grid.xs
    P = math.sqrt(2) * grid.ps
    reach = math.sqrt(2 * K + 1) + 10.0  # Hermite functions up to order K vanish beyond this
    pmax = float(np.max(np.abs(P)))
    dx = X[1] - X[0]
    h_max = 0.5 * math.pi / (2 * reach + 2 * pmax)
    q = max(1, math.ceil(dx / h_max))
    h = dx / q
    # lattice u_l = X[0] + l h contains every X_i +/- y with y a multiple of h
    lo = math.floor((-reach - X[0]) / h)
    hi = math.ceil((reach - X[0]) / h)
    lattice = X[0] + h * np.arange(lo, hi + 1)
    psi = _wavefunction(c, lattice)
    max_l = hi - lo
    y = h * np.arange(max_l + 1)
    phase = np.exp(2j * np.outer(P, y))
    values = np.zeros((len(P), len(X)))
    for i in range(len(X)):
        center = i * q - lo
        n_y = min(center, len(lattice) - 1 - center)
        if n_y < 0:
            continue
        f = np.conj(psi[center:center + n_y + 1]) * psi[center - n_y:center + 1][::-1]
        weights = np.full(n_y + 1, 2.0)
        weights[0] = 1.0
        values[:, i] = (phase[:, :n_y + 1] @ (weights * f)).real
    values *= 2 * h / math.pi
    return PhaseSpaceField(grid, values, FieldKind.WIGNER, K, leaked)


def parity_expectation(state):
    P = state.probabilities
    signs = np.where(np.arange(len(P)) % 2 == 0, 1.0, -1.0)
    return float(signs @ P)


def rotation_symmetry_error(state, n):
    """1 - |<psi|R(2 pi/n)|psi>|^2 with R(theta) = exp(i theta a^dag a)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    k = np.arange(state.dim)
    # reduce k mod n first so the phase is exact for large k
    phase = np.exp(2j * np.pi * (k % n) / n)
    overlap = np.sum(state.probabilities * phase)
    return float(max(0.0, 1.0 - abs(overlap) ** 2))


def rotate_field(field, angle):
    """Field sampled on the same grid after rotating the phase-space picture by ``angle``
    (bilinear interpolation; points mapped from outside the grid read as 0)."""
    g = field.grid
    X, P = np.meshgrid(g.xs, g.ps)
    ca, sa = math.cos(angle), math.sin(angle)
    # value of rotated field at (x, p) = original at R(-angle)(x, p)
    xr = ca * X + sa * P
    pr = -sa * X + ca * P
    jx = (xr - g.x_min) / (g.x_max - g.x_min) * (g.points_per_axis - 1)
    ip = (pr - g.p_min) / (g.p_max - g.p_min) * (g.points_per_axis - 1)
    vals = ndimage.map_coordinates(field.values, [ip, jx], order=1, mode="constant", cval=0.0)
    return PhaseSpaceField(g, vals, field.kind, field.terms, field.leaked_probability)


def local_maxima(field, min_separation=0.5, threshold=0.0):
    """Local maxima separated by at least ``min_separation`` phase-space units,
    as (x, p, value) sorted by value descending."""
    g = field.grid
    step = (g.x_max - g.x_min) / (g.points_per_axis - 1)
    size = max(3, 2 * int(round(min_separation / step)) + 1)
    peaks = (field.values == ndimage.maximum_filter(field.values, size=size, mode="nearest"))
    peaks &= field.values > threshold
    i, j = np.nonzero(peaks)
    order = np.argsort(-field.values[i, j])
    return [(float(g.xs[j[t]]), float(g.ps[i[t]]), float(field.values[i[t], j[t]])) for t in order]
