"""Scalar diagnostics of states and trajectories."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NoReturnError, ValidationError


class ExtremumKind(enum.Enum):
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ExtremumRecord:
    r_location: float
    value: float
    kind: ExtremumKind


def occupation(state, k):
    if not 0 <= k < state.dim:
        raise ValidationError(f"photon number {k} outside [0, {state.dim})")
    return float(abs(state.amplitudes[k]) ** 2)


def mean_photon(state):
    return float(np.arange(state.dim) @ state.probabilities)


def fidelity(a, b):
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def argmax_occupation(state):
    # np.argmax returns the first maximum, i.e. ties go to the smaller photon number
    return int(np.argmax(state.probabilities))


def quadratic_vertex(r, y, i):
    """Abscissa of the parabola through samples i-1, i, i+1."""
    x0, x1, x2 = r[i - 1], r[i], r[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return x1
    xv = -b / (2 * a)
    return float(min(max(xv, x0), x2))


def find_extrema(r, values):
    """Strict interior local extrema of a sampled series.

    Locations are refined by a three-point quadratic fit; the reported value is
    the sampled value at the extremal sample.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(r) < 3 or len(r) != len(y):
        raise ValidationError("need at least 3 samples of equal length")
    if np.any(np.diff(r) <= 0):
        raise ValidationError("r samples must be strictly increasing")
    left, mid, right = y[:-2], y[1:-1], y[2:]
    is_max = (mid > left) & (mid > right)
    is_min = (mid < left) & (mid < right)
    out = []
    for i in np.flatnonzero(is_max | is_min) + 1:
        kind = ExtremumKind.MAX if is_max[i - 1] else ExtremumKind.MIN
        out.append(ExtremumRecord(quadratic_vertex(r, y, i), float(y[i]), kind))
    return out


def first_minimum(trajectory):
    for e in find_extrema(trajectory.r_samples, trajectory.vacuum_prob):
        if e.kind is ExtremumKind.MIN:
            return e
    raise NoReturnError("vacuum probability has no interior local minimum in the sampled range")


def first_return(trajectory):
    """First local maximum of the vacuum probability after its first local minimum."""
    seen_min = False
    for e in find_extrema(trajectory.r_samples, trajectory.vacuum_prob):
        if e.kind is ExtremumKind.MIN:
            seen_min = True
        elif seen_min:
            return e
    raise NoReturnError(
        f"no return of the vacuum probability within r <= {trajectory.r_samples[-1]:g}"
    )
