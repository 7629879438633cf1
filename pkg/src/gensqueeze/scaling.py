"""Sweeps over truncation size and squeezing order, and the fits applied to them."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, GenSqueezeError, NoReturnError, ValidationError
from .fockspace import Cutoff, GeneratorSpec, build_generator
from .observables import first_return, quadratic_vertex
from .propagation import StepSchedule, trajectory_observables
from .spectral import dominant_gap, vacuum_spectrum


class Quantity(enum.Enum):
    MAX_MEAN_PHOTON = "max-photon"
    DOMINANT_GAP = "gap"


class FitModel(enum.Enum):
    POWER_LAW = "power-law"
    LOGARITHMIC = "logarithmic"
    EXPONENTIAL_IN_ORDER = "exponential-in-order"
    GAP_CONVERGENCE = "gap-convergence"


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    N: int
    cutoff: Cutoff
    quantity: Quantity
    value: float
    r_at_max: float = math.nan

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValidationError(f"scaling value must be finite and positive, got {self.value}")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Least-squares line in transformed coordinates.

    ``parameters`` depends on the model: ``exponent``/``prefactor`` for power
    laws, ``slope``/``intercept`` for the logarithmic and exponential models,
    ``asymptote``/``coefficient``/``beta`` for gap convergence.
    """

    model: FitModel
    parameters: dict
    r_squared: float
    residuals: np.ndarray = field(repr=False)


class SweepError(GenSqueezeError):
    def __init__(self, N, cause):
        super().__init__(f"sweep point N={N} failed: {cause}")
        self.N = N
        self.cause = cause


def _line_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.lexsort((y, x))  # reordering-invariant
    x, y = x[order], y[order]
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(res @ res) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2, res


def _unzip(points, min_points):
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < min_points:
        raise ValidationError(f"need at least {min_points} points, got {len(pts)}")
    x, y = map(np.array, zip(*pts))
    return x, y


def fit_power_law(points):
    """Fit value = prefactor * N^exponent on log-log axes."""
    x, y = _unzip(points, 3)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("power-law fit needs positive N and values")
    slope, intercept, r2, res = _line_fit(np.log(x), np.log(y))
    return FitResult(FitModel.POWER_LAW, {"exponent": slope, "prefactor": math.exp(intercept)}, r2, res)


def fit_logarithmic(points):
    """Fit value = slope * log N + intercept."""
    x, y = _unzip(points, 3)
    if np.any(x <= 0):
        raise ValidationError("logarithmic fit needs positive N")
    slope, intercept, r2, res = _line_fit(np.log(x), y)
    return FitResult(FitModel.LOGARITHMIC, {"slope": slope, "intercept": intercept}, r2, res)


def fit_exponential_in_order(points):
    """Fit log(gap) = slope * n + intercept."""
    x, y = _unzip(points, 3)
    if np.any(y <= 0):
        raise ValidationError("exponential fit needs positive gaps")
    slope, intercept, r2, res = _line_fit(x, np.log(y))
    return FitResult(FitModel.EXPONENTIAL_IN_ORDER, {"slope": slope, "intercept": intercept}, r2, res)


def extrapolate_gap(points, resolution=1e-4, min_r_squared=0.9):
    """Fit gap(N) = asymptote + coefficient * N^(-beta).

    The asymptote is scanned over [0, min gap) in steps of ``resolution`` and the
    value making log(gap - asymptote) most linear in log N wins.
    """
    x, y = _unzip(points, 4)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("gap extrapolation needs positive N and gaps")
    order = np.lexsort((y, x))  # reordering-invariant
    x, y = x[order], y[order]
    logx = np.log(x)
    candidates = np.arange(0.0, y.min(), resolution)
    candidates = candidates[candidates < y.min()]
    # R^2 of every candidate's line fit at once: R^2 = corr(log x, log(y - e))^2
    Y = np.log(y[None, :] - candidates[:, None])
    xc = logx - logx.mean()
    Yc = Y - Y.mean(axis=1, keepdims=True)
    sxy = Yc @ xc
    syy = np.einsum("ij,ij->i", Yc, Yc)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2_all = np.where(syy > 0, sxy * sxy / (float(xc @ xc) * syy), 1.0)
    best = None
    if candidates.size:
        i = int(np.argmax(r2_all))
        e = float(candidates[i])
        slope, intercept, r2, res = _line_fit(logx, np.log(y - e))
        best = (r2, e, slope, intercept, res)
    if best is None or best[0] < min_r_squared:
        raise FitError(
            f"no asymptote reaches r_squared >= {min_r_squared} (best {best[0] if best else float('nan'):.4f})",
            residuals=None if best is None else best[4],
        )
    r2, e, slope, intercept, res = best
    params = {"asymptote": float(e), "coefficient": math.exp(intercept), "beta": -slope}
    return FitResult(FitModel.GAP_CONVERGENCE, params, r2, res)


def max_mean_photon_point(n, N, cutoff=Cutoff.HARD, r_max=2.0, dr=0.01, method="spectral"):
    """Maximum of <a^dag a> over the first oscillation (before the first return of P_0)."""
    spec = GeneratorSpec(n, N, Cutoff(cutoff))
    traj = trajectory_observables(build_generator(spec), StepSchedule(r_max, dr), (0,), method=method)
    r, mp = traj.r_samples, traj.mean_photon
    try:
        end = first_return(traj).r_location
    except NoReturnError:
        end = r[-1]
    window = r <= end
    i = int(np.argmax(np.where(window, mp, -np.inf)))
    r_at = quadratic_vertex(r, mp, i) if 0 < i < len(r) - 1 else float(r[i])
    return ScalingPoint(n, N, Cutoff(cutoff), Quantity.MAX_MEAN_PHOTON, float(mp[i]), r_at)


def gap_point(n, N, cutoff=Cutoff.HARD):
    spec = GeneratorSpec(n, N, Cutoff(cutoff))
    return ScalingPoint(n, N, Cutoff(cutoff), Quantity.DOMINANT_GAP, dominant_gap(vacuum_spectrum(spec)))


def _run_point(args):
    kind, kwargs = args
    N = kwargs["N"]
    try:
        if kind is Quantity.MAX_MEAN_PHOTON:
            return max_mean_photon_point(**kwargs)
        return gap_point(**kwargs)
    except GenSqueezeError as exc:
        raise SweepError(N, exc) from exc


def _sweep(jobs_args, jobs):
    if jobs and jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_point, jobs_args))
    return [_run_point(a) for a in jobs_args]


def sweep_max_mean_photon(n, dims, cutoff=Cutoff.HARD, r_max=2.0, dr=0.01, jobs=1):
    """One ScalingPoint per truncation size; results keep the order of ``dims``."""
    args = [(Quantity.MAX_MEAN_PHOTON, dict(n=n, N=N, cutoff=cutoff, r_max=r_max, dr=dr)) for N in dims]
    return _sweep(args, jobs)


def sweep_gap(n, dims, cutoff=Cutoff.HARD, jobs=1):
    args = [(Quantity.DOMINANT_GAP, dict(n=n, N=N, cutoff=cutoff)) for N in dims]
    return _sweep(args, jobs)


def sweep_gap_over_order(orders, dim_per_order, cutoff=Cutoff.HARD, jobs=1):
    """Gap for each order n at N = n * dim_per_order."""
    args = [(Quantity.DOMINANT_GAP, dict(n=n, N=n * dim_per_order, cutoff=cutoff)) for n in orders]
    return _sweep(args, jobs)
