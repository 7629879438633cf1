"""Closed-form baselines used to cross-check the numerics.

Conventions: U_n(r) = exp{r[(a^dag)^n - a^n]} with no factor 1/2, so the n = 2
case is the textbook squeeze operator with squeeze parameter xi = 2r.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DivergenceError, ValidationError
from .fockspace import StateVector


def coherent_amplitudes(r, N):
    """U_1(r)|0>: c_k = exp(-r^2/2) r^k / sqrt(k!), renormalized on N states."""
    if r * r > N / 4:
        raise ValidationError(f"dimension {N} too small for a coherent state with r={r} (need r^2 <= N/4)")
    k = np.arange(N)
    if r == 0:
        c = (k == 0).astype(complex)
    else:
        sign = np.sign(r) ** k
        c = sign * np.exp(-0.5 * r * r + k * math.log(abs(r)) - 0.5 * gammaln(k + 1))
    return StateVector.normalized(c)


def squeezed_vacuum_amplitudes(r, N):
    """U_2(r)|0> on N states: c_{2m} = tanh(2r)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh 2r)."""
    t = math.tanh(2 * r)
    m = np.arange((N + 1) // 2)
    c = np.zeros(N, dtype=complex)
    if t == 0:
        c[0] = 1.0
        return StateVector(c)
    logmag = m * math.log(abs(t)) + 0.5 * gammaln(2 * m + 1) - m * math.log(2) - gammaln(m + 1)
    c[0::2] = np.sign(t) ** m * np.exp(logmag - 0.5 * math.log(math.cosh(2 * r)))
    return StateVector.normalized(c)


def squeezed_vacuum_mean_photon(r):
    return math.sinh(2 * r) ** 2


def double_factorial(m):
    """m!! for odd m >= -1, with (-1)!! = 1."""
    if int(m) != m or m < -1 or m % 2 == 0:
        raise ValidationError(f"double factorial defined here for odd m >= -1, got {m}")
    return math.prod(range(int(m), 0, -2))


def pn_mean_photon(n, r):
    """<a^dag a> after exp(-i r p^n)|0> with p = (a^dag - a)/i: (2n-3)!! n^2 r^2."""
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    return double_factorial(2 * n - 3) * n * n * r * r


class ClassicalVariant(enum.Enum):
    AS_PRINTED = "as-printed"
    ODE_EXACT = "ode-exact"


@dataclass(frozen=True)
class ClassicalParams:
    """Parameters of the toy dynamics dx/dt = rate * x^(n/2)."""

    rate: float
    x0: float
    n: int

    def __post_init__(self):
        if self.rate <= 0:
            raise ValidationError("rate must be > 0")
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.x0 < 0 or (self.n >= 2 and self.x0 == 0):
            raise ValidationError("x0 must be > 0 for n >= 2 (and >= 0 for n = 1)")

    @property
    def divergence_time(self):
        """Blow-up time for n >= 3, infinity otherwise."""
        if self.n < 3:
            return math.inf
        e = self.n / 2 - 1
        return self.x0 ** (-e) / (e * self.rate)


def classical_trajectory(params, t, variant=ClassicalVariant.ODE_EXACT):
    """Position x(t).

    ``ODE_EXACT`` integrates the ODE directly. ``AS_PRINTED`` differs only in the
    n = 1 branch, which uses (sqrt(x0) + 2 rate t)^2 instead of
    (sqrt(x0) + rate t / 2)^2.
    """
    variant = ClassicalVariant(variant)
    if t < 0:
        raise ValidationError("t must be >= 0")
    n, a, x0 = params.n, params.rate, params.x0
    if n == 1:
        coef = 2.0 if variant is ClassicalVariant.AS_PRINTED else 0.5
        return (math.sqrt(x0) + coef * a * t) ** 2
    if n == 2:
        return x0 * math.exp(a * t)
    t_star = params.divergence_time
    if t >= t_star:
        raise DivergenceError(f"trajectory diverges at t* = {t_star:g} (asked for t = {t:g})", t_star)
    e = n / 2 - 1
    return (x0 ** (-e) - e * a * t) ** (-1 / e)
