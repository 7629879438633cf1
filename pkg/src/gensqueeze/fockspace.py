"""Truncated generator matrices in the Fock basis.

The generator of n-photon squeezing is ``H_n = i[(a^dag)^n - a^n]`` so that
``U_n(r) = exp(-i r H_n)``. Only the couplings between photon numbers that
differ by exactly ``n`` are nonzero, which splits the truncated matrix into
``n`` residue classes (``k mod n``) that never mix.

Matrices are stored as bands: ``bands[d][j]`` is the element ``<j|H|j+d>`` for
``d >= 0``; the lower bands follow by Hermitian conjugation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

SOFT_CUTOFF_START = 0.8

# upper bound for dense materialization in tests and small-system paths
DENSE_LIMIT = 4000


class Cutoff(enum.Enum):
    HARD = "hard"
    SOFT = "soft"


class SoftAnchor(enum.Enum):
    """Which index of ``H_{k,k+n}`` feeds the soft-cutoff sine: the row k or the column k+n."""

    ROW = "row"
    COLUMN = "column"


class Family(enum.Enum):
    STANDARD = "standard"
    MOMENTUM_POWER = "pn"
    DESIGNER_TRISQUEEZE = "designer"


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters fixing one truncated generator.

    Attributes:
        order: squeezing order n.
        dim: number of Fock states kept, N (basis |0>..|N-1>).
        cutoff: hard truncation or sine-suppressed top 20% of couplings.
        family: which generator to build.
        soft_anchor: index at which the soft-cutoff factor is evaluated.
    """

    order: int
    dim: int
    cutoff: Cutoff = Cutoff.HARD
    family: Family = Family.STANDARD
    soft_anchor: SoftAnchor = SoftAnchor.ROW

    def __post_init__(self):
        object.__setattr__(self, "cutoff", Cutoff(self.cutoff))
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "soft_anchor", SoftAnchor(self.soft_anchor))
        n, N = self.order, self.dim
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"order must be an integer >= 1, got {n!r}")
        if not isinstance(N, (int, np.integer)) or N < 2 * n:
            raise ValidationError(f"dim must be an integer >= 2*order = {2 * n}, got {N!r}")
        if self.family is Family.DESIGNER_TRISQUEEZE and n != 3:
            raise ValidationError(f"designer trisqueeze generator requires order 3, got {n}")
        if self.family is not Family.MOMENTUM_POWER and N % n != 0:
            raise ValidationError(f"dim ({N}) must be a multiple of order ({n}) for family {self.family.value}")
        if self.family is Family.MOMENTUM_POWER and self.cutoff is Cutoff.SOFT:
            raise ValidationError("soft cutoff is only defined for the standard and designer families")

    @property
    def rungs(self):
        """Size of each residue-class subspace (N/n)."""
        return self.dim // self.order


def matrix_element(k, n):
    """Return ``<k|H_n|k+n> = -i sqrt((k+1)(k+2)...(k+n))``."""
    if k < 0 or n < 1:
        raise ValidationError(f"need k >= 0 and n >= 1, got k={k}, n={n}")
    return -1j * math.sqrt(math.prod(range(k + 1, k + n + 1)))


def suppression_factor(k, N):
    """Soft-cutoff multiplier at photon index ``k`` of an N-state matrix.

    Equal to 1 below ``k = 0.8 N`` and to ``sin(5 pi (N - k) / (2N))`` above,
    reaching zero at ``k = N``. Accepts scalars or arrays.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0) or np.any(k > N):
        raise ValidationError(f"suppression factor needs 0 <= k <= N={N}")
    out = np.where(k / N < SOFT_CUTOFF_START, 1.0, np.sin(5 * np.pi * (N - k) / (2 * N)))
    return float(out) if out.ndim == 0 else out


def _ladder_products(k, n):
    # sqrt((k+1)...(k+n)) for an integer array k, in floating point
    out = np.ones(len(k))
    for i in range(1, n + 1):
        out *= k + i
    return np.sqrt(out)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Banded Hermitian generator. ``bands[d][j]`` couples |j> and |j+d>, d >= 0."""

    spec: GeneratorSpec
    bands: dict

    @property
    def dim(self):
        return self.spec.dim

    def to_sparse(self):
        N = self.dim
        diags, offsets = [], []
        for d, vals in self.bands.items():
            diags.append(vals)
            offsets.append(d)
            if d:
                diags.append(np.conj(vals))
                offsets.append(-d)
        return sp.diags(diags, offsets, shape=(N, N), format="csr", dtype=complex)

    def to_dense(self, max_dim=DENSE_LIMIT):
        if self.dim > max_dim:
            raise ValidationError(f"refusing to materialize a {self.dim}x{self.dim} matrix (limit {max_dim})")
        return self.to_sparse().toarray()


def _momentum_power_bands(n, N):
    a = sp.diags(np.sqrt(np.arange(1, N)), 1, shape=(N, N), format="csr", dtype=complex)
    p = (a.T - a) / 1j
    h = sp.identity(N, dtype=complex, format="csr")
    for _ in range(n):
        h = h @ p
    h = h.todia()
    bands = {}
    for d in range(n % 2, n + 1, 2):
        diag = h.diagonal(d).copy()
        if d == 0:
            diag = diag.real.astype(complex)
        bands[d] = diag
    return bands


def _soft_factors(k, n, spec):
    anchor = k if spec.soft_anchor is SoftAnchor.ROW else k + n
    return suppression_factor(anchor, spec.dim)


@lru_cache(maxsize=32)
def build_generator(spec):
    """Construct the truncated generator for ``spec``."""
    n, N = spec.order, spec.dim
    if spec.family is Family.STANDARD:
        k = np.arange(N - n)
        vals = -1j * _ladder_products(k, n)
        if spec.cutoff is Cutoff.SOFT:
            vals = vals * _soft_factors(k, n, spec)
        bands = {n: vals}
    elif spec.family is Family.DESIGNER_TRISQUEEZE:
        k = np.arange(N - 3)
        vals = np.zeros(N - 3, dtype=complex)
        on = k % 3 == 0
        j = k[on] // 3
        vals[on] = -1j * np.sqrt((2 * j + 1) * (2 * j + 2))
        if spec.cutoff is Cutoff.SOFT:
            vals = vals * _soft_factors(k, 3, spec)
        bands = {3: vals}
    else:
        bands = _momentum_power_bands(n, N)
    for v in bands.values():
        v.flags.writeable = False
    return GeneratorMatrix(spec, bands)


@dataclass(frozen=True, eq=False)
class SubspaceView:
    """One residue class ``{s, s+n, s+2n, ...}`` of a Standard/Designer generator.

    ``offdiag[j]`` is the complex element between rungs j and j+1. The gauge
    transform ``diag(phases)`` maps the subspace matrix onto the real symmetric
    tridiagonal with zero diagonal and off-diagonal ``couplings``:
    ``M = D T D^dag``.
    """

    spec: GeneratorSpec
    residue: int
    photon_indices: np.ndarray
    offdiag: np.ndarray
    couplings: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)

    @property
    def size(self):
        return len(self.photon_indices)

    def matrix(self):
        """Dense complex Hermitian subspace matrix (for checks on small systems)."""
        return np.diag(self.offdiag, 1) + np.diag(np.conj(self.offdiag), -1)

    def real_matrix(self):
        """Dense gauge-reduced real symmetric tridiagonal."""
        return np.diag(self.couplings, 1) + np.diag(self.couplings, -1)


def subspace_view(gen, s):
    spec = gen.spec
    if spec.family is Family.MOMENTUM_POWER:
        raise ValidationError("momentum-power generators have no residue-class decomposition")
    n = spec.order
    if not 0 <= s < n:
        raise ValidationError(f"residue must lie in [0, {n}), got {s}")
    idx = np.arange(s, spec.dim, n)
    offdiag = np.asarray(gen.bands[n])[idx[:-1]]
    couplings = np.abs(offdiag)
    # d_{j+1} = d_j * |h_j| / h_j makes conj(d_j) h_j d_{j+1} = |h_j|
    ratio = np.ones(len(offdiag), dtype=complex)
    nz = couplings > 0
    ratio[nz] = couplings[nz] / offdiag[nz]
    phases = np.concatenate([[1.0 + 0j], np.cumprod(ratio)])
    return SubspaceView(spec, s, idx, offdiag, couplings, phases)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over the Fock basis |0>..|N-1>."""

    amplitudes: np.ndarray

    NORM_TOL = 1e-10

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size == 0:
            raise ValidationError("amplitudes must be a non-empty 1-D array")
        nrm = np.linalg.norm(a)
        if abs(nrm - 1) > self.NORM_TOL:
            raise ValidationError(f"state not normalized: norm = {nrm!r}")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes):
        a = np.asarray(amplitudes, dtype=complex)
        return cls(a / np.linalg.norm(a))

    @property
    def dim(self):
        return self.amplitudes.size

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def fock_state(k, N):
    if not 0 <= k < N:
        raise ValidationError(f"photon number {k} outside [0, {N})")
    a = np.zeros(N, dtype=complex)
    a[k] = 1.0
    return StateVector(a)


def vacuum_state(N):
    if N < 1:
        raise ValidationError(f"dimension must be >= 1, got {N}")
    return fock_state(0, N)
