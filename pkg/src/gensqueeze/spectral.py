"""Eigenanalysis of residue-class subspaces.

Eigen-solves run on the gauge-reduced real symmetric tridiagonal with LAPACK's
divide-and-conquer driver (``syevd``). The MRRR tridiagonal driver loses the
+/- symmetry of the spectrum (and eventually fails to converge) once the
couplings span ten or more orders of magnitude, which happens already for
n = 5 at a few thousand photons.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import EigensolverError, NumericalError, ValidationError
from .fockspace import SubspaceView, build_generator, subspace_view


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Spectrum of one subspace.

    Attributes:
        eigenvalues: ascending real eigenvalues.
        eigenvectors: columns are eigenvectors in the gauge-reduced (real) rung basis.
        vacuum_overlap_probs: squared first component of each eigenvector, i.e. the
            overlap with the lowest Fock state of the subspace (|0> for residue 0).
        photon_indices: photon number of each rung.
        phases: gauge phases; ``phases[:, None] * eigenvectors`` are eigenvectors
            of the original complex subspace matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    vacuum_overlap_probs: np.ndarray
    photon_indices: np.ndarray
    phases: np.ndarray

    @property
    def size(self):
        return len(self.eigenvalues)

    def symmetry_residual(self):
        """max_i |lambda_i + lambda_{m+1-i}| relative to max |lambda|."""
        w = self.eigenvalues
        scale = np.max(np.abs(w))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(w + w[::-1])) / scale)


@lru_cache(maxsize=8)
def _subspace_eigh(spec, residue):
    view = subspace_view(build_generator(spec), residue)
    T = view.real_matrix()
    try:
        w, V = scipy.linalg.eigh(T, driver="evd", overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigendecomposition failed for subspace of size {view.size}: {exc}") from exc
    w.flags.writeable = False
    V.flags.writeable = False
    return view, w, V


def eigensystem(view):
    """Full spectrum and orthonormal eigenvectors of a subspace view."""
    if isinstance(view, SubspaceView):
        spec, residue = view.spec, view.residue
    else:
        raise ValidationError("eigensystem expects a SubspaceView")
    view, w, V = _subspace_eigh(spec, residue)
    probs = V[0] ** 2
    return SpectralData(w, V, probs, view.photon_indices, view.phases)


def vacuum_overlap_ranking(data, top=10):
    """The ``top`` largest vacuum-overlap probabilities as (eigenvalue, probability), descending."""
    if top < 1:
        raise ValidationError("top must be >= 1")
    # lexsort: last key is primary
    order = np.lexsort((data.eigenvalues, -data.vacuum_overlap_probs))
    return [(float(data.eigenvalues[i]), float(data.vacuum_overlap_probs[i])) for i in order[:top]]


def _top_pair(data, rtol=1e-9):
    p = data.vacuum_overlap_probs
    w = data.eigenvalues
    order = np.lexsort((w, -p))
    if len(order) < 2 or p[order[1]] <= 0:
        raise NumericalError("fewer than two eigenstates overlap the vacuum")
    a, b = order[0], order[1]
    if len(order) > 2:
        c = order[2]
        if abs(p[b] - p[c]) <= rtol * p[b]:
            # second place is tied; keep whichever is the +/- partner of the first
            scale = rtol * max(abs(w[a]), 1.0) * 1e3
            partners = [i for i in (b, c) if abs(w[i] + w[a]) <= scale]
            if len(partners) != 1:
                raise NumericalError("ambiguous vacuum-overlap ranking: tie between non-paired eigenstates")
            b = partners[0]
    return a, b


def dominant_gap(data):
    """|lambda_a - lambda_b| for the two eigenstates with the largest vacuum overlap."""
    a, b = _top_pair(data)
    return float(abs(data.eigenvalues[a] - data.eigenvalues[b]))


def top_pair_indices(data):
    return _top_pair(data)


def _check_index(data, index):
    if not -data.size <= index < data.size:
        raise ValidationError(f"eigenstate index {index} out of range for {data.size} states")


def eigenstate_mean_photon(data, index):
    _check_index(data, index)
    v = data.eigenvectors[:, index]
    return float(data.photon_indices @ (v * v))


def eigenstate_distribution(data, index):
    """Photon-number distribution of one eigenstate as ``(photon index, probability)`` pairs."""
    _check_index(data, index)
    v = data.eigenvectors[:, index]
    return list(zip(data.photon_indices.tolist(), (v * v).tolist()))


def amplitude_fraction(data, observed_max):
    """Two-eigenstate prediction of the <a^dag a> oscillation height over the observed height.

    A two-state superposition oscillates between the initial mean photon number
    (zero for the vacuum) and twice the mean photon number of the pair.
    """
    if observed_max <= 0:
        raise ValidationError("observed maximum must be positive")
    a, b = _top_pair(data)
    pair_mean = 0.5 * (eigenstate_mean_photon(data, a) + eigenstate_mean_photon(data, b))
    return 2 * pair_mean / observed_max


def vacuum_return_probability(data, r):
    """Reconstruct P_0(r) = |sum_j p_j exp(-i lambda_j r)|^2 from overlaps alone."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    amp = np.exp(-1j * np.outer(r, data.eigenvalues)) @ data.vacuum_overlap_probs
    return np.abs(amp) ** 2


def vacuum_spectrum(spec):
    """Convenience: spectral data of the residue-0 subspace of ``spec``."""
    return eigensystem(subspace_view(build_generator(spec), 0))
