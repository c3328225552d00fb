"""Eigenanalysis of the augmented-potential Hessian.

At a critical point the orbit tangent spans part of the Hessian kernel. The
Hessian restricted to the orthogonal complement of that tangent (the
"B-matrix") carries the information that matters: its determinant is the
degeneracy indicator and its negative eigenvalue count is the Morse index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nbody
from .errors import NotCritical, NotSymmetric

TAU_ZERO = 1e-8
CRITICAL_TOL = 1e-9


def eigh(M, vectors=False, sym_tol=1e-10):
    """Ascending eigenvalues (and orthonormal eigenvectors) of a symmetric matrix.

    LAPACK's symmetric solver does the work; the symmetry check is relative
    to the largest entry.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), np.finfo(float).tiny)
    asym = np.abs(M - M.T).max(initial=0.0)
    if asym > sym_tol * scale:
        raise NotSymmetric(f"relative asymmetry {asym / scale:.2e} exceeds {sym_tol:.0e}")
    M = 0.5 * (M + M.T)
    if vectors:
        return np.linalg.eigh(M)
    return np.linalg.eigvalsh(M)


def complement_basis(t) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to the unit vector ``t``.

    Uses the Householder reflector mapping ``t`` to ``+-e_k`` (``k`` the index of
    the largest ``|t_k|``); the remaining columns of the reflector span ``t^perp``.
    Returns an ``n x (n-1)`` matrix.
    """
    t = np.asarray(t, dtype=float)
    n = t.size
    k = int(np.argmax(np.abs(t)))
    v = t.copy()
    v[k] += np.copysign(1.0, t[k])
    Hh = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    return np.delete(Hh, k, axis=1)


@dataclass(frozen=True)
class RestrictedHessian:
    b_matrix: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.b_matrix.shape[0]


def restrict_to_orbit_complement(H, t, basis=None) -> RestrictedHessian:
    """Compress ``H`` onto ``t^perp``: ``B = Q^T H Q``.

    ``basis`` may supply any orthonormal ``Q`` spanning ``t^perp``; the
    spectrum of ``B`` does not depend on that choice.
    """
    H = np.asarray(H, dtype=float)
    t = np.asarray(t, dtype=float)
    nt = np.linalg.norm(t)
    if abs(nt - 1.0) > 1e-12:
        raise ValueError(f"tangent must be a unit vector, |t| = {nt}")
    Q = complement_basis(t) if basis is None else np.asarray(basis, dtype=float)
    B = Q.T @ H @ Q
    return RestrictedHessian(0.5 * (B + B.T), Q)


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    kernel_dim: int
    morse_index: int
    nonzero_product: float
    zero_tolerance_used: float

    @property
    def positive_count(self):
        return len(self.eigenvalues) - self.kernel_dim - self.morse_index

    @property
    def min_abs_eig(self):
        return float(np.abs(self.eigenvalues).min())

    def to_json(self):
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "kernel_dim": self.kernel_dim,
            "morse_index": self.morse_index,
            "nonzero_product": self.nonzero_product,
            "zero_tolerance_used": self.zero_tolerance_used,
        }


def report_from_eigenvalues(ev, tau_zero=TAU_ZERO) -> SpectralReport:
    ev = np.sort(np.asarray(ev, dtype=float))
    thresh = tau_zero * max(1.0, float(np.abs(ev).max(initial=0.0)))
    zero = np.abs(ev) <= thresh
    nonzero = ev[~zero]
    return SpectralReport(
        eigenvalues=ev,
        kernel_dim=int(zero.sum()),
        morse_index=int((ev < -thresh).sum()),
        nonzero_product=float(np.prod(nonzero)),
        zero_tolerance_used=thresh,
    )


def spectral_report(M, tau_zero=TAU_ZERO) -> SpectralReport:
    """Classify the spectrum of ``M`` against ``tau_zero * max(1, rho(M))``."""
    if not tau_zero > 0:
        raise ValueError("tau_zero must be positive")
    return report_from_eigenvalues(eigh(M), tau_zero)


def critical_residual(q, ctx) -> float:
    """``|grad phi|`` scaled by ``max(1, |Hessian|_inf)``.

    The infinity norm bounds the spectral radius and costs no eigensolve.
    """
    H = nbody.hessian_phi(q, ctx)
    scale = max(1.0, float(np.abs(H).sum(axis=1).max()))
    return float(np.linalg.norm(nbody.grad_phi(q, ctx))) / scale


@dataclass(frozen=True)
class PointAnalysis:
    """Spectra of the full Hessian and of the B-matrix at one configuration."""

    full: SpectralReport
    restricted: SpectralReport
    det_b: float
    residual: float

    @property
    def kernel_dim(self):
        return self.full.kernel_dim

    @property
    def morse_index(self):
        return self.restricted.morse_index

    @property
    def nondegenerate(self):
        return self.full.kernel_dim == 1

    def csv_row(self, parameter):
        return [parameter, self.full.kernel_dim, self.restricted.morse_index,
                self.det_b, self.full.min_abs_eig]

    def to_json(self):
        return {
            "kernel_dim": self.full.kernel_dim,
            "morse_index_full": self.full.morse_index,
            "morse_index_b": self.restricted.morse_index,
            "det_B": self.det_b,
            "residual": self.residual,
            "hessian": self.full.to_json(),
            "b_matrix": self.restricted.to_json(),
        }


def analyze(q, ctx, tau_zero=TAU_ZERO) -> PointAnalysis:
    """Full-Hessian and B-matrix reports at ``q`` (no criticality check)."""
    H = nbody.hessian_phi(q, ctx)
    full = spectral_report(H, tau_zero)
    B = restrict_to_orbit_complement(H, nbody.orbit_tangent(q)).b_matrix
    ev_b = eigh(B)
    restricted = report_from_eigenvalues(ev_b, tau_zero)
    scale = max(1.0, float(np.abs(full.eigenvalues).max()))
    residual = float(np.linalg.norm(nbody.grad_phi(q, ctx))) / scale
    return PointAnalysis(full, restricted, float(np.prod(ev_b)), residual)


def degeneracy_indicator(q, ctx, critical_tol=CRITICAL_TOL) -> float:
    """``det B``: the product of the Hessian spectrum with the orbit zero removed.

    The orbit through ``q`` is degenerate exactly where this value vanishes,
    so a zero crossing (or touch) along a family marks a bifurcation
    candidate. Only meaningful at critical points.
    """
    H = nbody.hessian_phi(q, ctx)
    scale = max(1.0, float(np.abs(eigh(H)).max()))
    res = float(np.linalg.norm(nbody.grad_phi(q, ctx)))
    if res > critical_tol * scale:
        raise NotCritical(f"|grad phi| = {res:.3e} exceeds {critical_tol:.0e} * {scale:.3g}")
    B = restrict_to_orbit_complement(H, nbody.orbit_tangent(q)).b_matrix
    return float(np.prod(eigh(B)))
