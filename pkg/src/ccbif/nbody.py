"""Planar N-body geometry and the SO(2)-invariant augmented potential.

Positions are stored as flat vectors ``(x1, y1, x2, y2, ...)``; every function
also accepts an ``(N, 2)`` array. The gravitational constant is 1.

The augmented potential is ``phi(q) = U(q, m) + lam * I(q, m)`` with

    U(q, m) = sum_{i<j} m_i m_j / |q_i - q_j|
    I(q, m) = 1/2 sum_j m_j |q_j|^2

Its critical points with ``lam = U / (2 I)`` are the central configurations.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (CollisionError, DegenerateInertia, ParseError,
                     ZeroConfiguration)

COLLISION_FLOOR = 1e-12

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def as_positions(q) -> np.ndarray:
    """Return ``q`` as a float ``(N, 2)`` array (a view when possible)."""
    P = np.asarray(q, dtype=float)
    if P.ndim == 1:
        if P.size % 2:
            raise ValueError(f"flat configuration has odd length {P.size}")
        P = P.reshape(-1, 2)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError(f"expected (N, 2) positions, got shape {P.shape}")
    return P


def as_masses(m, n_bodies=None) -> np.ndarray:
    m = np.asarray(m, dtype=float).ravel()
    if n_bodies is not None and m.size != n_bodies:
        raise ValueError(f"{m.size} masses given for {n_bodies} bodies")
    if not np.all(m > 0):
        raise ValueError("masses must be strictly positive")
    return m


def _separations(P):
    D = P[:, None, :] - P[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", D, D))
    return D, r


def min_pairwise_distance(q) -> float:
    P = as_positions(q)
    if len(P) < 2:
        return np.inf
    _, r = _separations(P)
    iu = np.triu_indices(len(P), 1)
    return float(r[iu].min())


def in_omega(q, floor=COLLISION_FLOOR) -> bool:
    """True when all bodies are pairwise farther apart than ``floor``."""
    return min_pairwise_distance(q) > floor


def _check_collisions(P, floor):
    if len(P) < 2:
        return
    dmin = min_pairwise_distance(P)
    if not dmin > floor:
        raise CollisionError(f"minimum pairwise distance {dmin:.3e} "
                             f"is below the collision floor {floor:.1e}")


# -- SO(2) action ------------------------------------------------------------

def rotation_matrix(angle) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def block_rotation(angle, n_bodies) -> np.ndarray:
    """The ``2N x 2N`` block-diagonal lift of ``rotation_matrix(angle)``."""
    return np.kron(np.eye(n_bodies), rotation_matrix(angle))


def rotate(q, angle) -> np.ndarray:
    """Apply the rotation to every body; returns a flat vector."""
    P = as_positions(q)
    return (P @ rotation_matrix(angle).T).ravel()


def orbit_tangent(q, tol=1e-14) -> np.ndarray:
    """Unit tangent ``(J q_1, ..., J q_N)`` to the SO(2)-orbit through ``q``."""
    P = as_positions(q)
    t = (P @ _J.T).ravel()
    norm = np.linalg.norm(t)
    if norm < tol:
        raise ZeroConfiguration("orbit tangent undefined at the origin")
    return t / norm


# -- potentials ----------------------------------------------------------------

def potential_U(q, m, floor=COLLISION_FLOOR) -> float:
    P = as_positions(q)
    m = as_masses(m, len(P))
    _check_collisions(P, floor)
    _, r = _separations(P)
    iu = np.triu_indices(len(P), 1)
    return float(np.sum(np.outer(m, m)[iu] / r[iu]))


def moment_of_inertia_I(q, m) -> float:
    P = as_positions(q)
    m = as_masses(m, len(P))
    return 0.5 * float(np.sum(m * np.einsum("ij,ij->i", P, P)))


def lambda_of(q, m, tol=1e-14, floor=COLLISION_FLOOR) -> float:
    """The multiplier ``U / (2 I)`` that a central configuration must carry."""
    inertia = moment_of_inertia_I(q, m)
    if inertia <= tol:
        raise DegenerateInertia(f"moment of inertia {inertia:.3e} is not positive")
    return potential_U(q, m, floor) / (2.0 * inertia)


@dataclass(frozen=True)
class AugmentedPotential:
    """``phi = U + lam * I`` with masses and ``lam`` frozen."""

    masses: np.ndarray
    lam: float
    floor: float = COLLISION_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "masses", as_masses(self.masses))
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    @classmethod
    def at(cls, q, m, floor=COLLISION_FLOOR):
        """Context whose ``lam`` is ``lambda_of(q, m)``."""
        return cls(m, lambda_of(q, m, floor=floor), floor)


def phi(q, ctx: AugmentedPotential) -> float:
    return (potential_U(q, ctx.masses, ctx.floor)
            + ctx.lam * moment_of_inertia_I(q, ctx.masses))


def grad_phi(q, ctx: AugmentedPotential) -> np.ndarray:
    """Closed-form gradient of ``phi`` as a flat ``2N`` vector."""
    P = as_positions(q)
    m = as_masses(ctx.masses, len(P))
    _check_collisions(P, ctx.floor)
    D, r = _separations(P)
    np.fill_diagonal(r, np.inf)
    w = np.outer(m, m) / r**3
    g = -np.einsum("ij,ijk->ik", w, D) + ctx.lam * m[:, None] * P
    return g.ravel()


def hessian_phi(q, ctx: AugmentedPotential) -> np.ndarray:
    """Closed-form Hessian of ``phi``, ``2N x 2N`` and symmetric.

    Each pair contributes the block ``K = m_i m_j (3 u u^T - Id) / r^3``
    (``u`` the unit separation) with ``+K`` on both diagonal blocks and ``-K``
    off the diagonal; the inertia term adds ``lam * m_j * Id`` per body.
    """
    P = as_positions(q)
    n = len(P)
    m = as_masses(ctx.masses, n)
    _check_collisions(P, ctx.floor)
    D, r = _separations(P)
    np.fill_diagonal(r, 1.0)
    U = D / r[..., None]
    K = 3.0 * U[..., :, None] * U[..., None, :] - np.eye(2)
    K *= (np.outer(m, m) / r**3)[..., None, None]
    idx = np.arange(n)
    K[idx, idx] = 0.0
    H = -K.transpose(0, 2, 1, 3).copy()
    diag = K.sum(axis=1) + ctx.lam * m[:, None, None] * np.eye(2)
    H[idx, :, idx, :] = diag
    H = H.reshape(2 * n, 2 * n)
    return 0.5 * (H + H.T)


# -- finite-difference oracles (verification only) -------------------------------

def _default_step(P, power):
    scale = min(1.0, min_pairwise_distance(P)) if len(P) > 1 else 1.0
    return np.finfo(float).eps ** power * scale


def fd_gradient_oracle(q, ctx: AugmentedPotential, h=None, fun=None) -> np.ndarray:
    """Central-difference gradient of ``phi`` (or of ``fun``); error O(h^2)."""
    P = as_positions(q)
    x = P.ravel().copy()
    if h is None:
        h = _default_step(P, 1 / 3)
    if fun is None:
        def fun(y):
            return phi(y, ctx)
    if len(P) > 1 and not min_pairwise_distance(P) > 2 * h + ctx.floor:
        raise CollisionError("finite-difference probes would leave the collision-free set")
    g = np.empty_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        g[k] = (fun(xp) - fun(xm)) / (2 * h)
    return g


def fd_hessian_oracle(q, ctx: AugmentedPotential, h=None, return_raw=False):
    """Central differences of the analytic gradient, then symmetrized.

    With ``return_raw`` the unsymmetrized matrix is returned as well, so
    callers can inspect its asymmetry.
    """
    P = as_positions(q)
    x = P.ravel().copy()
    if h is None:
        h = _default_step(P, 1 / 3)
    if len(P) > 1 and not min_pairwise_distance(P) > 2 * h + ctx.floor:
        raise CollisionError("finite-difference probes would leave the collision-free set")
    raw = np.empty((x.size, x.size))
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        raw[:, k] = (grad_phi(xp, ctx) - grad_phi(xm, ctx)) / (2 * h)
    sym = 0.5 * (raw + raw.T)
    return (sym, raw) if return_raw else sym


# -- serialization ---------------------------------------------------------------

def configuration_to_json(q, m=None) -> dict:
    doc = {"positions": as_positions(q).tolist()}
    if m is not None:
        doc["masses"] = np.asarray(m, dtype=float).tolist()
    return doc


def configuration_from_json(doc):
    """Return ``(flat positions, masses or None)`` from a JSON document."""
    try:
        P = as_positions(doc["positions"])
        m = doc.get("masses")
        if m is not None:
            m = as_masses(m, len(P))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad configuration document: {exc}") from exc
    return P.ravel(), m


def read_configuration(path):
    """Load positions (and masses when present) from JSON or flat CSV.

    The CSV form is one row ``x1,y1,...,xN,yN``, optionally followed by a
    row of ``N`` masses.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    if path.suffix.lower() == ".json":
        try:
            return configuration_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    rows = [r for r in csv.reader(text.splitlines())
            if r and not r[0].lstrip().startswith("#")]
    try:
        values = [[float(v) for v in row] for row in rows]
        P = as_positions(values[0])
        m = as_masses(values[1], len(P)) if len(values) > 1 else None
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return P.ravel(), m


def write_configuration(path, q, m=None):
    Path(path).write_text(json.dumps(configuration_to_json(q, m), indent=2) + "\n")
