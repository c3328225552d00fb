"""Known families of planar central configurations.

* two nested squares (8 bodies), parameterized by the inner circumradius ``r``;
* the 13-body rosette (two hexagons plus a central body), parameterized by
  the masses ``(m0, m1)``;
* user families read from CSV.

Balancing masses are found by a ring-wise linear solve that works for any
ring-symmetric shape; the published closed forms are kept for cross-checks.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import nbody, spectral
from .errors import (AsymmetricShape, InvalidMasses, MassSolveFailed,
                     NotCentral, OutOfRange, ParseError)

RESIDUAL_TOL = 1e-9
R0_PUBLISHED = 0.37602


@dataclass(frozen=True)
class FamilyPoint:
    parameter: object
    positions: np.ndarray
    masses: np.ndarray
    lam: float

    @property
    def n_bodies(self):
        return len(self.masses)

    @property
    def ctx(self):
        return nbody.AugmentedPotential(self.masses, self.lam)

    def residual(self):
        """``|grad phi|`` scaled by ``max(1, |Hessian|)``."""
        return spectral.critical_residual(self.positions, self.ctx)

    def analyze(self, tau_zero=spectral.TAU_ZERO):
        return spectral.analyze(self.positions, self.ctx, tau_zero)

    def to_json(self):
        par = self.parameter
        if isinstance(par, tuple):
            par = list(par)
        doc = {"parameter": par}
        doc.update(nbody.configuration_to_json(self.positions, self.masses))
        doc["lambda"] = self.lam
        doc["residual"] = self.residual()
        return doc


def make_point(parameter, positions, masses, residual_tol=RESIDUAL_TOL):
    """Build a FamilyPoint, computing ``lam`` and checking it is central."""
    q = nbody.as_positions(positions).ravel()
    m = nbody.as_masses(masses, q.size // 2)
    point = FamilyPoint(parameter, q, m, nbody.lambda_of(q, m))
    res = point.residual()
    if not res <= residual_tol:
        raise NotCentral(None, res, f"parameter {parameter!r}: residual {res:.3e} "
                                    f"exceeds {residual_tol:.0e}")
    return point


def has_trivial_isotropy(q, tol=1e-10) -> bool:
    """No nonidentity rotation fixes the (labeled) configuration.

    Only the angles ``2 pi k / L`` with ``L <= 2N`` are probed; a rotation
    fixing a configuration with a body off the origin must be one of them.
    """
    P = nbody.as_positions(q)
    scale = max(1.0, float(np.abs(P).max()))
    for L in range(2, 2 * len(P) + 1):
        for k in range(1, L):
            if math.gcd(k, L) != 1:
                continue
            moved = nbody.rotate(P, 2 * math.pi * k / L)
            if np.abs(moved - P.ravel()).max() <= tol * scale:
                return False
    return True


# -- ring-wise mass solve ------------------------------------------------------------

def _ring_equations(P, rings, fixed, origin_tol):
    """Radial balance rows: unknowns are the free ring masses, then ``lam``."""
    radii = np.linalg.norm(P, axis=1)
    free = [k for k in range(len(rings)) if k not in fixed]
    rows, rhs = [], []
    for ring in rings:
        i = ring[0]
        if radii[i] <= origin_tol:
            continue
        u = P[i] / radii[i]
        row = np.zeros(len(free) + 1)
        known = 0.0
        for k, other in enumerate(rings):
            d = P[i] - P[[j for j in other if j != i]]
            if len(d) == 0:
                continue
            s = float(np.sum((d @ u) / np.linalg.norm(d, axis=1) ** 3))
            if k in fixed:
                known += fixed[k] * s
            else:
                row[free.index(k)] += s
        row[-1] = -radii[i]
        rows.append(row)
        rhs.append(-known)
    return free, np.array(rows), np.array(rhs)


def solve_balancing_masses(shape, rings, fixed, residual_tol=RESIDUAL_TOL,
                           radius_tol=1e-12, return_lambda=False):
    """Masses that make a ring-symmetric ``shape`` a central configuration.

    ``rings`` partitions the body indices; every body of a ring gets the same
    mass. ``fixed`` maps ring index -> known mass (at least one entry). By the
    ring symmetry, the central-configuration condition on one body per ring
    reduces to a single radial equation

        sum_j m_j (q_i - q_j) . q_i / (|q_i| |q_i - q_j|^3) = lam |q_i|

    which is linear in the unknown ring masses and ``lam``. Rings sitting at
    the origin give no equation. The solution is verified through the full
    gradient residual.
    """
    P = nbody.as_positions(shape)
    n = len(P)
    rings = [list(map(int, ring)) for ring in rings]
    if sorted(i for ring in rings for i in ring) != list(range(n)):
        raise ValueError("rings must partition the bodies")
    if not fixed:
        raise ValueError("at least one ring mass must be fixed")
    for k, mk in fixed.items():
        if not mk > 0:
            raise InvalidMasses(f"fixed mass of ring {k} is not positive")
    scale = max(1.0, float(np.abs(P).max()))
    radii = np.linalg.norm(P, axis=1)
    for k, ring in enumerate(rings):
        spread = radii[ring].max() - radii[ring].min()
        if spread > radius_tol * scale:
            raise AsymmetricShape(f"ring {k} radii vary by {spread:.2e}")

    free, A, b = _ring_equations(P, rings, fixed, radius_tol * scale)
    if A.shape[0] < A.shape[1] or np.linalg.matrix_rank(A) < A.shape[1]:
        raise MassSolveFailed("ring equations are singular")
    x = np.linalg.lstsq(A, b, rcond=None)[0]

    ring_mass = dict(fixed)
    for k, val in zip(free, x[:-1]):
        ring_mass[k] = float(val)
    masses = np.empty(n)
    for k, ring in enumerate(rings):
        masses[ring] = ring_mass[k]
    if not np.all(masses > 0):
        raise MassSolveFailed(f"solved masses are not all positive: {ring_mass}")
    ctx = nbody.AugmentedPotential(masses, float(x[-1]))
    res = spectral.critical_residual(P, ctx)
    if not res <= residual_tol:
        raise MassSolveFailed(f"solved masses leave residual {res:.3e}; "
                              "shape lacks the assumed ring symmetry")
    return (masses, float(x[-1])) if return_lambda else masses


# -- two nested squares ---------------------------------------------------------------

TWO_SQUARES_RINGS = ([0, 1, 2, 3], [4, 5, 6, 7])


def two_squares_positions(r) -> np.ndarray:
    """Unit outer square (bodies 1-4) and inner square of circumradius ``r``."""
    a = math.sqrt(2) / 2 * r
    return np.array([-0.5, -0.5, 0.5, -0.5, 0.5, 0.5, -0.5, 0.5,
                     -a, -a, a, -a, a, a, -a, a])


def two_squares_mass_raw(r) -> float:
    """Outer-square mass from the ring equations, without a positivity check."""
    P = nbody.as_positions(two_squares_positions(r))
    _, A, b = _ring_equations(P, TWO_SQUARES_RINGS, {1: 1.0}, 1e-12)
    return float(np.linalg.solve(A, b)[0])


def _wedge(a, b):
    return a[0] * b[1] - a[1] * b[0]


def two_squares_mass_closed_form(r, labeling="printed") -> float:
    """``M_r = -B(r) / A(r)`` from the published rational expression.

    ``labeling="printed"`` indexes bodies in the order of the family vector
    (outer square first); ``"swapped"`` puts the inner square first. Only the
    printed order reproduces the balancing mass of the outer square.
    """
    P = nbody.as_positions(two_squares_positions(r))
    if labeling == "swapped":
        P = np.vstack([P[4:], P[:4]])
    elif labeling != "printed":
        raise ValueError(f"unknown labeling {labeling!r}")

    def R(i, j):
        return 1.0 / np.linalg.norm(P[i - 1] - P[j - 1]) ** 3

    def D(i, j, k):
        return _wedge(P[i - 1] - P[j - 1], P[i - 1] - P[k - 1])

    A = ((R(1, 2) - R(1, 5)) * D(1, 5, 2) + (R(1, 3) - R(1, 6)) * D(1, 6, 3)
         + (R(1, 7) - R(1, 2)) * D(1, 7, 2))
    B = ((R(6, 7) - R(1, 5)) * D(1, 5, 6) + (R(1, 7) - R(6, 7)) * D(5, 6, 3)
         + (R(1, 6) - R(5, 7)) * D(1, 6, 8))
    return -B / A


@lru_cache(maxsize=None)
def locate_r0(lo=0.3, hi=0.45, tol=1e-10) -> float:
    """Upper end of the two-squares family: where the outer mass reaches 0."""
    f_lo, f_hi = two_squares_mass_raw(lo), two_squares_mass_raw(hi)
    if not (f_lo > 0 > f_hi):
        raise MassSolveFailed("outer mass does not change sign on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if two_squares_mass_raw(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def two_squares_point(r, residual_tol=RESIDUAL_TOL) -> FamilyPoint:
    r = float(r)
    if not 0 < r < locate_r0():
        raise OutOfRange(f"r = {r} outside (0, r0 = {locate_r0():.6f})")
    q = two_squares_positions(r)
    m = solve_balancing_masses(q, TWO_SQUARES_RINGS, {1: 1.0}, residual_tol)
    return make_point(r, q, m, residual_tol)


# -- 13-body rosette ------------------------------------------------------------------

ROSETTE_THETA = math.pi / 3
ROSETTE_RADIUS = 1.0
ROSETTE_RINGS = (list(range(6)), list(range(6, 12)), [12])

_S3, _S7 = math.sqrt(3), math.sqrt(7)


def rosette_positions(theta=ROSETTE_THETA, radius=ROSETTE_RADIUS) -> np.ndarray:
    """Hexagon of radius ``r cos(theta)``, a second hexagon rotated by pi/6 of
    radius ``r sin(theta)``, and one body at the origin."""
    r1, r2 = radius * math.cos(theta), radius * math.sin(theta)
    P = np.zeros((13, 2))
    for k in range(6):
        P[k] = nbody.rotation_matrix(2 * math.pi * k / 6) @ (r1, 0.0)
        P[6 + k] = nbody.rotation_matrix(math.pi / 6 + 2 * math.pi * k / 6) @ (r2, 0.0)
    return P.ravel()


def rosette_m2_closed_form(m0, m1) -> float:
    """Outer-hexagon mass from the published closed form (theta = pi/3, r = 1)."""
    den = -1862 * _S3 - 7203 + 810 * _S7 + 90 * _S7 * _S3
    return (-7644 * m0 + 6 * (81 * _S7 - 441 * _S3 + 9 * _S3 * _S7 - 147) * m1) / den


def rosette_point(m0, m1, residual_tol=RESIDUAL_TOL) -> FamilyPoint:
    m0, m1 = float(m0), float(m1)
    if not (m0 > 0 and m1 > 0):
        raise InvalidMasses(f"(m0, m1) = ({m0}, {m1}) must be positive")
    q = rosette_positions()
    try:
        m = solve_balancing_masses(q, ROSETTE_RINGS, {0: m1, 2: m0}, residual_tol)
    except MassSolveFailed as exc:
        raise InvalidMasses(f"no positive m2 at (m0, m1) = ({m0}, {m1}): {exc}") from exc
    return make_point((m0, m1), q, m, residual_tol)


# -- one-parameter families -----------------------------------------------------------

@dataclass(frozen=True)
class TwoSquaresFamily:
    name = "two-squares"

    def __call__(self, r):
        return two_squares_point(r)


@dataclass(frozen=True)
class RosetteSlice:
    """The rosette with ``m0`` frozen; the parameter is ``m1``."""

    m0: float
    name = "rosette"

    def __call__(self, m1):
        return rosette_point(self.m0, m1)


# -- CSV families -----------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def family_csv_rows(points):
    for p in points:
        par = p.parameter[-1] if isinstance(p.parameter, tuple) else p.parameter
        yield [_fmt(par)] + [_fmt(v) for v in p.positions] + [_fmt(v) for v in p.masses]


def csv_family_dump(points, path=None, header_lines=()):
    """Write points as ``parameter, x1, y1, ..., xN, yN, m1, ..., mN`` rows.

    Floats use their shortest round-tripping repr, so a dump reloads exactly.
    A 2D parameter is written as its last coordinate. Returns the text.
    """
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(family_csv_rows(points))
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def csv_family_load(path, residual_tol=RESIDUAL_TOL):
    """Read and validate a CSV family; each row must be central.

    Raises ParseError for malformed rows and NotCentral (with the 1-based
    row number) for rows whose gradient residual exceeds ``residual_tol``.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    points = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from exc
        if len(vals) < 7 or (len(vals) - 1) % 3:
            raise ParseError(f"row {lineno}: expected 1 + 3N columns, got {len(vals)}")
        n = (len(vals) - 1) // 3
        q = np.array(vals[1:1 + 2 * n])
        try:
            m = nbody.as_masses(vals[1 + 2 * n:], n)
            lam = nbody.lambda_of(q, m)
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from exc
        point = FamilyPoint(vals[0], q, m, lam)
        res = point.residual()
        if not res <= residual_tol:
            raise NotCentral(lineno, res)
        points.append(point)
    if not points:
        raise ParseError(f"{path}: no data rows")
    return points
