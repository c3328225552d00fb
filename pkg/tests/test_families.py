import math

import mpmath
import numpy as np
import pytest

from ccbif import families, nbody
from ccbif.errors import (AsymmetricShape, InvalidMasses, MassSolveFailed,
                          NotCentral, OutOfRange, ParseError)

from conftest import R1


def m2_high_precision(m0, m1):
    mpmath.mp.dps = 50
    s3, s7 = mpmath.sqrt(3), mpmath.sqrt(7)
    den = -1862 * s3 - 7203 + 810 * s7 + 90 * s7 * s3
    num = -7644 * m0 + 6 * (81 * s7 - 441 * s3 + 9 * s3 * s7 - 147) * m1
    return float(num / den)


def test_two_squares_geometry():
    p = families.two_squares_point(0.2)
    P = p.positions.reshape(-1, 2)
    assert np.allclose(np.abs(P[:4]), 0.5)
    assert np.allclose(np.linalg.norm(P[4:], axis=1), 0.2, atol=1e-15)
    assert np.all(p.masses[:4] == p.masses[0]) and np.all(p.masses[4:] == 1.0)
    assert p.masses[0] > 0
    assert p.residual() <= 1e-9
    assert p.lam == nbody.lambda_of(p.positions, p.masses)


def test_mass_closed_form_labeling():
    for r in (0.1, 0.2, 0.3):
        M = families.two_squares_point(r).masses[0]
        assert families.two_squares_mass_closed_form(r) == pytest.approx(M, rel=1e-12)
        # the other ring assignment yields the reciprocal ratio instead
        swapped = families.two_squares_mass_closed_form(r, labeling="swapped")
        assert swapped == pytest.approx(1 / M, rel=1e-12)


def test_mass_vanishes_at_r0():
    grid = np.linspace(0.37, 0.38, 101)
    masses = np.array([families.two_squares_mass_raw(r) for r in grid])
    flips = np.nonzero(np.diff(np.sign(masses)))[0]
    assert len(flips) == 1
    r_flip = grid[flips[0]]
    assert abs(r_flip - families.R0_PUBLISHED) < 1e-4
    assert masses[flips[0]] > 0 > masses[flips[0] + 1]
    assert masses[flips[0]] < 1e-3
    assert families.locate_r0() == pytest.approx(families.R0_PUBLISHED, abs=5e-5)


def test_two_squares_out_of_range():
    for r in (0.0, -0.1, 0.3761, 0.5):
        with pytest.raises(OutOfRange):
            families.two_squares_point(r)


def test_rosette_geometry():
    p = families.rosette_point(1.0, 1.0)
    P = p.positions.reshape(-1, 2)
    r = np.linalg.norm(P, axis=1)
    assert np.allclose(r[:6], 0.5, atol=1e-15)
    assert np.allclose(r[6:12], math.sqrt(3) / 2, atol=1e-15)
    assert r[6] / r[0] == pytest.approx(math.sqrt(3), rel=1e-15)
    assert np.array_equal(P[12], [0.0, 0.0])
    assert p.masses[12] == 1.0 and np.all(p.masses[:6] == 1.0)
    assert p.residual() <= 1e-9


def test_rosette_m2_matches_high_precision_closed_form():
    p = families.rosette_point(1.0, 1.0)
    ref = m2_high_precision(1, 1)
    assert families.rosette_m2_closed_form(1.0, 1.0) == pytest.approx(ref, rel=1e-13)
    assert p.masses[6] == pytest.approx(ref, rel=1e-10)


def test_rosette_invalid_masses():
    with pytest.raises(InvalidMasses):
        families.rosette_point(-1.0, 1.0)
    with pytest.raises(InvalidMasses):
        families.rosette_point(1.0, 0.0)


@pytest.mark.parametrize("mass", [0.3, 1.0, 7.0])
def test_solver_equilateral_triangle(mass):
    q = np.array([nbody.rotation_matrix(2 * math.pi * k / 3) @ (1.0, 0.0) for k in range(3)])
    m, lam = families.solve_balancing_masses(q, [[0, 1, 2]], {0: mass},
                                             residual_tol=1e-12, return_lambda=True)
    assert list(m) == [mass] * 3
    assert lam == pytest.approx(nbody.lambda_of(q, m), rel=1e-14)
    ctx = nbody.AugmentedPotential(m, lam)
    assert np.linalg.norm(nbody.grad_phi(q, ctx)) <= 1e-12


def test_solver_rejects_asymmetric_ring():
    q = families.two_squares_positions(0.2).reshape(-1, 2).copy()
    q[0] *= 1.01
    with pytest.raises(AsymmetricShape):
        families.solve_balancing_masses(q, families.TWO_SQUARES_RINGS, {1: 1.0})


def test_solver_rejects_nonpositive_solution():
    with pytest.raises(MassSolveFailed):
        families.solve_balancing_masses(families.two_squares_positions(0.4),
                                        families.TWO_SQUARES_RINGS, {1: 1.0})


def test_solver_rejects_unbalanced_ring_shape():
    # equal radii but not a regular polygon: the tangential balance fails
    ang = [0.0, 0.5, 2.0, 4.0]
    q = np.array([[math.cos(a), math.sin(a)] for a in ang])
    with pytest.raises(MassSolveFailed):
        families.solve_balancing_masses(q, [[0, 1, 2, 3]], {0: 1.0})


def test_trivial_isotropy():
    assert families.has_trivial_isotropy(families.two_squares_positions(0.2))
    assert families.has_trivial_isotropy(families.rosette_positions())
    assert not families.has_trivial_isotropy(np.zeros(4))


def test_csv_family_two_body(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("# two bodies\n0.5,1,0,-1,0,1,1\n")
    (p,) = families.csv_family_load(path)
    assert p.lam == 0.25 and p.parameter == 0.5


def test_csv_family_rejects_noncentral_row(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("0.5,1,0,-1,0,1,1\n0.6,1,0,-1,0.2,1,1\n")
    with pytest.raises(NotCentral) as info:
        families.csv_family_load(path)
    assert info.value.row == 2 and info.value.residual > 1e-9


@pytest.mark.parametrize("text", ["", "a,b,c\n", "0.5,1,0,-1,0,1\n", "0.5,1,0,-1,0,1,-1\n"])
def test_csv_family_parse_errors(tmp_path, text):
    path = tmp_path / "f.csv"
    path.write_text(text)
    with pytest.raises(ParseError):
        families.csv_family_load(path)


def test_csv_family_roundtrip(tmp_path):
    pts = [families.two_squares_point(r) for r in np.linspace(0.1, 0.3, 7)]
    pts.append(families.two_squares_point(R1))
    path = tmp_path / "dump.csv"
    families.csv_family_dump(pts, path, header_lines=["test"])
    back = families.csv_family_load(path)
    assert len(back) == len(pts)
    for a, b in zip(pts, back):
        assert a.parameter == b.parameter
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.masses, b.masses)
        assert a.lam == b.lam
    assert families.csv_family_dump(back) == families.csv_family_dump(pts)


def test_family_point_json():
    doc = families.rosette_point(1.0, 2.0).to_json()
    assert doc["parameter"] == [1.0, 2.0]
    assert len(doc["positions"]) == 13 and len(doc["masses"]) == 13
    assert doc["residual"] <= 1e-9 and doc["lambda"] > 0
