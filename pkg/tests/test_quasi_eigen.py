#!/usr/bin/env python3
"""
Quasi-eigenvalue tests
Root finding with multiplicities, nu_j indexing and the asymptotic comparison.
"""

import math
import os
import sys

import numpy as np
import pytest

# project root on the import path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.geometry.polygon import BoundaryData
from src.geometry.shapes import random_convex_polygon, rectangle, thirty_sixty_ninety
from src.spectral.char_poly import TrigPoly, build_charpoly, smooth_charpoly
from src.spectral.quasi_eigen import (
    asymptotic_compare,
    epsilon_ceiling,
    find_roots,
    nu,
    quasi_spectrum_for,
)
from src.utils.errors import PolygonDataError

TWO_PI = 2 * math.pi


def thirty_sixty_ninety_roots(t_max: float) -> list[float]:
    """cos(3t) cos(sqrt(3) t) vanishes at pi/6 + k pi/3 and at (pi/2 + j pi)/sqrt(3)."""
    first = [math.pi / 6 + k * math.pi / 3 for k in range(40)]
    second = [(math.pi / 2 + j * math.pi) / math.sqrt(3) for j in range(40)]
    return sorted(v for v in first + second if v <= t_max)


class TestFindRoots:
    """Roots and multiplicities on known polynomials"""

    def test_smooth_domain(self):
        print("\n=== cos t - 1 ===")
        spectrum = find_roots(TrigPoly(((1, 1),), -1), 13.0)
        print(f"🔧 roots={spectrum.roots}")

        assert spectrum.values == pytest.approx([0.0, TWO_PI, TWO_PI, 2 * TWO_PI, 2 * TWO_PI], abs=1e-9)
        assert spectrum.roots[0].source == "zero"
        assert spectrum.roots[0].multiplicity == 2
        assert all(r.source == "tangential" for r in spectrum.roots[1:])
        print("✅ double roots at 0, 2 pi, 4 pi")

    def test_double_roots_away_from_zero(self):
        spectrum = find_roots(TrigPoly(((1, 1),), 1), 10.0)
        assert spectrum.values == pytest.approx([math.pi, math.pi, 3 * math.pi, 3 * math.pi], abs=1e-9)

    def test_simple_roots(self):
        p = TrigPoly(((1.0, 1.0),), 0.0)
        spectrum = find_roots(p, 5.0)

        assert spectrum.values == pytest.approx([math.pi / 2, 3 * math.pi / 2], abs=1e-10)
        for root in spectrum.roots:
            assert root.multiplicity == 1
            assert root.source == "sign-change"
            assert abs(p.evaluate(root.value)) < 1e-10

    def test_square_quadruple_roots(self):
        print("\n=== unit square ===")
        p = build_charpoly(BoundaryData.from_rational([1, 1, 1, 1], ["1/2"] * 4))
        spectrum = find_roots(p, 5.0)

        assert [r.multiplicity for r in spectrum.roots] == [4, 4], f"got {spectrum.roots}"
        assert spectrum.values == pytest.approx([math.pi / 2] * 4 + [3 * math.pi / 2] * 4, abs=1e-9)
        print("✅ pi/2 and 3 pi/2, four times each")

    def test_thirty_sixty_ninety(self):
        p = build_charpoly(thirty_sixty_ninety())
        spectrum = find_roots(p, 9.0)
        assert spectrum.values == pytest.approx(thirty_sixty_ninety_roots(9.0), abs=1e-10)

    def test_scale_covariance(self):
        p = build_charpoly(thirty_sixty_ninety())
        base = find_roots(p, 9.0).values
        scaled = find_roots(p.scaled(2.0), 4.5).values
        assert scaled == pytest.approx([v / 2 for v in base], abs=1e-10)

    def test_weyl_count(self):
        rng = np.random.default_rng(7)
        for n in (3, 4, 5, 6):
            data = random_convex_polygon(n, rng)
            t_max = 200.0
            count = len(find_roots(build_charpoly(data), t_max))
            expected = data.perimeter * t_max / math.pi
            assert abs(count - expected) <= 2 * n + 2, f"n={n}: {count} roots, Weyl predicts {expected:.1f}"

    def test_empty_polynomial(self):
        with pytest.raises(PolygonDataError, match="empty"):
            find_roots(TrigPoly((), 1.0), 5.0)

    def test_nonpositive_t_max(self):
        with pytest.raises(PolygonDataError):
            find_roots(TrigPoly(((1.0, 1.0),), 0.0), 0.0)


class TestNu:
    """j-th quasi-eigenvalue with the root at zero counted half"""

    def test_disk_like(self):
        spectrum = find_roots(smooth_charpoly(1.0), 13.0)
        assert nu(spectrum, 0) == 0.0
        assert nu(spectrum, 1) == pytest.approx(TWO_PI, abs=1e-9)
        assert nu(spectrum, 2) == pytest.approx(TWO_PI, abs=1e-9)

    def test_square_has_no_zero_root(self):
        spectrum = find_roots(build_charpoly(rectangle(1.0, 1.0)), 5.0)
        assert nu(spectrum, 0) == pytest.approx(math.pi / 2, abs=1e-9)
        assert nu(spectrum, 3) == pytest.approx(math.pi / 2, abs=1e-9)
        assert nu(spectrum, 4) == pytest.approx(3 * math.pi / 2, abs=1e-9)

    def test_out_of_range(self):
        spectrum = find_roots(smooth_charpoly(1.0), 13.0)
        with pytest.raises(PolygonDataError, match="extend t_max"):
            nu(spectrum, 10)
        with pytest.raises(PolygonDataError):
            nu(spectrum, -1)

    def test_quasi_spectrum_for(self):
        values = quasi_spectrum_for(rectangle(1.0, 1.0), 8)
        assert values == pytest.approx([math.pi / 2] * 4 + [3 * math.pi / 2] * 4, abs=1e-9)


class TestAsymptoticCompare:
    """sigma_j - nu_j and the fitted decay exponent"""

    @pytest.fixture
    def square(self):
        return rectangle(1.0, 1.0)

    def test_epsilon_ceiling(self):
        assert epsilon_ceiling([math.pi / 3] * 3) == pytest.approx(0.25)
        assert epsilon_ceiling([2 * math.pi / 3] * 6) == pytest.approx(0.25)
        assert epsilon_ceiling([3 * math.pi / 4] * 4) == pytest.approx(1 / 6)

    def test_fitted_exponent(self, square):
        print("\n=== synthetic power-law differences ===")
        nu_values = [0.5 * j for j in range(32)]
        sigma = [v + 0.1 * max(j, 1) ** -0.5 for j, v in enumerate(nu_values)]
        report = asymptotic_compare(sigma, square, nu=nu_values)
        print(f"🔧 epsilon_hat={report.epsilon_hat} over {report.fit_indices}")

        assert report.epsilon_hat == pytest.approx(0.5, abs=1e-9)
        assert report.fit_indices[0] == 16, "fit starts at the top half"
        assert report.epsilon_ceiling == pytest.approx(0.25)
        print("✅ exponent recovered")

    def test_explicit_fit_window(self, square):
        nu_values = [0.5 * j for j in range(33)]
        sigma = [v + 0.2 * max(j, 1) ** -1.5 for j, v in enumerate(nu_values)]
        report = asymptotic_compare(sigma, square, nu=nu_values, fit_start=8)
        assert report.fit_indices == tuple(range(8, 33))
        assert report.epsilon_hat == pytest.approx(1.5, abs=1e-9)

    def test_vanishing_differences(self, square):
        values = [0.5 * j for j in range(20)]
        report = asymptotic_compare(values, square, nu=values)
        assert report.epsilon_hat is None
        assert "vanish" in report.note

    def test_too_few_indices(self, square):
        report = asymptotic_compare([1.0, 2.0, 3.0, 4.0], square, nu=[0.9, 1.9, 2.9, 3.9])
        assert report.epsilon_hat is None
        assert "fewer than 2" in report.note

    def test_rejects_bad_input(self, square):
        with pytest.raises(PolygonDataError, match="empty"):
            asymptotic_compare([], square, nu=[])
        with pytest.raises(PolygonDataError, match="ascending"):
            asymptotic_compare([2.0, 1.0], square, nu=[1.0, 2.0])
        with pytest.raises(PolygonDataError):
            asymptotic_compare([1.0, 2.0], square, nu=[1.0])
