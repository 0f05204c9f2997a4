#!/usr/bin/env python3
"""
Eigenvalue upper bound tests
Closed forms, hypothesis checks and the constants behind the angle floor.
"""

import math
import os
import sys

import pytest

# project root on the import path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.geometry.shapes import random_convex_polygon, rectangle, regular_polygon
from src.spectral.bounds import (
    PolarRectangle,
    angle_lower_bound,
    applicable_bounds,
    bound_convex_ngon,
    bound_isosceles_even,
    bound_passage,
    bound_polar_rectangle,
    bound_rectangle,
    bound_thin_ngon,
    bound_triangle_min_angle,
    convex_ngon_constants,
    ngon_delta_limit,
    weinstock_bound,
)
from src.utils.errors import PolygonDataError

import numpy as np

PI = math.pi


class TestClosedForms:
    """Bounds with a known value"""

    def test_rectangle(self):
        assert bound_rectangle(1.0, 1.0, 1).value == pytest.approx(2 * PI ** 2)
        assert bound_rectangle(1.0, 1.0, 0).value == 0.0

    def test_polar_rectangle(self):
        assert bound_polar_rectangle(PolarRectangle(0.0, 1.0, 0.5), 1).value == pytest.approx(0.5 * PI ** 2)
        result = bound_polar_rectangle(PolarRectangle(1.0, 2.0, 0.1), 2)
        assert result.value == pytest.approx(1.2 * PI ** 2)
        assert result.extras["arc_form"] == pytest.approx(result.value, rel=1e-12)

    def test_passages(self):
        assert bound_passage("quad", 10.0, 1.0, 1).value == pytest.approx(2 * PI ** 3 / 49)
        assert bound_passage("tri", 10.0, 1.0, 1).value == pytest.approx(PI ** 3 / 64)

    def test_passage_hypotheses(self):
        quad = bound_passage("quad", 3.0, 1.0, 1)
        assert not quad.hypotheses_ok and quad.value is None
        assert "3w" in quad.hypothesis_report
        assert not bound_passage("tri", 2.0, 1.0, 1).hypotheses_ok

    def test_triangle_min_angle(self):
        result = bound_triangle_min_angle(0.1, 1.0, 1)
        assert result.value == pytest.approx(8 * math.sqrt(3) / 3 * PI ** 2 * 0.1)
        assert not bound_triangle_min_angle(PI / 3 + 0.01, 1.0, 1).hypotheses_ok

    def test_isosceles_at_equilateral(self):
        result = bound_isosceles_even(PI / 3, 1)
        assert result.index == 2
        assert result.value == pytest.approx(2 * PI ** 3)
        assert result.extras["simplified"] == pytest.approx(2 * PI ** 3)

    def test_isosceles_sharp_below_simplified(self):
        for alpha in np.linspace(0.01, PI / 3, 40):
            result = bound_isosceles_even(float(alpha), 3)
            assert result.value <= result.extras["simplified"] * (1 + 1e-12)

    def test_thin_ngon(self):
        assert bound_thin_ngon(10.0, 0.5, 4, 1).value == pytest.approx(9 * PI ** 3 / 30.25)
        assert not bound_thin_ngon(10.0, 2.0, 4, 1).hypotheses_ok

    def test_weinstock(self):
        assert weinstock_bound(2 * PI) == pytest.approx(1.0)


class TestNgonConstants:
    """delta_n, C_n and the angle floor"""

    def test_default_delta_sits_below_limit(self):
        for n in range(3, 13):
            constants = convex_ngon_constants(n)
            gap = ngon_delta_limit(n) - constants.delta
            assert 0.0 < gap <= 2e-12

    def test_constant_formula(self):
        n, delta = 5, 0.03
        expected = (n - 1) ** 2 * PI ** 3 / (0.98 * (0.5 - (3 * n - 2) * delta / 1.96) ** 2)
        assert convex_ngon_constants(n, delta).C == pytest.approx(expected, rel=1e-12)

    def test_constant_grows_with_n(self):
        values = [convex_ngon_constants(n, 0.5 * ngon_delta_limit(n)).C for n in range(3, 13)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_delta_out_of_range(self):
        with pytest.raises(PolygonDataError):
            convex_ngon_constants(4, ngon_delta_limit(4))
        with pytest.raises(PolygonDataError):
            convex_ngon_constants(4, 0.0)

    def test_bound_needs_small_angle(self):
        assert not bound_convex_ngon(4, PI / 2, 4.0, 1).hypotheses_ok
        result = bound_convex_ngon(4, 0.01, 4.0, 1)
        assert result.hypotheses_ok
        assert result.value == pytest.approx(result.extras["C"] * 0.01 / 4.0)

    def test_angle_floor_inverts_bound(self):
        n, L, k = 5, 2.0, 2
        delta = 0.5 * ngon_delta_limit(n)
        C = convex_ngon_constants(n, delta).C
        sigma = 0.1 * delta * C * k ** 2 / L
        floor = angle_lower_bound(n, sigma, L, k, delta)
        assert floor * C * k ** 2 / L == pytest.approx(sigma)
        assert angle_lower_bound(n, 0.0, L, k, delta) == 0.0
        assert angle_lower_bound(n, 1e12, L, k, delta) == delta

    def test_angle_floor_arguments(self):
        with pytest.raises(PolygonDataError):
            angle_lower_bound(4, 1.0, 1.0, 0)
        with pytest.raises(PolygonDataError):
            angle_lower_bound(4, -1.0, 1.0, 1)


class TestApplicableBounds:
    """Bounds read off a polygon's geometry"""

    def test_square(self):
        results = applicable_bounds(rectangle(1.0, 1.0), 1)
        formulas = {r.formula for r in results}
        assert {"rectangle", "disk_sector", "passage_tri", "thin_ngon", "convex_ngon"} <= formulas
        rect = [r for r in results if r.formula == "rectangle"]
        assert all(r.value == pytest.approx(2 * PI ** 2) for r in rect)

    def test_equilateral_even_index(self):
        formulas = {r.formula for r in applicable_bounds(regular_polygon(3), 2)}
        assert {"triangle_min_angle", "isosceles_even"} <= formulas

    def test_failed_hypotheses_carry_no_value(self):
        for r in applicable_bounds(random_convex_polygon(5, np.random.default_rng(4)), 1):
            assert (r.value is None) == (not r.hypotheses_ok)

    def test_homogeneity(self):
        print("\n=== bounds under scaling ===")
        data = random_convex_polygon(5, np.random.default_rng(17))
        base = applicable_bounds(data, 2)
        doubled = applicable_bounds(data.scaled(2.0), 2)
        assert [r.formula for r in base] == [r.formula for r in doubled]
        for a, b in zip(base, doubled):
            if a.hypotheses_ok:
                assert b.value == pytest.approx(a.value / 2.0, rel=1e-9), a.formula
        print("✅ every bound halves when the polygon doubles")

    def test_invalid_inputs(self):
        with pytest.raises(PolygonDataError):
            PolarRectangle(1.0, 0.5, 0.3)
        with pytest.raises(PolygonDataError):
            bound_passage("pentagon", 1.0, 0.1, 1)
        with pytest.raises(PolygonDataError):
            applicable_bounds(rectangle(1.0, 1.0), -1)
