#!/usr/bin/env python3
"""
Characteristic polynomial tests
Exact rational expansions, float canonicalization and the invariances of the polynomial.
"""

import itertools
import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# project root on the import path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.geometry.polygon import BoundaryData, DihedralLabeling, all_labelings, congruent
from src.geometry.reconstruction import EdgeSplitData, OneParamFamily, deformation_sweep, edge_split_solve
from src.geometry.shapes import (
    parallelogram,
    random_convex_polygon,
    rectangle,
    regular_polygon,
    symmetric_odd_quadrilateral,
    thirty_sixty_ninety,
)
from src.spectral.char_poly import (
    TrigPoly,
    build_charpoly,
    c_of_angle,
    c_of_angle_pi,
    canonicalize,
    charpoly_distance,
    equal_charpoly,
    expansion_terms,
    reduced_charpoly_check,
    smooth_charpoly,
)
from src.utils.errors import IndeterminateError, PolygonDataError


def brute_force_value(data: BoundaryData, t: float) -> float:
    """Direct sum over every sign vector with a leading +1."""
    n = data.n
    c = [c_of_angle(a) for a in data.angles]
    total = -math.prod(math.sin(math.pi ** 2 / (2 * a)) for a in data.angles)
    for tail in itertools.product((1, -1), repeat=n - 1):
        xi = (1,) + tail
        coefficient = math.prod(c[j] for j in range(n) if xi[j] != xi[(j + 1) % n])
        total += coefficient * math.cos(abs(sum(x * l for x, l in zip(xi, data.lengths))) * t)
    return total


class TestAngleFactors:
    """c(alpha) = cos(pi^2 / (2 alpha))"""

    def test_float_values(self):
        assert c_of_angle(math.pi / 2) == pytest.approx(-1.0, abs=1e-15)
        assert abs(c_of_angle(math.pi / 3)) < 1e-15, "pi/3 is an odd angle"
        assert c_of_angle(2 * math.pi / 3) == pytest.approx(-math.sqrt(2) / 2, abs=1e-15)

    def test_exact_values(self):
        assert c_of_angle_pi(Fraction(1, 2)) == -1
        assert c_of_angle_pi(Fraction(1, 3)) == 0
        assert c_of_angle_pi(Fraction(1, 4)) == 1
        assert c_of_angle_pi(Fraction(1, 6)) == -1

    @pytest.mark.parametrize("alpha", [0.0, math.pi, -1.0, 4.0])
    def test_out_of_range(self, alpha):
        with pytest.raises(PolygonDataError):
            c_of_angle(alpha)


class TestExactCharpoly:
    """Rational inputs give exact canonical polynomials"""

    @pytest.fixture
    def unit_square(self):
        """Unit square with exact lengths and angles"""
        return BoundaryData.from_rational([1, 1, 1, 1], ["1/2"] * 4)

    def test_square(self, unit_square):
        print("\n=== unit square ===")
        p = build_charpoly(unit_square)
        print(f"🔧 terms={p.terms} constant={p.constant}")

        assert p.is_exact, "rational input should stay exact"
        assert p.terms == ((2, 4), (4, 1)), f"unexpected terms {p.terms}"
        assert p.constant == 3
        assert all(type(f) is int and type(a) is int for f, a in p.terms), "integral values render as int"
        print("✅ 4 cos 2t + cos 4t + 3")

    def test_equilateral_triangle(self):
        data = BoundaryData.from_rational(["1/3"] * 3, ["1/3"] * 3)
        p = build_charpoly(data)

        assert p.terms == ((1, 1),)
        assert p.constant == 1

    def test_exact_mode_needs_rational_lengths(self):
        with pytest.raises(PolygonDataError, match="rational lengths"):
            build_charpoly(regular_polygon(4), exact=True)

    def test_isospectral_parallelograms(self):
        first = BoundaryData.from_rational(["3/10", "1/5", "3/10", "1/5"], ["4/5", "1/5", "4/5", "1/5"])
        second = BoundaryData.from_rational(["7/20", "3/20", "7/20", "3/20"], ["4/5", "1/5", "4/5", "1/5"])

        assert build_charpoly(first) == build_charpoly(second), "odd angles hide the side split"
        assert not congruent(first, second)


class TestFloatCharpoly:
    """Float expansion against an independent sum and its invariances"""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(20240611)

    def test_square_float(self):
        p = build_charpoly(rectangle(1.0, 1.0))
        expected = TrigPoly(((2.0, 4.0), (4.0, 1.0)), 3.0)
        assert equal_charpoly(p, expected, 1e-12), f"got {p}"

    def test_equilateral_float(self):
        p = build_charpoly(regular_polygon(3, 1.0))
        assert equal_charpoly(p, TrigPoly(((1.0, 1.0),), 1.0), 1e-12)

    def test_thirty_sixty_ninety(self):
        data = thirty_sixty_ninety()
        p = build_charpoly(data)
        root3 = math.sqrt(3)

        assert p.constant == 0.0, "sin(3 pi) kills the constant"
        assert equal_charpoly(p, TrigPoly(((3 - root3, 1.0), (3 + root3, 1.0)), 0.0), 1e-12)
        for t in np.linspace(0.0, 10.0, 41):
            assert p.evaluate(t) == pytest.approx(brute_force_value(data, t), abs=1e-12)

    def test_matches_brute_force(self, rng):
        print("\n=== expansion vs direct sum ===")
        for n in range(3, 8):
            data = random_convex_polygon(n, rng)
            p = build_charpoly(data)
            for t in rng.uniform(0.0, 60.0, size=8):
                assert p.evaluate(t) == pytest.approx(brute_force_value(data, t), abs=1e-10), f"n={n}, t={t}"
        print("✅ canonical polynomial equals the direct sum")

    def test_value_at_zero(self, rng):
        data = random_convex_polygon(6, rng)
        terms, constant = expansion_terms(data)
        total = math.fsum(a for _, a in terms) + constant

        assert build_charpoly(data).evaluate(0.0) == pytest.approx(total, rel=1e-12, abs=1e-12)

    def test_top_frequency_is_perimeter(self, rng):
        for n in range(3, 9):
            data = random_convex_polygon(n, rng, perimeter=2.5)
            p = build_charpoly(data)
            f, a = p.terms[-1]
            assert f == pytest.approx(2.5, rel=1e-12)
            assert a == pytest.approx(1.0, abs=1e-14)

    def test_dihedral_invariance(self, rng):
        data = random_convex_polygon(5, rng)
        p = build_charpoly(data)
        for labeling in all_labelings(data.n):
            moved = build_charpoly(labeling.apply(data))
            assert equal_charpoly(moved, p, 1e-10), f"{labeling} changed the polynomial"

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), factor=st.floats(0.1, 10.0))
    def test_scale_covariance(self, seed, factor):
        data = random_convex_polygon(5, np.random.default_rng(seed))
        scaled = build_charpoly(data.scaled(factor))
        assert equal_charpoly(scaled, build_charpoly(data).scaled(factor), 1e-8)

    def test_even_function(self, rng):
        p = build_charpoly(random_convex_polygon(4, rng))
        for t in (0.3, 1.7, 12.0):
            assert p.evaluate(-t) == pytest.approx(p.evaluate(t), abs=1e-14)

    def test_parallelograms_with_pi_over_five(self):
        first = parallelogram(0.3, 0.2, 4 * math.pi / 5)
        second = parallelogram(0.35, 0.15, 4 * math.pi / 5)
        assert equal_charpoly(build_charpoly(first), build_charpoly(second), 1e-10)


class TestCanonicalize:
    """Merging, folding and dropping terms"""

    def test_merges_close_frequencies(self):
        p = canonicalize(TrigPoly(((2.0, 1.0), (2.0 + 1e-12, 1.0))))
        assert len(p.terms) == 1
        assert p.terms[0][0] == pytest.approx(2.0)
        assert p.terms[0][1] == pytest.approx(2.0)

    def test_folds_zero_frequency(self):
        p = canonicalize(TrigPoly(((1e-13, 5.0), (1.0, 1.0)), 1.0))
        assert p.constant == pytest.approx(6.0)
        assert len(p.terms) == 1

    def test_drops_tiny_coefficients(self):
        p = canonicalize(TrigPoly(((3.0, 1e-15), (4.0, 1.0)), 0.0))
        assert p.terms == ((4.0, 1.0),)

    def test_exact_merge_only_when_equal(self):
        p = canonicalize(TrigPoly(((Fraction(1, 2), 1), (Fraction(1, 2), 2), (Fraction(3, 4), 1)), 0))
        assert p.terms == ((Fraction(1, 2), 3), (Fraction(3, 4), 1))

    def test_idempotent(self):
        p = build_charpoly(regular_polygon(6))
        assert canonicalize(p) == p


class TestSmoothAndComparison:
    """Smooth-domain polynomial and polynomial comparison"""

    def test_smooth_charpoly(self):
        p = smooth_charpoly(2 * math.pi)
        assert p.terms == ((2 * math.pi, 1),)
        assert p.constant == -1

    def test_smooth_charpoly_rejects_nonpositive(self):
        with pytest.raises(PolygonDataError):
            smooth_charpoly(0)

    def test_triangle_is_not_smooth(self):
        assert not equal_charpoly(build_charpoly(regular_polygon(3)), smooth_charpoly(1.0))

    def test_distance(self):
        p = TrigPoly(((1.0, 1.0), (2.0, 0.5)), 0.0)
        q = TrigPoly(((1.0, 1.0), (3.0, 0.25)), 0.1)
        assert charpoly_distance(p, q) == pytest.approx(0.5)
        assert charpoly_distance(p, p) == 0.0


class TestReducedCharpoly:
    """Odd vertices drop out of the polynomial up to the sign of the constant"""

    def test_thirty_sixty_ninety(self):
        check = reduced_charpoly_check(thirty_sixty_ninety())

        assert check.match, "reduced and full polynomials should agree"
        assert check.parity == -1
        assert check.constant_sign_flip

    def test_equilateral_reduces_to_smooth(self):
        check = reduced_charpoly_check(BoundaryData.from_rational(["1/3"] * 3, ["1/3"] * 3))
        assert check.match
        assert check.parity == -1

    def test_no_odd_vertices(self):
        data = BoundaryData((4.0, 5.0, 3.0), (math.atan2(3, 4), math.atan2(4, 3), math.pi / 2)).validate()
        check = reduced_charpoly_check(data)
        assert check.match
        assert check.parity == 1
        assert not check.constant_sign_flip

    def test_not_weakly_admissible(self):
        with pytest.raises(PolygonDataError):
            reduced_charpoly_check(BoundaryData.from_rational([1, 1, 1, 1], ["1/2"] * 4))

    def test_indeterminate_in_float(self):
        with pytest.raises(IndeterminateError):
            reduced_charpoly_check(rectangle(1.0, 1.0))


class TestDeformationInvariance:
    """Members of a one-parameter family share the polynomial"""

    def test_sweep_keeps_polynomial(self):
        print("\n=== deformation sweep ===")
        data = symmetric_odd_quadrilateral()
        family = edge_split_solve(EdgeSplitData.from_boundary(DihedralLabeling(0).apply(data), 3))
        assert isinstance(family, OneParamFamily), "equal Psi and Phi should give a family"

        base = build_charpoly(family.base)
        worst = 0.0
        for x, member in deformation_sweep(family, 21):
            worst = max(worst, charpoly_distance(build_charpoly(member), base))
        print(f"🔧 max drift {worst:.3e}")
        assert worst <= 1e-10, f"drift {worst}"
        print("✅ family is isospectral")
