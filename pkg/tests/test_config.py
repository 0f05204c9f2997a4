#!/usr/bin/env python3
"""
Configuration and helper tests
Presets, environment overrides, the thread pool map and refinement retries.
"""

import os
import re
import sys
from pathlib import Path

import pytest

# project root on the import path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.config.steklov_config import (
    DEFAULT_CONFIG,
    FINE_CONFIG,
    QUICK_CONFIG,
    FemConfig,
    SteklovConfig,
    get_config,
)
from src.utils.errors import NumericalError
from src.utils.parallel import parallel_map
from src.utils.retry_helper import retry_with_refinement


class TestConfigPresets:
    """Preset selection and derived copies"""

    def test_presets_by_name(self):
        print("\n=== configuration presets ===")
        for name, expected in [("default", DEFAULT_CONFIG), ("fine", FINE_CONFIG), ("quick", QUICK_CONFIG)]:
            config = get_config(name)
            print(f"🔧 {name}: mesh_h={config.fem.mesh_h}, levels={config.fem.levels}, "
                  f"geometry_tol={config.tolerances.geometry_tol}")
            assert config is expected
        print("✅ presets resolved")

    def test_preset_differences(self):
        assert FINE_CONFIG.fem.mesh_h < DEFAULT_CONFIG.fem.mesh_h < QUICK_CONFIG.fem.mesh_h
        assert FINE_CONFIG.tolerances.geometry_tol < DEFAULT_CONFIG.tolerances.geometry_tol
        assert QUICK_CONFIG.fem.max_refine_retries == 3

    def test_unknown_name_falls_back(self):
        assert get_config("nonexistent") is DEFAULT_CONFIG

    def test_environment_selects_preset(self, monkeypatch):
        monkeypatch.setenv("STEKLOV_CONFIG", "quick")
        assert get_config() is QUICK_CONFIG
        monkeypatch.delenv("STEKLOV_CONFIG")
        assert get_config() is DEFAULT_CONFIG

    def test_thread_override(self, monkeypatch):
        monkeypatch.setenv("STEKLOV_THREADS", "3")
        assert SteklovConfig().threads == 3
        monkeypatch.setenv("STEKLOV_THREADS", "many")
        assert SteklovConfig().threads == 1
        assert SteklovConfig(threads=2).threads == 2

    def test_sections_filled(self):
        config = SteklovConfig()
        assert config.tolerances is not None
        assert config.roots.head_exclude == 8
        assert config.fem.min_angle_deg == 20.0
        assert config.enumeration.ngon_delta_fraction == 0.5

    def test_with_tolerance(self):
        loose = DEFAULT_CONFIG.with_tolerance(1e-6)
        assert loose.tolerances.geometry_tol == 1e-6
        assert loose.tolerances.classify_tol == 1e-6
        assert loose.tolerances.commensurability_tol == 1e-6
        assert loose.tolerances.charpoly_match_tol == 1e-6
        assert DEFAULT_CONFIG.tolerances.geometry_tol == 1e-9, "the preset itself is untouched"
        tight = DEFAULT_CONFIG.with_tolerance(1e-12)
        assert tight.tolerances.charpoly_match_tol == DEFAULT_CONFIG.tolerances.charpoly_match_tol


class TestParallelMap:
    """Order-preserving map"""

    @pytest.mark.parametrize("workers", [1, 4])
    def test_order(self, workers):
        assert parallel_map(lambda x: x * x, range(20), workers) == [x * x for x in range(20)]

    def test_empty(self):
        assert parallel_map(str, [], 4) == []


class TestRetryWithRefinement:
    """Mesh-size retries"""

    @pytest.fixture
    def flaky(self):
        """Fails until h drops to 0.25 or below; records every h it sees."""
        seen = []

        @retry_with_refinement(max_retries=3, factor=0.5)
        def solve(value, *, h, config=None):
            seen.append(h)
            if h > 0.25:
                raise NumericalError(f"mesh too coarse at h={h}")
            return value * h

        return solve, seen

    def test_halves_until_success(self, flaky):
        solve, seen = flaky
        assert solve(8.0, h=1.0) == 2.0
        assert seen == [1.0, 0.5, 0.25]

    def test_requires_keyword(self, flaky):
        solve, _ = flaky
        with pytest.raises(TypeError):
            solve(1.0, 1.0)

    def test_reraises_last_error(self, flaky):
        solve, seen = flaky
        with pytest.raises(NumericalError, match="h=0.5"):
            solve(1.0, h=4.0)
        assert seen == [4.0, 2.0, 1.0, 0.5]

    def test_config_overrides_retry_count(self, flaky):
        solve, seen = flaky
        config = SteklovConfig(fem=FemConfig(max_refine_retries=0))
        with pytest.raises(NumericalError):
            solve(1.0, h=0.5, config=config)
        assert seen == [0.5]

    def test_other_errors_pass_through(self):
        @retry_with_refinement()
        def broken(*, h):
            raise ValueError("not a mesh problem")

        with pytest.raises(ValueError):
            broken(h=1.0)


class TestSourceText:
    """Code comments and docstrings share one language"""

    def test_no_hangul_in_sources(self):
        root = Path(__file__).resolve().parent.parent
        hangul = re.compile("[\\uac00-\\ud7a3]")
        offenders = [
            f"{path.relative_to(root)}:{number}"
            for folder in ("src", "tests")
            for path in sorted((root / folder).rglob("*.py"))
            for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1)
            if hangul.search(line)
        ]
        assert offenders == [], f"non-English text in {offenders}"
