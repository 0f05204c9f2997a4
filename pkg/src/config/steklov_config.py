"""
Steklov polygon toolkit configuration
Tolerance, root-finding, finite-element and enumeration settings
"""

import os
from dataclasses import dataclass, replace

from dotenv import load_dotenv

load_dotenv()


@dataclass
class ToleranceConfig:
    """Geometric and algebraic tolerances"""
    # geometry predicates are scaled by the perimeter
    geometry_tol: float = 1e-9
    # charpoly canonicalization (freq_tol is scaled by the perimeter)
    freq_tol: float = 1e-9
    coef_tol: float = 1e-12
    # odd/even angle detection against the nearest pi/k
    classify_tol: float = 1e-9
    # |{-1,0,1} combination of lengths| below this (times perimeter) is not certifiable
    commensurability_tol: float = 1e-9
    # candidate acceptance in the inverse enumerators
    charpoly_match_tol: float = 1e-8
    c_match_tol: float = 1e-8


@dataclass
class RootConfig:
    """Quasi-eigenvalue root finding"""
    samples_per_oscillation: int = 8
    touch_tol: float = 1e-8
    xtol: float = 1e-12
    max_derivative_order: int = 6
    # indices excluded from the asymptotic fit
    head_exclude: int = 8


@dataclass
class FemConfig:
    """Finite-element oracle settings"""
    # coarsest target edge length, relative to the perimeter
    mesh_h: float = 0.1
    levels: int = 3
    min_angle_deg: float = 20.0
    eigen_count: int = 6
    max_refine_retries: int = 2


@dataclass
class EnumerationConfig:
    """Inverse-spectral enumeration"""
    # fraction of the open delta_n limit used when a usable angle floor is needed
    ngon_delta_fraction: float = 0.5
    # FEM sigma_k overestimates; the floor uses this fraction of it
    weak_sigma_safety: float = 0.9


@dataclass
class SteklovConfig:
    """Complete toolkit configuration"""
    tolerances: ToleranceConfig | None = None
    roots: RootConfig | None = None
    fem: FemConfig | None = None
    enumeration: EnumerationConfig | None = None

    # worker threads for enumeration and mesh levels
    threads: int | None = None

    debug_mode: bool = False

    def __post_init__(self):
        if self.tolerances is None:
            self.tolerances = ToleranceConfig()
        if self.roots is None:
            self.roots = RootConfig()
        if self.fem is None:
            self.fem = FemConfig()
        if self.enumeration is None:
            self.enumeration = EnumerationConfig()
        if self.threads is None:
            self.threads = _threads_from_env()

    def with_tolerance(self, tol: float) -> "SteklovConfig":
        """Copy with every acceptance tolerance replaced by ``tol``."""
        tolerances = replace(
            self.tolerances,
            geometry_tol=tol,
            classify_tol=tol,
            commensurability_tol=tol,
            charpoly_match_tol=max(tol, self.tolerances.charpoly_match_tol),
        )
        return replace(self, tolerances=tolerances)


def _threads_from_env() -> int:
    raw = os.getenv("STEKLOV_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# default configuration instance
DEFAULT_CONFIG = SteklovConfig()

# tighter tolerances and a finer coarsest mesh
FINE_CONFIG = SteklovConfig(
    tolerances=ToleranceConfig(geometry_tol=1e-11, classify_tol=1e-11, commensurability_tol=1e-11),
    fem=FemConfig(mesh_h=0.05, eigen_count=10),
)

# coarse meshes for smoke runs
QUICK_CONFIG = SteklovConfig(
    fem=FemConfig(mesh_h=0.2, eigen_count=4, max_refine_retries=3),
)


def get_config(config_name: str | None = None) -> SteklovConfig:
    """Return a preset by name; ``STEKLOV_CONFIG`` picks it when no name is given"""
    configs = {
        "default": DEFAULT_CONFIG,
        "fine": FINE_CONFIG,
        "quick": QUICK_CONFIG,
    }
    if config_name is None:
        config_name = os.getenv("STEKLOV_CONFIG", "default")

    return configs.get(config_name, DEFAULT_CONFIG)
