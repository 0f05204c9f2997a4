"""
Quasi-eigenvalues: nonnegative roots of a characteristic polynomial

Key features:
- find_roots: bracketing on a grid of at least eight samples per fastest
  oscillation, then a derivative cascade that fixes every multiplicity
- nu: the j-th quasi-eigenvalue, with a root at 0 counted half
- asymptotic_compare: sigma_j - nu_j differences and their fitted decay exponent
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from src.config.steklov_config import DEFAULT_CONFIG, RootConfig, SteklovConfig
from src.geometry.polygon import BoundaryData
from src.spectral.char_poly import TrigPoly, build_charpoly
from src.utils.errors import PolygonDataError

logger = logging.getLogger(__name__)

RootSource = Literal["sign-change", "tangential", "zero", "unresolved"]


@dataclass(frozen=True)
class QuasiRoot:
    value: float
    multiplicity: int
    source: RootSource


@dataclass(frozen=True)
class QuasiSpectrum:
    roots: tuple[QuasiRoot, ...]
    t_max: float

    @property
    def values(self) -> list[float]:
        """Roots repeated by multiplicity; a root at 0 contributes half its multiplicity."""
        expanded: list[float] = []
        for root in self.roots:
            copies = root.multiplicity // 2 if root.value == 0.0 else root.multiplicity
            expanded.extend([root.value] * copies)
        return expanded

    def __len__(self) -> int:
        return len(self.values)


def _zero_root(p: TrigPoly, scales: list[float], cfg: RootConfig) -> QuasiRoot | None:
    # p is even, so only even-order derivatives can be nonzero at 0
    for order in range(0, cfg.max_derivative_order + 1, 2):
        if abs(p.derivative(0.0, order)) >= cfg.touch_tol * scales[order]:
            return None if order == 0 else QuasiRoot(0.0, order, "zero")
    multiplicity = cfg.max_derivative_order + 2
    logger.warning("root at 0 vanishes to every checked order; recorded with multiplicity %d", multiplicity)
    return QuasiRoot(0.0, multiplicity, "unresolved")


def _resolve_window(p: TrigPoly, lo: float, hi: float, step: float, scales: list[float],
                    cfg: RootConfig) -> QuasiRoot | None:
    """
    Derivative cascade on [lo, hi]: the first derivative order d whose sign
    changes locates a point where lower orders vanish; the first order above it
    that does not vanish there is the multiplicity.
    """
    sign_change = p.evaluate(lo) * p.evaluate(hi) < 0.0
    point: float | None = None
    window_lo, window_hi = lo, hi
    for order in range(cfg.max_derivative_order + 1):
        f_lo, f_hi = p.derivative(window_lo, order), p.derivative(window_hi, order)
        if f_lo * f_hi > 0.0:
            continue
        if f_lo == 0.0 or f_hi == 0.0:
            point = window_lo if f_lo == 0.0 else window_hi
        else:
            point = brentq(lambda t: p.derivative(t, order), window_lo, window_hi, xtol=cfg.xtol)
        if any(abs(p.derivative(point, j)) >= cfg.touch_tol * scales[j] for j in range(order)):
            return None
        if abs(p.derivative(point, order + 1)) >= cfg.touch_tol * scales[order + 1]:
            return QuasiRoot(float(point), order + 1, "sign-change" if sign_change else "tangential")
        window_lo = max(lo - step, point - step / 2)
        window_hi = min(hi + step, point + step / 2)

    if point is not None and all(abs(p.derivative(point, j)) < cfg.touch_tol * scales[j]
                                 for j in range(cfg.max_derivative_order + 1)):
        logger.warning("root near %.12g vanishes beyond derivative order %d; multiplicity unresolved",
                       point, cfg.max_derivative_order)
        return QuasiRoot(float(point), cfg.max_derivative_order + 1, "unresolved")
    return None


def find_roots(p: TrigPoly, t_max: float, config: SteklovConfig | None = None) -> QuasiSpectrum:
    """
    All roots of p in [0, t_max] with multiplicities.

    Args:
        p: canonicalized characteristic polynomial
        t_max: right end of the search interval
        config: root-finding settings (samples per oscillation, touch tolerance, xtol)

    Returns:
        QuasiSpectrum: roots in increasing order

    Raises:
        PolygonDataError: empty polynomial or non-positive t_max
    """
    cfg = (config or DEFAULT_CONFIG).roots
    if not p.terms:
        raise PolygonDataError("empty polynomial: no nonconstant terms")
    if not t_max > 0.0:
        raise PolygonDataError(f"t_max must be positive, got {t_max}")

    step = math.pi / (cfg.samples_per_oscillation * p.top_frequency)
    count = max(2, math.ceil(t_max / step) + 1)
    grid = np.linspace(0.0, t_max, count)
    step = float(grid[1] - grid[0])
    values = p.evaluate(grid)
    scales = [p.coefficient_scale(order) for order in range(cfg.max_derivative_order + 2)]
    near_zero = np.abs(values) < cfg.touch_tol * scales[0]

    roots: list[QuasiRoot] = []
    zero = _zero_root(p, scales, cfg)
    if zero is not None:
        roots.append(zero)

    windows: list[tuple[float, float]] = []
    last = len(grid) - 1
    for i in range(last):
        if not near_zero[i] and not near_zero[i + 1] and values[i] * values[i + 1] < 0.0:
            windows.append((grid[i], grid[i + 1]))
    for i in range(1, last + 1):
        left, right = grid[i - 1], grid[min(i + 1, last)]
        if near_zero[i]:
            windows.append((left, right))
        elif i < last and abs(values[i]) < abs(values[i - 1]) and abs(values[i]) <= abs(values[i + 1]) \
                and values[i - 1] * values[i] > 0.0 and values[i] * values[i + 1] > 0.0:
            windows.append((left, right))

    found = []
    for lo, hi in windows:
        root = _resolve_window(p, lo, hi, step, scales, cfg)
        if root is not None and 0.0 < root.value <= t_max + cfg.xtol:
            found.append(root)

    found.sort(key=lambda r: r.value)
    merge_tol = step * 1e-6
    for root in found:
        if roots and abs(root.value - roots[-1].value) <= merge_tol:
            continue
        roots.append(root)

    logger.debug("found %d distinct roots in [0, %.6g] (step %.3g)", len(roots), t_max, step)
    return QuasiSpectrum(tuple(roots), t_max)


def nu(spectrum: QuasiSpectrum, j: int) -> float:
    """The j-th quasi-eigenvalue (0-based)."""
    values = spectrum.values
    if j < 0:
        raise PolygonDataError(f"index must be nonnegative, got {j}")
    if j >= len(values):
        raise PolygonDataError(
            f"only {len(values)} quasi-eigenvalues in [0, {spectrum.t_max:.6g}]; extend t_max to reach index {j}"
        )
    return values[j]


def epsilon_ceiling(angles: Sequence[float]) -> float:
    """min({pi/(2 alpha) - 1/2} and 1/4): the largest decay exponent available for the polygon."""
    return min([math.pi / (2.0 * a) - 0.5 for a in angles] + [0.25])


@dataclass(frozen=True)
class AsymptoticReport:
    sigma: tuple[float, ...]
    nu: tuple[float, ...]
    differences: tuple[float, ...]
    epsilon_hat: float | None
    epsilon_ceiling: float
    fit_indices: tuple[int, ...]
    note: str = ""


def quasi_spectrum_for(data: BoundaryData, count: int, config: SteklovConfig | None = None) -> list[float]:
    """At least ``count`` quasi-eigenvalues, doubling t_max until they are reached."""
    p = build_charpoly(data, exact=False)
    t_max = math.pi * (count + 2) / p.top_frequency
    for _ in range(30):
        values = find_roots(p, t_max, config).values
        if len(values) >= count:
            return values[:count]
        t_max *= 2.0
    raise PolygonDataError(f"could not reach {count} quasi-eigenvalues; last t_max {t_max:.6g}")


def asymptotic_compare(sigma: Sequence[float], data: BoundaryData, nu: Sequence[float] | None = None,
                       config: SteklovConfig | None = None, fit_start: int | None = None) -> AsymptoticReport:
    """
    Differences sigma_j - nu_j and a log-log fit of |d_j| over the top half of
    the indices (never below the configured head cutoff), or from ``fit_start`` on.

    The fitted exponent is reported next to the ceiling computed from the
    angles; no pass/fail is decided here.
    """
    config = config or DEFAULT_CONFIG
    sigma = [float(s) for s in sigma]
    if not sigma:
        raise PolygonDataError("sigma is empty")
    if any(b < a - 1e-12 for a, b in zip(sigma, sigma[1:])):
        raise PolygonDataError("sigma must be ascending")
    if nu is None:
        nu = quasi_spectrum_for(data, len(sigma), config)
    elif len(nu) != len(sigma):
        raise PolygonDataError(f"{len(sigma)} eigenvalues but {len(nu)} quasi-eigenvalues")
    nu = [float(v) for v in nu]

    differences = np.asarray(sigma) - np.asarray(nu)
    if fit_start is None:
        start = max(config.roots.head_exclude, len(sigma) // 2, 1)
    else:
        start = max(fit_start, 1)
    fit = [j for j in range(start, len(sigma)) if abs(differences[j]) > 1e-14]

    epsilon_hat = None
    note = ""
    if np.all(np.abs(differences) < 1e-14):
        note = "all differences vanish: exponent undefined"
    elif len(fit) < 2:
        note = f"fewer than 2 usable indices at or above {start}: exponent undefined"
    else:
        slope, _ = np.polyfit(np.log(fit), np.log(np.abs(differences[fit])), 1)
        epsilon_hat = float(-slope)

    ceiling = epsilon_ceiling(data.angles)
    logger.info("asymptotic fit over %d indices: epsilon_hat=%s, ceiling=%.4g", len(fit), epsilon_hat, ceiling)
    return AsymptoticReport(
        sigma=tuple(sigma),
        nu=tuple(nu),
        differences=tuple(float(d) for d in differences),
        epsilon_hat=epsilon_hat,
        epsilon_ceiling=ceiling,
        fit_indices=tuple(fit),
        note=note,
    )
