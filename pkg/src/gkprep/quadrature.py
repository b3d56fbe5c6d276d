"""Quadrature helpers: panelled Gauss-Legendre nodes and Gaussian rectangle
probabilities.

The rate integrands are products of a narrow wave-packet comb (scale
``delta_tilde``), a smooth erf modulating factor (scale ``delta``) and
erf syndrome windows (scale ``delta_tilde`` again, at positions that move
with the outer integration variable).  Fixed nodes therefore have to resolve
scale ``delta_tilde`` everywhere the density is non-negligible; the builders
below place uniform panels of roughly that width across the support and put
a Gauss-Legendre rule on each panel.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as sp

# Beyond this many widths from a Gaussian peak the weight is < 1e-31 of the
# peak value, far below every tolerance used in the package.
PEAK_SUPPORT_WIDTHS = 8.5


@lru_cache(maxsize=64)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(lo: float, hi: float, n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule: ``n_panels`` equal panels on [lo, hi]."""
    base_x, base_w = _leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return x, w


def peaked_cell_nodes(
    center: float,
    half_width: float,
    feature_scale: float,
    n_nodes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes for a cell whose integrand lives under a Gaussian peak.

    The integrand is assumed to carry a factor exp(-(x-center)^2/s^2) with
    s = ``feature_scale``, so everything further than PEAK_SUPPORT_WIDTHS*s
    from the centre is dropped; the retained window is covered with panels
    of width about s so that any other feature of that scale (the syndrome
    window transitions) is resolved wherever it matters.
    """
    if not (feature_scale > 0.0):
        raise ValueError("feature_scale must be positive")
    reach = min(PEAK_SUPPORT_WIDTHS * feature_scale, half_width)
    # High-order rules on few panels beat many low-order panels for these
    # entire integrands; aim for panel widths of ~4 feature scales and at
    # least 16 nodes per panel.
    n_panels = int(min(max(math.ceil(reach / (2.0 * feature_scale)), 2), max(n_nodes // 16, 2)))
    order = max(n_nodes // n_panels, 8)
    return panel_nodes(center - reach, center + reach, n_panels, order)


def smooth_cell_nodes(
    lo: float,
    hi: float,
    feature_scale: float,
    n_nodes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes for a cell with smooth structure of scale ``feature_scale``."""
    if not (feature_scale > 0.0):
        raise ValueError("feature_scale must be positive")
    n_panels = int(min(max(math.ceil((hi - lo) / (3.0 * feature_scale)), 2), max(n_nodes // 12, 2)))
    order = max(n_nodes // n_panels, 8)
    return panel_nodes(lo, hi, n_panels, order)


def _std_normal_cdf(x: np.ndarray) -> np.ndarray:
    return 0.5 * sp.erfc(-x / math.sqrt(2.0))


def _bvn_cdf(h: np.ndarray, k: np.ndarray, rho: float) -> np.ndarray:
    """P(X <= h, Y <= k) for standard bivariate normals with correlation rho.

    Owen's T-function formulation; requires |rho| < 1 (the rho -> 1 limit is
    handled by the callers analytically).
    """
    h = np.asarray(h, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    h, k = np.broadcast_arrays(h, k)
    s = math.sqrt(max(1.0 - rho * rho, 0.0))
    if s == 0.0:
        raise ValueError("_bvn_cdf requires |rho| < 1")

    eps = 1e-300
    hs = np.where(np.abs(h) < eps, np.copysign(eps, np.where(h == 0.0, 1.0, h)), h)
    ks = np.where(np.abs(k) < eps, np.copysign(eps, np.where(k == 0.0, 1.0, k)), k)
    ah = np.clip((ks - rho * hs) / (hs * s), -1e300, 1e300)
    ak = np.clip((hs - rho * ks) / (ks * s), -1e300, 1e300)
    t_h = sp.owens_t(hs, ah)
    t_k = sp.owens_t(ks, ak)
    beta = np.where(
        (hs * ks < 0.0) | ((hs * ks == 0.0) & (hs + ks < 0.0)), 0.5, 0.0
    )
    return _std_normal_cdf(h) / 2.0 + _std_normal_cdf(k) / 2.0 - t_h - t_k - beta


def gaussian_window_overlap(
    cell: tuple[float, float],
    window_lo: np.ndarray,
    window_hi: np.ndarray,
    spread_x: float,
    spread_y: float,
) -> np.ndarray:
    """P(cell_lo < X < cell_hi, window_lo < X + Y < window_hi).

    X and Y are independent zero-mean Gaussians with densities proportional
    to exp(-x^2/spread^2) (standard deviation spread/sqrt(2)).  ``window_lo``
    and ``window_hi`` may be arrays; the result broadcasts with them.  For
    ``spread_y == 0`` the exact interval-overlap limit is returned.
    """
    a, b = cell
    window_lo = np.asarray(window_lo, dtype=np.float64)
    window_hi = np.asarray(window_hi, dtype=np.float64)
    sx = spread_x / math.sqrt(2.0)
    if spread_y == 0.0:
        lo = np.maximum(window_lo, a)
        hi = np.minimum(window_hi, b)
        width = np.maximum(hi - lo, 0.0)
        mass = 0.5 * (sp.erf(hi / spread_x) - sp.erf(lo / spread_x))
        return np.where(width > 0.0, mass, 0.0)
    sz = math.sqrt(spread_x**2 + spread_y**2) / math.sqrt(2.0)
    rho = spread_x / math.sqrt(spread_x**2 + spread_y**2)
    a_std, b_std = a / sx, b / sx

    def cdf(upper: np.ndarray) -> np.ndarray:
        return _bvn_cdf(b_std, upper / sz, rho) - _bvn_cdf(a_std, upper / sz, rho)

    return np.clip(cdf(window_hi) - cdf(window_lo), 0.0, 1.0)
