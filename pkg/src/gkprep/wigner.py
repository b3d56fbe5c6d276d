"""Wavefunctions and Wigner functions of finite-energy GKP states.

Small-spread closed forms are the primary implementation: combs of
Gaussians with Gaussian envelopes.  The exact finite-spread corrections
(slightly shrunk widths and peak positions, controlled by delta^2*kappa^2/4)
are available behind ``exact=True``; they matter only when the product of
the spreads is not small.

Normalization convention: the Wigner combs carry unit amplitude at the
origin, so the phase-space integral of a logical-zero grid is pi (divide by
pi for a unit-mass quasi-distribution).  The position-basis zero/one
wavefunctions are normalized in the small-spread limit; the momentum-basis
and plus-state forms keep the same prefactor convention, which puts their
squared norm at 2 in that limit (their combs are twice as dense).  Grids
are emitted unnormalized.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .lattice import SQRT_PI

# Comb terms whose envelope weight falls below this fraction of the leading
# peak are dropped; far below every documented tolerance.
WEIGHT_CUTOFF = 1e-14

# Magnitude of delta^2 * kappa^2 above which the small-spread closed forms
# start to visibly deviate from the exact ones.
APPROXIMATION_LIMIT = 0.01

_MAGIC = b"GKPW"
_HEADER = struct.Struct("<4sII4fI")  # magic, n_q, n_p, q_lo, q_hi, p_lo, p_hi, reserved
assert _HEADER.size == 32


@dataclass(frozen=True)
class GkpEnvelope:
    """Finite-energy GKP state: position comb width delta, momentum kappa."""

    delta: float
    kappa: float
    logical: str = "zero"

    def __post_init__(self) -> None:
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ValueError("delta must be a positive finite real")
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ValueError("kappa must be a positive finite real")
        if self.logical not in ("zero", "one", "plus"):
            raise ValueError(f"logical must be zero/one/plus, got {self.logical!r}")

    @property
    def within_approximation(self) -> bool:
        return (self.delta * self.kappa) ** 2 <= APPROXIMATION_LIMIT

    def corrected(self) -> tuple[float, float, float]:
        """Exact-form parameters (delta_s, kappa_s, gamma)."""
        x = (self.delta * self.kappa) ** 2 / 4.0
        return (
            self.delta / math.sqrt(1.0 + x),
            self.kappa / math.sqrt(1.0 + x),
            (1.0 - x) / (1.0 + x),
        )


@dataclass(frozen=True)
class GridSpec:
    q_range: tuple[float, float]
    p_range: tuple[float, float]
    n_q: int
    n_p: int

    def __post_init__(self) -> None:
        if self.q_range[0] >= self.q_range[1] or self.p_range[0] >= self.p_range[1]:
            raise ValueError("ranges must be increasing")
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError("resolution must be at least 2 per axis")

    def q_axis(self) -> np.ndarray:
        return np.linspace(*self.q_range, self.n_q)

    def p_axis(self) -> np.ndarray:
        return np.linspace(*self.p_range, self.n_p)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Dense evaluation; values[i, j] = W(q_axis[i], p_axis[j])."""

    spec: GridSpec
    values: np.ndarray


def _comb(
    x: np.ndarray,
    centers: np.ndarray,
    weights: np.ndarray,
    width: float,
) -> np.ndarray:
    """sum_k weights[k] * exp(-(x - centers[k])^2 / width^2) (vectorized)."""
    d = (x[..., None] - centers) / width
    return np.einsum("...k,k->...", np.exp(-np.minimum(d * d, 745.0)), weights)


def _indices(max_abs: float) -> np.ndarray:
    return np.arange(-math.ceil(max_abs), math.ceil(max_abs) + 1)


_LOG_CUTOFF = -math.log(WEIGHT_CUTOFF)


# Peak layout per (logical, basis): spacing and offset of the peak label L
# (peaks sit at L*sqrt(pi)) and whether the weights alternate in sign.  The
# envelope weight is exp(-(pi/2) * scale^2 * L^2) in every case, with scale
# the conjugate-quadrature comb width.
_COMB_LAYOUT = {
    ("zero", "position"): (2, 0, False),
    ("zero", "momentum"): (1, 0, False),
    ("one", "position"): (2, 1, False),
    ("one", "momentum"): (1, 0, True),
    ("plus", "position"): (1, 0, False),
    ("plus", "momentum"): (2, 0, False),
}


def _wavefunction_comb(
    env: GkpEnvelope, basis: str, exact: bool
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(centers, weights, width, prefactor) of the requested comb."""
    if exact:
        d, k, gamma = env.corrected()
    else:
        d, k, gamma = env.delta, env.kappa, 1.0
    if basis == "position":
        width, envelope_scale = d, k
        prefactor = (4.0 * env.kappa**2 / (math.pi * env.delta**2)) ** 0.25
    elif basis == "momentum":
        width, envelope_scale = k, d
        prefactor = (4.0 * env.delta**2 / (math.pi * env.kappa**2)) ** 0.25
    else:
        raise ValueError(f"basis must be 'position' or 'momentum', got {basis!r}")

    spacing, offset, alternating = _COMB_LAYOUT[(env.logical, basis)]
    coeff = 0.5 * math.pi * envelope_scale**2
    label_max = math.sqrt(_LOG_CUTOFF / coeff)
    n_max = (label_max + abs(offset)) / spacing + 1.0
    n = _indices(n_max)
    label = spacing * n + offset
    weights = np.exp(-coeff * label.astype(np.float64) ** 2)
    if alternating:
        weights = weights * np.where(n % 2 == 0, 1.0, -1.0)
    centers = label * gamma * SQRT_PI
    keep = np.abs(weights) >= WEIGHT_CUTOFF
    return centers[keep], weights[keep], width, prefactor


def wavefunction(
    env: GkpEnvelope, basis: str, x, *, exact: bool = False
) -> float | np.ndarray:
    """Approximate GKP wavefunction at quadrature value(s) ``x``.

    Logical zero peaks at even multiples of sqrt(pi) in position; logical
    one at odd multiples; in momentum both comb over all multiples with the
    logical-one peaks alternating in sign.  ``exact=True`` applies the
    finite-spread width/position corrections.
    """
    centers, weights, width, prefactor = _wavefunction_comb(env, basis, exact)
    x_arr = np.asarray(x, dtype=np.float64)
    d = (x_arr[..., None] - centers) / (width * math.sqrt(2.0))
    out = prefactor * np.einsum(
        "...k,k->...", np.exp(-np.minimum(d * d, 745.0)), weights
    )
    return out if out.ndim else float(out)


def _wigner_axes(
    env: GkpEnvelope,
    q: np.ndarray,
    p: np.ndarray,
    q_width: float,
    p_width: float,
    exact: bool,
) -> np.ndarray:
    """Double-comb Wigner evaluation on the outer product of q and p axes."""
    if exact:
        d_s, k_s, gamma = env.corrected()
    else:
        d_s, k_s, gamma = env.delta, env.kappa, 1.0

    m_max = math.sqrt(4.0 * _LOG_CUTOFF / math.pi) / d_s + 1.0
    m = _indices(m_max)
    w_m = np.exp(-math.pi * d_s**2 * m**2 / 4.0)
    p_centers = m * gamma * SQRT_PI / 2.0
    p_plus = _comb(p, p_centers, w_m, p_width)
    p_minus = _comb(p, p_centers, w_m * np.where(m % 2 == 0, 1.0, -1.0), p_width)

    n_max = math.sqrt(_LOG_CUTOFF / math.pi) / k_s + 1.0
    n = _indices(n_max)
    even_idx = 2 * n
    w_even = np.exp(-math.pi * k_s**2 * even_idx**2)
    q_even = _comb(q, even_idx * gamma * SQRT_PI, w_even, q_width)
    odd_idx = 2 * n + 1
    w_odd = np.exp(-math.pi * k_s**2 * odd_idx**2)
    q_odd = _comb(q, odd_idx * gamma * SQRT_PI, w_odd, q_width)

    return np.outer(q_even, p_plus) + np.outer(q_odd, p_minus)


def wigner_physical_zero(
    env: GkpEnvelope, spec: GridSpec, *, exact: bool = False
) -> PhaseSpaceGrid:
    """Wigner function of the logical-zero state on a phase-space grid.

    Positive peaks sit at (2n*sqrt(pi), m*sqrt(pi)/2); the peaks at odd
    multiples of sqrt(pi) in q alternate in sign with m.
    """
    if exact:
        d_s, k_s, _ = env.corrected()
    else:
        d_s, k_s = env.delta, env.kappa
    values = _wigner_axes(env, spec.q_axis(), spec.p_axis(), d_s, k_s, exact)
    return PhaseSpaceGrid(spec=spec, values=values)


def wigner_after_gdc(
    env: GkpEnvelope,
    channel: tuple[float, float],
    spec: GridSpec,
) -> PhaseSpaceGrid:
    """Wigner function of logical zero after a Gaussian displacement channel.

    The channel convolves each Gaussian peak, so peak variances add
    (delta^2 + dq^2 along q, kappa^2 + dp^2 along p) and the amplitude
    rescales by delta*kappa/sqrt((dq^2+delta^2)(dp^2+kappa^2)); envelope
    weights are untouched.
    """
    dq, dp = channel
    if dq < 0.0 or dp < 0.0:
        raise ValueError("channel spreads must be non-negative")
    q_width = math.sqrt(env.delta**2 + dq**2)
    p_width = math.sqrt(env.kappa**2 + dp**2)
    amplitude = env.delta * env.kappa / (q_width * p_width)
    values = amplitude * _wigner_axes(
        env, spec.q_axis(), spec.p_axis(), q_width, p_width, exact=False
    )
    return PhaseSpaceGrid(spec=spec, values=values)


def wigner_point(env: GkpEnvelope, q: float, p: float) -> float:
    """W(q, p) of the logical-zero state at a single phase-space point."""
    out = _wigner_axes(
        env, np.asarray([q], dtype=np.float64), np.asarray([p], dtype=np.float64),
        env.delta, env.kappa, exact=False,
    )
    return float(out[0, 0])


def grid_to_csv(grid: PhaseSpaceGrid, path_or_buf) -> None:
    """CSV export: header q,p,value with 17 significant digits."""
    own = isinstance(path_or_buf, (str, bytes))
    handle = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        handle.write("q,p,value\n")
        q_axis, p_axis = grid.spec.q_axis(), grid.spec.p_axis()
        for i, qv in enumerate(q_axis):
            for j, pv in enumerate(p_axis):
                handle.write(f"{qv:.17g},{pv:.17g},{grid.values[i, j]:.17g}\n")
    finally:
        if own:
            handle.close()


def grid_to_binary(grid: PhaseSpaceGrid, path: str) -> None:
    """Dense binary export: 32-byte header then row-major float64 values.

    Header layout (little endian): magic "GKPW", n_q and n_p as uint32,
    q_lo, q_hi, p_lo, p_hi as float32, 4 reserved bytes.
    """
    spec = grid.spec
    header = _HEADER.pack(
        _MAGIC, spec.n_q, spec.n_p,
        spec.q_range[0], spec.q_range[1], spec.p_range[0], spec.p_range[1],
        0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def read_binary_grid(path: str) -> PhaseSpaceGrid:
    """Load a grid written by :func:`grid_to_binary`."""
    with open(path, "rb") as fh:
        magic, n_q, n_p, q_lo, q_hi, p_lo, p_hi, _ = _HEADER.unpack(
            fh.read(_HEADER.size)
        )
        if magic != _MAGIC:
            raise ValueError(f"not a grid file (magic {magic!r})")
        values = np.frombuffer(fh.read(8 * n_q * n_p), dtype="<f8").reshape(n_q, n_p)
    spec = GridSpec(
        q_range=(float(q_lo), float(q_hi)),
        p_range=(float(p_lo), float(p_hi)),
        n_q=n_q,
        n_p=n_p,
    )
    return PhaseSpaceGrid(spec=spec, values=values.copy())
