"""Failure probabilities of n-qubit GKP repetition codes.

The failure probability decomposes over the set of data qubits that
actually flipped.  For each correctable flip count m (0 <= m <= (n-1)/2)
the decoder succeeds exactly when every syndrome lands in the zone the flip
pattern dictates; for a fixed point the success probability is a product
over k = 2..n of an erf window evaluated at the pair sum u1' + uk', and the
block contribution is the n-dimensional integral of the residual densities
times one minus that product.  Patterns with more than (n-1)/2 flips always
count as failure (the classical binomial tail).

Flip patterns with the same count m are NOT all equivalent: every syndrome
compares qubit 1 with one other qubit, so the window layout depends on
whether qubit 1 is in the flip set, and on the sign of the PZ cell each
flipped qubit occupies relative to qubit 1.  The blocks therefore enumerate
the flip count, the qubit-1 membership and the cell-sign split; patterns
within one such class are exchange-symmetric and carry a plain counting
factor.  (Collapsing all of this to a single representative per m is a good
approximation only when the residual density is sharply concentrated; it
visibly biases the rate at moderate ancilla spreads.)

Because every window couples only u1' with one other coordinate, the inner
(n-1) integrals separate once u1' is fixed: each block reduces to a single
1-D integral over u1' of F(u1') * [prod(masses) - c * prod(I_k(u1'))] with
1-D inner integrals I_k.  That brings the cost from nodes^n down to
O(n * nodes^2).  A direct tensor-grid summation of the same integrands is
kept for n <= 5 as an independent check on this reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .distributions import (
    GaussianDisplacement,
    NoiseParams,
    ResidualDistribution,
    pauli_rate_ideal,
    pauli_rate_physical,
)
from .lattice import DEFAULT_BUDGET, HALF_CELL, SQRT_PI, TruncationBudget
from .quadrature import gaussian_window_overlap, peaked_cell_nodes, smooth_cell_nodes

NPZ_CELL = (-HALF_CELL, HALF_CELL)
PZ_CELL = (HALF_CELL, 3.0 * HALF_CELL)

# Syndrome windows for the pair sum u1' + uk', by what the decoder must see:
# WIN_NPZ0 when the pair sum sits near 0 and must stay NPZ, WIN_PZ1 /
# WIN_PZ1_NEG when exactly one of the pair flipped (sum near +-sqrt(pi),
# must read PZ), WIN_NPZ1 when both flipped (sum near 2*sqrt(pi), must read
# NPZ).
WIN_NPZ0 = (-HALF_CELL, HALF_CELL)
WIN_PZ1 = (HALF_CELL, 3.0 * HALF_CELL)
WIN_PZ1_NEG = (-3.0 * HALF_CELL, -HALF_CELL)
WIN_NPZ1 = (3.0 * HALF_CELL, 5.0 * HALF_CELL)


class QuadratureError(RuntimeError):
    """A rate quadrature could not certify the requested tolerance."""


@dataclass(frozen=True)
class CodeSize:
    """Odd repetition-code size n >= 3."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"code size must be an odd integer >= 3, got {self.n}")

    @property
    def correctable_weight(self) -> int:
        return (self.n - 1) // 2

    @property
    def syndrome_count(self) -> int:
        return 2 ** (self.n - 1)


def _as_size(n: int | CodeSize) -> CodeSize:
    return n if isinstance(n, CodeSize) else CodeSize(int(n))


@dataclass(frozen=True)
class QuadratureConfig:
    """Node budget and method selection for the block integrals.

    ``nodes_per_dim`` is the per-cell node count along each dimension.  The
    tensor method is an n <= 5 cost-guarded oracle; ``refine`` re-evaluates
    the factorized blocks at doubled node count and certifies ``abs_tol``.
    """

    nodes_per_dim: int = 64
    method: str = "factorized"
    abs_tol: float = 1e-8
    refine: bool = True
    window_neighbors: int = 0
    max_n: int = 15

    def __post_init__(self) -> None:
        if self.nodes_per_dim < 8:
            raise ValueError("nodes_per_dim must be at least 8")
        if self.method not in ("factorized", "tensor"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.abs_tol > 0.0):
            raise ValueError("abs_tol must be positive")
        if self.window_neighbors < 0:
            raise ValueError("window_neighbors must be >= 0")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class FailureBreakdown:
    """Total failure probability with its per-case decomposition.

    ``per_case`` holds one entry per flip count ("s1" = no flip,
    "s2" = one flip, ...) plus the classical "overweight" tail; the entries
    sum to ``total`` exactly as computed.
    """

    total: float
    per_case: tuple[tuple[str, float], ...]


def classical_failure(n: int | CodeSize, p: float) -> float:
    """Binomial majority-vote failure rate: P(more than (n-1)/2 of n flip)."""
    size = _as_size(n)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be a probability, got {p}")
    total = 0.0
    for i in range((size.n + 1) // 2, size.n + 1):
        total += math.comb(size.n, i) * p**i * (1.0 - p) ** (size.n - i)
    return total


def _erf_window(
    y: np.ndarray,
    window: tuple[float, float],
    delta_tilde: float,
    neighbors: int = 0,
) -> np.ndarray:
    """erf((hi-y)/dt) - erf((lo-y)/dt), summed over 2*sqrt(pi) translates.

    Ranges over [0, 2]; equals twice the probability that y plus a
    spread-``delta_tilde`` ancilla displacement lands in the window (or any
    of its ``neighbors`` lattice translates).  ``delta_tilde == 0`` gives
    the sharp indicator limit.
    """
    lo, hi = window
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    for t in range(-neighbors, neighbors + 1):
        shift = 2.0 * t * SQRT_PI
        if delta_tilde == 0.0:
            out = out + 2.0 * ((y > lo + shift) & (y < hi + shift))
        else:
            out = out + (
                sp.erf((hi + shift - y) / delta_tilde)
                - sp.erf((lo + shift - y) / delta_tilde)
            )
    return out


def _case_windows(s: int, n: int) -> list[tuple[float, float]]:
    """Syndrome window per pair (qubit 1, qubit k) for k = 2..n in case s."""
    if s == 1:
        return [WIN_NPZ0] * (n - 1)
    return [WIN_NPZ1] * (s - 2) + [WIN_PZ1] * (n - s + 1)


def success_product(
    s: int,
    u: np.ndarray,
    params: NoiseParams,
    n: int | CodeSize | None = None,
    *,
    window_neighbors: int = 0,
) -> float:
    """Probability that all n-1 syndromes match the case-s flip pattern.

    Case s means qubits 1..s-1 flipped (s = 1: none); ``u`` holds the n
    residual displacements.  The product keeps a single lattice term per
    window unless ``window_neighbors`` adds translates.
    """
    u = np.asarray(u, dtype=np.float64)
    size = _as_size(n if n is not None else len(u))
    if len(u) != size.n:
        raise ValueError(f"expected {size.n} residuals, got {len(u)}")
    if not 1 <= s <= (size.n + 1) // 2:
        raise ValueError(f"case index s={s} outside 1..{(size.n + 1) // 2}")
    if params.delta_tilde <= 0.0:
        raise ValueError("success_product requires delta_tilde > 0")
    windows = _case_windows(s, size.n)
    pair_sums = u[0] + u[1:]
    product = 1.0 / 2 ** (size.n - 1)
    for win, y in zip(windows, pair_sums):
        product *= float(
            _erf_window(np.asarray(y), win, params.delta_tilde, window_neighbors)
        )
    return product


class _ResidualCellEngine:
    """Per-cell nodes, densities and inner integrals for the post-EC density."""

    def __init__(self, params: NoiseParams, n_nodes: int, neighbors: int,
                 budget: TruncationBudget) -> None:
        self.dt = params.delta_tilde
        self.neighbors = neighbors
        dist = ResidualDistribution(params.delta, params.delta_tilde, budget)
        self.x_npz, self.w_npz = peaked_cell_nodes(0.0, HALF_CELL, self.dt, n_nodes)
        self.x_pz, self.w_pz = peaked_cell_nodes(SQRT_PI, HALF_CELL, self.dt, n_nodes)
        self.f_npz = dist.density(self.x_npz)
        self.f_pz = dist.density(self.x_pz)
        self.mass_npz = float(np.dot(self.w_npz, self.f_npz))
        self.mass_pz = float(np.dot(self.w_pz, self.f_pz))

    def mass(self, cell: str) -> float:
        return self.mass_npz if cell == "npz" else self.mass_pz

    def nodes(self, cell: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if cell == "npz":
            return self.x_npz, self.w_npz, self.f_npz
        return self.x_pz, self.w_pz, self.f_pz

    def inner(self, outer_x: np.ndarray, cell: str,
              window: tuple[float, float], reflect: bool = False) -> np.ndarray:
        """I(u1) = integral over the cell of F(x) * window(u1 +/- x) dx.

        ``reflect=True`` evaluates the window at u1 - x, which is the
        even-density image of integrating over the mirrored cell.
        """
        x, w, f = self.nodes(cell)
        arg = outer_x[:, None] - x[None, :] if reflect else outer_x[:, None] + x[None, :]
        h = _erf_window(arg, window, self.dt, self.neighbors)
        return h @ (w * f)


class _IntrinsicCellEngine:
    """Same interface for the raw (no GKP EC) Gaussian data density.

    Cell masses are closed-form erf differences and the inner integrals are
    exact bivariate-normal rectangle probabilities, so the sharp syndrome
    windows of small ancilla spreads cost nothing in accuracy.
    """

    def __init__(self, params: NoiseParams, n_nodes: int, neighbors: int) -> None:
        self.delta = params.delta
        self.dt = params.delta_tilde
        self.neighbors = neighbors
        gauss = GaussianDisplacement(params.delta)
        scale = max(params.delta / 2.0, (2.0 * HALF_CELL) / (n_nodes // 4))

        def split_cell(lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
            # the syndrome-window transitions sweep past the cell edges when
            # the outer variable crosses the cell centre, kinking the inner
            # integrals there over a width of a few ancilla spreads; an own
            # panel around the centre keeps the outer rule spectrally
            # accurate even for sharp windows
            mid = 0.5 * (lo + hi)
            half = min(8.0 * self.dt, 0.25 * (hi - lo))
            if half > 0.0:
                edges = [lo, mid - half, mid + half, hi]
                scales = [scale, max(self.dt, 1e-300), scale]
            else:
                edges = [lo, mid, hi]
                scales = [scale, scale]
            budget = max(n_nodes // len(scales), 8)
            parts = [
                smooth_cell_nodes(a, b, s, budget)
                for a, b, s in zip(edges, edges[1:], scales)
            ]
            return (
                np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]),
            )

        self.x_npz, self.w_npz = split_cell(*NPZ_CELL)
        self.x_pz, self.w_pz = split_cell(*PZ_CELL)
        self.f_npz = gauss.pdf(self.x_npz)
        self.f_pz = gauss.pdf(self.x_pz)
        self.mass_npz = 0.5 * (math.erf(HALF_CELL / self.delta) - math.erf(-HALF_CELL / self.delta))
        self.mass_pz = 0.5 * (math.erf(3.0 * HALF_CELL / self.delta) - math.erf(HALF_CELL / self.delta))

    def mass(self, cell: str) -> float:
        return self.mass_npz if cell == "npz" else self.mass_pz

    def nodes(self, cell: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if cell == "npz":
            return self.x_npz, self.w_npz, self.f_npz
        return self.x_pz, self.w_pz, self.f_pz

    def inner(self, outer_x: np.ndarray, cell: str,
              window: tuple[float, float], reflect: bool = False) -> np.ndarray:
        lo, hi = window
        cell_bounds = NPZ_CELL if cell == "npz" else PZ_CELL
        out = np.zeros_like(outer_x)
        for t in range(-self.neighbors, self.neighbors + 1):
            shift = 2.0 * t * SQRT_PI
            if reflect:
                out = out + 2.0 * gaussian_window_overlap(
                    cell_bounds, outer_x - (hi + shift), outer_x - (lo + shift),
                    self.delta, self.dt,
                )
            else:
                out = out + 2.0 * gaussian_window_overlap(
                    cell_bounds, lo + shift - outer_x, hi + shift - outer_x,
                    self.delta, self.dt,
                )
        return out


@dataclass(frozen=True)
class _BlockSpec:
    """One exchange-symmetric class of flip patterns.

    ``factors`` lists (count, cell, window, reflect) for the n-1 inner
    coordinates; ``reflect`` marks flipped qubits sitting in the mirrored PZ
    cell, folded onto the positive cell through the even density.
    """

    multiplicity: float
    outer_cell: str
    factors: tuple[tuple[int, str, tuple[float, float], bool], ...]


def _case_blocks(m: int, n: int) -> list[_BlockSpec]:
    """Pattern classes with exactly m flipped qubits.

    Class A has qubit 1 flipped (C(n-1, m-1) flip sets, overall sign pair
    folded to u1 in the positive PZ cell, j of the other flipped qubits in
    the opposite-sign cell); class B has qubit 1 clean (C(n-1, m) flip sets,
    j of the flipped qubits in the negative cell).
    """
    if m == 0:
        return [_BlockSpec(1.0, "npz", ((n - 1, "npz", WIN_NPZ0, False),))]
    blocks = []
    for j in range(m):
        factors = []
        if m - 1 - j:
            factors.append((m - 1 - j, "pz", WIN_NPZ1, False))
        if j:
            factors.append((j, "pz", WIN_NPZ0, True))
        factors.append((n - m, "npz", WIN_PZ1, False))
        blocks.append(
            _BlockSpec(
                2.0 * math.comb(n - 1, m - 1) * math.comb(m - 1, j),
                "pz",
                tuple(factors),
            )
        )
    for j in range(m + 1):
        factors = []
        if m - j:
            factors.append((m - j, "pz", WIN_PZ1, False))
        if j:
            factors.append((j, "pz", WIN_PZ1_NEG, True))
        if n - 1 - m:
            factors.append((n - 1 - m, "npz", WIN_NPZ0, False))
        blocks.append(
            _BlockSpec(
                float(math.comb(n - 1, m) * math.comb(m, j)),
                "npz",
                tuple(factors),
            )
        )
    return blocks


def _factorized_cases(engine, size: CodeSize) -> list[float]:
    """Per-flip-count contributions via the 1-D reduction over u1'."""
    n = size.n
    scale = 1.0 / 2 ** (n - 1)
    inner_cache: dict[tuple, np.ndarray] = {}

    def inner(outer_cell: str, cell: str, window: tuple[float, float],
              reflect: bool) -> np.ndarray:
        key = (outer_cell, cell, window, reflect)
        if key not in inner_cache:
            x = engine.nodes(outer_cell)[0]
            inner_cache[key] = engine.inner(x, cell, window, reflect)
        return inner_cache[key]

    cases = []
    for m in range((n + 1) // 2):
        total = 0.0
        for block in _case_blocks(m, n):
            x, w, f = engine.nodes(block.outer_cell)
            mass_part = 1.0
            inner_part = np.ones_like(x)
            for count, cell, window, reflect in block.factors:
                mass_part *= engine.mass(cell) ** count
                inner_part = inner_part * inner(block.outer_cell, cell, window, reflect) ** count
            value = float(np.dot(w * f, mass_part - scale * inner_part))
            total += block.multiplicity * value
        cases.append(total)
    return cases


def _tensor_cases(engine, size: CodeSize, params: NoiseParams,
                  neighbors: int) -> list[float]:
    """Direct grid summation of the block integrands (independent oracle).

    Materializes 1 - (success product) on the full (n-1)-dimensional inner
    grid for every outer node, with no use of the factorized contraction.
    """
    n = size.n
    dt = params.delta_tilde
    scale = 1.0 / 2 ** (n - 1)
    cases = []
    for m in range((n + 1) // 2):
        total = 0.0
        for block in _case_blocks(m, n):
            x1, w1, f1 = engine.nodes(block.outer_cell)
            dims: list[tuple[np.ndarray, np.ndarray, np.ndarray, tuple[float, float], bool]] = []
            for count, cell, window, reflect in block.factors:
                x, w, f = engine.nodes(cell)
                dims.extend([(x, w, f, window, reflect)] * count)
            shape = tuple(len(d[0]) for d in dims)
            weight_grid = np.ones(shape)
            for axis, (x, w, f, _, _) in enumerate(dims):
                sh = [1] * len(dims)
                sh[axis] = len(x)
                weight_grid = weight_grid * (w * f).reshape(sh)
            block_total = 0.0
            for i, u1 in enumerate(x1):
                prod = np.ones(shape)
                for axis, (x, _, _, window, reflect) in enumerate(dims):
                    sh = [1] * len(dims)
                    sh[axis] = len(x)
                    arg = u1 - x if reflect else u1 + x
                    prod = prod * _erf_window(arg, window, dt, neighbors).reshape(sh)
                block_total += w1[i] * f1[i] * float(
                    np.sum(weight_grid * (1.0 - scale * prod))
                )
            total += block.multiplicity * block_total
        cases.append(total)
    return cases


def _breakdown(cases: list[float], tail: float, size: CodeSize) -> FailureBreakdown:
    labels = [f"s{s}" for s in range(1, (size.n + 1) // 2 + 1)] + ["overweight"]
    values = cases + [tail]
    return FailureBreakdown(
        total=math.fsum(values), per_case=tuple(zip(labels, values))
    )


def _ideal_breakdown(size: CodeSize, p: float) -> FailureBreakdown:
    cases = [0.0] * ((size.n + 1) // 2)
    return _breakdown(cases, classical_failure(size, p), size)


def _make_engine(gkp_ec: bool, params: NoiseParams, n_nodes: int,
                 neighbors: int, budget: TruncationBudget):
    if gkp_ec:
        return _ResidualCellEngine(params, n_nodes, neighbors, budget)
    return _IntrinsicCellEngine(params, n_nodes, neighbors)


def _failure_rate_impl(
    n: int | CodeSize,
    params: NoiseParams,
    cfg: QuadratureConfig,
    budget: TruncationBudget,
    gkp_ec: bool,
) -> FailureBreakdown:
    size = _as_size(n)
    if size.n > cfg.max_n:
        raise ValueError(f"n={size.n} exceeds the configured cap max_n={cfg.max_n}")
    if gkp_ec and params.ideal_ancilla:
        return _ideal_breakdown(size, pauli_rate_ideal(params.delta, budget))
    tail_p = (
        pauli_rate_physical(params, budget)
        if gkp_ec
        else pauli_rate_ideal(params.delta, budget)
    )
    tail = classical_failure(size, tail_p)
    if cfg.method == "tensor":
        if size.n > 5:
            raise ValueError("tensor method is cost-guarded to n <= 5")
        if size.n == 5 and cfg.nodes_per_dim > 40:
            raise ValueError("tensor with n=5 requires nodes_per_dim <= 40")
        engine = _make_engine(gkp_ec, params, cfg.nodes_per_dim, cfg.window_neighbors, budget)
        cases = _tensor_cases(engine, size, params, cfg.window_neighbors)
        return _breakdown(cases, tail, size)

    engine = _make_engine(gkp_ec, params, cfg.nodes_per_dim, cfg.window_neighbors, budget)
    cases = _factorized_cases(engine, size)
    if cfg.refine:
        fine_engine = _make_engine(
            gkp_ec, params, 2 * cfg.nodes_per_dim, cfg.window_neighbors, budget
        )
        fine = _factorized_cases(fine_engine, size)
        gap = max(abs(a - b) for a, b in zip(cases, fine))
        if gap > cfg.abs_tol:
            raise QuadratureError(
                f"factorized blocks changed by {gap:.3e} under node doubling "
                f"(requested abs_tol={cfg.abs_tol:g}); increase nodes_per_dim"
            )
        cases = fine
    return _breakdown(cases, tail, size)


def failure_rate(
    n: int | CodeSize,
    params: NoiseParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    budget: TruncationBudget = DEFAULT_BUDGET,
) -> FailureBreakdown:
    """P_f,n-rep: failure probability of the n-qubit GKP repetition code.

    Uses the post-EC residual density for the data qubits; ancilla spreads
    below 1e-6 reduce exactly to the classical majority-vote formula with
    the ideal-ancilla flip rate.
    """
    return _failure_rate_impl(n, params, cfg, budget, gkp_ec=True)


def failure_rate_no_gkp_ec(
    n: int | CodeSize,
    params: NoiseParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    budget: TruncationBudget = DEFAULT_BUDGET,
) -> FailureBreakdown:
    """P'_f,n-rep: same code but skipping the round of GKP error correction.

    The data displacements keep their raw Gaussian density (spread delta)
    and the classical tail uses the ideal-ancilla flip rate.  Unlike the
    with-EC variant this does not collapse to the classical formula as
    delta_tilde -> 0: the syndrome windows become sharp but the data
    density stays wide.
    """
    return _failure_rate_impl(n, params, cfg, budget, gkp_ec=False)


def overall_failure_biased(
    n: int | CodeSize,
    params: NoiseParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    budget: TruncationBudget = DEFAULT_BUDGET,
) -> float:
    """Overall logical failure rate under biased noise.

    Position errors (amplified to spread r*delta) are handled by the
    repetition code; each syndrome coupling leaks ancilla noise into the
    momentum quadrature, so the momentum spread of qubit 1 grows to
    sqrt((kappa/r)^2 + n*dt^2) and of every other qubit to
    sqrt((kappa/r)^2 + 2*dt^2).  Failure events are composed as independent.
    """
    size = _as_size(n)
    dt = params.delta_tilde
    mom = params.momentum_spread
    mom_first = math.sqrt(mom**2 + size.n * dt**2)
    mom_rest = math.sqrt(mom**2 + 2.0 * dt**2)
    pos_params = NoiseParams(delta=params.position_spread, delta_tilde=dt)
    p_rep = failure_rate(size, pos_params, cfg, budget).total
    keep = (
        (1.0 - pauli_rate_ideal(mom_rest, budget)) ** (size.n - 1)
        * (1.0 - pauli_rate_ideal(mom_first, budget))
        * (1.0 - p_rep)
    )
    return 1.0 - keep
