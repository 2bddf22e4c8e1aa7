"""Blind CP-correlation CFO estimators.

Every estimator works on the 2L lag pairs of each scored symbol k:

    pair(l) = (r[k*span + l], r[k*span + N + l]),   l = 0 .. 2L-1

For l < L the first element sits in symbol k's cyclic prefix and the pair
is a delayed copy of the same data, so its product carries the CFO phase.
Under the continuous phase ramp used by the simulator the product
r1 * conj(r2) rotates by -2*pi*theta, hence estimates take the *negative*
angle of the aggregate product, and the residual cost de-rotates the lag-N
sample with exp(-j*2*pi*xi):

    y_l(xi) = r1 - exp(-j*2*pi*xi) * r2

This one sign convention is pinned by the noiseless exactness tests and is
used consistently here and in the covariance model in :mod:`cfolab.bounds`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ReceivedFrame
from .errors import DegenerateCorrelation, EmptySubset, LagOutOfRange, LambdaOutOfRange
from .frame import OfdmConfig

MODE_COARSE = "coarse"
MODE_FIXED_FINE = "fixed_fine"
MODE_ADAPTIVE_FINE = "adaptive_fine"


def wrap_cfo(value):
    """Wrap a normalized frequency onto the fractional interval [-0.5, 0.5)."""
    wrapped = (np.asarray(value) + 0.5) % 1.0 - 0.5
    return wrapped if wrapped.ndim else float(wrapped)


def circular_distance(a, b):
    """Signed circular distance a - b on [-0.5, 0.5)."""
    return wrap_cfo(np.asarray(a) - np.asarray(b))


@dataclass(frozen=True)
class LagEnergies:
    """Residual energy R(l) per lag after de-rotating at a trial CFO."""

    r_of_l: np.ndarray  # length 2*cp_len, all entries >= 0

    def __post_init__(self):
        r = np.asarray(self.r_of_l, dtype=np.float64)
        object.__setattr__(self, "r_of_l", r)
        if r.ndim != 1:
            raise LagOutOfRange(f"r_of_l must be a vector, got shape {r.shape}")
        if np.any(r < 0):
            raise LagOutOfRange("lag energies must be >= 0")


@dataclass(frozen=True)
class CfoEstimate:
    """Estimated fractional CFO plus per-mode diagnostics."""

    xi: float
    mode: str
    lambda_used: int | None = None
    subset: tuple[int, ...] | None = None
    lag_energies: LagEnergies | None = None
    iterations: int = 0
    lambda_trace: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not -0.5 <= self.xi < 0.5:
            raise LagOutOfRange(f"estimate {self.xi} outside [-0.5, 0.5)")
        if self.mode in (MODE_FIXED_FINE, MODE_ADAPTIVE_FINE):
            if self.lambda_used is None or self.lambda_used < 1:
                raise LambdaOutOfRange(f"fine mode needs lambda_used >= 1, got {self.lambda_used}")
            if self.subset is None or len(self.subset) != self.lambda_used:
                raise LambdaOutOfRange("subset size must equal lambda_used")


def _lag_pair_views(frame: ReceivedFrame) -> tuple[np.ndarray, np.ndarray]:
    """Gather the lag pairs: arrays of shape (M, K, 2L) for r1 and r2."""
    cfg: OfdmConfig = frame.config
    span = cfg.symbol_span()
    lags = np.arange(2 * cfg.cp_len)
    starts = np.arange(cfg.n_symbols)[:, None] * span + lags[None, :]
    return frame.samples[:, starts], frame.samples[:, starts + cfg.n_fft]


def _normalize_lag_set(lag_set, n_lags: int) -> np.ndarray:
    lags = np.asarray(sorted(set(int(l) for l in lag_set)), dtype=np.intp)
    if lags.size == 0:
        raise EmptySubset("lag set must not be empty")
    if lags.size and (lags[0] < 0 or lags[-1] >= n_lags):
        raise LagOutOfRange(f"lag indices must lie in [0, {n_lags}), got {lags.tolist()}")
    return lags


def lag_product_table(frame: ReceivedFrame) -> np.ndarray:
    """Per-lag aggregate products Q[l] = sum_{k,m} r1 * conj(r2), length 2L."""
    r1, r2 = _lag_pair_views(frame)
    return np.sum(r1 * np.conj(r2), axis=(0, 1))


def lag_products(frame: ReceivedFrame, lag_set) -> complex:
    """Aggregate lag product over a lag index set, summed over symbols/antennas."""
    lags = _normalize_lag_set(lag_set, 2 * frame.config.cp_len)
    r1, r2 = _lag_pair_views(frame)
    return complex(np.sum(r1[:, :, lags] * np.conj(r2[:, :, lags])))


def _angle_estimate(product: complex) -> float:
    if product == 0:
        raise DegenerateCorrelation("aggregate lag product is exactly zero")
    return wrap_cfo(-np.angle(product) / (2.0 * np.pi))


def coarse_estimate(frame: ReceivedFrame) -> CfoEstimate:
    """Closed-form estimate from the full lag set [0, 2L)."""
    product = lag_products(frame, range(2 * frame.config.cp_len))
    return CfoEstimate(xi=_angle_estimate(product), mode=MODE_COARSE, iterations=0)


def empirical_cost(frame: ReceivedFrame, xi: float, lag_set) -> float:
    """Residual energy sum_{k,m,l in set} |r1 - exp(-j*2*pi*xi) * r2|^2.

    As a function of xi this is exactly A - B*cos(2*pi*(xi - phi)) for
    frame-dependent A, B, phi; the closed-form estimators return its argmin.
    """
    lags = _normalize_lag_set(lag_set, 2 * frame.config.cp_len)
    per_lag = _residual_energies(frame, xi)
    return float(np.sum(per_lag[lags]))


def _residual_energies(frame: ReceivedFrame, xi: float) -> np.ndarray:
    r1, r2 = _lag_pair_views(frame)
    y = r1 - np.exp(-2j * np.pi * xi) * r2
    return np.sum(np.abs(y) ** 2, axis=(0, 1))


def lag_energy_profile(frame: ReceivedFrame, xi: float) -> LagEnergies:
    """R(l) = sum_{k,m} |y_l(xi)|^2 for every lag l in [0, 2L)."""
    return LagEnergies(r_of_l=_residual_energies(frame, xi))


def theoretical_cost(
    channel, config: OfdmConfig, xi: float, theta: float, noise_power: float
) -> float:
    """Expected CP-window cost: 2L * (sum_m eta_m) * (1 - cos(2*pi*(xi - theta))) + 2*L*M*sigma_z^2.

    ``eta_m`` is the per-antenna received signal energy
    signal_power * sum_l |h_l|^2. Exact for channels whose lag correlation
    is full over the CP window (single-tap); multipath edge lags carry only
    partial correlation, which this closed form deliberately ignores.
    """
    cp = config.cp_len
    eta_sum = config.signal_power * float(np.sum(np.abs(channel.taps) ** 2))
    m = channel.taps.shape[0]
    return float(
        2.0 * cp * eta_sum * (1.0 - np.cos(2.0 * np.pi * (xi - theta)))
        + 2.0 * cp * m * noise_power
    )


def select_subset(r_of_l: LagEnergies, lam: int) -> np.ndarray:
    """Indices of the ``lam`` smallest lag energies, ties toward smaller index."""
    r = r_of_l.r_of_l
    if not 1 <= lam <= r.size:
        raise LambdaOutOfRange(f"lambda must lie in [1, {r.size}], got {lam}")
    order = np.argsort(r, kind="stable")
    return np.sort(order[:lam])


def fixed_fine(frame: ReceivedFrame, lam: int) -> CfoEstimate:
    """Refine the coarse estimate on a fixed-size subset of quiet lags."""
    n_lags = 2 * frame.config.cp_len
    if not 1 <= lam <= n_lags:
        raise LambdaOutOfRange(f"lambda must lie in [1, {n_lags}], got {lam}")
    coarse = coarse_estimate(frame)
    energies = lag_energy_profile(frame, coarse.xi)
    subset = select_subset(energies, lam)
    xi = _angle_estimate(lag_products(frame, subset))
    return CfoEstimate(
        xi=xi,
        mode=MODE_FIXED_FINE,
        lambda_used=lam,
        subset=tuple(int(i) for i in subset),
        lag_energies=energies,
        iterations=1,
    )


def adaptive_fine(frame: ReceivedFrame, iterations: int = 2) -> CfoEstimate:
    """Iteratively re-estimate on the subset of lags below the residual-energy knee.

    Each iteration recomputes R(l) at the current estimate once, sorts the
    lags by residual energy, and keeps the prefix ending just before the
    largest relative jump in the sorted sequence. Lags whose pair is fully
    correlated settle at the noise floor while partially correlated lags
    keep a data-level residual, so the jump separates them and the refined
    estimate is free of the saturation floor that fixed subsets retain.
    Only prefix sizes 1 .. L are candidates: a fully correlated pair needs
    both samples inside the CP window, so at most L lags are floor-free,
    and jumps past L are realization noise. ``iterations == 0`` returns
    the plain coarse estimate.
    """
    if iterations < 0:
        raise LambdaOutOfRange(f"iterations must be >= 0, got {iterations}")
    estimate = coarse_estimate(frame)
    if iterations == 0:
        return estimate
    n_lags = 2 * frame.config.cp_len
    theta_hat = estimate.xi
    products = lag_product_table(frame)
    trace: list[int] = []
    energies = None
    order = None
    lam_opt = None
    for _ in range(iterations):
        energies = lag_energy_profile(frame, theta_hat)
        order = np.argsort(energies.r_of_l, kind="stable")
        sorted_r = energies.r_of_l[order]
        # jump after subset size lam: R_(lam) / R_(lam-1), lam = 1 .. L
        max_lam = frame.config.cp_len
        numer, denom = sorted_r[1 : max_lam + 1], sorted_r[:max_lam]
        ratios = np.ones(max_lam)
        positive = denom > 0
        ratios[positive] = numer[positive] / denom[positive]
        ratios[(denom == 0) & (numer > 0)] = np.inf
        lam_opt = int(np.argmax(ratios)) + 1
        product = complex(np.sum(products[order[:lam_opt]]))
        if product == 0:
            raise DegenerateCorrelation("aggregate lag product is exactly zero")
        theta_hat = wrap_cfo(-np.angle(product) / (2.0 * np.pi))
        trace.append(lam_opt)
    subset = np.sort(order[:lam_opt])
    return CfoEstimate(
        xi=theta_hat,
        mode=MODE_ADAPTIVE_FINE,
        lambda_used=lam_opt,
        subset=tuple(int(i) for i in subset),
        lag_energies=energies,
        iterations=iterations,
        lambda_trace=tuple(trace),
    )
