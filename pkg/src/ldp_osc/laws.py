"""Exact finite-N Gaussian laws of a one-step method and interval probabilities.

Two observables drive everything downstream: the running position sum
sum_{n=0}^{N-1} x_n and the terminal position x_N. Both are Gaussian with
means and variances that close in the trigonometric sums of `spectral`.
`oracle_moments` recomputes the same moments by brute-force propagation of an
augmented first/second-moment recursion; the two routes share no code path
beyond the method coefficients, so their agreement is a strong correctness
check and is asserted in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .methods import coupling, evaluate
from .oscillator import GaussianLaw
from .spectral import alpha_hat, beta_hat, s_alpha, s_beta, spectral_data, \
    weight_vector

# det within this distance of 1 routes the terminal variance through the
# half-angle closed forms, which stay O(1) accurate for N in the millions
SYMPLECTIC_TOL = 1e-12


def law_NA_N(method, h, N, params):
    """Law of the running position sum sum_{n=0}^{N-1} x_n after N steps."""
    if N < 2:
        raise ValueError(f"running-sum law needs N >= 2, got {N}")
    A, b = evaluate(method, h)
    sd = spectral_data(A)
    b1 = float(b[0])
    q = float(coupling(A, b))
    s_a = s_alpha(N, sd)
    s_b = s_beta(N, sd)
    mean = (1.0 + A[0, 0] * s_a + s_b) * params.x0 + A[0, 1] * s_a * params.y0
    c = weight_vector(N, sd, b1, q)
    variance = params.alpha ** 2 * h * float(np.dot(c, c))
    return GaussianLaw(mean, max(variance, 0.0))


def law_x_N(method, h, N, params):
    """Law of the terminal position x_N after N steps."""
    if N < 1:
        raise ValueError(f"terminal law needs N >= 1, got {N}")
    A, b = evaluate(method, h)
    sd = spectral_data(A)
    b1 = float(b[0])
    q = float(coupling(A, b))
    a_top = alpha_hat(N - 1, sd)
    mean = (A[0, 0] * a_top + beta_hat(N - 1, sd)) * params.x0 \
        + A[0, 1] * a_top * params.y0
    if abs(sd.det - 1.0) <= SYMPLECTIC_TOL:
        total = _terminal_weight_square_sum_det1(N, sd, b1, q)
    else:
        # general det: the N increment weights, summed directly
        ah = alpha_hat(np.arange(-1, N), sd)
        d = b1 * ah[1:] + q * ah[:-1]
        total = float(np.dot(d, d))
    variance = params.alpha ** 2 * h * max(total, 0.0)
    return GaussianLaw(mean, variance)


def _terminal_weight_square_sum_det1(N, sd, b1, q):
    """sum_{n=0}^{N-1} (b1 alpha_hat(n) + q alpha_hat(n-1))^2 for det = 1.

    Splits into sum of squares and a cross term, each a closed Dirichlet-type
    sum in the rotation angle.
    """
    th, s = sd.theta, sd.sin_theta
    sq = ((N - 1) / 2.0
          - (math.sin((2 * N - 1) * th) - math.sin(th)) / (4.0 * s)) / (s * s)
    cross = ((N - 1) * math.cos(th)
             - (math.sin(2 * N * th) - math.sin(2.0 * th)) / (2.0 * s)) / (s * s)
    top = alpha_hat(N - 1, sd)
    return (b1 * b1 + q * q) * sq + b1 * b1 * top * top + b1 * q * cross


@dataclass(frozen=True)
class AugmentedMoments:
    """Mean vector and covariance of (x_N, y_N, sum of positions)."""

    mean: np.ndarray
    covariance: np.ndarray

    @property
    def running_sum_law(self):
        return GaussianLaw(float(self.mean[2]),
                           max(float(self.covariance[2, 2]), 0.0))

    @property
    def position_law(self):
        return GaussianLaw(float(self.mean[0]),
                           max(float(self.covariance[0, 0]), 0.0))


def oracle_moments(method, h, N, params):
    """Moments of (x_N, y_N, sum_{n=0}^{N-1} x_n) by direct propagation.

    The state is augmented with an accumulator that absorbs x before each
    step, so after N iterations it holds the sum over n = 0..N-1. O(N) and
    independent of the closed-form route in law_NA_N / law_x_N.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    A, b = evaluate(method, h)
    step = np.zeros((3, 3))
    step[:2, :2] = A
    step[2, 0] = 1.0
    step[2, 2] = 1.0
    noise_vec = np.array([b[0], b[1], 0.0])
    noise = params.alpha ** 2 * h * np.outer(noise_vec, noise_vec)
    m = np.array([params.x0, params.y0, 0.0])
    C = np.zeros((3, 3))
    for _ in range(N):
        m = step @ m
        C = step @ C @ step.T + noise
    return AugmentedMoments(m, C)


class IntervalProbability(NamedTuple):
    p: float
    log_p: float


def interval_probability(law, lo, hi):
    """P(Z in [lo, hi]) for Z ~ law, with a log value that survives far tails.

    One-sided tails are computed entirely in log space via log_ndtr, so
    intervals hundreds of standard deviations out still return a finite
    log_p even when p itself underflows to 0. Infinite endpoints are allowed.
    """
    if not lo < hi:
        raise ValueError(f"interval needs lo < hi, got [{lo}, {hi}]")
    if law.variance == 0.0:
        inside = lo <= law.mean <= hi
        return IntervalProbability(1.0 if inside else 0.0,
                                   0.0 if inside else -math.inf)
    zlo = (lo - law.mean) / law.sigma
    zhi = (hi - law.mean) / law.sigma
    if zlo >= 0.0:
        log_p = _log_ndtr_difference(special.log_ndtr(-zlo),
                                     special.log_ndtr(-zhi))
        return IntervalProbability(math.exp(log_p), log_p)
    if zhi <= 0.0:
        log_p = _log_ndtr_difference(special.log_ndtr(zhi),
                                     special.log_ndtr(zlo))
        return IntervalProbability(math.exp(log_p), log_p)
    p = float(special.ndtr(zhi) - special.ndtr(zlo))
    return IntervalProbability(p, math.log(p) if p > 0.0 else -math.inf)


def _log_ndtr_difference(log_a, log_b):
    # log(exp(log_a) - exp(log_b)) with log_b <= log_a, both probabilities
    gap = min(log_b - log_a, 0.0)
    rest = -math.expm1(gap)
    return log_a + math.log(rest) if rest > 0.0 else -math.inf


def gaussian_tail_bound(mu, sigma, x, tail="upper"):
    """Mills-ratio bound on a Gaussian tail beyond x.

    For the upper tail, P(Z >= x) <= phi(z) / z with z = (x - mu) / sigma;
    symmetric for the lower tail. Valid only when x is strictly on the tail
    side of the mean (z > 0).
    """
    if tail not in ("upper", "lower"):
        raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = (x - mu) / sigma if tail == "upper" else (mu - x) / sigma
    if z <= 0.0:
        raise ValueError("tail bound needs x strictly beyond the mean")
    return math.exp(-0.5 * z * z) / (z * math.sqrt(2.0 * math.pi))
