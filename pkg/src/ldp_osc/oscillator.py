"""Exact laws of the linear stochastic oscillator x'' + x = alpha * dW/dt.

Writing the state as (X, Y) with Y = X', the solution rotates the initial
state and adds a Gaussian convolution integral. Everything here is closed
form: the law of the integrated position, the law of the terminal position,
the long-horizon decay rates of the two path observables, and an exact path
sampler that reproduces the one-step transition law without discretization
bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

MEAN_POSITION = "mean-position"
MEAN_VELOCITY = "mean-velocity"
OBSERVABLES = (MEAN_POSITION, MEAN_VELOCITY)

# Below this step the one-step noise covariance is numerically singular.
MIN_STEP = 1e-8


def check_observable(observable):
    if observable not in OBSERVABLES:
        raise ValueError(
            f"unknown observable {observable!r}; expected one of {OBSERVABLES}")
    return observable


@dataclass(frozen=True)
class OscillatorParams:
    """Noise intensity and initial state (position x0, velocity y0)."""

    alpha: float = 1.0
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class GaussianLaw:
    """Scalar Gaussian distribution as a (mean, variance) pair."""

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"variance must be nonnegative, got {self.variance}")

    @property
    def sigma(self):
        return math.sqrt(self.variance)

    def scaled(self, factor):
        """Law of factor * X."""
        return GaussianLaw(self.mean * factor, self.variance * factor * factor)


@dataclass(frozen=True)
class RateFunction:
    """Decay rate profile: either y -> coefficient * y**2, or the degenerate
    profile that is 0 at y = 0 and infinite elsewhere."""

    kind: str
    coefficient: float | None = None

    def __post_init__(self):
        if self.kind == "quadratic":
            if self.coefficient is None or not self.coefficient >= 0:
                raise ValueError("quadratic rate needs a nonnegative coefficient")
        elif self.kind == "degenerate":
            if self.coefficient is not None:
                raise ValueError("degenerate rate carries no coefficient")
        else:
            raise ValueError(f"unknown rate kind {self.kind!r}")

    @classmethod
    def quadratic(cls, coefficient):
        return cls("quadratic", float(coefficient))

    @classmethod
    def degenerate(cls):
        return cls("degenerate")

    @property
    def is_degenerate(self):
        return self.kind == "degenerate"

    def __call__(self, y):
        if self.kind == "quadratic":
            return self.coefficient * y * y
        return 0.0 if y == 0 else math.inf

    def infimum(self, lo, hi):
        """Infimum over [lo, hi]; the minimizer is the point closest to 0."""
        if lo > hi:
            raise ValueError("empty interval")
        if lo <= 0.0 <= hi:
            return 0.0
        edge = lo if lo > 0 else hi
        return self(edge)


def _require_horizon(T):
    if not T > 0:
        raise ValueError(f"time horizon must be positive, got {T}")


def mean_position_law(params, T):
    """Law of the integrated position int_0^T X_t dt (T times the mean position).

    The noise part collapses to a single stochastic integral with kernel
    1 - cos(T - s), which gives the variance below by the isometry of the
    integral; the drift part integrates the free rotation.
    """
    _require_horizon(T)
    mean = params.x0 * math.sin(T) + params.y0 * (1.0 - math.cos(T))
    variance = params.alpha ** 2 * (
        1.5 * T - 2.0 * math.sin(T) + 0.25 * math.sin(2.0 * T))
    return GaussianLaw(mean, max(variance, 0.0))


def terminal_position_law(params, T):
    """Law of X_T."""
    _require_horizon(T)
    mean = params.x0 * math.cos(T) + params.y0 * math.sin(T)
    variance = params.alpha ** 2 * (0.5 * T - 0.25 * math.sin(2.0 * T))
    return GaussianLaw(mean, max(variance, 0.0))


def continuous_rate(observable, params):
    """Decay rate of tail probabilities of the observable over horizon T."""
    check_observable(observable)
    a2 = params.alpha ** 2
    if observable == MEAN_POSITION:
        return RateFunction.quadratic(1.0 / (3.0 * a2))
    return RateFunction.quadratic(1.0 / a2)


def continuous_log_mgf_coefficient(observable, params):
    """c with lim_T (1/T) log E exp(lambda * T * observable_T) = c * lambda**2."""
    check_observable(observable)
    a2 = params.alpha ** 2
    return 0.75 * a2 if observable == MEAN_POSITION else 0.25 * a2


def rotation(delta):
    """Free-flow matrix over time delta."""
    c, s = math.cos(delta), math.sin(delta)
    return np.array([[c, s], [-s, c]])


def step_noise_covariance(delta):
    """Covariance of (dW, I1, I2) over one step, where I1 = int sin(delta-s) dW
    and I2 = int cos(delta-s) dW are the exact noise contributions to (X, Y)."""
    s, c = math.sin(delta), math.cos(delta)
    s2 = math.sin(2.0 * delta)
    return np.array([
        [delta, 1.0 - c, s],
        [1.0 - c, 0.5 * delta - 0.25 * s2, 0.5 * s * s],
        [s, 0.5 * s * s, 0.5 * delta + 0.25 * s2],
    ])


def _symmetric_sqrt(C):
    # eigh keeps the factor symmetric; Cholesky would also work but reorders
    # sensitivity onto the last column
    w, V = np.linalg.eigh(C)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


@dataclass(frozen=True)
class PathSample:
    """Exact-solution paths on a uniform grid.

    dw holds the Brownian increments that drove each step, so a one-step
    method can be run on the very same noise (strong-error coupling).
    """

    delta: float
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dw: np.ndarray


def sample_exact_path(params, delta, steps, *, paths=1, seed=0):
    """Sample `paths` exact trajectories over `steps` steps of size `delta`.

    Each step draws the Gaussian triple (dW, I1, I2) jointly from its exact
    3x3 covariance (symmetric square root factorization), then applies
    (X, Y) <- R(delta) (X, Y) + alpha (I1, I2). Three counter slots are
    consumed per step (indices 3n, 3n+1, 3n+2), so the stream layout is
    independent of how many paths run in a batch.
    """
    if not delta > 0:
        raise ValueError(f"step size must be positive, got {delta}")
    if delta < MIN_STEP:
        raise ValueError(
            f"step {delta} below {MIN_STEP}: noise covariance is numerically singular")
    if steps < 1:
        raise ValueError("need at least one step")
    L = _symmetric_sqrt(step_noise_covariance(delta))
    R = rotation(delta)
    keys = rng.stream_keys(seed, np.arange(paths))
    x = np.full(paths, float(params.x0))
    y = np.full(paths, float(params.y0))
    xs = np.empty((paths, steps + 1))
    ys = np.empty((paths, steps + 1))
    dw = np.empty((paths, steps))
    xs[:, 0] = x
    ys[:, 0] = y
    for n in range(steps):
        tri = rng.normals(keys, 3 * n, 3) @ L.T
        dw[:, n] = tri[:, 0]
        x, y = (R[0, 0] * x + R[0, 1] * y + params.alpha * tri[:, 1],
                R[1, 0] * x + R[1, 1] * y + params.alpha * tri[:, 2])
        xs[:, n + 1] = x
        ys[:, n + 1] = y
    times = delta * np.arange(steps + 1)
    return PathSample(delta, times, xs, ys, dw)
