"""
Local outcome models of the contextual hidden-variable form

    a = A_x(lambda1, lambda_x),    b = B_y(lambda2, lambda_y),
    P(lambda) = P(lambda1, lambda2) Px(lambda_x) Py(lambda_y).

A plugin samples the three factors from separate generators and maps
draws to outcomes in {-1, 0, +1}. ``outcome_a`` never sees Bob's setting
or variables and vice versa; all methods are vectorized over trials and
hold no per-trial state.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from src.errors import ConfigError, DegenerateModelError
from src.model.types import Setting

TWO_PI = 2.0 * math.pi


class ModelPlugin(ABC):
    name: str = "model"

    @abstractmethod
    def params(self) -> dict[str, float | list[float]]:
        ...

    @abstractmethod
    def sample_source(self, rng: np.random.Generator, n: int):
        """Return (lambda1, lambda2) arrays of length n."""

    @abstractmethod
    def sample_instrument_a(self, rng: np.random.Generator, n: int):
        ...

    @abstractmethod
    def sample_instrument_b(self, rng: np.random.Generator, n: int):
        ...

    @abstractmethod
    def outcome_a(self, lambda1, lambda_x, setting_a: Setting) -> np.ndarray:
        ...

    @abstractmethod
    def outcome_b(self, lambda2, lambda_y, setting_b: Setting) -> np.ndarray:
        ...

    def to_dict(self) -> dict:
        return {"name": self.name, "params": self.params()}


def _sign(x: np.ndarray) -> np.ndarray:
    # sign(0) resolves to +1
    return np.where(x >= 0.0, 1, -1).astype(np.int8)


class ConstantModel(ModelPlugin):
    """A and B ignore every variable and return fixed outcomes."""

    name = "constant"

    def __init__(self, value_a: int = 1, value_b: int = -1):
        for value in (value_a, value_b):
            if value not in (-1, 0, 1):
                raise ConfigError(f"constant outcome must be -1, 0 or +1, got {value!r}")
        self.value_a = int(value_a)
        self.value_b = int(value_b)

    def params(self):
        return {"value_a": self.value_a, "value_b": self.value_b}

    def sample_source(self, rng, n):
        zeros = np.zeros(n, dtype=np.int8)
        return zeros, zeros

    def sample_instrument_a(self, rng, n):
        return np.zeros(n, dtype=np.int8)

    def sample_instrument_b(self, rng, n):
        return np.zeros(n, dtype=np.int8)

    def outcome_a(self, lambda1, lambda_x, setting_a):
        return np.full(np.shape(lambda1), self.value_a, dtype=np.int8)

    def outcome_b(self, lambda2, lambda_y, setting_b):
        return np.full(np.shape(lambda2), self.value_b, dtype=np.int8)


class ThresholdDetectionModel(ModelPlugin):
    """
    Shared orientation phi with a random detection threshold per station.

    lambda1 = phi ~ U[0, 2pi). With probability ``visibility`` the source
    emits the correlated partner lambda2 = phi + source_noise * z (z standard
    normal, wrapped); otherwise lambda2 is an independent uniform angle.
    Instrument variables are (tau, u): tau is the detection threshold with
    density g on [0, 1] (an atom ``zero_threshold_mass`` at 0 plus K equal
    bins weighted by ``weights``), u a uniform draw that sets the per-trial
    misalignment inside the setting's aperture.

        A = sign(cos(phi - theta_a))    if |cos(phi - theta_a)| >= tau_x else 0
        B = -sign(cos(lambda2 - theta_b)) if |cos(lambda2 - theta_b)| >= tau_y else 0
    """

    name = "threshold"

    def __init__(
        self,
        weights=None,
        bins: int = 8,
        source_noise: float = 0.0,
        visibility: float = 1.0,
        zero_threshold_mass: float = 0.0,
    ):
        if weights is None:
            weights = np.full(bins, 1.0 / bins)
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 1:
            raise ConfigError("threshold weights must be a non-empty vector")
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise ConfigError("threshold weights must be finite and non-negative")
        if not 0.0 <= zero_threshold_mass <= 1.0:
            raise ConfigError(f"zero_threshold_mass must lie in [0, 1], got {zero_threshold_mass!r}")
        if weights.sum() <= 0.0 and zero_threshold_mass < 1.0:
            raise ConfigError("threshold weights must not all be zero")
        if not (math.isfinite(source_noise) and source_noise >= 0.0):
            raise ConfigError(f"source_noise must be >= 0, got {source_noise!r}")
        if not 0.0 <= visibility <= 1.0:
            raise ConfigError(f"visibility must lie in [0, 1], got {visibility!r}")

        total = weights.sum()
        self.weights = weights / total if total > 0 else np.full(weights.size, 1.0 / weights.size)
        self.source_noise = float(source_noise)
        self.visibility = float(visibility)
        self.zero_threshold_mass = float(zero_threshold_mass)
        self._edges = np.linspace(0.0, 1.0, self.weights.size + 1)
        self._cdf = np.concatenate([[0.0], np.cumsum(self.weights)])
        self._cdf[-1] = 1.0

    @property
    def bins(self) -> int:
        return int(self.weights.size)

    def params(self):
        return {
            "weights": self.weights.tolist(),
            "source_noise": self.source_noise,
            "visibility": self.visibility,
            "zero_threshold_mass": self.zero_threshold_mass,
        }

    def detection_probability(self, c):
        """G(c) = P(tau <= c): probability of a click when |cos| = c."""
        c = np.asarray(c, dtype=float)
        return self.zero_threshold_mass + (1.0 - self.zero_threshold_mass) * np.interp(c, self._edges, self._cdf)

    def sample_source(self, rng, n):
        phi = rng.uniform(0.0, TWO_PI, n)
        noise = rng.standard_normal(n)
        partner = rng.uniform(0.0, TWO_PI, n)
        correlated = rng.random(n) < self.visibility
        lambda2 = np.where(correlated, phi + self.source_noise * noise, partner)
        return phi, np.mod(lambda2, TWO_PI)

    def _sample_instrument(self, rng, n):
        u = rng.random(n)
        misalign = rng.random(n)
        p0 = self.zero_threshold_mass
        if p0 >= 1.0:
            tau = np.zeros(n)
        else:
            scaled = np.clip((u - p0) / (1.0 - p0), 0.0, 1.0)
            tau = np.where(u < p0, 0.0, np.interp(scaled, self._cdf, self._edges))
        return np.column_stack([tau, misalign])

    def sample_instrument_a(self, rng, n):
        return self._sample_instrument(rng, n)

    def sample_instrument_b(self, rng, n):
        return self._sample_instrument(rng, n)

    @staticmethod
    def _local_outcome(angle, instrument, setting: Setting, sign: int) -> np.ndarray:
        tau = instrument[:, 0]
        delta = (2.0 * instrument[:, 1] - 1.0) * setting.aperture
        c = np.cos(angle - setting.theta - delta)
        clicked = np.abs(c) >= tau
        return np.where(clicked, sign * _sign(c), 0).astype(np.int8)

    def outcome_a(self, lambda1, lambda_x, setting_a):
        return self._local_outcome(lambda1, lambda_x, setting_a, 1)

    def outcome_b(self, lambda2, lambda_y, setting_b):
        return self._local_outcome(lambda2, lambda_y, setting_b, -1)

    def expectation(self, setting_a: Setting, setting_b: Setting, n_phi: int = 4096) -> float:
        """
        Post-selected E by quadrature over phi (midpoint rule), Gauss-Hermite
        over the source noise and Gauss-Legendre over aperture misalignments.
        """
        phi = (np.arange(n_phi) + 0.5) * (TWO_PI / n_phi)

        def misalignments(aperture):
            if aperture == 0.0:
                return np.zeros(1), np.ones(1)
            nodes, w = leggauss(8)
            return nodes * aperture, w / 2.0

        def station(angle_offsets, offset_weights, setting, sign):
            da, wa = misalignments(setting.aperture)
            shift = (angle_offsets[:, None] - da[None, :]).ravel()
            weight = (offset_weights[:, None] * wa[None, :]).ravel()
            c = np.cos(phi[:, None] + shift[None, :] - setting.theta)
            g = self.detection_probability(np.abs(c))
            signed = sign * np.where(c >= 0.0, 1.0, -1.0) * g
            return signed @ weight, g @ weight

        f_a, d_a = station(np.zeros(1), np.ones(1), setting_a, 1)
        if self.source_noise > 0.0:
            z, wz = hermegauss(32)
            offsets, offset_weights = self.source_noise * z, wz / wz.sum()
        else:
            offsets, offset_weights = np.zeros(1), np.ones(1)
        f_b, d_b = station(offsets, offset_weights, setting_b, -1)

        v = self.visibility
        numerator = v * np.mean(f_a * f_b) + (1.0 - v) * np.mean(f_a) * np.mean(f_b)
        denominator = v * np.mean(d_a * d_b) + (1.0 - v) * np.mean(d_a) * np.mean(d_b)
        if denominator <= 0.0:
            raise DegenerateModelError("threshold model never produces a coincident click")
        return float(numerator / denominator)
