"""
Quantum reference predictions for the singlet state.

Spin-1/2 convention by default: E(delta) = -cos(delta). With
``photon_convention=True`` angle differences (and aperture widths) are
doubled, E(delta) = -cos(2 delta). An aperture half-width d smears the
orientation uniformly over [theta - d, theta + d], independently per
station, which multiplies the ideal correlation by sinc(d) per station.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from src.errors import ConfigError
from src.model.types import MAX_APERTURE, Setting

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)


def _sinc(x: float) -> float:
    # numpy's sinc is normalized: sinc(x) = sin(pi x) / (pi x)
    return float(np.sinc(x / math.pi))


def _check_inputs(aperture_a: float, aperture_b: float, visibility: float):
    for name, value in (("aperture_a", aperture_a), ("aperture_b", aperture_b)):
        if not math.isfinite(value) or not 0.0 <= value <= MAX_APERTURE:
            raise ConfigError(f"{name} must lie in [0, pi/4], got {value!r}")
    if not 0.0 <= visibility <= 1.0:
        raise ConfigError(f"visibility must lie in [0, 1], got {visibility!r}")


def singlet_correlation(
    delta: float,
    aperture_a: float = 0.0,
    aperture_b: float = 0.0,
    visibility: float = 1.0,
    photon_convention: bool = False,
) -> float:
    _check_inputs(aperture_a, aperture_b, visibility)
    k = 2.0 if photon_convention else 1.0
    return visibility * -math.cos(k * delta) * _sinc(k * aperture_a) * _sinc(k * aperture_b)


def quadrature_correlation(
    delta: float,
    aperture_a: float = 0.0,
    aperture_b: float = 0.0,
    visibility: float = 1.0,
    photon_convention: bool = False,
) -> float:
    """Same quantity as :func:`singlet_correlation`, by explicit averaging over misalignments."""
    _check_inputs(aperture_a, aperture_b, visibility)
    k = 2.0 if photon_convention else 1.0
    opts = {"epsabs": 1e-13, "epsrel": 1e-13}

    def integrand(da, db):
        return -math.cos(k * (delta + da - db))

    if aperture_a == 0.0 and aperture_b == 0.0:
        mean = integrand(0.0, 0.0)
    elif aperture_b == 0.0:
        value, _ = integrate.quad(lambda da: integrand(da, 0.0), -aperture_a, aperture_a, **opts)
        mean = value / (2.0 * aperture_a)
    elif aperture_a == 0.0:
        value, _ = integrate.quad(lambda db: integrand(0.0, db), -aperture_b, aperture_b, **opts)
        mean = value / (2.0 * aperture_b)
    else:
        value, _ = integrate.dblquad(
            lambda db, da: integrand(da, db),
            -aperture_a, aperture_a,
            -aperture_b, aperture_b,
            **opts,
        )
        mean = value / (4.0 * aperture_a * aperture_b)
    return visibility * mean


def setting_correlation(
    setting_a: Setting,
    setting_b: Setting,
    visibility: float = 1.0,
    photon_convention: bool = False,
) -> float:
    return singlet_correlation(
        setting_a.theta - setting_b.theta,
        setting_a.aperture,
        setting_b.aperture,
        visibility,
        photon_convention,
    )


@dataclass(frozen=True)
class QmPrediction:
    expectation: float
    joint: dict[tuple[int, int], float]
    marginal_a: dict[int, float]
    marginal_b: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "expectation": self.expectation,
            "joint": {f"{a:+d},{b:+d}": p for (a, b), p in self.joint.items()},
            "marginal_a": {f"{a:+d}": p for a, p in self.marginal_a.items()},
            "marginal_b": {f"{b:+d}": p for b, p in self.marginal_b.items()},
        }


def singlet_joint(
    delta: float,
    visibility: float = 1.0,
    aperture_a: float = 0.0,
    aperture_b: float = 0.0,
    photon_convention: bool = False,
) -> QmPrediction:
    e = singlet_correlation(delta, aperture_a, aperture_b, visibility, photon_convention)
    joint = {(a, b): 0.25 * (1.0 + a * b * e) for a in (1, -1) for b in (1, -1)}
    marginal_a = {a: joint[(a, 1)] + joint[(a, -1)] for a in (1, -1)}
    marginal_b = {b: joint[(1, b)] + joint[(-1, b)] for b in (1, -1)}
    return QmPrediction(e, joint, marginal_a, marginal_b)


def chsh_prediction(
    a: Setting,
    a_prime: Setting,
    b: Setting,
    b_prime: Setting,
    visibility: float = 1.0,
    photon_convention: bool = False,
) -> float:
    def e(x, y):
        return setting_correlation(x, y, visibility, photon_convention)

    return abs(e(a, b) - e(a, b_prime)) + abs(e(a_prime, b) + e(a_prime, b_prime))


def malus_ratio(theta: float, theta_prime: float) -> float:
    if not (math.isfinite(theta) and math.isfinite(theta_prime)):
        raise ConfigError("polarizer angles must be finite")
    return math.cos(theta - theta_prime) ** 2


def brute_force_chsh_max(grid_points: int = 24, visibility: float = 1.0, photon_convention: bool = False):
    """
    Largest S over all quadruples drawn from an even angle grid.

    Returns ``(s_max, (a, a_prime, b, b_prime))``.
    """
    period = math.pi if photon_convention else 2.0 * math.pi
    k = 2.0 if photon_convention else 1.0
    angles = np.linspace(0.0, period, grid_points, endpoint=False)
    e = -visibility * np.cos(k * (angles[:, None] - angles[None, :]))
    # s[i, j, m, n] for a=i, a'=j, b=m, b'=n
    s = np.abs(e[:, None, :, None] - e[:, None, None, :]) + np.abs(e[None, :, :, None] + e[None, :, None, :])
    flat = int(np.argmax(s))
    i, j, m, n = np.unravel_index(flat, s.shape)
    return float(s.flat[flat]), tuple(float(angles[idx]) for idx in (i, j, m, n))
