"""Closed-form expected SNRs and the closed-form equivalent distance.

Notation: ``gamma_u = sum_n w_n exp(-j k t_n . p^u)`` folds the BS geometry and
beamformer into one gain per path, and ``alpha_u(r) = exp(j k r cos(theta_u))``
is the per-path phase seen by a virtual MA at ``r``.  The combined gain of
virtual MA ``z`` is ``s_z = sum_u alpha_u(r_z) gamma_u``; its squared moduli
summed over the array is the "position sum" that the optimizer minimizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import PathSet, SystemParams, TransmitArray
from .errors import DegenerateInstanceError, DomainError

__all__ = [
    "ExpectationInputs",
    "beam_gains",
    "arrival_phases",
    "combined_gains",
    "position_sum",
    "expected_snr_veve",
    "expected_snr_col",
    "expected_delta",
    "d_max",
    "expected_snr_veve_independent",
]


def beam_gains(array: TransmitArray, paths: PathSet, wavelength: float) -> np.ndarray:
    """Per-path beam gain ``gamma_u`` (length ``L``)."""
    phase = (2 * math.pi / wavelength) * (paths.directions() @ array.positions.T)
    return np.exp(-1j * phase) @ array.beamformer


def arrival_phases(positions, arrival_cos, wavelength: float) -> np.ndarray:
    """``alpha_u(r_m)`` as an ``L x M`` array."""
    r = np.atleast_1d(np.asarray(positions, dtype=float))
    return np.exp(1j * (2 * math.pi / wavelength) * np.outer(arrival_cos, r))


@dataclass(frozen=True)
class ExpectationInputs:
    """Everything the closed forms need for one scenario and one virtual-Eve layout."""

    gamma: np.ndarray
    alphas: np.ndarray
    params: SystemParams
    eve_distances: np.ndarray
    veve_distance: float
    arrival_cos: np.ndarray | None = None
    positions: np.ndarray | None = None

    @classmethod
    def build(cls, array, paths, positions, params, eve_distances, veve_distance=1.0):
        cos_arr = paths.arrival_cos()
        r = np.atleast_1d(np.asarray(positions, dtype=float))
        return cls(
            gamma=beam_gains(array, paths, params.wavelength_m),
            alphas=arrival_phases(r, cos_arr, params.wavelength_m),
            params=params,
            eve_distances=np.atleast_1d(np.asarray(eve_distances, dtype=float)),
            veve_distance=float(veve_distance),
            arrival_cos=cos_arr,
            positions=r,
        )

    @property
    def num_paths(self) -> int:
        return self.gamma.shape[0]

    @property
    def num_mas(self) -> int:
        return self.alphas.shape[1]

    def with_positions(self, positions) -> "ExpectationInputs":
        if self.arrival_cos is None:
            raise ValueError("arrival angles are needed to move the virtual MAs")
        r = np.atleast_1d(np.asarray(positions, dtype=float))
        return replace(self, alphas=arrival_phases(r, self.arrival_cos, self.params.wavelength_m), positions=r)

    def with_distance(self, d: float) -> "ExpectationInputs":
        return replace(self, veve_distance=float(d))

    def with_params(self, params: SystemParams) -> "ExpectationInputs":
        return replace(self, params=params)


def combined_gains(inputs: ExpectationInputs) -> np.ndarray:
    """``s_z = sum_u alpha_u(r_z) gamma_u`` for every virtual MA."""
    return inputs.gamma @ inputs.alphas


def position_sum(inputs: ExpectationInputs) -> float:
    """``sum_z |s_z|^2``."""
    s = combined_gains(inputs)
    return float(np.sum(s.real**2 + s.imag**2))


def _scale(params: SystemParams, distance) -> float:
    return params.g0 * distance ** (-params.alpha) / (params.num_paths * params.noise_power_mw)


def expected_snr_veve(inputs: ExpectationInputs) -> float:
    """Closed-form mean SNR at the virtual Eve, ``g0 d^-a / (L s2) * sum_z |s_z|^2``."""
    d = inputs.veve_distance
    if not d > 0:
        raise DomainError("virtual Eve distance must be positive")
    return _scale(inputs.params, d) * position_sum(inputs)


def expected_snr_col(inputs: ExpectationInputs) -> float:
    """Closed-form mean collusion SNR, ``sum_m g0 d_m^-a / (L s2) * sum_u |gamma_u|^2``."""
    d = inputs.eve_distances
    if np.any(d <= 0):
        raise DomainError("Eve distances must be positive")
    g = float(np.sum(np.abs(inputs.gamma) ** 2))
    p = inputs.params
    return float(np.sum(p.g0 * d ** (-p.alpha))) / (p.num_paths * p.noise_power_mw) * g


def expected_delta(inputs: ExpectationInputs) -> float:
    return expected_snr_veve(inputs) - expected_snr_col(inputs)


def d_max(inputs: ExpectationInputs) -> float:
    """Largest distance keeping the expected gap nonnegative; the gap is zero there."""
    s = position_sum(inputs)
    e_col = expected_snr_col(inputs)
    if not s > 0:
        raise DegenerateInstanceError("virtual MAs combine the paths to zero gain")
    if not e_col > 0:
        raise DegenerateInstanceError("collusion SNR has zero mean")
    p = inputs.params
    return (p.g0 * s / (e_col * p.num_paths * p.noise_power_mw)) ** (1.0 / p.alpha)


def expected_snr_veve_independent(inputs: ExpectationInputs) -> float:
    """Exact mean virtual-Eve SNR when the per-path gains are independent.

    With zero-mean independent gains the cross-path terms vanish inside the
    modulus, so each virtual MA contributes ``sum_u |gamma_u|^2`` regardless of
    its position: the mean is ``g0 d^-a / (L s2) * M * sum_u |gamma_u|^2``.
    This is what a Monte Carlo average of :func:`virtual_eve_snr` converges to.
    """
    d = inputs.veve_distance
    if not d > 0:
        raise DomainError("virtual Eve distance must be positive")
    g = float(np.sum(np.abs(inputs.gamma) ** 2))
    return _scale(inputs.params, d) * inputs.num_mas * g
