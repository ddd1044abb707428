"""Instantaneous SNRs, capacities and secrecy rates for one channel draw.

All functions broadcast over leading axes so a batch of Monte Carlo draws can
be evaluated in one call: channels of shape ``(..., N)`` for single-antenna
receivers and ``(..., N, M)`` for the virtual Eve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "SnrReport",
    "SecrecyReport",
    "snr_eve",
    "virtual_eve_snr",
    "collusion_capacity",
    "capacity",
    "secrecy_rate",
    "delta_snr",
    "snr_report",
    "secrecy_report",
]


@dataclass(frozen=True)
class SnrReport:
    snr_col: float
    snr_veve: float
    per_eve_snr: np.ndarray


@dataclass(frozen=True)
class SecrecyReport:
    """Capacities and the secrecy-rate gap between the two eavesdropper models.

    ``delta_r_sec`` is the collusion secrecy rate minus the virtual-Eve secrecy
    rate, each clamped at zero.  When neither clamp is active it reduces to
    ``c_veve - c_col`` (``unclamped``); ``both_positive`` says which branch held.
    """

    c_bob: float
    c_col: float
    c_veve: float
    delta_r_sec: float
    unclamped: float
    both_positive: bool


def _check_noise(noise):
    if not noise > 0:
        raise DomainError("noise power must be positive")


def snr_eve(h, w, noise):
    """``|h^H w|^2 / noise`` for a single-antenna receiver."""
    _check_noise(noise)
    y = np.einsum("...n,n->...", np.conj(h), np.asarray(w))
    return np.abs(y) ** 2 / noise


def virtual_eve_snr(H, w, noise):
    """``||H^H w||^2 / noise`` summed over the virtual Eve's ``M`` outputs."""
    _check_noise(noise)
    y = np.einsum("...nm,n->...m", np.conj(H), np.asarray(w))
    return np.sum(np.abs(y) ** 2, axis=-1) / noise


def capacity(snr):
    return np.log2(1.0 + np.asarray(snr))


def collusion_capacity(per_eve_snr):
    """``log2(1 + sum_m gamma_m)`` over the last axis."""
    g = np.asarray(per_eve_snr, dtype=float)
    if np.any(g < 0):
        raise DomainError("SNRs must be nonnegative")
    return np.log2(1.0 + np.sum(g, axis=-1))


def secrecy_rate(c_bob, c_eve):
    return np.maximum(np.asarray(c_bob) - np.asarray(c_eve), 0.0)


def delta_snr(snr_veve, snr_col):
    return np.asarray(snr_veve) - np.asarray(snr_col)


def snr_report(eve_channels, veve_channel, w, noise) -> SnrReport:
    """SNRs for one draw; ``eve_channels`` is ``M x N``, ``veve_channel`` is ``N x M``."""
    per_eve = snr_eve(np.asarray(eve_channels), w, noise)
    return SnrReport(float(np.sum(per_eve)), float(virtual_eve_snr(veve_channel, w, noise)), per_eve)


def secrecy_report(snr_bob, per_eve_snr, snr_veve) -> SecrecyReport:
    c_bob = float(capacity(snr_bob))
    c_col = float(collusion_capacity(per_eve_snr))
    c_veve = float(capacity(snr_veve))
    r_col = float(secrecy_rate(c_bob, c_col))
    r_veve = float(secrecy_rate(c_bob, c_veve))
    both = c_bob >= c_col and c_bob >= c_veve
    return SecrecyReport(c_bob, c_col, c_veve, r_col - r_veve, c_veve - c_col, both)
