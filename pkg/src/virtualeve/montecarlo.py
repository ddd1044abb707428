"""Seeded Monte Carlo draws of path responses and empirical SNR/secrecy estimators.

Random streams are derived from ``SeedSequence(seed, spawn_key=...)`` so that
every entity gets its own independent generator:

* trial streams ``(0, block, entity)`` with blocks of :data:`BLOCK` trials and
  entity ``0`` for Bob, ``1`` for the virtual Eve, ``2 + m`` for Eve ``m`` and
  :data:`ANGLE_ENTITY` for per-trial angles;
* scenario streams ``(1, 0, 0)`` for the shared path angles and ``(1, 1, m)``
  for the distance of Eve ``m``, so Eve ``m`` sits at the same distance
  whatever the total number of Eves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import PathSet, SystemParams, TransmitArray, default_array, draw_paths
from .errors import DomainError
from .expectation import ExpectationInputs
from .metrics import capacity, collusion_capacity, secrecy_rate, snr_eve, virtual_eve_snr

__all__ = [
    "BLOCK",
    "ANGLE_ENTITY",
    "TrialConfig",
    "Scenario",
    "EmpiricalResult",
    "substream",
    "sample_path_gains",
    "sample_path_response",
    "draw_eve_distances",
    "build_scenario",
    "empirical_expectations",
    "cross_term_probe",
    "cross_term_band",
]

BLOCK = 1000
BOB, VEVE, EVE0 = 0, 1, 2
ANGLE_ENTITY = 10_000


@dataclass(frozen=True)
class TrialConfig:
    num_trials: int = 5000
    seed: int = 0
    eve_distance_mean_m: float = 40.0
    eve_distance_std_m: float = 5.0
    fixed_eve_distances: tuple | None = None
    redraw_angles: bool = False

    def __post_init__(self):
        if int(self.num_trials) != self.num_trials or self.num_trials < 1:
            raise DomainError("num_trials must be a positive integer")
        if not self.eve_distance_std_m >= 0:
            raise DomainError("eve_distance_std_m must be nonnegative")
        if not self.eve_distance_mean_m > 0:
            raise DomainError("eve_distance_mean_m must be positive")
        if self.fixed_eve_distances is not None:
            d = tuple(float(x) for x in self.fixed_eve_distances)
            if any(not x > 0 for x in d):
                raise DomainError("fixed Eve distances must be positive")
            object.__setattr__(self, "fixed_eve_distances", d)


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def sample_path_gains(d, params: SystemParams, rng: np.random.Generator, size=()) -> np.ndarray:
    """i.i.d. ``CN(0, g0 d^-a / L)`` path gains of shape ``size + (L,)``."""
    if not np.all(np.asarray(d) > 0):
        raise DomainError("distance must be positive")
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    shape = shape + (params.num_paths,)
    scale = math.sqrt(float(params.path_variance(d)) / 2.0)
    z = rng.standard_normal(shape + (2,))
    return scale * (z[..., 0] + 1j * z[..., 1])


def sample_path_response(d, params: SystemParams, rng: np.random.Generator) -> np.ndarray:
    """One diagonal ``L x L`` path-response matrix."""
    return np.diag(sample_path_gains(d, params, rng))


def draw_eve_distances(config: TrialConfig, num_eves: int) -> np.ndarray:
    """Gaussian Eve distances, redrawn below 1 m; fixed distances win when given."""
    if config.fixed_eve_distances is not None:
        d = np.array(config.fixed_eve_distances)
        if d.shape[0] != num_eves:
            raise DomainError(f"{d.shape[0]} fixed Eve distances given for {num_eves} Eves")
        return d
    out = np.empty(num_eves)
    for m in range(num_eves):
        rng = substream(config.seed, 1, 1, m)
        x = rng.normal(config.eve_distance_mean_m, config.eve_distance_std_m)
        while x < 1.0:
            x = rng.normal(config.eve_distance_mean_m, config.eve_distance_std_m)
        out[m] = x
    return out


@dataclass(frozen=True)
class Scenario:
    """Geometry for one experiment: BS array, shared paths, all receivers."""

    params: SystemParams
    array: TransmitArray
    paths: PathSet
    eve_distances: np.ndarray
    bob_distance: float
    veve_positions: np.ndarray
    veve_distance: float = 1.0

    @property
    def num_eves(self) -> int:
        return self.eve_distances.shape[0]

    def with_virtual_eve(self, distance, positions) -> "Scenario":
        return replace(self, veve_distance=float(distance), veve_positions=np.atleast_1d(np.asarray(positions, float)))

    def with_params(self, params: SystemParams) -> "Scenario":
        return replace(self, params=params)

    def expectation_inputs(self) -> ExpectationInputs:
        return ExpectationInputs.build(self.array, self.paths, self.veve_positions, self.params,
                                       self.eve_distances, self.veve_distance)


def build_scenario(params: SystemParams, config: TrialConfig, num_eves: int, num_mas: int,
                   bob_distance: float = 20.0, array: TransmitArray | None = None) -> Scenario:
    """Draw angles and Eve distances for one experiment; MAs start evenly spread."""
    params.require_fits(num_mas)
    paths = draw_paths(params.num_paths, substream(config.seed, 1, 0, 0))
    return Scenario(
        params=params,
        array=array if array is not None else default_array(params),
        paths=paths,
        eve_distances=draw_eve_distances(config, num_eves),
        bob_distance=float(bob_distance),
        veve_positions=np.linspace(0.0, params.move_range_m, num_mas),
    )


@dataclass(frozen=True)
class EmpiricalResult:
    """Sample means plus per-trial capacities and secrecy rates."""

    e_snr_bob: float
    e_snr_col: float
    e_snr_veve: float
    e_delta: float
    c_bob: np.ndarray
    c_col: np.ndarray
    c_veve: np.ndarray
    r_col: np.ndarray
    r_veve: np.ndarray

    @property
    def delta_r_sec(self) -> np.ndarray:
        return self.r_col - self.r_veve

    @property
    def num_trials(self) -> int:
        return self.c_bob.shape[0]


def _frm(directions, positions, k):
    # (..., L, 3) x (N, 3) -> (..., L, N)
    return np.exp(1j * k * (directions @ positions.T))


def _angle_batch(params, rng, n):
    half = math.pi / 2
    dep = rng.uniform(-half, half, size=(n, params.num_paths, 2))
    arr = rng.uniform(0.0, math.pi, size=(n, params.num_paths))
    th, ph = dep[..., 0], dep[..., 1]
    dirs = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), np.sin(th)], axis=-1)
    return dirs, np.cos(arr)


def _block(config: TrialConfig, scenario: Scenario, b: int, n: int):
    p = scenario.params
    k = p.wavenumber
    w = scenario.array.beamformer
    r = scenario.veve_positions
    if config.redraw_angles:
        dirs, cos_arr = _angle_batch(p, substream(config.seed, 0, b, ANGLE_ENTITY), n)
    else:
        dirs, cos_arr = scenario.paths.directions()[None], scenario.paths.arrival_cos()[None]
    G = _frm(dirs, scenario.array.positions, k)          # (n or 1, L, N)
    F = np.exp(1j * k * cos_arr[..., :, None] * r)       # (n or 1, L, M)

    s_bob = sample_path_gains(scenario.bob_distance, p, substream(config.seed, 0, b, BOB), n)
    h_bob = np.einsum("tl,tln->tn", s_bob, np.broadcast_to(G, (n,) + G.shape[1:]))
    snr_bob = snr_eve(h_bob, w, p.noise_power_mw)

    per_eve = np.empty((n, scenario.num_eves))
    for m, dm in enumerate(scenario.eve_distances):
        s_m = sample_path_gains(dm, p, substream(config.seed, 0, b, EVE0 + m), n)
        h_m = np.einsum("tl,tln->tn", s_m, np.broadcast_to(G, (n,) + G.shape[1:]))
        per_eve[:, m] = snr_eve(h_m, w, p.noise_power_mw)

    s_v = sample_path_gains(scenario.veve_distance, p, substream(config.seed, 0, b, VEVE), n)
    H = np.einsum("tln,tl,tlm->tnm", np.broadcast_to(G, (n,) + G.shape[1:]), s_v,
                  np.broadcast_to(F.conj(), (n,) + F.shape[1:]))
    snr_v = virtual_eve_snr(H, w, p.noise_power_mw)
    return snr_bob, per_eve, snr_v


def empirical_expectations(config: TrialConfig, scenario: Scenario) -> EmpiricalResult:
    """Average instantaneous SNRs and secrecy rates over ``config.num_trials`` draws."""
    bobs, eves, veves = [], [], []
    for b, start in enumerate(range(0, config.num_trials, BLOCK)):
        n = min(BLOCK, config.num_trials - start)
        sb, se, sv = _block(config, scenario, b, n)
        bobs.append(sb)
        eves.append(se)
        veves.append(sv)
    snr_bob = np.concatenate(bobs)
    per_eve = np.concatenate(eves)
    snr_v = np.concatenate(veves)
    snr_col = per_eve.sum(axis=1)

    c_bob = capacity(snr_bob)
    c_col = collusion_capacity(per_eve)
    c_veve = capacity(snr_v)
    e_col = float(np.mean(snr_col))
    e_veve = float(np.mean(snr_v))
    return EmpiricalResult(
        e_snr_bob=float(np.mean(snr_bob)),
        e_snr_col=e_col,
        e_snr_veve=e_veve,
        e_delta=float(np.mean(snr_v - snr_col)),
        c_bob=c_bob,
        c_col=c_col,
        c_veve=c_veve,
        r_col=secrecy_rate(c_bob, c_col),
        r_veve=secrecy_rate(c_bob, c_veve),
    )


def cross_term_probe(d, params: SystemParams, num_trials: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical ``E[sigma_u conj(sigma_v)]`` as an ``L x L`` matrix."""
    s = sample_path_gains(d, params, rng, num_trials)
    return s.T @ s.conj() / num_trials


def cross_term_band(d, params: SystemParams, num_trials: int, k: float = 3.0) -> float:
    """``k`` standard errors of an off-diagonal probe entry (``std = g0 d^-a / L``)."""
    return k * float(params.path_variance(d)) / math.sqrt(num_trials)
