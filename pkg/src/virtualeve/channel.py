"""Field-response channel model for the BS array, real Eves and the virtual Eve.

Every receiver shares the same set of ``L`` propagation paths.  The BS side is
described by the field-response matrix ``G(T)`` (``L x N``); a single-antenna
receiver combines the paths with the all-ones vector, while the virtual Eve's
linear MA array sees the per-path phase ``exp(j k r cos(theta_i))`` at each
element.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConstraintError, DomainError

__all__ = [
    "SystemParams",
    "PathSet",
    "TransmitArray",
    "VirtualEve",
    "EveDeployment",
    "direction_vector",
    "transmit_frv",
    "transmit_frm",
    "receive_frv_virtual",
    "receive_frm_virtual",
    "eve_channel",
    "bob_channel",
    "virtual_eve_channel",
    "draw_paths",
    "planar_grid",
    "uniform_beamformer",
    "mr_beamformer",
    "check_positions",
    "default_array",
]

_ANGLE_TOL = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Scalar physics and simulation constants; defaults describe the 28 GHz reference scenario."""

    wavelength_m: float = 0.0107
    g0_db: float = 30.0
    alpha: float = 4.0
    noise_power_mw: float = 0.5
    tx_power_mw: float = 10.0
    num_paths: int = 4
    d_min_wavelengths: float = 0.5
    move_range_wavelengths: float = 4.0
    max_iters: int = 25
    rng_seed: int = 0

    def __post_init__(self):
        if not self.wavelength_m > 0:
            raise DomainError("wavelength_m must be positive")
        if not self.alpha >= 2:
            raise DomainError("path-loss exponent alpha must be >= 2")
        if not self.noise_power_mw > 0:
            raise DomainError("noise_power_mw must be positive")
        if self.tx_power_mw < 0:
            raise DomainError("tx_power_mw must be nonnegative")
        if int(self.num_paths) != self.num_paths or self.num_paths < 1:
            raise DomainError("num_paths must be a positive integer")
        if not self.d_min_wavelengths > 0:
            raise DomainError("d_min_wavelengths must be positive")
        if self.move_range_wavelengths < 0:
            raise DomainError("move_range_wavelengths must be nonnegative")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")

    @property
    def g0(self) -> float:
        """Reference gain at 1 m on a linear scale."""
        return 10.0 ** (self.g0_db / 10.0)

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength_m

    @property
    def d_min_m(self) -> float:
        return self.d_min_wavelengths * self.wavelength_m

    @property
    def move_range_m(self) -> float:
        return self.move_range_wavelengths * self.wavelength_m

    def path_variance(self, distance_m):
        """E|sigma_l|^2 = g0 d^-alpha / L for a receiver at ``distance_m``."""
        d = np.asarray(distance_m, dtype=float)
        if np.any(d <= 0):
            raise DomainError("distance must be positive")
        return self.g0 * d ** (-self.alpha) / self.num_paths

    def max_virtual_mas(self) -> int:
        """Largest array size that fits the moving range at ``D_min`` spacing."""
        return int(math.floor(self.move_range_wavelengths / self.d_min_wavelengths + 1e-9)) + 1

    def require_fits(self, num_mas: int) -> None:
        if num_mas < 1:
            raise ConfigurationError("need at least one virtual MA")
        if (num_mas - 1) * self.d_min_m > self.move_range_m * (1 + 1e-12):
            raise ConfigurationError(
                f"{num_mas} MAs at spacing {self.d_min_wavelengths} wavelengths do not fit "
                f"in a range of {self.move_range_wavelengths} wavelengths"
            )


@dataclass(frozen=True)
class PathSet:
    """Departure angles ``(theta, phi)`` at the BS and arrival angles at the virtual Eve."""

    departures: np.ndarray
    arrivals: np.ndarray

    def __post_init__(self):
        dep = _frozen(self.departures)
        arr = _frozen(self.arrivals)
        if dep.ndim != 2 or dep.shape[1] != 2:
            raise ValueError("departures must have shape (L, 2)")
        if arr.shape != (dep.shape[0],):
            raise ValueError("arrivals must have length L")
        half = math.pi / 2 + _ANGLE_TOL
        if np.any(np.abs(dep) > half):
            raise DomainError("departure angles must lie in [-pi/2, pi/2]")
        if np.any(arr < -_ANGLE_TOL) or np.any(arr > math.pi + _ANGLE_TOL):
            raise DomainError("arrival angles must lie in [0, pi]")
        object.__setattr__(self, "departures", dep)
        object.__setattr__(self, "arrivals", arr)

    @property
    def num_paths(self) -> int:
        return self.arrivals.shape[0]

    def directions(self) -> np.ndarray:
        """Unit direction vectors ``p^j`` stacked as an ``L x 3`` array."""
        th, ph = self.departures[:, 0], self.departures[:, 1]
        return np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), np.sin(th)], axis=1)

    def arrival_cos(self) -> np.ndarray:
        return np.cos(self.arrivals)


@dataclass(frozen=True)
class TransmitArray:
    """BS antenna coordinates (``N x 3``, ``z = 0``) and a real beamformer."""

    positions: np.ndarray
    beamformer: np.ndarray

    def __post_init__(self):
        pos = _frozen(self.positions)
        w = _frozen(self.beamformer)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("positions must have shape (N, 3) with N >= 1")
        if w.shape != (pos.shape[0],):
            raise ValueError("beamformer length must equal the number of antennas")
        if not np.all(np.isfinite(pos)):
            raise DomainError("antenna positions must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "beamformer", w)

    @property
    def num_antennas(self) -> int:
        return self.positions.shape[0]

    @property
    def power(self) -> float:
        return float(self.beamformer @ self.beamformer)


@dataclass(frozen=True)
class VirtualEve:
    """Equivalent distance and x-coordinates of the virtual Eve's linear MA array.

    When ``d_min_m`` and ``move_range_m`` are given the box ``[0, A]`` and the
    adjacent-spacing rule are enforced at construction.
    """

    distance_m: float
    positions_m: np.ndarray
    d_min_m: float | None = None
    move_range_m: float | None = None

    def __post_init__(self):
        if not self.distance_m > 0:
            raise DomainError("virtual Eve distance must be positive")
        r = _frozen(np.atleast_1d(self.positions_m))
        object.__setattr__(self, "positions_m", r)
        if np.any(np.diff(r) < 0):
            raise ConstraintError("virtual MA positions must be sorted ascending")
        if self.d_min_m is not None or self.move_range_m is not None:
            check_positions(r, self.d_min_m or 0.0, self.move_range_m if self.move_range_m is not None else np.inf)

    @property
    def num_mas(self) -> int:
        return self.positions_m.shape[0]


@dataclass(frozen=True)
class EveDeployment:
    """Real Eve distances and their per-path complex gains (diagonals of ``Sigma_m``)."""

    distances_m: np.ndarray
    path_gains: np.ndarray = field(default=None)

    def __post_init__(self):
        d = _frozen(np.atleast_1d(self.distances_m))
        if np.any(d <= 0):
            raise DomainError("Eve distances must be positive")
        object.__setattr__(self, "distances_m", d)
        if self.path_gains is not None:
            g = _frozen(self.path_gains, dtype=complex)
            if g.ndim != 2 or g.shape[0] != d.shape[0]:
                raise ValueError("path_gains must have shape (M, L)")
            object.__setattr__(self, "path_gains", g)

    @property
    def num_eves(self) -> int:
        return self.distances_m.shape[0]

    def sigma(self, m: int) -> np.ndarray:
        """Diagonal path-response matrix of Eve ``m``."""
        return np.diag(self.path_gains[m])


def check_positions(positions, d_min: float, move_range: float, tol: float = 1e-12) -> None:
    """Raise :class:`ConstraintError` unless ``positions`` is sorted, spaced and boxed."""
    r = np.atleast_1d(np.asarray(positions, dtype=float))
    slack = tol * max(1.0, abs(move_range) if np.isfinite(move_range) else 1.0)
    if np.any(r < -slack) or np.any(r > move_range + slack):
        raise ConstraintError("virtual MA position outside the moving range [0, A]")
    if r.size > 1 and np.any(np.diff(r) < d_min - slack):
        raise ConstraintError("adjacent virtual MAs closer than D_min")


def direction_vector(theta: float, phi: float) -> np.ndarray:
    half = math.pi / 2 + _ANGLE_TOL
    if abs(theta) > half or abs(phi) > half:
        raise DomainError("angles must lie in [-pi/2, pi/2]")
    return np.array([math.cos(theta) * math.cos(phi), math.cos(theta) * math.sin(phi), math.sin(theta)])


def transmit_frv(position, paths: PathSet, wavelength: float) -> np.ndarray:
    """Field-response vector ``g_n(t_n)`` of one BS antenna, one entry per path."""
    t = np.asarray(position, dtype=float)
    if t.shape != (3,) or not np.all(np.isfinite(t)):
        raise DomainError("position must be a finite 3-vector")
    return np.exp(1j * (2 * math.pi / wavelength) * (paths.directions() @ t))


def transmit_frm(array: TransmitArray, paths: PathSet, wavelength: float) -> np.ndarray:
    """Field-response matrix ``G(T)`` with shape ``L x N``."""
    return np.exp(1j * (2 * math.pi / wavelength) * (paths.directions() @ array.positions.T))


def receive_frv_virtual(r: float, paths: PathSet, wavelength: float) -> np.ndarray:
    if not np.isfinite(r):
        raise DomainError("position must be finite")
    return np.exp(1j * (2 * math.pi / wavelength) * r * paths.arrival_cos())


def receive_frm_virtual(positions, paths: PathSet, wavelength: float) -> np.ndarray:
    """``F(R)`` with shape ``L x M``."""
    r = np.atleast_1d(np.asarray(positions, dtype=float))
    return np.exp(1j * (2 * math.pi / wavelength) * np.outer(paths.arrival_cos(), r))


def _diagonal(sigma, num_paths: int) -> np.ndarray:
    s = np.asarray(sigma, dtype=complex)
    if s.ndim == 2:
        if s.shape != (num_paths, num_paths):
            raise ValueError(f"path-response matrix must be {num_paths} x {num_paths}")
        if np.any(s[~np.eye(num_paths, dtype=bool)] != 0):
            raise ValueError("path-response matrix must be diagonal")
        return np.diag(s).copy()
    if s.shape != (num_paths,):
        raise ValueError(f"path-response diagonal must have length {num_paths}")
    return s


def eve_channel(array: TransmitArray, paths: PathSet, sigma_m, wavelength: float) -> np.ndarray:
    """Channel ``(f^T Sigma_m G(T))^T`` from the BS to a single-antenna receiver.

    ``sigma_m`` is either the diagonal ``L x L`` path-response matrix or its
    diagonal.  Returns a length-``N`` complex vector.
    """
    s = _diagonal(sigma_m, paths.num_paths)
    return transmit_frm(array, paths, wavelength).T @ s


def bob_channel(array: TransmitArray, paths: PathSet, sigma_bob, wavelength: float) -> np.ndarray:
    """Same model as :func:`eve_channel`, evaluated with Bob's path-response draw."""
    return eve_channel(array, paths, sigma_bob, wavelength)


def virtual_eve_channel(array: TransmitArray, veve: VirtualEve, paths: PathSet, sigma_e, wavelength: float) -> np.ndarray:
    """Channel matrix ``(F(R)^H Sigma^e G(T))^T`` of the virtual Eve, shape ``N x M``."""
    s = _diagonal(sigma_e, paths.num_paths)
    G = transmit_frm(array, paths, wavelength)
    F = receive_frm_virtual(veve.positions_m, paths, wavelength)
    return G.T @ (s[:, None] * F.conj())


def draw_paths(num_paths: int, rng: np.random.Generator) -> PathSet:
    """Uniform departure angles on ``[-pi/2, pi/2]^2`` and arrivals on ``[0, pi]``."""
    half = math.pi / 2
    dep = rng.uniform(-half, half, size=(num_paths, 2))
    arr = rng.uniform(0.0, math.pi, size=num_paths)
    return PathSet(dep, arr)


def planar_grid(rows: int, cols: int, pitch: float) -> np.ndarray:
    """``rows x cols`` grid in the ``z = 0`` plane, first antenna at the origin."""
    xs = np.arange(cols) * pitch
    ys = np.arange(rows) * pitch
    xx, yy = np.meshgrid(xs, ys)
    return np.column_stack([xx.ravel(), yy.ravel(), np.zeros(rows * cols)])


def uniform_beamformer(num_antennas: int, tx_power: float) -> np.ndarray:
    return np.full(num_antennas, math.sqrt(tx_power / num_antennas))


def mr_beamformer(h, tx_power: float) -> np.ndarray:
    """Real maximum-ratio weights toward channel ``h``, scaled to ``tx_power``.

    The model restricts ``w`` to real vectors, so the real part of ``h`` is used.
    """
    v = np.real(np.asarray(h, dtype=complex))
    n = np.linalg.norm(v)
    if n == 0:
        raise DomainError("channel has zero real part")
    return math.sqrt(tx_power) * v / n


def default_array(params: SystemParams, rows: int = 2, cols: int = 4) -> TransmitArray:
    """The 8-element planar BS array at half-wavelength pitch with uniform weights."""
    pos = planar_grid(rows, cols, params.wavelength_m / 2)
    return TransmitArray(pos, uniform_beamformer(rows * cols, params.tx_power_mw))
