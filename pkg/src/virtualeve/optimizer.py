"""Alternating optimization of the equivalent distance and the virtual MA positions.

The distance step is exact: for fixed positions the expected gap is a
decreasing power law in ``d`` and its root is :func:`~virtualeve.expectation.d_max`.
For fixed ``d`` the gap is ``c * sum_m |s(r_m)|^2 - const`` with ``s`` a sum of
complex exponentials in ``r_m``, so the position step minimizes that sum under
the box ``[0, A]`` and the adjacent-spacing rule.  It is solved by successive
convexification: the real and imaginary parts ``p_m, q_m`` of ``s(r_m)`` are
linearized, the slack program ``min sum v_m, v_m >= p_m^2 + q_m^2`` becomes a
convex QCQP, and a trust region damps the step until the true sum decreases.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .channel import check_positions
from .errors import ConfigurationError, DomainError
from .expectation import ExpectationInputs, d_max, expected_delta, expected_snr_col

__all__ = [
    "AoConfig",
    "AoState",
    "SubproblemModel",
    "SubproblemResult",
    "initial_positions",
    "project_distance",
    "optimize_distance",
    "subproblem_model",
    "position_objective",
    "position_gradient",
    "lattice_seed",
    "solve_subproblem_sca",
    "optimize_positions",
    "grid_certifier",
    "jo_edap_ao",
]


@dataclass(frozen=True)
class AoConfig:
    max_iters: int = 25
    tol: float = 1e-6
    max_inner: int = 200
    inner_tol: float = 1e-15
    seed_resolution_wavelengths: float | None = 0.01
    trust_radius_wavelengths: float = 0.05


@dataclass
class AoState:
    """Iterate of the alternating optimizer.

    ``history`` holds ``(iter, d, objective, positions)`` where ``d`` was
    computed from the previous positions and ``objective`` is evaluated at the
    new ones, which is why the first entry is usually negative.
    """

    iter: int
    d: float
    positions: np.ndarray
    objective: float
    history: list = field(default_factory=list)
    converged: bool = False
    stagnated: bool = False


@dataclass(frozen=True)
class SubproblemModel:
    p: np.ndarray
    q: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class SubproblemResult:
    positions: np.ndarray
    value: float
    inner_iterations: int
    stagnated: bool


def initial_positions(num_mas: int, params) -> np.ndarray:
    """Spread ``num_mas`` elements evenly over ``[0, A]``."""
    params.require_fits(num_mas)
    return np.linspace(0.0, params.move_range_m, num_mas)


def _bounds(inputs: ExpectationInputs):
    p = inputs.params
    return p.d_min_m, p.move_range_m


def _require_feasible(positions, inputs: ExpectationInputs):
    d_min, rng = _bounds(inputs)
    inputs.params.require_fits(np.atleast_1d(positions).shape[0])
    check_positions(positions, d_min, rng, tol=1e-9)


def project_distance(inputs: ExpectationInputs, d: float) -> float:
    """Largest float ``<= d`` at which the expected gap is nonnegative."""
    x = float(d)
    for _ in range(64):
        if expected_delta(inputs.with_distance(x)) >= 0:
            return x
        x = math.nextafter(x, 0.0)
    raise ArithmeticError("could not restore a nonnegative gap by rounding")


def optimize_distance(positions, inputs: ExpectationInputs) -> float:
    return d_max(inputs.with_positions(positions))


def _gains(x, gamma, cos_arr):
    """``s(x)`` and ``ds/dx`` with ``x`` in wavelengths."""
    ph = np.exp(2j * math.pi * np.outer(np.atleast_1d(x), cos_arr))
    s = ph @ gamma
    ds = ph @ (2j * math.pi * cos_arr * gamma)
    return s, ds


def position_objective(positions, inputs: ExpectationInputs) -> float:
    """``sum_m |s(r_m)|^2``: the part of the expected gap the positions control."""
    x = np.atleast_1d(positions) / inputs.params.wavelength_m
    s, _ = _gains(x, inputs.gamma, inputs.arrival_cos)
    return float(np.sum(s.real**2 + s.imag**2))


def position_gradient(positions, inputs: ExpectationInputs) -> np.ndarray:
    """Derivative of :func:`position_objective` per coordinate, in 1/m."""
    lam = inputs.params.wavelength_m
    s, ds = _gains(np.atleast_1d(positions) / lam, inputs.gamma, inputs.arrival_cos)
    return 2.0 * (s.real * ds.real + s.imag * ds.imag) / lam


def subproblem_model(positions, inputs: ExpectationInputs) -> SubproblemModel:
    x = np.atleast_1d(positions) / inputs.params.wavelength_m
    s, _ = _gains(x, inputs.gamma, inputs.arrival_cos)
    return SubproblemModel(s.real.copy(), s.imag.copy(), s.real**2 + s.imag**2)


def lattice_seed(inputs: ExpectationInputs, num_mas: int, resolution: float) -> np.ndarray:
    """Exact minimizer of the position sum over a lattice, by dynamic programming.

    The sum is separable across MAs and the constraints only couple neighbours,
    so ``best[m, i]`` (MA ``m`` at lattice point ``i``) needs only a running
    minimum over admissible predecessors.
    """
    d_min, rng = _bounds(inputs)
    n = int(math.floor(rng / resolution + 1e-9)) + 1
    grid = np.arange(n) * resolution
    step = int(math.ceil(d_min / resolution - 1e-9))
    x = grid / inputs.params.wavelength_m
    s, _ = _gains(x, inputs.gamma, inputs.arrival_cos)
    g = s.real**2 + s.imag**2

    best = g.copy()
    back = np.zeros((num_mas, n), dtype=int)
    for m in range(1, num_mas):
        run_min = np.minimum.accumulate(best)
        run_arg = np.zeros(n, dtype=int)
        for i in range(1, n):
            run_arg[i] = run_arg[i - 1] if best[run_arg[i - 1]] <= best[i] else i
        nxt = np.full(n, np.inf)
        nxt[step:] = run_min[: n - step] + g[step:]
        back[m, step:] = run_arg[: n - step]
        best = nxt
    if not np.isfinite(best).any():
        raise ConfigurationError("no feasible lattice placement")
    idx = [int(np.argmin(best))]
    for m in range(num_mas - 1, 0, -1):
        idx.append(int(back[m, idx[-1]]))
    return grid[idx[::-1]]


@functools.lru_cache(maxsize=None)
def _sca_problem(num_mas: int):
    """Parametrized convex subproblem in wavelength units, built once per array size."""
    delta = cp.Variable(num_mas)
    v = cp.Variable(num_mas)
    x0 = cp.Parameter(num_mas)
    p = cp.Parameter(num_mas)
    q = cp.Parameter(num_mas)
    dp = cp.Parameter(num_mas)
    dq = cp.Parameter(num_mas)
    rho = cp.Parameter(nonneg=True)
    span = cp.Parameter(nonneg=True)
    gap = cp.Parameter(nonneg=True)
    x = x0 + delta
    cons = [
        v >= cp.square(p + cp.multiply(dp, delta)) + cp.square(q + cp.multiply(dq, delta)),
        x >= 0,
        x <= span,
        cp.abs(delta) <= rho,
    ]
    if num_mas > 1:
        cons.append(x[1:] - x[:-1] >= gap)
    prob = cp.Problem(cp.Minimize(cp.sum(v)), cons)
    return prob, delta, (x0, p, q, dp, dq, rho, span, gap)


def _sca_step(x, gamma, cos_arr, span, gap, rho, norm):
    prob, delta, (x0, p, q, dp, dq, rho_p, span_p, gap_p) = _sca_problem(x.shape[0])
    s, ds = _gains(x, gamma, cos_arr)
    s, ds = s / norm, ds / norm
    x0.value, p.value, q.value = x, s.real, s.imag
    dp.value, dq.value = ds.real, ds.imag
    rho_p.value, span_p.value, gap_p.value = rho, span, gap
    try:
        with warnings.catch_warnings():
            # inaccurate solves are fine: every step is re-checked for true descent
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    except cp.error.SolverError:
        return None, None
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or delta.value is None:
        return None, None
    dx = np.asarray(delta.value, dtype=float)
    # model value recomputed here; the solver's own objective is only accurate to its gap tolerance
    model = np.sum((s.real + ds.real * dx) ** 2 + (s.imag + ds.imag * dx) ** 2)
    return dx, float(model)


def _clamp_feasible(x, span, gap):
    """Undo solver round-off so the iterate satisfies the constraints exactly."""
    x = np.clip(x, 0.0, span)
    for i in range(1, x.shape[0]):
        if x[i] - x[i - 1] < gap:
            x[i] = x[i - 1] + gap
    if x.shape[0] and x[-1] > span:
        x[-1] = span
        for i in range(x.shape[0] - 2, -1, -1):
            if x[i + 1] - x[i] < gap:
                x[i] = x[i + 1] - gap
    return x


def solve_subproblem_sca(d, positions0, inputs: ExpectationInputs, max_inner: int = 200, tol: float = 1e-15,
                         trust_radius_wavelengths: float = 0.05) -> SubproblemResult:
    """Successive convexification of the position subproblem from ``positions0``.

    ``tol`` is relative to ``sum_u |gamma_u|^2``.  Returns the best iterate; the
    ``stagnated`` flag is set when damping ran out without meeting ``tol``.
    """
    if not d > 0:
        raise DomainError("distance must be positive")
    _require_feasible(positions0, inputs)
    lam = inputs.params.wavelength_m
    span = inputs.params.move_range_wavelengths
    gap = inputs.params.d_min_wavelengths
    gamma, cos_arr = inputs.gamma, inputs.arrival_cos
    gnorm = float(np.sum(np.abs(gamma) ** 2))
    norm = math.sqrt(gnorm)

    x = np.atleast_1d(np.asarray(positions0, dtype=float)) / lam
    f = position_objective(x * lam, inputs) / gnorm
    rho = trust_radius_wavelengths
    stagnated = False
    it = 0
    while it < max_inner:
        it += 1
        delta, model = _sca_step(x, gamma, cos_arr, span, gap, rho, norm)
        if delta is None:
            rho *= 0.25
            if rho < 1e-12:
                stagnated = True
                break
            continue
        predicted = f - model
        if predicted <= tol:
            break
        x_new = _clamp_feasible(x + delta, span, gap)
        f_new = position_objective(x_new * lam, inputs) / gnorm
        if f_new < f:
            gain = f - f_new
            x, f = x_new, f_new
            if gain / predicted > 0.75 and np.max(np.abs(delta)) > 0.9 * rho:
                rho = min(2.0 * rho, 0.25)
            if gain < tol:
                break
        else:
            rho *= 0.25
            if rho < 1e-12:
                stagnated = True
                break
    return SubproblemResult(x * lam, f * gnorm, it, stagnated)


def optimize_positions(d, positions, inputs: ExpectationInputs, tol: float = 1e-15, max_inner: int = 200,
                       seed_resolution_wavelengths: float | None = 0.01,
                       trust_radius_wavelengths: float = 0.05) -> SubproblemResult:
    """Position step at fixed ``d``: never returns a larger position sum than the input.

    SCA is started from the current positions and, unless
    ``seed_resolution_wavelengths`` is ``None``, also from the exact lattice
    optimum; the better local solution wins.
    """
    if not d > 0:
        raise DomainError("distance must be positive")
    _require_feasible(positions, inputs)
    r0 = np.atleast_1d(np.asarray(positions, dtype=float))
    f0 = position_objective(r0, inputs)
    starts = [r0]
    if seed_resolution_wavelengths is not None and r0.shape[0] > 0:
        res = seed_resolution_wavelengths * inputs.params.wavelength_m
        starts.append(lattice_seed(inputs, r0.shape[0], res))
    best = SubproblemResult(r0, f0, 0, False)
    stagnated = False
    for start in starts:
        out = solve_subproblem_sca(d, start, inputs, max_inner=max_inner, tol=tol,
                                   trust_radius_wavelengths=trust_radius_wavelengths)
        stagnated = stagnated or out.stagnated
        if out.value < best.value:
            best = out
    gnorm = float(np.sum(np.abs(inputs.gamma) ** 2))
    if not best.value < f0 - tol * gnorm:
        return SubproblemResult(r0, f0, best.inner_iterations, stagnated)
    return SubproblemResult(best.positions, best.value, best.inner_iterations, stagnated)


def grid_certifier(d, inputs: ExpectationInputs, resolution: float):
    """Exhaustive search over sorted, spaced lattice placements (``M <= 3``).

    Returns ``(positions, objective)`` with the objective being the expected
    gap at distance ``d``.  Ties within 1e-12 relative go to the
    lexicographically smallest placement.
    """
    num_mas = inputs.num_mas
    lam = inputs.params.wavelength_m
    if num_mas > 3:
        raise ConfigurationError("grid certification is limited to M <= 3")
    if resolution < lam / 200 * (1 - 1e-12):
        raise ConfigurationError("grid resolution finer than wavelength/200 is not supported")
    d_min, rng = _bounds(inputs)
    inputs.params.require_fits(num_mas)
    n = int(math.floor(rng / resolution + 1e-9)) + 1
    grid = np.arange(n) * resolution
    step = int(math.ceil(d_min / resolution - 1e-9))
    # independent of the SCA helpers: direct sum over paths
    ph = np.exp(1j * (2 * math.pi / lam) * np.outer(grid, inputs.arrival_cos))
    g = np.abs(ph @ inputs.gamma) ** 2
    tie = 1e-12 * max(float(np.max(g)), 1e-300) * num_mas

    if num_mas == 1:
        gmin = g.min()
        idx = (int(np.flatnonzero(g <= gmin + tie)[0]),)
    elif num_mas == 2:
        tot = g[:, None] + g[None, :]
        ii, jj = np.indices((n, n))
        tot[jj - ii < step] = np.inf
        gmin = tot.min()
        flat = int(np.flatnonzero(tot.ravel() <= gmin + tie)[0])
        idx = divmod(flat, n)
    else:
        pair = g[:, None] + g[None, :]
        ii, jj = np.indices((n, n))
        pair[jj - ii < step] = np.inf
        row_min = pair.min(axis=1)
        suffix = np.minimum.accumulate(row_min[::-1])[::-1]
        per_i = np.full(n, np.inf)
        per_i[: n - step] = g[: n - step] + suffix[step:]
        gmin = per_i.min()
        i0 = int(np.flatnonzero(per_i <= gmin + tie)[0])
        sub = pair.copy()
        sub[: i0 + step, :] = np.inf
        flat = int(np.flatnonzero((g[i0] + sub).ravel() <= gmin + tie)[0])
        idx = (i0,) + divmod(flat, n)
    pos = grid[list(idx)]
    return pos, expected_delta(inputs.with_positions(pos).with_distance(d))


def jo_edap_ao(config: AoConfig, inputs: ExpectationInputs) -> AoState:
    """Alternate the closed-form distance step and the position step.

    ``inputs.positions`` is the starting layout (evenly spread when ``None``).
    Stops after ``config.max_iters`` outer iterations or once consecutive
    objectives differ by less than ``config.tol`` times the mean collusion SNR.
    The returned distance is re-projected onto the final positions, so the
    reported objective is nonnegative.
    """
    params = inputs.params
    r = inputs.positions
    if r is None:
        r = initial_positions(inputs.num_mas, params)
    _require_feasible(r, inputs)
    r = np.array(r, dtype=float)
    inputs = inputs.with_positions(r)
    scale = expected_snr_col(inputs)

    history = []
    stagnated = False
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        d = project_distance(inputs, d_max(inputs))
        step = optimize_positions(d, r, inputs, tol=config.inner_tol, max_inner=config.max_inner,
                                  seed_resolution_wavelengths=config.seed_resolution_wavelengths,
                                  trust_radius_wavelengths=config.trust_radius_wavelengths)
        stagnated = stagnated or step.stagnated
        r = np.array(step.positions, dtype=float)
        inputs = inputs.with_positions(r)
        obj = expected_delta(inputs.with_distance(d))
        history.append((k, d, obj, r.copy()))
        if k >= 2 and abs(obj - history[-2][2]) < config.tol * scale:
            converged = True
            break

    d = project_distance(inputs, d_max(inputs))
    final = inputs.with_distance(d)
    return AoState(k, d, r, expected_delta(final), history, converged, stagnated)
