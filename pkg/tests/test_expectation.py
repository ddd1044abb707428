import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from virtualeve import (
    DegenerateInstanceError, DomainError, ExpectationInputs, PathSet, SystemParams, arrival_phases, beam_gains,
    combined_gains, d_max, default_array, draw_paths, expected_delta, expected_snr_col, expected_snr_veve,
    expected_snr_veve_independent, position_sum,
)


def manual(gamma, cos_arr, positions, params, eves, d):
    return ExpectationInputs(np.asarray(gamma, complex), arrival_phases(positions, cos_arr, params.wavelength_m),
                             params, np.asarray(eves, float), d, np.asarray(cos_arr, float), np.asarray(positions, float))


def random_inputs(seed, num_mas=4, num_eves=4):
    p = SystemParams()
    r = np.random.default_rng(seed)
    paths = draw_paths(p.num_paths, r)
    pos = np.sort(r.uniform(0, p.move_range_m, num_mas))
    eves = r.uniform(20, 60, num_eves)
    return ExpectationInputs.build(default_array(p), paths, pos, p, eves, veve_distance=r.uniform(5, 50))


def test_beam_gain_longhand(paths, array, params):
    g = beam_gains(array, paths, params.wavelength_m)
    dirs = paths.directions()
    for u in range(paths.num_paths):
        acc = 0j
        for n in range(array.num_antennas):
            ph = -2 * math.pi / params.wavelength_m * float(array.positions[n] @ dirs[u])
            acc += array.beamformer[n] * complex(math.cos(ph), math.sin(ph))
        assert abs(g[u] - acc) < 1e-12


def test_alphas_unit_modulus():
    inp = random_inputs(1)
    np.testing.assert_allclose(np.abs(inp.alphas), 1.0, atol=1e-12)
    assert inp.alphas.shape == (inp.num_paths, inp.num_mas)


def test_single_path_unit_gain():
    p = SystemParams(num_paths=1)
    inp = manual([np.exp(0.3j)], [0.2], [0.01], p, [40.0], 17.0)
    assert expected_snr_veve(inp) == pytest.approx(p.g0 * 17.0**-4 / p.noise_power_mw, rel=1e-13)
    assert expected_snr_col(inp) == pytest.approx(p.g0 * 40.0**-4 / p.noise_power_mw, rel=1e-13)


def test_power_law():
    inp = random_inputs(2)
    a = expected_snr_veve(inp.with_distance(10.0))
    b = expected_snr_veve(inp.with_distance(20.0))
    assert a / b == pytest.approx(16.0, rel=1e-13)


def test_col_linearity():
    inp = random_inputs(3, num_eves=1)
    one = expected_snr_col(replace(inp, eve_distances=np.array([35.0])))
    five = expected_snr_col(replace(inp, eve_distances=np.full(5, 35.0)))
    assert five == pytest.approx(5 * one, rel=1e-13)


def test_domain():
    inp = random_inputs(4)
    with pytest.raises(DomainError):
        expected_snr_veve(inp.with_distance(0.0))
    with pytest.raises(DomainError):
        expected_snr_col(replace(inp, eve_distances=np.array([10.0, -1.0])))


def test_position_sum_longhand():
    inp = random_inputs(5)
    total = 0.0
    for z in range(inp.num_mas):
        s = sum(inp.alphas[u, z] * inp.gamma[u] for u in range(inp.num_paths))
        total += abs(s) ** 2
    assert position_sum(inp) == pytest.approx(total, rel=1e-12)
    np.testing.assert_allclose(np.abs(combined_gains(inp)) ** 2, [
        abs(sum(inp.alphas[u, z] * inp.gamma[u] for u in range(inp.num_paths))) ** 2 for z in range(inp.num_mas)])


@settings(max_examples=100)
@given(st.integers(0, 2**31))
def test_root_property(seed):
    inp = random_inputs(seed)
    d = d_max(inp)
    val = expected_delta(inp.with_distance(d))
    assert abs(val) <= 1e-9 * expected_snr_col(inp)


def test_small_distance_positive():
    inp = random_inputs(6)
    assert expected_delta(inp.with_distance(1e-3 * d_max(inp))) > 0


@settings(max_examples=50)
@given(st.integers(0, 2**31), st.floats(0.1, 100), st.floats(1.001, 3))
def test_strictly_decreasing(seed, d, factor):
    inp = random_inputs(seed)
    assert expected_delta(inp.with_distance(d * factor)) < expected_delta(inp.with_distance(d))


@settings(max_examples=50)
@given(st.integers(0, 2**31), st.floats(0.01, 100))
def test_noise_scale_law(seed, c):
    inp = random_inputs(seed)
    sc = inp.with_params(replace(inp.params, noise_power_mw=inp.params.noise_power_mw * c))
    assert expected_snr_veve(sc) == pytest.approx(expected_snr_veve(inp) / c, rel=1e-13)
    assert expected_snr_col(sc) == pytest.approx(expected_snr_col(inp) / c, rel=1e-13)


def test_symmetry_single():
    p = SystemParams(num_paths=1)
    inp = manual([0.7 - 1.1j], [0.4], [0.013], p, [37.25], 1.0)
    assert d_max(inp) == pytest.approx(37.25, rel=1e-12)


def test_symmetry_equal_distances():
    p = SystemParams(num_paths=1)
    inp = manual([1.3j], [0.8], [0.0, 0.006, 0.02], p, [44.0, 44.0, 44.0], 1.0)
    assert d_max(inp) == pytest.approx(44.0, rel=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bisection_oracle(seed):
    inp = random_inputs(seed)
    root = brentq(lambda d: expected_delta(inp.with_distance(d)), 1e-3, 1e4, xtol=1e-14, rtol=1e-14)
    assert d_max(inp) == pytest.approx(root, rel=1e-6)


def test_degenerate_numerator():
    p = SystemParams(num_paths=2)
    inp = manual([1.0, -1.0], [0.0, 0.0], [0.0], p, [30.0], 1.0)
    with pytest.raises(DegenerateInstanceError):
        d_max(inp)


def test_independent_form_ignores_positions():
    inp = random_inputs(7)
    a = expected_snr_veve_independent(inp)
    b = expected_snr_veve_independent(inp.with_positions(inp.positions + 0.001))
    assert a == pytest.approx(b, rel=1e-14)
    g = float(np.sum(np.abs(inp.gamma) ** 2))
    p = inp.params
    assert a == pytest.approx(p.g0 * inp.veve_distance ** -p.alpha / (p.num_paths * p.noise_power_mw) * inp.num_mas * g)


def test_with_positions_needs_angles():
    inp = replace(random_inputs(8), arrival_cos=None)
    with pytest.raises(ValueError):
        inp.with_positions([0.0])
