"""Compare the optimizer against exhaustive lattice search for a two-element array."""
import numpy as np

from virtualeve import (
    AoConfig, ExpectationInputs, SystemParams, default_array, draw_paths, grid_certifier, initial_positions,
    jo_edap_ao, position_sum,
)

p = SystemParams()
for seed in range(5):
    r = np.random.default_rng(seed)
    inp = ExpectationInputs.build(default_array(p), draw_paths(p.num_paths, r), initial_positions(2, p), p,
                                  np.clip(r.normal(40, 5, 2), 1, None))
    st = jo_edap_ao(AoConfig(), inp)
    grid_pos, _ = grid_certifier(st.d, inp, p.wavelength_m / 100)
    s_ao = position_sum(inp.with_positions(st.positions))
    s_grid = position_sum(inp.with_positions(grid_pos))
    print(f"seed {seed}: AO {np.round(st.positions / p.wavelength_m, 3)}  grid {np.round(grid_pos / p.wavelength_m, 2)}"
          f"  sum ratio {s_ao / s_grid:.5f}")
