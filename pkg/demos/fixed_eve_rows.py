"""Secrecy rates for three Eves at fixed distances, Bob at 30 m."""
from virtualeve import ExperimentConfig, run_table2

cfg = ExperimentConfig()
print(f"{'Eve distances (m)':>22} {'R_col':>12} {'R_veve':>12} {'error %':>9} {'d (m)':>7}")
for row in run_table2(cfg.system_params(), cfg.trial_config(), bob_distance=30.0, array=cfg.array()):
    print(f"{str(row.eve_distances):>22} {row.r_col:12.4e} {row.r_veve:12.4e} {row.error_pct:9.2f} {row.d_m:7.2f}")
