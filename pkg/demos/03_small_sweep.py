"""A reduced power sweep with all four schemes, plus a diversity-slope fit.

About twenty seconds on one core.  The full benchmark settings (0..40 dB,
up to 1e6 states per point) live in configs/equal-2x2x2.toml and run via
the CLI: qbeam run --config configs/equal-2x2x2.toml --threads 8
"""

from qbeam.mc import SchemeDef, StoppingRule, fit_diversity_slope, sweep
from qbeam.quantize import KIND_FLQ, KIND_GQ_SELECTION, KIND_VLQ
from qbeam.testing import equal_network

cfg = equal_network()
schemes = [
    SchemeDef(KIND_GQ_SELECTION),
    SchemeDef(KIND_FLQ),
    SchemeDef(KIND_VLQ, lam_log2=0),
    SchemeDef(KIND_VLQ, lam_log2=15),
]
grid_db = [10.0, 15.0, 20.0, 25.0, 30.0]
stopping = StoppingRule(max_trials=200_000, target_network_errors=300)

points = sweep(cfg, schemes, grid_db, stopping, master_seed=7)

names = [s.name for s in schemes]
print(f"{'P_dB':>6} {'states':>8}", *(f"{n:>12}" for n in names))
for pt in points:
    ners = [f"{pt.stats[n].ner:12.3e}" for n in names]
    print(f"{pt.p_db:6.1f} {pt.n_states:8d}", *ners)

print("\nper-receiver feedback bits per channel state (receiver 1):")
for pt in points:
    bits = [f"{pt.stats[n].fb_bits_mean(0):12.3f}" for n in names]
    print(f"{pt.p_db:6.1f} {'':8}", *bits)

# Slope of log NER vs log P: the global scheme rides close to the ideal
# inverse-square law, shallowed by its logarithmic factor.
fit = fit_diversity_slope(points, "GQ", (15.0, 30.0))
print(f"\nGQ diversity slope over 15..30 dB: d1 = {fit.d1:.2f} "
      f"(rms residual {fit.residual:.3f}, {fit.n_points} points)")
fit_flq = fit_diversity_slope(points, "fLQ", (15.0, 30.0))
print(f"fLQ diversity slope over the same window: d1 = {fit_flq.d1:.2f} "
      "(stronger log penalty)")
