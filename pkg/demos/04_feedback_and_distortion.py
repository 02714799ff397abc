"""Variable-length feedback schedules and the price of localization.

The variable-length quantizer's bin count grows with power while its
compressor emits the empty codeword whenever every local NSNR overflows,
so the expected feedback rate decays to zero.  The localization
distortion rate measures how often the distributed decision misses the
relay the global rule would have picked.
"""

from qbeam.model import PowerPoint
from qbeam.mc import SchemeDef, measure_ld_rate
from qbeam.quantize import KIND_GQ_SELECTION, KIND_VLQ, vlq_params
from qbeam.testing import equal_network

cfg = equal_network()

print("variable-length schedule (lambda = 1): bin width 1/lambda, bin count")
print(f"{'P_dB':>6} {'xi':>6} {'bins':>8} {'active bits':>12}")
for p_db in (0, 10, 20, 30, 40):
    xi, n = vlq_params(1.0, 10.0 ** (p_db / 10), cfg.K, cfg.R)
    active = (n ** cfg.R - 2).bit_length() if n >= 2 else 0
    print(f"{p_db:6.1f} {xi:6.2f} {n:8d} {active:12d}")

print("\nsame schedule with lambda = 2^15 (finer bins, larger count):")
for p_db in (0, 20, 40):
    xi, n = vlq_params(2.0 ** 15, 10.0 ** (p_db / 10), cfg.K, cfg.R)
    active = (n ** cfg.R - 2).bit_length() if n >= 2 else 0
    print(f"{p_db:6.1f} {xi:6.2e} {n:8d} {active:12d}")

# How often does each localized scheme miss the global max-min relay?
# The degenerate lambda = 2^-15 schedule has a single all-overflow bin:
# the decoder always answers "relay 1", which under a symmetric network
# is the max-min choice only half the time.
print("\nlocalization distortion rate at 20 dB (60k channel states):")
P = PowerPoint.from_db(20.0)
for scheme in (SchemeDef(KIND_VLQ, lam_log2=-15),
               SchemeDef(KIND_VLQ, lam_log2=0),
               SchemeDef(KIND_VLQ, lam_log2=15),
               SchemeDef(KIND_GQ_SELECTION)):
    rate, lo, hi = measure_ld_rate(cfg, P, scheme, trials=60_000, seed=4)
    print(f"  {scheme.name:10s} miss rate {rate:.4f}  [{lo:.4f}, {hi:.4f}]")
