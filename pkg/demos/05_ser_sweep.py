"""
Symbol error rate versus SNR
============================

A reduced version of the SER-versus-SNR experiment: random Rayleigh
channels, one codebook per channel and scheme, Monte Carlo noise. The
table compares continuous phases, 3/2/1-bit rounding and 1-bit
branch-and-bound. Larger runs go through the command line, e.g.
``irs-precoding sweep config.json``.
"""

from irs_precoding.sweep import SweepConfig, run_sweep

cfg = SweepConfig.from_dict({
    "N": 16, "K": 2, "snr_db": [-8, -4, 0, 4, 8],
    "schemes": ["inf", "3", "2", "1", "1-bnb"],
    "realizations": 20, "draws": 50, "seed": 0,
})
records = run_sweep(cfg, write=False, progress=None)

snrs = cfg.snr_db
print("scheme  " + "".join(f"{s:>9} dB" for s in snrs))
for scheme in cfg.schemes:
    row = [r.ser_mean for r in records if r.scheme == scheme]
    print(f"{scheme:6s}  " + "".join(f"{v:12.4f}" for v in row))
