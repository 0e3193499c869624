"""
Monte-Carlo sweeps
==================

Average throughput and fairness of the three schemes as the number of users
grows.  The command-line tool runs the same sweeps from presets::

    ris-ofdm --preset fig4a --trials 100 --out fig4a.csv
"""
import sys

from ris_ofdm import preset_config, run_sweep

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20

for preset in ("fig4a", "fig5a"):
    cfg = preset_config(preset)
    values = cfg.sweep_values[:4]
    res = run_sweep(cfg, values=values, trials=trials)
    print(f"\n{preset}: objective {cfg.objective}, {trials} trials")
    print("     K " + "".join(f"{s:>22s}" for s in ("jnt", "seq", "csi")))
    for i, k in enumerate(values):
        cells = "".join(f"{res.select(s)[i] / 1e6:11.3f} Mb/s {res.select(s, 'jain_mean')[i]:5.3f}"
                        for s in ("jnt", "seq", "csi"))
        print(f"{k:6d} {cells}")
