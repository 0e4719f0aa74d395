"""Running a bundled experiment config and reading back its CSV.

The same thing from a shell:

    fockswap run fig2b -o fig2b.csv
    fockswap fit sinusoid fig2b.csv --y overlap_from_pg
"""
import tempfile
from pathlib import Path

from fockswap import load_config, run_sweep
from fockswap.runner import bundled_configs, golden_path, read_csv

print("bundled configs:", ", ".join(bundled_configs()))

cfg = load_config("fig2b")
with tempfile.TemporaryDirectory() as d:
    out = Path(d) / "fig2b.csv"
    rows = run_sweep(cfg, out)
    header, table = read_csv(out)
    same = out.read_bytes() == golden_path("fig2b").read_bytes()

print(f"{len(rows)} grid points, columns {header}")
print(f"matches the stored golden file byte for byte: {same}")
for r in rows[::8]:
    print(f"  phi01 = {r.sweep_values[0]:.3f}  P_g exact {r.p_g_exact:.4f}  sampled {r.p_g_sampled:.3f}  seed {r.seed}")
