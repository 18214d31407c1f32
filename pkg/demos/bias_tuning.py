"""Retune the isolator by moving the DC flux bias.

The SQUID inductance grows as the bias approaches half a flux quantum, so
the whole passband slides down in frequency.  The pump settings stay fixed
while we sweep the bias and follow the centre of the static band.
"""
from squidfloquet.devices import ISOLATOR3_OPERATING_POINT
from squidfloquet.elements import TAYLOR3
from squidfloquet.sweep import Axis, SweepSpec, run_sweep

spec = SweepSpec("isolator3", [Axis("phi_dc", 0.30, 0.40, 11)], ("IL_fwd", "ISO_rev"), "center", k_max=4,
                 mode=TAYLOR3, fixed=ISOLATOR3_OPERATING_POINT)
table = run_sweep(spec)
print(" phi_dc   f (GHz)   IL (dB)   ISO (dB)")
for r in table.rows:
    print(f"  {r['phi_dc']:.3f}  {r['f_Hz'] / 1e9:8.4f}  {r['IL_fwd']:8.3f}  {r['ISO_rev']:8.2f}")
print(f"\nharmonic truncation K={table.k_used}, converged: {table.converged}")
