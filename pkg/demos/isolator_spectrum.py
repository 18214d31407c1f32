"""Where does the power go in a flux-pumped isolator?

Each SQUID is pumped with the same tone, staggered by 90 degrees from one
resonator to the next.  A forward-going signal leaves almost entirely at
its own frequency, while a reverse-going one is pushed to intermodulation
products at f +- k f_m, so very little of it survives at k = 0.
"""
import numpy as np

from squidfloquet.devices import ISOLATOR3_OPERATING_POINT, build_template
from squidfloquet.sweep import band_center

dev = build_template("isolator3", **ISOLATOR3_OPERATING_POINT)
fc = band_center(dev)[0]
s = dev.s_matrix(fc, 6)
grid = s.grid

for label, port_in, port_out in (("forward (1 -> 2)", 1, 2), ("reverse (2 -> 1)", 2, 1)):
    power = s.output_powers(port_in)[port_out - 1]
    print(f"{label} at {fc / 1e9:.4f} GHz")
    for k in range(-3, 4):
        p = power[grid.index(k)]
        bar = "#" * max(0, int(40 + 10 * np.log10(p)) // 2)
        print(f"  k={k:+d}  {10 * np.log10(p):8.2f} dB  {bar}")
    print()

print(f"IL  = {-s.db(2, 1):.3f} dB")
print(f"ISO = {-s.db(1, 2):.2f} dB")
