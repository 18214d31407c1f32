"""Synthesize the three-resonator bandpass filter and look at its passband.

Without a pump every SQUID is a plain inductor, so the network is an
ordinary coupled-resonator filter.  We print the element values the
synthesis picked and then scan |S21| and |S11| across the band.
"""
import numpy as np

from squidfloquet.devices import build_template
from squidfloquet.sweep import band_center

dev = build_template("isolator3", amplitude=0.0)
p = dev.meta["params"]
caps, js = p.element_values()
print("resonator capacitance (fF):", ", ".join(f"{c * 1e15:.1f}" for c in caps))
print("inverter admittance (mS):  ", ", ".join(f"{j * 1e3:.3f}" for j in js))

fc, bw = band_center(dev)
print(f"\n1-dB passband: centre {fc / 1e9:.4f} GHz, width {bw / 1e6:.1f} MHz\n")

print("  f (GHz)   S21 (dB)   S11 (dB)")
for f in np.linspace(5.4e9, 6.6e9, 13):
    s = dev.s_matrix(f, 0)
    print(f"  {f / 1e9:7.3f}  {s.db(2, 1):9.3f}  {s.db(1, 1):9.3f}")
