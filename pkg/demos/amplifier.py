"""A directional parametric amplifier.

Every SQUID sees a strong pump near twice the signal frequency, which
provides gain, plus a weak 200 MHz tone staggered in phase along the chain,
which breaks reciprocity.  Both tones are harmonics of a 200 MHz base, so
the harmonic ladder has to reach past the 69th harmonic.
"""
import numpy as np

from squidfloquet.devices import build_template

dev = build_template("diramp")
k = dev.meta["k_default"]
print(f"truncation K={k}: {2 * k + 1} harmonics per node\n")
print("  f (GHz)   forward (dB)   reverse (dB)")
for f in np.linspace(6.6e9, 7.2e9, 13) + 1.234e6:
    s = dev.s_matrix(f, k)
    print(f"  {f / 1e9:7.4f}  {s.db(2, 1):+12.2f}  {s.db(1, 2):+12.2f}")
