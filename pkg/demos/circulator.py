"""One-layer against two-layer wye circulators.

A single layer circulates but loses power to odd intermodulation products.
A second layer pumped 180 degrees out of phase cancels those products at
the ports, which brings the insertion loss close to zero.
"""
import numpy as np

from squidfloquet.devices import build_template

for name in ("wye1", "wye2"):
    dev = build_template(name)
    fs = np.linspace(5.9e9, 6.1e9, 81) + 1e5
    f = max(fs, key=lambda f: -dev.s_matrix(f, 3).db(1, 2))
    s = dev.s_matrix(f, 5)
    print(f"{name}: best isolation at {f / 1e9:.4f} GHz")
    print(f"  1 -> 2 {s.db(2, 1):8.3f} dB   2 -> 3 {s.db(3, 2):8.3f} dB   3 -> 1 {s.db(1, 3):8.3f} dB")
    print(f"  2 -> 1 {s.db(1, 2):8.2f} dB   reflection {s.db(1, 1):8.2f} dB")
    odd = max(s.output_powers(1)[:, s.grid.index(k)].max() for k in (-1, 1))
    print(f"  strongest k=+-1 output {10 * np.log10(odd):.1f} dB\n")
