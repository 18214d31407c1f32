"""Shared builders for randomized chains."""
import numpy as np

from squidfloquet.devices import IsolatorParams, build

F_CENTER = 6e9


def random_isolator(rng, order=None, amplitude=None, theta=None, f_m=None, phi=None):
    """Isolator-shaped chain with randomized element values around the prototype."""
    order = order or int(rng.integers(2, 5))
    base = IsolatorParams(order=order)
    caps, js = base.element_values()
    caps = tuple(c * rng.uniform(0.8, 1.2) for c in caps)
    js = tuple(j * rng.uniform(0.7, 1.3) for j in js)
    p = IsolatorParams(
        order=order,
        capacitors=caps,
        j_values=js,
        amplitude=float(rng.uniform(0.0, 0.04)) if amplitude is None else amplitude,
        theta=float(rng.uniform(0, 2 * np.pi)) if theta is None else theta,
        f_m=float(rng.uniform(0.3e9, 0.9e9)) if f_m is None else f_m,
        squid=base.squid.with_bias(float(rng.uniform(0.25, 0.4)) if phi is None else phi),
    )
    return build(p)


def random_frequency(rng, device, k_max):
    """A drive frequency near the band that keeps the ladder away from DC."""
    while True:
        f = F_CENTER * rng.uniform(0.85, 1.15)
        ladder = f + np.arange(-k_max, k_max + 1) * device.f_base
        if np.min(np.abs(ladder)) > 0.05 * device.f_base:
            return f
