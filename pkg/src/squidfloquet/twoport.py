"""Spectral ABCD two-ports: shunt resonators, admittance inverters, cascades.

Each stage maps the harmonic vectors at its output side onto its input side,
``[V1; I1] = [[A, B], [C, D]] @ [V2; I2]`` with ``I2`` leaving port 2.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonPositiveJ, ValidationError
from .spectral import FloquetSMatrix, SpectralAbcd, block_solve, identity_block, zero_block


def shunt_abcd(y):
    y = np.asarray(y, dtype=complex)
    u = np.eye(y.shape[0], dtype=complex)
    return SpectralAbcd(u, np.zeros_like(u), y, u)


def series_abcd(z):
    z = np.asarray(z, dtype=complex)
    u = np.eye(z.shape[0], dtype=complex)
    return SpectralAbcd(u, z, np.zeros_like(u), u)


def jinverter_abcd(j, grid, sign=1):
    """Ideal admittance inverter of characteristic admittance ``j`` (S).

    ``B = sign / (j J)`` and ``C = -sign * j J``: the reciprocal, lossless
    form, identical at every harmonic to a pi of capacitors ``(-C, C, -C)``
    with ``J = w C``.  At a negative ladder frequency the inverter responds
    with the complex conjugate of its positive-frequency value, as any real
    network does.
    """
    if not j > 0:
        raise NonPositiveJ(f"inverter admittance must be positive, got {j}")
    if sign not in (1, -1):
        raise ValidationError(f"inverter sign must be +1 or -1, got {sign}")
    s = sign * np.sign(grid.frequencies)
    zero = zero_block(grid)
    return SpectralAbcd(zero, np.diag(s / (1j * j)), np.diag(-1j * s * j), zero.copy())


@dataclass(frozen=True)
class TwoPortChain:
    """Ordered list of spectral ABCD stages, first stage at port 1."""

    stages: tuple
    grid: object
    z0: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValidationError("a two-port chain needs at least one stage")
        for st in self.stages:
            if st.dim != self.grid.dim:
                raise GridMismatch(f"stage of dim {st.dim} on a grid of dim {self.grid.dim}")

    def reversed(self):
        """Same network seen from port 2; every stage here is port-symmetric."""
        return TwoPortChain(self.stages[::-1], self.grid, self.z0)


def cascade(chain):
    stages = chain.stages if isinstance(chain, TwoPortChain) else tuple(chain)
    if not stages:
        raise ValidationError("cannot cascade an empty chain")
    dims = {st.dim for st in stages}
    if len(dims) != 1:
        raise GridMismatch(f"stages disagree in dimension: {sorted(dims)}")
    out = stages[0]
    for st in stages[1:]:
        out = out @ st
    return out


def _sum_and_difference(m, z0):
    total = m.a + m.b / z0 + m.c * z0 + m.d
    diff = m.a + m.b / z0 - m.c * z0 - m.d
    return total, diff


def abcd_to_s(m, z0=50.0, reverse=None, grid=None):
    """Two-port Floquet S-matrix of a block ABCD.

    ``S21 = 2 (A + B/z0 + C z0 + D)^-1`` and ``S11`` follows the usual
    reflection formula with block inverses on the right.  When the ABCD of
    the port-reversed network is supplied, ``S12`` and ``S22`` are taken as
    its ``S21`` and ``S11``; otherwise they come from the direct block
    expressions, which hold for any two-port.
    """
    total, diff = _sum_and_difference(m, z0)
    inv_total = block_solve(total, identity_block_like(total))
    s21 = 2 * inv_total
    s11 = diff @ inv_total
    if reverse is not None:
        rtotal, rdiff = _sum_and_difference(reverse, z0)
        rinv = block_solve(rtotal, identity_block_like(rtotal))
        s12 = 2 * rinv
        s22 = rdiff @ rinv
    else:
        u = identity_block_like(total)
        s22 = u - 2 * inv_total @ (m.a + z0 * m.c)
        s12 = (m.a - z0 * m.c) - s11 @ (m.a + z0 * m.c)
    if grid is None:
        return np.block([[s11, s12], [s21, s22]])
    return FloquetSMatrix.from_blocks(grid, [[s11, s12], [s21, s22]])


def identity_block_like(m):
    return np.eye(m.shape[0], dtype=complex)


def chain_s(chain):
    """Floquet S-matrix of a chain; ``S12``/``S22`` from the reversed cascade."""
    forward = cascade(chain)
    backward = cascade(chain.reversed())
    return abcd_to_s(forward, chain.z0, reverse=backward, grid=chain.grid)


def unit_cell_closed_form(y, j):
    """``J @ shunt(y) @ J`` collapsed: minus a series block ``y / J^2``."""
    u = np.eye(np.shape(y)[0], dtype=complex)
    return SpectralAbcd(-u, -np.asarray(y) / j**2, np.zeros_like(u), -u)


__all__ = ["shunt_abcd", "series_abcd", "jinverter_abcd", "TwoPortChain", "cascade", "abcd_to_s",
           "chain_s", "unit_cell_closed_form", "identity_block", "zero_block"]
