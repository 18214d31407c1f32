"""Harmonic frequency ladder and the block algebra shared by every solver.

A periodically modulated network driven at ``f_signal`` only ever produces
tones on the ladder ``f_signal + k * f_base``.  Blocks are dense complex
``(2K+1, 2K+1)`` arrays whose row is the output harmonic and whose column
is the input harmonic; the ladder position of harmonic ``k`` is always
looked up through :meth:`FrequencyGrid.index`.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import GridMismatch, NonPositiveBase, SingularSystem, ZeroFrequencyOnGrid

#: Smallest |f_k| accepted on a grid, in Hz.
ZERO_FREQUENCY_GUARD = 1.0

#: Reciprocal condition numbers below ``1 / MAX_CONDITION`` are refused.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class FrequencyGrid:
    """Signed ladder ``f_signal + k * f_base`` for ``k = -k_max..k_max``."""

    f_signal: float
    f_base: float
    k_max: int
    harmonics: np.ndarray = field(init=False, repr=False, compare=False)
    frequencies: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.f_base > 0:
            raise NonPositiveBase(f"f_base must be > 0, got {self.f_base!r}")
        if int(self.k_max) != self.k_max or self.k_max < 0:
            raise ValueError(f"k_max must be a non-negative integer, got {self.k_max!r}")
        ks = np.arange(-self.k_max, self.k_max + 1)
        freqs = self.f_signal + ks * self.f_base
        bad = np.abs(freqs) < ZERO_FREQUENCY_GUARD
        if bad.any():
            k = int(ks[bad][0])
            raise ZeroFrequencyOnGrid(
                f"harmonic k={k} lands on DC ({freqs[bad][0]:.3g} Hz); "
                "move f_signal off multiples of f_base")
        ks.setflags(write=False)
        freqs.setflags(write=False)
        object.__setattr__(self, "k_max", int(self.k_max))
        object.__setattr__(self, "harmonics", ks)
        object.__setattr__(self, "frequencies", freqs)

    @property
    def dim(self):
        return 2 * self.k_max + 1

    @property
    def omegas(self):
        """Angular frequencies ``2 pi f_k`` (rad/s)."""
        return 2 * np.pi * self.frequencies

    def index(self, k):
        """Array position of harmonic ``k``."""
        if abs(k) > self.k_max:
            raise IndexError(f"harmonic {k} outside grid of order {self.k_max}")
        return int(k) + self.k_max

    def frequency(self, k):
        return self.f_signal + k * self.f_base

    def at(self, f_signal):
        """Same ladder spacing and order anchored at another signal frequency."""
        return FrequencyGrid(f_signal, self.f_base, self.k_max)

    def check_same(self, other):
        if (other.f_signal, other.f_base, other.k_max) != (self.f_signal, self.f_base, self.k_max):
            raise GridMismatch(f"grids differ: {self} vs {other}")


def build_grid(f_signal, f_base, k_max):
    return FrequencyGrid(float(f_signal), float(f_base), k_max)


def omega_matrix(grid):
    """Integration operator: ``diag(1 / (j 2 pi f_k))``."""
    return np.diag(1.0 / (1j * grid.omegas))


def identity_block(grid):
    return np.eye(grid.dim, dtype=complex)


def zero_block(grid):
    return np.zeros((grid.dim, grid.dim), dtype=complex)


def block_solve(m, rhs, max_condition=MAX_CONDITION):
    """Solve ``m @ x = rhs`` for a vector or matrix right-hand side.

    Rows and columns are equilibrated first, since harmonic rows far from
    the passband routinely differ by many orders of magnitude.  Raises
    :class:`SingularSystem` when the LAPACK 1-norm condition estimate of the
    equilibrated matrix exceeds ``max_condition`` or the matrix has
    non-finite entries.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise SingularSystem("matrix has non-finite entries")
    rows = np.abs(m).max(axis=1)
    if np.any(rows == 0):
        raise SingularSystem("matrix has an all-zero row")
    r = 1.0 / rows
    scaled = m * r[:, None]
    cols = np.abs(scaled).max(axis=0)
    if np.any(cols == 0):
        raise SingularSystem("matrix has an all-zero column")
    c = 1.0 / cols
    scaled = scaled * c[None, :]
    lu, piv, info = linalg.lapack.zgetrf(scaled)
    if info > 0:
        raise SingularSystem("matrix is exactly singular")
    anorm = np.linalg.norm(scaled, 1)
    rcond, _ = linalg.lapack.zgecon(lu, anorm, norm="1")
    if rcond * max_condition < 1.0:
        raise SingularSystem(f"condition estimate {1 / max(rcond, 1e-300):.3g} exceeds {max_condition:.0e}")
    rhs = np.asarray(rhs)
    rr = r[:, None] if rhs.ndim == 2 else r
    y = linalg.lu_solve((lu, piv), rhs * rr)
    return y * (c[:, None] if rhs.ndim == 2 else c)


@dataclass(frozen=True)
class SpectralAbcd:
    """Two-port transmission matrix whose four entries are harmonic blocks."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(x) for x in (self.a, self.b, self.c, self.d)}
        if len(shapes) != 1:
            raise GridMismatch(f"ABCD blocks disagree in shape: {sorted(shapes)}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"ABCD blocks must be square, got {shape}")

    @property
    def dim(self):
        return self.a.shape[0]

    def __matmul__(self, other):
        if other.dim != self.dim:
            raise GridMismatch(f"cannot cascade blocks of dim {self.dim} and {other.dim}")
        return SpectralAbcd(
            self.a @ other.a + self.b @ other.c,
            self.a @ other.b + self.b @ other.d,
            self.c @ other.a + self.d @ other.c,
            self.c @ other.b + self.d @ other.d,
        )

    def as_matrix(self):
        return np.block([[self.a, self.b], [self.c, self.d]])


class FloquetSMatrix:
    """Scattering matrix over (port, harmonic) pairs.

    ``data`` is ``(n_ports * dim, n_ports * dim)`` with row/column index
    ``port * dim + grid.index(k)`` (ports counted from 0 internally).
    Accessors take 1-based port numbers to follow the usual ``S21`` naming.
    """

    def __init__(self, grid, data, n_ports=None):
        data = np.asarray(data, dtype=complex)
        n_ports = n_ports or data.shape[0] // grid.dim
        if data.shape != (n_ports * grid.dim, n_ports * grid.dim):
            raise GridMismatch(f"S data shape {data.shape} does not match {n_ports} ports x {grid.dim} harmonics")
        self.grid = grid
        self.n_ports = n_ports
        self.data = data

    @classmethod
    def from_blocks(cls, grid, blocks):
        """Assemble from a nested list ``blocks[p_out][p_in]`` of harmonic blocks."""
        return cls(grid, np.block(blocks), len(blocks))

    def block(self, p_out, p_in):
        d = self.grid.dim
        i, j = p_out - 1, p_in - 1
        return self.data[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def __call__(self, p_out, p_in, k_out=0, k_in=0):
        return self.block(p_out, p_in)[self.grid.index(k_out), self.grid.index(k_in)]

    def db(self, p_out, p_in, k_out=0, k_in=0):
        return 20 * np.log10(max(abs(self(p_out, p_in, k_out, k_in)), 1e-300))

    def fundamental(self):
        """Port-by-port matrix at output and input harmonic 0."""
        idx = self.grid.index(0)
        d = self.grid.dim
        rows = [p * d + idx for p in range(self.n_ports)]
        return self.data[np.ix_(rows, rows)]

    def output_powers(self, p_in, k_in=0):
        """``|S(p_out, k_out; p_in, k_in)|^2`` as an ``(n_ports, dim)`` array."""
        d = self.grid.dim
        col = (p_in - 1) * d + self.grid.index(k_in)
        return (np.abs(self.data[:, col]) ** 2).reshape(self.n_ports, d)
