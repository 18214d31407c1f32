"""Spectral admittance blocks of the circuit elements.

The modulated element is a stack of identical DC-SQUIDs whose loop flux is
``phi_dc + sum(A_i cos(m_i w_b t + theta_i))`` (flux in units of the flux
quantum, ``w_b`` the grid base frequency).  Its inverse inductance is
periodic, so it is represented by Fourier coefficients over base harmonics,
and its admittance block couples harmonic ``k - q`` into ``k``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import (FluxBeyondHalfQuantum, NonPositiveResistance, UnsupportedPumpCount,
                     ValidationError)

#: Magnetic flux quantum h / 2e in Wb.
PHI0 = 2.067833848e-15

#: cos(pi * flux) at or below this is treated as a divergent inductance.
COS_FLOOR = 1e-6

TAYLOR3 = "taylor3"
EXACT = "exact"
MODES = (TAYLOR3, EXACT)


@dataclass(frozen=True)
class PumpTone:
    """Sinusoidal flux tone ``amplitude * cos(harmonic * w_b t + phase)``."""

    amplitude: float
    harmonic: int = 1
    phase: float = 0.0

    def __post_init__(self):
        if not 0 <= self.amplitude < 0.5:
            raise ValidationError(f"pump amplitude must lie in [0, 0.5) flux quanta, got {self.amplitude}")
        if int(self.harmonic) != self.harmonic or self.harmonic < 1:
            raise ValidationError(f"pump harmonic must be a positive integer, got {self.harmonic}")
        object.__setattr__(self, "harmonic", int(self.harmonic))

    def shifted(self, delta):
        return PumpTone(self.amplitude, self.harmonic, self.phase + delta)


@dataclass(frozen=True)
class SquidSpec:
    """Series stack of ``n_stack`` DC-SQUIDs with junction critical current ``i_c``."""

    i_c: float
    n_stack: int = 1
    phi_dc: float = 0.0
    pumps: tuple = ()
    margin: float = 0.01

    def __post_init__(self):
        if not self.i_c > 0:
            raise ValidationError(f"critical current must be positive, got {self.i_c}")
        if int(self.n_stack) != self.n_stack or self.n_stack < 1:
            raise ValidationError(f"n_stack must be a positive integer, got {self.n_stack}")
        object.__setattr__(self, "n_stack", int(self.n_stack))
        object.__setattr__(self, "pumps", tuple(self.pumps))
        excursion = abs(self.phi_dc) + sum(p.amplitude for p in self.pumps)
        if excursion > 0.5 - self.margin + 1e-12:
            raise FluxBeyondHalfQuantum(
                f"peak flux {excursion:.4f} exceeds 0.5 - margin ({0.5 - self.margin:.4f}) flux quanta")

    @property
    def modulated(self):
        return any(p.amplitude > 0 for p in self.pumps)

    def with_pumps(self, pumps):
        return SquidSpec(self.i_c, self.n_stack, self.phi_dc, tuple(pumps), self.margin)

    def with_bias(self, phi_dc):
        return SquidSpec(self.i_c, self.n_stack, phi_dc, self.pumps, self.margin)

    def shifted(self, delta):
        """All pump phases advanced by ``delta`` radians."""
        return self.with_pumps([p.shifted(delta) for p in self.pumps])

    def flux(self, t, f_base):
        """Loop flux (flux quanta) at times ``t`` for base frequency ``f_base``."""
        t = np.asarray(t, dtype=float)
        phi = np.full_like(t, self.phi_dc)
        for p in self.pumps:
            phi = phi + p.amplitude * np.cos(2 * np.pi * p.harmonic * f_base * t + p.phase)
        return phi

    def inverse_inductance(self, t, f_base):
        """Exact ``1 / L(t)`` of the stack in 1/H."""
        return self.n_stack**-1 * 4 * np.pi * self.i_c / PHI0 * np.cos(np.pi * self.flux(t, f_base))


def squid_inductance(spec, flux):
    """Static inductance (H) of the stack at a fixed loop flux."""
    c = np.cos(np.pi * np.asarray(flux, dtype=float))
    if np.any(c <= COS_FLOOR):
        raise FluxBeyondHalfQuantum(f"cos(pi * {flux}) <= {COS_FLOOR}: inductance diverges")
    out = spec.n_stack * PHI0 / (4 * np.pi * spec.i_c * c)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FourierLCoefficients:
    """Fourier series of ``1 / L(t)`` over base harmonics ``q = -Q..Q``.

    ``values[q + Q]`` multiplies ``exp(j q w_b t)`` and already includes the
    pump phase factors.
    """

    values: np.ndarray
    mode: str = EXACT
    raw: dict = field(default=None, compare=False)

    @property
    def order(self):
        return (len(self.values) - 1) // 2

    def __getitem__(self, q):
        q = int(q)
        if abs(q) > self.order:
            return 0j
        return self.values[q + self.order]

    def evaluate(self, t, f_base):
        """Reconstruct ``1 / L(t)`` (complex; the imaginary part is round-off)."""
        qs = np.arange(-self.order, self.order + 1)
        t = np.asarray(t, dtype=float)
        return np.exp(2j * np.pi * f_base * np.multiply.outer(t, qs)) @ self.values


def taylor3_constants(spec):
    """Phase-free third-order constants ``{p: F_p}`` for a single pump tone."""
    if len(spec.pumps) > 1:
        raise UnsupportedPumpCount("the third-order expansion covers a single pump tone")
    amp = spec.pumps[0].amplitude if spec.pumps else 0.0
    g = 4 * np.pi * spec.i_c / (PHI0 * spec.n_stack)
    a = np.pi * amp
    c = np.cos(np.pi * spec.phi_dc)
    s = np.sin(np.pi * spec.phi_dc)
    f1 = -0.5 * g * s * (a - a**3 / 8)
    f2 = -0.5 * g * c * a**2 / 4
    f3 = 0.5 * g * s * a**3 / 24
    return {0: g * c * (1 - a**2 / 4), 1: f1, -1: f1, 2: f2, -2: f2, 3: f3, -3: f3}


def inverse_inductance_coefficients(spec, mode=EXACT, n_samples=4096, p_max=None):
    """Fourier coefficients of the stack's inverse inductance.

    ``taylor3`` keeps the expansion of the flux cosine to third order in the
    pump amplitude (one tone only).  ``exact`` samples ``1 / L(t)`` over one
    base period and takes the trapezoid-rule (FFT) projection; coefficients
    beyond ``p_max`` base harmonics are dropped.
    """
    if mode == TAYLOR3:
        consts = taylor3_constants(spec)
        if not spec.pumps:
            return FourierLCoefficients(np.array([consts[0]], dtype=complex), TAYLOR3, consts)
        tone = spec.pumps[0]
        order = 3 * tone.harmonic
        values = np.zeros(2 * order + 1, dtype=complex)
        for p, fp in consts.items():
            values[p * tone.harmonic + order] += fp * np.exp(1j * p * tone.phase)
        return FourierLCoefficients(values, TAYLOR3, consts)
    if mode != EXACT:
        raise ValidationError(f"unknown coefficient mode {mode!r}; expected one of {MODES}")
    if len(spec.pumps) > 2:
        raise UnsupportedPumpCount("at most two pump tones are supported")
    top = max((p.harmonic for p in spec.pumps), default=0)
    n = max(int(n_samples), 4096)
    if top:
        # keep the sampled band well above the highest mixing products
        while n < 16 * top:
            n *= 2
    t = np.arange(n) / n  # in units of the base period
    samples = spec.inverse_inductance(t, 1.0)
    spectrum = np.fft.fft(samples) / n
    if p_max is None:
        p_max = n // 4 if top else 0
    p_max = min(int(p_max), n // 2 - 1)
    qs = np.arange(-p_max, p_max + 1)
    values = spectrum[qs % n]
    return FourierLCoefficients(values, EXACT)


def squid_spectral_admittance(spec, grid, mode=EXACT, coefficients=None):
    """Admittance block ``Gamma @ Omega`` of a pumped SQUID stack.

    Entry ``(k, k - q)`` is ``c_q / (j w_{k-q})``: the inverse-inductance
    coefficient acts on the integrated voltage, so the input (column)
    frequency sets the denominator.
    """
    coeffs = coefficients if coefficients is not None else inverse_inductance_coefficients(spec, mode)
    dim = grid.dim
    ks = grid.harmonics
    lag = np.subtract.outer(ks, ks)  # q = k_row - k_col
    gamma = np.zeros((dim, dim), dtype=complex)
    usable = np.abs(lag) <= coeffs.order
    gamma[usable] = coeffs.values[lag[usable] + coeffs.order]
    return gamma / (1j * grid.omegas)[np.newaxis, :]


def capacitor_spectral_admittance(c, grid):
    return np.diag(1j * grid.omegas * c)


def inductor_spectral_admittance(l, grid):
    if not l > 0:
        raise ValidationError(f"inductance must be positive, got {l}")
    return np.diag(1.0 / (1j * grid.omegas * l))


def resistor_spectral_admittance(r, grid):
    if not r > 0:
        raise NonPositiveResistance(f"resistance must be positive, got {r}")
    return np.eye(grid.dim, dtype=complex) / r
