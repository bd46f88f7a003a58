"""Closed-form limit fields: soliton on a condensate, plane wave, Peregrine.

All square roots take their principal value.  Evaluators accept scalars or
numpy arrays in x, t and preserve the input floating type, so callers may
demand extended precision for finite-difference work.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralConfig, SpectralError, principal_sqrt

__all__ = [
    "LimitSolitonParams",
    "soliton_params",
    "q_soliton",
    "q_planewave",
    "q_peregrine",
    "q_peregrine_standard",
]


@dataclass(frozen=True)
class LimitSolitonParams:
    """Parameter pack of the soliton-on-condensate field.

    amplitude/carrier_wavenumber/carrier_frequency set the condensate
    background; the cosh/cos wave numbers, frequencies and the complex
    shifts shape the localized crest.  denominator_depth is the cos weight
    in the denominator and must stay below 1 for a pole-free field.
    """

    amplitude: float            # background modulus
    carrier_wavenumber: float   # E in exp(-iEx + iNt)
    carrier_frequency: float    # N in exp(-iEx + iNt)
    denominator_depth: float    # B, weight of the oscillatory term
    cos_wavenumber: float       # xi
    cosh_wavenumber: float      # eta
    cos_frequency: float        # theta of the crest (not the phase function)
    cosh_frequency: float       # phi
    cos_shift: float            # rho, imaginary shift of the cos argument
    cosh_shift: float           # sigma, imaginary shift of the cosh argument
    alpha: float                # real phase offset inside the cos
    phase_c: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(abs(self.phase_c) - 1.0) > 1e-12:
            raise SpectralError("phase constant must be unimodular")


def soliton_params(cfg: SpectralConfig) -> LimitSolitonParams:
    """Limit parameters of the gap-closed soliton field for this configuration."""
    e1, e3 = cfg.e1, cfg.e3
    em1, em3 = e1.conjugate(), e3.conjugate()
    amp = e1.imag
    wavenum = 2.0 * e1.real
    freq = -2.0 * (2.0 * e1.real ** 2 - e1.imag ** 2)
    depth = (abs(e3 - e1) - abs(e3 - em1)) ** 2 / (abs(e3 - em3) * abs(e1 - em1))

    root_a = principal_sqrt(1j * (em3 - e1))
    root_b = principal_sqrt(1j * (em3 - em1))
    xi_eta = 2j * root_a * root_b
    th_phi = 4j * (em3 + e1.real) * root_a * root_b
    rho_sigma = -2.0 * cmath.log((root_b - root_a) / (root_b + root_a))

    return LimitSolitonParams(
        amplitude=amp,
        carrier_wavenumber=wavenum,
        carrier_frequency=freq,
        denominator_depth=depth,
        cos_wavenumber=xi_eta.real,
        cosh_wavenumber=xi_eta.imag,
        cos_frequency=th_phi.real,
        cosh_frequency=th_phi.imag,
        cos_shift=rho_sigma.real,
        cosh_shift=rho_sigma.imag,
        alpha=cfg.alpha,
    )


def q_soliton(x, t, params: LimitSolitonParams, check_denominator: bool = True):
    """Soliton on an unstable condensate.

    Ratio of shifted to unshifted cosh+cos envelopes on a plane-wave carrier.
    """
    p = params
    cosh_arg = p.cosh_wavenumber * x + p.cosh_frequency * t
    cos_arg = p.cos_wavenumber * x + p.cos_frequency * t - p.alpha
    num = (np.cosh(cosh_arg - 1j * p.cosh_shift)
           + p.denominator_depth * np.cos(cos_arg - 1j * p.cos_shift))
    den = np.cosh(cosh_arg) + p.denominator_depth * np.cos(cos_arg)
    if check_denominator and np.min(np.abs(den)) < 1e-12:
        raise ZeroDivisionError(
            f"soliton envelope denominator vanished (x={x}, t={t})")
    carrier = np.exp(1j * (-p.carrier_wavenumber * x + p.carrier_frequency * t))
    return p.amplitude * p.phase_c * (num / den) * carrier


def q_planewave(x, t, cfg: SpectralConfig, phase_c: complex = 1.0):
    """Constant-modulus plane-wave limit field."""
    p = soliton_params(cfg)
    carrier = np.exp(1j * (-p.carrier_wavenumber * x + p.carrier_frequency * t))
    return -p.amplitude * phase_c * carrier


def q_peregrine(x, t, e1: complex, phase_c: complex = 1.0):
    """Merged-branch-point limit of the soliton field (rational breather).

    e1 fixes the background height and the carrier; the standard Peregrine
    breather is the unit-background special case after a Galilean boost.
    """
    e1 = complex(e1)
    if e1.imag <= 0:
        raise SpectralError("e1 must have positive imaginary part")
    a2 = e1.imag ** 2
    shifted = x + 4.0 * e1.real * t
    num = 16j * a2 * t + 4.0
    den = 4.0 * a2 * shifted ** 2 + 16.0 * a2 ** 2 * t ** 2 + 1.0
    carrier = np.exp(-2j * e1.real * x - 2j * (2.0 * e1.real ** 2 - a2) * t)
    return phase_c * (1.0 - num / den) * carrier


def q_peregrine_standard(x, t):
    """The Peregrine breather on a unit condensate."""
    num = 16j * t + 4.0
    den = 4.0 * x ** 2 + 16.0 * t ** 2 + 1.0
    return (1.0 - num / den) * np.exp(2j * t)
