"""The scalar gauge that removes the diagonal jumps of the scattering problem.

A single complex constant (the gauge jump constant) is fixed by a 2x2
moment system on the shrinking cuts; the gauge itself is a curve-radical
weighted combination of four Cauchy integrals.  Its value at infinity is
real and admits a finite limit as the gap closes, with an explicit
log-epsilon asymptote.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import SpectralConfig, SpectralError, curve_radical
from .quadrature import (DEFAULT_RULE, QuadratureRule, cauchy_cut_integral,
                         cut_moment)

__all__ = [
    "NormalizationError",
    "NormalizationData",
    "moment_matrices",
    "solve_jump_constant",
    "scale_constant",
    "jump_constant_asymptote",
    "normalization_data",
    "phase_function",
    "phase_limit",
    "phase_boundary",
    "phase_at_shrinking_end",
    "phase_limit_at_zero",
]

# arcs carrying the four Cauchy integrals, with their gauge coefficients
_ARCS = ("shrinking_upper", "connecting_upper", "connecting_lower",
         "shrinking_lower")


class NormalizationError(RuntimeError):
    """Gauge construction failed (singular moments, broken conjugacy...)."""


@dataclass(frozen=True)
class NormalizationData:
    """Per-configuration gauge constants.

    jump_constant is the diagonal-jump value on the upper shrinking cut (its
    conjugate acts on the lower one); limit_value is the real value of the
    gauge at infinity; scale_constant is the epsilon-independent constant in
    the log-epsilon asymptote of the jump constant.
    """

    jump_constant: complex
    limit_value: float
    scale_constant: complex
    epsilon: float


def _coefficients(cfg: SpectralConfig, jump_constant: complex) -> dict[str, complex]:
    return {
        "shrinking_upper": jump_constant,
        "connecting_upper": -cfg.beta,
        "connecting_lower": -cfg.beta,
        "shrinking_lower": jump_constant.conjugate(),
    }


@lru_cache(maxsize=128)
def _moments(cfg: SpectralConfig, rule: QuadratureRule) -> dict[str, tuple[complex, ...]]:
    return {arc: tuple(cut_moment(cfg, arc, k, rule) for k in range(3))
            for arc in _ARCS}


def moment_matrices(cfg: SpectralConfig, rule: QuadratureRule = DEFAULT_RULE):
    """Moment-0/1 matrices of 1/R_+ over the shrinking and connecting cuts.

    Returns (shrinking, connecting): columns are the upper/lower arcs, rows
    the 0th and 1st moments.  Raises if the shrinking matrix is singular.
    """
    m = _moments(cfg, rule)
    shrinking = np.array([[m["shrinking_upper"][0], m["shrinking_lower"][0]],
                          [m["shrinking_upper"][1], m["shrinking_lower"][1]]])
    connecting = np.array([[m["connecting_upper"][0], m["connecting_lower"][0]],
                           [m["connecting_upper"][1], m["connecting_lower"][1]]])
    if abs(np.linalg.det(shrinking)) < 1e-14:
        raise NormalizationError("singular shrinking-cut moment matrix; "
                                 "degenerate configuration")
    return shrinking, connecting


def solve_jump_constant(cfg: SpectralConfig, rule: QuadratureRule = DEFAULT_RULE,
                        conjugacy_tol: float = 1e-8) -> complex:
    """Solve the 2x2 moment system for the gauge jump constant.

    The constant and its conjugate are treated as independent unknowns; the
    solution must come out as a conjugate pair, which doubles as a check of
    the cut orientations.
    """
    shrinking, connecting = moment_matrices(cfg, rule)
    rhs = connecting @ np.array([cfg.beta, cfg.beta], dtype=complex)
    u = np.linalg.solve(shrinking, rhs)
    defect = abs(u[1] - np.conj(u[0])) / max(1.0, abs(u[0]))
    if defect > conjugacy_tol:
        raise NormalizationError(
            f"jump constant is not a conjugate pair (defect {defect:.2e}); "
            "cut orientation or branch bug")
    return complex(u[0])


def scale_constant(cfg: SpectralConfig) -> complex:
    """Epsilon-independent constant in the log-epsilon law of the jump constant."""
    e1, e3 = cfg.e1, cfg.e3
    em1 = e1.conjugate()
    if e1 == e3:
        raise NormalizationError("degenerate configuration E1 = E3")
    num = (e3 - e1) * (e3 - em1) * (abs(e1 - e3) - abs(e3 - em1)) ** 2
    return num / (2.0 * (e1.imag ** 2) * e3.imag)


def jump_constant_asymptote(cfg: SpectralConfig) -> complex:
    """(i beta / pi) * log(eps / (4 i H)) with H the scale constant."""
    h = scale_constant(cfg)
    return (1j * cfg.beta / np.pi) * cmath.log(cfg.epsilon / (4j * h))


def _limit_value(cfg: SpectralConfig, jump_constant: complex,
                 rule: QuadratureRule, reality_tol: float = 1e-8) -> float:
    m = _moments(cfg, rule)
    coef = _coefficients(cfg, jump_constant)
    m2 = sum(coef[a] * m[a][2] for a in _ARCS)
    value = -m2 / (2j * np.pi)
    if abs(value.imag) > reality_tol * max(1.0, abs(value)):
        raise NormalizationError(
            f"gauge limit not real (Im = {value.imag:.2e}); orientation bug")
    return float(value.real)


@lru_cache(maxsize=128)
def normalization_data(cfg: SpectralConfig,
                       rule: QuadratureRule = DEFAULT_RULE) -> NormalizationData:
    jc = solve_jump_constant(cfg, rule)
    return NormalizationData(
        jump_constant=jc,
        limit_value=_limit_value(cfg, jc, rule),
        scale_constant=scale_constant(cfg),
        epsilon=cfg.epsilon,
    )


def phase_limit(cfg: SpectralConfig, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Value of the gauge at infinity (real)."""
    return normalization_data(cfg, rule).limit_value


def phase_function(z: complex, cfg: SpectralConfig,
                   data: NormalizationData | None = None,
                   rule: QuadratureRule = DEFAULT_RULE) -> complex:
    """The scalar gauge, analytic off the shrinking and connecting cuts.

    For |z| beyond ~100 length scales the four Cauchy kernels nearly cancel;
    the evaluation then subtracts the first three moments explicitly to avoid
    catastrophic cancellation and adds the exact remainder kernel.
    """
    data = data or normalization_data(cfg, rule)
    coef = _coefficients(cfg, data.jump_constant)
    scale = max(abs(cfg.e1), abs(cfg.e3), 1.0)
    radical = curve_radical(z, cfg)
    if abs(z) <= 100.0 * scale:
        total = sum(coef[a] * cauchy_cut_integral(z, a, cfg, 0, rule)
                    for a in _ARCS)
        return radical * total / (2j * np.pi)
    # moment-subtracted form: 1/(zeta - z) = -(1 + zeta/z + zeta^2/z^2)/z
    #                                        + zeta^3 / (z^3 (zeta - z)).
    # The moment-0/1 combinations vanish identically for the exact jump
    # constant (that is what its defining system says); dropping them here
    # removes an O(|z|^2 * solve residual) artefact.  A loud guard keeps a
    # genuinely wrong constant from slipping through.
    m = _moments(cfg, rule)
    mom = [sum(coef[a] * m[a][k] for a in _ARCS) for k in range(3)]
    mscale = max(abs(coef[a] * m[a][k]) for a in _ARCS for k in range(2))
    if max(abs(mom[0]), abs(mom[1])) > 1e-9 * max(1.0, mscale):
        raise NormalizationError("low moments of the gauge density do not "
                                 "cancel; jump constant is inconsistent")
    tail = sum(coef[a] * cauchy_cut_integral(z, a, cfg, 3, rule) for a in _ARCS)
    bracket = (-mom[2] + tail) / z ** 3
    return radical * bracket / (2j * np.pi)


def phase_boundary(z: complex, cfg: SpectralConfig, arc_name: str, side: int,
                   data: NormalizationData | None = None,
                   rule: QuadratureRule = DEFAULT_RULE,
                   base_offset: float = 1e-4) -> complex:
    """One-sided gauge value at an interior point of an arc.

    Computed as a limit along the side normal with offsets h, h/2, h/4 and a
    quadratic Richardson model; the gauge extends smoothly to either side away
    from the arc endpoints.
    """
    data = data or normalization_data(cfg, rule)
    arc = cfg.arc(arc_name)
    normal = 1j * arc.tangent * side
    # offsets live on the scale of the arc itself; the gauge varies on the
    # gap scale near the shrinking cuts
    hs = np.array([1.0, 0.5, 0.25]) * base_offset * arc.length
    vals = np.array([phase_function(z + normal * h, cfg, data, rule) for h in hs])
    # fit value = L + a h + b h^2 exactly through the three samples
    v = np.vander(hs, 3, increasing=True)
    sol = np.linalg.solve(v, vals)
    return complex(sol[0])


def phase_at_shrinking_end(cfg: SpectralConfig, which: int,
                           data: NormalizationData | None = None,
                           rule: QuadratureRule = DEFAULT_RULE,
                           base_offset: float = 1e-4) -> complex:
    """Limit of the gauge at the far end of a shrinking cut (E3 or E_{-3}).

    which=+1 for the upper cut end, -1 for its conjugate.  The local behaviour
    carries half-power and half-power-log terms, so the extrapolation model is
    {1, sqrt(h) log h, sqrt(h)} on offsets h, h/2, h/4 along the outward cut
    direction.
    """
    data = data or normalization_data(cfg, rule)
    if which == 1:
        end, inward = cfg.e3, cfg.e2 - cfg.e3
    elif which == -1:
        end = cfg.e3.conjugate()
        inward = (cfg.e2 - cfg.e3).conjugate()
    else:
        raise SpectralError("which must be ±1")
    outward = -inward / abs(inward)
    scale = max(abs(cfg.e1 - cfg.e3), 1.0)
    hs = np.array([1.0, 0.5, 0.25]) * base_offset * scale
    vals = np.array([phase_function(end + outward * h, cfg, data, rule) for h in hs])
    r = np.sqrt(hs)
    basis = np.column_stack([np.ones(3), r * np.log(hs), r])
    sol = np.linalg.solve(basis, vals)
    return complex(sol[0])


def phase_limit_at_zero(cfg: SpectralConfig, eps_values=(1e-3, 1e-4, 1e-5),
                        rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Gap-closed limit of the gauge at infinity.

    Extrapolates the eps*log(eps) error model through the given gap values,
    keeping the phases alpha, beta of cfg fixed.
    """
    eps = np.asarray(sorted(eps_values, reverse=True), dtype=float)
    vals = np.array([
        phase_limit(SpectralConfig(cfg.e1, cfg.e3, e, cfg.alpha, cfg.beta), rule)
        for e in eps])
    basis = np.column_stack([np.ones_like(eps), eps * np.log(eps), eps])
    sol, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    return float(sol[0])
