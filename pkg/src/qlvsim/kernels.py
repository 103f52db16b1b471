"""Classical viscoelastic elements and relaxation spectra.

Maxwell, Voigt and Kelvin (standard linear solid) elements with their
creep/relaxation functions, discrete exponential (Prony) spectra, and the
continuous 1/q spectrum whose reduced relaxation function involves the
exponential integral E1.  All causal functions follow the half-at-zero
step convention: value 1 for t > 0, 1/2 at t = 0, 0 for t < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_EULER_GAMMA = 0.5772156649015329


def unit_step(t):
    """Step function: 1 for t > 0, 1/2 at t = 0, 0 for t < 0."""
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, 1.0, np.where(t == 0, 0.5, 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MaxwellParams:
    """Spring (mu) and dashpot (eta) in series."""

    mu: float
    eta: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise DomainError(f"eta must be > 0, got {self.eta}")

    @property
    def relaxation_time(self) -> float:
        return self.eta / self.mu


@dataclass(frozen=True)
class VoigtParams:
    """Spring (mu) and dashpot (eta) in parallel."""

    mu: float
    eta: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise DomainError(f"eta must be > 0, got {self.eta}")

    @property
    def relaxation_time(self) -> float:
        return self.eta / self.mu


@dataclass(frozen=True)
class KelvinParams:
    """Standard linear solid with relaxed modulus E_R, load-relaxation
    time tau_eps and deflection-relaxation time tau_sigma."""

    E_R: float
    tau_eps: float
    tau_sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.E_R) and self.E_R > 0):
            raise DomainError(f"E_R must be > 0, got {self.E_R}")
        if not (np.isfinite(self.tau_eps) and self.tau_eps > 0):
            raise DomainError(f"tau_eps must be > 0, got {self.tau_eps}")
        if not (np.isfinite(self.tau_sigma) and self.tau_sigma >= self.tau_eps):
            raise DomainError(
                f"need 0 < tau_eps <= tau_sigma, got tau_eps={self.tau_eps}, "
                f"tau_sigma={self.tau_sigma}")


@dataclass(frozen=True)
class PronySpectrum:
    """Discrete relaxation spectrum g(t) = K + sum_n amp_n * exp(-t*freq_n).

    ``K`` is the equilibrium (zero-frequency) coefficient.  Frequencies must
    be strictly increasing so equal spectra compare equal.
    """

    K: float
    amplitudes: tuple[float, ...] = ()
    frequencies: tuple[float, ...] = ()

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        freqs = tuple(float(f) for f in self.frequencies)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        if len(amps) != len(freqs):
            raise DomainError("amplitudes and frequencies must have equal length")
        if any(a < 0 or not np.isfinite(a) for a in amps):
            raise DomainError("amplitudes must be finite and >= 0")
        if any(f <= 0 or not np.isfinite(f) for f in freqs):
            raise DomainError("frequencies must be finite and > 0")
        if any(f2 <= f1 for f1, f2 in zip(freqs, freqs[1:])):
            raise DomainError("frequencies must be strictly increasing")
        if not np.isfinite(self.K):
            raise DomainError(f"K must be finite, got {self.K}")

    @property
    def at_zero(self) -> float:
        return self.K + sum(self.amplitudes)

    def normalized(self) -> "PronySpectrum":
        g0 = self.at_zero
        if g0 <= 0:
            raise DomainError(f"cannot normalize spectrum with g(0) = {g0}")
        return PronySpectrum(self.K / g0,
                             tuple(a / g0 for a in self.amplitudes),
                             self.frequencies)


@dataclass(frozen=True)
class FungSpectrum:
    """Continuous spectrum S(q) = c/q on [q1, q2], zero elsewhere."""

    c: float
    q1: float
    q2: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise DomainError(f"c must be > 0, got {self.c}")
        if not (np.isfinite(self.q1) and self.q1 > 0):
            raise DomainError(f"q1 must be > 0, got {self.q1}")
        if not (np.isfinite(self.q2) and self.q2 > self.q1):
            raise DomainError(f"need 0 < q1 < q2, got q1={self.q1}, q2={self.q2}")


def maxwell_creep(p: MaxwellParams, t):
    """Creep function (1/mu + t/eta) * step(t)."""
    t = np.asarray(t, dtype=float)
    out = (1.0 / p.mu + t / p.eta) * unit_step(t)
    return float(out) if out.ndim == 0 else out


def maxwell_relaxation(p: MaxwellParams, t):
    """Relaxation function mu * exp(-mu*t/eta) * step(t)."""
    t = np.asarray(t, dtype=float)
    out = p.mu * np.exp(-p.mu * np.where(t > 0, t, 0.0) / p.eta) * unit_step(t)
    return float(out) if out.ndim == 0 else out


def voigt_creep(p: VoigtParams, t):
    """Creep function (1/mu) * (1 - exp(-mu*t/eta)) * step(t)."""
    t = np.asarray(t, dtype=float)
    out = -(1.0 / p.mu) * np.expm1(-p.mu * np.where(t > 0, t, 0.0) / p.eta)
    out = out * unit_step(t)
    return float(out) if out.ndim == 0 else out


def voigt_relaxation(p: VoigtParams, t) -> tuple[float, float]:
    """Relaxation of the parallel element: eta*delta(t) + mu*step(t).

    The Dirac part cannot be a pointwise value, so the result is the pair
    (impulse weight at t = 0, regular part at t).
    """
    t = np.asarray(t, dtype=float)
    regular = p.mu * unit_step(t)
    regular = float(regular) if np.ndim(regular) == 0 else regular
    return (p.eta, regular)


def kelvin_creep(p: KelvinParams, t):
    """Creep function of the standard linear solid."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-np.where(t > 0, t, 0.0) / p.tau_sigma)
    out = (1.0 / p.E_R) * (1.0 - (1.0 - p.tau_eps / p.tau_sigma) * decay)
    out = out * unit_step(t)
    return float(out) if out.ndim == 0 else out


def kelvin_relaxation(p: KelvinParams, t):
    """Relaxation function of the standard linear solid."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-np.where(t > 0, t, 0.0) / p.tau_eps)
    out = p.E_R * (1.0 - (1.0 - p.tau_sigma / p.tau_eps) * decay)
    out = out * unit_step(t)
    return float(out) if out.ndim == 0 else out


def prony_relaxation(s: PronySpectrum, t):
    """g(t) = K + sum_n amp_n * exp(-freq_n * t), for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError(f"t must be >= 0, got min {t.min()}")
    out = np.full(t.shape, s.K, dtype=float)
    for a, f in zip(s.amplitudes, s.frequencies):
        out = out + a * np.exp(-f * t)
    return float(out) if out.ndim == 0 else out


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-u)/u du, for x > 0.

    Power series below 1, modified-Lentz continued fraction above.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("E1 requires finite x > 0")
    out = np.empty_like(x)

    small = x <= 1.0
    if np.any(small):
        xs = x[small]
        # sum_{k>=1} (-1)^(k+1) x^k / (k * k!)
        term = xs.copy()
        total = xs.copy()
        for k in range(2, 40):
            term = term * (-xs) / k
            total = total + term / k
            if np.all(np.abs(term / k) < 1e-18 * np.abs(total)):
                break
        out[small] = total - _EULER_GAMMA - np.log(xs)

    large = ~small
    if np.any(large):
        xl = x[large]
        tiny = 1e-300
        b = xl + 1.0
        c = np.full_like(xl, 1e300)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, 200):
            a = -float(i * i)
            b = b + 2.0
            den = b + a * d
            den = np.where(np.abs(den) < tiny, tiny, den)
            d = 1.0 / den
            c = b + a / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            delta = c * d
            h = h * delta
            if np.all(np.abs(delta - 1.0) < 1e-16):
                break
        out[large] = h * np.exp(-xl)

    return float(out[0]) if scalar else out


def fung_reduced_relaxation(s: FungSpectrum, t):
    """Reduced relaxation of the continuous c/q spectrum.

    G(t) = [1 + c*(E1(t/q2) - E1(t/q1))] / [1 + c*ln(q2/q1)], with
    G(0) = 1 and long-time limit 1/(1 + c*ln(q2/q1)).
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("t must be finite and >= 0")
    denom = 1.0 + s.c * math.log(s.q2 / s.q1)
    out = np.ones_like(t)
    pos = t > 0
    if np.any(pos):
        tp = t[pos]
        diff = exp_integral_e1(tp / s.q2) - exp_integral_e1(tp / s.q1)
        out[pos] = (1.0 + s.c * diff) / denom
    return float(out[0]) if scalar else out


def fung_long_time_limit(s: FungSpectrum) -> float:
    return 1.0 / (1.0 + s.c * math.log(s.q2 / s.q1))


def fung_to_prony(s: FungSpectrum, n_terms: int) -> PronySpectrum:
    """Discretize the continuous spectrum into a normalized Prony series.

    Midpoint quadrature in log q: the 1/q density is flat in log q, so each
    of the ``n_terms`` log-spaced cells contributes the same amplitude.  The
    result is normalized so g(0) = 1 exactly.
    """
    if n_terms < 2:
        raise DomainError(f"n_terms must be >= 2, got {n_terms}")
    log_q1, log_q2 = math.log(s.q1), math.log(s.q2)
    du = (log_q2 - log_q1) / n_terms
    mids = log_q1 + (np.arange(n_terms) + 0.5) * du
    q = np.exp(mids)
    weights = np.full(n_terms, s.c * du)
    denom = 1.0 + weights.sum()
    freqs = 1.0 / q[::-1]          # ascending frequency
    amps = weights[::-1] / denom
    return PronySpectrum(K=1.0 / denom,
                         amplitudes=tuple(amps),
                         frequencies=tuple(freqs))


@dataclass(frozen=True)
class ReducedRelaxation:
    """Normalized relaxation function: value(0) = 1, non-increasing.

    ``kernel`` is one of the parameter types above (already in normalized
    form where that matters); ``method`` records how values are computed:
    "closed-form" or "prony-approximation".
    """

    kernel: object
    method: str = "closed-form"

    def __post_init__(self):
        if self.method not in ("closed-form", "prony-approximation"):
            raise DomainError(f"unknown evaluation method {self.method!r}")
        if isinstance(self.kernel, PronySpectrum):
            if abs(self.kernel.at_zero - 1.0) > 1e-9:
                raise DomainError(
                    f"Prony kernel not normalized: g(0) = {self.kernel.at_zero}")

    def value(self, t):
        """G(t) for t >= 0; at t = 0 the one-sided limit 1 is returned."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("reduced relaxation requires t >= 0")
        k = self.kernel
        if isinstance(k, PronySpectrum):
            return prony_relaxation(k, t)
        if isinstance(k, FungSpectrum):
            return fung_reduced_relaxation(k, t)
        if isinstance(k, MaxwellParams):
            out = np.exp(-k.mu * t / k.eta)
            return float(out) if out.ndim == 0 else out
        if isinstance(k, KelvinParams):
            # single Kelvin body: G = (1 + S exp(-t/q)) / (1 + S)
            # with q = tau_eps, S = tau_sigma/tau_eps - 1
            big_s = k.tau_sigma / k.tau_eps - 1.0
            out = (1.0 + big_s * np.exp(-t / k.tau_eps)) / (1.0 + big_s)
            return float(out) if out.ndim == 0 else out
        if isinstance(k, VoigtParams):
            # regular part only; the impulsive term is excluded
            out = np.ones_like(t)
            return float(out) if out.ndim == 0 else out
        raise DomainError(f"unsupported kernel type {type(k).__name__}")

    def __call__(self, t):
        return self.value(t)

    @property
    def long_time_limit(self) -> float:
        k = self.kernel
        if isinstance(k, PronySpectrum):
            return k.K
        if isinstance(k, FungSpectrum):
            return fung_long_time_limit(k)
        if isinstance(k, MaxwellParams):
            return 0.0
        if isinstance(k, KelvinParams):
            return k.tau_eps / k.tau_sigma
        if isinstance(k, VoigtParams):
            return 1.0
        raise DomainError(f"unsupported kernel type {type(k).__name__}")


def reduced_relaxation(kernel) -> ReducedRelaxation:
    """Normalized relaxation function for any supported kernel.

    Prony spectra are rescaled so g(0) = 1; the Voigt element contributes
    only its regular (step) part, whose normalized form is constant 1.
    """
    if isinstance(kernel, PronySpectrum):
        return ReducedRelaxation(kernel.normalized())
    if isinstance(kernel, (FungSpectrum, MaxwellParams, KelvinParams, VoigtParams)):
        return ReducedRelaxation(kernel)
    raise DomainError(f"unsupported kernel type {type(kernel).__name__}")


def kernel_to_prony(kernel, n_terms: int = 64) -> PronySpectrum:
    """Normalized Prony form of a kernel's reduced relaxation function."""
    if isinstance(kernel, PronySpectrum):
        return kernel.normalized()
    if isinstance(kernel, FungSpectrum):
        return fung_to_prony(kernel, n_terms)
    if isinstance(kernel, MaxwellParams):
        return PronySpectrum(K=0.0, amplitudes=(1.0,),
                             frequencies=(kernel.mu / kernel.eta,))
    if isinstance(kernel, KelvinParams):
        ratio = kernel.tau_eps / kernel.tau_sigma
        if ratio == 1.0:
            return PronySpectrum(K=1.0)
        return PronySpectrum(K=ratio, amplitudes=(1.0 - ratio,),
                             frequencies=(1.0 / kernel.tau_eps,))
    if isinstance(kernel, VoigtParams):
        raise DomainError(
            "the Voigt relaxation has an impulsive part and no normalized "
            "Prony form; use the element equations directly")
    raise DomainError(f"unsupported kernel type {type(kernel).__name__}")
