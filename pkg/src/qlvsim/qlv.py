"""Quasi-linear viscoelastic stress evaluation.

The stress at time t is the hereditary integral of a normalized relaxation
function G against the rate of the instantaneous elastic stress.  Two
evaluators are provided: an O(N^2) reference sum with midpoint evaluation
of G over each past interval, and an O(N * n_terms) internal-variable
scheme based on the exact exponential recursion of a Prony kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .kernels import (PronySpectrum, ReducedRelaxation, kernel_to_prony,
                      prony_relaxation, reduced_relaxation)


@dataclass(frozen=True)
class StrainHistory:
    """Sampled strain history on a strictly increasing grid starting at 0.

    ``measure`` is "green" (Green strain) or "stretch" (extension ratio).
    The material is taken to be in the zero-stress state for t < 0.
    """

    times: np.ndarray
    values: np.ndarray
    measure: str = "green"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.shape != times.shape:
            raise DomainError("times and values must be 1-D arrays of equal length")
        if times.size == 0:
            raise DomainError("history must contain at least one sample")
        if times[0] != 0.0:
            raise DomainError(f"first sample time must be 0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            idx = int(np.argmax(np.diff(times) <= 0))
            raise DomainError(f"times must be strictly increasing (index {idx + 1})")
        if not np.all(np.isfinite(values)):
            raise DomainError("strain values must be finite")
        if self.measure not in ("green", "stretch"):
            raise DomainError(f"unknown strain measure {self.measure!r}")

    def green(self) -> np.ndarray:
        if self.measure == "green":
            return self.values
        return 0.5 * (self.values ** 2 - 1.0)

    @property
    def is_uniform(self) -> bool:
        dt = np.diff(self.times)
        return dt.size == 0 or bool(np.allclose(dt, dt[0], rtol=1e-9, atol=0.0))


@dataclass(frozen=True)
class StressHistory:
    """Stress samples on the same grid as the driving strain history."""

    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class QlvModel:
    """Elastic law paired with a normalized relaxation function.

    ``prony`` is the Prony form used by the fast evaluator; it approximates
    ``relaxation`` to within ``prony_tolerance`` (recorded at construction
    on a log-spaced grid).
    """

    elastic: object
    relaxation: ReducedRelaxation
    prony: PronySpectrum
    prony_tolerance: float = 0.0

    def __post_init__(self):
        if abs(self.prony.at_zero - 1.0) > 1e-9:
            raise DomainError(
                f"Prony kernel must be normalized, g(0) = {self.prony.at_zero}")

    @classmethod
    def from_kernel(cls, elastic, kernel, n_prony: int = 64) -> "QlvModel":
        relax = reduced_relaxation(kernel)
        prony = kernel_to_prony(kernel, n_terms=n_prony)
        freqs = np.asarray(prony.frequencies)
        if freqs.size:
            grid = np.logspace(np.log10(0.1 / freqs.max()),
                               np.log10(10.0 / freqs.min()), 200)
        else:
            grid = np.logspace(-3, 3, 50)
        tol = float(np.max(np.abs(prony_relaxation(prony, grid) - relax.value(grid))))
        return cls(elastic=elastic, relaxation=relax, prony=prony,
                   prony_tolerance=tol)

    def elastic_stress(self, history: StrainHistory) -> np.ndarray:
        try:
            return np.asarray(self.elastic.stress_green(history.green()),
                              dtype=float)
        except DomainError:
            # re-raise with the offending time index for diagnostics
            green = history.green()
            for i, e in enumerate(green):
                try:
                    self.elastic.stress_green(e)
                except DomainError as exc:
                    raise DomainError(
                        f"strain outside elastic domain at time index {i} "
                        f"(t = {history.times[i]}): {exc}") from exc
            raise


def _relaxation_callable(model: QlvModel, kernel: str):
    if kernel == "relaxation":
        return model.relaxation.value
    if kernel == "prony":
        return lambda t: prony_relaxation(model.prony, t)
    raise DomainError(f"kernel must be 'relaxation' or 'prony', got {kernel!r}")


def qlv_stress_direct(model: QlvModel, history: StrainHistory,
                      kernel: str = "relaxation") -> StressHistory:
    """O(N^2) reference evaluation of the hereditary integral.

    T(t_i) = G(t_i) * T_e(0) + sum over past intervals of
    G(t_i - midpoint) * (elastic stress increment over the interval).
    The kernel is re-evaluated for every (time, interval) pair.
    """
    g = _relaxation_callable(model, kernel)
    t = history.times
    te = model.elastic_stress(history)
    n = t.size
    out = np.empty(n)
    out[0] = te[0]
    if n == 1:
        return StressHistory(times=t, values=out)
    dte = np.diff(te)
    mids = 0.5 * (t[:-1] + t[1:])
    for i in range(1, n):
        out[i] = g(t[i]) * te[0] + np.dot(np.asarray(g(t[i] - mids[:i])),
                                          dte[:i])
    return StressHistory(times=t, values=out)


def _phi(x: np.ndarray) -> np.ndarray:
    """(1 - exp(-x))/x with the x -> 0 limit handled."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-8
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x / 2.0, -np.expm1(-safe) / safe)
    return out


def qlv_stress_fast(model: QlvModel, history: StrainHistory) -> StressHistory:
    """O(N * n_terms) evaluation via per-term internal variables.

    Each Prony term carries an internal variable advanced by the exact
    exponential recursion, with the elastic stress increment taken linear
    in time over each step.  Uniform grids are evaluated with a linear
    recursive filter; non-uniform grids fall back to an explicit loop.
    """
    t = history.times
    te = model.elastic_stress(history)
    n = t.size
    prony = model.prony
    amps = np.asarray(prony.amplitudes)
    freqs = np.asarray(prony.frequencies)
    out = prony.K * te.copy()
    if amps.size == 0:
        return StressHistory(times=t, values=out)
    dte = np.diff(te)
    h0 = amps * te[0]
    if n == 1:
        out[0] += h0.sum()
        return StressHistory(times=t, values=out)
    if history.is_uniform:
        dt = t[1] - t[0]
        decay = np.exp(-freqs * dt)
        gain = amps * _phi(freqs * dt)
        h_sum = np.empty(n)
        h_sum[0] = h0.sum()
        acc = np.zeros(n - 1)
        for k in range(amps.size):
            hk, _ = lfilter([gain[k]], [1.0, -decay[k]], dte, zi=[decay[k] * h0[k]])
            acc += hk
        h_sum[1:] = acc
        out += h_sum
    else:
        dt_steps = np.diff(t)
        h = h0.copy()
        out[0] += h.sum()
        for i in range(1, n):
            x = freqs * dt_steps[i - 1]
            h = np.exp(-x) * h + amps * _phi(x) * dte[i - 1]
            out[i] += h.sum()
    return StressHistory(times=t, values=out)


def hysteresis_ratio(loading_strain, loading_stress,
                     unloading_strain, unloading_stress) -> float:
    """Loop area divided by the area under the loading branch.

    The loop area is the shoelace area of the closed loading+unloading
    polygon; the loading area integrates the positive part of the stress
    over the loading branch.  Loading must traverse increasing strain,
    unloading decreasing strain, over the same strain interval.
    """
    ls = np.asarray(loading_strain, dtype=float)
    lt = np.asarray(loading_stress, dtype=float)
    us = np.asarray(unloading_strain, dtype=float)
    ut = np.asarray(unloading_stress, dtype=float)
    if ls.size < 2 or us.size < 2:
        raise DomainError("loading and unloading branches need >= 2 samples")
    if np.any(np.diff(ls) < 0):
        raise DomainError("loading strain must be non-decreasing")
    if np.any(np.diff(us) > 0):
        raise DomainError("unloading strain must be non-increasing")

    x = np.concatenate([ls, us])
    y = np.concatenate([lt, ut])
    loop_area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    loading_area = float(np.trapezoid(np.maximum(lt, 0.0), ls))
    if loading_area <= 0.0:
        raise DomainError("loading branch has zero area; hysteresis undefined")
    return loop_area / loading_area
