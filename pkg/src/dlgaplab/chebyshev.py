"""Rescaled Chebyshev filters ``P_q(x) = T_q(2x/h - 1) / T_q(2/h - 1)``.

``P_q(1) = 1`` while ``|P_q|`` is exponentially small on ``[0, h]``; applied to
``A = DL(H)ᴴ DL(H)`` it suppresses every excited component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# above this value of q * sqrt(1 - h) the scalar path switches to log-domain/ratio arithmetic
LOG_DOMAIN_THRESHOLD = 300.0
# log T_q(2/h - 1) is close to 2q sqrt(1 - h) only for h near 1; for small h the
# normalisation itself is checked so that the direct recurrence never overflows
LOG_NORMALIZATION_MAX = 600.0


def chebyshev_t(q: int, t):
    """``T_q(t)`` by the three-term recurrence (scalar or array ``t``)."""
    t = np.asarray(t, dtype=float)
    prev, cur = np.ones_like(t), t.copy()
    if q == 0:
        return prev
    for _ in range(q - 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur


def _ratios(q: int, t0: float) -> np.ndarray:
    """``c_k = T_k(t0) / T_{k+1}(t0)`` for ``k = 0..q-1``; stable for any ``q`` when ``t0 > 1``."""
    c = np.empty(q)
    if q:
        c[0] = 1.0 / t0
        for k in range(1, q):
            c[k] = 1.0 / (2.0 * t0 - c[k - 1])
    return c


def log_chebyshev_outside(q: int, t: float) -> float:
    """``log |T_q(t)|`` for ``|t| >= 1`` via ``cosh(q arccosh |t|)``."""
    y = q * math.acosh(abs(t))
    return y + math.log1p(math.exp(-2.0 * y)) - math.log(2.0)


@dataclass(frozen=True)
class ChebyshevFilter:
    q: int
    h: float
    normalization: float = field(init=False)

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"degree must be >= 0, got {self.q}")
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"h must lie in (0, 1), got {self.h}")
        if self.log_domain:
            norm = math.inf if self.log_normalization > 709.0 else math.exp(self.log_normalization)
        else:
            norm = float(chebyshev_t(self.q, self.t0))
        object.__setattr__(self, "normalization", norm)

    @property
    def t0(self) -> float:
        """Image of ``x = 1`` under ``x -> 2x/h - 1``."""
        return 2.0 / self.h - 1.0

    @property
    def log_domain(self) -> bool:
        if self.q * math.sqrt(1.0 - self.h) > LOG_DOMAIN_THRESHOLD:
            return True
        return self.log_normalization > LOG_NORMALIZATION_MAX

    @property
    def log_normalization(self) -> float:
        return log_chebyshev_outside(self.q, self.t0)

    def normalization_lower_bound(self) -> float:
        """``exp(2q sqrt((t0 - 1)/(t0 + 1))) / 2``, returned as a log."""
        x = self.t0
        return 2.0 * self.q * math.sqrt((x - 1.0) / (x + 1.0)) - math.log(2.0)


def eval_scalar(f: ChebyshevFilter, x):
    """``P_q(x)`` for scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    t = 2.0 * x / f.h - 1.0
    if not f.log_domain:
        return chebyshev_t(f.q, t) / f.normalization
    flat = np.atleast_1d(t).ravel()
    out = np.empty_like(flat)
    inside = np.abs(flat) <= 1.0
    # |T_q| <= 1 on [-1, 1], so the quotient underflows harmlessly to 0 there
    out[inside] = np.cos(f.q * np.arccos(flat[inside])) * math.exp(-f.log_normalization)
    for j in np.flatnonzero(~inside):
        tj = float(flat[j])
        sign = 1.0 if tj > 0 or f.q % 2 == 0 else -1.0
        out[j] = sign * math.exp(log_chebyshev_outside(f.q, tj) - f.log_normalization)
    out = out.reshape(t.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BoundCheck:
    max_abs: float
    bound: float
    holds: bool


def verify_cheb_bound(f: ChebyshevFilter, grid_points: int = 10_000) -> BoundCheck:
    """Compare ``max |P_q|`` on a uniform grid over ``[0, h]`` with ``2 exp(-2q sqrt(1 - h))``."""
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    xs = np.linspace(0.0, f.h, grid_points)
    max_abs = float(np.max(np.abs(eval_scalar(f, xs))))
    bound = 2.0 * math.exp(-2.0 * f.q * math.sqrt(1.0 - f.h))
    return BoundCheck(max_abs, bound, bool(max_abs <= bound + 1e-12))


def apply_filter(f: ChebyshevFilter, a_action: Callable[[np.ndarray], np.ndarray], psi: np.ndarray) -> np.ndarray:
    """``P_q(A) psi`` with one call of ``a_action`` per degree.

    Runs the recurrence on ``u_k = T_k(tA) psi / T_k(t0)`` with ``t = 2/h x - 1`` so that
    no intermediate vector grows with the normalisation.
    """
    psi = np.asarray(psi, dtype=complex)
    if f.q == 0:
        return psi.copy()
    c = _ratios(f.q, f.t0)
    scale = 2.0 / f.h

    def t_action(v):
        return scale * a_action(v) - v

    prev = psi
    cur = t_action(psi) * c[0]
    for k in range(1, f.q):
        prev, cur = cur, 2.0 * c[k] * t_action(cur) - (c[k - 1] * c[k]) * prev
    return cur


def gap_substitution(gamma: float) -> float:
    """``h = 1 / (gamma/4 + 1)``, the excited-eigenvalue ceiling of ``DL(H)ᴴ DL(H)`` for ``g = 2``."""
    return 1.0 / (gamma / 4.0 + 1.0)
