"""Moduli of continuity and the derived moduli driving direction synthesis.

A modulus is a continuous, strictly decreasing bijection onto (0, sup) with
limit 0 at infinity.  All evaluation and inversion happens in log domain:
the schedules fed through these functions overflow doubles by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .logvalue import LogValue

POWER = "power"
LOG = "log"
EXP = "exp"
TABLE = "table"
DERIVED_HALFSPACE = "derived_halfspace"
DERIVED_FAMILY = "derived_family"

_E = math.e
_LN_4PI = math.log(4.0 * math.pi)


class ModulusDomainError(ValueError):
    """Argument below the modulus domain."""


class ModulusRangeError(ValueError):
    """Value outside the modulus range, inversion impossible."""


@dataclass(frozen=True)
class Modulus:
    family: str
    params: tuple = ()
    domain_start: float = 0.0

    def __post_init__(self):
        if self.domain_start < 0:
            raise ValueError("domain_start must be >= 0")
        if self.family == POWER:
            (p,) = self.params
            if p <= 0:
                raise ValueError("power decay exponent must be positive")
        elif self.family == LOG:
            (shift,) = self.params
            if shift < _E:
                raise ValueError("log decay shift must be >= e")
        elif self.family == EXP:
            (c,) = self.params
            if c <= 0:
                raise ValueError("exp decay rate must be positive")
        elif self.family == TABLE:
            ts, ws = self.params
            if len(ts) != len(ws) or len(ts) < 2:
                raise ValueError("table needs matching t/w samples, at least 2")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("table abscissae must increase strictly")
            if any(b >= a for a, b in zip(ws, ws[1:])):
                raise ValueError("table values must decrease strictly")
            if ts[0] <= 0 or ws[-1] <= 0:
                raise ValueError("table must stay positive")
        elif self.family == DERIVED_HALFSPACE:
            (inner,) = self.params
            if not isinstance(inner, Modulus):
                raise ValueError("derived modulus wraps a Modulus")
        elif self.family == DERIVED_FAMILY:
            inner, delta0, a0, tau0 = self.params
            if not isinstance(inner, Modulus):
                raise ValueError("derived modulus wraps a Modulus")
            if min(delta0, a0, tau0) <= 0:
                raise ValueError("family constants must be positive")
        else:
            raise ValueError(f"unknown modulus family {self.family!r}")

    # -- json ------------------------------------------------------------

    def to_json(self) -> dict:
        params = self.params
        if self.family == TABLE:
            params = [list(params[0]), list(params[1])]
        elif self.family in (DERIVED_HALFSPACE, DERIVED_FAMILY):
            params = [params[0].to_json(), *params[1:]]
        else:
            params = list(params)
        return {"family": self.family, "params": params,
                "domain_start": self.domain_start}

    @staticmethod
    def from_json(obj: dict) -> "Modulus":
        family = obj["family"]
        params = obj["params"]
        if family == TABLE:
            params = (tuple(params[0]), tuple(params[1]))
        elif family in (DERIVED_HALFSPACE, DERIVED_FAMILY):
            params = (Modulus.from_json(params[0]), *params[1:])
        else:
            params = tuple(params)
        return Modulus(family, params, obj.get("domain_start", 0.0))


def power_decay(p: float, domain_start: float = 0.0) -> Modulus:
    """w(t) = t**-p."""
    return Modulus(POWER, (float(p),), domain_start)


def log_decay(shift: float = _E, domain_start: float = 0.0) -> Modulus:
    """w(t) = 1 / ln(shift + t)."""
    return Modulus(LOG, (float(shift),), domain_start)


def exp_decay(c: float = 1.0, domain_start: float = 0.0) -> Modulus:
    """w(t) = exp(-c t)."""
    return Modulus(EXP, (float(c),), domain_start)


def tabulated(ts: Sequence[float], ws: Sequence[float],
              domain_start: float | None = None) -> Modulus:
    start = ts[0] if domain_start is None else domain_start
    return Modulus(TABLE, (tuple(map(float, ts)), tuple(map(float, ws))), start)


def derived_halfspace(omega: "Modulus") -> "Modulus":
    """The half-space derived modulus as a first-class Modulus."""
    return Modulus(DERIVED_HALFSPACE, (omega,), 1.0)


def derived_family(omega: "Modulus", delta0: float, A0: float,
                   tau0: float) -> "Modulus":
    """The family-of-integrals derived modulus as a first-class Modulus."""
    return Modulus(DERIVED_FAMILY, (omega, float(delta0), float(A0),
                                    float(tau0)), 1.0)


def _as_logvalue(t) -> LogValue:
    if isinstance(t, LogValue):
        return t
    return LogValue.from_float(float(t))


def _check_domain(omega: Modulus, t: LogValue) -> None:
    if t.sign < 0:
        raise ModulusDomainError("modulus argument must be nonnegative")
    if omega.domain_start > 0 and t < LogValue.from_float(omega.domain_start):
        raise ModulusDomainError(
            f"argument below domain start {omega.domain_start}")


def eval_modulus(omega: Modulus, t) -> LogValue:
    """Evaluate the modulus at t, in log domain.

    Saturates to a log-zero value once the true magnitude drops below the
    representable floor (only ever approached by exp decay at huge t).
    """
    t = _as_logvalue(t)
    _check_domain(omega, t)
    if omega.family == DERIVED_HALFSPACE:
        return omega1_halfspace(omega.params[0], t)
    if omega.family == DERIVED_FAMILY:
        inner, delta0, a0, tau0 = omega.params
        return omega1_family(inner, t, delta0, a0, tau0)
    if omega.family == POWER:
        if t.sign == 0:
            raise ModulusDomainError("power decay is undefined at 0")
        return LogValue.from_ln(-omega.params[0] * t.ln())
    if omega.family == LOG:
        shift = omega.params[0]
        ln_t = t.ln_mag if t.sign > 0 else float("-inf")
        if ln_t > 45.0:
            # ln(shift + t) = ln t + log1p(shift/t); the correction is below
            # double resolution past this point
            ln_ln = math.log(ln_t + math.log1p(shift * math.exp(-ln_t)))
        else:
            ln_ln = math.log(math.log(shift + t.to_float()))
        return LogValue.from_ln(-ln_ln)
    if omega.family == EXP:
        c = omega.params[0]
        x = t.to_float()
        if math.isinf(x):
            return LogValue.from_ln(float("-inf"))
        return LogValue.from_ln(-c * x)
    # table: piecewise log-linear in (ln t, ln w)
    ts, ws = omega.params
    x = t.to_float()
    if x < ts[0] or x > ts[-1]:
        raise ModulusDomainError("argument outside tabulated range")
    return LogValue.from_ln(_table_ln_eval(ts, ws, math.log(x) if x > 0 else -math.inf))


def _table_ln_eval(ts, ws, ln_x: float) -> float:
    lts = [math.log(v) for v in ts]
    lws = [math.log(v) for v in ws]
    if ln_x <= lts[0]:
        return lws[0]
    for i in range(len(lts) - 1):
        if ln_x <= lts[i + 1]:
            u = (ln_x - lts[i]) / (lts[i + 1] - lts[i])
            return lws[i] + u * (lws[i + 1] - lws[i])
    return lws[-1]


def _sup_value(omega: Modulus) -> LogValue | None:
    """Supremum of the range (value at domain_start), None if unbounded."""
    if omega.family == POWER:
        if omega.domain_start <= 0:
            return None
        return eval_modulus(omega, LogValue.from_float(omega.domain_start))
    if omega.family == TABLE:
        return LogValue.from_float(omega.params[1][0])
    start = max(omega.domain_start, 0.0)
    return eval_modulus(omega, LogValue.from_float(start)) if start > 0 else \
        eval_modulus(omega, LogValue.zero())


def invert_modulus(omega: Modulus, s) -> LogValue:
    """Inverse function: the t with w(t) = s."""
    s = _as_logvalue(s)
    if s.sign <= 0:
        raise ModulusRangeError("modulus values are positive")
    if omega.family in (DERIVED_HALFSPACE, DERIVED_FAMILY):
        raise ModulusRangeError("derived moduli expose evaluation only")
    sup = _sup_value(omega)
    if sup is not None and s > sup:
        raise ModulusRangeError("value above the modulus range")
    ln_s = s.ln()
    if omega.family == POWER:
        return LogValue.from_ln(-ln_s / omega.params[0])
    if omega.family == LOG:
        shift = omega.params[0]
        inv_s = math.exp(-ln_s) if -ln_s <= 709.0 else math.inf
        if math.isinf(inv_s):
            raise ModulusRangeError(
                "inverse exceeds the log-domain representable range")
        if inv_s > 45.0:
            ln_t = inv_s + math.log1p(-shift * math.exp(-inv_s))
        else:
            t = math.exp(inv_s) - shift
            if t == 0:
                return LogValue.zero()
            if t < 0:
                raise ModulusRangeError("value above the modulus range")
            ln_t = math.log(t)
        return LogValue.from_ln(ln_t)
    if omega.family == EXP:
        c = omega.params[0]
        if ln_s >= 0:
            if ln_s == 0:
                return LogValue.zero()
            raise ModulusRangeError("value above the modulus range")
        return LogValue.from_ln(math.log(-ln_s) - math.log(c))
    # table: bracketed bisection in log domain (monotone, max 200 iters)
    ts, ws = omega.params
    if not (math.log(ws[-1]) <= ln_s <= math.log(ws[0]) + 1e-15):
        raise ModulusRangeError("value outside tabulated range")
    lo, hi = math.log(ts[0]), math.log(ts[-1])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _table_ln_eval(ts, ws, mid) > ln_s:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            break
    return LogValue.from_ln(0.5 * (lo + hi))


def omega1_halfspace(omega: Modulus, t) -> LogValue:
    """Derived modulus 1 / (4 pi w^{-1}((1/e) t^{-2t})), t >= 1.

    Computed entirely in log domain: ln arg = -1 - 2 t ln t.  Once t is so
    large that 2 t ln t overflows a double the argument collapses to
    log-zero; power-family inverses then return log-zero for the result,
    which is the correct one-sided limit.
    """
    t = _as_logvalue(t)
    if t < LogValue.one():
        raise ModulusDomainError("derived modulus needs t >= 1")
    ln_arg = _ln_arg_minus(t, 2.0)
    return _derived(omega, ln_arg, -_LN_4PI)


def omega1_family(omega: Modulus, t, delta0: float, A0: float,
                  tau0: float) -> LogValue:
    """Derived modulus (delta0 / (2 pi A0)) / w^{-1}((3/8) tau0 t^{-t})."""
    if min(delta0, A0, tau0) <= 0:
        raise ValueError("family constants must be positive")
    t = _as_logvalue(t)
    if t < LogValue.one():
        raise ModulusDomainError("derived modulus needs t >= 1")
    ln_arg = math.log(3.0 / 8.0) + math.log(tau0) + _t_ln_t(t, 1.0)
    prefix = math.log(delta0) - math.log(2.0 * math.pi * A0)
    return _derived(omega, ln_arg, prefix)


def _t_ln_t(t: LogValue, mult: float) -> float:
    """-mult * t * ln t as a float, -inf on overflow."""
    ln_t = t.ln()
    if ln_t <= 0.0:
        return 0.0
    # ln(mult * t * ln t) stays finite even when the product overflows
    ln_prod = math.log(mult) + ln_t + math.log(ln_t)
    if ln_prod > 709.0:
        return float("-inf")
    return -math.exp(ln_prod)


def _ln_arg_minus(t: LogValue, mult: float) -> float:
    return -1.0 + _t_ln_t(t, mult)


def _derived(omega: Modulus, ln_arg: float, ln_prefix: float) -> LogValue:
    if math.isinf(ln_arg):
        if omega.family == POWER:
            return LogValue.from_ln(float("-inf"))
        raise ModulusRangeError(
            "derived-modulus argument under the representable floor; "
            "raise domain_start or shrink t")
    inv = invert_modulus(omega, LogValue.from_ln(ln_arg))
    return LogValue.from_ln(ln_prefix - inv.ln())


def growth_condition_holds(omega: Modulus, grid: Sequence[float] | None = None
                           ) -> bool:
    """Checkable proxy for 't w(t) -> infinity': increasing along a grid.

    The constructions that need the condition take it as an assumption; this
    predicate lets callers screen a modulus before relying on it.
    """
    if grid is None:
        start = max(omega.domain_start, 1.0)
        grid = [start * 4.0 ** i for i in range(24)]
    prev = None
    for t in grid:
        tv = LogValue.from_float(t)
        try:
            val = tv * eval_modulus(omega, tv)
        except (ModulusDomainError, ModulusRangeError):
            return False
        if prev is not None and not val > prev:
            return False
        prev = val
    return True
