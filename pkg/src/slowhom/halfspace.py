"""Explicit boundary-layer solutions for the Laplacian in a half-space.

The solution with sparse symmetric boundary spectrum is a finite cosine
series; each mode decays like exp(-2 pi |N^T xi| t) in the normal variable.
This module evaluates the series, the squared-spectrum energy S(t), the
slow-convergence schedule t_k, and assembles the schedule certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import (DirectionCertificate, IntVector, OrthonormalFrame,
                      complete_frame, projection_gap_sq)
from .logvalue import LogValue, ln_fraction, log_sum
from .modulus import Modulus, eval_modulus, invert_modulus, omega1_halfspace

_2PI = 2.0 * math.pi
_4PI = 4.0 * math.pi
MARGIN_SLACK = 1e-9  # log-rounding slack for certificate margins


@dataclass(frozen=True)
class Mode:
    stage: int               # 1-based index in the direction certificate
    xi: IntVector
    ln_coeff: float          # ln of the (positive) coefficient |xi|^{-k}
    gap_sq: Fraction         # exact |N^T xi|^2 against the certified normal

    @property
    def ln_gap(self) -> float:
        if self.gap_sq == 0:
            return float("-inf")
        return 0.5 * ln_fraction(self.gap_sq)


@dataclass
class BoundaryData:
    modes: list[Mode]
    normal_generator: IntVector
    symmetric: bool = True

    @property
    def dim(self) -> int:
        return self.normal_generator.dim

    def frame(self) -> OrthonormalFrame:
        return complete_frame(self.normal_generator)


class EmptySpectrumError(ValueError):
    pass


def build_boundary_data(cert: DirectionCertificate, K: int) -> BoundaryData:
    """Spectrum {+-xi^(k), k <= K} with coefficients |xi^(k)|^{-k}.

    Coefficients are real and shared between +-xi, so the synthesized torus
    function is real valued with mean zero.
    """
    if K < 1:
        raise ValueError("need K >= 1")
    if cert.stage_count < K + 1:
        raise ValueError(
            f"certificate has {cert.stage_count} stages, need at least {K + 1}")
    base = cert.normal_generator()
    modes = []
    for k in range(1, K + 1):
        xi = cert.stages[k - 1]
        modes.append(Mode(
            stage=k,
            xi=xi,
            ln_coeff=-k * xi.ln_norm(),
            gap_sq=projection_gap_sq(base, xi),
        ))
    return BoundaryData(modes=modes, normal_generator=base)


def smoothness_proxy(data: BoundaryData) -> dict:
    """Decay proxy ln(c_k |xi^(k)|^10), with the monotone-tail check.

    The product can grow while k < 10 even for admissible spectra; the
    smoothness content is the decreasing tail beyond that index.
    """
    values = [m.ln_coeff + 10.0 * m.xi.ln_norm() for m in data.modes]
    tail_ok = all(b <= a for a, b in zip(values[9:], values[10:]))
    coeff_ok = all(b.ln_coeff <= a.ln_coeff
                   for a, b in zip(data.modes, data.modes[1:]))
    return {"values": values, "tail_decreasing": tail_ok,
            "coeffs_nonincreasing": coeff_ok,
            "pass": tail_ok and coeff_ok}


def _damping_exponent(ln_gap: float, t: LogValue, rate: float) -> float:
    """rate * gap * t, saturating to +inf (the mode underflows to zero)."""
    if t.sign == 0:
        return 0.0
    if math.isinf(ln_gap) and ln_gap < 0:  # exact zero gap: no decay
        return 0.0
    s = ln_gap + t.ln()
    if s > 709.0:
        return math.inf
    return rate * math.exp(s)


def eval_V(data: BoundaryData, theta: np.ndarray, t) -> float:
    """The boundary-layer solution on the cylinder: real cosine series."""
    t = t if isinstance(t, LogValue) else LogValue.from_float(float(t))
    if t.sign < 0:
        raise ValueError("normal variable must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for m in data.modes:
        damp = _damping_exponent(m.ln_gap, t, _2PI)
        ln_amp = math.log(2.0) + m.ln_coeff - damp
        if ln_amp < -745.0:
            continue
        phase = _2PI * float(m.xi.to_floats() @ theta)
        total += math.exp(ln_amp) * math.cos(phase)
    return total


def eval_S(data: BoundaryData, t) -> LogValue:
    """Squared-spectrum energy S(t) = sum 2 c_k^2 exp(-4 pi g_k t)."""
    t = t if isinstance(t, LogValue) else LogValue.from_float(float(t))
    if t.sign < 0:
        raise ValueError("normal variable must be nonnegative")
    terms = []
    for m in data.modes:
        damp = _damping_exponent(m.ln_gap, t, _4PI)
        terms.append(LogValue.from_ln(math.log(2.0) + 2.0 * m.ln_coeff - damp))
    return log_sum(terms)


def schedule_tk(omega: Modulus, cert: DirectionCertificate, k: int) -> LogValue:
    """The time t_k with w(t_k) = (1/e) |xi^(k)|^{-2k}."""
    if not (1 <= k <= cert.stage_count):
        raise ValueError("stage index out of range")
    ln_target = -1.0 - 2.0 * k * cert.stage_ln_norm(k)
    return invert_modulus(omega, LogValue.from_ln(ln_target))


@dataclass
class ScheduleCertificate:
    omega: Modulus
    K: int
    t_ln: list[float]
    ln_S: list[float]
    ln_omega: list[float]
    margins: list[float]
    analytic: list[dict]
    normal_mismatch: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def margins_pass(self) -> bool:
        return all(m >= -MARGIN_SLACK for m in self.margins)

    @property
    def analytic_pass(self) -> bool:
        return all(a["pass"] for a in self.analytic)

    @property
    def all_pass(self) -> bool:
        return self.margins_pass and self.analytic_pass

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "omega": self.omega.to_json(),
            "K": self.K,
            "t_ln": self.t_ln,
            "ln_S": self.ln_S,
            "ln_omega": self.ln_omega,
            "margins": self.margins,
            "analytic": self.analytic,
            "normal_mismatch": self.normal_mismatch,
            "margins_pass": self.margins_pass,
            "analytic_pass": self.analytic_pass,
            "meta": self.meta,
        }

    def csv_rows(self) -> list[tuple]:
        return [(k + 1, self.t_ln[k], self.ln_S[k], self.ln_omega[k],
                 self.margins[k]) for k in range(len(self.margins))]


def certify_slow_convergence(data: BoundaryData, cert: DirectionCertificate,
                             omega: Modulus, K: int, *,
                             normal_override: IntVector | None = None
                             ) -> ScheduleCertificate:
    """Check S(t_k) >= w(t_k) for k <= K, in log domain.

    Also records the analytic sufficient inequality
    exp(-4 pi w1(|xi^(k)|) t_k) |xi^(k)|^{-2k} >= w(t_k), with the exact
    per-stage gap replacing w1 where the gap is the sharper of the two.
    normal_override re-certifies against a different normal (a mismatch
    probe); failures are recorded, not raised.
    """
    if K < 1 or K > len(data.modes):
        raise ValueError("K out of range for the provided spectrum")
    if normal_override is not None:
        base = normal_override
        modes = [Mode(m.stage, m.xi, m.ln_coeff,
                      projection_gap_sq(base, m.xi)) for m in data.modes]
        data = BoundaryData(modes=modes, normal_generator=base)
    t_ln, ln_S_list, ln_w_list, margins, analytic = [], [], [], [], []
    for k in range(1, K + 1):
        t_k = schedule_tk(omega, cert, k)
        w_t = eval_modulus(omega, t_k)
        s_t = eval_S(data, t_k)
        t_ln.append(t_k.ln())
        ln_S_list.append(s_t.ln())
        ln_w_list.append(w_t.ln())
        margins.append(s_t.ln() - w_t.ln())
        analytic.append(_analytic_check(data.modes[k - 1], omega, t_k, w_t, k))
    return ScheduleCertificate(
        omega=omega, K=K, t_ln=t_ln, ln_S=ln_S_list, ln_omega=ln_w_list,
        margins=margins, analytic=analytic,
        normal_mismatch=normal_override is not None,
        meta={"policy": cert.policy, "gap_base": cert.gap_base})


def _analytic_check(mode: Mode, omega: Modulus, t_k: LogValue,
                    w_t: LogValue, k: int) -> dict:
    ln_norm = mode.xi.ln_norm()
    try:
        ln_w1 = omega1_halfspace(omega, LogValue.from_ln(ln_norm)).ln_mag
    except Exception:  # derived modulus may be undefined below its floor
        ln_w1 = float("-inf")
    # product 4 pi * rate * t_k for both candidate rates
    def product(ln_rate: float) -> float:
        if math.isinf(ln_rate) and ln_rate < 0:
            return 0.0
        s = ln_rate + t_k.ln()
        return math.inf if s > 709.0 else _4PI * math.exp(s)

    p_w1 = product(ln_w1)
    p_gap = product(mode.ln_gap)
    p_eff = min(p_w1, p_gap)  # the sharper rate gives the stronger bound
    lhs_ln = -p_eff - 2.0 * k * ln_norm
    return {
        "stage": k,
        "product_omega1": p_w1,
        "product_gap": p_gap,
        "lhs_ln": lhs_ln,
        "rhs_ln": w_t.ln(),
        "pass": bool(lhs_ln >= w_t.ln() - MARGIN_SLACK),
    }


def eval_halfspace_solution(data: BoundaryData, y_prime: np.ndarray,
                            lam) -> float:
    """Solution value at the half-space point y' + lam * n.

    y' must be tangential: |y'.n| <= 1e-12 |y'|.  Uses the isometric chart
    z' = N^T y', so phases are (N^T xi) . z' exactly as in the cylinder
    picture.
    """
    y_prime = np.asarray(y_prime, dtype=float)
    fr = data.frame()
    n = fr.normal
    ny = abs(float(y_prime @ n))
    if ny > 1e-12 * max(1.0, float(np.linalg.norm(y_prime))):
        raise ValueError("y' is not tangential to the certified normal")
    z = fr.tangential.T @ y_prime
    theta = fr.tangential @ z
    return eval_V(data, theta, lam)


def trim_for_radius(data: BoundaryData, R) -> BoundaryData:
    """Drop leading modes until every remaining gap is at most 1/(8R).

    In the isometric tangential chart the phase bound |xi . N z'| <= 1/8
    then holds for all |z'| <= R; checked exactly on the squared gaps.
    """
    R = Fraction(R)
    if R <= 0:
        raise ValueError("radius must be positive")
    cutoff_sq = Fraction(1) / (64 * R * R)
    keep = list(data.modes)
    while keep and keep[0].gap_sq > cutoff_sq:
        keep.pop(0)
    if not keep:
        raise EmptySpectrumError(
            "all modes dropped: no spectrum survives the phase bound at this R")
    # gaps only shrink along the stage sequence built here; re-check anyway
    bad = [m.stage for m in keep if m.gap_sq > cutoff_sq]
    if bad:
        raise EmptySpectrumError(f"stages {bad} violate the phase bound")
    return BoundaryData(modes=keep, normal_generator=data.normal_generator)


def tangential_floor_report(data: BoundaryData, R: float, t, n_grid: int = 1000
                            ) -> dict:
    """min over a tangential grid of v(y' + t n) against S(t) / sqrt(2)."""
    fr = data.frame()
    t = t if isinstance(t, LogValue) else LogValue.from_float(float(t))
    s_val = eval_S(data, t)
    floor = math.exp(s_val.ln() - 0.5 * math.log(2.0)) if \
        math.isfinite(s_val.ln_mag) else 0.0
    d = data.dim
    if d == 2:
        grid = np.linspace(-R, R, n_grid)[:, None] * fr.tangential.T
    else:
        rng = np.random.default_rng(0)
        raw = rng.normal(size=(n_grid, d - 1))
        raw *= (R * rng.random(n_grid) ** (1.0 / (d - 1)) /
                np.linalg.norm(raw, axis=1))[:, None]
        grid = raw @ fr.tangential.T
    vmin = math.inf
    for y in grid:
        vmin = min(vmin, eval_halfspace_solution(data, y, t))
    return {"v_min": vmin, "s_floor": floor,
            "pass": vmin >= floor * (1.0 - 1e-10)}


def eval_extended(data: BoundaryData, y: np.ndarray) -> float:
    """Series extension to arbitrary y in R^d (harmonic term by term)."""
    y = np.asarray(y, dtype=float)
    fr = data.frame()
    t = float(y @ fr.normal)
    total = 0.0
    for m in data.modes:
        g = math.exp(m.ln_gap) if math.isfinite(m.ln_gap) else 0.0
        amp_ln = math.log(2.0) + m.ln_coeff - _2PI * g * t
        if amp_ln < -745.0:
            continue
        w = fr.tangential.T @ m.xi.to_floats()
        phase = _2PI * float(w @ (fr.tangential.T @ y))
        total += math.exp(amp_ln) * math.cos(phase)
    return total


def harmonicity_residual(data: BoundaryData, samples, h: float) -> dict:
    """Max central-difference Laplacian residual and its analytic envelope.

    Each series term is annihilated exactly by the Laplacian; the finite
    difference leaves the O(h^2) fourth-derivative remainder, bounded per
    term and axis by (h^2/12)(alpha^2+beta^2)^2 e^{|alpha| h} amplitude.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    fr = data.frame()
    n = fr.normal
    d = data.dim
    worst = 0.0
    envelope = 0.0
    for y in samples:
        y = np.asarray(y, dtype=float)
        if float(y @ n) < 2.0 * h:
            raise ValueError("samples must satisfy y.n >= 2h")
        lap = -2.0 * d * eval_extended(data, y)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            lap += eval_extended(data, y + e) + eval_extended(data, y - e)
        worst = max(worst, abs(lap) / (h * h))
        env = 0.0
        t = float(y @ n)
        for m in data.modes:
            g = math.exp(m.ln_gap) if math.isfinite(m.ln_gap) else 0.0
            amp = 2.0 * math.exp(m.ln_coeff - _2PI * g * t)
            tang = fr.tangential @ (fr.tangential.T @ m.xi.to_floats())
            for i in range(d):
                alpha = _2PI * g * abs(n[i])
                beta = _2PI * abs(tang[i])
                env += amp * (alpha * alpha + beta * beta) ** 2 * \
                    math.exp(alpha * h)
        envelope = max(envelope, (h * h / 12.0) * env)
    return {"max_residual": worst, "envelope": envelope,
            "pass": worst <= envelope}


def decay_curve(data: BoundaryData, t_ln_grid) -> list[tuple[float, float]]:
    """(ln t, ln S(t)) samples for plotting."""
    out = []
    for lt in t_ln_grid:
        s = eval_S(data, LogValue.from_ln(float(lt)))
        out.append((float(lt), s.ln()))
    return out


# ---------------------------------------------------------------------------
# pipeline


def halfspace_gap_target_ln(omega: Modulus, slack: float = 1.0 + math.log(2.0)
                            - 0.1):
    """Stage-indexed gap targets making the schedule margins pass.

    Stage k needs 4 pi g_k t_k <= 1 + ln 2 for a nonnegative margin, with
    t_k fixed by the schedule; the target is slack / (4 pi t_k), evaluated
    from the stage norm.  This is the desk-scale replacement for the
    classical derived modulus, whose stage budgets leave the representable
    range after two steps.
    """
    def target(k: int, norm_sq: int) -> float:
        from .modulus import ModulusRangeError
        ln_arg = -1.0 - k * math.log(norm_sq)
        try:
            t_k = invert_modulus(omega, LogValue.from_ln(ln_arg))
        except ModulusRangeError:
            return float("-inf")  # schedule leaves the representable range
        return math.log(slack) - math.log(_4PI) - t_k.ln()

    return target


def halfspace_certify(omega: Modulus, d: int, K: int, gap_base: int = 10,
                      rho: Fraction = Fraction(1, 2), *,
                      policy: str = "schedule",
                      max_ln_norm: float = 3.0e6):
    """Full pipeline: direction, spectrum, schedule margins.

    Returns (direction certificate, boundary data, schedule certificate).
    The direction carries the derived modulus for the record; under the
    schedule policy the enforced step budgets come from the margin targets.
    """
    from .lattice import construct_bad_direction, intvector
    from .modulus import derived_halfspace

    seed = intvector(*([1] + [0] * (d - 1)))
    omega1 = derived_halfspace(omega)
    if policy == "schedule":
        cert = construct_bad_direction(
            omega1, K, seed, gap_base, rho,
            policy="schedule", gap_target_ln=halfspace_gap_target_ln(omega),
            max_ln_norm=max_ln_norm)
    else:
        cert = construct_bad_direction(
            omega1, K, seed, gap_base, rho,
            policy="modulus", max_ln_norm=max_ln_norm)
    cert.meta.update({"pipeline": "halfspace", "omega": omega.to_json(),
                      "dim": d, "K": K})
    data = build_boundary_data(cert, K)
    sched = certify_slow_convergence(data, cert, omega, K)
    return cert, data, sched
