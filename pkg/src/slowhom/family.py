"""Family-of-integrals slow-convergence certificates.

Given a family of integrable profiles with certified norms, this module
computes the shared constants (tau0, eps0, A0, delta0, rho), the lambda_k
schedule, and per-stage lower-bound certificates for the oscillatory
averages, with the cross-term and tail contributions bounded analytically.
Profiles live on the line (the 2-D pipelines of this artifact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from .lattice import (DirectionCertificate, IntVector, construct_bad_direction,
                      intvector, projection_gap_sq)
from .logvalue import LogValue, ln_fraction, log_sum
from .modulus import (Modulus, derived_family, eval_modulus,
                      growth_condition_holds, invert_modulus)
from .oscillatory import cos_moment, ibp_bound, sin_moment

_2PI = 2.0 * math.pi


class ProfileRejected(ValueError):
    pass


class UniformChoiceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Profile:
    """An integrand with certified norm data (dimension one).

    Norm fields are certified bounds: l1, grad_l1, linf bound the true
    norms from above, integral_lower bounds |int F| from below.  tail_l1(A)
    bounds the mass outside [-A, A] from above.
    """
    name: str
    f: Callable
    l1: float
    grad_l1: float
    linf: float
    integral: float
    integral_lower: float
    tail_l1: Callable[[float], float]
    support_radius: float | None = None  # None: whole line
    quad_halfwidth: float = 8.0          # window with negligible tail

    @property
    def compact(self) -> bool:
        return self.support_radius is not None

    def window(self) -> float:
        return self.support_radius if self.compact else self.quad_halfwidth


def gaussian_profile() -> Profile:
    sqrt_pi = math.sqrt(math.pi)

    def f(x):
        return np.exp(-np.asarray(x, dtype=float) ** 2)

    f.vectorized = True
    return Profile(
        name="gauss",
        f=f,
        l1=sqrt_pi,
        grad_l1=2.0,
        linf=1.0,
        integral=sqrt_pi,
        integral_lower=sqrt_pi * (1.0 - 1e-12),
        tail_l1=lambda a: sqrt_pi * float(special.erfc(max(a, 0.0))),
        quad_halfwidth=9.0,
    )


def bump_profile(radius: float = 1.0) -> Profile:
    """Radial C-infinity bump supported on [-radius, radius]."""
    r = float(radius)

    def f(x):
        x = np.asarray(x, dtype=float)
        u = x / r
        inside = np.abs(u) < 1.0
        out = np.zeros_like(u)
        w = 1.0 - u[inside] ** 2
        out[inside] = np.exp(-1.0 / w)
        return out

    f.vectorized = True
    mass = r * 0.443993816168079437823  # int exp(-1/(1-u^2)) du on [-1,1]
    # |f'| = (2|u|/(1-u^2)^2) exp(-1/(1-u^2)) / r; its integral is exactly
    # 2 max f = 2/e per side direction change
    grad_l1 = 2.0 * math.exp(-1.0)
    return Profile(
        name=f"bump[{r:g}]",
        f=f,
        l1=mass * (1.0 + 1e-9),
        grad_l1=grad_l1 * (1.0 + 1e-9),
        linf=math.exp(-1.0),
        integral=mass,
        integral_lower=mass * (1.0 - 1e-6),
        tail_l1=lambda a: 0.0 if a >= r else mass,
        support_radius=r,
    )


def sampled_profile(name: str, xs: np.ndarray, values: np.ndarray,
                    support_radius: float) -> Profile:
    """Profile from dense samples on its compact support (demo kernels).

    Declared norms are trapezoid values with a resolution allowance; the
    declared lower integral bound is deliberately slack.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)

    def f(x):
        return np.interp(np.asarray(x, dtype=float), xs, values,
                         left=0.0, right=0.0)

    f.vectorized = True
    integral = float(np.trapezoid(values, xs))
    l1 = float(np.trapezoid(np.abs(values), xs))
    grad = np.gradient(values, xs)
    grad_l1 = float(np.trapezoid(np.abs(grad), xs))
    return Profile(
        name=name,
        f=f,
        l1=l1 * 1.02,
        grad_l1=grad_l1 * 1.05,
        linf=float(np.max(np.abs(values))) * 1.01,
        integral=integral,
        integral_lower=abs(integral) * 0.98,
        tail_l1=lambda a: 0.0 if a >= support_radius else l1 * 1.02,
        support_radius=float(support_radius),
    )


@dataclass(frozen=True)
class FamilyConstants:
    tau0: float
    eps0: float
    A0: float
    delta0: float
    rho: Fraction
    sup_l1: float
    sup_grad_l1: float
    sup_linf: float

    def to_json(self) -> dict:
        return {"tau0": self.tau0, "eps0": self.eps0, "A0": self.A0,
                "delta0": self.delta0,
                "rho": f"{self.rho.numerator}/{self.rho.denominator}",
                "sup_l1": self.sup_l1, "sup_grad_l1": self.sup_grad_l1,
                "sup_linf": self.sup_linf}


def _inner_integral(profile: Profile, a0: float) -> tuple[float, float]:
    lo, hi = -min(a0, profile.window()), min(a0, profile.window())
    val, err = integrate.quad(profile.f, lo, hi, limit=200, epsabs=1e-13)
    return val, err


def compute_family_constants(reps: Sequence[Profile]) -> FamilyConstants:
    """Shared constants for a finite family of representatives.

    A0 is the smallest power of two such that the centred mass dominates
    twice the tail plus half the total integral for every representative;
    eps0 is the worst centred-mass to L1 ratio; delta0 the matching cosine
    window; rho strictly inside the tail-control constraint.
    """
    if not reps:
        raise ProfileRejected("family must be nonempty")
    for rep in reps:
        if rep.integral_lower <= 0:
            raise ProfileRejected(
                f"profile {rep.name!r} violates the nonzero-integral condition")
    tau0 = min(rep.integral_lower for rep in reps)
    sup_l1 = max(rep.l1 for rep in reps)
    sup_grad = max(rep.grad_l1 for rep in reps)
    sup_linf = max(rep.linf for rep in reps)

    a0 = 1.0
    chosen = None
    for _ in range(60):
        ok = True
        for rep in reps:
            inner, err = _inner_integral(rep, a0)
            tail = rep.tail_l1(a0)
            if abs(inner) - err < 2.0 * tail + 0.5 * (rep.integral_lower +
                                                      2.0 * err):
                ok = False
                break
        if ok:
            chosen = a0
            break
        a0 *= 2.0
    if chosen is None:
        raise ProfileRejected("no A0 on the doubling grid satisfies the "
                              "centred-mass inequality")

    eps0 = math.inf
    for rep in reps:
        inner, err = _inner_integral(rep, chosen)
        eps0 = min(eps0, (abs(inner) - err) / rep.l1)
    if not (0.0 < eps0 <= 1.0 + 1e-12):
        raise ProfileRejected(f"eps0 = {eps0} outside (0, 1]")
    eps0 = min(eps0, 1.0)
    delta0 = math.acos(1.0 - eps0 / 4.0) * (1.0 - 1e-12)

    # 2 sup_l1 rho / (1 - rho) < (3/16) tau0, taken at half the supremum
    q = 3.0 * tau0 / (32.0 * sup_l1)
    rho_sup = q / (1.0 + q)
    rho = Fraction(rho_sup / 2.0).limit_denominator(10 ** 6)
    return FamilyConstants(tau0=tau0, eps0=eps0, A0=chosen, delta0=delta0,
                           rho=rho, sup_l1=sup_l1, sup_grad_l1=sup_grad,
                           sup_linf=sup_linf)


# ---------------------------------------------------------------------------
# schedule


def schedule_lambda(omega: Modulus, constants: FamilyConstants,
                    cert: DirectionCertificate, k: int) -> LogValue:
    """lambda_k with w(lambda_k) = (3/8) tau0 |xi^(k)|^{-k}."""
    if not (1 <= k <= cert.stage_count):
        raise ValueError("stage index out of range")
    ln_arg = math.log(3.0 / 8.0) + math.log(constants.tau0) \
        - k * cert.stage_ln_norm(k)
    return invert_modulus(omega, LogValue.from_ln(ln_arg))


def phase_product(constants: FamilyConstants, cert: DirectionCertificate,
                  k: int, lam: LogValue) -> float:
    """2 pi lambda_k A0 |N^T xi^(k)|, the phase-window product."""
    gap_sq = cert.stage_gap_sq(k)
    if gap_sq == 0:
        return 0.0
    s = 0.5 * ln_fraction(gap_sq) + lam.ln()
    if s > 700.0:
        return math.inf
    return _2PI * constants.A0 * math.exp(s)


def phase_bound_holds(constants: FamilyConstants, cert: DirectionCertificate,
                      k: int, lam: LogValue) -> bool:
    return phase_product(constants, cert, k, lam) <= constants.delta0 * \
        (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectralMode:
    stage: int
    xi: IntVector
    ln_coeff: float
    sign: int = 1
    phase_turns: float = 0.0  # coefficient phase e^{-2 pi i phase_turns}


@dataclass
class SignedSpectrum:
    modes: list[SpectralMode]
    normal_generator: IntVector

    def coefficient_magnitudes(self) -> list[float]:
        return [m.ln_coeff for m in self.modes]

    def stage_indices(self) -> list[int]:
        return [m.stage for m in self.modes]


def spectrum_from_certificate(cert: DirectionCertificate, K: int,
                              signs: Sequence[int] | None = None
                              ) -> SignedSpectrum:
    if cert.stage_count < K + 1:
        raise ValueError("certificate too short for the requested spectrum")
    modes = []
    for k in range(1, K + 1):
        xi = cert.stages[k - 1]
        sign = 1 if signs is None else signs[k - 1]
        modes.append(SpectralMode(stage=k, xi=xi,
                                  ln_coeff=-k * xi.ln_norm(), sign=sign))
    return SignedSpectrum(modes=modes,
                          normal_generator=cert.normal_generator())


def choose_sign(cross_term: float, main_term: float) -> int:
    """Sign making |cross + sign * main| at least |main| (triangle rule)."""
    return 1 if cross_term * main_term >= 0 else -1


# ---------------------------------------------------------------------------
# certificates


@dataclass
class StageVerdict:
    stage: int
    lam_ln: float
    phase_product: float
    phase_ok: bool
    main_scaled: float           # 2 |I_k|, scaled by |xi^(k)|^k
    main_floor: float            # (3/4) I_F floor it must clear
    main_floor_ok: bool
    quad_err_scaled: float
    sigma1_scaled: float
    sigma2_scaled: float
    omega_scaled: float
    margin_scaled: float
    verdict: str                 # pass | fail | inconclusive
    sign: int = 1

    def to_json(self) -> dict:
        return self.__dict__.copy()


@dataclass
class FamilyReport:
    profile: str
    K: int
    stages: list[StageVerdict]
    flagged: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (not self.flagged and
                all(s.verdict == "pass" for s in self.stages))

    @property
    def any_inconclusive(self) -> bool:
        return any(s.verdict == "inconclusive" for s in self.stages)

    def to_json(self) -> dict:
        return {"schema_version": 1, "profile": self.profile, "K": self.K,
                "stages": [s.to_json() for s in self.stages],
                "flagged": self.flagged, "all_pass": self.all_pass,
                "meta": self.meta}

    def csv_rows(self) -> list[tuple]:
        return [(s.stage, s.main_scaled, s.sigma1_scaled, s.sigma2_scaled,
                 s.omega_scaled, s.margin_scaled, s.verdict)
                for s in self.stages]


def _main_moment(profile: Profile, mu: float, phase_turns: float
                 ) -> tuple[float, float]:
    """int F(x) cos(2 pi mu x - 2 pi phase) dx with certified error."""
    a = profile.window()
    phi = _2PI * phase_turns
    mc = cos_moment(profile.f, mu, -a, a)
    if mc is None:
        raise ValueError("main term unexpectedly outside quadrature range")
    if phase_turns == 0.0:
        val, err = mc.value, mc.error
    else:
        ms = sin_moment(profile.f, mu, -a, a)
        val = math.cos(phi) * mc.value + math.sin(phi) * ms.value
        err = mc.error + ms.error
    tail = 0.0 if profile.compact else profile.tail_l1(a)
    return val, err + tail


def crossterm_bound_ln(profile: Profile, ln_gap: float, lam: LogValue
                       ) -> float:
    """ln upper bound for |int F e^{2 pi i lam gap x} dx| (one cross mode)."""
    if math.isinf(ln_gap) and ln_gap < 0:
        return math.log(profile.l1)
    ln_mu = ln_gap + lam.ln()
    if profile.compact:
        return math.log(compact_support_crossterm_bound(
            profile, math.exp(min(ln_gap, 700.0)), lam))
    ibp_ln = math.log(profile.grad_l1) - math.log(_2PI) - ln_mu
    return min(math.log(profile.l1), ibp_ln)


def compact_support_crossterm_bound(profile: Profile, gap: float,
                                    lam: LogValue | float) -> float:
    """Upper bound on the oscillatory integral for ball-supported profiles.

    Smooth cutoff at distance 1/lam from the support edge: the edge annulus
    contributes at most its measure times the sup norm, the interior via
    integration by parts with the cutoff's gradient absorbed.  Falls back
    to the L1 norm when lam is too small for the cutoff.
    """
    if not profile.compact:
        raise ValueError("profile must have ball support")
    lam = lam if isinstance(lam, LogValue) else LogValue.from_float(float(lam))
    r = profile.support_radius
    if lam.sign <= 0 or lam.ln() < -math.log(r):
        return profile.l1
    inv_lam = math.exp(-lam.ln()) if lam.ln() < 700.0 else 0.0
    annulus = 2.0 * inv_lam  # two edge segments on the line
    edge = profile.linf * annulus
    if gap <= 0:
        return profile.l1
    ln_mu = math.log(gap) + lam.ln()
    cutoff_slope = 1.5  # smoothstep derivative bound, |phi'| <= 1.5 lam
    ibp_mass = profile.grad_l1 + 2.0 * cutoff_slope * profile.linf
    ibp = ibp_mass / (_2PI * math.exp(min(ln_mu, 700.0)))
    return min(profile.l1, edge + ibp)


def certify_family_slow(profile: Profile, cert: DirectionCertificate,
                        omega: Modulus, constants: FamilyConstants, K: int,
                        spectrum: SignedSpectrum | None = None,
                        eval_shift_turns: Sequence[float] | None = None
                        ) -> FamilyReport:
    """Per-stage lower bounds on the oscillatory family average.

    Everything at stage k is scaled by |xi^(k)|^k so the certified numbers
    are order one: the main term must clear (3/4) of the profile integral,
    the later-stage tail is controlled through the rho gap, earlier stages
    through integration by parts, and what remains must defeat w(lambda_k).
    An inconclusive verdict (quadrature error at least half the margin) is
    reported, never silently converted.
    """
    if spectrum is None:
        spectrum = spectrum_from_certificate(cert, K)
    if len(spectrum.modes) < K:
        raise ValueError("spectrum shorter than K")
    if Fraction(cert.rho) > constants.rho:
        raise ValueError("certificate rho exceeds the family constraint")
    stages: list[StageVerdict] = []
    flagged = False
    i_f = profile.integral_lower
    for pos in range(K):
        mode = spectrum.modes[pos]
        k = mode.stage
        lam = schedule_lambda(omega, constants, cert, k)
        p_prod = phase_product(constants, cert, k, lam)
        phase_ok = p_prod <= constants.delta0 * (1.0 + 1e-12)
        if not phase_ok:
            flagged = True
        gap_sq = cert.stage_gap_sq(k)
        ln_gap = 0.5 * ln_fraction(gap_sq) if gap_sq > 0 else float("-inf")
        ln_mu = ln_gap + lam.ln() if math.isfinite(ln_gap) else float("-inf")
        coeff_phase = mode.phase_turns
        eval_phase = (eval_shift_turns[pos] if eval_shift_turns is not None
                      else 0.0)
        if ln_mu <= math.log(1.0e6 / max(2.0 * profile.window(), 1e-9)):
            mu = math.exp(ln_mu) if math.isfinite(ln_mu) else 0.0
            val, err = _main_moment(profile, mu, eval_phase - coeff_phase)
        else:
            val, err = 0.0, profile.l1  # only the trivial bound remains
        ln_nk = k * cert.stage_ln_norm(k)  # ln |xi^(k)|^k
        main_scaled = 2.0 * abs(val)
        err_scaled = 2.0 * err
        floor = 0.75 * i_f
        # cross terms from earlier spectrum stages, scaled by |xi^(k)|^k
        sigma1_terms = []
        for other in spectrum.modes[:pos]:
            g2 = projection_gap_sq(spectrum.normal_generator, other.xi)
            lg = 0.5 * ln_fraction(g2) if g2 > 0 else float("-inf")
            b_ln = crossterm_bound_ln(profile, lg, lam)
            sigma1_terms.append(LogValue.from_ln(
                math.log(2.0) + b_ln + ln_nk
                - other.stage * other.xi.ln_norm()))
        sigma1_scaled = log_sum(sigma1_terms).to_float()
        # later-stage tail via the rho-gap majorant (covers the whole tail)
        rho_f = float(cert.rho)
        sigma2_scaled = 2.0 * profile.l1 * rho_f / (1.0 - rho_f)
        omega_scaled = math.exp(eval_modulus(omega, lam).ln() + ln_nk)
        margin = main_scaled - sigma1_scaled - sigma2_scaled - omega_scaled
        if margin - err_scaled >= 0 and err_scaled < 0.5 * margin:
            verdict = "pass"
        elif margin + err_scaled < 0:
            verdict = "fail"
        else:
            verdict = "inconclusive"
        stages.append(StageVerdict(
            stage=k, lam_ln=lam.ln(), phase_product=p_prod, phase_ok=phase_ok,
            main_scaled=main_scaled, main_floor=floor,
            main_floor_ok=main_scaled >= floor - err_scaled,
            quad_err_scaled=err_scaled, sigma1_scaled=sigma1_scaled,
            sigma2_scaled=sigma2_scaled, omega_scaled=omega_scaled,
            margin_scaled=margin, verdict=verdict, sign=mode.sign))
    return FamilyReport(profile=profile.name, K=K, stages=stages,
                        flagged=flagged,
                        meta={"policy": cert.policy,
                              "gap_base": cert.gap_base,
                              "constants": constants.to_json()})


def brute_tail_sum_ln(spectrum: SignedSpectrum, after_pos: int) -> float:
    """ln of the dropped-coefficient sum beyond a spectrum position."""
    terms = [LogValue.from_ln(m.ln_coeff)
             for m in spectrum.modes[after_pos:]]
    return log_sum(terms).ln() if terms else float("-inf")


# ---------------------------------------------------------------------------
# uniform and shifted boundary data


def build_uniform_v0(reps: Sequence[Profile], cert: DirectionCertificate,
                     omega: Modulus, constants: FamilyConstants,
                     max_modes: int | None = None) -> SignedSpectrum:
    """Subsequence spectrum valid for the whole family at once.

    Picks increasing stage indices i_k, the first always 1, each next one
    minimal so the integration-by-parts control of the earlier modes fits
    under (3/16) tau0; all coefficients positive.
    """
    if not growth_condition_holds(omega):
        raise UniformChoiceError(
            "modulus fails the growth condition t w(t) -> infinity")
    sup_grad = max(rep.grad_l1 for rep in reps)
    budget = 3.0 / 16.0 * constants.tau0
    n_stages = cert.stage_count - 1
    if max_modes is None:
        max_modes = n_stages
    chosen: list[int] = []
    prev_terms: list[LogValue] = []
    i = 1
    while len(chosen) < max_modes and i <= n_stages:
        lam = schedule_lambda(omega, constants, cert, i)
        # a_i = lambda_i / |xi^(i)|^i
        ln_a = lam.ln() - i * cert.stage_ln_norm(i)
        lhs = log_sum(prev_terms).to_float() * math.exp(-ln_a) / math.pi \
            if prev_terms else 0.0
        if not chosen:
            ok = True  # i_1 = 1 unconditionally, the sum is empty
        else:
            ok = lhs * sup_grad <= budget
        if ok:
            chosen.append(i)
            gap_sq = cert.stage_gap_sq(i)
            if gap_sq == 0:
                raise UniformChoiceError(f"stage {i} has zero gap")
            prev_terms.append(LogValue.from_ln(
                -i * cert.stage_ln_norm(i) - 0.5 * ln_fraction(gap_sq)))
        i += 1
    if len(chosen) < max_modes:
        raise UniformChoiceError(
            f"stage budget exhausted: chose {len(chosen)} of {max_modes} "
            "modes before running out of certificate stages")
    modes = [SpectralMode(stage=j, xi=cert.stages[j - 1],
                          ln_coeff=-j * cert.stages[j - 1].ln_norm())
             for j in chosen]
    return SignedSpectrum(modes=modes,
                          normal_generator=cert.normal_generator())


def _lambda_turns(omega: Modulus, constants: FamilyConstants,
                  cert: DirectionCertificate, k: int, inner: float) -> float:
    """Fractional part of lambda_k * inner, computed in high precision."""
    lam_ln = schedule_lambda(omega, constants, cert, k).ln()
    prec = max(80, int(lam_ln / math.log(2.0)) + 80)
    if prec > 1 << 22:
        raise ValueError("shift phase outside practical precision range")
    with mpmath.workprec(prec):
        lam = mpmath.exp(mpmath.mpf(lam_ln))
        return float(mpmath.frac(lam * mpmath.mpf(inner)))


def build_shifted_v0(spectrum: SignedSpectrum, X0: np.ndarray,
                     omega: Modulus, constants: FamilyConstants,
                     cert: DirectionCertificate) -> SignedSpectrum:
    """Rotate each coefficient by the unit phase of the shifted evaluation.

    Magnitudes are untouched; conjugate symmetry is preserved by
    construction (the opposite mode carries the opposite phase).
    """
    X0 = np.asarray(X0, dtype=float)
    out = []
    for m in spectrum.modes:
        inner = float(m.xi.to_floats() @ X0)
        turns = _lambda_turns(omega, constants, cert, m.stage, inner)
        out.append(SpectralMode(stage=m.stage, xi=m.xi, ln_coeff=m.ln_coeff,
                                sign=m.sign,
                                phase_turns=(m.phase_turns + turns) % 1.0))
    return SignedSpectrum(modes=out,
                          normal_generator=spectrum.normal_generator)


def shift_eval_turns(spectrum: SignedSpectrum, X0: np.ndarray,
                     omega: Modulus, constants: FamilyConstants,
                     cert: DirectionCertificate) -> list[float]:
    """Evaluation-side phases of v0(lambda_k M(x,0) + lambda_k X0)."""
    X0 = np.asarray(X0, dtype=float)
    return [_lambda_turns(omega, constants, cert, m.stage,
                          float(m.xi.to_floats() @ X0))
            for m in spectrum.modes]


# ---------------------------------------------------------------------------
# equidistribution baseline


def weyl_average_test(profile: Profile, h_modes: Sequence[tuple[IntVector,
                                                                float]],
                      mean_h: float, normal_generator: IntVector,
                      lam_grid: Sequence[float]) -> dict:
    """Averages int F(x) h(lam x) dx against the mean-value limit.

    h is the trace of the torus function along the tangential chart; each
    nonzero mode contributes a cosine moment at frequency lam times its
    projection gap, and must respect min(L1, integration by parts).
    """
    a = profile.window()
    results = []
    for lam in lam_grid:
        total = mean_h * profile.integral
        err = 0.0
        bound = 0.0
        for xi, c in h_modes:
            gap_sq = projection_gap_sq(normal_generator, xi)
            gap = math.sqrt(float(gap_sq))
            mu = lam * gap
            m = cos_moment(profile.f, mu, -a, a)
            if m is None:
                contrib, cerr = 0.0, profile.l1 * 2.0 * abs(c)
            else:
                contrib, cerr = 2.0 * c * m.value, 2.0 * abs(c) * m.error
            total += contrib
            err += cerr + 2.0 * abs(c) * profile.tail_l1(a)
            bound += 2.0 * abs(c) * min(profile.l1,
                                        ibp_bound(profile.grad_l1, mu))
        dev = abs(total - mean_h * profile.integral)
        results.append({"lam": lam, "value": total, "deviation": dev,
                        "quad_err": err, "bound": bound,
                        "respected": dev <= bound + err + 1e-12})
    return {"entries": results,
            "all_respected": all(r["respected"] for r in results)}


# ---------------------------------------------------------------------------
# pipeline


def family_gap_target_ln(omega: Modulus, constants: FamilyConstants,
                         safety: float = 0.5):
    """Stage-indexed gap targets enforcing the lambda_k phase window."""
    def target(k: int, norm_sq: int) -> float:
        from .modulus import ModulusRangeError
        ln_arg = math.log(3.0 / 8.0) + math.log(constants.tau0) \
            - 0.5 * k * math.log(norm_sq)
        try:
            lam = invert_modulus(omega, LogValue.from_ln(ln_arg))
        except ModulusRangeError:
            return float("-inf")
        return math.log(constants.delta0 * safety) \
            - math.log(_2PI * constants.A0) - lam.ln()

    return target


def family_certify(profile: Profile, omega: Modulus, d: int, K: int,
                   gap_base: int = 2, *, policy: str = "schedule",
                   constants: FamilyConstants | None = None,
                   max_ln_norm: float = 3.0e6):
    """Full pipeline: constants, direction, schedule, per-stage margins."""
    if constants is None:
        constants = compute_family_constants([profile])
    seed = intvector(*([1] + [0] * (d - 1)))
    omega1 = derived_family(omega, constants.delta0, constants.A0,
                            constants.tau0)
    if policy == "schedule":
        cert = construct_bad_direction(
            omega1, K, seed, gap_base, constants.rho, policy="schedule",
            gap_target_ln=family_gap_target_ln(omega, constants),
            max_ln_norm=max_ln_norm)
    else:
        cert = construct_bad_direction(
            omega1, K, seed, gap_base, constants.rho, policy="modulus",
            max_ln_norm=max_ln_norm)
    cert.meta.update({"pipeline": "family", "omega": omega.to_json(),
                      "dim": d, "K": K,
                      "constants": constants.to_json()})
    report = certify_family_slow(profile, cert, omega, constants, K)
    return constants, cert, report
