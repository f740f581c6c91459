"""Exact-arithmetic Diophantine toolkit.

Lattice vectors are arbitrary-precision integer tuples; every inequality a
certificate rests on is checked either as an exact rational comparison or
with outward-rounded dyadic enclosures, never with bare floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .logvalue import LogValue, dyadic_at_most, ln_fraction
from .modulus import Modulus, eval_modulus

LN2 = math.log(2.0)


class LatticeArgumentError(ValueError):
    pass


class ApproximationBudgetError(RuntimeError):
    """Search budget exhausted; carries the largest denominator tried."""

    def __init__(self, msg: str, largest_tried: int):
        super().__init__(msg)
        self.largest_tried = largest_tried


class InfeasibleStageError(RuntimeError):
    """A stage bound is below the representable or configured range."""

    def __init__(self, msg: str, stage: int, partial=None):
        super().__init__(msg)
        self.stage = stage
        self.partial = partial


@dataclass(frozen=True)
class IntVector:
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def norm_sq(self) -> int:
        return sum(c * c for c in self.coords)

    def ln_norm(self) -> float:
        return 0.5 * math.log(self.norm_sq())

    def dot(self, other: "IntVector") -> int:
        return sum(a * b for a, b in zip(self.coords, other.coords))

    def scale(self, m: int) -> "IntVector":
        return IntVector(tuple(m * c for c in self.coords))

    def add(self, other: "IntVector") -> "IntVector":
        return IntVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def neg(self) -> "IntVector":
        return IntVector(tuple(-c for c in self.coords))

    def primitive(self) -> "IntVector":
        g = 0
        for c in self.coords:
            g = math.gcd(g, abs(c))
        if g in (0, 1):
            return self
        return IntVector(tuple(c // g for c in self.coords))

    def to_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords], dtype=float)

    def unit(self) -> np.ndarray:
        v = self.to_floats()
        return v / np.linalg.norm(v)


def intvector(*coords) -> IntVector:
    return IntVector(tuple(coords))


def projection_gap_sq(base: IntVector, xi: IntVector) -> Fraction:
    """|xi|^2 - (xi . base)^2 / |base|^2, the squared tangential component.

    Frame independent: equals |N^T xi|^2 for any orthonormal completion of
    base/|base|.
    """
    if base.is_zero:
        raise LatticeArgumentError("base direction must be nonzero")
    if base.dim != xi.dim:
        raise LatticeArgumentError("dimension mismatch")
    n2 = base.norm_sq()
    d = base.dot(xi)
    return Fraction(xi.norm_sq() * n2 - d * d, n2)


def is_parallel(a: IntVector, b: IntVector) -> bool:
    d = a.dot(b)
    return d * d == a.norm_sq() * b.norm_sq()


def unit_dist_sq_le(a: IntVector, b: IntVector, bound: Fraction) -> bool:
    """Exact test |a/|a| - b/|b||^2 <= bound for same-orientation vectors."""
    na, nb = a.norm_sq(), b.norm_sq()
    d = a.dot(b)
    # dist^2 = 2 - 2 d / sqrt(na nb)
    rem = 2 - bound
    if rem <= 0:
        return True
    if d <= 0:
        return False  # dist^2 >= 2 > bound
    # 2 - bound <= 2 d / sqrt(na nb)  <=>  (2-bound)^2 na nb <= 4 d^2
    return rem * rem * na * nb <= 4 * d * d


def is_diophantine(base: IntVector, kappa: Fraction, l: Fraction,
                   test_set: Sequence[IntVector]) -> bool:
    """Finite-window membership test: gap(base, xi) >= kappa |xi|^{-l}.

    Exact rational comparison for every xi in the window.  Passing the test
    is evidence over the window only, not a proof of membership.
    """
    kappa = Fraction(kappa)
    l = Fraction(l)
    if kappa <= 0:
        raise LatticeArgumentError("kappa must be positive")
    if (base.dim - 1) * l <= 1:
        raise LatticeArgumentError("need (d - 1) l > 1")
    p, q = l.numerator, l.denominator
    k2q = kappa ** (2 * q)
    for xi in test_set:
        if xi.is_zero:
            raise LatticeArgumentError("test vectors must be nonzero")
        gap2 = projection_gap_sq(base, xi)
        # gap^2 >= kappa^2 N^{-p/q}  <=>  gap^{2q} N^p >= kappa^{2q}
        if gap2 ** q * xi.norm_sq() ** p < k2q:
            return False
    return True


# ---------------------------------------------------------------------------
# orthonormal frames


@dataclass(frozen=True)
class OrthonormalFrame:
    matrix: np.ndarray  # d x d, last column = generator / |generator|
    generator: IntVector

    @property
    def normal(self) -> np.ndarray:
        return self.matrix[:, -1]

    @property
    def tangential(self) -> np.ndarray:
        """The d x (d-1) block orthogonal to the generator."""
        return self.matrix[:, :-1]


def complete_frame(base: IntVector) -> OrthonormalFrame:
    """Householder reflection carrying e_d to base/|base| (fixed convention)."""
    if base.is_zero:
        raise LatticeArgumentError("base direction must be nonzero")
    d = base.dim
    n = base.unit()
    e = np.zeros(d)
    e[-1] = 1.0
    v = n - e
    vv = float(v @ v)
    if vv < 1e-30:
        m = np.eye(d)
    else:
        m = np.eye(d) - 2.0 * np.outer(v, v) / vv
    # columns of the reflection: M e_d = n automatically
    return OrthonormalFrame(matrix=m, generator=base)


# ---------------------------------------------------------------------------
# rational direction approximation


def _round_nearest(num: int, den: int) -> int:
    """Round num/den (den > 0) to the nearest integer, ties away from zero."""
    if num >= 0:
        return (2 * num + den) // (2 * den)
    return -((-2 * num + den) // (2 * den))


def _scaled_round(r: IntVector, t: int) -> IntVector:
    """Nearest lattice point to t * r/|r|, via integer sqrt scaling."""
    n2 = r.norm_sq()
    shift = max(t.bit_length(), 1) + 16
    s = math.isqrt(n2 << (2 * shift))  # s / 2^shift ~ sqrt(n2)
    return IntVector(tuple(_round_nearest(t * c << shift, s) for c in r.coords))


def _canonical_pick(cands: list[IntVector]) -> IntVector:
    """Smallest norm wins; ties resolved by largest coordinate tuple."""
    return sorted(cands, key=lambda v: (v.norm_sq(), tuple(-c for c in v.coords)))[0]


def _qualifies(cand: IntVector, r: IntVector, tol_sq: Fraction,
               min_norm_sq: Fraction) -> bool:
    if cand.is_zero or is_parallel(cand, r):
        return False
    if Fraction(cand.norm_sq()) < min_norm_sq:
        return False
    return unit_dist_sq_le(cand, r, tol_sq)


def approximate_direction(r: IntVector, tol: Fraction, min_norm: int = 1, *,
                          min_norm_sq: Fraction | None = None,
                          budget_bits: int = 40_000_000) -> IntVector:
    """A lattice vector whose direction is within tol of r's, but distinct.

    The returned xi satisfies, by exact rational verification,
    0 < |xi/|xi| - r/|r|| <= tol and |xi| >= min_norm.  Backends: brute
    force over a small box when feasible, Bezout line search in d = 2,
    scaled rounding with jitter in d >= 3.
    """
    if r.is_zero:
        raise LatticeArgumentError("target direction must be nonzero")
    tol = Fraction(tol)
    if tol <= 0:
        raise LatticeArgumentError("tolerance must be positive")
    r = r.primitive()
    tol_sq = tol * tol
    if min_norm_sq is None:
        min_norm_sq = Fraction(min_norm) ** 2

    # Norm scale needed: any distinct lattice direction within distance u of
    # r has norm >= ~1/(u |r|).  Brute force guarantees the minimal answer.
    if tol >= 2:
        ln_est = 0.0
    else:
        ln_est = math.log(2.0) - ln_fraction(tol) - 0.5 * math.log(r.norm_sq())
    box = None
    if ln_est <= math.log(64.0) and min_norm <= 64:
        box = int(max(float(min_norm), math.exp(ln_est))) + 2
    if box is not None and box <= 64 and r.dim <= 3:
        best = []
        rng = range(-box, box + 1)
        if r.dim == 2:
            grid = ((x, y) for x in rng for y in rng)
        else:
            grid = ((x, y, z) for x in rng for y in rng for z in rng)
        for c in grid:
            cand = IntVector(c)
            if not cand.is_zero and cand.norm_sq() <= box * box and \
                    _qualifies(cand, r, tol_sq, min_norm_sq):
                best.append(cand)
        if best:
            return _canonical_pick(best)
        raise ApproximationBudgetError(
            f"no direction within tol among |xi| <= {box}", box)

    if r.dim == 2:
        return _approx_dim2(r, tol_sq, min_norm_sq, budget_bits)
    return _approx_scaled(r, tol_sq, min_norm_sq, budget_bits)


def _approx_dim2(r: IntVector, tol_sq: Fraction, min_norm_sq: Fraction,
                 budget_bits: int) -> IntVector:
    a, b = r.coords
    # Bezout vector with |cross(u, r)| = 1: the lattice line nearest to R r
    g, x, y = _ext_gcd(a, b)
    assert g == 1  # r is primitive
    u = IntVector((-y, x))  # cross(u, r) = -(y b + x a) = -1
    # dist(m r + u) ~ 1/(m |r|^2); start just under the needed m and scan up
    n2 = r.norm_sq()
    ln_tol = 0.5 * ln_fraction(tol_sq)
    if -ln_tol / LN2 > budget_bits:
        raise ApproximationBudgetError("tolerance finer than search budget", 0)
    m_dist = _int_from_ln_ceil(-ln_tol - math.log(n2))
    m_norm = math.isqrt((min_norm_sq.numerator // min_norm_sq.denominator)
                        // n2) + 1
    m0 = max(1, m_dist, m_norm)
    m = m0
    while True:
        cands = [r.scale(m).add(u), r.scale(m).add(u.neg())]
        good = [c for c in cands if _qualifies(c, r, tol_sq, min_norm_sq)]
        if good:
            return _canonical_pick(good)
        m = m + max(1, m // 8)
        if m.bit_length() > budget_bits or m > (m0 + 4) * 64:
            raise ApproximationBudgetError(
                "no qualifying direction within budget", m)


def _approx_scaled(r: IntVector, tol_sq: Fraction, min_norm_sq: Fraction,
                   budget_bits: int) -> IntVector:
    ln_tol = 0.5 * ln_fraction(tol_sq)
    if -ln_tol / LN2 > budget_bits:
        raise ApproximationBudgetError("tolerance finer than search budget", 0)
    t = max(2, 4 * _int_from_ln_ceil(-ln_tol + 0.5 * math.log(r.dim)),
            math.isqrt(min_norm_sq.numerator // min_norm_sq.denominator) + 1)
    for _ in range(80):
        base = _scaled_round(r, t)
        cands = [base]
        for j in range(r.dim):
            for s in (1, -1):
                e = [0] * r.dim
                e[j] = s
                cands.append(base.add(IntVector(tuple(e))))
        good = [c for c in cands if _qualifies(c, r, tol_sq, min_norm_sq)]
        if good:
            return _canonical_pick(good)
        t = t + max(1, t // 4)
    raise ApproximationBudgetError("no qualifying direction within budget", t)


def _int_from_ln_ceil(x: float) -> int:
    """An integer >= exp(x), cheap for huge x (power of two past float range)."""
    if x <= 60.0:
        return max(1, math.ceil(math.exp(max(x, 0.0))))
    return 1 << math.ceil(x / LN2)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, rr = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while rr:
        q = old_r // rr
        old_r, rr = rr, old_r - q * rr
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# direction certificates

POLICY_MODULUS = "modulus"
POLICY_SCHEDULE = "schedule"


@dataclass
class DirectionCertificate:
    omega1: Modulus | None
    gap_base: int
    rho: Fraction
    stages: list[IntVector]
    step_bounds: list[Fraction]          # enforced per-step tolerances, exact
    gap_targets: list[Fraction]          # per-stage final-gap bounds, exact
    policy: str = POLICY_MODULUS
    meta: dict = field(default_factory=dict)
    failure_stage: int | None = None     # set on partial certificates

    @property
    def complete(self) -> bool:
        return self.failure_stage is None

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    def normal_generator(self) -> IntVector:
        return self.stages[-1]

    def stage_gap_sq(self, k: int) -> Fraction:
        """Exact squared gap of stage k (1-based) against the final stage."""
        return projection_gap_sq(self.stages[-1], self.stages[k - 1])

    def stage_ln_norm(self, k: int) -> float:
        return self.stages[k - 1].ln_norm()

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "omega1": self.omega1.to_json() if self.omega1 else None,
            "gap_base": self.gap_base,
            "rho": _frac_str(self.rho),
            "policy": self.policy,
            "stages": [[str(c) for c in s.coords] for s in self.stages],
            "step_bounds": [_frac_str(b) for b in self.step_bounds],
            "gap_targets": [_frac_str(b) for b in self.gap_targets],
            "meta": self.meta,
            "failure_stage": self.failure_stage,
        }

    @staticmethod
    def from_json(obj: dict) -> "DirectionCertificate":
        return DirectionCertificate(
            omega1=Modulus.from_json(obj["omega1"]) if obj["omega1"] else None,
            gap_base=obj["gap_base"],
            rho=_parse_frac(obj["rho"]),
            stages=[IntVector(tuple(int(c) for c in s)) for s in obj["stages"]],
            step_bounds=[_parse_frac(b) for b in obj["step_bounds"]],
            gap_targets=[_parse_frac(b) for b in obj["gap_targets"]],
            policy=obj.get("policy", POLICY_MODULUS),
            meta=obj.get("meta", {}),
            failure_stage=obj.get("failure_stage"),
        )


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _parse_frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def paper_step_bound_ln(omega1: Modulus, k: int, norm_sq: int,
                        gap_base: int) -> float:
    """ln of w1^2(|xi|) / (b^k |xi|^2) for stage k."""
    nrm = LogValue.from_ln(0.5 * math.log(norm_sq))
    w = eval_modulus(omega1, nrm)
    return 2.0 * w.ln() - k * math.log(gap_base) - math.log(norm_sq)


def construct_bad_direction(
    omega1: Modulus | None,
    K: int,
    seed: IntVector,
    gap_base: int = 10,
    rho: Fraction = Fraction(1, 2),
    *,
    policy: str = POLICY_MODULUS,
    gap_target_ln: Callable[[int, int], float] | None = None,
    max_ln_norm: float = 3.0e6,
    partial_on_failure: bool = False,
) -> DirectionCertificate:
    """Build the K+1 stage sequence of nearly-parallel lattice directions.

    policy "modulus": per-step tolerance is a quarter of the classical
    budget w1^2(|xi^(k)|) / (b^k |xi^(k)|^2), which makes the final
    direction satisfy |N^T xi^(k)| <= w1(|xi^(k)|) at every stage.

    policy "schedule": per-step tolerances are derived from caller-supplied
    per-stage gap targets gap_target_ln(k, norm_sq) -> ln(target), split
    geometrically so the telescoped final gap of stage j stays below its
    target.  This is the desk-scale route: it enforces exactly the gap
    sizes the downstream schedule inequalities consume, where the classical
    budget would demand integers beyond physical storage.

    Raises InfeasibleStageError when a required tolerance falls outside the
    configured or representable range (partial_on_failure returns the
    partial certificate on the exception instead).
    """
    if K < 1:
        raise LatticeArgumentError("need K >= 1")
    if gap_base < 2:
        raise LatticeArgumentError("gap_base must be >= 2")
    rho = Fraction(rho)
    if not (0 < rho < 1):
        raise LatticeArgumentError("rho must be in (0, 1)")
    if seed.is_zero:
        raise LatticeArgumentError("seed must be nonzero")
    if policy == POLICY_MODULUS and omega1 is None:
        raise LatticeArgumentError("modulus policy needs omega1")
    if policy == POLICY_SCHEDULE and gap_target_ln is None:
        raise LatticeArgumentError("schedule policy needs gap_target_ln")

    stages = [seed.primitive()]
    step_bounds: list[Fraction] = []
    target_ln_list: list[float] = []

    def _dyadic_targets() -> list[Fraction]:
        return [dyadic_at_most(t) if math.isfinite(t) else Fraction(0)
                for t in target_ln_list]

    def partial(stage: int, msg: str):
        cert = DirectionCertificate(
            omega1=omega1, gap_base=gap_base, rho=rho, stages=stages,
            step_bounds=step_bounds, gap_targets=_dyadic_targets(),
            policy=policy, failure_stage=stage,
            meta={"failure": msg})
        if partial_on_failure:
            return cert
        raise InfeasibleStageError(msg, stage, partial=cert)

    for k in range(1, K + 1):
        n_sq = stages[-1].norm_sq()
        ln_norm_k = 0.5 * math.log(n_sq)
        if policy == POLICY_MODULUS:
            bound_ln = paper_step_bound_ln(omega1, k, n_sq, gap_base)
            target_ln_list.append(
                eval_modulus(omega1, LogValue.from_ln(ln_norm_k)).ln())
            tol_ln = bound_ln + math.log(0.25)
        else:
            target_ln_list.append(gap_target_ln(k, n_sq))
            # split each stage-j budget geometrically over steps i >= j
            tol_ln = min(
                target_ln_list[j - 1] - 0.5 * math.log(stages[j - 1].norm_sq())
                - (k - j + 1) * LN2
                for j in range(1, k + 1))
        if math.isinf(tol_ln) or -tol_ln > max_ln_norm:
            return partial(
                k + 1,
                f"stage {k + 1} needs a direction within exp({tol_ln:.6g}); "
                f"outside the configured ln-norm budget {max_ln_norm:.3g}")
        tol = dyadic_at_most(tol_ln)
        # strict norm growth, the rho gap, and |xi^(k)| >= k all at once
        min_norm_sq = max(Fraction(n_sq) / (rho * rho), Fraction((k + 1) ** 2))
        try:
            nxt = approximate_direction(
                stages[-1], tol, min_norm_sq=min_norm_sq, min_norm=1)
        except ApproximationBudgetError as exc:
            return partial(k + 1, f"approximation search failed: {exc} "
                                  f"(largest denominator {exc.largest_tried})")
        stages.append(nxt)
        step_bounds.append(tol)

    return DirectionCertificate(
        omega1=omega1, gap_base=gap_base, rho=rho, stages=stages,
        step_bounds=step_bounds, gap_targets=_dyadic_targets(),
        policy=policy)


def _gap_rhs_exact_le(gap_sq: Fraction, omega1: Modulus, norm_sq: int) -> bool | None:
    """Exact gap_sq <= w1(|xi|)^2 for power-family w1, else None."""
    if omega1.family != "power":
        return None
    p = Fraction(omega1.params[0]).limit_denominator(10**6)
    if abs(float(p) - omega1.params[0]) > 1e-15:
        return None
    # gap^2 <= N^{-p}  <=>  (gap^2)^q N^p <= 1   with p = pn/q
    pn, q = p.numerator, p.denominator
    return gap_sq ** q * Fraction(norm_sq) ** pn <= 1


def verify_direction_certificate(cert: DirectionCertificate) -> dict:
    """Re-check every certificate inequality; failures go in the report.

    Per step: 0 < |r_{k+1} - r_k|^2 <= step_bound^2 and the rho norm gap,
    exact rationals.  Per stage j <= K: the projection gap against the
    final direction stays below the stage target (exact for dyadic targets
    and power-family moduli, outward-rounded dyadics otherwise).
    """
    stages = cert.stages
    report: dict = {"policy": cert.policy, "checks": [], "steps": [],
                    "all_pass": True}
    if len(stages) < 2:
        report["vacuous"] = True
        return report

    def fail():
        report["all_pass"] = False

    for i in range(len(stages) - 1):
        a, b = stages[i], stages[i + 1]
        entry = {"step": i + 1}
        entry["distinct"] = not is_parallel(a, b)
        tol = cert.step_bounds[i] if i < len(cert.step_bounds) else None
        entry["within_bound"] = (
            tol is not None and unit_dist_sq_le(a, b, tol * tol))
        entry["norm_increases"] = b.norm_sq() > a.norm_sq()
        entry["rho_gap"] = (
            Fraction(a.norm_sq()) < cert.rho * cert.rho * b.norm_sq())
        entry["norm_floor"] = a.norm_sq() >= (i + 1) ** 2
        if not all(v for k, v in entry.items() if k != "step"):
            fail()
        report["steps"].append(entry)
    if stages[-1].norm_sq() < len(stages) ** 2:
        fail()
        report["final_norm_floor"] = False

    base = stages[-1]
    for j in range(1, len(stages)):
        xi = stages[j - 1]
        gap_sq = projection_gap_sq(base, xi)
        lhs_ln = 0.5 * ln_fraction(gap_sq) if gap_sq > 0 else float("-inf")
        entry = {"stage": j, "lhs_ln": lhs_ln}
        ok: bool | None = None
        rhs_ln = float("nan")
        if cert.policy == POLICY_MODULUS and cert.omega1 is not None:
            rhs_ln = eval_modulus(
                cert.omega1, LogValue.from_ln(xi.ln_norm())).ln()
            ok = _gap_rhs_exact_le(gap_sq, cert.omega1, xi.norm_sq())
            if ok is None:  # outward-rounded dyadic lower bound of the rhs
                rhs_lo = dyadic_at_most(rhs_ln)
                ok = gap_sq <= rhs_lo * rhs_lo
        else:
            tgt = cert.gap_targets[j - 1]
            rhs_ln = ln_fraction(tgt)
            ok = gap_sq <= tgt * tgt
        entry["rhs_ln"] = rhs_ln
        entry["pass"] = bool(ok) and gap_sq > 0
        if not entry["pass"]:
            fail()
        report["checks"].append(entry)
    return report
