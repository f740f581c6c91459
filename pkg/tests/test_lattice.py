import math
from fractions import Fraction

import numpy as np
import pytest

from slowhom.lattice import (ApproximationBudgetError, DirectionCertificate,
                             InfeasibleStageError, IntVector,
                             LatticeArgumentError, approximate_direction,
                             complete_frame, construct_bad_direction,
                             intvector, is_diophantine, projection_gap_sq,
                             unit_dist_sq_le, verify_direction_certificate)
from slowhom.logvalue import LogValue
from slowhom.modulus import eval_modulus, omega1_halfspace, power_decay


def test_projection_gap_examples():
    assert projection_gap_sq(intvector(0, 1), intvector(0, 5)) == 0
    assert projection_gap_sq(intvector(0, 1), intvector(3, 4)) == 9
    assert projection_gap_sq(intvector(1, 1), intvector(1, 0)) == Fraction(1, 2)


def test_projection_gap_parallel_multiples():
    base = intvector(3, -7, 2)
    for m in (-4, -1, 1, 9):
        assert projection_gap_sq(base, base.scale(m)) == 0


def test_projection_gap_zero_base():
    with pytest.raises(LatticeArgumentError):
        projection_gap_sq(intvector(0, 0), intvector(1, 0))


def test_is_diophantine_examples():
    assert is_diophantine(intvector(0, 1), Fraction(1), Fraction(2),
                          [intvector(1, 0)])
    assert is_diophantine(intvector(1, 1), Fraction(7, 5), Fraction(2),
                          [intvector(1, -1)])  # gap^2 = 2, kappa <= sqrt(2)
    assert not is_diophantine(intvector(1, 0), Fraction(1, 1000), Fraction(2),
                              [intvector(5, 0)])  # rational direction, gap 0


def test_is_diophantine_validates_l():
    with pytest.raises(LatticeArgumentError):
        is_diophantine(intvector(0, 1), Fraction(1), Fraction(1, 2),
                       [intvector(1, 0)])


def test_complete_frame_d2():
    fr = complete_frame(intvector(0, 1))
    assert np.allclose(fr.matrix.T @ fr.matrix, np.eye(2), atol=1e-12)
    assert np.allclose(np.abs(fr.tangential[:, 0]), [1.0, 0.0], atol=1e-12)
    assert np.allclose(fr.normal, [0.0, 1.0], atol=1e-12)


def test_complete_frame_d3_matches_exact_gap():
    base = intvector(1, 2, 2)
    fr = complete_frame(base)
    assert np.allclose(fr.matrix.T @ fr.matrix, np.eye(3), atol=1e-12)
    assert np.allclose(fr.normal, base.unit(), atol=1e-12)
    xi = intvector(1, 0, 0)
    float_gap = float(np.sum((fr.tangential.T @ xi.to_floats()) ** 2))
    assert float_gap == pytest.approx(8.0 / 9.0, abs=1e-12)
    assert projection_gap_sq(base, xi) == Fraction(8, 9)


def test_frame_independence_random_frames():
    # 100 random orthonormal completions agree with the exact rational gap
    rng = np.random.default_rng(7)
    base = intvector(2, -3, 6)
    xi = intvector(5, 1, -2)
    exact = float(projection_gap_sq(base, xi))
    n = base.unit()
    for _ in range(100):
        a = rng.normal(size=(3, 2))
        a -= np.outer(n, n @ a)
        q, _ = np.linalg.qr(a)
        val = float(np.sum((q.T @ xi.to_floats()) ** 2))
        assert val == pytest.approx(exact, rel=1e-10)


def test_approximate_direction_small_example():
    got = approximate_direction(intvector(1, 0), Fraction(1, 5), min_norm=2)
    assert got.coords == (5, 1)
    d2 = 2 - 10 / math.sqrt(26)
    assert d2 <= (1 / 5) ** 2
    assert unit_dist_sq_le(got, intvector(1, 0), Fraction(1, 25))


def test_approximate_direction_wide_tolerance():
    got = approximate_direction(intvector(1, 0), Fraction(2), min_norm=3)
    assert got.norm_sq() >= 9
    assert not got.coords[1] == 0 or got.coords[0] * 1 < 0  # not parallel


def test_approximate_direction_d3_scaled_rounding():
    r = intvector(1, 0, 0)
    got = approximate_direction(r, Fraction(1, 10), min_norm=1)
    assert unit_dist_sq_le(got, r, Fraction(1, 100))
    gap = projection_gap_sq(r, got)
    assert gap > 0  # not parallel


def test_approximate_direction_tiny_tolerance_exact():
    r = intvector(3, 1)
    tol = Fraction(1, 10 ** 30)
    got = approximate_direction(r, tol, min_norm=1)
    assert unit_dist_sq_le(got, r, tol * tol)
    assert projection_gap_sq(got, r) > 0


def test_construct_k1_bound_example():
    # stage-1 budget for w1 = PowerDecay(1/2), b = 10 is w1^2(1)/10 = 1/10
    omega1 = power_decay(0.5)
    cert = construct_bad_direction(omega1, K=1, seed=intvector(1, 0),
                                   gap_base=10)
    assert cert.stage_count == 2
    step = cert.step_bounds[0]
    assert step <= Fraction(1, 10)
    assert unit_dist_sq_le(cert.stages[1], cert.stages[0], step * step)


def test_construct_norm_growth_and_floor():
    cert = construct_bad_direction(power_decay(0.5), K=4,
                                   seed=intvector(1, 0), gap_base=10)
    norms = [s.norm_sq() for s in cert.stages]
    for k, n in enumerate(norms, start=1):
        assert n >= k * k
    assert all(a < b for a, b in zip(norms, norms[1:]))
    # the rho gap is strict
    for a, b in zip(cert.stages, cert.stages[1:]):
        assert Fraction(a.norm_sq()) < cert.rho ** 2 * b.norm_sq()


def test_construct_then_verify_passes_exactly():
    for d, seed in ((2, intvector(1, 0)), (3, intvector(1, 0, 0))):
        cert = construct_bad_direction(power_decay(0.5), K=4, seed=seed,
                                       gap_base=10)
        report = verify_direction_certificate(cert)
        assert report["all_pass"]
        assert all(c["pass"] for c in report["checks"])


def test_verify_telescoped_gap_below_modulus():
    # the assertable form of the bad-normal estimate: exact gap against the
    # final stage is below omega1 at every earlier stage
    cert = construct_bad_direction(power_decay(0.5), K=3,
                                   seed=intvector(1, 0), gap_base=10)
    for j in range(1, cert.stage_count):
        gap_sq = cert.stage_gap_sq(j)
        w = eval_modulus(power_decay(0.5),
                         LogValue.from_ln(cert.stage_ln_norm(j)))
        assert gap_sq > 0
        assert float(gap_sq) <= math.exp(2 * w.ln()) * (1 + 1e-12)


def test_verify_single_stage_vacuous():
    cert = DirectionCertificate(
        omega1=power_decay(0.5), gap_base=10, rho=Fraction(1, 2),
        stages=[intvector(1, 0)], step_bounds=[], gap_targets=[])
    report = verify_direction_certificate(cert)
    assert report.get("vacuous")


def test_verify_corrupt_certificate_fails():
    cert = construct_bad_direction(power_decay(0.5), K=2,
                                   seed=intvector(1, 0), gap_base=10)
    cert.stages[1] = cert.stages[0].scale(2)  # parallel stage: gap 0
    report = verify_direction_certificate(cert)
    assert not report["all_pass"]
    assert not report["steps"][0]["distinct"]


def test_schedule_policy_hits_targets():
    targets = {}

    def target_ln(k, norm_sq):
        val = -5.0 * k - 0.5 * math.log(norm_sq)
        targets[k] = val
        return val

    cert = construct_bad_direction(
        None, K=3, seed=intvector(1, 0), gap_base=2,
        policy="schedule", gap_target_ln=target_ln)
    report = verify_direction_certificate(cert)
    assert report["all_pass"]
    for j in range(1, cert.stage_count):
        gap_sq = cert.stage_gap_sq(j)
        assert float(gap_sq) <= math.exp(2 * targets[j])


def test_schedule_policy_budget_failure_reports_stage():
    def impossible(k, norm_sq):
        return -1e9 if k >= 2 else -2.0

    with pytest.raises(InfeasibleStageError) as exc:
        construct_bad_direction(None, K=3, seed=intvector(1, 0), gap_base=2,
                                policy="schedule", gap_target_ln=impossible)
    assert exc.value.stage == 3
    assert exc.value.partial is not None
    assert exc.value.partial.failure_stage == 3


def test_certificate_json_roundtrip():
    cert = construct_bad_direction(power_decay(0.5), K=2,
                                   seed=intvector(1, 0), gap_base=10)
    again = DirectionCertificate.from_json(cert.to_json())
    assert again.stages == cert.stages
    assert again.step_bounds == cert.step_bounds
    assert again.rho == cert.rho


def test_budget_error_carries_largest_denominator():
    with pytest.raises(ApproximationBudgetError) as exc:
        approximate_direction(intvector(1, 0), Fraction(1, 2 ** 400),
                              budget_bits=64)
    assert exc.value.largest_tried >= 0
