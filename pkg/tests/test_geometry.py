import math

import numpy as np
import pytest

from slowhom.geometry import (CurvatureProfile, DiskDomain, DomainBuildError,
                              PrototypeDomain, TransformedDomain,
                              build_prototype_domain, kappa_delta,
                              points_in_polygon, rotation_for_normal)


@pytest.fixture(scope="module")
def dom():
    return build_prototype_domain(flat_len=2.0)


def test_build_rejects_degenerate_flat():
    with pytest.raises(DomainBuildError):
        build_prototype_domain(flat_len=0.0)


def test_closure_error(dom):
    assert dom.meta["closure_error"] <= 1e-10
    # parameterization wraps around
    p0 = dom.position(0.0)
    p1 = dom.position(dom.perimeter)
    assert np.allclose(p0, p1, atol=1e-9)


def test_flat_side_exact(dom):
    t = np.linspace(0.0, dom.flat_len, 64)
    pts = dom.position(t)
    assert np.all(pts[:, 1] == 0.0)
    assert pts[:, 0].min() == pytest.approx(-1.0)
    assert pts[:, 0].max() == pytest.approx(1.0)
    # origin is interior to the flat part
    assert pts[:, 0].min() < 0.0 < pts[:, 0].max()
    # outward normal on the flat side points up
    nrm = dom.outward_normal(dom.flat_len / 2)
    assert np.allclose(nrm, [0.0, 1.0], atol=1e-12)


def test_curvature_nonnegative_and_positive_off_flat(dom):
    t = np.linspace(0.0, dom.perimeter, 2000, endpoint=False)
    k = dom.curvature(t)
    assert np.all(k >= 0.0)
    off_flat = dom.dist_to_flat(t) > 0.05
    assert np.min(k[off_flat & (k > 0)]) > 0.0
    flat = t < dom.flat_len
    assert np.all(k[flat] == 0.0)


def test_junction_c2_continuity(dom):
    eps = np.array([1e-9, 1e-7, 1e-5]) * dom.curved_len
    for t_j in (dom.flat_len, dom.perimeter):
        before = dom.curvature(t_j - eps)
        after = dom.curvature(t_j + eps)
        assert np.all(np.abs(before) <= 1e-6 + np.abs(after) * 0 + 1e-6)
        assert np.all(np.abs(after) <= 1e-6)


def test_convexity_supporting_line(dom):
    # geometric oracle: every boundary point lies inside the half-plane of
    # every other point's tangent line (10^3 samples)
    t = np.linspace(0.0, dom.perimeter, 1000, endpoint=False)
    pts = dom.position(t)
    nrm = dom.outward_normal(t)
    for i in range(0, 1000, 37):
        margins = (pts - pts[i]) @ nrm[i]
        assert margins.max() <= 1e-9


def test_interior_is_below_flat(dom):
    c = dom.centroid()
    assert c[1] < 0.0
    assert dom.contains(np.array([[0.0, -0.1]]))[0]
    assert not dom.contains(np.array([[0.0, 0.1]]))[0]


def test_kappa_delta_monotone(dom):
    k1 = kappa_delta(dom, 1e-3)
    k2 = kappa_delta(dom, 1e-1)
    assert 0.0 < k1 <= k2
    ks = [kappa_delta(dom, d) for d in (0.01, 0.05, 0.1, 0.3)]
    assert all(a <= b + 1e-15 for a, b in zip(ks, ks[1:]))


def test_kappa_delta_disk_fixture():
    disk = DiskDomain(radius=1.0)
    t = np.linspace(0, disk.perimeter, 100)
    assert np.allclose(disk.curvature(t), 1.0)


def test_kappa_delta_empty_error(dom):
    with pytest.raises(ValueError):
        kappa_delta(dom, 1e9)


def test_total_turning(dom):
    # closed convex curve: the tangent angle advances by exactly 2 pi
    th0 = float(dom.theta(dom.flat_len * 0.5)[0])
    th1 = float(dom.theta(dom.perimeter * 0.999999)[0])
    assert th1 - th0 == pytest.approx(2 * math.pi, abs=1e-4)


def test_arclength_parameterization(dom):
    # |position'| = 1: finite differences along the curved part
    t = np.linspace(dom.flat_len + 0.05, dom.perimeter - 0.05, 200)
    h = 1e-6
    d = (dom.position(t + h) - dom.position(t - h)) / (2 * h)
    speed = np.linalg.norm(d, axis=1)
    assert np.allclose(speed, 1.0, atol=1e-5)


def test_inner_ball_inside(dom):
    c, r = dom.inner_ball()
    assert r > 0
    angles = np.linspace(0, 2 * math.pi, 32)
    ring = c + 0.999 * r * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    assert np.all(dom.contains(ring))


def test_points_in_polygon_square():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pts = np.array([[0.5, 0.5], [1.5, 0.5], [-0.1, 0.2], [0.9, 0.99]])
    got = points_in_polygon(pts, square)
    assert got.tolist() == [True, False, False, True]


def test_transformed_domain_consistency(dom):
    rot = rotation_for_normal(np.array([0.6, 0.8]))
    view = TransformedDomain(dom, rot, np.array([0.3, -0.2]))
    t = np.linspace(0, dom.perimeter, 50)
    base_pts = dom.position(t)
    view_pts = view.position(t)
    assert np.allclose(view_pts, base_pts @ rot.T + [0.3, -0.2])
    assert np.allclose(view.curvature(t), dom.curvature(t))
    # normals rotate with the domain
    assert np.allclose(view.outward_normal(t),
                       dom.outward_normal(t) @ rot.T)
    # the flat side's outward normal becomes the requested direction
    flat_nrm = view.outward_normal(dom.flat_len / 2)
    assert np.allclose(flat_nrm, [0.6, 0.8], atol=1e-12)
    inside_base = np.array([0.0, -0.1])
    assert view.contains((rot @ inside_base + [0.3, -0.2])[None, :])[0]


def test_blend_rejection_on_impossible_profile():
    # junction mass removed: the closure constant goes nonnegative
    with pytest.raises(DomainBuildError):
        build_prototype_domain(
            flat_len=2.0,
            profile=CurvatureProfile(sharp=2.0, junction_weight=0.0))
