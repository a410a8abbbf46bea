import numpy as np
import pytest

from combdrive import (
    CombParams,
    RescaleMap,
    Region,
    Tag,
    build_physical_domain,
    build_rescaled_domain,
)
from combdrive.geometry import DomainMembershipError, d_eps_limit


def make(**kw):
    base = dict(zeta1=0.2, zeta2=0.4, zeta3=0.6, zeta4=0.8,
                L=1.0, l1=1.0, l2=4.0, l3=5.0, alpha=2.0, n=8)
    base.update(kw)
    return CombParams(**base)


def mc_area(domain, rng, samples=1_000_000):
    """Monte-Carlo point-in-domain estimate over the vacuum bounding box."""
    p = domain.params
    x = rng.uniform(0.0, p.L, samples)
    y = rng.uniform(p.l1, p.l2, samples)
    frac = domain.contains(x, y).mean()
    return frac * p.L * (p.l2 - p.l1)


def test_single_period_alpha0_area():
    # one period, unit gap: 3 - 0.2*2 - 0.2*2 = 2.2
    p = make(n=1, alpha=0.0)
    dom = build_physical_domain(p)
    assert dom.area() == pytest.approx(2.2, rel=1e-12)


def test_monte_carlo_area_oracle():
    p = make(n=4)
    dom = build_physical_domain(p)
    est = mc_area(dom, np.random.default_rng(20240811))
    assert est == pytest.approx(dom.area(), rel=0.01)


def test_rescaled_rotor_boundary_length_scales_with_n():
    for n in (1, 3, 8):
        p = make(n=n)
        dom = build_rescaled_domain(p)
        per_period = (p.meas_omega_a * p.epsilon          # finger tip
                      + 2 * (p.l2 - p.l1 - 1.0)           # finger walls
                      + (1 - p.meas_omega_a) * p.epsilon)  # backbone underside
        got = dom.boundary_length_by_tag()[Tag.DIRICHLET_ROTOR]
        assert got == pytest.approx(n * per_period, rel=1e-12)


def test_lateral_boundary_length():
    dom = build_physical_domain(make(n=4))
    got = dom.boundary_length_by_tag()[Tag.NEUMANN_LATERAL]
    assert got == pytest.approx(2 * 3.0, rel=1e-15)


def test_gap_layer_thickness_alpha0_is_one():
    dom = build_physical_domain(make(n=2, alpha=0.0))
    c1 = [r for r in dom.rects if r.region == Region.C1]
    assert all(r.x2max - r.x2min == pytest.approx(1.0) for r in c1)


def test_rescaled_middle_height():
    dom = build_rescaled_domain(make())
    c2 = [r for r in dom.rects if r.region == Region.C2]
    assert all(r.x2max - r.x2min == pytest.approx(1.0) for r in c2)  # 4-1-2


def test_single_period_counts_one_finger_pair():
    dom = build_rescaled_domain(make(n=1))
    by_region = {r: 0 for r in Region}
    for rect in dom.rects:
        by_region[rect.region] += 1
    assert by_region[Region.C1] == 2   # stator footprint removed
    assert by_region[Region.C2] == 3   # both footprints removed
    assert by_region[Region.C3] == 2   # rotor footprint removed


def test_jacobian_area_identity():
    # physical area = gap * (gap-layer area) + d_eps * (middle area)
    for alpha in (2.0, 3.0):
        p = make(alpha=alpha, n=4)
        phys = build_physical_domain(p).area_by_region()
        resc = build_rescaled_domain(p).area_by_region()
        d = RescaleMap(p).d_eps
        for reg, scale in ((Region.C1, p.gap), (Region.C3, p.gap),
                           (Region.C2, d)):
            assert phys[reg] == pytest.approx(scale * resc[reg], rel=1e-12)


def test_boundary_fully_tagged_partition():
    dom = build_physical_domain(make(n=3))
    lengths = dom.boundary_length_by_tag()
    assert all(v > 0 for v in lengths.values())
    assert len({s.tag for s in dom.boundary}) == 3


def test_map_fixed_bottom_line():
    m = RescaleMap(make(n=2))
    x, y = m.forward(0.3, 1.0)
    assert (x, y) == (0.3, 1.0)


def test_map_branch_values_hand_checked():
    # eps = 1/2, alpha = 2: gap = 1/4, d_eps = (3 - 0.5)/1 = 2.5
    m = RescaleMap(make(n=2))
    assert m.d_eps == pytest.approx(2.5)
    x, y = m.forward(0.3, 1.5)
    assert y == pytest.approx(1.0 + 0.5 * 0.25)     # bottom branch
    x, y = m.forward(0.3, 2.5)
    assert y == pytest.approx(2.5 * 0.5 + 1.0 + 0.25)  # middle branch


def test_map_interface_continuity():
    p = make(n=4)
    m = RescaleMap(p)
    for x2 in (p.l1 + 1.0, p.l2 - 1.0):
        lo = m.forward(0.01, x2 - 1e-13)[1]
        hi = m.forward(0.01, x2 + 1e-13)[1]
        assert abs(hi - lo) < 1e-10
    _, y = m.inverse(0.01, p.l1 + p.gap)
    assert y == pytest.approx(p.l1 + 1.0)


def test_map_top_line_fixed_and_roundtrip():
    p = make(n=4, alpha=3.0)
    m = RescaleMap(p)
    assert m.forward(0.7, p.l2)[1] == pytest.approx(p.l2)

    rng = np.random.default_rng(7)
    dom = build_rescaled_domain(p)
    pts = []
    for rect in dom.rects:
        x = rng.uniform(rect.x1min, rect.x1max, 50)
        y = rng.uniform(rect.x2min, rect.x2max, 50)
        pts.append((x, y))
    x = np.concatenate([a for a, _ in pts])
    y = np.concatenate([b for _, b in pts])
    xf, yf = m.forward(x, y)
    xb, yb = m.inverse(xf, yf)
    tol = 1e-12 * p.l3
    assert np.max(np.abs(xb - x)) <= tol
    assert np.max(np.abs(yb - y)) <= tol


def test_map_rejects_points_inside_fingers():
    p = make(n=2)
    m = RescaleMap(p)
    with pytest.raises(DomainMembershipError):
        m.forward(p.epsilon * 0.3, 3.0)   # strictly inside a rotor finger


def test_d_eps_approaches_limit_monotonically():
    p0 = make()
    lim = d_eps_limit(p0)
    assert lim == pytest.approx(3.0)
    gaps = [abs(RescaleMap(p0.with_n(n)).d_eps - lim) for n in (4, 8, 16, 32)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_domain_json_dump_roundtrips():
    import json

    dom = build_rescaled_domain(make(n=1))
    payload = json.loads(dom.to_json())
    assert payload["kind"] == "rescaled"
    assert len(payload["rects"]) == 7
    tags = {seg["tag"] for seg in payload["boundary"]}
    assert tags == {"DIRICHLET_ROTOR", "DIRICHLET_STATOR", "NEUMANN_LATERAL"}
