import numpy as np
import pytest

from combdrive import (
    CombParams,
    NodeClass,
    Rect,
    RefineSpec,
    Region,
    Tag,
    build_rescaled_domain,
    build_physical_domain,
    generate_mesh,
)
from combdrive.geometry import BoundarySegment, RectilinearDomain, period_bases
from combdrive.mesh import MeshBudgetError, MeshConsistencyError


def make(**kw):
    base = dict(zeta1=0.2, zeta2=0.4, zeta3=0.6, zeta4=0.8,
                L=1.0, l1=1.0, l2=4.0, l3=5.0, alpha=2.0, n=8)
    base.update(kw)
    return CombParams(**base)


def test_single_period_coarse_x_nodes():
    dom = build_rescaled_domain(make(n=1))
    mesh = generate_mesh(dom, RefineSpec(gap=1, zeta=1, middle=1))
    assert mesh.x1.tolist() == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert mesh.x1.size == 6
    assert mesh.x2.tolist() == pytest.approx([1.0, 2.0, 3.0, 4.0])


def test_feature_lines_present_at_any_refinement():
    p = make(n=4)
    dom = build_rescaled_domain(p)
    mesh = generate_mesh(dom, RefineSpec())
    bases = period_bases(p)
    for k in range(p.n):
        for z in p.zetas:
            assert np.any(mesh.x1 == bases[k] + p.epsilon * z)
    for level in (p.l1, p.l1 + 1.0, p.l2 - 1.0, p.l2):
        assert np.any(mesh.x2 == level)


def test_active_area_matches_domain():
    for alpha, n in ((2.0, 4), (3.0, 2), (0.0, 3)):
        dom = build_physical_domain(make(alpha=alpha, n=n))
        mesh = generate_mesh(dom, RefineSpec())
        assert mesh.active_area() == pytest.approx(dom.area(), rel=1e-12)


def test_doubling_uniform_refinement_halves_h():
    dom = build_rescaled_domain(make(n=2))
    coarse = generate_mesh(dom, RefineSpec(grading=1.0))
    fine = generate_mesh(dom, RefineSpec(grading=1.0, factor=2))
    assert fine.h == pytest.approx(coarse.h / 2, rel=1e-12)


def test_refined_breakpoints_nest():
    dom = build_rescaled_domain(make(n=2))
    coarse = generate_mesh(dom, RefineSpec())   # graded default
    fine = generate_mesh(dom, RefineSpec(factor=2))
    assert np.all(np.isin(coarse.x1, fine.x1))
    assert np.all(np.isin(coarse.x2, fine.x2))


def test_bitwise_periodic_breakpoint_pattern():
    p = make(n=8)
    mesh = generate_mesh(build_rescaled_domain(p), RefineSpec())
    bases = period_bases(p)
    per = mesh.x1.size // p.n
    first = mesh.x1[:per]
    for k in range(1, p.n):
        chunk = mesh.x1[k * per:(k + 1) * per]
        assert np.array_equal(chunk, bases[k] + first)


def test_node_classes_per_location():
    p = make(n=2)
    mesh = generate_mesh(build_rescaled_domain(p), RefineSpec())
    cls = mesh.node_class

    def at(x, y):
        ix = int(np.flatnonzero(np.isclose(mesh.x1, x))[0])
        iy = int(np.flatnonzero(np.isclose(mesh.x2, y))[0])
        return cls[ix, iy]

    assert at(0.0, 2.5) == NodeClass.FREE            # lateral side: natural
    assert at(p.epsilon * 0.3, p.l1 + 1.0) == NodeClass.DIRICHLET_ROTOR  # tip
    assert at(p.epsilon * 0.7, p.l2 - 1.0) == NodeClass.DIRICHLET_STATOR
    assert at(0.05, 2.5) == NodeClass.FREE           # interior
    assert at(0.0, p.l1) == NodeClass.DIRICHLET_STATOR   # corner: Dirichlet wins
    assert at(0.0, p.l2) == NodeClass.DIRICHLET_ROTOR
    # inside a rotor finger footprint, strictly between the walls
    assert at(p.epsilon * 0.3, 3.5) == NodeClass.UNUSED


def test_every_active_cell_touches_free_nodes():
    mesh = generate_mesh(build_rescaled_domain(make(n=2)), RefineSpec())
    counts = mesh.class_counts()
    assert counts["FREE"] > 0
    assert counts["DIRICHLET_ROTOR"] > 0
    assert counts["DIRICHLET_STATOR"] > 0


def test_permuted_rect_order_gives_identical_mesh():
    p = make(n=2)
    dom1 = build_rescaled_domain(p)
    dom2 = RectilinearDomain(
        kind=dom1.kind, params=p, rects=list(reversed(dom1.rects)),
        boundary=list(reversed(dom1.boundary)),
        x_intervals=dom1.x_intervals, y_intervals=dom1.y_intervals,
    )
    m1 = generate_mesh(dom1, RefineSpec())
    m2 = generate_mesh(dom2, RefineSpec())
    assert np.array_equal(m1.x1, m2.x1)
    assert np.array_equal(m1.active, m2.active)
    assert np.array_equal(m1.node_class, m2.node_class)


def test_node_budget_error_reports_requirement():
    dom = build_rescaled_domain(make(n=8))
    with pytest.raises(MeshBudgetError) as err:
        generate_mesh(dom, RefineSpec(factor=64, node_budget=10_000))
    assert err.value.required > 10_000


def test_untagged_boundary_is_a_consistency_error(ref_params):
    dom = build_rescaled_domain(ref_params)
    broken = RectilinearDomain(
        kind="rescaled", params=ref_params, rects=dom.rects,
        boundary=[s for s in dom.boundary if s.tag != Tag.NEUMANN_LATERAL],
        x_intervals=dom.x_intervals, y_intervals=dom.y_intervals,
    )
    with pytest.raises(MeshConsistencyError):
        generate_mesh(broken, RefineSpec(gap=1, zeta=1, middle=1))


def test_generic_fixture_domain_meshes():
    p = make()
    dom = RectilinearDomain(
        kind="fixture", params=p,
        rects=[Rect(0.0, 1.0, 0.0, 1.0, Region.C2)],
        boundary=[
            BoundarySegment((0.0, 0.0), (1.0, 0.0), Tag.DIRICHLET_STATOR, (0.0, -1.0)),
            BoundarySegment((0.0, 1.0), (1.0, 1.0), Tag.DIRICHLET_ROTOR, (0.0, 1.0)),
            BoundarySegment((0.0, 0.0), (0.0, 1.0), Tag.NEUMANN_LATERAL, (-1.0, 0.0)),
            BoundarySegment((1.0, 0.0), (1.0, 1.0), Tag.NEUMANN_LATERAL, (1.0, 0.0)),
        ],
        x_intervals=[(0.0, 1.0, "zeta")],
        y_intervals=[(0.0, 1.0, "middle")],
    )
    mesh = generate_mesh(dom, RefineSpec(zeta=4, middle=4, grading=1.0))
    assert mesh.active.all()
    assert mesh.active_area() == pytest.approx(1.0)
