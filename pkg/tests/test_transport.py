"""Tests for slicing curves of mappings into per-atom transport data.

Covers the absolutely-continuous decomposition (per-atom curves, the
derivative identity between the aggregate metric derivative and the
weighted per-atom derivatives), the bounded-variation decomposition with
its variation identity, and the p = 1 staircase family on which the
slicing construction genuinely fails.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from nlsp import (
    D_pp,
    Euclidean,
    FiniteMeasureSpace,
    LpSpace,
    MappingFamily,
    MetricMapping,
    ProductGridMapping,
    SampledCurve,
    Sphere,
    StepCurve,
    TimeGrid,
    ValidationError,
    counterexample_curve,
    counterexample_p1,
    d_pp,
    decompose_ac,
    decompose_bv,
    derivative_identity_residual,
    per_atom_derivatives,
    sec_atom,
    sec_time,
    trial_rng,
    variation,
    variation_identity_residual,
)
from nlsp.suites import default_tree


def lp_curve(times, mapping_rows, fam, p=2.0):
    """A sampled curve in L^p from rows of per-atom points."""
    space = LpSpace(fam, p)
    maps = tuple(MetricMapping(fam, row) for row in mapping_rows)
    return SampledCurve(space, tuple(times), maps)


# ---------------------------------------------------------------------------
# Absolutely continuous decomposition
# ---------------------------------------------------------------------------


def test_decompose_ac_keeps_point_objects():
    """Slicing re-reads the curve without copying or recomputing points."""
    base = FiniteMeasureSpace(("a", "b"), (1.0, 2.0))
    fam = MappingFamily(base, Euclidean(1), (np.zeros(1), np.zeros(1)))
    times = np.linspace(0.0, 1.0, 9)
    rows = [(np.array([t]), np.array([2.0 * t])) for t in times]
    c = lp_curve(times, rows, fam)
    d = decompose_ac(c, 2.0)
    assert len(d.per_atom_curves) == 2
    for j in range(2):
        for i in range(9):
            assert d.per_atom_curves[j].values[i] is c.values[i].values[j]


def test_decompose_ac_rejects_p_one_and_infinity():
    """Slicing preserves regularity only for finite exponents above one."""
    base = FiniteMeasureSpace(("a",), (1.0,))
    fam = MappingFamily(base, Euclidean(1), (np.zeros(1),))
    c = lp_curve((0.0, 1.0), [(np.zeros(1),), (np.ones(1),)], fam)
    with pytest.raises(ValidationError, match="p > 1"):
        decompose_ac(c, 1.0)
    with pytest.raises(ValidationError, match="finite"):
        decompose_ac(c, math.inf)


def test_decompose_ac_exponent_must_match_curve_space():
    """The requested exponent has to agree with the curve's own space."""
    base = FiniteMeasureSpace(("a",), (1.0,))
    fam = MappingFamily(base, Euclidean(1), (np.zeros(1),))
    c = lp_curve((0.0, 1.0), [(np.zeros(1),), (np.ones(1),)], fam, p=2.0)
    with pytest.raises(ValidationError):
        decompose_ac(c, 3.0)


def test_derivative_identity_is_exact_for_constant_curves():
    """A constant curve decomposes to constants with zero residual."""
    base = FiniteMeasureSpace(("a", "b", "c"), (0.5, 1.0, 0.25))
    target = Euclidean(2)
    rng = trial_rng(0, "test/ac-constant", 0)
    pts = tuple(target.random_point(rng) for _ in range(3))
    fam = MappingFamily(base, target, pts)
    times = np.linspace(0.0, 1.0, 7)
    c = lp_curve(times, [pts] * 7, fam)
    d = decompose_ac(c, 2.0)
    assert np.all(derivative_identity_residual(d) == 0.0)
    assert np.all(per_atom_derivatives(d) == 0.0)


def test_derivative_identity_on_distinct_speed_great_circles():
    """Per-atom great circles at distinct angular speeds satisfy the
    derivative identity.

    Both sides of the identity aggregate the same finite-difference
    distances through the same weighted sum, so the residual sits at the
    roundoff floor rather than merely below the documented 1e-3 bound.
    """
    sphere = Sphere(3)
    base = FiniteMeasureSpace(("a", "b", "c"), (0.7, 1.0, 0.3))
    omegas = (0.5 * math.pi, 0.9 * math.pi, 1.7)
    times = np.linspace(0.0, 1.0, 129)

    def circle_point(omega, t, phase):
        return np.array([math.cos(omega * t + phase),
                         math.sin(omega * t + phase), 0.0])

    fam = MappingFamily(base, sphere,
                        tuple(circle_point(w, 0.0, 0.1) for w in omegas))
    rows = [tuple(circle_point(w, t, 0.1) for w in omegas) for t in times]
    c = lp_curve(times, rows, fam)
    d = decompose_ac(c, 2.0)
    residual = np.abs(derivative_identity_residual(d))
    assert float(np.max(residual[1:-1])) < 1e-3
    assert float(np.max(residual)) <= 1e-12
    # Per-atom speeds recover each circle's angular speed.
    derivs = per_atom_derivatives(d)
    for j, omega in enumerate(omegas):
        assert np.allclose(derivs[j, 1:-1], omega, atol=1e-6)


def test_lp_curve_and_bundle_distances_agree():
    """The two readings of product data stay isometric, 100 random pairs."""
    worst = 0.0
    for trial in range(100):
        rng = trial_rng(0, "test/transport-isometry", trial)
        target = Sphere(3) if trial % 2 else Euclidean(2)
        weights = tuple(float(w) for w in rng.uniform(0.25, 1.0, size=3))
        base = FiniteMeasureSpace(("x0", "x1", "x2"), weights)
        fam = MappingFamily(base, target,
                            tuple(target.random_point(rng) for _ in range(3)))
        grid = TimeGrid(tuple(np.linspace(0.0, 1.0, 7)), rule="trapezoid")
        def draw():
            return ProductGridMapping(
                grid, fam,
                tuple(tuple(target.random_point(rng) for _ in range(3))
                      for _ in range(7)))
        c1, c2 = draw(), draw()
        for p in (1.5, 2.0, 4.0):
            curve_side = d_pp(sec_time(c1), sec_time(c2), p)
            bundle_side = D_pp(sec_atom(c1), sec_atom(c2), p)
            worst = max(worst, abs(curve_side - bundle_side)
                        / max(curve_side, 1e-30))
    assert worst < 1e-14


# ---------------------------------------------------------------------------
# Bounded variation decomposition
# ---------------------------------------------------------------------------


def test_decompose_bv_of_single_global_jump():
    """One jump in L^p slices to one per-atom jump of the atom distance."""
    base = FiniteMeasureSpace(("a", "b"), (1.0, 3.0))
    target = Euclidean(2)
    fam = MappingFamily(base, target, (np.zeros(2), np.zeros(2)))
    f = MetricMapping(fam, (np.zeros(2), np.array([1.0, 0.0])))
    g = MetricMapping(fam, (np.array([3.0, 4.0]), np.array([1.0, 2.0])))
    space = LpSpace(fam, 1.0)
    c = StepCurve(space, (0.0, 0.4, 1.0), (f, g))
    bv = decompose_bv(c)
    assert len(bv.per_atom_curves) == 2
    for j in range(2):
        pc = bv.per_atom_curves[j]
        assert pc.breakpoints == (0.0, 0.4, 1.0)
        assert pc.values[0] is f.values[j]
        assert pc.values[1] is g.values[j]
    assert variation(bv.per_atom_curves[0]) == 5.0
    assert variation(bv.per_atom_curves[1]) == 2.0
    assert variation_identity_residual(bv) <= 1e-15


def test_decompose_bv_on_tree_valued_mappings():
    """Slicing needs no tangent chart: it works for tree targets."""
    tree = default_tree()
    base = FiniteMeasureSpace(("a", "b"), (1.0, 1.0))
    rng = trial_rng(0, "test/bv-tree", 0)
    pts = [tuple(tree.random_point(rng) for _ in range(2)) for _ in range(3)]
    fam = MappingFamily(base, tree, pts[0])
    space = LpSpace(fam, 1.0)
    maps = tuple(MetricMapping(fam, row) for row in pts)
    c = StepCurve(space, (0.0, 0.3, 0.6, 1.0), maps)
    bv = decompose_bv(c)
    assert variation_identity_residual(bv) <= 1e-12
    for j in range(2):
        expected = sum(tree.distance(pts[k][j], pts[k + 1][j])
                       for k in range(2))
        assert variation(bv.per_atom_curves[j]) == pytest.approx(
            expected, abs=1e-12)


def test_variation_identity_on_random_step_curves():
    """Weighted per-atom variation reproduces the source variation,
    on the full interval and on random subintervals."""
    target = Euclidean(2)
    for trial in range(20):
        rng = trial_rng(0, "test/bv-random", trial)
        n_atoms = int(rng.integers(2, 5))
        weights = tuple(float(w) for w in rng.uniform(0.25, 1.0, size=n_atoms))
        base = FiniteMeasureSpace(
            tuple(f"x{j}" for j in range(n_atoms)), weights)
        pieces = int(rng.integers(2, 7))
        rows = [tuple(target.random_point(rng) for _ in range(n_atoms))
                for _ in range(pieces)]
        fam = MappingFamily(base, target, rows[0])
        space = LpSpace(fam, 1.0)
        breaks = tuple([0.0] + sorted(
            rng.uniform(0.05, 0.95, size=pieces - 1).tolist()) + [1.0])
        c = StepCurve(space, breaks,
                      tuple(MetricMapping(fam, row) for row in rows))
        bv = decompose_bv(c)
        assert variation_identity_residual(bv) <= 1e-12
        for _ in range(5):
            s, t = np.sort(rng.uniform(0.0, 1.0, size=2))
            if s < t:
                assert variation_identity_residual(
                    bv, (float(s), float(t))) <= 1e-12


# ---------------------------------------------------------------------------
# The p = 1 staircase
# ---------------------------------------------------------------------------


def test_counterexample_curve_structure():
    """Each atom of the staircase jumps exactly once, by exactly one."""
    c = counterexample_curve(4)
    assert len(c.values) == 5
    bv = decompose_bv(c)
    assert len(bv.per_atom_curves) == 4
    for j, pc in enumerate(bv.per_atom_curves):
        sizes = [float(np.abs(b - a)[0])
                 for a, b in zip(pc.values, pc.values[1:])]
        assert sorted(sizes) == [0.0, 0.0, 0.0, 1.0]
        assert variation(pc) == 1.0


def test_counterexample_p1_report_is_exact_at_powers_of_two():
    """Unit Lipschitz ratios, unit total variation, persistent moduli.

    With power-of-two sizes every quantity is dyadic, so the report's
    bounds are exact: the curve is 1-Lipschitz into the p = 1 space and
    has variation one, yet the per-atom refinement moduli never decay --
    the slicing construction cannot absorb the staircase at p = 1.
    """
    for n in (4, 16, 64):
        rep = counterexample_p1(n, refinements=(1, 2, 4))
        assert rep.n == n
        assert rep.lipschitz_lo == 1.0
        assert rep.lipschitz_hi == 1.0
        assert rep.total_variation == 1.0
        assert [m for (_, m) in rep.atom_moduli] == [1.0, 1.0, 1.0]
        refinement_levels = [r for (r, _) in rep.atom_moduli]
        assert refinement_levels == [1, 2, 4]


def test_counterexample_p1_validates_n():
    """The staircase needs at least two steps."""
    with pytest.raises(ValidationError):
        counterexample_p1(1)
