"""Tests for per-atom velocity fields and the bundle speed norm.

Exercises forward-difference differentiation through the target log
map, the weighted aggregation of tangent norms, the gap between the
bundle norm and the curve's metric derivative (zero for geodesic
motion, first-order in the step otherwise), and the refusal of targets
without a tangent chart.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from nlsp import (
    Euclidean,
    FiniteMeasureSpace,
    LpSpace,
    MappingFamily,
    MetricMapping,
    SampledCurve,
    Spd,
    Sphere,
    UnsupportedOperationError,
    ValidationError,
    atomwise_consistency_gap,
    bundle_norm,
    bundle_norms,
    compute_speed,
    decompose_ac,
    default_tree,
    sample_smooth_path,
    speed_identity_residual,
    tangent_norms,
    trial_rng,
)


def plane_family(weights=(1.0, 3.0)):
    labels = tuple(f"x{j}" for j in range(len(weights)))
    zeros = tuple(np.zeros(2) for _ in weights)
    return MappingFamily(FiniteMeasureSpace(labels, weights), Euclidean(2),
                         zeros)


def linear_curve(n_nodes=9):
    """Two atoms moving at velocity 2 along orthogonal axes."""
    fam = plane_family()
    times = tuple(float(t) for t in np.linspace(0.0, 1.0, n_nodes))
    values = tuple(
        MetricMapping(fam, (np.array([2.0 * t, 0.0]), np.array([0.0, 2.0 * t])))
        for t in times)
    return SampledCurve(LpSpace(fam, 2.0), times, values)


def test_constant_curve_has_zero_speed_everywhere():
    """No motion: zero vectors, zero bundle norm, zero residual."""
    fam = plane_family()
    times = tuple(float(t) for t in np.linspace(0.0, 1.0, 9))
    frozen = (np.array([1.0, 1.0]), np.array([0.5, 0.0]))
    c = SampledCurve(LpSpace(fam, 2.0), times,
                     tuple(MetricMapping(fam, frozen) for _ in times))
    s = compute_speed(decompose_ac(c, 2.0))
    assert float(np.max(bundle_norms(s))) == 0.0
    assert float(np.max(speed_identity_residual(s))) == 0.0


def test_linear_motion_gives_exact_bundle_norm():
    """Atom speeds 2 with weights (1, 3) aggregate to
    (1*4 + 3*4)^(1/2) = 4 at every node, exactly."""
    s = compute_speed(decompose_ac(linear_curve(), 2.0))
    assert np.array_equal(tangent_norms(s, 0), np.array([2.0, 2.0]))
    assert all(bundle_norm(s, i) == 4.0 for i in range(9))
    assert float(np.max(speed_identity_residual(s))) == 0.0
    assert atomwise_consistency_gap(s) == 0.0


def test_velocity_vectors_are_anchored_at_curve_values():
    """Each tangent vector's base point is the curve's own value object."""
    c = linear_curve()
    s = compute_speed(decompose_ac(c, 2.0))
    for i in range(len(c.times)):
        for j in range(2):
            assert s.vectors[i][j].base is c.values[i].values[j]


def test_unit_speed_great_circle_recovers_angular_rate():
    """Geodesic motion: the forward log is exact, so the bundle norm
    equals the angular rate to roundoff at every node."""
    sphere = Sphere(3)
    fam = MappingFamily(FiniteMeasureSpace(("a",), (1.0,)), sphere,
                        (np.array([1.0, 0.0, 0.0]),))
    omega = 0.6 * math.pi
    times = tuple(float(t) for t in np.linspace(0.0, 1.0, 129))
    values = tuple(
        MetricMapping(fam, (np.array([math.cos(omega * t),
                                      math.sin(omega * t), 0.0]),))
        for t in times)
    c = SampledCurve(LpSpace(fam, 2.0), times, values)
    s = compute_speed(decompose_ac(c, 2.0))
    assert float(np.max(np.abs(bundle_norms(s) - omega))) < 1e-12


def test_speed_identity_residual_decays_linearly():
    """Warped (non-geodesic) motion: interior residual is first order in
    the step, so doubling the node count roughly halves it; the two
    boundary nodes compare one-sided quotients over the same pair and sit
    at roundoff."""
    rng = trial_rng(0, "test/speed-decay", 0)
    path = sample_smooth_path(Spd(2), rng, p=2.0)
    res = {n: speed_identity_residual(
        compute_speed(decompose_ac(path.materialize(n), 2.0)))
        for n in (129, 257)}
    coarse = float(np.max(res[129][1:-1]))
    fine = float(np.max(res[257][1:-1]))
    assert coarse < 1e-3
    assert fine <= 0.65 * coarse
    assert max(res[129][0], res[129][-1]) < 1e-12


@pytest.mark.parametrize("target", [Euclidean(3), Sphere(3), Spd(2)],
                         ids=["euclidean", "sphere", "spd"])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_atomwise_consistency_across_targets(target, p):
    """The bundle norm p-th power matches the weighted sum of per-atom
    metric-derivative powers within the documented slack."""
    rng = trial_rng(0, f"test/speed-consistency/{target.kind}/{p}", 0)
    path = sample_smooth_path(target, rng, p=p)
    s = compute_speed(decompose_ac(path.materialize(129), p))
    assert atomwise_consistency_gap(s) <= 5e-3


def test_tree_curves_decompose_but_have_no_velocity():
    """Metric-tree curves slice into per-atom curves, yet asking for
    velocity vectors is refused: there is no tangent chart."""
    tree = default_tree()
    rng = trial_rng(0, "test/speed-tree", 0)
    fam = MappingFamily(
        FiniteMeasureSpace(("a", "b"), (1.0, 1.0)), tree,
        (tree.random_point(rng), tree.random_point(rng)))
    times = tuple(float(t) for t in np.linspace(0.0, 1.0, 5))
    values = tuple(
        MetricMapping(fam, (tree.random_point(rng), tree.random_point(rng)))
        for _ in times)
    c = SampledCurve(LpSpace(fam, 2.0), times, values)
    d = decompose_ac(c, 2.0)
    assert len(d.per_atom_curves) == 2
    with pytest.raises(UnsupportedOperationError, match="no tangent chart"):
        compute_speed(d)


def test_speed_field_accessors_validate_inputs():
    """Node indices and argument types are checked loudly."""
    s = compute_speed(decompose_ac(linear_curve(), 2.0))
    with pytest.raises(ValidationError, match="TransportDecomposition"):
        compute_speed("nope")
    with pytest.raises(ValidationError, match="node"):
        tangent_norms(s, 99)
    with pytest.raises(ValidationError, match="node"):
        bundle_norm(s, -1)
    with pytest.raises(ValidationError, match="SpeedField"):
        speed_identity_residual("nope")
    with pytest.raises(ValidationError, match="SpeedField"):
        atomwise_consistency_gap("nope")
