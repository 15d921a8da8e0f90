"""Geodesics and curvature comparison in mapping spaces.

Geodesics between two mappings are assembled atom by atom from target
geodesics (:func:`lp_geodesic`); the assembled curve is constant-speed and
satisfies ``D_p(c(s), c(t)) = |t - s|/(b - a) * D_p(f, g)`` at all node
pairs, which :func:`constant_speed_residual` certifies.  Curvature
comparison transfers from the target to the mapping space with the same
sign: :func:`curvature_comparison_suite` measures the squared-distance
comparison residual on random quadruples and checks the sign demanded by
the target's curvature class, including the converse direction through the
constant-mapping embedding.  :func:`length_space_check` certifies the
energy/length inequality and its equality on geodesics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import (
    SampledCurve,
    constant_speed_reparam,
    energy,
    length,
    metric_derivative,
)
from .errors import GeodesicError, ValidationError
from .mappings import (
    FiniteMeasureSpace,
    LpSpace,
    MappingFamily,
    MetricMapping,
    check_p,
    d_p,
)
from .rng import trial_rng
from .targets import FLAT, GLOBAL_NNC, GLOBAL_NPC, Sphere, TargetSpace

#: Sphere endpoint pairs are sampled with angles in this range, keeping a
#: wide margin from the antipodal degeneracy.
SPHERE_SAFE_RADIUS = (0.3, 2.5)


def geodesic_safe_pair(target: TargetSpace, rng: np.random.Generator):
    """Two target points joined by a unique geodesic.

    Spheres draw the second point through the exponential map at a safe
    angle; every other supported target has globally unique geodesics, so
    two independent points are returned.
    """
    y = target.random_point(rng)
    if isinstance(target, Sphere):
        radius = float(rng.uniform(*SPHERE_SAFE_RADIUS))
        z = target.exp_map(y, target.random_tangent(y, rng, norm=radius))
    else:
        z = target.random_point(rng)
    return y, z


def geodesic_safe_mapping_pair(family: MappingFamily,
                               rng: np.random.Generator
                               ) -> tuple[MetricMapping, MetricMapping]:
    """Two mappings of the family with a unique per-atom geodesic."""
    pairs = [geodesic_safe_pair(family.target, rng)
             for _ in range(len(family.base_space))]
    return (MetricMapping(family, tuple(a for a, _ in pairs)),
            MetricMapping(family, tuple(b for _, b in pairs)))


def _require_positive_mass(base_space: FiniteMeasureSpace, op: str) -> None:
    if base_space.total_mass == 0.0:
        raise ValidationError(
            f"{op} rejects a base space of total mass zero: every two "
            "mappings are then at distance zero and the construction is "
            "trivial")


@dataclass(frozen=True)
class LpGeodesic:
    """A geodesic between two mappings, with its per-atom target geodesics.

    ``curve`` lives in the ``LpSpace`` ambient; ``per_atom_curves[j]``
    shares its point objects with ``curve``'s node mappings.
    """

    start: MetricMapping
    end: MetricMapping
    p: float
    curve: SampledCurve
    per_atom_curves: tuple[SampledCurve, ...]

    @property
    def family(self) -> MappingFamily:
        return self.start.family

    @property
    def interval(self) -> tuple[float, float]:
        return self.curve.interval

    def endpoint_distance(self) -> float:
        return d_p(self.start, self.end, self.p)


def lp_geodesic(f: MetricMapping, g: MetricMapping, p,
                n_nodes: int = 33,
                interval: tuple[float, float] = (0.0, 1.0)) -> LpGeodesic:
    """Assemble the geodesic from ``f`` to ``g`` atom by atom.

    Every atom takes the target geodesic between its endpoints, sampled at
    ``n_nodes`` equally spaced times on ``interval``.  A positive-weight
    atom without a unique target geodesic (antipodal sphere endpoints) is a
    real obstruction and raises :class:`~nlsp.errors.GeodesicError` naming
    the atom; a zero-weight atom with the same defect is repaired by
    holding it constant, which changes nothing almost everywhere.
    """
    if not isinstance(f, MetricMapping) or not isinstance(g, MetricMapping):
        raise ValidationError("lp_geodesic expects two MetricMapping endpoints")
    if f.family is not g.family:
        raise ValidationError(
            "geodesic endpoints must come from the same mapping family")
    p = check_p(p)
    if not isinstance(n_nodes, (int, np.integer)) or n_nodes < 2:
        raise ValidationError(f"n_nodes must be an integer >= 2, got {n_nodes!r}")
    a, b = map(float, interval)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValidationError(f"need a finite interval a < b, got {interval!r}")
    family = f.family
    _require_positive_mass(family.base_space, "lp_geodesic")

    tgt = family.target
    fractions = np.linspace(0.0, 1.0, int(n_nodes))
    fractions[0], fractions[-1] = 0.0, 1.0
    times = tuple(float(t) for t in a + (b - a) * fractions)

    atom_values: list[tuple] = []
    for j in range(len(family.base_space)):
        y, z = f.values[j], g.values[j]
        try:
            vals = tuple(tgt.geodesic_point(y, z, float(s)) for s in fractions)
        except GeodesicError as exc:
            if family.base_space.weights[j] > 0.0:
                raise GeodesicError(
                    f"no unique geodesic on positive-weight atom "
                    f"{family.base_space.atom_ids[j]!r}: {exc}") from exc
            vals = (y,) * len(fractions)
        atom_values.append(vals)

    node_mappings = tuple(
        MetricMapping(family, tuple(atom_values[j][i]
                                    for j in range(len(atom_values))))
        for i in range(len(times)))
    curve = SampledCurve(LpSpace(family, p), times, node_mappings)
    per_atom = tuple(
        SampledCurve(tgt, times,
                     tuple(node.values[j] for node in curve.values))
        for j in range(len(family.base_space)))
    return LpGeodesic(start=f, end=g, p=p, curve=curve,
                      per_atom_curves=per_atom)


def constant_speed_residual(geo: LpGeodesic) -> float:
    """Worst deviation from exact linearity of the mapping-space distance.

    Returns ``max_{s<t} | D_p(c(t_s), c(t_t)) - (t_t - t_s)/(b - a) * D |``
    over all node pairs, where ``D`` is the endpoint distance.
    """
    if not isinstance(geo, LpGeodesic):
        raise ValidationError(f"expected an LpGeodesic, got {type(geo).__name__}")
    times = geo.curve.times
    values = geo.curve.values
    a, b = geo.interval
    total = geo.endpoint_distance()
    p = geo.p
    worst = 0.0
    for i in range(len(times)):
        for k in range(i + 1, len(times)):
            expected = (times[k] - times[i]) / (b - a) * total
            worst = max(worst, abs(d_p(values[i], values[k], p) - expected))
    return float(worst)


def start_aligned_residuals(geo: LpGeodesic) -> np.ndarray:
    """Per-node residual against the start: ``|D_p(c(a), c(t)) - s(t) D|``."""
    times = geo.curve.times
    values = geo.curve.values
    a, b = geo.interval
    total = geo.endpoint_distance()
    return np.array([
        abs(d_p(values[0], values[i], geo.p) - (t - a) / (b - a) * total)
        for i, t in enumerate(times)])


def geodesic_speed_check(geo: LpGeodesic) -> float:
    """Worst per-atom deviation from the constant target speed.

    Compares each atom curve's discrete metric derivative at every node
    with ``d_N(f_j, g_j) / (b - a)``.
    """
    if not isinstance(geo, LpGeodesic):
        raise ValidationError(f"expected an LpGeodesic, got {type(geo).__name__}")
    a, b = geo.interval
    tgt = geo.family.target
    worst = 0.0
    for j, atom_curve in enumerate(geo.per_atom_curves):
        speed = tgt.distance(geo.start.values[j], geo.end.values[j]) / (b - a)
        md = metric_derivative(atom_curve)
        worst = max(worst, float(np.max(np.abs(md - speed))))
    return float(worst)


# ---------------------------------------------------------------------------
# Curvature comparison
# ---------------------------------------------------------------------------


def mapping_comparison_residual(z: MetricMapping, f: MetricMapping,
                                g: MetricMapping, t: float) -> float:
    """Squared-distance comparison residual in the ``L^2`` mapping space.

    ``D_2(z, c(t))^2 - [(1-t) D_2(z, f)^2 + t D_2(z, g)^2 - (1-t) t D_2(f, g)^2]``
    where ``c`` is the atomwise geodesic from ``f`` to ``g``.  At ``t`` in
    ``{0, 1}`` the residual is zero by construction and returned exactly.
    """
    for m in (z, f, g):
        if not isinstance(m, MetricMapping):
            raise ValidationError("comparison expects MetricMapping arguments")
    if z.family is not f.family or f.family is not g.family:
        raise ValidationError("comparison arguments must share one family")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0, 1], got {t!r}")
    if t == 0.0 or t == 1.0:
        return 0.0
    family = f.family
    tgt = family.target
    mid = MetricMapping(family, tuple(
        tgt.geodesic_point(f.values[j], g.values[j], t)
        for j in range(len(family.base_space))))
    d_zm = d_p(z, mid, 2.0)
    d_zf = d_p(z, f, 2.0)
    d_zg = d_p(z, g, 2.0)
    d_fg = d_p(f, g, 2.0)
    chord = (1.0 - t) * d_zf ** 2 + t * d_zg ** 2 - (1.0 - t) * t * d_fg ** 2
    return float(d_zm ** 2 - chord)


@dataclass(frozen=True)
class CurvatureReport:
    """Outcome of the curvature-comparison battery on one target."""

    target_kind: str
    curvature_class: str
    n_trials: int
    residual_min: float
    residual_max: float
    embedded_min: float
    embedded_max: float
    embedded_transfer_max: float
    passed: bool
    failures: tuple[str, ...]
    rows: tuple[tuple, ...]  # (trial, t, residual, embedded_residual)


_SIGN_CHECKS = {
    GLOBAL_NPC: "<= tolerance (thin-triangle targets keep the residual "
                "nonpositive)",
    GLOBAL_NNC: ">= -tolerance (fat-triangle targets keep the residual "
                "nonnegative)",
    FLAT: "within the flat tolerance of zero",
}


def curvature_comparison_suite(target: TargetSpace,
                               base_space: FiniteMeasureSpace,
                               trials: int,
                               seed: int = 0,
                               sign_tol: float = 1e-8,
                               flat_tol: float = 1e-10) -> CurvatureReport:
    """Random quadruple battery for the comparison-sign transfer.

    Each trial draws a witness mapping ``z``, geodesic endpoints ``f, g``
    and an interior time ``t``, and evaluates the ``L^2`` comparison
    residual; alongside, a target-level quadruple is evaluated both in the
    target and embedded through constant mappings, certifying that the
    embedding rescales the residual by the total mass without changing its
    sign.  A target whose curvature class is not declared flat / NPC / NNC
    is refused rather than guessed at.
    """
    if target.curvature_class not in _SIGN_CHECKS:
        raise ValidationError(
            f"target {target.kind!r} declares curvature class "
            f"{target.curvature_class!r}; expected one of "
            f"{sorted(_SIGN_CHECKS)} — refusing to guess a comparison sign")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    _require_positive_mass(base_space, "curvature_comparison_suite")

    setup = trial_rng(seed, f"curvature/{target.kind}/setup", 0)
    base_values = tuple(target.random_point(setup)
                        for _ in range(len(base_space)))
    family = MappingFamily(base_space, target, base_values)
    mass = base_space.total_mass

    rows = []
    residuals = []
    embedded = []
    transfer = []
    for trial in range(int(trials)):
        rng = trial_rng(seed, f"curvature/{target.kind}", trial)
        f, g = geodesic_safe_mapping_pair(family, rng)
        z = family.random_mapping(rng)
        t = float(rng.uniform(0.0, 1.0))
        res = mapping_comparison_residual(z, f, g, t)

        y0, y1 = geodesic_safe_pair(target, rng)
        w0 = target.random_point(rng)
        t0 = float(rng.uniform(0.0, 1.0))
        target_res = target.comparison_residual(w0, y0, y1, t0)
        emb = mapping_comparison_residual(
            family.constant_mapping(w0), family.constant_mapping(y0),
            family.constant_mapping(y1), t0)
        residuals.append(res)
        embedded.append(emb)
        transfer.append(abs(emb - mass * target_res))
        rows.append((trial, t, res, emb))

    res_min, res_max = min(residuals), max(residuals)
    emb_min, emb_max = min(embedded), max(embedded)
    failures = []
    cls = target.curvature_class
    for label, lo, hi in (("comparison_sign", res_min, res_max),
                          ("embedded_comparison_sign", emb_min, emb_max)):
        if cls == GLOBAL_NPC and hi > sign_tol:
            failures.append(
                f"{label}_npc: max residual {hi!r} exceeds {sign_tol!r}; "
                f"expected residual {_SIGN_CHECKS[cls]}")
        elif cls == GLOBAL_NNC and lo < -sign_tol:
            failures.append(
                f"{label}_nnc: min residual {lo!r} below {-sign_tol!r}; "
                f"expected residual {_SIGN_CHECKS[cls]}")
        elif cls == FLAT and max(abs(lo), abs(hi)) > flat_tol:
            failures.append(
                f"{label}_flat: |residual| reaches "
                f"{max(abs(lo), abs(hi))!r}, exceeding {flat_tol!r}; "
                f"expected residual {_SIGN_CHECKS[cls]}")
    transfer_tol = 1e-10 * max(1.0, mass)
    if max(transfer) > transfer_tol:
        failures.append(
            f"embedding_rescale: |embedded - mass * target| reaches "
            f"{max(transfer)!r}, exceeding {transfer_tol!r}; the constant "
            "embedding must rescale comparison residuals by the total mass")

    return CurvatureReport(
        target_kind=target.kind,
        curvature_class=cls,
        n_trials=int(trials),
        residual_min=float(res_min),
        residual_max=float(res_max),
        embedded_min=float(emb_min),
        embedded_max=float(emb_max),
        embedded_transfer_max=float(max(transfer)),
        passed=not failures,
        failures=tuple(failures),
        rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# Length-space certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthReport:
    """Outcome of the energy/length certification on one target."""

    target_kind: str
    p: float
    n_trials: int
    max_upper_excess: float
    max_equality_gap_rel: float
    passed: bool
    failures: tuple[str, ...]
    rows: tuple[tuple, ...]  # (trial, scaled_energy, distance_power)


def default_equality_tol(target: TargetSpace) -> float:
    """Relative tolerance for energy = distance-power on geodesics."""
    if target.curvature_class == FLAT:
        return 1e-12
    if not target.has_chart:  # metric trees: exact path arithmetic
        return 1e-9
    return 1e-8


def length_space_check(target: TargetSpace,
                       base_space: FiniteMeasureSpace,
                       p,
                       trials: int,
                       seed: int = 0,
                       kappa: float = 1.0 + 1e-6,
                       n_nodes: int = 33,
                       equality_tol: float | None = None) -> LengthReport:
    """Certify ``(b - a)^{p-1} E_p(c) <= kappa^p D_p(f, g)^p`` on geodesics,
    with equality up to a relative tolerance.

    ``p`` must be finite with ``p > 1`` (the scaling ``(b - a)^{p-1}`` is
    vacuous at ``p = 1`` and the energy is undefined at ``p = inf``).
    """
    p = check_p(p, allow_inf=False)
    if p <= 1.0:
        raise ValidationError(f"length_space_check requires p > 1, got {p!r}")
    kappa = float(kappa)
    if kappa <= 1.0:
        raise ValidationError(f"kappa must exceed 1, got {kappa!r}")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    _require_positive_mass(base_space, "length_space_check")
    if equality_tol is None:
        equality_tol = default_equality_tol(target)

    setup = trial_rng(seed, f"length/{target.kind}/setup", 0)
    base_values = tuple(target.random_point(setup)
                        for _ in range(len(base_space)))
    family = MappingFamily(base_space, target, base_values)

    rows = []
    upper_excess = []
    equality_gaps = []
    failures = []
    for trial in range(int(trials)):
        rng = trial_rng(seed, f"length/{target.kind}/p={p!r}", trial)
        f, g = geodesic_safe_mapping_pair(family, rng)
        geo = lp_geodesic(f, g, p, n_nodes=n_nodes)
        a, b = geo.interval
        scaled_energy = (b - a) ** (p - 1.0) * energy(geo.curve, p)
        dist_power = d_p(f, g, p) ** p
        rows.append((trial, scaled_energy, dist_power))
        upper_excess.append(scaled_energy - kappa ** p * dist_power)
        denom = max(dist_power, 1e-300)
        equality_gaps.append(abs(scaled_energy - dist_power) / denom)

    max_excess = max(upper_excess)
    max_gap = max(equality_gaps)
    slack = 1e-12 * max(1.0, max(r[2] for r in rows))
    if max_excess > slack:
        failures.append(
            f"energy_length_upper: scaled energy exceeds kappa^p * D_p^p by "
            f"{max_excess!r} (> {slack!r}); the energy of any curve joining "
            "two mappings must control their distance power")
    if max_gap > equality_tol:
        failures.append(
            f"geodesic_energy_equality: relative gap {max_gap!r} exceeds "
            f"{equality_tol!r}; on geodesics the scaled energy must equal "
            "the endpoint distance power")

    return LengthReport(
        target_kind=target.kind,
        p=float(p),
        n_trials=int(trials),
        max_upper_excess=float(max_excess),
        max_equality_gap_rel=float(max_gap),
        passed=not failures,
        failures=tuple(failures),
        rows=tuple(rows),
    )


def reparam_length_certificate(curve: SampledCurve, p, eps: float
                               ) -> tuple[float, float]:
    """Reparametrize and report ``((b-a)^{p-1} E_p / L^p, (1 + eps)^p)``.

    The first component is the achieved energy ratio after constant-speed
    reparametrization with slack ``eps``; the certification is that it does
    not exceed the second component (for curves of length not far below 1
    the additive slack converts to at most this multiplicative budget).
    """
    p = check_p(p, allow_inf=False)
    total = length(curve)
    if total <= 0.0:
        raise ValidationError(
            "reparam_length_certificate needs a curve of positive length")
    re = constant_speed_reparam(curve, eps)
    a, b = re.interval
    ratio = (b - a) ** (p - 1.0) * energy(re, p) / total ** p
    return float(ratio), float((1.0 + float(eps)) ** p)
