"""Deterministic experiment suites.

Each ``run_*`` function executes one battery of checks and returns a
:class:`SuiteResult` with JSON-able metrics, a pass flag, the names of any
failed invariants, and CSV-ready tables.  All randomness flows through
counter-based streams keyed by ``(seed, suite name, trial index)``
(:func:`nlsp.rng.trial_rng`), and trial results are collected in index
order, so every suite produces byte-identical output for a fixed seed
regardless of the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    SampledCurve,
    StepCurve,
    constant_speed_reparam,
    energy,
    length,
    metric_derivative,
    skorokhod_distance,
    variation,
    variation_measure,
)
from .errors import ValidationError
from .geometry import (
    curvature_comparison_suite,
    constant_speed_residual,
    geodesic_safe_pair,
    geodesic_speed_check,
    length_space_check,
    lp_geodesic,
    start_aligned_residuals,
)
from .mappings import (
    FiniteMeasureSpace,
    LpSpace,
    MappingFamily,
    MetricMapping,
    ProductGridMapping,
    TimeGrid,
    d_p,
    product_lp_norm,
)
from .rng import trial_rng
from .sections import D_pp, d_pp, sec_atom, sec_time, transpose, transpose_inverse
from .speed import (
    atomwise_consistency_gap,
    bundle_norms,
    compute_speed,
    speed_identity_residual,
)
from .targets import Euclidean, MetricTree, Spd, Sphere, TargetSpace
from .transport import (
    CSV_HEADER_COUNTEREXAMPLE,
    counterexample_p1,
    decompose_ac,
    decompose_bv,
    derivative_identity_residual,
    variation_identity_residual,
)

#: Residual maxima below this floor are treated as exactly converged when
#: estimating empirical decay orders: the measured quantity is identically
#: zero and only arithmetic noise remains.
CONVERGENCE_FLOOR = 1e-12


@dataclass
class SuiteResult:
    """Outcome of one experiment suite."""

    name: str
    passed: bool
    metrics: dict
    failures: list[str] = field(default_factory=list)
    csv: dict[str, list[list]] = field(default_factory=dict)


def map_trials(fn, n: int, threads: int = 1) -> list:
    """Run ``fn(0..n-1)`` and collect results in index order.

    With ``threads > 1`` the trials run on a thread pool; because every
    trial seeds its own random stream and the results are gathered in
    index order, the output is identical to the serial run.
    """
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(i) for i in range(n)]


def decay_order(maxima, floor: float = CONVERGENCE_FLOOR) -> float:
    """Smallest log2 decay rate between successive grid maxima.

    Returns ``inf`` when all maxima sit below ``floor``: the residual is
    already at the roundoff level of an exact identity, so there is nothing
    left to decay.
    """
    maxima = [float(m) for m in maxima]
    if len(maxima) < 2:
        raise ValidationError("decay_order needs at least two grid maxima")
    if max(maxima) <= floor:
        return math.inf
    orders = []
    for coarse, fine in zip(maxima, maxima[1:]):
        if fine <= 0.0:
            orders.append(math.inf)
        elif coarse <= 0.0:
            orders.append(-math.inf)
        else:
            orders.append(math.log2(coarse / fine))
    return min(orders)


def order_jsonable(order: float):
    """Represent a decay order in JSON-friendly form."""
    if math.isinf(order):
        return "inf" if order > 0 else "-inf"
    return float(order)


# ---------------------------------------------------------------------------
# Shared samplers
# ---------------------------------------------------------------------------

DEFAULT_TREE_EDGES = (
    ("root", "a", 1.0),
    ("root", "b", 2.0),
    ("a", "c", 1.5),
    ("a", "d", 0.7),
    ("b", "e", 1.2),
)


def default_tree() -> MetricTree:
    return MetricTree(DEFAULT_TREE_EDGES)


def random_base_space(rng: np.random.Generator, n_atoms: int,
                      zero_atom: bool = False,
                      prefix: str = "x") -> FiniteMeasureSpace:
    """Random positive weights, optionally with one zero-weight atom."""
    weights = rng.uniform(0.25, 1.0, n_atoms)
    if zero_atom and n_atoms > 1:
        weights[int(rng.integers(n_atoms))] = 0.0
    return FiniteMeasureSpace(
        tuple(f"{prefix}{j}" for j in range(n_atoms)),
        tuple(float(w) for w in weights))


def random_family(target: TargetSpace, rng: np.random.Generator,
                  n_atoms: int, zero_atom: bool = False) -> MappingFamily:
    space = random_base_space(rng, n_atoms, zero_atom)
    return MappingFamily(
        space, target,
        tuple(target.random_point(rng) for _ in range(n_atoms)))


@dataclass(frozen=True)
class SmoothLpPath:
    """A smooth curve of mappings, realizable on any time grid.

    Every atom travels along a fixed target geodesic with a smooth,
    strictly monotone time warp ``phi_j(t) = delta + (1 - 2 delta) t +
    a_j sin(2 pi t + theta_j) / (2 pi)``; the warp stays inside ``(0, 1)``
    and its small amplitude keeps the one-sided/centered difference gap
    well inside the tolerances that the convergence batteries certify.
    """

    family: MappingFamily
    p: float
    anchors: tuple  # per atom: (start point, end point)
    wiggles: tuple[tuple[float, float], ...]  # per atom: (amplitude, phase)
    delta: float = 0.05

    def warp(self, j: int, t: float) -> float:
        amp, phase = self.wiggles[j]
        return (self.delta + (1.0 - 2.0 * self.delta) * t
                + amp * math.sin(2.0 * math.pi * t + phase) / (2.0 * math.pi))

    def materialize(self, n_nodes: int) -> SampledCurve:
        """Sample the path at ``n_nodes`` uniform times on [0, 1]."""
        tgt = self.family.target
        times = np.linspace(0.0, 1.0, int(n_nodes))
        node_mappings = []
        for t in times:
            vals = tuple(
                tgt.geodesic_point(y, z, self.warp(j, float(t)))
                for j, (y, z) in enumerate(self.anchors))
            node_mappings.append(MetricMapping(self.family, vals))
        return SampledCurve(LpSpace(self.family, self.p),
                            tuple(float(t) for t in times),
                            tuple(node_mappings))


def sample_smooth_path(target: TargetSpace, rng: np.random.Generator,
                       p: float = 2.0, n_atoms: int = 4) -> SmoothLpPath:
    """Draw a smooth random path of mappings (one geodesic leg per atom)."""
    space = FiniteMeasureSpace(
        tuple(f"x{j}" for j in range(n_atoms)),
        tuple(float(w) for w in rng.uniform(0.5, 1.5, n_atoms) / n_atoms))
    base = tuple(target.random_point(rng) for _ in range(n_atoms))
    family = MappingFamily(space, target, base)
    anchors = []
    wiggles = []
    for _ in range(n_atoms):
        y = target.random_point(rng)
        leg = float(rng.uniform(0.4, 0.8))
        z = target.exp_map(y, target.random_tangent(y, rng, norm=leg))
        anchors.append((y, z))
        wiggles.append((float(rng.uniform(0.04, 0.06)),
                        float(rng.uniform(0.0, 2.0 * math.pi))))
    return SmoothLpPath(family=family, p=float(p), anchors=tuple(anchors),
                        wiggles=tuple(wiggles))


def _nonuniform_times(rng: np.random.Generator, n_nodes: int,
                      a: float = 0.0, b: float = 1.0) -> tuple[float, ...]:
    incr = rng.uniform(0.5, 1.5, n_nodes - 1)
    cum = np.concatenate([[0.0], np.cumsum(incr)])
    cum = a + (b - a) * cum / cum[-1]
    cum[0], cum[-1] = a, b
    return tuple(float(t) for t in cum)


def polyline_curve(target: TargetSpace, rng: np.random.Generator,
                   legs: int = 3, n_nodes: int = 33) -> SampledCurve:
    """Piecewise-geodesic curve through random waypoints, nonuniform times.

    Consecutive waypoints are a geodesic leg of length 0.5 to 0.9 apart,
    so the curve's chordal length is at least ``legs / 2``.
    """
    waypoints = [target.random_point(rng)]
    for _ in range(legs):
        step = float(rng.uniform(0.5, 0.9))
        waypoints.append(target.exp_map(
            waypoints[-1], target.random_tangent(waypoints[-1], rng, norm=step)))
    times = _nonuniform_times(rng, n_nodes)
    values = []
    for k in range(n_nodes):
        u = k / (n_nodes - 1) * legs
        leg = min(int(u), legs - 1)
        values.append(target.geodesic_point(
            waypoints[leg], waypoints[leg + 1], u - leg))
    return SampledCurve(target, times, tuple(values))


def polyline_mapping_curve(target: TargetSpace, rng: np.random.Generator,
                           n_atoms: int = 3, p: float = 2.0, legs: int = 3,
                           n_nodes: int = 33) -> SampledCurve:
    """Piecewise-geodesic curve of mappings (same waypoint scheme per atom)."""
    family = random_family(target, rng, n_atoms)
    atom_ways = []
    for j in range(n_atoms):
        pts = [target.random_point(rng)]
        for _ in range(legs):
            step = float(rng.uniform(0.5, 0.9))
            pts.append(target.exp_map(
                pts[-1], target.random_tangent(pts[-1], rng, norm=step)))
        atom_ways.append(pts)
    times = _nonuniform_times(rng, n_nodes)
    node_mappings = []
    for k in range(n_nodes):
        u = k / (n_nodes - 1) * legs
        leg = min(int(u), legs - 1)
        vals = tuple(
            target.geodesic_point(atom_ways[j][leg], atom_ways[j][leg + 1],
                                  u - leg)
            for j in range(n_atoms))
        node_mappings.append(MetricMapping(family, vals))
    return SampledCurve(LpSpace(family, p), times, tuple(node_mappings))


def random_step_curve(space, value_sampler, rng: np.random.Generator,
                      pieces: int) -> StepCurve:
    """Step curve on [0, 1] with random interior breakpoints and values."""
    if pieces < 1:
        raise ValidationError(f"need at least one piece, got {pieces}")
    while True:
        interior = np.sort(rng.uniform(0.08, 0.92, pieces - 1))
        if pieces == 1 or np.min(np.diff(np.concatenate(
                [[0.0], interior, [1.0]]))) >= 0.02:
            break
    breaks = (0.0, *(float(t) for t in interior), 1.0)
    return StepCurve(space, breaks, tuple(value_sampler() for _ in range(pieces)))


# ---------------------------------------------------------------------------
# Suite: product-norm consistency (time-major vs atom-major vs joint)
# ---------------------------------------------------------------------------


def run_fubini(seed: int = 7, trials: int = 100, threads: int = 1,
               rel_tol: float = 1e-13,
               p_values: tuple[float, ...] = (1.0, 2.0, 3.0, math.inf)
               ) -> SuiteResult:
    """Both iterated norms must match the joint product norm exactly.

    Random product mappings on a 16-node x 8-atom grid, exponents
    ``{1, 2, 3, inf}`` by default, alternating flat and spherical targets,
    with zero-weight atoms and both grid rules represented.
    """
    p_values = tuple(float(p) for p in p_values)

    def one_trial(i: int):
        rng = trial_rng(seed, "fubini", i)
        target = Sphere(3) if i % 2 == 0 else Euclidean(2)
        family = random_family(target, rng, 8, zero_atom=(i % 4 == 0))
        grid = TimeGrid(_nonuniform_times(rng, 16),
                        "trapezoid" if i % 2 == 0 else "left_cells")
        rows = len(grid)
        c1 = ProductGridMapping(grid, family, tuple(
            tuple(target.random_point(rng) for _ in range(8))
            for _ in range(rows)))
        c2 = ProductGridMapping(grid, family, tuple(
            tuple(target.random_point(rng) for _ in range(8))
            for _ in range(rows)))
        worst_time = worst_atom = 0.0
        for p in p_values:
            joint = product_lp_norm(c1, c2, p)
            time_major = d_pp(sec_time(c1), sec_time(c2), p)
            atom_major = D_pp(sec_atom(c1), sec_atom(c2), p)
            denom = max(joint, 1e-300)
            worst_time = max(worst_time, abs(time_major - joint) / denom)
            worst_atom = max(worst_atom, abs(atom_major - joint) / denom)
        cm = sec_time(c1)
        back = transpose_inverse(transpose(cm))
        roundtrip = all(
            back.mappings[k].values[j] is cm.mappings[k].values[j]
            for k in range(rows) for j in range(8))
        return worst_time, worst_atom, roundtrip

    results = map_trials(one_trial, int(trials), threads)
    max_time = max(r[0] for r in results)
    max_atom = max(r[1] for r in results)
    roundtrip_ok = all(r[2] for r in results)

    failures = []
    if max_time > rel_tol:
        failures.append(
            f"iterated_norm_time_major: relative gap {max_time!r} exceeds "
            f"{rel_tol!r}; integrating time outside atoms must reproduce "
            "the joint product norm")
    if max_atom > rel_tol:
        failures.append(
            f"iterated_norm_atom_major: relative gap {max_atom!r} exceeds "
            f"{rel_tol!r}; integrating atoms outside time must reproduce "
            "the joint product norm")
    if not roundtrip_ok:
        failures.append(
            "transpose_roundtrip: transposing to the atom-major reading and "
            "back must reuse every point object")

    csv_rows = [["trial", "rel_gap_time_major", "rel_gap_atom_major"]]
    csv_rows += [[i, r[0], r[1]] for i, r in enumerate(results)]
    return SuiteResult(
        name="fubini",
        passed=not failures,
        metrics={
            "trials": int(trials),
            "p_values": [order_jsonable(p) for p in p_values],
            "max_rel_gap_time_major": float(max_time),
            "max_rel_gap_atom_major": float(max_atom),
            "transpose_roundtrip_exact": bool(roundtrip_ok),
        },
        failures=failures,
        csv={"fubini_trials": csv_rows},
    )


# ---------------------------------------------------------------------------
# Suite: transport (derivative identity, variation identity)
# ---------------------------------------------------------------------------


def run_transport(seed: int = 7, curves: int = 20,
                  grids: tuple[int, ...] = (65, 129, 257),
                  bv_curves: int = 100, threads: int = 1,
                  residual_tol: float = 2e-3, order_min: float = 0.9,
                  variation_tol: float = 1e-12, p: float = 2.0) -> SuiteResult:
    """Atomwise slicing preserves speed (p > 1) and variation (p = 1).

    Smooth random curves of mappings into spherical and SPD targets are
    sliced atom by atom; the weighted p-power of per-atom speeds must
    reproduce the curve's metric derivative power, with residual maxima
    shrinking across grid refinements (identically-zero residuals count as
    converged).  Random step curves are sliced the same way and the jump
    variation must match the weighted per-atom variations on every tested
    subinterval.
    """
    grids = tuple(int(n) for n in grids)
    targets = (Sphere(3), Spd(2))
    ac_metrics = {}
    failures = []
    csv_identity = [["target", "grid", "max_interior_residual"]]

    p = float(p)
    for target in targets:
        def one_curve(ci: int, _target=target):
            path = sample_smooth_path(
                _target, trial_rng(seed, f"transport/{_target.kind}", ci), p=p)
            maxima = []
            for n in grids:
                curve = path.materialize(n)
                dec = decompose_ac(curve, p)
                res = derivative_identity_residual(dec)
                maxima.append(float(np.max(np.abs(res[1:-1]))))
            return maxima

        per_curve = map_trials(one_curve, int(curves), threads)
        grid_maxima = [max(m[k] for m in per_curve) for k in range(len(grids))]
        order = decay_order(grid_maxima)
        at_floor = max(grid_maxima) <= CONVERGENCE_FLOOR
        for n, m in zip(grids, grid_maxima):
            csv_identity.append([target.kind, n, m])
        ac_metrics[target.kind] = {
            "residual_maxima": [float(m) for m in grid_maxima],
            "order": order_jsonable(order),
            "at_roundoff_floor": bool(at_floor),
        }
        if grid_maxima[-1] > residual_tol:
            failures.append(
                f"derivative_identity_residual[{target.kind}]: max interior "
                f"residual {grid_maxima[-1]!r} at the finest grid exceeds "
                f"{residual_tol!r}; slicing must preserve the weighted "
                "speed-power identity")
        if order < order_min:
            failures.append(
                f"derivative_identity_order[{target.kind}]: empirical decay "
                f"order {order!r} is below {order_min!r} across grids "
                f"{list(grids)}")

    def one_bv(i: int):
        rng = trial_rng(seed, "transport/bv", i)
        target = Euclidean(2) if i % 2 == 0 else default_tree()
        family = random_family(target, rng, 3 + i % 3, zero_atom=(i % 5 == 0))
        space = LpSpace(family, 1.0)
        curve = random_step_curve(
            space, lambda: family.random_mapping(rng), rng, pieces=3 + i % 4)
        dec = decompose_bv(curve)
        worst = abs(variation_identity_residual(dec))
        vm = variation_measure(curve)
        measure_gap = 0.0
        for _ in range(10):
            s, t = sorted(rng.uniform(0.0, 1.0, 2))
            worst = max(worst, abs(variation_identity_residual(dec, (s, t))))
            measure_gap = max(measure_gap, abs(
                vm.of_open_interval(s, t) - variation(curve, (s, t))))
        return float(worst), float(measure_gap)

    bv_results = map_trials(one_bv, int(bv_curves), threads)
    bv_max = max(r[0] for r in bv_results)
    measure_max = max(r[1] for r in bv_results)
    if bv_max > variation_tol:
        failures.append(
            f"variation_identity_residual: worst residual {bv_max!r} exceeds "
            f"{variation_tol!r}; jump variation must equal the weighted sum "
            "of per-atom variations on every subinterval")
    if measure_max > 0.0:
        failures.append(
            f"variation_measure_consistency: the jump measure differed from "
            f"direct variation by {measure_max!r}; open intervals of the "
            "measure must reproduce the variation exactly")

    csv_bv = [["curve", "max_identity_residual", "max_measure_gap"]]
    csv_bv += [[i, r[0], r[1]] for i, r in enumerate(bv_results)]
    return SuiteResult(
        name="transport",
        passed=not failures,
        metrics={
            "curves": int(curves),
            "grids": list(grids),
            "derivative_identity": ac_metrics,
            "bv_curves": int(bv_curves),
            "max_variation_residual": float(bv_max),
            "max_measure_gap": float(measure_max),
        },
        failures=failures,
        csv={"transport_identity": csv_identity, "transport_bv": csv_bv},
    )


# ---------------------------------------------------------------------------
# Suite: the p = 1 counterexample
# ---------------------------------------------------------------------------


def run_counterexample(seed: int = 7, sizes: tuple[int, ...] = (4, 16, 64),
                       refinements: tuple[int, ...] = (1, 2, 4),
                       tv_tol: float = 1e-12) -> SuiteResult:
    """Lipschitz curve of mappings whose atom slices all jump.

    For each size the moving-indicator curve must have difference quotients
    within ``2/n`` of 1, per-atom moduli exactly 1 at every refinement, and
    weighted jump variation 1.
    """
    del seed  # the construction is fully deterministic
    failures = []
    rows = [list(CSV_HEADER_COUNTEREXAMPLE)]
    reports = []
    for n in sizes:
        rep = counterexample_p1(int(n), refinements)
        reports.append(rep)
        rows.append(rep.csv_row())
        lo_bound, hi_bound = 1.0 - 2.0 / n, 1.0 + 2.0 / n
        if not (lo_bound <= rep.lipschitz_lo and rep.lipschitz_hi <= hi_bound):
            failures.append(
                f"counterexample_lipschitz[n={n}]: difference quotients "
                f"[{rep.lipschitz_lo!r}, {rep.lipschitz_hi!r}] leave "
                f"[{lo_bound!r}, {hi_bound!r}]; the indicator curve must be "
                "uniformly Lipschitz in the mean distance")
        for r, modulus in rep.atom_moduli:
            if abs(modulus - 1.0) > 1e-12:
                failures.append(
                    f"counterexample_modulus[n={n},refine={r}]: per-atom "
                    f"modulus {modulus!r} differs from 1; refining the grid "
                    "must never shrink the unit atom jumps")
        if abs(rep.total_variation - 1.0) > tv_tol:
            failures.append(
                f"counterexample_variation[n={n}]: weighted jump variation "
                f"{rep.total_variation!r} differs from 1 beyond {tv_tol!r}")

    return SuiteResult(
        name="counterexample",
        passed=not failures,
        metrics={
            "sizes": [int(n) for n in sizes],
            "refinements": [int(r) for r in refinements],
            "lipschitz_lo": min(r.lipschitz_lo for r in reports),
            "lipschitz_hi": max(r.lipschitz_hi for r in reports),
            "max_atom_modulus": max(r.max_atom_modulus for r in reports),
            "total_variation_max_gap": max(
                abs(r.total_variation - 1.0) for r in reports),
        },
        failures=failures,
        csv={"counterexample_p1": rows},
    )


# ---------------------------------------------------------------------------
# Suite: geodesics
# ---------------------------------------------------------------------------


def run_geodesic(seed: int = 7, trials: int = 3,
                 p_values: tuple[float, ...] = (1.5, 2.0, 3.0),
                 n_nodes: int = 17, threads: int = 1,
                 residual_tol: float = 1e-9,
                 targets: tuple[TargetSpace, ...] | None = None,
                 base_space: FiniteMeasureSpace | None = None) -> SuiteResult:
    """Atomwise geodesics are constant-speed with length equal to distance.

    Spherical, SPD and tree targets (or the configured target), several
    exponents; checks the node-pair linearity of the mapping distance, the
    per-atom speed deviation, and length against endpoint distance.
    """
    trace_target = Spd(2) if targets is None else targets[0]
    if targets is None:
        targets = (Sphere(3), Spd(2), default_tree())
    if base_space is None:
        base_space = FiniteMeasureSpace(("x0", "x1", "x2"), (1.0, 2.0, 1.0))
    combos = [(t, p) for t in targets for p in p_values]
    failures = []
    worst = {"constant_speed": 0.0, "atom_speed": 0.0, "length_rel": 0.0}
    trace_rows = [["t", "distance_from_start", "constant_speed_residual"]]

    def one_combo(idx: int):
        target, p = combos[idx]
        setup = trial_rng(seed, f"geodesic/{target.kind}/p={p!r}/setup", 0)
        family = MappingFamily(
            base_space, target,
            tuple(target.random_point(setup) for _ in range(len(base_space))))
        out = []
        for trial in range(int(trials)):
            rng = trial_rng(seed, f"geodesic/{target.kind}/p={p!r}", trial)
            pairs = [geodesic_safe_pair(target, rng)
                     for _ in range(len(base_space))]
            f = MetricMapping(family, tuple(a for a, _ in pairs))
            g = MetricMapping(family, tuple(b for _, b in pairs))
            geo = lp_geodesic(f, g, p, n_nodes=int(n_nodes))
            csr = constant_speed_residual(geo)
            atom_dev = geodesic_speed_check(geo)
            total = geo.endpoint_distance()
            len_rel = abs(length(geo.curve) - total) / max(total, 1e-300)
            out.append((csr, atom_dev, len_rel))
        return out

    all_results = map_trials(one_combo, len(combos), threads)
    for (target, p), results in zip(combos, all_results):
        for csr, atom_dev, len_rel in results:
            worst["constant_speed"] = max(worst["constant_speed"], csr)
            worst["atom_speed"] = max(worst["atom_speed"], atom_dev)
            worst["length_rel"] = max(worst["length_rel"], len_rel)

    # Representative trace for the CSV artifact (first target, p = 2).
    setup = trial_rng(seed, "geodesic/trace/setup", 0)
    family = MappingFamily(
        base_space, trace_target,
        tuple(trace_target.random_point(setup) for _ in range(len(base_space))))
    rng = trial_rng(seed, "geodesic/trace", 0)
    pairs = [geodesic_safe_pair(trace_target, rng)
             for _ in range(len(base_space))]
    geo = lp_geodesic(MetricMapping(family, tuple(a for a, _ in pairs)),
                      MetricMapping(family, tuple(b for _, b in pairs)),
                      2.0, n_nodes=int(n_nodes))
    aligned = start_aligned_residuals(geo)
    for i, t in enumerate(geo.curve.times):
        trace_rows.append([t,
                           d_p(geo.curve.values[0], geo.curve.values[i], 2.0),
                           float(aligned[i])])

    if worst["constant_speed"] > residual_tol:
        failures.append(
            f"geodesic_constant_speed: node-pair linearity residual "
            f"{worst['constant_speed']!r} exceeds {residual_tol!r}; the "
            "mapping distance along a geodesic must be affine in time")
    if worst["atom_speed"] > residual_tol:
        failures.append(
            f"geodesic_atom_speed: per-atom speed deviation "
            f"{worst['atom_speed']!r} exceeds {residual_tol!r}; every atom "
            "must traverse its target geodesic at constant speed")
    if worst["length_rel"] > residual_tol:
        failures.append(
            f"geodesic_length: relative length gap {worst['length_rel']!r} "
            f"exceeds {residual_tol!r}; geodesic length must equal the "
            "endpoint distance")

    return SuiteResult(
        name="geodesic",
        passed=not failures,
        metrics={
            "targets": [t.kind for t in targets],
            "p_values": [float(p) for p in p_values],
            "trials": int(trials),
            "n_nodes": int(n_nodes),
            "max_constant_speed_residual": float(worst["constant_speed"]),
            "max_atom_speed_deviation": float(worst["atom_speed"]),
            "max_length_rel_gap": float(worst["length_rel"]),
        },
        failures=failures,
        csv={"geodesic_trace": trace_rows},
    )


# ---------------------------------------------------------------------------
# Suite: curvature comparison
# ---------------------------------------------------------------------------

_DEFAULT_CURVATURE_BASE = (("x0", 0.5), ("x1", 1.0), ("x2", 0.25))


def run_curvature(seed: int = 7, trials: int = 500, threads: int = 1,
                  sign_tol: float = 1e-8, flat_tol: float = 1e-10,
                  targets: tuple[TargetSpace, ...] | None = None,
                  base_space: FiniteMeasureSpace | None = None) -> SuiteResult:
    """Comparison signs transfer from targets to mapping spaces.

    SPD targets must keep the squared-distance comparison residual
    nonpositive, spheres nonnegative, flat targets at zero, and the
    constant-mapping embedding must rescale target residuals by the total
    mass without changing signs.
    """
    if targets is None:
        targets = (Spd(2), Sphere(3), Euclidean(2))
    if base_space is None:
        base_space = FiniteMeasureSpace(
            tuple(a for a, _ in _DEFAULT_CURVATURE_BASE),
            tuple(w for _, w in _DEFAULT_CURVATURE_BASE))

    reports = map_trials(
        lambda i: curvature_comparison_suite(
            targets[i], base_space, int(trials), seed=seed,
            sign_tol=sign_tol, flat_tol=flat_tol),
        len(targets), threads)

    failures = []
    metrics = {"trials": int(trials), "targets": {}}
    csv_rows = [["target", "trial", "t", "residual", "embedded_residual"]]
    abs_max = 0.0
    for report in reports:
        metrics["targets"][report.target_kind] = {
            "curvature_class": report.curvature_class,
            "residual_min": report.residual_min,
            "residual_max": report.residual_max,
            "embedded_min": report.embedded_min,
            "embedded_max": report.embedded_max,
            "embedded_transfer_max": report.embedded_transfer_max,
        }
        abs_max = max(abs_max, abs(report.residual_min),
                      abs(report.residual_max))
        failures.extend(f"{report.target_kind}.{f}" for f in report.failures)
        for trial, t, res, emb in report.rows:
            csv_rows.append([report.target_kind, trial, t, res, emb])
    metrics["residual_max"] = float(max(r.residual_max for r in reports))
    metrics["residual_abs_max"] = float(abs_max)

    return SuiteResult(
        name="curvature",
        passed=not failures,
        metrics=metrics,
        failures=failures,
        csv={"curvature_residuals": csv_rows},
    )


# ---------------------------------------------------------------------------
# Suite: length-space structure and reparametrization
# ---------------------------------------------------------------------------


def run_length(seed: int = 7, trials: int = 12,
               p_values: tuple[float, ...] = (1.5, 2.0, 3.0),
               reparam_curves: int = 50, eps: float = 1e-6,
               n_nodes: int = 17, threads: int = 1,
               equality_tol: float | None = None) -> SuiteResult:
    """Energy controls distance, geodesics saturate it, reparametrization
    reaches the bound within ``(1 + eps)^p``.
    """
    targets = (Euclidean(2), Sphere(3), Spd(2), default_tree())
    base_space = FiniteMeasureSpace(("x0", "x1", "x2"), (0.75, 1.25, 0.5))
    combos = [(t, p) for t in targets for p in p_values]

    reports = map_trials(
        lambda i: length_space_check(
            combos[i][0], base_space, combos[i][1], int(trials), seed=seed,
            n_nodes=int(n_nodes), equality_tol=equality_tol),
        len(combos), threads)

    failures = []
    metrics = {"trials": int(trials), "targets": {}, "p_values": list(p_values)}
    csv_rows = [["target", "p", "trial", "scaled_energy", "distance_power"]]
    for (target, p), report in zip(combos, reports):
        key = f"{report.target_kind}/p={p}"
        metrics["targets"][key] = {
            "max_upper_excess": report.max_upper_excess,
            "max_equality_gap_rel": report.max_equality_gap_rel,
        }
        failures.extend(f"{key}.{f}" for f in report.failures)
        for trial, se, dp_pow in report.rows:
            csv_rows.append([report.target_kind, p, trial, se, dp_pow])

    # Reparametrization battery: mixed plain-target and mapping-space
    # curves, all of length >= 1 so the additive slack eps stays within the
    # multiplicative budget (1 + eps)^p.
    def one_reparam(i: int):
        rng = trial_rng(seed, "length/reparam", i)
        kind = i % 3
        if kind == 0:
            curve = polyline_curve(Euclidean(2), rng)
        elif kind == 1:
            curve = polyline_curve(Sphere(3), rng)
        else:
            curve = polyline_mapping_curve(Sphere(3), rng)
        total = length(curve)
        if total < 1.0:  # pragma: no cover - legs guarantee length >= 1.5
            raise ValidationError(
                f"reparam battery sampled a curve of length {total!r} < 1")
        re = constant_speed_reparam(curve, eps)
        a, b = re.interval
        worst_excess = -math.inf
        for p in p_values:
            ratio = (b - a) ** (p - 1.0) * energy(re, p) / total ** p
            worst_excess = max(worst_excess, ratio - (1.0 + eps) ** p)
        return float(worst_excess), float(abs(length(re) - total))

    reparam_results = map_trials(one_reparam, int(reparam_curves), threads)
    max_excess = max(r[0] for r in reparam_results)
    max_len_gap = max(r[1] for r in reparam_results)
    if max_excess > 1e-12:
        failures.append(
            f"reparam_energy_budget: scaled energy over length-power exceeds "
            f"(1 + eps)^p by {max_excess!r}; constant-speed retiming must "
            "drive the energy to the length bound")
    if max_len_gap > 1e-10:
        failures.append(
            f"reparam_length_invariance: length changed by {max_len_gap!r} "
            "under retiming; reparametrization must not move the values")

    metrics["reparam"] = {
        "curves": int(reparam_curves),
        "eps": float(eps),
        "max_budget_excess": float(max_excess),
        "max_length_gap": float(max_len_gap),
    }
    return SuiteResult(
        name="length",
        passed=not failures,
        metrics=metrics,
        failures=failures,
        csv={"length_check": csv_rows},
    )


# ---------------------------------------------------------------------------
# Suite: speed fields
# ---------------------------------------------------------------------------


def run_speed(seed: int = 7, curves: int = 6,
              grids: tuple[int, ...] = (65, 129, 257), threads: int = 1,
              residual_tol: float = 2e-3, order_min: float = 0.9,
              consistency_tol: float = 5e-3, p: float = 2.0) -> SuiteResult:
    """The bundle norm of log-map velocities matches the metric derivative.

    Smooth random curves into flat, spherical and SPD targets at ``p = 2``;
    the interior gap between the two speeds must shrink at first order in
    the time step, and the bundle norm power must agree with the weighted
    per-atom speed powers.
    """
    grids = tuple(int(n) for n in grids)
    mid_grid = grids[len(grids) // 2]
    targets = (Euclidean(2), Sphere(3), Spd(2))
    failures = []
    p = float(p)
    metrics = {"curves": int(curves), "grids": list(grids), "targets": {}}
    trace_rows = [["t", "metric_derivative", "bundle_norm", "residual"]]

    for target in targets:
        def one_curve(ci: int, _target=target):
            path = sample_smooth_path(
                _target, trial_rng(seed, f"speed/{_target.kind}", ci), p=p)
            maxima = []
            consistency = 0.0
            trace = None
            for n in grids:
                curve = path.materialize(n)
                dec = decompose_ac(curve, p)
                sf = compute_speed(dec)
                res = speed_identity_residual(sf)
                maxima.append(float(np.max(res[1:-1])))
                if n == mid_grid:
                    consistency = atomwise_consistency_gap(sf)
                if ci == 0 and _target.kind == "spd" and n == grids[-1]:
                    md = metric_derivative(curve)
                    bn = bundle_norms(sf)
                    trace = [[t, float(md[k]), float(bn[k]), float(res[k])]
                             for k, t in enumerate(curve.times)]
            return maxima, float(consistency), trace

        per_curve = map_trials(one_curve, int(curves), threads)
        grid_maxima = [max(r[0][k] for r in per_curve)
                       for k in range(len(grids))]
        cons_max = max(r[1] for r in per_curve)
        order = decay_order(grid_maxima)
        for r in per_curve:
            if r[2] is not None:
                trace_rows.extend(r[2])
        metrics["targets"][target.kind] = {
            "residual_maxima": [float(m) for m in grid_maxima],
            "order": order_jsonable(order),
            "consistency_rel_max": float(cons_max),
        }
        if grid_maxima[-1] > residual_tol:
            failures.append(
                f"speed_identity_residual[{target.kind}]: max interior gap "
                f"{grid_maxima[-1]!r} at the finest grid exceeds "
                f"{residual_tol!r}; the bundle norm must converge to the "
                "metric derivative")
        if order < order_min:
            failures.append(
                f"speed_identity_order[{target.kind}]: empirical decay order "
                f"{order!r} is below {order_min!r} across grids {list(grids)}")
        if cons_max > consistency_tol:
            failures.append(
                f"bundle_consistency[{target.kind}]: relative gap "
                f"{cons_max!r} between the bundle norm power and the "
                f"weighted per-atom speed powers exceeds {consistency_tol!r}")

    return SuiteResult(
        name="speed",
        passed=not failures,
        metrics=metrics,
        failures=failures,
        csv={"speed_trace": trace_rows},
    )


# ---------------------------------------------------------------------------
# Suite: Skorokhod bounds
# ---------------------------------------------------------------------------


def run_skorokhod(seed: int = 7, pairs: int = 200, warp_grid: int = 8,
                  threads: int = 1, example_tol: float = 1e-3) -> SuiteResult:
    """Worked examples hit known values; bounds sandwich and refine monotonically."""
    target = Euclidean(1)

    def pt(x: float):
        return np.array([float(x)])

    c_self = StepCurve(target, (0.0, 0.3, 0.7, 1.0),
                       (pt(0.0), pt(1.3), pt(0.4)))
    g_redundant = StepCurve(target, (0.0, 0.3, 0.5, 0.7, 1.0),
                            (pt(0.0), pt(1.3), pt(1.3), pt(0.4)))
    c_half = StepCurve(target, (0.0, 0.5, 1.0), (pt(0.0), pt(1.0)))
    g_sixth = StepCurve(target, (0.0, 0.6, 1.0), (pt(0.0), pt(1.0)))

    b_self = skorokhod_distance(c_self, c_self, warp_grid=16)
    b_same = skorokhod_distance(c_self, g_redundant, warp_grid=16)
    b_shift = skorokhod_distance(c_half, g_sixth, warp_grid=16)
    shift_expected = math.log(1.25)

    examples = {
        "self_distance": b_self.upper,
        "identical_function_distance": b_same.upper,
        "shifted_jump_upper": b_shift.upper,
        "shifted_jump_expected": shift_expected,
    }
    failures = []
    if b_self.upper > example_tol or b_same.upper > example_tol:
        failures.append(
            f"skorokhod_zero_examples: self/identical distances "
            f"({b_self.upper!r}, {b_same.upper!r}) exceed {example_tol!r}; "
            "equal functions must be at Skorokhod distance zero")
    if abs(b_shift.upper - shift_expected) > example_tol:
        failures.append(
            f"skorokhod_shifted_jump: upper bound {b_shift.upper!r} misses "
            f"the known value {shift_expected!r} beyond {example_tol!r}")

    def one_pair(i: int):
        rng = trial_rng(seed, "skorokhod/pairs", i)
        c = random_step_curve(target, lambda: pt(rng.uniform(0.0, 2.0)),
                              rng, pieces=2 + i % 3)
        g = random_step_curve(target, lambda: pt(rng.uniform(0.0, 2.0)),
                              rng, pieces=2 + (i + 1) % 3)
        coarse = skorokhod_distance(c, g, warp_grid=int(warp_grid))
        fine = skorokhod_distance(c, g, warp_grid=2 * int(warp_grid))
        sandwich = max(coarse.lower - coarse.upper, fine.lower - fine.upper)
        monotone = fine.upper - coarse.upper
        return (float(sandwich), float(monotone),
                float(coarse.lower), float(coarse.upper), float(fine.upper))

    results = map_trials(one_pair, int(pairs), threads)
    sandwich_max = max(r[0] for r in results)
    monotone_max = max(r[1] for r in results)
    if sandwich_max > 1e-12:
        failures.append(
            f"skorokhod_sandwich: a lower bound exceeded its upper bound by "
            f"{sandwich_max!r}; the value-set mismatch can never beat an "
            "achievable warp")
    if monotone_max > 1e-12:
        failures.append(
            f"skorokhod_monotone: doubling the warp grid raised an upper "
            f"bound by {monotone_max!r}; refinement only enlarges the warp "
            "family")

    csv_rows = [["pair", "lower", "upper", "upper_refined"]]
    csv_rows += [[i, r[2], r[3], r[4]] for i, r in enumerate(results)]
    return SuiteResult(
        name="skorokhod",
        passed=not failures,
        metrics={
            "pairs": int(pairs),
            "warp_grid": int(warp_grid),
            "examples": {k: float(v) for k, v in examples.items()},
            "max_sandwich_violation": float(sandwich_max),
            "max_monotonicity_violation": float(monotone_max),
        },
        failures=failures,
        csv={"skorokhod_pairs": csv_rows},
    )


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

SUITE_NAMES = ("fubini", "transport", "counterexample", "geodesic",
               "curvature", "length", "speed", "skorokhod")


def run_all(seed: int = 7, threads: int = 1,
            tolerances: dict | None = None) -> list[SuiteResult]:
    """Run every suite in canonical order with optional tolerance overrides."""
    tol = dict(tolerances or {})

    def t(name: str, default: float) -> float:
        return float(tol.get(name, default))

    return [
        run_fubini(seed=seed, threads=threads,
                   rel_tol=t("fubini_rel", 1e-13)),
        run_transport(seed=seed, threads=threads,
                      residual_tol=t("transport_residual", 2e-3),
                      order_min=t("order_min", 0.9),
                      variation_tol=t("variation_residual", 1e-12)),
        run_counterexample(seed=seed,
                           tv_tol=t("counterexample_tv", 1e-12)),
        run_geodesic(seed=seed, threads=threads,
                     residual_tol=t("geodesic_residual", 1e-9)),
        run_curvature(seed=seed, threads=threads,
                      sign_tol=t("curvature_sign", 1e-8),
                      flat_tol=t("curvature_flat", 1e-10)),
        run_length(seed=seed, threads=threads,
                   equality_tol=tol.get("length_equality")),
        run_speed(seed=seed, threads=threads,
                  residual_tol=t("speed_residual", 2e-3),
                  order_min=t("order_min", 0.9),
                  consistency_tol=t("speed_consistency", 5e-3)),
        run_skorokhod(seed=seed, threads=threads,
                      example_tol=t("skorokhod_example", 1e-3)),
    ]
