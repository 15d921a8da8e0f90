"""Curve calculus over an arbitrary metric space.

Works with any ambient exposing ``distance`` (and optionally ``as_point`` /
``points_equal``): concrete targets and :class:`~nlsp.mappings.LpSpace`
alike.  Provides sampled curves with metric derivative, length, p-energy
and constant-speed reparametrization; right-continuous step curves with
total variation and its jump measure; and two-sided bounds for the
Skorokhod distance between step curves.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SpaceMismatchError, ValidationError
from .mappings import check_p


def _coerce_values(space, values) -> tuple:
    if hasattr(space, "as_point"):
        return tuple(space.as_point(v) for v in values)
    return tuple(values)


def _check_times(times, what: str) -> tuple[float, ...]:
    times = tuple(float(t) for t in times)
    if not times:
        raise ValidationError(f"{what} must not be empty")
    if not all(math.isfinite(t) for t in times):
        raise ValidationError(f"{what} must be finite")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError(f"{what} must be strictly increasing")
    return times


@dataclass(frozen=True)
class SampledCurve:
    """A curve known at finitely many strictly increasing times."""

    space: object
    times: tuple[float, ...]
    values: tuple

    def __post_init__(self):
        times = _check_times(self.times, "curve times")
        values = _coerce_values(self.space, self.values)
        if len(values) != len(times):
            raise ValidationError(
                f"{len(values)} values for {len(times)} time nodes")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.times[0], self.times[-1])

    @cached_property
    def times_array(self) -> np.ndarray:
        arr = np.array(self.times, dtype=float)
        arr.setflags(write=False)
        return arr

    def segment_lengths(self) -> np.ndarray:
        """Distances between consecutive samples."""
        d = self.space.distance
        return np.array([d(a, b) for a, b in zip(self.values, self.values[1:])])


def _require_multinode(c: SampledCurve, op: str) -> None:
    if not isinstance(c, SampledCurve):
        raise ValidationError(f"{op} expects a SampledCurve, got {type(c).__name__}")
    if len(c) < 2:
        raise ValidationError(
            f"{op} needs a curve with at least two time nodes, got {len(c)}")


def metric_derivative(c: SampledCurve) -> np.ndarray:
    """Discrete metric speed ``|c'|(t_i)`` at every node.

    Interior nodes use the centered quotient
    ``d(c(t_{i-1}), c(t_{i+1})) / (t_{i+1} - t_{i-1})``; the endpoints use
    one-sided quotients over their single adjacent segment.
    """
    _require_multinode(c, "metric_derivative")
    t = c.times
    v = c.values
    d = c.space.distance
    n = len(t)
    out = np.empty(n)
    out[0] = d(v[0], v[1]) / (t[1] - t[0])
    out[-1] = d(v[-2], v[-1]) / (t[-1] - t[-2])
    for i in range(1, n - 1):
        out[i] = d(v[i - 1], v[i + 1]) / (t[i + 1] - t[i - 1])
    return out


def length(c: SampledCurve) -> float:
    """Chordal length: the sum of consecutive sample distances."""
    _require_multinode(c, "length")
    return float(c.segment_lengths().sum())


def energy(c: SampledCurve, p) -> float:
    """Discrete p-energy ``sum_i d(c_i, c_{i+1})^p / (t_{i+1} - t_i)^{p-1}``.

    Defined for finite ``p >= 1`` only.
    """
    p = check_p(p, allow_inf=False)
    _require_multinode(c, "energy")
    seg = c.segment_lengths()
    dt = np.diff(c.times_array)
    return float(np.sum(seg ** p / dt ** (p - 1.0)))


def constant_speed_reparam(c: SampledCurve, eps: float) -> SampledCurve:
    """Re-time the samples so the curve moves at (nearly) constant speed.

    Node ``i`` is moved to

    ``tau_i = a + (S_i + (t_i - a) eps / (b - a)) (b - a) / (L + eps)``

    where ``S_i`` is the cumulative chordal length and ``L`` the total; the
    values are untouched.  The ``eps > 0`` slack keeps the new times strictly
    increasing across zero-length segments, and when the input is already
    constant-speed the times are reproduced (up to roundoff far below any
    meaningful tolerance).
    """
    eps = float(eps)
    if not math.isfinite(eps) or eps <= 0.0:
        raise ValidationError(f"eps must be a positive real, got {eps!r}")
    _require_multinode(c, "constant_speed_reparam")
    a, b = c.interval
    span = b - a
    cum = np.concatenate([[0.0], np.cumsum(c.segment_lengths())])
    total = float(cum[-1])
    t = c.times_array
    tau = a + (cum + (t - a) * (eps / span)) * (span / (total + eps))
    tau[0] = a
    tau[-1] = b
    return SampledCurve(c.space, tuple(float(x) for x in tau), c.values)


# ---------------------------------------------------------------------------
# Step curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepCurve:
    """A right-continuous piecewise-constant curve.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``; the value
    at the final time ``b`` is the last piece's value, so the curve is
    defined on all of ``[a, b]``.
    """

    space: object
    breakpoints: tuple[float, ...]
    values: tuple

    def __post_init__(self):
        bp = _check_times(self.breakpoints, "breakpoints")
        if len(bp) < 2:
            raise ValidationError("a step curve needs at least two breakpoints")
        values = _coerce_values(self.space, self.values)
        if len(values) != len(bp) - 1:
            raise ValidationError(
                f"{len(values)} pieces for {len(bp)} breakpoints "
                f"(need exactly breakpoints - 1)")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", values)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.breakpoints[0], self.breakpoints[-1])

    def piece_index(self, t: float) -> int:
        a, b = self.interval
        t = float(t)
        if t < a - 1e-12 or t > b + 1e-12:
            raise ValidationError(
                f"time {t!r} lies outside the curve's interval [{a}, {b}]")
        idx = bisect.bisect_right(self.breakpoints, t) - 1
        return min(max(idx, 0), len(self.values) - 1)

    def value_at(self, t: float):
        return self.values[self.piece_index(t)]

    def jumps(self) -> list[tuple[float, float]]:
        """Interior breakpoints with the distance jumped there, ascending."""
        d = self.space.distance
        return [(self.breakpoints[i], d(self.values[i - 1], self.values[i]))
                for i in range(1, len(self.values))]


def variation(c, subinterval: tuple[float, float] | None = None) -> float:
    """Total variation over an open subinterval (default: all of ``(a, b)``).

    For a step curve this is the sum of jump distances at breakpoints
    strictly inside the subinterval.  For a sampled curve it is the chordal
    length over the sample segments wholly contained in the subinterval's
    closure.
    """
    if isinstance(c, StepCurve):
        a, b = c.interval
        s, t = (a, b) if subinterval is None else map(float, subinterval)
        if t < s:
            raise ValidationError(f"empty subinterval ({s!r}, {t!r})")
        return float(sum(jump for at, jump in c.jumps() if s < at < t))
    if isinstance(c, SampledCurve):
        _require_multinode(c, "variation")
        a, b = c.interval
        s, t = (a, b) if subinterval is None else map(float, subinterval)
        if t < s:
            raise ValidationError(f"empty subinterval ({s!r}, {t!r})")
        d = c.space.distance
        return float(sum(
            d(c.values[i], c.values[i + 1])
            for i in range(len(c) - 1)
            if c.times[i] >= s and c.times[i + 1] <= t))
    raise ValidationError(
        f"variation expects a StepCurve or SampledCurve, got {type(c).__name__}")


@dataclass(frozen=True)
class VariationMeasure:
    """The purely atomic variation measure of a step curve.

    Atoms sit at the curve's interior jump times and carry the jump
    distances as masses; open intervals and single points are measurable.
    """

    interval: tuple[float, float]
    jump_times: tuple[float, ...]
    jump_masses: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.jump_times)
        masses = tuple(float(m) for m in self.jump_masses)
        if len(times) != len(masses):
            raise ValidationError(
                f"{len(times)} jump times for {len(masses)} masses")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("jump times must be strictly increasing")
        if any(m < 0.0 for m in masses):
            raise ValidationError("jump masses must be nonnegative")
        object.__setattr__(self, "interval", tuple(map(float, self.interval)))
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "jump_masses", masses)

    @property
    def total(self) -> float:
        return float(sum(self.jump_masses))

    def of_open_interval(self, s: float, t: float) -> float:
        """Mass of the open interval ``(s, t)``."""
        s, t = float(s), float(t)
        if t < s:
            raise ValidationError(f"empty interval ({s!r}, {t!r})")
        return float(sum(m for at, m in zip(self.jump_times, self.jump_masses)
                         if s < at < t))

    def of_point(self, t: float, tol: float = 1e-12) -> float:
        """Mass of the singleton ``{t}``."""
        t = float(t)
        return float(sum(m for at, m in zip(self.jump_times, self.jump_masses)
                         if abs(at - t) <= tol))

    def cumulative(self, t: float) -> float:
        """Variation accumulated strictly before ``t``."""
        return self.of_open_interval(self.interval[0], t)


def variation_measure(c: StepCurve) -> VariationMeasure:
    """Jump measure of a step curve; its open intervals reproduce
    :func:`variation` exactly."""
    if not isinstance(c, StepCurve):
        raise ValidationError(
            f"variation_measure expects a StepCurve, got {type(c).__name__}")
    jumps = c.jumps()
    return VariationMeasure(
        interval=c.interval,
        jump_times=tuple(at for at, _ in jumps),
        jump_masses=tuple(j for _, j in jumps),
    )


# ---------------------------------------------------------------------------
# Skorokhod distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkorokhodBounds:
    """Certified two-sided bounds on the Skorokhod distance.

    ``upper`` is attained by the returned piecewise-linear time warp
    (``input_knots`` -> ``output_knots``), so it is a true upper bound;
    ``lower`` comes from the value-set mismatch of the two curves, which no
    time warp can repair.
    """

    upper: float
    lower: float
    input_knots: tuple[float, ...]
    output_knots: tuple[float, ...]


def _merged_knots(c: StepCurve, g: StepCurve, warp_grid: int) -> np.ndarray:
    a, b = c.interval
    raw = np.unique(np.concatenate([
        np.array(c.breakpoints), np.array(g.breakpoints),
        np.linspace(a, b, warp_grid + 1)]))
    tol = 1e-12 * (b - a)
    keep = [float(raw[0])]
    for x in raw[1:]:
        if float(x) - keep[-1] > tol:
            keep.append(float(x))
    keep[0], keep[-1] = a, b
    return np.array(keep)


def skorokhod_distance(c: StepCurve, g: StepCurve,
                       warp_grid: int = 16) -> SkorokhodBounds:
    """Two-sided bounds on the Skorokhod distance between step curves.

    The distance is the infimum over increasing time warps ``lam`` of
    ``max(||lam||, sup_t d(c(t), g(lam(t))))`` where ``||lam||`` is the
    largest absolute log-slope of the warp.  The upper bound optimizes
    exactly over piecewise-linear warps whose knots come from both curves'
    breakpoints plus a uniform grid with ``warp_grid`` cells, by dynamic
    programming over knot pairs; doubling ``warp_grid`` only enlarges the
    warp family, so the upper bound is monotone under refinement.  The
    lower bound is the two-sided mismatch between the curves' value sets.
    """
    if not isinstance(c, StepCurve) or not isinstance(g, StepCurve):
        raise ValidationError("skorokhod_distance expects two StepCurve inputs")
    if c.space is not g.space:
        raise SpaceMismatchError(
            "step curves must share the same ambient space object")
    if c.interval != g.interval:
        raise SpaceMismatchError(
            f"step curves must share their time interval, got {c.interval} "
            f"and {g.interval}")
    if not isinstance(warp_grid, (int, np.integer)) or warp_grid < 1:
        raise ValidationError(
            f"warp_grid must be a positive integer, got {warp_grid!r}")

    dist = c.space.distance
    knots = _merged_knots(c, g, int(warp_grid))
    n = len(knots)
    c_vals = [c.value_at(knots[k]) for k in range(n - 1)]
    g_vals = [g.value_at(knots[k]) for k in range(n - 1)]
    pieces = np.array([[dist(cv, gv) for gv in g_vals] for cv in c_vals])

    lower = max(float(pieces.min(axis=1).max()),
                float(pieces.min(axis=0).max()), 0.0)

    # Dynamic program over warp knot pairs (i, j): V[i, j] is the best
    # achievable cost of a warp matching knots[i] in the input scale to
    # knots[j] in the output scale, having covered [a, knots[i]).
    big = math.inf
    value = np.full((n, n), big)
    value[0, 0] = 0.0
    pred = np.full((n, n), -1, dtype=np.int64)
    for i2 in range(1, n):
        log_in = np.log(knots[i2] - knots[:i2])
        for j2 in range(1, n):
            log_out = np.log(knots[j2] - knots[:j2])
            slope = np.abs(log_out[None, :] - log_in[:, None])
            block = pieces[:i2, :j2]
            rect = np.maximum.accumulate(
                np.maximum.accumulate(block[::-1, ::-1], axis=0), axis=1)[::-1, ::-1]
            cand = np.maximum(value[:i2, :j2], np.maximum(slope, rect))
            flat = int(np.argmin(cand))
            value[i2, j2] = float(cand.flat[flat])
            pred[i2, j2] = flat

    # Reconstruct the optimal warp (ties resolved to the lexicographically
    # smallest predecessor by argmin's first-occurrence rule).
    path = [(n - 1, n - 1)]
    while path[-1] != (0, 0):
        i, j = path[-1]
        flat = int(pred[i, j])
        path.append((flat // j, flat % j))
    path.reverse()

    upper = float(value[n - 1, n - 1])
    return SkorokhodBounds(
        upper=upper,
        lower=float(lower),
        input_knots=tuple(float(knots[i]) for i, _ in path),
        output_knots=tuple(float(knots[j]) for _, j in path),
    )
