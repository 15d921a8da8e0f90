"""Metric target spaces.

Four concrete geometries share one small interface: flat Euclidean space,
the round unit sphere, symmetric positive-definite matrices under the
affine-invariant metric, and finite metric trees.  Every space provides
``distance``, ``geodesic_point`` and ``comparison_residual``; the three
smooth spaces additionally provide ``log_map`` / ``exp_map`` /
``tangent_norm`` charts, while metric trees deliberately refuse them.

Each space declares a ``curvature_class`` — ``"flat"``, ``"global_npc"``
(triangles thinner than Euclidean ones) or ``"global_nnc"`` (fatter) —
which the curvature-comparison experiments read to decide which sign of
residual they must certify.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import (
    GeodesicError,
    UnsupportedOperationError,
    ValidationError,
)

FLAT = "flat"
GLOBAL_NPC = "global_npc"
GLOBAL_NNC = "global_nnc"

#: Two points closer than this (in the native chart / metric) are "equal".
POINT_EQ_TOL = 1e-12
#: Sphere points must be unit vectors to this tolerance.
SPHERE_UNIT_TOL = 1e-12
#: Sphere tangent vectors must be orthogonal to the base to this tolerance.
SPHERE_TANGENT_TOL = 1e-10
#: SPD points must be symmetric to this tolerance...
SPD_SYMMETRY_TOL = 1e-12
#: ... with every eigenvalue above this floor.
SPD_MIN_EIG = 1e-10
#: Sphere endpoints whose angle is within this margin of pi are antipodal.
ANTIPODAL_MARGIN = 1e-9


def _check_fraction(t: float) -> float:
    """Validate a geodesic parameter in [0, 1]."""
    t = float(t)
    if not math.isfinite(t) or t < -1e-15 or t > 1.0 + 1e-15:
        raise ValidationError(f"geodesic parameter must lie in [0, 1], got {t!r}")
    return min(max(t, 0.0), 1.0)


@dataclass(frozen=True)
class TreePoint:
    """A point of a metric tree: an edge index plus an offset along it.

    ``offset`` is measured from the edge's first endpoint and lies in
    ``[0, edge length]``.
    """

    edge: int
    offset: float


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector anchored at a base point.

    ``components`` is a vector for Euclidean/sphere targets and a symmetric
    matrix for SPD targets.
    """

    base: object
    components: np.ndarray

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.base, self.components * float(factor))


class TargetSpace(ABC):
    """Common interface of all metric target spaces."""

    kind: str = ""
    curvature_class: str = ""

    # -- points ----------------------------------------------------------

    @abstractmethod
    def as_point(self, y):
        """Coerce ``y`` to canonical form and validate it, or raise
        :class:`ValidationError`."""

    @abstractmethod
    def distance(self, y, z) -> float:
        """Geodesic distance between two points."""

    @abstractmethod
    def points_equal(self, y, z, tol: float = POINT_EQ_TOL) -> bool:
        """Whether two points coincide within ``tol``."""

    # -- geodesics ---------------------------------------------------------

    @abstractmethod
    def geodesic_point(self, y, z, t: float):
        """The point a fraction ``t`` of the way along the unique
        constant-speed geodesic from ``y`` to ``z``."""

    def comparison_residual(self, z, a, b, t: float) -> float:
        """Deficit of the squared-distance interpolation inequality.

        For the geodesic ``gamma`` from ``a`` to ``b`` this returns

        ``d(z, gamma(t))^2 - [(1-t) d(z,a)^2 + t d(z,b)^2 - (1-t) t d(a,b)^2]``

        which is ``<= 0`` on NPC spaces, ``>= 0`` on NNC spaces and ``== 0``
        on flat ones.  At ``t in {0, 1}`` the residual is zero by
        construction and is returned exactly.
        """
        t = _check_fraction(t)
        if t == 0.0 or t == 1.0:
            return 0.0
        gt = self.geodesic_point(a, b, t)
        d_zg = self.distance(z, gt)
        d_za = self.distance(z, a)
        d_zb = self.distance(z, b)
        d_ab = self.distance(a, b)
        chord = (1.0 - t) * d_za ** 2 + t * d_zb ** 2 - (1.0 - t) * t * d_ab ** 2
        return d_zg ** 2 - chord

    # -- charts ------------------------------------------------------------

    @property
    def has_chart(self) -> bool:
        """Whether log/exp/tangent-norm operations are available."""
        return True

    def log_map(self, y, z) -> TangentVector:
        """Initial velocity at ``y`` of the unit-time geodesic to ``z``."""
        raise UnsupportedOperationError(
            f"{self.kind} target has no tangent chart: log_map is undefined")

    def exp_map(self, y, v: TangentVector):
        """Endpoint of the unit-time geodesic from ``y`` with velocity ``v``."""
        raise UnsupportedOperationError(
            f"{self.kind} target has no tangent chart: exp_map is undefined")

    def tangent_norm(self, v: TangentVector) -> float:
        """Riemannian norm of a tangent vector at its base point."""
        raise UnsupportedOperationError(
            f"{self.kind} target has no tangent chart: tangent_norm is undefined")

    # -- sampling ----------------------------------------------------------

    @abstractmethod
    def random_point(self, rng: np.random.Generator):
        """Draw a point; deterministic in the supplied generator."""

    def random_tangent(self, base, rng: np.random.Generator,
                       norm: float = 1.0) -> TangentVector:
        """Draw a tangent vector at ``base`` with the requested norm."""
        raise UnsupportedOperationError(
            f"{self.kind} target has no tangent chart: random_tangent is undefined")

    # -- serialization -------------------------------------------------------

    @abstractmethod
    def to_config(self) -> dict:
        """JSON-able description sufficient to rebuild the space."""

    @abstractmethod
    def point_to_jsonable(self, y):
        """JSON-able encoding of a point (binary64 values kept exactly)."""

    @abstractmethod
    def point_from_jsonable(self, data):
        """Inverse of :meth:`point_to_jsonable`."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        cfg = {k: v for k, v in self.to_config().items() if k != "kind"}
        inner = ", ".join(f"{k}={v!r}" for k, v in cfg.items())
        return f"{type(self).__name__}({inner})"


class Euclidean(TargetSpace):
    """``R^dim`` with the Euclidean distance; geodesics are straight lines."""

    kind = "euclidean"
    curvature_class = FLAT

    def __init__(self, dim: int):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)

    def as_point(self, y) -> np.ndarray:
        # asarray keeps canonical float arrays as-is, so re-wrapping a
        # mapping preserves point-object identity.
        arr = np.asarray(y, dtype=float)
        if arr.shape != (self.dim,):
            raise ValidationError(
                f"euclidean point must have shape ({self.dim},), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("euclidean point must be finite")
        return arr

    def distance(self, y, z) -> float:
        return float(np.linalg.norm(np.asarray(y, float) - np.asarray(z, float)))

    def points_equal(self, y, z, tol: float = POINT_EQ_TOL) -> bool:
        return self.distance(y, z) <= tol

    def geodesic_point(self, y, z, t: float) -> np.ndarray:
        t = _check_fraction(t)
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        return (1.0 - t) * y + t * z

    def log_map(self, y, z) -> TangentVector:
        y = self.as_point(y)
        return TangentVector(y, self.as_point(z) - y)

    def exp_map(self, y, v: TangentVector) -> np.ndarray:
        return self.as_point(y) + np.asarray(v.components, float)

    def tangent_norm(self, v: TangentVector) -> float:
        return float(np.linalg.norm(v.components))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.dim)

    def random_tangent(self, base, rng: np.random.Generator,
                       norm: float = 1.0) -> TangentVector:
        base = self.as_point(base)
        g = rng.standard_normal(self.dim)
        n = np.linalg.norm(g)
        while n < 1e-12:  # pragma: no cover - astronomically unlikely
            g = rng.standard_normal(self.dim)
            n = np.linalg.norm(g)
        return TangentVector(base, g * (float(norm) / n))

    def to_config(self) -> dict:
        return {"kind": "euclidean", "dim": self.dim}

    def point_to_jsonable(self, y):
        return [float(v) for v in self.as_point(y)]

    def point_from_jsonable(self, data):
        return self.as_point(data)


class Sphere(TargetSpace):
    """Unit sphere ``S^{dim-1}`` in ``R^dim`` with great-circle distance.

    ``dim`` is the ambient dimension, so ``Sphere(3)`` is the ordinary
    two-sphere.  Antipodal pairs have no unique geodesic and are rejected
    with an error rather than silently tie-broken.
    """

    kind = "sphere"
    curvature_class = GLOBAL_NNC

    def __init__(self, dim: int):
        if not isinstance(dim, (int, np.integer)) or dim < 2:
            raise ValidationError(
                f"ambient dim must be an integer >= 2, got {dim!r}")
        self.dim = int(dim)

    def as_point(self, y) -> np.ndarray:
        # asarray keeps canonical float arrays as-is, so re-wrapping a
        # mapping preserves point-object identity.
        arr = np.asarray(y, dtype=float)
        if arr.shape != (self.dim,):
            raise ValidationError(
                f"sphere point must have shape ({self.dim},), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("sphere point must be finite")
        nrm = np.linalg.norm(arr)
        if abs(nrm - 1.0) > SPHERE_UNIT_TOL:
            raise ValidationError(
                f"sphere point must be a unit vector within {SPHERE_UNIT_TOL}, "
                f"got norm {nrm!r}")
        return arr

    def distance(self, y, z) -> float:
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        if np.array_equal(y, z):
            return 0.0  # self-distance is exactly zero, not projection dust
        cos = float(np.dot(y, z))
        # Stable for nearly equal and nearly antipodal pairs alike.
        perp = z - cos * y
        return float(math.atan2(np.linalg.norm(perp), cos))

    def points_equal(self, y, z, tol: float = POINT_EQ_TOL) -> bool:
        return bool(np.max(np.abs(np.asarray(y, float) - np.asarray(z, float))) <= tol)

    def _angle_checked(self, y, z, op: str) -> float:
        theta = self.distance(y, z)
        if theta >= math.pi - ANTIPODAL_MARGIN:
            raise GeodesicError(
                f"{op} is undefined for antipodal sphere points: the angle "
                f"{theta!r} is within {ANTIPODAL_MARGIN} of pi and the "
                "geodesic is not unique")
        return theta

    def geodesic_point(self, y, z, t: float) -> np.ndarray:
        t = _check_fraction(t)
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        theta = self._angle_checked(y, z, "geodesic_point")
        if theta < 1e-15:
            return y.copy()
        s = math.sin(theta)
        out = (math.sin((1.0 - t) * theta) / s) * y + (math.sin(t * theta) / s) * z
        return out / np.linalg.norm(out)

    def log_map(self, y, z) -> TangentVector:
        y = self.as_point(y)
        z = self.as_point(z)
        theta = self._angle_checked(y, z, "log_map")
        perp = z - float(np.dot(y, z)) * y
        nrm = np.linalg.norm(perp)
        if nrm < 1e-15 or theta < 1e-15:
            return TangentVector(y, np.zeros(self.dim))
        return TangentVector(y, (theta / nrm) * perp)

    def exp_map(self, y, v: TangentVector) -> np.ndarray:
        y = self.as_point(y)
        comp = np.asarray(v.components, float)
        theta = float(np.linalg.norm(comp))
        if theta < 1e-15:
            return y.copy()
        u = comp / theta
        out = math.cos(theta) * y + math.sin(theta) * u
        return out / np.linalg.norm(out)

    def tangent_norm(self, v: TangentVector) -> float:
        base = self.as_point(v.base)
        comp = np.asarray(v.components, float)
        nrm = float(np.linalg.norm(comp))
        if abs(float(np.dot(base, comp))) > SPHERE_TANGENT_TOL * max(1.0, nrm):
            raise ValidationError(
                "tangent vector must be orthogonal to its base point within "
                f"{SPHERE_TANGENT_TOL}, got inner product "
                f"{float(np.dot(base, comp))!r}")
        return nrm

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal(self.dim)
        n = np.linalg.norm(g)
        while n < 1e-12:  # pragma: no cover - astronomically unlikely
            g = rng.standard_normal(self.dim)
            n = np.linalg.norm(g)
        return g / n

    def random_tangent(self, base, rng: np.random.Generator,
                       norm: float = 1.0) -> TangentVector:
        base = self.as_point(base)
        g = rng.standard_normal(self.dim)
        g = g - float(np.dot(g, base)) * base
        n = np.linalg.norm(g)
        while n < 1e-12:  # pragma: no cover - astronomically unlikely
            g = rng.standard_normal(self.dim)
            g = g - float(np.dot(g, base)) * base
            n = np.linalg.norm(g)
        return TangentVector(base, g * (float(norm) / n))

    def to_config(self) -> dict:
        return {"kind": "sphere", "dim": self.dim}

    def point_to_jsonable(self, y):
        return [float(v) for v in self.as_point(y)]

    def point_from_jsonable(self, data):
        return self.as_point(data)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class Spd(TargetSpace):
    """Symmetric positive-definite matrices with the affine-invariant metric.

    ``d(A, B) = || log(A^{-1/2} B A^{-1/2}) ||_F`` with geodesics
    ``A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}``.  All matrix functions go
    through an eigendecomposition and every result is symmetrized before it
    is returned, so chains of operations cannot drift away from symmetry.
    """

    kind = "spd"
    curvature_class = GLOBAL_NPC

    def __init__(self, matrix_dim: int):
        if not isinstance(matrix_dim, (int, np.integer)) or matrix_dim < 1:
            raise ValidationError(
                f"matrix_dim must be a positive integer, got {matrix_dim!r}")
        self.matrix_dim = int(matrix_dim)

    # -- matrix helpers ----------------------------------------------------

    @staticmethod
    def _fun(a: np.ndarray, fn) -> np.ndarray:
        """Apply a scalar function to a symmetric matrix via eigh."""
        w, v = np.linalg.eigh(_sym(a))
        return _sym((v * fn(w)) @ v.T)

    def _sqrt_isqrt(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(_sym(a))
        s = np.sqrt(w)
        return _sym((v * s) @ v.T), _sym((v * (1.0 / s)) @ v.T)

    # -- interface ---------------------------------------------------------

    def as_point(self, y) -> np.ndarray:
        # asarray keeps canonical float arrays as-is, and exactly symmetric
        # inputs skip re-symmetrization, so re-wrapping a mapping preserves
        # point-object identity.
        arr = np.asarray(y, dtype=float)
        n = self.matrix_dim
        if arr.shape != (n, n):
            raise ValidationError(
                f"spd point must have shape ({n}, {n}), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("spd point must be finite")
        asym = float(np.max(np.abs(arr - arr.T)))
        if asym > SPD_SYMMETRY_TOL:
            raise ValidationError(
                f"spd point must be symmetric within {SPD_SYMMETRY_TOL}, got "
                f"max asymmetry {asym!r}")
        if asym > 0.0:
            arr = _sym(arr)
        min_eig = float(np.linalg.eigvalsh(arr).min())
        if min_eig <= SPD_MIN_EIG:
            raise ValidationError(
                f"spd point must have eigenvalues above {SPD_MIN_EIG}, got "
                f"minimum {min_eig!r}")
        return arr

    def distance(self, y, z) -> float:
        y = _sym(np.asarray(y, float))
        z = _sym(np.asarray(z, float))
        if np.array_equal(y, z):
            return 0.0  # self-distance is exactly zero, not eigensolver dust
        _, isqrt = self._sqrt_isqrt(y)
        mid = _sym(isqrt @ z @ isqrt)
        w = np.linalg.eigvalsh(mid)
        return float(np.linalg.norm(np.log(w)))

    def points_equal(self, y, z, tol: float = POINT_EQ_TOL) -> bool:
        diff = np.abs(np.asarray(y, float) - np.asarray(z, float))
        return bool(np.max(diff) <= tol)

    def geodesic_point(self, y, z, t: float) -> np.ndarray:
        t = _check_fraction(t)
        y = _sym(np.asarray(y, float))
        z = _sym(np.asarray(z, float))
        sqrt, isqrt = self._sqrt_isqrt(y)
        mid = _sym(isqrt @ z @ isqrt)
        powed = self._fun(mid, lambda w: np.power(w, t))
        return _sym(sqrt @ powed @ sqrt)

    def log_map(self, y, z) -> TangentVector:
        y = self.as_point(y)
        z = self.as_point(z)
        sqrt, isqrt = self._sqrt_isqrt(y)
        mid = _sym(isqrt @ z @ isqrt)
        logm = self._fun(mid, np.log)
        return TangentVector(y, _sym(sqrt @ logm @ sqrt))

    def exp_map(self, y, v: TangentVector) -> np.ndarray:
        y = self.as_point(y)
        comp = _sym(np.asarray(v.components, float))
        sqrt, isqrt = self._sqrt_isqrt(y)
        mid = _sym(isqrt @ comp @ isqrt)
        expm = self._fun(mid, np.exp)
        return _sym(sqrt @ expm @ sqrt)

    def tangent_norm(self, v: TangentVector) -> float:
        base = self.as_point(v.base)
        comp = _sym(np.asarray(v.components, float))
        _, isqrt = self._sqrt_isqrt(base)
        return float(np.linalg.norm(isqrt @ comp @ isqrt))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((self.matrix_dim, self.matrix_dim))
        return self._fun(0.6 * _sym(g), np.exp)

    def random_tangent(self, base, rng: np.random.Generator,
                       norm: float = 1.0) -> TangentVector:
        base = self.as_point(base)
        g = _sym(rng.standard_normal((self.matrix_dim, self.matrix_dim)))
        cur = self.tangent_norm(TangentVector(base, g))
        while cur < 1e-12:  # pragma: no cover - astronomically unlikely
            g = _sym(rng.standard_normal((self.matrix_dim, self.matrix_dim)))
            cur = self.tangent_norm(TangentVector(base, g))
        return TangentVector(base, g * (float(norm) / cur))

    def to_config(self) -> dict:
        return {"kind": "spd", "matrix_dim": self.matrix_dim}

    def point_to_jsonable(self, y):
        return [[float(v) for v in row] for row in self.as_point(y)]

    def point_from_jsonable(self, data):
        return self.as_point(data)


class MetricTree(TargetSpace):
    """A finite metric tree: weighted edges with path-length distance.

    Points are :class:`TreePoint` pairs ``(edge index, offset)``.  Between
    any two points there is a unique arc, so distances and geodesics are
    computed by explicit path walking; the space has no tangent chart, and
    log/exp/tangent-norm requests raise
    :class:`~nlsp.errors.UnsupportedOperationError`.
    """

    kind = "metric_tree"
    curvature_class = GLOBAL_NPC

    def __init__(self, edges):
        parsed = []
        for k, e in enumerate(edges):
            try:
                u, v, length = e
            except (TypeError, ValueError):
                raise ValidationError(
                    f"edge {k} must be a (node, node, length) triple, got {e!r}")
            length = float(length)
            if not math.isfinite(length) or length <= 0.0:
                raise ValidationError(
                    f"edge {k} must have positive finite length, got {length!r}")
            u, v = str(u), str(v)
            if u == v:
                raise ValidationError(f"edge {k} is a self-loop at node {u!r}")
            parsed.append((u, v, length))
        if not parsed:
            raise ValidationError("a metric tree needs at least one edge")
        self.edges: tuple[tuple[str, str, float], ...] = tuple(parsed)

        # Node order: first appearance in the edge list (deterministic).
        nodes: list[str] = []
        for u, v, _ in self.edges:
            for n in (u, v):
                if n not in nodes:
                    nodes.append(n)
        self.nodes: tuple[str, ...] = tuple(nodes)
        index = {n: i for i, n in enumerate(self.nodes)}

        if len(self.edges) != len(self.nodes) - 1:
            raise ValidationError(
                f"{len(self.edges)} edges on {len(self.nodes)} nodes cannot "
                "form a tree (need exactly nodes - 1 edges)")

        # Adjacency: node index -> list of (edge index, neighbour index).
        adj: list[list[tuple[int, int]]] = [[] for _ in self.nodes]
        self._edge_between: dict[tuple[int, int], int] = {}
        for k, (u, v, _) in enumerate(self.edges):
            ui, vi = index[u], index[v]
            key = (min(ui, vi), max(ui, vi))
            if key in self._edge_between:
                raise ValidationError(
                    f"duplicate edge between nodes {u!r} and {v!r}")
            adj[ui].append((k, vi))
            adj[vi].append((k, ui))
            self._edge_between[key] = k
        self._adj = adj
        self._index = index

        # Single-source traversals from every node: accumulated distance and
        # the previous node on the path back to the root.
        n = len(self.nodes)
        self._node_dist = np.zeros((n, n))
        self._prev = np.full((n, n), -1, dtype=int)
        for root in range(n):
            seen = [False] * n
            seen[root] = True
            stack = [root]
            while stack:
                cur = stack.pop()
                for k, nxt in adj[cur]:
                    if seen[nxt]:
                        continue
                    seen[nxt] = True
                    self._node_dist[root, nxt] = (
                        self._node_dist[root, cur] + self.edges[k][2])
                    self._prev[root, nxt] = cur
                    stack.append(nxt)
            if not all(seen):
                missing = [self.nodes[i] for i, s in enumerate(seen) if not s]
                raise ValidationError(
                    f"edge list is not connected: cannot reach {missing!r}")

        self.total_length = float(sum(length for _, _, length in self.edges))
        self._cum_length = np.concatenate(
            [[0.0], np.cumsum([length for _, _, length in self.edges])])

    # -- basic point handling ------------------------------------------------

    def as_point(self, y) -> TreePoint:
        if isinstance(y, (tuple, list)) and len(y) == 2:
            y = TreePoint(int(y[0]), float(y[1]))
        if not isinstance(y, TreePoint):
            raise ValidationError(
                f"metric tree point must be a TreePoint, got {type(y).__name__}")
        if not 0 <= y.edge < len(self.edges):
            raise ValidationError(
                f"edge index must lie in [0, {len(self.edges)}), got {y.edge}")
        length = self.edges[y.edge][2]
        off = float(y.offset)
        if not math.isfinite(off) or off < -1e-12 or off > length + 1e-12:
            raise ValidationError(
                f"offset must lie in [0, {length}] on edge {y.edge}, got {off!r}")
        clamped = min(max(off, 0.0), length)
        # Canonical points pass through unchanged so identity is preserved.
        if clamped == y.offset and isinstance(y.edge, int):
            return y
        return TreePoint(int(y.edge), clamped)

    def node_point(self, label) -> TreePoint:
        """The :class:`TreePoint` sitting at a named node."""
        label = str(label)
        if label not in self._index:
            raise ValidationError(f"unknown node {label!r}")
        ni = self._index[label]
        k, _ = self._adj[ni][0]
        u, _, length = self.edges[k]
        return TreePoint(k, 0.0 if u == label else length)

    def _gate_offsets(self, p: TreePoint) -> tuple[tuple[int, float], tuple[int, float]]:
        """Both endpoints of the point's edge with distances from the point."""
        u, v, length = self.edges[p.edge]
        return ((self._index[u], p.offset), (self._index[v], length - p.offset))

    def distance(self, y, z) -> float:
        y = self.as_point(y)
        z = self.as_point(z)
        if y.edge == z.edge:
            return abs(y.offset - z.offset)
        best = math.inf
        for yi, dy in self._gate_offsets(y):
            for zi, dz in self._gate_offsets(z):
                best = min(best, dy + self._node_dist[yi, zi] + dz)
        return float(best)

    def points_equal(self, y, z, tol: float = POINT_EQ_TOL) -> bool:
        return self.distance(y, z) <= tol

    def _node_path(self, start: int, stop: int) -> list[int]:
        """Node indices from ``start`` to ``stop`` inclusive."""
        path = [stop]
        while path[-1] != start:
            path.append(int(self._prev[start, path[-1]]))
        path.reverse()
        return path

    def geodesic_point(self, y, z, t: float) -> TreePoint:
        t = _check_fraction(t)
        y = self.as_point(y)
        z = self.as_point(z)
        if y.edge == z.edge:
            return TreePoint(y.edge, y.offset + (z.offset - y.offset) * t)

        # Pick the gate pair realizing the distance; ties break toward the
        # smaller (gate-of-y, gate-of-z) index pair, deterministically.
        best = None
        for yi, dy in self._gate_offsets(y):
            for zi, dz in self._gate_offsets(z):
                total = dy + self._node_dist[yi, zi] + dz
                if best is None or total < best[0] - 1e-15:
                    best = (total, yi, zi, dy, dz)
        total, yi, zi, dy, dz = best
        s = t * total

        # Segment 1: along y's edge toward gate node yi.
        if s <= dy:
            u, _, _ = self.edges[y.edge]
            off = y.offset - s if self._index[u] == yi else y.offset + s
            return self.as_point(TreePoint(y.edge, off))
        s -= dy

        # Segment 2: along whole edges between the two gate nodes.
        path = self._node_path(yi, zi)
        for a, b in zip(path, path[1:]):
            k = self._edge_between[(min(a, b), max(a, b))]
            u, _, length = self.edges[k]
            if s <= length:
                off = s if self._index[u] == a else length - s
                return self.as_point(TreePoint(k, off))
            s -= length

        # Segment 3: from gate node zi into z's edge.  as_point clamps the
        # roundoff that can push the offset a hair past the edge ends.
        u, _, length = self.edges[z.edge]
        off = s if self._index[u] == zi else length - s
        return self.as_point(TreePoint(z.edge, off))

    def random_point(self, rng: np.random.Generator) -> TreePoint:
        x = float(rng.uniform(0.0, self.total_length))
        k = int(np.searchsorted(self._cum_length, x, side="right") - 1)
        k = min(max(k, 0), len(self.edges) - 1)
        return self.as_point(TreePoint(k, x - float(self._cum_length[k])))

    @property
    def has_chart(self) -> bool:
        return False

    def to_config(self) -> dict:
        return {"kind": "metric_tree",
                "edges": [[u, v, float(length)] for u, v, length in self.edges]}

    def point_to_jsonable(self, y):
        y = self.as_point(y)
        return [y.edge, float(y.offset)]

    def point_from_jsonable(self, data):
        return self.as_point(data)


_TARGET_KINDS = {
    "euclidean": (Euclidean, ("dim",)),
    "sphere": (Sphere, ("dim",)),
    "spd": (Spd, ("matrix_dim",)),
    "metric_tree": (MetricTree, ("edges",)),
}


def make_target(config: dict) -> TargetSpace:
    """Build a target space from its JSON-able description."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ValidationError(
            f"target config must be a dict with a 'kind' key, got {config!r}")
    kind = config["kind"]
    if kind not in _TARGET_KINDS:
        raise ValidationError(
            f"unknown target kind {kind!r}; expected one of "
            f"{sorted(_TARGET_KINDS)}")
    cls, fields = _TARGET_KINDS[kind]
    extra = set(config) - {"kind", *fields}
    if extra:
        raise ValidationError(
            f"unknown keys {sorted(extra)} in {kind!r} target config")
    missing = [f for f in fields if f not in config]
    if missing:
        raise ValidationError(
            f"target config for {kind!r} is missing {missing}")
    return cls(**{f: config[f] for f in fields})
