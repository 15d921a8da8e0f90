"""Derive the frozen expected values used in the test suite.

Every number asserted as a literal in tests/ was computed here first, by
independent means (closed forms, brute-force enumeration, dense grid search,
finite differences) that do not import the package. Run it to regenerate the
values and compare against the literals:

    python scripts/derive_expected_values.py
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# small independent helpers (deliberately not imported from the package)
# ---------------------------------------------------------------------------


def sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def spd_fun(a: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to an SPD/symmetric matrix via eigh."""
    w, q = np.linalg.eigh(sym(a))
    return sym((q * fn(w)) @ q.T)


def spd_dist(a: np.ndarray, b: np.ndarray) -> float:
    """Affine-invariant distance ||log(a^-1/2 b a^-1/2)||_F."""
    isq = spd_fun(a, lambda w: w ** -0.5)
    m = spd_fun(isq @ b @ isq, np.log)
    return float(np.linalg.norm(m, "fro"))


def spd_geo(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    sq = spd_fun(a, np.sqrt)
    isq = spd_fun(a, lambda w: w ** -0.5)
    return sym(sq @ spd_fun(isq @ b @ isq, lambda w: w ** t) @ sq)


def sphere_dist(y: np.ndarray, z: np.ndarray) -> float:
    u = z - np.dot(y, z) * y
    return float(math.atan2(np.linalg.norm(u), np.dot(y, z)))


def sphere_geo(y: np.ndarray, z: np.ndarray, t: float) -> np.ndarray:
    th = sphere_dist(y, z)
    if th == 0.0:
        return y.copy()
    return (math.sin((1 - t) * th) * y + math.sin(t * th) * z) / math.sin(th)


def main() -> None:
    out: dict[str, object] = {}

    # -- 1. spd(2): distance from I to diag(e^2, e^2) -----------------------
    b = np.diag([math.e ** 2, math.e ** 2])
    closed = 2.0 * math.sqrt(2.0)
    direct = spd_dist(np.eye(2), b)
    out["spd_distance_closed_form"] = closed
    out["spd_distance_eigh"] = direct
    out["spd_distance_agree"] = abs(direct - closed)

    # cross-check: discretized curve energy minimization. The log-geodesic
    # t -> diag(e^{2t}) should minimize sum d(X_i, X_{i+1})^2 / dt over curves
    # from I to B; random perturbations must not beat it.
    rng = np.random.default_rng(20240817)
    K = 32
    ts = np.linspace(0.0, 1.0, K + 1)
    geo = [spd_fun(b, lambda w, t=t: w ** t) for t in ts]

    def energy(path: list[np.ndarray]) -> float:
        dt = 1.0 / K
        return sum(spd_dist(x, y) ** 2 / dt for x, y in zip(path, path[1:]))

    e_geo = energy(geo)
    e_best_perturbed = math.inf
    for _ in range(200):
        amp = rng.uniform(0.01, 0.25)
        noise = [np.zeros((2, 2))]
        for i in range(1, K):
            bump = math.sin(math.pi * ts[i])  # pinned endpoints
            noise.append(amp * bump * sym(rng.standard_normal((2, 2))))
        noise.append(np.zeros((2, 2)))
        path = [spd_fun(g, np.log) + n for g, n in zip(geo, noise)]
        path = [spd_fun(x, np.exp) for x in path]
        e_best_perturbed = min(e_best_perturbed, energy(path))
    out["spd_energy_geodesic_sqrt"] = math.sqrt(e_geo)
    out["spd_energy_best_perturbed_sqrt"] = math.sqrt(e_best_perturbed)
    out["spd_energy_geodesic_is_min"] = e_geo <= e_best_perturbed

    # -- 2. spd(2): geodesic midpoint of I and diag(4,4) --------------------
    mid = spd_geo(np.eye(2), np.diag([4.0, 4.0]), 0.5)
    out["spd_midpoint"] = mid.round(12).tolist()
    # constant-speed check on a grid
    worst = 0.0
    d_full = spd_dist(np.eye(2), np.diag([4.0, 4.0]))
    for s in np.linspace(0, 1, 9):
        for t in np.linspace(0, 1, 9):
            d = spd_dist(spd_geo(np.eye(2), np.diag([4.0, 4.0]), s),
                         spd_geo(np.eye(2), np.diag([4.0, 4.0]), t))
            worst = max(worst, abs(d - abs(t - s) * d_full))
    out["spd_geodesic_speed_residual"] = worst

    # -- 3. sphere(3): log map at (1,0,0) of (0,1,0) ------------------------
    y = np.array([1.0, 0.0, 0.0])
    z = np.array([0.0, 1.0, 0.0])
    th = sphere_dist(y, z)
    u = z - np.dot(y, z) * y
    u = u / np.linalg.norm(u)
    out["sphere_log_components"] = (th * u).tolist()
    out["sphere_log_theta"] = th  # pi/2

    # -- 4. spd(2): tangent norm at diag(4,4) of V=diag(4,0) ----------------
    base = np.diag([4.0, 4.0])
    v = np.diag([4.0, 0.0])
    isq = spd_fun(base, lambda w: w ** -0.5)
    out["spd_tangent_norm"] = float(np.linalg.norm(isq @ v @ isq, "fro"))
    # cross-check by the finite-difference limit d(base, exp_base(eps V))/eps
    sq = spd_fun(base, np.sqrt)
    for eps in (1e-4, 1e-6):
        ex = sym(sq @ spd_fun(isq @ (eps * v) @ isq, np.exp) @ sq)
        out[f"spd_tangent_norm_fd_{eps:g}"] = spd_dist(base, ex) / eps

    # -- 5. sphere(3): comparison residual worked example -------------------
    zp = np.array([0.0, 0.0, 1.0])
    ga = np.array([1.0, 0.0, 0.0])
    gb = np.array([0.0, 1.0, 0.0])
    t = 0.5
    gt = sphere_geo(ga, gb, t)
    res = sphere_dist(zp, gt) ** 2 - (
        (1 - t) * sphere_dist(zp, ga) ** 2
        + t * sphere_dist(zp, gb) ** 2
        - (1 - t) * t * sphere_dist(ga, gb) ** 2
    )
    out["sphere_comparison_residual"] = res
    out["sphere_comparison_residual_closed"] = 0.25 * (math.pi / 2) ** 2

    # -- 6. two-atom L^p distances ------------------------------------------
    # weights (1,1), euclidean(1), f=(0,0), g=(3,4)
    out["dp_p2"] = (1 * 3.0 ** 2 + 1 * 4.0 ** 2) ** 0.5
    out["dp_pinf"] = max(3.0, 4.0)

    # -- 7. Skorokhod distance of unit jumps at 0.5 vs 0.6 ------------------
    # c(t) = 1[t >= 0.5], g(t) = 1[t >= 0.6] on [0,1], euclidean(1).
    # Dense search over single-knot piecewise-linear warps (u -> v): the sup
    # distance term is 0 iff the warp sends 0.5 to 0.6, else 1.
    best = math.inf
    for u in np.linspace(0.05, 0.95, 1801):
        for v in (0.6,):
            slopes = abs(math.log(v / u)), abs(math.log((1 - v) / (1 - u)))
            mismatch = 0.0 if abs(u - 0.5) < 1e-12 else 1.0
            best = min(best, max(*slopes, mismatch))
    out["skorokhod_two_jump"] = best
    out["skorokhod_two_jump_closed"] = math.log(1.25)

    # -- 8. step-curve variation vs brute force -----------------------------
    # Fixed 6-piece step curve in euclidean(1); variation over (0,1) must be
    # the sum of jump sizes, and equal the max chordal sum over partitions
    # drawn from a 12-point candidate set (2^12 subsets).
    breaks = [0.0, 0.15, 0.35, 0.52, 0.7, 0.88, 1.0]
    vals = [0.0, 1.3, 0.4, 0.9, -0.2, 0.5]

    def step_at(t: float) -> float:
        for i in range(len(vals) - 1, -1, -1):
            if t >= breaks[i]:
                return vals[i]
        return vals[0]

    jumps = sum(abs(b - a) for a, b in zip(vals, vals[1:]))
    cands = []
    for s in breaks[1:-1]:
        cands.extend([s - 1e-6, s + 1e-6])
    cands.extend([0.05, 0.95])  # fillers; 12 points total
    cands = sorted(cands)
    assert len(cands) == 12
    best_var = 0.0
    for mask in range(1 << 12):
        pts = [cands[i] for i in range(12) if mask >> i & 1]
        tot = sum(abs(step_at(b) - step_at(a)) for a, b in zip(pts, pts[1:]))
        best_var = max(best_var, tot)
    out["stepcurve_jump_sum"] = jumps
    out["stepcurve_bruteforce_variation"] = best_var

    # -- 9. p=1 counterexample, n = 64 --------------------------------------
    n = 64
    atoms = (2 * np.arange(n) + 1) / (2 * n)
    grid = np.arange(n + 1) / n
    ratios = []
    for i, j in itertools.combinations(range(n + 1), 2):
        s, t = grid[i], grid[j]
        d1 = np.sum((atoms >= s) & (atoms < t)) / n
        ratios.append(d1 / (t - s))
    out["counterexample_lipschitz_lo"] = min(ratios)
    out["counterexample_lipschitz_hi"] = max(ratios)
    out["counterexample_total_variation"] = float(np.sum(np.full(n, 1.0 / n)))
    # per-atom modulus on refined grids r in {1,2,4}: always 1
    mods = []
    for r in (1, 2, 4):
        g = np.arange(r * n + 1) / (r * n)
        m = 0.0
        for x in atoms:
            vals_g = (x < g).astype(float)
            m = max(m, np.max(np.abs(np.diff(vals_g))))
        mods.append(m)
    out["counterexample_moduli"] = mods

    # -- 10. great-circle metric derivative, 65 nodes ------------------------
    ts65 = np.linspace(0.0, 1.0, 65)
    pts = np.stack([np.cos(ts65), np.sin(ts65), np.zeros_like(ts65)], axis=1)
    worst = 0.0
    for i in range(1, 64):
        d = sphere_dist(pts[i - 1], pts[i + 1])
        worst = max(worst, abs(d / (ts65[i + 1] - ts65[i - 1]) - 1.0))
    out["great_circle_derivative_error_65"] = worst

    # -- 11. constant-speed reparametrization of c(t) = (t^2, 0) -------------
    eps = 1e-6
    m = 33
    tg = np.linspace(0.0, 1.0, m)
    xs = tg ** 2
    chords = np.abs(np.diff(xs))
    S = np.concatenate([[0.0], np.cumsum(chords)])
    L = S[-1]
    tau = (S + (tg - 0.0) * eps / 1.0) * 1.0 / (L + eps)
    speeds = chords / np.diff(tau)
    out["reparam_tsq_speed_spread"] = float(speeds.max() / speeds.min() - 1.0)
    for p in (1.5, 2.0, 3.0):
        en = float(np.sum(chords ** p / np.diff(tau) ** (p - 1)))
        out[f"reparam_tsq_energy_ratio_p{p:g}"] = en / L ** p
        out[f"reparam_budget_p{p:g}"] = (1 + eps) ** p

    # -- 12. bundle norm example ---------------------------------------------
    out["bundle_norm_example"] = (1 * 2.0 ** 2 + 3 * 2.0 ** 2) ** 0.5

    # -- 13. same-stencil transport identity residual is roundoff ------------
    # Weighted 3-atom euclidean curve; central difference of d_p vs weighted
    # per-atom quotients: identical finite sums, residual ~1e-16.
    w = np.array([0.3, 1.1, 0.6])
    f = lambda t: np.array([math.sin(t), math.cos(2 * t), t ** 2])
    ts = np.linspace(0.0, 1.0, 65)
    worst = 0.0
    p = 2.0
    for i in range(1, 64):
        dd = np.abs(f(ts[i + 1]) - f(ts[i - 1]))
        dt = ts[i + 1] - ts[i - 1]
        lhs = (np.sum(w * dd ** p)) ** (1 / p) / dt
        rhs = np.sum(w * (dd / dt) ** p)
        worst = max(worst, abs(lhs ** p - rhs))
    out["transport_identity_roundoff"] = worst

    # -- 14. forward-vs-central speed residual decays at order ~1 ------------
    # Reparametrized straight line in euclidean(2): residual(t_i) =
    # |central quotient - forward quotient| ~ (dt/2)|phi''| * |v|.
    v = np.array([0.6, 0.3])
    phi = lambda t: 0.05 + 0.9 * t + 0.1 * np.sin(2 * np.pi * t) / (2 * np.pi)
    maxima = []
    for m in (65, 129, 257):
        ts = np.linspace(0.0, 1.0, m)
        xs = np.outer(phi(ts), v)
        worst = 0.0
        for i in range(1, m - 2):
            dt = ts[1] - ts[0]
            central = np.linalg.norm(xs[i + 1] - xs[i - 1]) / (2 * dt)
            fwd = np.linalg.norm(xs[i + 1] - xs[i]) / dt
            worst = max(worst, abs(central - fwd))
        maxima.append(worst)
    out["speed_residual_maxima"] = maxima
    out["speed_residual_orders"] = [
        math.log2(maxima[0] / maxima[1]),
        math.log2(maxima[1] / maxima[2]),
    ]

    for k, v in out.items():
        print(f"{k} = {v!r}")


if __name__ == "__main__":
    main()
