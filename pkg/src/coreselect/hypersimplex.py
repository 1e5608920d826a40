"""Geometry of the capped simplex {p in [0,1]^n : sum(p) = k}.

This polytope is exactly the set of feasible marginal inclusion probabilities
for sampling k of n elements without replacement.  The module provides the
four solvers the online policies need:

* ``entropic_ftrl_argmax`` - exact maximizer of a linear score minus a scaled
  negative entropy (the follow-the-regularized-leader update),
* ``euclidean_project``   - exact Euclidean projection,
* ``lmo``                 - linear minimization oracle (a top-k selection),
* ``afw_minimize``        - away-steps Frank-Wolfe for quadratic objectives.

All functions are pure; none touch global state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TAU_FEAS = 1e-9


class InfeasiblePointError(ValueError):
    """A vector violates the capped-simplex constraints beyond tolerance."""


def _check_finite(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True)
class HypersimplexPoint:
    """A marginal inclusion probability vector: p in [0,1]^n with sum(p) = k."""

    n: int
    k: int
    p: np.ndarray

    def validate(self, tol: float = TAU_FEAS) -> None:
        if not (1 <= self.k <= self.n):
            raise InfeasiblePointError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.p.shape != (self.n,):
            raise InfeasiblePointError("p has wrong length")
        if np.any(self.p < -tol) or np.any(self.p > 1.0 + tol):
            raise InfeasiblePointError("coordinate outside [0, 1]")
        if abs(float(self.p.sum()) - self.k) > max(tol, tol * self.n):
            raise InfeasiblePointError(
                f"sum(p) = {self.p.sum():.12g} != k = {self.k}"
            )


def _refeasibilize(p: np.ndarray, k: int) -> np.ndarray:
    """Clamp to [0,1] and spread the tiny sum residual over interior coordinates.

    Solvers are exact up to floating point; downstream sampling wants an
    exactly feasible vector, so the residual k - sum(p) is distributed over
    coordinates strictly inside (0, 1) proportionally to their mass.
    """
    p = np.clip(p, 0.0, 1.0)
    resid = k - float(p.sum())
    if resid == 0.0:
        return p
    interior = (p > 0.0) & (p < 1.0)
    if not interior.any():
        if abs(resid) > 1e-7:
            raise InfeasiblePointError("cannot repair infeasible integral vector")
        return p
    w = p[interior]
    total = float(w.sum())
    if total <= 0.0:
        p[interior] += resid / int(interior.sum())
    else:
        p[interior] = w + resid * (w / total)
    return np.clip(p, 0.0, 1.0)


def entropic_ftrl_argmax(theta: np.ndarray, eta: float, k: int) -> HypersimplexPoint:
    """Maximize <theta, p> - (1/eta) * sum(p_i log p_i) over the capped simplex.

    The KKT conditions give p_i = min(1, c * exp(eta * theta_i)) with the
    scalar c > 0 fixed by sum(p) = k.  Exactly j coordinates are capped at 1
    for some j in {0, ..., k-1}; the solver sorts the scores once and scans
    for the consistent j, so the cost is O(n log n).  Exponentials are
    stabilized by subtracting the maximum score first.
    """
    theta = _check_finite(theta, "theta")
    n = theta.size
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if k == n:
        return HypersimplexPoint(n, k, np.ones(n))

    s = eta * theta
    order = np.argsort(-s, kind="stable")
    e = np.exp(s[order] - s[order[0]])  # descending, stabilized
    # rev_cumsum[j] = sum of exp scores with sorted index >= j
    rev = np.cumsum(e[::-1])
    c = (k - np.arange(k)) / rev[n - 1 - np.arange(k)]
    # j capped coordinates are consistent iff the largest uncapped one stays <= 1
    j = int(np.argmax(c * e[:k] <= 1.0 + 1e-12))  # smallest consistent j
    p_sorted = c[j] * e
    p_sorted[:j] = 1.0
    p = np.empty(n)
    p[order] = p_sorted
    p = _refeasibilize(p, k)
    return HypersimplexPoint(n, k, p)


def euclidean_project(y: np.ndarray, k: int) -> HypersimplexPoint:
    """Exact Euclidean projection of y onto the capped simplex.

    The projection is p_i = clamp(y_i - tau, 0, 1) where tau solves
    sum_i clamp(y_i - tau, 0, 1) = k.  The map tau -> sum is piecewise linear
    with breakpoints {y_i} and {y_i - 1}; a single sorted sweep over the 2n
    breakpoints locates the segment containing the root, so the cost is
    O(n log n).
    """
    y = _check_finite(y, "y")
    n = y.size
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if k == n:
        return HypersimplexPoint(n, k, np.ones(n))

    # Events while tau increases: at y_i - 1 coordinate i leaves the cap and
    # becomes active; at y_i it hits zero and dies.
    bps = np.concatenate([y - 1.0, y])
    kinds = np.concatenate([np.zeros(n, dtype=int), np.ones(n, dtype=int)])
    vals = np.concatenate([y, y])
    order = np.argsort(bps, kind="stable")
    bps, kinds, vals = bps[order], kinds[order], vals[order]

    n_cap = n          # coordinates still at their cap (tau below y_i - 1)
    n_act = 0          # active coordinates: p_i = y_i - tau
    act_sum = 0.0
    tau = None
    for m in range(2 * n):
        b = bps[m]
        # value of the sum just as tau reaches this breakpoint
        s_here = n_cap + act_sum - n_act * b
        if s_here <= k + 1e-15:
            # root lies in the previous segment (or exactly here)
            if n_act > 0:
                tau = (n_cap + act_sum - k) / n_act
            else:
                tau = b
            break
        if kinds[m] == 0:
            n_cap -= 1
            n_act += 1
            act_sum += vals[m]
        else:
            n_act -= 1
            act_sum -= vals[m]
    if tau is None:
        # root beyond the last breakpoint: sum is 0 there, only k=0 would match
        tau = bps[-1]
    p = _refeasibilize(np.clip(y - tau, 0.0, 1.0), k)
    return HypersimplexPoint(n, k, p)


def lmo(cost: np.ndarray, k: int) -> np.ndarray:
    """Vertex of the capped simplex minimizing <cost, .>.

    Returns the 0/1 indicator of the k smallest costs; ties break toward the
    lowest index so repeated runs give identical traces.
    """
    cost = _check_finite(cost, "cost")
    n = cost.size
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    v = np.zeros(n)
    if k == n:
        v[:] = 1.0
        return v
    idx = np.argsort(cost, kind="stable")[:k]
    v[idx] = 1.0
    return v


@dataclass
class QuadraticObjective:
    """F(p) = sum_t (sigma_t / 2) * ||p - center_t||^2 - <p, linear>."""

    n: int
    k: int
    centers: list[tuple[float, np.ndarray]]
    linear: np.ndarray

    sigma_total: float = field(init=False)
    weighted_center: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.linear = np.asarray(self.linear, dtype=float)
        self.sigma_total = 0.0
        self.weighted_center = np.zeros(self.n)
        for sigma, c in self.centers:
            if sigma < 0:
                raise ValueError("center weights must be nonnegative")
            c = np.asarray(c, dtype=float)
            if c.shape != (self.n,):
                raise ValueError("center has wrong length")
            self.sigma_total += float(sigma)
            self.weighted_center = self.weighted_center + sigma * c

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.sigma_total * x - self.weighted_center - self.linear

    def value(self, x: np.ndarray) -> float:
        """Objective up to an additive constant (enough for gaps and line search)."""
        return 0.5 * self.sigma_total * float(x @ x) - float(
            x @ (self.weighted_center + self.linear)
        )

    def exact_minimizer(self) -> HypersimplexPoint:
        """Closed-form route: the minimizer is the projection of the weighted mean."""
        if self.sigma_total <= 0.0:
            raise ValueError("exact route needs a strictly convex objective")
        y = (self.linear + self.weighted_center) / self.sigma_total
        return euclidean_project(y, self.k)


@dataclass
class AfwResult:
    point: HypersimplexPoint
    gap: float
    iterations: int
    converged: bool
    active: dict = field(default_factory=dict)


def afw_minimize(
    obj: QuadraticObjective,
    eps: float,
    max_iters: int,
    start: np.ndarray | None = None,
    active: dict | None = None,
) -> AfwResult:
    """Away-steps Frank-Wolfe over the capped simplex.

    Maintains the iterate as a convex combination of vertices; each round
    picks the better of the Frank-Wolfe direction (toward the LMO vertex)
    and the away direction (from the worst active vertex), with exact line
    search.  Stops when the Frank-Wolfe gap drops below ``eps`` or after
    ``max_iters`` iterations; hitting the cap is reported via ``converged``
    rather than raised.

    ``active`` may carry the vertex weights of a previous solve for warm
    starting; keys are index tuples of the k selected elements.
    """
    if obj.sigma_total <= 0.0:
        raise ValueError("afw_minimize needs sum of center weights > 0; use lmo for the linear case")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    n, k = obj.n, obj.k

    # The iterate is confined to the sum(p) = k hyperplane, so shifting the
    # linear term by a constant vector changes nothing; centering it keeps the
    # gradient entries small and the gap computation well conditioned.
    shift = float(np.mean(obj.weighted_center + obj.linear))
    drift = obj.weighted_center + obj.linear - shift

    def grad(x: np.ndarray) -> np.ndarray:
        return obj.sigma_total * x - drift

    def vert(key: tuple) -> np.ndarray:
        v = np.zeros(n)
        v[list(key)] = 1.0
        return v

    if active:
        weights = {key: float(w) for key, w in active.items() if w > 0.0}
        total = sum(weights.values())
        weights = {key: w / total for key, w in weights.items()}
        x = np.zeros(n)
        for key, w in weights.items():
            x[list(key)] += w
    else:
        if start is None:
            start = lmo(-drift, k)
        key = tuple(np.flatnonzero(start > 0.5).tolist())
        if len(key) != k:
            raise ValueError("start must be a vertex with exactly k ones")
        weights = {key: 1.0}
        x = vert(key)

    gap = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        g = grad(x)
        s = lmo(g, k)
        d_fw = s - x
        gap = float(-g @ d_fw)
        if gap <= eps:
            return AfwResult(HypersimplexPoint(n, k, _refeasibilize(x, k)), gap, it - 1, True, weights)

        away_key = max(weights, key=lambda key: float(g[list(key)].sum()))
        v_away = vert(away_key)
        d_away = x - v_away
        away_gap = float(-g @ d_away)

        if gap >= away_gap:
            d = d_fw
            gamma_max = 1.0
            step_key = tuple(np.flatnonzero(s > 0.5).tolist())
            is_fw = True
        else:
            d = d_away
            a = weights[away_key]
            gamma_max = a / (1.0 - a) if a < 1.0 else np.inf
            is_fw = False

        dd = float(d @ d)
        if dd <= 0.0:
            break
        gamma = float(-(g @ d) / (obj.sigma_total * dd))
        gamma = min(max(gamma, 0.0), gamma_max)
        if gamma <= 0.0 or not np.isfinite(gamma):
            break  # stalled at numerical precision

        x = x + gamma * d
        if is_fw:
            for key in list(weights):
                weights[key] *= 1.0 - gamma
            weights[step_key] = weights.get(step_key, 0.0) + gamma
        else:
            for key in list(weights):
                weights[key] *= 1.0 + gamma
            weights[away_key] -= gamma
        weights = {key: w for key, w in weights.items() if w > 1e-15}

    g = grad(x)
    s = lmo(g, k)
    gap = float(-g @ (s - x))
    return AfwResult(
        HypersimplexPoint(n, k, _refeasibilize(x, k)), gap, it, gap <= eps, weights
    )


def default_afw_budget(horizon: int) -> int:
    """Default iteration cap for one Frank-Wolfe solve inside a T-round run."""
    return int(np.ceil(20.0 * np.log(horizon + 2.0)))
