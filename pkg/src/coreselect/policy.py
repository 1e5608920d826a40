"""Online subset-selection policies and their regret accounting.

All policies share the same round shape: propose inclusion probabilities,
sample a k-set, reveal the reward, feed a linear proxy vector back into the
learner.  They differ in the proposal solver (entropic update vs. optimistic
quadratic step) and in what gets fed (the admissible vector itself, an
inverse-propensity estimate, or a Bernoulli-gated estimate with a per-peek
price).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .corevec import AdmissibleVector
from .hypersimplex import (
    HypersimplexPoint,
    QuadraticObjective,
    afw_minimize,
    default_afw_budget,
    entropic_ftrl_argmax,
    lmo,
)
from .sampling import draw, expected_set_value
from .setfn import ModularFunction, SetFunction


def norm_bound(alpha: float, value_bound: float) -> float:
    """Default l2 bound on admissible vectors: every alpha-core of a reward
    bounded by M sits inside the ball of radius alpha * M * sqrt(2)."""
    return alpha * value_bound * math.sqrt(2.0)


@dataclass
class ScoreConfig:
    """Shared run parameters for the policies.

    ``G`` bounds the l2 norm of the fed vectors (defaults to the admissible
    ball radius; pass G = M for monotone rewards fed nonnegative marginal
    vectors).  ``eta`` is the learning rate, defaulting to the horizon-tuned
    sqrt(k * ln(n/k) / (2 G^2 T)).
    """

    n: int
    k: int
    T: int
    alpha: float = 1.0
    M: float = 1.0
    G: float | None = None
    eta: float | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.T < 1:
            raise ValueError("horizon T must be positive")
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        if self.M < 0.0:
            raise ValueError("value bound M must be nonnegative")
        if self.G is None:
            self.G = norm_bound(self.alpha, self.M)
        if self.eta is None:
            if self.k == self.n:
                self.eta = 0.0  # degenerate: the policy plays the full set
            else:
                self.eta = math.sqrt(
                    self.k * math.log(self.n / self.k) / (2.0 * self.G**2 * self.T)
                )
        if self.k < self.n and self.eta <= 0.0:
            raise ValueError("eta must be positive when k < n")


@dataclass
class RoundRecord:
    """One logged round: what was proposed, played, revealed, and fed."""

    t: int
    p: np.ndarray
    u: float | None
    selected: tuple[int, ...]
    reward: float
    full_reward: float
    expected_reward: float
    gvec: np.ndarray
    fed: np.ndarray
    observed: bool
    cost: float
    p_ref: np.ndarray | None = None


def _as_vector(g: AdmissibleVector | np.ndarray) -> np.ndarray:
    if isinstance(g, AdmissibleVector):
        return g.g
    return np.asarray(g, dtype=float)


def _expected_reward(f: SetFunction, point: HypersimplexPoint) -> float:
    """Exact conditional expected reward E[f(S) | p] under the sampler."""
    if isinstance(f, ModularFunction):
        return float(f.w @ point.p)
    return expected_set_value(point, f.value)


class ScorePolicy:
    """Entropic follow-the-regularized-leader on cumulative core vectors."""

    def __init__(self, config: ScoreConfig, rng: np.random.Generator,
                 track_expected: bool = True):
        self.config = config
        self.rng = rng
        self.track_expected = track_expected
        self.theta = np.zeros(config.n)
        self.t = 0

    def propose(self) -> HypersimplexPoint:
        cfg = self.config
        if cfg.k == cfg.n:
            return HypersimplexPoint(cfg.n, cfg.k, np.ones(cfg.n))
        return entropic_ftrl_argmax(self.theta, cfg.eta, cfg.k)

    def _feed(self, gvec: np.ndarray, point: HypersimplexPoint,
              selected: tuple[int, ...]) -> tuple[np.ndarray, bool, float]:
        """What enters the cumulative score; subclasses override."""
        return gvec, True, 0.0

    def step(self, f: SetFunction, core_strategy) -> RoundRecord:
        """Run one full round against the revealed reward f."""
        cfg = self.config
        self.t += 1
        point = self.propose()
        if cfg.k == cfg.n:
            selected = tuple(range(cfg.n))
            u = None
        else:
            selected, u = draw(point, self.rng)
        try:
            gvec = _as_vector(core_strategy(f))
        except Exception as exc:
            raise RuntimeError(f"core strategy failed on round {self.t}: {exc}") from exc
        fed, observed, cost = self._feed(gvec, point, selected)
        self.theta += fed
        reward = f.value(selected)
        expected = _expected_reward(f, point) if self.track_expected else float("nan")
        return RoundRecord(
            t=self.t, p=point.p, u=u, selected=selected,
            reward=reward, full_reward=f.full_value(), expected_reward=expected,
            gvec=gvec, fed=fed, observed=observed, cost=cost,
        )


class SemiBanditPolicy(ScorePolicy):
    """Score variant that only sees the selected coordinates of the core
    vector and feeds inverse-propensity estimates for the rest."""

    def _feed(self, gvec, point, selected):
        fed = np.zeros(self.config.n)
        idx = list(selected)
        probs = point.p[idx]
        if np.any(probs <= 0.0):
            raise RuntimeError("selected an element with zero inclusion probability")
        fed[idx] = gvec[idx] / probs
        return fed, True, 0.0


def priced_epsilon(n: int, k: int, T: int, G: float, cost: float) -> float:
    """Observation rate balancing estimation variance against total price."""
    if k == n:
        return 1.0
    eps = (2.0 * G * G * k * math.log(n / k) / (T * cost * cost)) ** (1.0 / 3.0)
    if not (0.0 < eps <= 1.0):
        warnings.warn(
            f"priced observation rate {eps:.4g} outside (0, 1]; clamping to 1 "
            "(horizon too short for the tuned rate)"
        )
        eps = 1.0
    return eps


class PricedPolicy(ScorePolicy):
    """Score variant that pays a fixed cost to observe the reward.

    Each round it plays a sample from the current probabilities; with
    probability epsilon it pays the peek cost, observes the core vector, and
    feeds it scaled by 1/epsilon, otherwise it feeds zero (a pure
    regularizer step).
    """

    def __init__(self, config: ScoreConfig, rng: np.random.Generator,
                 cost: float = 1.0, epsilon: float | None = None,
                 track_expected: bool = True):
        if epsilon is None:
            epsilon = priced_epsilon(config.n, config.k, config.T, config.G, cost)
        if not (0.0 < epsilon <= 1.0):
            raise ValueError("epsilon must lie in (0, 1]")
        self.epsilon = epsilon
        self.cost = float(cost)
        super().__init__(config, rng, track_expected=track_expected)

    @staticmethod
    def tuned_config(n: int, k: int, T: int, G: float, cost: float,
                     alpha: float = 1.0, M: float = 1.0,
                     epsilon: float | None = None) -> "ScoreConfig":
        """Config with the observation-rate-aware learning rate.

        The learning rate scales with the observation rate actually in use,
        so an explicit epsilon override retunes eta with it.
        """
        eps = priced_epsilon(n, k, T, G, cost) if epsilon is None else epsilon
        if k == n:
            eta = 0.0
        else:
            eta = math.sqrt(eps * k * math.log(n / k) / (2.0 * T * G * G))
        return ScoreConfig(n=n, k=k, T=T, alpha=alpha, M=M, G=G, eta=eta)

    def _feed(self, gvec, point, selected):
        if self.rng.random() < self.epsilon:
            return gvec / self.epsilon, True, self.cost
        return np.zeros(self.config.n), False, 0.0


@dataclass
class OftrlState:
    """Mutable optimistic-learner state, kept separate for inspection."""

    theta: np.ndarray
    sigma_sum: float = 0.0
    weighted_center: np.ndarray | None = None
    delta_sum: float = 0.0
    history: list = field(default_factory=list)
    eps: float | None = None
    first_delta: float | None = None  # earliest positive hint error


class OftrlPolicy:
    """Optimistic follow-the-regularized-leader with modular hints.

    The proposal maximizes the hinted linear score minus adaptive quadratic
    regularizers centered at past proposals.  ``mode='exact'`` solves the
    equivalent Euclidean projection; ``mode='afw'`` runs away-steps
    Frank-Wolfe to the tuned tolerance, warm-started from the previous
    round's active set.  While no hint error has been seen the objective is
    linear and the proposal is the plain top-k vertex.
    """

    def __init__(self, config: ScoreConfig, rng: np.random.Generator,
                 mode: str = "exact", sigma_scale: float | None = None,
                 afw_budget: int | None = None, track_expected: bool = True,
                 track_exact_reference: bool = False):
        if mode not in ("exact", "afw"):
            raise ValueError("mode must be 'exact' or 'afw'")
        self.config = config
        self.rng = rng
        self.mode = mode
        self.sigma_scale = 1.0 / config.k if sigma_scale is None else float(sigma_scale)
        self.afw_budget = default_afw_budget(config.T) if afw_budget is None else afw_budget
        self.track_expected = track_expected
        self.track_exact_reference = track_exact_reference
        self.state = OftrlState(theta=np.zeros(config.n),
                                weighted_center=np.zeros(config.n))
        self._afw_active: dict | None = None
        self.t = 0

    def _propose(self, hvec: np.ndarray) -> tuple[HypersimplexPoint, np.ndarray | None]:
        cfg = self.config
        st = self.state
        drift = st.theta + hvec
        if cfg.k == cfg.n:
            return HypersimplexPoint(cfg.n, cfg.k, np.ones(cfg.n)), None
        if st.sigma_sum <= 0.0:
            v = lmo(-drift, cfg.k)
            self._afw_active = None
            return HypersimplexPoint(cfg.n, cfg.k, v), None
        obj = QuadraticObjective(
            cfg.n, cfg.k,
            centers=[(st.sigma_sum, st.weighted_center / st.sigma_sum)],
            linear=drift,
        )
        if self.mode == "exact":
            return obj.exact_minimizer(), None
        res = afw_minimize(obj, eps=st.eps, max_iters=self.afw_budget,
                           active=self._afw_active)
        self._afw_active = res.active
        ref = obj.exact_minimizer().p if self.track_exact_reference else None
        return res.point, ref

    def step(self, f: SetFunction, hvec: np.ndarray, fvec_strategy) -> RoundRecord:
        cfg = self.config
        st = self.state
        self.t += 1
        hvec = np.asarray(hvec, dtype=float)
        point, ref = self._propose(hvec)
        if cfg.k == cfg.n:
            selected, u = tuple(range(cfg.n)), None
        else:
            selected, u = draw(point, self.rng)
        try:
            fvec = _as_vector(fvec_strategy(f))
        except Exception as exc:
            raise RuntimeError(f"core strategy failed on round {self.t}: {exc}") from exc

        st.theta += fvec
        delta = float(np.sum((fvec - hvec) ** 2))
        new_sum = st.delta_sum + delta
        sigma_t = self.sigma_scale * (math.sqrt(new_sum) - math.sqrt(st.delta_sum))
        st.delta_sum = new_sum
        st.sigma_sum += sigma_t
        st.weighted_center += sigma_t * point.p
        st.history.append((sigma_t, point.p))
        if st.eps is None and delta > 0.0:
            st.first_delta = delta
            st.eps = self.sigma_scale * math.sqrt(delta) / (200.0 * cfg.G**2 * cfg.T**2)

        reward = f.value(selected)
        expected = _expected_reward(f, point) if self.track_expected else float("nan")
        return RoundRecord(
            t=self.t, p=point.p, u=u, selected=selected,
            reward=reward, full_reward=f.full_value(), expected_reward=expected,
            gvec=fvec, fed=fvec, observed=True, cost=0.0, p_ref=ref,
        )


# ---------------------------------------------------------------------------
# Regret accounting over logged traces.

def augmented_regret(records: list[RoundRecord], alpha: float, k: int, n: int,
                     expected: bool = False) -> float:
    """Benchmark k/(n*alpha) of the cumulative full-set reward, minus what the
    policy collected (realized rewards, or exact conditional expectations
    when ``expected`` is set)."""
    full = sum(r.full_reward for r in records)
    got = sum(r.expected_reward if expected else r.reward for r in records)
    return (k / (n * alpha)) * full - got


def static_linear_regret(records: list[RoundRecord]) -> float:
    """Best fixed point in hindsight against the true proxy vectors.

    The benchmark maximizes the summed vectors over the polytope, which the
    linear oracle resolves as a top-k sum.
    """
    if not records:
        return 0.0
    total = np.sum([r.gvec for r in records], axis=0)
    k = len(records[0].selected)
    bench = float(total @ lmo(-total, k))
    got = float(sum(r.gvec @ r.p for r in records))
    return bench - got


def cumulative_cost(records: list[RoundRecord]) -> float:
    return float(sum(r.cost for r in records))


def static_regret_bound(n: int, k: int, T: int, G: float) -> float:
    """Closed-form guarantee for the linear-reward learner."""
    if k == n:
        return 0.0
    return 2.0 * G * math.sqrt(2.0 * k * T * math.log(n / k))


def augmented_regret_bound(n: int, k: int, T: int, M: float) -> float:
    """Closed-form guarantee for admissible rewards."""
    if k == n:
        return 0.0
    return 4.0 * M * math.sqrt(k * T * math.log(n / k))


def optimistic_regret_bound(k: int, sq_distances: list[float]) -> float:
    """Hint-quality guarantee: 12 k sqrt(sum of squared sup-distances)."""
    return 12.0 * k * math.sqrt(float(np.sum(sq_distances)))


def priced_regret_bound(n: int, k: int, T: int, G: float) -> float:
    """Guarantee on regret plus observation spend under priced feedback."""
    if k == n:
        return 0.0
    return 4.0 * G ** (2.0 / 3.0) * (k * math.log(n / k)) ** (1.0 / 3.0) * T ** (2.0 / 3.0)
