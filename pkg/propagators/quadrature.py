"""Integration rules for spheres and for the unit ball with weight (1−|ω|²)^{−1/2}.

Tensor rules are stored in factored form (a trapezoid circle, one Gauss–Jacobi
latitude factor per extra dimension and, for balls, a Gauss–Jacobi radial
factor). Monomial moments are evaluated factor by factor, which is exact and
costs a handful of short dot products; the full node cloud is only
materialised when a general integrand or an export asks for it.

Levels count the multi-index total: a rule of level L integrates every even
monomial ω^{2α} with |α| ≤ L, i.e. polynomials of degree 2L.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gamma, gammaln, roots_jacobi

from propagators.errors import DimensionMismatchError, ParityMismatchError, UnsupportedRuleError

logger = logging.getLogger(__name__)

MAX_TENSOR_BALL_DIM = 6
MAX_TENSOR_SPHERE_DIM = 7
MAX_MONTE_CARLO_DIM = 12
DEFAULT_MC_SAMPLES = 1_000_000
DEFAULT_MC_SEED = 1729
MC_SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class MultiIndex:
    components: Tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if not comps:
            raise DimensionMismatchError("multi-index needs at least one component")
        if any(c < 0 for c in comps):
            raise ValueError(f"multi-index components must be non-negative, got {comps}")
        object.__setattr__(self, "components", comps)

    @property
    def total(self) -> int:
        return sum(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


IndexLike = Union[MultiIndex, Sequence[int]]


def _components(alpha: IndexLike) -> Tuple[int, ...]:
    return alpha.components if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha)).components


def multi_indices(d: int, total: int) -> Iterator[Tuple[int, ...]]:
    """All α ∈ N^d with |α| = total, in a fixed (reverse-lexicographic) order."""
    if d == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in multi_indices(d - 1, total - first):
            yield (first,) + rest


# -- closed forms -----------------------------------------------------------------


def dirichlet_moment(alpha: IndexLike, d: Optional[int] = None) -> float:
    """∫_{|ω|≤1} ω^{2α} (1−|ω|²)^{−1/2} dω = ΠΓ(αᵢ+½)·Γ(½) / Γ(|α|+d/2+½)."""
    comps = _components(alpha)
    if d is not None and d != len(comps):
        raise DimensionMismatchError(f"multi-index has {len(comps)} components, d={d}")
    d = len(comps)
    a = np.asarray(comps, dtype=float)
    log_value = gammaln(a + 0.5).sum() + gammaln(0.5) - gammaln(a.sum() + d / 2 + 0.5)
    return float(np.exp(log_value))


def reduced_dirichlet_moment(alpha: IndexLike) -> float:
    """(2π)^m (2α)! / (2^{|α|} α! (2m+2|α|−1)!!) for an even number d = 2m of components."""
    comps = _components(alpha)
    if len(comps) % 2:
        raise ParityMismatchError(f"reduced form needs an even dimension, got d={len(comps)}")
    m = len(comps) // 2
    a = np.asarray(comps, dtype=float)
    total = int(a.sum())
    K = m + total
    # (2K−1)!! = (2K)! / (2^K K!)
    log_double_fact = gammaln(2 * K + 1) - K * math.log(2) - gammaln(K + 1)
    log_value = (
        m * math.log(2 * math.pi)
        + (gammaln(2 * a + 1) - gammaln(a + 1)).sum()
        - total * math.log(2)
        - log_double_fact
    )
    return float(np.exp(log_value))


def ball_moment(alpha: IndexLike, d: Optional[int] = None) -> float:
    """∫_{|ω|≤1} ω^{2α} dω = ΠΓ(αᵢ+½) / Γ(|α|+d/2+1), the unweighted counterpart."""
    comps = _components(alpha)
    if d is not None and d != len(comps):
        raise DimensionMismatchError(f"multi-index has {len(comps)} components, d={d}")
    d = len(comps)
    a = np.asarray(comps, dtype=float)
    return float(np.exp(gammaln(a + 0.5).sum() - gammaln(a.sum() + d / 2 + 1)))


def sphere_moment(beta: IndexLike, n: Optional[int] = None) -> float:
    """∫_{S^{n−1}} ω^{2β} dσ = 2ΠΓ(βᵢ+½) / Γ(|β|+n/2)."""
    comps = _components(beta)
    if n is not None and n != len(comps):
        raise DimensionMismatchError(f"multi-index has {len(comps)} components, n={n}")
    n = len(comps)
    b = np.asarray(comps, dtype=float)
    return float(2.0 * np.exp(gammaln(b + 0.5).sum() - gammaln(b.sum() + n / 2)))


class GammaPair(NamedTuple):
    lhs: float
    rhs: float


def gamma_duplication_check(k: int) -> GammaPair:
    """Γ(k+½) against √π Γ(2k) / (2^{2k−1} Γ(k))."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    lhs = float(gamma(k + 0.5))
    rhs = float(math.sqrt(math.pi) * gamma(2 * k) / (2.0 ** (2 * k - 1) * gamma(k)))
    return GammaPair(lhs, rhs)


def sphere_area(n: int) -> float:
    """Surface area 2π^{n/2}/Γ(n/2) of S^{n−1} ⊂ R^n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(2.0 * math.pi ** (n / 2) / gamma(n / 2))


def sphere_area_identity(n: int) -> GammaPair:
    """Both sides of 1·3⋯(n−2)·|S^{n−1}| = 2(2π)^m for odd n = 2m+1."""
    if n < 1 or n % 2 == 0:
        raise ParityMismatchError(f"identity holds for odd n, got n={n}")
    m = (n - 1) // 2
    odd_product = math.prod(range(1, n - 1, 2))
    return GammaPair(odd_product * sphere_area(n), 2.0 * (2.0 * math.pi) ** m)


# -- rules ------------------------------------------------------------------------


class Estimate(NamedTuple):
    value: float
    stderr: float


class _Factor(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray


def _circle_factor(points: int) -> _Factor:
    phi = 2.0 * np.pi * np.arange(points) / points
    return _Factor(phi, np.full(points, 2.0 * np.pi / points))


def _latitude_factor(k: int, points: int) -> _Factor:
    # x = ω_k on S^{k−1} carries the weight (1−x²)^{(k−3)/2}
    a = (k - 3) / 2
    x, w = roots_jacobi(points, a, a)
    return _Factor(np.asarray(x), np.asarray(w))


class _Rule:
    """Node/weight list with factored moments (tensor) or sharded samples (Monte Carlo)."""

    kind = "rule"

    def __init__(self, dim: int, level: int, method: str, seed: Optional[int] = None):
        self.dim = dim
        self.level = level
        self.method = method
        self.seed = seed
        self._shards: List[np.ndarray] = []
        self._mass = 0.0
        self._moment_cache = {}

    @property
    def is_monte_carlo(self) -> bool:
        return self.method == "monte-carlo"

    @property
    def size(self) -> int:
        if self.is_monte_carlo:
            return sum(shard.shape[0] for shard in self._shards)
        return self._tensor_size()

    def _tensor_size(self) -> int:
        raise NotImplementedError

    @cached_property
    def nodes(self) -> np.ndarray:
        if self.is_monte_carlo:
            return np.concatenate(self._shards, axis=0)
        return self._tensor_nodes()[0]

    @cached_property
    def weights(self) -> np.ndarray:
        if self.is_monte_carlo:
            count = sum(s.shape[0] for s in self._shards)
            return np.full(count, self._mass / count)
        return self._tensor_nodes()[1]

    def _tensor_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _tensor_moment(self, comps: Tuple[int, ...]) -> float:
        raise NotImplementedError

    def _exact_moment(self, comps: Tuple[int, ...]) -> float:
        raise NotImplementedError

    def _monte_carlo_estimate(self, values_of: Callable[[np.ndarray], np.ndarray]) -> Estimate:
        sums, squares, count = [], [], 0
        for shard in self._shards:
            vals = np.asarray(values_of(shard), dtype=float)
            sums.append(float(vals.sum()))
            squares.append(float(np.dot(vals, vals)))
            count += vals.shape[0]
        mean = math.fsum(sums) / count
        var = max(math.fsum(squares) / count - mean * mean, 0.0)
        return Estimate(self._mass * mean, self._mass * math.sqrt(var / count))

    def moment_estimate(self, alpha: IndexLike) -> Estimate:
        comps = _components(alpha)
        if len(comps) != self.dim:
            raise DimensionMismatchError(f"multi-index has {len(comps)} components, rule dimension is {self.dim}")
        if comps not in self._moment_cache:
            if self.is_monte_carlo:
                exps = 2 * np.asarray(comps)
                self._moment_cache[comps] = self._monte_carlo_estimate(lambda x: np.prod(x ** exps, axis=1))
            else:
                self._moment_cache[comps] = Estimate(self._tensor_moment(comps), 0.0)
        return self._moment_cache[comps]

    def moment(self, alpha: IndexLike) -> float:
        return self.moment_estimate(alpha).value

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], threads: int = 1, batch: int = MC_SHARD_SIZE) -> Estimate:
        """Apply the rule to a vectorised f mapping (k, dim) nodes to k values.

        Batches are evaluated concurrently and reduced in node order.
        """
        if self.is_monte_carlo:
            return self._monte_carlo_estimate(f)
        nodes, weights = self.nodes, self.weights
        starts = range(0, nodes.shape[0], batch)

        def partial(start: int) -> float:
            stop = start + batch
            return float(np.dot(weights[start:stop], np.asarray(f(nodes[start:stop]), dtype=float)))

        with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
            parts = list(pool.map(partial, starts))
        return Estimate(math.fsum(parts), 0.0)

    def certified_error(self, level: Optional[int] = None) -> float:
        """Largest relative moment error over |α| ≤ level against the closed form."""
        level = self.level if level is None else level
        worst = 0.0
        for total in range(level + 1):
            for comps in multi_indices(self.dim, total):
                exact = self._exact_moment(comps)
                worst = max(worst, abs(self.moment(comps) - exact) / exact)
        return worst

    def describe(self) -> dict:
        info = {"kind": self.kind, "dim": self.dim, "level": self.level, "method": self.method, "size": self.size}
        if self.is_monte_carlo:
            info["seed"] = self.seed
        return info


class SphereRule(_Rule):
    """Rule on S^{n−1} ⊂ R^n for the surface measure."""

    kind = "sphere"

    def __init__(self, dim_ambient: int, level: int, method: str = "product", seed: Optional[int] = None):
        super().__init__(dim_ambient, level, method, seed)
        self.circle: Optional[_Factor] = None
        self.latitudes: List[_Factor] = []

    @property
    def dim_ambient(self) -> int:
        return self.dim

    def _exact_moment(self, comps):
        return sphere_moment(comps)

    def _tensor_size(self):
        if self.dim == 1:
            return 2
        return len(self.circle.nodes) * math.prod(len(lat.nodes) for lat in self.latitudes)

    def _tensor_moment(self, comps):
        if self.dim == 1:
            return 2.0
        phi, w = self.circle
        value = float(np.dot(w, np.cos(phi) ** (2 * comps[0]) * np.sin(phi) ** (2 * comps[1])))
        inner = comps[0] + comps[1]
        for k, (x, wx) in enumerate(self.latitudes, start=3):
            b = comps[k - 1]
            value *= float(np.dot(wx, (1.0 - x * x) ** inner * x ** (2 * b)))
            inner += b
        return value

    def _tensor_nodes(self):
        if self.dim == 1:
            return np.array([[1.0], [-1.0]]), np.ones(2)
        phi, w = self.circle
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        weights = w
        for x, wx in self.latitudes:
            count = nodes.shape[0]
            scale = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
            lifted = (scale[:, None, None] * nodes[None, :, :]).reshape(-1, nodes.shape[1])
            nodes = np.concatenate([lifted, np.repeat(x, count)[:, None]], axis=1)
            weights = np.outer(wx, weights).ravel()
        return nodes, weights


class BallRule(_Rule):
    """Rule on the unit ball of R^d, with the weight (1−|ω|²)^{−1/2} folded into the weights unless ``weighted`` is off."""

    kind = "ball"

    def __init__(self, dim: int, level: int, method: str = "product", seed: Optional[int] = None, weighted: bool = True):
        super().__init__(dim, level, method, seed)
        self.weighted = weighted
        self.radial: Optional[_Factor] = None
        self.sphere: Optional[SphereRule] = None

    def _exact_moment(self, comps):
        return dirichlet_moment(comps) if self.weighted else ball_moment(comps)

    def describe(self) -> dict:
        return {**super().describe(), "weighted": self.weighted}

    def _tensor_size(self):
        return len(self.radial.nodes) * self.sphere.size

    def _tensor_moment(self, comps):
        r, wr = self.radial
        return float(np.dot(wr, r ** (2 * sum(comps)))) * self.sphere.moment(comps)

    def _tensor_nodes(self):
        r, wr = self.radial
        theta, wt = self.sphere.nodes, self.sphere.weights
        nodes = (r[:, None, None] * theta[None, :, :]).reshape(-1, self.dim)
        return nodes, np.outer(wr, wt).ravel()


def _sample_sharded(sampler, dim: int, samples: int, seed: int, threads: int) -> List[np.ndarray]:
    counts = [MC_SHARD_SIZE] * (samples // MC_SHARD_SIZE)
    if samples % MC_SHARD_SIZE:
        counts.append(samples % MC_SHARD_SIZE)
    children = np.random.SeedSequence(seed).spawn(len(counts))
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(lambda job: sampler(dim, job[0], np.random.default_rng(job[1])), zip(counts, children)))


def _sphere_samples(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _ball_samples(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    # |ω|² ~ Beta(d/2, ½) under the weighted measure
    u = rng.beta(d / 2, 0.5, size=count)
    return np.sqrt(u)[:, None] * _sphere_samples(d, count, rng)


def _uniform_ball_samples(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    r = rng.uniform(size=count) ** (1.0 / d)
    return r[:, None] * _sphere_samples(d, count, rng)


def _resolve_method(method: str, dim: int, tensor_limit: int) -> str:
    if method == "auto":
        return "product" if dim <= tensor_limit else "monte-carlo"
    if method not in ("product", "monte-carlo"):
        raise UnsupportedRuleError(f"unknown rule method {method!r}")
    return method


def build_sphere_rule(
    n: int,
    level: int,
    method: str = "auto",
    samples: int = DEFAULT_MC_SAMPLES,
    seed: int = DEFAULT_MC_SEED,
    threads: int = 0,
) -> SphereRule:
    """Rule on S^{n−1} exact for ω^{2β}, |β| ≤ level.

    Product rule: trapezoid on S¹ with 2·level+2 points and level+1 Gauss–Jacobi
    latitudes per extra dimension. Monte Carlo draws normalised Gaussians.
    """
    if n < 1 or level < 0:
        raise UnsupportedRuleError(f"no sphere rule for n={n}, level={level}")
    method = _resolve_method(method, n, MAX_TENSOR_SPHERE_DIM)
    rule = SphereRule(n, level, method, seed if method == "monte-carlo" else None)
    if method == "monte-carlo":
        if n > MAX_MONTE_CARLO_DIM:
            raise UnsupportedRuleError(f"Monte Carlo sphere rules stop at n={MAX_MONTE_CARLO_DIM}, got {n}")
        rule._shards = _sample_sharded(_sphere_samples, n, samples, seed, threads)
        rule._mass = sphere_area(n)
    elif n > MAX_TENSOR_SPHERE_DIM:
        raise UnsupportedRuleError(f"product sphere rules stop at n={MAX_TENSOR_SPHERE_DIM}, got {n}")
    elif n >= 2:
        rule.circle = _circle_factor(2 * level + 2)
        rule.latitudes = [_latitude_factor(k, level + 1) for k in range(3, n + 1)]
    logger.debug("sphere rule n=%d level=%d method=%s", n, level, method)
    return rule


def build_ball_rule(
    d: int,
    level: int,
    method: str = "auto",
    samples: int = DEFAULT_MC_SAMPLES,
    seed: int = DEFAULT_MC_SEED,
    threads: int = 0,
    weighted: bool = True,
) -> BallRule:
    """Rule on the unit ball of R^d for the weight (1−|ω|²)^{−1/2}.

    The tensor rule substitutes s = 2r²−1, which turns the radial measure
    r^{d−1}(1−r²)^{−1/2}dr into a Gauss–Jacobi weight (1−s)^{−1/2}(1+s)^{(d−2)/2},
    and pairs it with the product sphere rule on S^{d−1}. With ``weighted``
    off the rule is for plain volume measure and the radial weight loses its
    (1−s)^{−1/2} factor.
    """
    if d < 1 or level < 0:
        raise UnsupportedRuleError(f"no ball rule for d={d}, level={level}")
    method = _resolve_method(method, d, MAX_TENSOR_BALL_DIM)
    rule = BallRule(d, level, method, seed if method == "monte-carlo" else None, weighted=weighted)
    if method == "monte-carlo":
        if d > MAX_MONTE_CARLO_DIM:
            raise UnsupportedRuleError(f"Monte Carlo ball rules stop at d={MAX_MONTE_CARLO_DIM}, got {d}")
        sampler = _ball_samples if weighted else _uniform_ball_samples
        rule._shards = _sample_sharded(sampler, d, samples, seed, threads)
        rule._mass = dirichlet_moment((0,) * d) if weighted else ball_moment((0,) * d)
        logger.debug("ball rule d=%d monte-carlo samples=%d seed=%d", d, samples, seed)
        return rule
    if d > MAX_TENSOR_BALL_DIM:
        raise UnsupportedRuleError(f"tensor ball rules stop at d={MAX_TENSOR_BALL_DIM}, got {d}")
    points = max((level + 2) // 2, 1)
    if weighted:
        s, w = roots_jacobi(points, -0.5, (d - 2) / 2)
        w = w * 2.0 ** (-(d + 1) / 2)
    else:
        s, w = roots_jacobi(points, 0.0, (d - 2) / 2)
        w = w * 2.0 ** (-d / 2 - 1)
    rule.radial = _Factor(np.sqrt((1.0 + s) / 2.0), w)
    rule.sphere = build_sphere_rule(d, level, method="product")
    logger.debug("ball rule d=%d level=%d radial points=%d weighted=%s", d, level, points, weighted)
    return rule
