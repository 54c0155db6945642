"""Stratified importance-sampling Monte Carlo over the half-space x_n > 0.

The proposal is a mixture of bubble-shaped densities centred on the
boundary.  Two radial profiles are available:

* ``core``: proportional to delta^(p+1), total mass S_n for every lambda;
* ``tail``: proportional to delta^p, heavier (|x|^-(n+2)) tails.

Each component is sampled with its own count (stratification) and every
chunk of every component draws from its own ``SeedSequence`` child, so
estimates are bit-identical for a given seed whatever the number of
worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import closed_form_constants
from .errors import DomainError

METHODS = ("mc", "radial")


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "mc"
    samples: int = 1_000_000
    seed: int = 0
    target_rel_err: float = 0.01
    chunk: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"integrator method must be one of {METHODS}")
        if self.samples <= 0 or self.chunk <= 0 or self.workers <= 0:
            raise DomainError("samples, chunk and workers must be positive")
        if not self.target_rel_err > 0:
            raise DomainError("target_rel_err must be positive")

    def with_samples(self, samples: int) -> "IntegratorSpec":
        return IntegratorSpec(self.method, samples, self.seed, self.target_rel_err, self.chunk, self.workers)


@dataclass(frozen=True)
class Component:
    center: np.ndarray
    lam: float
    weight: float
    profile: str = "core"


def _c0(n):
    return (n * (n - 2)) ** ((n - 2) / 4)


class MixtureDensity:
    """Normalized mixture of half-space bubble profiles."""

    def __init__(self, n: int, components):
        self.n = n
        comps = [c for c in components if c.weight > 0]
        total = sum(c.weight for c in comps)
        if not comps or total <= 0:
            raise DomainError("mixture needs at least one component with positive weight")
        self.components = [Component(np.asarray(c.center, float), float(c.lam), c.weight / total, c.profile)
                           for c in comps]
        for c in self.components:
            if c.profile not in ("core", "tail"):
                raise DomainError(f"unknown profile {c.profile!r}")
            if c.center[-1] != 0:
                raise DomainError("mixture components must be centred on the boundary")
        self.p = (n + 2) / (n - 2)
        self._S_n = closed_form_constants(n).S_n
        # integral of delta^p over the half-space, without the lambda^((2-n)/2) factor
        self._tail_norm = _c0(n) ** self.p * 0.5 * math.pi ** (n / 2) / math.gamma((n + 2) / 2)

    @classmethod
    def for_bubbles(cls, n: int, centers, lams, core: float = 0.5, tail: float = 0.3, pair: float = 0.2):
        """Core and tail profile per bubble plus one core profile per pair midpoint.

        The pair components sit halfway between two centres with width equal
        to their distance, where the interaction integrands peak.
        """
        centers = np.asarray(centers, float)
        m = len(centers)
        comps = []
        for c, lam in zip(centers, lams):
            comps.append(Component(c, lam, core / m, "core"))
            comps.append(Component(c, lam, tail / m, "tail"))
        npairs = m * (m - 1) // 2
        for i in range(m):
            for j in range(i + 1, m):
                d = np.linalg.norm(centers[i] - centers[j])
                if d > 0:
                    comps.append(Component(0.5 * (centers[i] + centers[j]), 1.0 / d, pair / npairs, "core"))
        return cls(n, comps)

    def symmetrized(self, pivot) -> "MixtureDensity":
        """Average of the mixture and its mirror image under x' -> 2 pivot' - x'.

        Integrands symmetrized under that reflection need a proposal with
        the same symmetry; otherwise a peak of f(Rx) can sit where q(x) is
        negligible.  Components mapped onto themselves are merged.
        """
        pivot = np.asarray(pivot, float)
        merged = {}
        for c in self.components:
            mirrored = c.center.copy()
            mirrored[:-1] = 2 * pivot[:-1] - c.center[:-1]
            for center in (c.center, mirrored):
                key = (tuple(np.round(center, 15)), c.lam, c.profile)
                if key in merged:
                    merged[key] = Component(merged[key].center, c.lam, merged[key].weight + 0.5 * c.weight, c.profile)
                else:
                    merged[key] = Component(center, c.lam, 0.5 * c.weight, c.profile)
        return MixtureDensity(self.n, list(merged.values()))

    def component_pdf(self, c: Component, x: np.ndarray) -> np.ndarray:
        n = self.n
        r2 = np.einsum("ij,ij->i", x - c.center, x - c.center) * c.lam**2
        if c.profile == "core":
            return (n * (n - 2)) ** (n / 2) * c.lam**n / (1 + r2) ** n / self._S_n
        return c.lam ** ((n + 2) / 2) / (1 + r2) ** ((n + 2) / 2) * _c0(n) ** self.p / (self._tail_norm * c.lam ** ((2 - n) / 2))

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return sum(c.weight * self.component_pdf(c, x) for c in self.components)

    def sample(self, k: int, rng: np.random.Generator, size: int) -> np.ndarray:
        """Points from component ``k``: Beta-distributed radius, uniform upper-hemisphere direction."""
        c = self.components[k]
        n = self.n
        if c.profile == "core":
            t = rng.beta(n / 2, n / 2, size)
        else:
            t = rng.random(size) ** (2.0 / n)
        r = np.sqrt(t / (1.0 - t))
        w = rng.standard_normal((size, n))
        w /= np.linalg.norm(w, axis=1)[:, None]
        w[:, -1] = np.abs(w[:, -1])
        return c.center + (r / c.lam)[:, None] * w


@dataclass
class MCResult:
    value: np.ndarray
    stderr: np.ndarray
    samples: int
    counts: list = field(default_factory=list)


def _chunk_stats(f, density, k, seed, chunk_id, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k, chunk_id)))
    x = density.sample(k, rng, size)
    vals = np.asarray(f(x), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    vals = vals / density.pdf(x)[:, None]
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite integrand sample")
    mean = vals.mean(axis=0)
    m2 = ((vals - mean) ** 2).sum(axis=0)
    return size, mean, m2


def _combine(stats):
    # Chan et al. pairwise update, applied in a fixed order
    n_a, mean_a, m2_a = stats[0]
    for n_b, mean_b, m2_b in stats[1:]:
        n = n_a + n_b
        delta = mean_b - mean_a
        mean_a = mean_a + delta * (n_b / n)
        m2_a = m2_a + m2_b + delta**2 * (n_a * n_b / n)
        n_a = n
    return n_a, mean_a, m2_a


def integrate(f, density: MixtureDensity, spec: IntegratorSpec) -> MCResult:
    """Estimate the half-space integral of ``f`` (points (N, n) -> (N,) or (N, k)).

    The estimator is sum_c w_c mean_c(f/q) with q the full mixture density;
    its variance is sum_c w_c^2 var_c / N_c.
    """
    tasks = []
    counts = []
    for k, comp in enumerate(density.components):
        nk = max(2, int(round(comp.weight * spec.samples)))
        counts.append(nk)
        nchunks = -(-nk // spec.chunk)
        for b in range(nchunks):
            size = min(spec.chunk, nk - b * spec.chunk)
            tasks.append((k, b, size))

    def run(task):
        k, b, size = task
        return _chunk_stats(f, density, k, spec.seed, b, size)

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    value = 0.0
    var = 0.0
    for k, comp in enumerate(density.components):
        stats = [r for t, r in zip(tasks, results) if t[0] == k]
        nk, mean, m2 = _combine(stats)
        value = value + comp.weight * mean
        var = var + comp.weight**2 * (m2 / (nk - 1)) / nk
    return MCResult(value=np.atleast_1d(value), stderr=np.sqrt(np.atleast_1d(var)), samples=sum(counts), counts=counts)
