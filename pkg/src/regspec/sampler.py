"""Approximately uniform random regular graphs via the lazy switch chain.

Chain: from the current graph draw two oriented edges ``(i, k)`` and
``(j, l)`` independently and uniformly; if ``i, j, k, l`` are distinct and
``ij``, ``kl`` are non-edges, replace ``ik, jl`` by ``ij, kl``, otherwise
stay put. The proposal is symmetric, so the uniform measure is stationary.

Step counts (burn-in, thinning) count *proposals*, rejected ones included.
Counting only accepted switches would sample the jump chain, whose
stationary law is weighted by each graph's acceptance probability.

Randomness: a numpy ``PCG64`` bit generator seeded with ``rng_seed``; each
proposal consumes two raw 64-bit words mapped to ``[0, 2E)`` by the
multiply-shift ``(x * 2E) >> 64``. Both kernel backends consume the stream
identically.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, InfeasibleError, ResourceGuardError
from .graph import RegularGraph

__all__ = [
    "SamplerConfig",
    "SwitchSampler",
    "circulant_seed",
    "switch_chain_step",
    "sample_uniform",
    "enumerate_all",
    "switch_reachable",
    "default_burn_in",
    "default_thinning",
]

ENUMERATION_LIMIT = 10**6


def default_burn_in(n, d):
    return max(10**4, 20 * n * d)


def default_thinning(n, d):
    return max(1, 2 * n * d)


def _check_params(n, d):
    if n < 1 or d < 0:
        raise InfeasibleError(f"need N >= 1 and d >= 0, got N={n}, d={d}")
    if d > n - 1:
        raise InfeasibleError(f"d={d} exceeds N-1={n - 1}")
    if (n * d) % 2:
        raise InfeasibleError(f"N*d must be even (N={n}, d={d})")


@dataclass(frozen=True)
class SamplerConfig:
    n_vertices: int
    degree: int
    rng_seed: int
    burn_in_steps: int | None = None
    thinning: int | None = None

    def __post_init__(self):
        problems = []
        n, d = self.n_vertices, self.degree
        if (n * d) % 2:
            problems.append(f"N*d must be even (N={n}, d={d})")
        if d > n - 1 or d < 0:
            problems.append(f"degree must lie in [0, N-1], got {d}")
        if not 0 <= self.rng_seed < 2**64:
            problems.append("rng_seed must be a 64-bit unsigned integer")
        if self.burn_in_steps is not None and self.burn_in_steps < 0:
            problems.append("burn_in_steps must be >= 0")
        if self.thinning is not None and self.thinning < 1:
            problems.append("thinning must be >= 1")
        if problems:
            raise ConfigError(problems)

    @property
    def burn_in(self):
        if self.burn_in_steps is None:
            return default_burn_in(self.n_vertices, self.degree)
        return self.burn_in_steps

    @property
    def thin(self):
        if self.thinning is None:
            return default_thinning(self.n_vertices, self.degree)
        return self.thinning


def circulant_seed(n, d):
    """Deterministic start: ``i ~ i +- 1, ..., i +- floor(d/2)``, plus ``i + N/2`` for odd d."""
    _check_params(n, d)
    offsets = list(range(1, d // 2 + 1))
    cols = [(np.arange(n) + s) % n for s in offsets] + [(np.arange(n) - s) % n for s in offsets]
    if d % 2:
        cols.append((np.arange(n) + n // 2) % n)
    nbrs = np.column_stack(cols) if cols else np.zeros((n, 0), dtype=np.int64)
    return RegularGraph(nbrs)


def _as_bitgen(rng):
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator
    if isinstance(rng, np.random.BitGenerator):
        return rng
    raise TypeError("rng must be a numpy Generator or BitGenerator")


class SwitchSampler:
    """Stateful switch chain; successive :meth:`sample` calls are thinned."""

    def __init__(self, cfg: SamplerConfig, start: RegularGraph | None = None):
        self.cfg = cfg
        g = start if start is not None else circulant_seed(cfg.n_vertices, cfg.degree)
        self._bits = np.array(g.bits, copy=True)
        self._edges = np.ascontiguousarray(g.edges(), dtype=np.int32)
        self._bitgen = np.random.PCG64(cfg.rng_seed)
        self._burned = False
        self.steps = 0
        self.accepted = 0

    def advance(self, n_steps):
        acc = kernels.run_switch_chain(self._bits, self._edges, self._bitgen, int(n_steps))
        self.steps += int(n_steps)
        self.accepted += int(acc)
        return acc

    def current(self):
        return RegularGraph._from_bits(self.cfg.n_vertices, self._bits)

    def current_key(self):
        return self._bits.tobytes()

    def sample(self):
        if not self._burned:
            self.advance(self.cfg.burn_in)
            self._burned = True
        else:
            self.advance(self.cfg.thin)
        return self.current()

    def samples(self, count):
        for _ in range(count):
            yield self.sample()


def switch_chain_step(g, rng):
    """One proposal of the lazy chain from ``g``; returns ``g`` itself on rejection."""
    bits = np.array(g.bits, copy=True)
    edges = np.ascontiguousarray(g.edges(), dtype=np.int32)
    if kernels.run_switch_chain(bits, edges, _as_bitgen(rng), 1):
        return RegularGraph._from_bits(g.n_vertices, bits)
    return g


def sample_uniform(cfg: SamplerConfig):
    """Chain state after the burn-in from the circulant start."""
    return SwitchSampler(cfg).sample()


def estimated_count(n, d):
    """Asymptotic number of labelled d-regular graphs on n vertices.

    Configuration-model estimate, applied to the sparser of the graph and
    its complement; accurate to within a small factor for small cases.
    """
    d = min(d, n - 1 - d)
    m = n * d
    log_count = (math.lgamma(m + 1) - math.lgamma(m / 2 + 1) - (m / 2) * math.log(2)
                 - n * math.lgamma(d + 1) - (d * d - 1) / 4)
    return math.exp(min(log_count, 700.0))


def enumerate_all(n, d, limit=ENUMERATION_LIMIT):
    """Every labelled simple d-regular graph on ``n`` vertices, each once.

    Order is lexicographic in the sorted edge list. Raises
    :class:`ResourceGuardError` once more than ``limit`` graphs are found.
    """
    _check_params(n, d)
    if estimated_count(n, d) > 10 * limit:
        raise ResourceGuardError(f"about {estimated_count(n, d):.3g} labelled {d}-regular graphs on {n} "
                                 f"vertices exceeds the limit {limit}")
    deg = [0] * n
    chosen = []
    out = []

    def place(u):
        if u == n:
            if len(out) >= limit:
                raise ResourceGuardError(f"more than {limit} labelled {d}-regular graphs on {n} vertices")
            out.append(list(chosen))
            return
        need = d - deg[u]
        cands = [v for v in range(u + 1, n) if deg[v] < d]
        if need < 0 or need > len(cands):
            return
        for combo in itertools.combinations(cands, need):
            for v in combo:
                deg[v] += 1
                chosen.append((u, v))
            # every later vertex must still be completable from vertices after u
            if all(d - deg[w] <= n - u - 2 for w in range(u + 1, n)):
                place(u + 1)
            for v in combo:
                deg[v] -= 1
                chosen.pop()

    place(0)
    return [RegularGraph.from_edges(n, edges) if edges else RegularGraph(np.zeros((n, 0), dtype=np.int32))
            for edges in out]


def _pair_index(n):
    idx = {}
    t = 0
    for u in range(n):
        for v in range(u + 1, n):
            idx[(u, v)] = idx[(v, u)] = t
            t += 1
    return idx


def switch_reachable(start, limit=ENUMERATION_LIMIT):
    """Set of edge-bitmasks reachable from ``start`` by feasible switchings.

    Exhaustive breadth-first search, used as the irreducibility oracle on
    tiny instances. Masks use bit ``t`` for the t-th pair ``u < v`` in
    lexicographic order (see :func:`edge_mask`).
    """
    n = start.n_vertices
    pidx = _pair_index(n)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    root = edge_mask(start)
    seen = {root}
    queue = deque([root])
    while queue:
        mask = queue.popleft()
        es = [pairs[t] for t in range(len(pairs)) if mask >> t & 1]
        for x in range(len(es)):
            a, b = es[x]
            for y in range(x + 1, len(es)):
                c, e = es[y]
                if len({a, b, c, e}) < 4:
                    continue
                base = mask & ~(1 << pidx[(a, b)]) & ~(1 << pidx[(c, e)])
                for p, q, r, s in ((a, c, b, e), (a, e, b, c)):
                    b1, b2 = 1 << pidx[(p, q)], 1 << pidx[(r, s)]
                    if mask & b1 or mask & b2:
                        continue
                    new = base | b1 | b2
                    if new not in seen:
                        if len(seen) >= limit:
                            raise ResourceGuardError("reachable set exceeds limit")
                        seen.add(new)
                        queue.append(new)
    return seen


def edge_mask(g):
    """Integer with bit ``t`` set iff the t-th lexicographic pair is an edge."""
    n = g.n_vertices
    a = g.adjacency(dtype=bool)
    iu = np.triu_indices(n, 1)
    bits = a[iu]
    return sum(1 << t for t in np.flatnonzero(bits).tolist())
