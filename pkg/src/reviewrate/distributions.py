"""Seeded random streams plus the exact samplers and quantile functions the model needs.

Sampling is delegated to :class:`numpy.random.Generator`, whose Poisson,
binomial and hypergeometric samplers are exact for all parameter values (no
normal approximation at large rates). Quantiles go through ``scipy.special``
rather than ``scipy.stats`` to keep per-call overhead low in tight loops.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import gammaincinv, ndtri

__all__ = [
    "RngStream",
    "sample_poisson",
    "sample_binomial",
    "sample_mv_hypergeometric",
    "gamma_quantile",
    "normal_quantile",
    "empirical_quantile",
]

_MAX_SEED = 2**64


class RngStream:
    """A reproducible random stream addressed by ``(master_seed, path)``.

    Two streams with the same address produce identical draw sequences;
    streams at different paths are statistically independent. ``child``
    extends the path, so concurrent tasks can each own a disjoint subtree
    of streams without any coordination. The underlying generator is
    created lazily and is stateful: consecutive draws from one stream
    advance its state, which is why a stream must not be shared between
    concurrent tasks.
    """

    __slots__ = ("master_seed", "path", "_generator")

    def __init__(self, master_seed: int, path: Sequence[int] = ()) -> None:
        seed = int(master_seed)
        if not 0 <= seed < _MAX_SEED:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed!r}")
        key = tuple(int(i) for i in path)
        if any(i < 0 for i in key):
            raise ValueError(f"path entries must be non-negative integers, got {path!r}")
        self.master_seed = seed
        self.path = key
        self._generator: np.random.Generator | None = None

    def child(self, *indices: int) -> "RngStream":
        """Return a fresh stream whose path extends this one by ``indices``."""
        return RngStream(self.master_seed, self.path + tuple(int(i) for i in indices))

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
            self._generator = np.random.default_rng(seq)
        return self._generator

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, path={self.path})"


def sample_poisson(rate: float, rng: RngStream) -> int:
    """Draw an exact Poisson variate with the given mean. ``rate == 0`` yields 0."""
    rate = float(rate)
    if not math.isfinite(rate) or rate < 0:
        raise ValueError(f"Poisson rate must be finite and non-negative, got {rate!r}")
    if rate == 0.0:
        return 0
    return int(rng.generator.poisson(rate))


def sample_binomial(n: int, p: float, rng: RngStream) -> int:
    """Draw an exact Binomial(n, p) variate."""
    n = int(n)
    p = float(p)
    if n < 0:
        raise ValueError(f"binomial trial count must be non-negative, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binomial success probability must lie in [0, 1], got {p!r}")
    return int(rng.generator.binomial(n, p))


def sample_mv_hypergeometric(
    class_counts: Sequence[int], n_draw: int, rng: RngStream
) -> tuple[int, ...]:
    """Draw ``n_draw`` items without replacement from a pool partitioned into classes.

    Returns the per-class counts of the drawn items. Sampling is done by
    sequential conditioning: class ``k`` is drawn from a univariate
    hypergeometric given the items still undrawn, which is exact in law and
    costs one univariate draw per class.
    """
    counts = [int(c) for c in class_counts]
    n_draw = int(n_draw)
    if any(c < 0 for c in counts):
        raise ValueError(f"class counts must be non-negative, got {class_counts!r}")
    if n_draw < 0:
        raise ValueError(f"n_draw must be non-negative, got {n_draw}")
    total = sum(counts)
    if n_draw > total:
        raise ValueError(f"cannot draw {n_draw} items from a pool of {total}")

    gen = rng.generator
    remaining_pool = total
    remaining_draw = n_draw
    out = []
    for c in counts:
        if remaining_draw == 0:
            out.append(0)
        else:
            y = int(gen.hypergeometric(c, remaining_pool - c, remaining_draw))
            out.append(y)
            remaining_draw -= y
        remaining_pool -= c
    return tuple(out)


def gamma_quantile(p: float, mean: float, variance: float) -> float:
    """Quantile of the gamma distribution with the given mean and variance.

    The distribution is parameterized as shape = mean^2/variance and
    scale = variance/mean. Callers must handle the degenerate mean = 0 case
    themselves; it is rejected here.
    """
    p = float(p)
    mean = float(mean)
    variance = float(variance)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {p!r}")
    if not (mean > 0.0 and math.isfinite(mean)):
        raise ValueError(f"gamma mean must be positive and finite, got {mean!r}")
    if not (variance > 0.0 and math.isfinite(variance)):
        raise ValueError(f"gamma variance must be positive and finite, got {variance!r}")
    shape = mean * mean / variance
    scale = variance / mean
    return float(gammaincinv(shape, p) * scale)


def normal_quantile(p: float) -> float:
    """Standard normal inverse CDF."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {p!r}")
    return float(ndtri(p))


def empirical_quantile(values: Sequence[float], p: float) -> float:
    """Order-statistic quantile with linear interpolation between order statistics.

    The interpolation point sits at position ``1 + p*(n-1)`` among the sorted
    values, so ``p=0`` returns the minimum and ``p=1`` the maximum.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot take a quantile of an empty sequence")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"quantile probability must lie in [0, 1], got {p!r}")
    return float(np.quantile(arr, p))
