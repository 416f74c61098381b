"""Prime-ideal norm events up to x and the global sums over them.

Events are aggregated per rational prime p: one event carries the common norm
p^f of the g prime ideals above p, with multiplicity g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .arith import DEFAULT_SEGMENT, iter_prime_segments
from .field_catalog import FieldSpec, splitting_arrays

DEFAULT_MAX_EVENTS = 50_000_000


class ResourceCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class NormEvent:
    p: int
    norm: int
    multiplicity: int
    log_norm: float


@dataclass(frozen=True)
class NormArrays:
    """Columnar form of the event stream, ordered by p."""

    p: np.ndarray
    norm: np.ndarray
    mult: np.ndarray
    log_norm: np.ndarray
    x: int

    def __len__(self) -> int:
        return int(self.p.shape[0])

    @property
    def weight(self) -> np.ndarray:
        """multiplicity * log(norm): the theta-mass carried by each event."""
        return self.mult * self.log_norm

    def events(self) -> Iterator[NormEvent]:
        for p, n, m, lg in zip(self.p.tolist(), self.norm.tolist(), self.mult.tolist(), self.log_norm.tolist()):
            yield NormEvent(p, n, m, lg)


def _segment_events(F: FieldSpec, ps: np.ndarray, x: int, include_ramified: bool):
    e, f, g, exact = splitting_arrays(F, ps)
    keep = exact.copy()
    if not include_ramified:
        keep &= e == 1
    norm = ps.copy()
    high = f > 1
    if np.any(high):
        # p^f <= x forces p <= sqrt(x); the few survivors are handled exactly
        for i in np.flatnonzero(high & keep):
            val = int(ps[i]) ** int(f[i])
            if val > x:
                keep[i] = False
            else:
                norm[i] = val
    keep &= norm <= x
    ps, norm, f, g = ps[keep], norm[keep], f[keep], g[keep]
    return ps, norm, g, f * np.log(ps.astype(np.float64))


def norm_arrays_range(
    F: FieldSpec,
    lo: int,
    hi: int,
    x: int,
    segment: int = DEFAULT_SEGMENT,
    include_ramified: bool = True,
) -> NormArrays:
    """Events for rational primes p in [lo, hi] with norm <= x."""
    cols: list[tuple] = []
    for ps in iter_prime_segments(lo, min(hi, x), segment):
        cols.append(_segment_events(F, ps, x, include_ramified))
    if not cols:
        empty_i = np.empty(0, dtype=np.int64)
        return NormArrays(empty_i, empty_i, empty_i, np.empty(0), x)
    p, norm, mult, lg = (np.concatenate(c) for c in zip(*cols))
    return NormArrays(p, norm, mult, lg, x)


def norm_arrays(
    F: FieldSpec,
    x: int,
    segment: int = DEFAULT_SEGMENT,
    include_ramified: bool = True,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> NormArrays:
    """All norm events with norm <= x, built with a segmented sieve."""
    # pi(x) < 1.26 x / log x bounds the event count
    if x >= 17 and 1.26 * x / math.log(x) > max_events:
        raise ResourceCapExceeded(f"x={x} exceeds the event cap {max_events}")
    return norm_arrays_range(F, 2, x, x, segment, include_ramified)


def enumerate_norms(F: FieldSpec, x: int, segment: int = DEFAULT_SEGMENT) -> Iterator[NormEvent]:
    """Stream NormEvents in increasing order of p, one sieve segment at a time."""
    if x < 2:
        return
    for ps in iter_prime_segments(2, x, segment):
        p, norm, mult, lg = _segment_events(F, ps, x, True)
        yield from NormArrays(p, norm, mult, lg, x).events()


def theta_total(F: FieldSpec, x: int) -> float:
    """Sum of log N(p) over prime ideals with N(p) <= x."""
    if x < 2:
        return 0.0
    ev = norm_arrays(F, x)
    return math.fsum(ev.weight.tolist())


def equal_norm_square_sum(F: FieldSpec, x: int) -> float:
    """Sum over N(p) <= x of sum over p' with N(p') = N(p) of (log N(p))^2."""
    if x < 2:
        return 0.0
    ev = norm_arrays(F, x)
    return math.fsum((ev.mult**2 * ev.log_norm**2).tolist())


def merge_sums(parts: list[float]) -> float:
    """Order-independent merge of per-range partial sums."""
    return math.fsum(parts)
