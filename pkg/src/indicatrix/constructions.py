"""Builders for the standard test sets and functions."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .circle_set import Arc, CircleOpenSet, InvalidInputError, as_fraction, normalize
from .gauge import LengthFamily
from .pl_function import PLFunction


def tent_train(n: int) -> PLFunction:
    """n congruent unit-height tents on [0, 1)."""
    if n < 1:
        raise InvalidInputError("tent_train needs n >= 1")
    nodes = []
    for k in range(n):
        nodes.append((Fraction(k, n), Fraction(0)))
        nodes.append((Fraction(2 * k + 1, 2 * n), Fraction(1)))
    return PLFunction(tuple(nodes))


def pierpont(b=2, K: int = 10) -> PLFunction:
    """Truncated Pierpont function, rescaled from [0, b] to the circle.

    Peaks f(1/k) = 1/k for k <= K, zeros at b and at the midpoints a_k of
    (1/(k+1), 1/k), and f = 0 on [0, a_K].
    """
    b = as_fraction(b)
    if b <= 1:
        raise InvalidInputError("pierpont needs b > 1")
    if K < 2:
        raise InvalidInputError("pierpont needs K >= 2")
    pts = [(Fraction(0), Fraction(0))]
    for k in range(K, 0, -1):
        mid = (Fraction(1, k + 1) + Fraction(1, k)) / 2
        pts.append((mid, Fraction(0)))
        pts.append((Fraction(1, k), Fraction(1, k)))
    return PLFunction(tuple((x / b, y) for x, y in pts))


def terekhin(K: int) -> PLFunction:
    """K unit tents on the bases [2^-k, 2^(1-k)], and f = 0 on [0, 2^-K]."""
    if K < 1:
        raise InvalidInputError("terekhin needs K >= 1")
    pts = [(Fraction(0), Fraction(0))]
    for k in range(K, 0, -1):
        left = Fraction(1, 2**k)
        pts.append((left, Fraction(0)))
        pts.append((3 * left / 2, Fraction(1)))
    return PLFunction(tuple(pts))


@dataclass(frozen=True)
class FatCantorSpec:
    lam: Fraction
    stage: int

    def __post_init__(self):
        lam = as_fraction(self.lam)
        if not 0 < lam < Fraction(1, 3):
            raise InvalidInputError("fat Cantor needs 0 < lambda < 1/3")
        if self.stage < 1:
            raise InvalidInputError("fat Cantor needs stage >= 1")
        object.__setattr__(self, "lam", lam)


def surviving_length(lam, m: int) -> Fraction:
    """Length of each of the 2^m closed intervals left after stage m."""
    lam = as_fraction(lam)
    return Fraction(1, 2**m) * (1 - lam * (1 - (2 * lam) ** m) / (1 - 2 * lam))


def removed_tail(lam, m: int) -> Fraction:
    """Measure removed after stage m: sum_{j > m} 2^(j-1) lam^j."""
    lam = as_fraction(lam)
    return (2 * lam) ** (m + 1) / (2 * (1 - 2 * lam))


def fat_cantor_complement(spec: FatCantorSpec) -> tuple[CircleOpenSet, LengthFamily]:
    """Union of the middle intervals removed through ``spec.stage``."""
    lam = spec.lam
    survivors = [(Fraction(0), Fraction(1))]
    removed: list[Arc] = []
    for k in range(1, spec.stage + 1):
        gap = lam**k
        nxt = []
        for lo, hi in survivors:
            mid = (lo + hi) / 2
            removed.append(Arc(mid - gap / 2, gap))
            nxt.append((lo, mid - gap / 2))
            nxt.append((mid + gap / 2, hi))
        survivors = nxt
    return normalize(removed), LengthFamily.geometric(1, 2, 1, lam, spec.stage)


def random_open_set(n_arcs: int, denom_bound: int, seed: int, wrap: bool = True) -> CircleOpenSet:
    """Seeded union of exactly ``n_arcs`` separated arcs on a grid 1/q, q <= denom_bound.

    2 * n_arcs distinct grid points are drawn and paired consecutively, so
    arcs and gaps all have positive length.  With ``wrap`` the pairing may
    start at the second point, making the last arc cross 0.
    """
    if n_arcs < 1:
        raise InvalidInputError("n_arcs must be >= 1")
    if 2 * n_arcs > denom_bound:
        raise InvalidInputError(f"cannot place {n_arcs} separated arcs with denominator <= {denom_bound}")
    rng = random.Random(seed)
    q = rng.randint(2 * n_arcs, denom_bound)
    pts = sorted(rng.sample(range(q), 2 * n_arcs))
    offset = rng.randint(0, 1) if wrap else 0
    arcs = []
    for i in range(n_arcs):
        a = pts[(2 * i + offset) % (2 * n_arcs)]
        b = pts[(2 * i + 1 + offset) % (2 * n_arcs)]
        arcs.append(Arc(Fraction(a, q), Fraction((b - a) % q, q)))
    E = normalize(arcs)
    if E.count != n_arcs:
        raise InvalidInputError("generator post-check failed")
    return E


def random_pl_function(n_nodes: int, denom_bound: int, seed: int) -> PLFunction:
    """Seeded PL function with rational nodes on a 1/q grid and values in k/q."""
    if n_nodes < 2 or n_nodes > denom_bound:
        raise InvalidInputError("need 2 <= n_nodes <= denom_bound")
    rng = random.Random(seed)
    q = rng.randint(n_nodes, denom_bound)
    xs = sorted(rng.sample(range(q), n_nodes))
    ys = [Fraction(rng.randint(0, q), q) for _ in xs]
    return PLFunction(tuple((Fraction(x, q), y) for x, y in zip(xs, ys)))
