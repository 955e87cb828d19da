"""Open subsets of the circle [0, 1) with exact rational endpoints.

A set is stored as a sorted tuple of disjoint open arcs.  Each arc is a
``(start, length)`` pair and may wrap past 1.  An arc of length 1 stands for
the whole circle; the single missing point carries no measure and is ignored
everywhere.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidInputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(c in text for c in ".eE"):
            raise InvalidInputError(f"float literal not accepted in exact mode: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot parse rational {value!r}") from exc
    raise InvalidInputError(f"not a rational: {value!r}")


@dataclass(frozen=True, order=True)
class Arc:
    start: Fraction
    length: Fraction

    def __post_init__(self):
        start = as_fraction(self.start)
        length = as_fraction(self.length)
        if length <= 0 or length > 1:
            raise InvalidInputError(f"arc length must lie in (0, 1], got {length}")
        object.__setattr__(self, "start", start % 1)
        object.__setattr__(self, "length", length)

    @property
    def end(self) -> Fraction:
        """Unwrapped right endpoint, in (0, 2)."""
        return self.start + self.length

    @property
    def wraps(self) -> bool:
        return self.end > 1

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """The arc cut at 0 into subintervals of [0, 1]."""
        if self.end <= 1:
            return [(self.start, self.end)]
        return [(Fraction(0), self.end - 1), (self.start, Fraction(1))]


@dataclass(frozen=True)
class CircleOpenSet:
    """Finite disjoint union of open arcs.  Build it with :func:`normalize`."""

    arcs: tuple[Arc, ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "_hash", hash(self.arcs))

    def __hash__(self):
        return self._hash

    @classmethod
    def empty(cls) -> CircleOpenSet:
        return cls(())

    @classmethod
    def full(cls) -> CircleOpenSet:
        return cls((Arc(Fraction(0), Fraction(1)),))

    @classmethod
    def of(cls, *pairs) -> CircleOpenSet:
        """``CircleOpenSet.of((start, length), ...)``, normalized."""
        return normalize([Arc(s, l) for s, l in pairs])

    @cached_property
    def measure(self) -> Fraction:
        return sum((a.length for a in self.arcs), Fraction(0))

    @property
    def count(self) -> int:
        """N(E): the number of component arcs."""
        return len(self.arcs)

    @property
    def lengths(self) -> list[Fraction]:
        return [a.length for a in self.arcs]

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    @property
    def is_full(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].length == 1

    @cached_property
    def pieces(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Sorted disjoint subintervals of [0, 1] covering the set."""
        out: list[tuple[Fraction, Fraction]] = []
        for arc in self.arcs:
            out.extend(arc.pieces())
        out.sort()
        return tuple(out)

    def endpoints(self) -> list[Fraction]:
        pts = []
        for arc in self.arcs:
            pts.append(arc.start)
            pts.append(arc.end % 1)
        return pts

    def gaps(self) -> list[Fraction]:
        """Lengths of the closed complementary arcs (components of K)."""
        if self.is_empty:
            return [Fraction(1)]
        if self.is_full:
            return []
        out = []
        n = len(self.arcs)
        for i, arc in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % n]
            out.append((nxt.start - arc.end) % 1)
        return out

    def __contains__(self, x) -> bool:
        x = x % 1
        if self.is_full:
            return True
        for arc in self.arcs:
            if 0 < (x - arc.start) % 1 < arc.length:
                return True
        return False

    def __str__(self):
        if self.is_empty:
            return "{}"
        return ", ".join(f"{a.start}+{a.length}" for a in self.arcs)


def normalize(raw_arcs: Iterable[Arc]) -> CircleOpenSet:
    """Union of arcs as a canonical :class:`CircleOpenSet`.

    Overlapping arcs are merged.  Arcs that merely touch stay separate, since
    the shared endpoint is not in the union; the one exception is the point 0,
    which joins two pieces when some input arc covers it.
    """
    arcs = list(raw_arcs)
    for arc in arcs:
        if not isinstance(arc, Arc):
            raise InvalidInputError(f"expected Arc, got {arc!r}")
    if any(a.length == 1 for a in arcs):
        return CircleOpenSet.full()

    zero_covered = any(a.wraps for a in arcs)
    pieces = sorted(p for a in arcs for p in a.pieces())
    merged: list[list[Fraction]] = []
    for lo, hi in pieces:
        if merged and lo < merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])

    if not merged:
        return CircleOpenSet.empty()
    if len(merged) == 1 and merged[0] == [0, 1]:
        return CircleOpenSet.full()

    out: list[Arc] = []
    head = merged[0]
    tail = merged[-1]
    join = zero_covered and len(merged) > 1 and head[0] == 0 and tail[1] == 1
    body = merged[1:-1] if join else merged
    for lo, hi in body:
        out.append(Arc(lo, hi - lo))
    if join:
        out.append(Arc(tail[0], (1 - tail[0]) + head[1]))
    out.sort()
    return CircleOpenSet(tuple(out))


def measure(E: CircleOpenSet) -> Fraction:
    return E.measure


def translate(E: CircleOpenSet, h) -> CircleOpenSet:
    """The rotated set {x - h mod 1 : x in E}."""
    h = as_fraction(h)
    if E.is_full or E.is_empty:
        return E
    return CircleOpenSet(tuple(sorted(Arc(a.start - h, a.length) for a in E.arcs)))


def _overlap(p: Sequence[tuple[Fraction, Fraction]], q: Sequence[tuple[Fraction, Fraction]]) -> Fraction:
    """Measure of the intersection of two sorted disjoint interval lists."""
    total = Fraction(0)
    i = j = 0
    while i < len(p) and j < len(q):
        lo = max(p[i][0], q[j][0])
        hi = min(p[i][1], q[j][1])
        if hi > lo:
            total += hi - lo
        if p[i][1] < q[j][1]:
            i += 1
        else:
            j += 1
    return total


def tau(E: CircleOpenSet, h) -> Fraction:
    """Measure of {x : chi_E(x + h) != chi_E(x)}, i.e. |E symdiff (E - h)|."""
    h = as_fraction(h)
    if h < 0:
        raise InvalidInputError("tau requires h >= 0")
    if E.is_empty or E.is_full or h % 1 == 0:
        return Fraction(0)
    shifted = translate(E, h)
    return 2 * (E.measure - _overlap(E.pieces, shifted.pieces))


def one_sided_incidence(E: CircleOpenSet, h) -> Fraction:
    """Measure of {x in E : x + h in K}.  Always exactly tau(E, h) / 2."""
    h = as_fraction(h)
    if E.is_empty or E.is_full:
        return Fraction(0)
    # x in E and x + h in K  <=>  x in E minus (E - h)
    return E.measure - _overlap(E.pieces, translate(E, h).pieces)


@dataclass(frozen=True)
class _Autocorrelation:
    """A(h) = |E intersect (E - h)| as a piecewise-linear function of h in [0, 1).

    Everything is scaled by the common denominator D of the endpoints, so
    breakpoints are integers x = h * D.  A'' is a signed sum of point masses
    at the differences e - e' of endpoints, with weight -s(e) s(e') where s
    is +1 at left endpoints and -1 at right endpoints.  ``twice`` holds
    2 * D * A at each breakpoint and ``slopes`` the slope 2 * A' just after it.
    """

    D: int
    breaks: tuple[int, ...]
    twice: tuple[int, ...]
    slopes: tuple[int, ...]

    def value(self, h: Fraction) -> Fraction:
        x = h * self.D
        i = bisect_right(self.breaks, x) - 1
        return (self.twice[i] + self.slopes[i] * (x - self.breaks[i])) / (2 * self.D)

    def values_at(self, hs: Sequence[Fraction]) -> list[Fraction]:
        return [self.value(Fraction(h)) for h in hs]


@lru_cache(maxsize=4096)
def _autocorrelation(E: CircleOpenSet) -> _Autocorrelation:
    D = 1
    for arc in E.arcs:
        D = lcm(D, arc.start.denominator, arc.length.denominator)
    signed = []
    for arc in E.arcs:
        a = arc.start.numerator * (D // arc.start.denominator)
        b = (a + arc.length.numerator * (D // arc.length.denominator)) % D
        signed.append((a, 1))
        signed.append((b, -1))
    weights: dict[int, int] = {}
    for e, se in signed:
        for f, sf in signed:
            d = (e - f) % D
            weights[d] = weights.get(d, 0) - se * sf
    at_zero = weights.pop(0, 0)
    breaks = [0]
    twice = [2 * E.measure.numerator * (D // E.measure.denominator)]
    slopes = [at_zero]
    for d in sorted(d for d, w in weights.items() if w):
        twice.append(twice[-1] + slopes[-1] * (d - breaks[-1]))
        slopes.append(slopes[-1] + 2 * weights[d])
        breaks.append(d)
    return _Autocorrelation(D, tuple(breaks), tuple(twice), tuple(slopes))


def critical_shifts(E: CircleOpenSet, t) -> list[Fraction]:
    """Endpoint differences mod 1 lying in (0, t], together with t itself."""
    t = as_fraction(t)
    ends = sorted(set(E.endpoints()))
    diffs = {(a - b) % 1 for a in ends for b in ends}
    out = sorted(d for d in diffs if 0 < d <= t)
    if not out or out[-1] != t:
        out.append(t)
    return out


def tau_sup(E: CircleOpenSet, t) -> Fraction:
    """sup of tau(E, h) over h in (0, t], exactly.

    tau is piecewise linear in h with kinks only at endpoint differences, so
    the sup is attained on :func:`critical_shifts`.
    """
    return tau_sup_with_argmax(E, t)[0]


def tau_sup_with_argmax(E: CircleOpenSet, t) -> tuple[Fraction, Fraction]:
    t = as_fraction(t)
    if not 0 < t <= Fraction(1, 2):
        raise InvalidInputError(f"t must lie in (0, 1/2], got {t}")
    if E.is_empty or E.is_full:
        return Fraction(0), t
    ac = _autocorrelation(E)
    # min of the overlap over breakpoints in (0, t], in integer units
    best_x, best = None, None
    top = t * ac.D
    for x, v in zip(ac.breaks[1:], ac.twice[1:]):
        if x > top:
            break
        if best is None or v < best:
            best_x, best = x, v
    at_t = ac.value(t)
    if best is None or at_t < Fraction(best, 2 * ac.D):
        return 2 * (E.measure - at_t), t
    return 2 * (E.measure - Fraction(best, 2 * ac.D)), Fraction(best_x, ac.D)


def kh_deficit(E: CircleOpenSet, h) -> Fraction:
    """|K(h) minus K| for K the complement of E: the points of E within h of K.

    Equals the sum over components of min(length, 2h).  The incidence set
    {x in E : x + h in K} sits inside it, so tau(E, h) <= 2 * kh_deficit; the
    factor 2 can be dropped when every component is at least 2h long.
    """
    h = as_fraction(h)
    if h < 0:
        raise InvalidInputError("kh_deficit requires h >= 0")
    if E.is_empty or E.is_full:
        return Fraction(0)
    return sum((min(l, 2 * h) for l in E.lengths), Fraction(0))


def kh_measure(E: CircleOpenSet, h) -> Fraction:
    """|K(h)|, the closed h-neighborhood of the complement."""
    if E.is_full:
        return Fraction(0)
    return (1 - E.measure) + kh_deficit(E, h)


def tau_bruteforce(E: CircleOpenSet, h) -> Fraction:
    """Reference tau: test indicator disagreement on every cell of the
    common refinement of the endpoints of E and of E - h."""
    h = as_fraction(h)
    if E.is_empty or E.is_full:
        return Fraction(0)
    cuts = {Fraction(0), Fraction(1), (-h) % 1}
    for e in E.endpoints():
        cuts.add(e % 1)
        cuts.add((e - h) % 1)
    grid = sorted(cuts)
    total = Fraction(0)
    for lo, hi in zip(grid, grid[1:]):
        mid = (lo + hi) / 2
        if (mid in E) != ((mid + h) in E):
            total += hi - lo
    return total
