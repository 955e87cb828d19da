"""Continuous 1-periodic piecewise-linear functions with rational nodes.

Everything level-set related (superlevel sets, indicatrix strips, variation)
is exact.  L^p integrals of differences are exact for integer p and closed-form
floating point otherwise.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .circle_set import Arc, CircleOpenSet, InvalidInputError, as_fraction, normalize


def _is_integral(p) -> bool:
    return isinstance(p, (int, Fraction)) and not isinstance(p, bool) and Fraction(p).denominator == 1


@dataclass(frozen=True)
class PLFunction:
    """Nodes ``(x, y)`` with x strictly increasing in [0, 1) and y in [0, 1].

    The graph closes from the last node to the first node shifted by one
    period, so continuity and periodicity come for free.
    """

    nodes: tuple[tuple[Fraction, Fraction], ...]
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple((as_fraction(x), as_fraction(y)) for x, y in self.nodes)
        if len(nodes) < 2:
            raise InvalidInputError("a PL function needs at least 2 nodes")
        xs = [x for x, _ in nodes]
        if xs[0] < 0 or xs[-1] >= 1:
            raise InvalidInputError("node abscissae must lie in [0, 1)")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidInputError("node abscissae must be strictly increasing")
        if any(not 0 <= y <= 1 for _, y in nodes):
            raise InvalidInputError("node values must lie in [0, 1]")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_hash", hash(nodes))

    def __hash__(self):
        return self._hash

    @property
    def xs(self) -> list[Fraction]:
        return [x for x, _ in self.nodes]

    @property
    def ys(self) -> list[Fraction]:
        return [y for _, y in self.nodes]

    @cached_property
    def segments(self) -> tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]:
        """``(x0, y0, x1, y1)`` for each linear piece; the closing piece has x1 > 1."""
        n = len(self.nodes)
        segs = []
        for i in range(n):
            x0, y0 = self.nodes[i]
            x1, y1 = self.nodes[(i + 1) % n]
            if i == n - 1:
                x1 += 1
            segs.append((x0, y0, x1, y1))
        return tuple(segs)

    @property
    def min(self) -> Fraction:
        return min(self.ys)

    @property
    def max(self) -> Fraction:
        return max(self.ys)

    @property
    def is_constant(self) -> bool:
        return self.min == self.max

    @cached_property
    def lipschitz(self) -> Fraction:
        return max(abs(y1 - y0) / (x1 - x0) for x0, y0, x1, y1 in self.segments)

    def __call__(self, x) -> Fraction:
        x = as_fraction(x) % 1
        xs = self.xs
        k = bisect.bisect_right(xs, x) - 1
        if k < 0:
            x += 1
            k = len(xs) - 1
        x0, y0, x1, y1 = self.segments[k]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def _float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        # two periods of nodes, so np.interp covers [x_0, x_0 + 2]
        xs = np.array([float(x) for x in self.xs], dtype=float)
        ys = np.array([float(y) for y in self.ys], dtype=float)
        ext_x = np.concatenate([xs - 1, xs, xs + 1, [xs[0] + 2]])
        ext_y = np.concatenate([ys, ys, ys, [ys[0]]])
        return ext_x, ext_y

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation."""
        ext_x, ext_y = self._cached_float
        return np.interp(np.mod(x, 1.0), ext_x, ext_y)

    @cached_property
    def _cached_float(self):
        return self._float_arrays()

    def __str__(self):
        return "pl: " + " ".join(f"({x},{y})" for x, y in self.nodes)


class Strip(NamedTuple):
    y_lo: Fraction
    y_hi: Fraction
    n: int
    N: int


@dataclass(frozen=True)
class IndicatrixProfile:
    """n(y) and N(E_y) on the open strips between consecutive node levels.

    The node levels themselves are omitted; they are finitely many and carry
    no measure.  ``constant`` flags a constant function, which has no strips.
    """

    strips: tuple[Strip, ...]
    constant: bool = False

    def rows(self) -> list[dict]:
        return [s._asdict() for s in self.strips]

    def at(self, y) -> Strip | None:
        y = as_fraction(y)
        for s in self.strips:
            if s.y_lo < y < s.y_hi:
                return s
        return None


def superlevel_set(f: PLFunction, y) -> CircleOpenSet:
    """The open set {x : f(x) > y}, exactly."""
    return _superlevel_set(f, as_fraction(y))


@lru_cache(maxsize=8192)
def _superlevel_set(f: PLFunction, y: Fraction) -> CircleOpenSet:
    ys = f.ys
    if all(v > y for v in ys):
        return CircleOpenSet.full()
    n = len(ys)
    s = next(i for i, v in enumerate(ys) if v <= y)
    arcs: list[Arc] = []
    run_start: Fraction | None = None
    run_end: Fraction | None = None
    shift = Fraction(0)
    for step in range(n):
        i = (s + step) % n
        x0, y0, x1, y1 = f.segments[i]
        x0 += shift
        x1 += shift
        if i == n - 1:
            shift += 1
        if y0 > y and y1 > y:
            lo, hi = x0, x1
        elif y0 > y:
            lo, hi = x0, x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        elif y1 > y:
            lo, hi = x0 + (y - y0) * (x1 - x0) / (y1 - y0), x1
        else:
            continue
        if run_start is None:
            run_start = lo
        run_end = hi
        if y1 <= y or hi != x1:
            arcs.append(Arc(run_start, run_end - run_start))
            run_start = None
    if run_start is not None:
        arcs.append(Arc(run_start, run_end - run_start))
    return normalize(arcs)


def crossing_segments(f: PLFunction, y) -> list[int]:
    """Indices of segments that cross level y strictly, in circle order."""
    y = as_fraction(y)
    return [i for i, (_, y0, _, y1) in enumerate(f.segments) if min(y0, y1) < y < max(y0, y1)]


def indicatrix_profile(f: PLFunction) -> IndicatrixProfile:
    levels = sorted(set(f.ys))
    if len(levels) == 1:
        return IndicatrixProfile((), constant=True)
    strips = []
    for lo, hi in zip(levels, levels[1:]):
        mid = (lo + hi) / 2
        n = len(crossing_segments(f, mid))
        N = superlevel_set(f, mid).count
        strips.append(Strip(lo, hi, n, N))
    return IndicatrixProfile(tuple(strips))


def banach_integral(f: PLFunction) -> Fraction:
    """Integral of the Banach indicatrix n(y) over [0, 1]."""
    prof = indicatrix_profile(f)
    return sum(((s.y_hi - s.y_lo) * s.n for s in prof.strips), Fraction(0))


def total_variation(f: PLFunction) -> Fraction:
    return sum((abs(y1 - y0) for _, y0, _, y1 in f.segments), Fraction(0))


def _closed_values(f: PLFunction) -> list[Fraction]:
    ys = f.ys
    return ys + [ys[0]]


def _extrema_indices(vals: Sequence) -> list[int]:
    """First, last and every interior turning point (plateaus collapsed)."""
    keep = [0]
    for i in range(1, len(vals) - 1):
        if vals[i] == vals[keep[-1]]:
            continue
        nxt = next((vals[j] for j in range(i + 1, len(vals)) if vals[j] != vals[i]), None)
        if nxt is None:
            break
        if (vals[i] - vals[keep[-1]]) * (nxt - vals[i]) < 0:
            keep.append(i)
    keep.append(len(vals) - 1)
    return keep


def p_variation(f: PLFunction, p=1):
    """sup over partitions of one period [x_0, x_0 + 1] of sum |df|^p.

    On each linear piece the best partition point is a node, and nodes in the
    middle of a monotone run never help, so a quadratic DP over the turning
    points suffices.  Exact for integer p.
    """
    if p < 1:
        raise InvalidInputError("p-variation needs p >= 1")
    vals = _closed_values(f)
    if not _is_integral(p):
        vals = [float(v) for v in vals]
        p = float(p)
    else:
        p = int(p)
    pts = [vals[i] for i in _extrema_indices(vals)]
    best = [pts[0] * 0] * len(pts)
    for j in range(1, len(pts)):
        best[j] = max(best[i] + abs(pts[j] - pts[i]) ** p for i in range(j))
    return best[-1]


def p_variation_bruteforce(f: PLFunction, p=1):
    """Enumerate every partition drawn from the node set."""
    vals = _closed_values(f)
    if not _is_integral(p):
        vals = [float(v) for v in vals]
    inner = range(1, len(vals) - 1)
    best = None
    for r in range(len(inner) + 1):
        for subset in itertools.combinations(inner, r):
            idx = (0, *subset, len(vals) - 1)
            total = sum(abs(vals[b] - vals[a]) ** p for a, b in zip(idx, idx[1:]))
            if best is None or total > best:
                best = total
    return best


def _abs_power_integral(g0, g1, length, p):
    """Integral of |g|^p over an interval where g is linear from g0 to g1."""
    if (g0 > 0 > g1) or (g0 < 0 < g1):
        root = length * g0 / (g0 - g1)
        return _abs_power_integral(g0, 0 * g0, root, p) + _abs_power_integral(0 * g1, g1, length - root, p)
    a, b = abs(g0), abs(g1)
    if _is_integral(p):
        # (a^(p+1) - b^(p+1)) / (a - b) expanded, valid when a == b
        s = sum(a**i * b ** (p - i) for i in range(p + 1))
        return length * s / (p + 1)
    if a == b:
        return length * a**p
    return length * (a ** (p + 1) - b ** (p + 1)) / ((p + 1) * (a - b))


def modulus_at(f: PLFunction, h, p=1):
    """Integral over one period of |f(x + h) - f(x)|^p (the p-th power, no root).

    Exact rational for integer p and rational h.
    """
    if p < 1:
        raise InvalidInputError("p must be >= 1")
    if _is_integral(p):
        p = int(p)
        h = as_fraction(h)
    else:
        p = float(p)
        if isinstance(h, Fraction):
            h = float(h)
        return float(_lp_power_integrals(f, np.array([float(h)]), p)[0])
    h = h % 1
    if h == 0:
        return Fraction(0)
    cuts = {Fraction(0), Fraction(1)}
    for x in f.xs:
        cuts.add(x)
        cuts.add((x - h) % 1)
    grid = sorted(cuts)
    g = [f(x + h) - f(x) for x in grid]
    total = Fraction(0)
    for k in range(len(grid) - 1):
        total += _abs_power_integral(g[k], g[k + 1], grid[k + 1] - grid[k], p)
    return total


def _lp_power_integrals(f: PLFunction, hs: np.ndarray, p: float, chunk: int = 512) -> np.ndarray:
    """Float version of :func:`modulus_at` for many shifts at once."""
    xs = np.array([float(x) for x in f.xs])
    out = np.empty(len(hs))
    for lo in range(0, len(hs), chunk):
        h = np.mod(hs[lo:lo + chunk], 1.0)[:, None]
        cuts = np.concatenate(
            [np.broadcast_to(xs, (len(h), len(xs))), np.mod(xs[None, :] - h, 1.0),
             np.zeros((len(h), 1)), np.ones((len(h), 1))], axis=1)
        cuts.sort(axis=1)
        g = f.evaluate(cuts + h) - f.evaluate(cuts)
        g0, g1 = g[:, :-1], g[:, 1:]
        width = np.diff(cuts, axis=1)
        a, b = np.abs(g0), np.abs(g1)
        cross = g0 * g1 < 0
        u, v = np.maximum(a, b), np.minimum(a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            # (u^(p+1) - v^(p+1)) / (u - v) without cancellation when u ~ v
            num = -(u ** (p + 1)) * np.expm1((p + 1) * np.log1p((v - u) / u))
            same = np.where(u - v > 0, width * num / ((p + 1) * (u - v)), width * u**p)
            # a sign change splits the piece into two triangles
            tri = width * (a ** (p + 1) + b ** (p + 1)) / ((p + 1) * (a + b))
        same = np.where(u > 0, same, 0.0)
        val = np.where(cross, tri, same)
        val = np.where(width > 0, val, 0.0)
        out[lo:lo + chunk] = val.sum(axis=1)
    return out


class ModulusEstimate(NamedTuple):
    value: float
    error_bound: float
    argmax: float


def node_differences(f: PLFunction, t) -> list[Fraction]:
    """Node-abscissa differences mod 1 lying in (0, t]."""
    xs = f.xs
    return sorted({d for a in xs for b in xs if 0 < (d := (a - b) % 1) <= t})


def modulus(f: PLFunction, t, p=1, grid: int = 256) -> ModulusEstimate:
    """omega(f, t)_p = sup_{0 < h <= t} (modulus_at(f, h, p))^(1/p), bracketed.

    Candidates are the node differences in (0, t] plus a uniform grid of step
    t / grid; the best candidate is then polished between its neighbours.  The true sup lies in [value, value + error_bound]: shifting h by
    d changes the L^p norm by at most ||f(. + d) - f||_p, which is at most
    (M^(p-1) d V(f))^(1/p) with M = min(osc f, Lip(f) d).
    """
    t = as_fraction(t)
    if not 0 < t <= Fraction(1, 2):
        raise InvalidInputError(f"t must lie in (0, 1/2], got {t}")
    if p < 1:
        raise InvalidInputError("p must be >= 1")
    if f.is_constant:
        return ModulusEstimate(0.0, 0.0, float(t))
    cands = np.array(
        sorted({float(d) for d in node_differences(f, t)} | {float(t) * k / grid for k in range(1, grid + 1)})
    )
    vals = _lp_power_integrals(f, cands, float(p))
    k = int(np.argmax(vals))
    best_h, best = float(cands[k]), float(vals[k])
    # polish the grid winner between its neighbours
    lo = float(cands[k - 1]) if k > 0 else 0.0
    hi = float(cands[k + 1]) if k + 1 < len(cands) else float(t)
    if hi > lo:
        res = minimize_scalar(
            lambda h: -_lp_power_integrals(f, np.array([h]), float(p))[0],
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-13},
        )
        if -res.fun > best:
            best_h, best = float(res.x), float(-res.fun)
    value = max(best, 0.0) ** (1.0 / p)
    delta = float(t) / grid
    osc = float(f.max - f.min)
    m = min(osc, float(f.lipschitz) * delta)
    err = (m ** (p - 1) * delta * float(total_variation(f))) ** (1.0 / p) + 1e-12
    return ModulusEstimate(value, err, best_h)


def strip_arcs(f: PLFunction, y_lo, y_hi) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Arcs of E_y for y strictly inside a strip, as affine functions of y.

    Returns ``(start_at_lo, start_slope, length_at_lo, length_slope)`` per
    arc, i.e. start(y) = start_at_lo + start_slope * (y - y_lo) and likewise
    for the length.  Values at the strip ends are one-sided limits.
    """
    y_lo, y_hi = as_fraction(y_lo), as_fraction(y_hi)
    mid = (y_lo + y_hi) / 2
    idx = crossing_segments(f, mid)
    if not idx:
        return []

    def crossing(i):
        x0, y0, x1, y1 = f.segments[i]
        slope = (x1 - x0) / (y1 - y0)
        return x0 + (y_lo - y0) * slope, slope, y1 > y0

    info = [crossing(i) for i in idx]
    out = []
    m = len(info)
    for k in range(m):
        x_up, s_up, rising = info[k]
        if not rising:
            continue
        x_dn, s_dn, _ = info[(k + 1) % m]
        start_mid = x_up + s_up * (mid - y_lo)
        end_mid = x_dn + s_dn * (mid - y_lo)
        wrap = 0 if end_mid > start_mid else 1
        out.append((x_up, s_up, x_dn + wrap - x_up, s_dn - s_up))
    return out


def endpoint_speed(f: PLFunction, y_lo, y_hi) -> Fraction:
    """Sum of |dx/dy| over crossing segments: |E_y symdiff E_y'| <= speed * |y - y'|."""
    mid = (as_fraction(y_lo) + as_fraction(y_hi)) / 2
    total = Fraction(0)
    for i in crossing_segments(f, mid):
        x0, y0, x1, y1 = f.segments[i]
        total += abs((x1 - x0) / (y1 - y0))
    return total


def integrated_tau(f: PLFunction, h) -> Fraction:
    """Integral over y of tau(h, E_y), via the identity with the L^1 difference.

    For fixed x the set of y with exactly one of f(x), f(x + h) above y has
    length |f(x + h) - f(x)|; integrate in x.
    """
    return modulus_at(f, as_fraction(h), 1)


def integrated_tau_by_levels(f: PLFunction, h) -> Fraction:
    """Integral over y of tau(h, E_y), level by level.

    Inside a strip the arc endpoints move affinely in y, so tau(h, E_y) is
    piecewise linear in y with kinks where two endpoints differ by h mod 1.
    The midpoint rule is exact on each linear piece.
    """
    from .circle_set import tau

    h = as_fraction(h)
    total = Fraction(0)
    for strip in indicatrix_profile(f).strips:
        arcs = strip_arcs(f, strip.y_lo, strip.y_hi)
        ends = []
        for s0, ss, l0, ls in arcs:
            ends.append((s0, ss))
            ends.append((s0 + l0, ss + ls))
        cuts = {strip.y_lo, strip.y_hi}
        for (a0, as_), (b0, bs) in itertools.product(ends, repeat=2):
            ds = as_ - bs
            if ds == 0:
                continue
            for k in range(-2, 3):
                y = strip.y_lo + (h + k - (a0 - b0)) / ds
                if strip.y_lo < y < strip.y_hi:
                    cuts.add(y)
        grid = sorted(cuts)
        for lo, hi in zip(grid, grid[1:]):
            total += (hi - lo) * tau(superlevel_set(f, (lo + hi) / 2), h)
    return total


def layer_cake_value(f: PLFunction, x) -> Fraction:
    """y-measure of {y in [0, 1] : x in E_y}, computed strip by strip."""
    x = as_fraction(x)
    levels = sorted(set(f.ys) | {Fraction(0), Fraction(1), f(x)})
    total = Fraction(0)
    for lo, hi in zip(levels, levels[1:]):
        if x in superlevel_set(f, (lo + hi) / 2):
            total += hi - lo
    return total
