"""Evaluators and certificates for the incidence and modulus inequalities.

Every check returns a :class:`BoundReport` carrying the worst-case quantity,
the bound it is compared against, and the parameter points that realise it.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .circle_set import (
    CircleOpenSet,
    InvalidInputError,
    as_fraction,
    tau,
    tau_sup,
)
from .constructions import FatCantorSpec, fat_cantor_complement, random_open_set, removed_tail
from .gauge import GaugeFunction, LengthFamily, gauge_sum, validate_phi
from .pl_function import (
    PLFunction,
    endpoint_speed,
    indicatrix_profile,
    integrated_tau,
    modulus,
    strip_arcs,
    superlevel_set,
)


class DivergentSumError(InvalidInputError):
    """A gauge sum that a bound needs is infinite."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class BoundReport:
    name: str
    quantity: float
    bound: float
    witnesses: list = field(default_factory=list)
    tolerance: float = 0.0
    bounded: bool = True  # tail check for rate sequences

    @property
    def slack(self) -> float:
        return float(self.bound) - float(self.quantity)

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance and self.bounded

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "quantity": float(self.quantity),
            "bound": float(self.bound),
            "slack": self.slack,
            "passed": self.passed,
            "bounded": self.bounded,
            "witnesses": [[_plain(v) for v in w] for w in self.witnesses],
        }


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# --- one-dimensional incidence bounds ---------------------------------------


def lemma33_bound(E: CircleOpenSet, h) -> Fraction:
    """2 * sum over components of min(l_k, h): the length-only bound on tau."""
    h = as_fraction(h)
    if h <= 0:
        raise InvalidInputError("h must be positive")
    return 2 * sum((min(l, h) for l in E.lengths), Fraction(0))


def theorem34_bound(L: LengthFamily, g: GaugeFunction, h) -> float:
    """(2 / phi(h)) * (c h phi(h) + sum l phi(l)).

    Requires 0 < h < 1/c and a finite gauge sum; a divergent sum raises
    :class:`DivergentSumError` with the family and gauge as witness.
    """
    h = float(h)
    if not 0 < h < 1 / g.c:
        raise InvalidInputError(f"h must lie in (0, 1/c) = (0, {1 / g.c:.6g})")
    s = gauge_sum(L, g)
    if math.isinf(s):
        raise DivergentSumError(f"gauge sum diverges for {g}", witness=(L, str(g)))
    ph = g(h)
    return 2 / ph * (g.c * h * ph + s)


def tail_bounded(seq: Sequence[float], rel: float = 1e-9) -> bool:
    """Monotone-tail check: the second half never exceeds the first half's max."""
    seq = [float(v) for v in seq]
    if len(seq) < 2:
        return True
    half = len(seq) // 2
    head = max(seq[:half])
    return max(seq[half:]) <= head * (1 + rel) + 1e-300


# --- level-set integrals ----------------------------------------------------


def _level_cells(f: PLFunction, y_nodes: int):
    """Yield (strip, y_mid, width, speed) over midpoint cells of each strip."""
    for strip in indicatrix_profile(f).strips:
        w = strip.y_hi - strip.y_lo
        speed = endpoint_speed(f, strip.y_lo, strip.y_hi)
        for k in range(y_nodes):
            y = strip.y_lo + w * (2 * k + 1) / (2 * y_nodes)
            yield strip, y, w / y_nodes, speed


def prop32_rhs(f: PLFunction, t, p=1, y_nodes: int = 4) -> tuple[float, float]:
    """Integral over y of tau_sup(E_y, t)^(1/p), with a certified error.

    Midpoint rule on ``y_nodes`` cells per strip.  Inside a strip
    |E_y symdiff E_y'| <= speed * |y - y'|, so y -> tau_sup(E_y, t) is
    2 * speed Lipschitz and the midpoint error per cell of width d is at most
    speed * d^2 / 2 (p = 1) or 2 (2 speed)^(1/p) (d/2)^(1+1/p) / (1 + 1/p).
    Levels outside (min f, max f) give the full or empty set, where tau = 0.
    """
    t = as_fraction(t)
    if not 0 < t <= Fraction(1, 2):
        raise InvalidInputError("t must lie in (0, 1/2]")
    if p < 1 or y_nodes < 1:
        raise InvalidInputError("need p >= 1 and y_nodes >= 1")
    value = 0.0
    err = 0.0
    q = 1.0 / float(p)
    for _, y, d, speed in _level_cells(f, y_nodes):
        ts = float(tau_sup(superlevel_set(f, y), t))
        value += float(d) * ts**q
        lam2 = 2 * float(speed)
        if p == 1:
            err += lam2 * float(d) ** 2 / 4
        else:
            err += 2 * lam2**q * (float(d) / 2) ** (1 + q) / (1 + q)
    return value, err


def level_gauge_integral(f: PLFunction, g: GaugeFunction) -> float:
    """Integral over y of sum_k l_{y,k} phi(l_{y,k}), strip-exact.

    Arc lengths are affine in y inside each strip, so each arc contributes
    the integral of t phi(t) between its end lengths divided by the rate.
    Below min f the superlevel set is the whole circle (one length 1).
    """
    total = (float(f.min) * g.psi(1.0)) if f.min > 0 else 0.0
    for strip in indicatrix_profile(f).strips:
        w = strip.y_hi - strip.y_lo
        for _, _, l0, ls in strip_arcs(f, strip.y_lo, strip.y_hi):
            l1 = l0 + ls * w
            if ls == 0:
                total += float(w) * g.psi(float(l0))
            else:
                total += g.psi_integral(float(min(l0, l1)), float(max(l0, l1))) / abs(float(ls))
    return total


def root_indicatrix_integral(f: PLFunction, p) -> float:
    """Integral of n(y)^(1/p) over the strips."""
    return math.fsum(float(s.y_hi - s.y_lo) * s.n ** (1 / float(p)) for s in indicatrix_profile(f).strips)


def theorem23_constant(f: PLFunction, g: GaugeFunction) -> float:
    """2 (B + integral of the level gauge sums) with B = phi(1/c) >= c h phi(h)."""
    B = g(1 / g.c)
    return 2 * (B + level_gauge_integral(f, g))


# --- Fat Cantor envelope and exponents --------------------------------------


def fcs_exponent(lam) -> float:
    lam = float(as_fraction(lam))
    return 1 - math.log(2) / math.log(1 / lam)


def fcs_envelope(lam, h) -> tuple[float, float]:
    """Lower and upper bounds for tau(h, E) on the full Fat Cantor complement.

    upper = (3 - 4 lam) / (1 - 2 lam) * h^e and
    lower = (1/8) (1 - h^(gamma - 1) A / B^gamma) * h^e, with e the sharp
    exponent, A = lam / (1 - 2 lam), B = (1 - 3 lam) / (1 - 2 lam) and
    gamma = log2(1 / lam).
    """
    lam = as_fraction(lam)
    if not 0 < lam < Fraction(1, 3):
        raise InvalidInputError("need 0 < lambda < 1/3")
    hf = float(h)
    if not 0 < hf <= float(lam):
        raise InvalidInputError("need 0 < h <= lambda")
    l = float(lam)
    ex = fcs_exponent(lam)
    A = l / (1 - 2 * l)
    B = (1 - 3 * l) / (1 - 2 * l)
    gamma = math.log2(1 / l)
    upper = (3 - 4 * l) / (1 - 2 * l) * hf**ex
    lower = (1 - hf ** (gamma - 1) * A / B**gamma) * hf**ex / 8
    return lower, upper


def fcs_h_grid(lam, stage: int, n: int = 30) -> list[Fraction]:
    """n rationals spread log-uniformly over (lam^(stage-2), lam], top included."""
    lam = as_fraction(lam)
    lo = lam ** (stage - 2)
    out = []
    for k in range(1, n + 1):
        s = (stage - 2) - (stage - 3) * k / n
        h = Fraction(float(lam) ** s).limit_denominator(10**12)
        out.append(min(max(h, lo + Fraction(1, 10**13)), lam))
    out[-1] = lam
    return out


def scaling_exponent(samples: Sequence[tuple]) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(h), with r^2."""
    if len(samples) < 4:
        raise InvalidInputError("need at least 4 samples")
    hs = np.array([float(h) for h, _ in samples])
    vs = np.array([float(v) for _, v in samples])
    if np.any(vs <= 0) or np.any(hs <= 0):
        raise InvalidInputError("h and values must be positive")
    x, y = np.log(hs), np.log(vs)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1 - float(np.sum(resid**2)) / ss_tot
    return float(slope), r2


def fcs_check(lam, stage: int, hs: Sequence | None = None) -> tuple[BoundReport, BoundReport, list[dict]]:
    """Envelope and exponent checks on a stage-m Fat Cantor complement.

    The lower envelope describes the infinite construction; the stage-m set
    misses the removed tail, so the lower side is relaxed by its exact
    measure.
    """
    lam = as_fraction(lam)
    E, _ = fat_cantor_complement(FatCantorSpec(lam, stage))
    eps = float(removed_tail(lam, stage))
    hs = fcs_h_grid(lam, stage) if hs is None else [as_fraction(h) for h in hs]
    rows = []
    worst_lo = worst_hi = None
    for h in hs:
        t = tau(E, h)
        lo, hi = fcs_envelope(lam, h)
        rows.append({"h": h, "tau": t, "lower": lo, "upper": hi})
        tf = float(t)
        s_lo = tf - (lo - eps)
        s_hi = hi - tf
        if worst_lo is None or s_lo < worst_lo[0]:
            worst_lo = (s_lo, h, tf, lo - eps)
        if worst_hi is None or s_hi < worst_hi[0]:
            worst_hi = (s_hi, h, tf, hi)
    # report min(tau - lower, upper - tau) as a single slack
    envelope = BoundReport(
        f"fcs-envelope lam={lam} m={stage}",
        quantity=-min(worst_lo[0], worst_hi[0]),
        bound=0.0,
        witnesses=[("lower", *worst_lo[1:]), ("upper", *worst_hi[1:])],
    )
    slope, r2 = scaling_exponent([(r["h"], r["tau"]) for r in rows])
    target = fcs_exponent(lam)
    exponent = BoundReport(
        f"fcs-exponent lam={lam} m={stage}",
        quantity=abs(slope - target),
        bound=0.05,
        witnesses=[("slope", slope, target), ("r2", r2, 1.0)],
    )
    return envelope, exponent, rows


# --- modulus implications ---------------------------------------------------

GS_VARIANTS = ("log", "sqrt-log", "power-p")


def dyadic_ts(j_lo: int = 3, j_hi: int = 16) -> list[Fraction]:
    return [Fraction(1, 2**j) for j in range(j_lo, j_hi + 1)]


def gs_implication_check(f: PLFunction, variant: str = "log", p=2, ts: Sequence | None = None, grid: int = 256) -> BoundReport:
    """Implied constants for the level-set to modulus implications.

    ``log`` / ``sqrt-log``: omega(f, t)_1 * phi(t) against 2 (B + integral of
    level gauge sums) with phi = (log 1/t)^alpha, alpha = 1, 1/2.
    ``power-p``: omega(f, t)_p / t^(1/p) against the integral of n^(1/p).
    The modulus enters with its certified upper end (value + error).
    """
    if variant not in GS_VARIANTS:
        raise InvalidInputError(f"variant must be one of {GS_VARIANTS}")
    ts = dyadic_ts() if ts is None else [as_fraction(t) for t in ts]
    if variant == "power-p":
        bound = root_indicatrix_integral(f, p) if not f.is_constant else 0.0
        order = p
    else:
        g = GaugeFunction.logpow(1.0 if variant == "log" else 0.5)
        bound = theorem23_constant(f, g) if not f.is_constant else 0.0
        order = 1
    ratios = []
    witnesses = []
    for t in ts:
        est = modulus(f, t, order, grid)
        upper = est.value + est.error_bound if not f.is_constant else 0.0
        if variant == "power-p":
            r = upper / float(t) ** (1 / float(p))
        else:
            r = upper * g(float(t))
        ratios.append(r)
        witnesses.append((t, r, bound))
    k = int(np.argmax(ratios))
    return BoundReport(
        f"gs-{variant}",
        quantity=ratios[k],
        bound=bound,
        witnesses=[witnesses[k]],
        tolerance=1e-12,
        bounded=tail_bounded(ratios) if any(ratios) else True,
    )


def rate_report(name: str, points: Sequence, ratios: Sequence[float], majorants: Sequence[float]) -> BoundReport:
    """value / rate against an explicit majorant of the same ratio.

    Passes when every ratio sits below its majorant and the majorant
    sequence itself passes the monotone-tail check.
    """
    rel = [float(r) / float(m) for r, m in zip(ratios, majorants)]
    k = int(np.argmax(rel))
    return BoundReport(
        name,
        quantity=rel[k],
        bound=1.0,
        witnesses=[(points[k], float(ratios[k]), float(majorants[k]))],
        tolerance=1e-12,
        bounded=tail_bounded(majorants),
    )


def level_lemma33_integral(f: PLFunction, h) -> Fraction:
    """Integral over y of lemma33_bound(E_y, h), strip-exact.

    Arc lengths are affine in y, so 2 min(l(y), h) is linear on each side of
    the level where l(y) = h and the midpoint rule is exact there.  Levels
    where E_y is the whole circle contribute nothing (tau vanishes there).
    """
    h = as_fraction(h)
    total = Fraction(0)
    for strip in indicatrix_profile(f).strips:
        for _, _, l0, ls in strip_arcs(f, strip.y_lo, strip.y_hi):
            cuts = [strip.y_lo, strip.y_hi]
            if ls != 0:
                y = strip.y_lo + (h - l0) / ls
                if strip.y_lo < y < strip.y_hi:
                    cuts.insert(1, y)
            for lo, hi in zip(cuts, cuts[1:]):
                mid = (lo + hi) / 2
                total += (hi - lo) * 2 * min(l0 + ls * (mid - strip.y_lo), h)
    return total


def terekhin_majorant(h) -> float:
    """Closed-form bound on (integral of tau(h, E_y) dy) / (h |log h|) for Terekhin sets.

    With u = 1 - y the length bound is at most 2h max(log2(u/h), 0) + 4h;
    integrating over u in (0, 1) and dividing by h log(1/h) gives
    2/ln 2 + (4 - 2/ln 2 + 2h/ln 2) / log(1/h), decreasing as h -> 0.
    """
    h = float(h)
    L = math.log(1 / h)
    return 2 / math.log(2) + (4 - 2 / math.log(2) + 2 * h / math.log(2)) / L


def terekhin_rate(f: PLFunction, js: Sequence[int] = range(3, 15)) -> BoundReport:
    """integral of tau(h, E_y) dy over h |log h|, h = 2^-j, against the closed-form majorant."""
    hs = [Fraction(1, 2**j) for j in js]
    rates = [float(h) * abs(math.log(float(h))) for h in hs]
    ratios = [float(integrated_tau(f, h)) / r for h, r in zip(hs, rates)]
    return rate_report("terekhin-rate", hs, ratios, [terekhin_majorant(h) for h in hs])


def power_rate(f: PLFunction, alpha: float, js: Sequence[int] = range(3, 15)) -> BoundReport:
    """omega(f, t)_1 (certified upper end) over t^alpha, t = 2^-j.

    The majorant is the constant 2 (B + integral of level gauge sums) for
    phi(t) = t^-alpha.
    """
    ts = [Fraction(1, 2**j) for j in js]
    const = theorem23_constant(f, GaugeFunction.power(alpha))
    ratios = []
    for t in ts:
        est = modulus(f, t, 1)
        ratios.append((est.value + est.error_bound) / float(t) ** alpha)
    return rate_report(f"power-rate alpha={alpha}", ts, ratios, [const] * len(ts))


# --- randomized suites ------------------------------------------------------


def _random_hs(rng: random.Random, count: int, denom: int = 128) -> list[Fraction]:
    return [Fraction(rng.randint(1, denom // 2), denom) for _ in range(count)]


def lemma33_suite(trials: int = 1000, seed: int = 7, h_per_set: int = 20) -> BoundReport:
    """tau <= lemma33_bound, exactly, on random sets."""
    rng = random.Random(seed)
    worst = None
    for i in range(trials):
        E = random_open_set(rng.randint(1, 6), 64, rng.randrange(2**32))
        for h in _random_hs(rng, h_per_set):
            s = lemma33_bound(E, h) - tau(E, h)
            if worst is None or s < worst[0]:
                worst = (s, str(E), h)
    return BoundReport("lemma33", quantity=-worst[0], bound=0, witnesses=[(worst[1], worst[2], worst[0])])


def theorem34_suite(trials: int = 200, seed: int = 7) -> BoundReport:
    """lemma33_bound <= theorem34_bound for built-in gauges and small lengths."""
    rng = random.Random(seed)
    gauges = [GaugeFunction.constant(), GaugeFunction.power(0.5), GaugeFunction.logpow(1.0), GaugeFunction.logpow(0.5)]
    worst = None
    for _ in range(trials):
        E = random_open_set(rng.randint(1, 6), 64, rng.randrange(2**32))
        L = LengthFamily.of_set(E)
        for g in gauges:
            if not validate_phi(g).is_member or any(l >= 1 / g.c for l in E.lengths):
                continue
            h = Fraction(rng.uniform(0.001, 0.999) / g.c).limit_denominator(10**6)
            s = theorem34_bound(L, g, h) - float(lemma33_bound(E, h))
            if worst is None or s < worst[0]:
                worst = (s, str(E), str(g), h)
    if worst is None:
        return BoundReport("theorem34", 0.0, 0.0)
    return BoundReport("theorem34", quantity=-worst[0], bound=0, witnesses=[worst[1:]], tolerance=1e-9)


def prop32_report(f: PLFunction, ts: Sequence, ps: Sequence = (1, 2), y_nodes: int = 4) -> BoundReport:
    """modulus(f,t,p).value <= prop32_rhs value + both error bounds."""
    worst = None
    for p in ps:
        for t in ts:
            est = modulus(f, t, p)
            rhs, err = prop32_rhs(f, t, p, y_nodes)
            s = rhs + err + est.error_bound - est.value
            if worst is None or s < worst[0]:
                worst = (s, t, p, est.value, rhs)
    return BoundReport("prop32", quantity=-worst[0], bound=0, witnesses=[worst[1:]], tolerance=1e-12)


def sharpness_suite(trials: int = 200, seed: int = 7, h_per_set: int = 10) -> BoundReport:
    """tau(E, h) = 2 h N(E) exactly once h is below every length and gap."""
    rng = random.Random(seed)
    worst = None
    for _ in range(trials):
        E = random_open_set(rng.randint(1, 6), 64, rng.randrange(2**32))
        m = min(E.lengths + E.gaps())
        hs = [m] + [m * Fraction(rng.randint(1, 999), 1000) for _ in range(h_per_set - 1)]
        for h in hs:
            d = abs(tau(E, h) - 2 * h * E.count)
            if worst is None or d > worst[0]:
                worst = (d, str(E), h)
    return BoundReport("sharpness", quantity=worst[0], bound=0, witnesses=[worst[1:]])


def banach_suite(trials: int = 500, seed: int = 7, pierpont_max: int = 100) -> BoundReport:
    """banach_integral = total_variation exactly, random and Pierpont functions."""
    from .constructions import pierpont, random_pl_function
    from .pl_function import banach_integral, total_variation

    rng = random.Random(seed)
    funcs = [random_pl_function(rng.randint(2, 20), 200, rng.randrange(2**32)) for _ in range(trials)]
    funcs += [pierpont(2, K) for K in range(2, pierpont_max + 1)]
    worst = (Fraction(0), "")
    for f in funcs:
        d = abs(banach_integral(f) - total_variation(f))
        if d > worst[0] or not worst[1]:
            worst = (d, str(f) if len(f.nodes) <= 20 else f"pierpont {len(f.nodes)} nodes")
    return BoundReport("banach", quantity=worst[0], bound=0, witnesses=[worst[1:]])


def pvariation_suite(trials: int = 200, seed: int = 7, max_nodes: int = 12) -> list[BoundReport]:
    """Extrema DP against partition enumeration: exact at p = 1, 1e-9 at p = 2."""
    from .constructions import random_pl_function
    from .pl_function import p_variation, p_variation_bruteforce

    rng = random.Random(seed)
    reports = []
    for p, tol in ((1, 0.0), (2, 1e-9)):
        worst = (0.0, "")
        for _ in range(trials):
            f = random_pl_function(rng.randint(2, max_nodes), 60, rng.randrange(2**32))
            d = abs(p_variation(f, p) - p_variation_bruteforce(f, p))
            if d > worst[0] or not worst[1]:
                worst = (d, str(f))
        reports.append(BoundReport(f"pvariation p={p}", quantity=worst[0], bound=0, witnesses=[worst[1:]], tolerance=tol))
    return reports


def tau_oracle_suite(trials: int = 1000, seed: int = 7, h_per_set: int = 20) -> BoundReport:
    """tau by overlaps against the refinement-grid indicator count."""
    from .circle_set import tau_bruteforce

    rng = random.Random(seed)
    worst = (Fraction(0), "", Fraction(0))
    for _ in range(trials):
        E = random_open_set(rng.randint(1, 6), 64, rng.randrange(2**32))
        for h in _random_hs(rng, h_per_set):
            d = abs(tau(E, h) - tau_bruteforce(E, h))
            if d > worst[0]:
                worst = (d, str(E), h)
    return BoundReport("tau-oracle", quantity=worst[0], bound=0, witnesses=[worst[1:]])
