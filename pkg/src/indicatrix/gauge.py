"""Gauge functions, length families and the sums that tie them together.

A gauge phi belongs to the class Phi when phi is non-increasing and
t * phi(t) is non-decreasing, concave and bounded on (0, 1/c).  Floating point
throughout; phi involves logs and powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from scipy import integrate

from .circle_set import CircleOpenSet, InvalidInputError

FAMILIES = ("constant", "power", "logpow", "mixed", "reciprocal", "custom")


@dataclass(frozen=True)
class GaugeFunction:
    family: str
    params: tuple[float, ...] = ()
    c: float = 1.0
    fn: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown gauge family {self.family!r}")
        if self.c < 1:
            raise InvalidInputError("c must be >= 1")
        if self.family == "custom" and self.fn is None:
            raise InvalidInputError("custom gauge needs fn")

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls) -> GaugeFunction:
        return cls("constant", (), 1.0)

    @classmethod
    def power(cls, alpha: float) -> GaugeFunction:
        if not 0 <= alpha <= 1:
            raise InvalidInputError("power gauge needs 0 <= alpha <= 1")
        return cls("power", (float(alpha),), 1.0)

    @classmethod
    def logpow(cls, alpha: float, c: float = math.e) -> GaugeFunction:
        """(log 1/t)^alpha; t(log 1/t)^alpha increases up to t = e^-alpha."""
        if not 0 <= alpha <= 1:
            raise InvalidInputError("logpow gauge needs 0 <= alpha <= 1")
        return cls("logpow", (float(alpha),), max(c, math.exp(alpha)))

    @classmethod
    def mixed(cls, alpha: float, beta: float, gamma: float, c: float | None = None) -> GaugeFunction:
        if not (0 <= alpha < 1 and 0 <= beta < 1 and gamma > 0):
            raise InvalidInputError("mixed gauge needs 0 <= alpha, beta < 1 and gamma > 0")
        g = cls("mixed", (float(alpha), float(beta), float(gamma)), 1.0)
        if c is None:
            c = _search_c(g)
        return cls("mixed", g.params, c)

    @classmethod
    def reciprocal(cls) -> GaugeFunction:
        return cls("reciprocal", (), 1.0)

    @classmethod
    def custom(cls, fn: Callable[[float], float], c: float = 1.0) -> GaugeFunction:
        return cls("custom", (), c, fn)

    # evaluation -----------------------------------------------------------

    @property
    def known_member(self) -> bool:
        """Analytically known membership of the built-in families."""
        return self.family != "custom"

    @property
    def growth_exponent(self) -> float:
        """alpha such that phi(t) = t^-alpha up to sub-power factors."""
        if self.family in ("power", "mixed"):
            return self.params[0]
        if self.family == "reciprocal":
            return 1.0
        return 0.0

    def log_phi(self, log_t: float) -> float:
        """log phi(t) given log t, usable far below float underflow."""
        fam = self.family
        if fam == "constant":
            return 0.0
        if fam == "power":
            return -self.params[0] * log_t
        if fam == "reciprocal":
            return -log_t
        if fam == "logpow":
            alpha = self.params[0]
            if alpha == 0:
                return 0.0
            if log_t >= 0:
                return -math.inf
            return alpha * math.log(-log_t)
        if fam == "mixed":
            alpha, beta, gamma = self.params
            return -alpha * log_t + gamma * abs(log_t) ** beta
        value = self.fn(math.exp(log_t))
        return math.log(value) if value > 0 else -math.inf

    def __call__(self, t: float) -> float:
        t = float(t)
        if self.family == "custom":
            return float(self.fn(t))
        if t <= 0:
            raise InvalidInputError("gauge functions live on (0, 1]")
        return math.exp(self.log_phi(math.log(t)))

    def psi(self, t: float) -> float:
        """t * phi(t)."""
        return float(t) * self(t)

    def psi_integral(self, a: float, b: float) -> float:
        """Integral of t * phi(t) over [a, b] (closed form where one exists)."""
        a, b = float(a), float(b)
        if a == b:
            return 0.0
        fam = self.family
        if fam == "constant":
            return (b * b - a * a) / 2
        if fam == "reciprocal":
            return b - a
        if fam == "power":
            e = 2 - self.params[0]
            return (b**e - a**e) / e
        if fam == "logpow" and self.params[0] in (0.0, 1.0):
            if self.params[0] == 0.0:
                return (b * b - a * a) / 2

            def anti(u):
                return 0.0 if u == 0 else u * u / 2 * math.log(1 / u) + u * u / 4

            return anti(b) - anti(a)
        val, _ = integrate.quad(lambda u: self.psi(u) if u > 0 else 0.0, a, b, limit=200, epsabs=1e-14)
        return val

    def __str__(self):
        if self.family in ("constant", "reciprocal"):
            return self.family
        return f"{self.family}:{','.join(repr(p) for p in self.params)}"


class PhiReport(NamedTuple):
    is_member: bool
    witnesses: list[tuple[str, tuple[float, ...]]]


def _sample_grid(g: GaugeFunction, grid_size: int, decades: float = 12.0) -> list[float]:
    top = 1.0 / g.c
    return [top * 10 ** (-decades * (1 - k / grid_size)) for k in range(grid_size)]


def validate_phi(g: GaugeFunction, grid_size: int = 200, tol: float = 1e-12) -> PhiReport:
    """Falsification check of class-Phi membership on a geometric grid in (0, 1/c).

    This can refute membership, never prove it.
    """
    if grid_size < 3:
        raise InvalidInputError("grid_size must be >= 3")
    ts = _sample_grid(g, grid_size)
    phi = [g(t) for t in ts]
    psi = [t * p for t, p in zip(ts, phi)]
    witnesses: list[tuple[str, tuple[float, ...]]] = []
    for k in range(len(ts) - 1):
        if phi[k + 1] > phi[k] * (1 + tol) + tol:
            witnesses.append(("phi increasing", (ts[k], ts[k + 1])))
        if psi[k + 1] < psi[k] * (1 - tol) - tol:
            witnesses.append(("t*phi decreasing", (ts[k], ts[k + 1])))
    for k in range(len(ts) - 1):
        a, b = ts[k], ts[k + 1]
        mid = g.psi((a + b) / 2)
        if mid < (psi[k] + psi[k + 1]) / 2 - tol * max(1.0, abs(mid)):
            witnesses.append(("t*phi not concave", (a, b)))
    if not all(math.isfinite(v) for v in psi):
        witnesses.append(("t*phi unbounded", (ts[0], ts[-1])))
    return PhiReport(not witnesses, witnesses)


def _search_c(g: GaugeFunction) -> float:
    for k in range(1, 200):
        c = math.exp(k)
        trial = GaugeFunction(g.family, g.params, c, g.fn)
        if validate_phi(trial, 400).is_member:
            return c
    raise InvalidInputError(f"no c found making {g} a member of Phi")


@dataclass(frozen=True)
class LengthFamily:
    """Component lengths of an open set.

    ``explicit`` holds a finite list; ``geometric`` has m * rho^(k-1) copies
    of length a * r^k at stage k = 1, 2, ..., ``stages`` (None = infinite).
    """

    kind: str
    lengths: tuple[Fraction, ...] = ()
    m: int = 1
    rho: Fraction = Fraction(1)
    a: Fraction = Fraction(1)
    r: Fraction = Fraction(1, 2)
    stages: int | None = None

    def __post_init__(self):
        if self.kind == "explicit":
            if any(l <= 0 for l in self.lengths):
                raise InvalidInputError("lengths must be positive")
        elif self.kind == "geometric":
            if self.m < 1 or self.rho < 1 or not 0 < self.r < 1 or self.a <= 0:
                raise InvalidInputError("geometric family needs m >= 1, rho >= 1, 0 < r < 1, a > 0")
            if self.stages is not None and self.stages < 1:
                raise InvalidInputError("stages must be >= 1")
        else:
            raise InvalidInputError(f"unknown length family kind {self.kind!r}")

    @classmethod
    def explicit(cls, lengths: Sequence) -> LengthFamily:
        return cls("explicit", tuple(Fraction(l) for l in lengths))

    @classmethod
    def geometric(cls, m, rho, a, r, stages: int | None = None) -> LengthFamily:
        return cls("geometric", (), int(m), Fraction(rho), Fraction(a), Fraction(r), stages)

    @classmethod
    def of_set(cls, E: CircleOpenSet) -> LengthFamily:
        return cls.explicit(E.lengths)

    @property
    def finite(self) -> bool:
        return self.kind == "explicit" or self.stages is not None

    def stage_terms(self):
        """Yield (count, length) per stage."""
        if self.kind == "explicit":
            for l in self.lengths:
                yield 1, l
            return
        k = 1
        while self.stages is None or k <= self.stages:
            yield self.m * self.rho ** (k - 1), self.a * self.r**k
            k += 1

    def as_list(self) -> list[Fraction]:
        if not self.finite:
            raise InvalidInputError("infinite family has no finite list")
        out: list[Fraction] = []
        for count, l in self.stage_terms():
            out.extend([l] * int(count))
        return out

    def measure(self) -> Fraction | float:
        if self.finite:
            return sum((count * l for count, l in self.stage_terms()), Fraction(0))
        q = self.rho * self.r
        if q >= 1:
            return math.inf
        return self.m * self.a * self.r / (1 - q)


def gauge_sum(L: LengthFamily, g: GaugeFunction, rtol: float = 1e-16) -> float:
    """Sum of l * phi(l) over the family; ``math.inf`` when it diverges."""
    if L.finite:
        return math.fsum(float(count) * g.psi(float(l)) for count, l in L.stage_terms())
    # infinite geometric: terms behave like (rho * r^(1 - alpha))^k times
    # sub-exponential factors, so the ratio decides convergence
    alpha = g.growth_exponent
    log_q = math.log(L.rho) + (1 - alpha) * math.log(L.r)
    if g.family == "custom":
        raise InvalidInputError("convergence of custom gauges over infinite families is undecidable here")
    if log_q >= 0:
        return math.inf
    if g.family in ("power", "constant", "reciprocal") or (g.family == "logpow" and g.params[0] == 0):
        e = 1 - alpha
        return float(L.m * float(L.a) ** e * float(L.r) ** e / (1 - math.exp(log_q)))
    log_m, log_rho, log_a, log_r = math.log(L.m), math.log(L.rho), math.log(L.a), math.log(L.r)
    terms: list[float] = []
    running = 0.0
    k = 1
    while True:
        log_l = log_a + k * log_r
        log_term = log_m + (k - 1) * log_rho + log_l + g.log_phi(log_l)
        term = math.exp(log_term) if log_term > -745 else 0.0
        terms.append(term)
        running += term
        # eventually geometric with ratio < 1; stop once the tail is negligible
        if k > 50 and term <= rtol * running and terms[-1] <= terms[-2]:
            return math.fsum(terms)
        k += 1
        if k > 1_000_000:
            raise InvalidInputError("gauge sum did not settle")


def jensen_bound(E: CircleOpenSet | Sequence, g: GaugeFunction) -> float:
    """|E| * phi(|E| / N(E)): the concavity upper bound for the gauge sum."""
    lengths = E.lengths if isinstance(E, CircleOpenSet) else list(E)
    if not lengths:
        raise InvalidInputError("jensen_bound needs a nonempty set")
    total = float(sum(lengths, Fraction(0)))
    return total * g(total / len(lengths))


class BTIndex(NamedTuple):
    value: float
    truncated: bool


def bt_index(L: LengthFamily) -> BTIndex:
    """inf{beta : sum l_k^beta < infinity}.

    For an infinite geometric family the series converges iff
    rho * r^beta < 1, giving log(rho) / log(1/r).  Finite families have index
    0 by the letter of the definition and are flagged as truncated.
    """
    if L.kind == "geometric" and L.rho * L.r >= 1:
        raise InvalidInputError("family has infinite total measure (rho * r >= 1)")
    if L.finite:
        return BTIndex(0.0, True)
    return BTIndex(math.log(L.rho) / math.log(1 / L.r), False)
