"""Log-power asymptotic series for analytic head and tail corrections.

A series is a finite sum of terms ``c * r**(-q) * log(r)**j`` that represents a
radial function on one side of an anchor radius: the *tail* ``r >= anchor``
(decay, ``q`` large means fast decay) or the *head* ``0 < r <= anchor``
(``q`` may be negative, i.e. growing powers).  All integrals against the planar
measure ``r dr`` are exact term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

TAIL = "tail"
HEAD = "head"

_Q_DIGITS = 12


def _key(q: float) -> float:
    return round(float(q), _Q_DIGITS)


@dataclass(frozen=True)
class LogPowerSeries:
    """Sum of ``c * r**(-q) * log(r)**j`` on one side of ``anchor``.

    Parameters
    ----------
    terms : tuple of (q, j, c)
        Exponent of decay, power of the logarithm, coefficient.
    side : {"tail", "head"}
        ``tail`` describes ``r >= anchor``, ``head`` describes ``r <= anchor``.
    anchor : float
        Integration boundary; also the radius where truncation error is judged.
    """

    terms: tuple[tuple[float, int, float], ...]
    side: str
    anchor: float
    rtol: float = 1e-17
    max_terms: int = 400

    def __post_init__(self):
        if self.side not in (TAIL, HEAD):
            raise ValueError(f"side must be 'tail' or 'head', got {self.side!r}")
        if not self.anchor > 0:
            raise ValueError("anchor must be positive")

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, items: Iterable[tuple[float, int, float]], side: str, anchor: float,
              rtol: float = 1e-17, max_terms: int = 400) -> "LogPowerSeries":
        acc: dict[tuple[float, int], float] = {}
        for q, j, c in items:
            if c == 0.0:
                continue
            k = (_key(q), int(j))
            acc[k] = acc.get(k, 0.0) + float(c)
        raw = tuple((q, j, c) for (q, j), c in acc.items() if c != 0.0)
        return cls(raw, side, float(anchor), rtol, max_terms)._trimmed()

    @classmethod
    def constant(cls, value: float, side: str, anchor: float) -> "LogPowerSeries":
        return cls.build([(0.0, 0, value)], side, anchor)

    @classmethod
    def log_r(cls, side: str, anchor: float) -> "LogPowerSeries":
        return cls.build([(0.0, 1, 1.0)], side, anchor)

    @classmethod
    def log1p_r2(cls, side: str, anchor: float, order: int = 60) -> "LogPowerSeries":
        """``log(1 + r**2)`` expanded in ``r**-2`` (tail, r > 1) or ``r**2`` (head, r < 1)."""
        if side == TAIL:
            if anchor <= 1.0:
                raise ValueError("tail expansion of log(1+r^2) needs anchor > 1")
            items = [(0.0, 1, 2.0)]
            items += [(2.0 * m, 0, (-1.0) ** (m + 1) / m) for m in range(1, order + 1)]
        else:
            if anchor >= 1.0:
                raise ValueError("head expansion of log(1+r^2) needs anchor < 1")
            items = [(-2.0 * m, 0, (-1.0) ** (m + 1) / m) for m in range(1, order + 1)]
        return cls.build(items, side, anchor)

    def _like(self, items) -> "LogPowerSeries":
        return LogPowerSeries.build(items, self.side, self.anchor, self.rtol, self.max_terms)

    def _check(self, other: "LogPowerSeries"):
        if other.side != self.side or not math.isclose(other.anchor, self.anchor, rel_tol=1e-12):
            raise ValueError("series live on different sides or anchors")

    # -- magnitudes and truncation ---------------------------------------

    def _mag(self, q: float, j: int, c: float) -> float:
        a = self.anchor
        return abs(c) * a ** (-q) * abs(math.log(a)) ** j if j else abs(c) * a ** (-q)

    def magnitude(self) -> float:
        return sum(self._mag(*t) for t in self.terms)

    def _trimmed(self) -> "LogPowerSeries":
        if not self.terms:
            return self
        mags = [self._mag(*t) for t in self.terms]
        scale = max(mags)
        keep = [(m, t) for m, t in zip(mags, self.terms) if m >= self.rtol * scale]
        keep.sort(key=lambda mt: -mt[0])
        keep = keep[: self.max_terms]
        terms = tuple(sorted((t for _, t in keep), key=lambda t: (t[0], -t[1])))
        return LogPowerSeries(terms, self.side, self.anchor, self.rtol, self.max_terms)

    def reanchor(self, anchor: float) -> "LogPowerSeries":
        return LogPowerSeries.build(self.terms, self.side, anchor, self.rtol, self.max_terms)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, LogPowerSeries):
            self._check(other)
            return self._like(self.terms + other.terms)
        return self._like(self.terms + ((0.0, 0, float(other)),))

    __radd__ = __add__

    def __neg__(self):
        return self._like((q, j, -c) for q, j, c in self.terms)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LogPowerSeries):
            self._check(other)
            items = [(q1 + q2, j1 + j2, c1 * c2)
                     for q1, j1, c1 in self.terms for q2, j2, c2 in other.terms]
            return self._like(items)
        return self._like((q, j, c * float(other)) for q, j, c in self.terms)

    __rmul__ = __mul__

    def times_log(self, power: int = 1) -> "LogPowerSeries":
        return self._like((q, j + power, c) for q, j, c in self.terms)

    def times_power(self, p: float) -> "LogPowerSeries":
        """Multiply by ``r**p``."""
        return self._like((q - p, j, c) for q, j, c in self.terms)

    def lead(self) -> tuple[float, int, float]:
        """Dominant term on this side (r -> inf for tails, r -> 0 for heads)."""
        if not self.terms:
            raise ValueError("empty series has no leading term")
        if self.side == TAIL:
            return min(self.terms, key=lambda t: (t[0], -t[1]))
        return max(self.terms, key=lambda t: (t[0], t[1]))

    def _unit_remainder(self):
        q0, j0, c0 = self.lead()
        if j0 != 0:
            raise ValueError("leading term carries a logarithm; expansion undefined")
        rest = self._like((q - q0, j, c / c0) for q, j, c in self.terms
                          if not (_key(q) == _key(q0) and j == 0))
        if rest.terms and rest.magnitude() >= 1.0:
            raise ValueError("series does not converge at its anchor")
        return q0, c0, rest

    def _expand(self, rest: "LogPowerSeries", coeffs) -> "LogPowerSeries":
        out = self._like([])
        power = self._like([(0.0, 0, 1.0)])
        for n in range(1, 400):
            power = power * rest
            if not power.terms or power.magnitude() < self.rtol:
                break
            cn = coeffs(n)
            if cn != 0.0:
                out = out + power * cn
        return out

    def log(self) -> "LogPowerSeries":
        """``log`` of a positive series with a log-free leading term."""
        q0, c0, rest = self._unit_remainder()
        if c0 <= 0:
            raise ValueError("log of a series with non-positive leading coefficient")
        base = self._like([(0.0, 0, math.log(c0)), (0.0, 1, -q0)])
        if not rest.terms:
            return base
        return base + self._expand(rest, lambda n: (-1.0) ** (n + 1) / n)

    def power(self, p: float) -> "LogPowerSeries":
        """``self**p`` by the binomial series around the leading term."""
        q0, c0, rest = self._unit_remainder()
        if c0 <= 0 and p != int(p):
            raise ValueError("fractional power of a negative leading coefficient")
        lead = self._like([(q0 * p, 0, c0 ** p)])
        if not rest.terms:
            return lead

        def binom(n, p=p):
            out = 1.0
            for k in range(n):
                out *= (p - k) / (k + 1)
            return out

        return lead * (self._expand(rest, binom) + 1.0)

    def scaled_argument(self, lam: float) -> "LogPowerSeries":
        """Series of ``r -> f(lam * r)``, anchored at ``anchor / lam``."""
        ll = math.log(lam)
        items = []
        for q, j, c in self.terms:
            base = c * lam ** (-q)
            for k in range(j + 1):
                items.append((q, k, base * math.comb(j, k) * ll ** (j - k)))
        return LogPowerSeries.build(items, self.side, self.anchor / lam, self.rtol, self.max_terms)

    def derivative(self) -> "LogPowerSeries":
        items = []
        for q, j, c in self.terms:
            items.append((q + 1.0, j, -q * c))
            if j:
                items.append((q + 1.0, j - 1, j * c))
        return self._like(items)

    # -- evaluation and integrals ----------------------------------------

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        lr = np.log(r)
        for q, j, c in self.terms:
            out = out + c * r ** (-q) * lr ** j
        return out

    def integral(self) -> float:
        """Exact ``int f(r) r dr`` over the side of the anchor (no 2*pi)."""
        a = self.anchor
        la = math.log(a)
        total = 0.0
        for q, j, c in self.terms:
            if self.side == TAIL:
                s = q - 2.0
                if s <= 0:
                    raise ValueError(f"tail term r^-{q} is not integrable against r dr")
                acc = sum(math.perm(j, k) * la ** (j - k) / s ** (k + 1) for k in range(j + 1))
                total += c * a ** (-s) * acc
            else:
                s = 2.0 - q
                if s <= 0:
                    raise ValueError(f"head term r^-{q} is not integrable against r dr")
                acc = sum((-1.0) ** k * math.perm(j, k) * la ** (j - k) / s ** (k + 1)
                          for k in range(j + 1))
                total += c * a ** s * acc
        return total

    def tail_antiderivative(self) -> "LogPowerSeries":
        """Series of ``G(r) = int_r^inf f(s) s ds`` for a tail series."""
        if self.side != TAIL:
            raise ValueError("tail_antiderivative needs a tail series")
        items = []
        for q, j, c in self.terms:
            s = q - 2.0
            if s <= 0:
                raise ValueError(f"tail term r^-{q} is not integrable against r dr")
            for k in range(j + 1):
                items.append((s, j - k, c * math.perm(j, k) / s ** (k + 1)))
        return self._like(items)

    def head_antiderivative(self) -> "LogPowerSeries":
        """Series of ``H(r) = int_0^r f(s) s ds`` for a head series."""
        if self.side != HEAD:
            raise ValueError("head_antiderivative needs a head series")
        items = []
        for q, j, c in self.terms:
            s = 2.0 - q
            if s <= 0:
                raise ValueError(f"head term r^-{q} is not integrable against r dr")
            for k in range(j + 1):
                items.append((-s, j - k, c * (-1.0) ** k * math.perm(j, k) / s ** (k + 1)))
        return self._like(items)
