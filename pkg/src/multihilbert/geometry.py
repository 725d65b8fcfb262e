"""Multi-intervals J, E on the extended real line and real Möbius maps.

A :class:`Configuration` is the validated pair ``(J, E)``: parts sorted,
same-label adjacency merged, interiors checked for overlap, and every
endpoint classified as ``"simple"`` or ``"double"``.  The point at
infinity is a single point of the extended line; it is double when both
sets are unbounded (on opposite sides), simple when only one ray reaches
it, and not an endpoint at all when one set owns both rays.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    BothUnboundedSameSide,
    ConfigurationError,
    DegenerateInterval,
    OverlapError,
    SamplesAtPole,
    UnboundedWithoutCompactification,
)

INF = math.inf
LABELS = ("J", "E")


def _as_extended(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        if s in ("-inf", "-infinity"):
            return -INF
        return float(s)
    return float(v)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = _as_extended(self.lo), _as_extended(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DegenerateInterval(f"NaN endpoint in [{lo}, {hi}]")
        if math.isinf(lo) and math.isinf(hi):
            raise DegenerateInterval("at most one end of an interval may be infinite")
        if not lo < hi:
            raise DegenerateInterval(f"interval [{lo}, {hi}] has lo >= hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x, closed=True):
        x = np.asarray(x, dtype=float)
        if closed:
            return (x >= self.lo) & (x <= self.hi)
        return (x > self.lo) & (x < self.hi)

    def as_list(self):
        return [_json_num(self.lo), _json_num(self.hi)]


@dataclass(frozen=True)
class MultiInterval:
    parts: tuple
    label: str
    merged_at: tuple = ()

    @property
    def bounded(self) -> bool:
        return all(p.bounded for p in self.parts)

    def contains(self, x, closed=True):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for p in self.parts:
            out |= p.contains(x, closed)
        return out

    def indicator(self, x):
        """Indicator of the open parts; endpoints are never sampled."""
        return self.contains(x, closed=False).astype(float)


def _merge_parts(parts: Sequence[Interval], label: str) -> MultiInterval:
    parts = sorted(parts, key=lambda p: (p.lo, p.hi))
    merged = []
    merged_at = []
    for p in parts:
        if merged and p.lo < merged[-1].hi:
            if math.isinf(p.lo) or (math.isinf(p.hi) and math.isinf(merged[-1].hi)):
                raise BothUnboundedSameSide(f"two {label} parts extend to +inf")
            raise OverlapError(f"{label} parts {merged[-1]} and {p} overlap")
        if merged and p.lo == merged[-1].hi:
            merged_at.append(p.lo)
            merged[-1] = Interval(merged[-1].lo, p.hi)
        else:
            merged.append(p)
    return MultiInterval(tuple(merged), label, tuple(merged_at))


@dataclass(frozen=True)
class Configuration:
    """Validated pair of multi-intervals with classified endpoints.

    ``endpoints`` is a tuple of ``(point, kind)`` with ``kind`` in
    ``{"simple", "double"}``; the point at infinity appears as ``inf``.
    ``merged_at`` lists points where same-label parts were joined.
    """

    J: MultiInterval
    E: MultiInterval
    endpoints: tuple
    n_double: int
    merged_at: tuple = field(default=())

    @property
    def doubles(self):
        return tuple(p for p, k in self.endpoints if k == "double")

    @property
    def simples(self):
        return tuple(p for p, k in self.endpoints if k == "simple")

    @property
    def bounded(self) -> bool:
        return self.J.bounded and self.E.bounded

    def subintervals(self):
        """All parts as ``(Interval, label)`` sorted left to right."""
        items = [(p, "J") for p in self.J.parts] + [(p, "E") for p in self.E.parts]
        return sorted(items, key=lambda it: it[0].lo)

    def label_of(self, x):
        """'J', 'E' or None for a point in an open part (or outside U)."""
        for part, lab in self.subintervals():
            if part.lo < x < part.hi:
                return lab
        return None

    def distance(self) -> float:
        """Euclidean distance between J and E (0 when they touch)."""
        best = INF
        for pj in self.J.parts:
            for pe in self.E.parts:
                if pe.lo >= pj.hi:
                    best = min(best, pe.lo - pj.hi)
                elif pj.lo >= pe.hi:
                    best = min(best, pj.lo - pe.hi)
                else:
                    best = 0.0
        if INF in self.doubles:
            best = 0.0
        return best

    def to_dict(self):
        return {"J": [p.as_list() for p in self.J.parts],
                "E": [p.as_list() for p in self.E.parts]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _json_num(v):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return v


def _parse_list(raw: Iterable, label: str):
    out = []
    for item in raw:
        if isinstance(item, Interval):
            out.append(item)
            continue
        try:
            lo, hi = item
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{label}: cannot read interval {item!r}") from exc
        out.append(Interval(lo, hi))
    if not out:
        raise ConfigurationError(f"{label} must contain at least one interval")
    return out


def validate_configuration(J_raw, E_raw) -> Configuration:
    """Build a :class:`Configuration` from two lists of ``(lo, hi)`` pairs.

    Raises
    ------
    DegenerateInterval
        An interval has ``lo >= hi`` or two infinite ends.
    BothUnboundedSameSide
        Two parts (of either set) run to the same infinity.
    OverlapError
        Interiors intersect.
    """
    J = _merge_parts(_parse_list(J_raw, "J"), "J")
    E = _merge_parts(_parse_list(E_raw, "E"), "E")

    items = sorted([(p, "J") for p in J.parts] + [(p, "E") for p in E.parts],
                   key=lambda it: (it[0].lo, it[0].hi))
    if sum(math.isinf(p.lo) for p, _ in items) > 1:
        raise BothUnboundedSameSide("J and E both extend to -inf")
    for (p, lp), (q, lq) in zip(items[:-1], items[1:]):
        if q.lo < p.hi:
            if math.isinf(p.hi) and math.isinf(q.hi):
                raise BothUnboundedSameSide("J and E both extend to +inf")
            raise OverlapError(f"interiors of {lp}{p.as_list()} and {lq}{q.as_list()} intersect")

    owners = {}
    for p, lab in items:
        for v in (p.lo, p.hi):
            if math.isfinite(v):
                owners.setdefault(v, set()).add(lab)
    endpoints = [(v, "double" if len(labs) == 2 else "simple")
                 for v, labs in sorted(owners.items())]

    plus = [lab for p, lab in items if p.hi == INF]
    minus = [lab for p, lab in items if p.lo == -INF]
    if plus and minus:
        if plus[0] != minus[0]:
            endpoints.append((INF, "double"))
    elif plus or minus:
        endpoints.append((INF, "simple"))

    n_double = sum(1 for _, k in endpoints if k == "double")
    merged_at = tuple(sorted(J.merged_at + E.merged_at))
    return Configuration(J, E, tuple(endpoints), n_double, merged_at)


def configuration_from_dict(d) -> Configuration:
    try:
        return validate_configuration(d["J"], d["E"])
    except KeyError as exc:
        raise ConfigurationError(f"configuration needs key {exc}") from exc


def load_configuration(path) -> Configuration:
    with open(path) as fh:
        return configuration_from_dict(json.load(fh))


# ----------------------------------------------------------------------
# Möbius maps


@dataclass(frozen=True)
class MobiusMap:
    """x -> (a x + b) / (c x + d), normalised so that ad - bc = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise ValueError("real Möbius map needs ad - bc > 0")
        s = math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)) / s)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, shift):
        return cls(1.0, shift, 0.0, 1.0)

    @property
    def pole(self):
        return -self.d / self.c if self.c != 0 else INF

    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """``self ∘ other``."""
        (a, b), (c, d) = self.matrix() @ other.matrix()
        return MobiusMap(a, b, c, d)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, x):
        return mobius_apply(self, x)


def mobius_apply(m: MobiusMap, x):
    """Evaluate ``m`` on the extended line; the pole goes to ``inf``.

    Accepts scalars or arrays.  Both ``+inf`` and ``-inf`` denote the single
    point at infinity, whose image is ``a/c`` (or ``inf`` when ``c == 0``).
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    at_inf = np.isinf(arr)
    den = m.c * arr + m.d
    at_pole = (~at_inf) & (den == 0)
    ok = ~(at_inf | at_pole)
    out[ok] = (m.a * arr[ok] + m.b) / den[ok]
    out[at_pole] = INF
    out[at_inf] = m.a / m.c if m.c != 0 else INF
    return float(out[0]) if scalar else out


def _image_arc(m: MobiusMap, part: Interval):
    p = mobius_apply(m, part.lo)
    q = mobius_apply(m, part.hi)
    if math.isinf(p) and math.isinf(q):
        raise ValueError("interval image degenerates")
    if math.isinf(p):
        return [(-INF, q)]
    if math.isinf(q):
        return [(p, INF)]
    if p < q:
        return [(p, q)]
    return [(p, INF), (-INF, q)]


def mobius_image(m: MobiusMap, cfg: Configuration) -> Configuration:
    J = [arc for part in cfg.J.parts for arc in _image_arc(m, part)]
    E = [arc for part in cfg.E.parts for arc in _image_arc(m, part)]
    return validate_configuration(J, E)


def compactify(cfg: Configuration):
    """Return ``(m, image)`` with ``image`` bounded.

    The pole of ``m`` is placed in a gap of U, so a configuration whose
    union is the whole extended line cannot be compactified.
    """
    if cfg.bounded:
        return MobiusMap.identity(), cfg
    parts = [p for p, _ in cfg.subintervals()]
    gap = None
    for p, q in zip(parts[:-1], parts[1:]):
        if p.hi < q.lo:
            gap = 0.5 * (p.hi + q.lo)
            break
    if gap is None:
        if math.isfinite(parts[0].lo):
            gap = parts[0].lo - 1.0
        elif math.isfinite(parts[-1].hi):
            gap = parts[-1].hi + 1.0
        else:
            raise UnboundedWithoutCompactification(
                "U covers the whole line; no Möbius map makes it bounded")
    m = MobiusMap(0.0, -1.0, 1.0, -gap)
    return m, mobius_image(m, cfg)


def mobius_conjugate_function(m: MobiusMap, f: Callable) -> Callable:
    """The unitary pull-back ``(U f)(x) = f(m(x)) / (c x + d)``."""

    def Uf(x):
        x = np.asarray(x, dtype=float)
        den = m.c * x + m.d
        if np.any(den == 0):
            raise SamplesAtPole(f"evaluation node at the pole {m.pole}")
        return f((m.a * x + m.b) / den) / den

    return Uf


def l2_norm(f: Callable, breakpoints: Sequence[float] = ()) -> float:
    """L2(R) norm of a scalar function by adaptive quadrature.

    Integrates in ``theta`` with ``x = tan(theta)``, so widely spread
    functions and far-away breakpoints stay on a bounded interval.
    """
    pts = ([-0.5 * math.pi] + sorted(math.atan(b) for b in breakpoints if math.isfinite(b))
           + [0.5 * math.pi])
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(lambda t: float(f(math.tan(t))) ** 2 / math.cos(t) ** 2,
                                lo, hi, limit=400, epsabs=1e-15, epsrel=1e-13)
        total += val
    return math.sqrt(total)
