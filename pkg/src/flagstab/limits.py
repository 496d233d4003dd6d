"""
Finitary descriptors for countable-dimensional subspaces and flags.

Basis vectors are indexed by a domain: ``positive`` (1, 2, 3, ...) or
``signed`` (..., -2, -1, 1, 2, ...).  Level n keeps the labels 1..n or
-n..-1, 1..n, and the level-n coordinate space orders its labels ascending.

Two descriptor families are supported:

* :class:`StableSubspace` -- an index set (finitely many intervals, possibly
  unbounded) plus finitely many extra vectors.  Truncations are exact.
* :class:`SeqSubspace` -- explicit vectors plus template families such as
  ``e(k) - e(k+1) for k >= 1``.  Perpendiculars and closures of these are
  computed with a lookahead and come with a :class:`Certificate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .dsl import Index, IndexSetExpr, TemplateExpr, parse_index_set, parse_template
from .errors import InputError
from .flagkit import Chain, FlagPair, GeneralizedFlag
from .exact_linalg import Echelon, Subspace, _kernel_subspace, format_rational, parse_rational, span, to_fraction
from .pairing import Pairing, split_symmetric, split_symplectic, standard_dual

INF = math.inf


# -- index domains and sets ----------------------------------------------------


@dataclass(frozen=True)
class IndexDomain:
    kind: str  # "positive" | "signed"

    def __post_init__(self):
        if self.kind not in ("positive", "signed"):
            raise InputError(f"unknown index domain {self.kind!r}", field="domain")

    def labels(self, n: int) -> tuple:
        if n < 0:
            raise InputError("level must be nonnegative", field="level")
        if self.kind == "positive":
            return tuple(range(1, n + 1))
        return tuple(range(-n, 0)) + tuple(range(1, n + 1))

    def dim(self, n: int) -> int:
        return n if self.kind == "positive" else 2 * n

    def valid(self, label: int) -> bool:
        return label >= 1 if self.kind == "positive" else label != 0

    def level_of(self, label: int) -> int:
        return abs(label)

    # ranks make the signed order contiguous: ..., -1 -> -1, 1 -> 0, 2 -> 1, ...
    def rank(self, label: int) -> int:
        if self.kind == "signed" and label > 0:
            return label - 1
        return label

    def unrank(self, r: int) -> int:
        if self.kind == "signed" and r >= 0:
            return r + 1
        return r

    def min_rank(self):
        return 1 if self.kind == "positive" else -INF

    def endpoint_rank(self, value, upper: bool):
        """Rank of an interval endpoint; an endpoint label 0 rounds inward."""
        if value in (INF, -INF):
            return value
        if self.kind == "signed" and value == 0:
            return -1 if upper else 0
        return self.rank(value)

    def to_json(self) -> str:
        return self.kind


POSITIVE = IndexDomain("positive")
SIGNED = IndexDomain("signed")


def domain(kind) -> IndexDomain:
    if isinstance(kind, IndexDomain):
        return kind
    return IndexDomain(kind)


def _merge(intervals, lowest) -> tuple:
    out = []
    for lo, hi in sorted((max(lo, lowest), hi) for lo, hi in intervals):
        if lo > hi or lo == INF or hi == -INF:
            continue
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class IndexSet:
    """A finite union of rank intervals, normalised (sorted, disjoint, non-adjacent)."""

    domain: IndexDomain
    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _merge(self.intervals, self.domain.min_rank()))

    @classmethod
    def from_labels(cls, dom: IndexDomain, parts: Iterable) -> "IndexSet":
        """Intervals given by label endpoints (inclusive; +-INF allowed)."""
        ivs = []
        for lo, hi in parts:
            ivs.append((dom.endpoint_rank(lo, False), dom.endpoint_rank(hi, True)))
        return cls(dom, tuple(ivs))

    @classmethod
    def parse(cls, src: str, dom) -> "IndexSet":
        expr = parse_index_set(src)
        if expr.quantifier is not None:
            raise InputError("a single index set cannot carry a 'for' clause", field="index_set")
        return index_set_at(expr, domain(dom), None)

    def __contains__(self, label: int) -> bool:
        if not self.domain.valid(label):
            return False
        r = self.domain.rank(label)
        return any(lo <= r <= hi for lo, hi in self.intervals)

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.domain, self.intervals + other.intervals)

    def complement(self) -> "IndexSet":
        out = []
        prev = self.domain.min_rank()
        for lo, hi in self.intervals:
            if lo > prev:
                out.append((prev, lo - 1))
            prev = hi + 1
        if prev != INF:
            out.append((prev, INF))
        return IndexSet(self.domain, tuple(out))

    def intersection(self, other: "IndexSet") -> "IndexSet":
        return self.complement().union(other.complement()).complement()

    def difference(self, other: "IndexSet") -> "IndexSet":
        return self.intersection(other.complement())

    def __le__(self, other: "IndexSet") -> bool:
        return self.difference(other).is_empty()

    def is_empty(self) -> bool:
        return not self.intervals

    def is_finite(self) -> bool:
        return all(lo != -INF and hi != INF for lo, hi in self.intervals)

    def labels_at(self, n: int) -> list[int]:
        return [l for l in self.domain.labels(n) if l in self]

    @property
    def finite_endpoints(self) -> list[int]:
        return [self.domain.unrank(e) for iv in self.intervals for e in iv if e not in (INF, -INF)]

    @property
    def singletons(self) -> tuple:
        return tuple(self.domain.unrank(lo) for lo, hi in self.intervals if lo == hi)

    @property
    def rays(self) -> tuple:
        """(direction, start label) for the unbounded intervals."""
        out = []
        for lo, hi in self.intervals:
            if hi == INF and lo != -INF:
                out.append(("up", self.domain.unrank(lo)))
            elif lo == -INF and hi != INF:
                out.append(("down", self.domain.unrank(hi)))
            elif lo == -INF and hi == INF:
                out.append(("all", None))
        return tuple(out)

    def render(self) -> str:
        if not self.intervals:
            return "{}"
        parts = []
        for lo, hi in self.intervals:
            a = "-inf" if lo == -INF else str(self.domain.unrank(lo))
            b = "inf" if hi == INF else str(self.domain.unrank(hi))
            parts.append("{" + a + "}" if a == b else "{" + a + ".." + b + "}")
        return " | ".join(parts)

    def to_json(self) -> dict:
        return {"domain": self.domain.kind, "set": self.render()}


def _endpoint_value(e, value):
    if isinstance(e, str):
        return INF if e == "inf" else -INF
    return e.at(value if value is not None else 0)


def index_set_at(expr: IndexSetExpr, dom: IndexDomain, value: int | None) -> IndexSet:
    parts = []
    for p in expr.parts:
        if p is None:
            continue
        parts.append((_endpoint_value(p[0], value), _endpoint_value(p[1], value)))
    return IndexSet.from_labels(dom, parts)


# -- stable subspaces ----------------------------------------------------------


def _vector(doc: Mapping, dom: IndexDomain) -> dict:
    out = {}
    for k, c in doc.items():
        label = int(k)
        if not dom.valid(label):
            raise InputError(f"label {label} is not in the {dom.kind} domain", field="extra")
        q = parse_rational(c)
        if q:
            out[label] = q
    return out


@dataclass(frozen=True)
class StableSubspace:
    """span{e_i : i in index_part} + span(extra), stored canonically.

    Extras are reduced modulo the index part and row reduced in label order,
    so equal descriptors compare equal.
    """

    index_part: IndexSet
    extra: tuple = ()  # tuple of tuples ((label, coef), ...)

    def __post_init__(self):
        dom = self.index_part.domain
        vecs = []
        for v in self.extra:
            d = dict(v)
            vecs.append({l: c for l, c in d.items() if c and l not in self.index_part})
        labels = sorted({l for v in vecs for l in v}, key=dom.rank)
        pos = {l: i for i, l in enumerate(labels)}
        e = Echelon(len(labels))
        for v in vecs:
            e.add({pos[l]: c for l, c in v.items()})
        canon = tuple(
            tuple((labels[i], to_fraction(c)) for i, c in sorted(row.items()))
            for row in e.sparse_rows()
        )
        object.__setattr__(self, "extra", canon)

    @property
    def domain(self) -> IndexDomain:
        return self.index_part.domain

    @classmethod
    def build(cls, dom, index_set: str | IndexSet = "{}", extra: Sequence[Mapping] = ()) -> "StableSubspace":
        dom = domain(dom)
        iset = index_set if isinstance(index_set, IndexSet) else IndexSet.parse(index_set, dom)
        vecs = tuple(tuple(_vector(v, dom).items()) for v in extra)
        return cls(iset, vecs)

    @classmethod
    def zero(cls, dom) -> "StableSubspace":
        return cls(IndexSet(domain(dom)))

    @classmethod
    def full(cls, dom) -> "StableSubspace":
        dom = domain(dom)
        return cls(IndexSet(dom, ((dom.min_rank(), INF),)))

    @property
    def normalization_level(self) -> int:
        return max((abs(l) for v in self.extra for l, _ in v), default=0)

    @property
    def horizon(self) -> int:
        ends = [abs(e) for e in self.index_part.finite_endpoints]
        return max(ends + [self.normalization_level, 0])

    def truncate(self, n: int) -> Subspace:
        if n < self.normalization_level:
            raise InputError(
                f"level {n} is below the normalization level {self.normalization_level}",
                field="level",
            )
        labels = self.domain.labels(n)
        pos = {l: i for i, l in enumerate(labels)}
        gens = [{pos[l]: Fraction(1)} for l in labels if l in self.index_part]
        gens += [{pos[l]: c for l, c in v} for v in self.extra]
        return span(gens, len(labels))

    def __le__(self, other: "StableSubspace") -> bool:
        n = max(self.horizon, other.horizon) + 1
        return self.truncate(n) <= other.truncate(n)

    def __lt__(self, other: "StableSubspace") -> bool:
        return self != other and self <= other

    def gap_is_infinite(self, bigger: "StableSubspace") -> bool:
        return not bigger.index_part.difference(self.index_part).is_finite()

    def render(self) -> str:
        text = self.index_part.render()
        for v in self.extra:
            text += " + <" + ", ".join(f"{l}:{format_rational(c)}" for l, c in v) + ">"
        return text

    def to_json(self) -> dict:
        doc = {"domain": self.domain.kind, "index_set": self.index_part.render()}
        if self.extra:
            doc["extra"] = [{str(l): format_rational(c) for l, c in v} for v in self.extra]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "StableSubspace":
        try:
            return cls.build(doc["domain"], doc.get("index_set", "{}"), doc.get("extra", ()))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"bad stable subspace document: {exc}", field="descriptor") from exc


@dataclass(frozen=True)
class StableFamily:
    """A monotone sequence of stable subspaces indexed by a parameter ray.

    Members come from an index-set template such as ``{-i..-1} for i >= 1``;
    the t-th member uses the t-th admissible parameter value.
    """

    domain: IndexDomain
    template: IndexSetExpr
    extra: tuple = ()

    def __post_init__(self):
        if self.template.quantifier is None:
            raise InputError("a family needs a 'for' clause", field="template")
        a, b, c = self.member(0), self.member(1), self.member(2)
        if not ((a < b and b < c) or (c < b and b < a)):
            raise InputError("family members are not strictly monotone", field="template")

    @classmethod
    def parse(cls, src: str, dom, extra: Sequence[Mapping] = ()) -> "StableFamily":
        dom = domain(dom)
        vecs = tuple(tuple(_vector(v, dom).items()) for v in extra)
        return cls(dom, parse_index_set(src), vecs)

    def value(self, t: int) -> int:
        q = self.template.quantifier
        return q.bound + t if q.cmp == ">=" else q.bound - t

    def member(self, t: int) -> StableSubspace:
        return StableSubspace(index_set_at(self.template, self.domain, self.value(t)), self.extra)

    @property
    def increasing(self) -> bool:
        return self.member(0) < self.member(1)

    def limit(self) -> StableSubspace:
        """Union (increasing) or intersection (decreasing) of all members."""
        step = 1 if self.template.quantifier.cmp == ">=" else -1
        parts = []
        for p in self.template.parts:
            if p is None:
                continue
            ends = []
            for e in p:
                if isinstance(e, str):
                    ends.append(INF if e == "inf" else -INF)
                elif e.slope * step > 0:
                    ends.append(INF)
                elif e.slope * step < 0:
                    ends.append(-INF)
                else:
                    ends.append(e.offset)
            parts.append(tuple(ends))
        return StableSubspace(IndexSet.from_labels(self.domain, parts), self.extra)

    @property
    def bottom(self) -> StableSubspace:
        return self.member(0) if self.increasing else self.limit()

    @property
    def top(self) -> StableSubspace:
        return self.limit() if self.increasing else self.member(0)

    @property
    def horizon(self) -> int:
        b = abs(self.template.quantifier.bound)
        offs = [abs(e.offset) for p in self.template.parts if p for e in p if isinstance(e, Index)]
        return max([b] + offs + [self.member(0).horizon, self.limit().horizon])

    def members_through(self, n: int) -> list[StableSubspace]:
        """Enough members that every later one truncates like the limit at level n."""
        return [self.member(t) for t in range(n + self.horizon + 2)]

    def render(self) -> str:
        return self.template.render()

    def to_json(self) -> dict:
        doc = {"domain": self.domain.kind, "family": self.template.render()}
        if self.extra:
            doc["extra"] = [{str(l): format_rational(c) for l, c in v} for v in self.extra]
        return doc


# -- template subspaces --------------------------------------------------------


@dataclass(frozen=True)
class SeqSubspace:
    """span(explicit) + span of every instance of each template family."""

    domain: IndexDomain
    explicit: tuple = ()  # tuple of ((label, coef), ...)
    families: tuple = ()  # TemplateExpr

    def __post_init__(self):
        sides = set()
        for fam in self.families:
            if fam.is_tensor:
                raise InputError("subspace templates must be vectors, not tensors", field="families")
            sides |= {t.symbol == "x*" for t in fam.terms}
        if len(sides) > 1:
            raise InputError("template mixes V and V_* symbols", field="families")

    @property
    def side(self) -> str:
        for fam in self.families:
            return "right" if fam.terms[0].symbol == "x*" else "left"
        return "left"

    @classmethod
    def build(cls, dom, families: Sequence[str] = (), explicit: Sequence[Mapping] = ()) -> "SeqSubspace":
        dom = domain(dom)
        fams = tuple(parse_template(f) for f in families)
        vecs = tuple(tuple(_vector(v, dom).items()) for v in explicit)
        return cls(dom, vecs, fams)

    @property
    def normalization_level(self) -> int:
        return max((abs(l) for v in self.explicit for l, _ in v), default=0)

    def _instances(self, fam: TemplateExpr, n: int):
        lo, hi = -INF, INF
        for t in fam.terms:
            s, o = t.index.slope, t.index.offset
            if s == 1:
                lo, hi = max(lo, -n - o), min(hi, n - o)
            elif s == -1:
                lo, hi = max(lo, o - n), min(hi, o + n)
        if fam.quantifier is None or lo == -INF:
            values = [None]
        else:
            values = fam.quantifier.values(int(lo), int(hi)) if lo <= hi else []
        for v in values:
            inst = fam.instance(v)
            labels = [l for (_, l) in inst]
            if all(self.domain.valid(l) and abs(l) <= n for l in labels):
                yield {l: c for (_, l), c in inst.items()}

    def generators_within(self, n: int) -> list[dict]:
        out = [dict(v) for v in self.explicit if all(abs(l) <= n for l, _ in v)]
        for fam in self.families:
            out.extend(self._instances(fam, n))
        return out

    def truncate(self, n: int) -> Subspace:
        if n < self.normalization_level:
            raise InputError(
                f"level {n} is below the normalization level {self.normalization_level}",
                field="level",
            )
        labels = self.domain.labels(n)
        pos = {l: i for i, l in enumerate(labels)}
        return span([{pos[l]: c for l, c in g.items()} for g in self.generators_within(n)], len(labels))

    def to_json(self) -> dict:
        doc = {"domain": self.domain.kind, "families": [f.render() for f in self.families]}
        if self.explicit:
            doc["explicit"] = [{str(l): format_rational(c) for l, c in v} for v in self.explicit]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "SeqSubspace":
        try:
            return cls.build(doc["domain"], doc.get("families", ()), doc.get("explicit", ()))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"bad template subspace document: {exc}", field="descriptor") from exc


def descriptor_from_json(doc: Mapping):
    if not isinstance(doc, Mapping):
        raise InputError("descriptor must be a JSON object", field="descriptor")
    if "families" in doc or "explicit" in doc:
        return SeqSubspace.from_json(doc)
    return StableSubspace.from_json(doc)


# -- pairings on descriptors ---------------------------------------------------


@dataclass(frozen=True)
class PairingDescriptor:
    """A named pairing extended index-wise over a domain."""

    kind: str
    domain: IndexDomain

    def __post_init__(self):
        if self.kind not in ("standard_dual", "split_symmetric", "split_symplectic"):
            raise InputError(f"unknown descriptor pairing {self.kind!r}", field="pairing")
        if self.kind != "standard_dual" and self.domain.kind != "signed":
            raise InputError("split forms need the signed domain", field="pairing")

    def at_level(self, n: int) -> Pairing:
        labels = self.domain.labels(n)
        if self.kind == "standard_dual":
            return standard_dual(len(labels), labels)
        if self.kind == "split_symmetric":
            return split_symmetric(len(labels))
        return split_symplectic(len(labels))

    def to_json(self) -> dict:
        return {"kind": self.kind, "domain": self.domain.kind}

    @classmethod
    def from_json(cls, doc: Mapping) -> "PairingDescriptor":
        try:
            return cls(doc["kind"], domain(doc.get("domain", "positive")))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad pairing descriptor: {exc}", field="pairing") from exc


@dataclass(frozen=True)
class Certificate:
    level: int
    lookahead: int
    stable: bool

    def to_json(self) -> dict:
        return {"level": self.level, "lookahead": self.lookahead, "stable": self.stable}


def _generators(d, m: int) -> list[dict]:
    if isinstance(d, StableSubspace):
        labels = d.domain.labels(m)
        return [{labels[i]: c for i, c in enumerate(r) if c} for r in d.truncate(m).basis]
    return d.generators_within(m)


def _side(d) -> str:
    return d.side if isinstance(d, SeqSubspace) else "left"


def _perp_rows(gens: list[dict], P: PairingDescriptor, m: int, n: int, side: str) -> list[dict]:
    """Constraints <g, y> = 0 (or <y, g> = 0) restricted to level-n unknowns y."""
    Pm = P.at_level(m)
    labels_m = P.domain.labels(m)
    pos_m = {l: i for i, l in enumerate(labels_m)}
    labels_n = P.domain.labels(n)
    g = Pm.gram
    rows = []
    for gen in gens:
        row = {}
        for j, lj in enumerate(labels_n):
            jm = pos_m[lj]
            if side == "left":
                c = sum((coef * g[pos_m[l]][jm] for l, coef in gen.items()), Fraction(0))
            else:
                c = sum((g[jm][pos_m[l]] * coef for l, coef in gen.items()), Fraction(0))
            if c:
                row[j] = c
        if row:
            rows.append(row)
    return rows


def _perp_at(d, P: PairingDescriptor, n: int, L: int) -> Subspace:
    m = n + L
    rows = _perp_rows(_generators(d, m), P, m, n, _side(d))
    return _kernel_subspace(rows, P.domain.dim(n))


def _check_level(d, n: int, L: int):
    if L < 0:
        raise InputError("lookahead must be nonnegative", field="lookahead")
    if n < 1:
        raise InputError("level must be positive", field="level")
    if n + L < getattr(d, "normalization_level", 0):
        raise InputError("level plus lookahead is below the normalization level", field="level")


def perp_certified(d, P: PairingDescriptor, n: int, L: int = 1) -> tuple[Subspace, Certificate]:
    """Level-n part of d^perp using generators supported within level n + L."""
    _check_level(d, n, L)
    a = _perp_at(d, P, n, L)
    b = _perp_at(d, P, n, L + 1)
    return a, Certificate(n, L, a == b)


def _closure_at(d, P: PairingDescriptor, n: int, L: int) -> Subspace:
    m = n + L
    inner = _perp_at(d, P, m, L)
    labels_m = P.domain.labels(m)
    gens = [{labels_m[i]: c for i, c in enumerate(r) if c} for r in inner.basis]
    other = "right" if _side(d) == "left" else "left"
    rows = _perp_rows(gens, P, m, n, other)
    return _kernel_subspace(rows, P.domain.dim(n))


def closure_certified(d, P: PairingDescriptor, n: int, L: int = 1) -> tuple[Subspace, Certificate]:
    """Level-n part of the double perpendicular, each perp taken with lookahead L."""
    _check_level(d, n, L)
    a = _closure_at(d, P, n, L)
    b = _closure_at(d, P, n, L + 1)
    return a, Certificate(n, L, a == b)


# -- descriptor flags ----------------------------------------------------------


@dataclass(frozen=True)
class DescriptorPair:
    pred: StableSubspace
    succ: StableSubspace
    inf_marker: bool

    def to_json(self) -> dict:
        return {"pred": self.pred.to_json(), "succ": self.succ.to_json(), "inf_marker": self.inf_marker}


@dataclass(frozen=True)
class DescriptorFlag:
    """fl(C) for a chain of stable subspaces and monotone families.

    Blocks are either single pairs or whole families (each family
    contributing its consecutive members as pairs).
    """

    domain: IndexDomain
    blocks: tuple

    @property
    def inserted_pairs(self) -> tuple:
        return tuple(b for b in self.blocks if isinstance(b, DescriptorPair))

    def _member_sequence(self, n: int):
        """Descriptor members in increasing order, enough to cover level n."""
        seq = []
        for b in self.blocks:
            if isinstance(b, DescriptorPair):
                if not seq or seq[-1] != b.pred:
                    seq.append(b.pred)
                seq.append(b.succ)
            else:
                ms = b.members_through(n)
                if not b.increasing:
                    ms = ms[::-1]
                ms = [b.bottom] + ms + [b.top] if b.increasing else [b.bottom] + ms
                for s in ms:
                    if not seq or seq[-1] != s:
                        seq.append(s)
        return seq

    def truncate(self, n: int) -> GeneralizedFlag:
        seq = self._member_sequence(n)
        dim = self.domain.dim(n)
        pairs = []
        prev_d, prev_t = seq[0], seq[0].truncate(n)
        for d in seq[1:]:
            t = d.truncate(n)
            if t != prev_t:
                pairs.append(FlagPair(prev_t, t, prev_d.gap_is_infinite(d)))
                prev_d, prev_t = d, t
            else:
                prev_d = d
        return GeneralizedFlag(dim, tuple(pairs))

    def to_json(self) -> dict:
        out = []
        for b in self.blocks:
            if isinstance(b, DescriptorPair):
                out.append({"pair": b.to_json()})
            else:
                out.append({"family": b.to_json(), "increasing": b.increasing})
        return {"domain": self.domain.kind, "blocks": out}


def _ends(item):
    if isinstance(item, StableFamily):
        return item.bottom, item.top
    return item, item


def fl_stable(C: Sequence, dom=None) -> DescriptorFlag:
    """Descriptor-level fl(C) for a chain of StableSubspace / StableFamily items.

    Items must be listed in increasing order, start with 0 and end with the
    full space.  Between consecutive items the pair (top of one, bottom of the
    next) is inserted exactly when the two differ.
    """
    if not C:
        raise InputError("empty chain", field="chain")
    dom = domain(dom) if dom is not None else _ends(C[0])[0].domain
    if C[0] != StableSubspace.zero(dom):
        raise InputError("chain must start with the zero descriptor", field="chain")
    if C[-1] != StableSubspace.full(dom):
        raise InputError("chain must end with the full descriptor", field="chain")
    for item in C:
        if _ends(item)[0].domain != dom:
            raise InputError("chain items use different domains", field="chain")
    blocks = []
    for a, b in zip(C, C[1:]):
        top, bottom = _ends(a)[1], _ends(b)[0]
        if not top <= bottom:
            raise InputError(f"{top.render()} is not contained in {bottom.render()}", field="chain")
        if isinstance(a, StableFamily) and (not blocks or blocks[-1] is not a):
            blocks.append(a)
        if top != bottom:
            blocks.append(DescriptorPair(top, bottom, top.gap_is_infinite(bottom)))
    return DescriptorFlag(dom, tuple(blocks))


def truncate_chain(C: Sequence, n: int) -> Chain:
    """Truncate every member of a descriptor chain (families member by member)."""
    subs = []
    for item in C:
        if isinstance(item, StableFamily):
            subs.extend(m.truncate(n) for m in item.members_through(n))
            subs.append(item.limit().truncate(n))
        else:
            subs.append(item.truncate(n))
    dom = _ends(C[0])[0].domain
    return Chain.of(subs, dom.dim(n))


def truncate(d, n: int) -> Subspace:
    return d.truncate(n)


__all__ = [
    "Certificate",
    "DescriptorFlag",
    "DescriptorPair",
    "IndexDomain",
    "IndexSet",
    "PairingDescriptor",
    "POSITIVE",
    "SIGNED",
    "SeqSubspace",
    "StableFamily",
    "StableSubspace",
    "closure_certified",
    "descriptor_from_json",
    "fl_stable",
    "index_set_at",
    "perp_certified",
    "truncate",
    "truncate_chain",
]
