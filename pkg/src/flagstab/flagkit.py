"""
Chains and generalized flags at finite level.

A finite-level generalized flag is stored as its list of immediate
predecessor/successor pairs ``(pred, succ)``.  Consecutive pairs share a
member and the first predecessor is 0, so every nonzero vector of the
support falls in exactly one ``succ - pred`` gap.  Pairs produced by
truncating an infinite descriptor may carry ``inf_marker`` to say that the
gap they came from was infinite-dimensional.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InputError, PreconditionError
from .exact_linalg import Subspace, as_vector, span
from .pairing import Pairing, classify, closure, is_isotropic, maximal_isotropic_extensions, perp


@dataclass(frozen=True)
class Chain:
    ambient_dim: int
    members: tuple

    def __post_init__(self):
        for a, b in zip(self.members, self.members[1:]):
            if not a < b:
                raise InputError("chain members must be strictly increasing", field="members")

    @classmethod
    def of(cls, subspaces: Iterable[Subspace], ambient_dim: int | None = None) -> "Chain":
        """Sort by dimension and drop duplicates; raise if not totally ordered."""
        subs = list(subspaces)
        if ambient_dim is None:
            if not subs:
                raise InputError("empty chain needs ambient_dim")
            ambient_dim = subs[0].ambient_dim
        uniq = sorted(set(subs), key=lambda s: (s.dim, s.basis))
        for a in uniq:
            if a.ambient_dim != ambient_dim:
                raise InputError("chain member in the wrong ambient", field="members")
        for a, b in zip(uniq, uniq[1:]):
            if not a <= b:
                raise InputError(f"{a!r} and {b!r} are not comparable", field="members")
        return cls(ambient_dim, tuple(uniq))


@dataclass(frozen=True)
class FlagPair:
    pred: Subspace
    succ: Subspace
    inf_marker: bool = field(default=False, compare=False)

    @property
    def codim(self) -> int:
        return self.succ.dim - self.pred.dim

    def to_json(self) -> dict:
        doc = {"pred": self.pred.to_json(), "succ": self.succ.to_json()}
        if self.inf_marker:
            doc["inf_marker"] = True
        return doc


@dataclass(frozen=True)
class GeneralizedFlag:
    ambient_dim: int
    pairs: tuple = ()

    def __post_init__(self):
        n = self.ambient_dim
        prev = None
        for k, p in enumerate(self.pairs):
            if p.pred.ambient_dim != n or p.succ.ambient_dim != n:
                raise InputError(f"pair {k} lives in the wrong ambient", field="pairs")
            if not p.pred < p.succ:
                raise InputError(f"pair {k}: pred is not strictly inside succ", field="pairs")
            if prev is None:
                if not p.pred.is_zero():
                    raise InputError("first predecessor must be 0", field="pairs")
            elif prev.succ != p.pred:
                raise InputError(
                    f"pair {k}: predecessor differs from the previous successor", field="pairs"
                )
            prev = p

    @classmethod
    def from_members(cls, members: Sequence[Subspace], ambient_dim: int | None = None) -> "GeneralizedFlag":
        """Flag whose pairs are consecutive members of 0 ⊂ members[0] ⊂ ..."""
        if ambient_dim is None:
            if not members:
                raise InputError("empty flag needs ambient_dim")
            ambient_dim = members[0].ambient_dim
        subs = [Subspace.zero(ambient_dim)] + [m for m in members if not m.is_zero()]
        return cls(ambient_dim, tuple(FlagPair(a, b) for a, b in zip(subs, subs[1:])))

    @classmethod
    def from_vectors(cls, vectors: Sequence, ambient_dim: int) -> "GeneralizedFlag":
        """Flag 0 ⊂ <v1> ⊂ <v1,v2> ⊂ ... built from independent vectors."""
        members = [span(vectors[: k + 1], ambient_dim) for k in range(len(vectors))]
        return cls.from_members(members, ambient_dim)

    @property
    def members(self) -> tuple:
        if not self.pairs:
            return (Subspace.zero(self.ambient_dim),)
        return (self.pairs[0].pred,) + tuple(p.succ for p in self.pairs)

    @property
    def support(self) -> Subspace:
        return self.pairs[-1].succ if self.pairs else Subspace.zero(self.ambient_dim)

    def __len__(self):
        return len(self.pairs)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "pairs": [p.to_json() for p in self.pairs]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "GeneralizedFlag":
        try:
            n = int(doc["ambient_dim"])
            raw = doc["pairs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad flag document: {exc}", field="flag") from exc
        pairs = []
        for item in raw:
            try:
                pred = Subspace.from_json(item["pred"])
                succ = Subspace.from_json(item["succ"])
            except (KeyError, TypeError) as exc:
                raise InputError(f"bad flag pair: {exc}", field="pairs") from exc
            pairs.append(FlagPair(pred, succ, bool(item.get("inf_marker", False))))
        return cls(n, tuple(pairs))


@dataclass(frozen=True)
class FlagReport:
    is_maximal: bool
    is_closed: bool
    is_bivalent: bool
    good_pairs: tuple

    def to_json(self) -> dict:
        return {
            "is_maximal": self.is_maximal,
            "is_closed": self.is_closed,
            "is_bivalent": self.is_bivalent,
            "good_pairs": list(self.good_pairs),
        }


def fl_from_chain(C: Chain, ambient: Subspace) -> GeneralizedFlag:
    """The generalized flag generated by a chain containing 0 and ``ambient``.

    For nonzero x the predecessor is the union of the members missing x and
    the successor is the intersection of those containing x.  In a finite
    chain these are the two members adjacent across x, so the distinct
    (pred, succ) pairs are the consecutive members.
    """
    n = ambient.ambient_dim
    if C.ambient_dim != n:
        raise InputError("chain and ambient disagree on dimension")
    members = C.members
    if not members or not members[0].is_zero():
        raise InputError("chain must contain the zero subspace", field="members")
    if members[-1] != ambient:
        raise InputError("chain must contain the ambient subspace as its top", field="members")
    return GeneralizedFlag(n, tuple(FlagPair(a, b) for a, b in zip(members, members[1:])))


def locate(F: GeneralizedFlag, x) -> FlagPair:
    x = as_vector(x, F.ambient_dim)
    if not any(x):
        raise InputError("zero vector has no pair", field="x")
    for p in F.pairs:
        if x in p.succ:
            return p
    raise InputError("vector lies outside the flag's support", field="x")


def is_refinement(G: GeneralizedFlag, F: GeneralizedFlag) -> bool:
    """True iff every pair of G sits inside a pair of F."""
    if G.ambient_dim != F.ambient_dim or G.support != F.support:
        raise InputError("flags must share ambient and support")
    for g in G.pairs:
        if not any(f.pred <= g.pred and g.succ <= f.succ for f in F.pairs):
            return False
    return True


def flag_report(F: GeneralizedFlag, P: Pairing) -> FlagReport:
    if P.left_dim != F.ambient_dim:
        raise InputError("pairing does not act on the flag's ambient", field="pairing")
    closed_cache: dict = {}

    def clo(S):
        if S not in closed_cache:
            closed_cache[S] = closure(S, P)
        return closed_cache[S]

    good = tuple(k for k, p in enumerate(F.pairs) if clo(p.pred) == p.pred)
    is_closed = all(
        clo(p.succ) == p.succ and clo(p.pred) in (p.pred, p.succ) for p in F.pairs
    )
    maximal = all(p.codim == 1 for p in F.pairs)
    bivalent = all(F.pairs[k].codim == 1 or F.pairs[k].inf_marker for k in good)
    return FlagReport(maximal, is_closed, bivalent, good)


def iso_part(F: GeneralizedFlag, P: Pairing) -> GeneralizedFlag:
    if not P.is_form:
        raise InputError("isotropic part needs a form", field="pairing")
    pairs = tuple(p for p in F.pairs if is_isotropic(p.succ, P))
    return GeneralizedFlag(F.ambient_dim, pairs)


def is_isotropic_flag(F: GeneralizedFlag, P: Pairing) -> bool:
    return is_isotropic(F.support, P)


def is_maximal_isotropic_flag(F: GeneralizedFlag, P: Pairing) -> bool:
    """Maximal closed isotropic: codimension-1 steps filling a maximal isotropic."""
    return (
        all(p.codim == 1 for p in F.pairs)
        and classify(F.support, P).is_maximal_isotropic
        and flag_report(F, P).is_closed
    )


def twin(F: GeneralizedFlag, P: Pairing) -> GeneralizedFlag | None:
    """Swap the last successor for the other maximal isotropic extension."""
    if not P.is_symmetric:
        raise PreconditionError("twins need a symmetric form", condition="symmetric")
    if not F.pairs or not is_maximal_isotropic_flag(F, P):
        raise PreconditionError(
            "flag is not a maximal closed isotropic flag", condition="maximal_closed_isotropic"
        )
    last = F.pairs[-1]
    L = last.pred
    if closure(L, P) != L or perp(L, P).dim - L.dim != 2:
        return None
    others = maximal_isotropic_extensions(L, P) - {last.succ}
    if len(others) != 1:
        return None
    (other,) = others
    return GeneralizedFlag(F.ambient_dim, F.pairs[:-1] + (FlagPair(L, other, last.inf_marker),))


def is_borel_refinement(G: GeneralizedFlag, F: GeneralizedFlag, P: Pairing) -> bool:
    """Check G against F's pairs: marked infinite good pairs are filled by
    codimension-1 steps whose inner predecessors are dense in F's successor;
    every other pair of F must appear in G unchanged."""
    if not is_refinement(G, F):
        return False
    report = flag_report(F, P)
    good = set(report.good_pairs)
    gpairs = set((g.pred, g.succ) for g in G.pairs)
    for k, f in enumerate(F.pairs):
        if k in good and f.inf_marker:
            inner = [g for g in G.pairs if f.pred <= g.pred and g.succ <= f.succ]
            for g in inner:
                if g.codim != 1:
                    return False
                if g.pred != f.pred and closure(g.pred, P) != f.succ:
                    return False
        elif (f.pred, f.succ) not in gpairs:
            return False
    return True


# -- enumerations and samplers -------------------------------------------------


def coordinate_flags(n: int) -> list[GeneralizedFlag]:
    """The n! maximal flags spanned by permuted standard basis vectors."""
    basis = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    return [
        GeneralizedFlag.from_vectors([basis[i] for i in perm], n)
        for perm in itertools.permutations(range(n))
    ]


def signed_sequences(n: int):
    """All sequences of n distinct signed labels covering each |label| once."""
    for perm in itertools.permutations(range(1, n + 1)):
        for signs in itertools.product((1, -1), repeat=n):
            yield tuple(s * p for s, p in zip(signs, perm))


def isotropic_flag_from_labels(P: Pairing, labels: Sequence[int]) -> GeneralizedFlag:
    return GeneralizedFlag.from_vectors([P.e(l) for l in labels], P.left_dim)


def basis_aligned_isotropic_flags(P: Pairing) -> list[GeneralizedFlag]:
    """The 2^n n! maximal isotropic flags spanned by basis vectors e_{±i}."""
    n = P.left_dim // 2
    return [isotropic_flag_from_labels(P, seq) for seq in signed_sequences(n)]


def _random_invertible(n: int, rng: random.Random, bound: int = 3) -> list[list[Fraction]]:
    while True:
        rows = [[Fraction(rng.randint(-bound, bound)) for _ in range(n)] for _ in range(n)]
        if span(rows, n).dim == n:
            return rows


def random_maximal_flag(n: int, rng: random.Random) -> GeneralizedFlag:
    """Maximal flag spanned by the rows of a random small-integer matrix."""
    return GeneralizedFlag.from_vectors(_random_invertible(n, rng), n)


def _apply(transform, vectors):
    return [transform(v) for v in vectors]


def random_isometry(P: Pairing, rng: random.Random, steps: int = 4, bound: int = 2):
    """A random form-preserving map, as a function on vectors.

    Symmetric forms use products of reflections in anisotropic vectors;
    antisymmetric forms use products of transvections.
    """
    n = P.left_dim
    maps = []
    for _ in range(steps):
        while True:
            v = tuple(Fraction(rng.randint(-bound, bound)) for _ in range(n))
            if not any(v):
                continue
            q = P.value(v, v)
            if P.is_symmetric and q == 0:
                continue
            break
        if P.is_symmetric:
            maps.append(("reflect", v, q))
        else:
            maps.append(("transvect", v, Fraction(rng.choice([-2, -1, 1, 2]))))

    def transform(x):
        for kind, v, c in maps:
            if kind == "reflect":
                t = 2 * P.value(x, v) / c
            else:
                t = -c * P.value(x, v)
            x = tuple(a - t * b for a, b in zip(x, v))
        return x

    return transform


def random_isotropic_flag(P: Pairing, rng: random.Random) -> GeneralizedFlag:
    """Image of a random basis-aligned maximal isotropic flag under a random isometry."""
    n = P.left_dim // 2
    labels = [l * rng.choice((1, -1)) for l in rng.sample(range(1, n + 1), n)]
    g = random_isometry(P, rng)
    vectors = _apply(g, [P.e(l) for l in labels])
    return GeneralizedFlag.from_vectors(vectors, P.left_dim)


__all__ = [
    "Chain",
    "FlagPair",
    "FlagReport",
    "GeneralizedFlag",
    "basis_aligned_isotropic_flags",
    "coordinate_flags",
    "fl_from_chain",
    "flag_report",
    "is_borel_refinement",
    "is_maximal_isotropic_flag",
    "is_refinement",
    "iso_part",
    "isotropic_flag_from_labels",
    "locate",
    "random_isometry",
    "random_isotropic_flag",
    "random_maximal_flag",
    "signed_sequences",
    "twin",
]
