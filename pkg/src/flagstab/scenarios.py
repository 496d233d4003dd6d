"""
Built-in scenarios and the per-level verification harness.

A scenario bundles descriptors with an ambient constructor per level.  A
property is a named check run independently at every requested level; the
report lists pass/fail per level and carries witnesses for failures.
"""

from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .dsl import parse_template
from .errors import InputError, PreconditionError
from .flagkit import (
    GeneralizedFlag,
    basis_aligned_isotropic_flags,
    coordinate_flags,
    fl_from_chain,
    iso_part,
    locate,
    twin,
)
from .liealg import (
    Ambient,
    _formula_precondition,
    bracket,
    element_type,
    extend_ambient,
    is_maximal_solvable,
    is_solvable,
    line_system,
    make_ambient,
    nilpotent_subalgebra,
    normalizer,
    orbit,
    stabilizer,
    toral_subalgebra,
)
from .limits import (
    POSITIVE,
    SIGNED,
    PairingDescriptor,
    SeqSubspace,
    StableFamily,
    StableSubspace,
    closure_certified,
    fl_stable,
    perp_certified,
    truncate_chain,
)
from .exact_linalg import Subspace, format_rational, intersect, subspace_sum
from .pairing import Pairing, closure, perp, split_symmetric, standard_dual

X_TEMPLATE = "x(i) ⊗ (x*(i) + x*(-i)) for i >= 1"


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    properties: tuple
    kind: str = ""
    pairing: PairingDescriptor | None = None
    chain: tuple = ()
    subspace: SeqSubspace | None = None
    extra_template: str = ""
    expect_gap_pair: bool | None = None

    # -- descriptor views --

    @property
    def flag(self):
        if not self.chain:
            raise InputError(f"scenario {self.name} has no flag", field="scenario")
        return fl_stable(self.chain)

    def flag_at(self, n: int) -> GeneralizedFlag:
        return self.flag.truncate(n)

    def extra_at(self, n: int) -> tuple:
        """The extension element at level n, as a matrix in level-n coordinates."""
        if not self.extra_template:
            raise InputError(f"scenario {self.name} has no extension element", field="scenario")
        labels = SIGNED.labels(n)
        pos = {l: i for i, l in enumerate(labels)}
        t = parse_template(self.extra_template)
        size = len(labels)
        M = [[Fraction(0)] * size for _ in range(size)]
        for v in t.quantifier.values(1, n):
            for (i, j), c in t.matrix_instance(v).items():
                M[pos[i]][pos[j]] += c
        return tuple(tuple(r) for r in M)

    def form_at(self, n: int) -> Pairing:
        return self.pairing.at_level(n)

    def ambient_at(self, n: int) -> Ambient:
        return make_ambient(self.kind, self.form_at(n))

    def to_json(self) -> dict:
        doc: dict = {"name": self.name, "description": self.description, "properties": list(self.properties)}
        if self.kind:
            doc["ambient_kind"] = self.kind
        if self.pairing is not None:
            doc["pairing"] = self.pairing.to_json()
        if self.chain:
            doc["chain"] = [c.to_json() for c in self.chain]
        if self.subspace is not None:
            doc["subspace"] = self.subspace.to_json()
        if self.extra_template:
            doc["extra"] = parse_template(self.extra_template).render()
        return doc


def _signed_flag_chain():
    zero, full = StableSubspace.zero(SIGNED), StableSubspace.full(SIGNED)
    negative = StableFamily.parse("{-inf..-i} for i >= 1", SIGNED)
    positive = StableFamily.parse("{-inf..i} for i >= 1", SIGNED)
    return (zero, negative, positive, full)


def _gap_chain(with_extra_line: bool):
    zero, full = StableSubspace.zero(SIGNED), StableSubspace.full(SIGNED)
    lower = StableFamily.parse("{-i..-1} for i >= 1", SIGNED)
    mid = "{1} | " if with_extra_line else ""
    upper = StableFamily.parse("{-inf..-1} | " + mid + "{j..inf} for j >= 2", SIGNED)
    return (zero, lower, upper, full)


def _finite(name, description, properties, kind, pairing_kind):
    return Scenario(name, description, properties, kind, PairingDescriptor(pairing_kind, SIGNED))


FLAG_CHECKS = ("stabilizer-is-borel", "orbit-table", "figure1-decomposition")

_BUILTINS: dict[str, Callable[[], Scenario]] = {
    "paper_example_1": lambda: Scenario(
        "paper_example_1",
        "sl(V, V_*) over the signed basis with the flag F_i = span{x_j : j <= i}",
        FLAG_CHECKS + ("fl-commutes",),
        "sl",
        PairingDescriptor("standard_dual", SIGNED),
        chain=_signed_flag_chain(),
    ),
    "paper_example_2": lambda: Scenario(
        "paper_example_2",
        "the extension of sl(V, V_*) by X = sum_i x_i ⊗ (x_i^* + x_{-i}^*) and the Borel of example 1",
        ("normalizer-forces-a-zero",),
        "sl",
        PairingDescriptor("standard_dual", SIGNED),
        chain=_signed_flag_chain(),
        extra_template=X_TEMPLATE,
    ),
    "dense_hyperplane": lambda: Scenario(
        "dense_hyperplane",
        "span{e_k - e_(k+1) : k >= 1}: perp is 0 and closure is everything",
        ("closure-is-full",),
        pairing=PairingDescriptor("standard_dual", POSITIVE),
        subspace=SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"]),
    ),
    "fl_chain_gap": lambda: Scenario(
        "fl_chain_gap",
        "V_i = span{e_-i..e_-1}, W_j = negatives + e_1 + tail from j: the union and intersection differ",
        ("fl-commutes",),
        chain=_gap_chain(True),
        expect_gap_pair=True,
    ),
    "fl_chain_nogap": lambda: Scenario(
        "fl_chain_nogap",
        "V_i = span{e_-i..e_-1}, W_j = negatives + tail from j: the union equals the intersection",
        ("fl-commutes",),
        chain=_gap_chain(False),
        expect_gap_pair=False,
    ),
    "sl_coordinate_flags": lambda: Scenario(
        "sl_coordinate_flags",
        "all coordinate maximal flags of sl_n (level n)",
        FLAG_CHECKS + ("injectivity",),
        "sl",
    ),
    "so_basis_flags": lambda: _finite(
        "so_basis_flags",
        "basis-aligned maximal isotropic flags of so, dimension 2n (level n)",
        FLAG_CHECKS + ("twin-fiber", "iso-part-stabilizer"),
        "so",
        "split_symmetric",
    ),
    "so_odd_basis_flags": lambda: Scenario(
        "so_odd_basis_flags",
        "basis-aligned maximal isotropic flags of so, dimension 2n+1 (level n)",
        FLAG_CHECKS + ("twin-fiber", "iso-part-stabilizer"),
        "so",
    ),
    "sp_basis_flags": lambda: _finite(
        "sp_basis_flags",
        "basis-aligned maximal isotropic flags of sp, dimension 2n (level n)",
        FLAG_CHECKS + ("injectivity", "iso-part-stabilizer"),
        "sp",
        "split_symplectic",
    ),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str) -> Scenario:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise InputError(
            f"unknown scenario {name!r}; known: {', '.join(BUILTIN_NAMES)}", field="scenario"
        ) from None


def _level_setup(sc: Scenario, n: int) -> tuple[Ambient, list[GeneralizedFlag]]:
    """Ambient and the flags to test at level n."""
    if sc.name == "sl_coordinate_flags":
        return make_ambient("sl", n), coordinate_flags(n)
    if sc.name == "so_odd_basis_flags":
        A = make_ambient("so", split_symmetric(2 * n + 1))
        return A, basis_aligned_isotropic_flags(A.form)
    if sc.name in ("so_basis_flags", "sp_basis_flags"):
        A = sc.ambient_at(n)
        return A, basis_aligned_isotropic_flags(A.form)
    if sc.chain and sc.kind:
        return sc.ambient_at(n), [sc.flag_at(n)]
    raise InputError(f"scenario {sc.name} has no flags to test", field="scenario")


# -- per-level checks -------------------------------------------------------------


@dataclass
class LevelResult:
    level: int
    passed: bool
    summary: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        doc = {"level": self.level, "pass": self.passed, "summary": self.summary}
        if self.witnesses:
            doc["witnesses"] = self.witnesses
        return doc


def _flag_doc(F: GeneralizedFlag) -> list:
    """Compact witness form: the RREF bases of the nonzero members."""
    return [m.to_json()["basis"] for m in F.members[1:]]


def _formula_applies(F, A) -> bool:
    try:
        _formula_precondition(F, A)
    except PreconditionError:
        return False
    return True


def _paper_borel_dim(n: int) -> int:
    return (2 * n) * (2 * n + 1) // 2 - 1


def check_stabilizer_is_borel(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    res = LevelResult(n, True)
    dims = set()
    for F in flags:
        b = stabilizer(F, A)
        dims.add(b.dim)
        problems = []
        if _formula_applies(F, A) and stabilizer(F, A, "formula").space != b.space:
            problems.append("brute and formula stabilizers differ")
        if not is_solvable(b):
            problems.append("stabilizer is not solvable")
        elif not is_maximal_solvable(b):
            problems.append("stabilizer is not maximal solvable")
        if normalizer(b, A).space != b.space:
            problems.append("stabilizer is not self-normalizing")
        if sc.name == "paper_example_1" and b.dim != _paper_borel_dim(n):
            problems.append(f"dimension {b.dim}, expected {_paper_borel_dim(n)}")
        if problems:
            res.passed = False
            res.witnesses.append({"flag": _flag_doc(F), "problems": problems})
    res.summary = {"flags": len(flags), "stabilizer_dims": sorted(dims)}
    return res


def check_injectivity(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    seen: dict = {}
    res = LevelResult(n, True)
    for F in flags:
        key = stabilizer(F, A).space
        if key in seen:
            res.passed = False
            res.witnesses.append({"flags": [_flag_doc(seen[key]), _flag_doc(F)]})
        else:
            seen[key] = F
    res.summary = {"flags": len(flags), "distinct_stabilizers": len(seen)}
    return res


def check_twin_fiber(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    fibers = defaultdict(set)
    for F in flags:
        fibers[stabilizer(F, A).space].add(F)
    res = LevelResult(n, True)
    sizes = defaultdict(int)
    for F in flags:
        fiber = fibers[stabilizer(F, A).space]
        t = twin(F, A.form)
        expected = {F} if t is None else {F, t}
        if fiber != expected:
            res.passed = False
            res.witnesses.append(
                {"flag": _flag_doc(F), "fiber_size": len(fiber), "expected_size": len(expected)}
            )
    for fiber in fibers.values():
        sizes[len(fiber)] += 1
    res.summary = {"flags": len(flags), "fiber_sizes": {str(k): v for k, v in sorted(sizes.items())}}
    return res


def check_figure1(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    res = LevelResult(n, True)
    for F in flags:
        b = stabilizer(F, A)
        t = toral_subalgebra(line_system(F, A), A)
        nil = nilpotent_subalgebra(F, A)
        problems = []
        if subspace_sum(t.space, nil.space) != b.space:
            problems.append("span(t, n) differs from b")
        if not intersect(t.space, nil.space).is_zero():
            problems.append("t and n intersect")
        if t.dim + nil.dim != b.dim:
            problems.append("dim t + dim n differs from dim b")
        if any(element_type(Z) != "semisimple" for Z in t.basis):
            problems.append("toral basis element is not semisimple")
        if any(element_type(Z) != "nilpotent" for Z in nil.basis):
            problems.append("nilpotent basis element is not nilpotent")
        if problems:
            res.passed = False
            res.witnesses.append({"flag": _flag_doc(F), "problems": problems})
    res.summary = {"flags": len(flags)}
    return res


def predicted_orbit(F: GeneralizedFlag, A: Ambient, u) -> Subspace:
    """Case-table value for the orbit of u under the stabilizer of a maximal flag F.

    F' is predicted when F' is dense in F'', and for sl also when F has a
    single pair (only possible for maximal flags when dim V = 1).  F'' otherwise.
    """
    p = locate(F, u)
    if closure(p.pred, A.form) == p.succ:
        return p.pred
    if A.classical_kind == "sl" and len(F.pairs) == 1:
        return p.pred
    return p.succ


def check_orbit_table(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    res = LevelResult(n, True)
    checked = 0
    for F in flags:
        b = stabilizer(F, A)
        for u in F.support.basis:
            checked += 1
            if orbit(b, u) != predicted_orbit(F, A, u):
                res.passed = False
                res.witnesses.append({"flag": _flag_doc(F), "u": [str(c) for c in u]})
    res.summary = {"flags": len(flags), "vectors": checked}
    return res


def iso_completion(F: GeneralizedFlag, P: Pairing) -> GeneralizedFlag:
    """Maximal flag M_1 ⊂ ... ⊂ M_k ⊂ M_k^perp ⊂ ... ⊂ M_1^perp ⊂ V for an isotropic flag."""
    members = list(F.members[1:])
    members += [perp(M, P) for M in reversed(F.members[:-1])]
    uniq = []
    for M in members:
        if not uniq or uniq[-1] != M:
            uniq.append(M)
    return GeneralizedFlag.from_members(uniq, F.ambient_dim)


def check_iso_part(sc: Scenario, n: int) -> LevelResult:
    A, flags = _level_setup(sc, n)
    res = LevelResult(n, True)
    for F in flags:
        full = iso_completion(F, A.form)
        problems = []
        if iso_part(full, A.form) != F:
            problems.append("isotropic part of the completion is not the flag")
        if stabilizer(full, A).space != stabilizer(F, A).space:
            problems.append("stabilizers differ")
        if problems:
            res.passed = False
            res.witnesses.append({"flag": _flag_doc(F), "problems": problems})
    res.summary = {"flags": len(flags)}
    return res


def _label_unit(labels, i, j, c=1) -> tuple:
    pos = {l: k for k, l in enumerate(labels)}
    size = len(labels)
    return tuple(
        tuple(Fraction(c) if (r, s) == (pos[i], pos[j]) else Fraction(0) for s in range(size))
        for r in range(size)
    )


def _label_entries(M, labels) -> dict:
    """Nonzero entries of M keyed as 'i,j' by basis label."""
    return {
        f"{labels[r]},{labels[c]}": format_rational(x)
        for r, row in enumerate(M)
        for c, x in enumerate(row)
        if x
    }


def _madd(*mats) -> tuple:
    return tuple(tuple(sum(col, Fraction(0)) for col in zip(*rows)) for rows in zip(*mats))


def relative_normalizer_setup(sc: Scenario, n: int):
    """Window ambient sl at level n inside level n+2, extended by X_(n+2), and b_(n+2)."""
    big = n + 2
    labels = SIGNED.labels(big)
    P = standard_dual(len(labels), labels)
    window = make_ambient("sl", P, window=SIGNED.labels(n))
    A = extend_ambient(window, [sc.extra_at(big)])
    b = stabilizer(sc.flag_at(big), make_ambient("sl", P))
    return A, window, b


def check_normalizer_forces_a_zero(sc: Scenario, n: int) -> LevelResult:
    A, window, b = relative_normalizer_setup(sc, n)
    labels = SIGNED.labels(n + 2)
    X = sc.extra_at(n + 2)
    Z = _madd(_label_unit(labels, n + 1, n + 1), _label_unit(labels, n + 2, n + 2, -1))
    expected = _madd(_label_unit(labels, n + 1, -(n + 1), -1), _label_unit(labels, n + 2, -(n + 2)))
    res = LevelResult(n, True)
    problems = []
    if Z not in b:
        problems.append("Z is not in b")
    xz = bracket(X, Z)
    if xz != expected:
        problems.append("[X, Z] differs from -x_(n+1)⊗x*_-(n+1) + x_(n+2)⊗x*_-(n+2)")
    if any(any(c for r in bracket(Y, Z) for c in r) for Y in window.basis):
        problems.append("[Y, Z] is nonzero for some Y in the window")
    if xz in b:
        problems.append("[X, Z] lies in b, so a is not forced to 0")
    N = normalizer(b, A)
    inside = intersect(b.space, A.space)
    if N.space != inside:
        problems.append("normalizer differs from b ∩ window")
    if not N.space <= window.space:
        problems.append("normalizer has a nonzero X coefficient")
    b_small = stabilizer(sc.flag_at(n), make_ambient("sl", standard_dual(2 * n, SIGNED.labels(n))))
    if N.dim != b_small.dim:
        problems.append("normalizer dimension differs from the level-n Borel")
    if problems:
        res.passed = False
        res.witnesses.append(
            {"problems": problems, "Z": _label_entries(Z, labels), "X": _label_entries(X, labels)}
        )
    res.summary = {
        "ambient_dim": A.dim,
        "normalizer_dim": N.dim,
        "borel_dim": b_small.dim,
        "bracket_X_Z": _label_entries(xz, labels),
    }
    return res


def check_closure_is_full(sc: Scenario, n: int) -> LevelResult:
    d, P = sc.subspace, sc.pairing
    p, pc = perp_certified(d, P, n)
    c, cc = closure_certified(d, P, n)
    t = d.truncate(n)
    res = LevelResult(n, True)
    problems = []
    if not p.is_zero() or not pc.stable:
        problems.append("perp is not certified zero")
    if not c.is_full() or not cc.stable:
        problems.append("closure is not certified full")
    if t.is_full():
        problems.append("truncated span is already full")
    if problems:
        res.passed = False
        res.witnesses.append({"problems": problems})
    res.summary = {
        "span_dim": t.dim,
        "perp_dim": p.dim,
        "closure_dim": c.dim,
        "perp_certificate": pc.to_json(),
        "closure_certificate": cc.to_json(),
    }
    return res


def gap_pair_inserted(sc: Scenario) -> bool:
    """Whether fl_stable inserts a pair between the two families of the chain."""
    lower, upper = sc.chain[1], sc.chain[2]
    return any(p.pred == lower.top and p.succ == upper.bottom for p in sc.flag.inserted_pairs)


def check_fl_commutes(sc: Scenario, n: int) -> LevelResult:
    D = sc.flag
    a = D.truncate(n)
    b = fl_from_chain(truncate_chain(sc.chain, n), Subspace.full(a.ambient_dim))
    res = LevelResult(n, True)
    problems = []
    if a != b:
        problems.append("truncated descriptor flag differs from fl of the truncated chain")
    inserted = None
    if sc.expect_gap_pair is not None:
        inserted = gap_pair_inserted(sc)
        if inserted != sc.expect_gap_pair:
            problems.append("gap pair insertion differs from the expected outcome")
    if problems:
        res.passed = False
        res.witnesses.append({"problems": problems})
    res.summary = {"pairs": len(a.pairs)}
    if inserted is not None:
        res.summary["gap_pair_inserted"] = inserted
    return res


CHECKS: dict[str, Callable[[Scenario, int], LevelResult]] = {
    "stabilizer-is-borel": check_stabilizer_is_borel,
    "normalizer-forces-a-zero": check_normalizer_forces_a_zero,
    "twin-fiber": check_twin_fiber,
    "injectivity": check_injectivity,
    "figure1-decomposition": check_figure1,
    "orbit-table": check_orbit_table,
    "iso-part-stabilizer": check_iso_part,
    "closure-is-full": check_closure_is_full,
    "fl-commutes": check_fl_commutes,
}


@dataclass
class VerifyReport:
    scenario: str
    property: str
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "property": self.property,
            "pass": self.passed,
            "levels": [r.to_json() for r in self.results],
        }


def _run_one(args) -> LevelResult:
    name, prop, n = args
    return CHECKS[prop](builtin(name), n)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("FLAGSTAB_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise InputError("FLAGSTAB_THREADS must be an integer", field="FLAGSTAB_THREADS") from None
    return max(1, min(requested or limit, limit))


def verify_levels(scenario: Scenario | str, prop: str, levels: Sequence[int], workers: int = 1) -> VerifyReport:
    sc = builtin(scenario) if isinstance(scenario, str) else scenario
    if prop not in CHECKS:
        raise InputError(f"unregistered property {prop!r}; known: {', '.join(CHECKS)}", field="property")
    if prop not in sc.properties:
        raise InputError(f"property {prop!r} does not apply to scenario {sc.name}", field="property")
    levels = list(levels)
    if not levels or any(n < 1 for n in levels):
        raise InputError("levels must be positive integers", field="levels")
    jobs = [(sc.name, prop, n) for n in levels]
    if workers > 1 and len(jobs) > 1 and sc.name in _BUILTINS:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [CHECKS[prop](sc, n) for n in levels]
    return VerifyReport(sc.name, prop, results)


def parse_levels(text: str) -> list[int]:
    """'2..5' -> [2, 3, 4, 5]; '3' -> [3]."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise InputError(f"bad level range {text!r}; expected a..b", field="levels") from None
    if lo < 1 or hi < lo:
        raise InputError(f"bad level range {text!r}", field="levels")
    return list(range(lo, hi + 1))


__all__ = [
    "BUILTIN_NAMES",
    "CHECKS",
    "LevelResult",
    "Scenario",
    "VerifyReport",
    "builtin",
    "gap_pair_inserted",
    "iso_completion",
    "parse_levels",
    "predicted_orbit",
    "relative_normalizer_setup",
    "verify_levels",
    "worker_count",
]
