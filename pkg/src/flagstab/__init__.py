"""Exact generalized-flag calculus for finite truncations of gl, sl, so and sp."""

__version__ = "0.1.0"

from .errors import FlagstabError, InputError, InvariantError, PreconditionError
from .exact_linalg import Subspace, intersect, kernel, rank, span, subspace_sum
from .pairing import (
    Pairing,
    classify,
    closure,
    explicit,
    is_closed,
    maximal_isotropic_extensions,
    perp,
    split_symmetric,
    split_symplectic,
    standard_dual,
)
from .flagkit import (
    Chain,
    FlagPair,
    GeneralizedFlag,
    fl_from_chain,
    flag_report,
    iso_part,
    is_borel_refinement,
    is_refinement,
    twin,
)
from .liealg import (
    Ambient,
    LieSubalgebra,
    LineSystem,
    derived_series,
    element_type,
    embed_tensor,
    extend_ambient,
    generated_subalgebra,
    is_maximal_solvable,
    is_solvable,
    line_system,
    make_ambient,
    nilpotent_subalgebra,
    normalizer,
    orbit,
    stabilizer,
    stable_maximal_chain,
    toral_subalgebra,
)
from .dsl import parse_index_set, parse_template
from .limits import (
    IndexDomain,
    IndexSet,
    PairingDescriptor,
    SeqSubspace,
    StableFamily,
    StableSubspace,
    closure_certified,
    fl_stable,
    perp_certified,
    truncate,
)
from .scenarios import builtin, verify_levels

__all__ = [
    "__version__",
    "Ambient",
    "Chain",
    "FlagPair",
    "FlagstabError",
    "GeneralizedFlag",
    "IndexDomain",
    "IndexSet",
    "InputError",
    "InvariantError",
    "LieSubalgebra",
    "LineSystem",
    "Pairing",
    "PairingDescriptor",
    "PreconditionError",
    "SeqSubspace",
    "StableFamily",
    "StableSubspace",
    "Subspace",
    "builtin",
    "classify",
    "closure",
    "closure_certified",
    "derived_series",
    "element_type",
    "embed_tensor",
    "explicit",
    "extend_ambient",
    "fl_from_chain",
    "fl_stable",
    "flag_report",
    "generated_subalgebra",
    "intersect",
    "is_borel_refinement",
    "is_closed",
    "is_maximal_solvable",
    "is_refinement",
    "is_solvable",
    "iso_part",
    "kernel",
    "line_system",
    "make_ambient",
    "maximal_isotropic_extensions",
    "nilpotent_subalgebra",
    "normalizer",
    "orbit",
    "parse_index_set",
    "parse_template",
    "perp",
    "perp_certified",
    "rank",
    "span",
    "split_symmetric",
    "split_symplectic",
    "stabilizer",
    "stable_maximal_chain",
    "standard_dual",
    "subspace_sum",
    "toral_subalgebra",
    "truncate",
    "twin",
    "verify_levels",
]
