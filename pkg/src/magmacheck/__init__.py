"""Identity checking on finite structures given by Cayley tables."""

from .core import (
    DuplicateOperation,
    EntryOutOfRange,
    IndexOutOfRange,
    InvalidSize,
    MagmaError,
    ParseError,
    Structure,
    UnknownOperation,
    format_structure,
    load_structure,
    make_structure,
    make_zn,
    mutate_entry,
    parse_structure,
    save_structure,
)
from .expr import (
    ConstantTerm,
    Equation,
    Leaf,
    Node,
    Regime,
    classify_identity,
    classify_shape,
    is_similar,
    parse_expression,
    parse_identity,
)
from .verify import (
    FieldConfig,
    Verdict,
    brute_force_verify,
    count_distributive_triples,
    evaluate_weighted_sum,
    freivalds_distributivity,
    mm_fp,
    verify_identity,
)
from .algebra import abelian_basis, field_verify, light_associativity, ring_verify, rs_associativity_test

__version__ = "0.1.0"
