from .behrend import behrend_class, behrend_classes, behrend_partition, shifted_partition
from .identities import (
    FAMILY_EXPRESSIONS,
    INF,
    SQUARE_FAMILIES,
    T_FAMILIES,
    WeightOutOfRange,
    IdentityInstance,
    MissingConstant,
    element_of,
    embedding_element,
    family_expression,
    pattern_to_triple,
    square_to_identity,
    subexpression_embedding,
    t_to_identity,
    triangle_to_distributivity,
    triangle_witness,
    triple_to_pattern,
    tripartite_to_graph,
    zero_triangle_to_constant_identity,
    zero_triangle_to_counting,
)
from .patterns import (
    PatternInstance,
    ap_to_hyperclique,
    apply_ruler_matrix,
    colorize_kap,
    fourap_to_foursum,
    fourap_to_square,
    fourap_to_T,
    foursum_points,
    foursum_witness_to_ap,
    hyperclique_witness_to_ap,
    iter_fourap_to_square,
    iter_fourap_to_T,
    iter_monochromatize_kap,
    iter_multi_to_mono_square,
    mono_to_multi_square_witness,
    mono_to_multi_witness,
    monochromatize_kap,
    multi_to_mono_square,
    ruler_base,
    ruler_image,
    ruler_preimage,
    ruler_set,
    square_witness_to_ap,
    squarefree_matrices,
    t_witness_to_ap,
)
