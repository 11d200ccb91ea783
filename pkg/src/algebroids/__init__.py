"""Exact verification of first-order bidifferential bracket structures on
free modules over polynomial rings: quasi-derivation slots, anchors,
skew-symmetry, the Jacobi identity, and the induced classification."""

from .poly import (
    Derivation,
    Poly,
    Rational,
    ShapeError,
    der_apply,
    der_commutator,
    monomials_upto,
    poly_derivative,
)
from .parsing import ParseError, parse_poly
from .operators import (
    FirstOrderOperator,
    NotQuasiDerivation,
    OperatorQDVerdict,
    OperatorWitness,
    SecondOrderCommutator,
    Section,
    is_quasi_derivation,
    leibniz_qder_check,
    module_action,
    op_apply,
    op_commutator,
    operator_witness_defect,
    universal_anchor,
)
from .brackets import (
    AnchorData,
    BidiffBracket,
    ClassificationReport,
    QDCheckResult,
    SlotProbe,
    ad_operator,
    anchor_homomorphism_check,
    anchors_tensorial,
    bracket_eval,
    classify,
    eq3_identity_check,
    jacobiator,
    jacobiator_is_zero,
    left_anchor,
    left_qd_check,
    loday_anchor_sign_check,
    pointwise_skew_at,
    rank1_from_vector_field,
    right_anchor,
    right_qd_check,
    skew_check,
    slot_probe_defect,
    tangent_algebroid,
)
from .multivec import (
    Multivector,
    hamiltonian_anchor,
    interior_df,
    jacobi_bracket,
    jacobi_pair_check,
    poisson_skew_identity_check,
    recovered_jacobi_pair,
    sn_bracket,
    wedge,
)
from .documents import (
    DocumentError,
    ReportDocument,
    StructureDocument,
    canonical_document_text,
    load_document,
    run_classify,
)

__all__ = [
    "AnchorData",
    "BidiffBracket",
    "ClassificationReport",
    "Derivation",
    "DocumentError",
    "FirstOrderOperator",
    "Multivector",
    "NotQuasiDerivation",
    "OperatorQDVerdict",
    "OperatorWitness",
    "ParseError",
    "Poly",
    "QDCheckResult",
    "Rational",
    "ReportDocument",
    "SecondOrderCommutator",
    "Section",
    "ShapeError",
    "SlotProbe",
    "StructureDocument",
    "ad_operator",
    "anchor_homomorphism_check",
    "anchors_tensorial",
    "bracket_eval",
    "canonical_document_text",
    "classify",
    "der_apply",
    "der_commutator",
    "eq3_identity_check",
    "hamiltonian_anchor",
    "interior_df",
    "is_quasi_derivation",
    "jacobi_bracket",
    "jacobi_pair_check",
    "jacobiator",
    "jacobiator_is_zero",
    "left_anchor",
    "left_qd_check",
    "leibniz_qder_check",
    "load_document",
    "loday_anchor_sign_check",
    "module_action",
    "monomials_upto",
    "op_apply",
    "op_commutator",
    "operator_witness_defect",
    "parse_poly",
    "poisson_skew_identity_check",
    "poly_derivative",
    "pointwise_skew_at",
    "rank1_from_vector_field",
    "recovered_jacobi_pair",
    "right_anchor",
    "right_qd_check",
    "run_classify",
    "skew_check",
    "slot_probe_defect",
    "sn_bracket",
    "tangent_algebroid",
    "universal_anchor",
    "wedge",
]
