//! Relation sets, their residual reports, the norm bound and faithfulness evidence.

mod faithfulness;
mod report;
mod sets;

pub use faithfulness::{
    format_t_word, norm_domination_sample, psi_collapse_check, psi_collapse_check_seeded,
    sample_words, SlotLetter, TensorWord, DOMINATION_TOL, PSI_PRODUCT_TOL, PSI_TOL,
};
pub use report::{format_float, Check, Summary, VerificationReport};
pub use sets::{
    norm_bound_check, pi_residuals, pi_residuals_with_tol, qccr_residuals, tccr_residuals,
    tccr_residuals_with_tol, Relation, RelationKind, RelationSet, Term, WordEvaluator, MODEL_TOL,
    SVD_TOL,
};
