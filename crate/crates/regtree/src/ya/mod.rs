//! Finite yield-algebra presentations: tables, branch semantics, deterministic
//! elements, and the extremal-context and `δ` constructions.

mod branch;
mod delta;
mod presentation;
mod rep;
pub mod shipped;

pub use branch::{
    eval_closed_composition, eval_lasso, eval_lasso_values, eval_word, expand, fold, letters_to_reps, presentation_accepts, universal_branch_check, BadBranch,
    BranchVerdict, YLabel,
};
pub use delta::{
    build_delta, check_delta, extremal_context, in_unary_context, match_unary, mutate_component, piece_context, u_system, unary_context, DeltaOutcome,
    Extremal, Piece,
};
pub use presentation::{validate_presentation, Letter, LetterDoc, LetterValue, Presentation, PresentationDoc};
pub use rep::{det_elements, rep_leq, RankedElementRep};
