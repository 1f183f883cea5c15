//! Verification-condition assembly and lowering to CNF / SMT-LIB2.

pub mod bitblast;
pub mod formula;
pub mod bits;
pub mod smtlib;
pub mod term;

pub use bitblast::{BitBlaster, Blasted, VarBits};
pub use formula::{bitblast as blast_formula, encode_lazy, encode_lazy_events, encode_schedule, encode_uw, BlastedFormula, Formula, ObligationRef};
pub use term::{Sort, Term, TermCtx, TermId, Val, VarId};
