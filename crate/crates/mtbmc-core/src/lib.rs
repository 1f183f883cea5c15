//! Bounded model checking of multi-threaded MTC programs.
//!
//! The pipeline: MTC source is parsed and typechecked ([`frontend`]), turned
//! into per-thread control-flow graphs and unrolled ([`cfg`]), symbolically
//! executed at statement granularity over interleavings ([`symex`], with the
//! Pthread-style intrinsic models of [`pthreads`] and the interleaving
//! pruning of [`por`]), encoded into bit-vector verification conditions
//! ([`encoder`]), and decided by a CDCL SAT engine with assumption-based
//! unsat cores ([`solver`]). The three verification drivers live in
//! [`strategies`]; [`oracle`] holds the independent explicit-state
//! reference interpreter; [`benchgen`] produces the benchmark families.

pub mod benchgen;
pub mod cfg;
pub mod encoder;
pub mod frontend;
pub mod oracle;
pub mod por;
pub mod pthreads;
pub mod report;
pub mod solver;
pub mod strategies;
pub mod symex;
