//! Tsetlin machine training and inference with two interchangeable
//! clause-evaluation backends.
//!
//! The direct backend evaluates every clause literal by literal. The
//! indexed backend keeps, per class and literal, the list of clauses that
//! include the literal, and scores an input by walking only the lists of
//! its false literals. Lists are maintained in constant time as automata
//! flip between include and exclude, so the index can be used during
//! training as well as inference.
//!
//! ```
//! use tsetlin_index::{Backend, Machine, TmConfig};
//!
//! let mut cfg = TmConfig::new(2, 10, 3);
//! cfg.seed = 7;
//! let mut tm = Machine::new(cfg, Backend::Indexed).unwrap();
//! for _ in 0..50 {
//!     tm.train_step(&[1, 0, 1], 1).unwrap();
//!     tm.train_step(&[0, 1, 1], 0).unwrap();
//! }
//! assert_eq!(tm.predict(&[1, 0, 1]).unwrap(), 1);
//! ```

pub mod automaton;
pub mod bank;
pub mod bench;
pub mod data;
mod error;
pub mod index;
pub mod machine;
pub mod persist;
pub mod verify;

pub use automaton::{ta_apply, Action, Signal, TaState, Transition};
pub use bank::{
    argmax, evaluate_clause, ClauseBank, Flip, FlipDirection, TaTeam, TmConfig, TrainParams,
};
pub use data::BoolDataset;
pub use error::{Error, Result};
pub use index::{
    estimate_memory, indexed_class_scores, indexed_predict, Entry, InclusionIndex, MemoryEstimate,
    Scorer, WorkCounters,
};
pub use machine::{Backend, Machine};
