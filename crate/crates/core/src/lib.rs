//! Turing machine simulation in which the tape exists only as a history of
//! timestamped writes.
//!
//! The [`kernel`] runs a machine keeping nothing but the current
//! [`Configuration`] and a [`HistoryStore`]; every symbol it needs is
//! recovered by asking the history for the latest write at or before the
//! current step. The [`direct`] simulator keeps an ordinary tape and serves
//! as the oracle the kernel is checked against in [`verify`].

pub mod corpus;
pub mod direct;
pub mod history;
pub mod kernel;
pub mod machine;
pub mod overhead;
pub mod sim;
pub mod threshold;
pub mod verify;

pub use direct::{run_direct, DirectMachine, Tape};
pub use history::{HistoryEntry, HistoryError, HistoryStore, ReadCost};
pub use kernel::{run_kernel, KernelState};
pub use machine::{
    parse_machine, Action, MachineSpec, Move, ParseError, StateId, Symbol, Transition,
};
pub use overhead::{fit_scaling, run_instrumented, OverheadReport, ScalingVerdict};
pub use sim::{Configuration, SimError, Step, Substrate, TraceRecord};
pub use verify::{check_coherence, check_consistency, CoherenceReport, ConsistencyReport};
