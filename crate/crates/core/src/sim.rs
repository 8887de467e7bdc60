//! Configurations, traces and the run loop shared by both substrates.

use std::fmt::Write as _;

use thiserror::Error;

use crate::history::HistoryError;
use crate::machine::{MachineSpec, StateId, Symbol, UnknownSymbol};

/// Instantaneous description `(state, head, symbol under head, step)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub head: i64,
    pub under_head: Symbol,
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceRecord {
    pub config: Configuration,
    pub halted: bool,
}

impl TraceRecord {
    pub fn new(spec: &MachineSpec, config: Configuration) -> Self {
        TraceRecord {
            config,
            halted: spec.is_halting(config.state),
        }
    }

    /// `t<TAB>state<TAB>head<TAB>symbol<TAB>halted(0|1)`, no newline.
    pub fn format(&self, spec: &MachineSpec) -> String {
        let c = &self.config;
        format!(
            "{}\t{}\t{}\t{}\t{}",
            c.step,
            spec.state_name(c.state),
            c.head,
            spec.symbol_char(c.under_head),
            u8::from(self.halted)
        )
    }
}

/// Render a whole trace, one newline-terminated line per record.
pub fn format_trace(spec: &MachineSpec, trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(trace.len() * 16);
    for r in trace {
        out.push_str(&r.format(spec));
        out.push('\n');
    }
    out
}

/// `tape<TAB>lo<TAB>hi<TAB><symbols>` for the inclusive range `lo..=hi`.
pub fn format_tape_line(spec: &MachineSpec, lo: i64, cells: &[Symbol]) -> String {
    let mut out = String::new();
    let hi = lo + cells.len() as i64 - 1;
    write!(out, "tape\t{lo}\t{hi}\t{}", spec.render(cells)).unwrap();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("undefined transition at step {} (state {:?}, symbol {:?})", .0.step, .0.state, .0.under_head)]
    UndefinedTransition(Configuration),
    #[error("step limit exceeded after {} records", .0.len())]
    StepLimitExceeded(Vec<TraceRecord>),
    #[error(transparent)]
    UnknownSymbol(#[from] UnknownSymbol),
    #[error(transparent)]
    History(#[from] HistoryError),
}

impl SimError {
    pub fn is_integrity_violation(&self) -> bool {
        matches!(
            self,
            SimError::History(HistoryError::IntegrityViolation { .. })
        )
    }
}

/// Outcome of asking a substrate to advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Advanced(Configuration),
    /// The current state is halting; carries the final configuration.
    Halted(Configuration),
}

/// Anything that executes a machine one transition at a time.
pub trait Substrate {
    fn config(&self) -> Configuration;
    fn step(&mut self, spec: &MachineSpec) -> Result<Step, SimError>;
}

/// Drive `machine` from its current configuration, recording every
/// configuration including the first. Stops at a halting state, an undefined
/// transition, or after `max_steps` transitions.
pub fn run_substrate<S: Substrate>(
    spec: &MachineSpec,
    machine: &mut S,
    max_steps: u64,
) -> Result<Vec<TraceRecord>, SimError> {
    let first = TraceRecord::new(spec, machine.config());
    let mut trace = vec![first];
    if first.halted {
        return Ok(trace);
    }
    for _ in 0..max_steps {
        match machine.step(spec)? {
            Step::Advanced(c) => {
                let rec = TraceRecord::new(spec, c);
                trace.push(rec);
                if rec.halted {
                    return Ok(trace);
                }
            }
            Step::Halted(_) => return Ok(trace),
        }
    }
    Err(SimError::StepLimitExceeded(trace))
}
