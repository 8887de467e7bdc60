//! Machine execution with no tape at all.
//!
//! The only state carried between steps is one [`Configuration`] and the
//! [`HistoryStore`] of past writes. Each step applies the transition
//! function to the maintained configuration, appends the write at timestamp
//! `t + 1`, moves the head and resolves the new symbol under it by asking the
//! history for the latest write at or before `t + 1`. The write happens
//! before the read, so a stationary head reads back what it just wrote.

use crate::history::{HistoryStore, ReadCost};
use crate::machine::{MachineSpec, Symbol, Transition};
use crate::sim::{run_substrate, Configuration, SimError, Step, Substrate, TraceRecord};

#[derive(Debug, Clone)]
pub struct KernelState {
    config: Configuration,
    history: HistoryStore,
}

impl KernelState {
    /// Seed the history with `input` at timestamp 0 and start at position 0.
    pub fn init(spec: &MachineSpec, input: &[Symbol]) -> Result<Self, SimError> {
        let mut history = HistoryStore::new(spec.blank(), spec.alphabet_len());
        history.seed_input(input, 0)?;
        let under_head = history.read_latest(0, 0)?;
        Ok(KernelState {
            config: Configuration {
                state: spec.start(),
                head: 0,
                under_head,
                step: 0,
            },
            history,
        })
    }

    pub fn config(&self) -> Configuration {
        self.config
    }

    pub fn history(&self) -> &HistoryStore {
        &self.history
    }

    /// Mutable access to the store, for fault injection.
    pub fn history_mut(&mut self) -> &mut HistoryStore {
        &mut self.history
    }

    /// One transition, also reporting the cost of the history read.
    pub fn step_counted(&mut self, spec: &MachineSpec) -> Result<(Step, ReadCost), SimError> {
        let Configuration {
            state,
            head,
            under_head,
            step,
        } = self.config;
        let action = match spec.delta(state, under_head) {
            Transition::Halt => return Ok((Step::Halted(self.config), ReadCost::default())),
            Transition::Undefined => return Err(SimError::UndefinedTransition(self.config)),
            Transition::Apply(action) => action,
        };
        let now = step + 1;
        self.history.append_write(head, action.write, now)?;
        let head = head + action.shift.offset();
        let (under_head, cost) = self.history.read_latest_counted(head, now)?;
        self.config = Configuration {
            state: action.next,
            head,
            under_head,
            step: now,
        };
        Ok((Step::Advanced(self.config), cost))
    }

    /// Symbols at positions `lo..=hi` as of the current step.
    pub fn reconstruct_tape(&self, lo: i64, hi: i64) -> Result<Vec<Symbol>, SimError> {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let t = self.config.step;
        (lo..=hi)
            .map(|p| self.history.read_latest(p, t).map_err(SimError::from))
            .collect()
    }

    /// Trimmed non-blank tape content and the position of its first cell.
    pub fn content(&self, spec: &MachineSpec) -> Result<(i64, Vec<Symbol>), SimError> {
        let Some((lo, hi)) = self.history.position_span() else {
            return Ok((0, Vec::new()));
        };
        let cells = self.reconstruct_tape(lo, hi)?;
        let Some(first) = cells.iter().position(|&s| s != spec.blank()) else {
            return Ok((0, Vec::new()));
        };
        let trimmed = spec.trim_blanks(&cells).to_vec();
        Ok((lo + first as i64, trimmed))
    }
}

impl Substrate for KernelState {
    fn config(&self) -> Configuration {
        self.config
    }

    fn step(&mut self, spec: &MachineSpec) -> Result<Step, SimError> {
        self.step_counted(spec).map(|(s, _)| s)
    }
}

/// Run `spec` on the history substrate.
pub fn run_kernel(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
) -> Result<Vec<TraceRecord>, SimError> {
    let mut k = KernelState::init(spec, input)?;
    run_substrate(spec, &mut k, max_steps)
}
