//! A memoryless threshold unit, and what it becomes once paired with
//! stored state: a counter, and a sequencer that steps through a program.

use num_bigint::BigUint;
use thiserror::Error;

use crate::kernel::KernelState;
use crate::machine::{MachineSpec, Symbol};
use crate::sim::{SimError, Step, TraceRecord};

/// 1 iff `x > 0`. Pure: the output depends on `x` alone.
pub fn threshold_unit(x: i64) -> u8 {
    u8::from(x > 0)
}

/// Running total kept between uses of the threshold unit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counter {
    total: BigUint,
}

impl Counter {
    pub fn new() -> Self {
        Counter::default()
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// The unit supplies the increment signal; the stored total supplies
    /// everything else.
    pub fn increment(mut self) -> Self {
        self.total += threshold_unit(1);
        self
    }

    pub fn reset(self) -> Self {
        Counter::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("program exhausted after {len} actions")]
pub struct ProgramExhausted {
    pub len: usize,
}

/// Emits `program[counter]` on each tick, then increments the counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequencer<A> {
    counter: Counter,
    program: Vec<A>,
}

impl<A: Clone> Sequencer<A> {
    pub fn new(program: Vec<A>) -> Self {
        Sequencer {
            counter: Counter::new(),
            program,
        }
    }

    pub fn counter(&self) -> &Counter {
        &self.counter
    }

    pub fn tick(self) -> Result<(A, Self), ProgramExhausted> {
        let len = self.program.len();
        let cursor = usize::try_from(&self.counter.total)
            .ok()
            .filter(|&c| c < len)
            .ok_or(ProgramExhausted { len })?;
        let action = self.program[cursor].clone();
        Ok((
            action,
            Sequencer {
                counter: self.counter.increment(),
                program: self.program,
            },
        ))
    }
}

/// Actions a sequencer can issue to the history-backed kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelAction {
    Step,
}

/// Run `spec` on the kernel, one step per sequencer tick, for at most
/// `max_steps` ticks. Returns the trace and whether the machine halted.
pub fn run_sequenced(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: usize,
) -> Result<(Vec<TraceRecord>, bool), SimError> {
    let mut kernel = KernelState::init(spec, input)?;
    let mut trace = vec![TraceRecord::new(spec, kernel.config())];
    let mut seq = Sequencer::new(vec![KernelAction::Step; max_steps]);
    while !trace.last().unwrap().halted {
        let Ok((KernelAction::Step, next)) = seq.tick() else {
            return Ok((trace, false));
        };
        seq = next;
        match kernel.step_counted(spec)?.0 {
            Step::Advanced(c) => trace.push(TraceRecord::new(spec, c)),
            Step::Halted(_) => break,
        }
    }
    Ok((trace, true))
}
