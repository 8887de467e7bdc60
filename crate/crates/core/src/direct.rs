//! Array-backed reference simulator. This is the oracle the history-based
//! kernel is checked against, so it deliberately shares nothing with it
//! beyond the machine definition and the run loop.

use crate::machine::{MachineSpec, Symbol, Transition};
use crate::sim::{run_substrate, Configuration, SimError, Step, Substrate, TraceRecord};

/// A growable two-way tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tape {
    blank: Symbol,
    /// Position of `cells[0]`.
    lo: i64,
    cells: Vec<Symbol>,
}

impl Tape {
    pub fn new(blank: Symbol, input: &[Symbol]) -> Self {
        Tape {
            blank,
            lo: 0,
            cells: input.to_vec(),
        }
    }

    pub fn get(&self, position: i64) -> Symbol {
        let i = position - self.lo;
        if i < 0 {
            return self.blank;
        }
        self.cells.get(i as usize).copied().unwrap_or(self.blank)
    }

    pub fn set(&mut self, position: i64, symbol: Symbol) {
        if self.cells.is_empty() {
            self.lo = position;
        }
        if position < self.lo {
            let grow = (self.lo - position) as usize;
            self.cells
                .splice(0..0, std::iter::repeat_n(self.blank, grow));
            self.lo = position;
        }
        let i = (position - self.lo) as usize;
        if i >= self.cells.len() {
            self.cells.resize(i + 1, self.blank);
        }
        self.cells[i] = symbol;
    }

    /// Inclusive range of allocated cells, or `None` for a tape never touched.
    pub fn span(&self) -> Option<(i64, i64)> {
        (!self.cells.is_empty()).then(|| (self.lo, self.lo + self.cells.len() as i64 - 1))
    }

    /// Allocated cells starting at [`span`](Self::span)'s low end.
    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    /// Trimmed non-blank content and the position of its first cell.
    pub fn content(&self) -> (i64, &[Symbol]) {
        match self.cells.iter().position(|&s| s != self.blank) {
            None => (0, &[]),
            Some(first) => {
                let last = self.cells.iter().rposition(|&s| s != self.blank).unwrap();
                (self.lo + first as i64, &self.cells[first..=last])
            }
        }
    }
}

/// What one transition of the direct machine did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectStep {
    pub step: Step,
    /// Cell written during the transition, absent when halted.
    pub wrote: Option<(i64, Symbol)>,
}

#[derive(Debug, Clone)]
pub struct DirectMachine {
    tape: Tape,
    config: Configuration,
}

impl DirectMachine {
    pub fn new(spec: &MachineSpec, input: &[Symbol]) -> Result<Self, SimError> {
        if let Some(bad) = input.iter().find(|s| s.0 >= spec.alphabet_len()) {
            return Err(crate::history::HistoryError::UnknownSymbol(bad.0).into());
        }
        let tape = Tape::new(spec.blank(), input);
        let config = Configuration {
            state: spec.start(),
            head: 0,
            under_head: tape.get(0),
            step: 0,
        };
        Ok(DirectMachine { tape, config })
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn transition(&mut self, spec: &MachineSpec) -> Result<DirectStep, SimError> {
        let c = self.config;
        let symbol = self.tape.get(c.head);
        match spec.delta(c.state, symbol) {
            Transition::Halt => Ok(DirectStep {
                step: Step::Halted(c),
                wrote: None,
            }),
            Transition::Undefined => Err(SimError::UndefinedTransition(c)),
            Transition::Apply(action) => {
                self.tape.set(c.head, action.write);
                let head = c.head + action.shift.offset();
                self.config = Configuration {
                    state: action.next,
                    head,
                    under_head: self.tape.get(head),
                    step: c.step + 1,
                };
                Ok(DirectStep {
                    step: Step::Advanced(self.config),
                    wrote: Some((c.head, action.write)),
                })
            }
        }
    }
}

impl Substrate for DirectMachine {
    fn config(&self) -> Configuration {
        self.config
    }

    fn step(&mut self, spec: &MachineSpec) -> Result<Step, SimError> {
        self.transition(spec).map(|s| s.step)
    }
}

/// Run `spec` on a direct tape holding `input` at positions `0..n`.
pub fn run_direct(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
) -> Result<Vec<TraceRecord>, SimError> {
    let mut m = DirectMachine::new(spec, input)?;
    run_substrate(spec, &mut m, max_steps)
}
