//! Deterministic single-tape Turing machine definitions.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

mod parse;

pub use parse::{parse_machine, ParseError};

/// Index into a machine's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

/// Index into a machine's state set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Stay => 'S',
            Move::Right => 'R',
        }
    }
}

/// Right-hand side of a rule: next state, symbol to write, head move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub next: StateId,
    pub write: Symbol,
    pub shift: Move,
}

/// Result of consulting the transition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Apply(Action),
    Halt,
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("symbol {0:?} is not in the alphabet")]
pub struct UnknownSymbol(pub char);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    name: String,
    states: Vec<String>,
    symbols: Vec<char>,
    blank: Symbol,
    start: StateId,
    halting: Vec<bool>,
    /// Dense table indexed by `state * |alphabet| + symbol`.
    rules: Vec<Option<Action>>,
    state_ids: HashMap<String, StateId>,
    symbol_ids: HashMap<char, Symbol>,
}

impl MachineSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet_len(&self) -> u32 {
        self.symbols.len() as u32
    }

    /// Bits needed to index one symbol of the alphabet.
    pub fn symbol_bits(&self) -> u32 {
        crate::history::ceil_log2(self.symbols.len() as u64).max(1)
    }

    pub fn is_halting(&self, state: StateId) -> bool {
        self.halting[state.0 as usize]
    }

    pub fn halting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.halting
            .iter()
            .enumerate()
            .filter(|(_, &h)| h)
            .map(|(i, _)| StateId(i as u32))
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.states[state.0 as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_ids.get(name).copied()
    }

    pub fn symbol_char(&self, symbol: Symbol) -> char {
        self.symbols[symbol.0 as usize]
    }

    pub fn symbol_id(&self, c: char) -> Option<Symbol> {
        self.symbol_ids.get(&c).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Symbol, char)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, &c)| (Symbol(i as u32), c))
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().flatten().count()
    }

    pub fn rule(&self, state: StateId, symbol: Symbol) -> Option<Action> {
        self.rules[self.slot(state, symbol)]
    }

    fn slot(&self, state: StateId, symbol: Symbol) -> usize {
        state.0 as usize * self.symbols.len() + symbol.0 as usize
    }

    /// The transition function: halting states signal `Halt`, missing
    /// rules signal `Undefined`.
    pub fn delta(&self, state: StateId, symbol: Symbol) -> Transition {
        if self.is_halting(state) {
            return Transition::Halt;
        }
        match self.rule(state, symbol) {
            Some(action) => Transition::Apply(action),
            None => Transition::Undefined,
        }
    }

    /// Map an input string onto symbol ids.
    pub fn encode_input(&self, input: &str) -> Result<Vec<Symbol>, UnknownSymbol> {
        input
            .chars()
            .map(|c| self.symbol_id(c).ok_or(UnknownSymbol(c)))
            .collect()
    }

    pub fn render(&self, symbols: &[Symbol]) -> String {
        symbols.iter().map(|&s| self.symbol_char(s)).collect()
    }

    /// Trim blanks from both ends of a tape rendering.
    pub fn trim_blanks<'a>(&self, tape: &'a [Symbol]) -> &'a [Symbol] {
        let first = tape.iter().position(|&s| s != self.blank);
        match first {
            None => &[],
            Some(lo) => {
                let hi = tape.iter().rposition(|&s| s != self.blank).unwrap();
                &tape[lo..=hi]
            }
        }
    }
}

impl fmt::Display for MachineSpec {
    /// Writes the machine back out in the file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "machine {}", self.name)?;
        writeln!(f, "blank {}", self.symbol_char(self.blank))?;
        write!(f, "alphabet")?;
        for c in &self.symbols {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        write!(f, "states")?;
        for s in &self.states {
            write!(f, " {s}")?;
        }
        writeln!(f)?;
        writeln!(f, "start {}", self.state_name(self.start))?;
        write!(f, "halt")?;
        for s in self.halting_states() {
            write!(f, " {}", self.state_name(s))?;
        }
        writeln!(f)?;
        for (q, name) in self.states.iter().enumerate() {
            for (a, &c) in self.symbols.iter().enumerate() {
                if let Some(act) = self.rule(StateId(q as u32), Symbol(a as u32)) {
                    writeln!(
                        f,
                        "{name} {c} -> {} {} {}",
                        self.state_name(act.next),
                        self.symbol_char(act.write),
                        act.shift.letter()
                    )?;
                }
            }
        }
        Ok(())
    }
}
