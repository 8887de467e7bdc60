//! Machines shipped with the crate, with the inputs they are tested on.

use crate::machine::{parse_machine, MachineSpec, ParseError};

pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    /// Inputs exercised by the verification suites.
    pub inputs: &'static [&'static str],
    /// Whether every shipped input halts.
    pub halts: bool,
}

/// Encoded 2-state busy beaver with four cells of left padding.
pub const UTM_BB2_INPUT: &str = ":ir**il**;il*ir$0000a";

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "halter",
        source: include_str!("../corpus/halter.tm"),
        inputs: &[""],
        halts: true,
    },
    CorpusEntry {
        name: "successor",
        source: include_str!("../corpus/successor.tm"),
        inputs: &["", "0", "1", "011", "111", "1011", "100111", "0000"],
        halts: true,
    },
    CorpusEntry {
        name: "palindrome",
        source: include_str!("../corpus/palindrome.tm"),
        inputs: &["", "0", "1", "0110", "0100", "10101", "1101", "11011011"],
        halts: true,
    },
    CorpusEntry {
        name: "bb2",
        source: include_str!("../corpus/bb2.tm"),
        inputs: &[""],
        halts: true,
    },
    CorpusEntry {
        name: "bb3",
        source: include_str!("../corpus/bb3.tm"),
        inputs: &[""],
        halts: true,
    },
    CorpusEntry {
        name: "revisit",
        source: include_str!("../corpus/revisit.tm"),
        inputs: &["", "1"],
        halts: false,
    },
    CorpusEntry {
        name: "utm",
        source: include_str!("../corpus/utm.tm"),
        inputs: &[UTM_BB2_INPUT],
        halts: true,
    },
];

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

/// Parse a corpus machine by name. Panics on an unknown name.
pub fn load(name: &str) -> Result<MachineSpec, ParseError> {
    let e = entry(name).unwrap_or_else(|| panic!("no corpus machine `{name}`"));
    parse_machine(e.source)
}

/// Encoding of two-symbol programs for the `utm` corpus machine.
pub mod utm {
    use thiserror::Error;

    use crate::machine::{MachineSpec, Move, StateId, Symbol};

    #[derive(Debug, Clone, PartialEq, Eq, Error)]
    pub enum EncodeError {
        #[error("machine must have exactly two symbols, has {0}")]
        NotBinary(u32),
        #[error("state `{0}` has no rule for some symbol")]
        PartialState(String),
        #[error("stay moves are not supported")]
        StayMove,
        #[error("start state may not be halting")]
        HaltingStart,
    }

    /// Encode `program` and its input tape for the universal machine.
    ///
    /// The blank symbol becomes bit 0 and the other symbol bit 1. Non-halting
    /// states are numbered from 1 with the start state first; every halting
    /// state encodes as "no stars". The tape gets `pad` zero cells on the
    /// left so the simulated head can move left of its start.
    pub fn encode(
        program: &MachineSpec,
        input: &[Symbol],
        pad: usize,
    ) -> Result<String, EncodeError> {
        if program.alphabet_len() != 2 {
            return Err(EncodeError::NotBinary(program.alphabet_len()));
        }
        if program.is_halting(program.start()) {
            return Err(EncodeError::HaltingStart);
        }
        let blank = program.blank();
        let other = Symbol(1 - blank.0);
        let mut order = vec![program.start()];
        order.extend(
            (0..program.state_count() as u32)
                .map(StateId)
                .filter(|&q| q != program.start() && !program.is_halting(q)),
        );
        let number = |q: StateId| -> usize {
            if program.is_halting(q) {
                0
            } else {
                order.iter().position(|&x| x == q).unwrap() + 1
            }
        };

        let mut out = String::new();
        for (i, &q) in order.iter().enumerate() {
            out.push(if i == 0 { ':' } else { ';' });
            for read in [blank, other] {
                let act = program
                    .rule(q, read)
                    .ok_or_else(|| EncodeError::PartialState(program.state_name(q).into()))?;
                out.push(if act.write == blank { 'o' } else { 'i' });
                out.push(match act.shift {
                    Move::Left => 'l',
                    Move::Right => 'r',
                    Move::Stay => return Err(EncodeError::StayMove),
                });
                out.extend(std::iter::repeat_n('*', number(act.next)));
            }
        }
        out.push('$');
        out.extend(std::iter::repeat_n('0', pad));
        let bit = |s: Symbol, head: bool| match (s == blank, head) {
            (true, false) => '0',
            (false, false) => '1',
            (true, true) => 'a',
            (false, true) => 'b',
        };
        if input.is_empty() {
            out.push('a');
        }
        for (i, &s) in input.iter().enumerate() {
            out.push(bit(s, i == 0));
        }
        Ok(out)
    }

    /// Read the simulated tape back out of a universal-machine tape
    /// rendering, as a string over `program`'s alphabet with blanks trimmed.
    pub fn decode_output(program: &MachineSpec, utm_tape: &str) -> Option<String> {
        let cells = utm_tape.split_once('$')?.1;
        let blank = program.blank();
        let other = Symbol(1 - blank.0);
        let tape: Vec<Symbol> = cells
            .chars()
            .map(|c| match c {
                '1' | 'b' => other,
                _ => blank,
            })
            .collect();
        Some(program.render(program.trim_blanks(&tape)))
    }
}
