//! Line-oriented machine description format.
//!
//! ```text
//! # comment
//! machine bb2
//! blank _
//! start A
//! halt H
//! alphabet _ 1        # optional; inferred from rules when absent
//! states A B H        # optional; inferred from rules when absent
//! A _ -> B 1 R
//! A 1 -> B 1 L
//! ```
//!
//! When `alphabet` or `states` is declared, every symbol or state used
//! elsewhere must appear in the declaration.

use std::collections::HashMap;

use thiserror::Error;

use super::{Action, MachineSpec, Move, StateId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: undeclared state or symbol `{name}`")]
    UndeclaredStateOrSymbol { line: usize, name: String },
    #[error("line {line}: duplicate rule for ({state}, {symbol})")]
    DuplicateRule {
        line: usize,
        state: String,
        symbol: char,
    },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("line {line}: rule keyed on halting state `{state}`")]
    RuleOnHaltingState { line: usize, state: String },
}

struct RawRule<'a> {
    line: usize,
    state: &'a str,
    read: char,
    next: &'a str,
    write: char,
    shift: Move,
}

#[derive(Default)]
struct Headers<'a> {
    name: Option<&'a str>,
    blank: Option<(usize, char)>,
    start: Option<(usize, &'a str)>,
    halt: Option<(usize, Vec<&'a str>)>,
    alphabet: Option<(usize, Vec<char>)>,
    states: Option<(usize, Vec<&'a str>)>,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        line,
        message: message.into(),
    }
}

fn symbol_token(line: usize, tok: &str) -> Result<char, ParseError> {
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if !c.is_whitespace() && !c.is_control() => Ok(c),
        _ => Err(syntax(
            line,
            format!("`{tok}` is not a single-character symbol"),
        )),
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(syntax(line, format!("repeated `{key}` header")));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_machine(text: &str) -> Result<MachineSpec, ParseError> {
    let mut headers = Headers::default();
    let mut raw = Vec::new();

    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some(&key) = toks.first() else { continue };
        let args = &toks[1..];
        match key {
            "machine" => match args {
                [name] => set_once(&mut headers.name, *name, line, key)?,
                _ => return Err(syntax(line, "expected `machine <name>`")),
            },
            "blank" => match args {
                [sym] => set_once(
                    &mut headers.blank,
                    (line, symbol_token(line, sym)?),
                    line,
                    key,
                )?,
                _ => return Err(syntax(line, "expected `blank <sym>`")),
            },
            "start" => match args {
                [state] => set_once(&mut headers.start, (line, *state), line, key)?,
                _ => return Err(syntax(line, "expected `start <state>`")),
            },
            "halt" => {
                if args.is_empty() {
                    return Err(syntax(line, "expected `halt <state> [<state>...]`"));
                }
                set_once(&mut headers.halt, (line, args.to_vec()), line, key)?;
            }
            "alphabet" => {
                let syms = args
                    .iter()
                    .map(|t| symbol_token(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                set_once(&mut headers.alphabet, (line, syms), line, key)?;
            }
            "states" => set_once(&mut headers.states, (line, args.to_vec()), line, key)?,
            _ => raw.push(parse_rule(line, &toks)?),
        }
    }

    let (blank_line, blank) = headers.blank.ok_or(ParseError::MissingHeader("blank"))?;
    let (start_line, start) = headers.start.ok_or(ParseError::MissingHeader("start"))?;
    let (halt_line, halt) = headers.halt.ok_or(ParseError::MissingHeader("halt"))?;

    if blank != '_' {
        let mentions_underscore = raw.iter().any(|r| r.read == '_' || r.write == '_')
            || headers
                .alphabet
                .as_ref()
                .is_some_and(|(_, a)| a.contains(&'_'));
        if mentions_underscore {
            return Err(syntax(blank_line, "`_` is reserved for the blank symbol"));
        }
    }

    // Alphabet: declared order, or blank first then order of appearance.
    let mut symbols = Interner::new(headers.alphabet.is_some());
    match &headers.alphabet {
        Some((_, declared)) => {
            for &c in declared {
                symbols.declare(c);
            }
            symbols.require(blank_line, blank)?;
        }
        None => symbols.declare(blank),
    }

    let mut states = Interner::new(headers.states.is_some());
    match &headers.states {
        Some((_, declared)) => {
            for &s in declared {
                states.declare(s);
            }
            states.require(start_line, start)?;
        }
        None => states.declare(start),
    }
    for &h in &halt {
        states.require(halt_line, h)?;
    }
    for r in &raw {
        states.require(r.line, r.state)?;
        symbols.require(r.line, r.read)?;
        states.require(r.line, r.next)?;
        symbols.require(r.line, r.write)?;
    }

    let n_states = states.items.len();
    let n_symbols = symbols.items.len();
    let mut halting = vec![false; n_states];
    for &h in &halt {
        halting[states.ids[h] as usize] = true;
    }

    let mut rules = vec![None; n_states * n_symbols];
    for r in &raw {
        let q = states.ids[r.state];
        if halting[q as usize] {
            return Err(ParseError::RuleOnHaltingState {
                line: r.line,
                state: r.state.to_string(),
            });
        }
        let slot = q as usize * n_symbols + symbols.ids[&r.read] as usize;
        if rules[slot].is_some() {
            return Err(ParseError::DuplicateRule {
                line: r.line,
                state: r.state.to_string(),
                symbol: r.read,
            });
        }
        rules[slot] = Some(Action {
            next: StateId(states.ids[r.next]),
            write: Symbol(symbols.ids[&r.write]),
            shift: r.shift,
        });
    }

    Ok(MachineSpec {
        name: headers.name.unwrap_or("unnamed").to_string(),
        blank: Symbol(symbols.ids[&blank]),
        start: StateId(states.ids[start]),
        halting,
        rules,
        state_ids: states
            .ids
            .iter()
            .map(|(k, &v)| (k.to_string(), StateId(v)))
            .collect(),
        symbol_ids: symbols.ids.iter().map(|(&k, &v)| (k, Symbol(v))).collect(),
        states: states.items.iter().map(|s| s.to_string()).collect(),
        symbols: symbols.items,
    })
}

fn parse_rule<'a>(line: usize, toks: &[&'a str]) -> Result<RawRule<'a>, ParseError> {
    let [state, read, arrow, next, write, shift] = toks else {
        return Err(syntax(
            line,
            "expected `<state> <sym> -> <state> <sym> <L|R|S>`",
        ));
    };
    if *arrow != "->" {
        return Err(syntax(line, format!("expected `->`, found `{arrow}`")));
    }
    let shift = match *shift {
        "L" => Move::Left,
        "R" => Move::Right,
        "S" => Move::Stay,
        other => return Err(syntax(line, format!("unknown move `{other}`"))),
    };
    Ok(RawRule {
        line,
        state,
        read: symbol_token(line, read)?,
        next,
        write: symbol_token(line, write)?,
        shift,
    })
}

/// Assigns dense ids in first-seen order. A closed interner rejects
/// anything not declared up front.
struct Interner<K> {
    closed: bool,
    items: Vec<K>,
    ids: HashMap<K, u32>,
}

impl<K: Copy + Eq + std::hash::Hash + ToString> Interner<K> {
    fn new(closed: bool) -> Self {
        Interner {
            closed,
            items: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn declare(&mut self, k: K) {
        if !self.ids.contains_key(&k) {
            self.ids.insert(k, self.items.len() as u32);
            self.items.push(k);
        }
    }

    fn require(&mut self, line: usize, k: K) -> Result<(), ParseError> {
        if self.ids.contains_key(&k) {
            Ok(())
        } else if self.closed {
            Err(ParseError::UndeclaredStateOrSymbol {
                line,
                name: k.to_string(),
            })
        } else {
            self.declare(k);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "machine m\nblank _\nstart A\nhalt H\n";

    fn parse(body: &str) -> Result<MachineSpec, ParseError> {
        parse_machine(&format!("{HEAD}{body}"))
    }

    #[test]
    fn one_rule() {
        let m = parse("A _ -> H 1 R\n").unwrap();
        assert_eq!(m.rule_count(), 1);
        assert_eq!(m.name(), "m");
        assert_eq!(m.state_count(), 2);
        assert_eq!(m.alphabet_len(), 2);
        assert_eq!(m.blank(), Symbol(0));
    }

    #[test]
    fn duplicate_rule() {
        assert_eq!(
            parse("A _ -> H 1 R\nA _ -> H 0 L\n").unwrap_err(),
            ParseError::DuplicateRule {
                line: 6,
                state: "A".into(),
                symbol: '_'
            }
        );
    }

    #[test]
    fn missing_headers() {
        let text = "machine m\nblank _\nhalt H\nA _ -> H 1 R\n";
        assert_eq!(parse_machine(text), Err(ParseError::MissingHeader("start")));
        let text = "start A\nhalt H\nA _ -> H 1 R\n";
        assert_eq!(parse_machine(text), Err(ParseError::MissingHeader("blank")));
        let text = "blank _\nstart A\nA _ -> H 1 R\n";
        assert_eq!(parse_machine(text), Err(ParseError::MissingHeader("halt")));
    }

    #[test]
    fn rule_on_halting_state() {
        assert!(matches!(
            parse("A _ -> H 1 R\nH 1 -> A 1 R\n"),
            Err(ParseError::RuleOnHaltingState { line: 6, .. })
        ));
    }

    #[test]
    fn undeclared_with_closed_alphabet() {
        assert!(matches!(
            parse("alphabet _ 1\nA _ -> H x R\n"),
            Err(ParseError::UndeclaredStateOrSymbol { line: 6, ref name }) if name == "x"
        ));
        assert!(matches!(
            parse("states A H\nA _ -> B 1 R\n"),
            Err(ParseError::UndeclaredStateOrSymbol { ref name, .. }) if name == "B"
        ));
        assert!(matches!(
            parse_machine("blank _\nstart A\nhalt H\nstates A\n"),
            Err(ParseError::UndeclaredStateOrSymbol { line: 3, .. })
        ));
    }

    #[test]
    fn declared_alphabet_keeps_unused_symbols() {
        let m = parse("alphabet _ 0 1 x\nA _ -> H 1 R\n").unwrap();
        assert_eq!(m.alphabet_len(), 4);
        assert_eq!(m.symbol_id('x'), Some(Symbol(3)));
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "A _ => H 1 R\n",
            "A _ -> H 1 X\n",
            "A __ -> H 1 R\n",
            "A _ -> H 1\n",
            "start B\n",
            "blank\n",
        ] {
            assert!(
                matches!(parse(bad), Err(ParseError::SyntaxError { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let m = parse_machine(
            "# header\n\nmachine c # trailing\nblank _\nstart A\nhalt H\n  A _ -> H 1 S # rule\n",
        )
        .unwrap();
        assert_eq!(m.rule_count(), 1);
        assert_eq!(m.name(), "c");
    }

    #[test]
    fn underscore_reserved_for_blank() {
        let text = "blank 0\nstart A\nhalt H\nA _ -> H 1 R\n";
        assert!(matches!(
            parse_machine(text),
            Err(ParseError::SyntaxError { line: 1, .. })
        ));
        let text = "blank 0\nstart A\nhalt H\nA 0 -> H 1 R\n";
        assert_eq!(parse_machine(text).unwrap().blank(), Symbol(0));
    }

    #[test]
    fn multiple_halting_states() {
        let m = parse_machine("blank _\nstart S\nhalt Y N\nS _ -> Y _ S\nS 1 -> N 1 S\n").unwrap();
        assert_eq!(m.halting_states().count(), 2);
    }
}
