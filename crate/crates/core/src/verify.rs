//! Executable checks that the history-backed kernel reproduces the machine.
//!
//! * [`check_coherence`] runs the kernel and the direct-tape oracle in
//!   lockstep and compares every configuration.
//! * [`check_consistency`] probes the history store at `(position, time)`
//!   pairs and compares each answer with the oracle's tape at that time.
//!
//! Both accept a fault to inject so that corruption of the store can be
//! shown to surface.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::direct::{DirectMachine, Tape};
use crate::kernel::KernelState;
use crate::machine::{MachineSpec, Symbol};
use crate::sim::{SimError, Step, Substrate, TraceRecord};

/// Oracle tape snapshots are kept every this many steps.
const CHECKPOINT_INTERVAL: u64 = 64;

/// Below this many visited cells, consistency probing is exhaustive.
pub const EXHAUSTIVE_CELL_LIMIT: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Kernel,
    Oracle,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Kernel => "kernel",
            Side::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{side}: {source}")]
pub struct VerifyError {
    pub side: Side,
    #[source]
    pub source: SimError,
}

impl VerifyError {
    fn kernel(source: impl Into<SimError>) -> Self {
        VerifyError {
            side: Side::Kernel,
            source: source.into(),
        }
    }

    fn oracle(source: SimError) -> Self {
        VerifyError {
            side: Side::Oracle,
            source,
        }
    }

    pub fn is_integrity_violation(&self) -> bool {
        self.side == Side::Kernel && self.source.is_integrity_violation()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub max_steps: u64,
    /// Sampled probes after each step.
    pub probes: usize,
    pub seed: u64,
    /// Corrupt the history entry with this insertion index as soon as it
    /// exists.
    pub fault: Option<usize>,
    pub exhaustive_limit: usize,
}

impl VerifyOptions {
    pub fn new(max_steps: u64) -> Self {
        VerifyOptions {
            max_steps,
            probes: 64,
            seed: 0,
            fault: None,
            exhaustive_limit: EXHAUSTIVE_CELL_LIMIT,
        }
    }

    pub fn probes(mut self, probes: usize) -> Self {
        self.probes = probes;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn fault(mut self, entry: usize) -> Self {
        self.fault = Some(entry);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub step: u64,
    pub kernel: TraceRecord,
    pub oracle: TraceRecord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceReport {
    pub machine: String,
    pub input: String,
    pub steps_checked: u64,
    pub first_divergence: Option<Divergence>,
    pub step_limit_reached: bool,
}

impl CoherenceReport {
    pub fn passed(&self) -> bool {
        self.first_divergence.is_none()
    }

    pub fn line(&self, spec: &MachineSpec) -> String {
        let detail = match &self.first_divergence {
            None => format!(
                "coherence steps_checked={}{}",
                self.steps_checked,
                if self.step_limit_reached {
                    " step_limit"
                } else {
                    ""
                }
            ),
            Some(d) => format!(
                "coherence diverged at step {}: kernel=[{}] oracle=[{}]",
                d.step,
                d.kernel.format(spec).replace('\t', " "),
                d.oracle.format(spec).replace('\t', " ")
            ),
        };
        report_line(self.passed(), &self.machine, &self.input, &detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub position: i64,
    pub time: u64,
    pub history: Symbol,
    pub oracle: Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    Sampled,
    /// Sampled during the run, then every visited cell at every time.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub machine: String,
    pub input: String,
    pub cells_checked: u64,
    pub mismatches: Vec<Mismatch>,
    pub mode: ProbeMode,
    pub steps: u64,
    pub visited_cells: usize,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn line(&self) -> String {
        let mode = match self.mode {
            ProbeMode::Sampled => "sampled",
            ProbeMode::Exhaustive => "exhaustive",
        };
        let mut detail = format!(
            "consistency cells_checked={} mode={mode} mismatches={}",
            self.cells_checked,
            self.mismatches.len()
        );
        if let Some(m) = self.mismatches.first() {
            detail.push_str(&format!(
                " first=(p={}, t={}, history={}, oracle={})",
                m.position, m.time, m.history.0, m.oracle.0
            ));
        }
        report_line(self.passed(), &self.machine, &self.input, &detail)
    }
}

/// `PASS|FAIL<TAB>machine<TAB>input<TAB>detail`.
pub fn report_line(passed: bool, machine: &str, input: &str, detail: &str) -> String {
    format!(
        "{}\t{machine}\t{input}\t{detail}",
        if passed { "PASS" } else { "FAIL" }
    )
}

fn inject(kernel: &mut KernelState, fault: &mut Option<usize>) {
    if let Some(index) = *fault {
        if index < kernel.history().len() {
            kernel
                .history_mut()
                .corrupt_entry(index)
                .expect("index checked against store length");
            *fault = None;
        }
    }
}

pub fn check_coherence(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
) -> Result<CoherenceReport, VerifyError> {
    check_coherence_with(spec, input, &VerifyOptions::new(max_steps))
}

/// Lockstep comparison of kernel and oracle configurations.
pub fn check_coherence_with(
    spec: &MachineSpec,
    input: &[Symbol],
    opts: &VerifyOptions,
) -> Result<CoherenceReport, VerifyError> {
    let mut kernel = KernelState::init(spec, input).map_err(VerifyError::kernel)?;
    let mut oracle = DirectMachine::new(spec, input).map_err(VerifyError::oracle)?;
    let mut fault = opts.fault;
    inject(&mut kernel, &mut fault);

    let mut report = CoherenceReport {
        machine: spec.name().to_string(),
        input: spec.render(input),
        steps_checked: 0,
        first_divergence: None,
        step_limit_reached: false,
    };
    loop {
        let k = TraceRecord::new(spec, kernel.config());
        let o = TraceRecord::new(spec, oracle.config());
        report.steps_checked += 1;
        if k != o {
            report.first_divergence = Some(Divergence {
                step: o.config.step,
                kernel: k,
                oracle: o,
            });
            break;
        }
        if k.halted {
            break;
        }
        if k.config.step >= opts.max_steps {
            report.step_limit_reached = true;
            break;
        }
        kernel.step(spec).map_err(VerifyError::kernel)?;
        oracle.step(spec).map_err(VerifyError::oracle)?;
        inject(&mut kernel, &mut fault);
    }
    Ok(report)
}

/// The oracle tape at any past time, from periodic snapshots plus the
/// sequence of writes. `writes[i]` is the write made by the transition into
/// step `i + 1`.
struct OracleTimeline {
    checkpoints: Vec<Tape>,
    writes: Vec<(i64, Symbol)>,
}

impl OracleTimeline {
    fn new(initial: &Tape) -> Self {
        OracleTimeline {
            checkpoints: vec![initial.clone()],
            writes: Vec::new(),
        }
    }

    fn record(&mut self, wrote: (i64, Symbol), tape_now: &Tape) {
        self.writes.push(wrote);
        if (self.writes.len() as u64).is_multiple_of(CHECKPOINT_INTERVAL) {
            self.checkpoints.push(tape_now.clone());
        }
    }

    fn symbol_at(&self, position: i64, time: u64) -> Symbol {
        let cp = time / CHECKPOINT_INTERVAL;
        let mut sym = self.checkpoints[cp as usize].get(position);
        for &(p, s) in &self.writes[(cp * CHECKPOINT_INTERVAL) as usize..time as usize] {
            if p == position {
                sym = s;
            }
        }
        sym
    }
}

/// Visited cells in first-visit order.
#[derive(Default)]
struct Visited {
    order: Vec<i64>,
    seen: HashSet<i64>,
    lo: i64,
    hi: i64,
}

impl Visited {
    fn add(&mut self, p: i64) {
        if self.seen.insert(p) {
            if self.order.is_empty() {
                (self.lo, self.hi) = (p, p);
            }
            self.lo = self.lo.min(p);
            self.hi = self.hi.max(p);
            self.order.push(p);
        }
    }
}

pub fn check_consistency(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
    probes: usize,
) -> Result<ConsistencyReport, VerifyError> {
    check_consistency_with(spec, input, &VerifyOptions::new(max_steps).probes(probes))
}

/// Probe the kernel's history against the oracle tape. After each step `t`,
/// `opts.probes` random `(position, time <= t)` pairs are checked; roughly
/// one in sixteen targets a cell the oracle never visited. If the run
/// visited fewer than `opts.exhaustive_limit` cells, every visited cell (and
/// one neighbour on each side) is then checked at every time.
pub fn check_consistency_with(
    spec: &MachineSpec,
    input: &[Symbol],
    opts: &VerifyOptions,
) -> Result<ConsistencyReport, VerifyError> {
    let mut kernel = KernelState::init(spec, input).map_err(VerifyError::kernel)?;
    let mut oracle = DirectMachine::new(spec, input).map_err(VerifyError::oracle)?;
    let mut fault = opts.fault;
    inject(&mut kernel, &mut fault);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut timeline = OracleTimeline::new(oracle.tape());
    let mut visited = Visited::default();
    for p in 0..input.len() as i64 {
        visited.add(p);
    }
    visited.add(0);

    let mut report = ConsistencyReport {
        machine: spec.name().to_string(),
        input: spec.render(input),
        cells_checked: 0,
        mismatches: Vec::new(),
        mode: ProbeMode::Sampled,
        steps: 0,
        visited_cells: 0,
    };
    let check = |report: &mut ConsistencyReport,
                 kernel: &KernelState,
                 position: i64,
                 time: u64,
                 expected: Symbol|
     -> Result<(), VerifyError> {
        let got = kernel
            .history()
            .read_latest(position, time)
            .map_err(VerifyError::kernel)?;
        report.cells_checked += 1;
        if got != expected {
            report.mismatches.push(Mismatch {
                position,
                time,
                history: got,
                oracle: expected,
            });
        }
        Ok(())
    };

    loop {
        let t = oracle.config().step;
        for j in 0..opts.probes {
            let time = rng.random_range(0..=t);
            let position = if j % 16 == 15 {
                if rng.random_bool(0.5) {
                    visited.lo - rng.random_range(1..=4)
                } else {
                    visited.hi + rng.random_range(1..=4)
                }
            } else {
                visited.order[rng.random_range(0..visited.order.len())]
            };
            check(
                &mut report,
                &kernel,
                position,
                time,
                timeline.symbol_at(position, time),
            )?;
        }

        if spec.is_halting(oracle.config().state) || t >= opts.max_steps {
            break;
        }
        let k = kernel.step(spec).map_err(VerifyError::kernel)?;
        let o = oracle.transition(spec).map_err(VerifyError::oracle)?;
        inject(&mut kernel, &mut fault);
        match (k, o.step) {
            (Step::Advanced(_), Step::Advanced(c)) => {
                let wrote = o.wrote.expect("advancing step writes");
                timeline.record(wrote, oracle.tape());
                visited.add(wrote.0);
                visited.add(c.head);
            }
            _ => break,
        }
    }
    report.steps = oracle.config().step;
    report.visited_cells = visited.order.len();

    if visited.order.len() < opts.exhaustive_limit {
        report.mode = ProbeMode::Exhaustive;
        let mut cells = visited.order.clone();
        cells.extend([visited.lo - 1, visited.hi + 1]);
        let mut tape = timeline.checkpoints[0].clone();
        for time in 0..=report.steps {
            if time > 0 {
                let (p, s) = timeline.writes[time as usize - 1];
                tape.set(p, s);
            }
            for &p in &cells {
                check(&mut report, &kernel, p, time, tape.get(p))?;
            }
        }
    }
    Ok(report)
}

/// History entries that a later kernel read will select, for a run of
/// `spec` on `input`: corrupting any of them must surface.
///
/// Derived from the oracle alone. Seeded cell `i` is entry `i`; the write
/// made by the transition into step `s` is entry `|input| + s - 1`. The read
/// made by the transition into step `s + 1` selects the latest entry at the
/// new head position, which predates that transition unless the head stayed.
pub fn head_path_entries(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
) -> Result<Vec<usize>, VerifyError> {
    let mut oracle = DirectMachine::new(spec, input).map_err(VerifyError::oracle)?;
    let mut latest: std::collections::HashMap<i64, usize> =
        (0..input.len()).map(|i| (i as i64, i)).collect();
    let mut sites = Vec::new();
    let mut seen = HashSet::new();
    while oracle.config().step < max_steps {
        let before = oracle.config();
        let o = oracle.transition(spec).map_err(VerifyError::oracle)?;
        let Step::Advanced(after) = o.step else { break };
        if after.head != before.head {
            if let Some(&index) = latest.get(&after.head) {
                if seen.insert(index) {
                    sites.push(index);
                }
            }
        }
        let (p, _) = o.wrote.expect("advancing step writes");
        latest.insert(p, input.len() + after.step as usize - 1);
    }
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn input(m: &MachineSpec, s: &str) -> Vec<Symbol> {
        m.encode_input(s).unwrap()
    }

    #[test]
    fn halter_coherence_checks_two_records() {
        let m = corpus::load("halter").unwrap();
        let r = check_coherence(&m, &[], 10).unwrap();
        assert!(r.passed());
        assert_eq!(r.steps_checked, 2);
        assert!(!r.step_limit_reached);
        assert_eq!(r.line(&m), "PASS\thalter\t\tcoherence steps_checked=2");
    }

    #[test]
    fn non_halting_machine_stops_at_limit() {
        let m = corpus::load("revisit").unwrap();
        let r = check_coherence(&m, &[], 100).unwrap();
        assert!(r.passed() && r.step_limit_reached);
        assert_eq!(r.steps_checked, 101);
    }

    #[test]
    fn successor_consistency_passes() {
        let m = corpus::load("successor").unwrap();
        let r = check_consistency(&m, &input(&m, "1011"), 1000, 8).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
        assert_eq!(r.mode, ProbeMode::Exhaustive);
        assert!(r.line().starts_with("PASS\tsuccessor\t1011\tconsistency"));
    }

    #[test]
    fn never_visited_probe_counts_as_blank_agreement() {
        let m = corpus::load("halter").unwrap();
        let r =
            check_consistency_with(&m, &[], &VerifyOptions::new(10).probes(16).seed(3)).unwrap();
        // visited {0, 1}; exhaustive pass adds -1 and 2 over t in 0..=1.
        assert!(r.passed());
        assert_eq!(r.cells_checked, 16 * 2 + 4 * 2);
    }

    #[test]
    fn sampled_mode_when_limit_is_small() {
        let m = corpus::load("bb3").unwrap();
        let mut opts = VerifyOptions::new(100);
        opts.exhaustive_limit = 2;
        let r = check_consistency_with(&m, &[], &opts).unwrap();
        assert_eq!(r.mode, ProbeMode::Sampled);
        assert!(r.passed());
        assert_eq!(r.cells_checked, 64 * (r.steps + 1));
    }

    #[test]
    fn consistency_is_deterministic_per_seed() {
        let m = corpus::load("palindrome").unwrap();
        let i = input(&m, "0110");
        let opts = VerifyOptions::new(1000).seed(42);
        assert_eq!(
            check_consistency_with(&m, &i, &opts).unwrap(),
            check_consistency_with(&m, &i, &opts).unwrap()
        );
    }

    #[test]
    fn timeline_matches_replayed_direct_runs() {
        let m = corpus::load("bb3").unwrap();
        let mut oracle = DirectMachine::new(&m, &[]).unwrap();
        let mut timeline = OracleTimeline::new(oracle.tape());
        let mut snapshots = vec![oracle.tape().clone()];
        while let Step::Advanced(_) = oracle
            .transition(&m)
            .map(|s| {
                if let Some(w) = s.wrote {
                    timeline.record(w, oracle.tape());
                }
                s.step
            })
            .unwrap()
        {
            snapshots.push(oracle.tape().clone());
        }
        for (t, tape) in snapshots.iter().enumerate() {
            for p in -5..5 {
                assert_eq!(timeline.symbol_at(p, t as u64), tape.get(p));
            }
        }
    }

    #[test]
    fn fault_on_head_path_surfaces() {
        let m = corpus::load("bb3").unwrap();
        let sites = head_path_entries(&m, &[], 100).unwrap();
        assert!(!sites.is_empty());
        for &entry in &sites {
            let opts = VerifyOptions::new(100).fault(entry);
            let surfaced = match check_coherence_with(&m, &[], &opts) {
                Ok(r) => !r.passed(),
                Err(e) => e.is_integrity_violation(),
            };
            assert!(surfaced, "entry {entry}");
        }
    }

    #[test]
    fn fault_detected_by_exhaustive_consistency() {
        let m = corpus::load("successor").unwrap();
        let i = input(&m, "0110");
        let total = check_coherence(&m, &i, 100).unwrap().steps_checked as usize - 1 + i.len();
        for entry in 0..total {
            let err =
                check_consistency_with(&m, &i, &VerifyOptions::new(100).probes(0).fault(entry))
                    .unwrap_err();
            assert!(err.is_integrity_violation(), "entry {entry}");
        }
    }
}
