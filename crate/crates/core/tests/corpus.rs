use histm_core::corpus::{self, utm, CORPUS, UTM_BB2_INPUT};
use histm_core::sim::format_trace;
use histm_core::verify::{self, ProbeMode, VerifyOptions};
use histm_core::{
    check_coherence, check_consistency, run_direct, run_kernel, DirectMachine, KernelState,
    SimError, Substrate,
};

const MAX_STEPS: u64 = 10_000;

#[test]
fn coherence_on_every_corpus_input() {
    for e in CORPUS {
        let m = corpus::load(e.name).unwrap();
        for input in e.inputs {
            let syms = m.encode_input(input).unwrap();
            let r = check_coherence(&m, &syms, MAX_STEPS).unwrap();
            assert!(r.passed(), "{}", r.line(&m));
            assert_eq!(r.step_limit_reached, !e.halts, "{}", r.line(&m));
        }
    }
}

#[test]
fn consistency_on_every_corpus_input() {
    for e in CORPUS {
        let m = corpus::load(e.name).unwrap();
        for input in e.inputs {
            let syms = m.encode_input(input).unwrap();
            let r = check_consistency(&m, &syms, MAX_STEPS, 64).unwrap();
            assert!(r.passed(), "{}", r.line());
            assert!(r.cells_checked >= 64 * r.steps.min(1), "{}", r.line());
            if r.visited_cells < verify::EXHAUSTIVE_CELL_LIMIT {
                assert_eq!(r.mode, ProbeMode::Exhaustive, "{}", r.line());
            }
        }
    }
}

#[test]
fn bb3_matches_golden_trace() {
    let m = corpus::load("bb3").unwrap();
    let golden = include_str!("golden/bb3.trace");
    assert_eq!(format_trace(&m, &run_kernel(&m, &[], 100).unwrap()), golden);
    assert_eq!(format_trace(&m, &run_direct(&m, &[], 100).unwrap()), golden);
}

#[test]
fn reconstructed_tape_equals_oracle_at_halt() {
    for e in CORPUS.iter().filter(|e| e.halts) {
        let m = corpus::load(e.name).unwrap();
        for input in e.inputs {
            let syms = m.encode_input(input).unwrap();
            let mut oracle = DirectMachine::new(&m, &syms).unwrap();
            let mut kernel = KernelState::init(&m, &syms).unwrap();
            histm_core::sim::run_substrate(&m, &mut oracle, MAX_STEPS).unwrap();
            histm_core::sim::run_substrate(&m, &mut kernel, MAX_STEPS).unwrap();
            let (lo, hi) = oracle.tape().span().unwrap_or((0, 0));
            let (lo, hi) = (lo - 2, hi + 2);
            let expect: Vec<_> = (lo..=hi).map(|p| oracle.tape().get(p)).collect();
            assert_eq!(
                kernel.reconstruct_tape(lo, hi).unwrap(),
                expect,
                "{} {input:?}",
                e.name
            );
            assert_eq!(kernel.config(), oracle.config());
        }
    }
}

#[test]
fn utm_simulates_bb2() {
    let bb2 = corpus::load("bb2").unwrap();
    let u = corpus::load("utm").unwrap();
    let direct = run_direct(&bb2, &[], 100).unwrap();
    assert_eq!(direct.len(), 7);

    let input = u.encode_input(UTM_BB2_INPUT).unwrap();
    let mut kernel = KernelState::init(&u, &input).unwrap();
    let trace = histm_core::sim::run_substrate(&u, &mut kernel, 100_000).unwrap();
    assert_eq!(u.state_name(trace.last().unwrap().config.state), "H");
    let (_, cells) = kernel.content(&u).unwrap();
    let decoded = utm::decode_output(&bb2, &u.render(&cells)).unwrap();
    assert_eq!(decoded, "1111");
}

/// Coherence at every step implies the history agrees with the oracle on
/// every head cell: the symbol recorded in each oracle configuration.
#[test]
fn coherent_runs_agree_on_head_cells() {
    for e in CORPUS {
        let m = corpus::load(e.name).unwrap();
        for input in e.inputs {
            let syms = m.encode_input(input).unwrap();
            let coherence = check_coherence(&m, &syms, MAX_STEPS).unwrap();
            assert!(coherence.passed());
            let oracle = match run_direct(&m, &syms, MAX_STEPS) {
                Ok(t) | Err(SimError::StepLimitExceeded(t)) => t,
                Err(other) => panic!("{other}"),
            };
            let mut kernel = KernelState::init(&m, &syms).unwrap();
            let _ = histm_core::sim::run_substrate(&m, &mut kernel, MAX_STEPS);
            for rec in &oracle {
                let c = rec.config;
                assert_eq!(
                    kernel.history().read_latest(c.head, c.step).unwrap(),
                    c.under_head,
                    "{} {input:?} at step {}",
                    e.name,
                    c.step
                );
            }
            assert!(check_consistency(&m, &syms, MAX_STEPS, 64)
                .unwrap()
                .passed());
        }
    }
}

#[test]
fn injected_faults_surface_in_both_checks() {
    let m = corpus::load("palindrome").unwrap();
    let syms = m.encode_input("0110").unwrap();
    let sites = verify::head_path_entries(&m, &syms, MAX_STEPS).unwrap();
    assert!(!sites.is_empty());
    for &site in &sites {
        let opts = VerifyOptions::new(MAX_STEPS).fault(site);
        let err = verify::check_coherence_with(&m, &syms, &opts).unwrap_err();
        assert!(err.is_integrity_violation(), "{err}");
        let err = verify::check_consistency_with(&m, &syms, &opts).unwrap_err();
        assert!(err.is_integrity_violation(), "{err}");
    }
}

#[test]
fn step_limit_keeps_partial_trace() {
    let m = corpus::load("revisit").unwrap();
    let mut k = KernelState::init(&m, &[]).unwrap();
    match histm_core::sim::run_substrate(&m, &mut k, 50) {
        Err(SimError::StepLimitExceeded(trace)) => {
            assert_eq!(trace.len(), 51);
            assert_eq!(trace.last().unwrap().config, k.config());
        }
        other => panic!("{other:?}"),
    }
}
