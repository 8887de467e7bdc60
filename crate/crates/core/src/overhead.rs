//! Instrumented kernel runs measuring the cost of history-based simulation.
//!
//! The primary metric is the number of timestamp comparisons each history
//! read performs, sampled at power-of-two steps. Space is accounted per
//! history entry against the bit widths of the step counter and head
//! position. Wall time is recorded only on request.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::history::{ceil_log2, HistoryEntry, ENTRY_OVERHEAD_BITS};
use crate::kernel::KernelState;
use crate::machine::{MachineSpec, Symbol};
use crate::sim::{SimError, Step, TraceRecord};

pub const CSV_HEADER: &str = "t,comparisons,entries,step_bits,position_bits,wall_time_ns";

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadSample {
    pub t: u64,
    /// Comparisons made by the read in the transition into step `t`.
    pub comparisons: u32,
    /// Writes recorded at the position that read queried.
    pub writes_at_position: usize,
    /// Mean comparisons per read over the steps since the previous sample.
    pub window_mean_comparisons: f64,
    pub entries: u64,
    /// `ceil(log2(t + 1))`.
    pub step_bits: u32,
    /// `ceil(log2(max |p| + 2))` over every position touched so far.
    pub position_bits: u32,
    pub wall_time_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Halted,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct OverheadReport {
    pub machine: String,
    pub samples: Vec<OverheadSample>,
    pub trace: Vec<TraceRecord>,
    pub stop: StopReason,
    pub symbol_bits: u32,
    pub reads: u64,
    pub max_comparisons: u32,
    /// Reads whose comparison count exceeded `ceil(log2 k) + 1`.
    pub bound_violations: u64,
    /// Largest storable size of any entry, in bits.
    pub max_entry_bits: u32,
    /// Entries whose storable size exceeded the space bound at the time
    /// they were written.
    pub space_violations: u64,
}

impl OverheadReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t, s.comparisons, s.entries, s.step_bits, s.position_bits, s.wall_time_ns
            )
            .unwrap();
        }
        out
    }

    pub fn sample_at(&self, t: u64) -> Option<&OverheadSample> {
        self.samples.iter().find(|s| s.t == t)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct InstrumentOptions {
    pub wall_time: bool,
}

/// Space bound for an entry written at step `t` when the largest position
/// magnitude seen so far is `max_abs_position`.
pub fn entry_bits_bound(symbol_bits: u32, t: u64, max_abs_position: u64) -> u32 {
    ENTRY_OVERHEAD_BITS + symbol_bits + ceil_log2(t + 1) + ceil_log2(max_abs_position + 2)
}

struct SpaceAudit {
    symbol_bits: u32,
    max_abs_position: u64,
    max_entry_bits: u32,
    violations: u64,
}

impl SpaceAudit {
    fn observe(&mut self, entry: &HistoryEntry, t: u64) {
        self.max_abs_position = self.max_abs_position.max(entry.position().unsigned_abs());
        let bits = entry.storable_bits(self.symbol_bits);
        self.max_entry_bits = self.max_entry_bits.max(bits);
        if bits > entry_bits_bound(self.symbol_bits, t, self.max_abs_position) {
            self.violations += 1;
        }
    }
}

/// Run the kernel with instrumentation. Reaching `max_steps` is a normal
/// outcome here, reported through [`OverheadReport::stop`].
pub fn run_instrumented(
    spec: &MachineSpec,
    input: &[Symbol],
    max_steps: u64,
    opts: InstrumentOptions,
) -> Result<OverheadReport, SimError> {
    let started = Instant::now();
    let mut kernel = KernelState::init(spec, input)?;
    let symbol_bits = spec.symbol_bits();
    let mut space = SpaceAudit {
        symbol_bits,
        max_abs_position: 0,
        max_entry_bits: 0,
        violations: 0,
    };
    for e in kernel.history().entries() {
        space.observe(e, 0);
    }

    let mut report = OverheadReport {
        machine: spec.name().to_string(),
        samples: Vec::new(),
        trace: vec![TraceRecord::new(spec, kernel.config())],
        stop: StopReason::StepLimit,
        symbol_bits,
        reads: 0,
        max_comparisons: 0,
        bound_violations: 0,
        max_entry_bits: space.max_entry_bits,
        space_violations: 0,
    };
    let mut next_sample = 1u64;
    let (mut window_sum, mut window_reads) = (0u64, 0u64);

    if report.trace[0].halted {
        report.stop = StopReason::Halted;
    }
    while report.stop != StopReason::Halted && kernel.config().step < max_steps {
        let (step, cost) = kernel.step_counted(spec)?;
        let Step::Advanced(config) = step else {
            report.stop = StopReason::Halted;
            break;
        };
        let t = config.step;
        let entry = kernel
            .history()
            .last_entry()
            .expect("step appended an entry");
        space.observe(entry, t);
        space.max_abs_position = space.max_abs_position.max(config.head.unsigned_abs());

        report.reads += 1;
        report.max_comparisons = report.max_comparisons.max(cost.comparisons);
        if !cost.within_bound() {
            report.bound_violations += 1;
        }
        window_sum += u64::from(cost.comparisons);
        window_reads += 1;

        if t == next_sample {
            report.samples.push(OverheadSample {
                t,
                comparisons: cost.comparisons,
                writes_at_position: cost.writes_at_position,
                window_mean_comparisons: window_sum as f64 / window_reads as f64,
                entries: kernel.history().len() as u64,
                step_bits: ceil_log2(t + 1),
                position_bits: ceil_log2(space.max_abs_position + 2),
                wall_time_ns: if opts.wall_time {
                    started.elapsed().as_nanos() as u64
                } else {
                    0
                },
            });
            next_sample *= 2;
            (window_sum, window_reads) = (0, 0);
        }

        let rec = TraceRecord::new(spec, config);
        report.trace.push(rec);
        if rec.halted {
            report.stop = StopReason::Halted;
        }
    }
    report.max_entry_bits = space.max_entry_bits;
    report.space_violations = space.violations;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub min_samples: usize,
    pub min_octaves: f64,
    /// Largest slope against `t` still considered sub-linear.
    pub max_linear_slope: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            min_samples: 16,
            min_octaves: 3.0,
            max_linear_slope: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("insufficient samples: {samples} samples spanning {octaves:.2} octaves")]
pub struct InsufficientSamples {
    pub samples: usize,
    pub octaves: f64,
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    LineFit {
        slope,
        intercept,
        rss,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVerdict {
    /// Fit against `log2(t)`.
    pub log_fit: LineFit,
    /// Fit against `t`.
    pub linear_fit: LineFit,
    pub logarithmic_consistent: bool,
}

impl ScalingVerdict {
    pub fn summary(&self) -> String {
        format!(
            "verdict\t{}\tlog_slope={:.6}\tlog_rss={:.6}\tlinear_slope={:.9}\tlinear_rss={:.6}",
            if self.logarithmic_consistent {
                "logarithmic-consistent"
            } else {
                "not-logarithmic"
            },
            self.log_fit.slope,
            self.log_fit.rss,
            self.linear_fit.slope,
            self.linear_fit.rss
        )
    }
}

/// Fit `(t, y)` points against `log2 t` and against `t`.
pub fn fit_series(
    points: &[(u64, f64)],
    cfg: &FitConfig,
) -> Result<ScalingVerdict, InsufficientSamples> {
    let points: Vec<_> = points.iter().filter(|(t, _)| *t >= 1).collect();
    let octaves = match (
        points.iter().map(|p| p.0).min(),
        points.iter().map(|p| p.0).max(),
    ) {
        (Some(lo), Some(hi)) => (hi as f64 / lo as f64).log2(),
        _ => 0.0,
    };
    if points.len() < cfg.min_samples || octaves < cfg.min_octaves {
        return Err(InsufficientSamples {
            samples: points.len(),
            octaves,
        });
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let log_x: Vec<f64> = points.iter().map(|p| (p.0 as f64).log2()).collect();
    let lin_x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let log_fit = least_squares(&log_x, &ys);
    let linear_fit = least_squares(&lin_x, &ys);
    Ok(ScalingVerdict {
        logarithmic_consistent: log_fit.rss < linear_fit.rss
            && linear_fit.slope < cfg.max_linear_slope,
        log_fit,
        linear_fit,
    })
}

/// Fit the per-sample comparison counts of `report`.
pub fn fit_scaling(
    report: &OverheadReport,
    cfg: &FitConfig,
) -> Result<ScalingVerdict, InsufficientSamples> {
    let points: Vec<(u64, f64)> = report
        .samples
        .iter()
        .map(|s| (s.t, f64::from(s.comparisons)))
        .collect();
    fit_series(&points, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::kernel::run_kernel;

    fn powers(n: u32) -> impl Iterator<Item = u64> {
        (0..n).map(|i| 1u64 << i)
    }

    #[test]
    fn log_series_is_logarithmic() {
        let pts: Vec<_> = powers(20).map(|t| (t, ceil_log2(t) as f64)).collect();
        let v = fit_series(&pts, &FitConfig::default()).unwrap();
        assert!(v.logarithmic_consistent, "{v:?}");
        assert!((v.log_fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_series_is_not() {
        let pts: Vec<_> = powers(20).map(|t| (t, t as f64)).collect();
        let v = fit_series(&pts, &FitConfig::default()).unwrap();
        assert!(!v.logarithmic_consistent, "{v:?}");
        assert!((v.linear_fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        let pts: Vec<_> = powers(4).map(|t| (t, 1.0)).collect();
        assert!(fit_series(&pts, &FitConfig::default()).is_err());
        // enough points, too narrow a range
        let pts: Vec<_> = (100..120).map(|t| (t, 1.0)).collect();
        let err = fit_series(&pts, &FitConfig::default()).unwrap_err();
        assert_eq!(err.samples, 20);
        assert!(err.octaves < 1.0);
    }

    #[test]
    fn instrumentation_does_not_perturb_trace() {
        for name in ["bb3", "palindrome", "utm"] {
            let e = corpus::entry(name).unwrap();
            let m = corpus::load(name).unwrap();
            let input = m.encode_input(e.inputs[e.inputs.len() - 1]).unwrap();
            let r = run_instrumented(&m, &input, 100_000, InstrumentOptions::default()).unwrap();
            assert_eq!(r.stop, StopReason::Halted);
            assert_eq!(r.trace, run_kernel(&m, &input, 100_000).unwrap());
        }
    }

    #[test]
    fn entries_track_steps() {
        let m = corpus::load("revisit").unwrap();
        let input = m.encode_input("1").unwrap();
        let r = run_instrumented(&m, &input, 5000, InstrumentOptions::default()).unwrap();
        assert_eq!(r.stop, StopReason::StepLimit);
        assert_eq!(r.trace.len(), 5001);
        let ts: Vec<u64> = r.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts, powers(13).collect::<Vec<_>>());
        for s in &r.samples {
            assert_eq!(s.entries, 1 + s.t);
            assert_eq!(s.wall_time_ns, 0);
        }
        assert!(r
            .samples
            .windows(2)
            .all(|w| w[0].step_bits <= w[1].step_bits));
        assert_eq!(r.bound_violations, 0);
        assert_eq!(r.space_violations, 0);
    }

    #[test]
    fn csv_layout() {
        let m = corpus::load("revisit").unwrap();
        let r = run_instrumented(&m, &[], 4, InstrumentOptions::default()).unwrap();
        assert_eq!(
            r.to_csv(),
            "t,comparisons,entries,step_bits,position_bits,wall_time_ns\n\
             1,0,1,1,2,0\n\
             2,1,2,2,2,0\n\
             4,1,4,3,2,0\n"
        );
    }

    #[test]
    fn entry_bound_examples() {
        assert_eq!(entry_bits_bound(1, 0, 0), ENTRY_OVERHEAD_BITS + 1 + 1);
        assert_eq!(entry_bits_bound(2, 7, 6), ENTRY_OVERHEAD_BITS + 2 + 3 + 3);
    }
}
