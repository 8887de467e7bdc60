use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use histm_core::overhead::{self, FitConfig, InstrumentOptions, StopReason};
use histm_core::sim::{format_tape_line, format_trace, run_substrate};
use histm_core::threshold::{threshold_unit, Counter, Sequencer};
use histm_core::verify::{self, report_line, VerifyOptions};
use histm_core::{parse_machine, DirectMachine, KernelState, MachineSpec, SimError, Symbol};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_STEP_LIMIT: u8 = 2;
const EXIT_INSUFFICIENT_SAMPLES: u8 = 3;

#[derive(Parser)]
#[command(
    name = "histm",
    version,
    about = "Run Turing machines on a history-only tape"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a machine and print its final configuration.
    Run(RunArgs),
    /// Check the kernel against the direct-tape oracle.
    Verify(VerifyArgs),
    /// Measure history-read overhead and fit its scaling.
    Bench(BenchArgs),
    /// Show a threshold unit counting and sequencing with stored state.
    DemoCounter(DemoArgs),
}

#[derive(Args)]
struct MachineArgs {
    /// Machine description file.
    #[arg(long)]
    machine: PathBuf,
    /// Initial tape contents, placed at positions 0..n.
    #[arg(long, default_value = "")]
    input: String,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Substrate {
    Direct,
    Kernel,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, value_enum, default_value = "kernel")]
    substrate: Substrate,
    /// Write the full trace here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Accepted for symmetry with `verify`; a plain run draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    machine: MachineArgs,
    /// Sampled history probes per step.
    #[arg(long, default_value_t = 64)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt the history entry with this insertion index.
    #[arg(long)]
    inject_fault: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    machine: MachineArgs,
    /// Write the per-sample CSV here.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Record wall time in the CSV (makes output nondeterministic).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 10)]
    increments: u64,
    /// Program for the sequencer, one action per character.
    #[arg(long, default_value = "abc")]
    program: String,
}

fn load(args: &MachineArgs) -> Result<(MachineSpec, Vec<Symbol>)> {
    let text = fs::read_to_string(&args.machine)
        .with_context(|| format!("cannot read {}", args.machine.display()))?;
    let spec = parse_machine(&text).with_context(|| format!("in {}", args.machine.display()))?;
    let input = spec.encode_input(&args.input)?;
    Ok((spec, input))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<u8> {
    let (spec, input) = load(&args.machine)?;
    let max = args.machine.max_steps;
    let (outcome, content) = match args.substrate {
        Substrate::Direct => {
            let mut m = DirectMachine::new(&spec, &input)?;
            let outcome = run_substrate(&spec, &mut m, max);
            let (lo, cells) = m.tape().content();
            (outcome, (lo, cells.to_vec()))
        }
        Substrate::Kernel => {
            let mut m = KernelState::init(&spec, &input)?;
            let outcome = run_substrate(&spec, &mut m, max);
            (outcome, m.content(&spec)?)
        }
    };
    let (trace, code) = match outcome {
        Ok(trace) => (trace, EXIT_OK),
        Err(SimError::StepLimitExceeded(trace)) => (trace, EXIT_STEP_LIMIT),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.trace_out {
        write_file(path, &format_trace(&spec, &trace))?;
    }
    let last = trace.last().expect("trace holds the initial configuration");
    println!("final\t{}", last.format(&spec));
    println!(
        "status\t{}",
        if code == EXIT_OK {
            "halted"
        } else {
            "step-limit"
        }
    );
    println!("{}", format_tape_line(&spec, content.0, &content.1));
    Ok(code)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let (spec, input) = load(&args.machine)?;
    let mut opts = VerifyOptions::new(args.machine.max_steps)
        .probes(args.probes)
        .seed(args.seed);
    opts.fault = args.inject_fault;

    let mut ok = true;
    let fail = |e: verify::VerifyError| {
        println!(
            "{}",
            report_line(false, spec.name(), &args.machine.input, &e.to_string())
        );
    };
    match verify::check_coherence_with(&spec, &input, &opts) {
        Ok(r) => {
            println!("{}", r.line(&spec));
            ok &= r.passed();
        }
        Err(e) => {
            fail(e);
            ok = false;
        }
    }
    match verify::check_consistency_with(&spec, &input, &opts) {
        Ok(r) => {
            println!("{}", r.line());
            ok &= r.passed();
        }
        Err(e) => {
            fail(e);
            ok = false;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let (spec, input) = load(&args.machine)?;
    let report = overhead::run_instrumented(
        &spec,
        &input,
        args.machine.max_steps,
        InstrumentOptions {
            wall_time: args.wall_time,
        },
    )?;
    if let Some(path) = &args.csv_out {
        write_file(path, &report.to_csv())?;
    }
    println!(
        "run\t{}\tsteps={}\tstop={}",
        report.machine,
        report.trace.len() - 1,
        match report.stop {
            StopReason::Halted => "halted",
            StopReason::StepLimit => "step-limit",
        }
    );
    println!(
        "reads\t{}\tmax_comparisons={}\tbound_violations={}",
        report.reads, report.max_comparisons, report.bound_violations
    );
    println!(
        "space\tmax_entry_bits={}\tspace_violations={}",
        report.max_entry_bits, report.space_violations
    );
    match overhead::fit_scaling(&report, &FitConfig::default()) {
        Ok(v) => {
            println!("{}", v.summary());
            Ok(if v.logarithmic_consistent {
                EXIT_OK
            } else {
                EXIT_ERROR
            })
        }
        Err(e) => {
            println!("verdict\tinsufficient-samples\t{e}");
            Ok(EXIT_INSUFFICIENT_SAMPLES)
        }
    }
}

fn cmd_demo_counter(args: DemoArgs) -> Result<u8> {
    println!("threshold\t5\t{}", threshold_unit(5));
    println!("threshold\t0\t{}", threshold_unit(0));
    println!("threshold\t-3\t{}", threshold_unit(-3));
    let mut counter = Counter::new();
    for _ in 0..args.increments {
        counter = counter.increment();
    }
    println!("counter\t{}\t{}", args.increments, counter.total());

    let mut seq = Sequencer::new(args.program.chars().collect());
    let mut emitted = String::new();
    loop {
        match seq.tick() {
            Ok((action, next)) => {
                emitted.push(action);
                seq = next;
            }
            Err(e) => {
                println!("sequencer\t{emitted}\t{e}");
                break;
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::DemoCounter(a) => cmd_demo_counter(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
