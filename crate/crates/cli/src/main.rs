mod commands;
mod report;
mod suites;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use intervals::constructed::{Mode, DEFAULT_BUDGET};
use intervals::order::ENUMERATION_CAP;

use commands::{CliError, CliResult, OrderChoice};
use report::RunReport;
use suites::{Caps, Inject, SUITES};

#[derive(Parser)]
#[command(
    name = "intervals",
    version,
    about = "Interval sizes of feasible orders on binary strings, checked against brute-force oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Include wall-clock time in the report (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Walk,
    Bruteforce,
    Block,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Walk => Mode::Walk,
            ModeArg::Bruteforce => Mode::Bruteforce,
            ModeArg::Block => Mode::Block,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Shortlex,
    Ift,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectArg {
    Reflexivity,
    Antisymmetry,
    Transitivity,
    Totality,
}

#[derive(Subcommand)]
enum Command {
    /// Interval size of a catalog construction at x, compared with the function it encodes.
    Interval {
        /// construction/id, e.g. fp/ones, fp-order/f=3, offset/f=1,p=2
        instance: String,
        /// Input word (empty for ε).
        #[arg(default_value = "")]
        x: String,
        #[arg(long, value_enum, default_value = "walk")]
        mode: ModeArg,
        /// Step limit for walks.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Longest word enumerated by brute force.
        #[arg(long, default_value_t = ENUMERATION_CAP)]
        cap_universe: usize,
    },
    /// Satisfying assignments of a monotone formula counted as an interval.
    Monsat {
        /// Formula such as "(x1|x2)".
        #[arg(required_unless_present = "file", conflicts_with = "file")]
        formula: Option<String>,
        /// Read the formula from a file.
        #[arg(long)]
        file: Option<String>,
        #[arg(long, value_enum, default_value = "walk")]
        mode: ModeArg,
    },
    /// Nontrivial divisors of m via the divisibility interval, the support order and trial division.
    Div { m: u64 },
    /// Walks the space-bounded machine order at x and compares with the predicted interval size.
    TmWalk {
        /// `toy` for the built-in ones-counter, or a machine spec file.
        machine: String,
        #[arg(default_value = "")]
        x: String,
        /// Step limit for the walk.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Accepting-path clusters of a machine and the detector machines built from it.
    Cluster {
        /// Catalog cluster machine (shortlex order) or construction/id (ift order).
        machine: String,
        #[arg(default_value = "")]
        x: String,
        #[arg(long, value_enum, default_value = "shortlex")]
        order: OrderArg,
    },
    /// Runs invariant suites; exits nonzero on any violation.
    Check {
        #[arg(default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(suite_names()))]
        suite: String,
        /// Longest input word.
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        /// Skip universes with more words than this.
        #[arg(long, default_value_t = 4096)]
        cap_universe: usize,
        /// Step limit for walks.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Divisor checks cover 1..=max-m.
        #[arg(long, default_value_t = 10_000)]
        max_m: u64,
        /// Extra random formulas with up to 12 variables.
        #[arg(long, default_value_t = 1000)]
        random_formulas: usize,
        /// Breaks one order on purpose to exercise the checker.
        #[arg(long, value_enum, hide = true)]
        inject: Option<InjectArg>,
    },
}

fn suite_names() -> Vec<&'static str> {
    std::iter::once("all")
        .chain(SUITES.iter().copied())
        .collect()
}

fn check(suite: &str, caps: Caps, inject: Option<Inject>) -> RunReport {
    let mut r = RunReport::new("check", suite);
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite]
    };
    for name in names {
        let out = suites::run(name, &caps, inject);
        r.value(
            name,
            format!("{} checks, {} skipped", out.checks, out.skipped),
        );
        r.check(name, out.failures.is_empty());
        for f in out.failures {
            r.note(format!("{name}: {f}"));
        }
    }
    r
}

fn run(cli: &Cli) -> CliResult<RunReport> {
    match &cli.command {
        Command::Interval {
            instance,
            x,
            mode,
            budget,
            cap_universe,
        } => commands::interval(instance, x, (*mode).into(), *budget, *cap_universe),
        Command::Monsat {
            formula,
            file,
            mode,
        } => {
            let text = match (formula, file) {
                (Some(f), _) => f.clone(),
                (None, Some(path)) => std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            commands::monsat(text.trim(), (*mode).into())
        }
        Command::Div { m } => commands::div(*m),
        Command::TmWalk { machine, x, budget } => commands::tm_walk(machine, x, *budget),
        Command::Cluster { machine, x, order } => {
            let order = match order {
                OrderArg::Shortlex => OrderChoice::Shortlex,
                OrderArg::Ift => OrderChoice::Ift,
            };
            commands::cluster(machine, x, order)
        }
        Command::Check {
            suite,
            max_len,
            cap_universe,
            budget,
            max_m,
            random_formulas,
            inject,
        } => {
            let caps = Caps {
                max_len: *max_len,
                cap_universe: *cap_universe,
                budget: *budget,
                max_m: *max_m,
                random_formulas: *random_formulas,
            };
            let inject = inject.map(|i| match i {
                InjectArg::Reflexivity => Inject::Reflexivity,
                InjectArg::Antisymmetry => Inject::Antisymmetry,
                InjectArg::Transitivity => Inject::Transitivity,
                InjectArg::Totality => Inject::Totality,
            });
            Ok(check(suite, caps, inject))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut report) => {
            if cli.timing {
                report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            match cli.report {
                ReportFormat::Text => print!("{}", report.to_text()),
                ReportFormat::Json => println!("{}", report.to_json()),
            }
            if report.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}
