use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use courant_core::bcov::Denominator;
use courant_core::courant::TestConfig;
use courant_core::error::Error;
use courant_core::fixtures;
use courant_core::model::{self, Model};
use courant_core::par;
use courant_core::report::Report;
use courant_core::suite::{self, BcovParams};

#[derive(Parser)]
#[command(name = "courant", version, about = "Exact verification of Courant algebroids and their contact models")]
struct Cli {
    /// Report rendering.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for the checks (0 uses all cores).
    #[arg(long, env = "COURANT_JOBS", default_value_t = 0, global = true)]
    jobs: usize,
    /// Run every check on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Den {
    OnePlusNu,
    OneMinusNu,
}

#[derive(Args, Clone, Copy)]
struct Random {
    /// Seed of the random test sections.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Polynomial degree of the random test sections.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=6))]
    degree: u32,
    /// Number of random test sections.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    sections: u64,
}

impl Random {
    fn config(&self) -> TestConfig {
        TestConfig { random_sections: self.sections as usize, degree: self.degree, seed: self.seed }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Courant axioms on a model file.
    CheckCourant {
        model: String,
        #[command(flatten)]
        random: Random,
    },
    /// Roytenberg-Weinstein L-infinity checks on a model file.
    RwCheck {
        model: String,
        #[command(flatten)]
        random: Random,
    },
    /// Classical master equation of the contact model.
    Cme {
        model: String,
        /// Jet order.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=4))]
        order: u32,
    },
    /// Extension of scalars along the [lift] block of a model file.
    Extend {
        model: String,
        #[command(flatten)]
        random: Random,
    },
    /// Reduction along the [submodule] block, or of the Dolbeault model of C^dim without a model.
    Reduce {
        model: Option<String>,
        /// Degree cutoff of the coefficients.
        #[arg(long, alias = "order", default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=5))]
        cutoff: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=3))]
        dim: u64,
        #[command(flatten)]
        random: Random,
    },
    /// Flat Calabi-Yau reduction on C^dim.
    CyCheck {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=3))]
        dim: u64,
        #[arg(long, alias = "order", default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=4))]
        cutoff: u32,
        #[command(flatten)]
        random: Random,
    },
    /// Equivalence of the contact model on C^dim with BCOV theory.
    BcovEquiv {
        /// Odd complex dimension.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=7))]
        dim: u32,
        /// Order in nu.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=6))]
        order: u32,
        /// Cutoff recorded with the report.
        #[arg(long, default_value_t = 2)]
        cutoff: u32,
        /// Seeded rational evaluations (default 16 from dim 5 on).
        #[arg(long, value_parser = clap::value_parser!(u32).range(0..=256))]
        seeds: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expansion of the cubic term.
        #[arg(long, value_enum, default_value_t = Den::OnePlusNu)]
        denominator: Den,
    },
    /// Shipped example models.
    Examples {
        #[command(subcommand)]
        action: ExampleAction,
    },
}

#[derive(Subcommand)]
enum ExampleAction {
    /// Names, suites and expected outcomes.
    List,
    /// Runs the suites of one or all examples; exits 0 iff each outcome is the expected one.
    Run { name: Option<String> },
}

fn load(arg: &str) -> Result<Model, String> {
    let located = |e: Error| format!("{arg}: {e}");
    if Path::new(arg).is_file() {
        return model::load_model(Path::new(arg)).map_err(located);
    }
    match fixtures::get(arg) {
        Some(src) => model::parse_model(src).map_err(located),
        None => Err(format!("{arg}: no such model file or shipped example")),
    }
}

fn run_suite(name: &str, m: &Model, input: &str) -> Result<Report, Error> {
    let cfg = TestConfig::default();
    match name {
        "check-courant" => Ok(suite::check_courant(m, input, &cfg)),
        "rw-check" => suite::rw_check(m, input, &cfg),
        "cme" => suite::cme(m, input, 2),
        "extend" => suite::extend(m, input, &cfg),
        "reduce" => suite::reduce(m, input, 2, &cfg),
        other => Err(Error::Structural(format!("suite `{other}` needs no model file"))),
    }
}

fn emit(format: Format, reports: &[(Report, std::time::Duration)], many: bool) {
    match format {
        Format::Text => {
            for (r, t) in reports {
                print!("{}", r.to_text(Some(*t)));
            }
        }
        Format::Machine if many => {
            let rs: Vec<&Report> = reports.iter().map(|(r, _)| r).collect();
            println!("{}", serde_json::to_string_pretty(&rs).expect("reports serialize"));
        }
        Format::Machine => {
            for (r, _) in reports {
                print!("{}", r.to_machine());
            }
        }
    }
}

fn timed(f: impl FnOnce() -> Result<Report, Error>) -> Result<(Report, std::time::Duration), String> {
    let t = Instant::now();
    let r = f().map_err(|e| e.to_string())?;
    Ok((r, t.elapsed()))
}

fn execute(cli: &Cli) -> Result<ExitCode, String> {
    let single = |r: (Report, std::time::Duration)| {
        let pass = r.0.pass;
        emit(cli.format, &[r], false);
        if pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    };
    match &cli.command {
        Command::CheckCourant { model, random } => {
            let m = load(model)?;
            Ok(single(timed(|| Ok(suite::check_courant(&m, model, &random.config())))?))
        }
        Command::RwCheck { model, random } => {
            let m = load(model)?;
            Ok(single(timed(|| suite::rw_check(&m, model, &random.config()))?))
        }
        Command::Cme { model, order } => {
            let m = load(model)?;
            Ok(single(timed(|| suite::cme(&m, model, *order))?))
        }
        Command::Extend { model, random } => {
            let m = load(model)?;
            Ok(single(timed(|| suite::extend(&m, model, &random.config()))?))
        }
        Command::Reduce { model: Some(model), cutoff, random, .. } => {
            let m = load(model)?;
            Ok(single(timed(|| suite::reduce(&m, model, *cutoff, &random.config()))?))
        }
        Command::Reduce { model: None, cutoff, dim, random } => {
            Ok(single(timed(|| suite::reduce_dolbeault(*dim as usize, *cutoff, &random.config()))?))
        }
        Command::CyCheck { dim, cutoff, random } => {
            Ok(single(timed(|| suite::cy_check(*dim as usize, *cutoff, &random.config()))?))
        }
        Command::BcovEquiv { dim, order, cutoff, seeds, seed, denominator } => {
            let p = BcovParams {
                dim: *dim,
                order: *order,
                cutoff: *cutoff,
                seeds: *seeds,
                seed: *seed,
                denominator: match denominator {
                    Den::OnePlusNu => Denominator::OnePlusNu,
                    Den::OneMinusNu => Denominator::OneMinusNu,
                },
            };
            Ok(single(timed(|| suite::bcov_equiv(&p))?))
        }
        Command::Examples { action: ExampleAction::List } => {
            for (name, src) in fixtures::FIXTURES {
                let m = model::parse_model(src).map_err(|e| format!("{name}: {e}"))?;
                let expect = if m.expect_pass { "pass" } else { "fail" };
                println!("examples/{name}  [{}]  expect {expect}  {}", m.suites.join(", "), m.datum.name());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { action: ExampleAction::Run { name } } => {
            let chosen: Vec<(&str, &str)> = match name {
                Some(n) => {
                    let src = fixtures::get(n).ok_or_else(|| format!("{n}: no such shipped example"))?;
                    vec![(n.as_str(), src)]
                }
                None => fixtures::FIXTURES.to_vec(),
            };
            let mut reports = Vec::new();
            let mut as_expected = true;
            for (n, src) in chosen {
                let m = model::parse_model(src).map_err(|e| format!("{n}: {e}"))?;
                let input = format!("examples/{}", n.trim_start_matches("examples/"));
                let mut pass = true;
                for s in &m.suites {
                    let r = timed(|| run_suite(s, &m, &input))?;
                    pass &= r.0.pass;
                    reports.push(r);
                }
                as_expected &= pass == m.expect_pass;
            }
            emit(cli.format, &reports, true);
            Ok(if as_expected { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    par::set_sequential(cli.sequential);
    match par::with_jobs(cli.jobs, || execute(&cli)) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
