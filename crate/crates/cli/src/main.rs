//! `treefv`: exact moment tables, coalescent and Moran simulations, and the
//! acceptance suites of the tree-valued Fleming–Viot laboratory.

mod config;
mod output;
mod sim;
mod table;

use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use treefv::algebra::{BigRational, Sym};
use treefv::moments::named_formulas;
use treefv::verify::{run, Suite, VerifyConfig};

use config::{Format, Params, RunConfig};
use output::{Manifest, Sink};

#[derive(Parser, Debug)]
#[command(name = "treefv", version, about = "Exact moments and simulations of tree-valued Fleming–Viot dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived generator transitions next to the published list.
    GenTable,
    /// Closed-form moment formulas, optionally evaluated exactly.
    Moments {
        /// Formula name; all formulas are listed when absent.
        #[arg(long)]
        formula: Option<String>,
        /// Exact value for the symbol s (integer, fraction or decimal).
        #[arg(long)]
        s: Option<String>,
        /// Exact value for the symbol t (integer, fraction or decimal).
        #[arg(long)]
        t: Option<String>,
    },
    /// Kingman coalescent near its leaves.
    SimCoalescent {
        #[arg(long, value_enum, default_value = "slice")]
        quantity: sim::Quantity,
        /// Number of remaining lines for `--quantity tn`.
        #[arg(long, default_value_t = 5)]
        level: usize,
    },
    /// Stationary Moran populations observed on the time grid.
    SimMoran {
        /// n_eps, psi12, psihat12, mark_ratio (Laplace weighted) or mark_ratio_eps.
        #[arg(long, default_value = "psi12")]
        functional: String,
    },
    /// Acceptance suites; exits with status 1 if any check fails.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteArg {
    Symbolic,
    Coalescent,
    Moran,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Symbolic => Suite::Symbolic,
            SuiteArg::Coalescent => Suite::Coalescent,
            SuiteArg::Moran => Suite::Moran,
            SuiteArg::All => Suite::All,
        }
    }
}

/// Parses `3`, `-2/7` or `0.125` into an exact rational.
fn exact(src: &str) -> Result<BigRational> {
    let s = src.trim();
    let bad = || anyhow!("not an exact number: {src:?}");
    let fraction = match s.split_once('.') {
        None => s.to_string(),
        Some((int, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int = if int.is_empty() || int == "-" { format!("{int}0") } else { int.to_string() };
            format!("{int}{frac}/1{}", "0".repeat(frac.len()))
        }
    };
    if fraction.split_once('/').is_some_and(|(_, d)| d.trim_start_matches('0').is_empty()) {
        bail!("zero denominator in {src:?}");
    }
    fraction.parse::<BigRational>().map_err(|_| bad())
}

#[derive(Serialize)]
struct FormulaRecord {
    name: &'static str,
    description: &'static str,
    formula: String,
    value: Option<String>,
    provenance: &'static str,
}

fn moments(config: &RunConfig, formula: Option<&str>, s: Option<&str>, t: Option<&str>) -> Result<()> {
    let p = &config.params;
    let mut bindings = Vec::new();
    // λ and ϑ are taken from their decimal flags exactly as written.
    let mut push = |sym, v: Option<String>| -> Result<()> {
        if let Some(v) = v {
            bindings.push((sym, exact(&v)?));
        }
        Ok(())
    };
    push(Sym::Lambda, p.lambda.map(|x| x.to_string()))?;
    push(Sym::Theta, p.theta.map(|x| x.to_string()))?;
    push(Sym::S, s.map(str::to_string))?;
    push(Sym::T, t.map(str::to_string))?;
    let all = named_formulas()?;
    let chosen: Vec<_> = match formula {
        Some(name) => {
            let f = all.into_iter().find(|f| f.name == name).ok_or_else(|| {
                anyhow!("unknown formula {name:?}; run `treefv moments` for the list")
            })?;
            vec![f]
        }
        None => all,
    };
    let records = chosen
        .iter()
        .map(|f| {
            let value = if bindings.is_empty() { None } else { Some(f.formula.eval_partial(&bindings)?.to_string()) };
            Ok(FormulaRecord {
                name: f.name,
                description: f.anchor,
                formula: f.formula.to_string(),
                value,
                provenance: "exact",
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let format = p.format_or(Format::Text);
    if format != Format::Text {
        return output::write_records(config, format, &records, &[]);
    }
    let mut sink = Sink::open(config)?;
    sink.manifest_comment(&Manifest::new(config))?;
    for r in &records {
        match &r.value {
            Some(v) if formula.is_some() => sink.write_str(&format!("{v}  [exact]\n"))?,
            Some(v) => sink.write_str(&format!("{} = {}  [exact]\n", r.name, v))?,
            None => sink.write_str(&format!("{} = {}  [exact]  — {}\n", r.name, r.formula, r.description))?,
        }
    }
    sink.finish()
}

fn verify(config: &RunConfig, suite: Suite) -> Result<bool> {
    let p = &config.params;
    let cfg = VerifyConfig { seed: p.seed.unwrap_or(20_240_601), reps: p.reps };
    let report = run(suite, &cfg)?;
    let format = p.format_or(Format::Json);
    let mut sink = Sink::open(config)?;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                manifest: Manifest<'a>,
                pass: bool,
                report: &'a treefv::Report,
            }
            let doc = Doc { manifest: Manifest::new(config), pass: report.pass(), report: &report };
            sink.write_str(&serde_json::to_string_pretty(&doc)?)?;
            sink.write_str("\n")?;
        }
        Format::Text | Format::Csv => {
            sink.manifest_comment(&Manifest::new(config))?;
            for c in &report.criteria {
                let verdict = if c.pass() { "PASS" } else { "FAIL" };
                sink.write_str(&format!("{verdict} criterion {:>2}: {}\n", c.id, c.title))?;
                for check in &c.checks {
                    sink.write_str(&format!("      {}\n", check.line()))?;
                }
            }
        }
    }
    sink.finish()?;
    for c in &report.criteria {
        eprintln!("{} criterion {:>2}: {}", if c.pass() { "PASS" } else { "FAIL" }, c.id, c.title);
    }
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<bool> {
        match &cli.command {
            Command::GenTable => {
                let config = RunConfig::new("gen-table", &cli.params)?;
                table::run(&config)?;
            }
            Command::Moments { formula, s, t } => {
                let config = RunConfig::new("moments", &cli.params)?
                    .with_option("formula", formula)
                    .with_option("s", s)
                    .with_option("t", t);
                moments(&config, formula.as_deref(), s.as_deref(), t.as_deref())?;
            }
            Command::SimCoalescent { quantity, level } => {
                let config = RunConfig::new("sim-coalescent", &cli.params)?
                    .with_option("quantity", quantity)
                    .with_option("level", level);
                sim::coalescent(&config, *quantity, *level)?;
            }
            Command::SimMoran { functional } => {
                let config = RunConfig::new("sim-moran", &cli.params)?.with_option("functional", functional);
                sim::moran(&config, functional)?;
            }
            Command::Verify { suite } => {
                let config = RunConfig::new("verify", &cli.params)?.with_option("suite", suite);
                return verify(&config, (*suite).into()).context("verification did not complete");
            }
        }
        Ok(true)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
