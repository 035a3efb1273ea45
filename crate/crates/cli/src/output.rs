//! Output sinks. Every file carries a manifest with the full configuration,
//! seed and engine version, enough to reproduce it exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{Format, RunConfig};

/// Reproduction record written ahead of every payload.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub engine_version: &'static str,
    pub rng: &'static str,
    pub config: &'a RunConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Manifest {
            tool: "treefv",
            engine_version: treefv::VERSION,
            rng: "ChaCha8; replicate i draws from stream i of the master seed",
            config,
        }
    }
}

/// Where output goes: the `--out` file or standard output.
pub struct Sink {
    inner: Box<dyn Write>,
    path: String,
}

impl Sink {
    pub fn open(config: &RunConfig) -> Result<Self> {
        match &config.params.out {
            Some(p) => {
                let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
                Ok(Sink { inner: Box::new(BufWriter::new(f)), path: p.display().to_string() })
            }
            None => Ok(Sink { inner: Box::new(BufWriter::new(io::stdout())), path: "<stdout>".into() }),
        }
    }

    pub fn write_str(&mut self, s: &str) -> Result<()> {
        self.inner.write_all(s.as_bytes()).with_context(|| format!("cannot write to {}", self.path))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().with_context(|| format!("cannot write to {}", self.path))
    }

    /// Manifest as `# `-prefixed JSON lines.
    pub fn manifest_comment(&mut self, m: &Manifest) -> Result<()> {
        let json = serde_json::to_string_pretty(m)?;
        for line in json.lines() {
            self.write_str(&format!("# {line}\n"))?;
        }
        Ok(())
    }
}

/// Writes records in the chosen format: CSV (manifest comment, header row,
/// one row per record) or JSON (`{manifest, records, summary}`).
pub fn write_records<T: Serialize>(
    config: &RunConfig,
    format: Format,
    records: &[T],
    summary: &[SummaryLine],
) -> Result<()> {
    let manifest = Manifest::new(config);
    let mut sink = Sink::open(config)?;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                manifest: &'a Manifest<'a>,
                records: &'a [T],
                summary: &'a [SummaryLine],
            }
            let doc = Doc { manifest: &manifest, records, summary };
            sink.write_str(&serde_json::to_string_pretty(&doc)?)?;
            sink.write_str("\n")?;
        }
        Format::Csv | Format::Text => {
            sink.manifest_comment(&manifest)?;
            let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
            for r in records {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
            sink.write_str(std::str::from_utf8(&bytes)?)?;
        }
    }
    sink.finish()?;
    for s in summary {
        eprintln!("{}", s.render());
    }
    Ok(())
}

/// A labelled aggregate printed to standard error and stored in JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryLine {
    pub quantity: String,
    pub value: f64,
    pub standard_error: Option<f64>,
    pub samples: usize,
    /// `exact` or `mc`.
    pub provenance: &'static str,
}

impl SummaryLine {
    /// Mean ± SE of Monte Carlo samples (NaN samples are skipped).
    pub fn mc(quantity: &str, samples: &[f64]) -> Self {
        let x: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        let (value, se) = match treefv::stats::summarize(&x) {
            Ok(s) => (s.mean, Some(s.se)),
            Err(_) => (x.first().copied().unwrap_or(f64::NAN), None),
        };
        SummaryLine { quantity: quantity.to_string(), value, standard_error: se, samples: x.len(), provenance: "mc" }
    }

    pub fn render(&self) -> String {
        match self.standard_error {
            Some(se) => format!("{} = {:.6} ± {:.6} [MC ± SE, n={}]", self.quantity, self.value, se, self.samples),
            None => format!("{} = {:.6} [MC, n={}, no SE]", self.quantity, self.value, self.samples),
        }
    }
}
