//! β-sweeps: limiting free energy, variational optimum and Monte Carlo estimate per
//! `(β, seed)` cell, emitted as CSV or JSON.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{self, FreeEnergyEstimate};
use crate::goe::{eigenvalues, sample_goe, Spectrum};
use crate::semicircle::equal_mass_bins;
use crate::variational::{self, DiscretizedProblem, SystemSize};

pub const CSV_HEADER: [&str; 12] = [
    "beta",
    "K",
    "n",
    "seed",
    "method",
    "theorem_limit",
    "variational_value",
    "mc_value",
    "mc_stderr",
    "gap",
    "ess",
    "warnings",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McMethod {
    Naive,
    Importance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub beta_grid: Vec<f64>,
    pub k: usize,
    pub n: SystemSize,
    /// Monte Carlo draws per cell; zero skips Monte Carlo.
    pub samples: usize,
    pub seeds: Vec<u64>,
    pub method: McMethod,
    pub format: Format,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub n: SystemSize,
    pub seed: u64,
    /// `None` when no Monte Carlo ran for the cell.
    pub method: Option<free_energy::Method>,
    pub theorem_limit: f64,
    pub variational_value: Option<f64>,
    pub mc_value: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// Monte Carlo minus limit when available, else variational minus limit.
    pub gap: Option<f64>,
    pub ess: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepConfig {
    /// Checks the config and rounds a finite `n` up to a multiple of `K`.
    /// Returns the effective size and any warnings to attach to every row.
    fn prepare(&self) -> Result<(SystemSize, Vec<String>)> {
        if self.beta_grid.is_empty() {
            return Err(Error::Domain("beta grid is empty".into()));
        }
        if let Some(b) = self
            .beta_grid
            .iter()
            .find(|b| !(b.is_finite() && **b > 0.0))
        {
            return Err(Error::Domain(format!(
                "beta values must be positive, got {b}"
            )));
        }
        if self.k == 0 {
            return Err(Error::Domain("bin count K must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Domain("seed list is empty".into()));
        }
        let mut warnings = Vec::new();
        let size = match self.n {
            SystemSize::Infinite => SystemSize::Infinite,
            SystemSize::Finite(n) if n < 2 => {
                return Err(Error::Domain(format!("need n >= 2, got {n}")));
            }
            SystemSize::Finite(n) if !n.is_multiple_of(self.k) => {
                let rounded = n.div_ceil(self.k) * self.k;
                warnings.push(format!(
                    "n rounded up from {n} to {rounded} so that K divides n"
                ));
                SystemSize::Finite(rounded)
            }
            s => s,
        };
        Ok((size, warnings))
    }
}

fn variational_value(beta: f64, k: usize, size: SystemSize) -> std::result::Result<f64, String> {
    let grid = equal_mass_bins(k).map_err(|e| e.to_string())?;
    DiscretizedProblem::new(beta, &grid, size)
        .and_then(|p| variational::solve(&p))
        .map(|o| o.value_per_spin)
        .map_err(|e| format!("variational optimum unavailable: {e}"))
}

fn estimate(
    method: McMethod,
    s: &Spectrum,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<FreeEnergyEstimate> {
    match method {
        McMethod::Naive => free_energy::mc_naive(s, beta, samples, seed),
        McMethod::Importance => free_energy::mc_importance(s, beta, samples, seed),
    }
}

/// Computes one row per `(β, seed)`, ordered by β then seed as given.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let (size, common) = cfg.prepare()?;
    let variational: Vec<_> = cfg
        .beta_grid
        .par_iter()
        .map(|&b| variational_value(b, cfg.k, size))
        .collect();

    let spectra: Vec<Option<Spectrum>> = match size {
        SystemSize::Finite(n) if cfg.samples > 0 => cfg
            .seeds
            .par_iter()
            .map(|&seed| sample_goe(n, seed).and_then(|m| eigenvalues(&m)).map(Some))
            .collect::<Result<_>>()?,
        _ => vec![None; cfg.seeds.len()],
    };

    let cells: Vec<(usize, usize)> = (0..cfg.beta_grid.len())
        .flat_map(|b| (0..cfg.seeds.len()).map(move |s| (b, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(bi, si)| {
            let beta = cfg.beta_grid[bi];
            let seed = cfg.seeds[si];
            let limit = variational::theorem_limit(beta)?;
            let mut warnings = common.clone();
            let var = match &variational[bi] {
                Ok(v) => Some(*v),
                Err(msg) => {
                    warnings.push(msg.clone());
                    None
                }
            };
            let mc = spectra[si]
                .as_ref()
                .map(|s| estimate(cfg.method, s, beta, cfg.samples, seed))
                .transpose()?;
            if let Some(e) = &mc {
                warnings.extend(e.warnings.iter().cloned());
            }
            let gap = mc
                .as_ref()
                .map(|e| e.value_per_spin)
                .or(var)
                .map(|v| v - limit);
            Ok(SweepRow {
                beta,
                k: cfg.k,
                n: size,
                seed,
                method: mc.as_ref().map(|e| e.method),
                theorem_limit: limit,
                variational_value: var,
                mc_value: mc.as_ref().map(|e| e.value_per_spin),
                mc_stderr: mc.as_ref().map(|e| e.std_error),
                gap,
                ess: mc.as_ref().map(|e| e.ess),
                warnings,
            })
        })
        .collect()
}

/// Seventeen significant digits, round-trip safe.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn render_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Internal(format!("csv output failed: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let n = match r.n {
            SystemSize::Finite(n) => n.to_string(),
            SystemSize::Infinite => "infinite".into(),
        };
        w.write_record([
            real(r.beta),
            r.k.to_string(),
            n,
            r.seed.to_string(),
            r.method.map(|m| m.as_str()).unwrap_or("none").into(),
            real(r.theorem_limit),
            opt(r.variational_value),
            opt(r.mc_value),
            opt(r.mc_stderr),
            opt(r.gap),
            opt(r.ess),
            r.warnings.join("; "),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Internal(format!("csv output failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

pub fn render_json(rows: &[SweepRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render(rows: &[SweepRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => render_csv(rows),
        Format::Json => render_json(rows),
    }
}

/// Runs the sweep and writes it to the configured destination.
pub fn cmd_sweep(cfg: &SweepConfig) -> anyhow::Result<Vec<SweepRow>> {
    let rows = run_sweep(cfg)?;
    let text = render(&rows, cfg.format)?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(rows)
}
