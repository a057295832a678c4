//! The acceptance suite: each criterion is a function returning a report,
//! shared by `ssk verify` and the `acceptance` test target.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{self, GibbsChainConfig};
use crate::goe::{eigenvalues, rigidity_error, sample_goe, Spectrum};
use crate::quadrature::semicircle_expectation;
use crate::rng::{stream_rng, Purpose};
use crate::semicircle::{equal_mass_bins, SemicircleLaw};
use crate::sweep::{render, run_sweep, Format, McMethod, SweepConfig};
use crate::variational::{self, case1_closed_form, theorem_limit, DiscretizedProblem, SystemSize};

/// Tolerances for every criterion. A tolerance file must name every field
/// and may only tighten the pinned values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: f64,
    pub case1: f64,
    pub log_potential_edge: f64,
    pub variational_high: f64,
    pub variational_low: f64,
    pub variational_slack: f64,
    pub condensation_top: f64,
    pub condensation_high_constant: f64,
    pub naive_mc: f64,
    pub importance_mc: f64,
    pub importance_min_ess: f64,
    pub oracle_sigmas: f64,
    pub rigidity: f64,
    pub overlap_low: f64,
    pub overlap_high: f64,
}

pub const PINNED: Tolerances = Tolerances {
    quadrature: 1e-8,
    case1: 1e-12,
    log_potential_edge: 1e-12,
    variational_high: 1e-3,
    variational_low: 5e-3,
    variational_slack: 0.10,
    condensation_top: 5e-3,
    condensation_high_constant: 10.0,
    naive_mc: 0.01,
    importance_mc: 0.02,
    importance_min_ess: 100.0,
    oracle_sigmas: 3.0,
    rigidity: 0.3,
    overlap_low: 0.05,
    overlap_high: 0.12,
};

impl Default for Tolerances {
    fn default() -> Self {
        PINNED
    }
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: Tolerances = serde_json::from_str(text)
            .map_err(|e| Error::Precondition(format!("tolerance file: {e}")))?;
        t.check_tightens()?;
        Ok(t)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Rejects any value looser than [`PINNED`]. The minimum ESS tightens
    /// upward; every other entry tightens downward.
    pub fn check_tightens(&self) -> Result<()> {
        let upper = [
            ("quadrature", self.quadrature, PINNED.quadrature),
            ("case1", self.case1, PINNED.case1),
            (
                "log_potential_edge",
                self.log_potential_edge,
                PINNED.log_potential_edge,
            ),
            (
                "variational_high",
                self.variational_high,
                PINNED.variational_high,
            ),
            (
                "variational_low",
                self.variational_low,
                PINNED.variational_low,
            ),
            (
                "variational_slack",
                self.variational_slack,
                PINNED.variational_slack,
            ),
            (
                "condensation_top",
                self.condensation_top,
                PINNED.condensation_top,
            ),
            (
                "condensation_high_constant",
                self.condensation_high_constant,
                PINNED.condensation_high_constant,
            ),
            ("naive_mc", self.naive_mc, PINNED.naive_mc),
            ("importance_mc", self.importance_mc, PINNED.importance_mc),
            ("oracle_sigmas", self.oracle_sigmas, PINNED.oracle_sigmas),
            ("rigidity", self.rigidity, PINNED.rigidity),
            ("overlap_low", self.overlap_low, PINNED.overlap_low),
            ("overlap_high", self.overlap_high, PINNED.overlap_high),
        ];
        for (key, value, pinned) in upper {
            if !(value.is_finite() && value >= 0.0 && value <= pinned) {
                return Err(Error::Precondition(format!(
                    "tolerance {key} = {value} is looser than {pinned}"
                )));
            }
        }
        let ess = self.importance_min_ess;
        if !(ess.is_finite() && ess >= PINNED.importance_min_ess) {
            return Err(Error::Precondition(format!(
                "tolerance importance_min_ess = {ess} is looser than {}",
                PINNED.importance_min_ess
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let budget = self
            .budget_seconds
            .map(|b| format!(" / {b:.0} s"))
            .unwrap_or_default();
        format!(
            "criterion {} {:<30} {}  {} [{:.1} s{budget}]",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail,
            self.seconds
        )
    }
}

/// Times `check`, folding errors and a blown runtime budget into failure.
fn timed<F>(id: u8, name: &'static str, budget: Option<Duration>, check: F) -> CriterionReport
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let start = Instant::now();
    let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = start.elapsed();
    let within = budget.is_none_or(|b| elapsed <= b);
    let detail = if within {
        detail
    } else {
        format!("{detail}; over runtime budget")
    };
    CriterionReport {
        id,
        name,
        passed: ok && within,
        detail,
        seconds: elapsed.as_secs_f64(),
        budget_seconds: budget.map(|b| b.as_secs_f64()),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn goe_spectrum(n: usize, seed: u64) -> Result<Spectrum> {
    eigenvalues(&sample_goe(n, seed)?)
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Closed-form identities against quadrature.
pub fn closed_form(t: &Tolerances) -> CriterionReport {
    timed(
        1,
        "closed-form identities",
        Some(Duration::from_secs(5)),
        || {
            let law = SemicircleLaw;
            let mut worst_s: f64 = 0.0;
            let mut worst_l: f64 = 0.0;
            for i in 0..10 {
                let z = 2.05 + 0.8 * i as f64;
                for z in [z, -z] {
                    let oracle = semicircle_expectation(|x| 1.0 / (x - z), 1e-14);
                    worst_s = worst_s.max((law.stieltjes(z)? - oracle).abs());
                }
            }
            for i in 0..20 {
                let z = 2.0 + 0.4 * i as f64;
                let oracle = semicircle_expectation(|x| (z - x).ln(), 1e-14);
                worst_l = worst_l.max((law.log_potential(z)? - oracle).abs());
            }
            let mut rng = stream_rng(1, Purpose::Verify, 0);
            let mut worst_c: f64 = 0.0;
            for _ in 0..50 {
                let beta = 1.0 - rng.random::<f64>();
                worst_c = worst_c.max((case1_closed_form(beta)? - 0.25 * beta * beta).abs());
            }
            let edge = (law.log_potential(2.0)? - 0.5).abs();
            let ok = worst_s <= t.quadrature
                && worst_l <= t.quadrature
                && worst_c <= t.case1
                && edge <= t.log_potential_edge;
            Ok((
            ok,
            format!(
                "stieltjes {worst_s:.1e}, log potential {worst_l:.1e} (<= {:.0e}); high-temperature form {worst_c:.1e} (<= {:.0e}); potential at 2 off by {edge:.1e}",
                t.quadrature, t.case1
            ),
        ))
        },
    )
}

fn infinite_optimum(beta: f64, k: usize) -> Result<variational::VariationalOptimum> {
    variational::solve(&DiscretizedProblem::new(
        beta,
        &equal_mass_bins(k)?,
        SystemSize::Infinite,
    )?)
}

/// Discretized optimum against the limit, and its convergence in `K`.
pub fn variational_convergence(t: &Tolerances) -> CriterionReport {
    timed(
        2,
        "variational convergence",
        Some(Duration::from_secs(30)),
        || {
            let mut ok = true;
            let mut worst = Vec::new();
            for beta in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
                let tol = if beta <= 1.0 {
                    t.variational_high
                } else {
                    t.variational_low
                };
                let limit = theorem_limit(beta)?;
                let errs = [250, 1000, 4000]
                    .iter()
                    .map(|&k| Ok((infinite_optimum(beta, k)?.value_per_spin - limit).abs()))
                    .collect::<Result<Vec<f64>>>()?;
                let monotone = errs
                    .windows(2)
                    .all(|w| w[1] <= (1.0 + t.variational_slack) * w[0]);
                ok &= errs[2] <= tol && monotone;
                worst.push(format!(
                    "{beta}:{:.1e}{}",
                    errs[2],
                    if monotone { "" } else { "(non-monotone)" }
                ));
            }
            Ok((ok, format!("error at K=4000 by beta {}", worst.join(" "))))
        },
    )
}

/// Top-bin weight at low and high temperature.
pub fn condensation(t: &Tolerances) -> CriterionReport {
    timed(3, "low-temperature condensation", None, || {
        let k = 2000;
        let low = infinite_optimum(2.0, k)?.v_top();
        let high = infinite_optimum(0.5, k)?.v_top();
        let ok = (low - 0.5).abs() <= t.condensation_top
            && high <= t.condensation_high_constant / k as f64;
        Ok((
            ok,
            format!(
                "beta=2: v1 = {low:.5} (target 0.5 +- {}); beta=0.5: K v1 = {:.3} (<= {})",
                t.condensation_top,
                high * k as f64,
                t.condensation_high_constant
            ),
        ))
    })
}

/// Plain Monte Carlo at `β = 0.5`.
pub fn naive_high_temperature(t: &Tolerances) -> CriterionReport {
    timed(
        4,
        "naive MC high temperature",
        Some(Duration::from_secs(120)),
        || {
            let limit = theorem_limit(0.5)?;
            let mut values = Vec::new();
            for seed in SEEDS {
                let s = goe_spectrum(500, seed)?;
                values.push(free_energy::mc_naive(&s, 0.5, 100_000, seed)?.value_per_spin);
            }
            let err = median(values.iter().map(|v| (v - limit).abs()).collect());
            let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
            Ok((
                err <= t.naive_mc,
                format!(
                    "median |err| {err:.4} (<= {}); values {}",
                    t.naive_mc,
                    shown.join(" ")
                ),
            ))
        },
    )
}

/// Importance-sampled Monte Carlo at `β = 1.5`.
pub fn importance_low_temperature(t: &Tolerances) -> CriterionReport {
    timed(
        5,
        "importance MC low temperature",
        Some(Duration::from_secs(300)),
        || {
            let limit = theorem_limit(1.5)?;
            let mut values = Vec::new();
            let mut ess = Vec::new();
            for seed in SEEDS {
                let s = goe_spectrum(500, seed)?;
                let e = free_energy::mc_importance(&s, 1.5, 100_000, seed)?;
                values.push(e.value_per_spin);
                ess.push(e.ess);
            }
            let err = median(values.iter().map(|v| (v - limit).abs()).collect());
            let good = ess.iter().filter(|&&e| e >= t.importance_min_ess).count();
            let ok = err <= t.importance_mc && good >= 4;
            let shown: Vec<String> = values
                .iter()
                .zip(&ess)
                .map(|(v, e)| format!("{v:.4}(ess {e:.0})"))
                .collect();
            Ok((
                ok,
                format!(
                    "median |err| {err:.4} (<= {}); {good}/5 with ess >= {}; {}",
                    t.importance_mc,
                    t.importance_min_ess,
                    shown.join(" ")
                ),
            ))
        },
    )
}

/// Dirichlet representation against direct sampling on the sphere, `n = 8`.
pub fn small_n_oracle(t: &Tolerances) -> CriterionReport {
    timed(
        6,
        "small-n sphere oracle",
        Some(Duration::from_secs(120)),
        || {
            let s = goe_spectrum(8, 1)?;
            let mut ok = true;
            let mut parts = Vec::new();
            for beta in [0.5, 2.0] {
                let a = free_energy::mc_naive(&s, beta, 10_000_000, 11)?;
                let b = free_energy::mc_sphere_direct(&s, beta, 10_000_000, 12)?;
                let z =
                    (a.value_per_spin - b.value_per_spin).abs() / a.std_error.hypot(b.std_error);
                ok &= z <= t.oracle_sigmas;
                parts.push(format!("beta={beta}: {z:.2} pooled SE"));
            }
            Ok((ok, format!("{} (<= {})", parts.join(", "), t.oracle_sigmas)))
        },
    )
}

/// Largest bin-average deviation from the semicircle representatives.
pub fn rigidity(t: &Tolerances) -> CriterionReport {
    use rayon::prelude::*;
    timed(
        7,
        "eigenvalue rigidity",
        Some(Duration::from_secs(60)),
        || {
            let grid = equal_mass_bins(50)?;
            let errs = SEEDS
                .par_iter()
                .map(|&seed| rigidity_error(&goe_spectrum(2000, seed)?, &grid))
                .collect::<Result<Vec<f64>>>()?;
            let good = errs.iter().filter(|&&e| e <= t.rigidity).count();
            let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3}")).collect();
            Ok((
                good >= 4,
                format!(
                    "{good}/5 seeds <= {}; errors {}",
                    t.rigidity,
                    shown.join(" ")
                ),
            ))
        },
    )
}

/// Pooled Gibbs overlap with the top 20 eigendirections.
pub fn gibbs_overlap(t: &Tolerances) -> CriterionReport {
    timed(8, "Gibbs overlap", Some(Duration::from_secs(300)), || {
        let reps = [1u64, 2, 3];
        let pooled = |beta: f64| -> Result<Vec<f64>> {
            reps.iter()
                .map(|&r| {
                    let s = goe_spectrum(500, 100 + r)?;
                    let cfg = GibbsChainConfig {
                        seed: r,
                        ..GibbsChainConfig::default()
                    };
                    Ok(free_energy::pooled_overlap(
                        &free_energy::gibbs_overlap_chains(&s, beta, 20, &cfg, 3)?,
                    ))
                })
                .collect()
        };
        let low = pooled(2.0)?;
        let high = pooled(0.5)?;
        let hits = low
            .iter()
            .filter(|v| (*v - 0.5).abs() <= t.overlap_low)
            .count();
        let ok = hits >= 2 && high.iter().all(|&v| v <= t.overlap_high);
        let fmt = |xs: &[f64]| {
            xs.iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        Ok((
            ok,
            format!(
                "beta=2: {} ({hits}/3 within {} of 0.5); beta=0.5: {} (<= {})",
                fmt(&low),
                t.overlap_low,
                fmt(&high),
                t.overlap_high
            ),
        ))
    })
}

/// The sweep renders byte-identical output on repeated runs.
pub fn determinism() -> CriterionReport {
    timed(9, "sweep determinism", None, || {
        let cfg = SweepConfig {
            beta_grid: vec![0.5, 1.5],
            k: 10,
            n: SystemSize::Finite(100),
            samples: 20_000,
            seeds: vec![1, 2],
            method: McMethod::Importance,
            format: Format::Csv,
            output_path: None,
        };
        let mut ok = true;
        for format in [Format::Csv, Format::Json] {
            let a = render(&run_sweep(&cfg)?, format)?;
            let b = render(&run_sweep(&cfg)?, format)?;
            ok &= a == b;
        }
        Ok((
            ok,
            if ok {
                "csv and json identical".into()
            } else {
                "outputs differ".into()
            },
        ))
    })
}

/// Runs the suite; `quick` keeps only the deterministic criteria 1 to 3.
pub fn run(t: &Tolerances, quick: bool) -> Vec<CriterionReport> {
    let mut reports = vec![closed_form(t), variational_convergence(t), condensation(t)];
    if !quick {
        reports.extend([
            naive_high_temperature(t),
            importance_low_temperature(t),
            small_n_oracle(t),
            rigidity(t),
            gibbs_overlap(t),
            determinism(),
        ]);
    }
    reports
}
