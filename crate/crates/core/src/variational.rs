//! The discretized variational problem.
//!
//! Maximize, over the simplex,
//!
//! ```text
//! (β/2) Σ λ̃_i v_i + (1/2) log K + (1/(2K) - 1/n) Σ log v_i
//! ```
//!
//! (the per-spin exponent of the Dirichlet integrand). Stationarity gives
//! `v_i = (1/(2K) - 1/n) / (Γ - (β/2) λ̃_i)` and the multiplier `Γ` solves the
//! resolvent equation `(1/K - 2/n) Σ 1/(2Γ/β - λ̃_i) = β` on `2Γ/β > λ̃_1`.
//!
//! Internally the root is tracked as the pole offset `t = 2Γ/β - λ̃_1`, which
//! keeps full relative precision when `t` is `O(1/K)` (low temperature).

use serde::{Deserialize, Serialize, Serializer};

use crate::dirichlet::SimplexPoint;
use crate::error::{Error, Result};
use crate::semicircle::{BinGrid, SemicircleLaw};

const MAX_BISECTION: usize = 4000;
const MAX_BRACKET_DOUBLINGS: usize = 200;
const WEIGHT_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemSize {
    Finite(usize),
    /// `n → ∞`: every `1/n` correction is dropped.
    Infinite,
}

impl SystemSize {
    fn inv(self) -> f64 {
        match self {
            SystemSize::Finite(n) => 1.0 / n as f64,
            SystemSize::Infinite => 0.0,
        }
    }
}

impl Serialize for SystemSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SystemSize::Finite(n) => s.serialize_u64(*n as u64),
            SystemSize::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    High,
    Critical,
    Low,
}

impl Regime {
    pub fn of(beta: f64) -> Self {
        if beta < 1.0 {
            Regime::High
        } else if beta == 1.0 {
            Regime::Critical
        } else {
            Regime::Low
        }
    }
}

/// Inverse temperature, descending levels `λ̃_1 ≥ … ≥ λ̃_K`, and system size.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedProblem {
    beta: f64,
    levels: Vec<f64>,
    size: SystemSize,
}

impl DiscretizedProblem {
    /// Problem on the representatives of an equal-mass grid.
    pub fn new(beta: f64, grid: &BinGrid, size: SystemSize) -> Result<Self> {
        Self::from_levels(beta, grid.representatives().to_vec(), size)
    }

    /// Problem on arbitrary non-increasing levels, e.g. a full spectrum.
    pub fn from_levels(beta: f64, levels: Vec<f64>, size: SystemSize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if levels.is_empty() {
            return Err(Error::Domain("need at least one level".into()));
        }
        if levels.iter().any(|l| !l.is_finite()) || levels.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(
                "levels must be finite and non-increasing".into(),
            ));
        }
        if let SystemSize::Finite(n) = size {
            if n <= 2 * levels.len() {
                return Err(Error::Precondition(format!(
                    "finite n = {n} must exceed 2K = {} so that 1/(2K) - 1/n > 0",
                    2 * levels.len()
                )));
            }
        }
        Ok(Self { beta, levels, size })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn size(&self) -> SystemSize {
        self.size
    }

    /// `1/(2K) - 1/n`, the numerator of every stationary weight.
    pub fn weight_numerator(&self) -> f64 {
        0.5 / self.k() as f64 - self.size.inv()
    }

    fn top(&self) -> f64 {
        self.levels[0]
    }

    /// Left side of the resolvent equation at pole offset `t = 2Γ/β - λ̃_1`.
    fn resolvent_at_offset(&self, t: f64) -> f64 {
        let top = self.top();
        2.0 * self.weight_numerator()
            * self
                .levels
                .iter()
                .map(|l| 1.0 / (t + (top - l)))
                .sum::<f64>()
    }

    /// `(1/K - 2/n) Σ 1/(2Γ/β - λ̃_i)`; infinite for `2Γ/β ≤ λ̃_1`.
    pub fn resolvent_lhs(&self, gamma: f64) -> f64 {
        let t = 2.0 * gamma / self.beta - self.top();
        if t <= 0.0 {
            return f64::INFINITY;
        }
        self.resolvent_at_offset(t)
    }

    /// Root of the resolvent equation as a pole offset.
    pub fn solve_offset(&self) -> Result<f64> {
        let target = self.beta;
        let mut hi = 1.0;
        let mut doublings = 0;
        while self.resolvent_at_offset(hi) > target {
            hi *= 2.0;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(Error::Internal("resolvent bracket expansion failed".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..MAX_BISECTION {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
                break;
            }
            if self.resolvent_at_offset(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if !(t > 0.0) {
            return Err(Error::Internal(
                "resolvent root collapsed onto the pole".into(),
            ));
        }
        Ok(t)
    }

    fn gamma_of_offset(&self, t: f64) -> f64 {
        0.5 * self.beta * (self.top() + t)
    }

    fn weights_at_offset(&self, t: f64) -> Vec<f64> {
        let c = self.weight_numerator();
        let top = self.top();
        let h = 0.5 * self.beta;
        self.levels
            .iter()
            .map(|l| c / (h * (t + (top - l))))
            .collect()
    }
}

/// The Lagrange multiplier `Γ`.
pub fn solve_gamma(p: &DiscretizedProblem) -> Result<f64> {
    Ok(p.gamma_of_offset(p.solve_offset()?))
}

/// Stationary weights `v_i = (1/(2K) - 1/n)/(Γ - (β/2) λ̃_i)` for a given `Γ`.
/// Fails unless they sum to one within `1e-10`, i.e. unless `Γ` solves the
/// resolvent equation; the returned point is renormalized exactly.
pub fn optimal_weights(p: &DiscretizedProblem, gamma: f64) -> Result<SimplexPoint> {
    let t = 2.0 * gamma / p.beta - p.top();
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must exceed beta * lambda_1 / 2 = {}",
            0.5 * p.beta * p.top()
        )));
    }
    finish_weights(p.weights_at_offset(t))
}

fn finish_weights(raw: Vec<f64>) -> Result<SimplexPoint> {
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Precondition(format!(
            "stationary weights sum to {sum}; gamma does not solve the resolvent equation"
        )));
    }
    SimplexPoint::normalized(raw)
}

/// Per-spin objective `(β/2) Σ λ̃_i v_i + (1/2) log K + (1/(2K) - 1/n) Σ log v_i`.
pub fn objective(p: &DiscretizedProblem, w: &SimplexPoint) -> Result<f64> {
    if w.k() != p.k() {
        return Err(Error::Domain(format!(
            "expected {} weights, got {}",
            p.k(),
            w.k()
        )));
    }
    if let Some(i) = w.weights().iter().position(|&v| v == 0.0) {
        return Err(Error::Boundary(i));
    }
    let energy: f64 = p.levels.iter().zip(w.weights()).map(|(l, v)| l * v).sum();
    let entropy: f64 = w.weights().iter().map(|v| v.ln()).sum();
    Ok(0.5 * p.beta * energy + 0.5 * (p.k() as f64).ln() + p.weight_numerator() * entropy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalOptimum {
    pub gamma: f64,
    /// `2Γ/β - λ̃_1`, strictly positive.
    pub pole_offset: f64,
    pub weights: SimplexPoint,
    pub value_per_spin: f64,
    pub regime: Regime,
}

impl VariationalOptimum {
    pub fn v_top(&self) -> f64 {
        self.weights.weights()[0]
    }

    pub fn record(&self, p: &DiscretizedProblem) -> OptimumRecord {
        OptimumRecord {
            beta: p.beta,
            k: p.k(),
            n_mode: p.size,
            gamma: self.gamma,
            v_top: self.v_top(),
            value_per_spin: self.value_per_spin,
            regime: self.regime,
        }
    }
}

/// JSON form of an optimum.
#[derive(Debug, Clone, Serialize)]
pub struct OptimumRecord {
    pub beta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub n_mode: SystemSize,
    pub gamma: f64,
    pub v_top: f64,
    pub value_per_spin: f64,
    pub regime: Regime,
}

pub fn solve(p: &DiscretizedProblem) -> Result<VariationalOptimum> {
    let t = p.solve_offset()?;
    let weights = finish_weights(p.weights_at_offset(t))?;
    let value_per_spin = objective(p, &weights)?;
    Ok(VariationalOptimum {
        gamma: p.gamma_of_offset(t),
        pole_offset: t,
        weights,
        value_per_spin,
        regime: Regime::of(p.beta),
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("beta must be positive, got {beta}")))
    }
}

/// `lim F_n(β)/n`: `β²/4` for `β ≤ 1`, `β - 3/4 - (1/2) log β` above.
pub fn theorem_limit(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(if beta <= 1.0 {
        0.25 * beta * beta
    } else {
        beta - 0.75 - 0.5 * beta.ln()
    })
}

/// High-temperature optimum through the logarithmic potential:
/// `β²/2 - (1/2) log β - (1/2) ∫ log(β + 1/β - x) dμ_sc(x)`.
pub fn case1_closed_form(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta > 1.0 {
        return Err(Error::Domain(format!(
            "high-temperature form needs beta <= 1, got {beta}"
        )));
    }
    let potential = SemicircleLaw.log_potential(beta + 1.0 / beta)?;
    Ok(0.5 * beta * beta - 0.5 * beta.ln() - 0.5 * potential)
}
