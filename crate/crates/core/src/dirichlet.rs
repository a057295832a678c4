//! Dirichlet and scaled-Dirichlet distributions on the probability simplex.
//!
//! Gamma variates use the shape-scale convention `Γ(α, θ)` with density
//! `x^{α-1} e^{-x/θ} / (Γ(α) θ^α)`, so `χ²(2α)` is `Γ(α, 2)`. Densities on the
//! simplex are taken with respect to Lebesgue measure on the first `K - 1`
//! coordinates.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Purpose};

/// Resampling attempts when every Gamma coordinate underflows to zero.
pub const MAX_RESAMPLE: usize = 32;

const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    alphas: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Domain(
                "Dirichlet needs at least one coordinate".into(),
            ));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Domain(format!(
                "Dirichlet parameters must be positive, got {a}"
            )));
        }
        Ok(Self { alphas })
    }

    pub fn symmetric(k: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; k])
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn total(&self) -> f64 {
        self.alphas.iter().sum()
    }

    fn log_normalizer(&self) -> f64 {
        ln_gamma(self.total()) - self.alphas.iter().map(|&a| ln_gamma(a)).sum::<f64>()
    }
}

/// A point of the simplex: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain(
                "simplex point needs at least one weight".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Domain(format!(
                "simplex weights must be non-negative, got {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Domain(format!(
                "simplex weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain(
                "simplex point needs at least one weight".into(),
            ));
        }
        Ok(Self {
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Divides non-negative weights by their sum.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::Domain(format!(
                "cannot normalize weights with sum {sum}"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Dirichlet shapes together with one Gamma scale per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDirichletParams {
    alphas: Vec<f64>,
    scales: Vec<f64>,
}

impl ScaledDirichletParams {
    pub fn new(alphas: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        DirichletParams::new(alphas.clone())?;
        if scales.len() != alphas.len() {
            return Err(Error::Domain(format!(
                "{} shapes but {} scales",
                alphas.len(),
                scales.len()
            )));
        }
        if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::Domain(format!(
                "Gamma scales must be positive, got {s}"
            )));
        }
        Ok(Self { alphas, scales })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    /// `log(f_α(x) / g_{α,θ}(x))`: the unscaled Dirichlet density over this
    /// scaled one at the same shapes. The `x_i^{α_i - 1}` factors and the
    /// Gamma-function constants cancel, leaving
    /// `Σ α_i log θ_i + (Σ α) log(Σ x_j / θ_j)`.
    pub fn log_unscaled_ratio(&self, x: &[f64]) -> Result<f64> {
        check_len(self.k(), x.len())?;
        Ok(self.log_ratio_unchecked(x))
    }

    pub(crate) fn log_ratio_unchecked(&self, x: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        let mut log_scales = 0.0;
        let mut tilt = 0.0;
        for ((&a, &s), &xi) in self.alphas.iter().zip(&self.scales).zip(x) {
            log_scales += a * s.ln();
            tilt += xi / s;
        }
        log_scales + total * tilt.ln()
    }
}

fn check_len(k: usize, got: usize) -> Result<()> {
    if k == got {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "expected {k} coordinates, got {got}"
        )))
    }
}

fn log_kernel(alphas: &[f64], x: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (&a, &xi)) in alphas.iter().zip(x).enumerate() {
        if xi == 0.0 {
            if a < 1.0 {
                return Err(Error::UnboundedDensity(i));
            }
            if a > 1.0 {
                return Ok(f64::NEG_INFINITY);
            }
            continue;
        }
        acc += (a - 1.0) * xi.ln();
    }
    Ok(acc)
}

/// Log-density of `Dir(α)` at `x`.
pub fn log_density(p: &DirichletParams, x: &SimplexPoint) -> Result<f64> {
    check_len(p.k(), x.k())?;
    Ok(p.log_normalizer() + log_kernel(p.alphas(), x.weights())?)
}

/// Log-density of the scaled Dirichlet at `x`:
/// `log Γ(Σα) - Σ log Γ(α_i) + Σ(α_i - 1) log x_i - Σ α_i log θ_i - (Σα) log(Σ x_j/θ_j)`.
pub fn log_density_scaled(p: &ScaledDirichletParams, x: &SimplexPoint) -> Result<f64> {
    check_len(p.k(), x.k())?;
    let base = DirichletParams {
        alphas: p.alphas.clone(),
    };
    let kernel = log_kernel(p.alphas(), x.weights())?;
    Ok(base.log_normalizer() + kernel - p.log_ratio_unchecked(x.weights()))
}

/// Reusable sampler: independent `Γ(α_i, θ_i)` draws normalized by their sum.
#[derive(Debug, Clone)]
pub struct GammaRatioSampler {
    gammas: Vec<Gamma<f64>>,
}

impl GammaRatioSampler {
    pub fn unscaled(p: &DirichletParams) -> Result<Self> {
        Self::build(p.alphas(), None)
    }

    pub fn scaled(p: &ScaledDirichletParams) -> Result<Self> {
        Self::build(p.alphas(), Some(p.scales()))
    }

    fn build(alphas: &[f64], scales: Option<&[f64]>) -> Result<Self> {
        let gammas = alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let theta = scales.map_or(1.0, |s| s[i]);
                Gamma::new(a, theta).map_err(|e| Error::Domain(format!("Gamma({a}, {theta}): {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gammas })
    }

    pub fn k(&self) -> usize {
        self.gammas.len()
    }

    /// Writes one draw into `out` (length `K`).
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.gammas.len());
        for _ in 0..MAX_RESAMPLE {
            let mut sum = 0.0;
            for (o, g) in out.iter_mut().zip(&self.gammas) {
                *o = g.sample(rng);
                sum += *o;
            }
            if sum > 0.0 && sum.is_finite() {
                out.iter_mut().for_each(|o| *o /= sum);
                return Ok(());
            }
        }
        Err(Error::Sampler(format!(
            "all Gamma coordinates vanished in {MAX_RESAMPLE} consecutive draws"
        )))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimplexPoint> {
        let mut w = vec![0.0; self.k()];
        self.fill(rng, &mut w)?;
        Ok(SimplexPoint { weights: w })
    }
}

/// One `Dir(α)` draw, deterministic in `seed`.
pub fn sample(p: &DirichletParams, seed: u64) -> Result<SimplexPoint> {
    GammaRatioSampler::unscaled(p)?.draw(&mut stream_rng(seed, Purpose::Dirichlet, 0))
}

/// One scaled-Dirichlet draw, deterministic in `seed`.
pub fn sample_scaled(p: &ScaledDirichletParams, seed: u64) -> Result<SimplexPoint> {
    GammaRatioSampler::scaled(p)?.draw(&mut stream_rng(seed, Purpose::Dirichlet, 0))
}

/// `log Γ(n/2) - K log Γ(n/(2K))`, the log-normalizer of `Dir(n/2K, …, n/2K)`.
pub fn stirling_log_norm(n: usize, k: usize) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::Domain(format!(
            "need positive n and K, got n = {n}, K = {k}"
        )));
    }
    let half = n as f64 / 2.0;
    Ok(ln_gamma(half) - k as f64 * ln_gamma(half / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pt(w: &[f64]) -> SimplexPoint {
        SimplexPoint::new(w.to_vec()).unwrap()
    }

    #[test]
    fn log_density_values() {
        let d = |a: &[f64], x: &[f64]| {
            log_density(&DirichletParams::new(a.to_vec()).unwrap(), &pt(x)).unwrap()
        };
        assert!(d(&[1.0, 1.0], &[0.5, 0.5]).abs() < 1e-14);
        assert!((d(&[2.0, 2.0], &[0.5, 0.5]) - 1.5_f64.ln()).abs() < 1e-13);
        assert!((d(&[0.5, 0.5], &[0.5, 0.5]) - (2.0 / PI).ln()).abs() < 1e-13);
        assert!((d(&[0.5, 0.5], &[0.5, 0.5]) + 0.451_583).abs() < 1e-6);
    }

    #[test]
    fn log_density_boundary_and_shape_errors() {
        let p = DirichletParams::new(vec![0.5, 2.0]).unwrap();
        assert_eq!(
            log_density(&p, &pt(&[0.0, 1.0])),
            Err(Error::UnboundedDensity(0))
        );
        assert_eq!(
            log_density(&p, &pt(&[1.0, 0.0])).unwrap(),
            f64::NEG_INFINITY
        );
        let flat = DirichletParams::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(log_density(&flat, &pt(&[0.0, 0.5, 0.5]))
            .unwrap()
            .is_finite());
        assert!(log_density(&flat, &pt(&[0.5, 0.5])).is_err());
        assert!(DirichletParams::new(vec![1.0, 0.0]).is_err());
        assert!(DirichletParams::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![0.6, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn symmetric_density_is_exchangeable() {
        let p = DirichletParams::symmetric(4, 0.7).unwrap();
        let a = log_density(&p, &pt(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let b = log_density(&p, &pt(&[0.3, 0.1, 0.4, 0.2])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_reduces_to_unscaled() {
        let a = vec![0.5, 1.5, 3.0];
        let x = pt(&[0.2, 0.3, 0.5]);
        let plain = log_density(&DirichletParams::new(a.clone()).unwrap(), &x).unwrap();
        let scaled = ScaledDirichletParams::new(a.clone(), vec![2.5; 3]).unwrap();
        assert!((log_density_scaled(&scaled, &x).unwrap() - plain).abs() < 1e-13);
        assert!(scaled.log_unscaled_ratio(x.weights()).unwrap().abs() < 1e-13);
        let tilted = ScaledDirichletParams::new(a.clone(), vec![1.0, 2.0, 0.25]).unwrap();
        let diff = plain - log_density_scaled(&tilted, &x).unwrap();
        assert!((tilted.log_unscaled_ratio(x.weights()).unwrap() - diff).abs() < 1e-13);
        assert!(ScaledDirichletParams::new(a.clone(), vec![1.0, 2.0]).is_err());
        assert!(ScaledDirichletParams::new(a, vec![1.0, -2.0, 1.0]).is_err());
    }

    #[test]
    fn scaled_density_integrates_to_one_on_triangle() {
        // K = 3 density in (x1, x2) coordinates; x = (u, (1-u)t, (1-u)(1-t))
        // has Jacobian (1 - u). Shapes >= 1 keep the integrand bounded.
        let p = ScaledDirichletParams::new(vec![1.5, 2.0, 1.2], vec![1.0, 3.0, 0.5]).unwrap();
        let f = |u: f64, t: f64| {
            let x = [u, (1.0 - u) * t, (1.0 - u) * (1.0 - t)];
            let ld =
                log_density_scaled(&p, &SimplexPoint::normalized(x.to_vec()).unwrap()).unwrap();
            ld.exp() * (1.0 - u)
        };
        let total = integrate(|u| integrate(|t| f(u, t), 0.0, 1.0, 1e-9), 0.0, 1.0, 1e-8);
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn samples_are_deterministic_simplex_points() {
        let p = DirichletParams::symmetric(6, 0.5).unwrap();
        let a = sample(&p, 11).unwrap();
        assert_eq!(a, sample(&p, 11).unwrap());
        assert_ne!(a, sample(&p, 12).unwrap());
        assert!((a.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_shapes_still_sample() {
        let p = DirichletParams::symmetric(3, 1e-3).unwrap();
        let s = GammaRatioSampler::unscaled(&p).unwrap();
        let mut rng = stream_rng(5, Purpose::Dirichlet, 0);
        for _ in 0..1000 {
            let w = s.draw(&mut rng).unwrap();
            assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stirling_small_cases() {
        assert_eq!(stirling_log_norm(10, 1).unwrap(), 0.0);
        assert!(stirling_log_norm(0, 3).is_err());
        assert!(stirling_log_norm(10, 0).is_err());
        // Γ(3)/Γ(1)^3 = 2 at n = 6, K = 3
        assert!((stirling_log_norm(6, 3).unwrap() - 2.0_f64.ln()).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn draws_satisfy_simplex_invariants(seed in any::<u64>(), k in 1usize..40, alpha in 0.05f64..5.0) {
            let p = DirichletParams::symmetric(k, alpha).unwrap();
            let w = sample(&p, seed).unwrap();
            prop_assert_eq!(w.k(), k);
            prop_assert!(w.weights().iter().all(|&x| x >= 0.0));
            prop_assert!((w.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
