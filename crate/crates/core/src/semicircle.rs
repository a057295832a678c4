//! The semicircle law on `[-2, 2]`: density, distribution function,
//! quantiles, the real-axis Stieltjes transform, the logarithmic potential,
//! and the equal-mass discretization used to coarse-grain a spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

const QUANTILE_MAX_ITER: usize = 200;

/// The (parameter-free) semicircle law with density `√(4 - x²) / 2π`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SemicircleLaw;

impl SemicircleLaw {
    pub fn density(&self, x: f64) -> Result<f64> {
        ensure_finite(x, "x")?;
        if x.abs() >= 2.0 {
            return Ok(0.0);
        }
        Ok((4.0 - x * x).sqrt() / (2.0 * PI))
    }

    /// `∫_{-2}^{x} f(t) dt`, clamped to 0 below the support and 1 above.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        ensure_finite(x, "x")?;
        Ok(cdf_unchecked(x))
    }

    /// Inverse of [`cdf`](Self::cdf) by bisection on `[-2, 2]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
        if p == 0.0 {
            return Ok(-2.0);
        }
        if p == 1.0 {
            return Ok(2.0);
        }
        let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
        for _ in 0..QUANTILE_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = cdf_unchecked(mid);
            if c == p {
                return Ok(mid);
            }
            if c < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `S(z) = ∫ (x - z)^{-1} dμ_sc(x)` for real `|z| > 2`.
    pub fn stieltjes(&self, z: f64) -> Result<f64> {
        ensure_finite(z, "z")?;
        if z.abs() <= 2.0 {
            return Err(Error::Domain(format!(
                "Stieltjes transform is evaluated off the support only (|z| > 2), got {z}"
            )));
        }
        // (-z + √(z²-4))/2 rewritten as -2/(z + √(z²-4)); odd in z.
        let a = z.abs();
        let s = -2.0 / (a + (a * a - 4.0).sqrt());
        Ok(if z > 0.0 { s } else { -s })
    }

    /// `∫ log(z - x) dμ_sc(x)` for `z ≥ 2`.
    pub fn log_potential(&self, z: f64) -> Result<f64> {
        ensure_finite(z, "z")?;
        if z < 2.0 {
            return Err(Error::Domain(format!(
                "logarithmic potential needs z >= 2, got {z}"
            )));
        }
        let root = (z * z - 4.0).sqrt();
        // z(z - root) = 4z/(z + root)
        Ok(z / (z + root) + (z + root).ln() - 2.0_f64.ln() - 0.5)
    }
}

fn cdf_unchecked(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (0.5 * x).asin() / PI
    }
}

/// `K` equal-mass bins of the semicircle law, stored as descending
/// breakpoints `2 = b_0 > b_1 > ... > b_K = -2`. Bin `i` is `[b_{i+1}, b_i]`
/// and is represented by its upper breakpoint `b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    breakpoints: Vec<f64>,
}

impl BinGrid {
    pub fn equal_mass(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("bin count K must be at least 1".into()));
        }
        let law = SemicircleLaw;
        let mut breakpoints = vec![0.0; k + 1];
        // Upper half by bisection, lower half by reflection so the grid is
        // exactly antisymmetric.
        for j in 0..=k / 2 {
            let b = law.quantile(1.0 - j as f64 / k as f64)?;
            breakpoints[j] = b;
            breakpoints[k - j] = -b;
        }
        if k.is_multiple_of(2) {
            breakpoints[k / 2] = 0.0;
        }
        Ok(Self { breakpoints })
    }

    pub fn k(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The `K` bin representatives `b_0..b_{K-1}`.
    pub fn representatives(&self) -> &[f64] {
        &self.breakpoints[..self.k()]
    }

    /// Semicircle mass of bin `i`.
    pub fn bin_mass(&self, i: usize) -> f64 {
        cdf_unchecked(self.breakpoints[i]) - cdf_unchecked(self.breakpoints[i + 1])
    }
}

pub fn equal_mass_bins(k: usize) -> Result<BinGrid> {
    BinGrid::equal_mass(k)
}
