//! GOE sampling, spectra, and how closely a spectrum follows the semicircle
//! discretization.

use std::io::{BufRead, Write};

use rand_distr::{Distribution, StandardNormal};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Purpose};
use crate::semicircle::{BinGrid, SemicircleLaw};

/// Symmetric `n × n` matrix, row-major. Sampled matrices are already scaled
/// by `1/√n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoeMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GoeMatrix {
    /// Wraps caller-provided entries. Symmetry is checked by
    /// [`eigenvalues`], not here.
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    /// First asymmetric entry in row-major order of the upper triangle.
    fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                if self.get(i, j).to_bits() != self.get(j, i).to_bits() {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Samples `X_n`: off-diagonal `N(0,1)/√n`, diagonal `N(0,2)/√n`, mirrored.
/// The upper triangle is filled row by row from a single seeded stream.
pub fn sample_goe(n: usize, seed: u64) -> Result<GoeMatrix> {
    if n == 0 {
        return Err(Error::Domain("GOE dimension must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, Purpose::Goe, 0);
    let scale = 1.0 / (n as f64).sqrt();
    let diag_scale = std::f64::consts::SQRT_2 * scale;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        entries[i * n + i] = diag_scale * z;
        for j in i + 1..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = scale * z;
            entries[i * n + j] = x;
            entries[j * n + i] = x;
        }
    }
    Ok(GoeMatrix { n, entries })
}

/// Eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts the given eigenvalues into descending order.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("eigenvalues must be finite".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn top(&self) -> Option<f64> {
        self.values.first().copied()
    }

    /// One eigenvalue per line, descending, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.values {
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Domain(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Domain(format!("line {}: not a number: {t:?}", lineno + 1)))?;
            values.push(v);
        }
        Self::from_values(values)
    }
}

pub fn eigenvalues(m: &GoeMatrix) -> Result<Spectrum> {
    if let Some((row, col)) = m.asymmetry() {
        return Err(Error::NotSymmetric { row, col });
    }
    Spectrum::from_values(symmetric_eigenvalues(&m.entries, m.n)?)
}

/// `sup_i sup_{j in bin i} |λ_j - λ̃_i|`, bin `i` holding the eigenvalues
/// with (1-based) indices `(i-1)n/K + 1 ..= in/K`. Requires `K | n`.
pub fn rigidity_error(s: &Spectrum, g: &BinGrid) -> Result<f64> {
    let n = s.n();
    let k = g.k();
    if n == 0 {
        return Err(Error::Domain("empty spectrum".into()));
    }
    if !n.is_multiple_of(k) {
        return Err(Error::Precondition(format!(
            "bin count K = {k} must divide the spectrum size n = {n}"
        )));
    }
    let per_bin = n / k;
    let reps = g.representatives();
    Ok(s.values()
        .chunks(per_bin)
        .zip(reps)
        .flat_map(|(bin, rep)| bin.iter().map(move |l| (l - rep).abs()))
        .fold(0.0, f64::max))
}

/// Kolmogorov distance between the empirical spectral distribution and the
/// semicircle law.
pub fn esd_distance(s: &Spectrum) -> Result<f64> {
    let n = s.n();
    if n == 0 {
        return Err(Error::Domain("empty spectrum".into()));
    }
    let law = SemicircleLaw;
    let nf = n as f64;
    let mut worst = 0.0_f64;
    for (k, &x) in s.values().iter().rev().enumerate() {
        let f = law.cdf(x)?;
        worst = worst.max((k + 1) as f64 / nf - f).max(f - k as f64 / nf);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semicircle::equal_mass_bins;

    fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
        // cyclic Jacobi: slow but independent of the Householder/QL path
        let mut a = a.to_vec();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        d.sort_by(|x, y| y.total_cmp(x));
        d
    }

    #[test]
    fn n_one() {
        let m = sample_goe(1, 42).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(eigenvalues(&m).unwrap().values(), &[m.get(0, 0)]);
        assert!(sample_goe(0, 1).is_err());
    }

    #[test]
    fn deterministic_and_exactly_symmetric() {
        let a = sample_goe(30, 9).unwrap();
        assert_eq!(a, sample_goe(30, 9).unwrap());
        assert_ne!(a, sample_goe(30, 10).unwrap());
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(a.get(i, j).to_bits(), a.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn entry_variances() {
        let n = 500;
        let m = sample_goe(n, 2024).unwrap();
        let mut off = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                off.push(m.get(i, j));
            }
        }
        assert_eq!(off.len(), 124_750);
        let var = |xs: &[f64]| {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
        };
        let nf = n as f64;
        assert!((var(&off) * nf - 1.0).abs() < 0.1);
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        assert!((var(&diag) * nf / 2.0 - 1.0).abs() < 0.4);
    }

    #[test]
    fn simple_spectra() {
        let c = 1.75;
        let mut e = vec![0.0; 16];
        for i in 0..4 {
            e[i * 4 + i] = c;
        }
        let s = eigenvalues(&GoeMatrix::from_row_major(4, e).unwrap()).unwrap();
        assert!(s.values().iter().all(|&v| v == c));

        let a = 0.8;
        let s = eigenvalues(&GoeMatrix::from_row_major(2, vec![0.0, a, a, 0.0]).unwrap()).unwrap();
        assert!((s.values()[0] - a).abs() < 1e-15 && (s.values()[1] + a).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_and_misshaped() {
        let m = GoeMatrix::from_row_major(2, vec![1.0, 2.0, 2.0 + 1e-15, 1.0]).unwrap();
        assert_eq!(eigenvalues(&m), Err(Error::NotSymmetric { row: 0, col: 1 }));
        assert!(GoeMatrix::from_row_major(2, vec![1.0; 3]).is_err());
        assert!(GoeMatrix::from_row_major(0, vec![]).is_err());
    }

    #[test]
    fn agrees_with_jacobi() {
        let m = sample_goe(50, 77).unwrap();
        let ours = eigenvalues(&m).unwrap();
        let theirs = jacobi_eigenvalues(m.entries(), 50);
        for (a, b) in ours.values().iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn trace_and_frobenius_identities() {
        for seed in 0..3 {
            let m = sample_goe(200, seed).unwrap();
            let s = eigenvalues(&m).unwrap();
            let tr: f64 = s.values().iter().sum();
            let fr: f64 = s.values().iter().map(|x| x * x).sum();
            assert!((tr - m.trace()).abs() <= 1e-8 * m.trace().abs().max(1.0));
            assert!((fr - m.frobenius_sq()).abs() <= 1e-8 * m.frobenius_sq());
        }
    }

    #[test]
    fn rigidity_exact_match_is_zero() {
        let g = equal_mass_bins(5).unwrap();
        let vals: Vec<f64> = g.representatives().iter().flat_map(|&r| [r; 4]).collect();
        let s = Spectrum::from_values(vals).unwrap();
        assert_eq!(rigidity_error(&s, &g).unwrap(), 0.0);
        let s = Spectrum::from_values(vec![0.0; 21]).unwrap();
        assert!(matches!(
            rigidity_error(&s, &g),
            Err(Error::Precondition(_))
        ));
        let s = Spectrum::from_values(vec![]).unwrap();
        assert!(rigidity_error(&s, &g).is_err());
    }

    #[test]
    fn esd_of_quantile_grid_is_small() {
        let n = 400;
        let g = equal_mass_bins(n).unwrap();
        let s = Spectrum::from_values(g.representatives().to_vec()).unwrap();
        assert!(esd_distance(&s).unwrap() <= 1.0 / n as f64 + 1e-9);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = eigenvalues(&sample_goe(25, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 25);
        let back = Spectrum::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert!(Spectrum::read_csv("1.0\nabc\n".as_bytes()).is_err());
    }
}
