//! Adaptive Gauss–Kronrod quadrature.
//!
//! Used as an independent oracle for the closed forms in [`crate::semicircle`]:
//! nothing here knows about those formulas.

use std::f64::consts::FRAC_PI_2;

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// 7-point Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    est: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    if err <= tol || depth == 0 {
        return est;
    }
    let m = 0.5 * (a + b);
    let (left, left_err) = kronrod15(f, a, m);
    let (right, right_err) = kronrod15(f, m, b);
    adapt(f, a, m, left, left_err, 0.5 * tol, depth - 1)
        + adapt(f, m, b, right, right_err, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection with a G7/K15 error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (est, err) = kronrod15(&f, a, b);
    adapt(&f, a, b, est, err, tol, 50)
}

/// `∫ g(x) dμ_sc(x)` over `[-2, 2]` through `x = 2 sin θ`, which turns the
/// square-root edge of the density into the smooth weight `(2/π) cos² θ`.
pub fn semicircle_expectation<F: Fn(f64) -> f64>(g: F, tol: f64) -> f64 {
    integrate(
        |t: f64| {
            let c = t.cos();
            std::f64::consts::FRAC_2_PI * c * c * g(2.0 * t.sin())
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14);
        // [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn endpoint_log_singularity() {
        // ∫_0^1 ln x dx = -1
        let v = integrate(|x| x.ln(), 0.0, 1.0, 1e-12);
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn semicircle_moments() {
        assert!((semicircle_expectation(|_| 1.0, 1e-13) - 1.0).abs() < 1e-12);
        assert!(semicircle_expectation(|x| x, 1e-13).abs() < 1e-12);
        // second moment 1, fourth moment 2 (Catalan numbers)
        assert!((semicircle_expectation(|x| x * x, 1e-13) - 1.0).abs() < 1e-12);
        assert!((semicircle_expectation(|x| x.powi(4), 1e-13) - 2.0).abs() < 1e-12);
    }
}
