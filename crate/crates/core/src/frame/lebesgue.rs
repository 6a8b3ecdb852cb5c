//! Lebesgue constants `L_K = (1/2π)∫|D_K(θ)|dθ` of the Dirichlet kernel
//! `D_K(θ) = sin((K+½)θ)/sin(θ/2)`.
//!
//! `L_K` is the norm of the symmetric partial sum `Σ_{k=0}^K P_k` on the
//! subalgebra generated by one free generator (`C(𝕋)`), and it grows like
//! `(4/π²) ln K`: the length-ordered rearrangement of the frame expansion is
//! not uniformly bounded, so the frame is not unconditional.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 48;

// Gauss–Kronrod 7/15 abscissae and weights
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of an adaptive integration with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> QuadratureResult {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol || (b - a).abs() < 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
        return QuadratureResult { value, error_estimate: err, converged: err <= tol };
    }
    if depth >= MAX_DEPTH {
        return QuadratureResult { value, error_estimate: err, converged: false };
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, a, mid, 0.5 * tol, depth + 1);
    let right = adaptive(f, mid, b, 0.5 * tol, depth + 1);
    QuadratureResult {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
        converged: left.converged && right.converged,
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadratureResult {
    adaptive(&f, a, b, tol, 0)
}

/// Dirichlet kernel `D_K(θ) = Σ_{|j|≤K} e^{ijθ}`.
pub fn dirichlet_kernel(k: usize, theta: f64) -> f64 {
    let half = 0.5 * theta;
    let s = half.sin();
    if s.abs() < 1e-8 {
        // D_K is even and smooth at 0; use the cosine sum there
        return 1.0 + 2.0 * (1..=k).map(|j| (j as f64 * theta).cos()).sum::<f64>();
    }
    ((k as f64 + 0.5) * theta).sin() / s
}

/// `L_K` by adaptive quadrature over `[0, π]`, split at the sign changes of
/// `D_K` so that every panel integrates a smooth function.
pub fn lebesgue_constant(k: usize, quad_tol: f64) -> Result<QuadratureResult> {
    if k == 0 {
        return Err(Error::input("K must be at least 1"));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::input(format!("quadrature tolerance must be positive, got {quad_tol}")));
    }
    let period = 2.0 * PI / (2 * k + 1) as f64;
    let mut nodes: Vec<f64> = (0..=k).map(|j| j as f64 * period).collect();
    nodes.push(PI);
    let panels = nodes.len() - 1;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    for w in nodes.windows(2) {
        let r = integrate(|t| dirichlet_kernel(k, t), w[0], w[1], quad_tol / panels as f64);
        total += r.value.abs();
        err += r.error_estimate;
        converged &= r.converged;
    }
    Ok(QuadratureResult { value: total / PI, error_estimate: err / PI, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form `L_K = 1/(2K+1) + (2/π) Σ_{j=1}^K tan(πj/(2K+1))/j`.
    fn lebesgue_closed_form(k: usize) -> f64 {
        let n = (2 * k + 1) as f64;
        1.0 / n + (2.0 / PI) * (1..=k).map(|j| (PI * j as f64 / n).tan() / j as f64).sum::<f64>()
    }

    #[test]
    fn gauss_kronrod_integrates_polynomials() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-13);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-12 && r.converged);
    }

    #[test]
    fn classical_values() {
        let l1 = lebesgue_constant(1, 1e-12).unwrap();
        assert!((l1.value - (1.0 / 3.0 + 2.0 * 3f64.sqrt() / PI)).abs() < 1e-10);
        assert!((l1.value - 1.435991).abs() < 1e-6);
        assert!((lebesgue_constant(3, 1e-12).unwrap().value - 1.778322).abs() < 1e-6);
    }

    #[test]
    fn matches_closed_form() {
        for k in [1, 2, 3, 5, 8, 16, 33, 64, 100] {
            let q = lebesgue_constant(k, 1e-11).unwrap();
            assert!(q.converged);
            assert!((q.value - lebesgue_closed_form(k)).abs() < 1e-9, "K={k}");
        }
    }

    #[test]
    fn logarithmic_growth() {
        let mut prev = 0.0;
        for k in 8..=64 {
            let l = lebesgue_constant(k, 1e-10).unwrap().value;
            let c = l - 4.0 / (PI * PI) * (k as f64).ln();
            assert!((1.0..=1.4).contains(&c), "K={k}: {c}");
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn kernel_agrees_with_cosine_sum() {
        for k in [1, 4, 9] {
            for t in [1e-9, 0.3, 1.7, 3.0] {
                let direct = 1.0 + 2.0 * (1..=k).map(|j| (j as f64 * t).cos()).sum::<f64>();
                assert!((dirichlet_kernel(k, t) - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lebesgue_constant(0, 1e-8).is_err());
        assert!(lebesgue_constant(3, 0.0).is_err());
    }
}
