//! Certified operator-norm intervals.
//!
//! Lower bounds come from the left-regular representation compressed to
//! `ℓ²(ball(R))`: for any vector `v` supported on the ball, `‖λ(x)v‖/‖v‖` is
//! at most `‖x‖`. Power iteration on `T*T` drives `v` towards the top right
//! singular vector of the compression `T`, and the reported value is the
//! Rayleigh quotient minus a floating-point rounding allowance. Upper bounds
//! are the ℓ¹ bound and the length-band bound `Σ_d (d+1)·‖x_d‖₂`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{op_norm, CMatrix, CoefficientMap, GroupAlgebraElement, MatrixLevelElement, C64};
use crate::error::{Error, Result};
use crate::free_group::{ball_size, Enumerator, Word, DEFAULT_ENUMERATION_CAP};
use crate::sum::compensated_sum;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
pub const DEFAULT_RADIUS: usize = 8;

/// Parameters shared by every estimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormConfig {
    pub radius: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub cap: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            radius: DEFAULT_RADIUS.min(DEFAULT_ENUMERATION_CAP),
            tol: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl NormConfig {
    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::input(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// A certified interval `[lower, upper]` for an operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub radius: usize,
    pub iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub converged: bool,
}

impl NormEstimate {
    pub fn exact_zero(cfg: &NormConfig) -> Self {
        NormEstimate {
            lower: 0.0,
            upper: 0.0,
            radius: cfg.radius,
            iterations: 0,
            tolerance: cfg.tol,
            seed: cfg.seed,
            converged: true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Result of the power iteration: a certified lower bound plus metadata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sparse compression of `λ(u)` to `ℂⁿ ⊗ ℓ²(ball(R))`, with rows restricted to
/// `ball(R + support_radius(u))`. Indices are word ranks.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    level: usize,
    columns: usize,
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    block_idx: Vec<u32>,
    // n×n coefficient blocks, row-major
    blocks: Vec<Vec<C64>>,
    // Σ_s ‖u_s‖_F, bounds ‖|T|‖ for the rounding allowance
    abs_bound: f64,
    terms: usize,
}

impl TruncatedOperator {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Number of column words, `|ball(R)|`.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Number of row words, `|ball(R + r)|`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Nonzero entries of the column for the word of rank `col`, as
    /// `(row rank, coefficient block)`.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, &[C64])> {
        (self.col_ptr[col]..self.col_ptr[col + 1])
            .map(move |k| (self.row_idx[k] as usize, self.blocks[self.block_idx[k] as usize].as_slice()))
    }

    /// `y = T v`.
    pub fn apply(&self, v: &[C64], y: &mut [C64]) {
        let n = self.level;
        y.iter_mut().for_each(|z| *z = C64::default());
        for col in 0..self.columns {
            let vc = &v[col * n..(col + 1) * n];
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                let row = self.row_idx[k] as usize;
                let b = &self.blocks[self.block_idx[k] as usize];
                let yr = &mut y[row * n..(row + 1) * n];
                if n == 1 {
                    yr[0] += b[0] * vc[0];
                } else {
                    for i in 0..n {
                        let mut acc = C64::default();
                        for j in 0..n {
                            acc += b[i * n + j] * vc[j];
                        }
                        yr[i] += acc;
                    }
                }
            }
        }
    }

    /// `v = T* y`.
    pub fn apply_adjoint(&self, y: &[C64], v: &mut [C64]) {
        let n = self.level;
        for col in 0..self.columns {
            let vc = &mut v[col * n..(col + 1) * n];
            vc.iter_mut().for_each(|z| *z = C64::default());
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                let row = self.row_idx[k] as usize;
                let b = &self.blocks[self.block_idx[k] as usize];
                let yr = &y[row * n..(row + 1) * n];
                if n == 1 {
                    vc[0] += b[0].conj() * yr[0];
                } else {
                    for j in 0..n {
                        let mut acc = C64::default();
                        for i in 0..n {
                            acc += b[i * n + j].conj() * yr[i];
                        }
                        vc[j] += acc;
                    }
                }
            }
        }
    }

    /// Dense copy (testing and tiny radii only).
    pub fn to_dense(&self) -> CMatrix {
        let n = self.level;
        let mut m = CMatrix::zeros(self.rows * n, self.columns * n);
        for col in 0..self.columns {
            for (row, b) in self.column(col) {
                for i in 0..n {
                    for j in 0..n {
                        m[(row * n + i, col * n + j)] += b[i * n + j];
                    }
                }
            }
        }
        m
    }
}

/// Builds the compression of `λ(u)` to `ℓ²(ball(radius))`.
pub fn truncated_rep(u: &MatrixLevelElement, radius: usize, cap: usize) -> Result<TruncatedOperator> {
    let r = u.support_radius();
    let en = Enumerator::with_cap(cap);
    en.check(radius + r)?;
    let cols = en.ball(radius)?;
    let n = u.level();
    let terms: Vec<(&Word, &CMatrix)> = u.terms().collect();
    let blocks: Vec<Vec<C64>> = terms
        .iter()
        .map(|(_, m)| {
            let mut b = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    b.push(m[(i, j)]);
                }
            }
            b
        })
        .collect();
    let mut col_ptr = Vec::with_capacity(cols.len() + 1);
    let mut row_idx = Vec::with_capacity(cols.len() * terms.len());
    let mut block_idx = Vec::with_capacity(cols.len() * terms.len());
    col_ptr.push(0);
    for w in &cols {
        for (k, (s, _)) in terms.iter().enumerate() {
            let row = s.multiply(w).rank()?;
            row_idx.push(row as u32);
            block_idx.push(k as u32);
        }
        col_ptr.push(row_idx.len());
    }
    Ok(TruncatedOperator {
        level: n,
        columns: cols.len(),
        rows: ball_size(radius + r) as usize,
        col_ptr,
        row_idx,
        block_idx,
        blocks,
        abs_bound: u.terms().map(|(_, m)| m.norm()).sum(),
        terms: terms.len(),
    })
}

/// Neumaier-compensated `Σ |z|²`.
fn norm_sqr(v: &[C64]) -> f64 {
    compensated_sum(v.iter().map(|z| z.norm_sqr()))
}

fn random_start(len: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Krylov dimension of each Lanczos cycle.
const LANCZOS_STEPS: usize = 24;
/// Memory budget for the stored Krylov basis.
const LANCZOS_BASIS_BYTES: usize = 256 << 20;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn flush_tiny(v: &mut [C64]) {
    // decayed components only slow the arithmetic down (subnormals); dropping
    // them keeps every Rayleigh quotient a valid bound
    for z in v.iter_mut() {
        if z.norm_sqr() < 1e-200 {
            *z = C64::default();
        }
    }
}

/// Certified lower bound for the largest singular value of `op`.
///
/// Explicitly restarted Lanczos on `T*T`: each cycle builds a Krylov basis
/// with full reorthogonalization, restarts from the top Ritz vector `u`, and
/// evaluates `‖Tu‖²/‖u‖²` directly. Only these directly evaluated quotients
/// enter the bound, so the result does not depend on the accuracy of the
/// Lanczos recurrence. Iterations count applications of `T*T`; the run stops
/// once `‖T*Tu − ρu‖ ≤ tol·ρ‖u‖`.
pub fn top_singular_lower(op: &TruncatedOperator, cfg: &NormConfig) -> Result<LowerBound> {
    cfg.validate()?;
    if op.terms == 0 || op.columns == 0 {
        return Ok(LowerBound { value: 0.0, iterations: 0, converged: true });
    }
    let dim = op.columns * op.level;
    let steps = (LANCZOS_BASIS_BYTES / (dim * std::mem::size_of::<C64>())).clamp(4, LANCZOS_STEPS).min(dim);
    let mut y = vec![C64::default(); op.rows * op.level];
    let mut w = vec![C64::default(); dim];
    let mut u = random_start(dim, cfg.seed);

    let mut best = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    let max_iter = cfg.max_iterations.max(1);
    while iterations < max_iter {
        let uu = norm_sqr(&u);
        if uu == 0.0 {
            converged = true;
            break;
        }
        let un = uu.sqrt();
        u.iter_mut().for_each(|z| *z /= un);
        let uu = norm_sqr(&u);

        // direct Rayleigh quotient and residual at the current vector
        op.apply(&u, &mut y);
        let rho = norm_sqr(&y) / uu;
        best = best.max(rho);
        op.apply_adjoint(&y, &mut w);
        iterations += 1;
        let res = compensated_sum(w.iter().zip(&u).map(|(wi, ui)| (wi - ui * rho).norm_sqr()));
        if rho == 0.0 || (res / uu).sqrt() <= cfg.tol * rho {
            converged = true;
            break;
        }

        // Lanczos cycle from u, reusing w = T*T u
        let mut basis: Vec<Vec<C64>> = vec![u.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        let mut first = true;
        while alpha.len() < steps && iterations < max_iter {
            if !first {
                op.apply(basis.last().expect("nonempty"), &mut y);
                op.apply_adjoint(&y, &mut w);
                iterations += 1;
            }
            first = false;
            let q = basis.last().expect("nonempty");
            alpha.push(dot(q, &w).re);
            // full reorthogonalization, applied twice
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= bi * c;
                    }
                }
            }
            let b = norm_sqr(&w).sqrt();
            if alpha.len() == steps || b <= 1e-12 * alpha.iter().fold(0.0f64, |m, a| m.max(a.abs())) {
                break;
            }
            beta.push(b);
            let mut next: Vec<C64> = w.iter().map(|z| z / b).collect();
            flush_tiny(&mut next);
            basis.push(next);
        }
        let m = alpha.len();
        let tri = nalgebra::DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(tri);
        let top = (0..m).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).expect("nonempty");
        let s = eig.eigenvectors.column(top);
        u.iter_mut().for_each(|z| *z = C64::default());
        for (k, b) in basis.iter().enumerate() {
            let c = s[k];
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui += bi * c;
            }
        }
        flush_tiny(&mut u);
    }

    // Rounding allowance: each entry of the computed T u carries at most
    // (terms·n + 2)·ε·Σ‖u_s‖_F·|u| of error; the compensated norms add O(ε).
    let eps = f64::EPSILON;
    let entry_err = (op.terms * op.level + 2) as f64 * eps * op.abs_bound;
    let value = (best.sqrt() * (1.0 - 4.0 * eps) - entry_err).max(0.0);
    Ok(LowerBound { value, iterations, converged })
}

/// Certified lower bound for `‖x‖` in the reduced C*-algebra.
pub fn norm_lower(x: &GroupAlgebraElement, cfg: &NormConfig) -> Result<LowerBound> {
    matrix_norm_lower(&x.to_matrix_level(), cfg)
}

pub fn matrix_norm_lower(u: &MatrixLevelElement, cfg: &NormConfig) -> Result<LowerBound> {
    cfg.validate()?;
    if u.is_empty() {
        return Ok(LowerBound { value: 0.0, iterations: 0, converged: true });
    }
    let op = truncated_rep(u, cfg.radius, cfg.cap)?;
    top_singular_lower(&op, cfg)
}

/// `min(ℓ¹, Σ_d (d+1)·‖P_d x‖₂)`.
pub fn norm_upper(x: &GroupAlgebraElement) -> f64 {
    let l1 = x.l1_norm();
    let band: f64 = (0..=x.support_radius())
        .map(|d| (d as f64 + 1.0) * x.length_component(d).l2_norm())
        .sum();
    l1.min(band)
}

/// Matrix-level analogue of [`norm_upper`] using operator norms of the coefficients.
pub fn matrix_norm_upper(u: &MatrixLevelElement) -> f64 {
    let op_norms: Vec<(usize, f64)> = u.terms().map(|(w, m)| (w.len(), op_norm(m))).collect();
    let l1: f64 = op_norms.iter().map(|(_, v)| v).sum();
    let r = u.support_radius();
    let mut band_sq = vec![0.0f64; r + 1];
    for (d, v) in &op_norms {
        band_sq[*d] += v * v;
    }
    let band: f64 = band_sq
        .iter()
        .enumerate()
        .map(|(d, s)| (d as f64 + 1.0) * s.sqrt())
        .sum();
    l1.min(band)
}

fn combine(lower: LowerBound, upper: f64, cfg: &NormConfig) -> NormEstimate {
    NormEstimate {
        // the lower bound can only exceed the upper one by rounding in the upper bound
        lower: lower.value.min(upper),
        upper,
        radius: cfg.radius,
        iterations: lower.iterations,
        tolerance: cfg.tol,
        seed: cfg.seed,
        converged: lower.converged,
    }
}

pub fn norm_interval(x: &GroupAlgebraElement, cfg: &NormConfig) -> Result<NormEstimate> {
    let lower = norm_lower(x, cfg)?;
    Ok(combine(lower, norm_upper(x), cfg))
}

pub fn matrix_level_norm(u: &MatrixLevelElement, cfg: &NormConfig) -> Result<NormEstimate> {
    let lower = matrix_norm_lower(u, cfg)?;
    Ok(combine(lower, matrix_norm_upper(u), cfg))
}

/// Sampling plan for [`MapSampler::lower_bound`].
#[derive(Clone, Copy, Debug)]
pub struct MapSampler {
    pub level: usize,
    pub samples: usize,
    /// Longest word placed in a sample's support.
    pub max_word_len: usize,
}

impl MapSampler {
    pub fn new(level: usize, samples: usize) -> Self {
        MapSampler { level, samples, max_word_len: 3 }
    }

    pub fn with_max_word_len(mut self, len: usize) -> Self {
        self.max_word_len = len;
        self
    }

    /// Deterministic sample set: structured sphere-supported elements for
    /// every length up to `max_word_len`, then `samples` random sparse ones.
    pub fn sample_elements(&self, seed: u64) -> Result<Vec<MatrixLevelElement>> {
        let n = self.level;
        let en = Enumerator::with_cap(self.max_word_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5A3D_1E5E_0001);
        let mut out = Vec::new();
        let identity = CMatrix::identity(n, n);
        for d in 0..=self.max_word_len {
            let sphere = en.sphere(d)?;
            out.push(MatrixLevelElement::from_terms(n, [(sphere[0].clone(), identity.clone())])?);
            let chosen: Vec<Word> = if sphere.len() <= 36 {
                sphere
            } else {
                (0..12).map(|_| sphere[rng.gen_range(0..sphere.len())].clone()).collect()
            };
            let ones = chosen.iter().map(|w| (w.clone(), identity.clone()));
            out.push(MatrixLevelElement::from_terms(n, ones)?);
            let random = chosen.iter().map(|w| (w.clone(), random_matrix(&mut rng, n)));
            out.push(MatrixLevelElement::from_terms(n, random)?);
        }
        let max_rank = ball_size(self.max_word_len) as u64;
        for _ in 0..self.samples {
            let k = rng.gen_range(1..=6);
            let terms: Vec<(Word, CMatrix)> = (0..k)
                .map(|_| (Word::unrank(rng.gen_range(0..max_rank)), random_matrix(&mut rng, n)))
                .collect();
            out.push(MatrixLevelElement::from_terms(n, terms)?);
        }
        Ok(out)
    }

    /// Empirical lower bound for the level-n norm of a coefficient map: the
    /// largest ratio of the certified lower bound of `map(u)` to the certified
    /// upper bound of `u` over the sample set.
    pub fn lower_bound<M: CoefficientMap + ?Sized>(&self, map: &M, cfg: &NormConfig) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::input("at least one sample is required"));
        }
        let samples = self.sample_elements(cfg.seed)?;
        let ratios = samples
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                let denom = matrix_norm_upper(u);
                if denom == 0.0 {
                    return Ok(0.0);
                }
                let image = u.apply_map(map);
                let sample_cfg = cfg.with_seed(derive_seed(cfg.seed, i as u64));
                let num = matrix_norm_lower(&image, &sample_cfg)?.value;
                Ok(num / denom)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(ratios.into_iter().fold(0.0, f64::max))
    }
}

/// Sampled lower bound for the level-`level` norm of `map`.
pub fn map_norm_lower<M: CoefficientMap + ?Sized>(
    map: &M,
    level: usize,
    samples: usize,
    cfg: &NormConfig,
) -> Result<f64> {
    MapSampler::new(level, samples).lower_bound(map, cfg)
}

pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub(crate) fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::Word;

    fn el(terms: &[(&str, f64)]) -> GroupAlgebraElement {
        GroupAlgebraElement::from_real_terms(terms.iter().copied()).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn gen_sum() -> GroupAlgebraElement {
        el(&[("a", 1.0), ("A", 1.0), ("b", 1.0), ("B", 1.0)])
    }

    /// Top singular value of the dense truncation via a full SVD; independent
    /// of the power iteration.
    fn dense_top_singular(x: &MatrixLevelElement, radius: usize) -> f64 {
        let op = truncated_rep(x, radius, 12).unwrap();
        op.to_dense().singular_values().iter().fold(0.0f64, |a, &b| a.max(b))
    }

    #[test]
    fn truncated_rep_examples() {
        let e = el(&[("e", 1.0)]).to_matrix_level();
        for r in 0..4 {
            let op = truncated_rep(&e, r, 12).unwrap();
            let d = op.to_dense();
            assert_eq!(d, CMatrix::identity(op.rows(), op.columns()));
            assert_eq!(op.columns() as u128, ball_size(r));
        }
        let a = el(&[("a", 1.0)]).to_matrix_level();
        let op = truncated_rep(&a, 0, 12).unwrap();
        assert_eq!(op.columns(), 1);
        let col: Vec<_> = op.column(0).map(|(r, b)| (r, b[0])).collect();
        assert_eq!(col, vec![(Word::parse("a").unwrap().rank().unwrap() as usize, c(1.0))]);
        assert!(matches!(truncated_rep(&a, 12, 12), Err(Error::Capacity(_))));
    }

    #[test]
    fn unitary_has_norm_one() {
        for s in ["", "a", "bAb", "BBa"] {
            for r in [0, 2, 5] {
                let cfg = NormConfig::default().with_radius(r);
                let est = norm_interval(&GroupAlgebraElement::basis(Word::parse(s).unwrap()), &cfg).unwrap();
                assert_eq!(est.upper, 1.0);
                assert!((est.lower - 1.0).abs() < 1e-12, "{s} at {r}: {}", est.lower);
            }
        }
    }

    #[test]
    fn zero_element() {
        let cfg = NormConfig::default();
        let est = norm_interval(&GroupAlgebraElement::zero(), &cfg).unwrap();
        assert_eq!((est.lower, est.upper), (0.0, 0.0));
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(norm_upper(&gen_sum()), 4.0);
        assert_eq!(norm_upper(&el(&[("e", 1.0)])), 1.0);
        let x = GroupAlgebraElement::from_terms([(Word::parse("ab").unwrap(), C64::new(3.0, -4.0))]);
        assert!((norm_upper(&x) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn power_iteration_matches_dense_svd() {
        let cases = [
            gen_sum(),
            el(&[("a", 1.0), ("A", 1.0)]),
            el(&[("e", 0.5), ("ab", -1.0), ("Ba", 2.0)]),
        ];
        for x in &cases {
            let u = x.to_matrix_level();
            for r in [1, 2, 3] {
                let exact = dense_top_singular(&u, r);
                let lb = matrix_norm_lower(&u, &NormConfig::default().with_radius(r)).unwrap();
                assert!(lb.value <= exact + 1e-12);
                assert!(exact - lb.value < 1e-6, "r={r}: {} vs {exact}", lb.value);
            }
        }
    }

    #[test]
    fn matrix_level_examples() {
        let cfg = NormConfig::default().with_radius(4);
        let a = el(&[("a", 1.0)]);
        let b = el(&[("b", 1.0)]);
        let u = MatrixLevelElement::tensor(&CMatrix::identity(2, 2), &a).unwrap();
        let est = matrix_level_norm(&u, &cfg).unwrap();
        assert_eq!(est.upper, 1.0);
        assert!((est.lower - 1.0).abs() < 1e-12);

        let e11 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let e22 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let e12 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let diag = MatrixLevelElement::tensor(&e11, &a)
            .unwrap()
            .add(&MatrixLevelElement::tensor(&e22, &b).unwrap())
            .unwrap();
        let est = matrix_level_norm(&diag, &cfg).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-9, "{est:?}");

        // row of two free unitaries: norm √2, attained on every truncation
        let row = MatrixLevelElement::tensor(&e11, &a)
            .unwrap()
            .add(&MatrixLevelElement::tensor(&e12, &b).unwrap())
            .unwrap();
        let exact = dense_top_singular(&row, 2);
        assert!((exact - 2f64.sqrt()).abs() < 1e-12);
        let est = matrix_level_norm(&row, &cfg).unwrap();
        assert!((est.lower - 2f64.sqrt()).abs() < 1e-9, "{est:?}");
        assert!(est.upper >= 2f64.sqrt());
    }

    #[test]
    fn sandwich_monotonicity_and_symmetry() {
        let xs = [
            gen_sum(),
            el(&[("a", 1.0), ("bb", -0.5), ("e", 0.25)]),
            el(&[("aB", 2.0), ("Ab", 1.0)]),
        ];
        for x in &xs {
            let upper = norm_upper(x);
            let mut prev = 0.0;
            for r in 0..=6 {
                let cfg = NormConfig::default().with_radius(r);
                let lb = norm_lower(x, &cfg).unwrap().value;
                assert!(lb <= upper + 1e-12);
                assert!(lb >= prev - 1e-7, "r={r}: {lb} < {prev}");
                prev = lb;
                let lb_adj = norm_lower(&x.adjoint(), &cfg).unwrap().value;
                assert!((lb - lb_adj).abs() < 1e-6, "{lb} vs {lb_adj}");
            }
        }
    }

    #[test]
    fn scaling_is_homogeneous() {
        let x = el(&[("a", 1.0), ("bA", -0.5)]);
        let cfg = NormConfig::default().with_radius(4);
        let base = norm_interval(&x, &cfg).unwrap();
        let c = C64::new(-1.5, 2.0);
        let scaled = norm_interval(&x.scale(c), &cfg).unwrap();
        assert!((scaled.lower - 2.5 * base.lower).abs() < 1e-7);
        assert!((scaled.upper - 2.5 * base.upper).abs() < 1e-12);
    }

    #[test]
    fn map_norm_examples() {
        let cfg = NormConfig::default().with_radius(3).with_max_iterations(500);
        let id = |_: &Word| 1.0;
        let zero = |_: &Word| 0.0;
        let band1 = |w: &Word| if w.len() == 1 { 1.0 } else { 0.0 };
        assert!(map_norm_lower(&id, 2, 4, &cfg).unwrap() >= 1.0 - 1e-8);
        assert_eq!(map_norm_lower(&zero, 1, 4, &cfg).unwrap(), 0.0);
        assert!(map_norm_lower(&band1, 1, 2, &cfg).unwrap() >= 1.0 - 1e-12);
        assert!(map_norm_lower(&id, 1, 0, &cfg).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = MapSampler::new(2, 5);
        assert_eq!(s.sample_elements(7).unwrap(), s.sample_elements(7).unwrap());
    }
}
