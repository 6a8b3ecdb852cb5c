//! Auerbach systems for finite-dimensional normed spaces.
//!
//! The space is the span of `d ≤ 8` vectors in `ℝ^D` under a norm oracle on
//! `ℝ^D`. Starting from the normalized input basis, the basis vector whose
//! dual functional has the largest norm is repeatedly replaced by a norming
//! witness of that functional. By Cramer's rule each replacement multiplies
//! `|det|` by the dual norm, so the ascent terminates once every dual norm is
//! within `1 + eps`.
//!
//! Dual norms are evaluated as `1 / min ‖y_j + Σ_{k≠j} a_k y_k‖`, a convex
//! minimization solved by pattern search with random directions. The result
//! is a sampled value: it never exceeds the true dual norm.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`auerbach`].
pub const MAX_AUERBACH_DIM: usize = 8;

/// A norm on `ℝ^D`.
pub trait NormOracle: Sync {
    fn norm(&self, v: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> NormOracle for F {
    fn norm(&self, v: &[f64]) -> f64 {
        self(v)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SupNorm;

#[derive(Clone, Copy, Debug, Default)]
pub struct L1Norm;

#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanNorm;

impl NormOracle for SupNorm {
    fn norm(&self, v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl NormOracle for L1Norm {
    fn norm(&self, v: &[f64]) -> f64 {
        v.iter().map(|x| x.abs()).sum()
    }
}

impl NormOracle for EuclideanNorm {
    fn norm(&self, v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Search budget for [`auerbach_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuerbachConfig {
    pub eps: f64,
    /// Replacement steps per start.
    pub max_steps: usize,
    /// Additional random starts tried when the input basis does not converge.
    pub restarts: usize,
    /// Random starting points per dual-norm minimization.
    pub dual_starts: usize,
    pub seed: u64,
}

impl AuerbachConfig {
    pub fn new(eps: f64) -> Self {
        AuerbachConfig { eps, max_steps: 400, restarts: 8, dual_starts: 6, seed: 0 }
    }
}

/// A biorthogonal system `(y_j, y*_j)` on the span of the input basis `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuerbachSystem {
    /// `y_j` in `ℝ^D`.
    pub vectors: Vec<Vec<f64>>,
    /// Row `j` holds the coordinates of `y_j` in the input basis.
    pub coordinates: DMatrix<f64>,
    /// Row `j` holds `y*_j` on input-basis coordinates: `y*_j(Σ c_k b_k) = Σ F_jk c_k`.
    pub functionals: DMatrix<f64>,
    pub vector_norms: Vec<f64>,
    /// Sampled dual norms `‖y*_j‖`.
    pub dual_norms: Vec<f64>,
    /// `max_j ‖y*_j‖ − 1`, floored at 0.
    pub achieved_eps: f64,
    pub converged: bool,
}

impl AuerbachSystem {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `y*_j` applied to the vector with input-basis coordinates `c`.
    pub fn apply_functional(&self, j: usize, c: &[f64]) -> f64 {
        self.functionals.row(j).iter().zip(c).map(|(f, x)| f * x).sum()
    }

    /// `max_{i,j} |y*_j(y_i) − δ_ij|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let p = &self.functionals * self.coordinates.transpose();
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).abs());
            }
        }
        worst
    }
}

struct Space<'a> {
    basis: &'a [Vec<f64>],
    ambient: usize,
    oracle: &'a dyn NormOracle,
}

impl Space<'_> {
    fn embed(&self, c: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.ambient];
        for (ck, bk) in c.iter().zip(self.basis) {
            for (vi, bi) in v.iter_mut().zip(bk) {
                *vi += ck * bi;
            }
        }
        v
    }

    fn norm(&self, c: &[f64]) -> f64 {
        self.oracle.norm(&self.embed(c))
    }

    /// Coordinates scaled so the norm is at most 1, never above it by rounding.
    fn normalize(&self, c: &[f64]) -> Vec<f64> {
        let n = self.norm(c);
        let mut out: Vec<f64> = c.iter().map(|x| x / n).collect();
        while self.norm(&out) > 1.0 {
            out.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
        }
        out
    }
}

fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Minimizes `h(a) = ‖Σ_k a_k y_k‖` over `a` with `a_j = 1`, where the `y_k`
/// are given by rows of `coords`. Returns `(min, minimizer)`.
fn min_with_fixed_coordinate<R: Rng>(
    space: &Space<'_>,
    coords: &DMatrix<f64>,
    j: usize,
    starts: usize,
    rng: &mut R,
) -> (f64, Vec<f64>) {
    let d = coords.nrows();
    let h = |a: &[f64]| {
        let c = coords.transpose() * DVector::from_column_slice(a);
        space.norm(c.as_slice())
    };
    let mut best_a = vec![0.0; d];
    best_a[j] = 1.0;
    let mut best = h(&best_a);
    if d == 1 {
        return (best, best_a);
    }
    for start in 0..=starts {
        let mut a = if start == 0 {
            best_a.clone()
        } else {
            let mut g = random_vector(rng, d);
            g[j] = 1.0;
            g
        };
        let mut val = h(&a);
        let mut step = 0.5;
        let mut rounds = 0;
        while step > 1e-13 && rounds < 20_000 {
            rounds += 1;
            let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(4 * d);
            for k in (0..d).filter(|&k| k != j) {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                dirs.push(e.clone());
                e[k] = -1.0;
                dirs.push(e);
            }
            for _ in 0..2 * d {
                let mut g = random_vector(rng, d);
                g[j] = 0.0;
                let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if len > 0.0 {
                    dirs.push(g.iter().map(|x| x / len).collect());
                }
            }
            let mut improved = false;
            for dir in &dirs {
                let cand: Vec<f64> = a.iter().zip(dir).map(|(x, y)| x + step * y).collect();
                let v = h(&cand);
                if v < val {
                    a = cand;
                    val = v;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if val < best {
            best = val;
            best_a = a;
        }
    }
    (best, best_a)
}

/// `F = (Cᵀ)⁻¹`, so that `F Cᵀ = I`, polished by one Newton–Schulz step.
fn biorthogonal_functionals(coords: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let a = coords.transpose();
    let x = a.clone().try_inverse()?;
    let d = coords.nrows();
    let two = DMatrix::<f64>::identity(d, d) * 2.0;
    Some(&x * (two - &a * &x))
}

/// Sampled dual norms of the functionals biorthogonal to `coords`, with their
/// norming witnesses in `coords`-row coordinates.
fn dual_norms<R: Rng>(
    space: &Space<'_>,
    coords: &DMatrix<f64>,
    starts: usize,
    rng: &mut R,
) -> Vec<(f64, Vec<f64>)> {
    (0..coords.nrows())
        .map(|j| {
            let (m, a) = min_with_fixed_coordinate(space, coords, j, starts, rng);
            (1.0 / m, a)
        })
        .collect()
}

struct Ascent {
    coords: DMatrix<f64>,
    duals: Vec<f64>,
    converged: bool,
}

fn ascend<R: Rng>(space: &Space<'_>, start: DMatrix<f64>, cfg: &AuerbachConfig, rng: &mut R) -> Ascent {
    let d = start.nrows();
    let mut coords = start;
    for j in 0..d {
        let row: Vec<f64> = coords.row(j).iter().copied().collect();
        coords.set_row(j, &DVector::from_vec(space.normalize(&row)).transpose());
    }
    let mut duals = dual_norms(space, &coords, cfg.dual_starts, rng);
    for _ in 0..cfg.max_steps {
        let (j, (worst, a)) = duals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(j, v)| (j, v.clone()))
            .expect("nonempty");
        if worst <= 1.0 + cfg.eps {
            return Ascent { coords, duals: duals.into_iter().map(|x| x.0).collect(), converged: true };
        }
        let witness = coords.transpose() * DVector::from_vec(a);
        let replaced = space.normalize(witness.as_slice());
        coords.set_row(j, &DVector::from_vec(replaced).transpose());
        duals = dual_norms(space, &coords, cfg.dual_starts, rng);
    }
    let converged = duals.iter().all(|x| x.0 <= 1.0 + cfg.eps);
    Ascent { coords, duals: duals.into_iter().map(|x| x.0).collect(), converged }
}

/// Auerbach system for the span of `basis` under `oracle`, with the default
/// search budget.
pub fn auerbach(basis: &[Vec<f64>], oracle: &dyn NormOracle, eps: f64) -> Result<AuerbachSystem> {
    auerbach_with(basis, oracle, &AuerbachConfig::new(eps))
}

pub fn auerbach_with(basis: &[Vec<f64>], oracle: &dyn NormOracle, cfg: &AuerbachConfig) -> Result<AuerbachSystem> {
    let d = basis.len();
    if d == 0 || d > MAX_AUERBACH_DIM {
        return Err(Error::input(format!("dimension {d} outside 1..={MAX_AUERBACH_DIM}")));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {}", cfg.eps)));
    }
    let ambient = basis[0].len();
    if ambient < d || basis.iter().any(|b| b.len() != ambient) {
        return Err(Error::input("basis vectors must share an ambient dimension at least their count"));
    }
    let b = DMatrix::from_fn(d, ambient, |r, c| basis[r][c]);
    let sv = b.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), s| (hi.max(*s), lo.min(*s)));
    if !(smin > 1e-12 * smax) {
        return Err(Error::input("basis vectors are linearly dependent"));
    }
    let space = Space { basis, ambient, oracle };
    if basis.iter().any(|v| !(oracle.norm(v) > 0.0)) {
        return Err(Error::input("norm oracle vanishes on a basis vector"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = ascend(&space, DMatrix::identity(d, d), cfg, &mut rng);
    let mut restart = 0;
    while !best.converged && restart < cfg.restarts {
        restart += 1;
        let start = DMatrix::<f64>::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        if start.determinant().abs() < 1e-6 {
            continue;
        }
        let run = ascend(&space, start, cfg, &mut rng);
        let worst = |a: &Ascent| a.duals.iter().fold(0.0f64, |m, x| m.max(*x));
        if run.converged || worst(&run) < worst(&best) {
            best = run;
        }
    }

    let functionals = biorthogonal_functionals(&best.coords).ok_or_else(|| Error::input("Auerbach search produced a singular system"))?;
    let vectors: Vec<Vec<f64>> = (0..d)
        .map(|j| space.embed(&best.coords.row(j).iter().copied().collect::<Vec<_>>()))
        .collect();
    let vector_norms = vectors.iter().map(|v| oracle.norm(v)).collect();
    let achieved_eps = (best.duals.iter().fold(0.0f64, |m, x| m.max(*x)) - 1.0).max(0.0);
    Ok(AuerbachSystem {
        vectors,
        coordinates: best.coords,
        functionals,
        vector_norms,
        dual_norms: best.duals,
        achieved_eps,
        converged: best.converged,
    })
}

/// Sampled dual norm of the functional with input-basis coordinates `f` on the
/// span of `basis`.
pub fn dual_norm_sampled(basis: &[Vec<f64>], oracle: &dyn NormOracle, f: &[f64], seed: u64) -> Result<f64> {
    let d = basis.len();
    if f.len() != d || d == 0 {
        return Err(Error::input("functional and basis dimensions differ"));
    }
    let ambient = basis[0].len();
    let space = Space { basis, ambient, oracle };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // sup |f·c| / ‖c‖ = 1 / min { ‖c‖ : f·c = 1 }; pick the pivot coordinate with the largest |f_j|
    let (j, fj) = f
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(j, v)| (j, *v))
        .expect("nonempty");
    if fj == 0.0 {
        return Ok(0.0);
    }
    // c = a_j e_j + Σ_{k≠j} a_k (e_k − (f_k/f_j) e_j) keeps f·c = a_j f_j
    let coords = DMatrix::from_fn(d, d, |r, c| {
        if r == j {
            if c == j { 1.0 / fj } else { 0.0 }
        } else if c == r {
            1.0
        } else if c == j {
            -f[r] / fj
        } else {
            0.0
        }
    });
    let (m, _) = min_with_fixed_coordinate(&space, &coords, j, 8, &mut rng);
    Ok(1.0 / m)
}

/// Exact dual norm of the functional with input-basis coordinates `f` on
/// `span(basis) ⊂ ℓ^∞_D`: the maximum of `|f·c|` over the vertices of the
/// polytope `{c : |Σ_k c_k b_k(i)| ≤ 1 for all i}`.
pub fn sup_dual_norm_exact(basis: &[Vec<f64>], f: &[f64]) -> Result<f64> {
    let d = basis.len();
    if d == 0 || f.len() != d {
        return Err(Error::input("functional and basis dimensions differ"));
    }
    let ambient = basis[0].len();
    let rows: Vec<DVector<f64>> = (0..ambient).map(|i| DVector::from_fn(d, |k, _| basis[k][i])).collect();
    let fv = DVector::from_column_slice(f);
    let mut best = 0.0f64;
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, c| rows[subset[r]][c]);
        if let Some(inv) = a.try_inverse() {
            for signs in 0..(1u32 << d) {
                let rhs = DVector::from_fn(d, |r, _| if signs & (1 << r) != 0 { -1.0 } else { 1.0 });
                let c = &inv * rhs;
                if rows.iter().all(|row| row.dot(&c).abs() <= 1.0 + 1e-12) {
                    best = best.max(fv.dot(&c).abs());
                }
            }
        }
        // next d-subset of 0..ambient in lexicographic order
        let Some(pos) = (0..d).rev().find(|&i| subset[i] < ambient - d + i) else { break };
        subset[pos] += 1;
        for i in pos + 1..d {
            subset[i] = subset[i - 1] + 1;
        }
    }
    Ok(best)
}
