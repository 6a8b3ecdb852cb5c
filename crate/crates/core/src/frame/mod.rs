//! The explicit cb-frame `(x_n, f_n) = (λ_{φ(n)}, a_n δ_{φ(n)})` of the
//! reduced free-group C*-algebra.
//!
//! Block `k` lists the `m_k = 2·3^k − 1` terms of `Ψ_k` (the words of
//! `ball(k)` in word order: `ball(k−1)` first, then `sphere(k)`), each with
//! coefficient `psi_symbol(k, |s|)`. Every term is cloned `m_k²` times with its
//! functional divided by `m_k²`. Summing a whole block therefore gives back
//! `Ψ_k`, and the blocks telescope to `Φ_{1/√K,K}`.

pub mod index;
pub mod lebesgue;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{CoefficientMap, GroupAlgebraElement, MatrixLevelElement, C64};
use crate::error::{Error, Result};
use crate::free_group::{Enumerator, Word};
use crate::multipliers::{psi_symbol, schedule_cb_upper, schedule_sup_bound, schedule_symbol, DEFAULT_SCHEDULE_KMAX};
use crate::norms::{norm_lower, norm_upper, matrix_norm_lower, matrix_norm_upper, NormConfig, NormEstimate};

pub use index::{BlockIndexer, FrameIndex, DEFAULT_BLOCK_CAP};
pub use lebesgue::{lebesgue_constant, QuadratureResult};

/// One frame term: `x_n = λ_word`, `f_n = coefficient·δ_word`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameTerm {
    pub index: FrameIndex,
    pub word: Word,
    pub coefficient: f64,
}

/// Both bounds on `‖S_m‖_cb`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialSumBound {
    /// `3·sup_k ‖Φ_{1/√k,k}‖_cb + 1`, independent of m.
    pub global: f64,
    /// `‖Φ_{k−1}‖ + (p/m_k²)·‖Ψ_k‖ + q·max|ψ_k|/m_k²` for the block containing m.
    pub m_specific: f64,
}

impl PartialSumBound {
    pub fn best(&self) -> f64 {
        self.global.min(self.m_specific)
    }
}

/// The frame for `C*_r(F₂)` under the default schedule.
#[derive(Clone, Debug)]
pub struct FreeGroupFrame {
    indexer: BlockIndexer,
    enumerator: Enumerator,
}

impl Default for FreeGroupFrame {
    fn default() -> Self {
        Self::with_block_cap(DEFAULT_BLOCK_CAP).expect("default block cap fits")
    }
}

impl FreeGroupFrame {
    pub fn with_block_cap(block_cap: usize) -> Result<Self> {
        Ok(FreeGroupFrame {
            indexer: BlockIndexer::free_group(block_cap)?,
            enumerator: Enumerator::default(),
        })
    }

    pub fn with_enumerator(mut self, enumerator: Enumerator) -> Self {
        self.enumerator = enumerator;
        self
    }

    pub fn indexer(&self) -> &BlockIndexer {
        &self.indexer
    }

    /// Base order of block `k`: `ball(k−1)` then `sphere(k)`, i.e. `ball(k)`
    /// in word order.
    pub fn block_base_order(&self, k: usize) -> Result<Vec<Word>> {
        self.indexer.block_size(k)?;
        self.enumerator.ball(k)
    }

    /// Last index of block `K`.
    pub fn block_boundary(&self, big_k: usize) -> Result<u128> {
        self.indexer.block_end(big_k)
    }

    pub fn index_decompose(&self, n: u128) -> Result<FrameIndex> {
        self.indexer.decompose(n)
    }

    pub fn term(&self, n: u128) -> Result<FrameTerm> {
        let index = self.indexer.decompose(n)?;
        // the j-th base word of block k is the word of rank j − 1
        let word = Word::unrank(index.j - 1);
        let m = index.block_size as f64;
        let coefficient = psi_symbol(index.k, word.len()) / (m * m);
        Ok(FrameTerm { index, word, coefficient })
    }

    /// Lazily generated terms `n = start..=end`.
    pub fn terms(&self, start: u128, end: u128) -> impl Iterator<Item = Result<FrameTerm>> + '_ {
        (start..=end).map(move |n| self.term(n))
    }

    /// `Σ_{n≤m, φ(n)=s} a_n`.
    pub fn partial_sum_weight(&self, m: u128, s: &Word) -> Result<f64> {
        if m == 0 {
            return Ok(0.0);
        }
        let idx = self.indexer.decompose(m)?;
        let d = s.len();
        if idx.at_block_end() {
            return Ok(schedule_symbol(idx.k, d));
        }
        let completed = schedule_symbol(idx.k - 1, d);
        if d > idx.k {
            return Ok(completed);
        }
        let base_rank = s.rank()? + 1;
        let count = idx.p + u128::from(base_rank <= idx.j);
        let mk = idx.block_size as f64;
        Ok(completed + count as f64 * (psi_symbol(idx.k, d) / (mk * mk)))
    }

    /// The partial-sum map `S_m` as a coefficient map.
    pub fn partial_sum_map(&self, m: u128) -> Result<PartialSumMap<'_>> {
        if m > 0 {
            self.indexer.decompose(m)?;
        }
        Ok(PartialSumMap { frame: self, m })
    }

    pub fn apply_partial_sum(&self, x: &GroupAlgebraElement, m: u128) -> Result<GroupAlgebraElement> {
        Ok(x.apply_map(&self.partial_sum_map(m)?))
    }

    pub fn apply_partial_sum_matrix(&self, u: &MatrixLevelElement, m: u128) -> Result<MatrixLevelElement> {
        Ok(u.apply_map(&self.partial_sum_map(m)?))
    }

    /// `x − S_m(x)`, formed coefficientwise as `(1 − w_m(s))·x_s`.
    pub fn residual(&self, x: &GroupAlgebraElement, m: u128) -> Result<GroupAlgebraElement> {
        let terms = x
            .terms()
            .map(|(w, c)| Ok((w.clone(), c * (1.0 - self.partial_sum_weight(m, w)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupAlgebraElement::from_terms(terms))
    }

    /// Certified interval for `‖x − S_m(x)‖`.
    pub fn reconstruction_error(&self, x: &GroupAlgebraElement, m: u128, cfg: &NormConfig) -> Result<NormEstimate> {
        let diff = self.residual(x, m)?;
        let lower = norm_lower(&diff, cfg)?;
        let upper = diff.l1_norm().min(norm_upper(&diff));
        Ok(NormEstimate {
            lower: lower.value.min(upper),
            upper,
            radius: cfg.radius,
            iterations: lower.iterations,
            tolerance: cfg.tol,
            seed: cfg.seed,
            converged: lower.converged,
        })
    }

    pub fn reconstruction_error_matrix(&self, u: &MatrixLevelElement, m: u128, cfg: &NormConfig) -> Result<NormEstimate> {
        let map = self.partial_sum_map(m)?;
        let diff = u.apply_map(&|w: &Word| 1.0 - map.weight(w));
        let lower = matrix_norm_lower(&diff, cfg)?;
        let upper = matrix_norm_upper(&diff);
        Ok(NormEstimate {
            lower: lower.value.min(upper),
            upper,
            radius: cfg.radius,
            iterations: lower.iterations,
            tolerance: cfg.tol,
            seed: cfg.seed,
            converged: lower.converged,
        })
    }

    /// `Σ a_n` over all `n` in blocks `1..=K` with `φ(n) = s`. Each block
    /// holds `m_k²` identical clones, which are summed as one product.
    pub fn coefficient_sum(&self, s: &Word, big_k: usize) -> Result<f64> {
        if big_k < s.len().max(1) {
            return Err(Error::input(format!(
                "K = {big_k} must be at least max(|s|, 1) = {}",
                s.len().max(1)
            )));
        }
        let mut total = 0.0;
        for k in s.len().max(1)..=big_k {
            let m = self.indexer.block_size(k)? as f64;
            let clones = m * m;
            total += clones * (psi_symbol(k, s.len()) / clones);
        }
        Ok(total)
    }

    /// Bounds on `‖S_m‖_cb`.
    pub fn sm_cb_upper(&self, m: u128) -> Result<PartialSumBound> {
        let global = 3.0 * schedule_sup_bound(DEFAULT_SCHEDULE_KMAX)? + 1.0;
        if m == 0 {
            return Ok(PartialSumBound { global, m_specific: 0.0 });
        }
        let idx = self.indexer.decompose(m)?;
        let k = idx.k;
        let m_specific = if idx.at_block_end() {
            schedule_cb_upper(k)
        } else {
            let mk = idx.block_size as f64;
            let mk2 = mk * mk;
            let psi_norm = schedule_cb_upper(k) + schedule_cb_upper(k - 1);
            let max_psi = (0..=k).map(|d| psi_symbol(k, d).abs()).fold(0.0, f64::max);
            schedule_cb_upper(k - 1) + (idx.p as f64 / mk2) * psi_norm + idx.j as f64 * max_psi / mk2
        };
        Ok(PartialSumBound { global, m_specific })
    }

    /// `S_E(x) = Σ_{n∈E} a_n δ_{φ(n)}(x) λ_{φ(n)}` for a finite index set.
    pub fn subset_sum_apply<I>(&self, x: &GroupAlgebraElement, indices: I) -> Result<GroupAlgebraElement>
    where
        I: IntoIterator<Item = u128>,
    {
        let mut weights: BTreeMap<Word, f64> = BTreeMap::new();
        for n in indices {
            let t = self.term(n)?;
            *weights.entry(t.word).or_default() += t.coefficient;
        }
        Ok(GroupAlgebraElement::from_terms(
            weights
                .into_iter()
                .map(|(w, a)| (w.clone(), x.delta_pairing(&w) * C64::new(a, 0.0))),
        ))
    }
}

/// `S_m` viewed as the coefficient map `s ↦ partial_sum_weight(m, s)`.
#[derive(Clone, Copy, Debug)]
pub struct PartialSumMap<'a> {
    frame: &'a FreeGroupFrame,
    m: u128,
}

impl CoefficientMap for PartialSumMap<'_> {
    fn weight(&self, w: &Word) -> f64 {
        // m was validated at construction; only words too long to rank can fail
        self.frame.partial_sum_weight(self.m, w).unwrap_or(0.0)
    }
}
