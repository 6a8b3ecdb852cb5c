//! Frame-to-basis constructions: the triple norm on finitely supported
//! coefficient sequences, the maps `Q: e_i ↦ x_i` and `T: x ↦ Σ f_i(x) e_i`,
//! the unconditional variant, the generic cloning construction with an
//! Auerbach step, and an empirical cb-basic constant.

pub mod auerbach;
pub mod generic;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, CoeffDoc, GroupAlgebraElement, MatrixLevelElement, C64, DROP_TOLERANCE};
use crate::error::{Error, Result};
use crate::frame::FreeGroupFrame;
use crate::free_group::Word;
use crate::multipliers::psi_symbol;
use crate::norms::{derive_seed, matrix_level_norm, random_matrix, NormConfig, NormEstimate};
use crate::sum::compensated_sum;

pub use auerbach::{auerbach, auerbach_with, sup_dual_norm_exact, AuerbachConfig, AuerbachSystem, EuclideanNorm, L1Norm, NormOracle, SupNorm};
pub use generic::{auerbach_block, free_group_spec, BlockMapSpec, Divisible, GenericTerm, LinearFunctional, Scalable};

/// Largest support handled by [`unconditional_triple_norm`].
pub const UNCONDITIONAL_SUPPORT_CAP: usize = 12;

/// Largest number of entries [`t_apply`] will materialize.
pub const T_APPLY_ENTRY_CAP: u128 = 5_000_000;

/// `u = Σ u_i ⊗ e_i` with finitely many nonzero `u_i ∈ M_n`, indices from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    level: usize,
    entries: BTreeMap<u128, CMatrix>,
}

impl CoefficientSequence {
    pub fn zero(level: usize) -> Result<Self> {
        Self::from_entries(level, std::iter::empty())
    }

    /// Repeated indices are summed; entries below the drop tolerance are removed.
    pub fn from_entries<I: IntoIterator<Item = (u128, CMatrix)>>(level: usize, entries: I) -> Result<Self> {
        if level == 0 {
            return Err(Error::input("matrix level must be positive"));
        }
        let mut map: BTreeMap<u128, CMatrix> = BTreeMap::new();
        for (i, m) in entries {
            if i == 0 {
                return Err(Error::input("coefficient indices start at 1"));
            }
            if m.nrows() != level || m.ncols() != level {
                return Err(Error::input(format!(
                    "coefficient at index {i} is {}x{}, expected {level}x{level}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            match map.get_mut(&i) {
                Some(acc) => *acc += m,
                None => {
                    map.insert(i, m);
                }
            }
        }
        map.retain(|_, m| m.norm() >= DROP_TOLERANCE);
        Ok(CoefficientSequence { level, entries: map })
    }

    pub fn from_scalars<I: IntoIterator<Item = (u128, C64)>>(entries: I) -> Result<Self> {
        Self::from_entries(1, entries.into_iter().map(|(i, c)| (i, CMatrix::from_element(1, 1, c))))
    }

    /// `u ⊗ e_i`.
    pub fn singleton(i: u128, u: CMatrix) -> Result<Self> {
        Self::from_entries(u.nrows(), [(i, u)])
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn entries(&self) -> impl Iterator<Item = (u128, &CMatrix)> {
        self.entries.iter().map(|(i, m)| (*i, m))
    }

    pub fn get(&self, i: u128) -> Option<&CMatrix> {
        self.entries.get(&i)
    }

    pub fn support(&self) -> impl Iterator<Item = u128> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u128> {
        self.entries.keys().next_back().copied()
    }

    /// `Σ_{i≤m} u_i ⊗ e_i`.
    pub fn prefix(&self, m: u128) -> Self {
        CoefficientSequence {
            level: self.level,
            entries: self.entries.range(..=m).map(|(i, u)| (*i, u.clone())).collect(),
        }
    }

    /// `Σ_{i∈E} u_i ⊗ e_i`.
    pub fn restrict<I: IntoIterator<Item = u128>>(&self, indices: I) -> Self {
        CoefficientSequence {
            level: self.level,
            entries: indices
                .into_iter()
                .filter_map(|i| self.entries.get(&i).map(|u| (i, u.clone())))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = SequenceDoc {
            level: self.level,
            entries: self
                .entries
                .iter()
                .map(|(i, m)| EntryDoc { index: *i, coeff: CoeffDoc::from_matrix(m) })
                .collect(),
        };
        serde_json::to_string(&doc).expect("sequence serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SequenceDoc = serde_json::from_str(s)?;
        if doc.level == 0 {
            return Err(Error::input("matrix level must be positive"));
        }
        let entries = doc
            .entries
            .iter()
            .map(|e| Ok((e.index, e.coeff.to_matrix(doc.level)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(doc.level, entries)
    }
}

// {"level": n, "entries": [{"index": i, "coeff": [re, im] | [[re, im], ...]}]}
#[derive(Serialize, Deserialize)]
struct SequenceDoc {
    level: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    index: u128,
    coeff: CoeffDoc,
}

/// Output of [`t_apply`]: the truncated coefficient sequence plus, for every
/// support word of `x`, the frame weight not yet reached.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedCoefficients {
    pub sequence: CoefficientSequence,
    pub tail: BTreeMap<Word, f64>,
}

fn max_interval(estimates: &[NormEstimate], cfg: &NormConfig) -> NormEstimate {
    let mut out = NormEstimate::exact_zero(cfg);
    for e in estimates {
        out.lower = out.lower.max(e.lower);
        out.upper = out.upper.max(e.upper);
        out.iterations = out.iterations.max(e.iterations);
        out.converged &= e.converged;
    }
    out
}

/// `Q(u) = Σ_i u_i ⊗ x_i`, summing the coefficients landing on each word with
/// compensation so that clone sums are exact where the reals allow it.
pub fn q_apply(u: &CoefficientSequence, frame: &FreeGroupFrame) -> Result<MatrixLevelElement> {
    let mut by_word: BTreeMap<Word, Vec<&CMatrix>> = BTreeMap::new();
    for (i, m) in u.entries() {
        by_word.entry(frame.term(i)?.word).or_default().push(m);
    }
    let n = u.level;
    MatrixLevelElement::from_terms(
        n,
        by_word.into_iter().map(|(w, ms)| {
            let m = CMatrix::from_fn(n, n, |r, c| {
                C64::new(
                    compensated_sum(ms.iter().map(|m| m[(r, c)].re)),
                    compensated_sum(ms.iter().map(|m| m[(r, c)].im)),
                )
            });
            (w, m)
        }),
    )
}

/// Certified interval for `|‖u‖| = max_m ‖Σ_{i≤m} u_i ⊗ x_i‖`. Prefixes only
/// change at support indices, so the sup is a max over those.
pub fn triple_norm(u: &CoefficientSequence, frame: &FreeGroupFrame, cfg: &NormConfig) -> Result<NormEstimate> {
    if u.is_empty() {
        return Ok(NormEstimate::exact_zero(cfg));
    }
    let cuts: Vec<u128> = u.support().collect();
    let estimates = cuts
        .par_iter()
        .map(|&m| {
            let image = q_apply(&u.prefix(m), frame)?;
            if image.is_empty() {
                return Ok(NormEstimate::exact_zero(cfg));
            }
            matrix_level_norm(&image, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(max_interval(&estimates, cfg))
}

/// Certified interval for `max_{E} ‖Σ_{i∈E} u_i ⊗ x_i‖` over all subsets of
/// the support.
pub fn unconditional_triple_norm(
    u: &CoefficientSequence,
    frame: &FreeGroupFrame,
    cfg: &NormConfig,
) -> Result<NormEstimate> {
    if u.len() > UNCONDITIONAL_SUPPORT_CAP {
        return Err(Error::capacity(format!(
            "support of size {} exceeds the subset enumeration cap {UNCONDITIONAL_SUPPORT_CAP}",
            u.len()
        )));
    }
    if u.is_empty() {
        return Ok(NormEstimate::exact_zero(cfg));
    }
    let support: Vec<u128> = u.support().collect();
    let estimates = (1u32..(1u32 << support.len()))
        .into_par_iter()
        .map(|mask| {
            let subset = support
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, i)| *i);
            let image = q_apply(&u.restrict(subset), frame)?;
            if image.is_empty() {
                return Ok(NormEstimate::exact_zero(cfg));
            }
            matrix_level_norm(&image, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(max_interval(&estimates, cfg))
}

/// `T(x)` truncated to indices `≤ big_n`: entries `f_i(x) = a_i δ_{φ(i)}(x)`,
/// zero entries omitted, with the unreached weight `1 − w_N(s)` per word.
pub fn t_apply(x: &GroupAlgebraElement, frame: &FreeGroupFrame, big_n: u128) -> Result<TruncatedCoefficients> {
    if big_n == 0 {
        return Err(Error::input("N must be at least 1"));
    }
    let last = frame.index_decompose(big_n)?;
    let indexer = frame.indexer();
    let mut entries = Vec::new();
    let mut tail = BTreeMap::new();
    for (s, xs) in x.terms() {
        let d = s.len();
        let j = s.rank()? + 1;
        for k in d.max(1)..=last.k {
            let m = indexer.block_size(k)?;
            let mf = m as f64;
            let a = psi_symbol(k, d) / (mf * mf);
            if a == 0.0 {
                continue;
            }
            let c = *xs * a;
            for p in 0..u128::from(m) * u128::from(m) {
                let n = indexer.compose_clone(k, p, j)?;
                if n > big_n {
                    break;
                }
                entries.push((n, CMatrix::from_element(1, 1, c)));
                if entries.len() as u128 > T_APPLY_ENTRY_CAP {
                    return Err(Error::capacity(format!(
                        "truncated sequence exceeds {T_APPLY_ENTRY_CAP} entries"
                    )));
                }
            }
        }
        tail.insert(s.clone(), 1.0 - frame.partial_sum_weight(big_n, s)?);
    }
    Ok(TruncatedCoefficients { sequence: CoefficientSequence::from_entries(1, entries)?, tail })
}

/// `‖x − QT_N(x)‖_{ℓ¹}`.
pub fn qt_identity_check(x: &GroupAlgebraElement, frame: &FreeGroupFrame, big_n: u128) -> Result<f64> {
    let t = t_apply(x, frame, big_n)?;
    let y = q_apply(&t.sequence, frame)?;
    let mut words: Vec<&Word> = x.support().chain(y.support()).collect();
    words.sort();
    words.dedup();
    Ok(compensated_sum(
        words
            .into_iter()
            .map(|w| (x.delta_pairing(w) - y.delta_pairing(w)[(0, 0)]).norm()),
    ))
}

/// Empirical lower bound for the smallest `K` with
/// `‖Σ_{j≤m} u_j ⊗ v_j‖ ≤ K ‖Σ_{j≤l} u_j ⊗ v_j‖` for all `m ≤ l`.
///
/// Coefficient tuples are all-identity, alternating signs, each adjacent sign
/// flip `(I, −I)`, and `samples` random tuples. Each ratio compares a certified
/// lower bound of the shorter sum to a certified upper bound of the longer,
/// so the value never overstates the constant. Since `m = l` is allowed the
/// constant is at least 1; `∞` means some nonzero prefix precedes a zero sum.
pub fn cb_basic_criterion(
    seq: &[GroupAlgebraElement],
    level: usize,
    samples: usize,
    cfg: &NormConfig,
) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::input("the candidate sequence is empty"));
    }
    if level == 0 {
        return Err(Error::input("matrix level must be positive"));
    }
    if samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let len = seq.len();
    let id = CMatrix::identity(level, level);
    let mut tuples: Vec<Vec<CMatrix>> = vec![vec![id.clone(); len]];
    tuples.push((0..len).map(|j| if j % 2 == 0 { id.clone() } else { -id.clone() }).collect());
    let zero = CMatrix::zeros(level, level);
    for j in 0..len.saturating_sub(1) {
        let mut t = vec![zero.clone(); len];
        t[j] = id.clone();
        t[j + 1] = -id.clone();
        tuples.push(t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xCB5A_11C0_0000_0001);
    for _ in 0..samples {
        tuples.push((0..len).map(|_| random_matrix(&mut rng, level)).collect());
    }

    let ratios = tuples
        .par_iter()
        .enumerate()
        .map(|(ti, tuple)| {
            let mut acc = MatrixLevelElement::zero(level);
            let mut lowers = Vec::with_capacity(len);
            let mut uppers = Vec::with_capacity(len);
            for (j, (u, v)) in tuple.iter().zip(seq).enumerate() {
                acc = acc.add(&MatrixLevelElement::tensor(u, v)?)?;
                let c = cfg.with_seed(derive_seed(cfg.seed, (ti * len + j) as u64));
                let est = if acc.is_empty() { NormEstimate::exact_zero(&c) } else { matrix_level_norm(&acc, &c)? };
                lowers.push(est.lower);
                uppers.push(est.upper);
            }
            let mut worst = 0.0f64;
            let mut best_lower = 0.0f64;
            for l in 0..len {
                best_lower = best_lower.max(lowers[l]);
                if best_lower > 0.0 {
                    let r = if uppers[l] == 0.0 { f64::INFINITY } else { best_lower / uppers[l] };
                    worst = worst.max(r);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(1.0, f64::max))
}

/// Random scalar coefficient sequence on indices `1..=max_index`, used by
/// property checks of the triple norm.
pub fn random_sequence(level: usize, max_index: u128, terms: usize, seed: u64) -> Result<CoefficientSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<(u128, CMatrix)> = (0..terms)
        .map(|_| (rng.gen_range(1..=max_index), random_matrix(&mut rng, level)))
        .collect();
    CoefficientSequence::from_entries(level, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::matrix_level_norm;

    fn frame() -> FreeGroupFrame {
        FreeGroupFrame::default()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn cfg() -> NormConfig {
        NormConfig::default().with_radius(3)
    }

    fn scalar(c: f64) -> CMatrix {
        CMatrix::from_element(1, 1, C64::new(c, 0.0))
    }

    #[test]
    fn sequence_validation_and_json() {
        assert!(CoefficientSequence::from_entries(1, [(0u128, scalar(1.0))]).is_err());
        assert!(CoefficientSequence::from_entries(2, [(1u128, scalar(1.0))]).is_err());
        let u = CoefficientSequence::from_entries(
            2,
            [(3u128, CMatrix::from_fn(2, 2, |r, c| C64::new(r as f64 + 0.1, c as f64 / 3.0))), (1u128 << 100, CMatrix::identity(2, 2))],
        )
        .unwrap();
        let back = CoefficientSequence::from_json(&u.to_json()).unwrap();
        assert_eq!(back, u);
        let s = CoefficientSequence::from_scalars([(2u128, C64::new(0.25, -1.0 / 3.0))]).unwrap();
        assert_eq!(CoefficientSequence::from_json(&s.to_json()).unwrap(), s);
        assert!(s.to_json().contains("\"coeff\":[0.25,"));
    }

    #[test]
    fn q_apply_examples() {
        let f = frame();
        let e1 = CoefficientSequence::from_scalars([(1u128, C64::new(1.0, 0.0))]).unwrap();
        let q = q_apply(&e1, &f).unwrap().to_scalar().unwrap();
        assert_eq!(q, GroupAlgebraElement::basis(Word::identity()));
        let e2 = CoefficientSequence::from_scalars([(2u128, C64::new(1.0, 0.0))]).unwrap();
        assert_eq!(q_apply(&e2, &f).unwrap().to_scalar().unwrap(), GroupAlgebraElement::basis(w("a")));
        assert!(q_apply(&CoefficientSequence::zero(1).unwrap(), &f).unwrap().is_empty());
    }

    #[test]
    fn t_apply_examples() {
        let f = frame();
        let t = t_apply(&GroupAlgebraElement::basis(w("a")), &f, 125).unwrap();
        assert_eq!(t.sequence.len(), 25);
        let expected = (-1.0f64).exp() / 25.0;
        for (i, c) in t.sequence.entries() {
            assert_eq!(f.term(i).unwrap().word, w("a"));
            assert_eq!(c[(0, 0)].re, expected);
        }
        assert!((t.tail[&w("a")] - (1.0 - (-1.0f64).exp())).abs() < 1e-15);

        let e = GroupAlgebraElement::basis(Word::identity());
        for n in [125u128, 126, 6000] {
            let t = t_apply(&e, &f, n).unwrap();
            let total = compensated_sum(t.sequence.entries().map(|(_, c)| c[(0, 0)].re));
            assert_eq!(total, 1.0);
            assert_eq!(t.tail[&Word::identity()], 0.0);
        }
        assert!(t_apply(&GroupAlgebraElement::zero(), &f, 50).unwrap().sequence.is_empty());
        assert!(t_apply(&e, &f, 0).is_err());
    }

    #[test]
    fn t_apply_partial_blocks_match_weights() {
        let f = frame();
        let x = GroupAlgebraElement::from_real_terms([("b", 2.0), ("Ab", -1.0)]).unwrap();
        for n in [7u128, 130, 700, 5038, 5100] {
            let t = t_apply(&x, &f, n).unwrap();
            assert!(t.sequence.max_index().unwrap() <= n);
            let y = q_apply(&t.sequence, &f).unwrap();
            for (s, xs) in x.terms() {
                let wt = f.partial_sum_weight(n, s).unwrap();
                assert!((y.delta_pairing(s)[(0, 0)] - xs * wt).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn qt_identity_examples() {
        let f = frame();
        assert_eq!(qt_identity_check(&GroupAlgebraElement::basis(Word::identity()), &f, 125).unwrap(), 0.0);
        let a = GroupAlgebraElement::basis(w("a"));
        let mut prev = f64::INFINITY;
        for big_k in 1..=4 {
            let n = f.block_boundary(big_k).unwrap();
            let r = qt_identity_check(&a, &f, n).unwrap();
            assert!((r - (1.0 - (-1.0 / (big_k as f64).sqrt()).exp())).abs() < 1e-12);
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn triple_norm_singleton_and_zero() {
        let f = frame();
        let c = cfg();
        assert_eq!(triple_norm(&CoefficientSequence::zero(2).unwrap(), &f, &c).unwrap(), NormEstimate::exact_zero(&c));
        let u = CMatrix::from_fn(2, 2, |r, k| C64::new(1.0 + r as f64, k as f64 - 0.5));
        for i in [1u128, 2, 17, 130] {
            let seq = CoefficientSequence::singleton(i, u.clone()).unwrap();
            let direct = matrix_level_norm(
                &MatrixLevelElement::from_terms(2, [(f.term(i).unwrap().word, u.clone())]).unwrap(),
                &c,
            )
            .unwrap();
            assert_eq!(triple_norm(&seq, &f, &c).unwrap(), direct);
            assert_eq!(unconditional_triple_norm(&seq, &f, &c).unwrap(), direct);
        }
    }

    #[test]
    fn prefix_truncation_never_increases() {
        let f = frame();
        let c = cfg();
        for seed in 0..8 {
            let u = random_sequence(1, 40, 5, seed).unwrap();
            let full = triple_norm(&u, &f, &c).unwrap();
            for m in u.support() {
                let pre = triple_norm(&u.prefix(m), &f, &c).unwrap();
                assert!(pre.lower <= full.upper);
            }
        }
    }

    #[test]
    fn unconditional_dominates_and_caps() {
        let f = frame();
        let c = cfg();
        let u = random_sequence(1, 30, 4, 11).unwrap();
        let tn = triple_norm(&u, &f, &c).unwrap();
        let un = unconditional_triple_norm(&u, &f, &c).unwrap();
        assert!(un.lower >= tn.lower && un.upper >= tn.upper);
        let big = CoefficientSequence::from_scalars((1..=13u128).map(|i| (i, C64::new(1.0, 0.0)))).unwrap();
        assert!(matches!(unconditional_triple_norm(&big, &f, &c), Err(Error::Capacity(_))));
        assert_eq!(
            unconditional_triple_norm(&CoefficientSequence::zero(1).unwrap(), &f, &c).unwrap(),
            NormEstimate::exact_zero(&c)
        );
    }

    #[test]
    fn cb_basic_examples() {
        let c = cfg();
        let gens: Vec<GroupAlgebraElement> = ["a", "b"].iter().map(|s| GroupAlgebraElement::basis(w(s))).collect();
        let k = cb_basic_criterion(&gens, 1, 6, &c).unwrap();
        assert!((1.0..1.5).contains(&k), "{k}");
        let v = GroupAlgebraElement::basis(w("ab"));
        let repeated = vec![v.clone(), v.clone()];
        assert!(cb_basic_criterion(&repeated, 1, 2, &c).unwrap() > 100.0);
        assert_eq!(cb_basic_criterion(std::slice::from_ref(&v), 2, 3, &c).unwrap(), 1.0);
        assert!(cb_basic_criterion(&[], 1, 3, &c).is_err());
        assert!(cb_basic_criterion(&[v], 1, 0, &c).is_err());
    }
}
