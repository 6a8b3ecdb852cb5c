//! Finitely supported elements of the group algebra of F₂, at scalar level
//! (`Σ a_s λ_s`) and at matrix level n (`Σ u_s ⊗ λ_s` with `u_s ∈ M_n`).
//!
//! Coefficients are stored in a `BTreeMap` keyed by [`Word`], so iteration
//! always follows word order and every derived output is deterministic.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_group::Word;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Coefficients (or matrix coefficients, in Frobenius norm) smaller than this
/// are dropped after every arithmetic operation.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// A map acting on the group algebra by scaling the coefficient at each word.
///
/// Radial multipliers, length projections and frame partial sums are all of
/// this form.
pub trait CoefficientMap: Sync {
    fn weight(&self, w: &Word) -> f64;
}

impl<F: Fn(&Word) -> f64 + Sync> CoefficientMap for F {
    fn weight(&self, w: &Word) -> f64 {
        self(w)
    }
}

/// Finitely supported `x = Σ a_s λ_s`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupAlgebraElement {
    terms: BTreeMap<Word, C64>,
}

impl GroupAlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `λ_w`.
    pub fn basis(w: Word) -> Self {
        Self::from_terms([(w, C64::new(1.0, 0.0))])
    }

    /// Builds an element, summing repeated words and dropping negligible terms.
    pub fn from_terms<I: IntoIterator<Item = (Word, C64)>>(terms: I) -> Self {
        let mut map: BTreeMap<Word, C64> = BTreeMap::new();
        for (w, c) in terms {
            *map.entry(w).or_default() += c;
        }
        map.retain(|_, c| c.norm() >= DROP_TOLERANCE);
        GroupAlgebraElement { terms: map }
    }

    pub fn from_real_terms<'a, I: IntoIterator<Item = (&'a str, f64)>>(terms: I) -> Result<Self> {
        let parsed = terms
            .into_iter()
            .map(|(s, c)| Ok((Word::parse(s)?, C64::new(c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(parsed))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `δ_s(x)`: the coefficient of `λ_s`, zero when absent.
    pub fn delta_pairing(&self, s: &Word) -> C64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(w, c)| (w.clone(), *c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, a)| (w.clone(), a * c)))
    }

    /// Group-algebra product: `(x*y)_t = Σ_{rs=t} x_r y_s`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (r, a) in &self.terms {
            for (s, b) in &other.terms {
                out.push((r.multiply(s), a * b));
            }
        }
        Self::from_terms(out)
    }

    /// C*-involution: the coefficient at s becomes the conjugate of the one at s⁻¹.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.inverse(), c.conj())))
    }

    /// `P_d(x)`: restriction to words of length exactly `d`.
    pub fn length_component(&self, d: usize) -> Self {
        GroupAlgebraElement {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest word length in the support (0 for the zero element).
    pub fn support_radius(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Scales each coefficient by `map.weight(word)`.
    pub fn apply_map<M: CoefficientMap + ?Sized>(&self, map: &M) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * map.weight(w))))
    }

    pub fn to_matrix_level(&self) -> MatrixLevelElement {
        MatrixLevelElement {
            level: 1,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), CMatrix::from_element(1, 1, *c)))
                .collect(),
        }
    }
}

/// Finitely supported `u = Σ u_s ⊗ λ_s` with `u_s ∈ M_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLevelElement {
    level: usize,
    terms: BTreeMap<Word, CMatrix>,
}

impl MatrixLevelElement {
    pub fn zero(level: usize) -> Self {
        assert!(level >= 1, "matrix level must be positive");
        MatrixLevelElement { level, terms: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, CMatrix)>>(level: usize, terms: I) -> Result<Self> {
        if level == 0 {
            return Err(Error::input("matrix level must be positive"));
        }
        let mut map: BTreeMap<Word, CMatrix> = BTreeMap::new();
        for (w, m) in terms {
            if m.nrows() != level || m.ncols() != level {
                return Err(Error::input(format!(
                    "coefficient at {w:?} is {}x{}, expected {level}x{level}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            match map.get_mut(&w) {
                Some(acc) => *acc += m,
                None => {
                    map.insert(w, m);
                }
            }
        }
        map.retain(|_, m| m.norm() >= DROP_TOLERANCE);
        Ok(MatrixLevelElement { level, terms: map })
    }

    /// `a ⊗ x`.
    pub fn tensor(a: &CMatrix, x: &GroupAlgebraElement) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::input("tensor factor must be square"));
        }
        Self::from_terms(a.nrows(), x.terms().map(|(w, c)| (w.clone(), a * *c)))
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CMatrix)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn delta_pairing(&self, s: &Word) -> CMatrix {
        self.terms
            .get(s)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.level, self.level))
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::input(format!(
                "matrix levels differ: {} vs {}",
                self.level, other.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Self::from_terms(
            self.level,
            self.terms.iter().chain(other.terms.iter()).map(|(w, m)| (w.clone(), m.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_terms(|_, m| m * c)
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (r, a) in &self.terms {
            for (s, b) in &other.terms {
                out.push((r.multiply(s), a * b));
            }
        }
        Self::from_terms(self.level, out)
    }

    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|(w, m)| (w.inverse(), m.adjoint()));
        Self::from_terms(self.level, terms).expect("levels are preserved")
    }

    pub fn length_component(&self, d: usize) -> Self {
        MatrixLevelElement {
            level: self.level,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, m)| (w.clone(), m.clone()))
                .collect(),
        }
    }

    pub fn support_radius(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn apply_map<M: CoefficientMap + ?Sized>(&self, map: &M) -> Self {
        self.map_terms(|w, m| m * C64::new(map.weight(w), 0.0))
    }

    fn map_terms(&self, f: impl Fn(&Word, &CMatrix) -> CMatrix) -> Self {
        let terms = self.terms.iter().map(|(w, m)| (w.clone(), f(w, m)));
        Self::from_terms(self.level, terms).expect("levels are preserved")
    }

    /// The scalar element when `level == 1`.
    pub fn to_scalar(&self) -> Option<GroupAlgebraElement> {
        (self.level == 1).then(|| {
            GroupAlgebraElement::from_terms(self.terms.iter().map(|(w, m)| (w.clone(), m[(0, 0)])))
        })
    }
}

impl From<&GroupAlgebraElement> for MatrixLevelElement {
    fn from(x: &GroupAlgebraElement) -> Self {
        x.to_matrix_level()
    }
}

/// Largest singular value of a small dense matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

// ---------------------------------------------------------------------------
// JSON element format:
// {"level": n, "terms": [{"word": "...", "coeff": [[re, im], ...]}]}
// Scalar level uses a single [re, im] pair per term; matrix coefficients are
// the n² entries in row-major order.

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    level: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    word: String,
    coeff: CoeffDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum CoeffDoc {
    Scalar([f64; 2]),
    Matrix(Vec<[f64; 2]>),
}

impl CoeffDoc {
    pub(crate) fn from_matrix(m: &CMatrix) -> Self {
        if m.nrows() == 1 {
            CoeffDoc::Scalar([m[(0, 0)].re, m[(0, 0)].im])
        } else {
            CoeffDoc::Matrix(matrix_to_pairs(m))
        }
    }

    pub(crate) fn to_matrix(&self, level: usize) -> Result<CMatrix> {
        match self {
            CoeffDoc::Scalar(p) => matrix_from_pairs(level, &[*p]),
            CoeffDoc::Matrix(ps) => matrix_from_pairs(level, ps),
        }
    }
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn matrix_from_pairs(level: usize, pairs: &[[f64; 2]]) -> Result<CMatrix> {
    if pairs.len() != level * level {
        return Err(Error::input(format!(
            "expected {} coefficient pairs for level {level}, found {}",
            level * level,
            pairs.len()
        )));
    }
    Ok(CMatrix::from_row_iterator(
        level,
        level,
        pairs.iter().map(|p| C64::new(p[0], p[1])),
    ))
}

impl MatrixLevelElement {
    pub fn to_json(&self, pretty_identity: bool) -> String {
        let doc = ElementDoc {
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|(w, m)| TermDoc {
                    word: w.to_string_with(pretty_identity),
                    coeff: CoeffDoc::from_matrix(m),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("element serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ElementDoc = serde_json::from_str(s)?;
        if doc.level == 0 {
            return Err(Error::input("matrix level must be positive"));
        }
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let w = Word::parse(&t.word)?;
                Ok((w, t.coeff.to_matrix(doc.level)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(doc.level, terms)
    }
}

impl GroupAlgebraElement {
    pub fn to_json(&self, pretty_identity: bool) -> String {
        self.to_matrix_level().to_json(pretty_identity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(terms: &[(&str, f64)]) -> GroupAlgebraElement {
        GroupAlgebraElement::from_real_terms(terms.iter().copied()).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn delta_pairing_examples() {
        let x = el(&[("a", 1.0), ("b", 2.0)]);
        assert_eq!(x.delta_pairing(&w("b")), c(2.0));
        assert_eq!(el(&[("a", 1.0)]).delta_pairing(&Word::identity()), c(0.0));
        for s in ["", "a", "aBBa"] {
            assert_eq!(GroupAlgebraElement::basis(w(s)).delta_pairing(&w(s)), c(1.0));
        }
    }

    #[test]
    fn convolve_examples() {
        let e = el(&[("e", 1.0)]);
        assert_eq!(el(&[("a", 1.0)]).convolve(&el(&[("A", 1.0)])), e);
        assert_eq!(
            el(&[("a", 1.0), ("b", 1.0)]).convolve(&el(&[("A", 1.0)])),
            el(&[("e", 1.0), ("bA", 1.0)])
        );
        let x = el(&[("a", 1.5), ("bA", -2.0)]);
        assert_eq!(x.convolve(&e), x);
    }

    #[test]
    fn adjoint_examples() {
        let x = GroupAlgebraElement::from_terms([(w("a"), C64::new(2.0, 1.0))]);
        assert_eq!(x.adjoint(), GroupAlgebraElement::from_terms([(w("A"), C64::new(2.0, -1.0))]));
        assert_eq!(x.adjoint().adjoint(), x);
        let sa = el(&[("a", 1.0), ("A", 1.0)]);
        assert_eq!(sa.adjoint(), sa);
    }

    #[test]
    fn length_component_examples() {
        let x = el(&[("e", 1.0), ("a", 2.0)]);
        assert_eq!(x.length_component(1), el(&[("a", 2.0)]));
        assert!(el(&[("a", 1.0)]).length_component(3).is_empty());
        assert_eq!(x.length_component(0), el(&[("e", 1.0)]));
    }

    #[test]
    fn norms_examples() {
        let x = el(&[("a", 1.0), ("b", 1.0)]);
        assert_eq!(x.l1_norm(), 2.0);
        assert!((x.l2_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(el(&[("ab", 1.0)]).support_radius(), 2);
    }

    #[test]
    fn drop_tolerance_applies() {
        let x = el(&[("a", 1.0), ("b", 1e-16)]);
        assert_eq!(x.len(), 1);
        assert!(x.sub(&x).is_empty());
    }

    #[test]
    fn matrix_level_ops() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        let u = MatrixLevelElement::tensor(&a, &el(&[("a", 1.0)])).unwrap();
        let v = u.adjoint();
        assert_eq!(v.delta_pairing(&w("A")), a.adjoint());
        let p = u.convolve(&v).unwrap();
        assert_eq!(p.delta_pairing(&Word::identity()), &a * a.adjoint());
        let bad = MatrixLevelElement::zero(3);
        assert!(u.add(&bad).is_err());
    }

    #[test]
    fn scalar_level_coincides_with_level_one() {
        let x = el(&[("a", 1.0), ("bA", -0.5), ("e", 2.0)]);
        let y = el(&[("A", 3.0), ("b", 1.0)]);
        let xm = x.to_matrix_level();
        let ym = y.to_matrix_level();
        assert_eq!(xm.convolve(&ym).unwrap().to_scalar().unwrap(), x.convolve(&y));
        assert_eq!(xm.adjoint().to_scalar().unwrap(), x.adjoint());
        assert_eq!(xm.length_component(1).to_scalar().unwrap(), x.length_component(1));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let x = GroupAlgebraElement::from_terms([
            (Word::identity(), C64::new(0.1, -1.0 / 3.0)),
            (w("aB"), C64::new(std::f64::consts::PI, 1e-7)),
        ]);
        let s = x.to_json(false);
        assert!(s.contains("\"word\":\"\""));
        let back = MatrixLevelElement::from_json(&s).unwrap().to_scalar().unwrap();
        assert_eq!(back, x);
        assert_eq!(back.to_json(false), s);

        let a = CMatrix::from_row_slice(2, 2, &[C64::new(0.7, 0.1), c(-2.0), c(1e-3), C64::new(0.0, 1.0)]);
        let u = MatrixLevelElement::tensor(&a, &x).unwrap();
        let s2 = u.to_json(true);
        assert!(s2.contains("\"word\":\"e\""));
        assert_eq!(MatrixLevelElement::from_json(&s2).unwrap(), u);
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(MatrixLevelElement::from_json(r#"{"level":2,"terms":[{"word":"a","coeff":[1,0]}]}"#).is_err());
        assert!(MatrixLevelElement::from_json(r#"{"level":1,"terms":[{"word":"q","coeff":[1,0]}]}"#).is_err());
    }

    fn element() -> impl Strategy<Value = GroupAlgebraElement> {
        prop::collection::vec((0u64..161, -3i32..4, -3i32..4), 0..6).prop_map(|ts| {
            GroupAlgebraElement::from_terms(
                ts.into_iter()
                    .map(|(r, re, im)| (Word::unrank(r), C64::new(re as f64, im as f64))),
            )
        })
    }

    proptest! {
        // small-integer coefficients keep the arithmetic exact
        #[test]
        fn convolution_is_associative(x in element(), y in element(), z in element()) {
            prop_assert_eq!(x.convolve(&y).convolve(&z), x.convolve(&y.convolve(&z)));
        }

        #[test]
        fn convolution_distributes(x in element(), y in element(), z in element()) {
            prop_assert_eq!(x.convolve(&y.add(&z)), x.convolve(&y).add(&x.convolve(&z)));
        }

        #[test]
        fn adjoint_reverses_products(x in element(), y in element()) {
            prop_assert_eq!(x.convolve(&y).adjoint(), y.adjoint().convolve(&x.adjoint()));
        }

        #[test]
        fn length_components_sum_to_element(x in element()) {
            let mut acc = GroupAlgebraElement::zero();
            for d in 0..=x.support_radius() {
                acc = acc.add(&x.length_component(d));
            }
            prop_assert_eq!(acc, x);
        }
    }
}
