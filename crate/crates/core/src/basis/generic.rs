//! The cloning construction turning a sequence of finite-rank maps
//! `Ψ_k = Σ_j y_{k,j} ⊗ g_{k,j}` into a frame: every base pair of block `k`
//! is repeated `m(k)²` times with its functional divided by `m(k)²`, using the
//! same `n ↔ (k, p, j)` index arithmetic as the free-group frame.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{GroupAlgebraElement, C64};
use crate::basis::auerbach::{auerbach, AuerbachSystem, NormOracle};
use crate::error::{Error, Result};
use crate::frame::{BlockIndexer, FrameIndex};
use crate::free_group::{Enumerator, Word};
use crate::multipliers::psi_symbol;

/// Functionals that can be divided by a clone count.
pub trait Divisible {
    fn divided_by(&self, c: f64) -> Self;
}

/// Vectors and functionals that can be rescaled.
pub trait Scalable {
    fn scaled(&self, c: f64) -> Self;
}

/// `Σ_k c_k δ_k`, a functional given by finitely many coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional<K> {
    pub terms: Vec<(K, f64)>,
}

impl<K> LinearFunctional<K> {
    pub fn new(terms: Vec<(K, f64)>) -> Self {
        LinearFunctional { terms }
    }
}

impl LinearFunctional<Word> {
    pub fn apply(&self, x: &GroupAlgebraElement) -> C64 {
        self.terms.iter().map(|(w, c)| x.delta_pairing(w) * *c).sum()
    }
}

impl<K: Clone> Divisible for LinearFunctional<K> {
    fn divided_by(&self, c: f64) -> Self {
        LinearFunctional { terms: self.terms.iter().map(|(k, v)| (k.clone(), v / c)).collect() }
    }
}

impl<K: Clone> Scalable for LinearFunctional<K> {
    fn scaled(&self, c: f64) -> Self {
        LinearFunctional { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }
}

impl Divisible for DVector<f64> {
    fn divided_by(&self, c: f64) -> Self {
        self / c
    }
}

impl Scalable for DVector<f64> {
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
}

/// One cloned term `(x_n, f_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericTerm<V, G> {
    pub index: FrameIndex,
    pub vector: V,
    pub functional: G,
}

/// Blocks of base pairs `(y_{k,j}, g_{k,j})`, `j = 1..=m(k)`.
#[derive(Clone, Debug)]
pub struct BlockMapSpec<V, G> {
    blocks: Vec<Vec<(V, G)>>,
    indexer: BlockIndexer,
}

impl<V: Clone, G: Clone + Divisible> BlockMapSpec<V, G> {
    pub fn new(blocks: Vec<Vec<(V, G)>>) -> Result<Self> {
        if let Some(k) = blocks.iter().position(|b| b.is_empty()) {
            return Err(Error::input(format!("block {} has no base pairs", k + 1)));
        }
        let indexer = BlockIndexer::new(blocks.iter().map(|b| b.len() as u64).collect())?;
        Ok(BlockMapSpec { blocks, indexer })
    }

    pub fn indexer(&self) -> &BlockIndexer {
        &self.indexer
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn blocks(&self) -> &[Vec<(V, G)>] {
        &self.blocks
    }

    /// Last index covered by the spec.
    pub fn last_index(&self) -> u128 {
        self.indexer.block_end(self.blocks.len()).unwrap_or(0)
    }

    /// `(x_n, f_n) = (y_{k,j}, g_{k,j} / m(k)²)`.
    pub fn term(&self, n: u128) -> Result<GenericTerm<V, G>> {
        let index = self.indexer.decompose(n)?;
        let (v, g) = &self.blocks[index.k - 1][index.j as usize - 1];
        let m = index.block_size;
        Ok(GenericTerm { index, vector: v.clone(), functional: g.divided_by((m * m) as f64) })
    }

    /// All terms in order, generated lazily.
    pub fn terms(&self) -> impl Iterator<Item = GenericTerm<V, G>> + '_ {
        (1..=self.last_index()).map(move |n| self.term(n).expect("index within the blocks"))
    }

    /// Rescales every pair to `(y/‖y‖, ‖y‖·g)`, leaving each rank-one term
    /// `y ⊗ g` unchanged.
    pub fn normalized_with<F>(&self, norm: F) -> Result<Self>
    where
        F: Fn(&V) -> f64,
        V: Scalable,
        G: Scalable,
    {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|(v, g)| {
                        let r = norm(v);
                        if !(r > 0.0 && r.is_finite()) {
                            return Err(Error::input(format!("cannot normalize a vector of norm {r}")));
                        }
                        Ok((v.scaled(1.0 / r), g.scaled(r)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockMapSpec { blocks, indexer: self.indexer.clone() })
    }
}

/// The free-group block map spec: block `k` pairs each `s ∈ ball(k)` (word order) with
/// `psi_symbol(k, |s|)·δ_s`.
pub fn free_group_spec(blocks: usize) -> Result<BlockMapSpec<Word, LinearFunctional<Word>>> {
    let en = Enumerator::default();
    let blocks = (1..=blocks)
        .map(|k| {
            Ok(en
                .ball(k)?
                .into_iter()
                .map(|s| {
                    let g = LinearFunctional::new(vec![(s.clone(), psi_symbol(k, s.len()))]);
                    (s, g)
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    BlockMapSpec::new(blocks)
}

/// A base pair `(y, g)` on `ℝ^D`.
pub type VectorPair = (DVector<f64>, DVector<f64>);

/// Base pairs for a finite-rank map `Ψ` on `ℝ^D` through an Auerbach system of
/// its range: `y_j` from the system and `g_j = y*_j ∘ Ψ` as a row vector, so
/// that `Σ_j g_j(x) y_j = Ψ(x)`.
pub fn auerbach_block(
    range_basis: &[Vec<f64>],
    map: &DMatrix<f64>,
    oracle: &dyn NormOracle,
    eps: f64,
) -> Result<(AuerbachSystem, Vec<VectorPair>)> {
    let sys = auerbach(range_basis, oracle, eps)?;
    let ambient = range_basis[0].len();
    if map.nrows() != ambient || map.ncols() != ambient {
        return Err(Error::input("map and range basis dimensions differ"));
    }
    let b = DMatrix::from_fn(ambient, range_basis.len(), |r, c| range_basis[c][r]);
    // coordinates of Ψx in the range basis: c = B⁺ Ψ x
    let pinv = b
        .clone()
        .pseudo_inverse(1e-13)
        .map_err(|e| Error::input(format!("range basis pseudo-inverse failed: {e}")))?;
    let coord_map = &pinv * map;
    let pairs = (0..sys.dim())
        .map(|j| {
            let y = DVector::from_vec(sys.vectors[j].clone());
            let g = (sys.functionals.row(j) * &coord_map).transpose();
            (y, g)
        })
        .collect();
    Ok((sys, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::auerbach::SupNorm;
    use crate::frame::FreeGroupFrame;

    #[test]
    fn single_block_of_size_one() {
        let spec = BlockMapSpec::new(vec![vec![(7u32, LinearFunctional::new(vec![(7u32, 2.0)]))]]).unwrap();
        let terms: Vec<_> = spec.terms().collect();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].vector, 7);
        assert_eq!(terms[0].functional, LinearFunctional::new(vec![(7u32, 2.0)]));
    }

    #[test]
    fn free_group_block_boundaries() {
        let spec = free_group_spec(3).unwrap();
        assert_eq!(spec.block_sizes(), vec![5, 17, 53]);
        assert_eq!(spec.indexer().block_end(1).unwrap(), 125);
        assert_eq!(spec.indexer().block_end(2).unwrap(), 5038);
    }

    #[test]
    fn reproduces_the_free_group_frame() {
        let spec = free_group_spec(3).unwrap();
        let frame = FreeGroupFrame::default();
        for n in 1..=10_000u128 {
            let g = spec.term(n).unwrap();
            let t = frame.term(n).unwrap();
            assert_eq!(g.index, t.index);
            assert_eq!(g.vector, t.word);
            assert_eq!(g.functional.terms, vec![(t.word.clone(), t.coefficient)]);
        }
    }

    #[test]
    fn block_sums_reproduce_the_maps() {
        let spec = free_group_spec(2).unwrap();
        let x = GroupAlgebraElement::from_real_terms([("", 1.0), ("a", 2.0), ("bA", -1.0)]).unwrap();
        let mut acc = std::collections::BTreeMap::<Word, C64>::new();
        for t in spec.terms().filter(|t| t.index.k == 2) {
            *acc.entry(t.vector.clone()).or_default() += t.functional.apply(&x);
        }
        for (s, c) in x.terms() {
            let expected = c * psi_symbol(2, s.len());
            assert!((acc.get(s).copied().unwrap_or_default() - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn normalization_keeps_rank_one_terms() {
        let v = DVector::from_vec(vec![3.0, 4.0]);
        let g = DVector::from_vec(vec![1.0, -1.0]);
        let spec = BlockMapSpec::new(vec![vec![(v.clone(), g.clone())]]).unwrap();
        let normed = spec.normalized_with(|v: &DVector<f64>| v.norm()).unwrap();
        let (nv, ng) = &normed.blocks()[0][0];
        assert!((nv.norm() - 1.0).abs() < 1e-15);
        let before = &v * g.transpose();
        let after = nv * ng.transpose();
        assert!((before - after).norm() < 1e-14);
        let zero = BlockMapSpec::new(vec![vec![(DVector::from_vec(vec![0.0]), g)]]).unwrap();
        assert!(zero.normalized_with(|v: &DVector<f64>| v.norm()).is_err());
        assert!(BlockMapSpec::<u8, DVector<f64>>::new(vec![vec![]]).is_err());
    }

    #[test]
    fn auerbach_block_factors_the_map() {
        // a rank-2 map on ℝ³ under the sup norm
        let range = vec![vec![1.0, 0.5, -0.25], vec![0.0, 1.0, 2.0]];
        let b = DMatrix::from_fn(3, 2, |r, c| range[c][r]);
        let coeff = DMatrix::from_row_slice(2, 3, &[0.2, -1.0, 0.4, 0.7, 0.1, 0.0]);
        let map = &b * coeff;
        let (sys, pairs) = auerbach_block(&range, &map, &SupNorm, 0.05).unwrap();
        assert!(sys.biorthogonality_defect() <= 1e-10);
        let x = DVector::from_vec(vec![0.3, -2.0, 1.1]);
        let mut recon = DVector::zeros(3);
        for (y, g) in &pairs {
            recon += y * g.dot(&x);
        }
        assert!((recon - &map * &x).norm() < 1e-12);
        let spec = BlockMapSpec::new(vec![pairs]).unwrap();
        assert_eq!(spec.last_index(), 8);
    }
}
