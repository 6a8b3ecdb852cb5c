//! Block/clone index arithmetic.
//!
//! Block `k` has `m_k` base pairs, each repeated `m_k²` times, so it occupies
//! `m_k³` consecutive frame indices. Inside a block, `i = p·m_k + j` with clone
//! round `0 ≤ p < m_k²` and base index `1 ≤ j ≤ m_k`; globally
//! `n = Σ_{r<k} m_r³ + i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_group::ball_size;

/// Largest block whose cumulative end `Σ_{r≤k} (2·3^r − 1)³` fits in a `u128`.
pub const DEFAULT_BLOCK_CAP: usize = 26;

/// The decomposition `n ↔ (k, i, p, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameIndex {
    pub n: u128,
    pub k: usize,
    pub i: u128,
    pub p: u128,
    pub j: u64,
    /// Block size `m_k`.
    pub block_size: u64,
}

impl FrameIndex {
    /// True when `n` is the last index of its block.
    pub fn at_block_end(&self) -> bool {
        let m = self.block_size as u128;
        self.i == m * m * m
    }
}

/// Index arithmetic for an arbitrary sequence of block sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockIndexer {
    sizes: Vec<u64>,
    // ends[k - 1] = Σ_{r ≤ k} m_r³
    ends: Vec<u128>,
}

impl BlockIndexer {
    /// Block sizes `m_1, m_2, …`; every size must be positive.
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        let mut ends = Vec::with_capacity(sizes.len());
        let mut acc: u128 = 0;
        for (idx, &m) in sizes.iter().enumerate() {
            if m == 0 {
                return Err(Error::input(format!("block {} has size 0", idx + 1)));
            }
            let m = m as u128;
            acc = m
                .checked_mul(m)
                .and_then(|m2| m2.checked_mul(m))
                .and_then(|m3| acc.checked_add(m3))
                .ok_or_else(|| Error::capacity(format!("block {} overflows 128-bit indices", idx + 1)))?;
            ends.push(acc);
        }
        Ok(BlockIndexer { sizes, ends })
    }

    /// Block sizes `m_k = 2·3^k − 1` for `k = 1..=block_cap`.
    pub fn free_group(block_cap: usize) -> Result<Self> {
        if block_cap > DEFAULT_BLOCK_CAP {
            return Err(Error::capacity(format!(
                "block cap {block_cap} exceeds the 128-bit limit {DEFAULT_BLOCK_CAP}"
            )));
        }
        Self::new((1..=block_cap).map(|k| ball_size(k) as u64).collect())
    }

    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    fn check_block(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::input("block index k starts at 1"));
        }
        if k > self.sizes.len() {
            return Err(Error::capacity(format!(
                "block {k} exceeds block cap {}",
                self.sizes.len()
            )));
        }
        Ok(())
    }

    pub fn block_size(&self, k: usize) -> Result<u64> {
        self.check_block(k)?;
        Ok(self.sizes[k - 1])
    }

    /// Number of frame indices before block `k`.
    pub fn block_offset(&self, k: usize) -> Result<u128> {
        self.check_block(k)?;
        Ok(if k == 1 { 0 } else { self.ends[k - 2] })
    }

    /// Last frame index of block `k`, `Σ_{r≤k} m_r³`.
    pub fn block_end(&self, k: usize) -> Result<u128> {
        self.check_block(k)?;
        Ok(self.ends[k - 1])
    }

    pub fn decompose(&self, n: u128) -> Result<FrameIndex> {
        if n == 0 {
            return Err(Error::input("frame indices start at 1"));
        }
        let pos = self.ends.partition_point(|&end| end < n);
        if pos == self.ends.len() {
            return Err(Error::capacity(format!(
                "frame index {n} lies beyond block cap {}",
                self.sizes.len()
            )));
        }
        let k = pos + 1;
        let offset = if pos == 0 { 0 } else { self.ends[pos - 1] };
        let i = n - offset;
        let m = self.sizes[pos] as u128;
        Ok(FrameIndex {
            n,
            k,
            i,
            p: (i - 1) / m,
            j: ((i - 1) % m + 1) as u64,
            block_size: self.sizes[pos],
        })
    }

    /// `n` for block `k` and within-block index `i`.
    pub fn compose(&self, k: usize, i: u128) -> Result<u128> {
        self.check_block(k)?;
        let m = self.sizes[k - 1] as u128;
        if i == 0 || i > m * m * m {
            return Err(Error::input(format!("within-block index {i} outside 1..={}", m * m * m)));
        }
        Ok(self.block_offset(k)? + i)
    }

    /// `n` for block `k`, clone round `p` and base index `j`.
    pub fn compose_clone(&self, k: usize, p: u128, j: u64) -> Result<u128> {
        let m = self.block_size(k)?;
        if j == 0 || j > m || p >= (m as u128) * (m as u128) {
            return Err(Error::input(format!("(p, j) = ({p}, {j}) outside block {k}")));
        }
        self.compose(k, p * m as u128 + j as u128)
    }
}
