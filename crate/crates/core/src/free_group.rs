//! Reduced words in the free group on two generators.
//!
//! Letters are serialized as `a`, `b`, `A` (= a⁻¹) and `B` (= b⁻¹). Words are
//! totally ordered by length first and then lexicographically with
//! `a < b < A < B`; this order fixes every enumeration, rank and frame index in
//! the crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default largest radius that [`Enumerator`] will materialize
/// (`|ball(12)| = 1_062_881`).
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Longest word whose rank fits in a `u64`.
pub const MAX_RANKED_LENGTH: usize = 39;

/// A free generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    B = 1,
    AInv = 2,
    BInv = 3,
}

impl Letter {
    /// All letters in word order.
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::AInv, Letter::BInv];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Letter {
        Letter::ALL[i & 3]
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        // a <-> A and b <-> B differ in bit 1
        Letter::from_index(self.index() ^ 2)
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            'a' => Ok(Letter::A),
            'b' => Ok(Letter::B),
            'A' => Ok(Letter::AInv),
            'B' => Ok(Letter::BInv),
            other => Err(Error::input(format!("invalid letter symbol {other:?}"))),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::AInv => 'A',
            Letter::BInv => 'B',
        }
    }
}

/// A fully reduced word; the empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn generator(letter: Letter) -> Word {
        Word { letters: vec![letter] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    /// Parses a letter string. `"e"` and `""` denote the identity.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::identity());
        }
        let letters = s.chars().map(Letter::from_char).collect::<Result<Vec<_>>>()?;
        Ok(Word::reduce(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length |s|.
    #[inline]
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        out.reserve(other.len());
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Serialization used in every output: identity is `""` unless `pretty_identity`.
    pub fn to_string_with(&self, pretty_identity: bool) -> String {
        if self.is_identity() && pretty_identity {
            "e".to_string()
        } else {
            self.to_string()
        }
    }

    /// Position in word order (`rank(identity) = 0`).
    pub fn rank(&self) -> Result<u64> {
        let len = self.len();
        if len > MAX_RANKED_LENGTH {
            return Err(Error::capacity(format!(
                "word of length {len} has no 64-bit rank (max length {MAX_RANKED_LENGTH})"
            )));
        }
        if len == 0 {
            return Ok(0);
        }
        let mut r = ball_size(len - 1) as u64;
        let mut prev: Option<Letter> = None;
        for (pos, &l) in self.letters.iter().enumerate() {
            let weight = pow3((len - pos - 1) as u32) as u64;
            let idx = match prev {
                None => l.index(),
                // rank among the three letters that may follow `p`
                Some(p) => {
                    let forbidden = p.inverse().index();
                    l.index() - usize::from(l.index() > forbidden)
                }
            };
            r += idx as u64 * weight;
            prev = Some(l);
        }
        Ok(r)
    }

    /// Inverse of [`Word::rank`].
    pub fn unrank(rank: u64) -> Word {
        let rank = rank as u128;
        let mut len = 0usize;
        while ball_size(len) <= rank {
            len += 1;
        }
        if len == 0 {
            return Word::identity();
        }
        let mut rem = rank - ball_size(len - 1);
        let mut letters = Vec::with_capacity(len);
        let mut prev: Option<Letter> = None;
        for pos in 0..len {
            let weight = pow3((len - pos - 1) as u32);
            let idx = (rem / weight) as usize;
            rem %= weight;
            let l = match prev {
                None => Letter::from_index(idx),
                Some(p) => {
                    let forbidden = p.inverse().index();
                    Letter::from_index(if idx >= forbidden { idx + 1 } else { idx })
                }
            };
            letters.push(l);
            prev = Some(l);
        }
        Word { letters }
    }
}

#[inline]
fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s)
    }
}

#[inline]
pub(crate) fn pow3(e: u32) -> u128 {
    3u128.pow(e)
}

/// `|sphere(d)|`: 1 for d = 0, else 4·3^(d−1).
pub fn sphere_size(d: usize) -> u128 {
    if d == 0 {
        1
    } else {
        4 * pow3(d as u32 - 1)
    }
}

/// `|ball(k)| = 2·3^k − 1`.
pub fn ball_size(k: usize) -> u128 {
    2 * pow3(k as u32) - 1
}

/// Materializes spheres and balls up to a radius cap.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    pub cap: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator { cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl Enumerator {
    pub fn with_cap(cap: usize) -> Self {
        Enumerator { cap }
    }

    pub fn check(&self, radius: usize) -> Result<()> {
        if radius > self.cap {
            Err(Error::capacity(format!(
                "radius {radius} exceeds enumeration cap {}",
                self.cap
            )))
        } else {
            Ok(())
        }
    }

    /// All words of length `d` in word order.
    pub fn sphere(&self, d: usize) -> Result<Vec<Word>> {
        self.check(d)?;
        let mut layer = vec![Word::identity()];
        for _ in 0..d {
            layer = extend_layer(&layer);
        }
        Ok(layer)
    }

    /// All words of length at most `k` in word order.
    pub fn ball(&self, k: usize) -> Result<Vec<Word>> {
        self.check(k)?;
        let mut out = Vec::with_capacity(ball_size(k) as usize);
        let mut layer = vec![Word::identity()];
        out.extend(layer.iter().cloned());
        for _ in 0..k {
            layer = extend_layer(&layer);
            out.extend(layer.iter().cloned());
        }
        Ok(out)
    }

    /// Checked [`Word::unrank`] restricted to `ball(cap)`.
    pub fn unrank(&self, rank: u64) -> Result<Word> {
        if rank as u128 >= ball_size(self.cap) {
            return Err(Error::capacity(format!(
                "rank {rank} outside ball({})",
                self.cap
            )));
        }
        Ok(Word::unrank(rank))
    }
}

// Appending letters in order to a layer sorted in word order keeps it sorted.
fn extend_layer(layer: &[Word]) -> Vec<Word> {
    let mut next = Vec::with_capacity(layer.len() * 3 + 1);
    for w in layer {
        let forbidden = w.letters.last().map(|l| l.inverse());
        for l in Letter::ALL {
            if Some(l) == forbidden {
                continue;
            }
            let mut letters = Vec::with_capacity(w.len() + 1);
            letters.extend_from_slice(&w.letters);
            letters.push(l);
            next.push(Word { letters });
        }
    }
    next
}

pub fn sphere(d: usize) -> Result<Vec<Word>> {
    Enumerator::default().sphere(d)
}

pub fn ball(k: usize) -> Result<Vec<Word>> {
    Enumerator::default().ball(k)
}
