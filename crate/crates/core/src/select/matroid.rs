use crate::error::{Error, Result};

/// Sets of alternatives as bitmasks over `0..n`.
pub type Set = u64;

/// Largest supported ground set.
pub const MAX_ELEMENTS: usize = 63;

/// Uniform and partition matroids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Matroid {
    /// Any set of at most `k` of the `n` elements is independent.
    Uniform { n: usize, k: usize },
    /// At most `caps[b]` elements from each block `blocks[b]`.
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
}

/// Answer of [`Matroid::oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleAnswer {
    pub independent: bool,
    pub rank: usize,
    pub augments: bool,
}

impl Matroid {
    /// # Errors
    ///
    /// `n` above [`MAX_ELEMENTS`].
    pub fn uniform(n: usize, k: usize) -> Result<Matroid> {
        if n > MAX_ELEMENTS {
            return Err(Error::Domain(format!(
                "at most {MAX_ELEMENTS} elements are supported, got {n}"
            )));
        }
        Ok(Matroid::Uniform { n, k })
    }

    /// # Errors
    ///
    /// Blocks that do not partition `0..n`, or a cap count that differs from the block
    /// count.
    pub fn partition(blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Matroid> {
        if blocks.len() != caps.len() {
            return Err(Error::Domain(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                caps.len()
            )));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        if n > MAX_ELEMENTS {
            return Err(Error::Domain(format!(
                "at most {MAX_ELEMENTS} elements are supported, got {n}"
            )));
        }
        let mut seen = vec![false; n];
        for &e in blocks.iter().flatten() {
            if e >= n || std::mem::replace(&mut seen[e], true) {
                return Err(Error::Domain(format!(
                    "blocks must partition 0..{n}; element {e} is out of range or repeated"
                )));
            }
        }
        Ok(Matroid::Partition { blocks, caps })
    }

    /// Size of the ground set.
    pub fn n(&self) -> usize {
        match self {
            Matroid::Uniform { n, .. } => *n,
            Matroid::Partition { blocks, .. } => blocks.iter().map(Vec::len).sum(),
        }
    }

    pub fn rank(&self, s: Set) -> usize {
        match self {
            Matroid::Uniform { k, .. } => (s.count_ones() as usize).min(*k),
            Matroid::Partition { blocks, caps } => blocks
                .iter()
                .zip(caps)
                .map(|(b, &cap)| b.iter().filter(|&&e| s >> e & 1 == 1).count().min(cap))
                .sum(),
        }
    }

    /// Rank of the ground set.
    pub fn full_rank(&self) -> usize {
        self.rank(self.ground())
    }

    pub fn ground(&self) -> Set {
        if self.n() == 0 {
            0
        } else {
            u64::MAX >> (64 - self.n())
        }
    }

    pub fn independent(&self, s: Set) -> bool {
        self.rank(s) == s.count_ones() as usize
    }

    /// `rank(S + i) > rank(S)`.
    pub fn augments(&self, s: Set, i: usize) -> bool {
        self.rank(s | 1 << i) > self.rank(s)
    }

    /// # Errors
    ///
    /// `S` or `i` outside the ground set.
    pub fn oracle(&self, s: Set, i: usize) -> Result<OracleAnswer> {
        if i >= self.n() || s & !self.ground() != 0 {
            return Err(Error::Domain(format!(
                "element {i} or set {s:#b} outside a ground set of {}",
                self.n()
            )));
        }
        Ok(OracleAnswer {
            independent: self.independent(s),
            rank: self.rank(s),
            augments: self.augments(s, i),
        })
    }
}
