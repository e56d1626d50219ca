//! The partition lattice of the particle labels.
//!
//! A [`Partition`] is a cluster decomposition of `{0, .., n-1}` (printed 1-based).
//! It is stored canonically as a restricted-growth string: `labels[i]` is the
//! index of the block containing `i`, with blocks numbered by their least
//! element. Two values are equal iff they describe the same set partition.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`]; Bell(12) = 4 213 597.
pub const MAX_ENUMERATION_N: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from arbitrary (0-based) blocks, canonicalizing them.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Domain("empty block in partition".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::Domain(format!(
                        "element {} out of range for n = {n}",
                        i + 1
                    )));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::Domain(format!("element {} appears twice", i + 1)));
                }
                owner[i] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Domain(format!("element {} not covered", i + 1)));
        }
        Ok(Self::from_labels(&owner))
    }

    /// Builds a partition from any block labelling (labels need not be canonical).
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: Vec<(usize, usize)> = Vec::new();
        let mut canon = Vec::with_capacity(labels.len());
        for &l in labels {
            let c = match remap.iter().find(|(old, _)| *old == l) {
                Some(&(_, c)) => c,
                None => {
                    let c = remap.len();
                    remap.push((l, c));
                    c
                }
            };
            canon.push(c);
        }
        let mut blocks = vec![Vec::new(); remap.len()];
        for (i, &c) in canon.iter().enumerate() {
            blocks[c].push(i);
        }
        Partition { labels: canon, blocks }
    }

    /// `C_min`: every particle on its own.
    pub fn finest(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    /// `C_max`: a single cluster holding every particle.
    pub fn coarsest(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    /// The partition whose only non-singleton block is the pair `{i, j}`.
    pub fn pair(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::Domain(format!("invalid pair ({i}, {j}) for n = {n}")));
        }
        let labels: Vec<usize> = (0..n).map(|k| if k == j { i } else { k }).collect();
        Ok(Self::from_labels(&labels))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks, `|C|`.
    pub fn rank(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Canonical restricted-growth labels.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Index of the block containing `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn is_finest(&self) -> bool {
        self.rank() == self.n()
    }

    pub fn is_coarsest(&self) -> bool {
        self.rank() == 1
    }

    fn check_same_n(&self, other: &Partition) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Domain(format!(
                "partitions of different sets (n = {} vs {})",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }

    /// `self ≼ other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        self.check_same_n(other)?;
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&i| other.labels[i] == other.labels[b[0]])))
    }

    pub fn comparable(&self, other: &Partition) -> Result<bool> {
        Ok(self.refines(other)? || other.refines(self)?)
    }

    /// Least upper bound: blocks are the connected components of the union of
    /// both block relations.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.check_same_n(other)?;
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            for block in &p.blocks {
                for &i in &block[1..] {
                    let (a, b) = (find(&mut parent, block[0]), find(&mut parent, i));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Greatest lower bound: nonempty pairwise intersections of blocks.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.check_same_n(other)?;
        let n = self.n();
        let labels: Vec<usize> = (0..n)
            .map(|i| self.labels[i] * n + other.labels[i])
            .collect();
        Ok(Partition::from_labels(&labels))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order of the restricted-growth strings (the enumeration order).
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.labels.cmp(&other.labels)
    }
}

/// All set partitions of `{1..n}` in lexicographic restricted-growth order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::SizeLimit(format!(
            "partition enumeration requires 1 <= n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    // maxes[i] = max(rgs[0..i])
    let mut maxes = vec![0usize; n];
    loop {
        out.push(Partition::from_labels(&rgs));
        // advance: rightmost position that may still grow
        let mut k = n - 1;
        loop {
            if k == 0 {
                return Ok(out);
            }
            if rgs[k] <= maxes[k - 1] {
                break;
            }
            k -= 1;
        }
        rgs[k] += 1;
        maxes[k] = maxes[k - 1].max(rgs[k]);
        for i in k + 1..n {
            rgs[i] = 0;
            maxes[i] = maxes[k];
        }
    }
}

impl fmt::Display for Partition {
    /// `{1,2|3}` for `{{1,2},{3}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (b, block) in self.blocks.iter().enumerate() {
            if b > 0 {
                f.write_str("|")?;
            }
            for (k, i) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition{self}")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `{1,2|3}`; whitespace is ignored, `n` is the largest label.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("partition must be enclosed in braces: {s:?}")))?;
        if inner.is_empty() {
            return Err(Error::Parse("empty partition".into()));
        }
        let mut blocks = Vec::new();
        let mut n = 0;
        for part in inner.split('|') {
            let mut block = Vec::new();
            for tok in part.split(',') {
                let i: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element {tok:?} in {s:?}")))?;
                if i == 0 {
                    return Err(Error::Parse("partition elements are 1-based".into()));
                }
                n = n.max(i);
                block.push(i - 1);
            }
            blocks.push(block);
        }
        Partition::new(n, blocks).map_err(|e| Error::Parse(e.to_string()))
    }
}
