//! Set partitions built by inserting elements one at a time, blocks stored as bitmasks.

use crate::SizeLimit;

pub const MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLattice {
    pub n: usize,
    /// Each partition as block bitmasks (bit `k` is element `k`, 0-based),
    /// blocks ordered by least element.
    pub partitions: Vec<Vec<u32>>,
    /// `refines[a][b]` iff partition `a` refines partition `b`.
    pub refines: Vec<Vec<bool>>,
}

impl PartitionLattice {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Blocks as 1-based element lists, for comparison with other representations.
    pub fn blocks(&self, k: usize) -> Vec<Vec<usize>> {
        self.partitions[k]
            .iter()
            .map(|&m| (0..self.n).filter(|i| m & (1 << i) != 0).map(|i| i + 1).collect())
            .collect()
    }
}

fn insert(k: usize, n: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if k == n {
        let mut p = current.clone();
        p.sort_by_key(|m| m.trailing_zeros());
        out.push(p);
        return;
    }
    for b in 0..current.len() {
        current[b] |= 1 << k;
        insert(k + 1, n, current, out);
        current[b] &= !(1 << k);
    }
    current.push(1 << k);
    insert(k + 1, n, current, out);
    current.pop();
}

fn refines(a: &[u32], b: &[u32]) -> bool {
    a.iter().all(|&x| b.iter().any(|&y| x & !y == 0))
}

/// All partitions of `{1..n}` with the full refinement matrix, `n ≤ 8`.
pub fn exhaustive_partition_oracle(n: usize) -> Result<PartitionLattice, SizeLimit> {
    if n == 0 || n > MAX_N {
        return Err(SizeLimit(format!("partition oracle supports 1 ≤ n ≤ {MAX_N}, got {n}")));
    }
    let mut partitions = Vec::new();
    insert(0, n, &mut Vec::new(), &mut partitions);
    let refines = partitions
        .iter()
        .map(|a| partitions.iter().map(|b| refines(a, b)).collect())
        .collect();
    Ok(PartitionLattice { n, partitions, refines })
}
