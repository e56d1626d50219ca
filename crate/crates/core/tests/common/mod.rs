#![allow(dead_code)]

use blowup_core::sampling::{configuration, rng_for, unit_direction};
use blowup_core::{MassSystem, Partition, Points};
use proptest::prelude::*;
use rand::Rng;

/// System with masses in `[0.5, 3]`, unit couplings.
pub fn system(n: usize, d: usize, alpha: f64, seed: u64) -> MassSystem {
    let mut rng = rng_for(seed, u64::MAX);
    let masses = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    MassSystem::uniform(d, masses, 1.0, alpha).unwrap()
}

pub fn random_partition(n: usize, seed: u64) -> Partition {
    let mut rng = rng_for(seed, u64::MAX - 1);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    Partition::from_labels(&labels)
}

pub fn config(sys: &MassSystem, seed: u64, index: u64) -> Points {
    configuration(sys, &mut rng_for(seed, index), 1.0)
}

pub fn direction(sys: &MassSystem, seed: u64, index: u64) -> Points {
    unit_direction(sys, &mut rng_for(seed, index))
}

pub fn max_diff(a: &Points, b: &Points) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Points) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `(n, d, alpha, seed)` with `2 ≤ n ≤ 5`, `1 ≤ d ≤ 3`, `α ∈ [0.5, 1.9]`.
pub fn setup() -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (2usize..=5, 1usize..=3, 0.5f64..1.9, any::<u64>())
}
