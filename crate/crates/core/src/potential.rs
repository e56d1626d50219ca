//! Homogeneous pair potentials `U = Σ_{i<j} Z_ij / ‖q_i − q_j‖^α`, their
//! cluster splittings, gradients and the boundary defining function `ρ`.

use crate::error::{Error, Result};
use crate::metric::{distance, MassSystem, Points};
use crate::partitions::Partition;

/// `Z / ‖z‖^α` for the pair `(i, j)`.
pub fn pair_potential(sys: &MassSystem, i: usize, j: usize, z: &[f64]) -> Result<f64> {
    if z.len() != sys.dim() {
        return Err(Error::Domain(format!("separation vector of length {}, expected {}", z.len(), sys.dim())));
    }
    let r = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::CollisionSingularity { i: i + 1, j: j + 1 });
    }
    Ok(sys.coupling(i, j) / r.powf(sys.alpha()))
}

fn sum_pairs(sys: &MassSystem, q: &Points, keep: impl Fn(usize, usize) -> bool) -> Result<f64> {
    sys.check_shape(q)?;
    let n = sys.n();
    let mut u = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if !keep(i, j) {
                continue;
            }
            let r = distance(q.row(i), q.row(j));
            if r == 0.0 {
                return Err(Error::CollisionSingularity { i: i + 1, j: j + 1 });
            }
            u += sys.coupling(i, j) / r.powf(sys.alpha());
        }
    }
    Ok(u)
}

fn grad_pairs(sys: &MassSystem, q: &Points, keep: impl Fn(usize, usize) -> bool) -> Result<Points> {
    sys.check_shape(q)?;
    let n = sys.n();
    let a = sys.alpha();
    let mut g = sys.zeros();
    for i in 0..n {
        for j in i + 1..n {
            if !keep(i, j) {
                continue;
            }
            let diff = &q.row(i) - &q.row(j);
            let r = diff.dot(&diff).sqrt();
            if r == 0.0 {
                return Err(Error::CollisionSingularity { i: i + 1, j: j + 1 });
            }
            // d/dq_i of Z r^{-α} = -α Z r^{-α-2} (q_i - q_j)
            let c = -a * sys.coupling(i, j) / r.powf(a + 2.0);
            g.row_mut(i).scaled_add(c, &diff);
            g.row_mut(j).scaled_add(-c, &diff);
        }
    }
    Ok(g)
}

fn to_mass_gradient(sys: &MassSystem, mut g: Points) -> Points {
    for (mut row, m) in g.outer_iter_mut().zip(sys.masses()) {
        row /= *m;
    }
    g
}

/// `U(q)`; errors on the collision set.
pub fn potential(sys: &MassSystem, q: &Points) -> Result<f64> {
    sum_pairs(sys, q, |_, _| true)
}

pub fn grad_potential_euclidean(sys: &MassSystem, q: &Points) -> Result<Points> {
    grad_pairs(sys, q, |_, _| true)
}

/// Gradient with respect to the mass metric, `ℳ⁻¹ ∇U`.
pub fn grad_potential_mass(sys: &MassSystem, q: &Points) -> Result<Points> {
    Ok(to_mass_gradient(sys, grad_potential_euclidean(sys, q)?))
}

fn check_partition(sys: &MassSystem, part: &Partition) -> Result<()> {
    if part.n() != sys.n() {
        return Err(Error::Domain(format!("partition of {} elements used with {} particles", part.n(), sys.n())));
    }
    Ok(())
}

/// `U^I_𝒞`: pairs inside a common block. Only those pairs are checked for collisions.
pub fn internal_potential(sys: &MassSystem, part: &Partition, q: &Points) -> Result<f64> {
    check_partition(sys, part)?;
    sum_pairs(sys, q, |i, j| part.same_block(i, j))
}

/// `U^E_𝒞`: pairs in different blocks.
pub fn external_potential(sys: &MassSystem, part: &Partition, q: &Points) -> Result<f64> {
    check_partition(sys, part)?;
    sum_pairs(sys, q, |i, j| !part.same_block(i, j))
}

/// Mass gradient of `U^I_𝒞`. It lies in `Δ^I_𝒞`.
pub fn grad_internal_potential_mass(sys: &MassSystem, part: &Partition, q: &Points) -> Result<Points> {
    check_partition(sys, part)?;
    Ok(to_mass_gradient(sys, grad_pairs(sys, q, |i, j| part.same_block(i, j))?))
}

/// Kinetic, potential and Hamiltonian parts for one cluster decomposition.
/// Per-block vectors follow the block order of the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic_total: f64,
    pub kinetic_external: f64,
    pub kinetic_internal_per_block: Vec<f64>,
    pub potential_total: f64,
    pub potential_internal_per_block: Vec<f64>,
    pub potential_external: f64,
    pub hamiltonian_internal_per_block: Vec<f64>,
}

impl EnergyBreakdown {
    pub fn kinetic_internal(&self) -> f64 {
        self.kinetic_internal_per_block.iter().sum()
    }

    pub fn potential_internal(&self) -> f64 {
        self.potential_internal_per_block.iter().sum()
    }

    /// `H = K − U`.
    pub fn hamiltonian(&self) -> f64 {
        self.kinetic_total - self.potential_total
    }

    pub fn hamiltonian_external(&self) -> f64 {
        self.kinetic_external - self.potential_external
    }
}

/// Splits `K(p)` and `U(q)` along `part`; `p` is the momentum array.
pub fn energy_breakdown(sys: &MassSystem, part: &Partition, q: &Points, p: &Points) -> Result<EnergyBreakdown> {
    check_partition(sys, part)?;
    sys.check_shape(q)?;
    sys.check_shape(p)?;
    let (p_ext, p_int) = crate::metric::project_momenta(sys, part, p)?;
    let kin = |arr: &Points, idx: &mut dyn Iterator<Item = usize>| -> f64 {
        idx.map(|i| arr.row(i).dot(&arr.row(i)) / (2.0 * sys.mass(i))).sum()
    };
    let kinetic_total = kin(p, &mut (0..sys.n()));
    let kinetic_external = kin(&p_ext, &mut (0..sys.n()));
    let kinetic_internal_per_block: Vec<f64> =
        part.blocks().iter().map(|b| kin(&p_int, &mut b.iter().copied())).collect();

    let potential_total = potential(sys, q)?;
    let mut potential_internal_per_block = Vec::with_capacity(part.rank());
    for (b, _) in part.blocks().iter().enumerate() {
        potential_internal_per_block
            .push(sum_pairs(sys, q, |i, j| part.block_of(i) == b && part.block_of(j) == b)?);
    }
    let potential_external = external_potential(sys, part, q)?;
    let hamiltonian_internal_per_block = kinetic_internal_per_block
        .iter()
        .zip(&potential_internal_per_block)
        .map(|(k, u)| k - u)
        .collect();
    Ok(EnergyBreakdown {
        kinetic_total,
        kinetic_external,
        kinetic_internal_per_block,
        potential_total,
        potential_internal_per_block,
        potential_external,
        hamiltonian_internal_per_block,
    })
}

/// `ρ = U^{-1/α}` off the collision set and `0` on it.
pub fn rho(sys: &MassSystem, q: &Points) -> f64 {
    match potential(sys, q) {
        Ok(u) => u.powf(-1.0 / sys.alpha()),
        Err(Error::CollisionSingularity { .. }) => 0.0,
        Err(e) => panic!("rho: {e}"),
    }
}

/// `W_𝒞(Q) = U^I_𝒞(Q)` on the internal unit sphere, together with its
/// sphere gradient `g − <g, Q> Q`, `g` the mass gradient of `U^I_𝒞` at `Q`.
pub fn collision_sphere_potential(sys: &MassSystem, part: &Partition, direction: &Points) -> Result<(f64, Points)> {
    let w = internal_potential(sys, part, direction)?;
    let g = grad_internal_potential_mass(sys, part, direction)?;
    let radial = sys.inner(&g, direction) / sys.inner(direction, direction);
    let tangent = &g - &(direction * radial);
    Ok((w, tangent))
}
