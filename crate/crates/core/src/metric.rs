//! Mass-metric geometry of the center-of-mass configuration space `M`.
//!
//! Arrays of shape `n × d` (one row per particle) are used for positions,
//! velocities, momenta and gradients alike. The mass inner product is
//! `<q, q'>_M = Σ m_i q_i · q'_i`.

use std::ops::Deref;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::partitions::Partition;

/// An `n × d` array, one row per particle.
pub type Points = Array2<f64>;

/// Relative tolerance of the center-of-mass constraint.
pub const TOL_COM: f64 = 1e-12;
/// Absolute floor used in relative comparisons.
pub const EPS_FLOOR: f64 = 1e-300;
/// Internal components with mass norm below this are treated as zero.
pub const EPS_POLAR: f64 = 1e-14;

/// Physical constants of the particle system: masses, pair couplings
/// `Z_{i,j} > 0` and the homogeneity exponent `0 < α < 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSystem {
    dim: usize,
    masses: Vec<f64>,
    couplings: Vec<f64>,
    alpha: f64,
}

impl MassSystem {
    /// `couplings` is the full symmetric `n × n` table in row-major order;
    /// the diagonal is ignored.
    pub fn new(dim: usize, masses: Vec<f64>, couplings: Vec<f64>, alpha: f64) -> Result<Self> {
        let n = masses.len();
        if n < 2 {
            return Err(Error::Domain(format!("need at least two particles, got {n}")));
        }
        if dim == 0 {
            return Err(Error::Domain("space dimension must be positive".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Domain(format!("masses must be positive, got {m}")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if couplings.len() != n * n {
            return Err(Error::Domain(format!(
                "coupling table has {} entries, expected {}",
                couplings.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let z = couplings[i * n + j];
                if !(z.is_finite() && z > 0.0) {
                    return Err(Error::Domain(format!(
                        "coupling Z[{},{}] = {z} must be positive",
                        i + 1,
                        j + 1
                    )));
                }
                if z != couplings[j * n + i] {
                    return Err(Error::Domain(format!(
                        "coupling table not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(MassSystem { dim, masses, couplings, alpha })
    }

    /// Every pair coupled with the same strength `z`.
    pub fn uniform(dim: usize, masses: Vec<f64>, z: f64, alpha: f64) -> Result<Self> {
        let n = masses.len();
        Self::new(dim, masses, vec![z; n * n], alpha)
    }

    /// `Z_{i,j} = g m_i m_j`.
    pub fn gravitational(dim: usize, masses: Vec<f64>, g: f64, alpha: f64) -> Result<Self> {
        let n = masses.len();
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                z[i * n + j] = g * masses[i] * masses[j];
            }
        }
        Self::new(dim, masses, z, alpha)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n() + j]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `m_C` for a set of particle indices.
    pub fn cluster_mass(&self, block: &[usize]) -> f64 {
        block.iter().map(|&i| self.masses[i]).sum()
    }

    /// Dimension of `M`, `d (n - 1)`.
    pub fn config_dim(&self) -> usize {
        self.dim * (self.n() - 1)
    }

    /// The subsystem formed by the listed particles, in that order.
    pub fn subsystem(&self, indices: &[usize]) -> Result<MassSystem> {
        let masses = indices.iter().map(|&i| self.masses[i]).collect();
        let mut z = Vec::with_capacity(indices.len() * indices.len());
        for &i in indices {
            for &j in indices {
                z.push(if i == j { 1.0 } else { self.coupling(i, j) });
            }
        }
        MassSystem::new(self.dim, masses, z, self.alpha)
    }

    /// Relabelled system: new particle `k` is old particle `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<MassSystem> {
        let mut seen = vec![false; self.n()];
        if perm.len() != self.n() || perm.iter().any(|&p| p >= self.n() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Domain("not a permutation".into()));
        }
        self.subsystem(perm)
    }

    pub fn zeros(&self) -> Points {
        Array2::zeros((self.n(), self.dim))
    }

    pub fn check_shape(&self, a: &Points) -> Result<()> {
        if a.dim() != (self.n(), self.dim) {
            return Err(Error::Domain(format!(
                "array shape {:?} does not match system ({}, {})",
                a.dim(),
                self.n(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Unchecked mass inner product.
    pub fn inner(&self, a: &Points, b: &Points) -> f64 {
        a.outer_iter()
            .zip(b.outer_iter())
            .zip(&self.masses)
            .map(|((x, y), m)| m * x.dot(&y))
            .sum()
    }

    pub fn norm(&self, a: &Points) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// `Σ m_i a_i`.
    pub fn weighted_sum(&self, a: &Points) -> ndarray::Array1<f64> {
        let mut s = ndarray::Array1::zeros(self.dim);
        for (row, m) in a.outer_iter().zip(&self.masses) {
            s.scaled_add(*m, &row);
        }
        s
    }

    /// Orthogonal (mass-metric) projection of an ambient array onto `M`.
    pub fn center(&self, a: &Points) -> Points {
        let com = self.weighted_sum(a) / self.total_mass();
        a - &com.insert_axis(Axis(0))
    }

    /// Whether `Σ m_i a_i` vanishes up to the relative tolerance [`TOL_COM`].
    pub fn is_centered(&self, a: &Points) -> bool {
        let scale: f64 = a
            .outer_iter()
            .zip(&self.masses)
            .map(|(r, m)| m * r.dot(&r).sqrt())
            .sum();
        let s = self.weighted_sum(a);
        s.dot(&s).sqrt() <= TOL_COM * (scale + EPS_FLOOR)
    }

    /// First coincident pair (0-based), if any.
    pub fn coincident_pair(&self, q: &Points) -> Option<(usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                if q.row(i) == q.row(j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `min_{i<j} ‖q_i − q_j‖`.
    pub fn min_separation(&self, q: &Points) -> f64 {
        let n = self.n();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(distance(q.row(i), q.row(j)));
            }
        }
        best
    }
}

pub(crate) fn distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A point of the center-of-mass configuration space `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Points);

impl Configuration {
    /// Validates the shape; re-centers (with a warning) when the center of
    /// mass is off by more than [`TOL_COM`].
    pub fn new(sys: &MassSystem, coords: Points) -> Result<Self> {
        sys.check_shape(&coords)?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if sys.is_centered(&coords) {
            Ok(Configuration(coords))
        } else {
            log::warn!("configuration not in the center-of-mass frame; re-centering");
            Ok(Configuration(sys.center(&coords)))
        }
    }

    /// Like [`Configuration::new`] but additionally rejects points of the collision set.
    pub fn off_collisions(sys: &MassSystem, coords: Points) -> Result<Self> {
        let c = Self::new(sys, coords)?;
        if let Some((i, j)) = sys.coincident_pair(&c) {
            return Err(Error::CollisionSingularity { i: i + 1, j: j + 1 });
        }
        Ok(c)
    }

    pub fn zero(sys: &MassSystem) -> Self {
        Configuration(sys.zeros())
    }

    pub fn into_inner(self) -> Points {
        self.0
    }
}

impl Deref for Configuration {
    type Target = Points;

    fn deref(&self) -> &Points {
        &self.0
    }
}

/// `<q, q2>_M`.
pub fn mass_inner(sys: &MassSystem, q: &Points, q2: &Points) -> Result<f64> {
    sys.check_shape(q)?;
    sys.check_shape(q2)?;
    Ok(sys.inner(q, q2))
}

fn check_partition(sys: &MassSystem, part: &Partition) -> Result<()> {
    if part.n() != sys.n() {
        return Err(Error::Domain(format!(
            "partition of {} elements used with {} particles",
            part.n(),
            sys.n()
        )));
    }
    Ok(())
}

/// Block barycenters `q_C` for every block of `part`, as a `|C| × d` array.
pub fn barycenters(sys: &MassSystem, part: &Partition, q: &Points) -> Points {
    let mut out = Array2::zeros((part.rank(), sys.dim()));
    for (b, block) in part.blocks().iter().enumerate() {
        let mut row = out.row_mut(b);
        for &i in block {
            row.scaled_add(sys.mass(i), &q.row(i));
        }
        row /= sys.cluster_mass(block);
    }
    out
}

fn external_unchecked(sys: &MassSystem, part: &Partition, q: &Points) -> Points {
    let bary = barycenters(sys, part, q);
    let mut out = sys.zeros();
    for i in 0..sys.n() {
        out.row_mut(i).assign(&bary.row(part.block_of(i)));
    }
    out
}

/// `Π^E_C q`: each particle replaced by the barycenter of its block.
pub fn project_external(sys: &MassSystem, part: &Partition, q: &Points) -> Result<Points> {
    sys.check_shape(q)?;
    check_partition(sys, part)?;
    Ok(external_unchecked(sys, part, q))
}

/// `Π^I_C q = q − Π^E_C q`: displacements from the block barycenters.
pub fn project_internal(sys: &MassSystem, part: &Partition, q: &Points) -> Result<Points> {
    Ok(q - &project_external(sys, part, q)?)
}

/// Cluster coordinates of a momentum array: `(p^E)_i = (m_i / m_[i]) p_[i]`
/// with `p_C = Σ_{i∈C} p_i`, and `p^I = p − p^E`.
pub fn project_momenta(sys: &MassSystem, part: &Partition, p: &Points) -> Result<(Points, Points)> {
    sys.check_shape(p)?;
    check_partition(sys, part)?;
    let mut totals = Array2::<f64>::zeros((part.rank(), sys.dim()));
    for i in 0..sys.n() {
        let mut row = totals.row_mut(part.block_of(i));
        row += &p.row(i);
    }
    let mut ext = sys.zeros();
    for (b, block) in part.blocks().iter().enumerate() {
        let mc = sys.cluster_mass(block);
        for &i in block {
            ext.row_mut(i).assign(&(&totals.row(b) * (sys.mass(i) / mc)));
        }
    }
    let int = p - &ext;
    Ok((ext, int))
}

/// Moment of inertia and its cluster splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSplit {
    pub total: f64,
    pub external: f64,
    pub internal: f64,
}

/// `(J, J^E_C, J^I_C)` with `J = J^E_C + J^I_C`.
pub fn moment_split(sys: &MassSystem, part: &Partition, q: &Points) -> Result<MomentSplit> {
    let ext = project_external(sys, part, q)?;
    let int = q - &ext;
    Ok(MomentSplit {
        total: sys.inner(q, q),
        external: sys.inner(&ext, &ext),
        internal: sys.inner(&int, &int),
    })
}

/// `J^E_C(q) = Σ_C m_C ‖q_C‖²`, computed from barycenters only.
pub fn external_moment(sys: &MassSystem, part: &Partition, q: &Points) -> f64 {
    let bary = barycenters(sys, part, q);
    part.blocks()
        .iter()
        .zip(bary.outer_iter())
        .map(|(block, c)| sys.cluster_mass(block) * c.dot(&c))
        .sum()
}

/// `(dim Δ^E_C, dim Δ^I_C) = (d(|C|−1), d(n−|C|))`.
pub fn subspace_dims(part: &Partition, d: usize) -> (usize, usize) {
    (d * (part.rank() - 1), d * (part.n() - part.rank()))
}

/// Polar form `q^I_C = r Q^I_C` with `J^I_C(Q^I_C) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalPolar {
    pub r: f64,
    pub direction: Points,
}

pub fn polar_internal(sys: &MassSystem, part: &Partition, q: &Points) -> Result<InternalPolar> {
    let int = project_internal(sys, part, q)?;
    let r = sys.norm(&int);
    if r <= EPS_POLAR {
        return Err(Error::DegeneratePolar { norm: r });
    }
    Ok(InternalPolar { r, direction: int / r })
}

/// Both sides of `‖q‖² = μ₁‖ξ₁‖² + μ₂‖ξ₂‖²` for three bodies, with the
/// Jacobi vectors `ξ₁ = q₁ − q₂` and `ξ₂ = q₃ − (m₁q₁ + m₂q₂)/(m₁ + m₂)`.
pub fn jacobi_check_3body(sys: &MassSystem, q: &Points) -> Result<(f64, f64)> {
    if sys.n() != 3 {
        return Err(Error::Domain(format!("Jacobi check needs n = 3, got {}", sys.n())));
    }
    sys.check_shape(q)?;
    let (m1, m2, m3) = (sys.mass(0), sys.mass(1), sys.mass(2));
    let xi1 = &q.row(0) - &q.row(1);
    let xi2 = &q.row(2) - &((&q.row(0) * m1 + &q.row(1) * m2) / (m1 + m2));
    let mu1 = 1.0 / (1.0 / m1 + 1.0 / m2);
    let mu2 = 1.0 / (1.0 / (m1 + m2) + 1.0 / m3);
    Ok((sys.inner(q, q), mu1 * xi1.dot(&xi1) + mu2 * xi2.dot(&xi2)))
}

/// Matrix of `Π^E_C` on the ambient space `(R^d)^n`, acting on row-major
/// flattened arrays. Restricted to `M` it has rank `d(|C| − 1)`.
pub fn external_projection_matrix(sys: &MassSystem, part: &Partition) -> Array2<f64> {
    let (n, d) = (sys.n(), sys.dim());
    let mut mat = Array2::zeros((n * d, n * d));
    for i in 0..n {
        let block = &part.blocks()[part.block_of(i)];
        let mc = sys.cluster_mass(block);
        for &j in block {
            for k in 0..d {
                mat[[i * d + k, j * d + k]] = sys.mass(j) / mc;
            }
        }
    }
    mat
}
