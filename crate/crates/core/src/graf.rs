//! The Graf covering of configuration space.
//!
//! For `0 < δ < 1` the atom of `𝒞` is the set where `𝒞` attains
//! `J^(δ)(q) = max_𝒞 { J^E_𝒞(q) + δ^{|𝒞|} }`. Along a ray `λ s` every
//! candidate is affine in `t = λ²`, which is what the ray map onto the
//! boundary of the free atom (the atom of the finest partition) and the
//! tie-point constructions below exploit.

use crate::error::{Error, Result};
use crate::metric::{external_moment, MassSystem, Points, EPS_FLOOR};
use crate::parallel::Exec;
use crate::partitions::{enumerate_partitions, Partition};
use crate::sampling::{rng_for, unit_direction};

pub const MAX_N: usize = 8;
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Relative width of the final bisection bracket for the ray map.
pub const LAMBDA_TOL: f64 = 1e-12;
/// Rays whose smallest pair moment is below this are too close to the collision set.
pub const EPS_CONDITIONING: f64 = 1e-12;
/// Points per great-circle arc in the connectivity check.
pub const ARC_POINTS: usize = 1000;

fn tie_tol(value: f64) -> f64 {
    1e-12 * (1.0 + value.abs())
}

/// A Graf covering of the configuration space of `sys` at parameter `δ`.
#[derive(Debug, Clone)]
pub struct GrafQuery<'a> {
    sys: &'a MassSystem,
    delta: f64,
    lattice: Vec<Partition>,
    weights: Vec<f64>,
}

impl<'a> GrafQuery<'a> {
    pub fn new(sys: &'a MassSystem, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        if sys.n() > MAX_N {
            return Err(Error::SizeLimit(format!("Graf queries enumerate the partition lattice; n = {} > {MAX_N}", sys.n())));
        }
        let lattice = enumerate_partitions(sys.n())?;
        let weights = lattice.iter().map(|p| delta.powi(p.rank() as i32)).collect();
        Ok(GrafQuery { sys, delta, lattice, weights })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn system(&self) -> &MassSystem {
        self.sys
    }

    pub fn lattice(&self) -> &[Partition] {
        &self.lattice
    }

    fn finest_index(&self) -> usize {
        self.lattice.len() - 1
    }

    /// `J^E_𝒞(q) + δ^{|𝒞|}` for every partition, in lattice order.
    pub fn candidates(&self, q: &Points) -> Result<Vec<f64>> {
        self.sys.check_shape(q)?;
        Ok(self.lattice.iter().zip(&self.weights).map(|(p, w)| external_moment(self.sys, p, q) + w).collect())
    }

    /// `J^(δ)(q)` and every partition attaining it.
    pub fn graf_value(&self, q: &Points) -> Result<(f64, Vec<Partition>)> {
        let c = self.candidates(q)?;
        let value = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = tie_tol(value);
        let argmax = self.lattice.iter().zip(&c).filter(|(_, v)| value - **v <= tol).map(|(p, _)| p.clone()).collect();
        Ok((value, argmax))
    }

    /// The partitions whose atoms contain `q`.
    pub fn atom_membership(&self, q: &Points) -> Result<Vec<Partition>> {
        Ok(self.graf_value(q)?.1)
    }

    /// `g(λ) = J(λs) + δ^n − max_{𝒟 ≠ 𝒞_min} (J^E_𝒟(λs) + δ^{|𝒟|})` along the ray through `s`.
    pub fn ray_profile(&self, s: &Points) -> Result<RayProfile> {
        self.sys.check_shape(s)?;
        let j = self.sys.inner(s, s);
        let fin = self.finest_index();
        let terms: Vec<(f64, f64)> = self
            .lattice
            .iter()
            .zip(&self.weights)
            .enumerate()
            .filter(|(k, _)| *k != fin)
            .map(|(_, (p, w))| (j - external_moment(self.sys, p, s), *w))
            .collect();
        let min_int = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        if min_int <= EPS_CONDITIONING * j {
            return Err(Error::Conditioning(format!(
                "direction lies within {min_int:e} of the collision set; the ray map is ill-conditioned"
            )));
        }
        Ok(RayProfile { finest_weight: self.weights[fin], terms })
    }

    /// `H^(δ)(s)`: the point where the ray through `s` leaves the free-atom complement.
    pub fn free_atom_boundary_point(&self, s: &Points) -> Result<BoundaryPoint> {
        let profile = self.ray_profile(s)?;
        let lambda = profile.crossing();
        Ok(BoundaryPoint { lambda, q: s * lambda })
    }

    /// Breakpoints of the upper envelope of the candidate lines along the ray
    /// through `s`: points where at least two atoms meet.
    pub fn ray_transitions(&self, s: &Points) -> Result<Vec<Transition>> {
        self.sys.check_shape(s)?;
        let lines: Vec<(f64, f64)> =
            self.lattice.iter().zip(&self.weights).map(|(p, w)| (external_moment(self.sys, p, s), *w)).collect();
        let better = |a: usize, b: usize| {
            let (la, lb) = (lines[a], lines[b]);
            la.1 > lb.1 || (la.1 == lb.1 && la.0 > lb.0)
        };
        let mut cur = (0..lines.len()).fold(0, |best, k| if better(k, best) { k } else { best });
        let mut t_cur = 0.0;
        let mut out = Vec::new();
        loop {
            let (a0, b0) = lines[cur];
            let mut next: Option<(f64, usize)> = None;
            for (k, &(a, b)) in lines.iter().enumerate() {
                if a <= a0 {
                    continue;
                }
                let t = ((b0 - b) / (a - a0)).max(t_cur);
                next = match next {
                    Some((tn, kn)) if tn < t || (tn == t && lines[kn].0 >= a) => Some((tn, kn)),
                    _ => Some((t, k)),
                };
            }
            let Some((t, k)) = next else { break };
            out.push(Transition {
                lambda: t.sqrt(),
                from: self.lattice[cur].clone(),
                to: self.lattice[k].clone(),
            });
            cur = k;
            t_cur = t;
        }
        Ok(out)
    }
}

/// The ray function `g(λ) = min_𝒟 [λ² J^I_𝒟(s) + δ^n − δ^{|𝒟|}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayProfile {
    finest_weight: f64,
    /// `(J^I_𝒟(s), δ^{|𝒟|})` for every `𝒟 ≠ 𝒞_min`.
    terms: Vec<(f64, f64)>,
}

impl RayProfile {
    pub fn g(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.terms.iter().map(|(ji, w)| l2 * ji + self.finest_weight - w).fold(f64::INFINITY, f64::min)
    }

    /// The unique root of `g`, by bisection on a doubling bracket.
    pub fn crossing(&self) -> f64 {
        let mut lo = EPS_FLOOR;
        let mut hi = 1.0;
        while self.g(hi) <= 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > LAMBDA_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub lambda: f64,
    pub q: Points,
}

/// Along a ray the maximizing atom changes from `from` to `to` at radius `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub lambda: f64,
    pub from: Partition,
    pub to: Partition,
}

/// Outcome of the `d = 1` component count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCount {
    pub components: usize,
    /// Distinct coordinate orderings among the sampled directions.
    pub orderings: usize,
    pub samples: usize,
    pub arcs_checked: usize,
    /// Arcs whose image under the ray map was found discontinuous.
    pub broken_arcs: usize,
}

fn ordering(q: &Points) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..q.nrows()).collect();
    idx.sort_by(|&a, &b| q[[a, 0]].total_cmp(&q[[b, 0]]));
    idx
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Bisection depth used to tell a steep stretch of the ray map from a jump.
const ARC_REFINE: u32 = 40;

struct Arc<'q, 'a> {
    query: &'q GrafQuery<'a>,
    a: Points,
    b: Points,
    omega: f64,
}

impl Arc<'_, '_> {
    fn at(&self, t: f64) -> Result<BoundaryPoint> {
        let sys = self.query.system();
        let p = if self.omega < 1e-12 {
            self.a.clone()
        } else {
            (&self.a * ((1.0 - t) * self.omega).sin() + &self.b * (t * self.omega).sin()) / self.omega.sin()
        };
        self.query.free_atom_boundary_point(&(&p / sys.norm(&p)))
    }

    /// Whether the image between parameters `t0` and `t1` has no jump, refining where it is steep.
    fn joined(&self, t0: f64, h0: &BoundaryPoint, t1: f64, h1: &BoundaryPoint, depth: u32) -> bool {
        let jump = self.query.system().norm(&(&h1.q - &h0.q));
        if jump <= 0.5 * h0.lambda.max(h1.lambda) {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let tm = 0.5 * (t0 + t1);
        let Ok(hm) = self.at(tm) else { return false };
        self.joined(t0, h0, tm, &hm, depth - 1) && self.joined(tm, &hm, t1, h1, depth - 1)
    }
}

/// Whether the ray-map image of the great-circle arc from `a` to `b` is continuous.
fn arc_is_continuous(query: &GrafQuery, a: &Points, b: &Points) -> bool {
    let omega = query.system().inner(a, b).clamp(-1.0, 1.0).acos();
    let arc = Arc { query, a: a.clone(), b: b.clone(), omega };
    let mut prev: Option<(f64, BoundaryPoint)> = None;
    for k in 0..ARC_POINTS {
        let t = k as f64 / (ARC_POINTS - 1) as f64;
        let Ok(h) = arc.at(t) else { return false };
        if let Some((tp, hp)) = &prev {
            if !arc.joined(*tp, hp, t, &h, ARC_REFINE) {
                return false;
            }
        }
        prev = Some((t, h));
    }
    true
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Counts the path components of the free-atom boundary for particles on a line.
///
/// Draws `samples_per_component · n!` seeded directions, groups them by the
/// ordering of their coordinates and links the members of each group along
/// great-circle arcs whose ray-map images are checked for continuity at
/// [`ARC_POINTS`] points. Different orderings are separated by the collision
/// set, where the ray map is undefined.
pub fn count_free_boundary_components_d1(
    query: &GrafQuery,
    samples_per_component: usize,
    seed: u64,
    exec: Exec,
) -> Result<ComponentCount> {
    let sys = query.system();
    if sys.dim() != 1 {
        return Err(Error::Domain(format!("component counting needs d = 1, got d = {}", sys.dim())));
    }
    if sys.n() > 5 {
        return Err(Error::SizeLimit(format!("component counting supports n ≤ 5, got {}", sys.n())));
    }
    if samples_per_component < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 samples per component to test connectivity, got {samples_per_component}"
        )));
    }
    let total = samples_per_component * factorial(sys.n());
    let dirs: Vec<Points> = exec.map(total, |k| unit_direction(sys, &mut rng_for(seed, k as u64)));
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for (k, d) in dirs.iter().enumerate() {
        groups.entry(ordering(d)).or_default().push(k);
    }
    let singles = groups.values().filter(|g| g.len() < 2).count();
    if singles > 0 {
        return Err(Error::InsufficientSamples(format!(
            "{singles} coordinate orderings received a single sample; increase samples per component"
        )));
    }
    let edges: Vec<(usize, usize)> =
        groups.values().flat_map(|g| g.windows(2).map(|w| (w[0], w[1]))).collect();
    let ok = exec.map_slice(&edges, |&(a, b)| arc_is_continuous(query, &dirs[a], &dirs[b]));
    let mut uf = UnionFind((0..total).collect());
    for (&(a, b), good) in edges.iter().zip(&ok) {
        if *good {
            uf.union(a, b);
        }
    }
    let mut roots: Vec<usize> = (0..total).map(|k| uf.find(k)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(ComponentCount {
        components: roots.len(),
        orderings: groups.len(),
        samples: total,
        arcs_checked: edges.len(),
        broken_arcs: ok.iter().filter(|g| !**g).count(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestingReport {
    pub rays: usize,
    /// `(ray index, λ at δ1, λ at δ2)` where the radius did not grow.
    pub violations: Vec<(usize, f64, f64)>,
}

impl NestingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks on sampled rays that the free-atom boundary at `δ1` lies strictly
/// inside the one at `δ2`, for `0 < δ1 ≤ δ2 ≤ 1/2`.
pub fn nesting_check(sys: &MassSystem, delta1: f64, delta2: f64, rays: usize, seed: u64, exec: Exec) -> Result<NestingReport> {
    if !(delta1 > 0.0 && delta1 <= delta2 && delta2 <= 0.5) {
        return Err(Error::Domain(format!("nesting needs 0 < δ1 ≤ δ2 ≤ 1/2, got δ1 = {delta1}, δ2 = {delta2}")));
    }
    let q1 = GrafQuery::new(sys, delta1)?;
    let q2 = GrafQuery::new(sys, delta2)?;
    let results = exec.map(rays, |k| -> Result<Option<(usize, f64, f64)>> {
        let s = unit_direction(sys, &mut rng_for(seed, k as u64));
        let l1 = q1.free_atom_boundary_point(&s)?.lambda;
        let l2 = q2.free_atom_boundary_point(&s)?.lambda;
        let bad = if delta1 == delta2 { l1 != l2 } else { l1 >= l2 };
        Ok(bad.then_some((k, l1, l2)))
    });
    let mut violations = Vec::new();
    for r in results {
        if let Some(v) = r? {
            violations.push(v);
        }
    }
    Ok(NestingReport { rays, violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparabilityReport {
    pub points: usize,
    /// Largest membership set seen.
    pub max_members: usize,
    /// Incomparable pairs found in a membership set, with the witnessing point.
    pub violations: Vec<(Partition, Partition, Points)>,
}

/// Checks that every membership set is a chain at `points` tie points built
/// from the envelope breakpoints of seeded rays.
pub fn comparability_audit(query: &GrafQuery, points: usize, seed: u64, exec: Exec) -> Result<ComparabilityReport> {
    let sys = query.system();
    // one ray yields several tie points; draw rays until enough points are collected
    let batch = points.max(1);
    let mut collected: Vec<Points> = Vec::with_capacity(points);
    let mut next_ray = 0u64;
    while collected.len() < points {
        let start = next_ray;
        let found = exec.map(batch, |k| -> Result<Vec<Points>> {
            let s = unit_direction(sys, &mut rng_for(seed, start + k as u64));
            Ok(query.ray_transitions(&s)?.into_iter().map(|t| &s * t.lambda).collect())
        });
        next_ray += batch as u64;
        for f in found {
            collected.extend(f?);
        }
    }
    collected.truncate(points);
    let checks = exec.map_slice(&collected, |q| -> Result<(usize, Option<(Partition, Partition)>)> {
        let members = query.atom_membership(q)?;
        for (a, p) in members.iter().enumerate() {
            for r in &members[..a] {
                if !p.comparable(r)? {
                    return Ok((members.len(), Some((r.clone(), p.clone()))));
                }
            }
        }
        Ok((members.len(), None))
    });
    let mut report = ComparabilityReport { points: collected.len(), max_members: 0, violations: Vec::new() };
    for (c, q) in checks.into_iter().zip(collected) {
        let (m, v) = c?;
        report.max_members = report.max_members.max(m);
        if m < 2 {
            return Err(Error::Consistency(format!("constructed tie point has {m} atom(s)")));
        }
        if let Some((a, b)) = v {
            report.violations.push((a, b, q));
        }
    }
    Ok(report)
}

/// Fraction of seeded random configurations lying in two or more atoms.
/// Radii are drawn log-uniformly over `[√δ/10, 10√δ]`, where the atoms meet.
pub fn tie_fraction(query: &GrafQuery, samples: usize, seed: u64, exec: Exec) -> Result<f64> {
    use rand::Rng;
    let sys = query.system();
    let base = query.delta().sqrt();
    let ties = exec.map(samples, |k| -> Result<bool> {
        let mut rng = rng_for(seed, k as u64);
        let s = unit_direction(sys, &mut rng);
        let r = base * 10f64.powf(rng.random_range(-1.0..1.0));
        Ok(query.atom_membership(&(&s * r))?.len() > 1)
    });
    let mut count = 0usize;
    for t in ties {
        count += t? as usize;
    }
    Ok(count as f64 / samples.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_body() -> MassSystem {
        MassSystem::uniform(1, vec![1.0, 1.0], 1.0, 1.0).unwrap()
    }

    #[test]
    fn total_collision_belongs_to_coarsest_atom() {
        let sys = MassSystem::uniform(2, vec![1.0; 3], 1.0, 1.0).unwrap();
        let g = GrafQuery::new(&sys, 1e-3).unwrap();
        let (v, arg) = g.graf_value(&sys.zeros()).unwrap();
        assert_eq!(v, 1e-3);
        assert_eq!(arg, vec![Partition::coarsest(3)]);
    }

    #[test]
    fn far_configurations_are_free() {
        let sys = MassSystem::uniform(2, vec![1.0; 3], 1.0, 1.0).unwrap();
        let g = GrafQuery::new(&sys, 1e-3).unwrap();
        let q = sys.center(&array![[10.0, 0.0], [-7.0, 3.0], [0.0, -9.0]]);
        assert_eq!(g.atom_membership(&q).unwrap(), vec![Partition::finest(3)]);
    }

    #[test]
    fn two_body_free_atom_criterion() {
        let sys = two_body();
        let delta = 0.1;
        let g = GrafQuery::new(&sys, delta).unwrap();
        for &a in &[0.1, 0.2, 0.3] {
            let q = array![[a], [-a]];
            let free = g.atom_membership(&q).unwrap().contains(&Partition::finest(2));
            assert_eq!(free, 2.0 * a * a + delta * delta >= delta, "a = {a}");
        }
    }

    #[test]
    fn two_body_ray_map() {
        let sys = two_body();
        let s = array![[1.0], [-1.0]] / 2f64.sqrt();
        for &delta in &[1e-3, 0.1, 0.3] {
            let g = GrafQuery::new(&sys, delta).unwrap();
            let h = g.free_atom_boundary_point(&s).unwrap();
            let expect = (delta - delta * delta).sqrt();
            assert!((h.lambda - expect).abs() <= 1e-10 * expect);
            assert!(g.atom_membership(&h.q).unwrap().len() >= 2);
            let p = g.ray_profile(&s).unwrap();
            assert!(p.g(h.lambda * (1.0 - 1e-6)) < 0.0 && p.g(h.lambda * (1.0 + 1e-6)) > 0.0);
        }
    }

    #[test]
    fn envelope_breakpoints_are_ties() {
        let sys = MassSystem::uniform(2, vec![1.0, 2.0, 3.0, 1.5], 1.0, 1.0).unwrap();
        let g = GrafQuery::new(&sys, 1e-2).unwrap();
        let s = unit_direction(&sys, &mut rng_for(3, 0));
        let tr = g.ray_transitions(&s).unwrap();
        assert_eq!(tr.first().unwrap().from, Partition::coarsest(4));
        assert_eq!(tr.last().unwrap().to, Partition::finest(4));
        for t in &tr {
            let members = g.atom_membership(&(&s * t.lambda)).unwrap();
            assert!(members.contains(&t.from) && members.contains(&t.to));
        }
        let last = tr.last().unwrap().lambda;
        let h = g.free_atom_boundary_point(&s).unwrap().lambda;
        assert!((last - h).abs() < 1e-10 * h);
    }

    #[test]
    fn near_collision_rays_are_rejected() {
        let sys = MassSystem::uniform(1, vec![1.0; 3], 1.0, 1.0).unwrap();
        let g = GrafQuery::new(&sys, 1e-3).unwrap();
        let s = array![[1.0], [1.0], [-2.0]];
        let s = &s / sys.norm(&s);
        assert!(matches!(g.free_atom_boundary_point(&s), Err(Error::Conditioning(_))));
    }

    #[test]
    fn two_body_components() {
        let sys = two_body();
        let g = GrafQuery::new(&sys, 1e-3).unwrap();
        let c = count_free_boundary_components_d1(&g, 4, 1, Exec::Sequential).unwrap();
        assert_eq!(c.components, 2);
        assert!(count_free_boundary_components_d1(&g, 1, 1, Exec::Sequential).is_err());
    }

    #[test]
    fn nesting_parameter_order() {
        let sys = two_body();
        assert!(nesting_check(&sys, 0.2, 0.1, 4, 0, Exec::Sequential).is_err());
        assert!(nesting_check(&sys, 0.1, 0.1, 4, 0, Exec::Sequential).unwrap().pass());
        assert!(nesting_check(&sys, 0.1, 0.4, 4, 0, Exec::Sequential).unwrap().pass());
    }
}
