//! Exact discrete quadratic-cost optimal transport on warped products:
//! couplings, displacement interpolation, entropy estimation on measure
//! grids, curvature-dimension inequality checks, and the probe measuring how
//! much transported mass passes near the collapsed set.

pub mod simplex;

use crate::geodesics::{distance_matrix, product_distance, GeodesicError, GeodesicPath, SolverOptions};
use crate::kernels::tau;
use crate::measure::DiscreteMeasure;
use crate::warp::{WarpedGrid, WarpedPoint, WarpedProduct, WarpError};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("marginal totals differ: {0} vs {1}")]
    UnequalTotals(f64, f64),
    #[error("empty measure")]
    EmptyMeasure,
    #[error("measure places mass {0} on the collapsed set")]
    MassOnSingularSet(f64),
    #[error("measure mass {mass} falls in a cell with zero reference measure")]
    MassOnNullCell { mass: f64 },
    #[error(transparent)]
    Simplex(#[from] simplex::SimplexError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Warp(#[from] WarpError),
}

/// One pair of an optimal coupling.
#[derive(Debug, Clone)]
pub struct PlanPair {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
    pub distance: f64,
}

/// Optimal coupling between two discrete measures, with minimizing geodesics
/// for every support pair and the full distance matrix retained for
/// monotonicity checks.
pub struct TransportPlan {
    pub source: DiscreteMeasure<WarpedPoint>,
    pub target: DiscreteMeasure<WarpedPoint>,
    pub pairs: Vec<PlanPair>,
    pub geodesics: Vec<GeodesicPath>,
    pub cost: f64,
    distances: Vec<Vec<f64>>,
}

impl TransportPlan {
    pub fn wasserstein_distance(&self) -> f64 {
        self.cost.max(0.0).sqrt()
    }

    pub fn distance(&self, source: usize, target: usize) -> f64 {
        self.distances[source][target]
    }

    /// Mass of each source atom as carried by the plan (marginal check).
    pub fn source_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.source.len()];
        for p in &self.pairs {
            out[p.source] += p.mass;
        }
        out
    }

    pub fn target_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target.len()];
        for p in &self.pairs {
            out[p.target] += p.mass;
        }
        out
    }
}

/// Exact L2 optimal transport between equal-mass discrete measures.
/// Assignment instances (equal sizes, equal weights) use the shortest
/// augmenting path solver; everything else the transportation simplex.
pub fn w2(
    mu0: &DiscreteMeasure<WarpedPoint>,
    mu1: &DiscreteMeasure<WarpedPoint>,
    w: &WarpedProduct,
    opts: &SolverOptions,
) -> Result<TransportPlan, TransportError> {
    if mu0.is_empty() || mu1.is_empty() {
        return Err(TransportError::EmptyMeasure);
    }
    let (t0, t1) = (mu0.total(), mu1.total());
    if (t0 - t1).abs() > 1e-9 * t0.max(t1) {
        return Err(TransportError::UnequalTotals(t0, t1));
    }
    let sources: Vec<WarpedPoint> = mu0.points().cloned().collect();
    let targets: Vec<WarpedPoint> = mu1.points().cloned().collect();
    let distances = distance_matrix(w, &sources, &targets, opts)?;
    let cost_matrix: Vec<Vec<f64>> = distances
        .iter()
        .map(|row| row.iter().map(|d| d * d).collect())
        .collect();

    let weights0 = mu0.weights();
    let weights1 = mu1.weights();
    let equal_weights = sources.len() == targets.len()
        && weights0
            .iter()
            .chain(weights1.iter())
            .all(|&x| (x - weights0[0]).abs() <= 1e-12 * weights0[0].abs().max(1e-300));

    let mut pairs: Vec<PlanPair> = if equal_weights {
        let assignment = simplex::solve_assignment(&cost_matrix);
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| PlanPair {
                source: i,
                target: j,
                mass: weights0[i],
                distance: distances[i][j],
            })
            .collect()
    } else {
        simplex::solve_transport(&weights0, &weights1, &cost_matrix)?
            .into_iter()
            .map(|f| PlanPair {
                source: f.source,
                target: f.target,
                mass: f.mass,
                distance: distances[f.source][f.target],
            })
            .collect()
    };
    pairs.sort_by_key(|p| (p.source, p.target));
    let cost: f64 = pairs.iter().map(|p| p.mass * p.distance * p.distance).sum();

    let geodesics: Result<Vec<GeodesicPath>, GeodesicError> = pairs
        .par_iter()
        .map(|p| {
            product_distance(w, &sources[p.source], &targets[p.target], opts).map(|d| d.path)
        })
        .collect();

    Ok(TransportPlan {
        source: mu0.clone(),
        target: mu1.clone(),
        pairs,
        geodesics: geodesics?,
        cost,
        distances,
    })
}

/// Result of sampling cyclic exchanges of a plan's support.
#[derive(Debug, Clone)]
pub struct CyclicalReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest positive value of sum d^2(x_i, y_i) - sum d^2(x_i, y_{i+1}).
    pub worst_margin: f64,
}

/// Check d^2-cyclical monotonicity of the plan support on random k-tuples.
pub fn cyclical_monotonicity_check(
    plan: &TransportPlan,
    k: usize,
    trials: usize,
    seed: u64,
) -> CyclicalReport {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..plan.pairs.len()).collect();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..trials {
        let tuple: Vec<usize> = indices
            .choose_multiple(&mut rng, k.min(indices.len()))
            .cloned()
            .collect();
        if tuple.len() < 2 {
            break;
        }
        let mut held = 0.0;
        let mut exchanged = 0.0;
        for (idx, &pi) in tuple.iter().enumerate() {
            let pair = &plan.pairs[pi];
            let next = &plan.pairs[tuple[(idx + 1) % tuple.len()]];
            held += pair.distance * pair.distance;
            let cross = plan.distance(pair.source, next.target);
            exchanged += cross * cross;
        }
        let margin = held - exchanged;
        worst = worst.max(margin);
        if margin > 1e-9 {
            violations += 1;
        }
    }
    CyclicalReport { trials, violations, worst_margin: worst }
}

/// Displacement interpolation: push each pair's mass along its geodesic.
/// The endpoints reproduce the marginals exactly.
pub fn displacement(
    plan: &TransportPlan,
    w: &WarpedProduct,
    t: f64,
) -> Result<DiscreteMeasure<WarpedPoint>, TransportError> {
    let mut atoms = Vec::with_capacity(plan.pairs.len());
    for (pair, geo) in plan.pairs.iter().zip(&plan.geodesics) {
        let point = geo.evaluate(w, t)?;
        atoms.push((point, pair.mass));
    }
    Ok(DiscreteMeasure { atoms })
}

/// How atoms sitting exactly on the collapsed set are treated when binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularPolicy {
    /// Refuse: the measure is not absolutely continuous.
    Error,
    /// Drop the singular mass (it contributes nothing to the entropy of the
    /// absolutely continuous part) and report how much was dropped.
    Drop,
}

/// Renyi entropy sum of a measure against the warped reference grid:
/// sum over cells of rho^(1 - 1/N') m_C(cell) with rho the cell density.
pub fn renyi_entropy(
    mu: &DiscreteMeasure<WarpedPoint>,
    grid: &WarpedGrid,
    n_prime: f64,
    policy: SingularPolicy,
) -> Result<(f64, f64), TransportError> {
    let mut cell_mass = vec![0.0f64; grid.len()];
    let mut dropped = 0.0;
    for (p, mass) in &mu.atoms {
        match grid.index_of(p) {
            Some(idx) => {
                if grid.cell_mass(idx) <= 0.0 {
                    if policy == SingularPolicy::Error {
                        return Err(TransportError::MassOnNullCell { mass: *mass });
                    }
                    dropped += mass;
                } else {
                    cell_mass[idx] += mass;
                }
            }
            None => {
                if policy == SingularPolicy::Error {
                    return Err(TransportError::MassOnSingularSet(*mass));
                }
                dropped += mass;
            }
        }
    }
    let exponent = 1.0 - 1.0 / n_prime;
    let mut total = 0.0;
    for (idx, &mass) in cell_mass.iter().enumerate() {
        if mass > 0.0 {
            let m_c = grid.cell_mass(idx);
            let rho = mass / m_c;
            total += rho.powf(exponent) * m_c;
        }
    }
    Ok((total, dropped))
}

/// Per-time outcome of a curvature-dimension check.
#[derive(Debug, Clone)]
pub struct CdSlice {
    pub t: f64,
    pub entropy: f64,
    pub comparison: f64,
    /// entropy - comparison: negative beyond the discretization tolerance
    /// witnesses a violation.
    pub deficit: f64,
    pub dropped_mass: f64,
}

#[derive(Debug, Clone)]
pub struct CdReport {
    pub slices: Vec<CdSlice>,
    pub wasserstein: f64,
    pub k: f64,
    pub n_prime: f64,
}

impl CdReport {
    pub fn worst_deficit(&self) -> f64 {
        self.slices.iter().map(|s| s.deficit).fold(f64::INFINITY, f64::min)
    }
}

/// Verify the entropy inequality along the optimal transport between two
/// normalized measures: for each t the Renyi entropy of the displacement
/// interpolation must dominate the tau-weighted comparison sum.
pub fn cd_check(
    w: &WarpedProduct,
    mu0: &DiscreteMeasure<WarpedPoint>,
    mu1: &DiscreteMeasure<WarpedPoint>,
    k: f64,
    n_prime: f64,
    times: &[f64],
    grid: &WarpedGrid,
    opts: &SolverOptions,
) -> Result<CdReport, TransportError> {
    Ok(cd_check_multi(w, mu0, mu1, k, n_prime, times, std::slice::from_ref(grid), opts)?
        .pop()
        .expect("one grid, one report"))
}

/// Refinement-study variant: one optimal plan, entropy checks on several
/// grids (the plan does not depend on the entropy grid).
#[allow(clippy::too_many_arguments)]
pub fn cd_check_multi(
    w: &WarpedProduct,
    mu0: &DiscreteMeasure<WarpedPoint>,
    mu1: &DiscreteMeasure<WarpedPoint>,
    k: f64,
    n_prime: f64,
    times: &[f64],
    grids: &[WarpedGrid],
    opts: &SolverOptions,
) -> Result<Vec<CdReport>, TransportError> {
    for m in [mu0, mu1] {
        let singular: f64 = m
            .atoms
            .iter()
            .filter(|(p, _)| p.is_singular())
            .map(|(_, w)| w)
            .sum();
        if singular > 0.0 {
            return Err(TransportError::MassOnSingularSet(singular));
        }
    }
    let plan = w2(mu0, mu1, w, opts)?;
    let interpolants: Result<Vec<_>, _> =
        times.iter().map(|&t| displacement(&plan, w, t)).collect();
    let interpolants = interpolants?;

    let mut reports = Vec::with_capacity(grids.len());
    for grid in grids {
        let density_at = |mu: &DiscreteMeasure<WarpedPoint>| -> Result<Vec<f64>, TransportError> {
            let mut cell_mass = vec![0.0f64; grid.len()];
            for (p, mass) in &mu.atoms {
                let idx = grid
                    .index_of(p)
                    .ok_or(TransportError::MassOnSingularSet(*mass))?;
                if grid.cell_mass(idx) <= 0.0 {
                    return Err(TransportError::MassOnNullCell { mass: *mass });
                }
                cell_mass[idx] += mass;
            }
            Ok(mu
                .atoms
                .iter()
                .map(|(p, _)| {
                    let idx = grid.index_of(p).unwrap();
                    cell_mass[idx] / grid.cell_mass(idx)
                })
                .collect())
        };
        let rho0 = density_at(mu0)?;
        let rho1 = density_at(mu1)?;

        let mut slices = Vec::with_capacity(times.len());
        for (&t, mu_t) in times.iter().zip(&interpolants) {
            let (entropy, dropped) = renyi_entropy(mu_t, grid, n_prime, SingularPolicy::Drop)?;
            let mut comparison = 0.0;
            for pair in &plan.pairs {
                let d = pair.distance;
                let c0 = tau(k, n_prime, 1.0 - t, d);
                let c1 = tau(k, n_prime, t, d);
                comparison += pair.mass
                    * (c0 * rho0[pair.source].powf(-1.0 / n_prime)
                        + c1 * rho1[pair.target].powf(-1.0 / n_prime));
            }
            slices.push(CdSlice {
                t,
                entropy,
                comparison,
                deficit: entropy - comparison,
                dropped_mass: dropped,
            });
        }
        reports.push(CdReport { slices, wasserstein: plan.wasserstein_distance(), k, n_prime });
    }
    Ok(reports)
}

/// Fraction of plan mass whose geodesic passes within `delta` of the
/// collapsed set at an interior time.
pub fn singular_mass_probe(plan: &TransportPlan, w: &WarpedProduct, delta: f64) -> f64 {
    let apexes = w.apex_set();
    if apexes.is_empty() {
        return 0.0;
    }
    let total: f64 = plan.pairs.iter().map(|p| p.mass).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut near = 0.0;
    for (pair, geo) in plan.pairs.iter().zip(&plan.geodesics) {
        let hits = geo.samples.iter().any(|(t, p)| {
            *t > 0.0 && *t < 1.0 && w.distance_to_apex(p) <= delta
        });
        if hits {
            near += pair.mass;
        }
    }
    near / total
}

/// Gridded bump measure: grid sites within a ball around the center carry a
/// smooth compactly supported profile (cosine-squared taper to zero at the
/// edge) against the reference measure; an absolutely-continuous proxy with
/// no density cliff. At most `max_atoms` sites are kept — the nearest ones,
/// with the taper radius shrunk to the kept ball so the edge stays smooth.
pub fn gaussian_blob(
    w: &WarpedProduct,
    grid: &WarpedGrid,
    center: &WarpedPoint,
    radius: f64,
    max_atoms: usize,
) -> Result<DiscreteMeasure<WarpedPoint>, TransportError> {
    let mut sites: Vec<(usize, f64)> = Vec::new();
    for (idx, (p, cell_mass)) in grid.atoms.iter().enumerate() {
        if *cell_mass <= 0.0 || p.is_singular() {
            continue;
        }
        let d = w.chord_mid(center, p);
        if d <= radius {
            sites.push((idx, d));
        }
    }
    if sites.is_empty() {
        return Err(TransportError::EmptyMeasure);
    }
    sites.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    sites.truncate(max_atoms.max(1));
    let r_kept = sites.last().unwrap().1.max(1e-12) * (1.0 + 1e-9);
    sites.sort_by_key(|(idx, _)| *idx);
    let atoms: Vec<(WarpedPoint, f64)> = sites
        .into_iter()
        .map(|(idx, d)| {
            let (p, cell_mass) = &grid.atoms[idx];
            let taper = (std::f64::consts::FRAC_PI_2 * d / r_kept).cos().powi(2);
            (p.clone(), taper * cell_mass)
        })
        .collect();
    Ok(DiscreteMeasure { atoms }
        .normalize()
        .expect("blob has positive mass"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ModelSpace;
    use crate::warp::WarpingFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn flat_torus_product() -> WarpedProduct {
        WarpedProduct::new(
            ModelSpace::circle(1.0),
            ModelSpace::circle(1.0),
            WarpingFunction::Const { c: 1.0 },
            1.0,
        )
        .unwrap()
    }

    fn random_measure(
        w: &WarpedProduct,
        n: usize,
        rng: &mut ChaCha8Rng,
        equal: bool,
    ) -> DiscreteMeasure<WarpedPoint> {
        let atoms: Vec<(WarpedPoint, f64)> = (0..n)
            .map(|_| {
                let b = w.base.random_point(rng);
                let f = w.fiber.random_point(rng);
                let p = w.point(&b.coords, Some(&f.coords)).unwrap();
                let mass = if equal { 1.0 / n as f64 } else { rng.gen_range(0.1..1.0) };
                (p, mass)
            })
            .collect();
        DiscreteMeasure { atoms }.normalize().unwrap()
    }

    #[test]
    fn identity_plan_costs_zero() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = random_measure(&w, 5, &mut rng, true);
        let plan = w2(&mu, &mu, &w, &SolverOptions::coarse()).unwrap();
        assert!(plan.wasserstein_distance() < 1e-9);
        for p in &plan.pairs {
            assert_eq!(p.source, p.target);
        }
    }

    #[test]
    fn single_atoms_give_point_distance() {
        let w = flat_torus_product();
        let a = w.point(&[0.0], Some(&[0.0])).unwrap();
        let b = w.point(&[1.0], Some(&[0.5])).unwrap();
        let mu0 = DiscreteMeasure { atoms: vec![(a.clone(), 1.0)] };
        let mu1 = DiscreteMeasure { atoms: vec![(b.clone(), 1.0)] };
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        let d = product_distance(&w, &a, &b, &SolverOptions::coarse()).unwrap().length;
        assert!((plan.wasserstein_distance() - d).abs() < 1e-12);
    }

    #[test]
    fn matches_exhaustive_permutation_minimum() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let n = rng.gen_range(2..=5);
            let mu0 = random_measure(&w, n, &mut rng, true);
            let mu1 = random_measure(&w, n, &mut rng, true);
            let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
            // exhaustive permutation oracle on the plan's own distance matrix
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best = f64::INFINITY;
            permute(&mut perm, 0, &mut |p| {
                let c: f64 = p
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| plan.distance(i, j).powi(2) / n as f64)
                    .sum();
                best = best.min(c);
            });
            assert!((plan.cost - best).abs() <= 1e-12, "{} vs {best}", plan.cost);
        }
    }

    fn permute<F: FnMut(&[usize])>(p: &mut Vec<usize>, k: usize, f: &mut F) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn marginals_and_cost_consistency() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mu0 = random_measure(&w, 7, &mut rng, false);
        let mu1 = random_measure(&w, 9, &mut rng, false);
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        let sm = plan.source_marginal();
        let tm = plan.target_marginal();
        for (got, (_, want)) in sm.iter().zip(&mu0.atoms) {
            assert!((got - want).abs() < 1e-10);
        }
        for (got, (_, want)) in tm.iter().zip(&mu1.atoms) {
            assert!((got - want).abs() < 1e-10);
        }
        let recost: f64 = plan
            .pairs
            .iter()
            .map(|p| p.mass * plan.distance(p.source, p.target).powi(2))
            .sum();
        assert!((recost - plan.cost).abs() < 1e-10);
    }

    #[test]
    fn restriction_stability() {
        // restricting an optimal plan to a sub-block and re-solving on the
        // restricted marginals reproduces the restricted cost
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mu0 = random_measure(&w, 6, &mut rng, false);
        let mu1 = random_measure(&w, 6, &mut rng, false);
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        let block: Vec<&PlanPair> = plan.pairs.iter().take(plan.pairs.len() / 2).collect();
        if block.is_empty() {
            return;
        }
        let mut sub0: Vec<(WarpedPoint, f64)> = Vec::new();
        let mut sub1: Vec<(WarpedPoint, f64)> = Vec::new();
        let mut block_cost = 0.0;
        for p in &block {
            sub0.push((plan.source.atoms[p.source].0.clone(), p.mass));
            sub1.push((plan.target.atoms[p.target].0.clone(), p.mass));
            block_cost += p.mass * p.distance * p.distance;
        }
        let sub_plan = w2(
            &DiscreteMeasure { atoms: sub0 },
            &DiscreteMeasure { atoms: sub1 },
            &w,
            &SolverOptions::coarse(),
        )
        .unwrap();
        assert!(sub_plan.cost <= block_cost + 1e-9);
        assert!((sub_plan.cost - block_cost).abs() < 1e-9, "restriction broke optimality");
    }

    #[test]
    fn cyclical_monotonicity_of_exact_plans() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu0 = random_measure(&w, 12, &mut rng, true);
        let mu1 = random_measure(&w, 12, &mut rng, true);
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        let rep = cyclical_monotonicity_check(&plan, 4, 1000, 99);
        assert_eq!(rep.violations, 0, "worst margin {}", rep.worst_margin);
        assert!(rep.worst_margin <= 1e-9);
    }

    #[test]
    fn swapped_plan_violates_monotonicity() {
        //两 atoms with strictly crossing assignment
        let w = flat_torus_product();
        let a0 = w.point(&[0.0], Some(&[0.0])).unwrap();
        let a1 = w.point(&[0.0], Some(&[1.0])).unwrap();
        let b0 = w.point(&[1.0], Some(&[0.0])).unwrap();
        let b1 = w.point(&[1.0], Some(&[1.0])).unwrap();
        let mu0 = DiscreteMeasure { atoms: vec![(a0, 0.5), (a1, 0.5)] };
        let mu1 = DiscreteMeasure { atoms: vec![(b0, 0.5), (b1, 0.5)] };
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        // tamper: swap the assignment
        let mut swapped_pairs = plan.pairs.clone();
        for p in &mut swapped_pairs {
            p.target = 1 - p.target;
            p.distance = plan.distance(p.source, p.target);
        }
        let tampered = TransportPlan {
            source: plan.source.clone(),
            target: plan.target.clone(),
            pairs: swapped_pairs,
            geodesics: plan.geodesics.clone(),
            cost: 0.0,
            distances: plan.distances.clone(),
        };
        let rep = cyclical_monotonicity_check(&tampered, 2, 200, 7);
        assert!(rep.violations > 0);
        assert!(rep.worst_margin > 1e-6);
    }

    #[test]
    fn displacement_reproduces_marginals() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mu0 = random_measure(&w, 8, &mut rng, true);
        let mu1 = random_measure(&w, 8, &mut rng, true);
        let plan = w2(&mu0, &mu1, &w, &SolverOptions::coarse()).unwrap();
        let m0 = displacement(&plan, &w, 0.0).unwrap();
        let m1 = displacement(&plan, &w, 1.0).unwrap();
        for (pair, (pt, _)) in plan.pairs.iter().zip(&m0.atoms) {
            assert_eq!(*pt, plan.source.atoms[pair.source].0);
        }
        for (pair, (pt, _)) in plan.pairs.iter().zip(&m1.atoms) {
            assert_eq!(*pt, plan.target.atoms[pair.target].0);
        }
        assert!((m0.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_interpolation_halves_distance() {
        let w = flat_torus_product();
        let a = w.point(&[0.0], Some(&[0.0])).unwrap();
        let b = w.point(&[1.0], Some(&[0.8])).unwrap();
        let mu0 = DiscreteMeasure { atoms: vec![(a, 1.0)] };
        let mu1 = DiscreteMeasure { atoms: vec![(b, 1.0)] };
        let opts = SolverOptions::coarse();
        let plan = w2(&mu0, &mu1, &w, &opts).unwrap();
        let full = plan.wasserstein_distance();
        let mid = displacement(&plan, &w, 0.5).unwrap();
        let d0 = w2(&mu0, &mid, &w, &opts).unwrap().wasserstein_distance();
        let d1 = w2(&mid, &mu1, &w, &opts).unwrap().wasserstein_distance();
        assert!((d0 - full / 2.0).abs() < 1e-6, "{d0} vs {}", full / 2.0);
        assert!((d1 - full / 2.0).abs() < 1e-6);
    }

    #[test]
    fn interpolation_triangle_identity_along_plan() {
        let w = flat_torus_product();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mu0 = random_measure(&w, 6, &mut rng, true);
        let mu1 = random_measure(&w, 6, &mut rng, true);
        let opts = SolverOptions::coarse();
        let plan = w2(&mu0, &mu1, &w, &opts).unwrap();
        let full = plan.wasserstein_distance();
        for t in [0.25, 0.5, 0.75] {
            let mu_t = displacement(&plan, &w, t).unwrap();
            let d = w2(&mu0, &mu_t, &w, &opts).unwrap().wasserstein_distance();
            assert!((d - t * full).abs() < 1e-5, "t = {t}: {d} vs {}", t * full);
        }
    }

    #[test]
    fn renyi_entropy_closed_forms() {
        // uniform measure on the sin-warped strip: entropy = sqrt(total mass)
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, PI),
            ModelSpace::circle(1.0),
            WarpingFunction::Sin,
            1.0,
        )
        .unwrap();
        let grid = w.warped_grid(64, 64).unwrap();
        let uniform = DiscreteMeasure { atoms: grid.atoms.clone() }.normalize().unwrap();
        let (val, dropped) = renyi_entropy(&uniform, &grid, 2.0, SingularPolicy::Error).unwrap();
        let total = grid.total_mass();
        assert!(dropped == 0.0);
        assert!(
            (val - total.sqrt()).abs() < 1e-9 * total.sqrt(),
            "{val} vs {}",
            total.sqrt()
        );

        // point-like measure in one cell: cell_mass^(1/N')
        let idx = grid.len() / 2;
        let (atom, cell_mass) = (&grid.atoms[idx].0, grid.atoms[idx].1);
        let point = DiscreteMeasure { atoms: vec![(atom.clone(), 1.0)] };
        let (val, _) = renyi_entropy(&point, &grid, 2.0, SingularPolicy::Error).unwrap();
        assert!((val - cell_mass.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn renyi_entropy_rejects_singular_mass() {
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, PI),
            ModelSpace::circle(1.0),
            WarpingFunction::Sin,
            1.0,
        )
        .unwrap();
        let grid = w.warped_grid(16, 16).unwrap();
        let apex = w.point(&[0.0], Some(&[0.0])).unwrap();
        let mu = DiscreteMeasure { atoms: vec![(apex, 1.0)] };
        assert!(matches!(
            renyi_entropy(&mu, &grid, 2.0, SingularPolicy::Error),
            Err(TransportError::MassOnSingularSet(_))
        ));
        let (val, dropped) = renyi_entropy(&mu, &grid, 2.0, SingularPolicy::Drop).unwrap();
        assert_eq!(val, 0.0);
        assert_eq!(dropped, 1.0);
    }

    #[test]
    fn cd_check_flat_positive_control_smoke() {
        // blobs on the flat 2-torus with K = 0, N' = 2: deficits stay above a
        // small discretization tolerance
        let w = flat_torus_product();
        let grid = w.warped_grid(32, 32).unwrap();
        let atom_grid = w.warped_grid(96, 96).unwrap();
        let c0 = w.point(&[1.0], Some(&[1.0])).unwrap();
        let c1 = w.point(&[3.0], Some(&[4.0])).unwrap();
        let mu0 = gaussian_blob(&w, &atom_grid, &c0, 0.6, 160).unwrap();
        let mu1 = gaussian_blob(&w, &atom_grid, &c1, 0.6, 160).unwrap();
        let rep = cd_check(
            &w,
            &mu0,
            &mu1,
            0.0,
            2.0,
            &[0.25, 0.5, 0.75],
            &grid,
            &SolverOptions::coarse(),
        )
        .unwrap();
        assert!(
            rep.worst_deficit() > -5e-2,
            "flat torus deficits: {:?}",
            rep.slices.iter().map(|s| s.deficit).collect::<Vec<_>>()
        );
    }

    #[test]
    fn probe_counts_apex_crossings() {
        // cone over a large circle: antipodal-crossing pairs go through the apex
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, 8.0),
            ModelSpace::circle(2.0),
            WarpingFunction::Linear,
            1.0,
        )
        .unwrap();
        let opts = SolverOptions::coarse();
        let a = w.point(&[1.0], Some(&[0.0])).unwrap();
        let b = w.point(&[1.5], Some(&[PI])).unwrap();
        let mu0 = DiscreteMeasure { atoms: vec![(a, 1.0)] };
        let mu1 = DiscreteMeasure { atoms: vec![(b, 1.0)] };
        let plan = w2(&mu0, &mu1, &w, &opts).unwrap();
        assert!(singular_mass_probe(&plan, &w, 0.05) >= 0.999);

        // trivial product: no collapsed set at all
        let flat = flat_torus_product();
        let a = flat.point(&[0.1], Some(&[0.2])).unwrap();
        let b = flat.point(&[2.0], Some(&[2.0])).unwrap();
        let mu0 = DiscreteMeasure { atoms: vec![(a, 1.0)] };
        let mu1 = DiscreteMeasure { atoms: vec![(b, 1.0)] };
        let plan = w2(&mu0, &mu1, &flat, &opts).unwrap();
        assert_eq!(singular_mass_probe(&plan, &flat, 0.1), 0.0);
    }
}
