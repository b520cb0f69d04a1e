//! Distance and minimizing geodesics in warped products.
//!
//! Every nontrivial distance reduces to a two-dimensional strip problem
//! `B x_f [0, theta]` where theta is the length of a minimizing fiber
//! geodesic: the base path is independent of the fiber except through that
//! length. The strip is solved in two stages: a Dijkstra grid oracle with a
//! 16-neighbor stencil (plus deterministic polyline shortening of the seed
//! path), then shooting on the reduced geodesic ODE with the conserved
//! fiber angular momentum as the one-dimensional search parameter. Routes
//! through the collapsed set are handled by exact horizontal-leg candidates.

use crate::spaces::{Geodesic, SpaceKind, SpacePoint};
use crate::warp::{WarpedPoint, WarpedProduct, SINGULAR_TOL};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("strip solver requires an interval base for non-constant warpings")]
    UnsupportedBase,
    #[error("endpoints coincide and fiber separation is zero")]
    DegenerateEndpoints,
    #[error("evaluation parameter {0} outside [0, 1]")]
    Parameter(f64),
    #[error(transparent)]
    Warp(#[from] crate::warp::WarpError),
}

/// Tunables for the two-stage solver.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Lattice cells per axis for the Dijkstra stage.
    pub grid_res: usize,
    /// Vertices of the shortened seed polyline.
    pub shorten_vertices: usize,
    /// Gauss-Seidel sweeps of local vertex relaxation.
    pub shorten_sweeps: usize,
    /// Target length tolerance of the refined stage.
    pub tol: f64,
    /// Angular-momentum scan points per sign branch.
    pub scan_points: usize,
    /// Samples stored on returned paths.
    pub path_samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_res: 400,
            shorten_vertices: 160,
            shorten_sweeps: 80,
            tol: 1e-6,
            scan_points: 192,
            path_samples: 513,
        }
    }
}

impl SolverOptions {
    /// Coarse profile for bulk distance matrices where downstream tolerances
    /// dominate the solver error.
    pub fn coarse() -> Self {
        Self {
            grid_res: 96,
            shorten_vertices: 96,
            shorten_sweeps: 30,
            tol: 1e-4,
            scan_points: 96,
            path_samples: 129,
        }
    }
}

/// Reduced two-dimensional problem: endpoints (r0, 0) and (r1, theta) in the
/// strip `B x_f [0, theta]`.
#[derive(Debug, Clone)]
pub struct StripProblem {
    pub r0: f64,
    pub r1: f64,
    pub theta: f64,
}

/// Solution of a strip problem.
#[derive(Debug, Clone)]
pub struct StripSolution {
    /// Upper bound from the grid stage (length of an explicit polyline).
    pub grid_length: f64,
    /// Refined length after shooting (or action descent / singular routes).
    pub length: f64,
    /// Samples (tau, r, phi, p, w) along the refined path, unit speed in tau.
    pub samples: Vec<StripSample>,
    /// Fiber angular momentum of the shooting solution (w f^2), zero for
    /// horizontal and singular routes.
    pub angular_momentum: f64,
    pub through_singular: bool,
    /// False when shooting failed to converge and the grid bound is returned.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct StripSample {
    pub tau: f64,
    pub r: f64,
    pub phi: f64,
    /// Radial speed dr/dtau.
    pub p: f64,
    /// Fiber sweep speed dphi/dtau.
    pub w: f64,
}

/// Discretized constant-speed geodesic in the warped product, parameterized
/// on [0, 1].
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub samples: Vec<(f64, WarpedPoint)>,
    /// Base metric speed per sample (d/dt parameterization).
    pub base_speed: Vec<f64>,
    /// Fiber metric speed per sample (in F, unscaled by f).
    pub fiber_speed: Vec<f64>,
    /// Conserved (fiber speed)^2 f^4 in the [0, 1] parameterization.
    pub clairaut: f64,
    /// Constant of the energy equation, L^2 / 2.
    pub energy: f64,
    pub length: f64,
    pub through_singular: bool,
    pub converged: bool,
}

impl GeodesicPath {
    pub fn start(&self) -> &WarpedPoint {
        &self.samples.first().expect("nonempty path").1
    }

    pub fn end(&self) -> &WarpedPoint {
        &self.samples.last().expect("nonempty path").1
    }

    /// Constant-speed point at parameter t, interpolating between adjacent
    /// samples along factor geodesics.
    pub fn evaluate(&self, w: &WarpedProduct, t: f64) -> Result<WarpedPoint, GeodesicError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeodesicError::Parameter(t));
        }
        if t == 0.0 {
            return Ok(self.start().clone());
        }
        if t == 1.0 {
            return Ok(self.end().clone());
        }
        let n = self.samples.len();
        let pos = t * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        if frac == 0.0 {
            return Ok(self.samples[i].1.clone());
        }
        let a = &self.samples[i].1;
        let b = &self.samples[i + 1].1;
        let base_geo = &w.base.minimizing_geodesics(&a.base, &b.base)[0];
        let base = base_geo.point_at(frac);
        let fiber = match (&a.fiber, &b.fiber) {
            (Some(x), Some(y)) => Some(w.fiber.minimizing_geodesics(x, y)[0].point_at(frac)),
            (Some(x), None) => Some(x.clone()),
            (None, Some(y)) => Some(y.clone()),
            (None, None) => None,
        };
        let f = w.f(&base);
        if f.abs() <= SINGULAR_TOL {
            Ok(WarpedPoint { base, fiber: None })
        } else {
            Ok(WarpedPoint { base, fiber })
        }
    }

    /// Worst deviation of v^2/2 + c/(2 f^2) from the energy constant over
    /// non-singular samples.
    pub fn energy_residual(&self, w: &WarpedProduct) -> f64 {
        if self.through_singular {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (k, (_, p)) in self.samples.iter().enumerate() {
            let f = w.f(&p.base);
            if f.abs() <= SINGULAR_TOL {
                continue;
            }
            let v = self.base_speed[k];
            let e = 0.5 * v * v + self.clairaut / (2.0 * f * f);
            worst = worst.max((e - self.energy).abs());
        }
        worst
    }

    /// Worst deviation of w(t) f(alpha(t))^2 from its median over
    /// non-singular samples.
    pub fn clairaut_residual(&self, w: &WarpedProduct) -> f64 {
        if self.through_singular {
            return 0.0;
        }
        let mut vals: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .filter_map(|(k, (_, p))| {
                let f = w.f(&p.base);
                if f.abs() <= SINGULAR_TOL {
                    None
                } else {
                    Some(self.fiber_speed[k] * f * f)
                }
            })
            .collect();
        if vals.is_empty() {
            return 0.0;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = vals[vals.len() / 2];
        vals.iter().map(|v| (v - med).abs()).fold(0.0, f64::max)
    }
}

/// Result of `product_distance`: the refined distance with its path, plus
/// the grid-stage bound for oracle comparisons.
#[derive(Debug, Clone)]
pub struct ProductDistance {
    pub length: f64,
    pub grid_length: f64,
    pub path: GeodesicPath,
}

/// Distance and minimizing geodesic between warped points.
pub fn product_distance(
    w: &WarpedProduct,
    a: &WarpedPoint,
    b: &WarpedPoint,
    opts: &SolverOptions,
) -> Result<ProductDistance, GeodesicError> {
    // collapsed endpoints: the projection to B is 1-Lipschitz and the
    // horizontal path realizes the base distance
    if a.is_singular() || b.is_singular() {
        let d = w.base.distance(&a.base, &b.base);
        let fiber = a.fiber.clone().or_else(|| b.fiber.clone());
        let path = horizontal_path(w, &a.base, &b.base, fiber, opts.path_samples, true);
        return Ok(ProductDistance { length: d, grid_length: d, path });
    }

    // constant warping: plain product metric, closed form
    if let Some(c) = constant_warping(w) {
        return Ok(product_metric_path(w, a, b, c, opts.path_samples));
    }

    let (x, y) = (a.fiber.as_ref().unwrap(), b.fiber.as_ref().unwrap());
    let fiber_geos = w.fiber.minimizing_geodesics(x, y);
    let d_f = w.fiber.distance(x, y);

    // candidate fiber routes: every minimizing geodesic, plus the
    // complementary arc on circle fibers
    let mut routes: Vec<(f64, Geodesic)> =
        fiber_geos.into_iter().map(|g| (g.length, g)).collect();
    if let SpaceKind::Circle { radius } = w.fiber.kind {
        let fwd = (y.scalar() - x.scalar()).rem_euclid(2.0 * PI);
        for sweep in [fwd, fwd - 2.0 * PI] {
            let len = radius * sweep.abs();
            if len > 1e-12 && (len - d_f).abs() > 1e-12 {
                routes.push((len, Geodesic::raw_circle_arc(x.scalar(), sweep, radius)));
            }
        }
    }

    let r0 = a.base.scalar();
    let r1 = b.base.scalar();
    let ctx = StripContext::new(w, opts);

    let mut best: Option<(StripSolution, Option<Geodesic>)> = None;
    let mut grid_best = f64::INFINITY;
    for (theta, geo) in routes {
        let sol = ctx.solve(&StripProblem { r0, r1, theta })?;
        grid_best = grid_best.min(sol.grid_length);
        let better = best.as_ref().map_or(true, |(cur, _)| sol.length < cur.length);
        if better {
            best = Some((sol, Some(geo)));
        }
    }
    // singular route: exact horizontal-leg candidate
    if let Some((len, apex)) = singular_candidate(w, r0, r1) {
        grid_best = grid_best.min(len);
        let better = best.as_ref().map_or(true, |(cur, _)| len < cur.length);
        if better {
            let sol = StripSolution {
                grid_length: len,
                length: len,
                samples: singular_strip_samples(r0, r1, apex),
                angular_momentum: 0.0,
                through_singular: true,
                converged: true,
            };
            best = Some((sol, None));
        }
    }

    let (sol, fiber_geo) = best.expect("at least one candidate route");
    let path = lift_strip_path(w, &sol, fiber_geo.as_ref(), a, b, opts.path_samples);
    Ok(ProductDistance { length: sol.length, grid_length: grid_best, path })
}

/// Batch distances; strips reuse one solver context, rows in parallel.
pub fn distance_matrix(
    w: &WarpedProduct,
    sources: &[WarpedPoint],
    targets: &[WarpedPoint],
    opts: &SolverOptions,
) -> Result<Vec<Vec<f64>>, GeodesicError> {
    use rayon::prelude::*;
    if constant_warping(w).is_some() {
        return Ok(sources
            .iter()
            .map(|a| targets.iter().map(|b| trivial_distance(w, a, b)).collect())
            .collect());
    }
    let rows: Result<Vec<Vec<f64>>, GeodesicError> = sources
        .par_iter()
        .map(|a| {
            let ctx = StripContext::new(w, opts);
            let mut row = Vec::with_capacity(targets.len());
            for b in targets {
                if a.is_singular() || b.is_singular() {
                    row.push(w.base.distance(&a.base, &b.base));
                    continue;
                }
                let x = a.fiber.as_ref().unwrap();
                let y = b.fiber.as_ref().unwrap();
                let theta = w.fiber.distance(x, y);
                let sol = ctx.solve(&StripProblem {
                    r0: a.base.scalar(),
                    r1: b.base.scalar(),
                    theta,
                })?;
                row.push(sol.length);
            }
            Ok(row)
        })
        .collect();
    rows
}

fn trivial_distance(w: &WarpedProduct, a: &WarpedPoint, b: &WarpedPoint) -> f64 {
    let c = constant_warping(w).expect("constant warping");
    let db = w.base.distance(&a.base, &b.base);
    let df = match (&a.fiber, &b.fiber) {
        (Some(x), Some(y)) => w.fiber.distance(x, y),
        _ => 0.0,
    };
    (db * db + c * c * df * df).sqrt()
}

fn constant_warping(w: &WarpedProduct) -> Option<f64> {
    match w.warping {
        crate::warp::WarpingFunction::Const { c } => Some(c),
        _ => None,
    }
}

/// Exact through-apex candidate: shortest pair of horizontal legs meeting in
/// the collapsed set. None when the singular set is empty.
pub fn singular_candidate(w: &WarpedProduct, r0: f64, r1: f64) -> Option<(f64, f64)> {
    let (a, b) = w.base_range();
    w.warping
        .zeros(a, b)
        .into_iter()
        .map(|z| ((r0 - z).abs() + (r1 - z).abs(), z))
        .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
}

/// The best horizontal-leg route through the collapsed set, or None when
/// that set is empty.
pub fn singular_route(
    w: &WarpedProduct,
    a: &WarpedPoint,
    b: &WarpedPoint,
    opts: &SolverOptions,
) -> Option<(f64, GeodesicPath)> {
    let (len, apex) = singular_candidate(w, a.base.scalar(), b.base.scalar())?;
    let sol = StripSolution {
        grid_length: len,
        length: len,
        samples: singular_strip_samples(a.base.scalar(), b.base.scalar(), apex),
        angular_momentum: 0.0,
        through_singular: true,
        converged: true,
    };
    let path = lift_strip_path(w, &sol, None, a, b, opts.path_samples);
    Some((len, path))
}

// --- strip solver ----------------------------------------------------------

struct StripContext<'a> {
    w: &'a WarpedProduct,
    opts: &'a SolverOptions,
    dom_lo: f64,
    dom_hi: f64,
}

impl<'a> StripContext<'a> {
    fn new(w: &'a WarpedProduct, opts: &'a SolverOptions) -> Self {
        let (a, b) = w.base_range();
        Self { w, opts, dom_lo: a, dom_hi: b }
    }

    fn f(&self, r: f64) -> f64 {
        self.w.warping.value(r).max(0.0)
    }

    fn f_prime(&self, r: f64) -> f64 {
        self.w.warping.derivative(r)
    }

    /// Radial window of the lattice: the full base interval when bounded,
    /// else [lo, comfortably above both endpoints].
    fn radial_window(&self, p: &StripProblem) -> (f64, f64) {
        if self.dom_hi.is_finite() {
            (self.dom_lo, self.dom_hi)
        } else {
            let top = p.r0.max(p.r1);
            (self.dom_lo, self.dom_lo + (top - self.dom_lo).max(1e-6) * 1.25 + 1e-9)
        }
    }

    fn solve(&self, p: &StripProblem) -> Result<StripSolution, GeodesicError> {
        if p.theta < 0.0 {
            return Err(GeodesicError::DegenerateEndpoints);
        }
        // flat fiber direction: pure base geodesic
        if p.theta <= 1e-15 {
            let len = (p.r1 - p.r0).abs();
            return Ok(StripSolution {
                grid_length: len,
                length: len,
                samples: radial_samples(p.r0, p.r1),
                angular_momentum: 0.0,
                through_singular: false,
                converged: true,
            });
        }
        let f0 = self.f(p.r0);
        let f1 = self.f(p.r1);
        if f0 <= SINGULAR_TOL || f1 <= SINGULAR_TOL {
            // endpoint on the collapsed set: horizontal leg
            let len = (p.r1 - p.r0).abs();
            return Ok(StripSolution {
                grid_length: len,
                length: len,
                samples: radial_samples(p.r0, p.r1),
                angular_momentum: 0.0,
                through_singular: true,
                converged: true,
            });
        }

        // stage (a): Dijkstra on the lattice, then polyline shortening
        let (seed, grid_raw) = self.dijkstra_seed(p);
        let polyline = self.shorten(seed, p);
        let grid_length = self.polyline_length(&polyline).min(grid_raw);

        // singular candidates within the strip are exact
        let singular = singular_candidate(self.w, p.r0, p.r1);

        // stage (b): shooting over the angular momentum
        let shot = self.shoot(p, &polyline, grid_length);

        let mut best_len = grid_length;
        let mut best: Option<Shot> = None;
        if let Some(s) = shot {
            if s.length <= best_len + self.opts.tol {
                best_len = s.length.min(best_len);
                best = Some(s);
            }
        }
        if let Some((slen, apex)) = singular {
            if slen <= best_len * (1.0 + 1e-9) + 1e-12 {
                return Ok(StripSolution {
                    grid_length,
                    length: slen,
                    samples: singular_strip_samples(p.r0, p.r1, apex),
                    angular_momentum: 0.0,
                    through_singular: true,
                    converged: true,
                });
            }
        }
        match best {
            Some(s) => Ok(StripSolution {
                grid_length,
                length: s.length,
                angular_momentum: s.ell,
                samples: s.samples,
                through_singular: false,
                converged: true,
            }),
            None => {
                // shooting found no root (tight double-apex grazing):
                // fall back to direct action minimization over the polyline,
                // refined through doubled vertex counts with a Richardson
                // step to cancel the leading interpolation bias
                let (len, polished, converged) = self.action_refine(polyline, p);
                let samples = polyline_to_samples(&polished, len);
                Ok(StripSolution {
                    grid_length,
                    length: len.min(grid_length),
                    samples,
                    angular_momentum: 0.0,
                    through_singular: false,
                    converged,
                })
            }
        }
    }

    /// Direct minimization of the discrete action at increasing vertex
    /// counts; the two finest levels extrapolate the quadratic interpolation
    /// bias away. Converged when the extrapolation step is below tolerance.
    fn action_refine(&self, seed: Vec<(f64, f64)>, p: &StripProblem) -> (f64, Vec<(f64, f64)>, bool) {
        let (lo, hi) = self.radial_window(p);
        let mut pts = seed;
        let mut lengths: Vec<f64> = Vec::new();
        for n in [256usize, 512, 1024] {
            pts = resample_polyline(&pts, n);
            for _ in 0..4 {
                self.relax_level(&mut pts, lo, hi);
            }
            lengths.push(self.polyline_length(&pts));
        }
        let step = (lengths[2] - lengths[1]) / 3.0;
        let extrapolated = lengths[2] + step;
        let converged = step.abs() <= self.opts.tol * extrapolated.max(1.0);
        (extrapolated, pts, converged)
    }

    /// Dijkstra over the lattice with a 16-neighbor stencil. Returns the seed
    /// polyline (exact endpoints included) and the raw grid bound.
    fn dijkstra_seed(&self, p: &StripProblem) -> (Vec<(f64, f64)>, f64) {
        let res = self.opts.grid_res.max(8);
        let (lo, hi) = self.radial_window(p);
        let nr = res + 1;
        let nphi = res + 1;
        let dr = (hi - lo) / res as f64;
        let dphi = p.theta / res as f64;
        let idx = |i: usize, j: usize| i * nphi + j;
        let n_nodes = nr * nphi + 2;
        let src = nr * nphi;
        let dst = nr * nphi + 1;
        let rs: Vec<f64> = (0..nr).map(|i| lo + i as f64 * dr).collect();
        let fs: Vec<f64> = rs.iter().map(|&r| self.f(r)).collect();

        // 16-neighbor stencil: king moves plus knight moves
        const STENCIL: [(i64, i64); 16] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
            (1, 2),
            (1, -2),
            (-1, 2),
            (-1, -2),
            (2, 1),
            (2, -1),
            (-2, 1),
            (-2, -1),
        ];

        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut parent = vec![usize::MAX; n_nodes];
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem { cost: 0.0, node: src });

        let cell_of = |r: f64| (((r - lo) / dr).round() as i64).clamp(0, res as i64) as usize;
        let src_cell_i = cell_of(p.r0);
        let dst_cell_i = cell_of(p.r1);

        let exact_chord = |ra: f64, pa: f64, rb: f64, pb: f64| -> f64 {
            let fm = 0.5 * (self.f(ra) + self.f(rb));
            let d_r = rb - ra;
            let d_p = pb - pa;
            (d_r * d_r + fm * fm * d_p * d_p).sqrt()
        };

        while let Some(HeapItem { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            if node == dst {
                break;
            }
            if node == src {
                // link the exact source into a window of nearby lattice nodes
                for di in -2i64..=2 {
                    for dj in 0i64..=2 {
                        let i = src_cell_i as i64 + di;
                        if i < 0 || i >= nr as i64 {
                            continue;
                        }
                        let (i, j) = (i as usize, dj as usize);
                        let wgt = exact_chord(p.r0, 0.0, rs[i], j as f64 * dphi);
                        let to = idx(i, j);
                        let nc = cost + wgt;
                        if nc < dist[to] {
                            dist[to] = nc;
                            parent[to] = node;
                            heap.push(HeapItem { cost: nc, node: to });
                        }
                    }
                }
                continue;
            }
            let (i, j) = (node / nphi, node % nphi);
            // direct hop to the exact target from nodes near it
            if (i as i64 - dst_cell_i as i64).abs() <= 2 && (res - j) <= 2 {
                let wgt = exact_chord(rs[i], j as f64 * dphi, p.r1, p.theta);
                let nc = cost + wgt;
                if nc < dist[dst] {
                    dist[dst] = nc;
                    parent[dst] = node;
                    heap.push(HeapItem { cost: nc, node: dst });
                }
            }
            let fi = fs[i];
            for (di, dj) in STENCIL {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || ni >= nr as i64 || nj < 0 || nj >= nphi as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let fm = 0.5 * (fi + fs[ni]);
                let d_r = di as f64 * dr;
                let d_p = dj as f64 * dphi;
                let wgt = (d_r * d_r + fm * fm * d_p * d_p).sqrt();
                let to = idx(ni, nj);
                let nc = cost + wgt;
                if nc < dist[to] {
                    dist[to] = nc;
                    parent[to] = node;
                    heap.push(HeapItem { cost: nc, node: to });
                }
            }
        }

        // extract the node path
        let mut chain = vec![(p.r1, p.theta)];
        let mut cur = parent[dst];
        while cur != usize::MAX && cur != src {
            let (i, j) = (cur / nphi, cur % nphi);
            chain.push((rs[i], j as f64 * dphi));
            cur = parent[cur];
        }
        chain.push((p.r0, 0.0));
        chain.reverse();
        (chain, dist[dst])
    }

    /// Coarse-to-fine action relaxation of the seed polyline. Each level runs
    /// Gauss-Seidel sweeps of a preconditioned local update that minimizes
    /// the discrete action (sum of squared chord lengths); the minimizer of
    /// the action is the constant-speed geodesic, so vertices cannot slide
    /// tangentially and low-frequency error is removed on the coarse levels.
    fn shorten(&self, seed: Vec<(f64, f64)>, p: &StripProblem) -> Vec<(f64, f64)> {
        let n_final = self.opts.shorten_vertices.max(8);
        let (lo, hi) = self.radial_window(p);
        let mut n = 8usize.min(n_final);
        let mut pts = resample_polyline(&seed, n);
        loop {
            self.relax_level(&mut pts, lo, hi);
            if n >= n_final {
                break;
            }
            n = (n * 2).min(n_final);
            pts = resample_polyline(&pts, n);
        }
        pts
    }

    fn relax_level(&self, pts: &mut [(f64, f64)], lo: f64, hi: f64) {
        for _ in 0..self.opts.shorten_sweeps.max(4) {
            let mut moved = 0.0f64;
            for k in 1..pts.len() - 1 {
                let a = pts[k - 1];
                let b = pts[k + 1];
                let mut v = pts[k];
                // two fixed-point iterations of the local action minimum
                for _ in 0..2 {
                    let fa = self.f(0.5 * (v.0 + a.0));
                    let fb = self.f(0.5 * (v.0 + b.0));
                    let fpa = self.f_prime(0.5 * (v.0 + a.0));
                    let fpb = self.f_prime(0.5 * (v.0 + b.0));
                    let wa = (fa * fa).max(1e-300);
                    let wb = (fb * fb).max(1e-300);
                    let phi = (wa * a.1 + wb * b.1) / (wa + wb);
                    let r = 0.5 * (a.0 + b.0)
                        - 0.25
                            * (fa * fpa * (phi - a.1).powi(2)
                                + fb * fpb * (b.1 - phi).powi(2));
                    v = (r.clamp(lo, hi), phi);
                }
                moved += (v.0 - pts[k].0).abs() + (v.1 - pts[k].1).abs();
                pts[k] = v;
            }
            if moved < 1e-14 {
                break;
            }
        }
    }

    /// True curve length of a strip polyline under dyadic refinement.
    fn polyline_length(&self, pts: &[(f64, f64)]) -> f64 {
        let seg = |a: (f64, f64), b: (f64, f64)| {
            let fm = 0.5 * (self.f(a.0) + self.f(b.0));
            ((b.0 - a.0).powi(2) + fm * fm * (b.1 - a.1).powi(2)).sqrt()
        };
        let mut pts: Vec<(f64, f64)> = pts.to_vec();
        let mut value: f64 = pts.windows(2).map(|w| seg(w[0], w[1])).sum();
        for _ in 0..12 {
            let mut refined = Vec::with_capacity(pts.len() * 2);
            for w in pts.windows(2) {
                refined.push(w[0]);
                refined.push((0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1)));
            }
            refined.push(*pts.last().unwrap());
            let next: f64 = refined.windows(2).map(|w| seg(w[0], w[1])).sum();
            let done = (next - value).abs() <= 1e-10 * value.max(1e-30);
            pts = refined;
            value = next;
            if done || pts.len() > (1 << 15) {
                break;
            }
        }
        value
    }

    /// Shooting stage: bracket the angular momentum from a scan seeded by the
    /// polyline, bisect each bracket, keep the shortest hit.
    fn shoot(&self, p: &StripProblem, seed: &[(f64, f64)], grid_bound: f64) -> Option<Shot> {
        let ell_max = self.f(p.r0).min(self.f(p.r1));
        if !(ell_max > 0.0) {
            return None;
        }
        let tau_cap = grid_bound * 1.6 + 1.0;
        // seed estimate of the angular momentum from the first polyline step
        let ell_seed = seed
            .windows(2)
            .next()
            .map(|w| {
                let fm = 0.5 * (self.f(w[0].0) + self.f(w[1].0));
                let dlen =
                    ((w[1].0 - w[0].0).powi(2) + fm * fm * (w[1].1 - w[0].1).powi(2)).sqrt();
                if dlen < 1e-300 {
                    0.0
                } else {
                    (fm * fm * (w[1].1 - w[0].1) / dlen).abs()
                }
            })
            .unwrap_or(0.0)
            .clamp(0.0, ell_max);

        let n_scan = self.opts.scan_points.max(8);
        let mut fractions: Vec<f64> =
            (1..=n_scan).map(|i| i as f64 / (n_scan as f64 + 1.0)).collect();
        // geometric ladders toward both ends: grazing solutions have tiny
        // angular momentum, near-tangential launches sit just below the cap
        let mut frac = 0.5 / (n_scan as f64 + 1.0);
        while frac > 1e-7 {
            fractions.push(frac);
            fractions.push(1.0 - frac);
            frac *= 0.45;
        }
        if ell_seed > 0.0 {
            for mul in [0.9, 0.95, 0.99, 1.0, 1.01, 1.05, 1.1] {
                fractions.push((ell_seed * mul / ell_max).clamp(1e-7, 1.0 - 1e-9));
            }
        }
        fractions.push(1.0 - 1e-7);
        fractions.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fractions.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let n_steps = self.base_steps(grid_bound);
        // scans and early bisection only need the sign structure of the
        // miss function; run them at reduced resolution
        let n_scan_steps = (n_steps / 8).max(120);
        let mut best: Option<Shot> = None;
        for sigma in [1.0f64, -1.0] {
            // a rejected coarse integration (validity-monitor trip in a tight
            // dip) gets one retry at full resolution before leaving a hole
            let probe = |ell: f64| {
                self.integrate(p, ell, sigma, tau_cap, n_scan_steps, false)
                    .or_else(|| self.integrate(p, ell, sigma, tau_cap, n_steps, false))
                    .map(|s| (ell, s.miss))
            };
            let mut branch: Vec<(f64, f64)> = fractions
                .iter()
                .filter_map(|&frac| probe(frac * ell_max))
                .collect();
            // adaptive passes: a local minimum of |miss| without an adjacent
            // sign change signals a root pair hiding inside one interval
            for _ in 0..3 {
                let mut inserts: Vec<(f64, f64)> = Vec::new();
                for i in 1..branch.len().saturating_sub(1) {
                    let (e_prev, m_prev) = branch[i - 1];
                    let (_e_cur, m_cur) = branch[i];
                    let (e_next, m_next) = branch[i + 1];
                    let same_sign =
                        m_prev.signum() == m_cur.signum() && m_cur.signum() == m_next.signum();
                    let local_min = m_cur.abs() < m_prev.abs() && m_cur.abs() < m_next.abs();
                    if same_sign && local_min && (e_next - e_prev) > 1e-12 * ell_max {
                        for k in 1..8 {
                            let e = e_prev + (e_next - e_prev) * k as f64 / 8.0;
                            if branch.iter().all(|&(x, _)| (x - e).abs() > 1e-15 * ell_max) {
                                if let Some(pt) = probe(e) {
                                    inserts.push(pt);
                                }
                            }
                        }
                    }
                }
                if inserts.is_empty() {
                    break;
                }
                branch.extend(inserts);
                branch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            }
            for win in branch.windows(2) {
                let (e0, m0) = win[0];
                let (e1, m1) = win[1];
                if m0 == 0.0 || m0.signum() != m1.signum() {
                    // coarse bisection localizes the root; a full-resolution
                    // secant re-root produces the candidate (the root can
                    // shift noticeably with step size on grazing strips)
                    let shot = self
                        .bisect_ell(p, sigma, e0, m0, e1, tau_cap, n_steps)
                        .and_then(|root| {
                            self.refine_root(p, root, sigma, ell_max, tau_cap, n_steps)
                        });
                    if let Some(shot) = shot {
                        if best.as_ref().map_or(true, |b| shot.length < b.length) {
                            best = Some(shot);
                        }
                    }
                }
            }
        }
        // drop wall-exit shots (synthetic misses are order one); genuine
        // roots may still carry a small resolution-dependent miss that the
        // polish below re-solves away
        let loose_cap = 1e-3 * (1.0 + p.r1.abs());
        let miss_cap = (self.opts.tol * 5.0).max(1e-9) * (1.0 + p.r1.abs());
        best = best.filter(|s| s.miss.abs() <= loose_cap);

        // polish the winner: halve steps and re-solve the root at each
        // resolution until the length stabilizes
        if let Some(ref mut shot) = best {
            let ell_max_local = ell_max;
            let mut n = n_steps;
            for _ in 0..5 {
                let n2 = n * 2;
                match self.refine_root(p, shot.ell, shot.sigma, ell_max_local, tau_cap, n2) {
                    Some(refined) if refined.miss.abs() <= loose_cap => {
                        let delta = (refined.length - shot.length).abs();
                        *shot = refined;
                        n = n2;
                        if delta < self.opts.tol / 10.0 {
                            break;
                        }
                    }
                    _ => break,
                }
            }
        }
        best.filter(|s| s.miss.abs() <= miss_cap)
    }

    /// Re-solve m(ell) = 0 near a known root at a finer integration
    /// resolution (secant iteration), returning the refined shot.
    fn refine_root(
        &self,
        p: &StripProblem,
        ell0: f64,
        sigma: f64,
        ell_max: f64,
        tau_cap: f64,
        n_steps: usize,
    ) -> Option<Shot> {
        let clamp = |e: f64| e.clamp(1e-12, ell_max * (1.0 - 1e-12));
        let mut e0 = clamp(ell0);
        let mut m0 = self.integrate(p, e0, sigma, tau_cap, n_steps, false)?.miss;
        let mut e1 = clamp(ell0 * (1.0 - 1e-6) - 1e-15);
        let mut m1 = self.integrate(p, e1, sigma, tau_cap, n_steps, false)?.miss;
        for _ in 0..30 {
            if m0.abs() < 1e-12 {
                break;
            }
            let denom = m0 - m1;
            if denom.abs() < 1e-300 {
                break;
            }
            let next = clamp(e0 - m0 * (e0 - e1) / denom);
            if (next - e0).abs() < 1e-16 * (1.0 + e0) {
                break;
            }
            e1 = e0;
            m1 = m0;
            e0 = next;
            m0 = self.integrate(p, e0, sigma, tau_cap, n_steps, false)?.miss;
        }
        self.integrate(p, e0, sigma, tau_cap, n_steps, true)
    }

    fn base_steps(&self, grid_bound: f64) -> usize {
        let per_unit = (10.0 / self.opts.tol).powf(0.25) * 12.0;
        ((grid_bound.max(0.1) * per_unit) as usize).clamp(200, 60_000)
    }

    #[allow(clippy::too_many_arguments)]
    fn bisect_ell(
        &self,
        p: &StripProblem,
        sigma: f64,
        mut e0: f64,
        mut m0: f64,
        mut e1: f64,
        tau_cap: f64,
        n_steps: usize,
    ) -> Option<f64> {
        if m0 == 0.0 {
            return Some(e0);
        }
        // bisect at reduced resolution; the caller re-roots at full
        // resolution afterwards
        let n_coarse = (n_steps / 4).max(150);
        let miss_tol = 0.02 * self.opts.tol * (1.0 + p.r1.abs());
        for _ in 0..60 {
            let mid = 0.5 * (e0 + e1);
            let sm = self
                .integrate(p, mid, sigma, tau_cap, n_coarse, false)
                .or_else(|| self.integrate(p, mid, sigma, tau_cap, n_steps, false))?;
            if sm.miss.abs() < miss_tol || (e1 - e0).abs() < 1e-12 * (1.0 + mid) {
                return Some(mid);
            }
            if sm.miss.signum() == m0.signum() {
                e0 = mid;
                m0 = sm.miss;
            } else {
                e1 = mid;
            }
        }
        Some(0.5 * (e0 + e1))
    }

    /// Integrate the unit-speed strip geodesic ODE from (r0, 0) with angular
    /// momentum `ell` and initial radial sign `sigma` until the fiber sweep
    /// reaches theta. Returns the radial miss at arrival and the path.
    fn integrate(
        &self,
        p: &StripProblem,
        ell: f64,
        sigma: f64,
        tau_cap: f64,
        n_steps: usize,
        keep_path: bool,
    ) -> Option<Shot> {
        let f0 = self.f(p.r0);
        let disc = 1.0 - ell * ell / (f0 * f0);
        if disc < -1e-12 {
            return None;
        }
        let (lo, hi) = self.radial_window(p);
        let r_cap_hi = if self.dom_hi.is_finite() { hi } else { hi + (hi - lo) };
        let mut r = p.r0;
        let mut q = sigma * disc.max(0.0).sqrt();
        let mut phi = 0.0f64;
        let mut tau = 0.0f64;
        let h_base = tau_cap / n_steps as f64;
        let mut samples: Vec<StripSample> = Vec::new();
        let keep_every = (n_steps / 4096).max(1);
        let mut step_count = 0usize;
        let max_total = n_steps.saturating_mul(64);

        let deriv = |r: f64, q: f64| -> (f64, f64, f64) {
            let f = self.f(r).max(1e-300);
            (q, ell * ell * self.f_prime(r) / (f * f * f), ell / (f * f))
        };

        loop {
            let f = self.f(r).max(1e-300);
            if keep_path && step_count % keep_every == 0 {
                samples.push(StripSample { tau, r, phi, p: q, w: ell / (f * f) });
            }
            // local step limits: resolve the fiber sweep near the f ~ ell
            // turning region, never step across the apex scale, and resolve
            // the radial turn itself (p crosses zero at rate ~ f'/ell)
            let wdot = ell / (f * f);
            let mut h = h_base
                .min(0.02 * p.theta / wdot.max(1e-300))
                .min(0.25 * f.max(1e-9));
            if f < 2.0 * ell {
                h = h.min(0.15 * ell / self.f_prime(r).abs().max(0.2));
            }
            let h = h.max(1e-12).min(tau_cap - tau);
            // RK4 step of (r, q, phi)
            let (k1r, k1q, k1p) = deriv(r, q);
            let (k2r, k2q, k2p) = deriv(r + 0.5 * h * k1r, q + 0.5 * h * k1q);
            let (k3r, k3q, k3p) = deriv(r + 0.5 * h * k2r, q + 0.5 * h * k2q);
            let (k4r, k4q, k4p) = deriv(r + h * k3r, q + h * k3q);
            let nr = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            let nq = q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            let nphi = phi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);

            if nphi >= p.theta {
                // land exactly on the sweep by shrinking the final step
                let (mut lo_s, mut hi_s) = (0.0f64, h);
                let mut fr = nr;
                let mut fq = nq;
                for _ in 0..60 {
                    let hs = 0.5 * (lo_s + hi_s);
                    let (k1r, k1q, k1p) = deriv(r, q);
                    let (k2r, k2q, k2p) = deriv(r + 0.5 * hs * k1r, q + 0.5 * hs * k1q);
                    let (k3r, k3q, k3p) = deriv(r + 0.5 * hs * k2r, q + 0.5 * hs * k2q);
                    let (k4r, k4q, k4p) = deriv(r + hs * k3r, q + hs * k3q);
                    fr = r + hs / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
                    fq = q + hs / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
                    let fphi = phi + hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                    if (fphi - p.theta).abs() < 1e-14 * p.theta.max(1.0) {
                        lo_s = hs;
                        hi_s = hs;
                        break;
                    }
                    if fphi > p.theta {
                        hi_s = hs;
                    } else {
                        lo_s = hs;
                    }
                }
                tau += 0.5 * (lo_s + hi_s);
                let ff = self.f(fr).max(1e-300);
                if keep_path {
                    samples.push(StripSample {
                        tau,
                        r: fr,
                        phi: p.theta,
                        p: fq,
                        w: ell / (ff * ff),
                    });
                }
                return Some(Shot { ell, sigma, length: tau, miss: fr - p.r1, samples });
            }

            r = nr;
            q = nq;
            phi = nphi;
            tau += h;
            step_count += 1;
            if tau >= tau_cap || step_count > max_total {
                return None;
            }
            if r < lo - 1e-9 {
                return None;
            }
            if r > r_cap_hi + 1e-9 {
                // ascending exit through a truncation wall (positive f):
                // the sweep target is unreachable below the wall, so the
                // radial miss is definitively positive; keep the sign
                // information for bracketing instead of punching a hole
                if self.f(r_cap_hi) > SINGULAR_TOL && r > p.r1 {
                    return Some(Shot { ell, sigma, length: tau, miss: r - p.r1, samples });
                }
                return None;
            }
            let f_now = self.f(r);
            if f_now <= SINGULAR_TOL {
                // ran into the collapsed set; singular candidates handle this
                return None;
            }
            // unit-speed invariant is the integrator's validity monitor: a
            // drift means the step blasted through the apex region
            let inv = q * q + ell * ell / (f_now * f_now);
            if (inv - 1.0).abs() > 1e-3 {
                return None;
            }
        }
    }
}

struct Shot {
    ell: f64,
    sigma: f64,
    length: f64,
    miss: f64,
    samples: Vec<StripSample>,
}

#[derive(PartialEq)]
struct HeapItem {
    cost: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost; ties broken by node id for determinism
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

// --- path construction helpers ----------------------------------------------

fn radial_samples(r0: f64, r1: f64) -> Vec<StripSample> {
    let n = 64;
    let len = (r1 - r0).abs();
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            StripSample {
                tau: t * len,
                r: r0 + t * (r1 - r0),
                phi: 0.0,
                p: if r1 >= r0 { 1.0 } else { -1.0 },
                w: 0.0,
            }
        })
        .collect()
}

/// Two horizontal legs joined at the apex; the strip sweep jumps 0 -> 1 at
/// the apex, where the fiber coordinate is free.
fn singular_strip_samples(r0: f64, r1: f64, apex: f64) -> Vec<StripSample> {
    let l0 = (r0 - apex).abs();
    let l1 = (r1 - apex).abs();
    let total = (l0 + l1).max(1e-300);
    let n = 128;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = k as f64 / n as f64 * total;
        let (r, phi) = if s <= l0 {
            (r0 + (apex - r0).signum() * s.min(l0), 0.0)
        } else {
            (apex + (r1 - apex).signum() * (s - l0).min(l1), 1.0)
        };
        out.push(StripSample { tau: s, r, phi, p: 0.0, w: 0.0 });
    }
    out
}

fn resample_polyline(pts: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    if pts.len() < 2 {
        return pts.to_vec();
    }
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return vec![pts[0], *pts.last().unwrap()];
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let target = total * k as f64 / n as f64;
        while j + 1 < cum.len() - 1 && cum[j + 1] < target {
            j += 1;
        }
        let seg = (cum[j + 1] - cum[j]).max(1e-300);
        let t = ((target - cum[j]) / seg).clamp(0.0, 1.0);
        out.push((
            pts[j].0 + t * (pts[j + 1].0 - pts[j].0),
            pts[j].1 + t * (pts[j + 1].1 - pts[j].1),
        ));
    }
    out
}

fn polyline_to_samples(pts: &[(f64, f64)], total_len: f64) -> Vec<StripSample> {
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total: f64 = *cum.last().unwrap();
    pts.iter()
        .enumerate()
        .map(|(k, &(r, phi))| StripSample {
            tau: if total > 0.0 { cum[k] / total * total_len } else { 0.0 },
            r,
            phi,
            p: 0.0,
            w: 0.0,
        })
        .collect()
}

/// Lift a strip solution into the warped product along the chosen fiber
/// geodesic, resampled at uniform parameter with exact endpoints.
fn lift_strip_path(
    w: &WarpedProduct,
    sol: &StripSolution,
    fiber_geo: Option<&Geodesic>,
    a: &WarpedPoint,
    b: &WarpedPoint,
    n_samples: usize,
) -> GeodesicPath {
    let total = sol.samples.last().map(|s| s.tau).unwrap_or(0.0).max(1e-300);
    let length = sol.length;
    let theta = fiber_geo.map(|g| g.length).unwrap_or(0.0);
    let phi_span = sol.samples.last().map(|s| s.phi).unwrap_or(0.0).max(1e-300);
    let n = n_samples.max(3);
    let mut samples = Vec::with_capacity(n);
    let mut base_speed = Vec::with_capacity(n);
    let mut fiber_speed = Vec::with_capacity(n);
    let mut j = 0usize;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let tau = t * total;
        while j + 1 < sol.samples.len() - 1 && sol.samples[j + 1].tau < tau {
            j += 1;
        }
        let (s0, s1) = (&sol.samples[j], &sol.samples[(j + 1).min(sol.samples.len() - 1)]);
        let seg = (s1.tau - s0.tau).max(1e-300);
        let frac = ((tau - s0.tau) / seg).clamp(0.0, 1.0);
        let r = s0.r + frac * (s1.r - s0.r);
        let phi = s0.phi + frac * (s1.phi - s0.phi);
        let p_interp = s0.p + frac * (s1.p - s0.p);
        let w_interp = s0.w + frac * (s1.w - s0.w);

        let point = if k == 0 {
            a.clone()
        } else if k == n - 1 {
            b.clone()
        } else {
            let base = SpacePoint::new(vec![r]);
            let f = w.f(&base);
            let fiber = if f.abs() <= SINGULAR_TOL {
                None
            } else {
                match fiber_geo {
                    Some(g) if theta > 0.0 => Some(g.point_at((phi / theta).clamp(0.0, 1.0))),
                    _ => {
                        // horizontal route: fiber constant on each leg
                        if phi / phi_span < 0.5 {
                            a.fiber.clone().or_else(|| b.fiber.clone())
                        } else {
                            b.fiber.clone().or_else(|| a.fiber.clone())
                        }
                    }
                }
            };
            WarpedPoint { base, fiber }
        };
        samples.push((t, point));
        // speeds in the [0, 1] parameterization; fiber speed measured in F
        base_speed.push(p_interp.abs() * length);
        let f_here = w.f(&samples[k].1.base).max(1e-300);
        let fiber_metric_speed = if theta > 0.0 {
            w_interp * length
        } else {
            0.0
        };
        let _ = f_here;
        fiber_speed.push(fiber_metric_speed);
    }
    let clairaut = if sol.through_singular || sol.angular_momentum == 0.0 {
        0.0
    } else {
        (sol.angular_momentum * length).powi(2)
    };
    GeodesicPath {
        samples,
        base_speed,
        fiber_speed,
        clairaut,
        energy: 0.5 * length * length,
        length,
        through_singular: sol.through_singular,
        converged: sol.converged,
    }
}

/// Horizontal path (base geodesic, fiber constant where defined).
fn horizontal_path(
    w: &WarpedProduct,
    from: &SpacePoint,
    to: &SpacePoint,
    fiber: Option<SpacePoint>,
    n_samples: usize,
    through_singular: bool,
) -> GeodesicPath {
    let geo = &w.base.minimizing_geodesics(from, to)[0];
    let length = geo.length;
    let n = n_samples.max(3);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let base = geo.point_at(t);
        let f = w.f(&base);
        let fb = if f.abs() <= SINGULAR_TOL { None } else { fiber.clone() };
        samples.push((t, WarpedPoint { base, fiber: fb }));
    }
    GeodesicPath {
        base_speed: vec![length; n],
        fiber_speed: vec![0.0; n],
        samples,
        clairaut: 0.0,
        energy: 0.5 * length * length,
        length,
        through_singular,
        converged: true,
    }
}

/// Closed-form product geodesic for constant warping c.
fn product_metric_path(
    w: &WarpedProduct,
    a: &WarpedPoint,
    b: &WarpedPoint,
    c: f64,
    n_samples: usize,
) -> ProductDistance {
    let base_geo = &w.base.minimizing_geodesics(&a.base, &b.base)[0];
    let (x, y) = (a.fiber.as_ref().unwrap(), b.fiber.as_ref().unwrap());
    let fiber_geo = &w.fiber.minimizing_geodesics(x, y)[0];
    let db = base_geo.length;
    let df = fiber_geo.length;
    let length = (db * db + c * c * df * df).sqrt();
    let n = n_samples.max(3);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let point = if k == 0 {
            a.clone()
        } else if k == n - 1 {
            b.clone()
        } else {
            WarpedPoint { base: base_geo.point_at(t), fiber: Some(fiber_geo.point_at(t)) }
        };
        samples.push((t, point));
    }
    let path = GeodesicPath {
        base_speed: vec![db; n],
        fiber_speed: vec![df; n],
        samples,
        clairaut: (df * c * c).powi(2),
        energy: 0.5 * length * length,
        length,
        through_singular: false,
        converged: true,
    };
    ProductDistance { length, grid_length: length, path }
}

/// Single shooting integration for diagnostics: returns (radial miss at the
/// target sweep, arclength) when the integration is valid.
#[doc(hidden)]
pub fn strip_shoot_probe(
    w: &WarpedProduct,
    problem: &StripProblem,
    ell: f64,
    sigma: f64,
    n_steps: usize,
    tau_cap: f64,
    opts: &SolverOptions,
) -> Option<(f64, f64)> {
    let ctx = StripContext::new(w, opts);
    ctx.integrate(problem, ell, sigma, tau_cap, n_steps, false)
        .map(|s| (s.miss, s.length))
}

/// Solve a raw strip problem on the warped product's base and warping.
pub fn solve_strip(
    w: &WarpedProduct,
    problem: &StripProblem,
    opts: &SolverOptions,
) -> Result<StripSolution, GeodesicError> {
    if !matches!(w.base.kind, SpaceKind::Interval { .. }) {
        return Err(GeodesicError::UnsupportedBase);
    }
    StripContext::new(w, opts).solve(problem)
}
