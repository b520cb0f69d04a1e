//! The warped product `B x_f F` as a metric measure space: warping functions
//! with derivative oracles and singular sets, points that collapse the fiber
//! where f vanishes, the partition length functional, the `f^N`-weighted
//! product measure, and the closed-form K-cone metric.

use crate::kernels::{cn, cn_inverse, sn};
use crate::measure::DiscreteMeasure;
use crate::spaces::{ModelSpace, SpaceError, SpaceGrid, SpaceKind, SpacePoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Warping values below this are treated as exact zeros when canonicalizing
/// points against the singular set.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum WarpError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("warping function {0:?} requires a one-dimensional interval base")]
    BaseKind(String),
    #[error("warping function takes negative value {value} at base coordinate {at}")]
    NegativeValue { at: f64, value: f64 },
    #[error("point at positive warping f = {0} must carry a fiber coordinate")]
    MissingFiber(f64),
    #[error("fiber coordinate dropped at interior path point while neighbors disagree in fiber; route through a singular point explicitly")]
    HiddenFiberJump,
    #[error("path needs at least two points, got {0}")]
    ShortPath(usize),
    #[error("radial coordinate {value} outside the cone interval [0, {max}]")]
    ConeRadial { value: f64, max: f64 },
    #[error("exponent N must satisfy N >= 1, got {0}")]
    Exponent(f64),
}

/// Warping function f >= 0 on the base, with analytic derivative oracles for
/// the catalog entries and central finite differences for callbacks.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpingFunction {
    /// f(r) = sin r (vanishes at multiples of pi).
    Sin,
    /// f(r) = cos r (vanishes at pi/2 + k pi).
    Cos,
    /// f(r) = sn_K(r).
    SnK { k: f64 },
    /// f(r) = r.
    Linear,
    /// f(r) = a r + b.
    Affine { a: f64, b: f64 },
    /// f(r) = r^2.
    Square,
    /// f = c > 0 everywhere (any base kind).
    Const { c: f64 },
    /// Value-only callback; derivatives by Richardson-extrapolated central
    /// differences at step 1e-5.
    #[serde(skip)]
    Callback(std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WarpingFunction::Sin => write!(f, "Sin"),
            WarpingFunction::Cos => write!(f, "Cos"),
            WarpingFunction::SnK { k } => write!(f, "SnK({k})"),
            WarpingFunction::Linear => write!(f, "Linear"),
            WarpingFunction::Affine { a, b } => write!(f, "Affine({a}, {b})"),
            WarpingFunction::Square => write!(f, "Square"),
            WarpingFunction::Const { c } => write!(f, "Const({c})"),
            WarpingFunction::Callback(_) => write!(f, "Callback"),
        }
    }
}

const FD_STEP: f64 = 1e-5;
// second derivatives divide by h^2, so the rounding floor at 1e-5 is ~2.5e-6;
// a larger step keeps both truncation and rounding below 1e-9
const FD_STEP_2ND: f64 = 5e-4;

impl WarpingFunction {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Sin => r.sin(),
            WarpingFunction::Cos => r.cos(),
            WarpingFunction::SnK { k } => sn(*k, r.max(0.0)),
            WarpingFunction::Linear => r,
            WarpingFunction::Affine { a, b } => a * r + b,
            WarpingFunction::Square => r * r,
            WarpingFunction::Const { c } => *c,
            WarpingFunction::Callback(f) => f(r),
        }
    }

    /// First derivative: analytic for catalog entries, five-point central
    /// difference (one Richardson level) for callbacks.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Sin => r.cos(),
            WarpingFunction::Cos => -r.sin(),
            WarpingFunction::SnK { k } => cn(*k, r.max(0.0)),
            WarpingFunction::Linear => 1.0,
            WarpingFunction::Affine { a, .. } => *a,
            WarpingFunction::Square => 2.0 * r,
            WarpingFunction::Const { .. } => 0.0,
            WarpingFunction::Callback(f) => {
                let h = FD_STEP;
                (8.0 * (f(r + h) - f(r - h)) - (f(r + 2.0 * h) - f(r - 2.0 * h))) / (12.0 * h)
            }
        }
    }

    /// Second derivative, which on a one-dimensional base equals both the
    /// Hessian density and the Laplacian.
    pub fn second_derivative(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::Sin => -r.sin(),
            WarpingFunction::Cos => -r.cos(),
            WarpingFunction::SnK { k } => -k * sn(*k, r.max(0.0)),
            WarpingFunction::Linear => 0.0,
            WarpingFunction::Affine { .. } => 0.0,
            WarpingFunction::Square => 2.0,
            WarpingFunction::Const { .. } => 0.0,
            WarpingFunction::Callback(f) => {
                let h = FD_STEP_2ND;
                (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r) + 16.0 * f(r - h)
                    - f(r - 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }

    /// Wrap any entry so that all derivatives go through the finite-difference
    /// path; used to validate the analytic oracles against each other.
    pub fn as_callback(&self) -> WarpingFunction {
        let inner = self.clone();
        WarpingFunction::Callback(std::sync::Arc::new(move |r| inner.value(r)))
    }

    fn needs_interval_base(&self) -> bool {
        !matches!(self, WarpingFunction::Const { .. })
    }

    /// Zeros of f inside [a, b] (closed), exact for catalog entries, bisected
    /// from a scan for callbacks.
    pub fn zeros(&self, a: f64, b: f64) -> Vec<f64> {
        let in_range = |z: f64| z >= a - 1e-12 && z <= b + 1e-12;
        match self {
            WarpingFunction::Sin => periodic_zeros(0.0, PI, a, b),
            WarpingFunction::Cos => periodic_zeros(PI / 2.0, PI, a, b),
            WarpingFunction::SnK { k } => {
                let mut out = Vec::new();
                if in_range(0.0) {
                    out.push(0.0);
                }
                if *k > 0.0 {
                    let z = PI / k.sqrt();
                    if in_range(z) {
                        out.push(z);
                    }
                }
                out
            }
            WarpingFunction::Linear => {
                if in_range(0.0) {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            WarpingFunction::Affine { a: s, b: o } => {
                if *s == 0.0 {
                    vec![]
                } else {
                    let z = -o / s;
                    if in_range(z) {
                        vec![z]
                    } else {
                        vec![]
                    }
                }
            }
            WarpingFunction::Square => {
                if in_range(0.0) {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            WarpingFunction::Const { .. } => vec![],
            WarpingFunction::Callback(f) => {
                if !b.is_finite() {
                    return Vec::new();
                }
                let n = 4096;
                let h = (b - a) / n as f64;
                let mut out = Vec::new();
                for i in 0..=n {
                    let r = a + i as f64 * h;
                    if f(r).abs() <= SINGULAR_TOL {
                        if out.last().map_or(true, |&z: &f64| (r - z) > 2.0 * h) {
                            out.push(r);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Zeros of the form z0 + k * period clipped to [a, b].
fn periodic_zeros(z0: f64, period: f64, a: f64, b: f64) -> Vec<f64> {
    if !b.is_finite() {
        // only catalog zeros at finite coordinates matter; enumerate a few
        // periods past `a` for unbounded rays
        let mut out = Vec::new();
        let k0 = ((a - z0) / period).floor() as i64;
        for k in k0..k0 + 16 {
            let z = z0 + k as f64 * period;
            if z >= a - 1e-12 {
                out.push(z);
            }
        }
        return out;
    }
    let mut out = Vec::new();
    let k0 = ((a - z0) / period).floor() as i64 - 1;
    let k1 = ((b - z0) / period).ceil() as i64 + 1;
    for k in k0..=k1 {
        let z = z0 + k as f64 * period;
        if z >= a - 1e-12 && z <= b + 1e-12 {
            out.push(z.clamp(a, b));
        }
    }
    out
}

/// Point of the warped product: the fiber coordinate is dropped exactly when
/// the warping vanishes at the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedPoint {
    pub base: SpacePoint,
    pub fiber: Option<SpacePoint>,
}

impl WarpedPoint {
    pub fn is_singular(&self) -> bool {
        self.fiber.is_none()
    }
}

/// The warped product `B x_f F` with measure weight `f^N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpedProduct {
    pub base: ModelSpace,
    pub fiber: ModelSpace,
    pub warping: WarpingFunction,
    pub exponent: f64,
}

impl WarpedProduct {
    pub fn new(
        base: ModelSpace,
        fiber: ModelSpace,
        warping: WarpingFunction,
        exponent: f64,
    ) -> Result<Self, WarpError> {
        if !(exponent >= 1.0) {
            return Err(WarpError::Exponent(exponent));
        }
        if warping.needs_interval_base() && !matches!(base.kind, SpaceKind::Interval { .. }) {
            return Err(WarpError::BaseKind(format!("{warping:?}")));
        }
        let w = Self { base, fiber, warping, exponent };
        // sanity-scan f >= 0 over the (truncated) base range
        let (a, b) = w.base_range();
        let hi = if b.is_finite() { b } else { a + 64.0 };
        for i in 0..=512 {
            let r = a + (hi - a) * i as f64 / 512.0;
            let v = w.warping.value(r);
            if v < -1e-9 {
                return Err(WarpError::NegativeValue { at: r, value: v });
            }
        }
        Ok(w)
    }

    pub fn base_range(&self) -> (f64, f64) {
        match &self.base.kind {
            SpaceKind::Interval { a, b } => (*a, b.unwrap_or(f64::INFINITY)),
            _ => (0.0, 0.0),
        }
    }

    pub fn f(&self, base: &SpacePoint) -> f64 {
        match &self.base.kind {
            SpaceKind::Interval { .. } => self.warping.value(base.scalar()),
            _ => self.warping.value(0.0), // constant warpings only
        }
    }

    /// Construct a canonical point: validates the chart coordinates and drops
    /// the fiber exactly on the singular set.
    pub fn point(
        &self,
        base_coords: &[f64],
        fiber_coords: Option<&[f64]>,
    ) -> Result<WarpedPoint, WarpError> {
        let base = self.base.point(base_coords)?;
        let f = self.f(&base);
        if f.abs() <= SINGULAR_TOL {
            return Ok(WarpedPoint { base, fiber: None });
        }
        match fiber_coords {
            None => Err(WarpError::MissingFiber(f)),
            Some(c) => Ok(WarpedPoint { base, fiber: Some(self.fiber.point(c)?) }),
        }
    }

    /// The collapsed set X = f^{-1}(0) as warped points without fiber.
    pub fn apex_set(&self) -> Vec<WarpedPoint> {
        let (a, b) = self.base_range();
        self.warping
            .zeros(a, b)
            .into_iter()
            .map(|z| WarpedPoint { base: SpacePoint::new(vec![z]), fiber: None })
            .collect()
    }

    /// Distance from a point to the singular set: the base distance to the
    /// nearest zero of f (the fiber contributes nothing at a collapsed end).
    pub fn distance_to_apex(&self, p: &WarpedPoint) -> f64 {
        self.apex_set()
            .iter()
            .map(|s| self.base.distance(&p.base, &s.base))
            .fold(f64::INFINITY, f64::min)
    }

    /// Chord length of a single step per the partition sum: the fiber
    /// displacement is scaled by f at the right endpoint, and collapsed
    /// endpoints contribute no fiber term.
    pub fn chord(&self, p: &WarpedPoint, q: &WarpedPoint) -> f64 {
        let db = self.base.distance(&p.base, &q.base);
        let df = match (&p.fiber, &q.fiber) {
            (Some(x), Some(y)) => self.fiber.distance(x, y),
            _ => 0.0,
        };
        let f = self.f(&q.base);
        (db * db + f * f * df * df).sqrt()
    }

    /// Symmetrized chord used by solvers: f evaluated midway along the base.
    pub fn chord_mid(&self, p: &WarpedPoint, q: &WarpedPoint) -> f64 {
        let db = self.base.distance(&p.base, &q.base);
        let df = match (&p.fiber, &q.fiber) {
            (Some(x), Some(y)) => self.fiber.distance(x, y),
            _ => 0.0,
        };
        let fm = 0.5 * (self.f(&p.base) + self.f(&q.base));
        (db * db + fm * fm * df * df).sqrt()
    }

    /// Partition sum of the length functional for the given polyline.
    pub fn partition_sum(&self, path: &[WarpedPoint]) -> f64 {
        path.windows(2).map(|w| self.chord(&w[0], &w[1])).sum()
    }

    /// Length of a polyline under iterated dyadic refinement with geodesic
    /// interpolation in each factor, stopped at relative increment 1e-9.
    pub fn warped_length(&self, path: &[WarpedPoint]) -> Result<f64, WarpError> {
        if path.len() < 2 {
            return Err(WarpError::ShortPath(path.len()));
        }
        // interior points may only drop the fiber on the singular set unless
        // their neighbors agree in fiber
        for w in path.windows(3) {
            let mid = &w[1];
            if mid.is_singular() && self.f(&mid.base) > SINGULAR_TOL {
                let disagree = match (&w[0].fiber, &w[2].fiber) {
                    (Some(x), Some(y)) => self.fiber.distance(x, y) > 1e-12,
                    _ => false,
                };
                if disagree {
                    return Err(WarpError::HiddenFiberJump);
                }
            }
        }
        let mut current: Vec<WarpedPoint> = path.to_vec();
        let mut value = self.partition_sum(&current);
        for _ in 0..24 {
            let refined = self.refine(&current);
            let next = self.partition_sum(&refined);
            let increment = next - value;
            current = refined;
            let done = increment.abs() <= 1e-9 * value.max(1e-30);
            value = next;
            if done || current.len() > (1 << 17) {
                break;
            }
        }
        Ok(value)
    }

    /// Insert factor-geodesic midpoints between consecutive polyline points.
    fn refine(&self, path: &[WarpedPoint]) -> Vec<WarpedPoint> {
        let mut out = Vec::with_capacity(path.len() * 2);
        for w in path.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            out.push(p.clone());
            let base_mid = self.base.minimizing_geodesics(&p.base, &q.base)[0].point_at(0.5);
            let fiber_mid = match (&p.fiber, &q.fiber) {
                (Some(x), Some(y)) => {
                    Some(self.fiber.minimizing_geodesics(x, y)[0].point_at(0.5))
                }
                (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                (None, None) => None,
            };
            let f = self.f(&base_mid);
            let fiber = if f.abs() <= SINGULAR_TOL { None } else { fiber_mid };
            // a midpoint at positive f with no inheritable fiber can only
            // come from an all-singular pair; keep it collapsed
            out.push(WarpedPoint { base: base_mid, fiber });
        }
        out.push(path.last().unwrap().clone());
        out
    }

    /// Product grid measure with cell weights f^N * w_B * w_F and exact zero
    /// on cells whose representative lies in the singular set.
    pub fn warped_measure(
        &self,
        base_resolution: usize,
        fiber_resolution: usize,
    ) -> Result<DiscreteMeasure<WarpedPoint>, WarpError> {
        let grid = self.warped_grid(base_resolution, fiber_resolution)?;
        Ok(DiscreteMeasure { atoms: grid.atoms })
    }

    /// Grid with binning support retained (used by the entropy estimator).
    pub fn warped_grid(
        &self,
        base_resolution: usize,
        fiber_resolution: usize,
    ) -> Result<WarpedGrid, WarpError> {
        let base_grid = self.base.grid(base_resolution)?;
        let fiber_grid = self.fiber.grid(fiber_resolution)?;
        let mut atoms = Vec::with_capacity(base_grid.len() * fiber_grid.len());
        for (bi, bp) in base_grid.atoms.iter().enumerate() {
            let f_atom = self.f(bp);
            // exact cell integral of f^N over interval cells, midpoint value
            // times cell mass elsewhere (constant warpings)
            let f_pow_mass = if f_atom.abs() <= SINGULAR_TOL {
                0.0
            } else {
                match &self.base.kind {
                    SpaceKind::Interval { .. } => {
                        let axis = &base_grid.axes[0];
                        let (lo, hi) = axis_bounds(axis, bi);
                        crate::quadrature::integrate(
                            |r| self.warping.value(r).max(0.0).powf(self.exponent),
                            lo,
                            hi,
                        )
                    }
                    _ => f_atom.powf(self.exponent) * base_grid.masses[bi],
                }
            };
            for (fi, fp) in fiber_grid.atoms.iter().enumerate() {
                let weight = f_pow_mass * fiber_grid.masses[fi];
                let fiber = if f_atom.abs() <= SINGULAR_TOL { None } else { Some(fp.clone()) };
                atoms.push((WarpedPoint { base: bp.clone(), fiber }, weight));
            }
        }
        Ok(WarpedGrid { base_grid, fiber_grid, atoms })
    }
}

fn axis_bounds(axis: &crate::spaces::GridAxis, i: usize) -> (f64, f64) {
    let w = (axis.hi - axis.lo) / axis.cells as f64;
    (axis.lo + i as f64 * w, axis.lo + (i + 1) as f64 * w)
}

/// Product grid over the warped product with per-cell masses of `f^N m_B x m_F`.
pub struct WarpedGrid {
    pub base_grid: SpaceGrid,
    pub fiber_grid: SpaceGrid,
    pub atoms: Vec<(WarpedPoint, f64)>,
}

impl WarpedGrid {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cell_mass(&self, idx: usize) -> f64 {
        self.atoms[idx].1
    }

    /// Flat cell index of a warped point; None for collapsed points, which
    /// carry no fiber coordinate to bin.
    pub fn index_of(&self, p: &WarpedPoint) -> Option<usize> {
        let fiber = p.fiber.as_ref()?;
        let bi = self.base_grid.index_of(&p.base);
        let fi = self.fiber_grid.index_of(fiber);
        Some(bi * self.fiber_grid.len() + fi)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

/// Closed-form K-cone distance between (x, s) and (x', t), the fiber
/// separation capped at pi.
pub fn cone_distance(
    k: f64,
    fiber: &ModelSpace,
    x: &SpacePoint,
    s: f64,
    y: &SpacePoint,
    t: f64,
) -> Result<f64, WarpError> {
    let max_radial = if k > 0.0 { PI / k.sqrt() } else { f64::INFINITY };
    for &r in &[s, t] {
        if !(0.0..=max_radial + 1e-12).contains(&r) {
            return Err(WarpError::ConeRadial { value: r, max: max_radial });
        }
    }
    let d = fiber.distance(x, y).min(PI);
    if k == 0.0 {
        return Ok((s * s + t * t - 2.0 * s * t * d.cos()).max(0.0).sqrt());
    }
    let c = cn(k, s) * cn(k, t) + k * sn(k, s) * sn(k, t) * d.cos();
    Ok(cn_inverse(k, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::NormTable;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sphere_like() -> WarpedProduct {
        WarpedProduct::new(
            ModelSpace::interval(0.0, PI),
            ModelSpace::circle(1.0),
            WarpingFunction::Sin,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn point_canonicalization_drops_fiber_on_singular_set() {
        let w = sphere_like();
        let apex = w.point(&[0.0], Some(&[1.0])).unwrap();
        assert!(apex.is_singular());
        let interior = w.point(&[1.0], Some(&[1.0])).unwrap();
        assert!(!interior.is_singular());
        assert!(w.point(&[1.0], None).is_err());
    }

    #[test]
    fn apex_sets() {
        let w = sphere_like();
        let apexes = w.apex_set();
        assert_eq!(apexes.len(), 2);
        assert_eq!(apexes[0].base.scalar(), 0.0);
        assert_eq!(apexes[1].base.scalar(), PI);

        let flat = WarpedProduct::new(
            ModelSpace::interval(0.0, 1.0),
            ModelSpace::circle(1.0),
            WarpingFunction::Const { c: 1.0 },
            1.0,
        )
        .unwrap();
        assert!(flat.apex_set().is_empty());

        let cone = WarpedProduct::new(
            ModelSpace::ray(0.0),
            ModelSpace::circle(1.0),
            WarpingFunction::Linear,
            1.0,
        )
        .unwrap();
        let apexes = cone.apex_set();
        assert_eq!(apexes.len(), 1);
        assert_eq!(apexes[0].base.scalar(), 0.0);
    }

    #[test]
    fn length_of_base_polyline_with_constant_fiber() {
        let w = sphere_like();
        let path = vec![
            w.point(&[0.5], Some(&[0.3])).unwrap(),
            w.point(&[1.0], Some(&[0.3])).unwrap(),
            w.point(&[2.0], Some(&[0.3])).unwrap(),
        ];
        let len = w.warped_length(&path).unwrap();
        assert!((len - 1.5).abs() < 1e-9);
    }

    #[test]
    fn length_pythagoras_in_trivial_product() {
        // f = 1 over interval base: base leg 3, fiber arc 4 traversed linearly
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, 3.0),
            ModelSpace::circle(2.0),
            WarpingFunction::Const { c: 1.0 },
            1.0,
        )
        .unwrap();
        let n = 64;
        let path: Vec<WarpedPoint> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                w.point(&[3.0 * t], Some(&[2.0 * t])).unwrap()
            })
            .collect();
        let len = w.warped_length(&path).unwrap();
        assert!((len - 5.0).abs() < 1e-6, "{len}");
    }

    #[test]
    fn pure_fiber_arc_at_waist() {
        let w = sphere_like();
        let arc = 1.3;
        let path: Vec<WarpedPoint> = (0..=32)
            .map(|i| w.point(&[PI / 2.0], Some(&[arc * i as f64 / 32.0])).unwrap())
            .collect();
        let len = w.warped_length(&path).unwrap();
        assert!((len - arc).abs() < 1e-7, "{len}");
    }

    #[test]
    fn refinement_is_stable_under_reparameterization() {
        let w = sphere_like();
        // same geodesic-ish curve sampled unevenly
        let coarse = vec![
            w.point(&[0.4], Some(&[0.0])).unwrap(),
            w.point(&[1.1], Some(&[0.9])).unwrap(),
            w.point(&[1.2], Some(&[1.0])).unwrap(),
        ];
        let mut fine = Vec::new();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            fine.push(w.point(&[0.4 + 0.8 * t], Some(&[t])).unwrap());
        }
        let a = w.warped_length(&coarse).unwrap();
        let b = {
            // refine the coarse path once by hand and re-measure
            let refined = w.refine(&coarse);
            w.warped_length(&refined).unwrap()
        };
        assert!((a - b).abs() < 1e-8 * a.max(1.0));
        let _ = fine;
    }

    #[test]
    fn hidden_fiber_jump_rejected() {
        let w = sphere_like();
        let p = w.point(&[1.0], Some(&[0.0])).unwrap();
        let q = w.point(&[1.5], Some(&[2.0])).unwrap();
        let hidden = WarpedPoint { base: SpacePoint::new(vec![1.2]), fiber: None };
        assert!(matches!(
            w.warped_length(&[p.clone(), hidden, q.clone()]),
            Err(WarpError::HiddenFiberJump)
        ));
        // explicit routing through a true singular point is allowed
        let apex = w.point(&[0.0], Some(&[0.0])).unwrap();
        assert!(w.warped_length(&[p, apex, q]).is_ok());
    }

    #[test]
    fn warped_measure_total_mass() {
        // B = [0, pi], f = sin, N = 1, fiber = circle(1): total = 2 * 2pi
        let w = sphere_like();
        let m = w.warped_measure(200, 64).unwrap();
        let total = m.total();
        assert!(
            (total - 4.0 * PI).abs() < 1e-6 * 4.0 * PI,
            "mass {total} vs {}",
            4.0 * PI
        );
    }

    #[test]
    fn warped_measure_trivial_product() {
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, 2.0),
            ModelSpace::circle(1.0),
            WarpingFunction::Const { c: 1.0 },
            3.0,
        )
        .unwrap();
        let m = w.warped_measure(50, 50).unwrap();
        assert!((m.total() - 2.0 * 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn singular_cells_carry_zero_weight() {
        // callback warping vanishing exactly at a cell midpoint
        let f = WarpingFunction::Callback(std::sync::Arc::new(|r: f64| (r - 0.5).abs()));
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, 2.0),
            ModelSpace::circle(1.0),
            f,
            1.0,
        )
        .unwrap();
        let grid = w.warped_grid(2, 4).unwrap();
        let singular: Vec<_> = grid
            .atoms
            .iter()
            .filter(|(p, _)| p.is_singular())
            .collect();
        assert!(!singular.is_empty());
        for (_, weight) in singular {
            assert_eq!(*weight, 0.0);
        }
    }

    #[test]
    fn cone_distance_cases() {
        let circle = ModelSpace::circle(1.0);
        let x = circle.point(&[0.0]).unwrap();
        assert_eq!(cone_distance(0.0, &circle, &x, 1.0, &x, 1.0).unwrap(), 0.0);

        // law of cosines with right angle: 3-4-5
        let y = circle.point(&[PI / 2.0]).unwrap();
        let d = cone_distance(0.0, &circle, &x, 3.0, &y, 4.0).unwrap();
        assert!((d - 5.0).abs() < 1e-12);

        // K = 1, s = t = pi/2, separation pi/2
        let d = cone_distance(1.0, &circle, &x, PI / 2.0, &y, PI / 2.0).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);

        // radial range enforcement for K > 0
        assert!(cone_distance(1.0, &circle, &x, 3.5, &y, 1.0).is_err());
    }

    #[test]
    fn cone_distance_caps_fiber_separation() {
        let big = ModelSpace::circle(2.0);
        let x = big.point(&[0.0]).unwrap();
        let y = big.point(&[PI]).unwrap(); // peripheral separation 2 pi > pi
        let d = cone_distance(0.0, &big, &x, 1.0, &y, 2.0).unwrap();
        assert!((d - 3.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn minkowski_fiber_products_construct() {
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, 1.0),
            ModelSpace::minkowski_torus(vec![1.0, 1.0], NormTable::ellipse(1.0, 1.5, 360))
                .unwrap(),
            WarpingFunction::Const { c: 2.0 },
            2.0,
        );
        assert!(w.is_ok());
    }

    #[test]
    fn negative_warping_rejected() {
        let w = WarpedProduct::new(
            ModelSpace::interval(0.0, PI),
            ModelSpace::circle(1.0),
            WarpingFunction::Affine { a: -1.0, b: 1.0 },
            1.0,
        );
        assert!(matches!(w, Err(WarpError::NegativeValue { .. })));
    }

    proptest! {
        #[test]
        fn flat_cone_triangle_inequality(
            s0 in 0.01f64..4.0, s1 in 0.01f64..4.0, s2 in 0.01f64..4.0,
            a0 in 0.0f64..6.283, a1 in 0.0f64..6.283, a2 in 0.0f64..6.283,
        ) {
            let circle = ModelSpace::circle(1.0);
            let p0 = circle.point(&[a0]).unwrap();
            let p1 = circle.point(&[a1]).unwrap();
            let p2 = circle.point(&[a2]).unwrap();
            let d01 = cone_distance(0.0, &circle, &p0, s0, &p1, s1).unwrap();
            let d12 = cone_distance(0.0, &circle, &p1, s1, &p2, s2).unwrap();
            let d02 = cone_distance(0.0, &circle, &p0, s0, &p2, s2).unwrap();
            prop_assert!(d02 <= d01 + d12 + 1e-10);
        }
    }

    #[test]
    fn flat_cone_triangle_inequality_dense() {
        let circle = ModelSpace::circle(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for _ in 0..10_000 {
            let pts: Vec<(SpacePoint, f64)> = (0..3)
                .map(|_| {
                    (
                        circle.point(&[rng.gen_range(0.0..2.0 * PI)]).unwrap(),
                        rng.gen_range(0.01..4.0),
                    )
                })
                .collect();
            let d = |i: usize, j: usize| {
                cone_distance(0.0, &circle, &pts[i].0, pts[i].1, &pts[j].0, pts[j].1).unwrap()
            };
            assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-10);
        }
    }
}
