//! Model metric measure spaces used as bases and fibers: intervals, circles,
//! round spheres, flat tori, and flat tori carrying a Minkowski norm. Each
//! space exposes exact distances, minimizing geodesics, intrinsic measure
//! grids, and closed-form curvature data.

use crate::quadrature;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("point has {got} coordinates, chart expects {expected}")]
    CoordinateArity { expected: usize, got: usize },
    #[error("coordinate {value} outside interval [{a}, {b}]")]
    OutsideInterval { value: f64, a: f64, b: f64 },
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("resolution {0} overflows the cell budget")]
    ResolutionOverflow(usize),
    #[error("grid measure requires a bounded space; interval is unbounded")]
    Unbounded,
    #[error("no pointwise Ricci in non-smooth directions of a Minkowski torus")]
    NonSmoothRicci,
    #[error("sectional curvature needs a 2-plane; space has dimension {0}")]
    NoPlanes(usize),
    #[error("norm table: {0}")]
    NormTable(String),
    #[error("weight not supported on this space kind (flat charts only)")]
    WeightUnsupported,
    #[error("invalid space parameter: {0}")]
    Parameter(String),
}

/// Point in the chart of its model space; canonical after construction
/// through [`ModelSpace::point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub coords: Vec<f64>,
}

impl SpacePoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn scalar(&self) -> f64 {
        self.coords[0]
    }
}

/// Sampled Minkowski norm on the plane: values of the norm on uniformly
/// spaced unit directions, radially interpolated. The Euclidean table is
/// represented exactly (all values 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub values: Vec<f64>,
}

impl NormTable {
    pub fn euclidean(samples: usize) -> Self {
        Self { values: vec![1.0; samples] }
    }

    /// Ellipse norm |v|_Q = sqrt(v1^2/a^2 + v2^2/b^2) sampled on `samples` directions.
    pub fn ellipse(a: f64, b: f64, samples: usize) -> Self {
        let values = (0..samples)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / samples as f64;
                ((th.cos() / a).powi(2) + (th.sin() / b).powi(2)).sqrt()
            })
            .collect();
        Self { values }
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        let m = self.values.len();
        if m < 8 || m % 2 != 0 {
            return Err(SpaceError::NormTable(format!(
                "need an even number of samples >= 8, got {m}"
            )));
        }
        if self.values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(SpaceError::NormTable("values must be positive and finite".into()));
        }
        for j in 0..m / 2 {
            let a = self.values[j];
            let b = self.values[j + m / 2];
            if (a - b).abs() > 1e-9 * a.max(b) {
                return Err(SpaceError::NormTable(format!(
                    "not symmetric at sample {j}: {a} vs {b}"
                )));
            }
        }
        // Unit ball convexity on the direction grid of the table itself:
        // consecutive knot boundary points must turn consistently. Radial
        // interpolation between knots is convex only to O(dtheta^2), which
        // `interpolation_defect` quantifies.
        let boundary: Vec<[f64; 2]> = (0..m)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / m as f64;
                let r = 1.0 / self.values[j];
                [r * th.cos(), r * th.sin()]
            })
            .collect();
        for j in 0..m {
            let p0 = boundary[j];
            let p1 = boundary[(j + 1) % m];
            let p2 = boundary[(j + 2) % m];
            let e1 = [p1[0] - p0[0], p1[1] - p0[1]];
            let e2 = [p2[0] - p1[0], p2[1] - p1[1]];
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            let scale = (e1[0].hypot(e1[1]) * e2[0].hypot(e2[1])).max(1e-300);
            if cross / scale < -1e-9 {
                return Err(SpaceError::NormTable(format!(
                    "unit ball not convex near direction {j}/{m} (turn {:.3e})",
                    cross / scale
                )));
            }
        }
        Ok(())
    }

    /// Worst relative triangle-inequality slack introduced by radial
    /// interpolation between knots: zero for constant (Euclidean) tables,
    /// O(dtheta^2) for smooth anisotropic profiles.
    pub fn interpolation_defect(&self) -> f64 {
        let m = self.values.len();
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let a = self.values[j];
            let b = self.values[(j + 1) % m];
            let th0 = 2.0 * PI * j as f64 / m as f64;
            let th1 = th0 + 2.0 * PI / m as f64;
            let p0 = [th0.cos() / a, th0.sin() / a];
            let p1 = [th1.cos() / b, th1.sin() / b];
            // compare the interpolated boundary radius at mid angle with the
            // chord radius; positive excess = local concavity
            let mid = 0.5 * (th0 + th1);
            let r_interp = 1.0 / (0.5 * (a + b));
            let dir = [mid.cos(), mid.sin()];
            let r_chord = chord_ray_radius(&p0, &p1, &dir);
            worst = worst.max((r_interp - r_chord) / r_chord);
        }
        worst.max(0.0)
    }

    /// Norm value: |v|_2 times the radially interpolated directional profile.
    pub fn eval(&self, v: &[f64]) -> f64 {
        let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let m = self.values.len() as f64;
        let th = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
        let s = th / (2.0 * PI) * m;
        let j = (s.floor() as usize) % self.values.len();
        let frac = s - s.floor();
        let k = (j + 1) % self.values.len();
        r * (self.values[j] * (1.0 - frac) + self.values[k] * frac)
    }

    /// Ratio of the largest to smallest directional value; bounds how far
    /// lattice-shift searches must reach.
    pub fn eccentricity(&self) -> f64 {
        let max = self.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.values.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }
}

/// Optional smooth log-density on a space with a flat chart. The measure
/// carries the factor e^{-psi}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// psi(x) = |x|^2 / 2 in chart coordinates.
    HalfSquare,
    /// psi(x) = sum_i a_i x_i.
    Linear { a: Vec<f64> },
}

impl Weight {
    pub fn psi(&self, coords: &[f64]) -> f64 {
        match self {
            Weight::HalfSquare => 0.5 * coords.iter().map(|c| c * c).sum::<f64>(),
            Weight::Linear { a } => a.iter().zip(coords).map(|(ai, c)| ai * c).sum(),
        }
    }

    /// Coordinate gradient d(psi) applied to a chart vector.
    pub fn dpsi(&self, coords: &[f64], v: &[f64]) -> f64 {
        match self {
            Weight::HalfSquare => coords.iter().zip(v).map(|(c, vi)| c * vi).sum(),
            Weight::Linear { a } => a.iter().zip(v).map(|(ai, vi)| ai * vi).sum(),
        }
    }

    /// Coordinate Hessian applied to (v, v); exact covariant Hessian on the
    /// flat charts these weights are restricted to.
    pub fn hessian(&self, _coords: &[f64], v: &[f64]) -> f64 {
        match self {
            Weight::HalfSquare => v.iter().map(|vi| vi * vi).sum(),
            Weight::Linear { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Interval {
        a: f64,
        /// Missing upper bound means an unbounded ray [a, inf).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    Circle { radius: f64 },
    Sphere { dim: usize, radius: f64 },
    FlatTorus { sides: Vec<f64> },
    MinkowskiTorus { sides: Vec<f64>, norm: NormTable },
}

/// A concrete model metric measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    #[serde(flatten)]
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Weight>,
}

impl ModelSpace {
    pub fn new(kind: SpaceKind) -> Result<Self, SpaceError> {
        let space = Self { kind, weight: None };
        space.validate()?;
        Ok(space)
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self::new(SpaceKind::Interval { a, b: Some(b) }).expect("valid interval")
    }

    pub fn ray(a: f64) -> Self {
        Self::new(SpaceKind::Interval { a, b: None }).expect("valid ray")
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(SpaceKind::Circle { radius }).expect("valid circle")
    }

    pub fn sphere(dim: usize, radius: f64) -> Self {
        Self::new(SpaceKind::Sphere { dim, radius }).expect("valid sphere")
    }

    pub fn flat_torus(sides: Vec<f64>) -> Self {
        Self::new(SpaceKind::FlatTorus { sides }).expect("valid torus")
    }

    pub fn minkowski_torus(sides: Vec<f64>, norm: NormTable) -> Result<Self, SpaceError> {
        Self::new(SpaceKind::MinkowskiTorus { sides, norm })
    }

    pub fn with_weight(mut self, weight: Weight) -> Result<Self, SpaceError> {
        match self.kind {
            SpaceKind::Interval { .. } | SpaceKind::Circle { .. } | SpaceKind::FlatTorus { .. } => {
                self.weight = Some(weight);
                Ok(self)
            }
            _ => Err(SpaceError::WeightUnsupported),
        }
    }

    fn validate(&self) -> Result<(), SpaceError> {
        match &self.kind {
            SpaceKind::Interval { a, b } => {
                if let Some(b) = b {
                    if !(b > a) {
                        return Err(SpaceError::Parameter(format!("empty interval [{a}, {b}]")));
                    }
                }
            }
            SpaceKind::Circle { radius } | SpaceKind::Sphere { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(SpaceError::Parameter(format!("radius {radius} must be positive")));
                }
                if let SpaceKind::Sphere { dim, .. } = &self.kind {
                    if *dim < 1 {
                        return Err(SpaceError::Parameter("sphere dimension must be >= 1".into()));
                    }
                }
            }
            SpaceKind::FlatTorus { sides } => {
                if sides.is_empty() || sides.iter().any(|s| !(*s > 0.0)) {
                    return Err(SpaceError::Parameter("torus sides must be positive".into()));
                }
            }
            SpaceKind::MinkowskiTorus { sides, norm } => {
                if sides.len() != 2 {
                    return Err(SpaceError::Parameter(
                        "Minkowski torus is supported in dimension 2".into(),
                    ));
                }
                if sides.iter().any(|s| !(*s > 0.0)) {
                    return Err(SpaceError::Parameter("torus sides must be positive".into()));
                }
                norm.validate()?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SpaceKind::Interval { .. } | SpaceKind::Circle { .. } => 1,
            SpaceKind::Sphere { dim, .. } => *dim,
            SpaceKind::FlatTorus { sides } | SpaceKind::MinkowskiTorus { sides, .. } => sides.len(),
        }
    }

    /// Number of chart coordinates (equals `dim` for every catalog kind).
    pub fn chart_len(&self) -> usize {
        self.dim()
    }

    pub fn is_riemannian(&self) -> bool {
        !matches!(self.kind, SpaceKind::MinkowskiTorus { .. })
    }

    /// Boundary points of the chart; nonempty only for intervals.
    pub fn boundary(&self) -> Vec<SpacePoint> {
        match &self.kind {
            SpaceKind::Interval { a, b } => {
                let mut pts = vec![SpacePoint::new(vec![*a])];
                if let Some(b) = b {
                    pts.push(SpacePoint::new(vec![*b]));
                }
                pts
            }
            _ => Vec::new(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SpaceKind::Interval { a, b } => b.map(|b| b - a).unwrap_or(f64::INFINITY),
            SpaceKind::Circle { radius } => PI * radius,
            SpaceKind::Sphere { radius, .. } => PI * radius,
            SpaceKind::FlatTorus { sides } => {
                0.5 * sides.iter().map(|s| s * s).sum::<f64>().sqrt()
            }
            SpaceKind::MinkowskiTorus { sides, norm } => {
                // Upper bound via eccentricity of the norm; exact value is not
                // needed anywhere downstream.
                let eucl = 0.5 * sides.iter().map(|s| s * s).sum::<f64>().sqrt();
                eucl * norm.eccentricity()
            }
        }
    }

    /// Canonicalize chart coordinates into the fundamental domain.
    pub fn point(&self, coords: &[f64]) -> Result<SpacePoint, SpaceError> {
        if coords.len() != self.chart_len() {
            return Err(SpaceError::CoordinateArity {
                expected: self.chart_len(),
                got: coords.len(),
            });
        }
        match &self.kind {
            SpaceKind::Interval { a, b } => {
                let x = coords[0];
                let hi = b.unwrap_or(f64::INFINITY);
                if x < *a - 1e-12 || x > hi + 1e-12 {
                    return Err(SpaceError::OutsideInterval { value: x, a: *a, b: hi });
                }
                Ok(SpacePoint::new(vec![x.clamp(*a, hi)]))
            }
            SpaceKind::Circle { .. } => {
                Ok(SpacePoint::new(vec![coords[0].rem_euclid(2.0 * PI)]))
            }
            SpaceKind::Sphere { dim, .. } => {
                // Canonical form via round trip through the embedding.
                let mut angles = coords.to_vec();
                for a in angles.iter_mut().take(dim - 1) {
                    *a = a.rem_euclid(2.0 * PI);
                    if *a > PI {
                        // fold colatitudes into [0, pi]; the embedding round
                        // trip below repairs the remaining angles
                        *a = 2.0 * PI - *a;
                    }
                }
                let emb = sphere_embed(&angles);
                Ok(SpacePoint::new(sphere_unembed(&emb)))
            }
            SpaceKind::FlatTorus { sides } | SpaceKind::MinkowskiTorus { sides, .. } => {
                let wrapped = coords
                    .iter()
                    .zip(sides)
                    .map(|(c, s)| c.rem_euclid(*s))
                    .collect();
                Ok(SpacePoint::new(wrapped))
            }
        }
    }

    /// Exact intrinsic distance.
    pub fn distance(&self, x: &SpacePoint, y: &SpacePoint) -> f64 {
        match &self.kind {
            SpaceKind::Interval { .. } => (x.scalar() - y.scalar()).abs(),
            SpaceKind::Circle { radius } => {
                let d = (x.scalar() - y.scalar()).rem_euclid(2.0 * PI);
                radius * d.min(2.0 * PI - d)
            }
            SpaceKind::Sphere { radius, .. } => {
                let u = sphere_embed(&x.coords);
                let v = sphere_embed(&y.coords);
                radius * dot(&u, &v).clamp(-1.0, 1.0).acos()
            }
            SpaceKind::FlatTorus { sides } => {
                let mut sum = 0.0;
                for ((xi, yi), s) in x.coords.iter().zip(&y.coords).zip(sides) {
                    let d = (xi - yi).rem_euclid(*s);
                    sum += d.min(s - d).powi(2);
                }
                sum.sqrt()
            }
            SpaceKind::MinkowskiTorus { sides, norm } => {
                let kmax = norm.eccentricity().ceil() as i64 + 1;
                let dx = wrap_centered(x.coords[0] - y.coords[0], sides[0]);
                let dy = wrap_centered(x.coords[1] - y.coords[1], sides[1]);
                let mut best = f64::INFINITY;
                for kx in -kmax..=kmax {
                    for ky in -kmax..=kmax {
                        let v = [dx + kx as f64 * sides[0], dy + ky as f64 * sides[1]];
                        best = best.min(norm.eval(&v));
                    }
                }
                best
            }
        }
    }

    /// Every minimizing geodesic between `x` and `y`, up to
    /// reparameterization, when finitely many; for antipodal sphere points a
    /// canonical great circle flagged as one of a continuum.
    pub fn minimizing_geodesics(&self, x: &SpacePoint, y: &SpacePoint) -> Vec<Geodesic> {
        match &self.kind {
            SpaceKind::Interval { .. } => vec![Geodesic {
                length: (y.scalar() - x.scalar()).abs(),
                non_unique: false,
                rep: GeodesicRep::Segment { start: x.scalar(), end: y.scalar() },
            }],
            SpaceKind::Circle { radius } => {
                let fwd = (y.scalar() - x.scalar()).rem_euclid(2.0 * PI);
                let bwd = 2.0 * PI - fwd;
                let arc = |sweep: f64| Geodesic {
                    length: radius * sweep.abs(),
                    non_unique: false,
                    rep: GeodesicRep::CircleArc { start: x.scalar(), sweep },
                };
                if fwd == 0.0 {
                    vec![arc(0.0)]
                } else if (fwd - bwd).abs() <= TIE_TOL {
                    vec![arc(fwd), arc(-bwd)]
                } else if fwd < bwd {
                    vec![arc(fwd)]
                } else {
                    vec![arc(-bwd)]
                }
            }
            SpaceKind::Sphere { radius, .. } => {
                let u = sphere_embed(&x.coords);
                let v = sphere_embed(&y.coords);
                let c = dot(&u, &v).clamp(-1.0, 1.0);
                let angle = c.acos();
                if angle < 1e-15 {
                    return vec![Geodesic {
                        length: 0.0,
                        non_unique: false,
                        rep: GeodesicRep::SphereArc { u: u.clone(), w: canonical_orthogonal(&u), angle: 0.0 },
                    }];
                }
                let antipodal = PI - angle < 1e-12;
                let w = if antipodal {
                    canonical_orthogonal(&u)
                } else {
                    // Gram-Schmidt: direction of v orthogonal to u
                    let mut w: Vec<f64> = v.iter().zip(&u).map(|(vi, ui)| vi - c * ui).collect();
                    let n = dot(&w, &w).sqrt();
                    for wi in &mut w {
                        *wi /= n;
                    }
                    w
                };
                let angle = if antipodal { PI } else { angle };
                vec![Geodesic {
                    length: radius * angle,
                    non_unique: antipodal,
                    rep: GeodesicRep::SphereArc { u, w, angle },
                }]
            }
            SpaceKind::FlatTorus { sides } => {
                let deltas = minimizing_shifts(&x.coords, &y.coords, sides, |v| {
                    v.iter().map(|c| c * c).sum::<f64>().sqrt()
                });
                deltas
                    .into_iter()
                    .map(|(len, delta)| Geodesic {
                        length: len,
                        non_unique: false,
                        rep: GeodesicRep::TorusSeg {
                            start: x.coords.clone(),
                            delta,
                            sides: sides.clone(),
                        },
                    })
                    .collect()
            }
            SpaceKind::MinkowskiTorus { sides, norm } => {
                let deltas = minimizing_shifts(&x.coords, &y.coords, sides, |v| norm.eval(v));
                deltas
                    .into_iter()
                    .map(|(len, delta)| Geodesic {
                        length: len,
                        non_unique: false,
                        rep: GeodesicRep::TorusSeg {
                            start: x.coords.clone(),
                            delta,
                            sides: sides.clone(),
                        },
                    })
                    .collect()
            }
        }
    }

    /// Squared metric norm of a chart tangent vector at `at`. For the
    /// Minkowski torus this is the squared norm-table value.
    pub fn metric_norm2(&self, at: &SpacePoint, v: &[f64]) -> f64 {
        match &self.kind {
            SpaceKind::Interval { .. } => v[0] * v[0],
            SpaceKind::Circle { radius } => radius * radius * v[0] * v[0],
            SpaceKind::Sphere { dim, radius } => {
                let mut sum = 0.0;
                let mut sin_prod = 1.0;
                for i in 0..*dim {
                    sum += sin_prod * sin_prod * v[i] * v[i];
                    if i + 1 < *dim {
                        sin_prod *= at.coords[i].sin();
                    }
                }
                radius * radius * sum
            }
            SpaceKind::FlatTorus { .. } => v.iter().map(|c| c * c).sum(),
            SpaceKind::MinkowskiTorus { norm, .. } => norm.eval(v).powi(2),
        }
    }

    /// Closed-form Ricci curvature of the chart vector `v` at `at`:
    /// (n-1)/lambda^2 |v|^2 on spheres, zero on the flat kinds. Weighted
    /// variants live in the curvature module.
    pub fn ricci(&self, at: &SpacePoint, v: &[f64]) -> Result<f64, SpaceError> {
        match &self.kind {
            SpaceKind::Interval { .. } | SpaceKind::Circle { .. } | SpaceKind::FlatTorus { .. } => {
                Ok(0.0)
            }
            SpaceKind::Sphere { dim, radius } => {
                Ok((*dim as f64 - 1.0) / (radius * radius) * self.metric_norm2(at, v))
            }
            SpaceKind::MinkowskiTorus { .. } => Err(SpaceError::NonSmoothRicci),
        }
    }

    /// Constant sectional curvature of the space, for kinds with 2-planes.
    pub fn sectional(&self) -> Result<f64, SpaceError> {
        match &self.kind {
            SpaceKind::Sphere { dim, radius } if *dim >= 2 => Ok(1.0 / (radius * radius)),
            SpaceKind::FlatTorus { sides } if sides.len() >= 2 => Ok(0.0),
            SpaceKind::MinkowskiTorus { .. } => Ok(0.0),
            _ => Err(SpaceError::NoPlanes(self.dim())),
        }
    }

    pub fn total_measure(&self) -> f64 {
        let unweighted = match &self.kind {
            SpaceKind::Interval { a, b } => b.map(|b| b - a).unwrap_or(f64::INFINITY),
            SpaceKind::Circle { radius } => 2.0 * PI * radius,
            SpaceKind::Sphere { dim, radius } => sphere_area(*dim, *radius),
            SpaceKind::FlatTorus { sides } | SpaceKind::MinkowskiTorus { sides, .. } => {
                sides.iter().product()
            }
        };
        match &self.weight {
            None => unweighted,
            // weighted totals are only used through grids; report the grid sum
            Some(_) => self.grid(64).map(|g| g.masses.iter().sum()).unwrap_or(f64::NAN),
        }
    }

    /// Product grid over the chart with exact (Gauss-Legendre) cell masses.
    pub fn grid(&self, resolution: usize) -> Result<SpaceGrid, SpaceError> {
        if resolution < 2 {
            return Err(SpaceError::Resolution(resolution));
        }
        let axes: Vec<GridAxis> = match &self.kind {
            SpaceKind::Interval { a, b } => {
                let b = b.ok_or(SpaceError::Unbounded)?;
                vec![GridAxis::uniform(*a, b, resolution)]
            }
            SpaceKind::Circle { .. } => vec![GridAxis::uniform(0.0, 2.0 * PI, resolution)],
            SpaceKind::Sphere { dim, .. } => {
                let mut axes = Vec::with_capacity(*dim);
                for _ in 0..dim - 1 {
                    axes.push(GridAxis::uniform(0.0, PI, resolution));
                }
                axes.push(GridAxis::uniform(0.0, 2.0 * PI, 2 * resolution));
                axes
            }
            SpaceKind::FlatTorus { sides } | SpaceKind::MinkowskiTorus { sides, .. } => sides
                .iter()
                .map(|s| GridAxis::uniform(0.0, *s, resolution))
                .collect(),
        };
        let cells: usize = axes
            .iter()
            .map(|a| a.cells)
            .try_fold(1usize, |acc, c| acc.checked_mul(c))
            .ok_or(SpaceError::ResolutionOverflow(resolution))?;
        if cells > 200_000_000 {
            return Err(SpaceError::ResolutionOverflow(resolution));
        }

        // Per-axis cell masses; the product over axes is the cell mass.
        let axis_masses: Vec<Vec<f64>> = match &self.kind {
            SpaceKind::Interval { .. } => vec![axes[0].widths()],
            SpaceKind::Circle { radius } => {
                vec![axes[0].widths().iter().map(|w| w * radius).collect()]
            }
            SpaceKind::Sphere { dim, radius } => {
                let mut per = Vec::with_capacity(*dim);
                for (i, axis) in axes.iter().enumerate() {
                    let power = (dim - 1).saturating_sub(i) as i32;
                    let masses: Vec<f64> = (0..axis.cells)
                        .map(|c| {
                            let (lo, hi) = axis.bounds(c);
                            if power == 0 {
                                hi - lo
                            } else {
                                quadrature::integrate(|t| t.sin().powi(power), lo, hi)
                            }
                        })
                        .collect();
                    per.push(masses);
                }
                // overall factor radius^dim distributed onto the first axis
                let scale = radius.powi(*dim as i32);
                for m in per[0].iter_mut() {
                    *m *= scale;
                }
                per
            }
            SpaceKind::FlatTorus { .. } | SpaceKind::MinkowskiTorus { .. } => {
                axes.iter().map(|a| a.widths()).collect()
            }
        };

        let mut atoms = Vec::with_capacity(cells);
        let mut masses = Vec::with_capacity(cells);
        let mut index = vec![0usize; axes.len()];
        loop {
            let coords: Vec<f64> = index
                .iter()
                .zip(&axes)
                .map(|(&i, axis)| axis.center(i))
                .collect();
            let mut mass: f64 = index
                .iter()
                .zip(&axis_masses)
                .map(|(&i, m)| m[i])
                .product();
            if let Some(w) = &self.weight {
                mass *= (-w.psi(&coords)).exp();
            }
            atoms.push(SpacePoint::new(coords));
            masses.push(mass);
            // odometer increment
            let mut k = axes.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                index[k] += 1;
                if index[k] < axes[k].cells {
                    break;
                }
                index[k] = 0;
                if k == 0 {
                    return Ok(SpaceGrid { axes, atoms, masses });
                }
            }
        }
    }

    /// Grid measure: midpoint atoms weighted by exact cell masses (including
    /// the e^{-psi} factor when a weight is set).
    pub fn grid_measure(
        &self,
        resolution: usize,
    ) -> Result<crate::measure::DiscreteMeasure<SpacePoint>, SpaceError> {
        let grid = self.grid(resolution)?;
        Ok(crate::measure::DiscreteMeasure {
            atoms: grid.atoms.into_iter().zip(grid.masses).collect(),
        })
    }

    /// Uniform random point (seeded by the caller's RNG).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> SpacePoint {
        match &self.kind {
            SpaceKind::Interval { a, b } => {
                let b = b.unwrap_or(a + 1.0);
                SpacePoint::new(vec![rng.gen_range(*a..b)])
            }
            SpaceKind::Circle { .. } => SpacePoint::new(vec![rng.gen_range(0.0..2.0 * PI)]),
            SpaceKind::Sphere { dim, .. } => {
                // Gaussian direction, exact uniformity on the round sphere
                loop {
                    let v: Vec<f64> = (0..dim + 1)
                        .map(|_| {
                            let u1: f64 = rng.gen_range(1e-12..1.0);
                            let u2: f64 = rng.gen_range(0.0..1.0);
                            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
                        })
                        .collect();
                    let n = dot(&v, &v).sqrt();
                    if n > 1e-9 {
                        let unit: Vec<f64> = v.iter().map(|c| c / n).collect();
                        return SpacePoint::new(sphere_unembed(&unit));
                    }
                }
            }
            SpaceKind::FlatTorus { sides } | SpaceKind::MinkowskiTorus { sides, .. } => {
                SpacePoint::new(sides.iter().map(|s| rng.gen_range(0.0..*s)).collect())
            }
        }
    }
}

/// One axis of a product grid: uniform cells over [lo, hi].
#[derive(Debug, Clone)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl GridAxis {
    fn uniform(lo: f64, hi: f64, cells: usize) -> Self {
        Self { lo, hi, cells }
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    fn widths(&self) -> Vec<f64> {
        vec![self.width(); self.cells]
    }

    fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        (self.lo + i as f64 * self.width(), self.lo + (i + 1) as f64 * self.width())
    }

    fn index_of(&self, x: f64) -> usize {
        let i = ((x - self.lo) / self.width()).floor() as isize;
        i.clamp(0, self.cells as isize - 1) as usize
    }
}

/// Product grid with midpoint atoms and exact cell masses.
#[derive(Debug, Clone)]
pub struct SpaceGrid {
    pub axes: Vec<GridAxis>,
    pub atoms: Vec<SpacePoint>,
    pub masses: Vec<f64>,
}

impl SpaceGrid {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Flat cell index of a canonical point.
    pub fn index_of(&self, p: &SpacePoint) -> usize {
        let mut idx = 0;
        for (axis, &c) in self.axes.iter().zip(&p.coords) {
            idx = idx * axis.cells + axis.index_of(c);
        }
        idx
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Constant-speed minimizing geodesic parameterized on [0, 1].
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub length: f64,
    /// True when this is a canonical representative of infinitely many
    /// minimizers (antipodal sphere endpoints).
    pub non_unique: bool,
    rep: GeodesicRep,
}

#[derive(Debug, Clone)]
enum GeodesicRep {
    Segment { start: f64, end: f64 },
    CircleArc { start: f64, sweep: f64 },
    SphereArc { u: Vec<f64>, w: Vec<f64>, angle: f64 },
    TorusSeg { start: Vec<f64>, delta: Vec<f64>, sides: Vec<f64> },
}

impl Geodesic {
    /// Circle arc with an explicit signed angular sweep; lets callers express
    /// the non-minimizing complementary arc.
    pub fn raw_circle_arc(start: f64, sweep: f64, radius: f64) -> Self {
        Self {
            length: radius * sweep.abs(),
            non_unique: false,
            rep: GeodesicRep::CircleArc { start: start.rem_euclid(2.0 * PI), sweep },
        }
    }

    pub fn point_at(&self, s: f64) -> SpacePoint {
        match &self.rep {
            GeodesicRep::Segment { start, end } => {
                SpacePoint::new(vec![start + s * (end - start)])
            }
            GeodesicRep::CircleArc { start, sweep } => {
                SpacePoint::new(vec![(start + s * sweep).rem_euclid(2.0 * PI)])
            }
            GeodesicRep::SphereArc { u, w, angle } => {
                let t = s * angle;
                let emb: Vec<f64> = u
                    .iter()
                    .zip(w)
                    .map(|(ui, wi)| t.cos() * ui + t.sin() * wi)
                    .collect();
                SpacePoint::new(sphere_unembed(&emb))
            }
            GeodesicRep::TorusSeg { start, delta, sides } => SpacePoint::new(
                start
                    .iter()
                    .zip(delta)
                    .zip(sides)
                    .map(|((x, d), side)| (x + s * d).rem_euclid(*side))
                    .collect(),
            ),
        }
    }

    /// Endpoint helpers exact by construction.
    pub fn start(&self) -> SpacePoint {
        self.point_at(0.0)
    }

    pub fn end(&self) -> SpacePoint {
        self.point_at(1.0)
    }
}

/// Radius at which the ray through `dir` crosses the segment p0-p1.
fn chord_ray_radius(p0: &[f64; 2], p1: &[f64; 2], dir: &[f64; 2]) -> f64 {
    // solve p0 + s (p1 - p0) = r dir for (s, r)
    let ex = p1[0] - p0[0];
    let ey = p1[1] - p0[1];
    let det = ex * (-dir[1]) - ey * (-dir[0]);
    if det.abs() < 1e-300 {
        return f64::INFINITY;
    }
    let s = ((-p0[0]) * (-dir[1]) - (-p0[1]) * (-dir[0])) / det;
    let px = p0[0] + s * ex;
    let py = p0[1] + s * ey;
    (px * px + py * py).sqrt()
}

fn wrap_centered(d: f64, side: f64) -> f64 {
    let w = d.rem_euclid(side);
    if w > side / 2.0 {
        w - side
    } else {
        w
    }
}

/// All displacement vectors achieving the minimal norm between torus points,
/// up to the tie tolerance.
fn minimizing_shifts<F: Fn(&[f64]) -> f64>(
    x: &[f64],
    y: &[f64],
    sides: &[f64],
    norm: F,
) -> Vec<(f64, Vec<f64>)> {
    let base: Vec<f64> = y
        .iter()
        .zip(x)
        .zip(sides)
        .map(|((yi, xi), s)| wrap_centered(yi - xi, *s))
        .collect();
    let n = sides.len();
    let mut best = f64::INFINITY;
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    let shifts_per_axis = 3i64; // candidates in {-1, 0, 1} around the centered representative
    let total = (2 * shifts_per_axis + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = base.clone();
        for i in 0..n {
            let k = (c % (2 * shifts_per_axis + 1)) - shifts_per_axis;
            c /= 2 * shifts_per_axis + 1;
            v[i] += k as f64 * sides[i];
        }
        let len = norm(&v);
        if len < best - TIE_TOL {
            best = len;
            out.clear();
            out.push((len, v));
        } else if (len - best).abs() <= TIE_TOL {
            // keep distinct displacement vectors only
            if !out.iter().any(|(_, u)| {
                u.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)
            }) {
                out.push((len, v));
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Embedding of chart angles into the unit sphere of R^{n+1}.
pub fn sphere_embed(angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    let mut out = vec![0.0; n + 1];
    let mut sin_prod = 1.0;
    for i in 0..n - 1 {
        out[i] = sin_prod * angles[i].cos();
        sin_prod *= angles[i].sin();
    }
    let phi = angles[n - 1];
    out[n - 1] = sin_prod * phi.cos();
    out[n] = sin_prod * phi.sin();
    out
}

/// Chart angles of a unit vector in R^{n+1}.
pub fn sphere_unembed(emb: &[f64]) -> Vec<f64> {
    let n = emb.len() - 1;
    let mut angles = vec![0.0; n];
    let mut tail: f64 = emb.iter().map(|c| c * c).sum();
    for i in 0..n - 1 {
        tail -= emb[i] * emb[i];
        let t = tail.max(0.0).sqrt();
        angles[i] = t.atan2(emb[i]);
    }
    angles[n - 1] = emb[n].atan2(emb[n - 1]).rem_euclid(2.0 * PI);
    angles
}

/// A deterministic unit vector orthogonal to `u`.
fn canonical_orthogonal(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    // axis least aligned with u
    let mut k = 0;
    for i in 1..n {
        if u[i].abs() < u[k].abs() {
            k = i;
        }
    }
    let mut w: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
    let c = dot(&w, u);
    for i in 0..n {
        w[i] -= c * u[i];
    }
    let norm = dot(&w, &w).sqrt();
    for wi in &mut w {
        *wi /= norm;
    }
    w
}

/// Surface measure of the round n-sphere of radius lambda.
fn sphere_area(dim: usize, radius: f64) -> f64 {
    // A_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2) * radius^n
    let n = dim as f64;
    let half = (n + 1.0) / 2.0;
    2.0 * PI.powf(half) / gamma(half) * radius.powf(n)
}

/// Gamma at integer and half-integer arguments (all we need).
fn gamma(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        let n = x.round() as u32;
        (1..n).map(|k| k as f64).product()
    } else {
        // half-integer: G(1/2) = sqrt(pi), G(x+1) = x G(x)
        let mut acc = PI.sqrt();
        let mut v = 0.5;
        while v + 1.0 <= x + 1e-12 {
            acc *= v;
            v += 1.0;
        }
        acc
    }
}
