//! Meshing of effective regions into candidate observation points.
//!
//! The mesh is built once for a canonical object at the origin facing `+x`
//! and then rotated/translated to every object, so all objects share one
//! point layout. The region is cut into ring/angle segments and each segment
//! is represented by its best-quality corner: the inner radius, at the angle
//! boundary nearer the facing axis.
//!
//! Segment boundaries refine two rules at once, controlled by `epsilon`:
//!
//! * geometric spacing: consecutive boundaries are at most `delta` apart,
//!   radially and in arc length at the ring's outer radius, where
//!   `delta = epsilon * diameter / n`;
//! * quality spacing: the distance factor `a/(l+b)^2` and the deviation
//!   factor `cos(angle)` each change by at most `1 + epsilon` between
//!   consecutive boundaries.
//!
//! Together these keep the detour and quality error caused by snapping any
//! region point onto the mesh proportional to `epsilon`.

use crate::error::{Error, Result};
use crate::geometry::{quality, Object, Point2, SensingSpec};

/// Mesh layout shared by every object.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub epsilon: f64,
    /// Mesh pitch `epsilon * diameter / n` (meters).
    pub delta: f64,
    /// Largest radial gap between consecutive ring boundaries; `<= delta`.
    pub radial_step: f64,
    /// Largest angular gap as arc length at the ring's outer radius; `<= delta`.
    pub angular_arc_step: f64,
    /// Ring boundaries `l(0) = d_min .. l(K1) = d_max`, strictly increasing.
    pub ring_boundaries: Vec<f64>,
    /// Per ring: angle boundaries `a(0) = 0 .. a(K2) = theta` for one side of
    /// the facing axis; the other side is the mirror image.
    pub angle_boundaries: Vec<Vec<f64>>,
}

impl GridSpec {
    /// Number of rings.
    pub fn ring_count(&self) -> usize {
        self.ring_boundaries.len() - 1
    }

    /// Distinct segment corners on a ring: both sides share the on-axis corner.
    pub fn points_per_ring(&self, ring: usize) -> usize {
        2 * (self.angle_boundaries[ring].len() - 1) - 1
    }
}

/// One candidate observation point.
#[derive(Debug, Clone, Copy)]
pub struct ObservationPoint {
    pub position: Point2,
    pub object_index: usize,
    pub ring_index: usize,
    /// Signed angular slot: `0` on the facing axis, `+k`/`-k` mirrored.
    pub angle_index: i32,
    /// Quality of the owning object as seen from this point.
    pub own_quality: f64,
}

/// All generated points, grouped by owning object.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub grid: GridSpec,
    pub points: Vec<ObservationPoint>,
    offsets: Vec<usize>,
}

impl PointSet {
    pub fn object_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn of_object(&self, object: usize) -> &[ObservationPoint] {
        &self.points[self.offsets[object]..self.offsets[object + 1]]
    }

    /// Identical for every object: the mesh is shared.
    pub fn per_object_count(&self) -> usize {
        self.offsets[1] - self.offsets[0]
    }
}

/// Largest distance between any two object positions. Needs at least two
/// objects; the mesh pitch is undefined otherwise.
pub fn pairwise_diameter(objects: &[Object]) -> Result<f64> {
    if objects.len() < 2 {
        return Err(Error::domain("pairwise_diameter needs at least 2 objects"));
    }
    let mut best = 0.0f64;
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            best = best.max(a.position.distance(b.position));
        }
    }
    Ok(best)
}

/// Build the shared mesh layout for `n` objects spread over `diameter`.
pub fn build_grid(s: &SensingSpec, n: usize, diameter: f64, epsilon: f64) -> Result<GridSpec> {
    if n < 2 {
        return Err(Error::domain("grid needs at least 2 objects"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("epsilon must be in (0, 1], got {epsilon}")));
    }
    if !(diameter.is_finite() && diameter > 0.0) {
        return Err(Error::domain(format!("object diameter must be > 0, got {diameter}")));
    }
    let delta = epsilon * diameter / n as f64;
    // Quality factor between boundaries: ((next+b)/(l+b))^2 <= 1+eps.
    let growth = (1.0 + epsilon).sqrt();

    let mut rings = vec![s.d_min];
    let mut l = s.d_min;
    loop {
        let quality_cap = (l + s.b) * growth - s.b;
        let mut next = (l + delta).min(quality_cap);
        if next >= s.d_max - 1e-12 * s.d_max.max(1.0) || next <= l {
            next = s.d_max;
        }
        rings.push(next);
        if next == s.d_max {
            break;
        }
        l = next;
    }

    let mut angle_boundaries = Vec::with_capacity(rings.len() - 1);
    let cos_theta = s.theta.cos();
    for ring in 0..rings.len() - 1 {
        let r_out = rings[ring + 1];
        let arc_step = delta / r_out;
        let mut bounds = vec![0.0];
        let mut a = 0.0f64;
        loop {
            // cos(a)/cos(next) <= 1+eps, i.e. next <= acos(cos(a)/(1+eps)).
            let target = a.cos() / (1.0 + epsilon);
            let cos_allow = if target <= cos_theta { s.theta } else { target.acos() };
            let mut next = (a + arc_step).min(cos_allow);
            // Close at theta when within float noise of it, or if the
            // cosine asymptote (theta = pi/2) stalls the progression.
            if next >= s.theta - 1e-12 || next <= a {
                next = s.theta;
            }
            bounds.push(next);
            if next == s.theta {
                break;
            }
            a = next;
        }
        angle_boundaries.push(bounds);
    }

    let radial_step = rings
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let angular_arc_step = angle_boundaries
        .iter()
        .enumerate()
        .map(|(k, bounds)| {
            let r_out = rings[k + 1];
            bounds.windows(2).map(|w| (w[1] - w[0]) * r_out).fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max);

    Ok(GridSpec {
        epsilon,
        delta,
        radial_step,
        angular_arc_step,
        ring_boundaries: rings,
        angle_boundaries,
    })
}

/// Segment corners for the canonical object: origin, facing `+x`, unit
/// weight. Ordered by ring, then angle slot from `-k` to `+k`.
pub fn canonical_points(s: &SensingSpec, grid: &GridSpec) -> Vec<ObservationPoint> {
    let canon = Object::new(Point2::new(0.0, 0.0), 0.0, 1.0).expect("canonical object");
    let mut out = Vec::new();
    for ring in 0..grid.ring_count() {
        let r = grid.ring_boundaries[ring];
        let bounds = &grid.angle_boundaries[ring];
        let segs = bounds.len() - 1;
        for slot in -(segs as i32 - 1)..=(segs as i32 - 1) {
            let ang = slot.signum() as f64 * bounds[slot.unsigned_abs() as usize];
            let position = Point2::new(r * ang.cos(), r * ang.sin());
            out.push(ObservationPoint {
                position,
                object_index: 0,
                ring_index: ring,
                angle_index: slot,
                own_quality: quality(&canon, position, s),
            });
        }
    }
    out
}

/// Instantiate the canonical mesh for every object by rotation about the
/// object's facing and translation to its position.
pub fn generate_observation_points(
    objects: &[Object],
    s: &SensingSpec,
    epsilon: f64,
) -> Result<PointSet> {
    let diameter = pairwise_diameter(objects)?;
    let grid = build_grid(s, objects.len(), diameter, epsilon)?;
    let canonical = canonical_points(s, &grid);

    let mut points = Vec::with_capacity(canonical.len() * objects.len());
    let mut offsets = Vec::with_capacity(objects.len() + 1);
    for (index, o) in objects.iter().enumerate() {
        offsets.push(points.len());
        let (c, sn) = (o.facing.cos(), o.facing.sin());
        for cp in &canonical {
            let position = Point2::new(
                o.position.x + c * cp.position.x - sn * cp.position.y,
                o.position.y + sn * cp.position.x + c * cp.position.y,
            );
            points.push(ObservationPoint {
                position,
                object_index: index,
                own_quality: quality(o, position, s),
                ..*cp
            });
        }
    }
    offsets.push(points.len());
    Ok(PointSet { grid, points, offsets })
}
