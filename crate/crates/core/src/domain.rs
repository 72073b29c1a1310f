//! Shapes of supports and obstacles: indicator, signed distance, boundary sampling.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dot, norm};

/// Interior is where the signed distance is negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainShape {
    /// `{x · normal > 0}`.
    HalfSpace { normal: Vec<f64> },
    /// Planar sector `{0 < arg x < theta0}`.
    Sector { theta0: f64 },
    /// The first quadrant of the plane.
    Quadrant,
    /// Simple polygon, vertices counterclockwise.
    Polygon { vertices: Vec<[f64; 2]> },
    /// `Sector(theta0) × ℝ` in three dimensions.
    Wedge { theta0: f64 },
    /// Epigraph `{x₂ > coeff · |x₁|^exponent}`.
    LipschitzGraph { coeff: f64, exponent: f64 },
    Disk { center: [f64; 2], radius: f64 },
    Whole { n: usize },
}

fn ray_distance(x: &[f64], angle: f64) -> f64 {
    let d = [angle.cos(), angle.sin()];
    let t = x[0] * d[0] + x[1] * d[1];
    if t > 0.0 {
        ((x[0] - t * d[0]).powi(2) + (x[1] - t * d[1]).powi(2)).sqrt()
    } else {
        (x[0] * x[0] + x[1] * x[1]).sqrt()
    }
}

fn segment_distance(x: &[f64], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
}

fn in_sector(x: &[f64], theta0: f64) -> bool {
    if x[0] == 0.0 && x[1] == 0.0 {
        return false;
    }
    let t = x[1].atan2(x[0]).rem_euclid(TAU);
    t > 0.0 && t < theta0
}

fn polygon_contains(v: &[[f64; 2]], x: &[f64]) -> bool {
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[j]);
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if x[0] < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Sutherland–Hodgman clip of `subject` against the axis box `[lo, hi]`.
fn clip_to_box(subject: &[[f64; 2]], lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    let mut poly = subject.to_vec();
    // (axis, bound, keep-below)
    for (axis, bound, below) in [(0, lo[0], false), (0, hi[0], true), (1, lo[1], false), (1, hi[1], true)] {
        if poly.is_empty() {
            break;
        }
        let keep = |p: &[f64; 2]| if below { p[axis] <= bound } else { p[axis] >= bound };
        let mut out = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let cur = poly[i];
            let prev = poly[(i + poly.len() - 1) % poly.len()];
            let (kc, kp) = (keep(&cur), keep(&prev));
            if kc != kp {
                let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
            if kc {
                out.push(cur);
            }
        }
        poly = out;
    }
    poly
}

/// Area of `{|X| ≤ R} ∩ {X₁ ≤ x, X₂ ≤ y}` for the disk centred at 0.
fn disk_corner_area(r: f64, x: f64, y: f64) -> f64 {
    let xm = x.min(r);
    if xm <= -r || y <= -r {
        return 0.0;
    }
    // ∫ √(R² − X²) dX
    let prim = |t: f64| {
        let t = t.clamp(-r, r);
        0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).asin())
    };
    let chord = |a: f64, b: f64| 2.0 * (prim(b) - prim(a));
    if y >= r {
        return chord(-r, xm);
    }
    let a = (r * r - y * y).sqrt();
    let seg = |lo: f64, hi: f64, f: &dyn Fn(f64, f64) -> f64| {
        let hi = hi.min(xm);
        if hi > lo {
            f(lo, hi)
        } else {
            0.0
        }
    };
    // where the chord is shorter than |y| it lies entirely below (y > 0) or above (y < 0) the cut
    let outer = |lo: f64, hi: f64| if y > 0.0 { chord(lo, hi) } else { 0.0 };
    let inner = |lo: f64, hi: f64| y * (hi - lo) + prim(hi) - prim(lo);
    seg(-r, -a, &outer) + seg(-a, a, &inner) + seg(a, r, &outer)
}

impl DomainShape {
    pub fn dim(&self) -> usize {
        match self {
            DomainShape::HalfSpace { normal } => normal.len(),
            DomainShape::Wedge { .. } => 3,
            DomainShape::Whole { n } => *n,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            DomainShape::HalfSpace { normal } if norm(normal) == 0.0 => bad("zero normal".into()),
            DomainShape::Sector { theta0 } | DomainShape::Wedge { theta0 }
                if !(*theta0 > 0.0 && *theta0 < TAU) =>
            {
                bad(format!("sector angle {theta0} outside (0, 2π)"))
            }
            DomainShape::Polygon { vertices } if vertices.len() < 3 || polygon_area(vertices) <= 0.0 => {
                bad("polygon needs ≥ 3 counterclockwise vertices".into())
            }
            DomainShape::Disk { radius, .. } if *radius <= 0.0 => bad("disk radius must be positive".into()),
            DomainShape::LipschitzGraph { exponent, .. } if *exponent < 1.0 => {
                bad("graph exponent below 1 is not Lipschitz at the origin".into())
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainShape::HalfSpace { normal } => dot(normal, x) > 0.0,
            DomainShape::Sector { theta0 } => in_sector(x, *theta0),
            DomainShape::Quadrant => x[0] > 0.0 && x[1] > 0.0,
            DomainShape::Polygon { vertices } => polygon_contains(vertices, x),
            DomainShape::Wedge { theta0 } => in_sector(x, *theta0),
            DomainShape::LipschitzGraph { coeff, exponent } => x[1] > coeff * x[0].abs().powf(*exponent),
            DomainShape::Disk { center, radius } => {
                (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) < radius * radius
            }
            DomainShape::Whole { .. } => true,
        }
    }

    /// Unsigned distance to the boundary (`∞` for the whole space).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainShape::HalfSpace { normal } => dot(normal, x).abs() / norm(normal),
            DomainShape::Sector { theta0 } | DomainShape::Wedge { theta0 } => {
                ray_distance(x, 0.0).min(ray_distance(x, *theta0))
            }
            DomainShape::Quadrant => ray_distance(x, 0.0).min(ray_distance(x, FRAC_PI_2)),
            DomainShape::Polygon { vertices } => (0..vertices.len())
                .map(|i| segment_distance(x, vertices[i], vertices[(i + 1) % vertices.len()]))
                .fold(f64::INFINITY, f64::min),
            DomainShape::LipschitzGraph { coeff, exponent } => {
                graph_distance(x, |t| coeff * t.abs().powf(*exponent))
            }
            DomainShape::Disk { center, radius } => {
                (((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() - radius).abs()
            }
            DomainShape::Whole { .. } => f64::INFINITY,
        }
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let d = self.boundary_distance(x);
        if self.contains(x) {
            -d
        } else {
            d
        }
    }

    /// Boundary points inside the open ball `B_radius`, about `count` per boundary piece.
    pub fn boundary_points(&self, radius: f64, count: usize) -> Result<Vec<Vec<f64>>> {
        let ts: Vec<f64> = (1..=count)
            .map(|k| radius * (k as f64 / count as f64) * (1.0 - 1e-12))
            .collect();
        let ray = |angle: f64| -> Vec<Vec<f64>> {
            ts.iter().map(|t| vec![t * angle.cos(), t * angle.sin()]).collect()
        };
        let pts = match self {
            DomainShape::HalfSpace { normal } => {
                let n = normal.len();
                let e: Vec<f64> = normal.iter().map(|v| v / norm(normal)).collect();
                // project coordinate directions onto the hyperplane and walk along them
                let mut out = Vec::new();
                for i in 0..n {
                    let mut d: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - e[i] * e[j]).collect();
                    let l = norm(&d);
                    if l < 1e-8 {
                        continue;
                    }
                    d.iter_mut().for_each(|v| *v /= l);
                    for t in &ts {
                        out.push(d.iter().map(|v| v * t).collect());
                        out.push(d.iter().map(|v| -v * t).collect());
                    }
                }
                out
            }
            DomainShape::Sector { theta0 } => [ray(0.0), ray(*theta0)].concat(),
            DomainShape::Quadrant => [ray(0.0), ray(FRAC_PI_2)].concat(),
            DomainShape::Wedge { theta0 } => {
                let mut out = Vec::new();
                for p in [ray(0.0), ray(*theta0)].concat() {
                    let rem = (radius * radius - p[0] * p[0] - p[1] * p[1]).max(0.0).sqrt();
                    for s in [-0.5, 0.0, 0.5] {
                        out.push(vec![p[0], p[1], s * rem]);
                    }
                }
                out
            }
            DomainShape::LipschitzGraph { coeff, exponent } => {
                let eta = |t: f64| coeff * t.abs().powf(*exponent);
                ts.iter()
                    .flat_map(|&t| [vec![t, eta(t)], vec![-t, eta(t)]])
                    .filter(|p| norm(p) < radius)
                    .collect()
            }
            DomainShape::Polygon { vertices } => {
                let mut out = Vec::new();
                for i in 0..vertices.len() {
                    let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
                    for k in 0..=4 * count {
                        let t = k as f64 / (4 * count) as f64;
                        let p = vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                        if norm(&p) < radius {
                            out.push(p);
                        }
                    }
                }
                out
            }
            DomainShape::Disk { center, radius: rd } => (0..8 * count)
                .map(|k| {
                    let t = TAU * k as f64 / (8 * count) as f64;
                    vec![center[0] + rd * t.cos(), center[1] + rd * t.sin()]
                })
                .filter(|p| norm(p) < radius)
                .collect(),
            DomainShape::Whole { .. } => Vec::new(),
        };
        if pts.is_empty() {
            return Err(Error::DegenerateDomain);
        }
        Ok(pts)
    }

    /// Constant `δ` of the interior cone property: `B(x, r) ∩ D̄` contains a ball of radius `δr`
    /// for boundary points `x` and small `r`. Uses `δ = sin β / (1 + sin β)` for the largest
    /// interior cone half-angle `β`.
    pub fn cone_opening(&self) -> Option<f64> {
        let from_half_angle = |b: f64| {
            let s = b.min(FRAC_PI_2).sin();
            s / (1.0 + s)
        };
        match self {
            DomainShape::HalfSpace { .. } | DomainShape::Disk { .. } => Some(from_half_angle(FRAC_PI_2)),
            DomainShape::Sector { theta0 } | DomainShape::Wedge { theta0 } => {
                Some(from_half_angle(0.5 * theta0.min(PI)))
            }
            DomainShape::Quadrant => Some(from_half_angle(PI / 4.0)),
            DomainShape::Polygon { vertices } => {
                let n = vertices.len();
                let min_angle = (0..n)
                    .map(|i| {
                        let (p, c, q) = (vertices[(i + n - 1) % n], vertices[i], vertices[(i + 1) % n]);
                        let a = (p[1] - c[1]).atan2(p[0] - c[0]);
                        let b = (q[1] - c[1]).atan2(q[0] - c[0]);
                        (a - b).rem_euclid(TAU)
                    })
                    .fold(f64::INFINITY, f64::min);
                Some(from_half_angle(0.5 * min_angle.min(PI)))
            }
            DomainShape::LipschitzGraph { coeff, exponent } => {
                // Lipschitz constant on |x₁| ≤ 1
                let lip = coeff * exponent;
                Some(from_half_angle(FRAC_PI_2 - lip.atan()))
            }
            DomainShape::Whole { .. } => None,
        }
    }

    /// Area fraction of the square `center ± half` lying inside the shape.
    pub fn cell_fraction(&self, center: [f64; 2], half: f64) -> Result<f64> {
        let lo = [center[0] - half, center[1] - half];
        let hi = [center[0] + half, center[1] + half];
        let area = 4.0 * half * half;
        match self {
            DomainShape::Disk { center: c, radius } => {
                let far = |x: f64, cx: f64| (x - cx).abs().max((x + 2.0 * half - cx).abs());
                if far(lo[0], c[0]).hypot(far(lo[1], c[1])) <= *radius {
                    return Ok(1.0);
                }
                let g = |x: f64, y: f64| disk_corner_area(*radius, x - c[0], y - c[1]);
                let a = g(hi[0], hi[1]) - g(lo[0], hi[1]) - g(hi[0], lo[1]) + g(lo[0], lo[1]);
                Ok((a / area).clamp(0.0, 1.0))
            }
            DomainShape::Polygon { vertices } => {
                let clipped = clip_to_box(vertices, lo, hi);
                let a = if clipped.len() < 3 { 0.0 } else { polygon_area(&clipped) };
                Ok((a / area).clamp(0.0, 1.0))
            }
            _ => Err(Error::InvalidArgument(
                "cell fractions need a bounded planar shape (disk or polygon)".into(),
            )),
        }
    }

    /// Axis box `[lo, hi]` enclosing a bounded planar shape.
    pub fn bounding_box(&self) -> Option<([f64; 2], [f64; 2])> {
        match self {
            DomainShape::Disk { center, radius } => Some((
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            )),
            DomainShape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for d in 0..2 {
                        lo[d] = lo[d].min(v[d]);
                        hi[d] = hi[d].max(v[d]);
                    }
                }
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Axis-aligned square of side `side` centred at the origin.
    pub fn square(side: f64) -> Self {
        let a = 0.5 * side;
        DomainShape::Polygon {
            vertices: vec![[-a, -a], [a, -a], [a, a], [-a, a]],
        }
    }

    /// Circular sector of radius `radius` and opening `theta0 ≤ π`, as a polygon with the
    /// arc resolved by `arc_segments` chords.
    pub fn sector_polygon(radius: f64, theta0: f64, arc_segments: usize) -> Self {
        let mut vertices = vec![[0.0, 0.0]];
        for k in 0..=arc_segments {
            let t = theta0 * k as f64 / arc_segments as f64;
            vertices.push([radius * t.cos(), radius * t.sin()]);
        }
        DomainShape::Polygon { vertices }
    }

    /// Corner points of a polygon (all vertices); empty for smooth shapes.
    pub fn corners(&self) -> Vec<[f64; 2]> {
        match self {
            DomainShape::Polygon { vertices } => vertices.clone(),
            _ => Vec::new(),
        }
    }
}

/// Distance from `x` to the graph of `eta`, by bracketed minimisation over the abscissa.
fn graph_distance(x: &[f64], eta: impl Fn(f64) -> f64) -> f64 {
    let vertical = (x[1] - eta(x[0])).abs();
    if vertical == 0.0 {
        return 0.0;
    }
    let d = |t: f64| ((x[0] - t).powi(2) + (x[1] - eta(t)).powi(2)).sqrt();
    let (lo, hi) = (x[0] - vertical, x[0] + vertical);
    let k = 64;
    let mut best = (vertical, x[0]);
    for i in 0..=k {
        let t = lo + (hi - lo) * i as f64 / k as f64;
        let v = d(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    let step = (hi - lo) / k as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if d(c) < d(e) {
            b = e;
        } else {
            a = c;
        }
    }
    best.0.min(d(0.5 * (a + b)))
}
