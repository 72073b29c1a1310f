//! Two-dimensional Helmholtz scattering by a penetrable obstacle `q = hχ_D` through the
//! volume integral equation `u = u₀ + ∫ Φ(x − y) q(y) u(y) dy`.

mod evidence;
mod gmres;
mod kernel;
mod series;
mod solve;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::DomainShape;
use crate::error::{Error, Result};

pub use evidence::{scattering_evidence, standard_incidents, EvidenceEntry, EvidenceReport};
pub use gmres::{gmres, GmresOutcome};
pub use kernel::{cell_integral, log_square_integral, phi, KernelTable};
pub use series::{born_disk_scattered, disk_series_far_field, disk_series_max_order};
pub use solve::{far_field, far_field_at, solve_ls, LinearSolver, LsOperator, TotalField};

/// Normalisation of the far field: `u^∞(x̂) = e^{iπ/4}/√(8πk) ∫ e^{−ik x̂·y} q(y) u(y) dy`.
pub const FAR_FIELD_CONVENTION: &str = "u_inf(xhat) = exp(i*pi/4)/sqrt(8*pi*k) * int exp(-i*k*xhat.y) q(y) u(y) dy";

pub type ContrastFn = Arc<dyn Fn(&[f64; 2]) -> f64 + Send + Sync>;

/// Contrast `h` on the obstacle.
#[derive(Clone)]
pub enum Contrast {
    Constant(f64),
    Function { label: String, f: ContrastFn },
}

impl Contrast {
    pub fn at(&self, x: &[f64; 2]) -> f64 {
        match self {
            Contrast::Constant(h) => *h,
            Contrast::Function { f, .. } => f(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Contrast::Constant(h) => format!("{h}"),
            Contrast::Function { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Contrast({})", self.label())
    }
}

/// Incident field, a solution of `(Δ + k²)u₀ = 0` built from plane waves.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Incident {
    /// `e^{ik d·x}` with `d = (cos angle, sin angle)`.
    Plane { angle: f64 },
    /// `Σ c_j e^{ik d_j·x}` with `(angle_j, c_j)`.
    Herglotz { terms: Vec<(f64, [f64; 2])> },
    /// `e^{ik d₁·(x−p)} − e^{ik d₂·(x−p)}`, which vanishes at `p`.
    PointNull { point: [f64; 2], angles: [f64; 2] },
}

fn plane(k: f64, angle: f64, x: &[f64; 2]) -> Complex64 {
    Complex64::from_polar(1.0, k * (angle.cos() * x[0] + angle.sin() * x[1]))
}

impl Incident {
    pub fn eval(&self, k: f64, x: &[f64; 2]) -> Complex64 {
        match self {
            Incident::Plane { angle } => plane(k, *angle, x),
            Incident::Herglotz { terms } => terms
                .iter()
                .map(|(a, c)| Complex64::new(c[0], c[1]) * plane(k, *a, x))
                .sum(),
            Incident::PointNull { point, angles } => {
                let y = [x[0] - point[0], x[1] - point[1]];
                plane(k, angles[0], &y) - plane(k, angles[1], &y)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Incident::Plane { angle } => format!("plane:{angle}"),
            Incident::Herglotz { terms } => format!("herglotz[{} terms]", terms.len()),
            Incident::PointNull { point, angles } => format!(
                "null-at({},{}):{},{}",
                point[0], point[1], angles[0], angles[1]
            ),
        }
    }

    /// Reads `angle,re,im` rows; blank lines, `#` comments and a header row are skipped.
    pub fn herglotz_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::herglotz_from_str(&text)
    }

    pub fn herglotz_from_str(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("angle") {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("herglotz line {}: {e}", lineno + 1)))?;
            if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "herglotz line {}: expected finite angle,re,im",
                    lineno + 1
                )));
            }
            terms.push((vals[0], [vals[1], vals[2]]));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument("herglotz density has no terms".into()));
        }
        Ok(Incident::Herglotz { terms })
    }

    /// `plane:ANGLE`; Herglotz files are resolved relative to the working directory.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("incident '{spec}' is not kind:value")))?;
        match kind {
            "plane" => {
                let angle: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad plane-wave angle '{arg}'")))?;
                if !angle.is_finite() {
                    return Err(Error::InvalidArgument("plane-wave angle must be finite".into()));
                }
                Ok(Incident::Plane { angle })
            }
            "herglotz" => Self::herglotz_from_file(Path::new(arg)),
            _ => Err(Error::InvalidArgument(format!("unknown incident kind '{kind}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScatterProblem {
    pub k: f64,
    pub contrast: Contrast,
    pub shape: DomainShape,
    pub incident: Incident,
}

impl ScatterProblem {
    pub fn new(k: f64, contrast: Contrast, shape: DomainShape, incident: Incident) -> Result<Self> {
        let p = ScatterProblem {
            k,
            contrast,
            shape,
            incident,
        };
        p.validate()?;
        Ok(p)
    }

    /// `k > 0`, bounded planar shape, and `h ≠ 0` at the sampled boundary points.
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber {} must be positive", self.k)));
        }
        self.shape.validate()?;
        if self.shape.bounding_box().is_none() {
            return Err(Error::InvalidArgument("scatterer must be a bounded planar shape".into()));
        }
        for p in boundary_samples(&self.shape) {
            let h = self.contrast.at(&p);
            if !h.is_finite() {
                return Err(Error::InvalidArgument(format!("contrast not finite at {p:?}")));
            }
            // the zero contrast is the trivial scatterer and always allowed
            if h == 0.0 && !matches!(self.contrast, Contrast::Constant(_)) {
                return Err(Error::InvalidArgument(format!("contrast vanishes at boundary point {p:?}")));
            }
        }
        Ok(())
    }

    pub fn with_incident(&self, incident: Incident) -> Self {
        ScatterProblem {
            incident,
            ..self.clone()
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.contrast, Contrast::Constant(h) if h == 0.0)
    }
}

fn boundary_samples(shape: &DomainShape) -> Vec<[f64; 2]> {
    match shape {
        DomainShape::Polygon { vertices } => vertices.clone(),
        DomainShape::Disk { center, radius } => (0..16)
            .map(|j| {
                let t = TAU * j as f64 / 16.0;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Far-field samples on a uniform grid of `S¹` (or at listed angles).
#[derive(Clone, Debug, Serialize)]
pub struct FarField {
    pub k: f64,
    pub angles: Vec<f64>,
    pub values: Vec<[f64; 2]>,
    pub incident: String,
    pub mesh: usize,
    pub spacing: f64,
    pub normalization: String,
}

impl FarField {
    pub fn complex(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().map(|v| Complex64::new(v[0], v[1]))
    }

    /// `‖u^∞‖_{L²(S¹)}` by the trapezoid rule on the uniform grid.
    pub fn l2_norm(&self) -> f64 {
        let w = TAU / self.values.len().max(1) as f64;
        (w * self.complex().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.complex().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `angle,re,im` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("angle,re,im\n");
        for (a, v) in self.angles.iter().zip(&self.values) {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", a, v[0], v[1]));
        }
        s
    }
}

/// `count` uniformly spaced angles starting at zero.
pub fn uniform_angles(count: usize) -> Vec<f64> {
    (0..count).map(|j| TAU * j as f64 / count as f64).collect()
}

/// Standard shapes addressed by name: the unit square centred at the origin, the disk of
/// radius 1/2 and the quarter disk of radius 1.
pub fn named_shape(name: &str) -> Result<DomainShape> {
    match name {
        "square" => Ok(DomainShape::square(1.0)),
        "disk" => Ok(DomainShape::Disk {
            center: [0.0, 0.0],
            radius: 0.5,
        }),
        "sector" => Ok(DomainShape::sector_polygon(1.0, 0.5 * PI, 32)),
        _ => Err(Error::InvalidArgument(format!("unknown shape '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidents_solve_helmholtz() {
        let k = 2.5;
        let h = 1e-3;
        let incs = [
            Incident::Plane { angle: 0.7 },
            Incident::Herglotz {
                terms: vec![(0.1, [1.0, 0.5]), (2.0, [-0.3, 0.0])],
            },
            Incident::PointNull {
                point: [0.5, 0.5],
                angles: [0.0, 0.5 * PI],
            },
        ];
        for inc in &incs {
            let x = [0.3, -0.2];
            let lap = (inc.eval(k, &[x[0] + h, x[1]])
                + inc.eval(k, &[x[0] - h, x[1]])
                + inc.eval(k, &[x[0], x[1] + h])
                + inc.eval(k, &[x[0], x[1] - h])
                - inc.eval(k, &x) * 4.0)
                / (h * h);
            assert!((lap + inc.eval(k, &x) * (k * k)).norm() < 1e-4, "{}", inc.label());
        }
        assert_eq!(incs[2].eval(k, &[0.5, 0.5]).norm(), 0.0);
    }

    #[test]
    fn herglotz_parsing() {
        let inc = Incident::herglotz_from_str("angle,re,im\n# c\n0.0,1,0\n2.5,0,-1\n").unwrap();
        assert_eq!(
            inc,
            Incident::Herglotz {
                terms: vec![(0.0, [1.0, 0.0]), (2.5, [0.0, -1.0])]
            }
        );
        assert!(Incident::herglotz_from_str("1,2\n").is_err());
        assert!(Incident::herglotz_from_str("").is_err());
        assert_eq!(Incident::parse("plane:1.5").unwrap(), Incident::Plane { angle: 1.5 });
        assert!(Incident::parse("spherical:1").is_err());
    }

    #[test]
    fn problem_validation() {
        let sq = DomainShape::square(1.0);
        let inc = Incident::Plane { angle: 0.0 };
        assert!(ScatterProblem::new(0.0, Contrast::Constant(1.0), sq.clone(), inc.clone()).is_err());
        assert!(ScatterProblem::new(1.0, Contrast::Constant(1.0), DomainShape::Quadrant, inc.clone()).is_err());
        let vanishing = Contrast::Function {
            label: "x1 - 0.5".into(),
            f: Arc::new(|x| x[0] - 0.5),
        };
        assert!(ScatterProblem::new(1.0, vanishing, sq, inc).is_err());
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let f = FarField {
            k: 1.0,
            angles: vec![0.1],
            values: vec![[1.0 / 3.0, -2.0 / 3.0]],
            incident: "plane:0".into(),
            mesh: 8,
            spacing: 0.125,
            normalization: FAR_FIELD_CONVENTION.into(),
        };
        let csv = f.to_csv();
        let row = csv.lines().nth(1).unwrap();
        let parts: Vec<&str> = row.split(',').collect();
        assert_eq!(parts[1], "3.3333333333333331e-1");
        assert_eq!(parts[1].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(parts[2].parse::<f64>().unwrap(), -2.0 / 3.0);
    }
}
