use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::gmres::gmres;
use super::kernel::KernelTable;
use super::{uniform_angles, Contrast, FarField, Incident, ScatterProblem, FAR_FIELD_CONVENTION};
use crate::domain::DomainShape;
use crate::error::{Error, Result};

const GMRES_TOL: f64 = 1e-10;
const GMRES_RESTART: usize = 60;
const GMRES_MAX_ITER: usize = 1200;
/// Largest system assembled densely when the iteration stalls.
pub const DENSE_LIMIT: usize = 4096;
const MIN_POINTS_PER_WAVELENGTH: f64 = 10.0;
const MIN_MESH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    /// GMRES, then dense LU if it stalls on a small system.
    Auto,
    Gmres,
    Dense,
}

/// Discretised operator `I − K Q` on an `n × n` cell grid covering the obstacle.
pub struct LsOperator {
    pub k: f64,
    pub mesh: usize,
    pub spacing: f64,
    pub lo: [f64; 2],
    /// Cell-averaged contrast on the full grid.
    pub q: Vec<f64>,
    /// Grid indices with `q ≠ 0`.
    pub support: Vec<usize>,
    kernel: KernelTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalField {
    pub k: f64,
    pub mesh: usize,
    pub spacing: f64,
    pub lo: [f64; 2],
    pub incident: String,
    /// Total field at every cell centre, row-major.
    pub values: Vec<[f64; 2]>,
    pub incident_values: Vec<[f64; 2]>,
    pub q: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub solver: LinearSolver,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl TotalField {
    pub fn centre(&self, idx: usize) -> [f64; 2] {
        cell_centre(self.lo, self.spacing, self.mesh, idx)
    }

    pub fn value(&self, idx: usize) -> Complex64 {
        Complex64::new(self.values[idx][0], self.values[idx][1])
    }

    pub fn scattered(&self, idx: usize) -> Complex64 {
        self.value(idx) - Complex64::new(self.incident_values[idx][0], self.incident_values[idx][1])
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.q.len()).filter(|&i| self.q[i] != 0.0)
    }
}

fn cell_centre(lo: [f64; 2], spacing: f64, n: usize, idx: usize) -> [f64; 2] {
    let (ix, iy) = (idx % n, idx / n);
    [lo[0] + (ix as f64 + 0.5) * spacing, lo[1] + (iy as f64 + 0.5) * spacing]
}

impl LsOperator {
    /// Uniform grid of `mesh` cells per side on the square enclosing the shape.
    pub fn new(k: f64, contrast: &Contrast, shape: &DomainShape, mesh: usize) -> Result<Self> {
        let (blo, bhi) = shape
            .bounding_box()
            .ok_or_else(|| Error::InvalidArgument("scatterer must be bounded".into()))?;
        if mesh < MIN_MESH {
            return Err(Error::UnderResolved(format!("{mesh} cells per side, need at least {MIN_MESH}")));
        }
        let side = (bhi[0] - blo[0]).max(bhi[1] - blo[1]);
        let spacing = side / mesh as f64;
        let mid = [0.5 * (blo[0] + bhi[0]), 0.5 * (blo[1] + bhi[1])];
        let lo = [mid[0] - 0.5 * side, mid[1] - 0.5 * side];
        let q: Vec<f64> = (0..mesh * mesh)
            .into_par_iter()
            .map(|idx| {
                let c = cell_centre(lo, spacing, mesh, idx);
                let frac = shape.cell_fraction(c, 0.5 * spacing)?;
                Ok(if frac == 0.0 { 0.0 } else { frac * contrast.at(&c) })
            })
            .collect::<Result<_>>()?;
        let qmax = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let k_eff = (k * k + qmax).sqrt();
        let ppw = TAU / (k_eff * spacing);
        if ppw < MIN_POINTS_PER_WAVELENGTH {
            return Err(Error::UnderResolved(format!(
                "{ppw:.1} points per wavelength, need {MIN_POINTS_PER_WAVELENGTH}"
            )));
        }
        let support = (0..q.len()).filter(|&i| q[i] != 0.0).collect();
        Ok(LsOperator {
            k,
            mesh,
            spacing,
            lo,
            q,
            support,
            kernel: KernelTable::new(k, mesh, spacing),
        })
    }

    pub fn for_problem(p: &ScatterProblem, mesh: usize) -> Result<Self> {
        p.validate()?;
        Self::new(p.k, &p.contrast, &p.shape, mesh)
    }

    pub fn unknowns(&self) -> usize {
        self.support.len()
    }

    /// `K(q u)` on the full grid for `u` given on the support.
    fn potential(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); self.q.len()];
        for (&i, xi) in self.support.iter().zip(x) {
            w[i] = xi * self.q[i];
        }
        self.kernel.convolve(&w)
    }

    /// `(I − K Q) x` on the support.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let c = self.potential(x);
        self.support.iter().zip(x).map(|(&i, xi)| xi - c[i]).collect()
    }

    fn dense_solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.mesh as i64;
        let s = &self.support;
        let a = DMatrix::from_fn(s.len(), s.len(), |r, c| {
            let (i, j) = (s[r] as i64, s[c] as i64);
            let kij = self.kernel.at(i % n - j % n, i / n - j / n);
            let id = if r == c { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) - kij * self.q[s[c]]
        });
        a.lu()
            .solve(&DVector::from_column_slice(b))
            .map(|v| v.as_slice().to_vec())
            .ok_or_else(|| Error::NoConvergence {
                residual: f64::INFINITY,
                iterations: 0,
            })
    }

    pub fn solve_with(&self, incident: &Incident, solver: LinearSolver) -> Result<TotalField> {
        let n2 = self.q.len();
        let u0: Vec<Complex64> = (0..n2)
            .into_par_iter()
            .map(|i| incident.eval(self.k, &cell_centre(self.lo, self.spacing, self.mesh, i)))
            .collect();
        let b: Vec<Complex64> = self.support.iter().map(|&i| u0[i]).collect();
        let relres = |x: &[Complex64]| {
            let ax = self.apply(x);
            let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let rn = b.iter().zip(&ax).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
            if bn == 0.0 { 0.0 } else { rn / bn }
        };
        let small = self.support.len() <= DENSE_LIMIT;
        let (x, residual, iterations, used) = match solver {
            LinearSolver::Dense => {
                if !small {
                    return Err(Error::InvalidArgument(format!(
                        "{} unknowns exceed the dense limit {DENSE_LIMIT}",
                        self.support.len()
                    )));
                }
                let x = self.dense_solve(&b)?;
                let r = relres(&x);
                (x, r, 0, LinearSolver::Dense)
            }
            LinearSolver::Gmres | LinearSolver::Auto => {
                let out = gmres(|x| self.apply(x), &b, GMRES_TOL, GMRES_RESTART, GMRES_MAX_ITER);
                if out.converged {
                    (out.x, out.residual, out.iterations, LinearSolver::Gmres)
                } else if solver == LinearSolver::Auto && small {
                    let x = self.dense_solve(&b)?;
                    let r = relres(&x);
                    (x, r, out.iterations, LinearSolver::Dense)
                } else {
                    return Err(Error::NoConvergence {
                        residual: out.residual,
                        iterations: out.iterations,
                    });
                }
            }
        };
        if !(residual < 1e-8) {
            return Err(Error::NoConvergence { residual, iterations });
        }
        let values: Vec<Complex64> = if self.support.is_empty() {
            u0.clone()
        } else {
            let c = self.potential(&x);
            u0.iter().zip(&c).map(|(a, b)| a + b).collect()
        };
        Ok(TotalField {
            k: self.k,
            mesh: self.mesh,
            spacing: self.spacing,
            lo: self.lo,
            incident: incident.label(),
            values: values.into_iter().map(pair).collect(),
            incident_values: u0.into_iter().map(pair).collect(),
            q: self.q.clone(),
            residual,
            iterations,
            solver: used,
        })
    }

    pub fn solve(&self, incident: &Incident) -> Result<TotalField> {
        self.solve_with(incident, LinearSolver::Auto)
    }
}

/// Total field on the cell grid for the problem's incident wave.
pub fn solve_ls(p: &ScatterProblem, mesh: usize) -> Result<TotalField> {
    LsOperator::for_problem(p, mesh)?.solve(&p.incident)
}

/// Far field at the given observation angles, midpoint rule on the cell grid.
pub fn far_field_at(u: &TotalField, angles: &[f64]) -> FarField {
    let k = u.k;
    let c = Complex64::from_polar(1.0, FRAC_PI_4) / (8.0 * PI * k).sqrt();
    let area = u.spacing * u.spacing;
    let cells: Vec<([f64; 2], Complex64)> = u
        .support()
        .map(|i| (u.centre(i), u.value(i) * (u.q[i] * area)))
        .collect();
    let values = angles
        .par_iter()
        .map(|&a| {
            if cells.is_empty() {
                return [0.0, 0.0];
            }
            let (ca, sa) = (a.cos(), a.sin());
            let s: Complex64 = cells
                .iter()
                .map(|(y, w)| w * Complex64::from_polar(1.0, -k * (ca * y[0] + sa * y[1])))
                .sum();
            pair(c * s)
        })
        .collect();
    FarField {
        k,
        angles: angles.to_vec(),
        values,
        incident: u.incident.clone(),
        mesh: u.mesh,
        spacing: u.spacing,
        normalization: FAR_FIELD_CONVENTION.into(),
    }
}

/// Far field on `count` uniformly spaced angles.
pub fn far_field(u: &TotalField, count: usize) -> FarField {
    far_field_at(u, &uniform_angles(count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DomainShape {
        DomainShape::Disk {
            center: [0.0, 0.0],
            radius: 0.5,
        }
    }

    #[test]
    fn zero_contrast_is_exact() {
        let p = ScatterProblem::new(2.0, Contrast::Constant(0.0), disk(), Incident::Plane { angle: 0.3 }).unwrap();
        let u = solve_ls(&p, 16).unwrap();
        assert_eq!(u.values, u.incident_values);
        let ff = far_field(&u, 32);
        assert!(ff.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn under_resolution_is_rejected() {
        let p = ScatterProblem::new(40.0, Contrast::Constant(1.0), disk(), Incident::Plane { angle: 0.0 }).unwrap();
        assert!(matches!(solve_ls(&p, 16), Err(Error::UnderResolved(_))));
        assert!(matches!(solve_ls(&p.with_incident(Incident::Plane { angle: 1.0 }), 4), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn gmres_and_dense_agree() {
        let p = ScatterProblem::new(3.0, Contrast::Constant(2.0), DomainShape::square(1.0), Incident::Plane { angle: 0.4 })
            .unwrap();
        let op = LsOperator::for_problem(&p, 16).unwrap();
        let a = op.solve_with(&p.incident, LinearSolver::Gmres).unwrap();
        let b = op.solve_with(&p.incident, LinearSolver::Dense).unwrap();
        assert!(a.residual < 1e-8 && b.residual < 1e-8);
        let d = (0..a.values.len()).map(|i| (a.value(i) - b.value(i)).norm()).fold(0.0, f64::max);
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn output_is_deterministic() {
        let p = ScatterProblem::new(2.0, Contrast::Constant(1.0), DomainShape::square(1.0), Incident::Plane { angle: 1.0 })
            .unwrap();
        let a = far_field(&solve_ls(&p, 16).unwrap(), 16).to_csv();
        let b = far_field(&solve_ls(&p, 16).unwrap(), 16).to_csv();
        assert_eq!(a, b);
    }
}
