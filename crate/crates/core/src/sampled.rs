//! Fields sampled on regular origin-centred grids, with C¹ cubic interpolation.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldRef};

/// Box `[-extent, extent]^n` sampled with spacing `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub h: f64,
    pub extent: f64,
    /// Expected vanishing order `m` (the field scales like `|x|^{m+2}`).
    pub m: u32,
}

impl GridSpec {
    pub fn new(n: usize, h: f64, extent: f64, m: u32) -> Result<Self> {
        if n == 0 || n > 3 {
            return Err(Error::InvalidArgument(format!("grids support n = 1..3, got {n}")));
        }
        if !(h > 0.0 && extent > 0.0 && h < extent) {
            return Err(Error::InvalidArgument(format!(
                "bad grid spacing {h} for extent {extent}"
            )));
        }
        Ok(GridSpec { n, h, extent, m })
    }

    pub fn points_per_axis(&self) -> usize {
        (2.0 * self.extent / self.h).round() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.h
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let k = self.points_per_axis();
        let mut rest = flat;
        let mut x = vec![0.0; self.n];
        for d in (0..self.n).rev() {
            x[d] = self.coord(rest % k);
            rest /= k;
        }
        x
    }
}

/// Grid samples of a field, optionally with the formula that produced them.
#[derive(Clone)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub backing: Option<FieldRef>,
}

impl SampledField {
    pub fn sample(field: FieldRef, grid: GridSpec) -> Result<Self> {
        if field.dim() != grid.n {
            return Err(Error::DimensionMismatch {
                expected: grid.n,
                found: field.dim(),
            });
        }
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| field.value(&grid.node(i)))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field has non-finite samples".into()));
        }
        Ok(SampledField {
            grid,
            values,
            backing: Some(field),
        })
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field has non-finite samples".into()));
        }
        Ok(SampledField {
            grid,
            values,
            backing: None,
        })
    }

    /// Same samples without the formula, so every query goes through interpolation.
    pub fn detached(&self) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.clone(),
            backing: None,
        }
    }

    /// Largest deviation between stored samples and the backing formula.
    pub fn backing_mismatch(&self) -> Option<f64> {
        let f = self.backing.as_ref()?;
        Some(
            (0..self.grid.len())
                .into_par_iter()
                .map(|i| (f.value(&self.grid.node(i)) - self.values[i]).abs())
                .reduce(|| 0.0, f64::max),
        )
    }

    /// Catmull–Rom weights and derivative weights at fractional offset `t`.
    fn kernel(t: f64) -> ([f64; 4], [f64; 4]) {
        let t2 = t * t;
        let t3 = t2 * t;
        (
            [
                0.5 * (-t3 + 2.0 * t2 - t),
                0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
                0.5 * (-3.0 * t3 + 4.0 * t2 + t),
                0.5 * (t3 - t2),
            ],
            [
                0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
                0.5 * (9.0 * t2 - 10.0 * t),
                0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
                0.5 * (3.0 * t2 - 2.0 * t),
            ],
        )
    }

    /// Interpolated value and gradient; points outside the box clamp to the boundary stencil.
    pub fn interpolate(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = self.grid.n;
        let k = self.grid.points_per_axis();
        let mut base = [0usize; 3];
        let mut w = [[0.0; 4]; 3];
        let mut dw = [[0.0; 4]; 3];
        for d in 0..n {
            let s = ((x[d] + self.grid.extent) / self.grid.h).clamp(1.0, (k - 3) as f64);
            let i = (s.floor() as usize).min(k - 3);
            let (a, b) = Self::kernel(s - i as f64);
            base[d] = i - 1;
            w[d] = a;
            dw[d] = b.map(|v| v / self.grid.h);
        }
        let mut val = 0.0;
        let mut grad = vec![0.0; n];
        let stencil = 4usize.pow(n as u32);
        for s in 0..stencil {
            let mut idx = 0;
            let mut off = [0usize; 3];
            let mut rest = s;
            for d in 0..n {
                off[d] = rest % 4;
                rest /= 4;
            }
            for d in 0..n {
                idx = idx * k + base[d] + off[d];
            }
            let v = self.values[idx];
            let mut prod = 1.0;
            for d in 0..n {
                prod *= w[d][off[d]];
            }
            val += prod * v;
            for g in 0..n {
                let mut p = 1.0;
                for d in 0..n {
                    p *= if d == g { dw[d][off[d]] } else { w[d][off[d]] };
                }
                grad[g] += p * v;
            }
        }
        (val, grad)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let header = serde_json::to_string(&self.grid).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "# {header}")?;
        let names: Vec<String> = (1..=self.grid.n).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},value", names.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.node(i);
            let cols: Vec<String> = x.iter().map(|c| format!("{c:.16e}")).collect();
            writeln!(out, "{},{v:.16e}", cols.join(","))?;
        }
        Ok(())
    }

    /// Reads the `# {json header}` + `x1,...,xn,value` format; rows may come in any order.
    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        // other comment lines may precede the grid header
        let first = loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::Io("field file has no '# {...}' grid header".into()))??;
            match line.strip_prefix('#') {
                Some(rest) if rest.trim_start().starts_with('{') => break line,
                Some(_) => continue,
                None => return Err(Error::Io("field file must start with a '# {...}' header".into())),
            }
        };
        let json = &first[1..];
        let grid: GridSpec =
            serde_json::from_str(json.trim()).map_err(|e| Error::Io(format!("bad header: {e}")))?;
        let grid = GridSpec::new(grid.n, grid.h, grid.extent, grid.m)?;
        let k = grid.points_per_axis();
        let mut values = vec![f64::NAN; grid.len()];
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Io(format!("row {}: {e}", lineno + 2)))?;
            if cols.len() != grid.n + 1 {
                return Err(Error::Io(format!("row {}: expected {} columns", lineno + 2, grid.n + 1)));
            }
            let mut idx = 0;
            for c in &cols[..grid.n] {
                let i = ((c + grid.extent) / grid.h).round();
                if i < 0.0 || i >= k as f64 {
                    return Err(Error::Io(format!("row {}: point outside grid", lineno + 2)));
                }
                idx = idx * k + i as usize;
            }
            values[idx] = cols[grid.n];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Io("field file does not cover the grid".into()));
        }
        Self::from_values(grid, values)
    }
}

impl Field for SampledField {
    fn dim(&self) -> usize {
        self.grid.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        match &self.backing {
            Some(f) => f.value(x),
            None => self.interpolate(x).0,
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.backing {
            Some(f) => f.gradient(x),
            None => self.interpolate(x).1,
        }
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        if let Some(f) = &self.backing {
            return f.hessian(x);
        }
        // differences of the interpolated gradient at grid scale
        let n = self.grid.n;
        let h = 0.5 * self.grid.h;
        let mut out = vec![0.0; n * n];
        let mut y = x.to_vec();
        for j in 0..n {
            y[j] = x[j] + h;
            let gp = self.interpolate(&y).1;
            y[j] = x[j] - h;
            let gm = self.interpolate(&y).1;
            y[j] = x[j];
            for i in 0..n {
                out[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }

    fn is_analytic(&self) -> bool {
        self.backing.as_ref().is_some_and(|f| f.is_analytic())
    }

    fn cut_normals(&self) -> Vec<Vec<f64>> {
        self.backing.as_ref().map_or_else(Vec::new, |f| f.cut_normals())
    }

    fn grid_spacing(&self) -> Option<f64> {
        if self.backing.is_some() {
            None
        } else {
            Some(self.grid.h)
        }
    }

    fn describe(&self) -> String {
        match &self.backing {
            Some(f) => format!("samples of {}", f.describe()),
            None => format!("grid samples (h = {}, extent = {})", self.grid.h, self.grid.extent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ConePoly;
    use crate::poly::parse_poly;
    use std::sync::Arc;

    fn quadrant() -> FieldRef {
        Arc::new(
            ConePoly::new(
                parse_poly("x1^2 x2^2", Some(2)).unwrap(),
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn samples_match_backing() {
        let s = SampledField::sample(quadrant(), GridSpec::new(2, 1.0 / 32.0, 1.0, 2).unwrap()).unwrap();
        assert!(s.backing_mismatch().unwrap() <= 1e-14);
        assert_eq!(s.grid.points_per_axis(), 65);
    }

    #[test]
    fn interpolation_reproduces_cubics_and_converges() {
        let f: FieldRef = Arc::new(ConePoly::whole(
            parse_poly("x1^3 - 2 * x1 x2^2 + x2", Some(2)).unwrap(),
        ));
        let s = SampledField::sample(f.clone(), GridSpec::new(2, 1.0 / 16.0, 1.0, 1).unwrap())
            .unwrap()
            .detached();
        let x = [0.123, -0.377];
        // Catmull–Rom reproduces quadratics exactly; cubic error is O(h³)
        assert!((s.value(&x) - f.value(&x)).abs() < 1e-3);
        let g = s.gradient(&x);
        let ge = f.gradient(&x);
        assert!((g[0] - ge[0]).abs() < 1e-2 && (g[1] - ge[1]).abs() < 1e-2);
        let q: FieldRef = Arc::new(ConePoly::whole(parse_poly("x1^2 - x1 x2", Some(2)).unwrap()));
        let sq = SampledField::sample(q.clone(), GridSpec::new(2, 0.1, 1.0, 0).unwrap())
            .unwrap()
            .detached();
        assert!((sq.value(&x) - q.value(&x)).abs() < 1e-13);
    }

    #[test]
    fn csv_round_trip() {
        let s = SampledField::sample(quadrant(), GridSpec::new(2, 0.25, 1.0, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = SampledField::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.grid, s.grid);
        assert_eq!(back.values, s.values);
        assert!(SampledField::read_csv(std::io::Cursor::new(b"x1,value\n".to_vec())).is_err());
    }
}
