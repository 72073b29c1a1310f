use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex;
use num_rational::BigRational;

use crate::domain::DomainShape;
use crate::error::{Error, Result};
use crate::field::{ConePoly, FieldRef, LogCounterexample};
use crate::halfspace::{fullspace_form, halfspace_blowup_2d, solve_halfspace_poly};
use crate::poly::{parse_poly, rat, MultiIndex, QPoly};

/// A named test field with its known structure.
#[derive(Clone)]
pub struct Fixture {
    pub name: String,
    pub field: FieldRef,
    /// Order of the right-hand side; the field is expected to grow like `|x|^{m+2}`.
    pub m: u32,
    pub rhs: Option<QPoly>,
    pub domain: DomainShape,
    /// Exact piecewise-polynomial form, when there is one.
    pub cone: Option<ConePoly>,
    /// Edge direction for three-dimensional fixtures.
    pub edge: Option<Vec<f64>>,
}

impl std::fmt::Debug for Fixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fixture")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("domain", &self.domain)
            .finish()
    }
}

fn axis(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let p = parse_poly(s.trim(), Some(1))?;
    if p.degree().unwrap_or(0) > 0 {
        return Err(Error::InvalidArgument(format!("expected a number, got {s:?}")));
    }
    Ok(p.coeff(&MultiIndex::zero(1)))
}

impl Fixture {
    fn cone(name: String, cone: ConePoly, m: u32, rhs: Option<QPoly>, domain: DomainShape) -> Self {
        Fixture {
            name,
            field: Arc::new(cone.clone()),
            m,
            rhs,
            domain,
            cone: Some(cone),
            edge: None,
        }
    }

    /// `(x₁)₊²(x₂)₊²`, solving `Δu = 2|x|²` in the first quadrant.
    pub fn quadrant() -> Self {
        let p = QPoly::monomial(MultiIndex(vec![2, 2]), rat(1, 1));
        let cone = ConePoly::new(p, vec![axis(2, 0), axis(2, 1)]).expect("valid normals");
        Self::cone(
            "quadrant".into(),
            cone,
            2,
            Some(QPoly::radius_squared(2).scale(&rat(2, 1))),
            DomainShape::Quadrant,
        )
    }

    /// Planar half-space solution for `H = a Re zᵐ + b Im zᵐ`, supported in `{x₂ > 0}`.
    pub fn halfspace(m: u32, a: &BigRational, b: &BigRational) -> Result<Self> {
        let half = rat(1, 2);
        let ca = Complex::new(a * &half, -(b * &half));
        let sol = halfspace_blowup_2d(m as i64, ca.clone(), ca.conj())?.into_real()?;
        let cone = ConePoly::new(sol.solution.clone(), vec![axis(2, 1)])?;
        Ok(Self::cone(
            format!("halfspace({m},{a},{b})"),
            cone,
            m,
            Some(sol.rhs),
            DomainShape::HalfSpace { normal: axis(2, 1) },
        ))
    }

    /// `|x|² H/(4m+4) + w` on the whole plane.
    pub fn fullspace(h: &QPoly, w: &QPoly) -> Result<Self> {
        let form = fullspace_form(h, w)?;
        Ok(Self::cone(
            format!("fullspace({h},{w})"),
            ConePoly::whole(form.payload),
            form.m,
            Some(h.clone()),
            DomainShape::Whole { n: 2 },
        ))
    }

    /// `(x₁² − x₂²)|log|x||^α`, whose Laplacian is only `O(|log|x||^{α−1})`.
    pub fn log_counterexample(alpha: f64) -> Result<Self> {
        let h = parse_poly("x1^2 - x2^2", Some(2))?;
        let field = LogCounterexample::new(&h, alpha)?;
        Ok(Fixture {
            name: format!("log-counterexample({alpha})"),
            field: Arc::new(field),
            m: 0,
            rhs: None,
            domain: DomainShape::Whole { n: 2 },
            cone: None,
            edge: None,
        })
    }

    /// `(x₁)₊²(x₂)₊²` in ℝ³, independent of `x₃`; edge along `e₃`.
    pub fn wedge3d() -> Self {
        let p = QPoly::monomial(MultiIndex(vec![2, 2, 0]), rat(1, 1));
        let cone = ConePoly::new(p, vec![axis(3, 0), axis(3, 1)]).expect("valid normals");
        let mut f = Self::cone(
            "wedge3d".into(),
            cone,
            2,
            Some(parse_poly("2 * x1^2 + 2 * x2^2", Some(3)).expect("literal")),
            DomainShape::Wedge { theta0: FRAC_PI_2 },
        );
        f.edge = Some(axis(3, 2));
        f
    }

    /// `x₁(x₃)₊²/2` in ℝ³ with the boundary direction `e₁` as edge.
    pub fn halfspace3d() -> Result<Self> {
        let sol = solve_halfspace_poly(&QPoly::var(3, 0), 3)?;
        let cone = ConePoly::new(sol.solution, vec![axis(3, 2)])?;
        let mut f = Self::cone(
            "halfspace3d".into(),
            cone,
            1,
            Some(QPoly::var(3, 0)),
            DomainShape::HalfSpace { normal: axis(3, 2) },
        );
        f.edge = Some(axis(3, 0));
        Ok(f)
    }

    /// The wedge fixture plus `ε x₁² x₂ (x₃ − 1)`, which breaks invariance along the edge.
    pub fn wedge3d_injected(eps: &BigRational) -> Result<Self> {
        let base = QPoly::monomial(MultiIndex(vec![2, 2, 0]), rat(1, 1));
        let bump = &QPoly::monomial(MultiIndex(vec![2, 1, 0]), eps.clone())
            * &(QPoly::var(3, 2) - QPoly::one(3));
        let cone = ConePoly::new(base + bump, vec![axis(3, 0), axis(3, 1)])?;
        let mut f = Self::cone(
            format!("wedge3d-injected({eps})"),
            cone,
            2,
            None,
            DomainShape::Wedge { theta0: FRAC_PI_2 },
        );
        f.edge = Some(axis(3, 2));
        Ok(f)
    }

    /// Parses `quadrant`, `halfspace(m,a,b)`, `fullspace(H,w)`, `log-counterexample(α)`,
    /// `wedge3d`, `halfspace3d` or `wedge3d-injected(ε)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => {
                (&spec[..i], spec[i + 1..spec.len() - 1].split(',').map(str::trim).collect())
            }
            Some(_) => return Err(Error::InvalidArgument(format!("unbalanced fixture {spec:?}"))),
            None => (spec, Vec::new()),
        };
        let want = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "fixture {name} takes {k} arguments, got {}",
                    args.len()
                )))
            }
        };
        match name {
            "quadrant" => {
                want(0)?;
                Ok(Self::quadrant())
            }
            "halfspace" => {
                want(3)?;
                let m: u32 = args[0]
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad degree {:?}", args[0])))?;
                Self::halfspace(m, &parse_rational(args[1])?, &parse_rational(args[2])?)
            }
            "fullspace" => {
                want(2)?;
                Self::fullspace(&parse_poly(args[0], Some(2))?, &parse_poly(args[1], Some(2))?)
            }
            "log-counterexample" => {
                want(1)?;
                let a: f64 = args[0]
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent {:?}", args[0])))?;
                Self::log_counterexample(a)
            }
            "wedge3d" => {
                want(0)?;
                Ok(Self::wedge3d())
            }
            "halfspace3d" => {
                want(0)?;
                Self::halfspace3d()
            }
            "wedge3d-injected" => {
                want(1)?;
                Self::wedge3d_injected(&parse_rational(args[0])?)
            }
            _ => Err(Error::InvalidArgument(format!("unknown fixture {name:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_parses() {
        for s in [
            "quadrant",
            "halfspace(1, 1, 0)",
            "halfspace(3,1/2,-2)",
            "fullspace(x1, 0)",
            "fullspace(1, x1^2 - x2^2)",
            "log-counterexample(1)",
            "wedge3d",
            "halfspace3d",
            "wedge3d-injected(1/10)",
        ] {
            let f = Fixture::parse(s).unwrap();
            assert!(!f.name.is_empty());
        }
        assert!(Fixture::parse("quadrant(1)").is_err());
        assert!(Fixture::parse("torus").is_err());
        assert!(Fixture::parse("fullspace(x1^2, 0)").is_err());
    }

    #[test]
    fn halfspace_fixture_for_x1() {
        let f = Fixture::parse("halfspace(1,1,0)").unwrap();
        assert_eq!(f.cone.unwrap().poly(), &parse_poly("1/2 * x1 x2^2", Some(2)).unwrap());
        assert_eq!(f.rhs.unwrap(), QPoly::var(2, 0));
    }
}
