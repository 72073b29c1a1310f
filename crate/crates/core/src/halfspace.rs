//! Polynomial solutions supported in a half-space and the planar blowup normal forms.

use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::domain::DomainShape;
use crate::error::{Error, Result};
use crate::poly::{rat, Coeff, CQPoly, MultiIndex, MultiPoly, QPoly};

/// Solution of `Δv = f` in `{x_n > 0}` with `v = ∂_n v = 0` on `{x_n = 0}`.
#[derive(Clone, Debug)]
pub struct HalfspaceSolution<C: Coeff> {
    pub dim: usize,
    /// Degree of the right-hand side.
    pub m: u32,
    pub rhs: MultiPoly<C>,
    pub solution: MultiPoly<C>,
    /// Unit normal pointing into the support; always the last coordinate axis.
    pub normal: Vec<f64>,
}

impl<C: Coeff> HalfspaceSolution<C> {
    fn last_axis(dim: usize) -> Vec<f64> {
        let mut e = vec![0.0; dim];
        e[dim - 1] = 1.0;
        e
    }

    /// Exact checks of the defining properties.
    pub fn verify(&self) -> Result<()> {
        let n = self.dim;
        let zero = C::zero();
        if self.solution.laplacian() != self.rhs {
            return Err(Error::Verification("Δv differs from the right-hand side".into()));
        }
        if !self.solution.restrict(n - 1, &zero).is_zero() {
            return Err(Error::Verification("v does not vanish on the boundary".into()));
        }
        if !self.solution.derivative(n - 1).restrict(n - 1, &zero).is_zero() {
            return Err(Error::Verification("∂_n v does not vanish on the boundary".into()));
        }
        if self.rhs.is_homogeneous(self.m) && !self.solution.is_homogeneous(self.m + 2) {
            return Err(Error::Verification("v is not homogeneous of degree m + 2".into()));
        }
        Ok(())
    }

    pub fn support(&self) -> DomainShape {
        DomainShape::HalfSpace {
            normal: self.normal.clone(),
        }
    }
}

impl HalfspaceSolution<Complex<BigRational>> {
    pub fn into_real(&self) -> Result<HalfspaceSolution<BigRational>> {
        Ok(HalfspaceSolution {
            dim: self.dim,
            m: self.m,
            rhs: self.rhs.into_real()?,
            solution: self.solution.into_real()?,
            normal: self.normal.clone(),
        })
    }
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

/// The unique polynomial solution in `{x_n > 0}`, summed term by term from boundary data.
pub fn solve_halfspace_poly(f: &QPoly, n: usize) -> Result<HalfspaceSolution<BigRational>> {
    if f.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.dim(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let last = n - 1;
    let m = f.degree().unwrap_or(0);
    let zero = rat(0, 1);
    let mut v = QPoly::zero(n);
    let xn = QPoly::var(n, last);
    // (−Δ_{x'})^j f
    let mut tangential = vec![f.clone()];
    for j in 1..=m / 2 + 1 {
        let next = -tangential[j as usize - 1].partial_laplacian(0..last);
        tangential.push(next);
    }
    for k in 2..=m + 2 {
        let mut inner = QPoly::zero(n);
        for j in 0..=(k - 2) / 2 {
            let d = tangential[j as usize].derivative_n(last, k - 2 - 2 * j);
            inner = inner + d.restrict(last, &zero);
        }
        let term = &xn.pow(k) * &inner;
        v = v + term.scale(&rat(1, factorial(k)));
    }
    let sol = HalfspaceSolution {
        dim: n,
        m,
        rhs: f.clone(),
        solution: v,
        normal: HalfspaceSolution::<BigRational>::last_axis(n),
    };
    sol.verify()?;
    Ok(sol)
}

fn i_unit() -> Complex<BigRational> {
    Complex::new(rat(0, 1), rat(1, 1))
}

fn creal(q: BigRational) -> Complex<BigRational> {
    Complex::new(q, BigRational::zero())
}

/// `z = x₁ + i x₂` and `z̄` as complex polynomials in the plane.
pub fn z_and_conj() -> (CQPoly, CQPoly) {
    let x1 = CQPoly::var(2, 0);
    let x2 = CQPoly::var(2, 1).scale(&i_unit());
    (&x1 + &x2, &x1 - &x2)
}

/// Planar half-space solution for `H = a z^m + b z̄^m`, normalised so that `Δv = H`.
///
/// The classical display built from `|z|² z^m` satisfies `Δv = 4(m+1)H`; the whole
/// expression is divided by `4(m+1)` here.
pub fn halfspace_blowup_2d(
    m: i64,
    a: Complex<BigRational>,
    b: Complex<BigRational>,
) -> Result<HalfspaceSolution<Complex<BigRational>>> {
    if m < 0 {
        return Err(Error::InvalidArgument(format!("degree m = {m} must be nonnegative")));
    }
    let mu = m as u32;
    let (z, zb) = z_and_conj();
    let r2 = CQPoly::radius_squared(2);
    let zm = z.pow(mu);
    let zbm = zb.pow(mu);
    let z2 = z.pow(mu + 2);
    let zb2 = zb.pow(mu + 2);
    let c1 = creal(rat(m + 1, m + 2));
    let c2 = creal(rat(1, m + 2));
    let block_a = &(&r2 * &zm) - &(z2.scale(&c1) + zb2.scale(&c2));
    let block_b = &(&r2 * &zbm) - &(z2.scale(&c2) + zb2.scale(&c1));
    let v = (block_a.scale(&a) + block_b.scale(&b)).scale(&creal(rat(1, 4 * (m + 1))));
    let h = zm.scale(&a) + zbm.scale(&b);
    let sol = HalfspaceSolution {
        dim: 2,
        m: mu,
        rhs: h,
        solution: v,
        normal: vec![0.0, 1.0],
    };
    sol.verify()?;
    Ok(sol)
}

/// Coefficients `(a, b)` with `H = a z^m + b z̄^m` for a real planar harmonic `H`; `b = ā`.
pub fn harmonic_to_ab(h: &QPoly) -> Result<(u32, Complex<BigRational>, Complex<BigRational>)> {
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h.dim(),
        });
    }
    let m = h.degree().unwrap_or(0);
    if !h.is_homogeneous(m) {
        return Err(Error::NotHomogeneous(m));
    }
    if !h.is_harmonic() {
        return Err(Error::NotHarmonic);
    }
    let alpha = h.coeff(&MultiIndex(vec![m, 0]));
    let beta = if m == 0 {
        BigRational::zero()
    } else {
        h.coeff(&MultiIndex(vec![m - 1, 1])) / BigRational::from_int(m as i64)
    };
    let half = rat(1, 2);
    let a = Complex::new(&alpha * &half, -(&beta * &half));
    let b = a.conj();
    let (z, zb) = z_and_conj();
    let back = (z.pow(m).scale(&a) + zb.pow(m).scale(&b)).into_real()?;
    if &back != h {
        return Err(Error::Verification("harmonic coefficients do not reproduce H".into()));
    }
    Ok((m, a, b))
}

/// Continuation of a half-space solution to all of ℝⁿ with `Δṽ = H` everywhere.
///
/// For homogeneous `H` of degree `m` the solution polynomial itself is the continuation and
/// has parity `ṽ(−x) = (−1)^m ṽ(x)`; both facts are checked before returning.
pub fn antipodal_extension(sol: &HalfspaceSolution<BigRational>) -> Result<QPoly> {
    if !sol.rhs.is_homogeneous(sol.m) {
        return Err(Error::NotHomogeneous(sol.m));
    }
    let v = sol.solution.clone();
    let n = sol.dim;
    let minus: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { rat(-1, 1) } else { rat(0, 1) }).collect())
        .collect();
    let reflected = v.linear_substitute(&minus)?;
    let sign = if sol.m % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
    if reflected != v.scale(&sign) {
        return Err(Error::Verification("extension has the wrong parity".into()));
    }
    if v.laplacian() != sol.rhs {
        return Err(Error::Verification("extension does not solve Δṽ = H".into()));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalFormKind {
    Empty,
    Halfspace,
    Fullspace,
}

/// Homogeneous global solution of `Δv = H χ_{v≠0}` together with its support.
#[derive(Clone, Debug)]
pub struct BlowupNormalForm {
    pub kind: NormalFormKind,
    pub m: u32,
    pub h: QPoly,
    /// The polynomial on the support.
    pub payload: QPoly,
    pub support: DomainShape,
}

impl BlowupNormalForm {
    pub fn empty(h: &QPoly) -> Self {
        BlowupNormalForm {
            kind: NormalFormKind::Empty,
            m: h.degree().unwrap_or(0),
            h: h.clone(),
            payload: QPoly::zero(h.dim()),
            support: DomainShape::Whole { n: h.dim() },
        }
    }

    pub fn halfspace(sol: &HalfspaceSolution<BigRational>) -> Self {
        BlowupNormalForm {
            kind: NormalFormKind::Halfspace,
            m: sol.m,
            h: sol.rhs.clone(),
            payload: sol.solution.clone(),
            support: sol.support(),
        }
    }
}

/// `(1/(4m+4)) |x|² H + w` in the plane.
pub fn fullspace_form(h: &QPoly, w: &QPoly) -> Result<BlowupNormalForm> {
    if h.dim() != 2 || w.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if h.dim() != 2 { h.dim() } else { w.dim() },
        });
    }
    let m = h.degree().ok_or_else(|| Error::InvalidArgument("H must be nonzero".into()))?;
    if !h.is_homogeneous(m) {
        return Err(Error::NotHomogeneous(m));
    }
    if !w.is_zero() && !w.is_homogeneous(m + 2) {
        return Err(Error::NotHomogeneous(m + 2));
    }
    if !h.is_harmonic() || !w.is_harmonic() {
        return Err(Error::NotHarmonic);
    }
    let payload = (&QPoly::radius_squared(2) * h).scale(&rat(1, 4 * (m as i64 + 1))) + w.clone();
    if payload.laplacian() != *h {
        return Err(Error::Verification("Δ of the full-space form differs from H".into()));
    }
    Ok(BlowupNormalForm {
        kind: NormalFormKind::Fullspace,
        m,
        h: h.clone(),
        payload,
        support: DomainShape::Whole { n: 2 },
    })
}

/// Exact planar rotation by the angle with cosine `c` and sine `s` (`c² + s² = 1`).
pub fn rotate_2d(p: &QPoly, c: &BigRational, s: &BigRational) -> Result<QPoly> {
    if c * c + s * s != BigRational::one() {
        return Err(Error::InvalidArgument("rotation entries must satisfy c² + s² = 1".into()));
    }
    p.linear_substitute(&[vec![c.clone(), -s.clone()], vec![s.clone(), c.clone()]])
}

const PRIME: u64 = (1 << 61) - 1;

fn mod_p(q: &BigRational) -> Option<u64> {
    let p = num_bigint::BigInt::from(PRIME);
    let num = q.numer().mod_floor(&p).to_u64()?;
    let den = q.denom().mod_floor(&p).to_u64()?;
    if den == 0 {
        return None;
    }
    Some(mul_mod(num, pow_mod(den, PRIME - 2)))
}

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = pow_mod(rows[rank][col], PRIME - 2);
        for j in col..ncols {
            rows[rank][j] = mul_mod(rows[rank][j], inv);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for j in col..ncols {
                    let sub = mul_mod(f, rows[rank][j]);
                    rows[r][j] = (rows[r][j] + PRIME - sub) % PRIME;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub n: usize,
    pub m: u32,
    /// Dimension of polynomials of order ≤ m.
    pub size: usize,
    /// Rank of `v ↦ Δv` on `x_n² P_m`, computed modulo a large prime.
    pub rank: usize,
    pub full_rank: bool,
}

/// Rank of `Δ : x_n² P_m → P_m` in the monomial basis.
///
/// Computed modulo the prime `2^61 − 1`; full rank there implies full rank over ℚ.
pub fn uniqueness_rank(n: usize, m: u32) -> Result<UniquenessReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let basis: Vec<MultiIndex> = (0..=m).flat_map(|d| MultiIndex::of_degree(n, d)).collect();
    let index: std::collections::HashMap<&MultiIndex, usize> =
        basis.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let size = basis.len();
    let mut cols = vec![vec![0u64; size]; size];
    for (j, a) in basis.iter().enumerate() {
        let mut e = a.clone();
        e.0[n - 1] += 2;
        let img = QPoly::monomial(e, rat(1, 1)).laplacian();
        for (b, c) in img.terms() {
            let i = *index.get(b).ok_or_else(|| {
                Error::Verification("Laplacian image left the target space".into())
            })?;
            cols[j][i] = mod_p(c).ok_or_else(|| Error::Verification("coefficient vanishes mod p".into()))?;
        }
    }
    let rank = rank_mod_p(cols);
    Ok(UniquenessReport {
        n,
        m,
        size,
        rank,
        full_rank: rank == size,
    })
}

/// Signed sum helper used by callers that report exact coefficient mismatches.
pub fn max_coeff_gap(a: &QPoly, b: &QPoly) -> BigRational {
    (a - b)
        .terms()
        .map(|(_, c)| c.abs())
        .fold(BigRational::zero(), |m, c| if c > m { c } else { m })
}
