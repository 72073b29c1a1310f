//! Seeded random polynomials for property checks and fixtures.

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use super::{rat, MultiIndex, QPoly};

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn small_rational(rng: &mut StdRng) -> num_rational::BigRational {
    let num = rng.random_range(-9i64..=9);
    let den = rng.random_range(1i64..=6);
    rat(num, den)
}

/// Sparse polynomial with up to 8 terms of degree at most `max_deg`.
pub fn polynomial(rng: &mut StdRng, n: usize, max_deg: u32) -> QPoly {
    let mut p = QPoly::zero(n);
    let count = rng.random_range(0..=8);
    for _ in 0..count {
        let d = rng.random_range(0..=max_deg);
        let monos = MultiIndex::of_degree(n, d);
        let a = monos[rng.random_range(0..monos.len())].clone();
        p.add_term(a, small_rational(rng));
    }
    p
}

/// Nonzero homogeneous polynomial of degree `m`.
pub fn homogeneous(rng: &mut StdRng, n: usize, m: u32) -> QPoly {
    let monos = MultiIndex::of_degree(n, m);
    loop {
        let mut p = QPoly::zero(n);
        for a in &monos {
            if rng.random_range(0..3) > 0 {
                p.add_term(a.clone(), small_rational(rng));
            }
        }
        if !p.is_zero() {
            return p;
        }
    }
}

/// Nonzero harmonic homogeneous polynomial of degree `m` (`n ≥ 2`).
pub fn harmonic(rng: &mut StdRng, n: usize, m: u32) -> QPoly {
    loop {
        let h = homogeneous(rng, n, m)
            .harmonic_projection()
            .expect("homogeneous input");
        if !h.is_zero() {
            return h;
        }
    }
}
