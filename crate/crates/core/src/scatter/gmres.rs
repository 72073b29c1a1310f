use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    /// Final `‖b − Ax‖ / ‖b‖`, recomputed from the iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn nrm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES with modified Gram–Schmidt and complex Givens rotations.
pub fn gmres(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = nrm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut beta = bnorm;
    loop {
        let mut v: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h: Vec<Vec<Complex64>> = Vec::new();
        let mut rot: Vec<(f64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        for j in 0..restart {
            let mut w = apply(&v[j]);
            let mut col = vec![zero; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dotc(vi, &w);
                w.iter_mut().zip(vi).for_each(|(wk, vk)| *wk -= hij * vk);
                col[i] = hij;
            }
            let hn = nrm(&w);
            col[j + 1] = Complex64::new(hn, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let t = c * col[i] + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + c * col[i + 1];
                col[i] = t;
            }
            let (a, bb) = (col[j], col[j + 1]);
            let rho = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0))
            } else {
                (a.norm() / rho, (a / a.norm()) * bb.conj() / rho)
            };
            col[j] = c * a + s * bb;
            col[j + 1] = zero;
            rot.push((c, s));
            g.push(-s.conj() * g[j]);
            g[j] *= c;
            h.push(col);
            iterations += 1;
            let est = g[j + 1].norm() / bnorm;
            if est < tol || iterations >= max_iter || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        // back substitution on the triangular factor
        let k = h.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..k).map(|l| h[l][i] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            x.iter_mut().zip(vi).for_each(|(xk, vk)| *xk += yi * vk);
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        beta = nrm(&r);
        let residual = beta / bnorm;
        if residual < tol || iterations >= max_iter || beta == 0.0 {
            return GmresOutcome {
                x,
                residual,
                iterations,
                converged: residual < tol,
            };
        }
    }
}
