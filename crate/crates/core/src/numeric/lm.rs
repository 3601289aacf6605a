use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LsOptions {
    /// Residual-vector evaluations allowed, Jacobian columns included.
    pub max_evals: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub rel_tol: f64,
}

impl Default for LsOptions {
    fn default() -> Self {
        LsOptions { max_evals: 500, rel_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsResult {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Levenberg–Marquardt minimisation of `Σ r_i(x)²` with a forward-difference
/// Jacobian. `residuals` writes into the provided buffer and returns `false`
/// when `x` is outside the domain.
pub fn least_squares<F>(mut residuals: F, x0: &[f64], m: usize, opts: LsOptions) -> LsResult
where
    F: FnMut(&[f64], &mut [f64]) -> bool,
{
    let k = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], buf: &mut [f64], evals: &mut usize| -> Option<f64> {
        *evals += 1;
        if !residuals(x, buf) {
            return None;
        }
        let c: f64 = buf.iter().map(|v| v * v).sum();
        c.is_finite().then_some(c)
    };

    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let Some(mut cost) = eval(&x, &mut r, &mut evals) else {
        return LsResult { x, cost: f64::INFINITY, evals, converged: false };
    };
    if k == 0 {
        return LsResult { x, cost, evals, converged: true };
    }

    let mut jac = DMatrix::<f64>::zeros(m, k);
    let mut probe = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut lambda = 1e-3;
    let mut converged = false;

    'outer: while evals + k < opts.max_evals {
        for j in 0..k {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let (h, ok) = match eval(&xp, &mut probe, &mut evals) {
                Some(_) => (h, true),
                None => {
                    xp[j] = x[j] - h;
                    (-h, eval(&xp, &mut probe, &mut evals).is_some())
                }
            };
            if !ok {
                break 'outer;
            }
            for i in 0..m {
                jac[(i, j)] = (probe[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &rv;
        if grad.amax() <= 1e-12 * (1.0 + cost) {
            converged = true;
            break;
        }

        loop {
            if evals >= opts.max_evals {
                break 'outer;
            }
            let mut a = jtj.clone();
            for d in 0..k {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => match a.lu().solve(&(-&grad)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match eval(&xn, &mut trial, &mut evals) {
                Some(cn) if cn < cost => {
                    let rel = (cost - cn) / cost.max(f64::MIN_POSITIVE);
                    x = xn;
                    std::mem::swap(&mut r, &mut trial);
                    cost = cn;
                    lambda = (lambda / 3.0).max(1e-12);
                    if rel < opts.rel_tol {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    lambda *= 4.0;
                    if lambda > 1e12 {
                        // No descent direction left at working precision.
                        converged = true;
                        break 'outer;
                    }
                }
            }
        }
    }
    LsResult { x, cost, evals, converged }
}
