use crate::error::{Error, Result};

/// Stopping rule for [`conjugate_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Target relative residual ‖Ax − b‖₂ / ‖b‖₂.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        CgSettings {
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of `solution`, recomputed from scratch.
    pub residual: f64,
}

impl CgOutcome {
    pub fn converged(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for a symmetric positive-definite operator given as a
/// matrix-free `apply(x, out)` closure. Starts from x = 0.
///
/// Hitting `max_iter` is not an error; callers inspect `residual`. A
/// non-finite quantity during the iteration is.
pub fn conjugate_gradient<A>(apply: A, b: &[f64], settings: CgSettings) -> Result<CgOutcome>
where
    A: Fn(&[f64], &mut [f64]),
{
    if !(settings.tol > 0.0) {
        return Err(Error::Parameter(format!("cg tolerance must be > 0, got {}", settings.tol)));
    }
    let n = b.len();
    let b_norm = norm(b);
    if !b_norm.is_finite() {
        return Err(Error::Numerical("non-finite right-hand side".into()));
    }
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut ap = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let true_residual = |x: &[f64], scratch: &mut [f64]| {
        apply(x, scratch);
        let s: f64 = scratch.iter().zip(b).map(|(ax, bi)| (bi - ax).powi(2)).sum();
        s.sqrt() / b_norm
    };

    while iterations < settings.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::Numerical(format!(
                "cg breakdown at iteration {iterations}: pᵀAp = {pap}"
            )));
        }
        let step = rr / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        iterations += 1;
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(Error::Numerical(format!("non-finite residual at iteration {iterations}")));
        }
        if rr_next.sqrt() / b_norm <= settings.tol {
            // confirm against the true residual; restart from it if drift crept in
            let actual = true_residual(&x, &mut ap);
            if actual <= settings.tol {
                return Ok(CgOutcome {
                    solution: x,
                    iterations,
                    residual: actual,
                });
            }
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            p.copy_from_slice(&r);
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }

    let residual = true_residual(&x, &mut ap);
    Ok(CgOutcome {
        solution: x,
        iterations,
        residual,
    })
}
