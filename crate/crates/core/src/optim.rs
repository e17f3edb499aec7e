//! Small dense local minimizers: Nelder-Mead and finite-difference BFGS.

/// Outcome of a local minimization.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex search with the standard coefficients.
///
/// Stops when the spread of simplex values falls below
/// `f_tol * (|f_best| + f_tol)` or after `max_evals` evaluations.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_evals: usize, f_tol: f64) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let mut converged = false;
    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if worst - best <= f_tol * (best.abs() + f_tol) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, simplex: &[(Vec<f64>, f64)]| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0, &simplex);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0, &simplex);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(0.5, &simplex);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5, &simplex);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let x_best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, bi) in v.0.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    v.1 = eval(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Minimum {
        x,
        f: fx,
        evaluations: evals.get(),
        converged,
    }
}

/// Settings for [`bfgs`].
#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when the largest gradient component is below this.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers f by less than `f_tol * |f|`.
    pub f_tol: f64,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iters: 500,
            grad_tol: 1e-10,
            f_tol: 1e-12,
            fd_step: 1e-6,
        }
    }
}

fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64, evals: &mut usize) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = x[i];
            xp[i] = xi + h;
            let fp = f(&xp);
            xp[i] = xi - h;
            let fm = f(&xp);
            xp[i] = xi;
            *evals += 2;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton descent with central-difference gradients and an Armijo
/// backtracking line search.
///
/// Trial points for which `admissible` is false are rejected inside the
/// line search as if their value were infinite; the objective itself is
/// never modified.
pub fn bfgs<F, A>(f: F, x0: &[f64], opts: &BfgsOptions, admissible: A) -> Minimum
where
    F: Fn(&[f64]) -> f64,
    A: Fn(&[f64]) -> bool,
{
    let n = x0.len();
    let mut evals = 1;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = fd_gradient(&f, &x, opts.fd_step, &mut evals);
    let identity = |h: &mut Vec<Vec<f64>>| {
        for (i, row) in h.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { 1.0 } else { 0.0 };
            }
        }
    };
    let mut h = vec![vec![0.0; n]; n];
    identity(&mut h);
    let mut fresh = true;
    let mut converged = false;

    for _ in 0..opts.max_iters {
        if g.iter().all(|gi| gi.abs() <= opts.grad_tol) {
            converged = true;
            break;
        }
        let mut p: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            identity(&mut h);
            fresh = true;
            p = g.iter().map(|gi| -gi).collect();
            slope = dot(&g, &p);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + alpha * pi).collect();
            if admissible(&trial) {
                let ft = f(&trial);
                evals += 1;
                if ft <= fx + 1e-4 * alpha * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            if fresh {
                // steepest descent fails too: at the resolution of the
                // finite-difference gradient this is a minimum
                converged = true;
                break;
            }
            identity(&mut h);
            fresh = true;
            continue;
        };
        let gn = fd_gradient(&f, &xn, opts.fd_step, &mut evals);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let decrease = fx - fnew;
        x = xn;
        g = gn;
        let f_prev = fx;
        fx = fnew;
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        if decrease <= opts.f_tol * f_prev.abs() {
            converged = true;
            break;
        }
    }
    Minimum {
        x,
        f: fx,
        evaluations: evals,
        converged,
    }
}
