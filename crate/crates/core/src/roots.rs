//! Simultaneous polynomial root finding.
//!
//! Aberth-Ehrlich iteration started on a circle sized by the Fujiwara bound,
//! with a companion-matrix eigenvalue fallback. Repeated roots are grouped by
//! a backward-error test: `m` approximations are merged into one root of
//! multiplicity `m` at `c` when the first `m` Taylor coefficients of the
//! polynomial at `c` vanish relative to their rounding scale.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::poly;

/// A root with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster {
    pub center: C64,
    pub multiplicity: usize,
}

/// Tuning for [`find_roots`].
#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_iters: usize,
    /// Relative Taylor-coefficient threshold for merging approximations.
    pub merge_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iters: 400,
            merge_tol: 1e-12,
        }
    }
}

fn fujiwara_bound(monic: &[C64]) -> f64 {
    let n = monic.len() - 1;
    let mut bound = 0.0f64;
    for k in 1..=n {
        let mut term = monic[n - k].norm();
        if k == n {
            term *= 0.5;
        }
        bound = bound.max(term.powf(1.0 / k as f64));
    }
    2.0 * bound
}

/// Aberth-Ehrlich iteration. Returns the approximations and whether every
/// one of them reached the rounding floor.
pub fn aberth(coeffs: &[C64], max_iters: usize) -> (Vec<C64>, bool) {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let dmonic = poly::derivative(&monic);
    let radius = fujiwara_bound(&monic).max(f64::MIN_POSITIVE);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            // slight radial perturbation breaks symmetric stalls
            C64::from_polar(radius * (1.0 + 0.01 * ((k % 3) as f64)), angle)
        })
        .collect();
    let mut frozen = vec![false; n];
    let floor = 4.0 * (n as f64 + 1.0) * f64::EPSILON;

    for _ in 0..max_iters {
        let mut all = true;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let zi = z[i];
            let p = poly::eval(&monic, zi);
            if p.norm() <= floor * poly::magnitude_bound(&monic, zi) {
                frozen[i] = true;
                continue;
            }
            all = false;
            let dp = poly::eval(&dmonic, zi);
            let ratio = p / dp;
            let mut sum = C64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    sum += (zi - zj).inv();
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                z[i] = zi + C64::from_polar(1e-3 * (1.0 + zi.norm()), 1.0 + i as f64);
                continue;
            }
            z[i] = zi - w;
            if w.norm() <= f64::EPSILON * z[i].norm() {
                frozen[i] = true;
            }
        }
        if all {
            return (z, true);
        }
    }
    let done = frozen.iter().all(|&f| f);
    (z, done)
}

/// Eigenvalues of the companion matrix (complex Schur form).
pub fn companion_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    match nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
        None => Vec::new(),
    }
}

/// A few guarded Newton steps on a simple root.
pub fn newton_polish(coeffs: &[C64], mut z: C64, steps: usize) -> C64 {
    let mut best = poly::eval(coeffs, z).norm();
    for _ in 0..steps {
        if best == 0.0 {
            break;
        }
        let (p, dp) = poly::eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let val = poly::eval(coeffs, cand).norm();
        if !(val < best) {
            break;
        }
        z = cand;
        best = val;
    }
    z
}

/// Newton on `f^{(m-1)}`, whose root at an m-fold root of `f` is simple.
fn polish_multiple(coeffs: &[C64], z: C64, multiplicity: usize) -> C64 {
    let d = poly::nth_derivative(coeffs, multiplicity - 1);
    if d.len() < 2 {
        return z;
    }
    newton_polish(&d, z, 30)
}

/// Whether `coeffs` has (numerically) an m-fold root at `c`.
///
/// `magnitudes[k]` bounds the size of the terms that were summed to form
/// coefficient `k`; it sets the rounding scale of each Taylor coefficient.
pub fn is_multiple_root(
    coeffs: &[C64],
    magnitudes: &[f64],
    c: C64,
    multiplicity: usize,
    tol: f64,
) -> bool {
    let t = poly::taylor_coefficients(coeffs, c);
    let scale = poly::taylor_magnitudes(magnitudes, c.norm());
    (0..multiplicity).all(|j| t[j].norm() <= tol * scale[j])
}

/// Groups approximations into roots with multiplicities.
pub fn cluster_roots(
    coeffs: &[C64],
    magnitudes: &[f64],
    approx: &[C64],
    tol: f64,
) -> Vec<RootCluster> {
    let mut remaining: Vec<C64> = approx.to_vec();
    let mut out = Vec::new();
    while let Some(&seed) = remaining.first() {
        // neighbours of the seed by distance
        let mut order: Vec<usize> = (1..remaining.len()).collect();
        order.sort_by(|&a, &b| {
            (remaining[a] - seed)
                .norm()
                .total_cmp(&(remaining[b] - seed).norm())
        });
        let mut taken: Option<(C64, Vec<usize>)> = None;
        for m in (2..=remaining.len()).rev() {
            let mut group = vec![0];
            group.extend_from_slice(&order[..m - 1]);
            let centroid = group.iter().map(|&i| remaining[i]).sum::<C64>() / m as f64;
            let spread = group
                .iter()
                .map(|&i| (remaining[i] - centroid).norm())
                .fold(0.0, f64::max);
            if spread > 0.5 * (1.0 + centroid.norm()) {
                continue;
            }
            let center = polish_multiple(coeffs, centroid, m);
            if is_multiple_root(coeffs, magnitudes, center, m, tol) {
                taken = Some((center, group));
                break;
            }
        }
        match taken {
            Some((center, mut group)) => {
                out.push(RootCluster {
                    center,
                    multiplicity: group.len(),
                });
                group.sort_unstable_by(|a, b| b.cmp(a));
                for i in group {
                    remaining.swap_remove(i);
                }
                // swap_remove scrambles order; keep the scan deterministic
                remaining.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            }
            None => {
                out.push(RootCluster {
                    center: seed,
                    multiplicity: 1,
                });
                remaining.remove(0);
            }
        }
    }
    out
}

/// All roots of a polynomial whose leading coefficient is nonzero, grouped
/// by multiplicity. `None` when neither Aberth nor the companion matrix
/// produced finite approximations.
pub fn find_roots(coeffs: &[C64], opts: &RootOptions) -> Option<Vec<RootCluster>> {
    let magnitudes: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    find_roots_scaled(coeffs, &magnitudes, opts)
}

/// [`find_roots`] with explicit per-coefficient rounding magnitudes, for
/// coefficients that were computed with cancellation.
pub fn find_roots_scaled(
    coeffs: &[C64],
    magnitudes: &[f64],
    opts: &RootOptions,
) -> Option<Vec<RootCluster>> {
    let n = coeffs.len().checked_sub(1)?;
    if n == 0 {
        return Some(Vec::new());
    }
    if coeffs[n].norm() == 0.0 {
        return None;
    }
    if n == 1 {
        return Some(vec![RootCluster {
            center: -coeffs[0] / coeffs[1],
            multiplicity: 1,
        }]);
    }
    let (mut approx, converged) = aberth(coeffs, opts.max_iters);
    if !converged {
        let fallback = companion_roots(coeffs);
        if fallback.len() == n {
            approx = fallback;
        }
    }
    if approx
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return None;
    }
    for z in approx.iter_mut() {
        *z = newton_polish(coeffs, *z, 3);
    }
    approx.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Some(cluster_roots(coeffs, magnitudes, &approx, opts.merge_tol))
}
