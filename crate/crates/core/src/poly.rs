//! Dense complex polynomials, coefficients in ascending order of degree.

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Horner evaluation.
pub fn eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `sum_k |a_k| |z|^k`, the scale against which rounding in `eval` is measured.
pub fn magnitude_bound(coeffs: &[C64], z: C64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn nth_derivative(coeffs: &[C64], n: usize) -> Vec<C64> {
    let mut d = coeffs.to_vec();
    for _ in 0..n {
        d = derivative(&d);
    }
    d
}

/// Taylor coefficients `f^{(j)}(c) / j!` of `f` about `c`, j = 0..=deg.
pub fn taylor_coefficients(coeffs: &[C64], c: C64) -> Vec<C64> {
    let mut work = coeffs.to_vec();
    let n = work.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        // synthetic division of work[j..] by (z - c)
        for k in (j..n - 1).rev() {
            let carry = work[k + 1] * c;
            work[k] += carry;
        }
        out.push(work[j]);
    }
    out
}

/// Real analogue of [`taylor_coefficients`] for coefficient magnitudes.
pub(crate) fn taylor_magnitudes(magnitudes: &[f64], r: f64) -> Vec<f64> {
    let mut work = magnitudes.to_vec();
    let n = work.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        for k in (j..n - 1).rev() {
            let carry = work[k + 1] * r;
            work[k] += carry;
        }
        out.push(work[j]);
    }
    out
}

/// Elementary symmetric polynomials `e_0..e_n` of the given roots.
///
/// Built one root at a time: multiplying by `(1 + r t)` updates
/// `e_j <- e_j + r e_{j-1}`.
pub fn elementary_symmetric(roots: &[C64]) -> Vec<C64> {
    let mut e = Vec::with_capacity(roots.len() + 1);
    e.push(ONE);
    for &r in roots {
        e.push(ZERO);
        for j in (1..e.len()).rev() {
            let prev = e[j - 1];
            e[j] += r * prev;
        }
    }
    e
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let e = elementary_symmetric(roots);
    let n = roots.len();
    (0..=n)
        .map(|k| {
            let v = e[n - k];
            if (n - k) % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add_assign(a: &mut Vec<C64>, b: &[C64]) {
    if a.len() < b.len() {
        a.resize(b.len(), ZERO);
    }
    for (x, &y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn elementary_symmetric_small_cases() {
        assert_eq!(elementary_symmetric(&[]), vec![ONE]);
        let (z1, z2) = (c(1.5, -0.5), c(-2.0, 3.0));
        let e = elementary_symmetric(&[z1, z2]);
        assert!((e[1] - (z1 + z2)).norm() < 1e-15);
        assert!((e[2] - z1 * z2).norm() < 1e-15);
        // (z-1)(z-2)(z-3) = z^3 - 6 z^2 + 11 z - 6
        let e = elementary_symmetric(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let expected = [1.0, 6.0, 11.0, 6.0];
        for (x, y) in e.iter().zip(expected) {
            assert_eq!(*x, c(y, 0.0));
        }
    }

    #[test]
    fn from_roots_vanishes_at_roots() {
        let roots = [c(0.3, 1.0), c(-1.0, 0.2), c(2.0, -2.0), c(0.0, 0.0)];
        let p = from_roots(&roots);
        assert_eq!(p.len(), 5);
        for r in roots {
            assert!(eval(&p, r).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_matches_derivatives() {
        let p = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, -1.0)];
        let at = c(0.7, -0.3);
        let t = taylor_coefficients(&p, at);
        assert!((t[0] - eval(&p, at)).norm() < 1e-14);
        assert!((t[1] - eval(&derivative(&p), at)).norm() < 1e-14);
        assert!((t[2] - eval(&nth_derivative(&p, 2), at) / 2.0).norm() < 1e-14);
        assert!((t[3] - p[3]).norm() < 1e-14);
    }

    #[test]
    fn horner_with_derivative() {
        let p = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let (v, d) = eval_with_derivative(&p, c(2.0, 0.0));
        assert_eq!(v, c(17.0, 0.0));
        assert_eq!(d, c(14.0, 0.0));
    }
}
