//! Spin labels and the angular momentum matrices in the `|S, m>` basis.
//!
//! Storage index `k = S + m` runs from 0 (m = -S) to 2S (m = S).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin quantum number, stored doubled so half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinLabel(u32);

impl SpinLabel {
    pub const fn new(two_s: u32) -> Self {
        SpinLabel(two_s)
    }

    /// Label for spin `s`; `s` must be a nonnegative multiple of 1/2.
    pub fn from_spin(s: f64) -> Result<Self> {
        let two = 2.0 * s;
        if !(two >= 0.0) || (two - two.round()).abs() > 1e-12 || two > u32::MAX as f64 {
            return Err(Error::invalid(format!("{s} is not a valid spin")));
        }
        Ok(SpinLabel(two.round() as u32))
    }

    #[inline]
    pub const fn two_s(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn spin(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Hilbert space dimension 2S + 1.
    #[inline]
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Magnetic quantum number for storage index `k`.
    #[inline]
    pub fn m(self, k: usize) -> f64 {
        k as f64 - self.spin()
    }
}

impl std::fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "S={}", self.0 / 2)
        } else {
            write!(f, "S={}/2", self.0)
        }
    }
}

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `sqrt(binom(2S, k))` for k = 0..=2S.
pub fn sqrt_binomials(label: SpinLabel) -> Vec<f64> {
    let n = label.two_s();
    (0..=n).map(|k| binomial(n, k).sqrt()).collect()
}

pub fn sz(label: SpinLabel) -> DMatrix<C64> {
    let d = label.dim();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(label.m(i), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Raising operator: `<m+1|S+|m> = sqrt(S(S+1) - m(m+1))`.
pub fn s_plus(label: SpinLabel) -> DMatrix<C64> {
    let d = label.dim();
    let s = label.spin();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            let m = label.m(j);
            C64::new((s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn s_minus(label: SpinLabel) -> DMatrix<C64> {
    s_plus(label).adjoint()
}

pub fn sx(label: SpinLabel) -> DMatrix<C64> {
    (s_plus(label) + s_minus(label)) * C64::new(0.5, 0.0)
}

pub fn sy(label: SpinLabel) -> DMatrix<C64> {
    (s_plus(label) - s_minus(label)) * C64::new(0.0, -0.5)
}

/// `U diag(exp(i * scale * lambda)) U^dagger` for a Hermitian matrix.
pub(crate) fn hermitian_exp_i(h: &DMatrix<C64>, scale: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, scale * l)),
    ));
    u * phases * u.adjoint()
}
