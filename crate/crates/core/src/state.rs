//! Pure spin-S states and the standard families built from them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sphere::ExtendedComplex;
use crate::spin::{self, SpinLabel};

/// Normalized amplitudes `psi_m = <S,m|psi>`, stored at index `k = S + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    label: SpinLabel,
    amplitudes: Vec<C64>,
}

impl SpinState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(label: SpinLabel, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != label.dim() {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for 2S = {}, got {}",
                label.dim(),
                label.two_s(),
                amplitudes.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        let scale = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::invalid("zero vector is not a state"));
        }
        let scaled: Vec<C64> = amplitudes.iter().map(|a| a / scale).collect();
        let norm = scaled.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amplitudes = scaled.into_iter().map(|a| a / norm).collect();
        Ok(SpinState { label, amplitudes })
    }

    /// Basis state `|S, m>` given by its storage index `k = S + m`.
    pub fn basis(label: SpinLabel, k: usize) -> Result<Self> {
        if k >= label.dim() {
            return Err(Error::range(
                "basis index",
                format!("k = {k} for 2S = {}", label.two_s()),
            ));
        }
        let mut amps = vec![C64::new(0.0, 0.0); label.dim()];
        amps[k] = C64::new(1.0, 0.0);
        Ok(SpinState {
            label,
            amplitudes: amps,
        })
    }

    /// `|S, m>` from the doubled projection `2m`.
    pub fn from_two_m(label: SpinLabel, two_m: i64) -> Result<Self> {
        let k = two_m + label.two_s() as i64;
        if k < 0 || k % 2 != 0 {
            return Err(Error::range(
                "2m",
                format!("2m = {two_m} for 2S = {}", label.two_s()),
            ));
        }
        Self::basis(label, (k / 2) as usize)
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub(crate) fn from_vector_unchecked(label: SpinLabel, v: &DVector<C64>) -> Self {
        SpinState {
            label,
            amplitudes: v.iter().copied().collect(),
        }
    }

    /// Applies a matrix and renormalizes.
    pub fn apply(&self, op: &DMatrix<C64>) -> Result<SpinState> {
        let v = op * self.to_vector();
        SpinState::new(self.label, v.iter().copied().collect())
    }

    /// `|rho><rho|` as a matrix.
    pub fn density_matrix(&self) -> DMatrix<C64> {
        let v = self.to_vector();
        &v * v.adjoint()
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        let v = self.to_vector();
        v.dotc(&(op * &v))
    }

    /// Multiplies by a global phase so the highest nonzero amplitude is real positive.
    pub fn with_canonical_phase(mut self) -> Self {
        let scale = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if let Some(top) = self
            .amplitudes
            .iter()
            .rev()
            .find(|a| a.norm() > 1e-14 * scale)
            .copied()
        {
            let phase = top.conj() / top.norm();
            for a in &mut self.amplitudes {
                *a *= phase;
            }
        }
        self
    }
}

/// `sum_m a_m^* b_m`.
pub fn overlap(a: &SpinState, b: &SpinState) -> Result<C64> {
    if a.label != b.label {
        return Err(Error::LabelMismatch(a.label.two_s(), b.label.two_s()));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|<a|b>|`, insensitive to global phase.
pub fn fidelity(a: &SpinState, b: &SpinState) -> Result<f64> {
    overlap(a, b).map(|c| c.norm())
}

/// Spin coherent state `|z0>` with amplitudes proportional to
/// `binom(2S, S+m)^{1/2} z0^{S+m}`.
///
/// `z0 = 0` gives `|S,-S>`, `z0 = infinity` gives `|S,S>`.
pub fn coherent_state(label: SpinLabel, z0: ExtendedComplex) -> SpinState {
    let n = label.two_s();
    let (a, b) = match z0 {
        ExtendedComplex::Infinity => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        ExtendedComplex::Finite(z) => {
            let r = z.norm();
            if r <= 1.0 {
                let a = 1.0 / (1.0 + r * r).sqrt();
                (C64::new(a, 0.0), z * a)
            } else {
                let inv = 1.0 / r;
                let den = (1.0 + inv * inv).sqrt();
                (C64::new(inv / den, 0.0), z * inv / den)
            }
        }
    };
    let sq = spin::sqrt_binomials(label);
    let amps = (0..=n)
        .map(|k| a.powu(n - k) * b.powu(k) * sq[k as usize])
        .collect();
    SpinState {
        label,
        amplitudes: amps,
    }
}

/// `(|S,S> - |S,-S>) / sqrt 2`; its stars are the 2S-th roots of unity.
pub fn noon_state(label: SpinLabel) -> Result<SpinState> {
    if label.two_s() == 0 {
        return Err(Error::range("2S", "NOON state needs 2S >= 1"));
    }
    let mut amps = vec![C64::new(0.0, 0.0); label.dim()];
    amps[0] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[label.two_s() as usize] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(SpinState {
        label,
        amplitudes: amps,
    })
}

/// Matrix of the displacement `D(theta, phi) = exp(i phi Sz) exp(i theta Sy)`.
pub fn rotation_matrix(label: SpinLabel, theta: f64, phi: f64) -> DMatrix<C64> {
    let y = spin::hermitian_exp_i(&spin::sy(label), theta);
    let d = label.dim();
    let z = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::from_polar(1.0, phi * label.m(i))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    z * y
}

/// Applies `D(theta, phi)`.
pub fn rotate(state: &SpinState, theta: f64, phi: f64) -> SpinState {
    let v = rotation_matrix(state.label, theta, phi) * state.to_vector();
    // unitary up to rounding; renormalize to keep the invariant exact
    let norm = v.norm();
    SpinState::from_vector_unchecked(state.label, &(v / C64::new(norm, 0.0)))
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_state<R: Rng + ?Sized>(label: SpinLabel, rng: &mut R) -> SpinState {
    loop {
        let amps: Vec<C64> = (0..label.dim())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = SpinState::new(label, amps) {
            return s;
        }
    }
}
