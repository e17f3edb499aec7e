//! The Majorana stellar function and the constellation of a state.
//!
//! The stellar polynomial of `psi` is `f(z) = sum_k binom(2S,k)^{1/2} psi_{k-S} z^k`.
//! Its roots, with `2S - deg f` extra stars at infinity, form the
//! constellation.

use std::cmp::Ordering;

use num_complex::Complex64 as C64;

use crate::assignment::match_stars;
use crate::error::{Error, Result};
use crate::poly;
use crate::roots::{self, RootOptions};
use crate::sphere::{self, fibonacci_points, ExtendedComplex, SpherePoint};
use crate::spin::{sqrt_binomials, SpinLabel};
use crate::state::SpinState;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Coefficients `f_k`, k = 0..=2S, of the stellar function.
#[derive(Clone, Debug, PartialEq)]
pub struct StellarPolynomial {
    label: SpinLabel,
    coefficients: Vec<C64>,
}

impl StellarPolynomial {
    pub fn new(label: SpinLabel, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != label.dim() {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                label.dim(),
                coefficients.len()
            )));
        }
        if coefficients.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::invalid("stellar polynomial is identically zero"));
        }
        Ok(StellarPolynomial {
            label,
            coefficients,
        })
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.coefficients, z)
    }

    /// Inverse of [`stellar_polynomial`]: `psi_{k-S} = f_k / binom(2S,k)^{1/2}`.
    pub fn to_state(&self) -> Result<SpinState> {
        let sq = sqrt_binomials(self.label);
        SpinState::new(
            self.label,
            self.coefficients
                .iter()
                .zip(&sq)
                .map(|(c, s)| c / s)
                .collect(),
        )
    }
}

pub fn stellar_polynomial(state: &SpinState) -> StellarPolynomial {
    let sq = sqrt_binomials(state.label());
    StellarPolynomial {
        label: state.label(),
        coefficients: state
            .amplitudes()
            .iter()
            .zip(&sq)
            .map(|(a, s)| a * s)
            .collect(),
    }
}

/// Finite roots plus a count of stars at the south pole; always 2S stars.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    label: SpinLabel,
    finite_roots: Vec<C64>,
    infinity_count: usize,
}

impl Constellation {
    pub fn new(label: SpinLabel, finite_roots: Vec<C64>, infinity_count: usize) -> Result<Self> {
        let total = finite_roots.len() + infinity_count;
        if total != label.two_s() as usize {
            return Err(Error::invalid(format!(
                "constellation has {total} stars, 2S = {}",
                label.two_s()
            )));
        }
        if finite_roots
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("roots must be finite numbers"));
        }
        Ok(Constellation {
            label,
            finite_roots,
            infinity_count,
        })
    }

    pub fn from_stars(label: SpinLabel, stars: &[ExtendedComplex]) -> Result<Self> {
        let finite: Vec<C64> = stars.iter().filter_map(|s| s.finite()).collect();
        let inf = stars.len() - finite.len();
        Constellation::new(label, finite, inf)
    }

    pub fn from_points(label: SpinLabel, points: &[SpherePoint]) -> Result<Self> {
        let stars: Vec<ExtendedComplex> = points
            .iter()
            .map(|&p| sphere::sphere_to_stereo(p))
            .collect();
        Constellation::from_stars(label, &stars)
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn finite_roots(&self) -> &[C64] {
        &self.finite_roots
    }

    pub fn infinity_count(&self) -> usize {
        self.infinity_count
    }

    pub fn star_count(&self) -> usize {
        self.finite_roots.len() + self.infinity_count
    }

    /// Finite stars first, then the stars at infinity.
    pub fn stars(&self) -> Vec<ExtendedComplex> {
        self.finite_roots
            .iter()
            .map(|&z| ExtendedComplex::Finite(z))
            .chain(std::iter::repeat_n(
                ExtendedComplex::Infinity,
                self.infinity_count,
            ))
            .collect()
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        self.stars()
            .into_iter()
            .map(sphere::extended_to_sphere)
            .collect()
    }

    /// Largest chordal distance between matched stars of two constellations
    /// (minimal total-distance matching).
    pub fn distance(&self, other: &Constellation) -> f64 {
        if self.star_count() != other.star_count() {
            return f64::INFINITY;
        }
        match_stars(&self.stars(), &other.stars()).1
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StellarOptions {
    /// Residual bound: `|f(z)| <= tol * max|f_k| * max(1,|z|)^{2S}`.
    pub tol: f64,
    /// Stars within this chordal-scale distance of the south pole count as infinity.
    pub infinity_tol: f64,
    pub roots: RootOptions,
}

impl Default for StellarOptions {
    fn default() -> Self {
        StellarOptions {
            tol: 1e-10,
            infinity_tol: 1e-12,
            roots: RootOptions::default(),
        }
    }
}

impl StellarOptions {
    pub fn with_tol(tol: f64) -> Self {
        StellarOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Homogeneous form `F(x, y) = sum_k f_k x^k y^{n-k}`.
fn binary_form(coeffs: &[C64], x: C64, y: C64) -> C64 {
    let n = coeffs.len() - 1;
    let mut acc = ZERO;
    let mut xp = C64::new(1.0, 0.0);
    let ypows: Vec<C64> = (0..=n)
        .scan(C64::new(1.0, 0.0), |s, _| {
            let cur = *s;
            *s *= y;
            Some(cur)
        })
        .collect();
    for (k, &c) in coeffs.iter().enumerate() {
        acc += c * xp * ypows[n - k];
        xp *= x;
    }
    acc
}

/// Coefficients in `w` of `F(px w - conj(py), py w + conj(px))`, with the
/// magnitude of the terms summed into each (their rounding scale).
fn rotated_chart(coeffs: &[C64], px: C64, py: C64) -> (Vec<C64>, Vec<f64>) {
    let n = coeffs.len() - 1;
    let x = [-py.conj(), px];
    let y = [px.conj(), py];
    let mut xpow = vec![vec![C64::new(1.0, 0.0)]];
    let mut ypow = vec![vec![C64::new(1.0, 0.0)]];
    for k in 1..=n {
        xpow.push(poly::mul(&xpow[k - 1], &x));
        ypow.push(poly::mul(&ypow[k - 1], &y));
    }
    let mut out = vec![ZERO; n + 1];
    let mut mags = vec![0.0; n + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let ax: Vec<C64> = xpow[k].iter().map(|t| C64::new(t.norm(), 0.0)).collect();
        let ay: Vec<C64> = ypow[n - k]
            .iter()
            .map(|t| C64::new(t.norm(), 0.0))
            .collect();
        let bound = poly::mul(&ax, &ay);
        let term = poly::mul(&xpow[k], &ypow[n - k]);
        for ((o, m), (t, b)) in out
            .iter_mut()
            .zip(mags.iter_mut())
            .zip(term.iter().zip(&bound))
        {
            *o += c * t;
            *m += c.norm() * b.re;
        }
    }
    (out, mags)
}

/// `|f(z)| / max(1,|z|)^n`, evaluated without overflow.
fn scaled_residual(coeffs: &[C64], z: C64) -> f64 {
    if z.norm() <= 1.0 {
        poly::eval(coeffs, z).norm()
    } else {
        let rev: Vec<C64> = coeffs.iter().rev().copied().collect();
        poly::eval(&rev, z.inv()).norm()
    }
}

fn refine_in_chart(coeffs: &[C64], z: C64, multiplicity: usize) -> C64 {
    let rev: Vec<C64> = coeffs.iter().rev().copied().collect();
    let (chart, start, inverted) = if z.norm() <= 1.0 {
        (coeffs, z, false)
    } else {
        (rev.as_slice(), z.inv(), true)
    };
    let d = poly::nth_derivative(chart, multiplicity - 1);
    if d.len() < 2 {
        return z;
    }
    let w = roots::newton_polish(&d, start, 8);
    if (w - start).norm() > 1e-6 * (1.0 + start.norm()) {
        return z;
    }
    if inverted {
        w.inv()
    } else {
        w
    }
}

fn azimuth_order(a: &C64, b: &C64) -> Ordering {
    let pa = sphere::stereo_to_sphere(*a);
    let pb = sphere::stereo_to_sphere(*b);
    pa.phi()
        .total_cmp(&pb.phi())
        .then(pa.theta().total_cmp(&pb.theta()))
}

/// All 2S stars of a state.
///
/// Root finding runs in a rotated chart whose point at infinity sits where
/// the stellar form is largest, i.e. far from every star, so stars near or at
/// the south pole are located as ordinary roots. They are mapped back and
/// polished in whichever of the `z` and `1/z` charts is bounded.
pub fn constellation_from_state(state: &SpinState, opts: &StellarOptions) -> Result<Constellation> {
    let label = state.label();
    let n = label.two_s() as usize;
    if n == 0 {
        return Constellation::new(label, Vec::new(), 0);
    }
    let f = stellar_polynomial(state).coefficients;
    let fmax = f.iter().map(|c| c.norm()).fold(0.0, f64::max);

    let (px, py) = fibonacci_points(2 * n + 8)
        .into_iter()
        .map(|p| p.spinor())
        .max_by(|a, b| {
            binary_form(&f, a.0, a.1)
                .norm()
                .total_cmp(&binary_form(&f, b.0, b.1).norm())
        })
        .expect("candidate set is nonempty");
    let (g, mags) = rotated_chart(&f, px, py);
    let clusters = roots::find_roots_scaled(&g, &mags, &opts.roots)
        .ok_or_else(|| Error::NonConvergence("root finder produced no finite roots".into()))?;

    let mut finite = Vec::with_capacity(n);
    let mut infinity_count = 0;
    for cl in &clusters {
        let x = px * cl.center - py.conj();
        let y = py * cl.center + px.conj();
        let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if y.norm() <= opts.infinity_tol * norm {
            infinity_count += cl.multiplicity;
            continue;
        }
        let z = refine_in_chart(&f, x / y, cl.multiplicity);
        let residual = scaled_residual(&f, z);
        if !(residual <= opts.tol * fmax) {
            return Err(Error::NonConvergence(format!(
                "root {z} has residual {residual:e} above {:e}",
                opts.tol * fmax
            )));
        }
        finite.extend(std::iter::repeat_n(z, cl.multiplicity));
    }
    finite.sort_by(azimuth_order);
    Constellation::new(label, finite, infinity_count)
}

fn signed_elementary(roots: &[C64]) -> Vec<C64> {
    // coefficients of prod (z - r), ascending
    let e = poly::elementary_symmetric(roots);
    let d = roots.len();
    (0..=d)
        .map(|k| {
            if (d - k) % 2 == 1 {
                -e[d - k]
            } else {
                e[d - k]
            }
        })
        .collect()
}

/// Rebuilds the state from its stars through the Vieta relations.
///
/// Roots outside the unit disk enter through `prod (1 - z/r)`, whose
/// coefficients are elementary symmetric polynomials of `1/r`; this keeps
/// every intermediate bounded. Normalization and the global phase
/// (highest nonzero amplitude real positive) are then fixed.
pub fn state_from_constellation(c: &Constellation) -> SpinState {
    let (small, large): (Vec<C64>, Vec<C64>) = c.finite_roots.iter().partition(|z| z.norm() <= 1.0);
    let inner = signed_elementary(&small);
    let inv: Vec<C64> = large.iter().map(|z| z.inv()).collect();
    let e_inv = poly::elementary_symmetric(&inv);
    let outer: Vec<C64> = e_inv
        .iter()
        .enumerate()
        .map(|(j, &e)| if j % 2 == 1 { -e } else { e })
        .collect();
    let mut f = poly::mul(&inner, &outer);
    f.resize(c.label.dim(), ZERO);
    StellarPolynomial {
        label: c.label,
        coefficients: f,
    }
    .to_state()
    .expect("product of linear factors is nonzero")
    .with_canonical_phase()
}

/// State whose stars are the given sphere points, built from the homogeneous
/// factors `cos(theta/2) z - sin(theta/2) e^{-i phi}`.
pub fn state_from_points(label: SpinLabel, points: &[SpherePoint]) -> Result<SpinState> {
    if points.len() != label.two_s() as usize {
        return Err(Error::invalid(format!(
            "{} points for 2S = {}",
            points.len(),
            label.two_s()
        )));
    }
    let mut f = vec![C64::new(1.0, 0.0)];
    for p in points {
        let (x, y) = p.spinor();
        f = poly::mul(&f, &[-x, y]);
    }
    StellarPolynomial::new(label, f)?
        .to_state()
        .map(SpinState::with_canonical_phase)
}
