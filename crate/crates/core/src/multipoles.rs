//! Husimi Q function, state multipoles and Cartesian moments.
//!
//! Multipoles are `rho_Kq = Tr(rho T_Kq^dagger)` with the orthonormal
//! irreducible tensors `<S,m'|T_Kq|S,m> = sqrt((2K+1)/(2S+1)) <S,m;K,q|S,m'>`
//! (Condon-Shortley phases). Lengths are `w_K = sum_q |rho_Kq|^2` and the
//! cumulative strength is `A_M = w_1 + ... + w_M`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;
use crate::spin::{self, SpinLabel};
use crate::state::{coherent_state, SpinState};
use crate::ExtendedComplex;

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn halve(two_x: i64) -> Option<i64> {
    (two_x % 2 == 0).then_some(two_x / 2)
}

/// Clebsch-Gordan coefficient `<j1,m1;j2,m2|J,M>` with every argument doubled.
///
/// Evaluated with the Racah sum in exact rational arithmetic. Returns zero
/// whenever a selection rule fails (including inconsistent parities).
pub fn clebsch_gordan(
    two_j1: i64,
    two_m1: i64,
    two_j2: i64,
    two_m2: i64,
    two_j: i64,
    two_m: i64,
) -> f64 {
    if two_m1 + two_m2 != two_m
        || two_j1 < 0
        || two_j2 < 0
        || two_j < 0
        || two_m1.abs() > two_j1
        || two_m2.abs() > two_j2
        || two_m.abs() > two_j
    {
        return 0.0;
    }
    let ints = (|| {
        Some([
            halve(two_j1 + two_j2 - two_j)?,
            halve(two_j1 - two_j2 + two_j)?,
            halve(-two_j1 + two_j2 + two_j)?,
            halve(two_j1 + two_j2 + two_j)?,
            halve(two_j + two_m)?,
            halve(two_j - two_m)?,
            halve(two_j1 - two_m1)?,
            halve(two_j1 + two_m1)?,
            halve(two_j2 - two_m2)?,
            halve(two_j2 + two_m2)?,
        ])
    })();
    let Some([a, b, c, s, jpm, jmm, j1mm, j1pm, j2mm, j2pm]) = ints else {
        return 0.0;
    };
    if a < 0 || b < 0 || c < 0 {
        return 0.0;
    }
    // J - j2 + m1 and J - j1 - m2, integers once the above are
    let e1 = (two_j - two_j2 + two_m1) / 2;
    let e2 = (two_j - two_j1 - two_m2) / 2;

    let prefactor = BigRational::new(
        BigInt::from(two_j + 1)
            * factorial(a)
            * factorial(b)
            * factorial(c)
            * factorial(jpm)
            * factorial(jmm)
            * factorial(j1mm)
            * factorial(j1pm)
            * factorial(j2mm)
            * factorial(j2pm),
        factorial(s + 1),
    );
    let mut sum = BigRational::zero();
    let kmin = 0.max(-e1).max(-e2);
    let kmax = a.min(j1mm).min(j2pm);
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(a - k)
            * factorial(j1mm - k)
            * factorial(j2pm - k)
            * factorial(e1 + k)
            * factorial(e2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let magnitude = (prefactor * &sum * &sum).to_f64().unwrap_or(0.0).sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Nonzero elements of every `T_Kq` for one spin: `t[K][q+K][k]` is
/// `<k+q|T_Kq|k>` in storage indices (zero where `k+q` is out of range).
struct TensorTable {
    t: Vec<Vec<Vec<f64>>>,
}

impl TensorTable {
    fn build(label: SpinLabel) -> Self {
        let n = label.two_s() as i64;
        let dim = label.dim();
        let t = (0..=n)
            .map(|kk| {
                let norm = ((2 * kk + 1) as f64 / (n + 1) as f64).sqrt();
                (-kk..=kk)
                    .map(|q| {
                        (0..dim as i64)
                            .map(|k| {
                                let target = k + q;
                                if target < 0 || target > n {
                                    return 0.0;
                                }
                                let two_m = 2 * k - n;
                                norm * clebsch_gordan(n, two_m, 2 * kk, 2 * q, n, two_m + 2 * q)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TensorTable { t }
    }

    fn get(label: SpinLabel) -> Arc<TensorTable> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<TensorTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache
            .lock()
            .expect("tensor cache poisoned")
            .get(&label.two_s())
        {
            return Arc::clone(t);
        }
        // built outside the lock; a racing duplicate is harmless
        let table = Arc::new(TensorTable::build(label));
        cache
            .lock()
            .expect("tensor cache poisoned")
            .entry(label.two_s())
            .or_insert(table)
            .clone()
    }
}

fn check_kq(label: SpinLabel, k: u32, q: i32) -> Result<()> {
    if k > label.two_s() || q.unsigned_abs() > k {
        return Err(Error::range(
            "multipole index",
            format!("K={k}, q={q} outside 0 <= K <= {}, |q| <= K", label.two_s()),
        ));
    }
    Ok(())
}

/// Matrix of `T_Kq` in the `|S,m>` basis.
pub fn tensor_operator(label: SpinLabel, k: u32, q: i32) -> Result<DMatrix<C64>> {
    check_kq(label, k, q)?;
    let table = TensorTable::get(label);
    let col = &table.t[k as usize][(q + k as i32) as usize];
    let dim = label.dim();
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        if r as i64 == c as i64 + q as i64 {
            C64::new(col[c], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// `rho_Kq` for all K, q, with lengths and cumulative strengths.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleSpectrum {
    label: SpinLabel,
    components: Vec<Vec<C64>>,
    lengths: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MultipoleSpectrum {
    /// `components[K][q+K]`; lengths and cumulatives are derived.
    pub fn from_components(label: SpinLabel, components: Vec<Vec<C64>>) -> Result<Self> {
        let ok = components.len() == label.dim()
            && components
                .iter()
                .enumerate()
                .all(|(k, row)| row.len() == 2 * k + 1);
        if !ok {
            return Err(Error::invalid(format!(
                "multipole table does not match {label}"
            )));
        }
        let lengths: Vec<f64> = components
            .iter()
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum())
            .collect();
        let cumulative = lengths[1..]
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(MultipoleSpectrum {
            label,
            components,
            lengths,
            cumulative,
        })
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn component(&self, k: u32, q: i32) -> Result<C64> {
        check_kq(self.label, k, q)?;
        Ok(self.components[k as usize][(q + k as i32) as usize])
    }

    /// `(K, q, rho_Kq)` in order of increasing K, then q.
    pub fn iter(&self) -> impl Iterator<Item = (u32, i32, C64)> + '_ {
        self.components.iter().enumerate().flat_map(|(k, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, &c)| (k as u32, i as i32 - k as i32, c))
        })
    }

    /// `w_K` for K = 0..2S.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `A_M` for M = 1..2S (index M-1).
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Keeps orders up to `m`; the cumulative list shrinks accordingly.
    pub fn truncated(&self, m: u32) -> Result<Self> {
        if m > self.label.two_s() {
            return Err(Error::range(
                "M",
                format!("{m} exceeds 2S = {}", self.label.two_s()),
            ));
        }
        let mut out = self.clone();
        out.components.truncate(m as usize + 1);
        out.lengths.truncate(m as usize + 1);
        out.cumulative.truncate(m as usize);
        Ok(out)
    }
}

fn components_with<F>(label: SpinLabel, upto: u32, rho: F) -> Vec<Vec<C64>>
where
    F: Fn(usize, usize) -> C64,
{
    let table = TensorTable::get(label);
    let dim = label.dim() as i64;
    (0..=upto as usize)
        .map(|k| {
            (0..=2 * k)
                .map(|i| {
                    let q = i as i64 - k as i64;
                    let t = &table.t[k][i];
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0.max(-q)..dim.min(dim - q) {
                        acc += rho((b + q) as usize, b as usize) * t[b as usize];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Multipole spectrum of a pure state.
pub fn multipoles(state: &SpinState) -> MultipoleSpectrum {
    let label = state.label();
    let psi = state.amplitudes();
    let comps = components_with(label, label.two_s(), |a, b| psi[a] * psi[b].conj());
    MultipoleSpectrum::from_components(label, comps).expect("table has the right shape")
}

/// Multipole spectrum of a density matrix (mixed states included).
pub fn density_multipoles(label: SpinLabel, rho: &DMatrix<C64>) -> Result<MultipoleSpectrum> {
    if rho.nrows() != label.dim() || rho.ncols() != label.dim() {
        return Err(Error::invalid(format!(
            "density matrix is {}x{}, expected {1}x{1}",
            rho.nrows(),
            label.dim()
        )));
    }
    let comps = components_with(label, label.two_s(), |a, b| rho[(a, b)]);
    MultipoleSpectrum::from_components(label, comps)
}

/// `A_M` read from a spectrum.
pub fn cumulative_quantumness(spec: &MultipoleSpectrum, m: u32) -> Result<f64> {
    if m == 0 || m as usize > spec.cumulative.len() {
        return Err(Error::range(
            "M",
            format!("{m} outside 1..={}", spec.cumulative.len()),
        ));
    }
    Ok(spec.cumulative[m as usize - 1])
}

/// `A_M` of a state, computing only the orders that enter it.
///
/// Sums the same terms in the same order as [`cumulative_quantumness`] on the
/// full spectrum, so the two agree bit for bit.
pub fn state_quantumness(state: &SpinState, m: u32) -> Result<f64> {
    let label = state.label();
    if m == 0 || m > label.two_s() {
        return Err(Error::range(
            "M",
            format!("{m} outside 1..={}", label.two_s()),
        ));
    }
    let psi = state.amplitudes();
    let comps = components_with(label, m, |a, b| psi[a] * psi[b].conj());
    let mut acc = 0.0;
    for row in &comps[1..] {
        let w: f64 = row.iter().map(|c| c.norm_sqr()).sum();
        acc += w;
    }
    Ok(acc)
}

/// Orthonormal spherical harmonic `Y_Kq(theta, phi)` with the Condon-Shortley phase.
pub fn spherical_harmonic(k: u32, q: i32, p: SpherePoint) -> Result<C64> {
    if q.unsigned_abs() > k {
        return Err(Error::range(
            "spherical harmonic",
            format!("|q| = {} > K = {k}", q.abs()),
        ));
    }
    let m = q.unsigned_abs();
    let (x, st) = (p.theta().cos(), p.theta().sin());
    // normalized P_m^m, then upward in degree
    let mut pmm = (0.25 / PI).sqrt();
    for i in 1..=m {
        let i = i as f64;
        pmm *= -((2.0 * i + 1.0) / (2.0 * i)).sqrt() * st;
    }
    let value = if k == m {
        pmm
    } else {
        let mf = m as f64;
        let mut prev = pmm;
        let mut cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
        for l in (m + 2)..=k {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
            let next = a * (x * cur - prev / a_prev);
            prev = cur;
            cur = next;
        }
        cur
    };
    let y = C64::from_polar(value, m as f64 * p.phi());
    if q < 0 {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    } else {
        Ok(y)
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Product rule on the sphere: Gauss-Legendre in `cos(theta)`, uniform in phi.
///
/// Exact for band-limited integrands of degree below `min(2 n_theta, n_phi)`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let dphi = TAU / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            for j in 0..n_phi {
                points.push(SpherePoint::new(xi.acos(), j as f64 * dphi));
                weights.push(wi * dphi);
            }
        }
        SphereQuadrature { points, weights }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (SpherePoint, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(SpherePoint) -> f64>(&self, mut f: F) -> f64 {
        self.nodes().map(|(p, w)| w * f(p)).sum()
    }
}

/// `Q(theta, phi) = |<z|psi>|^2` at `z = tan(theta/2) e^{-i phi}`.
///
/// Evaluated through the spinor `(sin(theta/2), cos(theta/2))`, which stays
/// finite at the south pole.
pub fn husimi_q(state: &SpinState, p: SpherePoint) -> f64 {
    let (s, c) = (0.5 * p.theta()).sin_cos();
    let e = C64::from_polar(1.0, p.phi());
    let n = state.label().two_s() as usize;
    let sq = spin::sqrt_binomials(state.label());
    let cpow: Vec<f64> = (0..=n)
        .scan(1.0, |acc, _| {
            let cur = *acc;
            *acc *= c;
            Some(cur)
        })
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    let mut sk = 1.0;
    let mut ek = C64::new(1.0, 0.0);
    for (k, psi) in state.amplitudes().iter().enumerate() {
        acc += psi * ek * (sq[k] * sk * cpow[n - k]);
        sk *= s;
        ek *= e;
    }
    acc.norm_sqr()
}

/// Husimi function sampled on a quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid {
    label: SpinLabel,
    theta: Vec<f64>,
    phi: Vec<f64>,
    /// quadrature weight of each theta row (from `d cos(theta)`)
    theta_weights: Vec<f64>,
    values: Vec<f64>,
}

impl QGrid {
    pub fn label(&self) -> SpinLabel {
        self.label
    }

    /// Polar nodes, ascending.
    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    /// `Q(theta_i, phi_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phi.len() + j]
    }

    /// Values in theta-major order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows `(theta, phi, Q)` in theta-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta.iter().enumerate().flat_map(move |(i, &t)| {
            self.phi
                .iter()
                .enumerate()
                .map(move |(j, &p)| (t, p, self.value(i, j)))
        })
    }

    /// `integral of Q dOmega` under the grid's quadrature rule.
    pub fn integral(&self) -> f64 {
        let dphi = TAU / self.phi.len() as f64;
        self.theta_weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * dphi * (0..self.phi.len()).map(|j| self.value(i, j)).sum::<f64>())
            .sum()
    }
}

/// Q on `n_theta` Gauss-Legendre polar nodes times `n_phi` uniform azimuths.
pub fn q_grid(state: &SpinState, n_theta: usize, n_phi: usize) -> Result<QGrid> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::range(
            "grid size",
            format!("need n_theta, n_phi >= 2, got {n_theta} x {n_phi}"),
        ));
    }
    let (x, w) = gauss_legendre(n_theta);
    // descending cos(theta) gives ascending theta
    let theta: Vec<f64> = x.iter().rev().map(|x| x.acos()).collect();
    let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
    let phi: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
    let mut values = Vec::with_capacity(n_theta * n_phi);
    for &t in &theta {
        for &p in &phi {
            values.push(husimi_q(state, SpherePoint::new(t, p)));
        }
    }
    Ok(QGrid {
        label: state.label(),
        theta,
        phi,
        theta_weights,
        values,
    })
}

/// Uncalibrated integral `int Q(pi - theta, phi) conj(Y_Kq(theta, phi)) dOmega`.
///
/// `Q(theta, phi)` peaks opposite to the spin direction of a coherent
/// state, so Q is first reflected to the physical orientation.
fn raw_integral_components(state: &SpinState, k: u32) -> Vec<C64> {
    let n = state.label().two_s() as usize;
    let kk = k as usize;
    let quad = SphereQuadrature::new(n + kk + 2, 2 * (n + kk) + 1);
    let mut out = vec![C64::new(0.0, 0.0); 2 * kk + 1];
    for (p, w) in quad.nodes() {
        let q = husimi_q(state, SpherePoint::new(PI - p.theta(), p.phi()));
        for (i, o) in out.iter_mut().enumerate() {
            let y = spherical_harmonic(k, i as i32 - k as i32, p).expect("|q| <= K");
            *o += y.conj() * (w * q);
        }
    }
    out
}

/// Proportionality constant between the integral and tensor forms of order K.
///
/// Fixed once per (S, K) as the ratio of the two on the coherent state
/// pointing along +z, whose `rho_K0` never vanishes.
fn integral_constant(label: SpinLabel, k: u32) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache
        .lock()
        .expect("calibration cache poisoned")
        .get(&(label.two_s(), k))
    {
        return *c;
    }
    let reference = coherent_state(label, ExtendedComplex::Infinity);
    let exact = multipoles(&reference).components[k as usize][k as usize];
    let raw = raw_integral_components(&reference, k)[k as usize];
    let c = exact.re / raw.re;
    cache
        .lock()
        .expect("calibration cache poisoned")
        .insert((label.two_s(), k), c);
    c
}

/// Multipoles from quadrature of the Husimi function against spherical
/// harmonics, each order scaled by its calibrated constant. Independent of
/// the tensor tables except through the calibration.
pub fn integral_multipoles(state: &SpinState) -> MultipoleSpectrum {
    let label = state.label();
    let comps = (0..=label.two_s())
        .map(|k| {
            let c = integral_constant(label, k);
            raw_integral_components(state, k)
                .into_iter()
                .map(|v| v * c)
                .collect()
        })
        .collect();
    MultipoleSpectrum::from_components(label, comps).expect("table has the right shape")
}

fn moment_quadrature(label: SpinLabel) -> SphereQuadrature {
    let n = label.two_s() as usize;
    SphereQuadrature::new(n + 4, 2 * (n + 2) + 1)
}

/// `<n_i>` under the normalized Q function.
pub fn dipole(state: &SpinState) -> [f64; 3] {
    let quad = moment_quadrature(state.label());
    let mut norm = 0.0;
    let mut acc = [0.0; 3];
    for (p, w) in quad.nodes() {
        let q = w * husimi_q(state, p);
        let v = p.unit_vector();
        norm += q;
        for i in 0..3 {
            acc[i] += q * v[i];
        }
    }
    acc.map(|a| a / norm)
}

/// `<3 n_i n_j - delta_ij>` under the normalized Q function.
pub fn quadrupole(state: &SpinState) -> [[f64; 3]; 3] {
    let quad = moment_quadrature(state.label());
    let mut norm = 0.0;
    let mut acc = [[0.0; 3]; 3];
    for (p, w) in quad.nodes() {
        let q = w * husimi_q(state, p);
        let v = p.unit_vector();
        norm += q;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                acc[i][j] += q * (3.0 * v[i] * v[j] - delta);
            }
        }
    }
    acc.map(|row| row.map(|a| a / norm))
}
