//! Motion of the stars under a spin Hamiltonian.
//!
//! On stellar polynomials `f(z) = sum_k sqrt(C(2S,k)) psi_k z^k` a Hamiltonian
//! acts as a differential operator `sum_n h_n(z) d^n/dz^n`. A root `z_k` of `f`
//! then moves with
//!
//! ```text
//! dz_k/dt = i sum_n h_n(z_k) n! e_{n-1}({1 / (z_k - z_j)}_{j != k})
//! ```
//!
//! which is `i (H f)(z_k) / f'(z_k)`. These roots are the variables written
//! `z_k^*` in the usual coherent-state form of the equations. Integration is
//! adaptive Dormand-Prince 5(4); while stars nearly coincide or leave for
//! infinity the trajectory is bridged with exact evolution and re-rooting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::assignment;
use crate::error::{Error, Result};
use crate::poly;
use crate::roots;
use crate::sphere::{self, ExtendedComplex};
use crate::spin::{self, SpinLabel};
use crate::state::SpinState;
use crate::stellar::{constellation_from_state, Constellation, StellarOptions};

/// Stars closer than this chordal distance make the velocity field singular.
pub const COLLISION_TOL: f64 = 1e-6;
/// Stars beyond this modulus are treated as escaping to infinity.
pub const FAR_RADIUS: f64 = 1e8;
/// The exact-evolution bridge ends once stars are this far apart ...
const EXIT_SEPARATION: f64 = 1e-3;
/// ... and this close to the origin.
const EXIT_RADIUS: f64 = 1e7;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Named spin Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Sz,
    /// `Sz^2` (Kerr).
    Sz2,
    Sx,
    Sy,
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Sz" => Ok(Builtin::Sz),
            "Sz2" => Ok(Builtin::Sz2),
            "Sx" => Ok(Builtin::Sx),
            "Sy" => Ok(Builtin::Sy),
            other => Err(Error::invalid(format!(
                "unknown builtin Hamiltonian {other:?} (expected Sz, Sz2, Sx or Sy)"
            ))),
        }
    }
}

/// Hermitian Hamiltonian with its differential symbol and eigensystem.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    label: SpinLabel,
    matrix: DMatrix<C64>,
    symbol: Vec<Vec<C64>>,
    /// symbol in the reciprocal chart `w = 1/z` (reversed basis)
    flipped: Vec<Vec<C64>>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

/// `A = D H D^{-1}`: the action of `H` on stellar-polynomial coefficients.
fn coefficient_operator(label: SpinLabel, h: &DMatrix<C64>) -> DMatrix<C64> {
    let d = spin::sqrt_binomials(label);
    DMatrix::from_fn(h.nrows(), h.ncols(), |j, k| h[(j, k)] * (d[j] / d[k]))
}

/// Coefficients `h_n(z)` (ascending in z) with `A z^k = sum_n h_n(z) d^n z^k`.
///
/// Solved upward in n from the monomials: `h_n = (A z^n - sum_{j<n} h_j
/// n!/(n-j)! z^{n-j}) / n!`. `h_n` can have degree up to `2S + n`.
fn symbol_of(a: &DMatrix<C64>) -> Vec<Vec<C64>> {
    let dim = a.nrows();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let mut factorial = 1.0;
    for n in 0..dim {
        if n > 0 {
            factorial *= n as f64;
        }
        let mut h: Vec<C64> = a.column(n).iter().copied().collect();
        h.resize(dim + n, ZERO);
        // n! / (n-j)!
        let mut coef = vec![1.0; n];
        for j in 1..n {
            coef[j] = coef[j - 1] * (n - j + 1) as f64;
        }
        for (j, hj) in out.iter().enumerate() {
            let shift = n - j;
            for (i, c) in hj.iter().enumerate() {
                h[i + shift] -= c * coef[j];
            }
        }
        for c in h.iter_mut() {
            *c /= factorial;
        }
        out.push(h);
    }
    out
}

/// The differential symbol of a Hermitian matrix in the `|S,m>` basis.
pub fn differential_symbol(label: SpinLabel, matrix: &DMatrix<C64>) -> Vec<Vec<C64>> {
    symbol_of(&coefficient_operator(label, matrix))
}

impl HamiltonianSpec {
    pub fn new(label: SpinLabel, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = label.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::invalid(format!(
                "Hamiltonian is {}x{}, expected {dim}x{dim} for {label}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::invalid("Hamiltonian has non-finite entries"));
        }
        let scale = matrix.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let asym = (&matrix - matrix.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "Hamiltonian is not Hermitian (max |H - H^dagger| = {asym:e})"
            )));
        }
        // symmetrize away the admitted rounding
        let matrix = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let a = coefficient_operator(label, &matrix);
        let symbol = symbol_of(&a);
        let flipped = symbol_of(&DMatrix::from_fn(dim, dim, |j, k| {
            a[(dim - 1 - j, dim - 1 - k)]
        }));
        let eig = matrix.clone().symmetric_eigen();
        Ok(HamiltonianSpec {
            label,
            matrix,
            symbol,
            flipped,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn builtin(label: SpinLabel, which: Builtin, coupling: f64) -> Self {
        let op = match which {
            Builtin::Sz => spin::sz(label),
            Builtin::Sz2 => {
                let z = spin::sz(label);
                &z * &z
            }
            Builtin::Sx => spin::sx(label),
            Builtin::Sy => spin::sy(label),
        };
        HamiltonianSpec::new(label, op * C64::new(coupling, 0.0))
            .expect("spin operators are Hermitian")
    }

    /// `(A + A^dagger)/2` with i.i.d. standard complex Gaussian entries in `A`.
    pub fn random<R: Rng + ?Sized>(label: SpinLabel, rng: &mut R) -> Self {
        let dim = label.dim();
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        HamiltonianSpec::new(label, (&a + a.adjoint()) * C64::new(0.5, 0.0))
            .expect("Hermitian by construction")
    }

    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `h_n` for n = 0..2S, coefficients ascending in z.
    pub fn symbol(&self) -> &[Vec<C64>] {
        &self.symbol
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// `sum_n h_n(z) p^{(n)}(z)` for a polynomial of degree at most 2S.
    pub fn apply_symbol(&self, p: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO];
        let mut d = p.to_vec();
        for h in &self.symbol {
            if d.iter().all(|c| *c == ZERO) {
                break;
            }
            poly::add_assign(&mut out, &poly::mul(h, &d));
            d = poly::derivative(&d);
        }
        out
    }

    fn check_label(&self, label: SpinLabel) -> Result<()> {
        if label != self.label {
            return Err(Error::LabelMismatch(self.label.two_s(), label.two_s()));
        }
        Ok(())
    }
}

/// `exp(-i H t) psi`.
pub fn evolve_exact(state: &SpinState, h: &HamiltonianSpec, t: f64) -> Result<SpinState> {
    h.check_label(state.label())?;
    let v = &h.eigenvectors;
    let mut coeffs = v.adjoint() * state.to_vector();
    for (c, l) in coeffs.iter_mut().zip(h.eigenvalues.iter()) {
        *c *= C64::from_polar(1.0, -l * t);
    }
    SpinState::new(state.label(), (v * coeffs).iter().copied().collect())
}

/// `<psi|H|psi>`.
pub fn energy(state: &SpinState, h: &HamiltonianSpec) -> Result<f64> {
    h.check_label(state.label())?;
    Ok(state.expectation(&h.matrix).re)
}

fn min_pair_chordal(roots: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min(sphere::chordal(roots[i].into(), roots[j].into()));
        }
    }
    best
}

fn check_regular(c: &Constellation) -> Result<()> {
    if c.infinity_count() > 0 {
        return Err(Error::DegenerateConstellation(format!(
            "{} star(s) at infinity",
            c.infinity_count()
        )));
    }
    regular_roots(c.finite_roots())
}

fn regular_roots(roots: &[C64]) -> Result<()> {
    if let Some(z) = roots.iter().find(|z| !(z.norm() <= FAR_RADIUS)) {
        return Err(Error::DegenerateConstellation(format!(
            "star at {z} is escaping to infinity"
        )));
    }
    let d = min_pair_chordal(roots);
    if d < COLLISION_TOL {
        return Err(Error::DegenerateConstellation(format!(
            "stars {d:e} apart (chordal)"
        )));
    }
    Ok(())
}

/// `i sum_n h_n(z_k) n! e_{n-1}({1/(z_k - z_j)})` for one star of `roots`.
fn symbol_velocity(symbol: &[Vec<C64>], roots: &[C64], k: usize) -> C64 {
    let zk = roots[k];
    let w: Vec<C64> = roots
        .iter()
        .enumerate()
        .filter(|&(j, z)| j != k && z.is_finite())
        .map(|(_, &z)| (zk - z).inv())
        .collect();
    let e = poly::elementary_symmetric(&w);
    let mut acc = ZERO;
    let mut factorial = 1.0;
    for (n, h) in symbol.iter().enumerate().skip(1) {
        factorial *= n as f64;
        if n > e.len() {
            break;
        }
        acc += poly::eval(h, zk) * e[n - 1] * factorial;
    }
    I * acc
}

fn velocities_unchecked(h: &HamiltonianSpec, roots: &[C64]) -> Vec<C64> {
    // reciprocal chart for stars outside the unit disk; a star at 0 is at
    // infinity there and drops out of the factorization
    let inverted: Vec<C64> = roots
        .iter()
        .map(|&z| {
            if z == ZERO {
                C64::new(f64::INFINITY, 0.0)
            } else {
                z.inv()
            }
        })
        .collect();
    (0..roots.len())
        .map(|k| {
            let z = roots[k];
            if z.norm() <= 1.0 {
                symbol_velocity(&h.symbol, roots, k)
            } else {
                -z * z * symbol_velocity(&h.flipped, &inverted, k)
            }
        })
        .collect()
}

/// Velocities `dz_k/dt` of the stellar roots, aligned with `finite_roots()`.
pub fn star_velocities(c: &Constellation, h: &HamiltonianSpec) -> Result<Vec<C64>> {
    h.check_label(c.label())?;
    check_regular(c)?;
    Ok(velocities_unchecked(h, c.finite_roots()))
}

/// Same velocities from `i (A f)(z_k) / f'(z_k)` with the matrix action,
/// bypassing the symbol; used to cross-check [`star_velocities`].
pub fn direct_velocities(c: &Constellation, h: &HamiltonianSpec) -> Result<Vec<C64>> {
    h.check_label(c.label())?;
    check_regular(c)?;
    let mut f = poly::from_roots(c.finite_roots());
    f.resize(c.label().dim(), ZERO);
    let a = coefficient_operator(c.label(), &h.matrix);
    let af: Vec<C64> = (a * DVector::from_vec(f.clone())).iter().copied().collect();
    let df = poly::derivative(&f);
    Ok(c.finite_roots()
        .iter()
        .map(|&z| I * poly::eval(&af, z) / poly::eval(&df, z))
        .collect())
}

/// `max_k |dz_k/dt|`, zero exactly for stationary constellations.
///
/// Coincident stars are handled as one cluster of multiplicity m: it
/// stays together only if `(A f)` vanishes to order m-1 at the cluster, and
/// then moves with `i (A f)^{(m-1)} / f^{(m)}`. A cluster that would split
/// gives an infinite residual.
pub fn equilibrium_residual(c: &Constellation, h: &HamiltonianSpec) -> Result<f64> {
    h.check_label(c.label())?;
    if c.infinity_count() > 0 {
        return Err(Error::DegenerateConstellation(format!(
            "{} star(s) at infinity",
            c.infinity_count()
        )));
    }
    let label = c.label();
    let mut f = poly::from_roots(c.finite_roots());
    f.resize(label.dim(), ZERO);
    let a = coefficient_operator(label, &h.matrix);
    let af: Vec<C64> = (a * DVector::from_vec(f.clone())).iter().copied().collect();
    let af_mags: Vec<f64> = af.iter().map(|z| z.norm()).collect();
    let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max) * h.spectral_norm().max(1e-300);

    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for &z in c.finite_roots() {
        match clusters
            .iter_mut()
            .find(|(w, _)| (z - *w).norm() <= 1e-12 * (1.0 + w.norm()))
        {
            Some(cl) => cl.1 += 1,
            None => clusters.push((z, 1)),
        }
    }
    let mut worst: f64 = 0.0;
    for (center, m) in clusters {
        if m > 1 {
            let splits = !roots::is_multiple_root(
                &af,
                &af_mags.iter().map(|v| v.max(scale)).collect::<Vec<_>>(),
                center,
                m - 1,
                1e-12,
            );
            if splits {
                return Ok(f64::INFINITY);
            }
        }
        let num = poly::eval(&poly::nth_derivative(&af, m - 1), center);
        let den = poly::eval(&poly::nth_derivative(&f, m), center);
        worst = worst.max((num / den).norm());
    }
    Ok(worst)
}

/// Integration settings for [`evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Largest step; `None` means `0.01 / ||H||_2`.
    pub dt_max: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Snapshot count after t = 0, evenly spaced; 0 records every accepted step.
    pub samples: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt_max: None,
            rtol: 1e-9,
            atol: 1e-12,
            samples: 0,
        }
    }
}

/// Star positions over time. Snapshots keep star identity: consecutive
/// constellations list their stars in matched order.
#[derive(Clone, Debug, PartialEq)]
pub struct StarTrajectory {
    label: SpinLabel,
    times: Vec<f64>,
    snapshots: Vec<Constellation>,
    exact: Vec<bool>,
    fallback_intervals: Vec<(f64, f64)>,
}

impl StarTrajectory {
    pub fn label(&self) -> SpinLabel {
        self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Constellation] {
        &self.snapshots
    }

    /// Whether each snapshot came from the exact-evolution bridge.
    pub fn fallback_flags(&self) -> &[bool] {
        &self.exact
    }

    pub fn fallback_intervals(&self) -> &[(f64, f64)] {
        &self.fallback_intervals
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, &Constellation) {
        (
            *self.times.last().expect("nonempty"),
            self.snapshots.last().expect("nonempty"),
        )
    }
}

// Dormand-Prince 5(4) tableau (the field is autonomous, so no nodes)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Step {
    roots: Vec<C64>,
    err: f64,
    /// velocity at the new point, reused as the next first stage
    last: Vec<C64>,
}

/// One Dormand-Prince step from `z` with first stage `k1`; `Err` when a stage
/// leaves the regular region.
#[allow(clippy::needless_range_loop)]
fn dp_step(
    h: &HamiltonianSpec,
    z: &[C64],
    k1: &[C64],
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Step> {
    let n = z.len();
    let mut k: Vec<Vec<C64>> = Vec::with_capacity(7);
    k.push(k1.to_vec());
    for s in 1..7 {
        let stage: Vec<C64> = (0..n)
            .map(|i| z[i] + (0..s).map(|j| k[j][i] * (A[s][j] * dt)).sum::<C64>())
            .collect();
        regular_roots(&stage)?;
        k.push(velocities_unchecked(h, &stage));
    }
    let new: Vec<C64> = (0..n)
        .map(|i| z[i] + (0..7).map(|s| k[s][i] * (B5[s] * dt)).sum::<C64>())
        .collect();
    let err = (0..n)
        .map(|i| {
            let e: C64 = (0..7).map(|s| k[s][i] * ((B5[s] - B4[s]) * dt)).sum();
            e.norm() / (opts.atol + opts.rtol * z[i].norm().max(new[i].norm()))
        })
        .fold(0.0, f64::max);
    let last = k.pop().expect("seven stages");
    Ok(Step {
        roots: new,
        err,
        last,
    })
}

/// Reorders the stars of `next` to follow `prev` (minimal total chordal cost).
fn match_to(prev: &Constellation, next: &Constellation) -> Result<Constellation> {
    let a = prev.stars();
    let b = next.stars();
    let (perm, _) = assignment::match_stars(&a, &b);
    let ordered: Vec<ExtendedComplex> = perm.iter().map(|&j| b[j]).collect();
    // stars at infinity carry no identity; keep finite ones in matched order
    Constellation::from_stars(next.label(), &ordered)
}

fn clear_of_degeneracy(c: &Constellation) -> bool {
    c.infinity_count() == 0
        && c.finite_roots().iter().all(|z| z.norm() <= EXIT_RADIUS)
        && min_pair_chordal(c.finite_roots()) >= EXIT_SEPARATION
}

/// Integrates the star equations of motion from `state` up to `t_final`.
///
/// While the constellation is degenerate (coincident stars, a star at or
/// near infinity) the stars are obtained from exact evolution and matched
/// for continuity; those stretches are listed in `fallback_intervals`.
pub fn evolve(
    state: &SpinState,
    h: &HamiltonianSpec,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<StarTrajectory> {
    h.check_label(state.label())?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::range(
            "t",
            format!("{t_final} must be finite and >= 0"),
        ));
    }
    let norm = h.spectral_norm();
    let dt_max = match opts.dt_max {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(d) => return Err(Error::range("dt_max", format!("{d} must be positive"))),
        None if norm > 0.0 => 0.01 / norm,
        None => t_final.max(1.0),
    };
    let root_opts = StellarOptions::default();
    let start = constellation_from_state(state, &root_opts)?;
    let mut traj = StarTrajectory {
        label: state.label(),
        times: vec![0.0],
        snapshots: vec![start.clone()],
        exact: vec![false],
        fallback_intervals: Vec::new(),
    };
    if t_final == 0.0 {
        return Ok(traj);
    }
    let targets: Vec<f64> = if opts.samples == 0 {
        vec![t_final]
    } else {
        (1..=opts.samples)
            .map(|i| {
                if i == opts.samples {
                    t_final
                } else {
                    t_final * i as f64 / opts.samples as f64
                }
            })
            .collect()
    };
    let mut next_target = 0;
    let mut t = 0.0;
    let mut current = start;
    let mut bridging = check_regular(&current).is_err();
    let mut bridge_start = 0.0;
    let mut bridge_step = 0.0;
    let mut dt = dt_max;
    let mut first_stage: Option<Vec<C64>> = None;
    let floor = 1e-14 * t_final;

    // records the snapshot if it lands on an output time (or always, when
    // every step is wanted)
    let record = |traj: &mut StarTrajectory, t: f64, c: &Constellation, exact: bool, hit: bool| {
        if opts.samples == 0 || hit {
            traj.times.push(t);
            traj.snapshots.push(c.clone());
            traj.exact.push(exact);
        }
    };

    if bridging {
        bridge_step = (dt_max * 1e-6).min(t_final);
    }
    while next_target < targets.len() {
        let target = targets[next_target];
        if bridging {
            let step = bridge_step.min(target - t);
            let t_new = if step >= target - t { target } else { t + step };
            let exact_state = evolve_exact(state, h, t_new)?;
            let found = constellation_from_state(&exact_state, &root_opts)?;
            let matched = match_to(&current, &found)?;
            let hit = t_new == target;
            t = t_new;
            record(&mut traj, t, &matched, true, hit);
            current = matched;
            if hit {
                next_target += 1;
            }
            bridge_step = (2.0 * bridge_step).min(dt_max);
            if clear_of_degeneracy(&current) || next_target == targets.len() {
                traj.fallback_intervals.push((bridge_start, t));
                bridging = false;
                first_stage = None;
                dt = bridge_step;
            }
            continue;
        }

        let remaining = target - t;
        let step = dt.min(dt_max).min(remaining);
        let lands = step >= remaining;
        if first_stage.is_none() {
            first_stage = Some(velocities_unchecked(h, current.finite_roots()));
        }
        let k1 = first_stage.as_deref().expect("just set");
        match dp_step(h, current.finite_roots(), k1, step, opts) {
            Err(Error::DegenerateConstellation(_)) => {
                bridging = true;
                bridge_start = t;
                bridge_step = (step * 1e-3).max(floor).min(dt_max);
            }
            Err(e) => return Err(e),
            Ok(Step {
                roots: new,
                err,
                last,
            }) => {
                if err <= 1.0 {
                    first_stage = Some(last);
                    t = if lands { target } else { t + step };
                    let c = Constellation::new(current.label(), new, 0)?;
                    record(&mut traj, t, &c, false, lands);
                    current = c;
                    if lands {
                        next_target += 1;
                    }
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if !lands || grow < 1.0 {
                        dt = step * grow;
                    }
                    if check_regular(&current).is_err() {
                        bridging = true;
                        bridge_start = t;
                        bridge_step = (step * 1e-3).max(floor).min(dt_max);
                    }
                } else {
                    dt = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    if dt < floor {
                        return Err(Error::StepUnderflow { t, step: dt });
                    }
                }
            }
        }
    }
    Ok(traj)
}
