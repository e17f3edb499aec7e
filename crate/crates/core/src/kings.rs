//! Search for maximally unpolarized constellations (Kings of Quantumness).
//!
//! The cumulative multipole strength `A_M` is minimized directly over the
//! 4S star angles. Each restart screens random constellations, refines the
//! best with a simplex search and polishes it with finite-difference BFGS.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multipoles::{cumulative_quantumness, multipoles, state_quantumness};
use crate::optim::{self, BfgsOptions};
use crate::sphere::{self, SpherePoint};
use crate::spin::SpinLabel;
use crate::state::SpinState;
use crate::stellar::{state_from_constellation, Constellation, StellarPolynomial};

/// Threshold below which `A_M` counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-7;

/// Stars closer than this (chordal) are rejected inside line searches.
const COLLISION_DISTANCE: f64 = 1e-9;

/// Random constellations drawn per restart before local refinement.
const SCREEN_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Target multipole order.
    pub m: u32,
    pub restarts: usize,
    pub seed: u64,
    /// BFGS iteration cap per restart.
    pub max_iters: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            m: 1,
            restarts: 64,
            seed: 0,
            max_iters: 500,
            grad_tol: 1e-10,
            f_tol: 1e-9,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self, label: SpinLabel) -> Result<()> {
        if self.m == 0 || self.m > label.two_s() {
            return Err(Error::range(
                "M",
                format!("{} outside 1..={} for {label}", self.m, label.two_s()),
            ));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::range(
                "restarts",
                "restarts and max_iters must be positive",
            ));
        }
        if !(self.grad_tol > 0.0 && self.f_tol > 0.0) {
            return Err(Error::range(
                "tolerance",
                "grad_tol and f_tol must be positive",
            ));
        }
        Ok(())
    }
}

/// Best constellation found by [`minimize`].
#[derive(Clone, Debug, PartialEq)]
pub struct KingResult {
    pub m: u32,
    pub constellation: Constellation,
    /// `A_M` re-evaluated from the reported constellation.
    pub objective: f64,
    /// Largest M' with `A_M' <= DEFAULT_ZERO_TOL` (0 if none).
    pub unpolarized_order: u32,
    pub restarts_converged: usize,
    /// Final objective of each restart, in restart order.
    pub history: Vec<f64>,
}

impl KingResult {
    pub fn converged(&self) -> bool {
        self.restarts_converged > 0
    }

    /// Turns a run in which no restart met its tolerances into an error.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "no restart met the tolerances; best A_{} = {:e}",
                self.m, self.objective
            )))
        }
    }
}

/// `A_M` of the state whose stars are `c`.
pub fn objective(c: &Constellation, m: u32) -> Result<f64> {
    let spec = multipoles(&state_from_constellation(c));
    cumulative_quantumness(&spec, m)
}

/// Spinor of the point with (unrestricted) angles `theta, phi`.
fn spinor(theta: f64, phi: f64) -> (C64, C64) {
    let (s, c) = (0.5 * theta).sin_cos();
    (C64::from_polar(s, -phi), C64::new(c, 0.0))
}

fn state_from_angles(label: SpinLabel, angles: &[f64]) -> SpinState {
    let mut f = vec![C64::new(1.0, 0.0)];
    for a in angles.chunks_exact(2) {
        let (x, y) = spinor(a[0], a[1]);
        f = crate::poly::mul(&f, &[-x, y]);
    }
    StellarPolynomial::new(label, f)
        .and_then(|p| p.to_state())
        .expect("product of unit spinor factors is nonzero")
}

fn unit_vectors(angles: &[f64]) -> Vec<[f64; 3]> {
    angles
        .chunks_exact(2)
        .map(|a| {
            let (st, ct) = a[0].sin_cos();
            let (sp, cp) = a[1].sin_cos();
            [st * cp, st * sp, ct]
        })
        .collect()
}

fn min_separation(angles: &[f64]) -> f64 {
    let v = unit_vectors(angles);
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = ((v[i][0] - v[j][0]).powi(2)
                + (v[i][1] - v[j][1]).powi(2)
                + (v[i][2] - v[j][2]).powi(2))
            .sqrt();
            best = best.min(d);
        }
    }
    best
}

fn random_angles<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .flat_map(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            [(1.0 - 2.0 * u).acos(), TAU * v]
        })
        .collect()
}

/// Rotates so that star `first` sits at the north pole and star `second`
/// at azimuth zero, then sorts by (theta, phi).
fn gauge_fixed(v: &[[f64; 3]], first: usize, second: usize) -> Vec<SpherePoint> {
    let r1 = sphere::rotation_between(v[first], [0.0, 0.0, 1.0]);
    let w2 = sphere::apply(&r1, v[second]);
    let r2 = sphere::axis_angle([0.0, 0.0, 1.0], -w2[1].atan2(w2[0]));
    let mut pts: Vec<SpherePoint> = v
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            if i == first {
                SpherePoint::NORTH
            } else {
                let p = SpherePoint::from_unit_vector(sphere::apply(&r2, sphere::apply(&r1, u)));
                if i == second {
                    SpherePoint::new(p.theta(), 0.0)
                } else {
                    p
                }
            }
        })
        .collect();
    pts.sort_by(point_order);
    pts
}

fn point_order(a: &SpherePoint, b: &SpherePoint) -> Ordering {
    a.theta()
        .total_cmp(&b.theta())
        .then(a.phi().total_cmp(&b.phi()))
}

fn lexicographic(a: &[SpherePoint], b: &[SpherePoint]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| point_order(p, q))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Canonical representative of the rotation orbit: over every admissible
/// choice of the two reference stars, the lexicographically smallest
/// gauge-fixed angle list.
fn canonical_gauge(angles: &[f64]) -> Vec<SpherePoint> {
    let v = unit_vectors(angles);
    let n = v.len();
    if n == 1 {
        return vec![SpherePoint::NORTH];
    }
    let mut best: Option<Vec<SpherePoint>> = None;
    for first in 0..n {
        // the azimuth reference must not sit on the axis through `first`
        let seconds: Vec<usize> = (0..n)
            .filter(|&j| {
                j != first && {
                    let c = v[first][0] * v[j][0] + v[first][1] * v[j][1] + v[first][2] * v[j][2];
                    1.0 - c.abs() > 1e-12
                }
            })
            .collect();
        let candidates: Vec<Vec<SpherePoint>> = if seconds.is_empty() {
            // all stars on one axis: any azimuth is equivalent
            vec![gauge_fixed(&v, first, first)]
        } else {
            seconds.iter().map(|&j| gauge_fixed(&v, first, j)).collect()
        };
        for cand in candidates {
            if best
                .as_ref()
                .is_none_or(|b| lexicographic(&cand, b).is_lt())
            {
                best = Some(cand);
            }
        }
    }
    best.expect("at least one gauge")
}

struct RestartOutcome {
    points: Vec<SpherePoint>,
    f: f64,
    converged: bool,
}

fn run_restart(label: SpinLabel, config: &SearchConfig, index: usize) -> RestartOutcome {
    let n = label.two_s() as usize;
    let m = config.m;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let f = |x: &[f64]| state_quantumness(&state_from_angles(label, x), m).expect("M validated");

    let mut start = random_angles(n, &mut rng);
    let mut f_start = f(&start);
    for _ in 1..SCREEN_SAMPLES {
        let cand = random_angles(n, &mut rng);
        let fc = f(&cand);
        if fc < f_start {
            start = cand;
            f_start = fc;
        }
    }
    let simplex = optim::nelder_mead(f, &start, 0.2, 60 * 2 * n, config.f_tol);
    let opts = BfgsOptions {
        max_iters: config.max_iters,
        grad_tol: config.grad_tol,
        f_tol: config.f_tol,
        fd_step: 1e-6,
    };
    let polished = optim::bfgs(f, &simplex.x, &opts, |x| {
        min_separation(x) >= COLLISION_DISTANCE
    });
    RestartOutcome {
        points: canonical_gauge(&polished.x),
        f: polished.f,
        converged: polished.converged,
    }
}

/// Runs `f(0..n)` on the rayon pool, capped by `MAJORANA_NUM_THREADS`.
/// Results come back in index order whatever the scheduling.
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let cap = std::env::var("MAJORANA_NUM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    let work = || (0..n).into_par_iter().map(&f).collect();
    match cap.and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok()) {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

/// Largest M' with `A_M' <= zero_tol`, read off the full spectrum.
pub fn unpolarized_order(state: &SpinState, zero_tol: f64) -> u32 {
    multipoles(state)
        .cumulative()
        .iter()
        .take_while(|&&a| a <= zero_tol)
        .count() as u32
}

/// Multi-start minimization of `A_M` over constellations of 2S stars.
///
/// Deterministic for a given `(label, config)`: restart `i` draws from the
/// ChaCha stream `(seed, i)` and the reduction over restarts is ordered.
/// When no restart meets its tolerances the best iterate is still returned,
/// with `restarts_converged == 0`.
pub fn minimize(label: SpinLabel, config: &SearchConfig) -> Result<KingResult> {
    config.validate(label)?;
    let outcomes = parallel_map(config.restarts, |i| run_restart(label, config, i));
    let history: Vec<f64> = outcomes.iter().map(|o| o.f).collect();
    let restarts_converged = outcomes.iter().filter(|o| o.converged).count();
    let best = outcomes
        .into_iter()
        .min_by(|a, b| {
            a.f.total_cmp(&b.f)
                .then_with(|| lexicographic(&a.points, &b.points))
        })
        .expect("at least one restart");

    let constellation = Constellation::from_points(label, &best.points)?;
    let state = state_from_constellation(&constellation);
    let objective = cumulative_quantumness(&multipoles(&state), config.m)?;
    Ok(KingResult {
        m: config.m,
        constellation,
        objective,
        unpolarized_order: unpolarized_order(&state, DEFAULT_ZERO_TOL),
        restarts_converged,
        history,
    })
}

/// Searches upward from M = 1 for the highest order whose minimum of `A_M`
/// is at most `zero_tol`; returns that order and its King (order 0 and
/// `None` when even the dipole cannot vanish).
pub fn maximal_king(
    label: SpinLabel,
    config: &SearchConfig,
    zero_tol: f64,
) -> Result<(u32, Option<KingResult>)> {
    if !(zero_tol > 0.0) {
        return Err(Error::range(
            "zero_tol",
            format!("{zero_tol} must be positive"),
        ));
    }
    let mut found = (0, None);
    for m in 1..=label.two_s() {
        let cfg = SearchConfig { m, ..*config };
        let king = minimize(label, &cfg)?.ensure_converged()?;
        if king.objective > zero_tol {
            break;
        }
        found = (m, Some(king));
    }
    Ok(found)
}

/// The order part of [`maximal_king`].
pub fn max_unpolarized_order(
    label: SpinLabel,
    config: &SearchConfig,
    zero_tol: f64,
) -> Result<u32> {
    maximal_king(label, config, zero_tol).map(|(m, _)| m)
}
