//! Points on the unit sphere and the stereographic chart `z = tan(theta/2) e^{-i phi}`.
//!
//! The chart projects from the south pole: `z = 0` is the north pole and
//! `z = infinity` is the south pole (`theta = pi`).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A complex number or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedComplex {
    Finite(C64),
    Infinity,
}

impl ExtendedComplex {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn finite(self) -> Option<C64> {
        match self {
            ExtendedComplex::Finite(z) => Some(z),
            ExtendedComplex::Infinity => None,
        }
    }
}

impl From<C64> for ExtendedComplex {
    fn from(z: C64) -> Self {
        ExtendedComplex::Finite(z)
    }
}

/// Polar angle `theta` in `[0, pi]`, azimuth `phi` in `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

fn reduce_azimuth(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl SpherePoint {
    /// Clamps theta into `[0, pi]` and reduces phi mod 2 pi.
    pub fn new(theta: f64, phi: f64) -> Self {
        SpherePoint {
            theta: theta.clamp(0.0, PI),
            phi: reduce_azimuth(phi),
        }
    }

    pub const NORTH: SpherePoint = SpherePoint {
        theta: 0.0,
        phi: 0.0,
    };
    pub const SOUTH: SpherePoint = SpherePoint {
        theta: PI,
        phi: 0.0,
    };

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let rho = v[0].hypot(v[1]);
        let theta = if rho == 0.0 {
            if v[2] >= 0.0 {
                0.0
            } else {
                PI
            }
        } else {
            rho.atan2(v[2])
        };
        let phi = if rho == 0.0 { 0.0 } else { v[1].atan2(v[0]) };
        SpherePoint::new(theta, phi)
    }

    /// Homogeneous coordinates `(x, y)` of the point with `z = x / y`,
    /// normalized to `|x|^2 + |y|^2 = 1`.
    pub fn spinor(&self) -> (C64, C64) {
        let (s, c) = (0.5 * self.theta).sin_cos();
        (C64::from_polar(s, -self.phi), C64::new(c, 0.0))
    }

    pub fn from_spinor(x: C64, y: C64) -> Self {
        let (ax, ay) = (x.norm(), y.norm());
        if ax == 0.0 && ay == 0.0 {
            return SpherePoint::NORTH;
        }
        let theta = 2.0 * ax.atan2(ay);
        // phi = -arg(x / y)
        let phi = if ax == 0.0 || ay == 0.0 {
            0.0
        } else {
            -(x * y.conj()).arg()
        };
        SpherePoint::new(theta, phi)
    }

    /// Euclidean distance between the two unit vectors, in `[0, 2]`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint::new(PI - self.theta, self.phi + PI)
    }
}

pub fn stereo_to_sphere(z: C64) -> SpherePoint {
    let r = z.norm();
    let theta = 2.0 * r.atan();
    let phi = if r == 0.0 { 0.0 } else { -z.arg() };
    SpherePoint::new(theta, phi)
}

pub fn extended_to_sphere(z: ExtendedComplex) -> SpherePoint {
    match z {
        ExtendedComplex::Finite(z) => stereo_to_sphere(z),
        ExtendedComplex::Infinity => SpherePoint::SOUTH,
    }
}

/// Inverse of [`stereo_to_sphere`]; the south pole maps to infinity.
pub fn sphere_to_stereo(p: SpherePoint) -> ExtendedComplex {
    let half = 0.5 * p.theta;
    let c = half.cos();
    if p.theta >= PI || c <= 1e-300 {
        return ExtendedComplex::Infinity;
    }
    ExtendedComplex::Finite(C64::from_polar(half.sin() / c, -p.phi))
}

/// Chordal distance between two points of the extended plane.
pub fn chordal(a: ExtendedComplex, b: ExtendedComplex) -> f64 {
    match (a, b) {
        (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 0.0,
        (ExtendedComplex::Finite(z), ExtendedComplex::Infinity)
        | (ExtendedComplex::Infinity, ExtendedComplex::Finite(z)) => {
            2.0 / (1.0 + z.norm_sqr()).sqrt()
        }
        (ExtendedComplex::Finite(z), ExtendedComplex::Finite(w)) => {
            2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
        }
    }
}

/// Rotation matrix taking the unit vector `from` onto `to` (Rodrigues).
pub(crate) fn rotation_between(from: [f64; 3], to: [f64; 3]) -> [[f64; 3]; 3] {
    let c = from[0] * to[0] + from[1] * to[1] + from[2] * to[2];
    let k = [
        from[1] * to[2] - from[2] * to[1],
        from[2] * to[0] - from[0] * to[2],
        from[0] * to[1] - from[1] * to[0],
    ];
    let s = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if s < 1e-15 {
        if c > 0.0 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        // half turn about an axis orthogonal to `from`
        let axis = if from[0].abs() < 0.9 {
            normalize(cross(from, [1.0, 0.0, 0.0]))
        } else {
            normalize(cross(from, [0.0, 1.0, 0.0]))
        };
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = 2.0 * axis[i] * axis[j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        return r;
    }
    let k = [k[0] / s, k[1] / s, k[2] / s];
    axis_angle(k, s.atan2(c))
}

pub(crate) fn axis_angle(k: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [
            t * k[0] * k[0] + c,
            t * k[0] * k[1] - s * k[2],
            t * k[0] * k[2] + s * k[1],
        ],
        [
            t * k[0] * k[1] + s * k[2],
            t * k[1] * k[1] + c,
            t * k[1] * k[2] - s * k[0],
        ],
        [
            t * k[0] * k[2] - s * k[1],
            t * k[1] * k[2] + s * k[0],
            t * k[2] * k[2] + c,
        ],
    ]
}

pub(crate) fn apply(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
        r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
        r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
    ]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Deterministic, roughly uniform points (Fibonacci lattice).
pub fn fibonacci_points(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            SpherePoint::new(z.clamp(-1.0, 1.0).acos(), golden * i as f64)
        })
        .collect()
}
