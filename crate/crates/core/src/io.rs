//! JSON, JSONL and CSV forms of the toolkit's values.
//!
//! Floats are written with 17 significant digits (C's `%.17g`), which round
//! trips every f64 exactly.

use std::io;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::dynamics::{Builtin, HamiltonianSpec, StarTrajectory};
use crate::error::{Error, Result};
use crate::kings::KingResult;
use crate::multipoles::{MultipoleSpectrum, QGrid};
use crate::sphere::SpherePoint;
use crate::spin::SpinLabel;
use crate::state::SpinState;
use crate::stellar::Constellation;

/// `%.17g`: shortest of fixed or exponent form, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Compact JSON with `%.17g` floats; non-finite values become `null`.
#[derive(Clone, Copy, Debug, Default)]
pub struct G17Formatter;

impl Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_g17(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serializes `value` as one line of compact JSON.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn label_of(two_s: u32) -> Result<SpinLabel> {
    if two_s > 4096 {
        return Err(Error::range(
            "twoS",
            format!("{two_s} is unreasonably large"),
        ));
    }
    Ok(SpinLabel::new(two_s))
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    #[serde(rename = "twoS")]
    two_s: u32,
    amplitudes: Vec<[f64; 2]>,
}

pub fn state_to_json(state: &SpinState) -> String {
    to_json(&StateDoc {
        two_s: state.label().two_s(),
        amplitudes: state.amplitudes().iter().map(|&a| pair(a)).collect(),
    })
}

/// Parses a state. Amplitudes are normalized unless they already are (to
/// rounding), so written states read back bit for bit.
pub fn state_from_json(text: &str) -> Result<SpinState> {
    let doc: StateDoc = serde_json::from_str(text)?;
    let label = label_of(doc.two_s)?;
    let amps: Vec<C64> = doc.amplitudes.iter().map(complex).collect();
    let normalized = SpinState::new(label, amps.clone())?;
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm2 - 1.0).abs() <= 4.0 * f64::EPSILON * label.dim() as f64 {
        Ok(SpinState::from_vector_unchecked(
            label,
            &nalgebra::DVector::from_vec(amps),
        ))
    } else {
        Ok(normalized)
    }
}

#[derive(Serialize)]
struct RootsDoc {
    #[serde(rename = "twoS")]
    two_s: u32,
    roots: Vec<[f64; 2]>,
    infinity_count: usize,
}

#[derive(Serialize)]
struct AnglesDoc {
    #[serde(rename = "twoS")]
    two_s: u32,
    stars: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct ConstellationIn {
    #[serde(rename = "twoS")]
    two_s: Option<u32>,
    roots: Option<Vec<[f64; 2]>>,
    infinity_count: Option<usize>,
    stars: Option<Vec<[f64; 2]>>,
}

fn roots_doc(c: &Constellation) -> RootsDoc {
    RootsDoc {
        two_s: c.label().two_s(),
        roots: c.finite_roots().iter().map(|&z| pair(z)).collect(),
        infinity_count: c.infinity_count(),
    }
}

/// Root form, or `{"twoS", "stars": [[theta, phi], ...]}` when `angles`.
pub fn constellation_to_json(c: &Constellation, angles: bool) -> String {
    if angles {
        to_json(&AnglesDoc {
            two_s: c.label().two_s(),
            stars: c.points().iter().map(|p| [p.theta(), p.phi()]).collect(),
        })
    } else {
        to_json(&roots_doc(c))
    }
}

/// Accepts the root form or the angular form.
pub fn constellation_from_json(text: &str) -> Result<Constellation> {
    let doc: ConstellationIn = serde_json::from_str(text)?;
    match (doc.roots, doc.stars) {
        (Some(roots), None) => {
            let two_s = doc
                .two_s
                .ok_or_else(|| Error::invalid("constellation needs \"twoS\""))?;
            let roots: Vec<C64> = roots.iter().map(complex).collect();
            Constellation::new(label_of(two_s)?, roots, doc.infinity_count.unwrap_or(0))
        }
        (None, Some(stars)) => {
            if doc.infinity_count.is_some() {
                return Err(Error::invalid(
                    "\"infinity_count\" belongs to the root form",
                ));
            }
            let two_s = doc.two_s.unwrap_or(stars.len() as u32);
            if stars.iter().flatten().any(|a| !a.is_finite()) {
                return Err(Error::invalid("star angles must be finite"));
            }
            let points: Vec<SpherePoint> =
                stars.iter().map(|s| SpherePoint::new(s[0], s[1])).collect();
            Constellation::from_points(label_of(two_s)?, &points)
        }
        (Some(_), Some(_)) => Err(Error::invalid(
            "give either \"roots\" or \"stars\", not both",
        )),
        (None, None) => Err(Error::invalid("constellation needs \"roots\" or \"stars\"")),
    }
}

#[derive(Serialize)]
struct RhoDoc {
    #[serde(rename = "K")]
    k: u32,
    q: i32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SpectrumDoc {
    #[serde(rename = "twoS")]
    two_s: u32,
    rho: Vec<RhoDoc>,
    w: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<f64>,
}

/// `w` lists `w_K` from K = 0, `A` lists `A_M` from M = 1.
pub fn spectrum_to_json(spec: &MultipoleSpectrum) -> String {
    to_json(&SpectrumDoc {
        two_s: spec.label().two_s(),
        rho: spec
            .iter()
            .map(|(k, q, c)| RhoDoc {
                k,
                q,
                re: c.re,
                im: c.im,
            })
            .collect(),
        w: spec.lengths().to_vec(),
        a: spec.cumulative().to_vec(),
    })
}

#[derive(Serialize)]
struct KingDoc {
    #[serde(rename = "twoS")]
    two_s: u32,
    #[serde(rename = "M")]
    m: u32,
    objective: f64,
    unpolarized_order: u32,
    constellation: RootsDoc,
    restarts_converged: usize,
}

pub fn king_to_json(k: &KingResult) -> String {
    to_json(&KingDoc {
        two_s: k.constellation.label().two_s(),
        m: k.m,
        objective: k.objective,
        unpolarized_order: k.unpolarized_order,
        constellation: roots_doc(&k.constellation),
        restarts_converged: k.restarts_converged,
    })
}

#[derive(Serialize, Deserialize)]
struct HamiltonianIn {
    #[serde(rename = "twoS", skip_serializing_if = "Option::is_none")]
    two_s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<f64>,
}

/// Parses a Hamiltonian for spin `label`. Builtins default to coupling 1.
pub fn hamiltonian_from_json(text: &str, label: SpinLabel) -> Result<HamiltonianSpec> {
    let doc: HamiltonianIn = serde_json::from_str(text)?;
    if let Some(two_s) = doc.two_s {
        if two_s != label.two_s() {
            return Err(Error::LabelMismatch(two_s, label.two_s()));
        }
    }
    match (doc.matrix, doc.builtin) {
        (Some(rows), None) => {
            if doc.two_s.is_none() {
                return Err(Error::invalid("matrix Hamiltonian needs \"twoS\""));
            }
            if doc.coupling.is_some() {
                return Err(Error::invalid("\"coupling\" applies to builtins only"));
            }
            let dim = label.dim();
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::invalid(format!("matrix must be {dim}x{dim}")));
            }
            let m = DMatrix::from_fn(dim, dim, |i, j| complex(&rows[i][j]));
            HamiltonianSpec::new(label, m)
        }
        (None, Some(name)) => {
            let which: Builtin = name.parse()?;
            let coupling = doc.coupling.unwrap_or(1.0);
            if !coupling.is_finite() {
                return Err(Error::invalid("coupling must be finite"));
            }
            Ok(HamiltonianSpec::builtin(label, which, coupling))
        }
        (Some(_), Some(_)) => Err(Error::invalid(
            "give either \"matrix\" or \"builtin\", not both",
        )),
        (None, None) => Err(Error::invalid(
            "Hamiltonian needs \"matrix\" or \"builtin\"",
        )),
    }
}

/// Matrix form of a Hamiltonian.
pub fn hamiltonian_to_json(h: &HamiltonianSpec) -> String {
    let m = h.matrix();
    to_json(&HamiltonianIn {
        two_s: Some(h.label().two_s()),
        matrix: Some(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
                .collect(),
        ),
        builtin: None,
        coupling: None,
    })
}

#[derive(Serialize)]
struct SnapshotDoc {
    t: f64,
    roots: Vec<[f64; 2]>,
    infinity_count: usize,
    fallback: bool,
}

/// One JSON object per snapshot, newline terminated.
///
/// Roots are written as complex conjugates of the stellar roots, i.e. as the
/// zeros of the Husimi function; under `H = w Sz` they move as `e^{-iwt}`.
pub fn trajectory_to_jsonl(traj: &StarTrajectory) -> String {
    let mut out = String::new();
    for ((t, c), fallback) in traj
        .times()
        .iter()
        .zip(traj.snapshots())
        .zip(traj.fallback_flags())
    {
        out.push_str(&to_json(&SnapshotDoc {
            t: *t,
            roots: c.finite_roots().iter().map(|z| pair(z.conj())).collect(),
            infinity_count: c.infinity_count(),
            fallback: *fallback,
        }));
        out.push('\n');
    }
    out
}

/// `theta,phi,Q` rows in theta-major order.
pub fn qgrid_to_csv(grid: &QGrid) -> String {
    let mut out = String::from("theta,phi,Q\n");
    for (theta, phi, q) in grid.rows() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g17(theta),
            fmt_g17(phi),
            fmt_g17(q)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, EvolveOptions};
    use crate::multipoles::{multipoles, q_grid};
    use crate::state::{coherent_state, noon_state};
    use crate::stellar::constellation_from_state;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1.5e300, "1.5000000000000001e+300"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (-0.0, "-0"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g17(x), s, "{x:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            1.0 / 3.0,
            2f64.sqrt(),
            1e-300,
            6.02214076e23,
            -7.25e-9,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn state_round_trip() {
        let s = coherent_state(SpinLabel::new(3), C64::new(0.3, -1.2).into());
        let text = state_to_json(&s);
        assert!(text.starts_with("{\"twoS\":3,\"amplitudes\":[["));
        assert_eq!(state_from_json(&text).unwrap(), s);
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            state_from_json("{\"twoS\":1,\"amplitudes\":[[1,0]"),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            state_from_json("{\"twoS\":1,\"amplitudes\":[[1,0]]}"),
            Err(Error::InvalidInput(_))
        ));
        assert!(state_from_json("{\"twoS\":1,\"amplitudes\":[[0,0],[0,0]]}").is_err());
    }

    #[test]
    fn constellation_forms() {
        let l = SpinLabel::new(2);
        let c = constellation_from_state(&noon_state(l).unwrap(), &Default::default()).unwrap();
        let text = constellation_to_json(&c, false);
        assert_eq!(constellation_from_json(&text).unwrap(), c);
        let angular = constellation_from_json(&constellation_to_json(&c, true)).unwrap();
        assert!(angular.distance(&c) < 1e-15);
        let south =
            constellation_from_json("{\"twoS\":2,\"roots\":[],\"infinity_count\":2}").unwrap();
        assert_eq!(south.infinity_count(), 2);
        assert!(
            constellation_from_json("{\"twoS\":3,\"roots\":[[1,0]],\"infinity_count\":0}").is_err()
        );
        assert!(constellation_from_json("{\"twoS\":1}").is_err());
        let from_angles =
            constellation_from_json("{\"stars\":[[0,0],[3.141592653589793,0]]}").unwrap();
        assert_eq!(from_angles.label(), l);
        assert_eq!(from_angles.infinity_count(), 1);
    }

    #[test]
    fn spectrum_shape() {
        let s = noon_state(SpinLabel::new(2)).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&spectrum_to_json(&multipoles(&s))).unwrap();
        assert_eq!(v["rho"].as_array().unwrap().len(), 9);
        assert_eq!(v["w"].as_array().unwrap().len(), 3);
        assert_eq!(v["A"].as_array().unwrap().len(), 2);
        assert_eq!(v["rho"][0]["K"], 0);
    }

    #[test]
    fn hamiltonian_forms() {
        let l = SpinLabel::new(2);
        let h = hamiltonian_from_json("{\"builtin\":\"Sz2\",\"coupling\":0.5}", l).unwrap();
        let back = hamiltonian_from_json(&hamiltonian_to_json(&h), l).unwrap();
        assert_eq!(back.matrix(), h.matrix());
        assert!(matches!(
            hamiltonian_from_json("{\"twoS\":3,\"builtin\":\"Sz\"}", l),
            Err(Error::LabelMismatch(3, 2))
        ));
        assert!(hamiltonian_from_json("{\"builtin\":\"Sw\"}", l).is_err());
        assert!(hamiltonian_from_json("{\"twoS\":2,\"matrix\":[[[1,0]]]}", l).is_err());
    }

    #[test]
    fn trajectory_lines_are_conjugated() {
        let l = SpinLabel::new(2);
        let s = coherent_state(l, C64::new(0.5, 0.5).into());
        let h = HamiltonianSpec::builtin(l, Builtin::Sz, 1.0);
        let traj = evolve(
            &s,
            &h,
            0.5,
            &EvolveOptions {
                samples: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let text = trajectory_to_jsonl(&traj);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        let z = traj.snapshots()[0].finite_roots()[0];
        assert_eq!(first["roots"][0][1].as_f64().unwrap(), -z.im);
        assert_eq!(first["t"], 0.0);
        assert_eq!(first["fallback"], false);
        // a double star under Sz never separates, so the whole run is bridged
        let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(second["fallback"], true);
        assert_eq!(traj.fallback_intervals(), &[(0.0, 0.5)]);
    }

    #[test]
    fn qgrid_csv_layout() {
        let s = noon_state(SpinLabel::new(1)).unwrap();
        let csv = qgrid_to_csv(&q_grid(&s, 3, 4).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,phi,Q");
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[1].split(',').count(), 3);
    }
}
