//! Bloch-sphere points and the canonical input sets.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{c64, ComplexVector, C64};

/// Largest input set accepted.
pub const MAX_SET_SIZE: usize = 64;

const ANGLE_SLACK: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-12;

/// A pure qubit `cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct BlochPoint {
    theta: f64,
    phi: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    theta: f64,
    phi: f64,
}

impl TryFrom<RawPoint> for BlochPoint {
    type Error = Error;
    fn try_from(raw: RawPoint) -> Result<Self> {
        BlochPoint::new(raw.theta, raw.phi)
    }
}

impl BlochPoint {
    /// `theta` must lie in `[0, π]`; `phi` is reduced modulo 2π.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                allowed: "[0, pi]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                allowed: "finite",
            });
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self {
            theta: theta.clamp(0.0, PI),
            phi,
        })
    }

    pub fn equatorial(phi: f64) -> Self {
        Self::new(FRAC_PI_2, phi).expect("finite phase")
    }

    pub fn north() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn south() -> Self {
        Self {
            theta: PI,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Amplitudes `(α, β)` with `α` real and nonnegative.
    pub fn amplitudes(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [c64(c, 0.0), C64::from_polar(s, self.phi)]
    }

    pub fn to_state(&self) -> ComplexVector {
        ComplexVector::new(self.amplitudes().to_vec())
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &BlochPoint) -> f64 {
        self.to_state().inner(&other.to_state()).norm()
    }
}

pub fn bloch_to_state(p: &BlochPoint) -> ComplexVector {
    p.to_state()
}

/// A labelled, nonempty list of input qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct InputSet {
    label: String,
    points: Vec<BlochPoint>,
}

#[derive(Deserialize)]
struct RawSet {
    label: String,
    points: Vec<BlochPoint>,
}

impl TryFrom<RawSet> for InputSet {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<Self> {
        InputSet::custom(raw.label, raw.points)
    }
}

impl InputSet {
    pub fn custom(label: impl Into<String>, points: Vec<BlochPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSet("no points".into()));
        }
        if points.len() > MAX_SET_SIZE {
            return Err(Error::InvalidSet(format!(
                "{} points exceeds the limit of {MAX_SET_SIZE}",
                points.len()
            )));
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[BlochPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn states(&self) -> Vec<ComplexVector> {
        self.points.iter().map(BlochPoint::to_state).collect()
    }

    /// True when no two states coincide up to global phase.
    pub fn is_distinct(&self) -> bool {
        self.points.iter().enumerate().all(|(i, p)| {
            self.points[i + 1..]
                .iter()
                .all(|q| p.overlap(q) < 1.0 - DISTINCT_TOL)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("input sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSet(e.to_string()))
    }
}

fn equator(label: &str, phis: &[f64]) -> InputSet {
    InputSet::custom(
        label,
        phis.iter().map(|&p| BlochPoint::equatorial(p)).collect(),
    )
    .expect("nonempty")
}

/// Three equatorial states at φ = 0, 2π/3, 4π/3.
pub fn equatorial_trio() -> InputSet {
    equator("trio", &[0.0, TAU / 3.0, 2.0 * TAU / 3.0])
}

/// `n` equally spaced equatorial states starting at φ = 0.
pub fn equatorial_ring(n: usize) -> Result<InputSet> {
    if n == 0 || n > MAX_SET_SIZE {
        return Err(Error::InvalidSet(format!("ring of {n} states")));
    }
    let phis: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    Ok(equator(&format!("equator:{n}"), &phis))
}

/// Polar angle of the three lower tetrahedron vertices, `2·arccos(1/√3)`.
pub fn tetrahedron_theta() -> f64 {
    2.0 * (1.0 / 3f64.sqrt()).acos()
}

/// `|0⟩` plus three states at `cos(θ/2) = 1/√3` and φ = 0, ±2π/3.
pub fn tetrahedron() -> InputSet {
    let theta = tetrahedron_theta();
    let points = vec![
        BlochPoint::north(),
        BlochPoint::new(theta, 0.0).unwrap(),
        BlochPoint::new(theta, TAU / 3.0).unwrap(),
        BlochPoint::new(theta, -TAU / 3.0).unwrap(),
    ];
    InputSet::custom("tetrahedron", points).expect("nonempty")
}

/// The four equatorial states `(|0⟩ ± |1⟩)/√2`, `(|0⟩ ± i|1⟩)/√2`.
pub fn bb84() -> InputSet {
    equator("bb84", &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2])
}

/// [`bb84`] plus both poles.
pub fn six_state() -> InputSet {
    let mut points = bb84().points;
    points.push(BlochPoint::north());
    points.push(BlochPoint::south());
    InputSet::custom("six-state", points).expect("nonempty")
}

/// Two equatorial states at φ = 0 and φ = `delta`.
pub fn equatorial_pair(delta: f64) -> Result<InputSet> {
    if !(delta > 0.0 && delta < TAU) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            allowed: "(0, 2pi)",
        });
    }
    Ok(equator(
        &format!("pair:{}", delta.to_degrees()),
        &[0.0, delta],
    ))
}
