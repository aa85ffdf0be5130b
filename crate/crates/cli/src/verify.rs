//! `verify`: evaluate a known machine on a set and check the identities it
//! is expected to satisfy.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use clonebench::cloners::{AncillaCloner, Cloner, ConstraintReport, Machine};
use clonebench::fidelity::{
    closed_form_bound, copy_fidelity, decompose_cone, decompose_equatorial, n_clone_fidelity,
    BoundKind, FidelityDecomposition,
};
use serde::Serialize;

use crate::names::{MachineSpec, SetSpec};

/// Known machines must reproduce their closed-form fidelity to this.
pub const EXACT_TOL: f64 = 1e-12;
/// Decomposition and closed-form fidelities must match direct evaluation to this.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
pub struct StateReport {
    pub index: usize,
    pub theta: f64,
    pub phi: f64,
    /// One entry per copy.
    pub fidelities: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Ok,
    Violated,
    NotApplicable,
}

#[derive(Debug, Serialize)]
pub struct BoundComparison {
    pub kind: Option<BoundKind>,
    pub value: Option<f64>,
    pub max_deviation: Option<f64>,
    pub status: BoundStatus,
}

#[derive(Debug, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub machine: String,
    pub set: String,
    pub copies: usize,
    pub constraint: ConstraintReport,
    pub states: Vec<StateReport>,
    /// Equatorial λ/ψ record per copy; two-copy machines only.
    pub decomposition: Option<Vec<FidelityDecomposition>>,
    pub bound: BoundComparison,
    pub checks: Vec<CheckItem>,
    pub pass: bool,
}

fn is_equatorial(theta: f64) -> bool {
    (theta - FRAC_PI_2).abs() < 1e-12
}

pub fn verify(machine: &MachineSpec, set: &SetSpec) -> VerifyReport {
    let built = machine.build();
    let v = machine.isometry();
    let copies = v.copies();
    let points = set.set.points();

    let states: Vec<StateReport> = points
        .iter()
        .enumerate()
        .map(|(index, p)| StateReport {
            index,
            theta: p.theta(),
            phi: p.phi(),
            fidelities: (0..copies)
                .map(|c| copy_fidelity(&v, p, c).expect("copy in range"))
                .collect(),
        })
        .collect();

    let constraint = built.constraint_check();
    let mut checks = vec![CheckItem {
        name: "isometry constraints".into(),
        value: constraint.max_residual(),
        tol: EXACT_TOL,
        pass: constraint.max_residual() <= EXACT_TOL,
    }];

    let two_copy = match &built {
        Machine::Economic(c) => Some(AncillaCloner::from_economic(c)),
        Machine::Ancilla(c) => Some(c.clone()),
        _ => None,
    };
    let decomposition = two_copy.as_ref().map(|m| {
        (0..2)
            .map(|c| decompose_equatorial(m, c).expect("two copies"))
            .collect::<Vec<_>>()
    });

    if let Some(m) = &two_copy {
        let mut worst: f64 = 0.0;
        for (p, s) in points.iter().zip(&states) {
            if p.theta() <= 0.0 || p.theta() >= PI {
                continue;
            }
            for copy in 0..2 {
                let d = decompose_cone(m, p.theta(), copy).expect("interior latitude");
                worst = worst.max((d.evaluate(p.phi()) - s.fidelities[copy]).abs());
            }
        }
        checks.push(CheckItem {
            name: "decomposition vs direct".into(),
            value: worst,
            tol: IDENTITY_TOL,
            pass: worst <= IDENTITY_TOL,
        });
    }
    if let Machine::SymmetricN(c) = &built {
        let worst = points
            .iter()
            .zip(&states)
            .filter(|(p, _)| is_equatorial(p.theta()))
            .map(|(p, s)| (n_clone_fidelity(c, p.phi()) - s.fidelities[0]).abs())
            .fold(0.0, f64::max);
        checks.push(CheckItem {
            name: "1->n closed form vs direct".into(),
            value: worst,
            tol: IDENTITY_TOL,
            pass: worst <= IDENTITY_TOL,
        });
    }

    let all_equatorial = points.iter().all(|p| is_equatorial(p.theta()));
    let kind = if machine.is_universal() {
        Some(BoundKind::Universal1To2)
    } else if machine.is_phase_covariant() && all_equatorial {
        Some(if copies == 2 {
            BoundKind::Phase1To2
        } else {
            BoundKind::Phase1ToN
        })
    } else {
        None
    };
    let bound = match kind {
        Some(kind) => {
            let value = closed_form_bound(kind, copies).expect("copies >= 1");
            let dev = states
                .iter()
                .flat_map(|s| s.fidelities.iter())
                .map(|f| (f - value).abs())
                .fold(0.0, f64::max);
            let ok = dev <= EXACT_TOL;
            checks.push(CheckItem {
                name: "closed-form fidelity".into(),
                value: dev,
                tol: EXACT_TOL,
                pass: ok,
            });
            BoundComparison {
                kind: Some(kind),
                value: Some(value),
                max_deviation: Some(dev),
                status: if ok {
                    BoundStatus::Ok
                } else {
                    BoundStatus::Violated
                },
            }
        }
        None => BoundComparison {
            kind: None,
            value: None,
            max_deviation: None,
            status: BoundStatus::NotApplicable,
        },
    };

    let pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        machine: machine.to_string(),
        set: set.set.label().to_string(),
        copies,
        constraint,
        states,
        decomposition,
        bound,
        checks,
        pass,
    }
}

impl VerifyReport {
    /// `state,theta_deg,phi_deg,copy,fidelity` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,theta_deg,phi_deg,copy,fidelity\n");
        for s in &self.states {
            for (c, f) in s.fidelities.iter().enumerate() {
                writeln!(
                    out,
                    "{},{:.6},{:.6},{},{:.12}",
                    s.index,
                    s.theta.to_degrees(),
                    s.phi.to_degrees(),
                    c,
                    f
                )
                .expect("write to string");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(m: &str, s: &str) -> VerifyReport {
        verify(&m.parse().unwrap(), &s.parse().unwrap())
    }

    #[test]
    fn pqcm_on_trio() {
        let r = run("pqcm-economic", "trio");
        assert!(r.pass);
        assert!(matches!(r.bound.status, BoundStatus::Ok));
        for s in &r.states {
            for f in &s.fidelities {
                assert!((f - 0.853553390593).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uqcm_on_six_state() {
        let r = run("uqcm", "six-state");
        assert!(r.pass);
        assert_eq!(r.states.len(), 6);
    }

    #[test]
    fn pqcm_on_tetrahedron_is_report_only() {
        let r = run("pqcm-economic", "tetrahedron");
        assert!(r.pass);
        assert!(matches!(r.bound.status, BoundStatus::NotApplicable));
        let fs: Vec<f64> = r.states.iter().map(|s| s.fidelities[0]).collect();
        assert!(fs.iter().any(|f| (f - fs[0]).abs() > 1e-3));
    }

    #[test]
    fn nclone_on_ring() {
        let r = run("nclone:4", "equator:7");
        assert!(r.pass);
        assert_eq!(r.copies, 4);
        assert!(r.decomposition.is_none());
    }

    #[test]
    fn ancilla_family_member() {
        assert!(run("pqcm-ancilla:0.3", "bb84").pass);
    }
}
