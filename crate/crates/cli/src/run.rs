//! `optimize`, `scan` and `nclone`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::time::Duration;

use clonebench::cloners::SymmetricNCloner;
use clonebench::fidelity::{
    closed_form_bound, copy_fidelity_state, n_clone_fidelity, n_clone_fidelity_bruteforce,
    phase_covariant_fidelity, universal_fidelity, BoundKind, MAX_BRUTEFORCE_COPIES,
};
use clonebench::optimize::scan::ScanSummary;
use clonebench::optimize::{
    objective, optimize, optimize_n, scan_equator_with_budget, Mode, OptimizationConfig,
    OptimizationResult, ScanGrid,
};
use clonebench::qlinalg::partial_trace;
use clonebench::states::InputSet;
use serde::Serialize;

use crate::output::{to_json, Failure, Run, EXIT_BUDGET, EXIT_OK, EXIT_SELF_CHECK};
use crate::Format;

/// Search fidelities must agree with the density-matrix route to this.
pub const ORACLE_TOL: f64 = 1e-10;
/// Reported objective must match its own per-state fidelities to this.
pub const CONSISTENCY_TOL: f64 = 1e-12;
/// No search may beat a proven optimum by more than this.
pub const BOUND_SLACK: f64 = 1e-6;
/// Largest allowed gap between the 1→n optimum found and the closed form.
pub const NCLONE_TOL: f64 = 1e-4;

#[derive(Debug, Serialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub value: f64,
    pub exceeded: bool,
}

#[derive(Debug, Serialize)]
pub struct SelfCheck {
    /// Largest gap between reported fidelities and a full density-matrix
    /// evaluation of the best machine.
    pub oracle_mismatch: f64,
    /// Gap between the reported objective and the one recomputed from the
    /// reported fidelities.
    pub objective_mismatch: f64,
    /// Known optimum for this set, when one is proven.
    pub bound: Option<BoundCheck>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct OptimizeReport {
    pub set: InputSet,
    pub config: OptimizationConfig,
    pub result: OptimizationResult,
    pub self_check: SelfCheck,
}

fn known_optimum(set: &InputSet) -> Option<BoundKind> {
    match set.label() {
        "trio" | "bb84" => Some(BoundKind::Phase1To2),
        "tetrahedron" | "six-state" => Some(BoundKind::Universal1To2),
        l if l.starts_with("equator:") && set.len() >= 3 => Some(BoundKind::Phase1To2),
        _ => None,
    }
}

fn self_check(set: &InputSet, cfg: &OptimizationConfig, r: &OptimizationResult) -> SelfCheck {
    let v = &r.best;
    let dims = v.factor_dims();
    let states = set.states();
    let mut oracle_mismatch: f64 = 0.0;
    for s in &r.per_state_fidelities {
        let psi = &states[s.state];
        let rho = v.apply(psi).expect("valid input state");
        let marginal = partial_trace(&rho, &dims, &[s.copy]).expect("copy in range");
        let f = marginal.expectation(psi).expect("qubit marginal").re;
        oracle_mismatch = oracle_mismatch.max((f - s.fidelity).abs());
        let g = copy_fidelity_state(v, psi, s.copy).expect("copy in range");
        oracle_mismatch = oracle_mismatch.max((g - s.fidelity).abs());
    }
    let objective_mismatch = (objective(v, set, cfg.mode, cfg.penalty_weight) - r.objective).abs();
    let bound = known_optimum(set)
        .filter(|_| cfg.mode == Mode::MaxMin && cfg.copies == 2)
        .map(|kind| {
            let value = match kind {
                BoundKind::Universal1To2 => universal_fidelity(),
                _ => phase_covariant_fidelity(),
            };
            let worst = r
                .restart_objectives
                .iter()
                .copied()
                .fold(r.objective, f64::max);
            BoundCheck {
                kind,
                value,
                exceeded: worst > value + BOUND_SLACK,
            }
        });
    let pass = oracle_mismatch <= ORACLE_TOL
        && objective_mismatch <= CONSISTENCY_TOL
        && !bound.as_ref().is_some_and(|b| b.exceeded);
    SelfCheck {
        oracle_mismatch,
        objective_mismatch,
        bound,
        pass,
    }
}

pub fn run_optimize(
    set: &InputSet,
    cfg: &OptimizationConfig,
    format: Format,
    mut run: Run,
) -> Result<u8, Failure> {
    cfg.validate()?;
    let result = optimize(set, cfg)?;
    let check = self_check(set, cfg, &result);
    let code = if check.pass { EXIT_OK } else { EXIT_SELF_CHECK };
    if !check.pass {
        run.notes.push(format!("self-check failed: {check:?}"));
    }
    let report = OptimizeReport {
        set: set.clone(),
        config: cfg.clone(),
        result,
        self_check: check,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("state,copy,fidelity\n");
            for s in &report.result.per_state_fidelities {
                writeln!(out, "{},{},{:.12}", s.state, s.copy, s.fidelity)
                    .expect("write to string");
            }
            out
        }
    };
    run.emit_primary(&body)?;
    eprintln!(
        "objective {:.12}  min fidelity {:.12}  spread {:.2e}  restarts at best {}/{}",
        report.result.objective,
        report.result.min_fidelity,
        report.result.spread,
        report.result.restarts_hitting_best,
        cfg.restarts
    );
    run.finish(
        serde_json::to_value(cfg).expect("config serializes"),
        cfg.seed,
        code,
    )
}

#[derive(Debug, Serialize)]
pub struct ScanReport {
    pub config: OptimizationConfig,
    pub complete: bool,
    pub summary: ScanSummary,
}

pub fn run_scan(
    resolution: usize,
    cfg: &OptimizationConfig,
    budget: Option<Duration>,
    format: Format,
    mut run: Run,
) -> Result<u8, Failure> {
    cfg.validate()?;
    let grid: ScanGrid = scan_equator_with_budget(resolution, cfg, budget)?;
    let summary = grid.summary();
    let body = match format {
        Format::Csv => grid.to_csv(),
        Format::Json => to_json(&grid),
    };
    run.emit_primary(&body)?;
    let report = ScanReport {
        config: cfg.clone(),
        complete: grid.complete,
        summary,
    };
    run.emit_sidecar("summary.json", &to_json(&report))?;
    let code = if !grid.complete {
        run.notes.push(format!(
            "time budget exhausted: {} of {} non-degenerate cells computed",
            report.summary.computed_cells,
            resolution * resolution - report.summary.degenerate_cells
        ));
        EXIT_BUDGET
    } else if report.summary.located {
        EXIT_OK
    } else {
        run.notes
            .push("minimum cells are not the two 120/240 permutations".into());
        EXIT_SELF_CHECK
    };
    eprintln!(
        "minimum {:.12} at {:?}{}",
        report.summary.minimum,
        report.summary.minima_deg,
        if report.summary.grid_limited {
            " (grid-limited)"
        } else {
            ""
        }
    );
    run.finish(
        serde_json::to_value(cfg).expect("config serializes"),
        cfg.seed,
        code,
    )
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Serialize)]
pub struct NCloneReport {
    pub n: usize,
    pub parity: Parity,
    pub bound: f64,
    pub objective: f64,
    pub bound_gap: f64,
    /// Best machine found, on the symmetric (Dicke) basis.
    pub machine: SymmetricNCloner,
    /// Largest gap between closed-form and brute-force fidelities of the
    /// best machine; absent above six copies.
    pub oracle_delta: Option<f64>,
    pub config: OptimizationConfig,
    pub pass: bool,
}

/// Phases at which the closed form is compared with brute force.
const ORACLE_PHASES: usize = 20;

pub fn run_nclone(
    n: usize,
    cfg: &OptimizationConfig,
    format: Format,
    mut run: Run,
) -> Result<u8, Failure> {
    let result = optimize_n(n, cfg)?;
    let machine = result.best.to_symmetric_n()?;
    let bound = closed_form_bound(BoundKind::Phase1ToN, n)?;
    let oracle_delta = (n <= MAX_BRUTEFORCE_COPIES).then(|| {
        (0..ORACLE_PHASES)
            .map(|k| 0.1 + TAU * k as f64 / ORACLE_PHASES as f64)
            .map(|phi| {
                let brute = n_clone_fidelity_bruteforce(&machine, phi).expect("n within range");
                (n_clone_fidelity(&machine, phi) - brute).abs()
            })
            .fold(0.0, f64::max)
    });
    let bound_gap = (result.objective - bound).abs();
    let pass = bound_gap < NCLONE_TOL && oracle_delta.is_none_or(|d| d < ORACLE_TOL);
    let mut c = cfg.clone();
    c.copies = n;
    c.symmetric = true;
    let report = NCloneReport {
        n,
        parity: if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        },
        bound,
        objective: result.objective,
        bound_gap,
        machine,
        oracle_delta,
        config: c,
        pass,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("i,a_re,a_im,b_re,b_im\n");
            for (i, (a, b)) in report
                .machine
                .a()
                .iter()
                .zip(report.machine.b())
                .enumerate()
            {
                writeln!(
                    out,
                    "{i},{:.12},{:.12},{:.12},{:.12}",
                    a.re, a.im, b.re, b.im
                )
                .expect("write to string");
            }
            out
        }
    };
    run.emit_primary(&body)?;
    eprintln!(
        "n = {n}: objective {:.12}  bound {:.12}  gap {:.2e}{}",
        report.objective,
        report.bound,
        report.bound_gap,
        report
            .oracle_delta
            .map(|d| format!("  oracle delta {d:.2e}"))
            .unwrap_or_default()
    );
    let code = if pass { EXIT_OK } else { EXIT_SELF_CHECK };
    if !pass {
        run.notes.push("optimum or oracle outside tolerance".into());
    }
    run.finish(
        serde_json::to_value(&report.config).expect("config serializes"),
        cfg.seed,
        code,
    )
}
