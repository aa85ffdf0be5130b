//! Contour scan of the best trio fidelity over the equator.
//!
//! Cell `(i, j)` holds the optimized objective for the trio
//! `{0, φ₂ = 2πi/N, φ₃ = 2πj/N}`. Cells where two states coincide are
//! flagged and left out of every summary statistic.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimize, Mode, OptimizationConfig};
use crate::error::{Error, Result};
use crate::states::{BlochPoint, InputSet};

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 8;

/// Two states are degenerate when `1 − |⟨a|b⟩| < DEGENERACY_GAP`.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Cells within this of the grid minimum are reported as minima.
pub const MINIMUM_TIE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub resolution: usize,
    pub phi2_values: Vec<f64>,
    pub phi3_values: Vec<f64>,
    /// `fidelity[i][j]` for `(phi2_values[i], phi3_values[j])`; NaN if not computed.
    pub fidelity: Vec<Vec<f64>>,
    pub degenerate_mask: Vec<Vec<bool>>,
    /// False when a time budget ran out before every cell was computed.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub resolution: usize,
    pub minimum: f64,
    /// Minimum cells as `[φ₂, φ₃]` in degrees.
    pub minima_deg: Vec<[f64; 2]>,
    /// True when 120° and 240° are not grid points.
    pub grid_limited: bool,
    /// Minima sit at (120°, 240°) and (240°, 120°), or within one grid step
    /// of them when the grid is too coarse to contain those points.
    pub located: bool,
    pub symmetry_defect: f64,
    pub computed_cells: usize,
    pub degenerate_cells: usize,
}

/// Default settings for scan cells: equal-fidelity penalty on symmetric
/// economic machines with 40 restarts.
pub fn scan_config() -> OptimizationConfig {
    OptimizationConfig {
        restarts: 40,
        mode: Mode::EqualFidelityPenalty,
        symmetric: true,
        ..Default::default()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of scan cell `index` for a run seeded with `seed`.
pub fn cell_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

fn grid_angles(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|k| std::f64::consts::TAU * k as f64 / resolution as f64)
        .collect()
}

fn trio_at(phi2: f64, phi3: f64) -> InputSet {
    let pts = vec![
        BlochPoint::equatorial(0.0),
        BlochPoint::equatorial(phi2),
        BlochPoint::equatorial(phi3),
    ];
    InputSet::custom("scan-cell", pts).expect("three points")
}

fn is_degenerate(set: &InputSet) -> bool {
    let p = set.points();
    (0..p.len()).any(|a| (a + 1..p.len()).any(|b| 1.0 - p[a].overlap(&p[b]) < DEGENERACY_GAP))
}

/// Full scan with no time limit.
pub fn scan_equator(resolution: usize, cfg: &OptimizationConfig) -> Result<ScanGrid> {
    scan_equator_with_budget(resolution, cfg, None)
}

/// Scan that stops starting new cells once `budget` has elapsed; cells never
/// started are NaN and `complete` is false.
pub fn scan_equator_with_budget(
    resolution: usize,
    cfg: &OptimizationConfig,
    budget: Option<Duration>,
) -> Result<ScanGrid> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            allowed: ">= 8",
        });
    }
    cfg.validate()?;
    let start = Instant::now();
    let angles = grid_angles(resolution);
    let cells: Vec<(f64, bool)> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let set = trio_at(angles[idx / resolution], angles[idx % resolution]);
            if is_degenerate(&set) {
                return Ok((f64::NAN, true));
            }
            if budget.is_some_and(|b| start.elapsed() > b) {
                return Ok((f64::NAN, false));
            }
            let c = cfg.clone().with_seed(cell_seed(cfg.seed, idx as u64));
            optimize(&set, &c).map(|r| (r.objective, false))
        })
        .collect::<Result<_>>()?;

    let complete = cells.iter().all(|&(f, d)| d || !f.is_nan());
    let (fidelity, degenerate_mask) = cells
        .chunks(resolution)
        .map(|row| row.iter().copied().unzip())
        .unzip();
    Ok(ScanGrid {
        resolution,
        phi2_values: angles.clone(),
        phi3_values: angles,
        fidelity,
        degenerate_mask,
        complete,
    })
}

impl ScanGrid {
    fn usable(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.resolution;
        (0..n * n)
            .map(move |k| (k / n, k % n))
            .filter(|&(i, j)| !self.degenerate_mask[i][j] && !self.fidelity[i][j].is_nan())
            .map(|(i, j)| (i, j, self.fidelity[i][j]))
    }

    /// CSV with header `phi2_deg,phi3_deg,fidelity,degenerate`, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi2_deg,phi3_deg,fidelity,degenerate\n");
        for (i, p2) in self.phi2_values.iter().enumerate() {
            for (j, p3) in self.phi3_values.iter().enumerate() {
                let f = self.fidelity[i][j];
                let fs = if f.is_nan() {
                    "nan".to_string()
                } else {
                    format!("{f:.12}")
                };
                writeln!(
                    out,
                    "{:.6},{:.6},{},{}",
                    p2.to_degrees(),
                    p3.to_degrees(),
                    fs,
                    self.degenerate_mask[i][j]
                )
                .expect("write to string");
            }
        }
        out
    }

    /// Largest `|F(φ₂, φ₃) − F(φ₃, φ₂)|` over cells computed on both sides.
    pub fn symmetry_defect(&self) -> f64 {
        self.usable()
            .map(|(i, j, f)| {
                let g = self.fidelity[j][i];
                if g.is_nan() {
                    0.0
                } else {
                    (f - g).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Smallest value over non-degenerate computed cells.
    pub fn minimum(&self) -> Option<f64> {
        self.usable().map(|(_, _, f)| f).min_by(f64::total_cmp)
    }

    /// Indices of cells within `tie_tol` of the minimum.
    pub fn minimum_cells(&self, tie_tol: f64) -> Vec<(usize, usize)> {
        match self.minimum() {
            None => Vec::new(),
            Some(m) => self
                .usable()
                .filter(|&(_, _, f)| f <= m + tie_tol)
                .map(|(i, j, _)| (i, j))
                .collect(),
        }
    }

    pub fn summary(&self) -> ScanSummary {
        let n = self.resolution;
        let cells = self.minimum_cells(MINIMUM_TIE_TOL);
        let grid_limited = !n.is_multiple_of(3);
        // targets in units of the grid step
        let t1 = n as f64 / 3.0;
        let t2 = 2.0 * n as f64 / 3.0;
        let circ = |a: usize, t: f64| {
            let d = (a as f64 - t).rem_euclid(n as f64);
            d.min(n as f64 - d)
        };
        let near = |(i, j): (usize, usize), a: f64, b: f64| {
            if grid_limited {
                circ(i, a) <= 1.0 && circ(j, b) <= 1.0
            } else {
                circ(i, a) == 0.0 && circ(j, b) == 0.0
            }
        };
        let located = !cells.is_empty()
            && cells.iter().all(|&c| near(c, t1, t2) || near(c, t2, t1))
            && cells.iter().any(|&c| near(c, t1, t2))
            && cells.iter().any(|&c| near(c, t2, t1));
        let step = 360.0 / n as f64;
        ScanSummary {
            resolution: n,
            minimum: self.minimum().unwrap_or(f64::NAN),
            minima_deg: cells
                .iter()
                .map(|&(i, j)| [i as f64 * step, j as f64 * step])
                .collect(),
            grid_limited,
            located,
            symmetry_defect: self.symmetry_defect(),
            computed_cells: self.usable().count(),
            degenerate_cells: self
                .degenerate_mask
                .iter()
                .flatten()
                .filter(|&&d| d)
                .count(),
        }
    }
}
