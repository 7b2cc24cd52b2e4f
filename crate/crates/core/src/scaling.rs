//! Sweep harness and power-law fits for scaling studies.
//!
//! Rows are computed independently (in parallel via rayon) and assembled in
//! a fixed order, so a table is reproducible bit-for-bit from its config and
//! seed. Per-row seeds are split off the sweep seed with a splitmix64 step
//! keyed by the row index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{SpinState, SpinSystem};
use crate::error::{Error, Result};
use crate::extreme::solve_extreme;
use crate::linalg::golden_section;
use crate::metrology::{self, LossModel};
use crate::optimize::{optimize_fixed_shear, OptimizationConfig};

/// One record of a parameter sweep. Optional fields are absent when the
/// sweep kind has no meaning for them (e.g. no omega/chi in a pulse sweep).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_atoms: usize,
    pub contrast_target: Option<f64>,
    pub q_tilde: Option<f64>,
    pub epsilon: Option<f64>,
    pub xi2: f64,
    pub xi2_corrected: Option<f64>,
    pub gain_db: f64,
    pub omega_over_chi: Option<f64>,
}

/// Deterministic sweep metadata; wall-clock information lives in the CLI
/// envelope so the table itself stays byte-reproducible.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepMeta {
    pub gamma: Option<f64>,
    pub n_pulses: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

impl SweepTable {
    /// Validates the (N, contrast, q_tilde) uniqueness invariant.
    pub fn new(rows: Vec<SweepRow>, meta: SweepMeta) -> Result<Self> {
        let mut keys: Vec<(usize, u64, u64)> = rows
            .iter()
            .map(|r| {
                (
                    r.n_atoms,
                    r.contrast_target.unwrap_or(f64::NAN).to_bits(),
                    r.q_tilde.unwrap_or(f64::NAN).to_bits(),
                )
            })
            .collect();
        keys.sort_unstable();
        for pair in keys.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateSweepKey(pair[0].0));
            }
        }
        Ok(Self { rows, meta })
    }
}

/// Least-squares fit of y = a N^(-b) on log-log axes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

pub fn power_law_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for &(n, y) in points {
        if n < 1.0 || y <= 0.0 {
            return Err(Error::NonPositivePoint(n, y));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let count = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res < 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(PowerLawFit {
        prefactor: intercept.exp(),
        exponent: -slope,
        r_squared,
    })
}

/// Log-spaced grid of even atom numbers, deduplicated, endpoints included.
/// Even N keeps every contrast in (0, 1) reachable: with an odd atom number
/// the central Dicke doublet pins the minimum contrast at (N+1)/(2N) > 1/2.
pub fn log_spaced_atoms(min: usize, max: usize, count: usize) -> Vec<usize> {
    assert!(min >= 2 && max >= min && count >= 2);
    let lo = (min as f64).ln();
    let hi = (max as f64).ln();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let value = (lo + (hi - lo) * k as f64 / (count - 1) as f64).exp();
        let n = 2 * ((value / 2.0).round() as usize).max(1);
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

/// xi^2 of exp(-i q S_z^2) applied to the equatorial coherent state.
pub fn oat_xi2(system: &SpinSystem, q: f64) -> f64 {
    let css = SpinState::coherent(system, std::f64::consts::FRAC_PI_2, 0.0);
    let state = css.shear(q);
    metrology::wineland_xi2(&state)
        .map(|r| r.xi2)
        .unwrap_or(f64::INFINITY)
}

/// Outcome of the 1-D twisting-strength scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OatOptimum {
    pub shear: f64,
    pub xi2: f64,
    /// False when the best grid point sits on a scan edge.
    pub interior: bool,
}

const OAT_SCAN_POINTS: usize = 2000;

/// Best single-twist xi^2 for a system: 2000-point scan over
/// q in (0, 3 N^(-2/3)] followed by golden-section refinement around the
/// best bracket.
pub fn best_oat_xi2(system: &SpinSystem) -> OatOptimum {
    let q_max = 3.0 * (system.n_atoms() as f64).powf(-2.0 / 3.0);
    let qs: Vec<f64> = (1..=OAT_SCAN_POINTS)
        .map(|i| q_max * i as f64 / OAT_SCAN_POINTS as f64)
        .collect();
    let values: Vec<f64> = qs.iter().map(|&q| oat_xi2(system, q)).collect();
    let (idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    let interior = idx > 0 && idx + 1 < qs.len();
    let lo = if idx == 0 { qs[0] * 0.5 } else { qs[idx - 1] };
    let hi = if idx + 1 == qs.len() {
        qs[idx]
    } else {
        qs[idx + 1]
    };
    let (shear, xi2) = golden_section(|q| oat_xi2(system, q), lo, hi, 1e-12 * q_max);
    OatOptimum {
        shear,
        xi2,
        interior,
    }
}

/// One extreme-state solve and metrology evaluation per N.
pub fn sweep_extreme_scaling(n_list: &[usize], contrast: f64) -> Result<SweepTable> {
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    let rows: Vec<SweepRow> = sorted
        .par_iter()
        .map(|&n| -> Result<SweepRow> {
            let system = SpinSystem::new(n)?;
            let sol = solve_extreme(&system, contrast, 1e-10)?;
            Ok(SweepRow {
                n_atoms: n,
                contrast_target: Some(contrast),
                q_tilde: None,
                epsilon: None,
                xi2: sol.xi2,
                xi2_corrected: None,
                gain_db: metrology::gain_db(sol.xi2),
                omega_over_chi: Some(sol.omega_over_chi),
            })
        })
        .collect::<Result<_>>()?;
    SweepTable::new(rows, SweepMeta::default())
}

/// Best-twisting xi^2 per N; the q_tilde column records the normalized
/// shear of the optimum.
pub fn sweep_oat_scaling(n_list: &[usize]) -> Result<SweepTable> {
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    let rows: Vec<SweepRow> = sorted
        .par_iter()
        .map(|&n| -> Result<SweepRow> {
            let system = SpinSystem::new(n)?;
            let opt = best_oat_xi2(&system);
            Ok(SweepRow {
                n_atoms: n,
                contrast_target: None,
                q_tilde: Some((n as f64).sqrt() * opt.shear),
                epsilon: None,
                xi2: opt.xi2,
                xi2_corrected: None,
                gain_db: metrology::gain_db(opt.xi2),
                omega_over_chi: None,
            })
        })
        .collect::<Result<_>>()?;
    SweepTable::new(rows, SweepMeta::default())
}

/// Configuration for [`sweep_gain_vs_shear`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainSweepConfig {
    pub contrast: f64,
    pub n_pulses: usize,
    pub gamma: f64,
    pub seed: u64,
    pub n_starts: usize,
    pub max_iterations: usize,
}

impl Default for GainSweepConfig {
    fn default() -> Self {
        Self {
            contrast: 0.9,
            n_pulses: 4,
            gamma: 0.36,
            seed: 0,
            n_starts: 20,
            max_iterations: 500,
        }
    }
}

/// Loss-corrected gain maximum of one N-slice, refined by a parabola
/// through the three grid points bracketing the discrete argmax.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GainPeak {
    pub n_atoms: usize,
    pub q_tilde: f64,
    pub gain_db: f64,
    pub interior: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainSweep {
    pub table: SweepTable,
    pub peaks: Vec<GainPeak>,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-cell seed derived from the sweep seed and the cell values (not grid
/// indices), so any partition of a sweep reproduces the same rows.
pub fn cell_seed(seed: u64, n_atoms: usize, q_tilde: f64) -> u64 {
    splitmix64(seed ^ splitmix64((n_atoms as u64) ^ q_tilde.to_bits()))
}

/// Per (N, q_tilde) cell: fixed-shear optimization, then the corrected gain
/// through the loss model. The target solve is shared across the q grid of
/// each N.
pub fn sweep_gain_vs_shear(
    n_list: &[usize],
    q_grid: &[f64],
    config: &GainSweepConfig,
) -> Result<GainSweep> {
    if let Some(&q) = q_grid.iter().find(|q| **q < 0.0) {
        return Err(Error::NegativeShear(q));
    }
    let loss = LossModel::new(config.gamma)?;
    let mut sorted_n = n_list.to_vec();
    sorted_n.sort_unstable();

    // One system + target per N, reused across the q grid.
    let targets: Vec<(usize, SpinSystem, crate::extreme::ExtremeSolution)> = sorted_n
        .par_iter()
        .map(|&n| -> Result<_> {
            let system = SpinSystem::new(n)?;
            let sol = solve_extreme(&system, config.contrast, 1e-10)?;
            Ok((n, system, sol))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..sorted_n.len())
        .flat_map(|i| (0..q_grid.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(i, j)| -> Result<SweepRow> {
            let (n, ref system, ref target) = targets[i];
            let q_tilde = q_grid[j];
            let row_seed = cell_seed(config.seed, n, q_tilde);
            let opt_config = OptimizationConfig {
                n_pulses: config.n_pulses,
                n_starts: config.n_starts,
                seed: row_seed,
                max_iterations: config.max_iterations,
                fixed_q_tilde: Some(q_tilde),
                ..OptimizationConfig::default()
            };
            let result = optimize_fixed_shear(system, target, &opt_config)?;
            let c_sc = loss.contrast_loss(q_tilde)?;
            let xi2_corrected = metrology::corrected_xi2(result.xi2_generated, c_sc)?;
            Ok(SweepRow {
                n_atoms: n,
                contrast_target: Some(config.contrast),
                q_tilde: Some(q_tilde),
                epsilon: Some(result.epsilon),
                xi2: result.xi2_generated,
                xi2_corrected: Some(xi2_corrected),
                gain_db: metrology::gain_db(xi2_corrected),
                omega_over_chi: Some(target.omega_over_chi),
            })
        })
        .collect::<Result<_>>()?;

    let table = SweepTable::new(
        rows,
        SweepMeta {
            gamma: Some(config.gamma),
            n_pulses: Some(config.n_pulses),
            seed: Some(config.seed),
        },
    )?;
    let peaks = gain_peaks(&table);
    Ok(GainSweep { table, peaks })
}

/// Peak per atom number, recomputed from a (possibly merged) gain table.
pub fn gain_peaks(table: &SweepTable) -> Vec<GainPeak> {
    let mut atoms: Vec<usize> = table.rows.iter().map(|r| r.n_atoms).collect();
    atoms.sort_unstable();
    atoms.dedup();
    atoms
        .into_iter()
        .filter_map(|n| {
            let mut slice: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| r.n_atoms == n)
                .filter_map(|r| r.q_tilde.map(|q| (q, r.gain_db)))
                .collect();
            if slice.is_empty() {
                return None;
            }
            slice.sort_by(|a, b| a.0.total_cmp(&b.0));
            Some(peak_of_slice(n, &slice))
        })
        .collect()
}

fn peak_of_slice(n_atoms: usize, slice: &[(f64, f64)]) -> GainPeak {
    let (idx, _) = slice
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty slice");
    if idx == 0 || idx + 1 == slice.len() {
        return GainPeak {
            n_atoms,
            q_tilde: slice[idx].0,
            gain_db: slice[idx].1,
            interior: false,
        };
    }
    let (x0, y0) = slice[idx - 1];
    let (x1, y1) = slice[idx];
    let (x2, y2) = slice[idx + 1];
    let denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    let q_tilde = if denom.abs() < 1e-300 {
        x1
    } else {
        x1 - 0.5 * ((x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0)) / denom
    };
    GainPeak {
        n_atoms,
        q_tilde,
        gain_db: y1,
        interior: true,
    }
}
