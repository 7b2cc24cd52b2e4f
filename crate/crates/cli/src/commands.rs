//! Command implementations: resolve the effective config, run the library
//! pipeline, emit the envelope and side files.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use xsqueeze_core::scaling::{GainPeak, GainSweepConfig};
use xsqueeze_core::*;

use crate::config::{pick, require, FileConfig};
use crate::envelope::emit;
use crate::output::{husimi_csv, parse_sweep_csv, sweep_csv, write_atomic};
use crate::{CliError, ExtremeStateArgs, HusimiArgs, OptimizeArgs, RamseyArgs, SweepArgs};

const DEFAULT_GAMMA: f64 = 0.36;
const DEFAULT_TOLERANCE: f64 = 1e-10;
const DEFAULT_GRID: (usize, usize) = (64, 128);

fn parse_grid(spec: &str) -> Result<(usize, usize), CliError> {
    let mut parts = spec.split(['x', 'X']);
    let bad = || CliError::Validation(format!("grid must look like 64x128, got {spec:?}"));
    let n_theta: usize = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let n_phi: usize = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((n_theta, n_phi))
}

fn parse_atom_list(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("bad atom number {s:?}")))
        })
        .collect()
}

/// Either a comma list `0.1,0.2` or a range `start:end:count`.
fn parse_float_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Validation(format!(
                "range must be start:end:count, got {spec:?}"
            )));
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad range start {:?}", parts[0])))?;
        let end: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad range end {:?}", parts[1])))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad range count {:?}", parts[2])))?;
        if count < 2 {
            return Err(CliError::Validation("range count must be >= 2".into()));
        }
        Ok((0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect())
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("bad grid value {s:?}")))
            })
            .collect()
    }
}

// ---------------------------------------------------------------- extreme

#[derive(Debug, Serialize)]
struct ExtremeConfig {
    atoms: usize,
    contrast: f64,
    tolerance: f64,
    husimi: Option<String>,
    csv: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExtremePayload {
    n_atoms: usize,
    target_contrast: f64,
    achieved_contrast: f64,
    omega_over_chi: f64,
    ground_energy: f64,
    xi2: f64,
    gain_db: f64,
    min_perp_variance: f64,
    squeezed_direction: [f64; 3],
    mean_spin: [f64; 3],
    husimi_csv: Option<String>,
}

pub fn extreme_state(
    args: ExtremeStateArgs,
    file: &FileConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let config = ExtremeConfig {
        atoms: require(args.atoms, file.atoms, "atoms")?,
        contrast: require(args.contrast, file.contrast, "contrast")?,
        tolerance: pick(args.tolerance, file.tolerance, DEFAULT_TOLERANCE),
        husimi: args.husimi.clone().or_else(|| file.husimi.clone()),
        csv: args.csv.as_ref().map(|p| p.display().to_string()),
    };
    let system = SpinSystem::new(config.atoms)?;
    let solution = solve_extreme(&system, config.contrast, config.tolerance)?;
    let report = wineland_xi2(&solution.state)?;

    let mut husimi_path = None;
    if let Some(spec) = &config.husimi {
        let (n_theta, n_phi) = parse_grid(spec)?;
        let grid = husimi_grid(&solution.state, n_theta, n_phi)?;
        let path = args
            .csv
            .clone()
            .unwrap_or_else(|| std::path::PathBuf::from("husimi.csv"));
        write_atomic(&path, husimi_csv(&grid).as_bytes())?;
        husimi_path = Some(path.display().to_string());
    }

    let payload = ExtremePayload {
        n_atoms: config.atoms,
        target_contrast: config.contrast,
        achieved_contrast: solution.achieved_contrast,
        omega_over_chi: solution.omega_over_chi,
        ground_energy: solution.ground_energy,
        xi2: solution.xi2,
        gain_db: gain_db(solution.xi2),
        min_perp_variance: report.min_perp_variance,
        squeezed_direction: report.squeezed_direction.components(),
        mean_spin: report.mean_spin,
        husimi_csv: husimi_path,
    };
    emit("extreme-state", config, payload, started, out)
}

// --------------------------------------------------------------- optimize

#[derive(Debug, Serialize)]
struct OptimizeCliConfig {
    atoms: usize,
    contrast: f64,
    pulses: usize,
    q_tilde: Option<f64>,
    seed: u64,
    starts: usize,
    gamma: f64,
    max_iterations: usize,
    snapshots: Option<String>,
    husimi: Option<String>,
}

#[derive(Debug, Serialize)]
struct OptimizePayload {
    n_atoms: usize,
    target_contrast: f64,
    target_xi2: f64,
    mode: &'static str,
    pulse_pairs: Vec<(f64, f64)>,
    epsilon: f64,
    xi2_generated: f64,
    gain_db_generated: f64,
    q_tilde: f64,
    c_sc: f64,
    xi2_corrected: f64,
    gain_db_corrected: f64,
    start_index: usize,
    converged: bool,
    snapshots: Option<Vec<String>>,
}

pub fn optimize(args: OptimizeArgs, file: &FileConfig, out: Option<&Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let config = OptimizeCliConfig {
        atoms: require(args.atoms, file.atoms, "atoms")?,
        contrast: require(args.contrast, file.contrast, "contrast")?,
        pulses: pick(args.pulses, file.pulses, 4),
        q_tilde: args.q_tilde.or_else(|| file.q_tilde_number()),
        seed: pick(args.seed, file.seed, 0),
        starts: pick(args.starts, file.starts, 20),
        gamma: pick(args.gamma, file.gamma, DEFAULT_GAMMA),
        max_iterations: pick(args.max_iterations, file.max_iterations, 500),
        snapshots: args.snapshots.as_ref().map(|p| p.display().to_string()),
        husimi: args.husimi.clone().or_else(|| file.husimi.clone()),
    };
    let system = SpinSystem::new(config.atoms)?;
    let target = solve_extreme(&system, config.contrast, DEFAULT_TOLERANCE)?;
    let opt_config = OptimizationConfig {
        n_pulses: config.pulses,
        n_starts: config.starts,
        seed: config.seed,
        max_iterations: config.max_iterations,
        fixed_q_tilde: config.q_tilde,
        ..OptimizationConfig::default()
    };
    let (mode, result) = if config.q_tilde.is_some() {
        (
            "fixed-shear",
            optimize_fixed_shear(&system, &target, &opt_config)?,
        )
    } else {
        ("free", optimize_free(&system, &target, &opt_config)?)
    };

    let c_sc = LossModel::new(config.gamma)?.contrast_loss(result.q_tilde)?;
    let xi2_corrected = corrected_xi2(result.xi2_generated, c_sc)?;

    let snapshots = match &args.snapshots {
        Some(dir) => Some(write_snapshots(
            dir,
            &system,
            &result.sequence,
            config.husimi.as_deref(),
        )?),
        None => None,
    };

    let pulse_pairs = result
        .sequence
        .params()
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    let payload = OptimizePayload {
        n_atoms: config.atoms,
        target_contrast: config.contrast,
        target_xi2: target.xi2,
        mode,
        pulse_pairs,
        epsilon: result.epsilon,
        xi2_generated: result.xi2_generated,
        gain_db_generated: gain_db(result.xi2_generated),
        q_tilde: result.q_tilde,
        c_sc,
        xi2_corrected,
        gain_db_corrected: gain_db(xi2_corrected),
        start_index: result.start_index,
        converged: result.converged,
        snapshots,
    };
    emit("optimize", config, payload, started, out)
}

/// One Husimi grid per prefix of the sequence (index 0 is the initial
/// coherent state), written as CSV files into `dir`.
fn write_snapshots(
    dir: &Path,
    system: &SpinSystem,
    sequence: &PulseSequence,
    grid_spec: Option<&str>,
) -> Result<Vec<String>, CliError> {
    let (n_theta, n_phi) = match grid_spec {
        Some(spec) => parse_grid(spec)?,
        None => DEFAULT_GRID,
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut state = SpinState::coherent(system, FRAC_PI_2, 0.0);
    let mut paths = Vec::new();
    for (index, pulse) in std::iter::once(None)
        .chain(sequence.pulses().iter().map(Some))
        .enumerate()
    {
        if let Some(pulse) = pulse {
            state = match pulse {
                Pulse::Shear(q) => state.shear(*q),
                Pulse::RotateX(mu) => state.rotate(Axis::X, *mu),
            };
        }
        let grid = husimi_grid(&state, n_theta, n_phi)?;
        let path = dir.join(format!("pulse_{index:02}.csv"));
        write_atomic(&path, husimi_csv(&grid).as_bytes())?;
        paths.push(path.display().to_string());
    }
    Ok(paths)
}

// ------------------------------------------------------------------ sweep

#[derive(Debug, Serialize)]
struct SweepCliConfig {
    kind: String,
    atoms: Vec<usize>,
    contrast: Option<f64>,
    pulses: Option<usize>,
    q_grid: Option<Vec<f64>>,
    gamma: f64,
    seed: u64,
    starts: usize,
    csv: Option<String>,
    resume: bool,
}

#[derive(Debug, Serialize)]
struct FitEntry {
    q_tilde: Option<f64>,
    fit: PowerLawFit,
}

#[derive(Debug, Serialize)]
struct SweepPayload {
    kind: String,
    rows: Vec<SweepRow>,
    meta: SweepMeta,
    fits: Vec<FitEntry>,
    peaks: Option<Vec<GainPeak>>,
    reused_rows: usize,
    csv: Option<String>,
}

pub fn sweep(args: SweepArgs, file: &FileConfig, out: Option<&Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let kind = require(args.kind.clone(), file.kind.clone(), "kind")?;
    let atoms = parse_atom_list(&require(args.atoms.clone(), None, "atoms")?)?;
    if atoms.is_empty() {
        return Err(CliError::Validation("empty atom list".into()));
    }
    let q_spec = args.q_tilde.clone().or_else(|| file.q_tilde_spec());
    let config = SweepCliConfig {
        kind: kind.clone(),
        atoms: atoms.clone(),
        contrast: args.contrast.or(file.contrast),
        pulses: args.pulses.or(file.pulses),
        q_grid: match &q_spec {
            Some(spec) => Some(parse_float_grid(spec)?),
            None => None,
        },
        gamma: pick(args.gamma, file.gamma, DEFAULT_GAMMA),
        seed: pick(args.seed, file.seed, 0),
        starts: pick(args.starts, file.starts, 20),
        csv: args.csv.as_ref().map(|p| p.display().to_string()),
        resume: args.resume,
    };

    // Resume: reuse rows whose (N, q~) key is already in the CSV.
    let mut reused: Vec<SweepRow> = Vec::new();
    if config.resume {
        let path = args
            .csv
            .as_ref()
            .ok_or_else(|| CliError::Validation("--resume requires --csv".into()))?;
        if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            reused = parse_sweep_csv(&text)?;
        }
    }
    let have = |n: usize, q: Option<f64>| {
        reused
            .iter()
            .any(|r| r.n_atoms == n && r.q_tilde.map(f64::to_bits) == q.map(f64::to_bits))
    };

    let mut sweep_result: SweepTable = match kind.as_str() {
        "extreme-scaling" => {
            let contrast = config
                .contrast
                .ok_or_else(|| CliError::Validation("extreme-scaling needs --contrast".into()))?;
            let pending: Vec<usize> = atoms.iter().copied().filter(|&n| !have(n, None)).collect();
            sweep_extreme_scaling(&pending, contrast)?
        }
        "oat-scaling" => {
            let pending: Vec<usize> = atoms
                .iter()
                .copied()
                .filter(|&n| !reused.iter().any(|r| r.n_atoms == n))
                .collect();
            sweep_oat_scaling(&pending)?
        }
        "gain-vs-shear" => {
            let contrast = config
                .contrast
                .ok_or_else(|| CliError::Validation("gain-vs-shear needs --contrast".into()))?;
            let q_grid = config
                .q_grid
                .clone()
                .ok_or_else(|| CliError::Validation("gain-vs-shear needs --q-tilde".into()))?;
            let gain_config = GainSweepConfig {
                contrast,
                n_pulses: config.pulses.unwrap_or(4),
                gamma: config.gamma,
                seed: config.seed,
                n_starts: config.starts,
                max_iterations: 500,
            };
            // Cell seeds derive from (N, q~) values, so computing only the
            // missing cells reproduces what a full fresh run would produce.
            let mut rows = Vec::new();
            for &n in &atoms {
                let missing: Vec<f64> = q_grid
                    .iter()
                    .copied()
                    .filter(|&q| !have(n, Some(q)))
                    .collect();
                if missing.is_empty() {
                    continue;
                }
                let sweep = sweep_gain_vs_shear(&[n], &missing, &gain_config)?;
                rows.extend(sweep.table.rows);
            }
            SweepTable::new(
                rows,
                SweepMeta {
                    gamma: Some(config.gamma),
                    n_pulses: config.pulses,
                    seed: Some(config.seed),
                },
            )?
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown sweep kind {other:?} (extreme-scaling | oat-scaling | gain-vs-shear)"
            )))
        }
    };

    // Merge reused rows back in, ordered by (N, q~).
    let reused_rows = reused.len();
    let mut rows = reused;
    rows.append(&mut sweep_result.rows);
    rows.sort_by(|a, b| {
        (a.n_atoms, a.q_tilde.unwrap_or(-1.0))
            .partial_cmp(&(b.n_atoms, b.q_tilde.unwrap_or(-1.0)))
            .expect("no NaN keys")
    });
    let table = SweepTable::new(rows, sweep_result.meta.clone())?;
    let peaks = if kind == "gain-vs-shear" {
        Some(xsqueeze_core::scaling::gain_peaks(&table))
    } else {
        None
    };

    // Fits: xi2 vs N for the scaling sweeps, per-q~ corrected fits for the
    // gain sweep (when at least three N values are present).
    let mut fits = Vec::new();
    match kind.as_str() {
        "extreme-scaling" | "oat-scaling" => {
            if table.rows.len() >= 3 {
                let points: Vec<(f64, f64)> = table
                    .rows
                    .iter()
                    .map(|r| (r.n_atoms as f64, r.xi2))
                    .collect();
                fits.push(FitEntry {
                    q_tilde: None,
                    fit: power_law_fit(&points)?,
                });
            }
        }
        "gain-vs-shear" => {
            if atoms.len() >= 3 {
                if let Some(q_grid) = &config.q_grid {
                    for &q in q_grid {
                        let points: Vec<(f64, f64)> = table
                            .rows
                            .iter()
                            .filter(|r| r.q_tilde.map(f64::to_bits) == Some(q.to_bits()))
                            .filter_map(|r| r.xi2_corrected.map(|x| (r.n_atoms as f64, x)))
                            .collect();
                        if points.len() >= 3 {
                            fits.push(FitEntry {
                                q_tilde: Some(q),
                                fit: power_law_fit(&points)?,
                            });
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }

    if let Some(path) = &args.csv {
        write_atomic(path, sweep_csv(&table).as_bytes())?;
    }

    let payload = SweepPayload {
        kind,
        rows: table.rows.clone(),
        meta: table.meta.clone(),
        fits,
        peaks,
        reused_rows,
        csv: config.csv.clone(),
    };
    emit("sweep", config, payload, started, out)
}

// ----------------------------------------------------------------- ramsey

#[derive(Debug, Serialize)]
struct RamseyCliConfig {
    atoms: usize,
    state: String,
    contrast: Option<f64>,
    pulses: Option<usize>,
    seed: u64,
    starts: usize,
    phases: String,
    readout: String,
    pre_rotation: f64,
}

#[derive(Debug, Serialize)]
struct RamseyRow {
    phase: f64,
    delta_phi: Option<f64>,
    divergent: bool,
}

#[derive(Debug, Serialize)]
struct RamseyPayload {
    n_atoms: usize,
    state: String,
    xi2: f64,
    xi: f64,
    sql_delta_phi: f64,
    delta_phi_at_zero: Option<f64>,
    /// |delta_phi(0) sqrt(N) - xi| / xi.
    xi_residual: Option<f64>,
    rows: Vec<RamseyRow>,
}

/// Shared state-selection knobs for `ramsey` and `husimi`.
struct StateSpec {
    contrast: Option<f64>,
    pulses: usize,
    seed: u64,
    starts: usize,
    theta: f64,
    phi: f64,
}

/// Builds the requested state; the flag says whether it is squeezed (and so
/// wants the default alignment rotation).
fn build_state(
    kind: &str,
    system: &SpinSystem,
    spec: &StateSpec,
) -> Result<(SpinState, bool), CliError> {
    match kind {
        "css" => Ok((SpinState::coherent(system, spec.theta, spec.phi), false)),
        "extreme" => {
            let contrast = spec
                .contrast
                .ok_or_else(|| CliError::Validation("state 'extreme' needs --contrast".into()))?;
            let sol = solve_extreme(system, contrast, DEFAULT_TOLERANCE)?;
            Ok((sol.state, true))
        }
        "sequence" => {
            let contrast = spec
                .contrast
                .ok_or_else(|| CliError::Validation("state 'sequence' needs --contrast".into()))?;
            let target = solve_extreme(system, contrast, DEFAULT_TOLERANCE)?;
            let config = OptimizationConfig {
                n_pulses: spec.pulses,
                n_starts: spec.starts,
                seed: spec.seed,
                ..OptimizationConfig::default()
            };
            let result = optimize_free(system, &target, &config)?;
            let initial = SpinState::coherent(system, FRAC_PI_2, 0.0);
            Ok((propagate(&initial, &result.sequence), true))
        }
        other => Err(CliError::Validation(format!(
            "unknown state {other:?} (css | extreme | sequence)"
        ))),
    }
}

pub fn ramsey(args: RamseyArgs, file: &FileConfig, out: Option<&Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let state_kind = pick(args.state.clone(), file.state.clone(), "css".into());
    let atoms = require(args.atoms, file.atoms, "atoms")?;
    let phases_spec = pick(
        args.phases.clone(),
        file.phases.clone(),
        "0:3.14159265:13".into(),
    );
    let readout_name = pick(args.readout.clone(), file.readout.clone(), "x".into());
    let readout = match readout_name.as_str() {
        "x" => ReadoutAxis::X,
        "y" => ReadoutAxis::Y,
        other => {
            return Err(CliError::Validation(format!(
                "readout must be x or y, got {other:?}"
            )))
        }
    };
    let system = SpinSystem::new(atoms)?;
    let (raw_state, squeezed) = build_state(
        &state_kind,
        &system,
        &StateSpec {
            contrast: args.contrast.or(file.contrast),
            pulses: pick(args.pulses, file.pulses, 4),
            seed: pick(args.seed, file.seed, 0),
            starts: pick(args.starts, file.starts, 20),
            theta: FRAC_PI_2,
            phi: 0.0,
        },
    )?;
    // Alignment rotation before free evolution: squeezed states carry their
    // narrow axis along z and need it mapped onto the measured quadrature.
    let pre_rotation = args
        .pre_rotation
        .or(file.pre_rotation)
        .unwrap_or(if squeezed { -FRAC_PI_2 } else { 0.0 });
    let config = RamseyCliConfig {
        atoms,
        state: state_kind.clone(),
        contrast: args.contrast.or(file.contrast),
        pulses: args.pulses.or(file.pulses),
        seed: pick(args.seed, file.seed, 0),
        starts: pick(args.starts, file.starts, 20),
        phases: phases_spec.clone(),
        readout: readout_name,
        pre_rotation,
    };
    let state = raw_state.rotate(Axis::X, pre_rotation);

    let xi2 = wineland_xi2(&state)?.xi2;
    let sqrt_n = (atoms as f64).sqrt();
    let phases = parse_float_grid(&phases_spec)?;
    let rows: Vec<RamseyRow> = phases
        .iter()
        .map(|&phase| match ramsey_sensitivity(&state, phase, readout) {
            Ok(delta_phi) => RamseyRow {
                phase,
                delta_phi: Some(delta_phi),
                divergent: false,
            },
            Err(Error::DivergentSensitivity(_)) => RamseyRow {
                phase,
                delta_phi: None,
                divergent: true,
            },
            Err(_) => RamseyRow {
                phase,
                delta_phi: None,
                divergent: true,
            },
        })
        .collect();
    let delta_phi_at_zero = ramsey_sensitivity(&state, 0.0, readout).ok();
    let xi = xi2.sqrt();
    let xi_residual = delta_phi_at_zero.map(|d| (d * sqrt_n - xi).abs() / xi);

    if let Some(path) = &args.csv {
        let mut text = String::from("phase,delta_phi,divergent\n");
        for row in &rows {
            text.push_str(&format!(
                "{},{},{}\n",
                row.phase,
                row.delta_phi.map(|v| v.to_string()).unwrap_or_default(),
                row.divergent
            ));
        }
        write_atomic(path, text.as_bytes())?;
    }

    let payload = RamseyPayload {
        n_atoms: atoms,
        state: state_kind,
        xi2,
        xi,
        sql_delta_phi: 1.0 / sqrt_n,
        delta_phi_at_zero,
        xi_residual,
        rows,
    };
    emit("ramsey", config, payload, started, out)
}

// ----------------------------------------------------------------- husimi

#[derive(Debug, Serialize)]
struct HusimiCliConfig {
    atoms: usize,
    state: String,
    contrast: Option<f64>,
    theta: f64,
    phi: f64,
    pulses: Option<usize>,
    seed: u64,
    starts: usize,
    grid: String,
    csv: String,
}

#[derive(Debug, Serialize)]
struct HusimiPayload {
    n_atoms: usize,
    state: String,
    n_theta: usize,
    n_phi: usize,
    /// (2S+1)/(4 pi) integral of Q; 1 up to quadrature resolution.
    normalization: f64,
    max_value: f64,
    csv: String,
}

pub fn husimi(args: HusimiArgs, file: &FileConfig, out: Option<&Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let atoms = require(args.atoms, file.atoms, "atoms")?;
    let state_kind = pick(args.state.clone(), file.state.clone(), "css".into());
    let grid_spec = pick(
        args.husimi.clone(),
        file.husimi.clone(),
        format!("{}x{}", DEFAULT_GRID.0, DEFAULT_GRID.1),
    );
    let (n_theta, n_phi) = parse_grid(&grid_spec)?;
    let csv_path = args
        .csv
        .clone()
        .unwrap_or_else(|| std::path::PathBuf::from("husimi.csv"));
    let config = HusimiCliConfig {
        atoms,
        state: state_kind.clone(),
        contrast: args.contrast.or(file.contrast),
        theta: pick(args.theta, file.theta, FRAC_PI_2),
        phi: pick(args.phi, file.phi, 0.0),
        pulses: args.pulses.or(file.pulses),
        seed: pick(args.seed, file.seed, 0),
        starts: pick(args.starts, file.starts, 20),
        grid: grid_spec,
        csv: csv_path.display().to_string(),
    };
    let system = SpinSystem::new(atoms)?;
    let (state, _) = build_state(
        &state_kind,
        &system,
        &StateSpec {
            contrast: config.contrast,
            pulses: config.pulses.unwrap_or(4),
            seed: config.seed,
            starts: config.starts,
            theta: config.theta,
            phi: config.phi,
        },
    )?;
    let grid = husimi_grid(&state, n_theta, n_phi)?;
    write_atomic(&csv_path, husimi_csv(&grid).as_bytes())?;
    let max_value = grid.values.iter().copied().fold(0.0, f64::max);
    let payload = HusimiPayload {
        n_atoms: atoms,
        state: state_kind,
        n_theta,
        n_phi,
        normalization: grid.normalization(),
        max_value,
        csv: csv_path.display().to_string(),
    };
    emit("husimi", config, payload, started, out)
}
