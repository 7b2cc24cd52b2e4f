//! Variational optimal squeezed states at fixed contrast.
//!
//! The state minimizing the transverse S_z variance at fixed mean spin
//! <S_x> is the ground state of H = chi S_z^2 - Omega S_x; only the ratio
//! Omega/chi matters, so chi is normalized to 1 throughout. The ratio that
//! realizes a requested contrast <S_x>/S is found by bisection on
//! log(Omega/chi), relying on the monotonicity of <S_x> in the ratio.

use crate::dicke::{SpinState, SpinSystem};
use crate::error::{Error, Result};
use crate::linalg::SymTridiag;
use crate::metrology;

/// Default |achieved - target| tolerance for [`solve_extreme`].
pub const DEFAULT_CONTRAST_TOLERANCE: f64 = 1e-10;

/// Extreme spin-squeezed state at a fixed contrast, together with the ratio
/// that generates it and its figures of merit.
#[derive(Debug, Clone)]
pub struct ExtremeSolution {
    pub state: SpinState,
    pub omega_over_chi: f64,
    /// <S_x>/S actually achieved by the returned state.
    pub achieved_contrast: f64,
    /// Wineland squeezing parameter of the state.
    pub xi2: f64,
    /// Ground-state energy of S_z^2 - (Omega/chi) S_x, in units of chi.
    pub ground_energy: f64,
}

fn hamiltonian(system: &SpinSystem, ratio: f64) -> SymTridiag {
    let diag: Vec<f64> = system.m_values().iter().map(|m| m * m).collect();
    let off: Vec<f64> = system.couplings().iter().map(|c| -ratio * c).collect();
    SymTridiag::new(diag, off)
}

/// <S_x> of a real amplitude vector, using the tridiagonal couplings.
fn sx_expectation(system: &SpinSystem, vector: &[f64]) -> f64 {
    system
        .couplings()
        .iter()
        .enumerate()
        .map(|(i, c)| 2.0 * c * vector[i] * vector[i + 1])
        .sum()
}

fn ground_vector(system: &SpinSystem, ratio: f64) -> Result<(Vec<f64>, f64)> {
    let h = hamiltonian(system, ratio);
    let (energy, mut vector) = h.smallest_eigenpair()?;
    // Deterministic phase: largest-magnitude entry real positive. For
    // Omega/chi > 0 the ground state is a Perron vector, so this makes every
    // component positive and <S_x> > 0.
    let (idx, _) = vector
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty vector");
    if vector[idx] < 0.0 {
        for v in &mut vector {
            *v = -*v;
        }
    }
    Ok((vector, energy))
}

/// Ground state of S_z^2 - (omega_over_chi) S_x and its energy.
pub fn ground_state(system: &SpinSystem, omega_over_chi: f64) -> Result<(SpinState, f64)> {
    if !omega_over_chi.is_finite() || omega_over_chi <= 0.0 {
        return Err(Error::NonPositiveRatio(omega_over_chi));
    }
    let (vector, energy) = ground_vector(system, omega_over_chi)?;
    Ok((SpinState::from_real_normalized(system, &vector), energy))
}

/// Solves for the Omega/chi ratio whose ground state has
/// <S_x>/S = target_contrast, to within `tolerance`.
pub fn solve_extreme(
    system: &SpinSystem,
    target_contrast: f64,
    tolerance: f64,
) -> Result<ExtremeSolution> {
    if !(target_contrast > 0.0 && target_contrast < 1.0) {
        return Err(Error::ContrastOutOfRange(target_contrast));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::NonPositiveTolerance(tolerance));
    }
    let spin = system.total_spin();
    let contrast_at = |ratio: f64| -> Result<f64> {
        let (vector, _) = ground_vector(system, ratio)?;
        Ok(sx_expectation(system, &vector) / spin)
    };

    // Bracket on log10(ratio), expanding outward from [1e-6, 1e6] if needed.
    let mut lo_exp = -6.0;
    let mut hi_exp = 6.0;
    let mut c_lo = contrast_at(10f64.powf(lo_exp))?;
    let mut c_hi = contrast_at(10f64.powf(hi_exp))?;
    let mut expansions = 0;
    while c_lo > target_contrast && expansions < 6 {
        lo_exp -= 6.0;
        c_lo = contrast_at(10f64.powf(lo_exp))?;
        expansions += 1;
    }
    while c_hi < target_contrast && expansions < 12 {
        hi_exp += 6.0;
        c_hi = contrast_at(10f64.powf(hi_exp))?;
        expansions += 1;
    }
    if c_lo > target_contrast || c_hi < target_contrast {
        return Err(Error::BracketFailure {
            target: target_contrast,
            n_atoms: system.n_atoms(),
            lo: 10f64.powf(lo_exp),
            hi: 10f64.powf(hi_exp),
        });
    }

    let mut best: Option<(f64, f64)> = None; // (ratio, contrast)
    for _ in 0..200 {
        let mid_exp = 0.5 * (lo_exp + hi_exp);
        let ratio = 10f64.powf(mid_exp);
        let c = contrast_at(ratio)?;
        if best.is_none_or(|(_, cb)| (c - target_contrast).abs() < (cb - target_contrast).abs()) {
            best = Some((ratio, c));
        }
        if (c - target_contrast).abs() <= tolerance {
            break;
        }
        if c < target_contrast {
            lo_exp = mid_exp;
        } else {
            hi_exp = mid_exp;
        }
        if hi_exp - lo_exp < 1e-15 {
            break;
        }
    }
    let (ratio, achieved) = best.expect("bisection ran at least once");
    if (achieved - target_contrast).abs() > tolerance {
        return Err(Error::BracketFailure {
            target: target_contrast,
            n_atoms: system.n_atoms(),
            lo: 10f64.powf(lo_exp),
            hi: 10f64.powf(hi_exp),
        });
    }

    let (state, energy) = ground_state(system, ratio)?;
    let report = metrology::wineland_xi2(&state)?;
    Ok(ExtremeSolution {
        state,
        omega_over_chi: ratio,
        achieved_contrast: achieved,
        xi2: report.xi2,
        ground_energy: energy,
    })
}
