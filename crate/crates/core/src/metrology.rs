//! Figures of merit for squeezing-enhanced Ramsey interferometry.

use serde::{Deserialize, Serialize};

use crate::dicke::{Axis, CollectiveOp, Direction, SpinState};
use crate::error::{Error, Result};

/// Everything [`wineland_xi2`] measures about a state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetrologyReport {
    /// Wineland squeezing parameter: min transverse variance * N / |<S>|^2.
    pub xi2: f64,
    /// -10 log10(xi2).
    pub gain_db: f64,
    pub mean_spin: [f64; 3],
    pub min_perp_variance: f64,
    pub squeezed_direction: Direction,
    /// |<S>| / S.
    pub contrast: f64,
}

/// Photon-scattering contrast loss C_sc = exp(-gamma * q_tilde), with
/// q_tilde = sqrt(N) * (total shearing strength).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossModel {
    pub gamma: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self { gamma: 0.36 }
    }
}

impl LossModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        Ok(Self { gamma })
    }

    /// C_sc for a non-negative normalized shearing strength.
    pub fn contrast_loss(&self, q_tilde: f64) -> Result<f64> {
        if q_tilde < 0.0 {
            return Err(Error::NegativeShear(q_tilde));
        }
        Ok((-self.gamma * q_tilde).exp())
    }
}

/// Free-standing form of [`LossModel::contrast_loss`].
pub fn contrast_loss(model: &LossModel, q_tilde: f64) -> Result<f64> {
    model.contrast_loss(q_tilde)
}

/// Loss-corrected squeezing parameter xi2 / c_sc^2.
pub fn corrected_xi2(xi2: f64, c_sc: f64) -> Result<f64> {
    let xi2_ok = xi2.is_finite() && xi2 > 0.0;
    let c_ok = c_sc.is_finite() && c_sc > 0.0 && c_sc <= 1.0;
    if !xi2_ok || !c_ok {
        return Err(Error::InvalidCorrection { xi2, c_sc });
    }
    Ok(xi2 / (c_sc * c_sc))
}

/// Metrological gain in decibels: -10 log10(xi2).
pub fn gain_db(xi2: f64) -> f64 {
    -10.0 * xi2.log10()
}

/// Wineland squeezing parameter and the quantities entering it.
pub fn wineland_xi2(state: &SpinState) -> Result<MetrologyReport> {
    let (min_var, direction) = state.min_perpendicular_variance()?;
    let mean = state.mean_spin_vector();
    let len2 = mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2];
    let n = state.system().n_atoms() as f64;
    let xi2 = min_var * n / len2;
    Ok(MetrologyReport {
        xi2,
        gain_db: gain_db(xi2),
        mean_spin: mean,
        min_perp_variance: min_var,
        squeezed_direction: direction,
        contrast: len2.sqrt() / state.system().total_spin(),
    })
}

/// Axis of the final pi/2 readout pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReadoutAxis {
    X,
    Y,
}

impl ReadoutAxis {
    fn rotation_axis(self) -> Axis {
        match self {
            ReadoutAxis::X => Axis::X,
            ReadoutAxis::Y => Axis::Y,
        }
    }
}

const FD_STEP: f64 = 1e-5;

fn sz_after_readout(state: &SpinState, phase: f64, readout: ReadoutAxis) -> f64 {
    state
        .rotate(Axis::Z, phase)
        .rotate(readout.rotation_axis(), std::f64::consts::FRAC_PI_2)
        .expectation_unchecked(CollectiveOp::Sz)
}

/// d<S_z>/d|phase| by central differences with one Richardson level.
pub(crate) fn fringe_slope(state: &SpinState, phase: f64, readout: ReadoutAxis) -> f64 {
    let d = |h: f64| {
        (sz_after_readout(state, phase + h, readout) - sz_after_readout(state, phase - h, readout))
            / (2.0 * h)
    };
    let coarse = d(FD_STEP);
    let fine = d(FD_STEP / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Phase sensitivity of the Ramsey readout: the input state evolves freely
/// through exp(-i phase S_z), experiences the final pi/2 pulse about the
/// readout axis, and is measured in S_z. Returns
/// |Delta S_z / (d<S_z>/d phase)| for the final state.
pub fn ramsey_sensitivity(
    input_state: &SpinState,
    phase: f64,
    readout: ReadoutAxis,
) -> Result<f64> {
    input_state.expectation(CollectiveOp::Sz)?; // validates normalization
    let slope = fringe_slope(input_state, phase, readout);
    let spin = input_state.system().total_spin();
    // A slope below the finite-difference noise floor (rounding of the
    // rotated expectation values divided by the step) is indistinguishable
    // from zero; 1e-12 S is the hard lower bound.
    let noise_floor = 16.0 * f64::EPSILON * spin * input_state.system().dim() as f64 / FD_STEP;
    if slope.abs() < (1e-12 * spin).max(noise_floor) {
        return Err(Error::DivergentSensitivity(slope));
    }
    let final_state = input_state
        .rotate(Axis::Z, phase)
        .rotate(readout.rotation_axis(), std::f64::consts::FRAC_PI_2);
    let delta_sz = final_state.variance(Direction::Z).sqrt();
    Ok((delta_sz / slope).abs())
}
