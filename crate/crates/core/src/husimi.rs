//! Husimi-Q evaluation over the generalized Bloch sphere.
//!
//! Q(theta, phi) = |<psi|theta, phi>|^2 sampled on a product grid with
//! Gauss-Legendre nodes in cos(theta) and uniform phi. Q is a polynomial of
//! degree 2S in cos(theta) and a trigonometric polynomial of degree 2S in
//! phi, so with n_theta >= S + 1 nodes and n_phi >= N + 1 columns the
//! quadrature (2S+1)/(4 pi) sum w Q = 1 is exact up to rounding, which turns
//! normalization into a sharp self-test.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dicke::SpinState;
use crate::error::{Error, Result};
use crate::linalg::gauss_legendre;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HusimiGrid {
    /// Polar nodes, ascending in theta (Gauss-Legendre in cos theta).
    pub theta: Vec<f64>,
    /// Azimuthal nodes, uniform on [0, 2 pi).
    pub phi: Vec<f64>,
    /// Gauss-Legendre weights per theta row (d cos(theta) measure).
    pub theta_weights: Vec<f64>,
    /// Q values, row-major over (theta, phi).
    pub values: Vec<f64>,
    pub n_atoms: usize,
}

impl HusimiGrid {
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phi.len() + i_phi]
    }

    /// Solid-angle weight attached to every node of row `i_theta`.
    pub fn node_weight(&self, i_theta: usize) -> f64 {
        self.theta_weights[i_theta] * 2.0 * std::f64::consts::PI / self.phi.len() as f64
    }

    /// (2S+1)/(4 pi) integral of Q over the sphere; 1 for any pure state
    /// once the grid resolves the state.
    pub fn normalization(&self) -> f64 {
        let dim = self.n_atoms as f64 + 1.0;
        let mut total = 0.0;
        for i in 0..self.theta.len() {
            let row_sum: f64 = (0..self.phi.len()).map(|j| self.value(i, j)).sum();
            total += self.node_weight(i) * row_sum;
        }
        dim / (4.0 * std::f64::consts::PI) * total
    }

    /// Grid coordinates of the largest Q value.
    pub fn argmax(&self) -> (usize, usize) {
        let (flat, _) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        (flat / self.phi.len(), flat % self.phi.len())
    }
}

/// Samples |<psi|theta, phi>|^2 on an n_theta x n_phi grid.
pub fn husimi_grid(state: &SpinState, n_theta: usize, n_phi: usize) -> Result<HusimiGrid> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::GridTooSmall(n_theta, n_phi));
    }
    let system = state.system();
    let spin = system.total_spin();
    let (nodes, weights) = gauss_legendre(n_theta);
    // cos(theta) descending in theta; reverse for ascending theta.
    let theta: Vec<f64> = nodes.iter().rev().map(|x| x.acos()).collect();
    let theta_weights: Vec<f64> = weights.iter().rev().copied().collect();
    let phi: Vec<f64> = (0..n_phi)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64)
        .collect();

    let dim = system.dim();
    let mut values = vec![0.0; n_theta * n_phi];
    for (i, &th) in theta.iter().enumerate() {
        // Coherent-state magnitudes for this theta; the phi dependence is a
        // pure phase twist handled per column.
        let mags: Vec<f64> = SpinState::coherent(system, th, 0.0)
            .amplitudes()
            .iter()
            .map(|a| a.re)
            .collect();
        let weighted: Vec<Complex64> = state
            .amplitudes()
            .iter()
            .zip(&mags)
            .map(|(a, m)| a * *m)
            .collect();
        for (j, &ph) in phi.iter().enumerate() {
            // <theta,phi|psi> = sum_m mag_m e^{+i m phi} psi_m.
            let mut acc = Complex64::ZERO;
            for (k, w) in weighted.iter().enumerate() {
                let m = k as f64 - spin;
                acc += w * Complex64::from_polar(1.0, m * ph);
            }
            values[i * n_phi + j] = acc.norm_sqr().min(1.0 + 1e-12);
        }
        debug_assert_eq!(dim, mags.len());
    }
    Ok(HusimiGrid {
        theta,
        phi,
        theta_weights,
        values,
        n_atoms: system.n_atoms(),
    })
}
