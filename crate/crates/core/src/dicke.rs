//! Collective spin algebra on the symmetric (Dicke) subspace.
//!
//! An ensemble of N two-level atoms restricted to the permutation-symmetric
//! subspace carries a single spin S = N/2 with Hilbert dimension N+1. The
//! basis index i in [0, N] maps to the S_z eigenvalue m = i - S, ascending,
//! which makes S_z diagonal and S_x/S_y real/imaginary tridiagonal.
//!
//! Coherent-state phase convention: the amplitude at m of |theta, phi> is
//! sqrt(C(2S, S+m)) cos(theta/2)^(S+m) sin(theta/2)^(S-m) e^{-i m phi},
//! i.e. |theta, phi> = e^{-i phi S_z} e^{-i theta S_y} |S, S>, so the mean
//! spin of |theta, phi> points along (sin theta cos phi, sin theta sin phi,
//! cos theta) componentwise.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Eigen, SymTridiag};

/// Collective spin operators handled by [`SpinState::expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveOp {
    Sx,
    Sy,
    Sz,
    Sz2,
}

/// Rotation generators exposed by [`SpinState::rotate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Unit vector on the Bloch sphere of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const X: Direction = Direction {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Direction = Direction {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Accepts a vector that is already unit length to within 1e-12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitDirection((norm - 1.0).abs()));
        }
        Ok(Self { x, y, z })
    }

    /// Rescales an arbitrary non-zero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm < 1e-300 {
            return Err(Error::ZeroDirection);
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Direction) -> Result<Direction> {
        Direction::normalized(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }
}

#[derive(Debug)]
struct SystemInner {
    n_atoms: usize,
    spin: f64,
    dim: usize,
    /// S_z eigenvalues m = i - S, ascending.
    m_values: Vec<f64>,
    /// m^2, the diagonal of S_z^2.
    m_squared: Vec<f64>,
    /// Off-diagonal couplings c_i = sqrt(S(S+1) - m_i(m_i+1)) / 2 between i and i+1.
    couplings: Vec<f64>,
    /// Eigendecomposition of S_x, built lazily on the first x/y rotation.
    sx_eigen: OnceLock<Eigen>,
}

/// Immutable description of the collective-spin Hilbert space, cheap to clone
/// and safe to share across threads; states hold a handle to it.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    inner: Arc<SystemInner>,
}

impl SpinSystem {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let spin = n_atoms as f64 / 2.0;
        let dim = n_atoms + 1;
        let m_values: Vec<f64> = (0..dim).map(|i| i as f64 - spin).collect();
        let m_squared: Vec<f64> = m_values.iter().map(|m| m * m).collect();
        let couplings: Vec<f64> = (0..n_atoms)
            .map(|i| {
                let m = m_values[i];
                0.5 * (spin * (spin + 1.0) - m * (m + 1.0)).sqrt()
            })
            .collect();
        Ok(Self {
            inner: Arc::new(SystemInner {
                n_atoms,
                spin,
                dim,
                m_values,
                m_squared,
                couplings,
                sx_eigen: OnceLock::new(),
            }),
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.inner.n_atoms
    }

    /// Total spin S = N/2 (half-integer for odd N).
    pub fn total_spin(&self) -> f64 {
        self.inner.spin
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn m_values(&self) -> &[f64] {
        &self.inner.m_values
    }

    pub fn couplings(&self) -> &[f64] {
        &self.inner.couplings
    }

    pub fn same_system(&self, other: &SpinSystem) -> bool {
        self.inner.n_atoms == other.inner.n_atoms
    }

    /// S_x as a symmetric tridiagonal matrix (zero diagonal).
    pub fn sx_tridiag(&self) -> SymTridiag {
        SymTridiag::new(vec![0.0; self.dim()], self.inner.couplings.clone())
    }

    pub(crate) fn sx_eigen(&self) -> &Eigen {
        self.inner.sx_eigen.get_or_init(|| {
            self.sx_tridiag()
                .eigen()
                .expect("S_x eigendecomposition cannot fail on a finite tridiagonal")
        })
    }

    /// Applies the chosen operator to an amplitude vector.
    pub fn apply(&self, op: CollectiveOp, amps: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(amps.len(), n);
        let c = &self.inner.couplings;
        match op {
            CollectiveOp::Sz => self
                .inner
                .m_values
                .iter()
                .zip(amps)
                .map(|(m, a)| a * *m)
                .collect(),
            CollectiveOp::Sz2 => self
                .inner
                .m_squared
                .iter()
                .zip(amps)
                .map(|(m2, a)| a * *m2)
                .collect(),
            CollectiveOp::Sx => (0..n)
                .map(|i| {
                    let mut acc = Complex64::ZERO;
                    if i > 0 {
                        acc += amps[i - 1] * c[i - 1];
                    }
                    if i + 1 < n {
                        acc += amps[i + 1] * c[i];
                    }
                    acc
                })
                .collect(),
            CollectiveOp::Sy => (0..n)
                .map(|i| {
                    // (S_y psi)_i = i (c_i psi_{i+1} - c_{i-1} psi_{i-1})
                    let mut acc = Complex64::ZERO;
                    if i + 1 < n {
                        acc += amps[i + 1] * c[i];
                    }
                    if i > 0 {
                        acc -= amps[i - 1] * c[i - 1];
                    }
                    acc * Complex64::I
                })
                .collect(),
        }
    }

    /// Dense row-major matrix of the operator; intended for verification
    /// code and the echo propagator comparison, not for propagation.
    pub fn operator_matrix(&self, op: CollectiveOp) -> Vec<Complex64> {
        let n = self.dim();
        let mut mat = vec![Complex64::ZERO; n * n];
        for col in 0..n {
            let mut basis = vec![Complex64::ZERO; n];
            basis[col] = Complex64::ONE;
            let image = self.apply(op, &basis);
            for row in 0..n {
                mat[row * n + col] = image[row];
            }
        }
        mat
    }
}

/// Pure state of the collective spin, stored as amplitudes over the Dicke
/// basis with m ascending from -S to +S. Values are immutable; operations
/// return new states.
#[derive(Debug, Clone)]
pub struct SpinState {
    system: SpinSystem,
    amps: Vec<Complex64>,
}

impl SpinState {
    /// Coherent spin state |theta, phi>; binomial weights are assembled in
    /// log space so arbitrary N stays finite.
    pub fn coherent(system: &SpinSystem, theta: f64, phi: f64) -> Self {
        let n = system.n_atoms();
        let dim = system.dim();
        let spin = system.total_spin();
        let cos_half = (theta / 2.0).cos();
        let sin_half = (theta / 2.0).sin();
        let ln_n_fact = libm::lgamma(n as f64 + 1.0);
        let amps = (0..dim)
            .map(|i| {
                let ln_binom =
                    ln_n_fact - libm::lgamma(i as f64 + 1.0) - libm::lgamma((n - i) as f64 + 1.0);
                let ln_mag = 0.5 * ln_binom
                    + pow_ln(i as f64, cos_half.abs())
                    + pow_ln((n - i) as f64, sin_half.abs());
                let mut mag = ln_mag.exp();
                // Carry explicit signs for angles outside [0, pi].
                if cos_half < 0.0 && i % 2 == 1 {
                    mag = -mag;
                }
                if sin_half < 0.0 && (n - i) % 2 == 1 {
                    mag = -mag;
                }
                let m = i as f64 - spin;
                Complex64::from_polar(1.0, -m * phi) * mag
            })
            .collect();
        let mut state = Self {
            system: system.clone(),
            amps,
        };
        state.renormalize();
        state
    }

    /// Dicke basis state |S, m> with m = index - S.
    pub fn basis_state(system: &SpinSystem, index: usize) -> Self {
        assert!(index < system.dim(), "basis index out of range");
        let mut amps = vec![Complex64::ZERO; system.dim()];
        amps[index] = Complex64::ONE;
        Self {
            system: system.clone(),
            amps,
        }
    }

    /// Wraps raw amplitudes; the vector must already be normalized to 1e-10.
    pub fn from_amplitudes(system: &SpinSystem, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != system.dim() {
            return Err(Error::DimensionMismatch(amps.len(), system.dim()));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        let mut state = Self {
            system: system.clone(),
            amps,
        };
        state.renormalize();
        Ok(state)
    }

    pub(crate) fn from_real_normalized(system: &SpinSystem, vec: &[f64]) -> Self {
        let amps = vec.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut state = Self {
            system: system.clone(),
            amps,
        };
        state.renormalize();
        state
    }

    fn renormalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &SpinState) -> Result<Complex64> {
        if self.system.dim() != other.system.dim() {
            return Err(Error::DimensionMismatch(
                self.system.dim(),
                other.system.dim(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Squared overlap |<self|other>|^2; global-phase insensitive.
    pub fn fidelity(&self, other: &SpinState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_normalized(&self) -> Result<()> {
        let dev = (self.norm() - 1.0).abs();
        if dev > 1e-9 {
            return Err(Error::NotNormalized(dev));
        }
        Ok(())
    }

    /// <psi|O|psi> for the cached Hermitian operators. The imaginary residue
    /// is asserted below 1e-10 (scaled by S) and discarded.
    pub fn expectation(&self, op: CollectiveOp) -> Result<f64> {
        self.check_normalized()?;
        Ok(self.expectation_unchecked(op))
    }

    pub(crate) fn expectation_unchecked(&self, op: CollectiveOp) -> f64 {
        let image = self.system.apply(op, &self.amps);
        let value: Complex64 = self
            .amps
            .iter()
            .zip(&image)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let scale = self.system.total_spin().max(1.0);
        let scale = if matches!(op, CollectiveOp::Sz2) {
            scale * scale
        } else {
            scale
        };
        assert!(
            value.im.abs() <= 1e-10 * scale,
            "imaginary residue {} on a Hermitian expectation",
            value.im
        );
        value.re
    }

    /// (<S_x>, <S_y>, <S_z>).
    pub fn mean_spin_vector(&self) -> [f64; 3] {
        [
            self.expectation_unchecked(CollectiveOp::Sx),
            self.expectation_unchecked(CollectiveOp::Sy),
            self.expectation_unchecked(CollectiveOp::Sz),
        ]
    }

    /// Variance of the spin component along `direction`.
    pub fn variance(&self, direction: Direction) -> f64 {
        let projected = self.project_spin(direction);
        let mean = self.real_inner(&projected);
        let second: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        (second - mean * mean).max(0.0)
    }

    /// S_u |psi> for u a unit vector.
    fn project_spin(&self, direction: Direction) -> Vec<Complex64> {
        let [ux, uy, uz] = direction.components();
        let mut out = vec![Complex64::ZERO; self.system.dim()];
        if ux != 0.0 {
            for (o, v) in out
                .iter_mut()
                .zip(self.system.apply(CollectiveOp::Sx, &self.amps))
            {
                *o += v * ux;
            }
        }
        if uy != 0.0 {
            for (o, v) in out
                .iter_mut()
                .zip(self.system.apply(CollectiveOp::Sy, &self.amps))
            {
                *o += v * uy;
            }
        }
        if uz != 0.0 {
            for (o, v) in out
                .iter_mut()
                .zip(self.system.apply(CollectiveOp::Sz, &self.amps))
            {
                *o += v * uz;
            }
        }
        out
    }

    fn real_inner(&self, image: &[Complex64]) -> f64 {
        let value: Complex64 = self.amps.iter().zip(image).map(|(a, b)| a.conj() * b).sum();
        value.re
    }

    /// Minimum spin variance over directions perpendicular to the mean spin,
    /// together with the minimizing direction. Fails when the mean spin is
    /// too short to define the transverse plane.
    pub fn min_perpendicular_variance(&self) -> Result<(f64, Direction)> {
        let mean = self.mean_spin_vector();
        let len = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
        let spin = self.system.total_spin();
        if len <= 1e-9 * spin {
            return Err(Error::VanishingMeanSpin(len));
        }
        let n_hat = Direction::normalized(mean[0], mean[1], mean[2])?;
        let (u, v) = orthonormal_pair(n_hat)?;

        let su = self.project_spin(u);
        let sv = self.project_spin(v);
        let mean_u = self.real_inner(&su);
        let mean_v = self.real_inner(&sv);
        let var_u = su.iter().map(|a| a.norm_sqr()).sum::<f64>() - mean_u * mean_u;
        let var_v = sv.iter().map(|a| a.norm_sqr()).sum::<f64>() - mean_v * mean_v;
        // Re<S_u psi|S_v psi> = <{S_u, S_v}>/2 for Hermitian S_u, S_v.
        let sym: f64 = su
            .iter()
            .zip(&sv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>();
        let cov = sym - mean_u * mean_v;

        let half_trace = 0.5 * (var_u + var_v);
        let radius = (0.25 * (var_u - var_v).powi(2) + cov * cov).sqrt();
        let lambda = (half_trace - radius).max(0.0);

        let [ux, uy, uz] = u.components();
        let [vx, vy, vz] = v.components();
        let direction = if radius <= 1e-300 {
            u
        } else {
            // Eigenvector of [[var_u, cov], [cov, var_v]] for the smaller
            // eigenvalue; pick the better-conditioned representation.
            let c1 = (cov, lambda - var_u);
            let c2 = (lambda - var_v, cov);
            let (a, b) = if c1.0 * c1.0 + c1.1 * c1.1 >= c2.0 * c2.0 + c2.1 * c2.1 {
                c1
            } else {
                c2
            };
            Direction::normalized(a * ux + b * vx, a * uy + b * vy, a * uz + b * vz)?
        };
        Ok((lambda, direction))
    }

    /// exp(-i angle S_axis) |psi>. Z rotations are diagonal phases; x and y
    /// use the cached S_x eigenbasis (S_y = W^dag S_x W with W = diag(i^k)).
    pub fn rotate(&self, axis: Axis, angle: f64) -> SpinState {
        if angle == 0.0 {
            return self.clone();
        }
        match axis {
            Axis::Z => {
                let amps = self
                    .amps
                    .iter()
                    .zip(self.system.m_values())
                    .map(|(a, m)| a * Complex64::from_polar(1.0, -angle * m))
                    .collect();
                SpinState {
                    system: self.system.clone(),
                    amps,
                }
            }
            Axis::X => SpinState {
                system: self.system.clone(),
                amps: self.system.rotate_x_amps(&self.amps, angle),
            },
            Axis::Y => {
                let twisted: Vec<Complex64> = self
                    .amps
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * i_power(i))
                    .collect();
                let rotated = self.system.rotate_x_amps(&twisted, angle);
                let amps = rotated
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| a * i_power(i).conj())
                    .collect();
                SpinState {
                    system: self.system.clone(),
                    amps,
                }
            }
        }
    }

    /// One-axis-twisting evolution exp(-i q S_z^2) |psi> as diagonal phases.
    pub fn shear(&self, q: f64) -> SpinState {
        let amps = self
            .amps
            .iter()
            .zip(&self.system.inner.m_squared)
            .map(|(a, m2)| a * Complex64::from_polar(1.0, -q * m2))
            .collect();
        SpinState {
            system: self.system.clone(),
            amps,
        }
    }

    /// Multiplies by a global phase e^{i phase}.
    pub fn with_global_phase(&self, phase: f64) -> SpinState {
        let rot = Complex64::from_polar(1.0, phase);
        SpinState {
            system: self.system.clone(),
            amps: self.amps.iter().map(|a| a * rot).collect(),
        }
    }
}

impl SpinSystem {
    fn rotate_x_amps(&self, amps: &[Complex64], angle: f64) -> Vec<Complex64> {
        let eig = self.sx_eigen();
        let n = self.dim();
        // w = V^T psi
        let mut w = vec![Complex64::ZERO; n];
        for (i, &a) in amps.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            let row = &eig.vectors[i * n..(i + 1) * n];
            for (wj, vij) in w.iter_mut().zip(row) {
                *wj += a * *vij;
            }
        }
        for (wj, lambda) in w.iter_mut().zip(&eig.values) {
            *wj *= Complex64::from_polar(1.0, -angle * lambda);
        }
        // out = V w
        (0..n)
            .map(|i| {
                let row = &eig.vectors[i * n..(i + 1) * n];
                w.iter().zip(row).map(|(wj, vij)| wj * *vij).sum()
            })
            .collect()
    }
}

/// i^k without trig.
fn i_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// k * ln(x) with the 0 * ln(0) = 0 convention.
fn pow_ln(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        k * x.ln()
    }
}

/// Any orthonormal pair spanning the plane perpendicular to `n`.
fn orthonormal_pair(n: Direction) -> Result<(Direction, Direction)> {
    let [nx, ny, nz] = n.components();
    // Seed with the coordinate axis least aligned with n.
    let seed = if nx.abs() <= ny.abs() && nx.abs() <= nz.abs() {
        [1.0, 0.0, 0.0]
    } else if ny.abs() <= nz.abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let dot = seed[0] * nx + seed[1] * ny + seed[2] * nz;
    let u = Direction::normalized(seed[0] - dot * nx, seed[1] - dot * ny, seed[2] - dot * nz)?;
    let v = n.cross(&u)?;
    Ok((u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_empty_ensemble() {
        assert!(matches!(SpinSystem::new(0), Err(Error::EmptyEnsemble)));
    }

    #[test]
    fn single_spin_matrices() {
        let sys = SpinSystem::new(1).unwrap();
        assert_eq!(sys.dim(), 2);
        let sx = sys.operator_matrix(CollectiveOp::Sx);
        assert!((sx[1].re - 0.5).abs() < 1e-15 && (sx[2].re - 0.5).abs() < 1e-15);
        assert_eq!(sys.m_values(), &[-0.5, 0.5]);
    }

    #[test]
    fn two_atom_matrices() {
        let sys = SpinSystem::new(2).unwrap();
        assert_eq!(sys.m_values(), &[-1.0, 0.0, 1.0]);
        let c = sys.couplings();
        assert!((c[0] - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((c[1] - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn commutator_and_casimir_n60() {
        let sys = SpinSystem::new(60).unwrap();
        assert_eq!(sys.dim(), 61);
        let n = sys.dim();
        let sx = sys.operator_matrix(CollectiveOp::Sx);
        let sy = sys.operator_matrix(CollectiveOp::Sy);
        let sz = sys.operator_matrix(CollectiveOp::Sz);
        let mut worst: f64 = 0.0;
        // [Sx, Sy] - i Sz, banded so the dense product is cheap enough here.
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += sx[i * n + k] * sy[k * n + j] - sy[i * n + k] * sx[k * n + j];
                }
                worst = worst.max((acc - Complex64::I * sz[i * n + j]).norm());
            }
        }
        assert!(worst < 1e-10, "commutator residue {worst}");

        let s = sys.total_spin();
        let casimir = s * (s + 1.0);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += sx[i * n + k] * sx[k * n + j]
                        + sy[i * n + k] * sy[k * n + j]
                        + sz[i * n + k] * sz[k * n + j];
                }
                let expect = if i == j { casimir } else { 0.0 };
                worst = worst.max((acc - Complex64::from(expect)).norm());
            }
        }
        assert!(worst < 1e-10, "casimir residue {worst}");
    }

    #[test]
    fn coherent_state_examples() {
        let sys = SpinSystem::new(1).unwrap();
        let css = SpinState::coherent(&sys, FRAC_PI_2, 0.0);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert!((css.amplitudes()[0].re - inv_sqrt2).abs() < 1e-15);
        assert!((css.amplitudes()[1].re - inv_sqrt2).abs() < 1e-15);

        let sys = SpinSystem::new(17).unwrap();
        let pole = SpinState::coherent(&sys, 0.0, 1.234);
        assert!((pole.amplitudes()[17].norm() - 1.0).abs() < 1e-14);

        let sys = SpinSystem::new(20).unwrap();
        let css = SpinState::coherent(&sys, FRAC_PI_2, 0.0);
        assert!((css.expectation(CollectiveOp::Sx).unwrap() - 10.0).abs() < 1e-12);
        assert!(css.expectation(CollectiveOp::Sz).unwrap().abs() < 1e-12);
        assert!((css.variance(Direction::Z) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mean_spin_matches_orientation() {
        let sys = SpinSystem::new(24).unwrap();
        let s = sys.total_spin();
        for (theta, phi) in [(0.3, 1.1), (FRAC_PI_2, -2.0), (2.4, 0.7), (1.0, 4.5)] {
            let css = SpinState::coherent(&sys, theta, phi);
            let mean = css.mean_spin_vector();
            let expect = [
                s * theta.sin() * phi.cos(),
                s * theta.sin() * phi.sin(),
                s * theta.cos(),
            ];
            for k in 0..3 {
                assert!(
                    (mean[k] - expect[k]).abs() < 1e-10,
                    "component {k}: {} vs {}",
                    mean[k],
                    expect[k]
                );
            }
        }
    }

    #[test]
    fn coherent_variances() {
        let sys = SpinSystem::new(30).unwrap();
        let s = sys.total_spin();
        let css = SpinState::coherent(&sys, FRAC_PI_2, 0.0);
        assert!((css.variance(Direction::Z) - s / 2.0).abs() < 1e-10);
        assert!(css.variance(Direction::X) < 1e-9);
        let (min_var, _) = css.min_perpendicular_variance().unwrap();
        assert!((min_var - s / 2.0).abs() < 1e-9);
    }

    #[test]
    fn dicke_state_variances() {
        let sys = SpinSystem::new(12).unwrap();
        let state = SpinState::basis_state(&sys, 3);
        assert!(state.variance(Direction::Z) < 1e-14);
        let stretched = SpinState::basis_state(&sys, 12);
        let mean = stretched.mean_spin_vector();
        assert!(mean[0].abs() < 1e-12 && mean[1].abs() < 1e-12);
        assert!((mean[2] - sys.total_spin()).abs() < 1e-12);
        // m = 0 ring state has zero mean spin.
        let ring = SpinState::basis_state(&sys, 6);
        let mean = ring.mean_spin_vector();
        assert!(mean.iter().all(|c| c.abs() < 1e-12));
        assert!(matches!(
            ring.min_perpendicular_variance(),
            Err(Error::VanishingMeanSpin(_))
        ));
    }

    #[test]
    fn rotation_pole_to_equator() {
        let sys = SpinSystem::new(14).unwrap();
        let pole = SpinState::coherent(&sys, 0.0, 0.0);
        let rotated = pole.rotate(Axis::Y, FRAC_PI_2);
        let target = SpinState::coherent(&sys, FRAC_PI_2, 0.0);
        assert!((rotated.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_round_trips() {
        let sys = SpinSystem::new(9).unwrap();
        let psi = SpinState::coherent(&sys, 1.0, 0.4);
        let back = psi.rotate(Axis::X, 0.77).rotate(Axis::X, -0.77);
        assert!(max_abs_diff(psi.amplitudes(), back.amplitudes()) < 1e-12);
        let full = psi.rotate(Axis::Z, 2.0 * PI);
        assert!((full.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        assert!((psi.rotate(Axis::Y, 0.31).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_rotation_matches_generator() {
        // exp(-i a S_y) for N=1 against the closed 2x2 form.
        let sys = SpinSystem::new(1).unwrap();
        let up = SpinState::basis_state(&sys, 1);
        let a = 0.9;
        let rotated = up.rotate(Axis::Y, a);
        // e^{-i a S_y} |up> = cos(a/2)|up> + sin(a/2)|down>
        assert!((rotated.amplitudes()[1].re - (a / 2.0).cos()).abs() < 1e-12);
        assert!((rotated.amplitudes()[0].re - (a / 2.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_variance_direction_for_sheared_state() {
        let sys = SpinSystem::new(20).unwrap();
        let s = sys.total_spin();
        let css = SpinState::coherent(&sys, FRAC_PI_2, 0.0);
        let oat = css.shear(0.1);
        let (value, dir) = oat.min_perpendicular_variance().unwrap();
        assert!(value < s / 2.0);
        let [dx, dy, dz] = dir.components();
        // Mean spin stays along x, so the squeezed direction lives in y-z
        // and is genuinely tilted.
        assert!(dx.abs() < 1e-8);
        assert!(
            dy.abs() > 1e-3 && dz.abs() > 1e-3,
            "direction ({dx}, {dy}, {dz})"
        );
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(1.0, 0.0, 0.0).is_ok());
        assert!(matches!(
            Direction::new(1.0, 1.0, 0.0),
            Err(Error::NonUnitDirection(_))
        ));
        assert!(matches!(
            Direction::normalized(0.0, 0.0, 0.0),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn from_amplitudes_validates_norm() {
        let sys = SpinSystem::new(3).unwrap();
        let bad = vec![Complex64::new(0.5, 0.0); 4];
        assert!(SpinState::from_amplitudes(&sys, bad).is_ok());
        let worse = vec![Complex64::new(0.7, 0.0); 4];
        assert!(matches!(
            SpinState::from_amplitudes(&sys, worse),
            Err(Error::NotNormalized(_))
        ));
    }
}
