//! Dense-free linear algebra for real symmetric tridiagonal matrices.
//!
//! Everything in this crate that needs an eigensolver reduces to a symmetric
//! tridiagonal problem of dimension N+1, so we keep two specialized routines
//! instead of binding LAPACK: a QL-with-implicit-shifts full decomposition
//! (used once per spin system to cache the S_x eigenbasis) and a Sturm
//! bisection + inverse iteration path for a single extremal eigenpair (used
//! inside root-finding loops where the full spectrum would be wasted work).

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix: `diag` has length n, `off` length n-1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Full eigendecomposition A = V diag(values) V^T with orthonormal V.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Row-major n x n; column j is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub dim: usize,
}

impl Eigen {
    #[inline]
    pub fn vector_component(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.dim + col]
    }
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Row-sum (infinity) norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Full spectrum via QL with implicit shifts, eigenvalues ascending.
    pub fn eigen(&self) -> Result<Eigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        e[..n - 1].copy_from_slice(&self.off);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        if n > 1 {
            tql2(&mut d, &mut e, &mut v, n)?;
        }
        sort_eigen(&mut d, &mut v, n);
        Ok(Eigen {
            values: d,
            vectors: v,
            dim: n,
        })
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the
    /// LDL^T pivot sequence, with LAPACK-style pivot safeguarding).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        let pivmin = self
            .off
            .iter()
            .fold(f64::MIN_POSITIVE, |acc, &e| acc.max(e * e))
            * f64::EPSILON
            * f64::EPSILON
            + f64::MIN_POSITIVE;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenpair via bisection on the Sturm count followed by
    /// inverse iteration. Returns (eigenvalue, unit eigenvector); the
    /// eigenvalue is refined to the Rayleigh quotient of the final vector.
    pub fn smallest_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        if n == 1 {
            return Ok((self.diag[0], vec![1.0]));
        }
        // Gershgorin bracket.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let mut a = lo - 2.0 * f64::EPSILON * scale;
        let mut b = hi + 2.0 * f64::EPSILON * scale;
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.count_below(mid) >= 1 {
                b = mid;
            } else {
                a = mid;
            }
        }
        let mut lambda = b;
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);

        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        for attempt in 0..8 {
            let lu = TridiagLu::factor(self.diag.iter().map(|&d| d - lambda).collect(), &self.off);
            for _ in 0..2 {
                let y = lu.solve(&x);
                let len = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !len.is_finite() || len == 0.0 {
                    break;
                }
                x = y.iter().map(|v| v / len).collect();
            }
            let ax = self.matvec(&x);
            let rayleigh: f64 = x.iter().zip(&ax).map(|(xi, yi)| xi * yi).sum();
            let resid = ax
                .iter()
                .zip(&x)
                .map(|(yi, xi)| (yi - rayleigh * xi).abs())
                .fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(_, _, r)| resid < *r) {
                best = Some((rayleigh, x.clone(), resid));
            }
            if resid <= 1e-13 * norm {
                break;
            }
            // Rayleigh refinement; keep the shift inside the original bracket.
            lambda = rayleigh.clamp(a, b);
            if attempt >= 3 {
                // Nudge off an exactly-singular shift.
                lambda += norm * f64::EPSILON * (attempt as f64);
            }
        }
        let (value, vector, resid) = best.ok_or(Error::EigenFailure(8))?;
        if resid > 1e-10 * norm {
            return Err(Error::EigenFailure(8));
        }
        Ok((value, vector))
    }
}

/// QL with implicit shifts on a tridiagonal (d, e); accumulates the
/// transformations into `v` (row-major n x n, starts as identity).
fn tql2(d: &mut [f64], e: &mut [f64], v: &mut [f64], n: usize) -> Result<()> {
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure(iter));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = v[k * n + i + 1];
                    v[k * n + i + 1] = s * v[k * n + i] + c * f;
                    v[k * n + i] = c * v[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_eigen(d: &mut [f64], v: &mut [f64], n: usize) {
    for i in 0..n {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                v.swap(row * n + i, row * n + k);
            }
        }
    }
}

/// LU factorization with partial pivoting of a (shifted) symmetric
/// tridiagonal matrix, after LAPACK's dgttrf. Pivoting introduces a second
/// superdiagonal; near-singular pivots are clamped so that inverse iteration
/// on an exact eigenvalue shift stays finite.
struct TridiagLu {
    low: Vec<f64>,
    d: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
    n: usize,
}

impl TridiagLu {
    fn factor(mut d: Vec<f64>, off: &[f64]) -> Self {
        let n = d.len();
        let dl: Vec<f64> = off.to_vec();
        let mut du: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut low = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let pivmin = {
            let scale = d
                .iter()
                .map(|v| v.abs())
                .chain(off.iter().map(|v| v.abs()))
                .fold(f64::MIN_POSITIVE, f64::max);
            scale * f64::EPSILON * f64::EPSILON + f64::MIN_POSITIVE
        };
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i].abs() < pivmin {
                    pivmin.copysign(if d[i] == 0.0 { 1.0 } else { d[i] })
                } else {
                    d[i]
                };
                d[i] = piv;
                let fact = dl[i] / piv;
                low[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                low[i] = fact;
                swapped[i] = true;
                d[i] = dl[i];
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
            }
        }
        if n > 0 && d[n - 1].abs() < pivmin {
            d[n - 1] = pivmin.copysign(if d[n - 1] == 0.0 { 1.0 } else { d[n - 1] });
        }
        Self {
            low,
            d,
            u1: du,
            u2: du2,
            swapped,
            n,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let update = self.low[i] * x[i];
            x[i + 1] -= update;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            if i + 1 < n {
                acc -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * x[i + 2];
            }
            x[i] = acc / self.d[i];
        }
        x
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx <= fc && fx <= fd {
        (x, fx)
    } else if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
