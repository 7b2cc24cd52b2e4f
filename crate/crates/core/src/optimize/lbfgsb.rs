//! Bounded quasi-Newton minimizer: limited-memory BFGS directions with
//! gradient projection onto box constraints and a backtracking line search
//! along the projected path. Deterministic: identical inputs give identical
//! iterates.

/// Componentwise box constraints.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn symmetric(half_widths: &[f64]) -> Self {
        Self {
            lower: half_widths.iter().map(|w| -w).collect(),
            upper: half_widths.to_vec(),
        }
    }

    fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub memory: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the infinity norm of the projected gradient.
    pub gradient_tolerance: f64,
    /// Relative objective reduction below which two consecutive accepted
    /// steps count as convergence:
    /// (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1e-12) <= this.
    /// Factr-style termination; near a minimum the achievable gradient norm
    /// is limited by the floating-point resolution of f, so a pure gradient
    /// test can stall one ulp short of its threshold.
    pub value_reduction_tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            memory: 8,
            max_iterations: 500,
            gradient_tolerance: 1e-9,
            value_reduction_tolerance: 1e7 * f64::EPSILON,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub position: Vec<f64>,
    pub value: f64,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// || P(x - g) - x ||_inf, the first-order optimality measure for box
/// constraints.
fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (&xi, &gi))| {
            let stepped = (xi - gi).clamp(bounds.lower[i], bounds.upper[i]);
            (stepped - xi).abs()
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` (which must fill `grad` and return the value) inside the
/// box. `x0` is clamped into the box before the first evaluation.
pub fn minimize<F>(mut f: F, x0: &[f64], bounds: &Bounds, opts: &Options) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let mut g = vec![0.0; n];
    let mut value = f(&x, &mut g);

    let mut s_store: Vec<Vec<f64>> = Vec::new();
    let mut y_store: Vec<Vec<f64>> = Vec::new();
    let mut rho_store: Vec<f64> = Vec::new();

    let mut iterations = 0;
    let mut converged = false;
    let mut slow_iterations = 0;

    while iterations < opts.max_iterations {
        let pg = projected_gradient_norm(&x, &g, bounds);
        if pg <= opts.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        // Two-loop recursion for d = -H g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        if !s_store.is_empty() {
            let k = s_store.len();
            let mut alphas = vec![0.0; k];
            for i in (0..k).rev() {
                alphas[i] = rho_store[i] * dot(&s_store[i], &d);
                for (dj, yj) in d.iter_mut().zip(&y_store[i]) {
                    *dj -= alphas[i] * yj;
                }
            }
            let gamma = {
                let sy = 1.0 / rho_store[k - 1];
                let yy = dot(&y_store[k - 1], &y_store[k - 1]);
                sy / yy
            };
            for dj in d.iter_mut() {
                *dj *= gamma;
            }
            for i in 0..k {
                let beta = rho_store[i] * dot(&y_store[i], &d);
                for (dj, sj) in d.iter_mut().zip(&s_store[i]) {
                    *dj += (alphas[i] - beta) * sj;
                }
            }
        }
        if dot(&d, &g) >= 0.0 {
            // Not a descent direction; fall back to steepest descent.
            s_store.clear();
            y_store.clear();
            rho_store.clear();
            d = g.iter().map(|v| -v).collect();
        }

        // Backtracking Armijo search along the projected path.
        let g_inf = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut alpha = if s_store.is_empty() {
            (1.0 / g_inf.max(1.0)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = false;
        let mut x_new = vec![0.0; n];
        let mut g_new = vec![0.0; n];
        let mut f_new = value;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = (x[i] + alpha * d[i]).clamp(bounds.lower[i], bounds.upper[i]);
            }
            let step_sq: f64 = x_new.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            if step_sq == 0.0 {
                break;
            }
            let predicted: f64 = x_new
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((xn, xo), gi)| gi * (xn - xo))
                .sum();
            f_new = f(&x_new, &mut g_new);
            if f_new <= value + 1e-4 * predicted.min(0.0) && f_new <= value {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if s_store.is_empty() {
                // Nothing left to try.
                break;
            }
            // Restart with fresh curvature information.
            s_store.clear();
            y_store.clear();
            rho_store.clear();
            continue;
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-10 * yy.max(f64::MIN_POSITIVE) {
            s_store.push(s);
            y_store.push(y);
            rho_store.push(1.0 / sy);
            if s_store.len() > opts.memory {
                s_store.remove(0);
                y_store.remove(0);
                rho_store.remove(0);
            }
        }

        let rel_drop = (value - f_new) / value.abs().max(f_new.abs()).max(1e-12);
        x = x_new.clone();
        g = g_new.clone();
        value = f_new;
        if rel_drop <= opts.value_reduction_tolerance {
            slow_iterations += 1;
            if slow_iterations >= 2 {
                converged = true;
                break;
            }
        } else {
            slow_iterations = 0;
        }
    }

    let pg = projected_gradient_norm(&x, &g, bounds);
    if pg <= opts.gradient_tolerance {
        converged = true;
    }
    Minimum {
        position: x,
        value,
        projected_gradient_norm: pg,
        iterations,
        converged,
    }
}
