//! The Melnikov function M(theta; c): Fourier coefficients by quadrature of
//! the adjoint-weighted forcing along the connection, direct theta-grid
//! samples for cross-validation, and simple-zero location.

use num_complex::Complex64;
use serde::Serialize;

use crate::adjoint::AdjointBoundedSolution;
use crate::error::{Error, Result};
use crate::model::{FourierForcing, HeteroclinicConnection};
use crate::quad;

/// Default absolute quadrature tolerance per coefficient.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct MelnikovResult {
    pub c: Vec<f64>,
    pub nu: f64,
    pub order: i32,
    /// M_hat_j for j = -N..N, indexed by j + N.
    pub coeffs: Vec<(f64, f64)>,
    pub quad_errors: Vec<f64>,
    /// Direct-quadrature samples (theta_k, M(theta_k)), computed
    /// independently of the coefficients.
    pub theta_grid: Vec<(f64, f64)>,
    /// Worst disagreement between grid samples and the coefficient series.
    pub grid_series_max_diff: f64,
    pub scale_note: String,
}

impl MelnikovResult {
    pub fn coeff(&self, j: i32) -> Complex64 {
        let (re, im) = self.coeffs[(j + self.order) as usize];
        Complex64::new(re, im)
    }

    pub fn quad_error(&self, j: i32) -> f64 {
        self.quad_errors[(j + self.order) as usize]
    }

    pub fn total_quad_error(&self) -> f64 {
        self.quad_errors.iter().sum()
    }

    /// M(theta) from the coefficient series.
    pub fn series_eval(&self, theta: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -self.order..=self.order {
            acc += self.coeff(j) * Complex64::from_polar(1.0, j as f64 * theta);
        }
        acc.re
    }

    /// M'(theta) by term-wise differentiation.
    pub fn series_derivative(&self, theta: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -self.order..=self.order {
            acc += Complex64::new(0.0, j as f64)
                * self.coeff(j)
                * Complex64::from_polar(1.0, j as f64 * theta);
        }
        acc.re
    }

    /// Rescale every coefficient and grid sample (psi2 scale covariance).
    pub fn rescaled(&self, sigma: f64) -> MelnikovResult {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            v.0 *= sigma;
            v.1 *= sigma;
        }
        for v in &mut out.quad_errors {
            *v *= sigma.abs();
        }
        for v in &mut out.theta_grid {
            v.1 *= sigma;
        }
        out.scale_note = format!("{} (rescaled by {sigma:.6e})", self.scale_note);
        out
    }
}

/// A zero of M with its derivative; `is_simple` when |M'| clears the
/// simplicity tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct SimpleZero {
    pub theta0: f64,
    pub derivative: f64,
    pub is_simple: bool,
}

fn oscillation_panel(j: i32, nu: f64) -> f64 {
    let freq = (j.abs().max(1)) as f64 * nu;
    (std::f64::consts::PI / (4.0 * freq)).min(1.0)
}

/// Tail of the improper integral beyond the horizon, bounded by the
/// endpoint magnitude over the decay rate.
fn tail_bound(
    integrand_at: impl Fn(f64) -> f64,
    horizon: f64,
    lambda_plus: f64,
    lambda_minus: f64,
) -> f64 {
    integrand_at(horizon) / lambda_plus + integrand_at(-horizon) / lambda_minus
}

/// M_hat_j(c) = int psi2(t; c) . g_hat_j(x_h(t; c)) e^{i j nu t} dt,
/// by adaptive quadrature on [-T, T] with the analytic tail folded into
/// the error estimate.
pub fn melnikov_coeff(
    conn: &HeteroclinicConnection,
    forcing: &FourierForcing,
    psi2: &AdjointBoundedSolution,
    c: &[f64],
    j: i32,
    quad_tol: f64,
) -> Result<(Complex64, f64)> {
    if j.abs() > forcing.order() {
        return Err(Error::InvalidParams(format!(
            "harmonic {j} exceeds forcing order {}",
            forcing.order()
        )));
    }
    let nu = forcing.nu();
    let horizon = psi2.horizon;
    let integrand = |t: f64| -> Complex64 {
        let x = conn.orbit(t, c);
        let psi = psi2.eval(t);
        let g = forcing.coeff(j, &x);
        let mut dot = Complex64::new(0.0, 0.0);
        for i in 0..psi.len() {
            dot += g[i] * psi[i];
        }
        dot * Complex64::from_polar(1.0, j as f64 * nu * t)
    };
    let (value, mut err) =
        quad::integrate_complex(&integrand, -horizon, horizon, quad_tol, oscillation_panel(j, nu))?;
    err += tail_bound(
        |t| integrand(t).norm(),
        horizon,
        psi2.decay.lambda2_plus,
        psi2.decay.lambda2_minus,
    );
    Ok((value, err))
}

/// Direct quadrature of M(theta) = int psi2 . g(x_h, nu t + theta) dt for a
/// single phase, independent of the coefficient route.
pub fn melnikov_direct(
    conn: &HeteroclinicConnection,
    forcing: &FourierForcing,
    psi2: &AdjointBoundedSolution,
    c: &[f64],
    theta: f64,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    let nu = forcing.nu();
    let horizon = psi2.horizon;
    let integrand = |t: f64| -> f64 {
        let x = conn.orbit(t, c);
        psi2.eval(t).dot(&forcing.eval(&x, nu * t + theta))
    };
    let (value, mut err) = quad::integrate_real(
        &integrand,
        -horizon,
        horizon,
        quad_tol,
        oscillation_panel(forcing.order(), nu),
    )?;
    err += tail_bound(
        |t| integrand(t).abs(),
        horizon,
        psi2.decay.lambda2_plus,
        psi2.decay.lambda2_minus,
    );
    Ok((value, err))
}

/// All coefficients |j| <= N plus direct grid samples on a uniform theta
/// grid (at least 4N + 1 points to resolve every harmonic).
pub fn melnikov_function(
    conn: &HeteroclinicConnection,
    forcing: &FourierForcing,
    psi2: &AdjointBoundedSolution,
    c: &[f64],
    theta_grid_size: usize,
    quad_tol: f64,
) -> Result<MelnikovResult> {
    let order = forcing.order();
    if theta_grid_size < (4 * order + 1) as usize {
        return Err(Error::InvalidParams(format!(
            "theta_grid_size {theta_grid_size} must be at least 4N + 1 = {}",
            4 * order + 1
        )));
    }
    let mut coeffs = Vec::new();
    let mut quad_errors = Vec::new();
    for j in -order..=order {
        let (v, e) = melnikov_coeff(conn, forcing, psi2, c, j, quad_tol)?;
        coeffs.push((v.re, v.im));
        quad_errors.push(e);
    }
    let mut theta_grid = Vec::new();
    for k in 0..theta_grid_size {
        let theta = k as f64 * std::f64::consts::TAU / theta_grid_size as f64;
        let (v, _) = melnikov_direct(conn, forcing, psi2, c, theta, quad_tol)?;
        theta_grid.push((theta, v));
    }
    let mut mr = MelnikovResult {
        c: c.to_vec(),
        nu: forcing.nu(),
        order,
        coeffs,
        quad_errors,
        theta_grid,
        grid_series_max_diff: 0.0,
        scale_note: format!(
            "psi2 normalization {:.17e} ({:?})",
            psi2.normalization, psi2.source
        ),
    };
    mr.grid_series_max_diff = mr
        .theta_grid
        .iter()
        .map(|&(th, v)| (v - mr.series_eval(th)).abs())
        .fold(0.0, f64::max);
    Ok(mr)
}

/// Locate all zeros of the coefficient series in [0, 2 pi): sign-change
/// bracketing on a 1024-point grid, refined by bisection with a secant
/// polish. Returns an empty list when M has no sign change (including the
/// identically-zero case).
pub fn find_simple_zeros(mr: &MelnikovResult) -> Vec<SimpleZero> {
    const GRID: usize = 1024;
    let tau = std::f64::consts::TAU;
    let values: Vec<f64> = (0..GRID)
        .map(|k| mr.series_eval(k as f64 * tau / GRID as f64))
        .collect();
    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let max_deriv = (0..GRID)
        .map(|k| mr.series_derivative(k as f64 * tau / GRID as f64).abs())
        .fold(0.0f64, f64::max);
    let coeff_scale: f64 = mr.coeffs.iter().map(|(re, im)| re.abs() + im.abs()).sum();
    if max_abs <= 1e-14 * coeff_scale.max(1e-300) {
        // identically zero within tolerance: no isolated zeros to report
        return Vec::new();
    }
    let zero_tol = 1e-9 * max_abs;
    let simple_tol = 1e-6 * max_deriv;

    let mut zeros = Vec::new();
    for k in 0..GRID {
        let a = k as f64 * tau / GRID as f64;
        let b = (k + 1) as f64 * tau / GRID as f64;
        let (fa, fb) = (values[k], values[(k + 1) % GRID]);
        if fa == 0.0 {
            zeros.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = mr.series_eval(mid);
                if fm == 0.0 || hi - lo < 1e-13 {
                    lo = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            // secant polish
            let mut th = 0.5 * (lo + hi);
            for _ in 0..4 {
                let f = mr.series_eval(th);
                let d = mr.series_derivative(th);
                if d.abs() > 0.0 {
                    let step = f / d;
                    th -= step;
                    if step.abs() < 1e-14 {
                        break;
                    }
                }
            }
            zeros.push(th.rem_euclid(tau));
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    zeros
        .into_iter()
        .filter(|&th| mr.series_eval(th).abs() <= zero_tol)
        .map(|th| {
            let d = mr.series_derivative(th);
            SimpleZero {
                theta0: th,
                derivative: d,
                is_simple: d.abs() > simple_tol,
            }
        })
        .collect()
}
