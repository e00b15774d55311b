//! Autonomization: rewriting the time-periodically forced system as an
//! autonomous one by adjoining the perturbation amplitude eps and one pair
//! of rotating variables (u_j, v_j) per harmonic — or, in the complex
//! variant, coordinates y_j with y_j' = i j nu y_j and y_0 = eps.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{FourierForcing, State, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    RealRsys,
    ComplexCsys,
}

type ComplexState = DVector<Complex64>;

enum Rhs {
    Real(Arc<dyn Fn(&State) -> State + Send + Sync>),
    Complex(Arc<dyn Fn(&ComplexState) -> ComplexState + Send + Sync>),
}

/// The extended autonomous system. Real variant: state (x, eps, u_1..u_N,
/// v_1..v_N) of dimension n + 1 + 2N with eps' = 0, u_j' = -j nu v_j,
/// v_j' = j nu u_j. Complex variant: state (x, y_-N..y_N) of dimension
/// n + 2N + 1 over the complex numbers with y_j' = i j nu y_j.
pub struct ExtendedSystem {
    pub variant: Variant,
    /// Base state dimension n.
    pub n: usize,
    /// Harmonic order N.
    pub order: i32,
    pub nu: f64,
    /// Coordinate count of the declared variant.
    pub dim: usize,
    rhs: Rhs,
}

impl ExtendedSystem {
    /// Real-variant right-hand side.
    pub fn eval_real(&self, ext: &State) -> State {
        match &self.rhs {
            Rhs::Real(f) => f(ext),
            Rhs::Complex(_) => panic!("eval_real called on the complex variant"),
        }
    }

    /// Complex-variant right-hand side.
    pub fn eval_complex(&self, ext: &ComplexState) -> ComplexState {
        match &self.rhs {
            Rhs::Complex(f) => f(ext),
            Rhs::Real(_) => panic!("eval_complex called on the real variant"),
        }
    }

    /// The circular extended state (x, eps, u_j = eps cos(j phase),
    /// v_j = eps sin(j phase)) on which the real variant reproduces the
    /// nonautonomous field.
    pub fn circular_state(&self, x: &State, eps: f64, phase: f64) -> State {
        assert_eq!(self.variant, Variant::RealRsys);
        let nn = self.order as usize;
        let mut ext = DVector::zeros(self.dim);
        ext.rows_mut(0, self.n).copy_from(x);
        ext[self.n] = eps;
        for j in 1..=nn {
            ext[self.n + j] = eps * (j as f64 * phase).cos();
            ext[self.n + nn + j] = eps * (j as f64 * phase).sin();
        }
        ext
    }

    /// Map a real extended state through y_j = (u_j + i v_j) / 2,
    /// y_-j = (u_j - i v_j) / 2, y_0 = eps.
    pub fn to_complex_state(&self, ext: &State) -> ComplexState {
        assert_eq!(self.variant, Variant::RealRsys);
        let nn = self.order as usize;
        let mut out = DVector::from_element(self.n + 2 * nn + 1, Complex64::new(0.0, 0.0));
        for i in 0..self.n {
            out[i] = Complex64::new(ext[i], 0.0);
        }
        out[self.n + nn] = Complex64::new(ext[self.n], 0.0); // y_0 = eps
        for j in 1..=nn {
            let u = ext[self.n + j];
            let v = ext[self.n + nn + j];
            out[self.n + nn + j] = Complex64::new(u, v) * 0.5;
            out[self.n + nn - j] = Complex64::new(u, -v) * 0.5;
        }
        out
    }

    /// Human-readable structural description of the variant.
    pub fn describe(&self) -> String {
        match self.variant {
            Variant::RealRsys => format!(
                "real extended system, dim {} = n ({}) + 1 (eps) + 2N ({} rotating pairs): \
                 x' = f(x) + eps a_0(x) + sum_j (a_j(x) u_j + b_j(x) v_j), eps' = 0, \
                 u_j' = -j nu v_j, v_j' = j nu u_j, nu = {}",
                self.dim, self.n, self.order, self.nu
            ),
            Variant::ComplexCsys => format!(
                "complex extended system, dim {} = n ({}) + 2N + 1 ({} coefficients y_-N..y_N): \
                 x' = f(x) + g_0(x) y_0 + 2 sum_{{j != 0}} g_j(x) y_j, y_j' = i j nu y_j, nu = {}",
                self.dim, self.n, self.order, self.nu
            ),
        }
    }
}

fn conjugacy_sample_states(n: usize) -> Vec<State> {
    let mut xs = vec![DVector::zeros(n), DVector::from_element(n, 1.0)];
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        xs.push(e.clone());
        xs.push(-e);
    }
    xs
}

/// Build the extended autonomous system for the chosen variant. Fails with
/// `ConjugacyViolation` when the forcing coefficients are not conjugate
/// symmetric (the real variant would not be real-valued).
pub fn build_extended(
    sys: &SystemModel,
    forcing: &FourierForcing,
    variant: Variant,
) -> Result<ExtendedSystem> {
    let n = sys.dim();
    forcing.check_conjugacy(&conjugacy_sample_states(n), 1e-10)?;
    let order = forcing.order();
    let nn = order as usize;
    let nu = forcing.nu();
    let sys = sys.clone();
    let forcing = forcing.clone();
    match variant {
        Variant::RealRsys => {
            let dim = n + 1 + 2 * nn;
            let rhs = move |ext: &State| -> State {
                let x = State::from(ext.rows(0, n));
                let eps = ext[n];
                let mut dx = sys.f(&x) + forcing.a0(&x) * eps;
                let mut out = DVector::zeros(n + 1 + 2 * nn);
                for j in 1..=nn {
                    let u = ext[n + j];
                    let v = ext[n + nn + j];
                    dx += forcing.a(j as i32, &x) * u + forcing.b(j as i32, &x) * v;
                    out[n + j] = -(j as f64) * nu * v;
                    out[n + nn + j] = j as f64 * nu * u;
                }
                out.rows_mut(0, n).copy_from(&dx);
                // out[n] (eps') stays identically zero
                out
            };
            Ok(ExtendedSystem {
                variant,
                n,
                order,
                nu,
                dim,
                rhs: Rhs::Real(Arc::new(rhs)),
            })
        }
        Variant::ComplexCsys => {
            let dim = n + 2 * nn + 1;
            let rhs = move |ext: &ComplexState| -> ComplexState {
                let x = State::from_iterator(n, ext.iter().take(n).map(|z| z.re));
                let mut out = DVector::from_element(n + 2 * nn + 1, Complex64::new(0.0, 0.0));
                let fx = sys.f(&x);
                let mut dx = DVector::from_iterator(n, fx.iter().map(|&r| Complex64::new(r, 0.0)));
                for j in -order..=order {
                    let y = ext[n + (j + order) as usize];
                    let weight = if j == 0 { 1.0 } else { 2.0 };
                    dx += forcing.coeff(j, &x) * (y * weight);
                    out[n + (j + order) as usize] = Complex64::new(0.0, j as f64 * nu) * y;
                }
                out.rows_mut(0, n).copy_from(&dx);
                out
            };
            Ok(ExtendedSystem {
                variant,
                n,
                order,
                nu,
                dim,
                rhs: Rhs::Complex(Arc::new(rhs)),
            })
        }
    }
}

/// Residual of the variable change y_j = (u_j + i v_j) / 2, y_0 = eps at one
/// real extended state: maps the state and the real-variant rhs into complex
/// coordinates and compares with the complex-variant rhs. Exact modulo
/// rounding when both systems were built from the same forcing.
pub fn variable_change_residual(
    real_ext: &ExtendedSystem,
    complex_ext: &ExtendedSystem,
    ext_state: &State,
) -> f64 {
    assert_eq!(real_ext.variant, Variant::RealRsys);
    assert_eq!(complex_ext.variant, Variant::ComplexCsys);
    let n = real_ext.n;
    let nn = real_ext.order as usize;
    let d_real = real_ext.eval_real(ext_state);
    let y = real_ext.to_complex_state(ext_state);
    let d_complex = complex_ext.eval_complex(&y);
    // the change of variables is linear, so it maps derivatives the same way
    let d_mapped = real_ext.to_complex_state(&d_real);
    let mut worst: f64 = 0.0;
    for i in 0..n + 2 * nn + 1 {
        worst = worst.max((d_mapped[i] - d_complex[i]).norm());
    }
    worst
}

/// Deviations of the extended real system from its defining identities over
/// a time span.
#[derive(Debug, Clone, Serialize)]
pub struct CircularReport {
    /// Worst deviation of the integrated (u, v) block from
    /// (eps cos j nu t, eps sin j nu t).
    pub max_uv_deviation: f64,
    /// Worst deviation of the extended x block from a direct integration of
    /// the nonautonomous system.
    pub max_x_deviation: f64,
    pub eps: f64,
    pub t_span: (f64, f64),
}

/// Integrate the real extended system from the circular initial condition
/// (u_j, v_j)(0) = (eps, 0) and compare against the rotating solution and a
/// direct integration of x' = f(x) + eps g(x, nu t).
pub fn verify_circular_solution(
    ext: &ExtendedSystem,
    sys: &SystemModel,
    forcing: &FourierForcing,
    x0: &State,
    eps: f64,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<CircularReport> {
    assert_eq!(ext.variant, Variant::RealRsys);
    let n = ext.n;
    let nn = ext.order as usize;
    let nu = ext.nu;
    let z0 = ext.circular_state(x0, eps, nu * t_span.0);
    let traj = integrate(|_t, z| ext.eval_real(z), &z0, t_span, cfg)?;
    let direct = integrate(
        |t, x| sys.f(x) + forcing.eval(x, nu * t) * eps,
        x0,
        t_span,
        cfg,
    )?;
    let mut max_uv: f64 = 0.0;
    let mut max_x: f64 = 0.0;
    let samples = 200;
    for i in 0..=samples {
        let t = t_span.0 + (t_span.1 - t_span.0) * i as f64 / samples as f64;
        let z = traj.eval(t);
        for j in 1..=nn {
            let ph = j as f64 * nu * t;
            max_uv = max_uv.max((z[n + j] - eps * ph.cos()).abs());
            max_uv = max_uv.max((z[n + nn + j] - eps * ph.sin()).abs());
        }
        max_uv = max_uv.max((z[n] - eps).abs());
        let xd = direct.eval(t);
        for i in 0..n {
            max_x = max_x.max((z[i] - xd[i]).abs());
        }
    }
    Ok(CircularReport {
        max_uv_deviation: max_uv,
        max_x_deviation: max_x,
        eps,
        t_span,
    })
}

/// Integrate the decoupled y-subsystem of the complex variant from
/// y_j(0) = eps / 2 (y_0(0) = eps) and report the worst deviation from
/// y_j(t) = (eps / 2) e^{i j nu t}.
pub fn verify_complex_rotation(
    ext: &ExtendedSystem,
    eps: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    assert_eq!(ext.variant, Variant::ComplexCsys);
    let order = ext.order;
    let m = (2 * order + 1) as usize;
    let nu = ext.nu;
    // realify: state (Re y_-N..Re y_N, Im y_-N..Im y_N)
    let rhs = move |_t: f64, z: &State| -> State {
        let mut out = DVector::zeros(2 * m);
        for idx in 0..m {
            let j = idx as f64 - order as f64;
            out[idx] = -j * nu * z[m + idx];
            out[m + idx] = j * nu * z[idx];
        }
        out
    };
    let mut z0 = DVector::zeros(2 * m);
    for idx in 0..m {
        z0[idx] = if idx == order as usize { eps } else { eps / 2.0 };
    }
    let traj = integrate(rhs, &z0, (0.0, t_end), cfg)?;
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let t = t_end * i as f64 / 200.0;
        let z = traj.eval(t);
        for idx in 0..m {
            let j = idx as f64 - order as f64;
            let amp = if idx == order as usize { eps } else { eps / 2.0 };
            worst = worst.max((z[idx] - amp * (j * nu * t).cos()).abs());
            worst = worst.max((z[m + idx] - amp * (j * nu * t).sin()).abs());
        }
    }
    Ok(worst)
}
