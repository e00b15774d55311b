//! Adaptive Dormand-Prince 5(4) integration with dense output, plus the
//! variational and adjoint variational equations along a supplied orbit.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{HeteroclinicConnection, State, SystemModel};

/// Integration method selector. A single embedded RK 5(4) pair is the only
/// required method; the enum leaves room for alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EmbeddedRk45,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub method: Method,
    /// Scale the error by the state norm instead of per component. The right
    /// choice for linear (variational) equations whose solutions sweep many
    /// orders of magnitude: rounding noise from the large components would
    /// otherwise defeat per-component relative control on the small ones.
    pub norm_control: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: f64::INFINITY,
            method: Method::EmbeddedRk45,
            norm_control: false,
        }
    }
}

impl IntegratorConfig {
    pub fn tight() -> Self {
        IntegratorConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidParams(
                "tolerances and max_step must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) coefficients (Hairer, Norsett & Wanner, DOPRI5).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b - b_hat: weights for the embedded 4th-order error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients for the 5th-order interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step together with the interpolation polynomial for it.
#[derive(Debug, Clone)]
struct DenseSegment {
    /// Step start time (may be to the right of the end for backward runs).
    t0: f64,
    /// Signed step size.
    h: f64,
    r: [DVector<f64>; 5],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> DVector<f64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        &self.r[0]
            + s * (&self.r[1] + s1 * (&self.r[2] + s * (&self.r[3] + s1 * &self.r[4])))
    }

    fn left(&self) -> f64 {
        self.t0.min(self.t0 + self.h)
    }

    fn right(&self) -> f64 {
        self.t0.max(self.t0 + self.h)
    }
}

/// Solution of an initial value problem on a time span, with step points and
/// a dense interpolant whose error is commensurate with the step control.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    segments: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &State {
        self.states.last().unwrap()
    }

    /// Dense evaluation. Times outside the covered span are clamped to the
    /// nearest endpoint segment (callers stay within the span).
    pub fn eval(&self, t: f64) -> State {
        let idx = match self
            .segments
            .binary_search_by(|seg| seg.left().partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let idx = idx.min(self.segments.len() - 1);
        // step ends can shadow the next segment start by rounding; nudge right
        let seg = if t > self.segments[idx].right() && idx + 1 < self.segments.len() {
            &self.segments[idx + 1]
        } else {
            &self.segments[idx]
        };
        seg.eval(t)
    }
}

fn error_norm(err: &DVector<f64>, y0: &DVector<f64>, y1: &DVector<f64>, cfg: &IntegratorConfig) -> f64 {
    let n = err.len();
    let mut acc = 0.0;
    if cfg.norm_control {
        let scale = y0.amax().max(y1.amax());
        let sc = cfg.abs_tol + cfg.rel_tol * scale;
        for i in 0..n {
            let q = err[i] / sc;
            acc += q * q;
        }
    } else {
        for i in 0..n {
            let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
            let q = err[i] / sc;
            acc += q * q;
        }
    }
    (acc / n as f64).sqrt()
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` (backward when `t1 < t0`).
/// The returned trajectory has strictly increasing times either way.
pub fn integrate<F>(rhs: F, x0: &State, t_span: (f64, f64), cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &State) -> State,
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    if t0 == t1 {
        return Err(Error::InvalidParams("t_span must be nondegenerate".into()));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let n = x0.len();

    let mut t = t0;
    let mut y = x0.clone();
    let mut k1 = rhs(t, &y);
    if k1.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k1.len(),
        });
    }

    // initial step: crude version of Hairer's hinit
    let sc = |v: &DVector<f64>| -> f64 {
        let mut acc: f64 = 0.0;
        for i in 0..n {
            let s = cfg.abs_tol + cfg.rel_tol * y[i].abs();
            acc += (v[i] / s).powi(2);
        }
        (acc / n as f64).sqrt()
    };
    let d0 = sc(&y);
    let d1 = sc(&k1);
    let mut h = if d1 > 1e-10 {
        (0.01 * d0 / d1).clamp(1e-8, span)
    } else {
        1e-6 * span.max(1.0)
    };
    h = h.min(cfg.max_step).min(span);

    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut segments: Vec<DenseSegment> = Vec::new();
    let mut rejected = false;
    let min_step = 1e-14 * span.max(t0.abs()).max(t1.abs()).max(1.0);

    let mut k = vec![DVector::zeros(n); 7];
    while (t1 - t) * dir > 0.0 {
        h = h.min((t1 - t).abs()).min(cfg.max_step);
        if h < min_step {
            return Err(Error::StepSizeUnderflow { t });
        }
        let hs = h * dir;

        k[0] = k1.clone();
        let y2 = &y + hs * A2[0] * &k[0];
        k[1] = rhs(t + C[1] * hs, &y2);
        let y3 = &y + hs * (A3[0] * &k[0] + A3[1] * &k[1]);
        k[2] = rhs(t + C[2] * hs, &y3);
        let y4 = &y + hs * (A4[0] * &k[0] + A4[1] * &k[1] + A4[2] * &k[2]);
        k[3] = rhs(t + C[3] * hs, &y4);
        let y5 = &y + hs * (A5[0] * &k[0] + A5[1] * &k[1] + A5[2] * &k[2] + A5[3] * &k[3]);
        k[4] = rhs(t + C[4] * hs, &y5);
        let y6 = &y
            + hs * (A6[0] * &k[0] + A6[1] * &k[1] + A6[2] * &k[2] + A6[3] * &k[3] + A6[4] * &k[4]);
        k[5] = rhs(t + C[5] * hs, &y6);
        let ynew = &y
            + hs * (B[0] * &k[0] + B[2] * &k[2] + B[3] * &k[3] + B[4] * &k[4] + B[5] * &k[5]);
        let k7 = rhs(t + hs, &ynew);
        k[6] = k7;

        let finite = ynew.iter().all(|v| v.is_finite()) && k[6].iter().all(|v| v.is_finite());
        let err = if finite {
            let e = hs
                * (E[0] * &k[0]
                    + E[2] * &k[2]
                    + E[3] * &k[3]
                    + E[4] * &k[4]
                    + E[5] * &k[5]
                    + E[6] * &k[6]);
            error_norm(&e, &y, &ynew, cfg)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            // accept; build the dense interpolant for this step
            let ydiff = &ynew - &y;
            let bspl = hs * &k[0] - &ydiff;
            let r4 = &ydiff - hs * &k[6] - &bspl;
            let r5 = hs
                * (D[0] * &k[0]
                    + D[2] * &k[2]
                    + D[3] * &k[3]
                    + D[4] * &k[4]
                    + D[5] * &k[5]
                    + D[6] * &k[6]);
            segments.push(DenseSegment {
                t0: t,
                h: hs,
                r: [y.clone(), ydiff, bspl, r4, r5],
            });
            t += hs;
            y = ynew;
            k1 = k[6].clone();
            times.push(t);
            states.push(y.clone());
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            let facmax = if rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, facmax);
            h *= fac;
            rejected = false;
        } else {
            if err.is_finite() {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            } else {
                h *= 0.25;
            }
            rejected = true;
        }
    }

    if dir < 0.0 {
        times.reverse();
        states.reverse();
        segments.reverse();
    }
    Ok(Trajectory {
        times,
        states,
        segments,
    })
}

/// Integrate the nonlinear flow of the unperturbed field.
pub fn flow(
    sys: &SystemModel,
    x0: &State,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate(|_, x| sys.f(x), x0, t_span, cfg)
}

/// Variational equation xi' = Df(x_h(t; c)) xi along the connection orbit.
/// Being linear, it is integrated with norm-based error control.
pub fn solve_ve(
    sys: &SystemModel,
    conn: &HeteroclinicConnection,
    c: &[f64],
    xi0: &State,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if xi0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: xi0.len(),
        });
    }
    let cfg = IntegratorConfig {
        norm_control: true,
        ..*cfg
    };
    integrate(
        |t, xi| sys.jacobian(&conn.orbit(t, c)) * xi,
        xi0,
        t_span,
        &cfg,
    )
}

/// Adjoint variational equation xi' = -Df(x_h(t; c))^T xi along the orbit.
/// Being linear, it is integrated with norm-based error control.
pub fn solve_ave(
    sys: &SystemModel,
    conn: &HeteroclinicConnection,
    c: &[f64],
    psi0: &State,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if psi0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: psi0.len(),
        });
    }
    let cfg = IntegratorConfig {
        norm_control: true,
        ..*cfg
    };
    integrate(
        |t, psi| -(sys.jacobian(&conn.orbit(t, c)).transpose()) * psi,
        psi0,
        t_span,
        &cfg,
    )
}
