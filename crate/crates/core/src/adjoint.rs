//! Construction of the bounded adjoint-variational solution psi2(t; c),
//! the kernel of the Melnikov integrand, by two-sided shooting from the
//! equilibria, plus decay-rate estimation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{solve_ave, IntegratorConfig, Trajectory};
use crate::model::{
    eigen_split, DecayData, DecaySource, HeteroclinicConnection, State, SystemModel,
};

/// Residual and decay diagnostics of a constructed bounded solution.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub max_ave_residual: f64,
    pub decay_ok_plus: bool,
    pub decay_ok_minus: bool,
    pub max_orthogonality: f64,
    pub match_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Psi2Source {
    ClosedForm,
    TwoSidedShooting,
}

enum Psi2Impl {
    Shooting {
        fwd: Trajectory,
        bwd: Trajectory,
        scale_fwd: f64,
        scale_bwd: f64,
    },
    Closure(std::sync::Arc<dyn Fn(f64) -> State + Send + Sync>),
}

/// The bounded AVE solution on [-T, T], decaying in both time directions,
/// normalized to |psi2(0)| = 1 with the first nonzero component positive
/// (shooting variant). Outside the horizon the stored endpoint value is
/// continued with the exponential tail.
pub struct AdjointBoundedSolution {
    imp: Psi2Impl,
    pub horizon: f64,
    pub normalization: f64,
    pub decay: DecayData,
    pub residual_report: ResidualReport,
    pub source: Psi2Source,
}

impl AdjointBoundedSolution {
    pub fn eval(&self, t: f64) -> State {
        let tt = t.clamp(-self.horizon, self.horizon);
        let v = match &self.imp {
            Psi2Impl::Shooting {
                fwd,
                bwd,
                scale_fwd,
                scale_bwd,
            } => {
                if tt <= 0.0 {
                    fwd.eval(tt) * *scale_fwd
                } else {
                    bwd.eval(tt) * *scale_bwd
                }
            }
            Psi2Impl::Closure(f) => f(tt),
        };
        if t.abs() > self.horizon {
            let lam = if t > 0.0 {
                self.decay.lambda2_plus
            } else {
                self.decay.lambda2_minus
            };
            v * (-(t.abs() - self.horizon) * lam).exp()
        } else {
            v
        }
    }

    /// Wrap a known bounded solution (e.g. a closed form); diagnostics are
    /// still computed against the system.
    pub fn from_closed_form(
        eval: std::sync::Arc<dyn Fn(f64) -> State + Send + Sync>,
        sys: &SystemModel,
        conn: &HeteroclinicConnection,
        c: &[f64],
        decay: DecayData,
    ) -> Result<Self> {
        let horizon = decay.horizon();
        let mut sol = AdjointBoundedSolution {
            imp: Psi2Impl::Closure(eval),
            horizon,
            normalization: 1.0,
            decay,
            residual_report: ResidualReport {
                max_ave_residual: 0.0,
                decay_ok_plus: true,
                decay_ok_minus: true,
                max_orthogonality: 0.0,
                match_angle: 0.0,
            },
            source: Psi2Source::ClosedForm,
        };
        sol.residual_report = sol.diagnose(sys, conn, c, 0.0);
        Ok(sol)
    }

    fn diagnose(
        &self,
        sys: &SystemModel,
        conn: &HeteroclinicConnection,
        c: &[f64],
        match_angle: f64,
    ) -> ResidualReport {
        let t_half = self.horizon / 2.0;
        let grid: Vec<f64> = (0..201)
            .map(|i| -t_half + i as f64 * t_half / 100.0)
            .collect();
        let mut max_res: f64 = 0.0;
        let mut max_orth: f64 = 0.0;
        let dt = 1e-5;
        for &t in &grid {
            let psi = self.eval(t);
            let dpsi = (self.eval(t + dt) - self.eval(t - dt)) / (2.0 * dt);
            let x = conn.orbit(t, c);
            let res = (dpsi + sys.jacobian(&x).transpose() * &psi).norm() / (1.0 + psi.norm());
            max_res = max_res.max(res);
            max_orth = max_orth.max(psi.dot(&sys.f(&x)).abs());
        }
        let decay_check = |sgn: f64, lam: f64| -> bool {
            let far = self.eval(sgn * self.horizon).norm();
            let mid = self.eval(sgn * t_half).norm();
            far <= 10.0 * mid * (-(lam) * (self.horizon - t_half)).exp()
        };
        ResidualReport {
            max_ave_residual: max_res,
            decay_ok_plus: decay_check(1.0, self.decay.lambda2_plus),
            decay_ok_minus: decay_check(-1.0, self.decay.lambda2_minus),
            max_orthogonality: max_orth,
            match_angle,
        }
    }
}

fn log_norm_slope(samples: &[(f64, f64)]) -> f64 {
    // least-squares slope of log |v| against t
    let n = samples.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in samples {
        let y = v.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    (n * sty - st * sy) / (n * stt - st * st)
}

/// Decay rates from the eigenvalues of Df at the equilibria, cross-checked
/// against an empirical fit of the orbit's own decay. A mismatch above 5%
/// attaches a warning but keeps the eigenvalue closest to the fit.
pub fn estimate_decay(
    conn: &HeteroclinicConnection,
    sys: &SystemModel,
    c: &[f64],
) -> Result<DecayData> {
    let x_minus = conn.equilibrium_minus(c);
    let x_plus = conn.equilibrium_plus(c);
    let split_minus = eigen_split(sys, &x_minus)?;
    let split_plus = eigen_split(sys, &x_plus)?;
    if split_plus.stable.is_empty()
        || split_plus.unstable.is_empty()
        || split_minus.stable.is_empty()
        || split_minus.unstable.is_empty()
    {
        return Err(Error::AssumptionViolation(
            "equilibria must have both stable and unstable eigenvalues".into(),
        ));
    }

    let min_abs_re = |v: &[num_complex::Complex64]| -> f64 {
        v.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min)
    };
    // psi2 rates: the slowest normal rates at each end
    let lambda2_plus = min_abs_re(&split_plus.unstable);
    let lambda2_minus = min_abs_re(&split_minus.stable);

    // provisional horizon for the empirical fit of |x_h'| = |f(x_h)|
    let lam_min = min_abs_re(&split_plus.stable)
        .min(min_abs_re(&split_minus.unstable))
        .min(lambda2_plus)
        .min(lambda2_minus);
    let t_fit = (30.0 / lam_min).min(1e6);
    let fit = |a: f64, b: f64| -> f64 {
        let samples: Vec<(f64, f64)> = (0..25)
            .map(|i| {
                let t = a + (b - a) * i as f64 / 24.0;
                (t, sys.f(&conn.orbit(t, c)).norm().max(1e-290))
            })
            .collect();
        log_norm_slope(&samples)
    };
    let rate_plus = -fit(t_fit / 2.0, t_fit);
    let rate_minus = fit(-t_fit, -t_fit / 2.0);

    let closest = |candidates: &[num_complex::Complex64], target: f64| -> f64 {
        candidates
            .iter()
            .map(|z| z.re.abs())
            .min_by(|a, b| {
                ((a - target).abs())
                    .partial_cmp(&(b - target).abs())
                    .unwrap()
            })
            .unwrap()
    };
    let lambda1_plus = closest(&split_plus.stable, rate_plus);
    let lambda1_minus = closest(&split_minus.unstable, rate_minus);

    let mut decay = DecayData::new(
        lambda1_plus,
        lambda1_minus,
        lambda2_plus,
        lambda2_minus,
        DecaySource::Eigenvalue,
    )?;
    if rate_plus.is_finite() && (rate_plus - lambda1_plus).abs() > 0.05 * lambda1_plus {
        decay.warning = Some(format!(
            "DecayMismatch: empirical orbit decay {rate_plus:.6e} vs eigenvalue {lambda1_plus:.6e}"
        ));
    }
    Ok(decay)
}

/// Real eigenvector of `m` for the real eigenvalue `lambda`, via the SVD
/// null space of (m - lambda I). Errors when the null space is not
/// one-dimensional.
fn real_eigenvector(m: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::EvaluationFailure("SVD failed".into()))?;
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(lambda.abs());
    let tol = 1e-7 * smax.max(1.0);
    let small: Vec<usize> = (0..n).filter(|&i| sv[i] < tol).collect();
    if small.len() != 1 {
        return Err(Error::EigenvectorAmbiguity(format!(
            "null space of (A - {lambda} I) has dimension {}",
            small.len()
        )));
    }
    let v = vt.row(small[0]).transpose();
    Ok(v.normalize())
}

/// Angular threshold for the t = 0 collinearity match of the two halves.
pub const MATCH_TOL: f64 = 1e-6;

/// Build psi2 by integrating the AVE forward from -T (seeded with the
/// growing eigendirection of -Df(x_-)^T) and backward from +T (seeded with
/// the decaying eigendirection of -Df(x_+)^T), matching scalars at t = 0.
/// Both seeds sit on self-correcting directions: components along the
/// divergent companions contract toward t = 0, so contamination stays
/// below the match tolerance.
pub fn compute_psi2(
    sys: &SystemModel,
    conn: &HeteroclinicConnection,
    c: &[f64],
    cfg: &IntegratorConfig,
) -> Result<AdjointBoundedSolution> {
    let decay = match &conn.decay {
        Some(d) => d.clone(),
        None => estimate_decay(conn, sys, c)?,
    };
    compute_psi2_with_horizon(sys, conn, c, cfg, &decay, decay.horizon())
}

pub fn compute_psi2_with_horizon(
    sys: &SystemModel,
    conn: &HeteroclinicConnection,
    c: &[f64],
    cfg: &IntegratorConfig,
    decay: &DecayData,
    horizon: f64,
) -> Result<AdjointBoundedSolution> {
    let x_minus = conn.equilibrium_minus(c);
    let x_plus = conn.equilibrium_plus(c);

    // -Df(x_-)^T has eigenvalue +lambda2_minus on the direction out of which
    // psi2 grows as t leaves -infinity; -Df(x_+)^T has -lambda2_plus.
    let a_minus = -sys.jacobian(&x_minus).transpose();
    let a_plus = -sys.jacobian(&x_plus).transpose();
    let seed_minus = real_eigenvector(&a_minus, decay.lambda2_minus)?;
    let seed_plus = real_eigenvector(&a_plus, -decay.lambda2_plus)?;

    let fwd = solve_ave(sys, conn, c, &seed_minus, (-horizon, 0.0), cfg)?;
    let bwd = solve_ave(sys, conn, c, &seed_plus, (horizon, 0.0), cfg)?;

    let uf = fwd.eval(0.0);
    let ub = bwd.eval(0.0);
    let nf = uf.norm();
    let nb = ub.norm();
    if nf == 0.0 || nb == 0.0 {
        return Err(Error::EvaluationFailure(
            "shooting produced a zero solution at t = 0".into(),
        ));
    }
    // collinearity mismatch, projected off the nondecaying gradient
    // solutions grad F_j(x_h(0))^T which solve the AVE exactly but never
    // decay
    let sgn = if uf.dot(&ub) >= 0.0 { 1.0 } else { -1.0 };
    let mut d = &uf / nf - sgn * &ub / nb;
    let x0 = conn.orbit(0.0, c);
    for fi in sys.first_integrals() {
        let g = (fi.gradient)(&x0);
        let gn = g.norm();
        if gn > 0.0 {
            let gu = &g / gn;
            d -= &gu * d.dot(&gu);
        }
    }
    let angle = d.norm();
    if angle > MATCH_TOL {
        return Err(Error::MatchFailure {
            angle,
            tol: MATCH_TOL,
        });
    }

    // common value at 0 from the forward half; backward half rescaled onto it
    let scale_bwd_raw = uf.dot(&ub) / (nb * nb);
    // normalize |psi2(0)| = 1, first nonzero component positive
    let mut sigma = 1.0 / nf;
    let lead = uf.iter().find(|v| v.abs() > 1e-9 * nf);
    if let Some(v) = lead {
        if *v < 0.0 {
            sigma = -sigma;
        }
    }
    let scale_fwd = sigma;
    let scale_bwd = sigma * scale_bwd_raw;

    let mut sol = AdjointBoundedSolution {
        imp: Psi2Impl::Shooting {
            fwd,
            bwd,
            scale_fwd,
            scale_bwd,
        },
        horizon,
        normalization: sigma,
        decay: decay.clone(),
        residual_report: ResidualReport {
            max_ave_residual: 0.0,
            decay_ok_plus: true,
            decay_ok_minus: true,
            max_orthogonality: 0.0,
            match_angle: angle,
        },
        source: Psi2Source::TwoSidedShooting,
    };
    sol.residual_report = sol.diagnose(sys, conn, c, angle);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigidbody::{make_problem, Branch, RigidBodyParams};

    fn setup(branch: Branch) -> (SystemModel, HeteroclinicConnection, RigidBodyParams) {
        let p = RigidBodyParams::default();
        let (sys, _, conn) = make_problem(&p, branch).unwrap();
        (sys, conn, p)
    }

    #[test]
    fn decay_rates_equal_saddle_strength() {
        let (sys, conn, p) = setup(Branch::Plus);
        for c in [0.5, 1.0, 2.0] {
            let d = estimate_decay(&conn, &sys, &[c]).unwrap();
            let kc = p.k() * c;
            for v in [d.lambda1_plus, d.lambda1_minus, d.lambda2_plus, d.lambda2_minus] {
                assert!((v - kc).abs() < 1e-10 * kc, "c = {c}");
            }
            assert_eq!(d.source, DecaySource::Eigenvalue);
            assert!(d.warning.is_none());
        }
    }

    #[test]
    fn shooting_matches_closed_form_up_to_scale() {
        let cfg = IntegratorConfig::default();
        for branch in Branch::ALL {
            let (sys, conn, p) = setup(branch);
            let psi2 = compute_psi2(&sys, &conn, &[1.0], &cfg).unwrap();
            assert!((psi2.eval(0.0).norm() - 1.0).abs() < 1e-12);
            // rescale the closed form onto the numerical normalization
            let scale = p.closed_form_psi2(branch, 0.0, 1.0).dot(&psi2.eval(0.0));
            let mut worst: f64 = 0.0;
            for i in 0..81 {
                let t = -20.0 + 0.5 * i as f64;
                let d = (psi2.eval(t) * scale - p.closed_form_psi2(branch, t, 1.0)).norm();
                worst = worst.max(d / scale.abs());
            }
            assert!(worst < 1e-7, "{branch:?}: deviation {worst:e}");
        }
    }

    #[test]
    fn psi2_orthogonal_to_orbit_velocity() {
        let (sys, conn, _) = setup(Branch::Plus);
        let psi2 = compute_psi2(&sys, &conn, &[1.0], &IntegratorConfig::default()).unwrap();
        for i in 0..61 {
            let t = -15.0 + 0.5 * i as f64;
            let dot = psi2.eval(t).dot(&sys.f(&conn.orbit(t, &[1.0])));
            assert!(dot.abs() < 1e-9, "t = {t}: {dot:e}");
        }
        assert!(psi2.residual_report.max_orthogonality < 1e-9);
        assert!(psi2.residual_report.decay_ok_plus && psi2.residual_report.decay_ok_minus);
    }

    #[test]
    fn horizon_extension_leaves_solution_unchanged() {
        let (sys, conn, _) = setup(Branch::Plus);
        let cfg = IntegratorConfig::default();
        let decay = estimate_decay(&conn, &sys, &[1.0]).unwrap();
        let base = decay.horizon();
        let a = compute_psi2_with_horizon(&sys, &conn, &[1.0], &cfg, &decay, base).unwrap();
        let b =
            compute_psi2_with_horizon(&sys, &conn, &[1.0], &cfg, &decay, 1.25 * base).unwrap();
        for &t in [-10.0, -2.0, 0.0, 1.0, 7.0].iter() {
            let d = (a.eval(t) - b.eval(t)).norm();
            assert!(d < 1e-8, "t = {t}: {d:e}");
        }
    }

    #[test]
    fn closed_form_wrapper_reports_small_residuals() {
        let (sys, conn, p) = setup(Branch::Plus);
        let decay = estimate_decay(&conn, &sys, &[1.0]).unwrap();
        let sol = AdjointBoundedSolution::from_closed_form(
            std::sync::Arc::new(move |t| p.closed_form_psi2(Branch::Plus, t, 1.0)),
            &sys,
            &conn,
            &[1.0],
            decay,
        )
        .unwrap();
        assert_eq!(sol.source, Psi2Source::ClosedForm);
        // residual limited by the central-difference step of the diagnostic
        assert!(sol.residual_report.max_ave_residual < 1e-6);
        assert!(sol.residual_report.max_orthogonality < 1e-12);
    }

    #[test]
    fn tail_continuation_decays() {
        let (sys, conn, _) = setup(Branch::Plus);
        let psi2 = compute_psi2(&sys, &conn, &[1.0], &IntegratorConfig::default()).unwrap();
        let t = psi2.horizon;
        let inside = psi2.eval(t).norm();
        let outside = psi2.eval(t + 3.0).norm();
        let lam = psi2.decay.lambda2_plus;
        assert!((outside - inside * (-3.0 * lam).exp()).abs() < 1e-12 * inside.max(1e-300));
    }
}
