//! Built-in problem: the periodically forced rigid body. Everything here is
//! in closed form — orbits, first integrals, the bounded adjoint solution
//! and the Melnikov function — so the module doubles as the oracle corpus
//! for the numerical pipeline.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    FirstIntegral, FourierForcing, HeteroclinicConnection, OrbitKind, SpectralCounts, State,
    SystemModel,
};

/// Moments of inertia, forcing amplitudes, damping constants and frequency.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RigidBodyParams {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub alpha: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub nu: f64,
}

impl Default for RigidBodyParams {
    /// The reference parameter point: (I1, I2, I3) = (1, 2, 3), alpha = 1,
    /// beta3 = 1, no damping, nu = 1.
    fn default() -> Self {
        RigidBodyParams {
            i1: 1.0,
            i2: 2.0,
            i3: 3.0,
            alpha: 1.0,
            beta2: 0.0,
            beta3: 1.0,
            delta1: 0.0,
            delta2: 0.0,
            delta3: 0.0,
            nu: 1.0,
        }
    }
}

/// Which of the four heteroclinic connections between (0, -c, 0) and
/// (0, c, 0) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
    TildePlus,
    TildeMinus,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::Plus,
        Branch::Minus,
        Branch::TildePlus,
        Branch::TildeMinus,
    ];

    pub fn parse(s: &str) -> Result<Branch> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            "tilde_plus" => Ok(Branch::TildePlus),
            "tilde_minus" => Ok(Branch::TildeMinus),
            _ => Err(Error::Config(format!(
                "unknown branch '{s}' (expected plus|minus|tilde_plus|tilde_minus)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::TildePlus => "tilde_plus",
            Branch::TildeMinus => "tilde_minus",
        }
    }

    /// Component signs (s1, s2, s3) of (sech, tanh, sech) in the orbit.
    fn signs(&self) -> (f64, f64, f64) {
        match self {
            Branch::Plus => (1.0, 1.0, 1.0),
            Branch::Minus => (-1.0, 1.0, -1.0),
            Branch::TildePlus => (1.0, -1.0, -1.0),
            Branch::TildeMinus => (-1.0, -1.0, 1.0),
        }
    }
}

impl RigidBodyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.i1 > 0.0 && self.i1 < self.i2 && self.i2 < self.i3) {
            return Err(Error::InvalidParams(format!(
                "moments of inertia must satisfy 0 < I1 < I2 < I3, got ({}, {}, {})",
                self.i1, self.i2, self.i3
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParams("nu must be positive".into()));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta3", self.delta3),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// Saddle strength k = sqrt((I2 - I1)(I3 - I2) / (I3 I1)).
    pub fn k(&self) -> f64 {
        ((self.i2 - self.i1) * (self.i3 - self.i2) / (self.i3 * self.i1)).sqrt()
    }

    /// Kinetic energy F~1 = (I1 w1^2 + I2 w2^2 + I3 w3^2) / 2.
    pub fn energy(&self, w: &State) -> f64 {
        0.5 * (self.i1 * w[0] * w[0] + self.i2 * w[1] * w[1] + self.i3 * w[2] * w[2])
    }

    /// Squared angular momentum F~2 = I1^2 w1^2 + I2^2 w2^2 + I3^2 w3^2.
    pub fn momentum_sq(&self, w: &State) -> f64 {
        self.i1 * self.i1 * w[0] * w[0]
            + self.i2 * self.i2 * w[1] * w[1]
            + self.i3 * self.i3 * w[2] * w[2]
    }

    pub fn unperturbed_field(&self, w: &State) -> State {
        DVector::from_vec(vec![
            (self.i2 - self.i3) / self.i1 * w[1] * w[2],
            (self.i3 - self.i1) / self.i2 * w[2] * w[0],
            (self.i1 - self.i2) / self.i3 * w[0] * w[1],
        ])
    }

    pub fn unperturbed_jacobian(&self, w: &State) -> DMatrix<f64> {
        let p1 = (self.i2 - self.i3) / self.i1;
        let p2 = (self.i3 - self.i1) / self.i2;
        let p3 = (self.i1 - self.i2) / self.i3;
        DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                p1 * w[2],
                p1 * w[1],
                p2 * w[2],
                0.0,
                p2 * w[0],
                p3 * w[1],
                p3 * w[0],
                0.0,
            ],
        )
    }

    fn sech_amplitudes(&self, c: f64) -> (f64, f64) {
        let a = c * (self.i2 * (self.i3 - self.i2) / (self.i1 * (self.i3 - self.i1))).sqrt();
        let b = c * (self.i2 * (self.i2 - self.i1) / (self.i3 * (self.i3 - self.i1))).sqrt();
        (a, b)
    }

    /// Closed-form heteroclinic orbit on the level set F1 = c.
    pub fn orbit(&self, branch: Branch, t: f64, c: f64) -> State {
        let (s1, s2, s3) = branch.signs();
        let (a, b) = self.sech_amplitudes(c);
        let u = self.k() * c * t;
        let sech = 1.0 / u.cosh();
        DVector::from_vec(vec![s1 * a * sech, s2 * c * u.tanh(), s3 * b * sech])
    }

    /// Bounded adjoint solution psi2 = (I1 (I1 - I2) w1, 0, I3 (I3 - I2) w3)
    /// evaluated on the branch orbit.
    pub fn closed_form_psi2(&self, branch: Branch, t: f64, c: f64) -> State {
        let w = self.orbit(branch, t, c);
        DVector::from_vec(vec![
            self.i1 * (self.i1 - self.i2) * w[0],
            0.0,
            self.i3 * (self.i3 - self.i2) * w[2],
        ])
    }

    /// Melnikov amplitude of the alpha (cos theta) harmonic.
    pub fn m1(&self, c: f64) -> f64 {
        let arg = std::f64::consts::PI * self.nu / (2.0 * self.k() * c);
        std::f64::consts::PI
            * self.nu
            * (self.i1 * self.i2 * self.i3 * self.i3 / ((self.i3 - self.i1) * (self.i3 - self.i2)))
                .sqrt()
            / arg.cosh()
    }

    /// Melnikov amplitude of the beta3 (sin theta) harmonic.
    pub fn m2(&self, c: f64) -> f64 {
        let arg = std::f64::consts::PI * self.nu / (2.0 * self.k() * c);
        std::f64::consts::PI
            * (self.i1 * self.i2 * (self.i3 - self.i2) / (self.i3 - self.i1)).sqrt()
            / arg.cosh()
    }

    /// Damping contribution to the theta-independent term.
    pub fn m3(&self, c: f64) -> f64 {
        2.0 * c * self.i2 * (self.i2 - self.i1) * (self.i3 - self.i2)
            / (self.k() * (self.i3 - self.i1))
    }

    /// Closed-form Melnikov function for the branch, with psi2 as written
    /// above (no extra sign convention). The harmonic signs follow from the
    /// orbit's component signs: w1 w2 and w3 both carry s1 s2 = s3, so the
    /// plus and tilde_minus branches share one sign and minus and
    /// tilde_plus the other.
    pub fn closed_form_melnikov(&self, branch: Branch, c: f64, theta: f64) -> f64 {
        let (s1, s2, _) = branch.signs();
        let s = s1 * s2;
        s * (self.alpha * self.m1(c) * theta.cos() + self.beta3 * self.m2(c) * theta.sin())
            - (self.delta3 - self.delta1) * self.m3(c)
    }

    /// Fourier coefficient M_hat_j of the closed-form Melnikov function
    /// (j in {-1, 0, 1}).
    pub fn closed_form_coeff(&self, branch: Branch, c: f64, j: i32) -> Complex64 {
        let (s1, s2, _) = branch.signs();
        let s = s1 * s2;
        match j {
            0 => Complex64::new(-(self.delta3 - self.delta1) * self.m3(c), 0.0),
            1 => Complex64::new(
                0.5 * s * self.alpha * self.m1(c),
                -0.5 * s * self.beta3 * self.m2(c),
            ),
            -1 => Complex64::new(
                0.5 * s * self.alpha * self.m1(c),
                0.5 * s * self.beta3 * self.m2(c),
            ),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Assemble the rigid body as a generic problem triple: the unperturbed
/// system with its first integral, the order-1 Fourier forcing (damping in
/// the zeroth harmonic), and the selected closed-form connection.
pub fn make_problem(
    p: &RigidBodyParams,
    branch: Branch,
) -> Result<(SystemModel, FourierForcing, HeteroclinicConnection)> {
    p.validate()?;
    let pf = *p;
    let sys = SystemModel::new(
        3,
        Arc::new(move |w: &State| pf.unperturbed_field(w)),
        Some(Arc::new(move |w: &State| pf.unperturbed_jacobian(w))),
        vec![FirstIntegral::new(
            Arc::new(move |w: &State| pf.energy(w)),
            Arc::new(move |w: &State| {
                DVector::from_vec(vec![pf.i1 * w[0], pf.i2 * w[1], pf.i3 * w[2]])
            }),
        )],
        SpectralCounts {
            stable: 1,
            unstable: 1,
            zero: 1,
        },
    )?;

    // g(x, theta) = g_hat_0(x) + g_hat_1(x) e^{i theta} + g_hat_{-1}(x) e^{-i theta}
    // with the sin(nu t) terms split as sin = (e^{i.} - e^{-i.}) / (2i).
    let g0 = {
        let p = *p;
        Arc::new(move |w: &State| {
            DVector::from_vec(vec![
                Complex64::new(-p.delta1 * w[0], 0.0),
                Complex64::new(-p.delta2 * w[1], 0.0),
                Complex64::new(-p.delta3 * w[2], 0.0),
            ])
        })
    };
    let sin_part = |p: RigidBodyParams, w: &State| {
        DVector::from_vec(vec![
            -p.alpha / p.i1 * w[1],
            (p.alpha * w[0] + p.beta2) / p.i2,
            p.beta3 / p.i3,
        ])
    };
    let g1 = {
        let p = *p;
        Arc::new(move |w: &State| {
            sin_part(p, w).map(|v| Complex64::new(0.0, -0.5) * v)
        })
    };
    let gm1 = {
        let p = *p;
        Arc::new(move |w: &State| {
            sin_part(p, w).map(|v| Complex64::new(0.0, 0.5) * v)
        })
    };
    let forcing = FourierForcing::new(1, p.nu, vec![gm1, g0, g1])?;

    let po = *p;
    let orbit = Arc::new(move |t: f64, c: &[f64]| po.orbit(branch, t, c[0]));
    let (_, s2, _) = branch.signs();
    let eq_minus = Arc::new(move |c: &[f64]| DVector::from_vec(vec![0.0, -s2 * c[0], 0.0]));
    let eq_plus = Arc::new(move |c: &[f64]| DVector::from_vec(vec![0.0, s2 * c[0], 0.0]));
    let conn = HeteroclinicConnection::new(
        orbit,
        eq_minus,
        eq_plus,
        vec![[0.25, 4.0]],
        OrbitKind::ClosedForm,
    )?;

    Ok((sys, forcing, conn))
}

/// Full right-hand side of the forced, damped system at perturbation
/// strength eps and phase nu t + theta0.
pub fn perturbed_field(p: &RigidBodyParams, eps: f64, t: f64, theta0: f64, w: &State) -> State {
    let s = (p.nu * t + theta0).sin();
    let mut dw = p.unperturbed_field(w);
    dw[0] += -eps * (p.alpha / p.i1 * w[1] * s + p.delta1 * w[0]);
    dw[1] += eps * (p.alpha / p.i2 * w[0] * s + p.beta2 / p.i2 * s - p.delta2 * w[1]);
    dw[2] += eps * (p.beta3 / p.i3 * s - p.delta3 * w[2]);
    dw
}
