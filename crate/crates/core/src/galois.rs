//! Monodromy matrices around the equilibria on the complexified connection,
//! their commutator, and the nonintegrability certificate: a nonzero
//! Melnikov coefficient forces the monodromy pair not to commute, and the
//! monodromy group sits inside the differential Galois group whose identity
//! component must be commutative for meromorphic integrability.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::melnikov::MelnikovResult;
use crate::model::DecayData;

/// Absolute floor below which a coefficient is indistinguishable from
/// quadrature noise and cannot witness anything.
pub const DEFAULT_CERT_FLOOR: f64 = 1e-8;

/// The pair of monodromy matrices for harmonic `ell`, the connecting
/// matrix B0 = [[1, M_hat_ell], [0, 1]], and their commutator.
#[derive(Debug, Clone)]
pub struct MonodromyPair {
    pub ell: i32,
    pub lambda1_plus: f64,
    pub lambda1_minus: f64,
    pub nu: f64,
    pub m_hat: Complex64,
    pub m_minus: Matrix2<Complex64>,
    pub m_plus: Matrix2<Complex64>,
    pub b0: Matrix2<Complex64>,
    /// Max-abs entry of M+ M- - M- M+.
    pub commutator_norm: f64,
    /// The only nonzero commutator entry, (1 - b) M_hat (a - 1).
    pub closed_form_entry: Complex64,
    /// Relative difference between the direct-multiplication commutator and
    /// the closed-form entry; None when the multipliers overflow f64.
    pub cross_check: Option<f64>,
}

/// Build the monodromy pair: M- = diag(1, a) with a = e^{-2 pi ell nu / lambda1-},
/// M+ = B0^{-1} diag(1, b) B0 with b = e^{2 pi ell nu / lambda1+}.
pub fn monodromy_pair(
    decay: &DecayData,
    nu: f64,
    ell: i32,
    m_hat: Complex64,
) -> Result<MonodromyPair> {
    if ell == 0 {
        return Err(Error::InvalidHarmonic);
    }
    if !(decay.lambda1_plus > 0.0 && decay.lambda1_minus > 0.0 && nu > 0.0) {
        return Err(Error::InvalidParams(
            "decay rates and frequency must be positive".into(),
        ));
    }
    let tau = std::f64::consts::TAU;
    let a = (-tau * ell as f64 * nu / decay.lambda1_minus).exp();
    let b = (tau * ell as f64 * nu / decay.lambda1_plus).exp();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let ca = Complex64::new(a, 0.0);
    let cb = Complex64::new(b, 0.0);

    let m_minus = Matrix2::new(one, zero, zero, ca);
    let b0 = Matrix2::new(one, m_hat, zero, one);
    // B0^{-1} diag(1, b) B0 in closed form keeps the triangular structure
    let m_plus = Matrix2::new(one, (one - cb) * m_hat, zero, cb);

    let closed_form_entry = if m_hat == zero {
        zero
    } else {
        (one - cb) * m_hat * (ca - one)
    };

    let finite = b.is_finite() && (a * b).is_finite() && closed_form_entry.norm().is_finite();
    let (commutator_norm, cross_check) = if finite {
        let comm = m_plus * m_minus - m_minus * m_plus;
        let norm = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let direct = comm[(0, 1)];
        let scale = closed_form_entry.norm();
        let rel = if scale > 0.0 {
            (direct - closed_form_entry).norm() / scale
        } else {
            direct.norm()
        };
        (norm, Some(rel))
    } else {
        // multipliers beyond f64 range: the closed-form entry (possibly
        // infinite) is still the right magnitude; direct multiplication
        // would only produce inf - inf artifacts
        (closed_form_entry.norm(), None)
    };

    Ok(MonodromyPair {
        ell,
        lambda1_plus: decay.lambda1_plus,
        lambda1_minus: decay.lambda1_minus,
        nu,
        m_hat,
        m_minus,
        m_plus,
        b0,
        commutator_norm,
        closed_form_entry,
        cross_check,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CertifiedNonintegrable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub ell: i32,
    pub m_hat: (f64, f64),
    pub commutator_norm: f64,
    pub threshold: f64,
}

/// The certificate: verdict plus every witnessing harmonic. INCONCLUSIVE is
/// not a claim of integrability; the criterion is one-directional.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub c: Vec<f64>,
    pub neighborhood_note: String,
}

/// Certify from computed coefficients: a harmonic ell != 0 witnesses
/// nonintegrability when |M_hat_ell| clears max(floor, 10 x quadrature
/// error) and the monodromy pair fails to commute.
pub fn certify(
    mr: &MelnikovResult,
    decay: &DecayData,
    nu: f64,
    floor: f64,
) -> Result<Certificate> {
    let mut witnesses = Vec::new();
    for ell in -mr.order..=mr.order {
        if ell == 0 {
            continue;
        }
        let m_hat = mr.coeff(ell);
        let threshold = floor.max(10.0 * mr.quad_error(ell));
        if m_hat.norm() > threshold {
            let pair = monodromy_pair(decay, nu, ell, m_hat)?;
            if pair.commutator_norm > 0.0 {
                witnesses.push(Witness {
                    ell,
                    m_hat: (m_hat.re, m_hat.im),
                    commutator_norm: pair.commutator_norm,
                    threshold,
                });
            }
        }
    }
    let verdict = if witnesses.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::CertifiedNonintegrable
    };
    Ok(Certificate {
        verdict,
        witnesses,
        c: mr.c.clone(),
        neighborhood_note: format!(
            "extended phase space near the connection orbit at c = {:?} together with \
             the two equilibria, at eps = 0 and zero rotating coordinates",
            mr.c
        ),
    })
}
