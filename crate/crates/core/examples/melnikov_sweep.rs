//! Sweep the Melnikov function over theta and compare the numerical
//! pipeline with the closed form, for every connection branch.
//!
//! Run with: cargo run --release --example melnikov_sweep

use melnikov_cert::adjoint::compute_psi2;
use melnikov_cert::integrate::IntegratorConfig;
use melnikov_cert::melnikov::{find_simple_zeros, melnikov_function, DEFAULT_QUAD_TOL};
use melnikov_cert::rigidbody::{make_problem, Branch, RigidBodyParams};

fn main() -> melnikov_cert::Result<()> {
    let params = RigidBodyParams::default();
    let c = 1.0;
    let icfg = IntegratorConfig::default();

    for branch in Branch::ALL {
        let (sys, forcing, conn) = make_problem(&params, branch)?;
        let psi2 = compute_psi2(&sys, &conn, &[c], &icfg)?;
        let mr = melnikov_function(&conn, &forcing, &psi2, &[c], 8, DEFAULT_QUAD_TOL)?;
        // the shooting solution is unit-normalized at t = 0; rescale onto the
        // closed-form psi2 so values are comparable with the closed-form M
        let scale = params
            .closed_form_psi2(branch, 0.0, c)
            .dot(&psi2.eval(0.0));
        let mr = mr.rescaled(scale);

        println!("branch {}:", branch.name());
        println!("  theta        M_numeric      M_closed_form  |diff|");
        let mut worst: f64 = 0.0;
        for k in 0..8 {
            let theta = k as f64 * std::f64::consts::TAU / 8.0;
            let numeric = mr.series_eval(theta);
            let closed = params.closed_form_melnikov(branch, c, theta);
            worst = worst.max((numeric - closed).abs());
            println!("  {theta:<12.6} {numeric:+.8e} {closed:+.8e} {:.2e}",
                (numeric - closed).abs());
        }
        println!("  worst deviation: {worst:.3e}");
        for z in find_simple_zeros(&mr) {
            println!(
                "  zero at theta = {:.12} (M' = {:+.6e}, simple: {})",
                z.theta0, z.derivative, z.is_simple
            );
        }
    }
    Ok(())
}
