//! Run the structural assumption checks that back the certificate on the
//! forced rigid body: equilibria, saddle spectra, first-integral level sets,
//! decay of the connecting orbit, and Fourier reality/conjugacy of the
//! forcing. Checks that cannot be certified by sampling are listed as
//! "Declared".
//!
//! Run with: cargo run --release --example validate_assumptions

use melnikov_cert::model::{validate_assumptions, CheckStatus};
use melnikov_cert::rigidbody::{make_problem, Branch, RigidBodyParams};

fn main() -> melnikov_cert::Result<()> {
    let p = RigidBodyParams::default();
    for branch in Branch::ALL {
        let (sys, forcing, conn) = make_problem(&p, branch)?;
        let report = validate_assumptions(&sys, &conn, &forcing)?;
        println!("branch {}:", branch.name());
        for e in &report.entries {
            let status = match e.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Declared => "declared",
            };
            let residual = e
                .worst_residual
                .map(|r| format!(" (worst residual {r:.2e})"))
                .unwrap_or_default();
            println!("  {:<3} {status:<8} {}{residual}", e.id, e.detail);
        }
        assert!(report.all_checked_pass());
        println!();
    }
    Ok(())
}
