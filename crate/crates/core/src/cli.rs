//! Command-line front end: configuration, pipeline orchestration, and
//! deterministic report / CSV emission.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::adjoint::{compute_psi2, AdjointBoundedSolution};
use crate::autonomize::{
    build_extended, variable_change_residual, verify_circular_solution, verify_complex_rotation,
    Variant,
};
use crate::error::{Error, Result};
use crate::galois::{certify, monodromy_pair, Certificate, DEFAULT_CERT_FLOOR};
use crate::integrate::{integrate, IntegratorConfig};
use crate::melnikov::{find_simple_zeros, melnikov_function, MelnikovResult, SimpleZero};
use crate::model::{
    validate_assumptions, DecayData, FourierForcing, HeteroclinicConnection, SystemModel,
    ValidationReport,
};
use crate::rigidbody::{make_problem, perturbed_field, Branch, RigidBodyParams};

#[derive(Debug, Parser)]
#[command(
    name = "melnikov-cert",
    version,
    about = "Certify nonintegrability of periodically perturbed systems via Melnikov coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// First-integral level(s); repeatable, overrides the config.
    #[arg(long = "c", global = true)]
    pub c: Vec<f64>,

    /// Connection branch (plus|minus|tilde_plus|tilde_minus).
    #[arg(long, global = true)]
    pub branch: Option<String>,

    /// Perturbation strength for simulation / autonomization checks.
    #[arg(long, global = true)]
    pub eps: Option<f64>,

    /// End time for simulation / autonomization checks.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and emit the nonintegrability certificate.
    Certify,
    /// Emit the Melnikov function on a theta grid, with the closed form.
    Melnikov,
    /// Emit the Melnikov Fourier coefficients.
    Coeffs,
    /// Emit the monodromy pairs and commutators per harmonic.
    Monodromy,
    /// Integrate the perturbed system; time series or Poincare section.
    Simulate {
        /// Emit stroboscopic samples at t = k 2 pi / nu instead of a series.
        #[arg(long)]
        poincare: bool,
    },
    /// Build the extended autonomous systems and verify their identities.
    AutonomizeCheck,
    /// Check the structural assumptions numerically.
    Validate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemConfig {
    pub name: String,
    pub branch: String,
    pub c_values: Vec<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            name: "rigid_body".into(),
            branch: "plus".into(),
            c_values: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub quad_tol: f64,
    pub cert_floor: f64,
    pub theta_samples: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            quad_tol: crate::melnikov::DEFAULT_QUAD_TOL,
            cert_floor: DEFAULT_CERT_FLOOR,
            theta_samples: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub x0: Option<Vec<f64>>,
    pub eps: f64,
    pub theta0: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            x0: None,
            eps: 0.0,
            theta0: 0.0,
            t_end: 20.0,
            samples: 400,
        }
    }
}

/// Full run configuration; every section has defaults so an empty file (or
/// none at all) is valid.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub params: RigidBodyParams,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
    pub simulate: SimulateConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Apply command-line overrides on top of the file values.
    pub fn apply_cli(&mut self, cli: &Cli) {
        if !cli.c.is_empty() {
            self.problem.c_values = cli.c.clone();
        }
        if let Some(b) = &cli.branch {
            self.problem.branch = b.clone();
        }
        if let Some(eps) = cli.eps {
            self.simulate.eps = eps;
        }
        if let Some(t_end) = cli.t_end {
            self.simulate.t_end = t_end;
        }
        if let Some(out) = &cli.out {
            self.output.dir = Some(out.display().to_string());
        }
        if let Some(fmt) = cli.format {
            self.output.format = Some(
                match fmt {
                    Format::Csv => "csv",
                    Format::Report => "report",
                }
                .into(),
            );
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            abs_tol: self.tolerances.abs_tol,
            rel_tol: self.tolerances.rel_tol,
            ..Default::default()
        }
    }
}

/// A fully assembled problem instance.
pub struct Problem {
    pub params: RigidBodyParams,
    pub branch: Branch,
    pub sys: SystemModel,
    pub forcing: FourierForcing,
    pub conn: HeteroclinicConnection,
}

/// Resolve the configured problem from the built-in registry.
pub fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    if cfg.problem.name != "rigid_body" {
        return Err(Error::Config(format!(
            "unknown problem '{}' (registered: rigid_body)",
            cfg.problem.name
        )));
    }
    let branch = Branch::parse(&cfg.problem.branch)?;
    let params = cfg.params;
    let (sys, forcing, conn) = make_problem(&params, branch)?;
    if cfg.problem.c_values.is_empty() {
        return Err(Error::Config("c_values must be nonempty".into()));
    }
    for &c in &cfg.problem.c_values {
        if !conn.contains(&[c]) {
            return Err(Error::Config(format!(
                "c = {c} outside declared parameter domain {:?}",
                conn.param_domain
            )));
        }
    }
    Ok(Problem {
        params,
        branch,
        sys,
        forcing,
        conn,
    })
}

/// Scale factor mapping the unit-normalized numerical psi2 onto the
/// problem's closed-form psi2 at t = 0.
pub fn oracle_scale(p: &Problem, c: f64, psi2: &AdjointBoundedSolution) -> f64 {
    let cf = p.params.closed_form_psi2(p.branch, 0.0, c);
    cf.dot(&psi2.eval(0.0))
}

/// One certified first-integral level.
#[derive(Debug, Serialize)]
pub struct CSection {
    pub c: f64,
    pub decay: DecayData,
    pub match_angle: f64,
    pub max_ave_residual: f64,
    pub melnikov: MelnikovResult,
    pub zeros: Vec<SimpleZero>,
    pub certificate: Certificate,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub validation: ValidationReport,
    pub sections: Vec<CSection>,
}

fn sorted_c(cfg: &RunConfig) -> Vec<f64> {
    let mut cs = cfg.problem.c_values.clone();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cs.dedup();
    cs
}

/// The shared pipeline: decay -> psi2 -> Melnikov coefficients per c.
pub fn run_pipeline(
    p: &Problem,
    cfg: &RunConfig,
    c: f64,
) -> Result<(AdjointBoundedSolution, MelnikovResult)> {
    let icfg = cfg.integrator();
    let psi2 = compute_psi2(&p.sys, &p.conn, &[c], &icfg)?;
    let grid = cfg
        .tolerances
        .theta_samples
        .max((4 * p.forcing.order() + 1) as usize);
    let mr = melnikov_function(
        &p.conn,
        &p.forcing,
        &psi2,
        &[c],
        grid,
        cfg.tolerances.quad_tol,
    )?;
    Ok((psi2, mr))
}

/// certify: validate, run the pipeline for every c, certify each level.
pub fn cmd_certify(cfg: &RunConfig) -> Result<Report> {
    let p = build_problem(cfg)?;
    let validation = validate_assumptions(&p.sys, &p.conn, &p.forcing)?;
    let mut sections = Vec::new();
    for c in sorted_c(cfg) {
        let (psi2, mr) = run_pipeline(&p, cfg, c)?;
        let zeros = find_simple_zeros(&mr);
        let certificate = certify(&mr, &psi2.decay, p.forcing.nu(), cfg.tolerances.cert_floor)?;
        sections.push(CSection {
            c,
            decay: psi2.decay.clone(),
            match_angle: psi2.residual_report.match_angle,
            max_ave_residual: psi2.residual_report.max_ave_residual,
            melnikov: mr,
            zeros,
            certificate,
        });
    }
    Ok(Report {
        tool: "melnikov-cert".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        validation,
        sections,
    })
}

/// 17-significant-digit float formatting for CSV round-trip fidelity.
fn ff(v: f64) -> String {
    format!("{v:.16e}")
}

/// melnikov: CSV of the numeric and closed-form Melnikov values per theta.
pub fn cmd_melnikov(cfg: &RunConfig) -> Result<String> {
    let p = build_problem(cfg)?;
    let mut out = String::from("c,theta,M_numeric,M_closed_form,abs_error\n");
    for c in sorted_c(cfg) {
        let (psi2, mr) = run_pipeline(&p, cfg, c)?;
        let mr = mr.rescaled(oracle_scale(&p, c, &psi2));
        for &(theta, v) in &mr.theta_grid {
            let cf = p.params.closed_form_melnikov(p.branch, c, theta);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                ff(c),
                ff(theta),
                ff(v),
                ff(cf),
                ff((v - cf).abs())
            ));
        }
    }
    Ok(out)
}

/// coeffs: CSV of the Fourier coefficients with their closed forms.
pub fn cmd_coeffs(cfg: &RunConfig) -> Result<String> {
    let p = build_problem(cfg)?;
    let mut out =
        String::from("c,j,re,im,quad_error,closed_form_re,closed_form_im\n");
    for c in sorted_c(cfg) {
        let (psi2, mr) = run_pipeline(&p, cfg, c)?;
        let mr = mr.rescaled(oracle_scale(&p, c, &psi2));
        for j in -mr.order..=mr.order {
            let v = mr.coeff(j);
            let cf = p.params.closed_form_coeff(p.branch, c, j);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                ff(c),
                j,
                ff(v.re),
                ff(v.im),
                ff(mr.quad_error(j)),
                ff(cf.re),
                ff(cf.im)
            ));
        }
    }
    Ok(out)
}

/// monodromy: CSV of the monodromy commutators per harmonic and level.
pub fn cmd_monodromy(cfg: &RunConfig) -> Result<String> {
    let p = build_problem(cfg)?;
    let mut out = String::from(
        "c,ell,m_hat_re,m_hat_im,lambda1_plus,lambda1_minus,commutator_norm,threshold\n",
    );
    for c in sorted_c(cfg) {
        let (psi2, mr) = run_pipeline(&p, cfg, c)?;
        for ell in -mr.order..=mr.order {
            if ell == 0 {
                continue;
            }
            let m_hat = mr.coeff(ell);
            let pair = monodromy_pair(&psi2.decay, p.forcing.nu(), ell, m_hat)?;
            let threshold = cfg
                .tolerances
                .cert_floor
                .max(10.0 * mr.quad_error(ell));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                ff(c),
                ell,
                ff(m_hat.re),
                ff(m_hat.im),
                ff(pair.lambda1_plus),
                ff(pair.lambda1_minus),
                ff(pair.commutator_norm),
                ff(threshold)
            ));
        }
    }
    Ok(out)
}

/// simulate: CSV time series (with conserved-quantity columns at eps = 0)
/// or stroboscopic Poincare rows at t = k 2 pi / nu.
pub fn cmd_simulate(cfg: &RunConfig, poincare: bool) -> Result<String> {
    let p = build_problem(cfg)?;
    let sim = &cfg.simulate;
    if !(sim.eps >= 0.0) {
        return Err(Error::Config("eps must be nonnegative".into()));
    }
    let c = sorted_c(cfg)[0];
    let x0 = match &sim.x0 {
        Some(v) if v.len() == p.sys.dim() => DVector::from_vec(v.clone()),
        Some(v) => {
            return Err(Error::Config(format!(
                "x0 has {} components, state dimension is {}",
                v.len(),
                p.sys.dim()
            )))
        }
        None => p.conn.orbit(0.0, &[c]),
    };
    let params = p.params;
    let (eps, theta0) = (sim.eps, sim.theta0);
    let traj = integrate(
        |t, w| perturbed_field(&params, eps, t, theta0, w),
        &x0,
        (0.0, sim.t_end),
        &cfg.integrator(),
    )?;
    let mut out = String::new();
    if poincare {
        out.push_str("sample_index,w1,w2,w3\n");
        let period = std::f64::consts::TAU / params.nu;
        let count = (sim.t_end / period).floor() as usize;
        for k in 0..=count {
            let w = traj.eval(k as f64 * period);
            out.push_str(&format!("{k},{},{},{}\n", ff(w[0]), ff(w[1]), ff(w[2])));
        }
    } else {
        let conserved = eps == 0.0;
        out.push_str(if conserved {
            "t,w1,w2,w3,F1,F2\n"
        } else {
            "t,w1,w2,w3\n"
        });
        for i in 0..=sim.samples {
            let t = sim.t_end * i as f64 / sim.samples as f64;
            let w = traj.eval(t);
            if conserved {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    ff(t),
                    ff(w[0]),
                    ff(w[1]),
                    ff(w[2]),
                    ff(params.energy(&w)),
                    ff(params.momentum_sq(&w))
                ));
            } else {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    ff(t),
                    ff(w[0]),
                    ff(w[1]),
                    ff(w[2])
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct AutonomizeReport {
    pub real_description: String,
    pub complex_description: String,
    pub max_uv_deviation: f64,
    pub max_x_deviation: f64,
    pub variable_change_residual: f64,
    pub complex_rotation_deviation: f64,
    pub eps: f64,
    pub t_end: f64,
}

/// autonomize-check: build both extended variants and report the residuals
/// of their structural identities.
pub fn cmd_autonomize_check(cfg: &RunConfig) -> Result<AutonomizeReport> {
    let p = build_problem(cfg)?;
    let real = build_extended(&p.sys, &p.forcing, Variant::RealRsys)?;
    let complex = build_extended(&p.sys, &p.forcing, Variant::ComplexCsys)?;
    let c = sorted_c(cfg)[0];
    let x0 = p.conn.orbit(0.0, &[c]);
    let eps = cfg.simulate.eps.max(0.01);
    let t_end = cfg.simulate.t_end;
    let circ = verify_circular_solution(
        &real,
        &p.sys,
        &p.forcing,
        &x0,
        eps,
        (0.0, t_end),
        &cfg.integrator(),
    )?;
    let mut vc_residual: f64 = 0.0;
    for s in 0..5 {
        let sf = s as f64;
        let mut z = real.circular_state(&x0, eps, 0.3 * sf);
        z[0] += 0.05 * sf;
        vc_residual = vc_residual.max(variable_change_residual(&real, &complex, &z));
    }
    let rot = verify_complex_rotation(&complex, eps, t_end, &cfg.integrator())?;
    Ok(AutonomizeReport {
        real_description: real.describe(),
        complex_description: complex.describe(),
        max_uv_deviation: circ.max_uv_deviation,
        max_x_deviation: circ.max_x_deviation,
        variable_change_residual: vc_residual,
        complex_rotation_deviation: rot,
        eps,
        t_end,
    })
}

/// validate: the assumption checks alone.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let p = build_problem(cfg)?;
    validate_assumptions(&p.sys, &p.conn, &p.forcing)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::EvaluationFailure(format!("serialization: {e}")))
}

/// Write to `<dir>/<name>` when an output directory is configured, else to
/// stdout.
fn emit(cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    match &cfg.output.dir {
        Some(dir) => {
            let dir = Path::new(dir);
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
            Ok(())
        }
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

/// Top-level dispatch used by the binary.
pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_cli(cli);
    match &cli.command {
        Command::Certify => {
            let report = cmd_certify(&cfg)?;
            for s in &report.sections {
                eprintln!(
                    "c = {}: {:?} ({} witness(es))",
                    s.c,
                    s.certificate.verdict,
                    s.certificate.witnesses.len()
                );
            }
            emit(&cfg, "certify.json", &to_json(&report)?)
        }
        Command::Melnikov => emit(&cfg, "melnikov.csv", &cmd_melnikov(&cfg)?),
        Command::Coeffs => emit(&cfg, "coeffs.csv", &cmd_coeffs(&cfg)?),
        Command::Monodromy => emit(&cfg, "monodromy.csv", &cmd_monodromy(&cfg)?),
        Command::Simulate { poincare } => {
            emit(&cfg, "simulate.csv", &cmd_simulate(&cfg, *poincare)?)
        }
        Command::AutonomizeCheck => {
            emit(&cfg, "autonomize.json", &to_json(&cmd_autonomize_check(&cfg)?)?)
        }
        Command::Validate => emit(&cfg, "validate.json", &to_json(&cmd_validate(&cfg)?)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = RunConfig::default();
        assert!(build_problem(&cfg).is_ok());
    }

    #[test]
    fn empty_toml_parses_to_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.problem.name, "rigid_body");
        assert_eq!(cfg.problem.c_values, vec![1.0]);
        assert_eq!(cfg.tolerances.theta_samples, 64);
    }

    #[test]
    fn rejects_unknown_problem_and_bad_c() {
        let mut cfg = RunConfig::default();
        cfg.problem.name = "pendulum".into();
        assert!(matches!(build_problem(&cfg), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.problem.c_values = vec![100.0];
        assert!(matches!(build_problem(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn config_file_roundtrip() {
        let text = r#"
            [problem]
            branch = "minus"
            c_values = [0.5, 2.0]

            [params]
            delta3 = 0.1

            [tolerances]
            quad_tol = 1e-9
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.problem.branch, "minus");
        assert_eq!(cfg.params.delta3, 0.1);
        assert_eq!(cfg.params.i3, 3.0);
        assert_eq!(cfg.tolerances.quad_tol, 1e-9);
    }
}
