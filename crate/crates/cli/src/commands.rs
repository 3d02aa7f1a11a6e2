//! Argument parsing and the five subcommands.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rapidstab::{
    decay_bound_with, dominant_period, fit_decay_rate, integrate, lyapunov_profile,
    spectral_abscissa, sweep_t, synthesize, GramianVariant, LtiSystem, QuadratureConfig,
};

use crate::demo::demo_system;
use crate::error::{CliError, Result};
use crate::system_file::{read_system_file, write_system};
use crate::table::{emit, fmt_f64, Table};
use crate::verify::{run_verify, DOMINANCE_SLACK};

pub const QUAD_NODES_ENV: &str = "RAPIDSTAB_QUAD_NODES";

#[derive(Debug, Parser)]
#[command(
    name = "rapidstab",
    version,
    about = "Weighted-Gramian rapid-stabilization feedback for x' = Ax + Bu"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Λ, the gain F = −BᵀΛ⁻¹ and the closed loop A + BF.
    Synth(SynthArgs),
    /// Integrate the closed loop from x0 with fixed-step RK4.
    Simulate(SimulateArgs),
    /// Standard synthesis and decay-bound exponent for several plateau ends T.
    Sweep(SweepArgs),
    /// Run the certificate suite; exit status 0 iff every check passes.
    Verify(VerifyArgs),
    /// Write a built-in system as a JSON document.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// JSON system document.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "demo",
        required_unless_present = "demo"
    )]
    pub system: Option<PathBuf>,
    /// Built-in system: oscillator, scalar, string(n[,width]), skew(n[,seed]).
    #[arg(long, value_name = "NAME")]
    pub demo: Option<String>,
    /// Seed for skew(n) when the name carries none.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SystemArgs {
    pub fn load(&self) -> Result<LtiSystem> {
        match (&self.system, &self.demo) {
            (Some(path), _) => read_system_file(path),
            (None, Some(name)) => demo_system(name, self.seed),
            (None, None) => Err(CliError::Usage(
                "one of --system or --demo is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    /// Observation time T₀.
    #[arg(long = "T0", default_value_t = PI)]
    pub t0: f64,
    /// Gauss–Legendre nodes per quadrature panel.
    #[arg(long = "quad-nodes", env = QUAD_NODES_ENV)]
    pub quad_nodes: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    pub fn quadrature(&self) -> QuadratureConfig {
        match self.quad_nodes {
            Some(k) => QuadratureConfig::with_nodes(k),
            None => QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// End of the plateau for the standard weight (default T₀).
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(
        long,
        default_value = "standard",
        value_name = "standard|truncated|infinite"
    )]
    pub variant: GramianVariant,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Initial state as a comma-separated list (default all ones).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long = "t-final", default_value_t = 20.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated plateau ends (default T₀, T₀+1, …, T₀+8).
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "T")]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long = "demo", value_name = "NAME")]
    pub name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => {
            let text = synth_csv(&args)?;
            emit(&text, args.common.out.as_deref())
        }
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Verify(args) => verify(&args),
        Command::Demo(args) => {
            let sys = demo_system(&args.name, args.seed)?;
            emit(&write_system(&sys), args.out.as_deref())
        }
    }
}

fn push_matrix(table: &mut Table, name: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            table.push(vec![
                name.into(),
                i.to_string(),
                j.to_string(),
                fmt_f64(m[(i, j)]),
            ]);
        }
    }
}

fn push_scalar(table: &mut Table, name: &str, x: f64) {
    table.push(vec![name.into(), "0".into(), "0".into(), fmt_f64(x)]);
}

/// Long-form `quantity,row,col,value` table of a synthesis.
pub fn synth_csv(args: &SynthArgs) -> Result<String> {
    let sys = args.system.load()?;
    let quad = args.common.quadrature();
    let (omega, t0) = (args.common.omega, args.common.t0);
    let t = args.t.unwrap_or(t0);
    let s = synthesize(&sys, omega, t0, t, args.variant, &quad)?;

    let mut table = Table::new(["quantity", "row", "col", "value"]);
    push_matrix(&mut table, "gain", s.law.gain());
    push_matrix(&mut table, "closed_loop", s.law.closed_loop());
    push_matrix(&mut table, "lambda", s.gramian.lambda());
    if let Ok(lp) = s.gramian.lambda_prime() {
        push_matrix(&mut table, "lambda_prime", lp);
    }
    push_scalar(
        &mut table,
        "spectral_abscissa",
        spectral_abscissa(s.law.closed_loop())?,
    );
    push_scalar(
        &mut table,
        "condition_of_lambda",
        s.gramian.condition_number(),
    );
    if args.variant == GramianVariant::Standard {
        let bound = decay_bound_with(&sys, omega, t0, t, &s.gramian, &quad)?;
        push_scalar(&mut table, "bound_exponent", bound.exponent);
        push_scalar(&mut table, "bound_c_prime", bound.c_prime);
    }
    Ok(table.to_csv())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let synth = &args.synth;
    let sys = synth.system.load()?;
    let quad = synth.common.quadrature();
    let (omega, t0) = (synth.common.omega, synth.common.t0);
    let t = synth.t.unwrap_or(t0);
    let s = synthesize(&sys, omega, t0, t, synth.variant, &quad)?;

    let n = sys.n();
    let x0 = match &args.x0 {
        Some(v) if v.len() != n => {
            return Err(CliError::Dimension(format!(
                "--x0 has {} entries, system has n = {n}",
                v.len()
            )))
        }
        Some(v) if v.iter().any(|x| !x.is_finite()) => {
            return Err(CliError::NonFinite("--x0".into()))
        }
        Some(v) => DVector::from_column_slice(v),
        None => DVector::from_element(n, 1.0),
    };
    let traj = integrate(s.law.closed_loop(), &x0, args.t_final, args.dt)?;
    let profile = lyapunov_profile(&traj, &s.gramian, omega)?;

    let mut header = vec!["t".to_string(), "norm".into(), "lyapunov".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    let mut table = Table::new(header);
    for (k, (time, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![
            fmt_f64(*time),
            fmt_f64(x.norm()),
            fmt_f64(profile.values[k]),
        ];
        row.extend(x.iter().map(|v| fmt_f64(*v)));
        table.push(row);
    }
    emit(&table.to_csv(), synth.common.out.as_deref())?;

    if traj.diverged {
        return Err(CliError::CheckFailed(format!(
            "trajectory diverged before t = {}",
            args.t_final
        )));
    }
    let abscissa = spectral_abscissa(s.law.closed_loop())?;
    let period = dominant_period(s.law.closed_loop())?;
    match fit_decay_rate(&traj, 0.2, period) {
        Ok(rate) => eprintln!(
            "spectral_abscissa {} fitted_rate {}",
            fmt_f64(abscissa),
            fmt_f64(rate)
        ),
        Err(_) => eprintln!("spectral_abscissa {}", fmt_f64(abscissa)),
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let sys = args.system.load()?;
    let quad = args.common.quadrature();
    let (omega, t0) = (args.common.omega, args.common.t0);
    let ts: Vec<f64> = match &args.t {
        Some(v) if v.is_empty() => return Err(CliError::Usage("--T list is empty".into())),
        Some(v) => v.clone(),
        None => (0..=8).map(|k| t0 + k as f64).collect(),
    };
    let rows = sweep_t(&sys, omega, t0, &ts, &quad)?;

    let mut table = Table::new([
        "t",
        "spectral_abscissa",
        "bound_exponent",
        "condition_of_lambda",
        "dominated",
    ]);
    let mut violations = Vec::new();
    for r in &rows {
        let dominated = r.spectral_abscissa <= r.bound_exponent + DOMINANCE_SLACK;
        if !dominated {
            violations.push(fmt_f64(r.t));
        }
        table.push(vec![
            fmt_f64(r.t),
            fmt_f64(r.spectral_abscissa),
            fmt_f64(r.bound_exponent),
            fmt_f64(r.condition_of_lambda),
            dominated.to_string(),
        ]);
    }
    emit(&table.to_csv(), args.common.out.as_deref())?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "spectral abscissa above the bound exponent at T = {}",
            violations.join(", ")
        )))
    }
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let sys = args.system.load()?;
    let quad = args.common.quadrature();
    let (omega, t0) = (args.common.omega, args.common.t0);
    let report = run_verify(&sys, omega, t0, args.t.unwrap_or(t0), &quad);
    emit(&report.to_table().to_csv(), args.common.out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(report.failures().join(", ")))
    }
}
