//! fracmap — command-line driver for the discrete fractional-energy library.
//!
//! Every subcommand reads an optional TOML config (with `--set` overrides),
//! runs one library routine, and writes a JSON report embedding the fully
//! resolved configuration, plus a CSV series where the result is a series.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 the optimizer
//! stalled (line search exhausted) before reaching tolerance.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::Config;
use fracmap::constructions::{capacity_cutoff, luckhaus_glue, GlueEnergyReport};
use fracmap::energy::{scalar_seminorm, DiagonalPolicy, EnergyParams, QuadraturePolicy};
use fracmap::geometry::{SpherePoint, TargetManifold};
use fracmap::homotopy::winding_field;
use fracmap::mesh::{build_mesh, Field, SphereMesh};
use fracmap::minimizer::{
    continuation, minimize, ContinuationConfig, ContinuationSchedule, MinimizeConfig,
    MinimizeStatus, StageRecord,
};
use fracmap::rescaling::{balance_ratio, kernel_bound_check, rescale_bound_check, BoundReport};
use fracmap::verify::{
    bubbling_experiment, check_gradient, check_superdifficult, noisy_winding, random_field,
    ExperimentConfig, Provenance, SuperdifficultReport,
};

#[derive(Parser)]
#[command(
    name = "fracmap",
    version,
    about = "Discrete fractional energies for sphere-valued maps: minimization, \
             continuation, and the constructions behind the estimates."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set optimizer.tol_grad=1e-6 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Directory to write reports into.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Rayon thread count (also FRACMAP_THREADS); default lets rayon decide.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Override experiment.seed from the command line.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Bit-reproducible summation; two runs of one config match byte for byte.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Minimize the energy at the relaxed order t from a constructed start.
    Minimize,
    /// Warm-started minimization down the t-schedule toward the base order.
    Continue,
    /// Kernel two-sided bounds and the rescaled-energy inequality.
    RescaleCheck,
    /// Ball-versus-complement energy balance around the south pole.
    BalanceCheck,
    /// Glue two circle fields across an annulus and report the energy split.
    GlueCheck,
    /// Compare the analytic gradient against central finite differences.
    GradCheck,
    /// Quadrature audit of the off-diagonal double-integral bound.
    Superdifficult,
    /// Full continuation experiment with concentration and balance tracking.
    Bubble,
    /// Seminorm decay of the truncated-log capacity profile across levels.
    CutoffDecay,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Minimize => "minimize",
            Cmd::Continue => "continue",
            Cmd::RescaleCheck => "rescale-check",
            Cmd::BalanceCheck => "balance-check",
            Cmd::GlueCheck => "glue-check",
            Cmd::GradCheck => "grad-check",
            Cmd::Superdifficult => "superdifficult",
            Cmd::Bubble => "bubble",
            Cmd::CutoffDecay => "cutoff-decay",
        }
    }
}

/// (exit code, message); code 2 = invalid input, 3 = stall.
type CmdError = (u8, String);
type CmdResult<T> = Result<T, CmdError>;

fn lib_err(e: fracmap::Error) -> CmdError {
    (2, e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CmdError {
    (2, format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    init_threads(cli)?;
    let mut cfg = config::load(cli.config.as_deref(), &cli.set).map_err(|m| (2, m))?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    fs::create_dir_all(&cli.out).map_err(|e| io_err(&cli.out, e))?;
    let ctx = Ctx {
        cfg: &cfg,
        out: &cli.out,
        command: cli.command,
        deterministic: cli.deterministic,
    };
    match cli.command {
        Cmd::Minimize => cmd_minimize(&ctx),
        Cmd::Continue => cmd_continue(&ctx),
        Cmd::RescaleCheck => cmd_rescale_check(&ctx),
        Cmd::BalanceCheck => cmd_balance_check(&ctx),
        Cmd::GlueCheck => cmd_glue_check(&ctx),
        Cmd::GradCheck => cmd_grad_check(&ctx),
        Cmd::Superdifficult => cmd_superdifficult(&ctx),
        Cmd::Bubble => cmd_bubble(&ctx),
        Cmd::CutoffDecay => cmd_cutoff_decay(&ctx),
    }
}

fn init_threads(cli: &Cli) -> Result<(), CmdError> {
    let requested = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("FRACMAP_THREADS") {
            Ok(raw) => Some(raw.parse::<usize>().map_err(|_| {
                (
                    2u8,
                    format!("FRACMAP_THREADS must be a positive integer, got '{raw}'"),
                )
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err((2, "thread count must be positive".into()));
        }
        // Ignore "already initialized": harmless on repeated setup.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

struct Ctx<'a> {
    cfg: &'a Config,
    out: &'a Path,
    command: Cmd,
    deterministic: bool,
}

impl Ctx<'_> {
    fn quad(&self) -> QuadraturePolicy {
        QuadraturePolicy {
            diagonal: DiagonalPolicy::Exclude,
            deterministic: self.deterministic,
        }
    }

    fn params_at(&self, t: f64) -> CmdResult<EnergyParams> {
        EnergyParams::with_quad(self.cfg.n, self.cfg.s, t, self.quad()).map_err(lib_err)
    }

    fn mesh(&self) -> CmdResult<Arc<SphereMesh>> {
        build_mesh(self.cfg.n, self.cfg.mesh.resolution).map_err(lib_err)
    }

    fn optimizer(&self) -> MinimizeConfig {
        self.cfg.optimizer.to_minimize_config()
    }

    fn schedule_values(&self) -> CmdResult<Vec<f64>> {
        match &self.cfg.schedule {
            Some(v) => Ok(v.clone()),
            None => ContinuationSchedule::default_for(self.cfg.s)
                .map(|sch| sch.t_values().to_vec())
                .map_err(lib_err),
        }
    }

    /// Degree-k start field: a (possibly noise-perturbed) winding map on the
    /// circle, the identity on the 2-sphere.
    fn start_field(&self, mesh: &Arc<SphereMesh>) -> CmdResult<Field> {
        let want = self.cfg.n + 1;
        if self.cfg.target.dim != want {
            return Err((
                2,
                format!(
                    "constructed start fields need target.dim = n + 1 = {want}, got {}",
                    self.cfg.target.dim
                ),
            ));
        }
        let e = &self.cfg.experiment;
        if self.cfg.n == 1 {
            noisy_winding(mesh, e.degree, e.noise, e.seed).map_err(lib_err)
        } else {
            let target = TargetManifold::sphere(want).map_err(lib_err)?;
            Field::from_fn(mesh.clone(), target, |_, x| x.to_vec()).map_err(lib_err)
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            reduction: if self.deterministic {
                "deterministic".to_string()
            } else {
                "parallel".to_string()
            },
        }
    }

    fn write_report<T: Serialize>(&self, result: &T) -> CmdResult<()> {
        let report = Report {
            command: self.command.name(),
            config: self.cfg,
            result,
            provenance: self.provenance(),
        };
        self.write_json(&report)
    }

    /// Writes an already-complete document (used by `bubble`, whose report
    /// schema is fixed by the library).
    fn write_json<T: Serialize>(&self, doc: &T) -> CmdResult<()> {
        let path = self.out.join(format!("{}.json", self.command.name()));
        let mut text = serde_json::to_string_pretty(doc)
            .map_err(|e| (2u8, format!("serialization failed: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_csv(&self, header: &str, rows: &[String]) -> CmdResult<()> {
        let path = self.out.join(format!("{}.csv", self.command.name()));
        let mut text = String::with_capacity(header.len() + 1 + rows.len() * 48);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a Config,
    result: &'a T,
    provenance: Provenance,
}

#[derive(Serialize)]
struct MinimizeSummary {
    initial_energy: f64,
    final_energy: f64,
    initial_residual: f64,
    final_residual: f64,
    iterations: usize,
    status: MinimizeStatus,
}

fn cmd_minimize(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    let u0 = ctx.start_field(&mesh)?;
    let params = ctx.params_at(ctx.cfg.t)?;
    let res = minimize(&u0, &params, &ctx.optimizer()).map_err(lib_err)?;

    let rows: Vec<String> = res
        .energies
        .iter()
        .zip(&res.residuals)
        .enumerate()
        .map(|(i, (e, r))| format!("{i},{e:.17e},{r:.17e}"))
        .collect();
    ctx.write_csv("iteration,energy,residual", &rows)?;
    ctx.write_report(&MinimizeSummary {
        initial_energy: res.initial_energy(),
        final_energy: res.final_energy(),
        initial_residual: res.initial_residual(),
        final_residual: res.final_residual(),
        iterations: res.iterations,
        status: res.status,
    })?;
    if res.status == MinimizeStatus::Stalled {
        return Err((3, "minimization stalled before reaching tolerance".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ContinueSummary {
    schedule: Vec<f64>,
    stages: Vec<StageRecord>,
}

fn cmd_continue(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    let u0 = ctx.start_field(&mesh)?;
    let schedule =
        ContinuationSchedule::new(ctx.cfg.s, ctx.schedule_values()?).map_err(lib_err)?;
    let base = ctx.params_at(ctx.cfg.s)?;
    let ccfg = ContinuationConfig {
        minimize: ctx.optimizer(),
        conc_eps: ctx.cfg.experiment.eps,
        conc_rho: ctx.cfg.experiment.rho,
    };
    let rep = continuation(&u0, &schedule, &base, &ccfg).map_err(lib_err)?;

    let rows: Vec<String> = rep
        .stages
        .iter()
        .map(|st| {
            format!(
                "{},{:.17e},{:.17e},{:.17e},{},{}",
                st.t,
                st.energy_t,
                st.energy_s,
                st.residual,
                st.iterations,
                st.degree.map_or(String::new(), |d| d.to_string())
            )
        })
        .collect();
    ctx.write_csv("t,energy_t,energy_s,residual,iterations,degree", &rows)?;
    let stalled = rep
        .stages
        .iter()
        .any(|st| st.status == MinimizeStatus::Stalled);
    ctx.write_report(&ContinueSummary {
        schedule: schedule.t_values().to_vec(),
        stages: rep.stages,
    })?;
    if stalled {
        return Err((3, "a continuation stage stalled before tolerance".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct RescaleSummary {
    lambda: f64,
    samples: usize,
    kernel_max_violation: f64,
    bound: BoundReport,
}

fn cmd_rescale_check(ctx: &Ctx) -> Result<(), CmdError> {
    let e = &ctx.cfg.experiment;
    let params = ctx.params_at(ctx.cfg.t)?;
    let violation =
        kernel_bound_check(e.lambda, &params, e.samples, e.seed).map_err(lib_err)?;
    let mesh = ctx.mesh()?;
    let u = ctx.start_field(&mesh)?;
    let bound = rescale_bound_check(&u, e.lambda, &params).map_err(lib_err)?;
    ctx.write_report(&RescaleSummary {
        lambda: e.lambda,
        samples: e.samples,
        kernel_max_violation: violation,
        bound,
    })
}

fn cmd_balance_check(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    let u = ctx.start_field(&mesh)?;
    let params = ctx.params_at(ctx.cfg.t)?;
    let y0 = SpherePoint::south(ctx.cfg.n);
    let report = balance_ratio(&u, &y0, ctx.cfg.experiment.rho, &params).map_err(lib_err)?;
    ctx.write_report(&report)
}

#[derive(Serialize)]
struct GlueSummary {
    degree: i64,
    rotation: f64,
    report: GlueEnergyReport,
}

fn cmd_glue_check(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    let e = &ctx.cfg.experiment;
    let u = winding_field(&mesh, e.degree).map_err(lib_err)?;
    let k = e.degree as f64;
    let rot = e.angle;
    let target = TargetManifold::sphere(2).map_err(lib_err)?;
    let mesh_for_v = mesh.clone();
    let v = Field::from_fn(mesh.clone(), target, |i, _| {
        let phi = k * mesh_for_v.angle(i) + rot;
        vec![phi.sin(), -phi.cos()]
    })
    .map_err(lib_err)?;
    let params = ctx.params_at(ctx.cfg.s)?;
    let center = SpherePoint::south(1);
    let (_, report) =
        luckhaus_glue(&u, &v, &center, e.r, e.delta, &params).map_err(lib_err)?;
    ctx.write_report(&GlueSummary {
        degree: e.degree,
        rotation: rot,
        report,
    })
}

#[derive(Serialize)]
struct GradSummary {
    h: f64,
    seed: u64,
    max_rel_error: f64,
}

fn cmd_grad_check(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    let e = &ctx.cfg.experiment;
    let target = TargetManifold::sphere(ctx.cfg.target.dim).map_err(lib_err)?;
    let u = random_field(&mesh, target, e.seed).map_err(lib_err)?;
    let params = ctx.params_at(ctx.cfg.t)?;
    let max_rel_error = check_gradient(&u, &params, e.h).map_err(lib_err)?;
    ctx.write_report(&GradSummary {
        h: e.h,
        seed: e.seed,
        max_rel_error,
    })
}

fn point_at_angle(n: usize, a: f64) -> CmdResult<SpherePoint> {
    match n {
        1 => Ok(SpherePoint::circle(a)),
        2 => SpherePoint::new(vec![a.sin(), 0.0, -a.cos()]).map_err(lib_err),
        _ => Err((2, format!("domain dimension n must be 1 or 2, got {n}"))),
    }
}

fn cmd_superdifficult(ctx: &Ctx) -> Result<(), CmdError> {
    let e = &ctx.cfg.experiment;
    let theta = point_at_angle(ctx.cfg.n, 0.0)?;
    let omega = point_at_angle(ctx.cfg.n, e.angle)?;
    let report: SuperdifficultReport =
        check_superdifficult(e.alpha, e.inner, &theta, &omega, e.r, e.grid).map_err(lib_err)?;
    ctx.write_report(&report)
}

fn cmd_bubble(ctx: &Ctx) -> Result<(), CmdError> {
    let c = ctx.cfg;
    let ecfg = ExperimentConfig {
        degree: c.experiment.degree,
        s: c.s,
        schedule: ctx.schedule_values()?,
        resolution: c.mesh.resolution,
        eps: c.experiment.eps,
        rho: c.experiment.rho,
        noise: c.experiment.noise,
        seed: c.experiment.seed,
        optimizer: ctx.optimizer(),
        deterministic: ctx.deterministic,
    };
    let report = bubbling_experiment(&ecfg).map_err(lib_err)?;
    let rows: Vec<String> = report
        .stages
        .iter()
        .map(|st| {
            format!(
                "{},{:.17e},{:.17e},{:.17e},{}",
                st.t,
                st.energy_t,
                st.energy_s,
                st.residual,
                st.degree.map_or(String::new(), |d| d.to_string())
            )
        })
        .collect();
    ctx.write_csv("t,energy_t,energy_s,residual,degree", &rows)?;
    ctx.write_json(&report)
}

#[derive(Serialize)]
struct CutoffLevel {
    ell: u32,
    seminorm: f64,
}

#[derive(Serialize)]
struct CutoffSummary {
    levels: Vec<CutoffLevel>,
}

fn cmd_cutoff_decay(ctx: &Ctx) -> Result<(), CmdError> {
    let mesh = ctx.mesh()?;
    // The capacity statement lives at the critical order t = s.
    let params = ctx.params_at(ctx.cfg.s)?;
    let center = SpherePoint::south(ctx.cfg.n);
    let mut levels = Vec::new();
    for ell in 1..=ctx.cfg.experiment.levels {
        let zeta = capacity_cutoff(&mesh, ell, &center).map_err(lib_err)?;
        let seminorm = scalar_seminorm(&zeta, &params).map_err(lib_err)?;
        levels.push(CutoffLevel { ell, seminorm });
    }
    let rows: Vec<String> = levels
        .iter()
        .map(|l| format!("{},{:.17e}", l.ell, l.seminorm))
        .collect();
    ctx.write_csv("ell,seminorm", &rows)?;
    ctx.write_report(&CutoffSummary { levels })
}
