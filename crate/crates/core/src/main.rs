//! Command-line front end: simulation, radius estimation, sigma sweeps,
//! symbol-inequality fuzzing, continuation schedules and the multilinear
//! probe, with CSV/JSON artifacts written to an output directory.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use gkdvlab::bourgain::SpaceTimeField;
use gkdvlab::config::ExperimentConfig;
use gkdvlab::conservation::{sigma_sweep, SweepResult};
use gkdvlab::error::Error;
use gkdvlab::gevrey::{estimate_radius, gevrey_norm, GevreyParams};
use gkdvlab::report::{float17, write_csv, write_json};
use gkdvlab::schedule::{
    local_timestep, make_plan, make_plan_general_s, verify_induction, SchedulePlan,
};
use gkdvlab::solver::{conservation_report, evolve, SolverConfig};
use gkdvlab::symbol::{run_fuzz, FuzzRanges, DEFAULT_SEED};
use gkdvlab::{checkpoint, Result};

#[derive(Parser)]
#[command(name = "gkdvlab", about = "quartic gKdV analyticity laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured datum and emit a trajectory CSV plus checkpoints.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate the Fourier-decay rate of the datum or of a checkpoint.
    Radius {
        #[arg(long)]
        config: PathBuf,
        /// Analyze this checkpoint instead of the configured datum.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Dyadic sigma sweep of the energy increment against the
    /// sigma^{1/2} A^5 envelope.
    SweepSigma {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Randomized verification of the exponential symbol inequality.
    FuzzSymbol {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build the continuation plan; optionally run the full trajectory and
    /// check the per-step induction inequalities.
    Schedule {
        #[arg(long)]
        config: PathBuf,
        /// Run the trajectory and verify the induction inequalities.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Empirical ratio of the product norm to the factor norms.
    ProbeMultilinear {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Radius {
            config,
            checkpoint,
            out,
        } => cmd_radius(&config, checkpoint.as_deref(), &out),
        Command::SweepSigma { config, out } => cmd_sweep_sigma(&config, &out),
        Command::FuzzSymbol { samples, seed, out } => cmd_fuzz_symbol(samples, seed, &out),
        Command::Schedule {
            config,
            verify,
            out,
        } => cmd_schedule(&config, verify, &out),
        Command::ProbeMultilinear { config, out } => cmd_probe(&config, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SolverAbort { .. } | Error::NonFinite(_) => 3,
        _ => 2,
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn cmd_simulate(config_path: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    ensure_dir(out)?;
    let u0 = cfg.datum.build(cfg.grid)?;

    // localized profiles should vanish at the boundary; periodic families are exact
    let localized = !matches!(cfg.datum, gkdvlab::datum::Datum::Cosine { .. });
    let boundary = u0.inverse().samples()[0].abs();
    if localized && boundary > 1e-12 {
        eprintln!(
            "warning: datum magnitude {boundary:.3e} at the domain boundary; \
             periodic truncation error will be visible"
        );
    }

    let traj = evolve(&u0, &cfg.solver)?;
    let energies = conservation_report(&traj);

    let mut header: Vec<String> = vec![
        "t".into(),
        "l2".into(),
        "mass".into(),
        "hamiltonian".into(),
    ];
    for sigma in &cfg.sigma_list {
        header.push(format!("a_sigma_{sigma}"));
    }
    header.push("sigma_hat".into());

    let mut rows = Vec::with_capacity(traj.len());
    for (i, u) in traj.snapshots().iter().enumerate() {
        let row_energy = &energies.rows[i];
        let mut row = vec![
            row_energy.t,
            row_energy.l2,
            row_energy.mass,
            row_energy.hamiltonian,
        ];
        for &sigma in &cfg.sigma_list {
            row.push(gevrey_norm(u, GevreyParams::new(sigma, cfg.sobolev_s))?);
        }
        row.push(
            estimate_radius(u, &cfg.fit)
                .map(|e| e.sigma_hat)
                .unwrap_or(0.0),
        );
        rows.push(row);
    }
    let csv_path = out.join("trajectory.csv");
    write_csv(&csv_path, &header, &rows)?;
    println!("wrote {} ({} rows)", csv_path.display(), rows.len());

    for &t_want in &cfg.checkpoint_times {
        let (idx, &t_have) = traj
            .times()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - t_want).abs().partial_cmp(&(*b - t_want).abs()).expect("finite")
            })
            .expect("nonempty trajectory");
        let path = out.join(format!("checkpoint_t{t_have:.6}.gkdv"));
        checkpoint::write(&path, &traj.snapshots()[idx].inverse(), t_have)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_radius(config_path: &Path, ckpt: Option<&Path>, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    ensure_dir(out)?;
    let (field, label) = match ckpt {
        Some(path) => {
            let (real, t) = checkpoint::read(path)?;
            (real.forward(), format!("checkpoint t = {t}"))
        }
        None => (cfg.datum.build(cfg.grid)?, "datum".to_string()),
    };
    let estimate = estimate_radius(&field, &cfg.fit)?;
    let path = out.join("radius.json");
    write_json(&path, &estimate)?;
    println!(
        "{label}: sigma_hat = {} ({:?}, {} modes), wrote {}",
        float17(estimate.sigma_hat),
        estimate.classification,
        estimate.modes_used,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    delta: f64,
    dt: f64,
    fit: &'a Option<gkdvlab::conservation::SweepFit>,
    ratio_max: f64,
    ratio_min: f64,
}

fn cmd_sweep_sigma(config_path: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    ensure_dir(out)?;
    let u0 = cfg.datum.build(cfg.grid)?;

    let a0 = gevrey_norm(&u0, GevreyParams::new(cfg.sigma0, 0.0))?;
    let delta = local_timestep(a0, cfg.scheduler.c0, cfg.scheduler.r)?;
    let result: SweepResult = sigma_sweep(&u0, delta, &cfg.sigma_list, cfg.solver.dt)?;

    let header: Vec<String> = ["sigma", "delta_e", "bound", "ratio", "below_floor"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<f64>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                r.sigma,
                r.delta_e,
                r.bound,
                r.ratio,
                if r.below_floor { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    let csv_path = out.join("sweep.csv");
    write_csv(&csv_path, &header, &rows)?;
    let sidecar_path = out.join("sweep_fit.json");
    write_json(
        &sidecar_path,
        &SweepSidecar {
            delta,
            dt: cfg.solver.dt,
            fit: &result.fit,
            ratio_max: result.ratio_max,
            ratio_min: result.ratio_min,
        },
    )?;
    match &result.fit {
        Some(fit) => println!(
            "sweep: {} rows, fitted exponent {:.4}, wrote {} and {}",
            result.rows.len(),
            fit.exponent,
            csv_path.display(),
            sidecar_path.display()
        ),
        None => println!(
            "sweep: {} rows, insufficient signal for a fit, wrote {} and {}",
            result.rows.len(),
            csv_path.display(),
            sidecar_path.display()
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fuzz_symbol(samples: u64, seed: u64, out: &Path) -> Result<ExitCode> {
    ensure_dir(out)?;
    let report = run_fuzz(samples, seed, &FuzzRanges::default())?;
    let path = out.join("fuzz.json");
    write_json(&path, &report)?;
    println!(
        "fuzz: {} samples, {} violations, empirical constant {:.4}, wrote {}",
        report.samples,
        report.violations,
        report.empirical_constant,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SchedulePayload<'a> {
    plan: &'a SchedulePlan,
    /// Present when sobolev_s differs from zero: the embedded general-s view.
    general_s: Option<gkdvlab::schedule::GeneralSPlan>,
}

fn cmd_schedule(config_path: &Path, verify: bool, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    ensure_dir(out)?;
    let u0 = cfg.datum.build(cfg.grid)?;
    let horizon = cfg.solver.t_final;

    let plan = if cfg.sobolev_s == 0.0 {
        let a0 = gevrey_norm(&u0, GevreyParams::new(cfg.sigma0, 0.0))?;
        make_plan(a0, cfg.sigma0, horizon, &cfg.scheduler)?
    } else {
        let a0_half = gevrey_norm(&u0, GevreyParams::new(cfg.sigma0 / 2.0, 0.0))?;
        make_plan_general_s(a0_half, cfg.sigma0, cfg.sobolev_s, horizon, &cfg.scheduler)?.base
    };
    let payload = SchedulePayload {
        plan: &plan,
        general_s: if cfg.sobolev_s == 0.0 {
            None
        } else {
            let a0_half = gevrey_norm(&u0, GevreyParams::new(cfg.sigma0 / 2.0, 0.0))?;
            Some(make_plan_general_s(
                a0_half,
                cfg.sigma0,
                cfg.sobolev_s,
                horizon,
                &cfg.scheduler,
            )?)
        },
    };
    let plan_path = out.join("plan.json");
    write_json(&plan_path, &payload)?;
    println!(
        "plan: delta = {}, n = {}, sigma = {}, c1 = {}, wrote {}",
        float17(plan.delta),
        plan.n,
        float17(plan.sigma),
        float17(plan.c1),
        plan_path.display()
    );

    if !verify {
        return Ok(ExitCode::SUCCESS);
    }

    // substeps per local interval, honoring the configured dt as a ceiling
    let substeps = (plan.delta / cfg.solver.dt).ceil().max(1.0) as usize;
    let dt = plan.delta / substeps as f64;
    let t_total = plan.n as f64 * plan.delta;
    let run_cfg = SolverConfig {
        dt,
        t_final: t_total,
        sample_stride: cfg.solver.sample_stride,
        nonlinearity_enabled: cfg.solver.nonlinearity_enabled,
        dealias: cfg.solver.dealias,
    };
    let traj = evolve(&u0, &run_cfg)?;
    let report = verify_induction(&traj, &plan)?;
    let verify_path = out.join("induction.json");
    write_json(&verify_path, &report)?;
    println!(
        "induction: {} steps, {} failures, smallest passing C = {}, wrote {}",
        report.steps.len(),
        report.failures,
        float17(report.smallest_passing_c),
        verify_path.display()
    );
    if report.failures > 0 {
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ProbeRow {
    sigma: f64,
    ratio: f64,
}

fn cmd_probe(config_path: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    ensure_dir(out)?;
    let u0 = cfg.datum.build(cfg.grid)?;
    let run_cfg = SolverConfig {
        sample_stride: 1,
        ..cfg.solver
    };
    let traj = evolve(&u0, &run_cfg)?;
    let field = SpaceTimeField::from_trajectory(&traj)?;

    let mut sigmas = vec![0.0];
    sigmas.extend(cfg.sigma_list.iter().copied());
    let mut rows = Vec::new();
    for sigma in sigmas {
        let ratio = gkdvlab::bourgain::probe_multilinear(
            [&field, &field, &field, &field],
            sigma,
            cfg.sobolev_s,
            cfg.bourgain_b,
            cfg.bourgain_b_prime,
        )?;
        rows.push(ProbeRow { sigma, ratio });
    }
    let path = out.join("probe.json");
    write_json(&path, &rows)?;
    for row in &rows {
        println!("sigma = {:>10}: ratio = {}", row.sigma, float17(row.ratio));
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}
