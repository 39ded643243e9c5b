//! Command-line driver: symbol certification, simulation, and the scripted
//! experiments. Exit codes: 0 pass/completion, 1 experiment-criterion
//! failure, 2 usage/config error, 3 numerical abort.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use ascal::config::RunConfig;
use ascal::experiments::{
    diffusive_floor, gradient_growth, picard_contraction_experiment, radius_decay,
    viscosity_sweep, BaseRun, ErrorNorm,
};
use ascal::io::{read_checkpoint, series_csv, two_column_dat, RunDir};
use ascal::laws::{certify, curved_region_scan, SymbolLaw};
use ascal::solver::{run, RunStatus};

#[derive(Parser)]
#[command(name = "ascal", version, about = "Pseudo-spectral active scalar laboratory")]
struct Cli {
    /// rayon worker threads (results are identical for any value)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// path to the TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// dotted-path override, e.g. --set law.nu=0.05 (repeatable)
    #[arg(long = "set", value_parser = parse_kv)]
    set: Vec<(String, String)>,
    /// output directory (overrides [output].dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kv(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{raw}`"))
}

#[derive(Subcommand)]
enum Command {
    /// Certify the symbol assumptions over an exhaustive wavenumber scan
    CheckSymbols {
        /// builtin family: mg | ipmb | sipm (or use --config for table laws)
        #[arg(long)]
        family: Option<String>,
        /// scan radius L (default 64 for d = 3, 128 for d = 2)
        #[arg(long)]
        radius: Option<i64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// also print the MG⁰ curved-region growth table
        #[arg(long)]
        curved: bool,
    },
    /// Integrate one configuration and record the diagnostic series
    Simulate(ConfigArgs),
    /// Vanishing-viscosity sweep against the ν = 0 member
    Sweep(ConfigArgs),
    /// Radius experiments: decay tracking or the diffusive floor
    Radius(ConfigArgs),
    /// Picard contraction window bisection
    Picard(ConfigArgs),
    /// Gradient-growth envelope fit
    Growth(ConfigArgs),
    /// Print checkpoint metadata
    Info { path: PathBuf },
}

const EXIT_CRITERION_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("ascal: cannot size thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ascal: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::CheckSymbols { family, radius, config, set, out, curved } => {
            check_symbols(family, radius, config, &set, out, curved)
        }
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Radius(args) => radius_cmd(&args),
        Command::Picard(args) => picard_cmd(&args),
        Command::Growth(args) => growth_cmd(&args),
        Command::Info { path } => info(&path),
    }
}

fn load_config(path: &Path, set: &[(String, String)]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    RunConfig::parse(&text, set).map_err(|e| anyhow!("{e}"))
}

fn out_dir(args: &ConfigArgs, config: &RunConfig, default: &str) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from(default))
}

/// Default per-family parameter grid: {0} ∪ {2⁻ʲ} for viscosities, {2⁻ʲ}
/// alone for the SIPM order β (which excludes 0).
fn default_grid(law: &SymbolLaw) -> Vec<f64> {
    let powers = (0..=10).map(|j| 2.0f64.powi(-j));
    match law {
        SymbolLaw::Sipm { .. } => powers.collect(),
        _ => std::iter::once(0.0).chain(powers).collect(),
    }
}

fn check_symbols(
    family: Option<String>,
    radius: Option<i64>,
    config: Option<PathBuf>,
    set: &[(String, String)],
    out: Option<PathBuf>,
    curved: bool,
) -> Result<u8> {
    let law = match (&family, &config) {
        (Some(name), _) => match name.as_str() {
            "mg" => SymbolLaw::mg(0.0).expect("valid"),
            "ipmb" => SymbolLaw::ipmb(0.0).expect("valid"),
            "sipm" => SymbolLaw::sipm(1.0).expect("valid"),
            other => return Err(anyhow!("unknown family `{other}` (mg|ipmb|sipm)")),
        },
        (None, Some(path)) => load_config(path, set)?.law().map_err(|e| anyhow!("{e}"))?,
        (None, None) => return Err(anyhow!("check-symbols needs --family or --config")),
    };
    let config_check = config
        .as_ref()
        .map(|p| load_config(p, set))
        .transpose()?
        .and_then(|c| c.check);
    let scan_radius = radius
        .or(config_check.as_ref().and_then(|c| c.radius))
        .unwrap_or(if law.dim() == 3 { 64 } else { 128 });
    let grid = match &config_check {
        Some(c) if !c.params.is_empty() => c.params.clone(),
        _ => default_grid(&law),
    };

    let report = certify(&law, scan_radius, &grid).map_err(|e| anyhow!("{e}"))?;
    print!("{}", report.render_table());
    if curved {
        println!("curved-region growth of MG⁰ along k = (n, ⌊√n⌋, 1):");
        println!("{:>8} {:>16} {:>14} {:>12}", "n", "k", "|M(k)|", "|M(k)|/|k|");
        for row in curved_region_scan(&[100, 1000, 10000]) {
            println!(
                "{:>8} {:>16} {:>14.4} {:>12.6}",
                row.n,
                format!("{:?}", row.k),
                row.symbol_norm,
                row.ratio
            );
        }
    }
    if let Some(dir) = out {
        let mut rd = RunDir::create(&dir)?;
        rd.write_json("report.json", &report)?;
        rd.finish("check-symbols", if report.all_applicable_pass() { "pass" } else { "fail" })?;
    }
    Ok(if report.all_applicable_pass() { 0 } else { EXIT_CRITERION_FAILED })
}

fn write_common(rd: &mut RunDir, config: &RunConfig) -> Result<()> {
    rd.write_text("resolved_config.toml", &config.emit())?;
    Ok(())
}

fn status_exit(status: &RunStatus) -> u8 {
    match status {
        RunStatus::Completed => 0,
        _ => EXIT_NUMERICAL,
    }
}

fn simulate(args: &ConfigArgs) -> Result<u8> {
    let config = load_config(&args.config, &args.set)?;
    let base: BaseRun = config.build().map_err(|e| anyhow!("{e}"))?;
    let dir = out_dir(args, &config, "runs/simulate");
    let mut rd = RunDir::create(&dir)?;
    write_common(&mut rd, &config)?;

    let per_node = config.sim.checkpoints == "nodes";
    let mut node_index = 0usize;
    let mut node_files: Vec<(usize, ascal::solver::SimulationState)> = Vec::new();
    let outcome = run(base.state.clone(), &base.policy, &base.plan, |_, state| {
        if per_node {
            node_files.push((node_index, state.clone()));
        }
        node_index += 1;
    })
    .map_err(|e| anyhow!("{e}"))?;

    rd.write_text("series.csv", &series_csv(&outcome.series, &base.plan))?;
    for (i, state) in &node_files {
        rd.write_checkpoint(&format!("node_{i:04}.ckpt"), state)?;
    }
    if config.sim.checkpoints != "none" {
        rd.write_checkpoint("final.ckpt", &outcome.final_state)?;
    }
    let status = format!("{:?}", outcome.status);
    rd.write_json("summary.json", &serde_json::json!({
        "status": status,
        "t_final": outcome.final_state.t,
        "rows": outcome.series.rows.len(),
    }))?;
    rd.finish("simulate", &status)?;
    println!(
        "simulate: {} rows, status {:?}, output in {}",
        outcome.series.rows.len(),
        outcome.status,
        dir.display()
    );
    Ok(status_exit(&outcome.status))
}

fn sweep(args: &ConfigArgs) -> Result<u8> {
    let config = load_config(&args.config, &args.set)?;
    let section = config
        .sweep
        .clone()
        .ok_or_else(|| anyhow!("config has no [sweep] section"))?;
    let base = config.build().map_err(|e| anyhow!("{e}"))?;
    let d = base.state.lattice().dim() as f64;
    let norm = match section.norm.as_str() {
        "sobolev" => ErrorNorm::Sobolev {
            s: section.sobolev_s.unwrap_or(d / 2.0 + 0.5),
        },
        _ => ErrorNorm::GevreyAuto {
            s: section.gevrey_s.unwrap_or(1.0),
            r: section.gevrey_r.unwrap_or(d / 2.0 + 1.6),
            tau_factor: section.gevrey_tau_factor,
        },
    };
    let result = viscosity_sweep(&base, &section.nu_list, norm, section.auto_t_end)
        .map_err(|e| anyhow!("{e}"))?;

    let dir = out_dir(args, &config, "runs/sweep");
    let mut rd = RunDir::create(&dir)?;
    write_common(&mut rd, &config)?;
    let aborted = result.statuses.iter().any(|s| matches!(s, RunStatus::NumericalBlowup { .. }))
        || !result.reference_status.is_completed();
    let pass = result.strictly_decreasing() && !aborted;
    rd.write_json(
        "sweep.json",
        &serde_json::json!({ "pass": pass, "strictly_decreasing": result.strictly_decreasing(), "result": &result }),
    )?;
    let finals: Vec<(f64, f64)> = result
        .nu_list
        .iter()
        .zip(&result.final_errors)
        .map(|(&nu, &e)| (nu, e))
        .collect();
    rd.write_text("final_errors.dat", &two_column_dat(&finals))?;
    for (i, (nu, series)) in result.nu_list.iter().zip(&result.error_series).enumerate() {
        let pairs: Vec<(f64, f64)> = result
            .node_times
            .iter()
            .zip(series)
            .map(|(&t, &e)| (t, e))
            .collect();
        rd.write_text(&format!("errors_{i:02}_nu_{nu}.dat"), &two_column_dat(&pairs))?;
    }
    for (i, series) in result.member_series.iter().enumerate() {
        rd.write_text(
            &format!("series_{i:02}_nu_{}.csv", result.nu_list[i]),
            &series_csv(series, &base.plan),
        )?;
    }

    println!(
        "sweep: T = {:.4}, norm {}, final errors {:?}",
        result.t_end, result.norm_desc, result.final_errors
    );
    rd.finish("sweep", if pass { "pass" } else { "fail" })?;
    if aborted {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if pass { 0 } else { EXIT_CRITERION_FAILED })
}

fn radius_cmd(args: &ConfigArgs) -> Result<u8> {
    let config = load_config(&args.config, &args.set)?;
    let mode = config
        .radius_exp
        .as_ref()
        .map(|r| r.mode.clone())
        .unwrap_or_else(|| "decay".into());
    let base = config.build().map_err(|e| anyhow!("{e}"))?;
    let dir = out_dir(args, &config, "runs/radius");
    let mut rd = RunDir::create(&dir)?;
    write_common(&mut rd, &config)?;

    fn tau_csv(times: &[f64], tau: &[f64], valid: &[bool]) -> String {
        let mut out = String::from("t,tau_hat,valid\n");
        for ((t, tau), v) in times.iter().zip(tau).zip(valid) {
            out.push_str(&format!("{t},{tau},{}\n", u8::from(*v)));
        }
        out
    }

    let pass;
    if mode == "floor" {
        let report = diffusive_floor(&base).map_err(|e| anyhow!("{e}"))?;
        pass = report.floor_exceeds_control == Some(true) && report.tail_nondecreasing;
        let pairs: Vec<(f64, f64)> = report
            .diffusive
            .times
            .iter()
            .zip(&report.diffusive.tau_hat)
            .map(|(&t, &tau)| (t, tau))
            .collect();
        rd.write_text("tau_hat.dat", &two_column_dat(&pairs))?;
        rd.write_text(
            "diffusive.csv",
            &tau_csv(&report.diffusive.times, &report.diffusive.tau_hat, &report.diffusive.valid),
        )?;
        rd.write_text(
            "control.csv",
            &tau_csv(&report.control.times, &report.control.tau_hat, &report.control.valid),
        )?;
        rd.write_json("radius.json", &serde_json::json!({ "pass": pass, "result": &report }))?;
        println!(
            "diffusive floor: tail floor {:?} vs control {:?}",
            report.diffusive.tail_floor, report.control.tail_floor
        );
    } else {
        let tau0 = config.initial.tau0.unwrap_or(0.0);
        let series = radius_decay(&base, tau0).map_err(|e| anyhow!("{e}"))?;
        let monotone = series
            .tau_hat
            .windows(2)
            .all(|w| w[1] <= w[0] * 1.02);
        pass = !series.inconclusive && monotone && series.fit_r2.unwrap_or(0.0) >= 0.9;
        let pairs: Vec<(f64, f64)> = series
            .times
            .iter()
            .zip(&series.tau_hat)
            .map(|(&t, &tau)| (t, tau))
            .collect();
        rd.write_text("tau_hat.dat", &two_column_dat(&pairs))?;
        rd.write_text("series.csv", &tau_csv(&series.times, &series.tau_hat, &series.valid))?;
        rd.write_json("radius.json", &serde_json::json!({ "pass": pass, "result": &series }))?;
        println!(
            "radius decay: c_hat {:?}, r2 {:?}, inconclusive {}",
            series.c_hat, series.fit_r2, series.inconclusive
        );
    }
    rd.finish("radius", if pass { "pass" } else { "fail" })?;
    Ok(if pass { 0 } else { EXIT_CRITERION_FAILED })
}

fn picard_cmd(args: &ConfigArgs) -> Result<u8> {
    let config = load_config(&args.config, &args.set)?;
    let section = config.picard.clone().unwrap_or(ascal::config::PicardSection {
        s: None,
        t_init: 0.5,
        nodes: 16,
    });
    let base = config.build().map_err(|e| anyhow!("{e}"))?;
    let d = base.state.lattice().dim() as f64;
    let s = section.s.unwrap_or(d / 2.0 + 1.5);
    let c_cfl = config.sim.cfl;
    let report = picard_contraction_experiment(
        &base.state.theta,
        &base.state.forcing,
        &base.state.law,
        s,
        section.t_init,
        section.nodes,
        c_cfl,
    )
    .map_err(|e| anyhow!("{e}"))?;

    let dir = out_dir(args, &config, "runs/picard");
    let mut rd = RunDir::create(&dir)?;
    write_common(&mut rd, &config)?;
    let pass = report.converged && report.uniform_bound_ok;
    rd.write_json("picard.json", &serde_json::json!({ "pass": pass, "result": &report }))?;
    let ratio_pairs: Vec<(f64, f64)> =
        report.ratios.iter().map(|&(n, r)| (n as f64, r)).collect();
    rd.write_text("ratios.dat", &two_column_dat(&ratio_pairs))?;
    println!(
        "picard: T = {:.5}, ratios {:?}, uniform bound {}",
        report.t_window, report.ratios, report.uniform_bound_ok
    );
    rd.finish("picard", if pass { "pass" } else { "fail" })?;
    Ok(if pass { 0 } else { EXIT_CRITERION_FAILED })
}

fn growth_cmd(args: &ConfigArgs) -> Result<u8> {
    let config = load_config(&args.config, &args.set)?;
    let base = config.build().map_err(|e| anyhow!("{e}"))?;
    let report = gradient_growth(&base).map_err(|e| anyhow!("{e}"))?;
    let dir = out_dir(args, &config, "runs/growth");
    let mut rd = RunDir::create(&dir)?;
    write_common(&mut rd, &config)?;
    let pairs: Vec<(f64, f64)> = report
        .times
        .iter()
        .zip(&report.grad_norm)
        .map(|(&t, &g)| (t, g))
        .collect();
    rd.write_text("grad_norm.dat", &two_column_dat(&pairs))?;
    rd.write_json("growth.json", &serde_json::json!({ "pass": report.pass, "result": &report }))?;
    println!(
        "growth: envelope {:.5}·e^({:.5} t), curvature {:.3e}, pass {}",
        report.a, report.b, report.curvature, report.pass
    );
    rd.finish("growth", if report.pass { "pass" } else { "fail" })?;
    if report.inconclusive {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if report.pass { 0 } else { EXIT_CRITERION_FAILED })
}

fn info(path: &Path) -> Result<u8> {
    let (meta, field) = read_checkpoint(path).map_err(|e| anyhow!("{e}"))?;
    println!("checkpoint {}", path.display());
    println!("  format version {}", meta.version);
    println!("  lattice        d = {}, n = {}", meta.d, meta.n);
    println!("  time           {}", meta.t);
    println!("  kappa          {}", meta.kappa);
    println!("  law            {}", meta.law.id());
    println!("  L2 norm        {:.12e}", field.l2_norm());
    println!("  max |coeff|    {:.12e}", field.max_abs());
    Ok(0)
}
