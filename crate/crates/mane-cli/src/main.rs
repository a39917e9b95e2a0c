//! Command-line driver: potential profiles, critical values, min-max
//! reports, duality checks, simulation runs and the benchmark tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 degenerate estimate (no path exited).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mane::defaults;
use mane::error::Error;
use mane::experiments::{self, Budget};
use mane::model::ProcessModel;
use mane::oracle::{duality_check, GridSpec};
use mane::potential::{integrand_profile, PotentialQuery};
use mane::runconfig::RunConfig;
use mane::sampler::{estimate, simulate_bd_path_traced, simulate_diffusion_path_traced, RngNoise, SimConfig};
use mane::subsolution::minmax;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "mane", about = "Mañé potentials, min-max subsolutions and rare-event importance sampling", version)]
struct Cli {
    /// Run-configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Downscales sampling budgets to desk scale.
    #[arg(long, global = true)]
    desk_scale: bool,
    /// Directory for CSV output; created on demand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluates the Mañé potential S^c(x, y) and its integrand profile.
    Potential(PotentialArgs),
    /// Prints the Mañé critical value of the configured model.
    CriticalValue,
    /// Runs the min-max optimization and prints the report.
    Minmax(MinmaxArgs),
    /// Verifies the duality between the potential and the grid Mather action.
    DualityCheck(DualityArgs),
    /// Runs the configured Monte Carlo estimator.
    Simulate(SimulateArgs),
    /// Double-well diffusion exit-probability table.
    Table1,
    /// SIS birth-death exit-probability table.
    Table2,
    /// Drifted-Brownian example where min and max do not interchange.
    ExampleGap(GapArgs),
}

#[derive(Args)]
struct PotentialArgs {
    /// Energy level c > c_H.
    #[arg(long)]
    c: f64,
    /// Anchor; defaults to the domain's x0.
    #[arg(long)]
    x: Option<f64>,
    /// Target point.
    #[arg(long)]
    y: f64,
    /// Points in the integrand profile CSV.
    #[arg(long, default_value_t = 512)]
    profile_points: usize,
}

#[derive(Args)]
struct MinmaxArgs {
    /// Also emit the c-objective curve per boundary point as CSV.
    #[arg(long)]
    curve: bool,
    /// Points in the curve CSV.
    #[arg(long, default_value_t = 200)]
    curve_points: usize,
}

#[derive(Args)]
struct DualityArgs {
    /// Anchor point x; defaults to the domain's x0.
    #[arg(long)]
    x: Option<f64>,
    /// Target point y; defaults to the domain's b.
    #[arg(long)]
    y: Option<f64>,
    /// Times to test (grid multiples).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5])]
    t: Vec<f64>,
    /// Energy levels to test.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 1.0])]
    c: Vec<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Write the first path's (t, x, log_weight) trace as CSV.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long, default_value_t = -1.2)]
    a: f64,
    #[arg(long, default_value_t = 1.1)]
    b: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot build thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_NUMERICAL),
            }
        }
    }
}

fn load_config(cli: &Cli) -> mane::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("this subcommand needs --config <file>"))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        if let Some(s) = cfg.sampling.as_mut() {
            s.seed = seed;
        }
    }
    Ok(cfg)
}

fn write_csv(cli: &Cli, name: &str, contents: &str) -> mane::Result<()> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> mane::Result<ExitCode> {
    match &cli.cmd {
        Cmd::Potential(args) => cmd_potential(cli, args),
        Cmd::CriticalValue => cmd_critical_value(cli),
        Cmd::Minmax(args) => cmd_minmax(cli, args),
        Cmd::DualityCheck(args) => cmd_duality(cli, args),
        Cmd::Simulate(args) => cmd_simulate(cli, args),
        Cmd::Table1 => cmd_table1(cli),
        Cmd::Table2 => cmd_table2(cli),
        Cmd::ExampleGap(args) => cmd_gap(cli, args),
    }
}

fn cmd_potential(cli: &Cli, args: &PotentialArgs) -> mane::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let x = args.x.unwrap_or(cfg.domain.x0);
    let query = PotentialQuery::new(&cfg.model, &cfg.domain, args.c, x, args.y)?;
    let value = query.evaluate()?;
    println!("S^c(x, y) = {value:.12}");
    println!("c = {}", args.c);
    println!("x = {x}");
    println!("y = {}", args.y);
    println!("config_hash = {}", cfg.hash());
    let profile = integrand_profile(&cfg.model, x, args.y, args.c, args.profile_points)?;
    let mut csv = String::from("z,p_c\n");
    for (z, p) in profile {
        let _ = writeln!(csv, "{z},{p}");
    }
    write_csv(cli, "potential_profile.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_critical_value(cli: &Cli) -> mane::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let c_h = cfg.model.critical_value(&cfg.domain, defaults::CRITICAL_GRID_N);
    println!("c_H = {c_h:.12}");
    println!("config_hash = {}", cfg.hash());
    Ok(ExitCode::SUCCESS)
}

fn cmd_minmax(cli: &Cli, args: &MinmaxArgs) -> mane::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let r = minmax(&cfg.model, &cfg.domain, cfg.domain.horizon)?;
    println!("value = {:.12}", r.value);
    println!("c_star = {:.12}", r.c_star);
    println!("y_star = {}", r.y_star);
    println!("maxmin_value = {:.12}", r.maxmin_value);
    println!("gap = {:.12}", r.gap);
    println!("K = {:.12}", r.k);
    for side in r.per_boundary {
        println!(
            "boundary[{}].c_opt = {:.12}\nboundary[{}].objective = {:.12}",
            side.y, side.c_opt, side.y, side.objective
        );
    }
    println!("config_hash = {}", cfg.hash());
    if args.curve {
        let c_h = cfg.model.critical_value(&cfg.domain, defaults::CRITICAL_GRID_N);
        let hi = r.c_star.max(c_h + 1.0) * 2.0 - c_h;
        let mut csv = String::from("c,objective_a,objective_b\n");
        for i in 1..=args.curve_points {
            let c = c_h + (hi - c_h) * i as f64 / args.curve_points as f64;
            let qa = PotentialQuery::new(&cfg.model, &cfg.domain, c, cfg.domain.x0, cfg.domain.a)
                .and_then(|q| q.evaluate());
            let qb = PotentialQuery::new(&cfg.model, &cfg.domain, c, cfg.domain.x0, cfg.domain.b)
                .and_then(|q| q.evaluate());
            if let (Ok(sa), Ok(sb)) = (qa, qb) {
                let tail = c * cfg.domain.horizon;
                let _ = writeln!(
                    csv,
                    "{c},{},{}",
                    cfg.domain.g_a + sa - tail,
                    cfg.domain.g_b + sb - tail
                );
            }
        }
        write_csv(cli, "minmax_curve.csv", &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_duality(cli: &Cli, args: &DualityArgs) -> mane::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let x = args.x.unwrap_or(cfg.domain.x0);
    let y = args.y.unwrap_or(cfg.domain.b);
    let grid = cfg.grid.unwrap_or(GridSpec {
        x_lo: x.min(y),
        x_hi: x.max(y),
        nx: 401,
        t_hi: 2.0 * args.t.iter().cloned().fold(0.5, f64::max),
        nt: 200,
        v_max: 8.0,
    });
    let report = duality_check(&cfg.model, x, y, &args.t, &args.c, &grid)?;
    println!("pass = {}", report.pass);
    println!("rel_tol = {}", report.rel_tol);
    let mut csv = String::from("side,at,lhs,rhs,rel\n");
    for r in &report.per_c {
        println!("c = {}: |S^c - min_t(M+ct)| rel = {:.4e}", r.at, r.rel);
        let _ = writeln!(csv, "c,{},{},{},{}", r.at, r.lhs, r.rhs, r.rel);
    }
    for r in &report.per_t {
        println!("t = {}: |sup_c(S^c-ct) - M| rel = {:.4e}", r.at, r.rel);
        let _ = writeln!(csv, "t,{},{},{},{}", r.at, r.lhs, r.rhs, r.rel);
    }
    write_csv(cli, "duality_residuals.csv", &csv)?;
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERICAL)
    })
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> mane::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let sampling = cfg
        .sampling
        .clone()
        .ok_or_else(|| Error::config("simulate needs a [sampling] section"))?;
    let (scale, dt) = cfg.scale_and_dt()?;
    let (sub, opt) = experiments::build_subsolution(
        &cfg.model,
        &cfg.domain,
        cfg.domain.horizon,
        sampling.method,
    )?;
    let mut batches = sampling.batches;
    let mut samples = sampling.samples_per_batch;
    if cli.desk_scale {
        batches = (batches / 5).max(2);
        samples = (samples / 4).max(1);
    }
    let sim = SimConfig {
        model: &cfg.model,
        domain: &cfg.domain,
        subsolution: sub.as_ref(),
        scale,
        horizon: cfg.domain.horizon,
        dt,
        batches,
        samples_per_batch: samples,
        seed: sampling.seed,
        stop_at_boundary: true,
    };
    let est = estimate(&sim)?;
    print!("{}", experiments::estimate_report("estimate", &est));
    if let Some(opt) = opt {
        println!("c_star = {:.12}", opt.c_star);
        println!("y_star = {}", opt.y_star);
        println!("K = {:.12}", opt.k);
    }
    if let mane::sampler::Scale::Population(n) = scale {
        // the start snaps to the nearest lattice point (error at most 1/(2n))
        let k0 = (cfg.domain.x0 * n as f64).round();
        println!("x0_lattice = {}/{n}", k0 as u64);
    }
    println!("config_hash = {}", cfg.hash());

    let mut csv = String::from("batch,mean,seed,config_hash\n");
    for (i, m) in est.batch_means.iter().enumerate() {
        let _ = writeln!(csv, "{i},{m:.10e},{},{}", est.seed, cfg.hash());
    }
    write_csv(cli, "batch_means.csv", &csv)?;

    if args.trace {
        let mut trace = Vec::new();
        let mut noise = RngNoise(mane::sampler::path_rng(sim.seed, 0, 0));
        match cfg.model {
            ProcessModel::Diffusion(_) => {
                simulate_diffusion_path_traced(&sim, &mut noise, Some(&mut trace))?;
            }
            ProcessModel::BirthDeath(_) => {
                simulate_bd_path_traced(&sim, &mut noise, Some(&mut trace))?;
            }
            _ => {}
        }
        let mut tcsv = String::from("t,x,log_weight\n");
        for (t, x, lw) in trace {
            let _ = writeln!(tcsv, "{t},{x},{lw}");
        }
        write_csv(cli, "path_trace.csv", &tcsv)?;
    }
    if est.degenerate {
        eprintln!("warning: degenerate estimate, no path exited");
        return Ok(ExitCode::from(EXIT_DEGENERATE));
    }
    Ok(ExitCode::SUCCESS)
}

fn budget_from(cli: &Cli, full: Budget, desk_samples: usize) -> Budget {
    let mut budget = if cli.desk_scale {
        full.desk_scaled(desk_samples)
    } else {
        full
    };
    if let Some(seed) = cli.seed {
        budget.seed = seed;
    }
    budget
}

fn config_hash_or(cli: &Cli, fallback: &str) -> String {
    cli.config
        .as_deref()
        .and_then(|p: &Path| RunConfig::from_path(p).ok())
        .map(|c| c.hash())
        .unwrap_or_else(|| fallback.to_string())
}

fn cmd_table1(cli: &Cli) -> mane::Result<ExitCode> {
    let budget = budget_from(cli, experiments::TABLE1_BUDGET, 1_000);
    let hash = config_hash_or(cli, "table1-builtin");
    let rows = experiments::run_table1(
        &[0.09, 0.05, 0.03],
        &[0.25, 0.5, 1.0, 2.0],
        budget,
        &hash,
    )?;
    let csv = experiments::table_csv("epsilon", &rows);
    print!("{csv}");
    write_csv(cli, "table1.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_table2(cli: &Cli) -> mane::Result<ExitCode> {
    let budget = budget_from(cli, experiments::TABLE2_BUDGET, 500);
    let hash = config_hash_or(cli, "table2-builtin");
    let rows = experiments::run_table2(&[100, 200, 300, 400, 500], budget, &hash)?;
    let csv = experiments::table_csv("n", &rows);
    print!("{csv}");
    write_csv(cli, "table2.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gap(cli: &Cli, args: &GapArgs) -> mane::Result<ExitCode> {
    let budget = budget_from(
        cli,
        Budget {
            batches: 10,
            samples_per_batch: 10_000,
            seed: 20_926,
        },
        1_000,
    );
    let hash = config_hash_or(cli, "example-gap-builtin");
    let r = experiments::run_example_gap(args.a, args.b, args.epsilon, budget)?;
    println!("a = {}", r.a);
    println!("b = {}", r.b);
    println!("epsilon = {}", r.epsilon);
    println!("value = {:.12}", r.value);
    println!("maxmin = {:.12}", r.maxmin);
    println!("gap = {:.12}", r.value - r.maxmin);
    println!("K = {:.12}", r.k);
    println!("K_flagged = {}", r.k_flagged);
    println!("c_star = {:.12}", r.c_star);
    println!("y_star = {}", r.y_star);
    print!("{}", experiments::estimate_report("is", &r.is_estimate));
    print!("{}", experiments::estimate_report("mc", &r.mc_estimate));
    println!("config_hash = {hash}");
    if r.is_estimate.degenerate && r.mc_estimate.degenerate {
        return Ok(ExitCode::from(EXIT_DEGENERATE));
    }
    Ok(ExitCode::SUCCESS)
}
