//! Command-line front end: plan design, trajectory simulation, candidate
//! scans, plan optimization, and the reproduction harness.

pub mod config;
pub mod output;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::design::{
    approximate_mapping_scan, approximate_mapping_scan_all, damped_regime_eta, detuning_key,
    diophantine_scan, MappingSolution,
};
use crate::error::{Error, Result};
use crate::evaluate::{fine_tune, min_fidelity_with_metric, FreeCoord, Metric};
use crate::hilbert::{initial_state, FockBasis};
use crate::propagate::{protocol_trajectory, Mode};

use config::{load_config, parse_complex, parse_mode, plan_document, EnvParams};
use output::{format_sci, write_csv, write_trajectory};

#[derive(Parser)]
#[command(
    name = "veemap",
    about = "Pulse design and simulation for mapping a V-type emitter qubit onto a cavity mode",
    version
)]
struct Cli {
    /// Worker threads for scans and optimization (default: available
    /// parallelism; VEEMAP_THREADS overrides the default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    k: u64,
    #[arg(long)]
    theta: u64,
    /// Shift-stage laser amplitude in units of g.
    #[arg(long)]
    omega1: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma0: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma1: f64,
    /// Write the plan document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Plan document (as written by `design --out`).
    #[arg(long)]
    plan: PathBuf,
    /// Amplitude of |10>, e.g. "0.6+0.8i".
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Amplitude of |00>.
    #[arg(long, default_value = "0")]
    beta: String,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value_t = 501)]
    points: usize,
    /// Sampling window; defaults to the full protocol duration. Zero emits a
    /// single row of initial populations.
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanApproxArgs {
    #[arg(long, default_value_t = 200.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.99999)]
    fmin: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_stage: f64,
    /// Emit every passing candidate instead of one per distinct detuning.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanDiophantineArgs {
    #[arg(long)]
    kmax: u64,
    #[arg(long)]
    thetamax: u64,
    #[arg(long)]
    lmax: u64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Comma-separated coordinates to free: delta,t1,t_pi,phi_omega,Phi.
    #[arg(long, default_value = "delta,t1,t_pi,phi_omega,Phi")]
    free: String,
    #[arg(long, default_value_t = 800)]
    budget: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Score against the attenuation-compensated target.
    #[arg(long)]
    compensated: bool,
    #[arg(long)]
    mode: Option<String>,
    /// Write the tuned plan document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of: fig2 fig3 fig4 fig5 fig6 tab-sec8 tab-sec9 tab-sec10
    /// tab-sec11 tab-sec12, or "all".
    #[arg(long)]
    case: String,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Family index override for fig2/fig3.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    theta: Option<u64>,
    #[arg(long)]
    omega1: Option<f64>,
    /// fig6 only: also run the shift stage at the physical quantum-dot
    /// frequency sum (long-running).
    #[arg(long)]
    physical: bool,
    #[arg(long, default_value_t = 800)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Design a two-stage plan for a detuning-family member.
    Design(DesignArgs),
    /// Sample populations along a plan's pulse sequence into CSV.
    Simulate(SimulateArgs),
    /// Search single-pulse approximate mappings below a time limit.
    ScanApprox(ScanApproxArgs),
    /// Exact-integer search for simultaneous transfer/return timing.
    ScanDiophantine(ScanDiophantineArgs),
    /// Fine-tune a plan's free coordinates against worst-case fidelity.
    Optimize(OptimizeArgs),
    /// Regenerate a published artifact and check it against stored values.
    Reproduce(ReproduceArgs),
}

fn init_threads(flag: Option<usize>) {
    let from_env = std::env::var("VEEMAP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Design(args) => cmd_design(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::ScanApprox(args) => cmd_scan_approx(args),
        Command::ScanDiophantine(args) => cmd_scan_diophantine(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn print_plan_table(plan: &crate::design::ProtocolPlan) {
    println!("  quantity     value");
    println!("  k            {}", plan.k);
    println!("  theta        {}", plan.theta);
    println!("  delta        {}", format_sci(plan.delta));
    println!("  t1           {}", format_sci(plan.t1));
    println!("  t_pi         {}", format_sci(plan.t_pi));
    println!("  omega1       {}", format_sci(plan.omega1));
    println!("  phi_omega    {}", format_sci(plan.phi_omega));
    println!("  Phi          {}", format_sci(plan.phi_pi));
    println!("  t1/t_pi      {}", format_sci(plan.t1_ratio()));
    println!("  damped       {}", plan.damped);
}

fn cmd_design(args: DesignArgs) -> Result<i32> {
    let env = EnvParams {
        kappa: args.kappa,
        gamma0: args.gamma0,
        gamma1: args.gamma1,
        omega_sum: None,
    };
    let damped = args.kappa > 0.0 || args.gamma0 > 0.0 || args.gamma1 > 0.0;
    let plan = if damped {
        crate::design::design_protocol_damped(
            args.k, args.theta, args.omega1, args.kappa, args.gamma0, args.gamma1,
        )?
    } else {
        crate::design::design_protocol(args.k, args.theta, args.omega1)?
    };
    if args.omega1 < 633.0 {
        eprintln!(
            "note: omega1 = {} keeps the shift-stage error bound (2/omega1)^2 = {} above 1e-5",
            args.omega1,
            format_sci((2.0 / args.omega1).powi(2))
        );
    }
    if damped {
        let eta = damped_regime_eta(args.k, args.theta, args.kappa)?;
        if eta > 0.1 {
            eprintln!("note: decay expansion parameter eta = {} above 0.1; corrections unreliable", format_sci(eta));
        }
    }
    print_plan_table(&plan);
    let doc = plan_document(&plan, &env);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &doc)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            println!("plan written to {}", path.display());
        }
        None => {
            println!("--- plan document ---");
            print!("{doc}");
        }
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let config = load_config(&args.plan)?;
    let plan = config.resolve_plan()?;
    let mode = match &args.mode {
        Some(m) => parse_mode(m)?,
        None => config.mode()?,
    };
    let params = config.params.to_system();
    if mode == Mode::Full && params.omega_sum.is_none() {
        return Err(Error::Config("mode=full requires params.omega_sum in the plan document".into()));
    }
    let n_max = match mode {
        Mode::Rwa => 1,
        Mode::Full => 3,
    };
    let basis = FockBasis::new(n_max);
    let alpha = parse_complex(&args.alpha)?;
    let beta = parse_complex(&args.beta)?;
    let (psi0, renormalized) = initial_state(alpha, beta, basis)?;
    if renormalized {
        eprintln!("note: input amplitudes renormalized to unit norm");
    }

    let t_total = plan.t1 + plan.t_pi;
    let t_max = args.tmax.unwrap_or(t_total);
    if t_max == 0.0 {
        let mut row = vec![0.0];
        row.extend(psi0.populations());
        row.push(psi0.norm_sq());
        write_csv(&args.out, &output::trajectory_header(basis), &[row])?;
    } else {
        if t_max > t_total + 1e-12 {
            return Err(Error::Config(format!(
                "tmax = {t_max} exceeds the protocol duration {t_total}"
            )));
        }
        let traj = protocol_trajectory(&plan, &params, &psi0, args.points, mode, config.options.tol)?;
        let cut: Vec<usize> = (0..traj.times.len()).filter(|&i| traj.times[i] <= t_max).collect();
        let windowed = crate::propagate::Trajectory {
            times: cut.iter().map(|&i| traj.times[i]).collect(),
            populations: cut.iter().map(|&i| traj.populations[i].clone()).collect(),
            norms: cut.iter().map(|&i| traj.norms[i]).collect(),
        };
        write_trajectory(&args.out, basis, &windowed)?;
    }
    if mode == Mode::Full {
        // photon-cutoff convergence check: the final state must agree with a
        // rerun at n_max + 1
        let wide = FockBasis::new(n_max + 1);
        let (psi_w, _) = initial_state(alpha, beta, wide)?;
        let narrow = crate::propagate::run_protocol_with_tol(&plan, &params, &psi0, mode, config.options.tol)?;
        let wide_out = crate::propagate::run_protocol_with_tol(&plan, &params, &psi_w, mode, config.options.tol)?;
        let worst = (0..basis.dimension())
            .map(|i| (narrow.population(i) - wide_out.population(i)).abs())
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            eprintln!(
                "warning: photon cutoff n_max = {n_max} not converged (populations move by {} at n_max + 1)",
                format_sci(worst)
            );
        }
    }
    println!("trajectory written to {}", args.out.display());
    Ok(0)
}

fn scan_csv_rows(solutions: &[MappingSolution]) -> Vec<Vec<f64>> {
    solutions
        .iter()
        .map(|s| {
            vec![
                s.k as f64,
                s.theta as f64,
                s.l as f64,
                s.delta,
                s.t_m,
                s.f_min,
                s.time_mismatch,
            ]
        })
        .collect()
}

fn cmd_scan_approx(args: ScanApproxArgs) -> Result<i32> {
    let start = std::time::Instant::now();
    let solutions = if args.all {
        approximate_mapping_scan_all(args.tmax, args.fmin, args.omega_stage)?
    } else {
        approximate_mapping_scan(args.tmax, args.fmin, args.omega_stage)?
    };
    let header: Vec<String> = ["k", "theta", "l", "delta", "t_m", "f_min", "time_mismatch"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_csv(&args.out, &header, &scan_csv_rows(&solutions))?;

    let distinct: std::collections::BTreeSet<String> =
        solutions.iter().map(|s| detuning_key(s.delta)).collect();
    println!(
        "{} solutions ({} distinct detunings) below t = {} with f_min >= {} in {:.2} s",
        solutions.len(),
        distinct.len(),
        args.tmax,
        args.fmin,
        start.elapsed().as_secs_f64()
    );
    if let Some(best) = solutions.first() {
        println!(
            "shortest: (k, theta, l) = ({}, {}, {}), delta = {}, t_m = {}, f_min = {}",
            best.k,
            best.theta,
            best.l,
            format_sci(best.delta),
            format_sci(best.t_m),
            format_sci(best.f_min)
        );
    }
    Ok(0)
}

fn cmd_scan_diophantine(args: ScanDiophantineArgs) -> Result<i32> {
    let start = std::time::Instant::now();
    let solutions = diophantine_scan(args.kmax, args.thetamax, args.lmax)?;
    println!(
        "{} solutions for k <= {}, odd theta <= {}, l <= {} in {:.2} s",
        solutions.len(),
        args.kmax,
        args.thetamax,
        args.lmax,
        start.elapsed().as_secs_f64()
    );
    for (k, theta, l) in &solutions {
        println!("  (k, theta, l) = ({k}, {theta}, {l})");
    }
    Ok(0)
}

fn cmd_optimize(args: OptimizeArgs) -> Result<i32> {
    let config = load_config(&args.plan)?;
    let plan = config.resolve_plan()?;
    let params = config.params.to_system();
    let mode = match &args.mode {
        Some(m) => parse_mode(m)?,
        None => config.mode()?,
    };
    let free: Vec<FreeCoord> = args
        .free
        .split(',')
        .map(FreeCoord::parse)
        .collect::<Result<Vec<_>>>()?;
    let metric = if args.compensated {
        Metric::CompensatedMeasured
    } else {
        Metric::Conditional
    };
    let grid = (config.options.grid_chi, config.options.grid_phi);
    let seed = args.seed.unwrap_or(config.options.seed);

    let seed_report = min_fidelity_with_metric(&plan, &params, grid, mode, metric)?;
    let (tuned, report) = fine_tune(&plan, &params, &free, args.budget, seed, grid, mode, metric)?;
    println!("seed  f_min = {} (1 - f = {})", format_sci(seed_report.f_min), format_sci(1.0 - seed_report.f_min));
    println!("tuned f_min = {} (1 - f = {})", format_sci(report.f_min), format_sci(1.0 - report.f_min));
    println!(
        "tuned worst input: chi = {}, phi = {}, success probability = {}",
        format_sci(report.worst_input.chi),
        format_sci(report.worst_input.phi_rel),
        format_sci(report.success_prob_at_worst)
    );
    print_plan_table(&tuned);
    if let Some(path) = &args.out {
        let doc = plan_document(&tuned, &config.params);
        std::fs::write(path, doc)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        println!("tuned plan written to {}", path.display());
    }
    Ok(0)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<i32> {
    let opts = reproduce::CaseOpts {
        out_dir: args.out_dir.clone(),
        k: args.k,
        theta: args.theta,
        omega1: args.omega1,
        physical: args.physical,
        budget: args.budget,
        seed: args.seed,
    };
    let cases: Vec<&str> = if args.case == "all" {
        reproduce::CASES.to_vec()
    } else {
        vec![args.case.as_str()]
    };
    let mut failures = 0usize;
    for case in cases {
        let report = reproduce::run_case(case, &opts)?;
        for note in &report.notes {
            println!("[NOTE] {}: {note}", report.name);
        }
        for check in &report.checks {
            let tag = if check.pass { "PASS" } else { "FAIL" };
            println!("[{tag}] {}: {}: {}", report.name, check.label, check.detail);
            if !check.pass {
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("error: reproduce failed {failures} check(s)");
        return Ok(1);
    }
    Ok(0)
}
