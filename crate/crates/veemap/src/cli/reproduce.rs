//! Named reproduction cases: each regenerates one published artifact (figure
//! data series or parameter-table row) into CSV/plan files and checks it
//! against stored expected values.
//!
//! Fidelity conventions: the toolkit's own metric is the squared overlap of
//! the normalized final state with the target (`f_sq`). The published
//! headline values follow the overlap-amplitude convention `f_amp =
//! sqrt(f_sq)`; the reported bounds match `1 - f_amp` analytically. The
//! table checks therefore compare `1 - f_amp` against the published bounds
//! and print both conventions. Bounds quoted to a single significant digit
//! carry one unit of that digit as tolerance where noted.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64 as C64;

use crate::design::{design_protocol, design_protocol_damped, detuning_family, ProtocolPlan};
use crate::error::{Error, Result};
use crate::evaluate::{fine_tune, min_fidelity_with_metric, FidelityReport, Metric, ALL_FREE_COORDS};
use crate::hilbert::{
    build_effective_hamiltonian, initial_state, FockBasis, StateVector, SystemParams, TAU,
};
use crate::optim::golden_min;
use crate::propagate::{
    check_cutoff_convergence, evolve_timedep, protocol_trajectory, sample_trajectory, Mode,
    Propagator,
};

use super::output::{format_sci, write_csv, write_trajectory};

pub const CASES: [&str; 10] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "tab-sec8", "tab-sec9", "tab-sec10", "tab-sec11",
    "tab-sec12",
];

#[derive(Debug, Clone)]
pub struct CaseOpts {
    pub out_dir: PathBuf,
    pub k: Option<u64>,
    pub theta: Option<u64>,
    pub omega1: Option<f64>,
    /// Run the long counter-rotating simulation at the physical frequency sum.
    pub physical: bool,
    pub budget: usize,
    pub seed: u64,
}

impl Default for CaseOpts {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            k: None,
            theta: None,
            omega1: None,
            physical: false,
            budget: 800,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub detail: String,
    pub pass: bool,
}

impl Check {
    fn le(label: &str, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            detail: format!("{} <= {}", format_sci(value), format_sci(bound)),
            pass: value <= bound,
        }
    }

    fn gt(label: &str, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            detail: format!("{} > {}", format_sci(value), format_sci(bound)),
            pass: value > bound,
        }
    }

    fn within(label: &str, value: f64, target: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            detail: format!(
                "{} = {} +/- {}",
                format_sci(value),
                format_sci(target),
                format_sci(tol)
            ),
            pass: (value - target).abs() <= tol,
        }
    }

    fn in_range(label: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            detail: format!("{} in [{}, {}]", format_sci(value), format_sci(lo), format_sci(hi)),
            pass: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_case(name: &str, opts: &CaseOpts) -> Result<CaseReport> {
    match name {
        "fig2" => fig2(opts),
        "fig3" => fig3(opts),
        "fig4" => fig4(opts),
        "fig5" => fig5(opts),
        "fig6" => fig6(opts),
        "tab-sec8" => tab_sec8(opts),
        "tab-sec9" => tab_sec9(opts),
        "tab-sec10" => tab_sec10(opts),
        "tab-sec11" => tab_sec11(opts),
        "tab-sec12" => tab_sec12(opts),
        other => Err(Error::Config(format!(
            "unknown case '{other}' (expected one of {})",
            CASES.join(", ")
        ))),
    }
}

fn superposition_input(basis: FockBasis) -> Result<StateVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(initial_state(C64::new(r, 0.0), C64::new(r, 0.0), basis)?.0)
}

/// Transfer pulse alone: the dark-subspace mismatch leaves the intermediate
/// state populated at the end of the pulse.
fn fig2(opts: &CaseOpts) -> Result<CaseReport> {
    let k = opts.k.unwrap_or(1);
    let theta = opts.theta.unwrap_or(1);
    let (delta, t_pi, _) = detuning_family(k, theta)?;
    let params = SystemParams {
        omega_amp: 1.0,
        omega_phase: PI,
        delta,
        ..SystemParams::default()
    };
    let basis = FockBasis::new(1);
    let psi0 = superposition_input(basis)?;
    let traj = sample_trajectory(&params, &psi0, t_pi, 501, Mode::Rwa)?;
    write_trajectory(&opts.out_dir.join("fig2.csv"), basis, &traj)?;

    let last = traj.populations.last().expect("non-empty trajectory");
    let checks = vec![
        Check::gt("final population of |20> stays nonzero", last[2], 1e-3),
        Check::le("unitarity: |norm - 1|", (traj.norms.last().unwrap() - 1.0).abs(), 1e-10),
    ];
    Ok(CaseReport {
        name: "fig2".into(),
        checks,
        notes: vec![format!("(k, theta) = ({k}, {theta}), delta = {}", format_sci(delta))],
    })
}

/// Two-stage protocol: all three unwanted populations end near zero.
fn fig3(opts: &CaseOpts) -> Result<CaseReport> {
    let k = opts.k.unwrap_or(1);
    let theta = opts.theta.unwrap_or(1);
    let omega1 = opts.omega1.unwrap_or(1000.0);
    let plan = design_protocol(k, theta, omega1)?;
    let params = SystemParams::default();
    let basis = FockBasis::new(1);
    let psi0 = superposition_input(basis)?;
    let traj = protocol_trajectory(&plan, &params, &psi0, 1001, Mode::Rwa, 1e-10)?;
    write_trajectory(&opts.out_dir.join("fig3.csv"), basis, &traj)?;

    let last = traj.populations.last().expect("non-empty trajectory");
    let checks = vec![
        Check::le("final population of |20>", last[2], 1e-5),
        Check::le("final population of |21>", last[5], 1e-5),
        Check::le("final population of |10>", last[1], 1e-5),
    ];
    Ok(CaseReport {
        name: "fig3".into(),
        checks,
        notes: vec![format!(
            "(k, theta, omega1) = ({k}, {theta}, {omega1}); t1 = {}, t_pi = {}",
            format_sci(plan.t1),
            format_sci(plan.t_pi)
        )],
    })
}

/// Refine every interior local minimum of `f` found on a uniform sample.
fn refined_minima<F: Fn(f64) -> f64>(f: &F, t_max: f64, n: usize) -> Vec<(f64, f64)> {
    let ts: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut minima = Vec::new();
    for i in 1..n - 1 {
        if ys[i] < ys[i - 1] && ys[i] <= ys[i + 1] {
            let (t, y) = golden_min(f, ts[i - 1], ts[i + 1], 150);
            minima.push((t, y));
        }
    }
    minima
}

fn pop21_pulse(params: &SystemParams) -> Result<impl Fn(f64) -> f64> {
    let basis = FockBasis::new(1);
    let h = build_effective_hamiltonian(params, basis)?;
    let prop = Propagator::new(&h);
    let psi0 = StateVector::basis_state(basis, 1, 0)?;
    Ok(move |t: f64| prop.apply(&psi0, t).amplitudes[5].norm_sqr())
}

/// Cavity decay alone: the intermediate-state population dips periodically
/// but never reaches zero.
fn fig4(opts: &CaseOpts) -> Result<CaseReport> {
    let params = SystemParams {
        omega_amp: 1.0,
        omega_phase: PI,
        delta: 4.0,
        kappa: 0.1,
        ..SystemParams::default()
    };
    let basis = FockBasis::new(1);
    let psi0 = StateVector::basis_state(basis, 1, 0)?;
    let traj = sample_trajectory(&params, &psi0, 20.0, 2001, Mode::Rwa)?;
    write_trajectory(&opts.out_dir.join("fig4.csv"), basis, &traj)?;

    let pop21 = pop21_pulse(&params)?;
    let minima = refined_minima(&pop21, 20.0, 2001);
    let mut checks = vec![Check::gt("number of local minima", minima.len() as f64, 4.0)];
    let lowest = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    checks.push(Check::gt("every local minimum of pop(|21>) stays positive", lowest, 1e-10));
    Ok(CaseReport {
        name: "fig4".into(),
        checks,
        notes: vec![format!("lowest refined minimum = {}", format_sci(lowest))],
    })
}

/// Equal atomic decay rates restore near-zero dips of the intermediate-state
/// population.
fn fig5(opts: &CaseOpts) -> Result<CaseReport> {
    let params = SystemParams {
        omega_amp: 1.0,
        omega_phase: PI,
        delta: 4.0,
        kappa: 0.1,
        gamma0: 0.05,
        gamma1: 0.05,
        ..SystemParams::default()
    };
    let basis = FockBasis::new(1);
    let psi0 = StateVector::basis_state(basis, 1, 0)?;
    let traj = sample_trajectory(&params, &psi0, 20.0, 2001, Mode::Rwa)?;
    write_trajectory(&opts.out_dir.join("fig5.csv"), basis, &traj)?;

    let pop21 = pop21_pulse(&params)?;
    let minima = refined_minima(&pop21, 20.0, 2001);
    let lowest = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::gt("number of local minima", minima.len() as f64, 4.0),
        Check::le("lowest minimum of pop(|21>) returns below", lowest, 1e-6),
    ];
    Ok(CaseReport {
        name: "fig5".into(),
        checks,
        notes: vec![format!("lowest refined minimum = {}", format_sci(lowest))],
    })
}

/// Maximum deviation between the counter-rotating and effective dynamics
/// during the shift pulse, sampled densely over the pulse.
fn counter_rotating_error(omega_sum: f64, omega1: f64, delta: f64, t1: f64, phi_omega: f64) -> Result<f64> {
    let n_max = 3;
    let basis = FockBasis::new(n_max);
    let params = SystemParams {
        omega_amp: omega1,
        omega_phase: phi_omega,
        delta,
        omega_sum: Some(omega_sum),
        ..SystemParams::default()
    };
    let rwa_params = SystemParams {
        omega_sum: None,
        ..params.clone()
    };
    let h_rwa = build_effective_hamiltonian(&rwa_params, basis)?;
    let prop_rwa = Propagator::new(&h_rwa);
    let psi0 = StateVector::basis_state(basis, 1, 0)?;

    let step = (TAU / omega_sum) / 40.0;
    let n_steps = (t1 / step).ceil() as usize;
    let mut psi_full = psi0.clone();
    let mut worst: f64 = 0.0;
    for i in 1..=n_steps {
        let t_prev = t1 * (i - 1) as f64 / n_steps as f64;
        let t = t1 * i as f64 / n_steps as f64;
        psi_full = evolve_timedep(&params, &psi_full, t_prev, t, 1e-10)?;
        let psi_rwa = prop_rwa.apply(&psi0, t);
        let overlap = psi_rwa.overlap(&psi_full).norm_sqr()
            / (psi_rwa.norm_sq() * psi_full.norm_sq());
        worst = worst.max(1.0 - overlap);
    }
    Ok(worst)
}

/// Counter-rotating error study. The physical frequency sums are far beyond
/// direct integration over a full transfer pulse, so the scaled sweep checks
/// the quadratic law `(2 Omega_1/omega_sum)^2` instead; `--physical` runs the
/// shift stage at the quantum-dot frequency sum and composes it with the
/// effective-dynamics transfer pulse.
fn fig6(opts: &CaseOpts) -> Result<CaseReport> {
    let plan = design_protocol(25, 1, 50.0)?;
    let mut rows = Vec::new();
    let mut eps = Vec::new();
    for omega_sum in [500.0, 1000.0, 2000.0] {
        let measured =
            counter_rotating_error(omega_sum, plan.omega1, plan.delta, plan.t1, plan.phi_omega)?;
        let predicted = (2.0 * plan.omega1 / omega_sum).powi(2);
        rows.push(vec![omega_sum, measured, predicted, measured / predicted]);
        eps.push(measured);
    }
    write_csv(
        &opts.out_dir.join("fig6.csv"),
        &["omega_sum".into(), "eps2_measured".into(), "eps2_predicted".into(), "ratio".into()],
        &rows,
    )?;

    let mut checks = Vec::new();
    for (row, label) in rows.iter().zip(["500", "1000", "2000"]) {
        checks.push(Check::in_range(
            &format!("eps2 at omega_sum = {label} g vs (2 Omega_1/omega_sum)^2"),
            row[3],
            0.5,
            2.0,
        ));
    }
    checks.push(Check::in_range("eps2(500)/eps2(1000) near 4", eps[0] / eps[1], 2.0, 8.0));
    checks.push(Check::in_range("eps2(1000)/eps2(2000) near 4", eps[1] / eps[2], 2.0, 8.0));

    // coupling-leak error at the amplitude where its bound crosses 1e-5
    let plan633 = design_protocol(25, 1, 633.0)?;
    let params = SystemParams {
        omega_amp: plan633.omega1,
        omega_phase: plan633.phi_omega,
        delta: plan633.delta,
        ..SystemParams::default()
    };
    let basis = FockBasis::new(1);
    let h = build_effective_hamiltonian(&params, basis)?;
    let prop = Propagator::new(&h);
    let psi0 = StateVector::basis_state(basis, 1, 0)?;
    let nu = ((plan633.delta / 2.0).powi(2) + plan633.omega1.powi(2) + 1.0).sqrt();
    let t_window = 1.3;
    let n = (t_window * nu / (PI / 40.0)).ceil() as usize;
    let mut eps1: f64 = 0.0;
    for i in 0..=n {
        let t = t_window * i as f64 / n as f64;
        let leak = 1.0 - prop.apply(&psi0, t).amplitudes[1].norm_sqr();
        eps1 = eps1.max(leak);
    }
    checks.push(Check::in_range("eps1 at Omega_1 = 633 g vs 1e-5", eps1, 5e-6, 2e-5));

    let converged = check_cutoff_convergence(
        &SystemParams {
            omega_amp: plan.omega1,
            omega_phase: plan.phi_omega,
            delta: plan.delta,
            omega_sum: Some(1000.0),
            ..SystemParams::default()
        },
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        plan.t1,
        3,
        1e-8,
    )?;
    checks.push(Check {
        label: "photon cutoff converged (n_max = 3 vs 4)".into(),
        detail: format!("{converged}"),
        pass: converged,
    });

    let mut notes = vec![
        "physical frequency sums make the full transfer pulse infeasible to integrate directly; \
         the scaled sweep verifies the quadratic error law instead"
            .into(),
    ];
    if opts.physical {
        notes.push(physical_quantum_dot_run()?);
    }
    Ok(CaseReport {
        name: "fig6".into(),
        checks,
        notes,
    })
}

/// Shift stage integrated with counter-rotating terms at the quantum-dot
/// frequency sum, composed with the effective-dynamics transfer pulse.
fn physical_quantum_dot_run() -> Result<String> {
    let omega_sum = 6.4e4;
    let plan = design_protocol(60, 1, 62.0)?;
    let basis = FockBasis::new(3);
    let stage_a = SystemParams {
        omega_amp: plan.omega1,
        omega_phase: plan.phi_omega,
        delta: plan.delta,
        omega_sum: Some(omega_sum),
        ..SystemParams::default()
    };
    let stage_b = SystemParams {
        omega_amp: 1.0,
        omega_phase: plan.phi_pi + PI,
        delta: plan.delta,
        ..SystemParams::default()
    };
    let h_b = build_effective_hamiltonian(&stage_b, basis)?;
    let prop_b = Propagator::new(&h_b);

    let run = |j: usize| -> Result<StateVector> {
        let psi0 = StateVector::basis_state(basis, j, 0)?;
        let mid = evolve_timedep(&stage_a, &psi0, 0.0, plan.t1, 1e-9)?;
        Ok(prop_b.apply(&mid, plan.t_pi))
    };
    let psi_a = run(1)?; // from |10>
    let psi_b = run(0)?; // from |00>

    let i01 = basis.index(0, 1)?;
    let i00 = basis.index(0, 0)?;
    let mut f_min: f64 = 1.0;
    for i in 0..=32 {
        let chi = PI * i as f64 / 32.0;
        for j in 0..32 {
            let phi = TAU * j as f64 / 32.0;
            let a = C64::new((chi / 2.0).cos(), 0.0);
            let b = C64::from_polar((chi / 2.0).sin(), phi);
            let amp01 = a * psi_a.amplitudes[i01] + b * psi_b.amplitudes[i01];
            let amp00 = a * psi_a.amplitudes[i00] + b * psi_b.amplitudes[i00];
            let mut norm = 0.0;
            for idx in 0..basis.dimension() {
                norm += (a * psi_a.amplitudes[idx] + b * psi_b.amplitudes[idx]).norm_sqr();
            }
            let f = (a.conj() * amp01 + b.conj() * amp00).norm_sqr() / norm;
            f_min = f_min.min(f);
        }
    }
    Ok(format!(
        "physical run at omega_sum = {omega_sum} g for (k, theta, omega1) = (60, 1, 62): \
         counter-rotating shift stage + effective transfer pulse gives worst-case \
         1 - f_sq = {}, 1 - f_amp = {} (transfer-pulse counter-rotating bound \
         (2 g/omega_sum)^2 ~ 1e-9 not included)",
        format_sci(1.0 - f_min),
        format_sci(1.0 - f_min.sqrt())
    ))
}

struct TableRow {
    plan: ProtocolPlan,
    report: FidelityReport,
}

fn row_csv(rows: &[TableRow]) -> (Vec<String>, Vec<Vec<f64>>) {
    let header: Vec<String> = [
        "k", "theta", "omega1", "delta", "t1", "t_pi", "phi_omega", "phi_pi", "f_sq", "f_amp",
        "success_prob",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let data = rows
        .iter()
        .map(|r| {
            vec![
                r.plan.k as f64,
                r.plan.theta as f64,
                r.plan.omega1,
                r.plan.delta,
                r.plan.t1,
                r.plan.t_pi,
                r.plan.phi_omega,
                r.plan.phi_pi,
                r.report.f_min,
                r.report.f_min.sqrt(),
                r.report.success_prob_at_worst,
            ]
        })
        .collect();
    (header, data)
}

const GRID: (usize, usize) = (64, 64);

/// Undamped protocol table: plan quantities and worst-case fidelities for the
/// four reference rows, plus the quadratic error scaling in `Omega_1`.
fn tab_sec8(opts: &CaseOpts) -> Result<CaseReport> {
    let params = SystemParams::default();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    // (k, theta, omega1; published (value, tolerance) per plan quantity;
    // bound on the overlap-amplitude deficit)
    type Row = (u64, u64, f64, [(f64, f64); 5], f64);
    let table: [Row; 4] = [
        (
            25,
            1,
            100.0,
            [
                (9.90148, 5e-5),
                (2.0e-3, 5e-5),
                (15.864, 1e-3),
                (0.01, 2e-3),
                (4.696, 2e-3),
            ],
            2e-6,
        ),
        (
            25,
            1,
            1000.0,
            [
                (9.90148, 5e-5),
                (1.993e-4, 2e-6),
                (15.8642, 1e-3),
                (0.001, 1e-3),
                (4.6966, 1e-3),
            ],
            2e-8,
        ),
        (
            1,
            1,
            100.0,
            [
                (1.633, 5e-5),
                (8.5e-3, 1e-4),
                (3.847, 1e-3),
                (0.007, 1e-3),
                (4.319, 2e-3),
            ],
            7e-5,
        ),
        (
            1,
            1,
            1000.0,
            [
                (1.633, 5e-5),
                (8.47e-4, 1e-5),
                (3.8476, 1e-3),
                (0.0007, 1e-3),
                (4.321, 2e-3),
            ],
            5e-7,
        ),
    ];

    let mut infid_amp = Vec::new();
    for (k, theta, omega1, published, bound) in table {
        let plan = design_protocol(k, theta, omega1)?;
        let label = format!("({k},{theta},{omega1})");
        let quantities = [plan.delta, plan.t1, plan.t_pi, plan.phi_omega, plan.phi_pi];
        let names = ["delta", "t1", "t_pi", "phi_omega", "Phi"];
        for ((value, name), (target, tol)) in quantities.iter().zip(names).zip(published) {
            checks.push(Check::within(&format!("{label} {name}"), *value, target, tol));
        }
        let report = min_fidelity_with_metric(&plan, &params, GRID, Mode::Rwa, Metric::Conditional)?;
        let deficit = 1.0 - report.f_min.sqrt();
        checks.push(Check::le(&format!("{label} 1 - f_amp"), deficit, bound));
        infid_amp.push(deficit);
        rows.push(TableRow { plan, report });
    }
    // quadratic scaling between omega1 = 100 and 1000 within a factor 3
    checks.push(Check::in_range(
        "(25,1) error ratio 100g/1000g vs 100",
        infid_amp[0] / infid_amp[1],
        100.0 / 3.0,
        300.0,
    ));
    checks.push(Check::in_range(
        "(1,1) error ratio 100g/1000g vs 100",
        infid_amp[2] / infid_amp[3],
        100.0 / 3.0,
        300.0,
    ));

    let (header, data) = row_csv(&rows);
    write_csv(&opts.out_dir.join("tab_sec8.csv"), &header, &data)?;
    Ok(CaseReport {
        name: "tab-sec8".into(),
        checks,
        notes: vec![
            "published fidelity bounds follow the overlap-amplitude convention; \
             squared-metric values are in the CSV"
                .into(),
        ],
    })
}

struct DampedSet {
    label: &'static str,
    k: u64,
    theta: u64,
    omega1: f64,
    kappa: f64,
    gamma0: f64,
    gamma1: f64,
    metric: Metric,
    /// Bound on the tuned worst-case deficit and the convention it uses.
    bound_sq: Option<f64>,
    bound_amp: Option<f64>,
    note: &'static str,
}

fn run_damped_set(
    set: &DampedSet,
    opts: &CaseOpts,
    plan_file: &str,
    checks: &mut Vec<Check>,
    notes: &mut Vec<String>,
) -> Result<TableRow> {
    let params = SystemParams {
        kappa: set.kappa,
        gamma0: set.gamma0,
        gamma1: set.gamma1,
        ..SystemParams::default()
    };
    let seed_plan = design_protocol_damped(set.k, set.theta, set.omega1, set.kappa, set.gamma0, set.gamma1)?;
    let seed_report = min_fidelity_with_metric(&seed_plan, &params, GRID, Mode::Rwa, set.metric)?;
    let (plan, report) = fine_tune(
        &seed_plan,
        &params,
        &ALL_FREE_COORDS,
        opts.budget,
        opts.seed,
        GRID,
        Mode::Rwa,
        set.metric,
    )?;
    if let Some(bound) = set.bound_sq {
        checks.push(Check::gt(&format!("{} tuned f_sq", set.label), report.f_min, 1.0 - bound));
    }
    if let Some(bound) = set.bound_amp {
        checks.push(Check::le(
            &format!("{} tuned 1 - f_amp", set.label),
            1.0 - report.f_min.sqrt(),
            bound,
        ));
    }
    notes.push(format!(
        "{}: seed f_sq = {}, tuned f_sq = {}, tuned (delta, t1, t_pi, phi_omega, Phi) = \
         ({}, {}, {}, {}, {}){}",
        set.label,
        format_sci(seed_report.f_min),
        format_sci(report.f_min),
        format_sci(plan.delta),
        format_sci(plan.t1),
        format_sci(plan.t_pi),
        format_sci(plan.phi_omega),
        format_sci(plan.phi_pi),
        set.note,
    ));
    if matches!(set.metric, Metric::CompensatedMeasured) {
        let outputs = crate::evaluate::ProtocolOutputs::compute(&plan, &params, Mode::Rwa)?;
        let conditional =
            min_fidelity_with_metric(&plan, &params, GRID, Mode::Rwa, Metric::Conditional)?;
        notes.push(format!(
            "{}: calibrated attenuation factor = {} (factorized prediction {}), \
             uncompensated f_sq = {}",
            set.label,
            format_sci(outputs.measured_damping_factor()),
            format_sci(crate::evaluate::damping_factor_formula(&params, plan.t_pi)),
            format_sci(conditional.f_min),
        ));
    }
    let env = crate::cli::config::EnvParams {
        kappa: set.kappa,
        gamma0: set.gamma0,
        gamma1: set.gamma1,
        omega_sum: None,
    };
    let doc = crate::cli::config::plan_document(&plan, &env);
    let path = opts.out_dir.join(plan_file);
    std::fs::create_dir_all(&opts.out_dir)
        .and_then(|_| std::fs::write(&path, doc))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(TableRow { plan, report })
}

/// Cavity-decay table: corrected designs reach the headline fidelity after
/// fine tuning.
fn tab_sec9(opts: &CaseOpts) -> Result<CaseReport> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    // analytic corrections for the first set, checked before tuning
    let seed = design_protocol_damped(25, 1, 1000.0, 7e-4, 0.0, 0.0)?;
    checks.push(Check::within("set1 corrected delta", seed.delta, 9.89055, 1e-4));
    checks.push(Check::within("set1 t1", seed.t1, 2e-4, 5e-6));
    checks.push(Check::within("set1 t_pi", seed.t_pi, 15.882, 2e-3));
    checks.push(Check::within("set1 phi_omega", seed.phi_omega, 0.008, 1e-3));
    checks.push(Check::within("set1 Phi", seed.phi_pi, 4.696, 1e-3));

    let sets = [
        DampedSet {
            label: "set1 (25,1) kappa=7e-4",
            k: 25,
            theta: 1,
            omega1: 1000.0,
            kappa: 7e-4,
            gamma0: 0.0,
            gamma1: 0.0,
            metric: Metric::Conditional,
            bound_sq: Some(1e-5),
            bound_amp: None,
            note: "; published optimum delta = 9.89055",
        },
        DampedSet {
            label: "set2 (1,1) kappa=2.6e-3",
            k: 1,
            theta: 1,
            omega1: 1000.0,
            kappa: 2.6e-3,
            gamma0: 0.0,
            gamma1: 0.0,
            metric: Metric::Conditional,
            bound_sq: Some(1e-5),
            bound_amp: None,
            note: "; published optimum (delta, t1, t_pi) = (1.630, 8.48e-4, 3.85)",
        },
    ];
    let mut rows = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let plan_file = format!("tab_sec9_set{}_plan.toml", i + 1);
        rows.push(run_damped_set(set, opts, &plan_file, &mut checks, &mut notes)?);
    }
    let (header, data) = row_csv(&rows);
    write_csv(&opts.out_dir.join("tab_sec9.csv"), &header, &data)?;
    Ok(CaseReport {
        name: "tab-sec9".into(),
        checks,
        notes,
    })
}

/// Atomic-decay table: decay-assisted sets and the compensated large-kappa
/// set reach the headline fidelity after fine tuning.
fn tab_sec10(opts: &CaseOpts) -> Result<CaseReport> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let sets = [
        DampedSet {
            label: "set1 (25,1) kappa=gamma0=1.7e-3 gamma1=7e-4",
            k: 25,
            theta: 1,
            omega1: 1000.0,
            kappa: 1.7e-3,
            gamma0: 1.7e-3,
            gamma1: 7e-4,
            metric: Metric::Conditional,
            bound_sq: Some(1e-5),
            bound_amp: None,
            note: "; published optimum delta = 9.8568",
        },
        DampedSet {
            label: "set2 (1,1) kappa=4.9e-3 gamma0=9.2e-3 gamma1=2e-3",
            k: 1,
            theta: 1,
            omega1: 1000.0,
            kappa: 4.9e-3,
            gamma0: 9.2e-3,
            gamma1: 2e-3,
            metric: Metric::Conditional,
            bound_sq: Some(1e-5),
            bound_amp: None,
            note: "; published optimum delta = 1.619",
        },
        DampedSet {
            label: "set3 compensated (1,1) kappa=1.8e-2 gamma0=gamma1=9e-3",
            k: 1,
            theta: 1,
            omega1: 1000.0,
            kappa: 1.8e-2,
            gamma0: 9e-3,
            gamma1: 9e-3,
            metric: Metric::CompensatedMeasured,
            bound_sq: Some(1e-5),
            bound_amp: None,
            note: "; published optimum delta = 1.613; attenuation compensated with the calibrated factor",
        },
    ];
    let mut rows = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let plan_file = format!("tab_sec10_set{}_plan.toml", i + 1);
        rows.push(run_damped_set(set, opts, &plan_file, &mut checks, &mut notes)?);
    }
    let (header, data) = row_csv(&rows);
    write_csv(&opts.out_dir.join("tab_sec10.csv"), &header, &data)?;
    Ok(CaseReport {
        name: "tab-sec10".into(),
        checks,
        notes,
    })
}

/// Quantum-dot table: moderate shift amplitude at large detuning, undamped
/// and damped.
fn tab_sec11(opts: &CaseOpts) -> Result<CaseReport> {
    let mut checks = Vec::new();
    let mut notes = vec![
        "bounds quoted to one significant digit carry one unit of that digit".into(),
    ];
    let params = SystemParams::default();
    let plan = design_protocol(60, 1, 62.0)?;
    checks.push(Check::within("(60,1,62) delta", plan.delta, 15.4278, 5e-4));
    checks.push(Check::within("(60,1,62) t1", plan.t1, 2.08e-3, 2e-5));
    checks.push(Check::within("(60,1,62) t_pi", plan.t_pi, 24.435, 1e-3));
    checks.push(Check::within("(60,1,62) phi_omega", plan.phi_omega, 0.016, 1e-3));
    checks.push(Check::within("(60,1,62) Phi", plan.phi_pi, 4.705, 2e-3));
    let report = min_fidelity_with_metric(&plan, &params, GRID, Mode::Rwa, Metric::Conditional)?;
    checks.push(Check::le(
        "(60,1,62) 1 - f_amp vs 2e-6 + digit",
        1.0 - report.f_min.sqrt(),
        3e-6,
    ));
    let mut rows = vec![TableRow { plan, report }];

    let set = DampedSet {
        label: "damped (60,1,62) kappa=3.4e-4 gamma0=3.7e-4 gamma1=3.5e-4",
        k: 60,
        theta: 1,
        omega1: 62.0,
        kappa: 3.4e-4,
        gamma0: 3.7e-4,
        gamma1: 3.5e-4,
        metric: Metric::Conditional,
        bound_sq: None,
        bound_amp: Some(8e-6),
        note: "; published optimum (delta, t1, t_pi) = (15.4141, 2.08e-3, 24.457)",
    };
    rows.push(run_damped_set(&set, opts, "tab_sec11_damped_plan.toml", &mut checks, &mut notes)?);

    let (header, data) = row_csv(&rows);
    write_csv(&opts.out_dir.join("tab_sec11.csv"), &header, &data)?;
    Ok(CaseReport {
        name: "tab-sec11".into(),
        checks,
        notes,
    })
}

/// Feasibility table: compensated operation at experimentally demanding
/// rates.
fn tab_sec12(opts: &CaseOpts) -> Result<CaseReport> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let set = DampedSet {
        label: "feasibility (1,1,166) kappa=3.2e-2 gamma0=gamma1=1.6e-2 compensated",
        k: 1,
        theta: 1,
        omega1: 166.0,
        kappa: 3.2e-2,
        gamma0: 1.6e-2,
        gamma1: 1.6e-2,
        metric: Metric::CompensatedMeasured,
        bound_sq: None,
        bound_amp: Some(1.3e-4),
        note: "; published optimum (delta, t1, t_pi) = (1.599, 5.04e-3, 3.888)",
    };
    let row = run_damped_set(&set, opts, "tab_sec12_plan.toml", &mut checks, &mut notes)?;
    let (header, data) = row_csv(std::slice::from_ref(&row));
    write_csv(&opts.out_dir.join("tab_sec12.csv"), &header, &data)?;
    Ok(CaseReport {
        name: "tab-sec12".into(),
        checks,
        notes,
    })
}
