//! Fidelity metrics, worst-case input search, and derivative-free fine
//! tuning of pulse programs under damping.
//!
//! The conditional (post-selected) fidelity is the squared overlap of the
//! normalized no-jump final state with the target `alpha |01> + beta |00>`;
//! the squared norm of the unnormalized state is the post-selection success
//! probability. The worst case over input qubits is found by exploiting
//! linearity: the two basis inputs are propagated once and every input is
//! evaluated from the cached outputs.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::ProtocolPlan;
use crate::error::{Error, Result};
use crate::hilbert::{FockBasis, StateVector, SystemParams, TAU};
use crate::optim::nelder_mead;
use crate::propagate::{run_protocol, Mode};

use std::f64::consts::PI;

/// Input qubit `alpha |10> + beta |00>` parameterized on the Bloch sphere:
/// `alpha = cos(chi/2)`, `beta = e^{i phi} sin(chi/2)`.
#[derive(Debug, Clone, Copy)]
pub struct InputQubit {
    pub chi: f64,
    pub phi_rel: f64,
}

impl InputQubit {
    pub fn new(chi: f64, phi_rel: f64) -> Self {
        Self {
            chi,
            phi_rel: phi_rel.rem_euclid(TAU),
        }
    }

    pub fn alpha(&self) -> C64 {
        C64::new((self.chi / 2.0).cos(), 0.0)
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar((self.chi / 2.0).sin(), self.phi_rel)
    }
}

/// Worst-case fidelity search result.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub f_min: f64,
    pub worst_input: InputQubit,
    /// Squared norm of the unnormalized final state at the worst input.
    pub success_prob_at_worst: f64,
    pub grid: (usize, usize),
    pub refined: bool,
}

/// Fidelity metric used by the worst-case search and the tuner.
#[derive(Debug, Clone, Copy)]
pub enum Metric {
    /// Post-selected overlap with the bare target.
    Conditional,
    /// Overlap with a target whose `|01>` component is rescaled by a fixed,
    /// known attenuation factor.
    Compensated(f64),
    /// As `Compensated`, with the factor calibrated from the propagated
    /// basis outputs of the plan under evaluation.
    CompensatedMeasured,
}

/// Conditional fidelity of an unnormalized final state against
/// `alpha |01> + beta |00>`, along with the post-selection probability.
pub fn conditional_fidelity(psi: &StateVector, input: &InputQubit) -> Result<(f64, f64)> {
    let p_success = psi.norm_sq();
    if p_success <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let basis = FockBasis::new(psi.dimension() / 3 - 1);
    let overlap = input.alpha().conj() * psi.amplitudes[basis.index(0, 1)?]
        + input.beta().conj() * psi.amplitudes[basis.index(0, 0)?];
    Ok((overlap.norm_sqr() / p_success, p_success))
}

/// Fidelity against the rescaled target
/// `N (alpha d |01> + beta |00>)`, `N = (|alpha|^2 d^2 + |beta|^2)^{-1/2}`:
/// the known attenuation `d` of the `|01>` leg is treated as ideal.
pub fn compensated_fidelity(psi: &StateVector, input: &InputQubit, damping_factor: f64) -> Result<f64> {
    if !(damping_factor > 0.0 && damping_factor <= 1.0) {
        return Err(Error::Domain(format!(
            "damping_factor = {damping_factor} outside (0, 1]"
        )));
    }
    let p_success = psi.norm_sq();
    if p_success <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let basis = FockBasis::new(psi.dimension() / 3 - 1);
    let a = input.alpha();
    let b = input.beta();
    let norm_t = (a.norm_sqr() * damping_factor * damping_factor + b.norm_sqr()).sqrt();
    let overlap = (a.conj() * damping_factor * psi.amplitudes[basis.index(0, 1)?]
        + b.conj() * psi.amplitudes[basis.index(0, 0)?])
        / norm_t;
    Ok(overlap.norm_sqr() / p_success)
}

/// Attenuation of the `|01>` leg relative to the `|00>` leg predicted by the
/// factorized damping picture, `e^{-(kappa - gamma0 + gamma1) t_pi / 2}`.
pub fn damping_factor_formula(params: &SystemParams, t_pi: f64) -> f64 {
    (-(params.kappa - params.gamma0 + params.gamma1) * t_pi / 2.0).exp()
}

/// Propagated outputs of the two basis inputs, from which any input's
/// fidelity follows by linearity.
#[derive(Debug, Clone)]
pub struct ProtocolOutputs {
    /// `<01|psi_A>`, `<00|psi_A>` for input `|10>`.
    pub a1: C64,
    pub a0: C64,
    /// `<01|psi_B>`, `<00|psi_B>` for input `|00>`.
    pub b1: C64,
    pub b0: C64,
    pub norm_aa: f64,
    pub norm_bb: f64,
    pub cross_ab: C64,
}

impl ProtocolOutputs {
    pub fn compute(plan: &ProtocolPlan, params: &SystemParams, mode: Mode) -> Result<Self> {
        let n_max = match mode {
            Mode::Rwa => 1,
            Mode::Full => 3,
        };
        let basis = FockBasis::new(n_max);
        let psi_a = run_protocol(plan, params, &StateVector::basis_state(basis, 1, 0)?, mode)?;
        let psi_b = run_protocol(plan, params, &StateVector::basis_state(basis, 0, 0)?, mode)?;
        let i01 = basis.index(0, 1)?;
        let i00 = basis.index(0, 0)?;
        Ok(Self {
            a1: psi_a.amplitudes[i01],
            a0: psi_a.amplitudes[i00],
            b1: psi_b.amplitudes[i01],
            b0: psi_b.amplitudes[i00],
            norm_aa: psi_a.norm_sq(),
            norm_bb: psi_b.norm_sq(),
            cross_ab: psi_a.overlap(&psi_b),
        })
    }

    /// Calibrated attenuation of the `|01>` leg relative to the `|00>` leg.
    pub fn measured_damping_factor(&self) -> f64 {
        if self.b0.norm() <= 0.0 {
            return 1.0;
        }
        (self.a1.norm() / self.b0.norm()).min(1.0)
    }

    /// Fidelity and success probability for the input `(chi, phi)`.
    pub fn fidelity(&self, chi: f64, phi: f64, damping_factor: Option<f64>) -> (f64, f64) {
        let a = C64::new((chi / 2.0).cos(), 0.0);
        let b = C64::from_polar((chi / 2.0).sin(), phi);
        let norm = a.norm_sqr() * self.norm_aa
            + b.norm_sqr() * self.norm_bb
            + 2.0 * (a.conj() * b * self.cross_ab).re;
        if norm <= 0.0 {
            return (0.0, 0.0);
        }
        let amp01 = a * self.a1 + b * self.b1;
        let amp00 = a * self.a0 + b * self.b0;
        let overlap = match damping_factor {
            None => a.conj() * amp01 + b.conj() * amp00,
            Some(d) => {
                let norm_t = (a.norm_sqr() * d * d + b.norm_sqr()).sqrt();
                (a.conj() * d * amp01 + b.conj() * amp00) / norm_t
            }
        };
        (overlap.norm_sqr() / norm, norm)
    }
}

fn resolve_damping_factor(metric: Metric, outputs: &ProtocolOutputs) -> Option<f64> {
    match metric {
        Metric::Conditional => None,
        Metric::Compensated(d) => Some(d),
        Metric::CompensatedMeasured => Some(outputs.measured_damping_factor()),
    }
}

/// Worst-case fidelity over all input qubits under the chosen metric:
/// a `(chi, phi)` grid scan followed by simplex refinement.
pub fn min_fidelity_with_metric(
    plan: &ProtocolPlan,
    params: &SystemParams,
    grid: (usize, usize),
    mode: Mode,
    metric: Metric,
) -> Result<FidelityReport> {
    let (n_chi, n_phi) = grid;
    if n_chi < 8 || n_phi < 8 {
        return Err(Error::Domain("grid must be at least 8 x 8".into()));
    }
    let outputs = ProtocolOutputs::compute(plan, params, mode)?;
    let d = resolve_damping_factor(metric, &outputs);

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n_chi {
        let chi = PI * i as f64 / (n_chi - 1) as f64;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            let (f, _) = outputs.fidelity(chi, phi, d);
            if f < best.0 {
                best = (f, chi, phi);
            }
        }
    }

    let refine = nelder_mead(
        |x| outputs.fidelity(x[0], x[1], d).0,
        &[best.1, best.2],
        &[PI / (n_chi - 1) as f64, TAU / n_phi as f64],
        400,
    );
    let (f_refined, chi_r, phi_r) = (refine.value, refine.x[0], refine.x[1]);
    let (f_min, chi, phi) = if f_refined < best.0 {
        (f_refined, chi_r, phi_r)
    } else {
        (best.0, best.1, best.2)
    };

    // canonical worst-input coordinates
    let alpha = (chi / 2.0).cos();
    let beta = (chi / 2.0).sin();
    let chi_canon = 2.0 * beta.abs().atan2(alpha.abs());
    let phi_canon = if alpha * beta < 0.0 { phi + PI } else { phi };
    let worst = InputQubit::new(chi_canon, phi_canon);
    let (_, p_success) = outputs.fidelity(chi, phi, d);

    Ok(FidelityReport {
        f_min,
        worst_input: worst,
        success_prob_at_worst: p_success,
        grid,
        refined: true,
    })
}

/// Worst-case conditional fidelity; see [`min_fidelity_with_metric`].
pub fn min_fidelity(
    plan: &ProtocolPlan,
    params: &SystemParams,
    grid: (usize, usize),
    mode: Mode,
) -> Result<FidelityReport> {
    min_fidelity_with_metric(plan, params, grid, mode, Metric::Conditional)
}

/// Plan coordinate freed during fine tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeCoord {
    Delta,
    T1,
    TPi,
    PhiOmega,
    PhiPi,
}

impl FreeCoord {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "delta" => Ok(Self::Delta),
            "t1" => Ok(Self::T1),
            "t_pi" => Ok(Self::TPi),
            "phi_omega" => Ok(Self::PhiOmega),
            "Phi" | "phi_pi" => Ok(Self::PhiPi),
            other => Err(Error::Config(format!(
                "unknown free coordinate '{other}' (expected delta, t1, t_pi, phi_omega, Phi)"
            ))),
        }
    }

    fn get(&self, plan: &ProtocolPlan) -> f64 {
        match self {
            Self::Delta => plan.delta,
            Self::T1 => plan.t1,
            Self::TPi => plan.t_pi,
            Self::PhiOmega => plan.phi_omega,
            Self::PhiPi => plan.phi_pi,
        }
    }

    fn set(&self, plan: &mut ProtocolPlan, value: f64) {
        match self {
            Self::Delta => plan.delta = value,
            Self::T1 => plan.t1 = value,
            Self::TPi => plan.t_pi = value,
            Self::PhiOmega => plan.phi_omega = value,
            Self::PhiPi => plan.phi_pi = value,
        }
    }

    fn step(&self, plan: &ProtocolPlan) -> f64 {
        match self {
            Self::Delta => 0.02,
            Self::T1 => 0.3 * plan.t1.max(1e-6),
            Self::TPi => 0.003 * plan.t_pi.max(1e-3),
            Self::PhiOmega | Self::PhiPi => 0.03,
        }
    }
}

pub const ALL_FREE_COORDS: [FreeCoord; 5] = [
    FreeCoord::Delta,
    FreeCoord::T1,
    FreeCoord::TPi,
    FreeCoord::PhiOmega,
    FreeCoord::PhiPi,
];

/// Derivative-free maximization of the worst-case fidelity over the freed
/// plan coordinates: a simplex search with jittered restarts, deterministic
/// for a fixed seed and budget. Never returns a plan worse than the seed.
#[allow(clippy::too_many_arguments)]
pub fn fine_tune(
    seed_plan: &ProtocolPlan,
    params: &SystemParams,
    free: &[FreeCoord],
    budget: usize,
    rng_seed: u64,
    grid: (usize, usize),
    mode: Mode,
    metric: Metric,
) -> Result<(ProtocolPlan, FidelityReport)> {
    if budget < 100 {
        return Err(Error::Domain("budget must be >= 100".into()));
    }
    if free.is_empty() {
        return Err(Error::Domain("at least one free coordinate is required".into()));
    }
    let seed_report = min_fidelity_with_metric(seed_plan, params, grid, mode, metric)?;
    let mut best_plan = seed_plan.clone();
    let mut best_f = seed_report.f_min;

    let x0: Vec<f64> = free.iter().map(|c| c.get(seed_plan)).collect();
    let steps: Vec<f64> = free.iter().map(|c| c.step(seed_plan)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // jittered start points are drawn up front so the restarts can run on
    // the worker pool without losing determinism
    let restarts = 3;
    let per_restart = (budget / restarts).max(40);
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|restart| {
            if restart == 0 {
                x0.clone()
            } else {
                x0.iter()
                    .zip(steps.iter())
                    .map(|(x, s)| x + s * rng.gen_range(-0.5..0.5))
                    .collect()
            }
        })
        .collect();

    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|start| {
            let objective = |x: &[f64]| -> f64 {
                let mut plan = seed_plan.clone();
                for (coord, &v) in free.iter().zip(x.iter()) {
                    coord.set(&mut plan, v);
                }
                if plan.t1 <= 0.0 || plan.t_pi <= 0.0 {
                    return 1e9;
                }
                match min_fidelity_with_metric(&plan, params, grid, mode, metric) {
                    Ok(report) => -report.f_min,
                    Err(_) => 1e9,
                }
            };
            let result = nelder_mead(objective, start, &steps, per_restart);
            (result.x, result.value)
        })
        .collect();

    for (x, value) in results {
        if -value > best_f {
            best_f = -value;
            let mut plan = seed_plan.clone();
            for (coord, &v) in free.iter().zip(x.iter()) {
                coord.set(&mut plan, v);
            }
            best_plan = plan;
        }
    }
    let report = min_fidelity_with_metric(&best_plan, params, grid, mode, metric)?;
    Ok((best_plan, report))
}
