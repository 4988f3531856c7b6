//! Pulse-program design: the discrete detuning family of the transfer pulse,
//! the integer-matching nonexistence scan, the approximate single-pulse
//! search, and the two-stage protocol planner with cavity-decay corrections.
//!
//! Everything in this module works in units of `g` (`g = 1`, times in `1/g`)
//! and assumes a real positive coupling.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{bright_amplitudes, dark_amplitudes};
use crate::error::{Error, Result};
use crate::hilbert::{SystemParams, TAU};
use crate::optim::golden_max;

/// Two-stage pulse program.
///
/// Stage A drives `Omega = omega1 e^{i phi_omega}` for `t1`; stage B drives
/// `Omega = -g e^{i phi_pi}` for `t_pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPlan {
    pub k: u64,
    pub theta: u64,
    /// Detuning (fine-tuned when `damped`).
    pub delta: f64,
    /// Evolution-shift stage duration.
    pub t1: f64,
    /// Transfer-pulse duration.
    pub t_pi: f64,
    /// Stage-A laser amplitude.
    pub omega1: f64,
    /// Stage-A laser phase.
    pub phi_omega: f64,
    /// Stage-B phase offset.
    pub phi_pi: f64,
    /// Whether decay corrections were applied when the plan was built.
    pub damped: bool,
}

impl ProtocolPlan {
    /// Quality metric: the shift stage should be much shorter than the
    /// transfer pulse.
    pub fn t1_ratio(&self) -> f64 {
        self.t1 / self.t_pi
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_multiple_of(2) {
            return Err(Error::Config("theta must be odd".into()));
        }
        if !(self.t1 > 0.0) {
            return Err(Error::Config("t1 must be > 0".into()));
        }
        if !(self.t_pi > 0.0) {
            return Err(Error::Config("t_pi must be > 0".into()));
        }
        if !(self.omega1 > 0.0) {
            return Err(Error::Config("omega1 must be > 0".into()));
        }
        Ok(())
    }
}

/// Intermediate design quantities of the evolution-shift construction.
#[derive(Debug, Clone)]
pub struct PhaseLedger {
    /// Moduli of the dark-state decomposition; `eta0^2 + eta1^2 = 1`.
    pub eta0_mod: f64,
    pub eta1_mod: f64,
    /// Arguments of the shift-stage output on `|00>` and `|20>`.
    pub theta0: f64,
    pub theta1: f64,
    /// Arguments of the pre-image state on `|00>` and `|20>`.
    pub phi0: f64,
    pub phi1: f64,
    /// Global phase `Delta/2 (t1 + t_pi) + theta0 - phi0`, reported mod 2 pi.
    pub big_theta: f64,
    /// Branch parity of `phi0`: even for `cos(nu'_pi t_pi) > 0`, odd below.
    pub k_prime: i64,
    /// Branch parity of `phi_omega`: even for `sin(nu'_pi t_pi) > 0`.
    pub m: i64,
    /// Integer closing the phase-matching condition; recorded only.
    pub l_prime: i64,
    /// Shift-stage duration implied by the moduli match.
    pub t1: f64,
    /// Stage-A laser phase.
    pub phi_omega: f64,
    pub delta: f64,
    pub t_pi: f64,
}

/// Single-pulse approximate mapping candidate.
#[derive(Debug, Clone)]
pub struct MappingSolution {
    pub k: u64,
    pub theta: u64,
    pub l: u64,
    pub delta: f64,
    /// Operation time after the one-dimensional refinement.
    pub t_m: f64,
    /// Worst-case fidelity over input states at `t_m`.
    pub f_min: f64,
    /// `|t_pi - t'_pi|`, the timing mismatch being split.
    pub time_mismatch: f64,
}

fn mod_tau(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// Detuning family of the perfect transfer pulse.
///
/// `(Delta / 2)^2 = 2 zeta^2 / (2 zeta + 1)` with `zeta = k / theta`, and
/// `t_pi = (theta + k) pi / nu`, `nu = sqrt((Delta/2)^2 + 2)`. For `k >= 1`
/// the same time equals `2 k pi / Delta`. Returns `(Delta, t_pi, nu)` with
/// `Delta >= 0`.
pub fn detuning_family(k: u64, theta: u64) -> Result<(f64, f64, f64)> {
    if theta == 0 || theta.is_multiple_of(2) {
        return Err(Error::Domain(format!("theta = {theta} must be a positive odd integer")));
    }
    let zeta = k as f64 / theta as f64;
    let delta = 2.0 * (2.0 * zeta * zeta / (2.0 * zeta + 1.0)).sqrt();
    let nu = ((delta / 2.0).powi(2) + 2.0).sqrt();
    let t_pi = (theta + k) as f64 * PI / nu;
    Ok((delta, t_pi, nu))
}

/// Exact check of `k^2 + (theta + k)^2 = 2 l^2`.
pub fn is_diophantine_solution(k: u64, theta: u64, l: u64) -> Result<bool> {
    let s = k
        .checked_mul(k)
        .and_then(|a| {
            (theta + k)
                .checked_mul(theta + k)
                .and_then(|b| a.checked_add(b))
        })
        .ok_or_else(|| Error::Numeric("integer overflow in timing equation; widen the integer width".into()))?;
    let rhs = l
        .checked_mul(l)
        .and_then(|x| x.checked_mul(2))
        .ok_or_else(|| Error::Numeric("integer overflow in timing equation; widen the integer width".into()))?;
    Ok(s == rhs)
}

/// Exhaustive exact-integer search for simultaneous transfer/return timing,
/// `k^2 + (theta + k)^2 = 2 l^2` with `theta` odd. Expected empty: `k` and
/// `theta + k` always have opposite parity, so the left side is odd.
pub fn diophantine_scan(k_max: u64, theta_max: u64, l_max: u64) -> Result<Vec<(u64, u64, u64)>> {
    if k_max < 1 || theta_max < 1 || l_max < 1 {
        return Err(Error::Domain("scan bounds must be >= 1".into()));
    }
    let mut found = Vec::new();
    let mut theta = 1u64;
    while theta <= theta_max {
        for k in 0..=k_max {
            let s = k
                .checked_mul(k)
                .and_then(|a| {
                    (theta + k)
                        .checked_mul(theta + k)
                        .and_then(|b| a.checked_add(b))
                })
                .ok_or_else(|| {
                    Error::Numeric("integer overflow in timing equation; widen the integer width".into())
                })?;
            if !s.is_multiple_of(2) {
                continue;
            }
            let half = s / 2;
            let l = half.isqrt();
            if l * l == half && l >= 1 && l <= l_max {
                found.push((k, theta, l));
            }
        }
        theta += 2;
    }
    Ok(found)
}

/// Worst-case mapping fidelity of a single rectangular pulse at time `t`,
/// maximized over the free phase of the `|01>` target component.
///
/// With the free phase aligned, the fidelity for input `alpha |10> +
/// beta |00>` is `(|alpha|^2 |b| + |beta|^2 |d00|)^2`, monotone between the
/// pure-input values, so the minimum over inputs is `min(|b|^2, |d00|^2)`.
pub fn single_pulse_min_fidelity(params: &SystemParams, t: f64) -> f64 {
    let b = bright_amplitudes(params, t)
        .map(|a| a.b.norm_sqr())
        .unwrap_or(0.0);
    let (d00, _) = dark_amplitudes(params, t);
    b.min(d00.norm_sqr())
}

fn scan_candidate(
    k: u64,
    theta: u64,
    omega_stage: f64,
    f_threshold: f64,
) -> Result<Option<MappingSolution>> {
    let (delta, t_pi, _) = detuning_family(k, theta)?;
    let nu_prime = ((delta / 2.0).powi(2) + omega_stage.powi(2)).sqrt();
    let l = ((t_pi * nu_prime / PI).round() as u64).max(1);
    let t_pi_prime = l as f64 * PI / nu_prime;
    let params = SystemParams::undamped(omega_stage, PI, delta);
    let mismatch = (t_pi - t_pi_prime).abs();

    let (t_m, f_min) = if mismatch < 1e-15 {
        (t_pi, single_pulse_min_fidelity(&params, t_pi))
    } else {
        let lo = t_pi.min(t_pi_prime);
        let hi = t_pi.max(t_pi_prime);
        golden_max(&|t| single_pulse_min_fidelity(&params, t), lo, hi, 200)
    };
    if f_min >= f_threshold {
        Ok(Some(MappingSolution {
            k,
            theta,
            l,
            delta,
            t_m,
            f_min,
            time_mismatch: mismatch,
        }))
    } else {
        Ok(None)
    }
}

/// All `(k, theta, l)` candidates below the time limit whose refined
/// worst-case fidelity reaches the threshold, without detuning
/// deduplication. Sorted by `(t_m, k, theta)`.
pub fn approximate_mapping_scan_all(
    t_limit: f64,
    f_threshold: f64,
    omega_stage: f64,
) -> Result<Vec<MappingSolution>> {
    if !(t_limit > 0.0) {
        return Err(Error::Domain("t_limit must be > 0".into()));
    }
    let mut candidates: Vec<(u64, u64)> = Vec::new();
    let mut theta = 1u64;
    loop {
        let (_, t_min, _) = detuning_family(0, theta)?;
        if t_min > t_limit {
            break;
        }
        let mut k = 0u64;
        loop {
            let (_, t_pi, _) = detuning_family(k, theta)?;
            if t_pi > t_limit {
                break;
            }
            candidates.push((k, theta));
            k += 1;
        }
        theta += 2;
    }

    let mut found: Vec<MappingSolution> = candidates
        .par_iter()
        .map(|&(k, theta)| scan_candidate(k, theta, omega_stage, f_threshold))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    found.sort_by(|a, b| {
        a.t_m
            .total_cmp(&b.t_m)
            .then(a.k.cmp(&b.k))
            .then(a.theta.cmp(&b.theta))
    });
    Ok(found)
}

/// Detuning key at six significant digits, the resolution used to count
/// distinct mapping operations.
pub fn detuning_key(delta: f64) -> String {
    format!("{:.5e}", delta)
}

/// Deduplicated scan: one entry per distinct detuning (six significant
/// digits), keeping the fastest operation. Sorted by `(t_m, k, theta)`.
pub fn approximate_mapping_scan(
    t_limit: f64,
    f_threshold: f64,
    omega_stage: f64,
) -> Result<Vec<MappingSolution>> {
    let all = approximate_mapping_scan_all(t_limit, f_threshold, omega_stage)?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<MappingSolution> = Vec::new();
    for sol in all {
        let key = detuning_key(sol.delta);
        if let Some(&i) = seen.get(&key) {
            if sol.t_m < out[i].t_m {
                out[i] = sol;
            }
        } else {
            seen.insert(key, out.len());
            out.push(sol);
        }
    }
    out.sort_by(|a, b| {
        a.t_m
            .total_cmp(&b.t_m)
            .then(a.k.cmp(&b.k))
            .then(a.theta.cmp(&b.theta))
    });
    Ok(out)
}

/// Shift-stage duration from the moduli match,
/// `t1 = arccos(1 - 2 (nu1'^2 / (Omega1^2 nu_pi'^2)) sin^2(nu_pi' t_pi))
///       / (2 nu1')`.
fn stage_a_duration(
    omega1: f64,
    nu_prime_1: f64,
    nu_prime_pi: f64,
    sin_pi: f64,
) -> Result<f64> {
    let mut arg = 1.0 - 2.0 * (nu_prime_1 / (omega1 * nu_prime_pi)).powi(2) * sin_pi * sin_pi;
    if arg < -1.0 {
        if arg < -1.0 - 1e-12 {
            return Err(Error::Numeric(format!(
                "shift-stage arccos argument {arg} outside [-1, 1]; omega1 too small"
            )));
        }
        arg = -1.0;
    }
    Ok(arg.acos() / (2.0 * nu_prime_1))
}

fn ledger_at(k: u64, theta: u64, omega1: f64, delta: f64, t_pi: f64, eps_two_eta: f64) -> Result<PhaseLedger> {
    if omega1 < 10.0 {
        return Err(Error::Domain(format!(
            "omega1 = {omega1} below 10; the shift stage must dominate the coupling"
        )));
    }
    let _ = (k, theta);
    let half_d = delta / 2.0;
    let nu_prime_pi = (half_d * half_d + 1.0).sqrt();
    let nu_prime_1 = (half_d * half_d + omega1 * omega1).sqrt();
    let (sin_pi, cos_pi) = (nu_prime_pi * t_pi).sin_cos();

    let eta1_mod = sin_pi.abs() / nu_prime_pi;
    let eta0_mod = (cos_pi * cos_pi + half_d * half_d).sqrt() / nu_prime_pi;

    let t1 = stage_a_duration(omega1, nu_prime_1, nu_prime_pi, sin_pi)?;
    let (sin_1, cos_1) = (nu_prime_1 * t1).sin_cos();

    // quadrant-aware arguments; the printed branch rules follow from atan2
    let phi0 = (delta * sin_pi).atan2(2.0 * nu_prime_pi * cos_pi);
    let theta0 = (-delta * sin_1).atan2(2.0 * nu_prime_1 * cos_1);
    let k_prime = i64::from(cos_pi < 0.0);
    let m = i64::from(sin_pi < 0.0);

    let base = half_d * (t1 + t_pi);
    let phi_omega = mod_tau(base + m as f64 * PI + eps_two_eta);
    let big_theta = mod_tau(base + theta0 - phi0 + eps_two_eta);

    let theta1 = mod_tau(1.5 * PI - phi_omega);
    let phi1 = if sin_pi >= 0.0 {
        mod_tau(1.5 * PI - big_theta)
    } else {
        mod_tau(0.5 * PI - big_theta)
    };
    let closure = phi0 - phi1 + 1.5 * PI - phi_omega - theta0;
    let l_prime = (closure / TAU).round() as i64;

    Ok(PhaseLedger {
        eta0_mod,
        eta1_mod,
        theta0,
        theta1,
        phi0,
        phi1,
        big_theta,
        k_prime,
        m,
        l_prime,
        t1,
        phi_omega,
        delta,
        t_pi,
    })
}

/// Design quantities of the undamped two-stage protocol for family member
/// `(k, theta)` and shift amplitude `omega1`.
pub fn phase_ledger(k: u64, theta: u64, omega1: f64) -> Result<PhaseLedger> {
    let (delta, t_pi, _) = detuning_family(k, theta)?;
    ledger_at(k, theta, omega1, delta, t_pi, 0.0)
}

/// Undamped two-stage plan: exact dark-subspace pre-rotation followed by the
/// perfect transfer pulse.
pub fn design_protocol(k: u64, theta: u64, omega1: f64) -> Result<ProtocolPlan> {
    let ledger = phase_ledger(k, theta, omega1)?;
    Ok(ProtocolPlan {
        k,
        theta,
        delta: ledger.delta,
        t1: ledger.t1,
        t_pi: ledger.t_pi,
        omega1,
        phi_omega: ledger.phi_omega,
        phi_pi: ledger.big_theta,
        damped: false,
    })
}

/// First-order cavity-decay corrections applied to the plan:
///
/// `Delta(kappa) = Delta(0) (1 - 2 eta / (theta pi))` with
/// `eta = kappa |Delta(0)| / 4`, then at the corrected detuning
/// `t_pi(kappa) = theta pi / (2 delta) + 2 eta / delta` with
/// `delta = (2 nu - Delta)/4`, and both laser phases gain `+2 eta`.
/// The shift duration is recomputed at the corrected values.
///
/// The atomic rates carry no closed-form correction; they are accepted so a
/// caller can keep the full damping context with the seed it hands to the
/// numerical fine-tuning step.
pub fn design_protocol_damped(
    k: u64,
    theta: u64,
    omega1: f64,
    kappa: f64,
    gamma0: f64,
    gamma1: f64,
) -> Result<ProtocolPlan> {
    if kappa < 0.0 || gamma0 < 0.0 || gamma1 < 0.0 {
        return Err(Error::Domain("damping rates must be >= 0".into()));
    }
    let (delta0, _, _) = detuning_family(k, theta)?;
    let eta0 = kappa * delta0 / 4.0;
    let delta_k = delta0 * (1.0 - 2.0 * eta0 / (theta as f64 * PI));

    let nu_k = ((delta_k / 2.0).powi(2) + 2.0).sqrt();
    let delta_small = (2.0 * nu_k - delta_k) / 4.0;
    let eta_k = kappa * delta_k / 4.0;
    let t_pi = theta as f64 * PI / (2.0 * delta_small) + 2.0 * eta_k / delta_small;

    let ledger = ledger_at(k, theta, omega1, delta_k, t_pi, 2.0 * eta_k)?;
    Ok(ProtocolPlan {
        k,
        theta,
        delta: delta_k,
        t1: ledger.t1,
        t_pi,
        omega1,
        phi_omega: ledger.phi_omega,
        phi_pi: ledger.big_theta,
        damped: kappa > 0.0 || gamma0 > 0.0 || gamma1 > 0.0,
    })
}

/// Expansion parameter of the decay corrections for a family member.
pub fn damped_regime_eta(k: u64, theta: u64, kappa: f64) -> Result<f64> {
    let (delta0, _, _) = detuning_family(k, theta)?;
    Ok(kappa * delta0 / 4.0)
}

/// Reconstruct the dark-subspace pre-image state from a ledger, as amplitudes
/// on `(|00>, |20>)`.
pub fn phi_eta_state(ledger: &PhaseLedger) -> (C64, C64) {
    let global = C64::from_polar(1.0, -ledger.delta * ledger.t_pi / 2.0);
    (
        global * C64::from_polar(ledger.eta0_mod, ledger.phi0),
        global * C64::from_polar(ledger.eta1_mod, ledger.phi1),
    )
}
