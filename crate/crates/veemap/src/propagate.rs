//! Numerically exact time evolution.
//!
//! Time-independent Hamiltonians are propagated through the matrix
//! exponential: a Hermitian eigendecomposition when no damping is present,
//! scaling-and-squaring with a Pade(13) approximant otherwise. The
//! time-dependent counter-rotating Hamiltonian is integrated with an embedded
//! Dormand-Prince 5(4) pair under adaptive step control.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::design::ProtocolPlan;
use crate::error::{Error, Result};
use crate::hilbert::{build_effective_hamiltonian, build_full_hamiltonian, FockBasis, OperatorMatrix, StateVector, SystemParams};

const I: C64 = C64::new(0.0, 1.0);

/// Evolution mode: effective (time-independent) or counter-rotating
/// (time-dependent) Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rwa,
    Full,
}

/// Population record along a pulse.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times, strictly increasing, in units of 1/g.
    pub times: Vec<f64>,
    /// `populations[k][idx]` is `|amplitude|^2` of basis state `idx` at
    /// `times[k]`.
    pub populations: Vec<Vec<f64>>,
    /// Squared norm at each sample; non-increasing under damping.
    pub norms: Vec<f64>,
}

/// 1-norm (maximum absolute column sum).
fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Pade(13) numerator/denominator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling-and-squaring with a Pade(13) approximant.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a1 = a * C64::new(1.0 / 2f64.powi(s as i32), 0.0);

    let eye = DMatrix::<C64>::identity(n, n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = |k: usize| C64::new(PADE13[k], 0.0);

    let w1 = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let w2 = &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1);
    let u = &a1 * (&a6 * &w1 + w2);
    let z1 = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * &z1 + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .expect("Pade denominator must be invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, V)` with `M = V diag(lambda) V^dag`. Jacobi keeps
/// full accuracy on clustered spectra, which the Hamiltonians here have.
pub fn eigh(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh requires a square matrix");
    let mut a = m.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale: f64 = m.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let beta = b.norm();
                if beta < 1e-300 {
                    continue;
                }
                let phase = b / beta;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * beta);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on rows (p, q)
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * jqp;
                    a[(i, q)] = aip * s + aiq * jqq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = api * c + aqi * jqp.conj();
                    a[(q, i)] = api * s + aqi * jqq.conj();
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * jqp;
                    v[(i, q)] = vip * s + viq * jqq;
                }
            }
        }
    }
    let eigenvalues = DVector::from_fn(n, |i, _| a[(i, i)].re);
    (eigenvalues, v)
}

/// Cached propagator for a fixed Hamiltonian, supporting repeated evaluation
/// of `exp(-i H t) psi` at many times.
pub enum Propagator {
    Hermitian {
        eigenvalues: DVector<f64>,
        eigenvectors: DMatrix<C64>,
    },
    General {
        h: DMatrix<C64>,
    },
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Self {
        if h.hermitian {
            let (eigenvalues, eigenvectors) = eigh(&h.matrix);
            Propagator::Hermitian {
                eigenvalues,
                eigenvectors,
            }
        } else {
            Propagator::General { h: h.matrix.clone() }
        }
    }

    pub fn apply(&self, psi: &StateVector, t: f64) -> StateVector {
        match self {
            Propagator::Hermitian {
                eigenvalues,
                eigenvectors,
            } => {
                let mut coeffs = eigenvectors.adjoint() * &psi.amplitudes;
                for (c, lam) in coeffs.iter_mut().zip(eigenvalues.iter()) {
                    *c *= C64::from_polar(1.0, -lam * t);
                }
                StateVector {
                    amplitudes: eigenvectors * coeffs,
                }
            }
            Propagator::General { h } => {
                let u = expm(&(h * (-I * C64::new(t, 0.0))));
                StateVector {
                    amplitudes: u * &psi.amplitudes,
                }
            }
        }
    }
}

/// `exp(-i H t) psi` for a time-independent Hamiltonian.
pub fn evolve_const(h: &OperatorMatrix, psi: &StateVector, t: f64) -> Result<StateVector> {
    if t < 0.0 {
        return Err(Error::Domain("evolution time must be >= 0".into()));
    }
    if h.dimension() != psi.dimension() {
        return Err(Error::Domain(format!(
            "dimension mismatch: H is {}, state is {}",
            h.dimension(),
            psi.dimension()
        )));
    }
    if h.matrix.iter().any(|x| !x.is_finite()) || psi.amplitudes.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite entries in H or psi".into()));
    }
    if t == 0.0 {
        return Ok(psi.clone());
    }
    Ok(Propagator::new(h).apply(psi, t))
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `d psi / dt = -i H(t) psi` for the counter-rotating Hamiltonian
/// from `t0` to `t1` with local error per unit time bounded by `tol`.
///
/// The step size is capped at one twentieth of the counter-rotating period.
pub fn evolve_timedep(
    params: &SystemParams,
    psi: &StateVector,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<StateVector> {
    if t1 < t0 {
        return Err(Error::Domain("t1 must be >= t0".into()));
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol:e} outside [1e-12, 1e-6]")));
    }
    let omega_sum = params
        .omega_sum
        .ok_or_else(|| Error::Config("omega_sum is required for time-dependent evolution".into()))?;
    if t1 == t0 {
        return Ok(psi.clone());
    }
    let basis = FockBasis::new(psi.dimension() / 3 - 1);
    let h_max = (crate::hilbert::TAU / omega_sum) / 20.0;

    let deriv = |t: f64, y: &DVector<C64>| -> Result<DVector<C64>> {
        let h = build_full_hamiltonian(params, basis, t)?;
        Ok((&h.matrix * y) * (-I))
    };

    let mut t = t0;
    let mut y = psi.amplitudes.clone();
    let mut h = h_max.min(t1 - t0);
    let mut k1 = deriv(t, &y)?;

    while t < t1 {
        if h < 1e-15 {
            return Err(Error::Stiffness(h));
        }
        h = h.min(t1 - t);

        let hc = C64::new(h, 0.0);
        let k2 = deriv(t + A21 * h, &(&y + &k1 * (hc * C64::new(A21, 0.0))))?;
        let y3 = &y + (&k1 * C64::new(A31, 0.0) + &k2 * C64::new(A32, 0.0)) * hc;
        let k3 = deriv(t + 0.3 * h, &y3)?;
        let y4 = &y
            + (&k1 * C64::new(A41, 0.0) + &k2 * C64::new(A42, 0.0) + &k3 * C64::new(A43, 0.0)) * hc;
        let k4 = deriv(t + 0.8 * h, &y4)?;
        let y5 = &y
            + (&k1 * C64::new(A51, 0.0)
                + &k2 * C64::new(A52, 0.0)
                + &k3 * C64::new(A53, 0.0)
                + &k4 * C64::new(A54, 0.0))
                * hc;
        let k5 = deriv(t + 8.0 / 9.0 * h, &y5)?;
        let y6 = &y
            + (&k1 * C64::new(A61, 0.0)
                + &k2 * C64::new(A62, 0.0)
                + &k3 * C64::new(A63, 0.0)
                + &k4 * C64::new(A64, 0.0)
                + &k5 * C64::new(A65, 0.0))
                * hc;
        let k6 = deriv(t + h, &y6)?;
        let y_next = &y
            + (&k1 * C64::new(B1, 0.0)
                + &k3 * C64::new(B3, 0.0)
                + &k4 * C64::new(B4, 0.0)
                + &k5 * C64::new(B5, 0.0)
                + &k6 * C64::new(B6, 0.0))
                * hc;
        let k7 = deriv(t + h, &y_next)?;

        let err_vec = (&k1 * C64::new(E1, 0.0)
            + &k3 * C64::new(E3, 0.0)
            + &k4 * C64::new(E4, 0.0)
            + &k5 * C64::new(E5, 0.0)
            + &k6 * C64::new(E6, 0.0)
            + &k7 * C64::new(E7, 0.0))
            * hc;
        let err = err_vec.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let budget = tol * h;

        if err <= budget {
            t += h;
            y = y_next;
            k1 = k7; // FSAL
        }
        let factor = if err > 0.0 {
            0.9 * (budget / err).powf(0.2)
        } else {
            5.0
        };
        h = (h * factor.clamp(0.2, 5.0)).min(h_max);
    }
    Ok(StateVector { amplitudes: y })
}

/// Uniformly sampled populations of a single constant-drive pulse.
pub fn sample_trajectory(
    params: &SystemParams,
    psi0: &StateVector,
    t_max: f64,
    n_points: usize,
    mode: Mode,
) -> Result<Trajectory> {
    if n_points < 2 {
        return Err(Error::Domain("n_points must be >= 2".into()));
    }
    let basis = FockBasis::new(psi0.dimension() / 3 - 1);
    let times: Vec<f64> = (0..n_points)
        .map(|k| t_max * k as f64 / (n_points - 1) as f64)
        .collect();
    let mut populations = Vec::with_capacity(n_points);
    let mut norms = Vec::with_capacity(n_points);

    match mode {
        Mode::Rwa => {
            let h = build_effective_hamiltonian(params, basis)?;
            let prop = Propagator::new(&h);
            for &t in &times {
                let psi = prop.apply(psi0, t);
                populations.push(psi.populations());
                norms.push(psi.norm_sq());
            }
        }
        Mode::Full => {
            let mut psi = psi0.clone();
            let mut t_prev = 0.0;
            for &t in &times {
                psi = evolve_timedep(params, &psi, t_prev, t, 1e-10)?;
                t_prev = t;
                populations.push(psi.populations());
                norms.push(psi.norm_sq());
            }
        }
    }
    Ok(Trajectory {
        times,
        populations,
        norms,
    })
}

/// Parameters for one stage of a two-stage pulse program.
fn stage_params(params: &SystemParams, omega_amp: f64, omega_phase: f64, delta: f64) -> SystemParams {
    SystemParams {
        omega_amp,
        omega_phase,
        delta,
        ..params.clone()
    }
}

/// Stage-A parameters: intense laser `Omega = Omega_1 e^{i phi_Omega}`.
pub fn stage_a_params(plan: &ProtocolPlan, params: &SystemParams) -> SystemParams {
    stage_params(params, plan.omega1, plan.phi_omega, plan.delta)
}

/// Stage-B parameters: `Omega = -g e^{i Phi}`, i.e. amplitude `|g|` and phase
/// `Phi + pi + phi_g`.
pub fn stage_b_params(plan: &ProtocolPlan, params: &SystemParams) -> SystemParams {
    stage_params(
        params,
        params.g,
        plan.phi_pi + std::f64::consts::PI + params.g_phase,
        plan.delta,
    )
}

/// Default local-error-per-unit-time budget for time-dependent stages.
pub const DEFAULT_TOL: f64 = 1e-10;

fn evolve_stage(
    params: &SystemParams,
    psi: &StateVector,
    t: f64,
    mode: Mode,
    tol: f64,
) -> Result<StateVector> {
    match mode {
        Mode::Rwa => {
            let basis = FockBasis::new(psi.dimension() / 3 - 1);
            let h = build_effective_hamiltonian(params, basis)?;
            evolve_const(&h, psi, t)
        }
        Mode::Full => evolve_timedep(params, psi, 0.0, t, tol),
    }
}

/// Execute the two-stage pulse program on `psi0` and return the unnormalized
/// final state. Post-selection and normalization are the caller's business.
///
/// Stage A applies the intense laser for `t1`; stage B switches to the
/// transfer pulse `Omega = -g e^{i Phi}` for `t_pi`. The plan's detuning
/// overrides any detuning carried by `params`.
pub fn run_protocol(
    plan: &ProtocolPlan,
    params: &SystemParams,
    psi0: &StateVector,
    mode: Mode,
) -> Result<StateVector> {
    run_protocol_with_tol(plan, params, psi0, mode, DEFAULT_TOL)
}

/// [`run_protocol`] with an explicit integration tolerance for full mode.
pub fn run_protocol_with_tol(
    plan: &ProtocolPlan,
    params: &SystemParams,
    psi0: &StateVector,
    mode: Mode,
    tol: f64,
) -> Result<StateVector> {
    if plan.t1 < 0.0 || plan.t_pi < 0.0 {
        return Err(Error::Domain("stage durations must be >= 0".into()));
    }
    if mode == Mode::Full && params.omega_sum.is_none() {
        return Err(Error::Config("mode=full requires omega_sum".into()));
    }
    let pa = stage_a_params(plan, params);
    let pb = stage_b_params(plan, params);
    let psi1 = evolve_stage(&pa, psi0, plan.t1, mode, tol)?;
    evolve_stage(&pb, &psi1, plan.t_pi, mode, tol)
}

/// Populations sampled uniformly across both stages of a pulse program.
pub fn protocol_trajectory(
    plan: &ProtocolPlan,
    params: &SystemParams,
    psi0: &StateVector,
    n_points: usize,
    mode: Mode,
    tol: f64,
) -> Result<Trajectory> {
    if n_points < 2 {
        return Err(Error::Domain("n_points must be >= 2".into()));
    }
    let t_total = plan.t1 + plan.t_pi;
    let pa = stage_a_params(plan, params);
    let pb = stage_b_params(plan, params);
    let psi_mid = evolve_stage(&pa, psi0, plan.t1, mode, tol)?;

    let times: Vec<f64> = (0..n_points)
        .map(|k| t_total * k as f64 / (n_points - 1) as f64)
        .collect();
    let mut populations = Vec::with_capacity(n_points);
    let mut norms = Vec::with_capacity(n_points);
    for &t in &times {
        let psi = if t <= plan.t1 {
            evolve_stage(&pa, psi0, t, mode, tol)?
        } else {
            evolve_stage(&pb, &psi_mid, t - plan.t1, mode, tol)?
        };
        populations.push(psi.populations());
        norms.push(psi.norm_sq());
    }
    Ok(Trajectory {
        times,
        populations,
        norms,
    })
}

/// Re-run a full-mode propagation at `n_max + 1` and check that every
/// population agrees with the `n_max` run to the stated tolerance.
pub fn check_cutoff_convergence(
    params: &SystemParams,
    alpha: C64,
    beta: C64,
    t: f64,
    n_max: usize,
    tol: f64,
) -> Result<bool> {
    let run = |nm: usize| -> Result<Vec<f64>> {
        let basis = FockBasis::new(nm);
        let (psi0, _) = crate::hilbert::initial_state(alpha, beta, basis)?;
        let psi = evolve_timedep(params, &psi0, 0.0, t, 1e-10)?;
        Ok(psi.populations())
    };
    let a = run(n_max)?;
    let b = run(n_max + 1)?;
    Ok(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol))
}
