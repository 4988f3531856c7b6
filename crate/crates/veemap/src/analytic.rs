//! Closed-form amplitudes for the two invariant subspaces, first-order damped
//! amplitudes, and validity bounds for the rotating-wave treatment.
//!
//! Starting from `|10>` the dynamics closes on the bright triple
//! `{|10>, |01>, |21>}`; starting from `|00>` it closes on the dark pair
//! `{|00>, |20>}`. Everything here is cross-checked against matrix-exponential
//! propagation in the test suites.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::SystemParams;

const I: C64 = C64::new(0.0, 1.0);

/// Frequencies and dimensionless groups derived from one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct DerivedFrequencies {
    /// Bright-subspace Rabi frequency `sqrt((Delta/2)^2 + |Omega|^2 + |g|^2)`.
    pub nu: f64,
    /// Dark-subspace frequency `sqrt((Delta/2)^2 + |Omega|^2)`.
    pub nu_prime: f64,
    /// Dark frequency during the transfer pulse, where `|Omega| = |g|`.
    pub nu_prime_pi: f64,
    /// Slow transfer frequency `(2 nu - |Delta|)/4`.
    pub delta_small: f64,
    /// Damping expansion parameter `kappa |Delta| / (4 |g|^2)`.
    pub eta: f64,
    /// `2 nu + Delta`.
    pub omega_plus: f64,
    /// `2 nu - Delta`.
    pub omega_minus: f64,
    /// Heaviside of `Delta` (1/2 at zero).
    pub xi_plus: f64,
    /// Heaviside of `-Delta` (1/2 at zero).
    pub xi_minus: f64,
    /// Sign of `Delta` (0 at zero).
    pub eps: f64,
    /// Effective decay rate of the dark-subspace return leg; equals `gamma0`
    /// in the large-detuning regime. The exact damped dark evolution is
    /// obtained numerically when needed.
    pub gamma_eff: f64,
}

impl DerivedFrequencies {
    pub fn from_params(p: &SystemParams) -> Self {
        let half_d_sq = (p.delta / 2.0).powi(2);
        let nu = (half_d_sq + p.omega_amp.powi(2) + p.g.powi(2)).sqrt();
        Self {
            nu,
            nu_prime: (half_d_sq + p.omega_amp.powi(2)).sqrt(),
            nu_prime_pi: (half_d_sq + p.g.powi(2)).sqrt(),
            delta_small: (2.0 * nu - p.delta.abs()) / 4.0,
            eta: p.kappa * p.delta.abs() / (4.0 * p.g.powi(2)),
            omega_plus: 2.0 * nu + p.delta,
            omega_minus: 2.0 * nu - p.delta,
            xi_plus: heaviside(p.delta),
            xi_minus: heaviside(-p.delta),
            eps: sign(p.delta),
            gamma_eff: p.gamma0,
        }
    }
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Amplitudes of `|10>`, `|01>`, `|21>`.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeTriple {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

/// Upper bounds on the probability of leaving `|10>` during the intense
/// stage: `eps1` from the cavity coupling, `eps2` from the counter-rotating
/// terms.
#[derive(Debug, Clone, Copy)]
pub struct RwaErrorBound {
    pub eps1: f64,
    pub eps2: f64,
}

/// `f(t) = 1 + e^{i Delta t / 2} (i Delta/(2 nu) sin(nu t) - cos(nu t))`.
fn f_of_t(delta: f64, nu: f64, t: f64) -> C64 {
    let (s, c) = (nu * t).sin_cos();
    let osc = C64::new(-c, if nu > 0.0 { delta / (2.0 * nu) * s } else { 0.0 });
    C64::new(1.0, 0.0) + C64::from_polar(1.0, delta * t / 2.0) * osc
}

/// Undamped bright-subspace amplitudes of `e^{-iHt} |10>`:
///
/// `a = 1 - |g|^2/(|Omega|^2+|g|^2) f(t)`,
/// `b = -Omega g* /(|Omega|^2+|g|^2) f(t)`,
/// `c = -i g*/nu e^{i Delta t/2} sin(nu t)`.
pub fn bright_amplitudes(p: &SystemParams, t: f64) -> Result<AmplitudeTriple> {
    if p.damped() {
        return Err(Error::Domain(
            "bright_amplitudes requires kappa = gamma0 = gamma1 = 0; use the kappa variants".into(),
        ));
    }
    let fr = DerivedFrequencies::from_params(p);
    let denom = p.omega_amp.powi(2) + p.g.powi(2);
    if denom == 0.0 {
        return Ok(AmplitudeTriple {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
        });
    }
    let f = f_of_t(p.delta, fr.nu, t);
    let g_conj = p.g_complex().conj();
    let a = C64::new(1.0, 0.0) - f * (p.g.powi(2) / denom);
    let b = -p.omega() * g_conj / C64::new(denom, 0.0) * f;
    let c = -I * g_conj / C64::new(fr.nu, 0.0)
        * C64::from_polar(1.0, p.delta * t / 2.0)
        * C64::new((fr.nu * t).sin(), 0.0);
    Ok(AmplitudeTriple { a, b, c })
}

/// Dark-subspace amplitudes of `e^{-iHt} |00>`:
///
/// `amp00 = e^{i Delta t/2} (2 nu' cos(nu' t) - i Delta sin(nu' t)) / (2 nu')`,
/// `amp20 = e^{i Delta t/2} (-2 i Omega* sin(nu' t)) / (2 nu')`.
///
/// No photons are involved, so these hold for any `kappa`. A nonzero
/// `gamma0` breaks them; the damped dark evolution is handled numerically.
pub fn dark_amplitudes(p: &SystemParams, t: f64) -> (C64, C64) {
    let fr = DerivedFrequencies::from_params(p);
    if fr.nu_prime == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    let phase = C64::from_polar(1.0, p.delta * t / 2.0);
    let (s, c) = (fr.nu_prime * t).sin_cos();
    let two_np = 2.0 * fr.nu_prime;
    let amp00 = phase * C64::new(c, -p.delta * s / two_np);
    let amp20 = phase * (-I) * p.omega().conj() * C64::new(2.0 * s / two_np, 0.0);
    (amp00, amp20)
}

/// Population of the intermediate level during the dark-subspace rotation:
/// `4 |Omega|^2 / (Delta^2 + 4 |Omega|^2) sin^2(nu' t)`.
pub fn sigma22_population(p: &SystemParams, t: f64) -> f64 {
    let denom = p.delta.powi(2) + 4.0 * p.omega_amp.powi(2);
    if denom == 0.0 {
        return 0.0;
    }
    let fr = DerivedFrequencies::from_params(p);
    4.0 * p.omega_amp.powi(2) / denom * (fr.nu_prime * t).sin().powi(2)
}

/// Warn when the first-order damped formulas are used outside their regime
/// `|Delta| >= 4 g` and `eta <= 0.1`.
pub fn kappa_regime_warning(p: &SystemParams) -> Option<String> {
    let fr = DerivedFrequencies::from_params(p);
    if p.delta.abs() < 4.0 * p.g {
        return Some(format!(
            "|Delta| = {} below 4 g = {}; first-order damped amplitudes degrade",
            p.delta.abs(),
            4.0 * p.g
        ));
    }
    if fr.eta > 0.1 {
        return Some(format!("eta = {} above 0.1; first-order expansion unreliable", fr.eta));
    }
    None
}

/// Transfer-pulse phase encoded in the drive: the pulse uses
/// `Omega = -g e^{i Phi}`, i.e. `phi_Omega = Phi + pi + phi_g`.
fn stage_b_phase(p: &SystemParams) -> Result<f64> {
    if (p.omega_amp - p.g).abs() > 1e-9 * p.g {
        return Err(Error::Domain(format!(
            "transfer-pulse amplitudes require |Omega| = g (got {} vs {})",
            p.omega_amp, p.g
        )));
    }
    Ok(p.omega_phase - std::f64::consts::PI - p.g_phase)
}

/// First-order-in-`eta` bright amplitudes during the transfer pulse with
/// cavity decay:
///
/// `a = e^{-kt/2} [ e^{(i w+ - k xi+) t/2} w- (1 - 2 i eta xi-)/(8 nu)
///     - i eta eps + e^{-(i w- + k xi-) t/2} w+ (1 + 2 i eta xi+)/(8 nu) + 1/2 ]`
/// `b = -e^{i Phi} e^{-kt/2} [ e^{(i w+ - k xi+) t/2} w-/(8 nu) - 1/2
///     + e^{-(i w- + k xi-) t/2} w+/(8 nu) ]`
/// `c = g*/(2 nu) e^{(i Delta - k) t/2} (e^{-(i nu + k xi-/2) t}
///     - e^{(i nu - k xi+/2) t})`
pub fn bright_amplitudes_kappa(p: &SystemParams, t: f64) -> Result<AmplitudeTriple> {
    let phi = stage_b_phase(p)?;
    let fr = DerivedFrequencies::from_params(p);
    let k = p.kappa;
    let nu = fr.nu;
    let e_damp = (-k * t / 2.0).exp();

    let exp_plus = C64::new(-k * fr.xi_plus * t / 2.0, fr.omega_plus * t / 2.0).exp();
    let exp_minus = C64::new(-k * fr.xi_minus * t / 2.0, -fr.omega_minus * t / 2.0).exp();

    let term_p_a = exp_plus * C64::new(fr.omega_minus / (8.0 * nu), 0.0)
        * (C64::new(1.0, 0.0) - I * C64::new(2.0 * fr.eta * fr.xi_minus, 0.0));
    let term_m_a = exp_minus * C64::new(fr.omega_plus / (8.0 * nu), 0.0)
        * (C64::new(1.0, 0.0) + I * C64::new(2.0 * fr.eta * fr.xi_plus, 0.0));
    let a = C64::new(e_damp, 0.0)
        * (term_p_a - I * C64::new(fr.eta * fr.eps, 0.0) + term_m_a + C64::new(0.5, 0.0));

    let term_p_b = exp_plus * C64::new(fr.omega_minus / (8.0 * nu), 0.0);
    let term_m_b = exp_minus * C64::new(fr.omega_plus / (8.0 * nu), 0.0);
    let b = -C64::from_polar(e_damp, phi) * (term_p_b - C64::new(0.5, 0.0) + term_m_b);

    let pref = p.g_complex().conj() / C64::new(2.0 * nu, 0.0)
        * C64::new(-k * t / 2.0, p.delta * t / 2.0).exp();
    let c = pref
        * (C64::new(-k * fr.xi_minus * t / 2.0, -nu * t).exp()
            - C64::new(-k * fr.xi_plus * t / 2.0, nu * t).exp());

    Ok(AmplitudeTriple { a, b, c })
}

/// Simplified transfer-pulse amplitudes with the intermediate state
/// eliminated:
///
/// `a = e^{-i eps delta t} e^{-kt/2} (cos(delta t) + 2 eta sin(delta t))`,
/// `b = i eps e^{i Phi} e^{-i eps delta t} e^{-kt/2} sin(delta t)`, `c = 0`,
///
/// with `delta = (2 nu - |Delta|)/4`.
pub fn bright_amplitudes_simplified(p: &SystemParams, t: f64) -> Result<AmplitudeTriple> {
    let phi = stage_b_phase(p)?;
    let fr = DerivedFrequencies::from_params(p);
    let d = fr.delta_small;
    let rot = C64::from_polar((-p.kappa * t / 2.0).exp(), -fr.eps * d * t);
    let (s, c) = (d * t).sin_cos();
    let a = rot * C64::new(c + 2.0 * fr.eta * s, 0.0);
    let b = I * C64::new(fr.eps, 0.0) * C64::from_polar(1.0, phi) * rot * C64::new(s, 0.0);
    Ok(AmplitudeTriple {
        a,
        b,
        c: C64::new(0.0, 0.0),
    })
}

/// Error bounds `eps1 = (2 g / Omega_1)^2` and
/// `eps2 = (2 Omega_1 / omega_sum)^2` (zero when `omega_sum` is absent).
pub fn rwa_error_bound(p: &SystemParams) -> Result<RwaErrorBound> {
    if p.omega_amp <= 0.0 {
        return Err(Error::Domain("rwa_error_bound requires omega_amp > 0".into()));
    }
    Ok(RwaErrorBound {
        eps1: (2.0 * p.g / p.omega_amp).powi(2),
        eps2: p
            .omega_sum
            .map(|w| (2.0 * p.omega_amp / w).powi(2))
            .unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::detuning_family;
    use crate::hilbert::{build_effective_hamiltonian, FockBasis, StateVector, TAU};
    use crate::optim::golden_min;
    use crate::propagate::{evolve_const, Propagator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn stage_b(delta: f64, kappa: f64, phi: f64) -> SystemParams {
        SystemParams {
            omega_amp: 1.0,
            omega_phase: phi + PI,
            delta,
            kappa,
            ..SystemParams::default()
        }
    }

    #[test]
    fn derived_frequency_orderings() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = SystemParams {
                omega_amp: rng.gen_range(0.0..20.0),
                delta: rng.gen_range(-10.0..10.0),
                kappa: rng.gen_range(0.0..0.2),
                ..SystemParams::default()
            };
            let fr = DerivedFrequencies::from_params(&p);
            assert!(fr.nu >= fr.nu_prime);
            assert!(fr.nu_prime >= p.delta.abs() / 2.0 - 1e-14);
            assert!(fr.nu >= fr.nu_prime_pi);
            assert!(fr.delta_small > 0.0);
            assert!(fr.eta >= 0.0);
        }
    }

    #[test]
    fn bright_starts_at_identity() {
        let p = SystemParams::undamped(2.0, 0.7, 1.5);
        let amps = bright_amplitudes(&p, 0.0).unwrap();
        assert!((amps.a - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(amps.b.norm() < 1e-15);
        assert!(amps.c.norm() < 1e-15);
    }

    #[test]
    fn bright_transfer_at_designed_pulse() {
        let (delta, t_pi, _) = detuning_family(25, 1).unwrap();
        let p = stage_b(delta, 0.0, 0.0);
        let amps = bright_amplitudes(&p, t_pi).unwrap();
        assert!((amps.b.norm() - 1.0).abs() < 1e-5);
        assert!(amps.a.norm() < 1e-5);
        assert!(amps.c.norm() < 1e-5);
    }

    #[test]
    fn bright_rejects_damping() {
        let p = SystemParams {
            kappa: 0.1,
            ..SystemParams::undamped(1.0, 0.0, 1.0)
        };
        assert!(bright_amplitudes(&p, 1.0).is_err());
    }

    #[test]
    fn bright_matches_matrix_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let basis = FockBasis::new(1);
        for _ in 0..20 {
            let p = SystemParams::undamped(
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..TAU),
                rng.gen_range(-8.0..8.0),
            );
            let h = build_effective_hamiltonian(&p, basis).unwrap();
            let prop = Propagator::new(&h);
            let psi0 = StateVector::basis_state(basis, 1, 0).unwrap();
            for _ in 0..20 {
                let t = rng.gen_range(0.0..15.0);
                let psi = prop.apply(&psi0, t);
                let amps = bright_amplitudes(&p, t).unwrap();
                assert!((psi.amplitudes[1] - amps.a).norm() < 1e-10);
                assert!((psi.amplitudes[3] - amps.b).norm() < 1e-10);
                assert!((psi.amplitudes[5] - amps.c).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dark_matches_matrix_exponential_for_any_kappa() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let basis = FockBasis::new(1);
        for _ in 0..20 {
            let p = SystemParams {
                omega_amp: rng.gen_range(0.0..10.0),
                omega_phase: rng.gen_range(0.0..TAU),
                delta: rng.gen_range(-8.0..8.0),
                kappa: 0.3,
                ..SystemParams::default()
            };
            let h = build_effective_hamiltonian(&p, basis).unwrap();
            let psi0 = StateVector::basis_state(basis, 0, 0).unwrap();
            let t = rng.gen_range(0.0..10.0);
            let psi = evolve_const(&h, &psi0, t).unwrap();
            let (a00, a20) = dark_amplitudes(&p, t);
            assert!((psi.amplitudes[0] - a00).norm() < 1e-10);
            assert!((psi.amplitudes[2] - a20).norm() < 1e-10);
        }
    }

    #[test]
    fn dark_returns_at_multiples() {
        let p = SystemParams::undamped(3.0, 0.2, 2.0);
        let fr = DerivedFrequencies::from_params(&p);
        for l in 1..=4 {
            let t = l as f64 * PI / fr.nu_prime;
            let (a00, a20) = dark_amplitudes(&p, t);
            assert!((a00.norm() - 1.0).abs() < 1e-12);
            assert!(a20.norm() < 1e-12);
        }
        let (a00, a20) = dark_amplitudes(&p, 0.0);
        assert!((a00 - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(a20.norm() < 1e-15);
    }

    #[test]
    fn sigma22_matches_dark_amplitude() {
        assert_eq!(sigma22_population(&SystemParams::undamped(1.0, 0.0, 2.0), 0.0), 0.0);

        // resonant peak reaches one
        let p = SystemParams::undamped(1.0, 0.0, 0.0);
        let peak = sigma22_population(&p, PI / 2.0);
        assert!((peak - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let p = SystemParams::undamped(
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.0..TAU),
                rng.gen_range(-5.0..5.0),
            );
            let t = rng.gen_range(0.0..10.0);
            let (_, a20) = dark_amplitudes(&p, t);
            assert!((sigma22_population(&p, t) - a20.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_condition_holds_on_detuning_family() {
        for theta in [1u64, 3, 5, 7] {
            for k in [0u64, 1, 2, 5, 25, 60] {
                let (delta, t_pi, nu) = detuning_family(k, theta).unwrap();
                let lhs = (delta * t_pi / 2.0).cos() * (nu * t_pi).cos();
                assert!(
                    (lhs + 1.0).abs() < 1e-9,
                    "(k, theta) = ({k}, {theta}): product = {lhs}"
                );
            }
        }
    }

    #[test]
    fn kappa_amplitudes_reduce_to_undamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let phi = rng.gen_range(0.0..TAU);
            let delta = rng.gen_range(4.0..12.0);
            let p = stage_b(delta, 0.0, phi);
            let t = rng.gen_range(0.0..10.0);
            let full = bright_amplitudes_kappa(&p, t).unwrap();
            let exact = bright_amplitudes(&p, t).unwrap();
            assert!((full.a - exact.a).norm() < 1e-12);
            assert!((full.b - exact.b).norm() < 1e-12);
            assert!((full.c - exact.c).norm() < 1e-12);
        }
    }

    #[test]
    fn kappa_amplitudes_first_order_accuracy() {
        // Residual structure measured against the matrix-exponential oracle:
        // a second-order piece O(eta^2) plus the dropped compactness terms
        // O(kappa/|Delta|), which fall as 1/Delta^2 at fixed eta. At
        // (Delta, kappa) = (9.9, 1e-3) the oracle gives err_a = 9.87e-5.
        let (_, t_pi, _) = detuning_family(25, 1).unwrap();
        let p = stage_b(9.9, 1e-3, 0.0);
        let eta = DerivedFrequencies::from_params(&p).eta;
        let basis = FockBasis::new(1);
        let h = build_effective_hamiltonian(&p, basis).unwrap();
        let psi0 = StateVector::basis_state(basis, 1, 0).unwrap();
        let psi = evolve_const(&h, &psi0, t_pi).unwrap();
        let amps = bright_amplitudes_kappa(&p, t_pi).unwrap();
        let err = (amps.a - psi.amplitudes[1]).norm();
        assert!(err < 1.2e-4, "err = {err}");
        assert!(
            err < 10.0 * eta * eta + 2.0 * p.kappa / p.delta,
            "err = {err} vs 10 eta^2 + 2 kappa/Delta = {}",
            10.0 * eta * eta + 2.0 * p.kappa / p.delta
        );

        // the compactness residual shrinks quadratically with the detuning
        // at fixed eta
        let mut errs = Vec::new();
        for delta in [9.9, 19.8, 39.6] {
            let kappa = 4.0 * eta / delta;
            let p = stage_b(delta, kappa, 0.0);
            let fr = DerivedFrequencies::from_params(&p);
            let t = 16.0 * PI / fr.nu;
            let h = build_effective_hamiltonian(&p, basis).unwrap();
            let psi = evolve_const(&h, &psi0, t).unwrap();
            let amps = bright_amplitudes_kappa(&p, t).unwrap();
            errs.push((amps.a - psi.amplitudes[1]).norm());
        }
        assert!(errs[0] / errs[1] > 3.0, "ratios {errs:?}");
        assert!(errs[1] / errs[2] > 3.0, "ratios {errs:?}");
    }

    #[test]
    fn kappa_intermediate_population_never_vanishes() {
        let p = stage_b(9.9, 1e-3, 0.0);
        let fr = DerivedFrequencies::from_params(&p);
        for k in 1..=100 {
            let t = 3.0 * PI / fr.nu * k as f64 / 100.0;
            let c = bright_amplitudes_kappa(&p, t).unwrap().c;
            assert!(c.norm_sqr() > 0.0, "t = {t}");
        }
    }

    #[test]
    fn perturbative_error_scales_quadratically_in_kappa() {
        let (delta, t_pi, _) = detuning_family(25, 1).unwrap();
        let basis = FockBasis::new(1);
        let psi0 = StateVector::basis_state(basis, 1, 0).unwrap();
        let max_err = |kappa: f64| -> f64 {
            let p = stage_b(delta, kappa, 0.0);
            let h = build_effective_hamiltonian(&p, basis).unwrap();
            let prop = Propagator::new(&h);
            (0..=200)
                .map(|k| {
                    let t = t_pi * k as f64 / 200.0;
                    let formula = bright_amplitudes_kappa(&p, t).unwrap().a;
                    let numeric = prop.apply(&psi0, t).amplitudes[1];
                    (formula - numeric).norm()
                })
                .fold(0.0, f64::max)
        };
        let e1 = max_err(2e-3);
        let e2 = max_err(1e-3);
        let ratio = e1 / e2;
        assert!((2.0..=8.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn simplified_amplitudes_limits() {
        let p = stage_b(9.9, 1e-3, 0.3);
        let amps = bright_amplitudes_simplified(&p, 0.0).unwrap();
        assert!((amps.a - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(amps.b.norm() < 1e-15);

        // zero crossing of a at t = (pi - arctan(1/(2 eta)))/delta
        let fr = DerivedFrequencies::from_params(&p);
        let t_zero = (PI - (1.0 / (2.0 * fr.eta)).atan()) / fr.delta_small;
        let a = bright_amplitudes_simplified(&p, t_zero).unwrap().a;
        assert!(a.norm() < 1e-10);

        // kappa -> 0: |b| -> 1 at t_pi = theta pi / (2 delta)
        let p0 = stage_b(9.9, 0.0, 0.3);
        let fr0 = DerivedFrequencies::from_params(&p0);
        let t_pi = PI / (2.0 * fr0.delta_small);
        let b = bright_amplitudes_simplified(&p0, t_pi).unwrap().b;
        assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intermediate_minima_near_predicted_times() {
        // eta = kappa * delta / 4 = 0.04 <= 0.05
        let p = stage_b(4.0, 0.04, 0.0);
        let fr = DerivedFrequencies::from_params(&p);
        let basis = FockBasis::new(1);
        let h = build_effective_hamiltonian(&p, basis).unwrap();
        let prop = Propagator::new(&h);
        let psi0 = StateVector::basis_state(basis, 1, 0).unwrap();
        let pop21 = |t: f64| prop.apply(&psi0, t).amplitudes[5].norm_sqr();
        for m in 1..=5 {
            let t_pred = m as f64 * PI / fr.nu;
            let (t_min, _) = golden_min(&pop21, t_pred - 0.4 * PI / fr.nu, t_pred + 0.4 * PI / fr.nu, 200);
            let rel = (t_min - t_pred).abs() / t_pred;
            assert!(rel < 0.02, "m = {m}: relative error {rel}");
        }
    }

    #[test]
    fn error_bounds() {
        let p = SystemParams::undamped(633.0, 0.0, 0.0);
        assert!(rwa_error_bound(&p).unwrap().eps1 < 1e-5);

        let p = SystemParams {
            omega_sum: Some(7.6e7),
            ..SystemParams::undamped(3e4, 0.0, 0.0)
        };
        let b = rwa_error_bound(&p).unwrap();
        assert!(b.eps2 < 1e-6);

        // shape: eps1 falls, eps2 grows quadratically in omega
        let p1 = SystemParams {
            omega_sum: Some(1e6),
            ..SystemParams::undamped(1e3, 0.0, 0.0)
        };
        let p2 = SystemParams {
            omega_sum: Some(1e6),
            ..SystemParams::undamped(2e3, 0.0, 0.0)
        };
        let b1 = rwa_error_bound(&p1).unwrap();
        let b2 = rwa_error_bound(&p2).unwrap();
        assert!(b2.eps1 < b1.eps1);
        assert!((b2.eps2 / b1.eps2 - 4.0).abs() < 1e-12);

        assert!(rwa_error_bound(&SystemParams::default()).is_err());
    }

    #[test]
    fn regime_warnings() {
        assert!(kappa_regime_warning(&stage_b(9.9, 1e-3, 0.0)).is_none());
        assert!(kappa_regime_warning(&stage_b(2.0, 1e-3, 0.0)).is_some());
        assert!(kappa_regime_warning(&stage_b(9.9, 0.2, 0.0)).is_some());
    }
}
