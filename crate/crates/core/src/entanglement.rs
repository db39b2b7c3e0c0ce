//! Wootters concurrence and the convexity bound on its decay.
//!
//! The roots √λᵢ are the square roots of the eigenvalues of
//! ζ = ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y). ζ is not Hermitian, but it is isospectral to
//! M = √ρ·ρ̃·√ρ with ρ̃ = (σ_y⊗σ_y)ρ*(σ_y⊗σ_y), and M = B·B† for
//! B = √ρ·(σ_y⊗σ_y)·√ρ*. The roots are therefore the singular values of B,
//! which we take directly instead of square-rooting the eigenvalues of M.

use crate::channel::{apply_channel, kraus_term, DampingCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, pauli, singular_values, ComplexMatrix, HERMITIAN_TOL};
use crate::states::{TwoQubitState, XState, POSITIVITY_TOL};

/// Slack allowed on the decay-bound inequality.
pub const BOUND_TOL: f64 = 1e-10;
/// Agreement required between C(K₁ρK₁†) and e^{−∫(F_R+G_R)}·C(ρ).
pub const TERM_ONE_TOL: f64 = 1e-9;
/// C(K_μρK_μ†) for μ = 2, 3, 4 must stay below this.
pub const TERM_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// √λ₁ ≥ √λ₂ ≥ √λ₃ ≥ √λ₄.
    pub roots: [f64; 4],
}

impl ConcurrenceResult {
    /// √λ₁ − √λ₂ − √λ₃ − √λ₄ before clamping at zero. Negative once the
    /// state is separable, which makes it a bracketing function for
    /// root finding.
    pub fn signed(&self) -> f64 {
        self.roots[0] - self.roots[1] - self.roots[2] - self.roots[3]
    }
}

/// Concurrence of a Hermitian PSD 4×4 matrix. The input need not have unit
/// trace; C(sρ) = s·C(ρ).
pub fn concurrence(rho: &ComplexMatrix) -> Result<ConcurrenceResult> {
    if rho.dim() != 4 {
        return Err(Error::invalid("concurrence needs a 4x4 matrix"));
    }
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::invalid(format!("concurrence: input not Hermitian (error {herm:e})")));
    }
    let eig = hermitian_eigen(rho)?;
    if eig.min() < -POSITIVITY_TOL {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    let sqrt_rho = eig.reconstruct_with(|lam| lam.max(0.0).sqrt());
    let b = sqrt_rho * pauli::yy() * sqrt_rho.conj();
    let s = singular_values(&b);
    let roots = [s[0], s[1], s[2], s[3]];
    let value = (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0);
    Ok(ConcurrenceResult { value, roots })
}

pub fn concurrence_state(state: &TwoQubitState) -> f64 {
    concurrence(state.matrix()).expect("validated states are Hermitian PSD").value
}

/// Closed form for X states: 2·max(0, |ρ₂₃| − √(ρ₁₁ρ₄₄), |ρ₁₄| − √(ρ₂₂ρ₃₃)).
pub fn concurrence_x(x: &XState) -> f64 {
    let [p1, p2, p3, p4] = x.p;
    let inner = x.z23.norm() - (p1 * p4).max(0.0).sqrt();
    let outer = x.z14.norm() - (p2 * p3).max(0.0).sqrt();
    2.0 * inner.max(outer).max(0.0)
}

/// c₀·e^{−exponent}, where `exponent` = ∫₀ᵗ (F_R + G_R) ds.
pub fn decay_bound(c0: f64, damping_exponent: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c0) {
        return Err(Error::invalid(format!("initial concurrence {c0} outside [0, 1]")));
    }
    if !(damping_exponent >= 0.0) {
        return Err(Error::invalid(format!(
            "damping exponent must be non-negative, got {damping_exponent}"
        )));
    }
    Ok(c0 * (-damping_exponent).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    /// C(ρ(t)).
    pub lhs: f64,
    /// e^{−∫(F_R+G_R)}·C(ρ(0)).
    pub rhs: f64,
    pub satisfied: bool,
    /// C(K_μ ρ K_μ†) for μ = 1..=4.
    pub term_concurrences: [f64; 4],
    /// |C(K₁ρK₁†) − rhs|.
    pub term_one_error: f64,
    pub terms_ok: bool,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.satisfied && self.terms_ok
    }
}

/// Checks C(ρ(t)) ≤ e^{−∫(F_R+G_R)}·C(ρ(0)) together with the per-term
/// values behind it. Violations are reported, not raised.
pub fn check_bound(
    rho0: &TwoQubitState,
    coeffs: &DampingCoefficients,
    damping_exponent: f64,
) -> Result<BoundReport> {
    let c0 = concurrence(rho0.matrix())?.value;
    let lhs = concurrence(apply_channel(rho0, coeffs)?.matrix())?.value;
    let rhs = decay_bound(c0.min(1.0), damping_exponent)?;
    let mut terms = [0.0; 4];
    for (mu, slot) in terms.iter_mut().enumerate() {
        *slot = concurrence(&kraus_term(rho0, coeffs, mu + 1)?)?.value;
    }
    let term_one_error = (terms[0] - rhs).abs();
    let terms_ok = term_one_error <= TERM_ONE_TOL && terms[1..].iter().all(|&c| c < TERM_ZERO_TOL);
    Ok(BoundReport {
        lhs,
        rhs,
        satisfied: lhs <= rhs + BOUND_TOL,
        term_concurrences: terms,
        term_one_error,
        terms_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::coefficients_markov;
    use crate::linalg::{c, re, C64};
    use crate::states::{random_state, random_xstate, standard_family, QubitState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unitary2(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        // U = e^{iφ} [[a, -b*], [b, a*]] with |a|² + |b|² = 1
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (a, b) = (c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n));
        let phase = C64::from_polar(1.0, rng.random_range(0.0..6.3));
        ComplexMatrix::from_rows(&[vec![a, -b.conj()], vec![b, a.conj()]]).unwrap() * phase
    }

    fn werner(p: f64) -> ComplexMatrix {
        *TwoQubitState::bell().matrix() * p + ComplexMatrix::identity(4) * ((1.0 - p) / 4.0)
    }

    #[test]
    fn bell_and_product() {
        let bell = concurrence(TwoQubitState::bell().matrix()).unwrap();
        assert!((bell.value - 1.0).abs() < 1e-15, "{bell:?}");
        for i in 0..4 {
            assert_eq!(concurrence(TwoQubitState::basis(i).unwrap().matrix()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn standard_family_initial_values() {
        let expected = [
            (0.0, 2.0 / 3.0),
            (0.25, (2.0 / 3.0) * (1.0 - 3f64.sqrt() / 4.0)),
            (0.5, 1.0 / 3.0),
            (1.0, 2.0 / 3.0),
        ];
        for (a, want) in expected {
            let x = standard_family(a).unwrap();
            let general = concurrence_state(&x.to_state());
            assert!((general - want).abs() < 1e-12, "a={a}: {general} vs {want}");
            assert!((concurrence_x(&x) - want).abs() < 1e-15);
        }
        assert!(((2.0 / 3.0) * (1.0 - 3f64.sqrt() / 4.0) - 0.3780).abs() < 1e-4);
    }

    #[test]
    fn werner_family() {
        for p in [0.0f64, 1.0 / 3.0, 0.6, 1.0] {
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            let got = concurrence(&werner(p)).unwrap().value;
            assert!((got - want).abs() < 1e-10, "p={p}: {got}");
            let x = XState::from_matrix(&werner(p)).unwrap();
            assert!((concurrence_x(&x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn x_closed_form_agrees_with_general() {
        for seed in 0..1000 {
            let x = random_xstate(seed);
            let general = concurrence_state(&x.to_state());
            assert!((general - concurrence_x(&x)).abs() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn pure_state_formula() {
        let yy = pauli::yy();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amps: [C64; 4] = std::array::from_fn(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let state = TwoQubitState::pure(&amps).unwrap();
            let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi: Vec<C64> = amps.iter().map(|z| z / n).collect();
            // |⟨ψ| σy⊗σy |ψ*⟩|
            let mut overlap = re(0.0);
            for i in 0..4 {
                for j in 0..4 {
                    overlap += psi[i].conj() * yy.get(i, j) * psi[j].conj();
                }
            }
            let got = concurrence_state(&state);
            assert!((got - overlap.norm()).abs() < 1e-10, "seed {seed}: {got} vs {}", overlap.norm());
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for seed in 0..200 {
            let rho = *random_state(seed).matrix();
            let u = ComplexMatrix::kron(&random_unitary2(&mut rng), &random_unitary2(&mut rng)).unwrap();
            let rotated = (u * rho * u.adjoint()).hermitian_part();
            let (c0, c1) = (concurrence(&rho).unwrap().value, concurrence(&rotated).unwrap().value);
            assert!((c0 - c1).abs() < 1e-10);
        }
        let bell = *TwoQubitState::bell().matrix();
        let u = ComplexMatrix::kron(&random_unitary2(&mut rng), &random_unitary2(&mut rng)).unwrap();
        let c1 = concurrence(&(u * bell * u.adjoint()).hermitian_part()).unwrap().value;
        assert!((c1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn homogeneity_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for seed in 0..200 {
            let rho = *random_state(seed).matrix();
            let base = concurrence(&rho).unwrap();
            assert!((0.0..=1.0).contains(&base.value));
            assert!(base.roots.windows(2).all(|w| w[0] >= w[1]) && base.roots[3] >= 0.0);
            let s: f64 = rng.random_range(0.0..2.0);
            let scaled = concurrence(&(rho * s)).unwrap().value;
            assert!((scaled - s * base.value).abs() < 1e-12);
        }
        for seed in 0..200 {
            let x = random_xstate(seed).to_state();
            let v = concurrence_state(&x);
            assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn value_is_clamped_signed_root_difference() {
        for seed in 0..50 {
            let r = concurrence(random_state(seed).matrix()).unwrap();
            assert_eq!(r.value, r.signed().max(0.0));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = ComplexMatrix::identity(4) * 0.25;
        m.set(0, 1, re(0.1));
        assert!(matches!(concurrence(&m), Err(Error::InvalidArgument(_))));
        let m = ComplexMatrix::diag_real(&[0.5, 0.6, 0.0, -0.1]).unwrap();
        assert!(matches!(concurrence(&m), Err(Error::NotPsd { .. })));
        assert!(concurrence(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn decay_bound_contract() {
        assert_eq!(decay_bound(0.7, 0.0).unwrap(), 0.7);
        assert_eq!(decay_bound(0.0, 3.0).unwrap(), 0.0);
        assert!(decay_bound(0.5, -0.1).is_err());
        assert!(decay_bound(1.5, 0.1).is_err());
        let c = coefficients_markov(1.0, 0.8).unwrap();
        let b = decay_bound(0.4, 0.8).unwrap();
        assert!((b - 0.4 * c.gamma_a * c.gamma_a).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..50 {
            let v = decay_bound(1.0, k as f64 * 0.1).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn bound_on_identity_channel_is_tight() {
        for seed in 0..20 {
            let r = random_state(seed);
            let rep = check_bound(&r, &DampingCoefficients::identity(), 0.0).unwrap();
            assert!((rep.lhs - rep.rhs).abs() < 1e-12);
            assert!(rep.all_ok());
        }
    }

    #[test]
    fn bound_holds_on_random_states() {
        for &g in &[0.9, 0.5, 0.1] {
            let coeffs = DampingCoefficients::symmetric(g).unwrap();
            for seed in 0..200 {
                let rep = check_bound(&random_state(seed), &coeffs, coeffs.damping_exponent()).unwrap();
                assert!(rep.all_ok(), "gamma {g} seed {seed}: {rep:?}");
            }
        }
    }

    #[test]
    fn family_zero_ratio_is_f() {
        // a = 0: lhs = (2/3)γ², rhs = (2/3)γ², so the ratio f(t) is exactly 1
        let x = standard_family(0.0).unwrap().to_state();
        for gt in [0.1f64, 0.5, 1.0, 2.0] {
            let coeffs = coefficients_markov(1.0, gt).unwrap();
            let rep = check_bound(&x, &coeffs, gt).unwrap();
            assert!((rep.rhs - (2.0 / 3.0) * (-gt).exp()).abs() < 1e-12);
            assert!((rep.lhs / rep.rhs - 1.0).abs() < 1e-9);
        }
        // a = 1/2 at Γt = 0.3: ratio equals f(t) < 1
        let a: f64 = 0.5;
        let x = standard_family(a).unwrap().to_state();
        let coeffs = coefficients_markov(1.0, 0.3).unwrap();
        let w2 = coeffs.omega_a * coeffs.omega_a;
        let f = 1.0 - (a * (1.0 - a + 2.0 * w2 + w2 * w2 * a)).sqrt();
        let rep = check_bound(&x, &coeffs, 0.3).unwrap();
        let c0 = concurrence_state(&x);
        let ratio = rep.lhs / (coeffs.gamma_a.powi(2) * (2.0 / 3.0));
        assert!((ratio - f).abs() < 1e-10);
        assert!(rep.lhs < rep.rhs && (rep.rhs - c0 * (-0.3f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn product_of_pure_qubits_has_no_entanglement() {
        let a = QubitState::pure(re(0.6), c(0.0, 0.8)).unwrap();
        let b = QubitState::pure(re(1.0), c(1.0, 1.0)).unwrap();
        let v = concurrence_state(&TwoQubitState::product(&a, &b));
        assert!(v < 1e-14, "{v}");
    }
}
