//! Direct integration of the time-local master equation
//!
//! ```text
//! dρ/dt = −i[H'(t), ρ]
//!         + F_R(t)([σ₋ᴬ, ρσ₊ᴬ] + [σ₋ᴬρ, σ₊ᴬ])
//!         + G_R(t)([σ₋ᴮ, ρσ₊ᴮ] + [σ₋ᴮρ, σ₊ᴮ]),
//! H'(t) = ½(ω_A + F_I(t))σ_zᴬ + ½(ω_B + G_I(t))σ_zᴮ,
//! ```
//!
//! with fixed-step RK4. This is the independent check on the Kraus channel:
//! rotated into the interaction picture, the trajectory must reproduce the
//! channel output.

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, pauli, ComplexMatrix, C64};
use crate::memory::AmplitudeSolution;
use crate::states::TwoQubitState;

/// Eigenvalues below −this abort the integration.
pub const POSITIVITY_FAILURE: f64 = 1e-8;

/// Time-dependent coefficients F(t) (atom A) and G(t) (atom B).
#[derive(Clone, Debug, PartialEq)]
pub enum RateFunctions {
    /// F = Γ_A/2, G = Γ_B/2, no Lamb shift.
    Markov { rate_a: f64, rate_b: f64 },
    /// Samples at `k·step`, linearly interpolated.
    Tabulated { step: f64, f: Vec<C64>, g: Vec<C64> },
}

impl RateFunctions {
    pub fn markov(rate_a: f64, rate_b: f64) -> Result<Self> {
        for r in [rate_a, rate_b] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::invalid(format!("decay rate must be non-negative, got {r}")));
            }
        }
        Ok(RateFunctions::Markov { rate_a, rate_b })
    }

    pub fn zero() -> Self {
        RateFunctions::Markov { rate_a: 0.0, rate_b: 0.0 }
    }

    /// Rates from two solved amplitude problems on the same grid.
    pub fn from_solutions(a: &AmplitudeSolution, b: &AmplitudeSolution) -> Result<Self> {
        if a.f.is_empty() || b.f.is_empty() {
            return Err(Error::invalid("amplitude solutions carry no F(t); run coefficient_f first"));
        }
        if a.f.len() != b.f.len() || (a.dt - b.dt).abs() > 1e-15 * a.dt {
            return Err(Error::invalid("rate tables for A and B must share one grid"));
        }
        Ok(RateFunctions::Tabulated { step: a.dt, f: a.f.clone(), g: b.f.clone() })
    }

    pub fn table_step(&self) -> Option<f64> {
        match self {
            RateFunctions::Markov { .. } => None,
            RateFunctions::Tabulated { step, .. } => Some(*step),
        }
    }

    fn span(&self) -> f64 {
        match self {
            RateFunctions::Markov { .. } => f64::INFINITY,
            RateFunctions::Tabulated { step, f, .. } => step * (f.len() - 1) as f64,
        }
    }

    /// (F(t), G(t)).
    pub fn at(&self, t: f64) -> (C64, C64) {
        match self {
            RateFunctions::Markov { rate_a, rate_b } => (c(0.5 * rate_a, 0.0), c(0.5 * rate_b, 0.0)),
            RateFunctions::Tabulated { step, f, g } => {
                let x = (t / step).max(0.0);
                let k = (x.floor() as usize).min(f.len() - 2);
                let w = (x - k as f64).clamp(0.0, 1.0);
                (f[k] * (1.0 - w) + f[k + 1] * w, g[k] * (1.0 - w) + g[k + 1] * w)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomParams {
    pub omega_a: f64,
    pub omega_b: f64,
}

impl AtomParams {
    pub fn new(omega_a: f64, omega_b: f64) -> Result<Self> {
        if !omega_a.is_finite() || !omega_b.is_finite() {
            return Err(Error::invalid("atomic frequencies must be finite"));
        }
        Ok(AtomParams { omega_a, omega_b })
    }
}

/// ±1 for excited/ground of atom A and B in basis index `k`.
fn signs(k: usize) -> (f64, f64) {
    let s = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
    (s(k / 2), s(k % 2))
}

struct Jumps {
    lower_a: ComplexMatrix,
    lower_b: ComplexMatrix,
    excited_a: ComplexMatrix,
    excited_b: ComplexMatrix,
}

impl Jumps {
    fn new() -> Self {
        let id = pauli::identity();
        let lower_a = ComplexMatrix::kron(&pauli::lower(), &id).unwrap();
        let lower_b = ComplexMatrix::kron(&id, &pauli::lower()).unwrap();
        Jumps {
            excited_a: lower_a.adjoint() * lower_a,
            excited_b: lower_b.adjoint() * lower_b,
            lower_a,
            lower_b,
        }
    }
}

fn rhs_with(jumps: &Jumps, rho: &ComplexMatrix, t: f64, rates: &RateFunctions, atoms: &AtomParams) -> ComplexMatrix {
    let (f, g) = rates.at(t);
    let wa = atoms.omega_a + f.im;
    let wb = atoms.omega_b + g.im;
    let energy: [f64; 4] = std::array::from_fn(|k| {
        let (sa, sb) = signs(k);
        0.5 * (wa * sa + wb * sb)
    });
    let mut out = ComplexMatrix::zeros(4);
    for j in 0..4 {
        for k in 0..4 {
            out.set(j, k, c(0.0, -(energy[j] - energy[k])) * rho.get(j, k));
        }
    }
    // [L, ρL†] + [Lρ, L†] = 2LρL† − {L†L, ρ}
    for (rate, l, n) in [(f.re, &jumps.lower_a, &jumps.excited_a), (g.re, &jumps.lower_b, &jumps.excited_b)] {
        if rate == 0.0 {
            continue;
        }
        let jump = *l * *rho * l.adjoint() * 2.0;
        let anti = *n * *rho + *rho * *n;
        out = out + (jump - anti) * rate;
    }
    out
}

/// Right-hand side of the master equation at time `t`.
pub fn master_rhs(rho: &ComplexMatrix, t: f64, rates: &RateFunctions, atoms: &AtomParams) -> ComplexMatrix {
    rhs_with(&Jumps::new(), rho, t, rates, atoms)
}

/// Accumulated local phases θ_A = ∫₀ᵗ(ω_A + F_I), θ_B = ∫₀ᵗ(ω_B + G_I).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LocalPhases {
    pub a: f64,
    pub b: f64,
}

impl LocalPhases {
    /// Trapezoid accumulation on a grid of step ≤ `dt` ending at `t`.
    pub fn accumulate(rates: &RateFunctions, atoms: &AtomParams, t: f64, dt: f64) -> Self {
        if t <= 0.0 {
            return LocalPhases::default();
        }
        let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let mut phases = LocalPhases::default();
        let mut prev = rates.at(0.0);
        for k in 1..=n {
            let next = rates.at(k as f64 * h);
            phases.a += 0.5 * h * (prev.0.im + next.0.im);
            phases.b += 0.5 * h * (prev.1.im + next.1.im);
            prev = next;
        }
        phases.a += atoms.omega_a * t;
        phases.b += atoms.omega_b * t;
        phases
    }
}

/// ρ̃ = e^{i∫H'} ρ e^{−i∫H'}. A local unitary, so the spectrum and the
/// concurrence are unchanged.
pub fn to_interaction_picture(state: &TwoQubitState, phases: LocalPhases) -> TwoQubitState {
    let phi: [f64; 4] = std::array::from_fn(|k| {
        let (sa, sb) = signs(k);
        0.5 * (phases.a * sa + phases.b * sb)
    });
    let mut out = *state.matrix();
    for j in 0..4 {
        for k in 0..4 {
            out.set(j, k, state.get(j, k) * C64::from_polar(1.0, phi[j] - phi[k]));
        }
    }
    TwoQubitState::new_unchecked(out)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Schrödinger-picture states.
    pub states: Vec<TwoQubitState>,
    pub phases: Vec<LocalPhases>,
    /// ∫₀ᵗ F_R and ∫₀ᵗ G_R, so γ_A = e^{−damping.0}.
    pub damping: Vec<(f64, f64)>,
    /// |Tr ρ(t) − 1|.
    pub trace_error: Vec<f64>,
    pub min_eigenvalue: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn interaction_state(&self, i: usize) -> TwoQubitState {
        to_interaction_picture(&self.states[i], self.phases[i])
    }

    pub fn max_trace_error(&self) -> f64 {
        self.trace_error.iter().copied().fold(0.0, f64::max)
    }
}

/// RK4 with every stage state symmetrized. The trace is not renormalized;
/// its drift is recorded in `trace_error`.
pub fn integrate_master(
    rho0: &TwoQubitState,
    rates: &RateFunctions,
    atoms: &AtomParams,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::invalid(format!("t_max must be non-negative, got {t_max}")));
    }
    if rates.span() + 1e-12 * t_max.max(1.0) < t_max {
        return Err(Error::invalid(format!(
            "rate tables cover [0, {}] but integration runs to {t_max}",
            rates.span()
        )));
    }
    let dt = rates.table_step().map_or(dt, |s| dt.min(s));
    let steps = if t_max == 0.0 { 0 } else { (t_max / dt - 1e-9).ceil() as usize };
    let h = if steps == 0 { dt } else { t_max / steps as f64 };

    let jumps = Jumps::new();
    let rhs = |rho: &ComplexMatrix, t: f64| rhs_with(&jumps, rho, t, rates, atoms);

    let mut traj = Trajectory {
        dt: h,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        phases: Vec::with_capacity(steps + 1),
        damping: Vec::with_capacity(steps + 1),
        trace_error: Vec::with_capacity(steps + 1),
        min_eigenvalue: f64::INFINITY,
    };
    let mut rho = *rho0.matrix();
    let mut phases = LocalPhases::default();
    let mut damping = (0.0, 0.0);
    let mut prev_rates = rates.at(0.0);

    let record = |traj: &mut Trajectory, t: f64, rho: &ComplexMatrix, phases, damping| -> Result<()> {
        let min = hermitian_eigen(rho)?.min();
        if min < -POSITIVITY_FAILURE {
            return Err(Error::IntegratorFailure {
                time: t,
                reason: format!("density matrix eigenvalue {min:e} below -{POSITIVITY_FAILURE:e}"),
            });
        }
        traj.min_eigenvalue = traj.min_eigenvalue.min(min);
        traj.times.push(t);
        traj.states.push(TwoQubitState::new_unchecked(*rho));
        traj.phases.push(phases);
        traj.damping.push(damping);
        traj.trace_error.push((rho.trace().re - 1.0).abs());
        Ok(())
    };
    record(&mut traj, 0.0, &rho, phases, damping)?;

    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(&rho, t);
        let k2 = rhs(&(rho + k1 * (0.5 * h)).hermitian_part(), t + 0.5 * h);
        let k3 = rhs(&(rho + k2 * (0.5 * h)).hermitian_part(), t + 0.5 * h);
        let k4 = rhs(&(rho + k3 * h).hermitian_part(), t + h);
        rho = (rho + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)).hermitian_part();
        if !rho.is_finite() {
            return Err(Error::IntegratorFailure { time: t + h, reason: "non-finite density matrix".into() });
        }

        let next_t = (n + 1) as f64 * h;
        let next_rates = rates.at(next_t);
        phases.a += atoms.omega_a * h + 0.5 * h * (prev_rates.0.im + next_rates.0.im);
        phases.b += atoms.omega_b * h + 0.5 * h * (prev_rates.1.im + next_rates.1.im);
        damping.0 += 0.5 * h * (prev_rates.0.re + next_rates.0.re);
        damping.1 += 0.5 * h * (prev_rates.1.re + next_rates.1.re);
        prev_rates = next_rates;
        record(&mut traj, next_t, &rho, phases, damping)?;
    }
    Ok(traj)
}

/// |⟨σ₋ᴬ(t)⟩| and |⟨σ₋ᴮ(t)⟩| along a trajectory (|⟨σ₊⟩| is the same).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCoherence {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn local_coherence(state: &TwoQubitState) -> (f64, f64) {
    let id = pauli::identity();
    let la = ComplexMatrix::kron(&pauli::lower(), &id).unwrap();
    let lb = ComplexMatrix::kron(&id, &pauli::lower()).unwrap();
    let rho = *state.matrix();
    ((rho * la).trace().norm(), (rho * lb).trace().norm())
}

pub fn local_coherence_decay(traj: &Trajectory) -> LocalCoherence {
    let (a, b) = traj.states.iter().map(local_coherence).unzip();
    LocalCoherence { a, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, coefficients_markov, DampingCoefficients};
    use crate::entanglement::concurrence_state;
    use crate::linalg::re;
    use crate::memory::{damping_profile, Kernel};
    use crate::states::{random_state, standard_family, QubitState};

    fn atoms() -> AtomParams {
        AtomParams::new(2.0, 1.5).unwrap()
    }

    #[test]
    fn ground_state_is_fixed() {
        let ground = *TwoQubitState::basis(3).unwrap().matrix();
        let rates = RateFunctions::markov(1.0, 0.7).unwrap();
        assert_eq!(master_rhs(&ground, 0.3, &rates, &atoms()).max_abs(), 0.0);
    }

    #[test]
    fn rhs_is_hermitian_and_traceless() {
        let rates = RateFunctions::markov(1.0, 0.4).unwrap();
        for seed in 0..50 {
            let d = master_rhs(random_state(seed).matrix(), 0.0, &rates, &atoms());
            assert!(d.hermiticity_error() < 1e-15);
            assert!(d.trace().norm() < 1e-13);
        }
    }

    #[test]
    fn inner_coherence_rate() {
        // dρ₂₃/dt = −(Γ + iΔ)ρ₂₃ with Δ = ω_A − ω_B for equal Markov rates
        let gamma = 1.3;
        let x = standard_family(1.0).unwrap().to_state();
        let rates = RateFunctions::markov(gamma, gamma).unwrap();
        let d = master_rhs(x.matrix(), 0.0, &rates, &atoms());
        let delta = atoms().omega_a - atoms().omega_b;
        let want = c(-gamma, -delta) * x.get(1, 2);
        assert!((d.get(1, 2) - want).norm() < 1e-15);
        // populations: ṗ₁ = −2Γp₁, ṗ₄ = Γ(p₂ + p₃)
        assert!((d.get(0, 0) - re(-2.0 * gamma / 3.0)).norm() < 1e-15);
        assert!((d.get(3, 3) - re(gamma * 2.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_limit() {
        let r0 = random_state(4);
        let traj = integrate_master(&r0, &RateFunctions::zero(), &atoms(), 2.0, 1e-3).unwrap();
        let p0 = r0.purity();
        for (i, s) in traj.states.iter().enumerate() {
            assert!((s.purity() - p0).abs() < 1e-12);
            // e^{−iHt} ρ e^{iHt} undoes exactly through the interaction picture
            assert!(traj.interaction_state(i).matrix().max_abs_diff(r0.matrix()) < 1e-9);
        }
    }

    #[test]
    fn kraus_equivalence_markov() {
        let gamma = 1.0;
        let r0 = standard_family(1.0).unwrap().to_state();
        let rates = RateFunctions::markov(gamma, gamma).unwrap();
        let traj = integrate_master(&r0, &rates, &atoms(), 3.0, 1e-3).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &t) in traj.times.iter().enumerate() {
            let kraus = apply_channel(&r0, &coefficients_markov(gamma, t).unwrap()).unwrap();
            worst = worst.max(traj.interaction_state(i).matrix().max_abs_diff(kraus.matrix()));
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(traj.max_trace_error() < 1e-10);
    }

    #[test]
    fn kraus_equivalence_random_unequal() {
        let rates = RateFunctions::markov(0.8, 1.7).unwrap();
        for seed in 0..3 {
            let r0 = random_state(seed);
            let traj = integrate_master(&r0, &rates, &atoms(), 2.0, 1e-3).unwrap();
            for (i, &t) in traj.times.iter().enumerate().step_by(50) {
                let coeffs = DampingCoefficients::from_gammas((-0.4 * t).exp(), (-0.85 * t).exp()).unwrap();
                let kraus = apply_channel(&r0, &coeffs).unwrap();
                assert!(traj.interaction_state(i).matrix().max_abs_diff(kraus.matrix()) < 1e-9);
            }
        }
    }

    #[test]
    fn kraus_equivalence_with_memory() {
        let gamma = 1.0;
        let lam = 20.0;
        let (wa, wb) = (2.0, 1.5);
        let dt = 5e-4;
        let sa = damping_profile(&Kernel::exponential(gamma, lam, 1.0).unwrap(), wa, 3.0, dt).unwrap();
        let sb = damping_profile(&Kernel::exponential(gamma, lam, 1.2).unwrap(), wb, 3.0, dt).unwrap();
        let rates = RateFunctions::from_solutions(&sa, &sb).unwrap();
        let r0 = random_state(8);
        let traj = integrate_master(&r0, &rates, &AtomParams::new(wa, wb).unwrap(), 3.0, 1e-3).unwrap();
        assert_eq!(traj.len(), sa.len());
        for i in (0..traj.len()).step_by(40) {
            let coeffs = DampingCoefficients::from_gammas(sa.gamma[i], sb.gamma[i]).unwrap();
            let kraus = apply_channel(&r0, &coeffs).unwrap();
            let diff = traj.interaction_state(i).matrix().max_abs_diff(kraus.matrix());
            assert!(diff < 1e-6, "t={}: {diff}", traj.times[i]);
        }
    }

    #[test]
    fn trace_and_hermiticity_over_long_run() {
        let traj = integrate_master(&random_state(12), &RateFunctions::markov(1.0, 1.0).unwrap(), &atoms(), 10.0, 1e-3).unwrap();
        assert!(traj.max_trace_error() < 1e-10);
        assert!(traj.states.iter().all(|s| s.matrix().hermiticity_error() < 1e-12));
        assert!(traj.min_eigenvalue > -1e-10);
    }

    #[test]
    fn interaction_picture_properties() {
        let r = random_state(2);
        assert_eq!(to_interaction_picture(&r, LocalPhases::default()), r);
        let diag = standard_family(0.4).unwrap().to_state();
        let mut diag_m = *diag.matrix();
        diag_m.set(1, 2, re(0.0));
        diag_m.set(2, 1, re(0.0));
        let diag = TwoQubitState::new(diag_m).unwrap();
        let phases = LocalPhases { a: 1.3, b: -0.4 };
        assert_eq!(to_interaction_picture(&diag, phases), diag);
        let rotated = to_interaction_picture(&r, phases);
        assert!((concurrence_state(&rotated) - concurrence_state(&r)).abs() < 1e-12);
    }

    #[test]
    fn phase_accumulation() {
        let p = LocalPhases::accumulate(&RateFunctions::markov(1.0, 1.0).unwrap(), &atoms(), 2.0, 1e-2);
        assert!((p.a - 4.0).abs() < 1e-12 && (p.b - 3.0).abs() < 1e-12);
    }

    #[test]
    fn local_coherence_decays_with_gamma() {
        let gamma = 1.0;
        let plus = QubitState::pure(re(1.0), re(1.0)).unwrap();
        let r0 = TwoQubitState::product(&plus, &QubitState::ground());
        let traj = integrate_master(&r0, &RateFunctions::markov(gamma, gamma).unwrap(), &atoms(), 3.0, 1e-3).unwrap();
        let lc = local_coherence_decay(&traj);
        for (t, a) in traj.times.iter().zip(&lc.a) {
            assert!((a - 0.5 * (-0.5 * gamma * t).exp()).abs() < 1e-10);
        }
        assert!(lc.b.iter().all(|&x| x < 1e-15));

        let diag = TwoQubitState::basis(1).unwrap();
        let traj = integrate_master(&diag, &RateFunctions::markov(gamma, gamma).unwrap(), &atoms(), 1.0, 1e-3).unwrap();
        let lc = local_coherence_decay(&traj);
        assert!(lc.a.iter().chain(&lc.b).all(|&x| x == 0.0));
    }

    #[test]
    fn local_coherence_ratio_follows_memory_gamma() {
        let dt = 5e-4;
        let sol = damping_profile(&Kernel::exponential(1.0, 15.0, 0.0).unwrap(), 0.5, 2.0, dt).unwrap();
        let rates = RateFunctions::from_solutions(&sol, &sol).unwrap();
        let plus = QubitState::pure(re(1.0), c(0.0, 1.0)).unwrap();
        let r0 = TwoQubitState::product(&plus, &plus);
        let traj = integrate_master(&r0, &rates, &AtomParams::new(0.5, 0.5).unwrap(), 2.0, dt).unwrap();
        let lc = local_coherence_decay(&traj);
        for i in 0..traj.len() {
            let ratio = lc.a[i] / lc.a[0];
            assert!((ratio - sol.gamma[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_short_tables() {
        let sol = damping_profile(&Kernel::exponential(1.0, 15.0, 0.0).unwrap(), 0.0, 1.0, 1e-3).unwrap();
        let rates = RateFunctions::from_solutions(&sol, &sol).unwrap();
        assert!(integrate_master(&random_state(0), &rates, &atoms(), 2.0, 1e-3).is_err());
        assert!(integrate_master(&random_state(0), &rates, &atoms(), 1.0, 0.0).is_err());
    }
}
