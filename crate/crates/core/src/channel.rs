//! Independent amplitude damping of both qubits in Kraus form.
//!
//! The map is written in the interaction picture: ρ̃(t) = Σ_μ K_μ ρ(0) K_μ†
//! with K₁ = D_A⊗D_B, K₂ = D_A⊗L_B, K₃ = L_A⊗D_B, K₄ = L_A⊗L_B, where
//! D = diag(γ, 1) and L has the single entry ω in its lower-left corner.

use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix};
use crate::states::TwoQubitState;

const COEFF_TOL: f64 = 1e-12;

/// Surviving amplitudes γ and decay amplitudes ω = √(1 − γ²) for each atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingCoefficients {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
}

impl DampingCoefficients {
    pub fn new(gamma_a: f64, gamma_b: f64, omega_a: f64, omega_b: f64) -> Result<Self> {
        let c = DampingCoefficients { gamma_a, gamma_b, omega_a, omega_b };
        c.validate()?;
        Ok(c)
    }

    /// Coefficients from the surviving amplitudes alone.
    pub fn from_gammas(gamma_a: f64, gamma_b: f64) -> Result<Self> {
        for g in [gamma_a, gamma_b] {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::invalid(format!("damping amplitude {g} outside [0, 1]")));
            }
        }
        Self::new(gamma_a, gamma_b, (1.0 - gamma_a * gamma_a).sqrt(), (1.0 - gamma_b * gamma_b).sqrt())
    }

    pub fn symmetric(gamma: f64) -> Result<Self> {
        Self::from_gammas(gamma, gamma)
    }

    pub fn identity() -> Self {
        DampingCoefficients { gamma_a: 1.0, gamma_b: 1.0, omega_a: 0.0, omega_b: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (g, w, atom) in [(self.gamma_a, self.omega_a, 'A'), (self.gamma_b, self.omega_b, 'B')] {
            if (g * g + w * w - 1.0).abs() > COEFF_TOL {
                return Err(Error::invalid(format!("atom {atom}: gamma^2 + omega^2 = {} != 1", g * g + w * w)));
            }
        }
        Ok(())
    }

    /// ∫(F_R + G_R) dt implied by the coefficients, i.e. −ln(γ_A γ_B).
    pub fn damping_exponent(&self) -> f64 {
        -(self.gamma_a * self.gamma_b).ln()
    }
}

/// Memoryless coefficients for equal atoms: γ = e^{−Γt/2}, ω = √(1 − e^{−Γt}).
pub fn coefficients_markov(rate: f64, t: f64) -> Result<DampingCoefficients> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::invalid(format!("decay rate must be positive, got {rate}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    let gamma = (-0.5 * rate * t).exp();
    let omega = (-(-rate * t).exp_m1()).sqrt();
    Ok(DampingCoefficients { gamma_a: gamma, gamma_b: gamma, omega_a: omega, omega_b: omega })
}

#[derive(Clone, Copy, Debug)]
pub struct KrausSet {
    pub k: [ComplexMatrix; 4],
}

impl KrausSet {
    /// Σ K_μ† K_μ.
    pub fn completeness(&self) -> ComplexMatrix {
        self.k.iter().fold(ComplexMatrix::zeros(4), |acc, k| acc + k.adjoint() * *k)
    }
}

fn survive(gamma: f64) -> ComplexMatrix {
    ComplexMatrix::diag_real(&[gamma, 1.0]).unwrap()
}

fn decay(omega: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m.set(1, 0, re(omega));
    m
}

pub fn build_kraus(c: &DampingCoefficients) -> Result<KrausSet> {
    c.validate()?;
    let (da, db) = (survive(c.gamma_a), survive(c.gamma_b));
    let (la, lb) = (decay(c.omega_a), decay(c.omega_b));
    let k = [
        ComplexMatrix::kron(&da, &db)?,
        ComplexMatrix::kron(&da, &lb)?,
        ComplexMatrix::kron(&la, &db)?,
        ComplexMatrix::kron(&la, &lb)?,
    ];
    let set = KrausSet { k };
    let err = set.completeness().max_abs_diff(&ComplexMatrix::identity(4));
    if err > COEFF_TOL {
        return Err(Error::invalid(format!("Kraus completeness violated by {err:e}")));
    }
    Ok(set)
}

/// K_μ ρ K_μ† for μ ∈ 1..=4, unnormalized.
pub fn kraus_term(rho0: &TwoQubitState, c: &DampingCoefficients, mu: usize) -> Result<ComplexMatrix> {
    if !(1..=4).contains(&mu) {
        return Err(Error::invalid(format!("Kraus index {mu} outside 1..=4")));
    }
    let k = build_kraus(c)?.k[mu - 1];
    Ok(k * *rho0.matrix() * k.adjoint())
}

/// Channel output in the interaction picture.
pub fn apply_channel(rho0: &TwoQubitState, c: &DampingCoefficients) -> Result<TwoQubitState> {
    let set = build_kraus(c)?;
    let rho = *rho0.matrix();
    let out = set
        .k
        .iter()
        .fold(ComplexMatrix::zeros(4), |acc, k| acc + *k * rho * k.adjoint());
    Ok(TwoQubitState::new_unchecked(out.hermitian_part()))
}
