//! Two-qubit density matrices in the product basis
//! `|++⟩, |+−⟩, |−+⟩, |−−⟩` (indices 0..4), where `+` is the excited state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, re, ComplexMatrix, C64, HERMITIAN_TOL};

pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue a valid state may carry.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Off-X entries below this count as zero.
pub const X_PATTERN_TOL: f64 = 1e-10;

fn validate_density(rho: &ComplexMatrix, what: &str) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::invalid(format!("{what}: non-finite entry")));
    }
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::invalid(format!("{what}: not Hermitian (max |ρ - ρ†| = {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - re(1.0)).norm() > TRACE_TOL {
        return Err(Error::invalid(format!("{what}: trace {} != 1", tr.re)));
    }
    let min = hermitian_eigen(rho)?.min();
    if min < -POSITIVITY_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// A validated two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::invalid("two-qubit state must be 4x4"));
        }
        validate_density(&rho, "TwoQubitState")?;
        Ok(TwoQubitState { rho })
    }

    /// Skips validation; callers have already checked the invariants under
    /// their own tolerances.
    pub(crate) fn new_unchecked(rho: ComplexMatrix) -> Self {
        debug_assert_eq!(rho.dim(), 4);
        TwoQubitState { rho }
    }

    /// Pure state from a (not necessarily normalized) 4-component amplitude vector.
    pub fn pure(amplitudes: &[C64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::invalid("pure state needs a non-zero finite amplitude vector"));
        }
        let s = norm.sqrt();
        let v: Vec<C64> = amplitudes.iter().map(|z| z / s).collect();
        Ok(TwoQubitState { rho: ComplexMatrix::outer(&v)? })
    }

    /// `|i⟩⟨i|` for basis index `i` (0 = |++⟩ ... 3 = |−−⟩).
    pub fn basis(index: usize) -> Result<Self> {
        if index >= 4 {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = [re(0.0); 4];
        amps[index] = re(1.0);
        Self::pure(&amps)
    }

    /// (|+−⟩ + |−+⟩)/√2.
    pub fn bell() -> Self {
        Self::pure(&[re(0.0), re(1.0), re(1.0), re(0.0)]).expect("bell state")
    }

    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        let rho = ComplexMatrix::kron(a.matrix(), b.matrix()).expect("2x2 factors");
        TwoQubitState { rho }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rho.get(i, j)
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }
}

/// A validated single-qubit density matrix in the `{|+⟩, |−⟩}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    rho: ComplexMatrix,
}

impl QubitState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::invalid("qubit state must be 2x2"));
        }
        validate_density(&rho, "QubitState")?;
        Ok(QubitState { rho })
    }

    pub fn pure(up: C64, down: C64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("pure qubit needs a non-zero amplitude vector"));
        }
        Ok(QubitState { rho: ComplexMatrix::outer(&[up / n, down / n])? })
    }

    pub fn excited() -> Self {
        Self::pure(re(1.0), re(0.0)).unwrap()
    }

    pub fn ground() -> Self {
        Self::pure(re(0.0), re(1.0)).unwrap()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced state of one qubit: `Tr_B ρ` for `Subsystem::A`, `Tr_A ρ` for `B`.
pub fn partial_trace(state: &TwoQubitState, keep: Subsystem) -> QubitState {
    let rho = state.matrix();
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let z = match keep {
                Subsystem::A => rho.get(2 * i, 2 * j) + rho.get(2 * i + 1, 2 * j + 1),
                Subsystem::B => rho.get(i, j) + rho.get(2 + i, 2 + j),
            };
            out.set(i, j, z);
        }
    }
    QubitState { rho: out }
}

/// Density matrix whose only non-zero entries sit on the diagonal and
/// anti-diagonal. Entries are physically normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XState {
    /// Populations of |++⟩, |+−⟩, |−+⟩, |−−⟩.
    pub p: [f64; 4],
    /// ρ₂₃, coherence between |+−⟩ and |−+⟩.
    pub z23: C64,
    /// ρ₁₄, coherence between |++⟩ and |−−⟩.
    pub z14: C64,
}

const X_TOL: f64 = 1e-12;

impl XState {
    pub fn new(p: [f64; 4], z23: C64, z14: C64) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite()) || !z23.re.is_finite() || !z23.im.is_finite() || !z14.re.is_finite() || !z14.im.is_finite() {
            return Err(Error::invalid("XState: non-finite entry"));
        }
        if p.iter().any(|&x| x < -X_TOL) {
            return Err(Error::invalid(format!("XState: negative population in {p:?}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > X_TOL {
            return Err(Error::invalid(format!("XState: populations sum to {total}")));
        }
        if z23.norm() > (p[1].max(0.0) * p[2].max(0.0)).sqrt() + X_TOL {
            return Err(Error::invalid("XState: |z23| exceeds sqrt(p2 p3)"));
        }
        if z14.norm() > (p[0].max(0.0) * p[3].max(0.0)).sqrt() + X_TOL {
            return Err(Error::invalid("XState: |z14| exceeds sqrt(p1 p4)"));
        }
        Ok(XState { p, z23, z14 })
    }

    /// Dense 4×4 form.
    pub fn to_state(&self) -> TwoQubitState {
        let mut m = ComplexMatrix::diag_real(&self.p).unwrap();
        m.set(1, 2, self.z23);
        m.set(2, 1, self.z23.conj());
        m.set(0, 3, self.z14);
        m.set(3, 0, self.z14.conj());
        TwoQubitState::new_unchecked(m)
    }

    /// Reads the X entries of a dense state; every other entry must vanish.
    pub fn from_state(state: &TwoQubitState) -> Result<Self> {
        Self::from_matrix(state.matrix())
    }

    pub(crate) fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let on_x = i == j || i + j == 3;
                if !on_x && m.get(i, j).norm() >= X_PATTERN_TOL {
                    return Err(Error::Structure(format!(
                        "entry ({},{}) = {} breaks the X pattern",
                        i + 1,
                        j + 1,
                        m.get(i, j)
                    )));
                }
            }
        }
        let p = [m.get(0, 0).re, m.get(1, 1).re, m.get(2, 2).re, m.get(3, 3).re];
        Self::new(p, m.get(1, 2), m.get(0, 3))
    }
}

/// The one-parameter family with diagonal (a, 1, 1, 1−a)/3 and ρ₂₃ = 1/3:
/// one atom is excited but it is not known which, mixed with |++⟩ / |−−⟩.
pub fn standard_family(a: f64) -> Result<XState> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid(format!("family parameter a = {a} outside [0, 1]")));
    }
    let third = 1.0 / 3.0;
    XState::new([a / 3.0, third, third, (1.0 - a) / 3.0], re(third), re(0.0))
}

/// Seeded random two-qubit state, ρ = GG†/Tr(GG†) with G a complex Ginibre
/// matrix. The stream is ChaCha8 seeded from `seed`, so it is identical on
/// every platform.
pub fn random_state(seed: u64) -> TwoQubitState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            g.set(i, j, c(x, y));
        }
    }
    let w = g * g.adjoint();
    let rho = (w * (1.0 / w.trace().re)).hermitian_part();
    TwoQubitState::new_unchecked(rho)
}

/// Seeded random X state with arbitrary coherence phases.
pub fn random_xstate(seed: u64) -> XState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(0.0, 1.0).unwrap();
    let mut p = [0.0; 4];
    for x in p.iter_mut() {
        // exponential weights give a uniform point on the simplex
        let r: f64 = u.sample(&mut rng);
        *x = -(1.0 - r).ln();
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    let mut coherence = |pa: f64, pb: f64| {
        let r: f64 = u.sample(&mut rng);
        let phi: f64 = u.sample(&mut rng) * std::f64::consts::TAU;
        C64::from_polar(r * (pa * pb).sqrt(), phi)
    };
    let z23 = coherence(p[1], p[2]);
    let z14 = coherence(p[0], p[3]);
    XState::new(p, z23, z14).expect("random X state is valid by construction")
}
