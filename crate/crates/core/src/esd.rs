//! Sudden death of entanglement for the standard family
//! ρ(0) = ⅓[a|++⟩⟨++| + |+−⟩⟨+−| + |−+⟩⟨−+| + (1−a)|−−⟩⟨−−| + (|+−⟩⟨−+| + h.c.)].
//!
//! For equal atoms the concurrence is C(t) = ⅔ γ² max{0, f(t)} with
//! f = 1 − √(a(1 − a + 2ω² + ω⁴a)). f decreases in t towards 1 − √(3a), so
//! C reaches zero at a finite time exactly when a > 1/3.

use crate::channel::{coefficients_markov, DampingCoefficients};
use crate::entanglement::concurrence_x;
use crate::error::{Error, Result};
use crate::linalg::re;
use crate::states::XState;

pub const THRESHOLD: f64 = 1.0 / 3.0;
/// Parameters within this distance above 1/3 are still called asymptotic.
pub const THRESHOLD_TOL: f64 = 1e-9;
/// Root search runs over [0, SEARCH_SPAN/Γ].
pub const SEARCH_SPAN: f64 = 50.0;
/// Bisection and closed form must agree to this, in units of 1/Γ.
pub const CROSS_CHECK_TOL: f64 = 1e-10;
const MONOTONE_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EsdKind {
    Finite,
    Asymptotic,
}

impl EsdKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EsdKind::Finite => "finite",
            EsdKind::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EsdVerdict {
    pub kind: EsdKind,
    pub t_d: Option<f64>,
    pub a: f64,
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid(format!("family parameter a must lie in [0, 1], got {a}")));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::invalid(format!("decay rate must be positive, got {rate}")));
    }
    Ok(())
}

/// Closed-form evolved family for arbitrary (γ_A, γ_B).
pub fn family_trajectory_general(a: f64, coeffs: &DampingCoefficients) -> Result<XState> {
    check_a(a)?;
    let (ga2, gb2) = (coeffs.gamma_a * coeffs.gamma_a, coeffs.gamma_b * coeffs.gamma_b);
    let (wa2, wb2) = (coeffs.omega_a * coeffs.omega_a, coeffs.omega_b * coeffs.omega_b);
    let p = [
        ga2 * gb2 * a,
        ga2 + ga2 * wb2 * a,
        gb2 + wa2 * gb2 * a,
        1.0 - a + wa2 + wb2 + wa2 * wb2 * a,
    ]
    .map(|x| x / 3.0);
    XState::new(p, re(coeffs.gamma_a * coeffs.gamma_b / 3.0), re(0.0))
}

/// Equal atoms with surviving amplitude γ.
pub fn family_trajectory(a: f64, gamma: f64) -> Result<XState> {
    family_trajectory_general(a, &DampingCoefficients::symmetric(gamma)?)
}

/// f = 1 − √(a(1 − a + 2ω² + ω⁴a)).
pub fn family_f(a: f64, omega_sq: f64) -> f64 {
    1.0 - (a * (1.0 - a + 2.0 * omega_sq + omega_sq * omega_sq * a)).sqrt()
}

/// ⅔ γ² max{0, f}. Only valid for equal coefficients.
pub fn concurrence_family(a: f64, coeffs: &DampingCoefficients) -> Result<f64> {
    check_a(a)?;
    if coeffs.gamma_a != coeffs.gamma_b {
        return Err(Error::invalid(format!(
            "closed-form concurrence needs equal atoms, got gamma_a = {}, gamma_b = {}",
            coeffs.gamma_a, coeffs.gamma_b
        )));
    }
    let g2 = coeffs.gamma_a * coeffs.gamma_a;
    Ok(2.0 / 3.0 * g2 * family_f(a, coeffs.omega_a * coeffs.omega_a).max(0.0))
}

/// Memoryless concurrence, γ² = e^{−Γt}.
pub fn concurrence_markov(a: f64, rate: f64, t: f64) -> Result<f64> {
    check_a(a)?;
    check_rate(rate)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    let g2 = (-rate * t).exp();
    let w2 = -(-rate * t).exp_m1();
    Ok(2.0 / 3.0 * g2 * family_f(a, w2).max(0.0))
}

/// Root of a²ω⁴ + 2aω² + (a − a² − 1) = 0 converted to a time. None when a ≤ 1/3.
pub fn closed_form_td(a: f64, rate: f64) -> Option<f64> {
    if a <= THRESHOLD + THRESHOLD_TOL {
        return None;
    }
    let w2 = ((a * a - a + 2.0).sqrt() - 1.0) / a;
    Some(-(-w2).ln_1p() / rate)
}

fn f_at(a: f64, rate: f64, t: f64) -> f64 {
    family_f(a, -(-rate * t).exp_m1())
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // g(lo) > 0 ≥ g(hi); iterate to the floating-point limit
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Finite or asymptotic disentanglement. Finite times come from bisection on
/// f(t) and are cross-checked against the closed form.
pub fn disentanglement_time(a: f64, rate: f64) -> Result<EsdVerdict> {
    check_a(a)?;
    check_rate(rate)?;
    if a <= THRESHOLD + THRESHOLD_TOL {
        return Ok(EsdVerdict { kind: EsdKind::Asymptotic, t_d: None, a });
    }
    let span = SEARCH_SPAN / rate;
    let f = |t: f64| f_at(a, rate, t);

    let samples: Vec<(f64, f64)> = (0..=MONOTONE_SAMPLES)
        .map(|k| {
            let t = span * k as f64 / MONOTONE_SAMPLES as f64;
            (t, f(t))
        })
        .collect();
    let monotone = samples.windows(2).all(|w| w[1].1 <= w[0].1);
    let (lo, hi) = if monotone {
        (0.0, span)
    } else {
        // first bracket with a sign change
        match samples.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0) {
            Some(w) => (w[0].0, w[1].0),
            None => return Err(Error::Convergence(format!("no sign change of f on [0, {span}] for a = {a}"))),
        }
    };
    if !(f(lo) > 0.0 && f(hi) <= 0.0) {
        return Err(Error::Convergence(format!("f does not change sign on [0, {span}] for a = {a}")));
    }
    let t_d = bisect(f, lo, hi);

    let closed = closed_form_td(a, rate).expect("a above threshold");
    if (closed - t_d).abs() > CROSS_CHECK_TOL / rate {
        return Err(Error::Convergence(format!(
            "bisection t_d = {t_d} disagrees with closed form {closed} for a = {a}"
        )));
    }
    Ok(EsdVerdict { kind: EsdKind::Finite, t_d: Some(t_d), a })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    /// `values[i][j]` = C at (a[i], t[j]).
    pub values: Vec<Vec<f64>>,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid(format!("{name} grid must be sorted")));
    }
    Ok(())
}

pub fn sweep(a_grid: &[f64], t_grid: &[f64], rate: f64) -> Result<Surface> {
    check_grid("a", a_grid)?;
    check_grid("t", t_grid)?;
    let values = a_grid
        .iter()
        .map(|&a| t_grid.iter().map(|&t| concurrence_markov(a, rate, t)).collect())
        .collect::<Result<_>>()?;
    Ok(Surface { a: a_grid.to_vec(), t: t_grid.to_vec(), values })
}

/// γ(t) next to C(t): the local amplitude never vanishes, the concurrence may.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalNonlocal {
    pub t: Vec<f64>,
    pub local: Vec<f64>,
    pub concurrence: Vec<f64>,
}

pub fn local_vs_nonlocal_report(a: f64, rate: f64, t_grid: &[f64]) -> Result<LocalNonlocal> {
    check_grid("t", t_grid)?;
    let mut out = LocalNonlocal { t: t_grid.to_vec(), local: vec![], concurrence: vec![] };
    for &t in t_grid {
        out.local.push(coefficients_markov(rate, t)?.gamma_a);
        out.concurrence.push(concurrence_markov(a, rate, t)?);
    }
    Ok(out)
}

/// Concurrence of the exact family state; works for unequal atoms.
pub fn concurrence_general(a: f64, coeffs: &DampingCoefficients) -> Result<f64> {
    Ok(concurrence_x(&family_trajectory_general(a, coeffs)?))
}
