//! Reservoir memory: correlation kernels α(τ), the fundamental solution b(t)
//! of
//!
//! ```text
//! ḃ(t) + iω b(t) + ∫₀ᵗ α(t−s) b(s) ds = 0,   b(0) = 1,
//! ```
//!
//! the time-local coefficient F(t) = (1/b(t)) ∫₀ᵗ α(t−s) b(s) ds, and the
//! damping amplitude γ(t) = exp[−∫₀ᵗ Re F(s) ds].
//!
//! Both solvers work in the frame rotating at the atomic frequency,
//! b(t) = e^{−iωt} b̃(t), so only the detuning from the reservoir has to be
//! resolved by the time step. The phase is restored exactly on output.
//!
//! * Exponential kernel α(τ) = (Γλ/2) e^{−(λ+iω_c)τ}: the memory integral
//!   z(t) = ∫₀ᵗ α(t−s) b(s) ds obeys ż = −(λ+iω_c) z + (Γλ/2) b, so (b, z) is
//!   a closed linear system integrated with RK4. Accuracy is checked by
//!   comparing against a run at twice the step.
//! * Tabulated kernel: trapezoidal product quadrature for the memory integral
//!   and the trapezoid rule in time. The scheme is linear in the new value, so
//!   the implicit step is solved exactly; the discrete residual is checked.

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// |b| below this makes F(t) singular.
pub const B_FLOOR: f64 = 1e-6;
/// Largest accepted step-doubling error estimate / discrete residual.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// F_R below this counts as a violation of asymptotic positivity.
pub const NEGATIVE_RATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedKernel {
    step: f64,
    samples: Vec<C64>,
}

impl TabulatedKernel {
    /// `samples[k]` is α(k·step).
    pub fn new(step: f64, samples: Vec<C64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("kernel grid step must be positive, got {step}")));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("tabulated kernel needs at least two samples"));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("tabulated kernel has a non-finite sample"));
        }
        Ok(TabulatedKernel { step, samples })
    }

    /// Parses lines `tau alpha_re alpha_im`. `#` starts a comment, blank
    /// lines are skipped. τ must start at 0 and be uniformly spaced.
    pub fn parse(text: &str) -> Result<Self> {
        let mut taus = Vec::new();
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 columns (tau alpha_re alpha_im), found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("{f:?}: {e}") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, message: format!("non-finite value {f:?}") });
                }
            }
            taus.push((line, vals[0]));
            samples.push(c(vals[1], vals[2]));
        }
        if taus.len() < 2 {
            return Err(Error::Parse { line: text.lines().count(), message: "need at least two samples".into() });
        }
        let (first_line, first) = taus[0];
        if first.abs() > 1e-12 {
            return Err(Error::Parse { line: first_line, message: format!("tau must start at 0, got {first}") });
        }
        let step = taus[1].1 - taus[0].1;
        if !(step > 0.0) {
            return Err(Error::Parse { line: taus[1].0, message: "tau must be strictly increasing".into() });
        }
        for (k, &(line, tau)) in taus.iter().enumerate() {
            let want = k as f64 * step;
            if (tau - want).abs() > 1e-9 * step.max(want) {
                return Err(Error::Parse { line, message: format!("non-uniform tau grid: {tau} (expected {want})") });
            }
        }
        Self::new(step, samples)
    }

    /// Samples `kernel` on `n` points spaced `step` apart.
    pub fn sample(kernel: &Kernel, step: f64, n: usize) -> Result<Self> {
        Self::new(step, (0..n).map(|k| kernel.eval(k as f64 * step)).collect())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn span(&self) -> f64 {
        self.step * (self.samples.len() - 1) as f64
    }

    /// Linear interpolation; τ must lie within the table.
    fn eval(&self, tau: f64) -> C64 {
        let x = tau / self.step;
        let k = (x.floor() as usize).min(self.samples.len() - 2);
        let frac = x - k as f64;
        if frac.abs() < 1e-12 {
            return self.samples[k];
        }
        self.samples[k] * (1.0 - frac) + self.samples[k + 1] * frac
    }
}

/// Reservoir correlation function α(τ), τ ≥ 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    /// α(τ) = (Γλ/2) e^{−(λ + iω_c) τ}. Tends to the memoryless limit with
    /// decay rate Γ as λ → ∞.
    Exponential { strength: f64, memory_rate: f64, center_frequency: f64 },
    Tabulated(TabulatedKernel),
}

impl Kernel {
    pub fn exponential(strength: f64, memory_rate: f64, center_frequency: f64) -> Result<Self> {
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::invalid(format!("kernel strength must be non-negative, got {strength}")));
        }
        if !(memory_rate > 0.0) || !memory_rate.is_finite() {
            return Err(Error::invalid(format!("memory rate must be positive, got {memory_rate}")));
        }
        if !center_frequency.is_finite() {
            return Err(Error::invalid("center frequency must be finite"));
        }
        Ok(Kernel::Exponential { strength, memory_rate, center_frequency })
    }

    pub fn eval(&self, tau: f64) -> C64 {
        match self {
            Kernel::Exponential { strength, memory_rate, center_frequency } => {
                C64::from_polar(0.5 * strength * memory_rate * (-memory_rate * tau).exp(), -center_frequency * tau)
            }
            Kernel::Tabulated(t) => t.eval(tau),
        }
    }
}

/// Weak-coupling Lamb shift of the exponential kernel,
/// (Γλ/2)·Δ/(λ² + Δ²) with Δ = ω_atom − ω_c.
pub fn pseudomode_lamb_shift(strength: f64, memory_rate: f64, detuning: f64) -> f64 {
    0.5 * strength * memory_rate * detuning / (memory_rate * memory_rate + detuning * detuning)
}

#[derive(Clone, Debug)]
pub struct AmplitudeSolution {
    pub dt: f64,
    pub omega_atom: f64,
    pub times: Vec<f64>,
    /// b(t) in the lab frame.
    pub b: Vec<C64>,
    /// ∫₀ᵗ α(t−s) b(s) ds in the lab frame.
    pub memory: Vec<C64>,
    /// F(t); empty until [`coefficient_f`] has run.
    pub f: Vec<C64>,
    /// γ(t); empty until [`gamma_of_t`] has run.
    pub gamma: Vec<f64>,
    /// Step-doubling error estimate (exponential) or max discrete residual
    /// (tabulated).
    pub error_estimate: f64,
}

impl AmplitudeSolution {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// ∫₀ᵗ F_R ds at every grid point (trapezoid).
    pub fn damping_integral(&self) -> Vec<f64> {
        cumulative_trapezoid(&self.f.iter().map(|z| z.re).collect::<Vec<_>>(), self.dt)
    }

    /// First time at which F_R < −1e-9, if any.
    pub fn first_negative_rate(&self) -> Option<f64> {
        self.f.iter().zip(&self.times).find(|(z, _)| z.re < -NEGATIVE_RATE_TOL).map(|(_, &t)| t)
    }
}

fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

fn grid(t_max: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_max >= dt) || !t_max.is_finite() {
        return Err(Error::invalid(format!("t_max = {t_max} must be at least dt = {dt}")));
    }
    Ok((t_max / dt - 1e-9).ceil() as usize)
}

/// RK4 for the rotating-frame pair (b̃, z̃). Returns samples at every step.
fn rk4_pseudomode(coupling: f64, decay: C64, steps: usize, dt: f64) -> (Vec<C64>, Vec<C64>) {
    let rhs = |b: C64, z: C64| (-z, decay * z + b * coupling);
    let mut bs = Vec::with_capacity(steps + 1);
    let mut zs = Vec::with_capacity(steps + 1);
    let (mut b, mut z) = (c(1.0, 0.0), c(0.0, 0.0));
    bs.push(b);
    zs.push(z);
    for _ in 0..steps {
        let (k1b, k1z) = rhs(b, z);
        let (k2b, k2z) = rhs(b + k1b * (0.5 * dt), z + k1z * (0.5 * dt));
        let (k3b, k3z) = rhs(b + k2b * (0.5 * dt), z + k2z * (0.5 * dt));
        let (k4b, k4z) = rhs(b + k3b * dt, z + k3z * dt);
        b += (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (dt / 6.0);
        z += (k1z + k2z * 2.0 + k3z * 2.0 + k4z) * (dt / 6.0);
        bs.push(b);
        zs.push(z);
    }
    (bs, zs)
}

fn solve_exponential(
    strength: f64,
    memory_rate: f64,
    center_frequency: f64,
    omega_atom: f64,
    steps: usize,
    dt: f64,
) -> (Vec<C64>, Vec<C64>, f64) {
    let coupling = 0.5 * strength * memory_rate;
    // rotating frame: ż̃ = −(λ + i(ω_c − ω)) z̃ + (Γλ/2) b̃
    let decay = c(-memory_rate, -(center_frequency - omega_atom));
    let (b, z) = rk4_pseudomode(coupling, decay, steps, dt);
    let (b2, _) = rk4_pseudomode(coupling, decay, steps / 2, 2.0 * dt);
    let est = b2
        .iter()
        .enumerate()
        .map(|(k, coarse)| (b[2 * k] - coarse).norm() / 15.0)
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
    (b, z, est)
}

fn solve_tabulated(kernel: &TabulatedKernel, omega_atom: f64, steps: usize, dt: f64) -> Result<(Vec<C64>, Vec<C64>, f64)> {
    let t_max = steps as f64 * dt;
    if kernel.span() + 1e-12 * t_max.max(1.0) < t_max {
        return Err(Error::invalid(format!(
            "tabulated kernel covers [0, {}] but the solve needs [0, {t_max}]",
            kernel.span()
        )));
    }
    // rotating-frame kernel α(τ) e^{iωτ}
    let k: Vec<C64> = (0..=steps)
        .map(|m| {
            let tau = (m as f64 * dt).min(kernel.span());
            kernel.eval(tau) * C64::from_polar(1.0, omega_atom * m as f64 * dt)
        })
        .collect();
    let mut b = vec![c(1.0, 0.0)];
    let mut z = vec![c(0.0, 0.0)];
    let mut worst: f64 = 0.0;
    let h = 0.5 * dt;
    for n in 1..=steps {
        // known part of z̃_n
        let mut known = k[n] * b[0] * h;
        for j in 1..n {
            known += k[n - j] * b[j] * dt;
        }
        let bn = (b[n - 1] - (z[n - 1] + known) * h) / (c(1.0, 0.0) + k[0] * h * h);
        let zn = known + k[0] * bn * h;
        let residual = (bn - b[n - 1] + (z[n - 1] + zn) * h).norm();
        worst = worst.max(if residual.is_nan() { f64::INFINITY } else { residual });
        b.push(bn);
        z.push(zn);
    }
    Ok((b, z, worst))
}

/// Solves for b(t) on `[0, t_max]` with step `dt`.
pub fn solve_amplitude(kernel: &Kernel, omega_atom: f64, t_max: f64, dt: f64) -> Result<AmplitudeSolution> {
    if !omega_atom.is_finite() {
        return Err(Error::invalid("atomic frequency must be finite"));
    }
    let steps = grid(t_max, dt)?;
    let (b_rot, z_rot, est) = match kernel {
        Kernel::Exponential { strength, memory_rate, center_frequency } => {
            solve_exponential(*strength, *memory_rate, *center_frequency, omega_atom, steps, dt)
        }
        Kernel::Tabulated(tab) => solve_tabulated(tab, omega_atom, steps, dt)?,
    };
    if !(est <= RESIDUAL_TOL) {
        return Err(Error::Convergence(format!(
            "amplitude error estimate {est:e} exceeds {RESIDUAL_TOL:e}; reduce dt (currently {dt})"
        )));
    }
    if let Some(n) = b_rot.iter().position(|z| z.norm() > 1.0 + RESIDUAL_TOL) {
        return Err(Error::Convergence(format!(
            "|b| = {} exceeds 1 at t = {}; the kernel is not dissipative or dt is too coarse",
            b_rot[n].norm(),
            n as f64 * dt
        )));
    }
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
    let phase: Vec<C64> = times.iter().map(|&t| C64::from_polar(1.0, -omega_atom * t)).collect();
    let b = b_rot.iter().zip(&phase).map(|(x, p)| x * p).collect();
    let memory = z_rot.iter().zip(&phase).map(|(x, p)| x * p).collect();
    Ok(AmplitudeSolution {
        dt,
        omega_atom,
        times,
        b,
        memory,
        f: Vec::new(),
        gamma: Vec::new(),
        error_estimate: est,
    })
}

/// Rejects solutions where b(t) comes within `B_FLOOR` of zero, either at a
/// grid point or on the straight segment between two of them (a zero
/// crossing usually falls between samples).
fn check_floor(sol: &AmplitudeSolution) -> Result<()> {
    if sol.b[0].norm() < B_FLOOR {
        return Err(Error::SingularCoefficient { time: 0.0, floor: B_FLOOR });
    }
    for (n, w) in sol.b.windows(2).enumerate() {
        let d = w[1] - w[0];
        let len2 = d.norm_sqr();
        let s = if len2 > 0.0 { (-(w[0].conj() * d).re / len2).clamp(0.0, 1.0) } else { 0.0 };
        if (w[0] + d * s).norm() < B_FLOOR {
            return Err(Error::SingularCoefficient { time: sol.times[n] + s * sol.dt, floor: B_FLOOR });
        }
    }
    Ok(())
}

/// Fills `sol.f` with F(t) = (1/b(t))∫₀ᵗ α(t−s)b(s) ds, using the memory
/// integral carried by the solver.
pub fn coefficient_f(sol: &mut AmplitudeSolution) -> Result<()> {
    check_floor(sol)?;
    sol.f = sol.memory.iter().zip(&sol.b).map(|(z, b)| z / b).collect();
    Ok(())
}

/// F(t) = (−ḃ − iωb)/b with ḃ from second-order finite differences
/// (centered inside, one-sided at the ends).
pub fn coefficient_f_from_derivative(sol: &AmplitudeSolution) -> Result<Vec<C64>> {
    check_floor(sol)?;
    let n = sol.b.len();
    if n < 3 {
        return Err(Error::invalid("need at least three samples for finite differences"));
    }
    let b = &sol.b;
    let h = sol.dt;
    let iw = c(0.0, sol.omega_atom);
    Ok((0..n)
        .map(|k| {
            let db = if k == 0 {
                (b[1] * 4.0 - b[0] * 3.0 - b[2]) / (2.0 * h)
            } else if k == n - 1 {
                (b[n - 1] * 3.0 - b[n - 2] * 4.0 + b[n - 3]) / (2.0 * h)
            } else {
                (b[k + 1] - b[k - 1]) / (2.0 * h)
            };
            (-db - iw * b[k]) / b[k]
        })
        .collect())
}

/// Fills `sol.gamma` with exp[−∫₀ᵗ F_R ds] (trapezoid).
pub fn gamma_of_t(sol: &mut AmplitudeSolution) -> Result<()> {
    if sol.f.len() != sol.len() {
        return Err(Error::invalid("gamma_of_t needs F(t); run coefficient_f first"));
    }
    sol.gamma = sol.damping_integral().into_iter().map(|x| (-x).exp()).collect();
    Ok(())
}

/// `solve_amplitude` followed by `coefficient_f` and `gamma_of_t`.
pub fn damping_profile(kernel: &Kernel, omega_atom: f64, t_max: f64, dt: f64) -> Result<AmplitudeSolution> {
    let mut sol = solve_amplitude(kernel, omega_atom, t_max, dt)?;
    coefficient_f(&mut sol)?;
    gamma_of_t(&mut sol)?;
    Ok(sol)
}
