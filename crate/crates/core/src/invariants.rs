//! Self-check suite run by `esdkit check`. Each entry is a cheap version of
//! a property the unit tests pin down more thoroughly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, build_kraus, coefficients_markov, DampingCoefficients};
use crate::entanglement::{check_bound, concurrence_state, concurrence_x};
use crate::esd::{closed_form_td, concurrence_markov, disentanglement_time, EsdKind};
use crate::linalg::{hermitian_eigen, psd_sqrt, ComplexMatrix};
use crate::master::{integrate_master, AtomParams, RateFunctions};
use crate::memory::{damping_profile, Kernel};
use crate::states::{random_state, random_xstate, standard_family, TwoQubitState};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn linalg_eigen() -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let h = *random_state(seed).matrix();
        let e = hermitian_eigen(&h).map_err(|e| e.to_string())?;
        worst = worst.max(e.reconstruct_with(|x| x).max_abs_diff(&h));
        let s = psd_sqrt(&h).map_err(|e| e.to_string())?;
        worst = worst.max((s * s).max_abs_diff(&h));
    }
    ensure(worst < 1e-12, format!("reconstruction error {worst:e}"))?;
    Ok(format!("max reconstruction error {worst:.2e}"))
}

fn states_family() -> std::result::Result<String, String> {
    for i in 0..=100 {
        let a = i as f64 / 100.0;
        let x = standard_family(a).map_err(|e| e.to_string())?;
        TwoQubitState::new(*x.to_state().matrix()).map_err(|e| format!("a = {a}: {e}"))?;
    }
    Ok("101 family members are valid states".into())
}

fn channel_cptp() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let coeffs = DampingCoefficients::from_gammas(rng.random(), rng.random()).map_err(|e| e.to_string())?;
        let kraus = build_kraus(&coeffs).map_err(|e| e.to_string())?;
        worst = worst.max(kraus.completeness().max_abs_diff(&ComplexMatrix::identity(4)));
        let out = apply_channel(&random_state(k), &coeffs).map_err(|e| e.to_string())?;
        let m = out.matrix();
        ensure((m.trace().re - 1.0).abs() < 1e-12, "trace not preserved")?;
        ensure(m.hermiticity_error() < 1e-14, "hermiticity not preserved")?;
        let min = hermitian_eigen(m).map_err(|e| e.to_string())?.min();
        ensure(min > -1e-12, format!("negative eigenvalue {min:e}"))?;
    }
    ensure(worst < 1e-12, format!("completeness error {worst:e}"))?;
    Ok(format!("100 channels, completeness error {worst:.2e}"))
}

fn entanglement_x() -> std::result::Result<String, String> {
    ensure((concurrence_state(&TwoQubitState::bell()) - 1.0).abs() < 1e-12, "Bell state")?;
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let x = random_xstate(seed);
        worst = worst.max((concurrence_x(&x) - concurrence_state(&x.to_state())).abs());
    }
    ensure(worst < 1e-10, format!("X-state mismatch {worst:e}"))?;
    Ok(format!("200 X states, max mismatch {worst:.2e}"))
}

fn entanglement_bound() -> std::result::Result<String, String> {
    for seed in 0..100 {
        for g in [0.9, 0.5, 0.1] {
            let coeffs = DampingCoefficients::symmetric(g).map_err(|e| e.to_string())?;
            let r = check_bound(&random_state(seed), &coeffs, coeffs.damping_exponent()).map_err(|e| e.to_string())?;
            ensure(r.all_ok(), format!("seed {seed}, gamma {g}: lhs {} rhs {}", r.lhs, r.rhs))?;
        }
    }
    Ok("300 samples satisfy the decay bound".into())
}

fn memory_markov_limit() -> std::result::Result<String, String> {
    let kernel = Kernel::exponential(1.0, 1000.0, 0.0).map_err(|e| e.to_string())?;
    let sol = damping_profile(&kernel, 0.0, 3.0, 1e-4).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    for i in 0..sol.len() {
        worst = worst.max((sol.gamma[i] - (-0.5 * sol.times[i]).exp()).abs());
        modulus = modulus.max((sol.gamma[i] - sol.b[i].norm()).abs());
    }
    ensure(worst < 0.01, format!("Markov-limit error {worst:e}"))?;
    ensure(modulus < 1e-6, format!("gamma vs |b| {modulus:e}"))?;
    Ok(format!("Markov-limit error {worst:.2e}, gamma vs |b| {modulus:.2e}"))
}

fn master_kraus() -> std::result::Result<String, String> {
    let r0 = standard_family(1.0).map_err(|e| e.to_string())?.to_state();
    let rates = RateFunctions::markov(1.0, 1.0).map_err(|e| e.to_string())?;
    let atoms = AtomParams::new(2.0, 1.5).map_err(|e| e.to_string())?;
    let traj = integrate_master(&r0, &rates, &atoms, 3.0, 1e-3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..traj.len() {
        let coeffs = coefficients_markov(1.0, traj.times[i]).map_err(|e| e.to_string())?;
        let k = apply_channel(&r0, &coeffs).map_err(|e| e.to_string())?;
        worst = worst.max(traj.interaction_state(i).matrix().max_abs_diff(k.matrix()));
    }
    ensure(worst < 1e-8, format!("master vs Kraus {worst:e}"))?;
    ensure(traj.max_trace_error() < 1e-10, "trace drift")?;
    Ok(format!("master vs Kraus {worst:.2e}"))
}

fn esd_consistency() -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let a = i as f64 / 20.0;
        let rho0 = standard_family(a).map_err(|e| e.to_string())?.to_state();
        for j in 0..50 {
            let t = 3.0 * j as f64 / 49.0;
            let coeffs = coefficients_markov(1.0, t).map_err(|e| e.to_string())?;
            let numeric = concurrence_state(&apply_channel(&rho0, &coeffs).map_err(|e| e.to_string())?);
            worst = worst.max((numeric - concurrence_markov(a, 1.0, t).map_err(|e| e.to_string())?).abs());
        }
    }
    ensure(worst < 1e-10, format!("analytic vs numeric {worst:e}"))?;
    let mut prev = f64::INFINITY;
    for i in 0..=100 {
        let a = i as f64 / 100.0;
        let v = disentanglement_time(a, 1.0).map_err(|e| e.to_string())?;
        ensure((v.kind == EsdKind::Finite) == (a > 1.0 / 3.0), format!("classification at a = {a}"))?;
        if let Some(t) = v.t_d {
            ensure(t < prev, format!("t_d not decreasing at a = {a}"))?;
            ensure((t - closed_form_td(a, 1.0).unwrap_or(f64::NAN)).abs() < 1e-10, "closed form")?;
            prev = t;
        }
    }
    Ok(format!("analytic vs numeric {worst:.2e}"))
}

const CHECKS: &[(&str, &str, Check)] = &[
    ("linalg", "eigendecomposition and square root", linalg_eigen),
    ("states", "standard family is a state", states_family),
    ("channel", "CPTP on random coefficients", channel_cptp),
    ("entanglement", "X closed form matches general route", entanglement_x),
    ("entanglement", "decay bound", entanglement_bound),
    ("memory", "Markov limit and gamma = |b|", memory_markov_limit),
    ("master", "master equation reproduces the channel", master_kraus),
    ("esd", "closed forms and classification", esd_consistency),
];

pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(module, name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { module, name, passed, detail }
        })
        .collect()
}
