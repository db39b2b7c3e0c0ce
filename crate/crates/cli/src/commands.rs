use std::io::Write;
use std::path::{Path, PathBuf};

use esdkit_core::channel::{apply_channel, coefficients_markov, DampingCoefficients};
use esdkit_core::entanglement::{check_bound, concurrence_state};
use esdkit_core::esd::{disentanglement_time, sweep as surface, EsdVerdict};
use esdkit_core::invariants;
use esdkit_core::master::{integrate_master, local_coherence, AtomParams, RateFunctions};
use esdkit_core::memory::{damping_profile, AmplitudeSolution, Kernel, TabulatedKernel};
use esdkit_core::states::{random_state, standard_family, TwoQubitState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{open, real, Csv};
use crate::{BoundArgs, Common, EvolveArgs, Failure, Format, Initial, SweepArgs, TdArgs};

pub const EVOLVE_COLUMNS: [&str; 7] =
    ["t", "concurrence", "local_coh_A", "local_coh_B", "trace_err", "bound_rhs", "kraus_vs_master_maxdiff"];

fn positive(name: &str, x: f64) -> Result<f64, Failure> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Failure::Usage(format!("{name} must be positive, got {x}")))
    }
}

impl Common {
    fn time(&self, t: f64) -> f64 {
        if self.natural_units {
            self.gamma_rate * t
        } else {
            t
        }
    }
}

fn initial_state(args: &EvolveArgs) -> Result<TwoQubitState, Failure> {
    Ok(match args.initial {
        Initial::Family => standard_family(args.a)?.to_state(),
        Initial::Random => random_state(args.seed),
        Initial::Bell => TwoQubitState::bell(),
    })
}

fn memory_kernels(args: &EvolveArgs) -> Result<Option<(Kernel, Kernel)>, Failure> {
    if let Some(path) = &args.kernel_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read kernel file {}: {e}", path.display())))?;
        let k = Kernel::Tabulated(TabulatedKernel::parse(&text)?);
        return Ok(Some((k.clone(), k)));
    }
    let Some(lambda) = args.lambda else { return Ok(None) };
    let rate = args.common.gamma_rate;
    let ka = Kernel::exponential(rate, lambda, args.center_frequency.unwrap_or(args.omega_a))?;
    let kb = Kernel::exponential(rate, lambda, args.center_frequency.unwrap_or(args.omega_b))?;
    Ok(Some((ka, kb)))
}

pub fn evolve(args: &EvolveArgs) -> Result<(), Failure> {
    let rate = positive("gamma-rate", args.common.gamma_rate)?;
    positive("t-max", args.t_max)?;
    let kernels = memory_kernels(args)?;
    let dt = match (args.dt, args.lambda) {
        (Some(dt), _) => positive("dt", dt)?,
        (None, Some(l)) => (1e-3 / rate).min(0.1 / positive("lambda", l)?),
        (None, None) => 1e-3 / rate,
    };
    let rho0 = initial_state(args)?;
    let atoms = AtomParams::new(args.omega_a, args.omega_b)?;

    let mut tables: Option<(AmplitudeSolution, AmplitudeSolution)> = None;
    let (rates, t_end) = match kernels {
        None => (RateFunctions::markov(rate, rate)?, args.t_max),
        Some((ka, kb)) => {
            let sa = damping_profile(&ka, args.omega_a, args.t_max, dt)?;
            let sb = damping_profile(&kb, args.omega_b, args.t_max, dt)?;
            let rates = RateFunctions::from_solutions(&sa, &sb)?;
            let t_end = sa.t_max();
            tables = Some((sa, sb));
            (rates, t_end)
        }
    };
    let traj = integrate_master(&rho0, &rates, &atoms, t_end, dt)?;
    if let Some((sa, _)) = &tables {
        if traj.len() != sa.len() {
            return Err(Failure::Numeric("master and amplitude grids disagree".into()));
        }
    }

    let c0 = concurrence_state(&rho0);
    let mut csv = Csv::new(open(args.common.output.as_deref())?, &EVOLVE_COLUMNS)?;
    for i in (0..traj.len()).step_by(args.stride as usize) {
        let t = traj.times[i];
        let coeffs = match &tables {
            None => coefficients_markov(rate, t)?,
            Some((sa, sb)) => DampingCoefficients::from_gammas(sa.gamma[i], sb.gamma[i])?,
        };
        let kraus = apply_channel(&rho0, &coeffs)?;
        let diff = traj.interaction_state(i).matrix().max_abs_diff(kraus.matrix());
        let (da, db) = traj.damping[i];
        let (la, lb) = local_coherence(&traj.states[i]);
        csv.row(&[
            real(args.common.time(t)),
            real(concurrence_state(&traj.states[i])),
            real(la),
            real(lb),
            real(traj.trace_error[i]),
            real(c0.min(1.0) * (-(da + db)).exp()),
            real(diff),
        ])?;
    }
    csv.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    a: f64,
    kind: &'static str,
    t_d: Option<f64>,
    gamma_rate: f64,
}

fn summary(v: &EsdVerdict, common: &Common) -> Summary {
    Summary { a: v.a, kind: v.kind.as_str(), t_d: v.t_d.map(|t| common.time(t)), gamma_rate: common.gamma_rate }
}

fn grid(lo: f64, hi: f64, n: u64) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn summary_path(args: &SweepArgs) -> Option<PathBuf> {
    if let Some(p) = &args.summary {
        return Some(p.clone());
    }
    let out = args.common.output.as_deref().filter(|p| p.as_os_str() != "-")?;
    let stem = out.file_stem()?.to_string_lossy().into_owned();
    Some(out.with_file_name(format!("{stem}.summary.json")))
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let rate = positive("gamma-rate", args.common.gamma_rate)?;
    if args.a_min > args.a_max || args.t_max < 0.0 {
        return Err(Failure::Usage("grid bounds must satisfy a-min <= a-max and t-max >= 0".into()));
    }
    let a_grid = grid(args.a_min, args.a_max, args.a_points);
    let t_grid = grid(0.0, args.t_max, args.t_points);
    let s = surface(&a_grid, &t_grid, rate)?;

    let mut csv = Csv::new(open(args.common.output.as_deref())?, &["a", "t", "concurrence"])?;
    for (a, row) in s.a.iter().zip(&s.values) {
        for (t, c) in s.t.iter().zip(row) {
            csv.row(&[real(*a), real(args.common.time(*t)), real(*c)])?;
        }
    }
    csv.finish()?;

    if let Some(path) = summary_path(args) {
        let rows = a_grid
            .iter()
            .map(|&a| Ok(summary(&disentanglement_time(a, rate)?, &args.common)))
            .collect::<Result<Vec<_>, Failure>>()?;
        write_json(&path, &rows)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut out = open(Some(path))?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Usage(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn td(args: &TdArgs) -> Result<(), Failure> {
    let rate = positive("gamma-rate", args.common.gamma_rate)?;
    let s = summary(&disentanglement_time(args.a, rate)?, &args.common);
    match args.format {
        Format::Json => {
            let mut out = open(args.common.output.as_deref())?;
            serde_json::to_writer(&mut out, &s).map_err(|e| Failure::Usage(e.to_string()))?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
        Format::Csv => {
            let mut csv = Csv::new(open(args.common.output.as_deref())?, &["a", "kind", "t_d", "gamma_rate"])?;
            csv.row(&[real(s.a), s.kind.into(), s.t_d.map(real).unwrap_or_default(), real(s.gamma_rate)])?;
            csv.finish()?;
        }
    }
    Ok(())
}

pub fn bound(args: &BoundArgs) -> Result<(), Failure> {
    if let Some(g) = args.gamma {
        if !(0.0..=1.0).contains(&g) {
            return Err(Failure::Usage(format!("gamma must lie in [0, 1], got {g}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut csv = Csv::new(
        open(args.common.output.as_deref())?,
        &["sample", "gamma", "lhs", "rhs", "satisfied", "terms_ok"],
    )?;
    let mut good = 0;
    for k in 0..args.samples {
        let state_seed: u64 = rng.random();
        let drawn: f64 = rng.random();
        let g = args.gamma.unwrap_or(drawn);
        let coeffs = DampingCoefficients::symmetric(g)?;
        let r = check_bound(&random_state(state_seed), &coeffs, coeffs.damping_exponent())?;
        if r.all_ok() {
            good += 1;
        }
        csv.row(&[k.to_string(), real(g), real(r.lhs), real(r.rhs), r.satisfied.to_string(), r.terms_ok.to_string()])?;
    }
    csv.finish()?;
    eprintln!("bound: {good}/{} satisfied", args.samples);
    if good == args.samples {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{} samples violate the decay bound", args.samples - good)))
    }
}

pub fn check() -> Result<(), Failure> {
    let outcomes = invariants::run_all();
    let mut out = open(None)?;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {}: {} ({})", o.module, o.name, o.detail)?;
    }
    out.flush()?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{failed} invariant checks failed")))
    }
}
