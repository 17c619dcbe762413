//! The subcommands.

use serde::Serialize;
use serde_json::json;

use stdmap_core::geometry::{cone_invariance_check, critical_intervals_with_min};
use stdmap_core::maps::{conjugacy_check, trajectory, CylinderState, MapKind, MapParams, State, TorusPoint};
use stdmap_core::pairs::{
    iterate_decomposition, pair_pushforward_integral, CutConfig, DecompositionMode, MeasurePair, PushforwardOptions,
};
use stdmap_core::stats::{
    clt_experiment, correlation, diffusion_experiment, CorrelationMethod, ExperimentConfig, Observable,
};

use crate::args::*;
use crate::output::{fmt_num, OutputDir};
use crate::CliError;

fn pre<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Precondition(e.to_string())
}

fn observable(selector: &str) -> Result<Observable, CliError> {
    if let Some(path) = selector.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| pre(format!("cannot read observable {path}: {e}")))?;
        Observable::from_coefficients(path, &text).map_err(pre)
    } else {
        Observable::parse(selector).map_err(pre)
    }
}

fn usize_of(v: u64, what: &str) -> Result<usize, CliError> {
    usize::try_from(v).map_err(|_| pre(format!("{what} = {v} is too large")))
}

pub fn strips(a: &StripsArgs, out: &mut OutputDir) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Row {
        l: f64,
        eta: f64,
        intervals: [(f64, f64); 2],
        total_measure: f64,
        /// `total_measure / L^(eta - 1)`.
        scaled_measure: f64,
    }
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    for &eta in &a.eta.0 {
        for &l in &a.l.0 {
            let s = critical_intervals_with_min(l, eta, a.l_min).map_err(pre)?;
            let [(a1, b1), (a2, b2)] = s.intervals;
            csv.push(
                [l, eta, a1, b1, a2, b2, s.total_measure()]
                    .into_iter()
                    .map(fmt_num)
                    .collect(),
            );
            rows.push(Row {
                l,
                eta,
                intervals: s.intervals,
                total_measure: s.total_measure(),
                scaled_measure: s.total_measure() / l.powf(eta - 1.0),
            });
        }
    }
    out.write_csv(
        "strips.csv",
        &["L", "eta", "x_lo_1", "x_hi_1", "x_lo_2", "x_hi_2", "total_measure"],
        &csv,
    )?;
    // spread of the scaled measure across L, per eta
    let bands: Vec<_> = a
        .eta
        .0
        .iter()
        .map(|&eta| {
            let v: Vec<f64> = rows.iter().filter(|r| r.eta == eta).map(|r| r.scaled_measure).collect();
            let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            json!({ "eta": eta, "min": lo, "max": hi, "band_ratio": hi / lo })
        })
        .collect();
    let cone = if a.cone_samples > 0 {
        let c = cone_invariance_check(
            usize_of(a.cone_samples, "cone-samples")?,
            a.cone_l_range,
            a.cone_eta,
            a.cone_xi,
            a.seed,
        )
        .map_err(pre)?;
        Some(json!({ "l_range": a.cone_l_range, "eta": a.cone_eta, "xi": a.cone_xi, "check": c }))
    } else {
        None
    };
    out.write_json("strips.json", &json!({ "strips": rows, "bands": bands, "cone": cone }))
}

pub fn pushforward(a: &PushforwardArgs, out: &mut OutputDir) -> Result<String, CliError> {
    let seed = MeasurePair::horizontal(a.l, a.y0);
    let cfg = CutConfig { a0: a.a0 };
    let mode = match a.mode {
        ModeArg::Exhaustive => DecompositionMode::Exhaustive { cap: a.cap },
        ModeArg::Sampled => DecompositionMode::Sampled {
            samples: usize_of(a.samples, "samples")?,
            seed: a.seed,
        },
    };
    let integral = match &a.phi {
        Some(sel) => {
            let phi = observable(sel)?;
            let opts = PushforwardOptions {
                node_cap: usize_of(a.node_cap, "node-cap")?,
            };
            let r = pair_pushforward_integral(&seed, |x| phi.eval(x), usize_of(a.n, "n")?, &opts).map_err(pre)?;
            Some(json!({ "phi": phi.label, "result": r }))
        }
        None => None,
    };
    let ledger = iterate_decomposition(&seed, usize_of(a.n, "n")?, mode, &cfg).map_err(pre)?;
    let rows: Vec<Vec<String>> = ledger
        .steps
        .iter()
        .map(|s| {
            vec![
                s.step.to_string(),
                fmt_num(s.m_l),
                fmt_num(s.m_i),
                fmt_num(s.m_j),
                fmt_num(s.m_e),
                s.stderr.map_or(String::new(), |e| fmt_num(e[3])),
                s.curves_alive.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "pushforward.csv",
        &["step", "m_L", "m_I", "m_J", "m_E", "m_E_stderr", "curves_alive"],
        &rows,
    )?;
    if a.inventory {
        out.write_json(
            "inventory.json",
            &json!({ "truncated": ledger.inventory_truncated, "records": ledger.inventory }),
        )?;
    }
    out.write_json(
        "pushforward.json",
        &json!({
            "L": ledger.l,
            "a0": ledger.a0,
            "y0": a.y0,
            "mode": ledger.mode,
            "steps": ledger.steps,
            "inventory_truncated": ledger.inventory_truncated,
            "integral": integral,
        }),
    )
}

fn samples_csv(name: &str, samples: &[f64], out: &mut OutputDir) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = samples.iter().map(|&v| vec![fmt_num(v)]).collect();
    out.write_csv(name, &["value"], &rows)
}

pub fn clt(a: &CltArgs, out: &mut OutputDir) -> Result<String, CliError> {
    let mut cfg = ExperimentConfig::new(MapParams::from_l(a.l).map_err(pre)?, usize_of(a.m, "M")?, a.seed);
    cfg.n = a.n;
    cfg.phi = observable(&a.phi)?;
    let e = clt_experiment(&cfg).map_err(pre)?;
    if a.samples {
        samples_csv("clt_samples.csv", &e.samples, out)?;
    }
    out.write_json("clt.json", &json!({ "config": cfg, "result": e }))
}

pub fn corr(a: &CorrArgs, out: &mut OutputDir) -> Result<String, CliError> {
    let (phi, psi) = (observable(&a.phi)?, observable(&a.psi)?);
    let method = match a.method {
        MethodArg::Mc => CorrelationMethod::MonteCarlo { m: usize_of(a.m, "M")? },
        MethodArg::Ygrid => CorrelationMethod::YGridHybrid {
            m_x: usize_of(a.m, "M")?,
            k: usize_of(a.k, "K")?,
        },
    };
    let r = correlation(&phi, &psi, a.n, a.l, method, a.seed).map_err(pre)?;
    out.write_json(
        "corr.json",
        &json!({ "phi": phi.label, "psi": psi.label, "seed": a.seed, "result": r }),
    )
}

pub fn diffusion(a: &DiffusionArgs, out: &mut OutputDir) -> Result<String, CliError> {
    let params = MapParams::from_epsilon_alpha(a.epsilon, a.alpha).map_err(pre)?;
    let mut cfg = ExperimentConfig::new(params, usize_of(a.m, "M")?, a.seed);
    cfg.n = a.n;
    cfg.phi = observable(&a.phi)?;
    cfg.interval = (a.a, a.b);
    let e = diffusion_experiment(&cfg).map_err(pre)?;
    if a.samples {
        samples_csv("diffusion_samples.csv", &e.samples, out)?;
    }
    out.write_json("diffusion.json", &json!({ "config": cfg, "result": e }))
}

pub fn simulate(a: &SimulateArgs, out: &mut OutputDir) -> Result<String, CliError> {
    let params = match (a.l, a.epsilon, a.alpha) {
        (_, Some(eps), Some(alpha)) => MapParams::from_epsilon_alpha(eps, alpha),
        (Some(l), None, None) => MapParams::from_l(l),
        _ => return Err(pre("give either --L or both --epsilon and --alpha")),
    }
    .map_err(pre)?;
    let steps = usize_of(a.steps, "steps")?;
    if let Some(k) = a.check_conjugacy {
        let c = conjugacy_check(&params, usize_of(k, "check-conjugacy")?, steps, a.seed).map_err(pre)?;
        return out.write_json("conjugacy.json", &json!({ "params": params, "check": c }));
    }
    let (p0, kind) = match a.map {
        MapArg::Standard => (State::Torus(TorusPoint::new(a.x, a.y).map_err(pre)?), MapKind::Standard),
        MapArg::Hat => (State::Torus(TorusPoint::new(a.x, a.y).map_err(pre)?), MapKind::HatF),
        MapArg::Slowfast => (State::Cylinder(CylinderState::new(a.x, a.z).map_err(pre)?), MapKind::SlowFast),
    };
    let orbit = trajectory(p0, &params, steps, kind).map_err(pre)?;
    let second = if kind == MapKind::SlowFast { "z" } else { "y" };
    let rows: Vec<Vec<String>> = orbit
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i.to_string(), fmt_num(s.x()), fmt_num(s.second())])
        .collect();
    out.write_csv("simulate.csv", &["step", "x", second], &rows)?;
    Ok(format!("{} states written\n", orbit.len()))
}
