use hombell::bell::Inequality;
use hombell::fock::StateRecord;
use hombell::gaussian::{optimize_circuit, report_parameters, run_circuit, LEAKAGE_BUDGET};
use hombell::optimize::{
    dimension_sweep, efficiency_sweep, efficiency_threshold, energy_conserving_check, fixed_state_problem,
    maximize_score, maximize_with_bin_growth, OptimizationReport, ScoreProblem,
};
use hombell::povm::LossModel;
use hombell::qubit::scan_pairs;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    EnergyConfig, FidelityOptConfig, OptimizeConfig, PrepareConfig, QubitScanConfig, SweepConfig, SweepKind,
    ThresholdConfig,
};
use crate::error::{CliError, CliResult};
use crate::record::{csv, sig12};

pub struct Outcome {
    /// Resolved configuration, as replayed.
    pub config: Value,
    pub scores: Vec<f64>,
    pub result: Value,
    pub csv: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn report_json(r: &OptimizationReport) -> Value {
    json!({
        "score": r.best_score,
        "q_used": r.q_used,
        "seeds_run": r.seeds_run,
        "seeds_discarded": r.seeds_discarded,
        "best_seed": r.best_seed,
        "params": r.best_params,
        "state": StateRecord::from(&r.best_state),
        "convergence_trace": r.convergence_trace,
    })
}

fn loss(eta: Option<f64>) -> CliResult<Option<LossModel<f64>>> {
    eta.map(LossModel::new).transpose().map_err(CliError::from)
}

pub fn optimize(mut cfg: OptimizeConfig) -> CliResult<Outcome> {
    let ineq = cfg.bell.resolve()?;
    let problem = ScoreProblem::new(ineq, cfg.dim).with_loss(loss(cfg.eta)?);
    let report = if cfg.grow_bins {
        maximize_with_bin_growth(&problem, &cfg.search, cfg.score_tol)?
    } else {
        maximize_score(&problem, &cfg.search)?
    };
    Ok(Outcome {
        config: to_value(&cfg),
        scores: vec![report.best_score],
        result: report_json(&report),
        csv: None,
    })
}

pub fn sweep(mut cfg: SweepConfig) -> CliResult<Outcome> {
    let ineq = cfg.bell.resolve()?;
    let (header, points): (&str, Vec<(f64, &OptimizationReport)>);
    let dim_points;
    let eta_points;
    match cfg.kind {
        SweepKind::Dimension => {
            dim_points = dimension_sweep(&cfg.dims, &ScoreProblem::new(ineq, 2), &cfg.search)?;
            header = "d";
            points = dim_points.iter().map(|p| (p.dim as f64, &p.report)).collect();
        }
        SweepKind::Efficiency => {
            eta_points = efficiency_sweep(&cfg.etas, &ScoreProblem::new(ineq, cfg.dim), &cfg.search)?;
            header = "eta";
            points = eta_points.iter().map(|p| (p.eta, &p.report)).collect();
        }
    }
    let rows = points
        .iter()
        .map(|(x, r)| {
            vec![
                sig12(*x),
                sig12(r.best_score),
                r.q_used.to_string(),
                r.best_seed.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    let result = json!({
        "points": points.iter().map(|(x, r)| json!({ header: x, "report": report_json(r) })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        config: to_value(&cfg),
        scores: points.iter().map(|(_, r)| r.best_score).collect(),
        result,
        csv: Some(csv(&[header, "score", "q_used", "seed_of_best"], &rows)),
    })
}

pub fn threshold(mut cfg: ThresholdConfig) -> CliResult<Outcome> {
    let ineq = cfg.bell.resolve()?;
    let t = efficiency_threshold(&ScoreProblem::new(ineq, cfg.dim), &cfg.search, cfg.bracket_tol)?;
    let (scores, rows, result) = match &t {
        Some(t) => (
            std::iter::once(t.eta_c)
                .chain(t.evaluations.iter().map(|e| e.1))
                .collect(),
            t.evaluations.iter().map(|(e, s)| vec![sig12(*e), sig12(*s)]).collect(),
            to_value(t),
        ),
        None => (Vec::new(), Vec::new(), json!({ "violation_at_unit_efficiency": false })),
    };
    Ok(Outcome {
        config: to_value(&cfg),
        scores,
        result,
        csv: Some(csv(&["eta", "score"], &rows)),
    })
}

pub fn energy_check(cfg: EnergyConfig) -> CliResult<Outcome> {
    let pts = energy_conserving_check(&cfg.photons, &cfg.search)?;
    let rows = pts
        .iter()
        .map(|p| {
            vec![
                p.total_photons.to_string(),
                sig12(p.report.best_score),
                p.report.best_seed.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    let result = json!({
        "points": pts.iter().map(|p| json!({ "n": p.total_photons, "report": report_json(&p.report) })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        config: to_value(&cfg),
        scores: pts.iter().map(|p| p.report.best_score).collect(),
        result,
        csv: Some(csv(&["n", "score", "seed_of_best"], &rows)),
    })
}

pub fn qubit_scan(cfg: QubitScanConfig) -> CliResult<Outcome> {
    let scans = scan_pairs(cfg.l_max)?;
    let rows = scans
        .iter()
        .map(|s| {
            vec![
                s.pair.l().to_string(),
                s.pair.m().to_string(),
                sig12(s.best_a),
                sig12(s.best_mu),
                sig12(s.best_bound),
                s.violates.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    Ok(Outcome {
        config: to_value(&cfg),
        scores: scans.iter().map(|s| s.best_bound).collect(),
        result: json!({ "pairs": scans }),
        csv: Some(csv(&["l", "m", "a", "mu", "bound", "violates"], &rows)),
    })
}

pub fn prepare(mut cfg: PrepareConfig) -> CliResult<Outcome> {
    let circuit = cfg.resolve()?;
    let out = run_circuit(&circuit)?;
    if out.leakage > LEAKAGE_BUDGET {
        eprintln!(
            "warning: truncation leakage {:.3e} at the largest cutoff {}; amplitudes are approximate",
            out.leakage, out.cutoff
        );
    }
    Ok(Outcome {
        config: to_value(&cfg),
        scores: vec![out.herald_probability],
        result: json!({
            "herald_probability": out.herald_probability,
            "leakage": out.leakage,
            "cutoff": out.cutoff,
            "parameters": report_parameters(&circuit),
            "state": StateRecord::from(&out.state),
        }),
        csv: None,
    })
}

pub fn fidelity_opt(mut cfg: FidelityOptConfig) -> CliResult<Outcome> {
    let target = cfg.resolve_target()?;
    let ineq = cfg.bell.resolve()?;
    let fit = optimize_circuit(&target, cfg.n_modes, &cfg.circuit)?;
    let tau = run_circuit(&fit.circuit)?.state;
    let mut scores = vec![fit.fidelity, fit.herald_probability];
    let mut bell = Vec::new();
    for &eta in &cfg.bell_etas {
        let problem = fixed_state_problem(ineq.clone(), &tau).with_loss(loss(Some(eta))?);
        let r = maximize_score(&problem, &cfg.bell_search)?;
        scores.push(r.best_score);
        bell.push(json!({ "eta": eta, "score": r.best_score, "params": r.best_params }));
    }
    Ok(Outcome {
        config: to_value(&cfg),
        scores,
        result: json!({
            "fit": fit,
            "parameters": report_parameters(&fit.circuit),
            "state": StateRecord::from(&tau),
            "bell_scores": bell,
        }),
        csv: None,
    })
}

pub fn load_inequality(path: &std::path::Path) -> CliResult<Outcome> {
    let ineq = Inequality::load(path).map_err(|e| CliError::invalid(&path.display().to_string(), e))?;
    Ok(Outcome {
        config: json!({ "path": path }),
        scores: vec![ineq.local_bound],
        result: json!({
            "settings_a": ineq.settings_a(),
            "settings_b": ineq.settings_b(),
            "inequality": ineq,
        }),
        csv: None,
    })
}
