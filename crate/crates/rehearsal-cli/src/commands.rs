use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;

use rehearsal::montecarlo::{run_paired, sweep, theory_for, verify_identities, IdentityReport, RunOptions, SweepPlan, SweepResult};
use rehearsal::problem::generate_ground_truth;
use rehearsal::theory::{
    coefficient_orderings, predict_coefficients, predict_recursive, three_task, two_task, Geometry, MemoryModel, Rehearsal,
};
use rehearsal::trainers::{Partition, PartitionRule, SequentialOrder, StrategyKind, StrategySpec};
use rehearsal::verifier::{check_scalar_lemmas, check_theorems, CheckReport, LemmaGrid, TheoremGrid};

use crate::config::{GroundTruthChoice, RunConfig, Suite};
use crate::error::CliError;
use crate::output::{csv_string, fmt_f, fmt_opt, sweep_csv, OutDir, ERROR_COLUMNS, SIMULATE_COLUMNS};
use crate::plot::{sweep_dat, sweep_svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// What a command printed and wrote.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    /// False only for a verification run with asserted failures.
    pub ok: bool,
}

fn opts(cfg: &RunConfig) -> RunOptions {
    RunOptions { trials: cfg.run.trials, seed: cfg.run.seed, workers: cfg.run.workers, sampler: cfg.run.sampler, redraw_ground_truth: None }
}

fn geometry(cfg: &RunConfig) -> Geometry {
    match cfg.ground_truth.kind {
        GroundTruthChoice::EqualGap => Geometry::equal_gap(cfg.problem.tasks, cfg.ground_truth.gap_sq),
        GroundTruthChoice::Orthonormal => Geometry::orthonormal(cfg.problem.tasks),
    }
}

/// Theory counterpart of a trainer spec, when the partition is known ahead of training.
fn rehearsal_for(spec: &StrategySpec, geom: &Geometry) -> Option<Rehearsal> {
    match spec.kind {
        StrategyKind::Concurrent => Some(Rehearsal::Concurrent),
        StrategyKind::Sequential => (spec.order == SequentialOrder::OldestFirst).then_some(Rehearsal::Sequential),
        StrategyKind::Hybrid => match &spec.partition {
            PartitionRule::ExplicitSets { partition } => Some(Rehearsal::Hybrid(partition.clone())),
            PartitionRule::GapThreshold { gap_tau } => {
                let t = geom.tasks();
                let similar = (1..=t).map(|t| (1..t).map(|h| geom.gap(h, t) <= *gap_tau).collect()).collect();
                Some(Rehearsal::Hybrid(Partition { similar }))
            }
            PartitionRule::GradientCosine { .. } => None,
        },
    }
}

pub fn cmd_theory(cfg: &RunConfig, out: PathBuf, format: Format) -> Result<Outcome, CliError> {
    cfg.validate_theory()?;
    let pc = cfg.problem_config();
    let geom = geometry(cfg);
    let model = cfg.theory.memory_model;
    let specs = cfg.strategies.specs();

    let mut names = Vec::new();
    let mut preds = Vec::new();
    let mut strategies = Vec::new();
    for spec in &specs {
        let name = spec.kind.name().to_string();
        let entry = match rehearsal_for(spec, &geom) {
            Some(r) => {
                let pr = predict_recursive(&pc, &geom, &r, model)?;
                let table = if model == MemoryModel::Exact { None } else { Some(predict_coefficients(&pc, &r, model)?.to_json()) };
                let v = json!({"strategy": name, "forgetting": pr.forgetting, "generalization": pr.generalization,
                    "expected_errors": pr.expected.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                    "coefficients": table});
                preds.push(Some(pr));
                v
            }
            None => {
                preds.push(None);
                json!({"strategy": name, "unavailable": "the buffer split is only known after training"})
            }
        };
        names.push(name);
        strategies.push(entry);
    }

    let mut doc = json!({"config": cfg, "memory_model": model, "strategies": strategies});
    if pc.tasks == 2 {
        doc["two_task"] = serde_json::to_value(two_task(&pc, &geom)?).expect("serializable");
    }
    if pc.tasks == 3 && pc.sigma == 0.0 {
        doc["three_task"] = serde_json::to_value(three_task(&pc, &geom)?).expect("serializable");
    }
    if pc.tasks >= 2 {
        doc["orderings"] = serde_json::to_value(coefficient_orderings(&pc)?).expect("serializable");
    }

    let mut header = vec!["quantity".to_string()];
    header.extend(names.iter().cloned());
    let mut rows = Vec::new();
    let cell = |f: &dyn Fn(&rehearsal::theory::Prediction) -> Option<f64>| -> Vec<String> {
        preds.iter().map(|p| p.as_ref().and_then(f).map(fmt_f).unwrap_or_default()).collect()
    };
    let mut push = |label: String, vals: Vec<String>| {
        let mut r = vec![label];
        r.extend(vals);
        rows.push(r);
    };
    push("forgetting".into(), cell(&|p| p.forgetting));
    push("generalization".into(), cell(&|p| Some(p.generalization)));
    for i in 1..=pc.tasks {
        push(format!("error_{i}_T"), cell(&|p| Some(p.expected[(i - 1, pc.tasks - 1)])));
    }
    let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let table = csv_string(&hdr, &rows);

    let mut dir = OutDir::create(out)?;
    dir.stamp(cfg, "theory", cfg.run.seed)?;
    dir.write_json("theory.json", &doc)?;
    dir.write("theory.csv", &table)?;
    let stdout = match format {
        Format::Csv => table,
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
    };
    Ok(Outcome { stdout, files: dir.written, ok: true })
}

pub fn cmd_simulate(cfg: &RunConfig, out: PathBuf, format: Format) -> Result<Outcome, CliError> {
    cfg.validate_simulate()?;
    let pc = cfg.problem_config();
    let gt = generate_ground_truth(&cfg.ground_truth.to_kind(), pc.tasks, pc.p, cfg.ground_truth.seed)?;
    let geom = Geometry::from_ground_truth(&gt);
    let specs = cfg.strategies.specs();
    let rep = run_paired(&pc, &gt, &specs, &opts(cfg))?;

    let mut rows = Vec::new();
    let mut err_rows = Vec::new();
    let mut summaries = Vec::new();
    for s in &rep.strategies {
        let th = theory_for(&pc, &geom, s)?;
        if let Some(f) = &s.forgetting {
            rows.push(vec![
                s.strategy.clone(),
                "forgetting".into(),
                fmt_f(f.mean),
                fmt_f(f.std_error),
                fmt_opt(th.as_ref().and_then(|p| p.forgetting)),
                f.trials.to_string(),
            ]);
        }
        let g = &s.generalization;
        rows.push(vec![
            s.strategy.clone(),
            "generalization".into(),
            fmt_f(g.mean),
            fmt_f(g.std_error),
            fmt_opt(th.as_ref().map(|p| p.generalization)),
            g.trials.to_string(),
        ]);
        for (i0, row) in s.errors.iter().enumerate() {
            for (t0, e) in row.iter().enumerate() {
                err_rows.push(vec![
                    s.strategy.clone(),
                    (i0 + 1).to_string(),
                    (t0 + 1).to_string(),
                    fmt_f(e.mean),
                    fmt_f(e.std_error),
                    fmt_opt(th.as_ref().map(|p| p.expected[(i0, t0)])),
                    e.trials.to_string(),
                ]);
            }
        }
        summaries.push(json!({"summary": s, "theory": th}));
    }
    let differences: Vec<_> = (1..rep.strategies.len())
        .map(|b| {
            rep.paired_difference(0, b).map(|d| json!({"minuend": rep.strategies[0].strategy, "subtrahend": rep.strategies[b].strategy, "difference": d}))
        })
        .collect::<Result<_, _>>()?;
    let doc = json!({
        "config": cfg,
        "sampler_used": rep.sampler_used,
        "successful_trials": rep.successful_trials,
        "failed_trials": rep.failed_trials,
        "strategies": summaries,
        "paired_differences": differences,
    });

    let table = csv_string(&SIMULATE_COLUMNS, &rows);
    let mut dir = OutDir::create(out)?;
    dir.stamp(cfg, "simulate", cfg.run.seed)?;
    dir.write("results.csv", &table)?;
    dir.write("errors.csv", &csv_string(&ERROR_COLUMNS, &err_rows))?;
    dir.write_json("results.json", &doc)?;
    dir.write("ground_truth.csv", &gt.to_csv())?;
    let stdout = match format {
        Format::Csv => table,
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
    };
    Ok(Outcome { stdout, files: dir.written, ok: true })
}

pub fn sweep_plan(cfg: &RunConfig) -> SweepPlan {
    SweepPlan {
        base: cfg.problem_config(),
        axis: cfg.sweep.axis,
        grid: cfg.sweep.grid(),
        strategies: cfg.strategies.specs(),
        ground_truth: cfg.ground_truth.to_kind(),
        gt_seed: cfg.ground_truth.seed,
        options: opts(cfg),
    }
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    cfg.validate_sweep()?;
    let res = sweep(&sweep_plan(cfg))?;
    if res.points.is_empty() {
        let why: Vec<String> = res.skipped.iter().map(|s| format!("{}: {}", s.value, s.reason)).collect();
        return Err(CliError::Config { field: "sweep.values".into(), message: format!("every grid point was skipped ({})", why.join("; ")) });
    }
    Ok(res)
}

pub fn cmd_sweep(cfg: &RunConfig, out: PathBuf, format: Format) -> Result<Outcome, CliError> {
    let res = run_sweep(cfg)?;
    let table = sweep_csv(&res.rows());
    let doc = json!({"config": cfg, "result": res});
    let mut dir = OutDir::create(out)?;
    dir.stamp(cfg, "sweep", cfg.run.seed)?;
    dir.write("sweep.csv", &table)?;
    dir.write_json("sweep.json", &doc)?;
    dir.write("sweep.svg", &sweep_svg(&res))?;
    dir.write("sweep.dat", &sweep_dat(&res))?;
    let mut stdout = match format {
        Format::Csv => table,
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
    };
    if format == Format::Csv {
        for s in &res.skipped {
            let _ = writeln!(stdout, "# skipped {} = {}: {}", res.axis.name(), s.value, s.reason);
        }
    }
    Ok(Outcome { stdout, files: dir.written, ok: true })
}

pub fn identity_text(r: &IdentityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "identities [p = {}, trials = {}, seed = {}]", r.p, r.trials, r.seed);
    for c in &r.checks {
        let _ = writeln!(
            s,
            "  {} {:<14} m={:<3} {:<28} empirical {:.6e} +- {:.2e}  analytic {:.6e}  z {:+.3}",
            if c.z.abs() < IdentityReport::Z_LIMIT { "PASS" } else { "FAIL" },
            c.name,
            c.m,
            c.detail,
            c.empirical.mean,
            c.empirical.std_error,
            c.analytic,
            c.z
        );
    }
    let _ = writeln!(s, "  total: {} checks, all |z| < {}: {}", r.checks.len(), IdentityReport::Z_LIMIT, r.all_pass());
    s
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite, out: PathBuf, format: Format) -> Result<Outcome, CliError> {
    cfg.validate_verify()?;
    let mut dir = OutDir::create(out)?;
    dir.stamp(cfg, "verify", cfg.run.seed)?;
    let mut text = String::new();
    let mut ok = true;
    let mut doc = serde_json::Map::new();
    let want = |s: Suite| suite == s || suite == Suite::All;

    let mut part = |name: &str, rep: CheckReport, dir: &mut OutDir| -> Result<(), CliError> {
        let t = rep.summary_text();
        dir.write(&format!("{name}.txt"), &t)?;
        let json = serde_json::to_string(&rep).expect("serializable") + "\n";
        dir.write(&format!("{name}.json"), &json)?;
        ok &= rep.ok();
        text.push_str(&t);
        doc.insert(name.into(), json!({"ok": rep.ok(), "asserted": rep.asserted(), "failed": rep.failed(), "marginal": rep.marginal(), "skipped": rep.skipped()}));
        Ok(())
    };
    if want(Suite::Lemmas) {
        part("lemmas", check_scalar_lemmas(&LemmaGrid::default()), &mut dir)?;
    }
    if want(Suite::Theorems) {
        part("theorems", check_theorems(&TheoremGrid::default())?, &mut dir)?;
    }
    if want(Suite::Identities) {
        let v = &cfg.verify;
        let r = verify_identities(v.identity_p, &v.identity_m, v.identity_trials, cfg.run.seed, cfg.run.workers)?;
        let t = identity_text(&r);
        dir.write("identities.txt", &t)?;
        dir.write_json("identities.json", &r)?;
        ok &= r.all_pass();
        text.push_str(&t);
        doc.insert("identities".into(), json!({"ok": r.all_pass(), "checks": r.checks.len()}));
    }
    let _ = writeln!(text, "overall: {}", if ok { "PASS" } else { "FAIL" });
    doc.insert("ok".into(), json!(ok));
    dir.write("report.txt", &text)?;
    dir.write_json("report.json", &doc)?;
    let stdout = match format {
        Format::Csv => text,
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
    };
    Ok(Outcome { stdout, files: dir.written, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_threshold_partition_from_geometry() {
        let g = Geometry::equal_gap(3, 1.0);
        let spec = StrategySpec::hybrid(PartitionRule::GapThreshold { gap_tau: 0.5 });
        match rehearsal_for(&spec, &g) {
            Some(Rehearsal::Hybrid(p)) => assert_eq!(p, Partition::all_dissimilar(3)),
            other => panic!("{other:?}"),
        }
        let spec = StrategySpec::hybrid(PartitionRule::GapThreshold { gap_tau: 2.0 });
        assert_eq!(rehearsal_for(&spec, &g), Some(Rehearsal::Hybrid(Partition::all_similar(3))));
        assert_eq!(rehearsal_for(&StrategySpec::hybrid(PartitionRule::default()), &g), None);
    }
}
