//! Numeric checks of the scalar product/power inequalities and of the headline
//! comparisons between concurrent and sequential rehearsal.
//!
//! Every inequality is evaluated in a cancellation-free form and compared with
//! a relative slack of `1e-12·|RHS|`. Points whose stated preconditions fail are
//! skipped with the violated condition named; they are never counted as failures.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::problem::ProblemConfig;
use crate::theory::{
    assemble_from_coefficients, coefficient_orderings, forgetting_threshold, generalization_threshold, large_p_schedule,
    predict_coefficients, predict_recursive, two_task, Geometry, MemoryModel, Rehearsal,
};

pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Holds only within the slack.
    Marginal,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Params {
    pub n: usize,
    pub p: usize,
    pub memory: usize,
    pub tasks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub check: &'static str,
    pub params: Params,
    pub status: Status,
    /// `(greater − lesser)/scale`; positive when the inequality holds.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_because: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub grid: String,
    pub points: Vec<PointResult>,
}

impl CheckReport {
    fn count(&self, s: Status) -> usize {
        self.points.iter().filter(|p| p.status == s).count()
    }

    pub fn passed(&self) -> usize {
        self.count(Status::Pass)
    }

    pub fn marginal(&self) -> usize {
        self.count(Status::Marginal)
    }

    pub fn failed(&self) -> usize {
        self.count(Status::Fail)
    }

    pub fn skipped(&self) -> usize {
        self.count(Status::Skipped)
    }

    pub fn asserted(&self) -> usize {
        self.points.len() - self.skipped()
    }

    /// No asserted point failed.
    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn worst_margin(&self) -> Option<&PointResult> {
        self.points
            .iter()
            .filter(|p| p.status != Status::Skipped)
            .min_by(|a, b| a.margin.partial_cmp(&b.margin).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn checks(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = Vec::new();
        for p in &self.points {
            if !names.contains(&p.check) {
                names.push(p.check);
            }
        }
        names
    }

    pub fn merge(name: &str, reports: Vec<CheckReport>) -> CheckReport {
        let grid = reports.iter().map(|r| format!("{}: {}", r.name, r.grid)).collect::<Vec<_>>().join("; ");
        CheckReport { name: name.to_string(), grid, points: reports.into_iter().flat_map(|r| r.points).collect() }
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} [{}]", self.name, self.grid);
        for c in self.checks() {
            let pts: Vec<&PointResult> = self.points.iter().filter(|p| p.check == c).collect();
            let by = |st: Status| pts.iter().filter(|p| p.status == st).count();
            let worst = pts.iter().filter(|p| p.status != Status::Skipped).map(|p| p.margin).fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                s,
                "  {c:<32} pass {:>6}  marginal {:>4}  fail {:>4}  skipped {:>6}  worst margin {}",
                by(Status::Pass),
                by(Status::Marginal),
                by(Status::Fail),
                by(Status::Skipped),
                if worst.is_finite() { format!("{worst:.3e}") } else { "-".into() }
            );
        }
        for p in self.points.iter().filter(|p| matches!(p.status, Status::Fail | Status::Marginal)) {
            let _ = writeln!(s, "  {:?} {} {:?} margin {:.3e}", p.status, p.check, p.params, p.margin);
        }
        let _ = writeln!(
            s,
            "  total: asserted {}  failed {}  marginal {}  skipped {}",
            self.asserted(),
            self.failed(),
            self.marginal(),
            self.skipped()
        );
        s
    }
}

fn judge(margin_abs: f64, scale: f64) -> (Status, f64) {
    let scale = scale.abs().max(f64::MIN_POSITIVE);
    let rel = margin_abs / scale;
    let status = if rel > SLACK {
        Status::Pass
    } else if rel > -SLACK {
        Status::Marginal
    } else {
        Status::Fail
    };
    (status, rel)
}

fn point(check: &'static str, params: Params, pre: &[(&str, bool)], eval: impl FnOnce() -> (f64, f64)) -> PointResult {
    if let Some((name, _)) = pre.iter().find(|(_, ok)| !ok) {
        return PointResult { check, params, status: Status::Skipped, margin: f64::NAN, skipped_because: Some(name.to_string()) };
    }
    let (m, scale) = eval();
    let (status, margin) = judge(m, scale);
    PointResult { check, params, status, margin, skipped_because: None }
}

/// Parameter grid of the scalar checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaGrid {
    pub tasks: Vec<usize>,
    pub n: Vec<usize>,
    pub memory: Vec<usize>,
    /// Multiples of each lemma's own `p` threshold.
    pub p_multipliers: Vec<f64>,
    pub p_cap: usize,
    /// Cap for the products bound that needs `p > 2T³(n+M)²`.
    pub forgetting_p_cap: usize,
    /// Largest `n + M` for that bound.
    pub forgetting_load_cap: usize,
}

impl Default for LemmaGrid {
    fn default() -> Self {
        LemmaGrid {
            tasks: (2..=6).collect(),
            n: vec![4, 8, 16, 32, 64],
            memory: (0..=48).step_by(2).collect(),
            p_multipliers: vec![1.0, 7.0],
            p_cap: 100_000,
            forgetting_p_cap: 10_000_000,
            forgetting_load_cap: 40,
        }
    }
}

impl LemmaGrid {
    fn describe(&self) -> String {
        format!(
            "T in {:?}, n in {:?}, M in {}..={} step 2, p = threshold x {:?} capped at {} ({} for the forgetting lower bound, n+M <= {})",
            self.tasks,
            self.n,
            self.memory.first().unwrap_or(&0),
            self.memory.last().unwrap_or(&0),
            self.p_multipliers,
            self.p_cap,
            self.forgetting_p_cap,
            self.forgetting_load_cap
        )
    }

    fn ps(&self, threshold: f64, cap: usize) -> Vec<usize> {
        let base = threshold.floor() as usize + 1;
        let mut v: Vec<usize> = self.p_multipliers.iter().map(|m| ((base as f64) * m).round() as usize).filter(|&p| p <= cap).collect();
        v.dedup();
        if v.is_empty() {
            v.push(base);
        }
        v
    }
}

/// `k·log(1 − M/(kp)) + log(1 − n/p)`.
fn log_block(n: f64, p: f64, m: f64, k: f64) -> f64 {
    k * (-m / (k * p)).ln_1p() + (-n / p).ln_1p()
}

/// `log Π_t` with `Π_t = Π_{l=0}^{t−2} (1 − M/((t−l−1)p))^{t−l−1}(1 − n/p)`.
fn log_pi(n: f64, p: f64, m: f64, t: usize) -> f64 {
    (1..t).map(|k| log_block(n, p, m, k as f64)).sum()
}

/// `(1−a+b)^t − (1−a)^t` without cancellation.
fn power_gap(a: f64, b: f64, t: f64) -> f64 {
    (t * (-a).ln_1p()).exp() * (t * (b / (1.0 - a)).ln_1p()).exp_m1()
}

pub fn check_scalar_lemmas(grid: &LemmaGrid) -> CheckReport {
    let mut pts = Vec::new();
    for &tt in &grid.tasks {
        let tf = tt as f64;
        for &n in &grid.n {
            for &mem in &grid.memory {
                let (nf, mf) = (n as f64, mem as f64);
                let load = nf + mf;
                let mpos = ("M >= 1", mem >= 1);
                let prm = |p: usize, t: Option<usize>, l: Option<usize>, i: Option<usize>| Params {
                    n,
                    p,
                    memory: mem,
                    tasks: tt,
                    t,
                    l,
                    i,
                    extra: None,
                };

                // product bounds, at the horizon t = T
                let t = tt;
                for p in grid.ps(load.max(tf * mf), grid.p_cap) {
                    let pf = p as f64;
                    let a = load / pf;
                    let b = load * mf / (pf * pf);
                    for l in 0..t - 1 {
                        let lb = log_block(nf, pf, mf, (t - l - 1) as f64);
                        let base = [mpos, ("p > n + M", pf > load)];
                        pts.push(point("product_lower_bound", prm(p, Some(t), Some(l), None), &base, || (lb.exp_m1() + a, 1.0 - a)));
                        let pre = [mpos, ("p > n + M", pf > load), ("p > T M", pf > tf * mf)];
                        pts.push(point("product_upper_bound", prm(p, Some(t), Some(l), None), &pre, || {
                            ((b - a) - lb.exp_m1(), 1.0 - a + b)
                        }));
                    }
                }

                // power bounds, every t <= T
                for p in grid.ps(load, grid.p_cap) {
                    let pf = p as f64;
                    let a = load / pf;
                    let b = load * mf / (pf * pf);
                    for t in 1..=tt {
                        let d = power_gap(a, b, t as f64);
                        let lo = (t as f64 * (-a).ln_1p()).exp();
                        let pre = [mpos, ("p > n + M", pf > load)];
                        pts.push(point("power_upper_bound", prm(p, Some(t), None, None), &pre, || {
                            (tf * tf * b - d, lo + tf * tf * b)
                        }));
                        let tighter = t as f64 * b + tf.powi(3) * b * b / 2.0;
                        pts.push(point("power_upper_bound_tighter", prm(p, Some(t), None, None), &pre, || {
                            (tighter - d, lo + tighter)
                        }));
                    }
                }

                // product ratio bound
                let thr5 = if mem >= 2 { load.max(tf * load * mf / (mf - 1.0) + load) } else { load };
                for p in grid.ps(thr5, grid.p_cap) {
                    let pf = p as f64;
                    let a = load / pf;
                    let b = load * mf / (pf * pf);
                    for l in 0..t - 1 {
                        let k = (t - l - 1) as f64;
                        let lf = l as f64;
                        let pre = [
                            ("M >= 2", mem >= 2),
                            ("p > n + M", pf > load),
                            ("p > T (n+M) M/(M-1) + n + M", mem >= 2 && pf > thr5),
                        ];
                        pts.push(point("product_ratio_bound", prm(p, Some(t), Some(l), None), &pre, || {
                            let ln_l = lf * (b - a).ln_1p() + k * (-mf / (k * pf)).ln_1p();
                            let ln_r = (-1.0 / (tf * pf)).ln_1p() + lf * (-a).ln_1p();
                            let r = ln_r.exp();
                            (r * -(ln_l - ln_r).exp_m1(), r)
                        }));
                    }
                }

                // forgetting product bounds
                let thr6 = load.max(2.0 * tf.powi(3) * load * load);
                let thr7 = load * tf;
                let mut ps: Vec<(usize, bool)> = grid.ps(thr7, grid.p_cap).into_iter().map(|p| (p, false)).collect();
                if n + mem <= grid.forgetting_load_cap {
                    ps.extend(grid.ps(thr6, grid.forgetting_p_cap).into_iter().map(|p| (p, true)));
                }
                for (p, lower) in ps {
                    let pf = p as f64;
                    let a = load / pf;
                    let b = load * mf / (pf * pf);
                    let lt = log_pi(nf, pf, mf, t);
                    for i in 1..t {
                        let li = log_pi(nf, pf, mf, i);
                        let d = li.exp() * (lt - li).exp_m1();
                        let base = ((i as f64 - 1.0) * (-a).ln_1p()).exp() * ((t - i) as f64 * (-a).ln_1p()).exp_m1();
                        let params = prm(p, Some(t), None, Some(i));
                        if lower {
                            let pre = [
                                mpos,
                                ("p > n + M", pf > load),
                                ("p > 2 T^3 (n+M)^2", pf > thr6),
                                ("n + M within the default range", n + mem <= grid.forgetting_load_cap),
                            ];
                            pts.push(point("forgetting_product_lower_bound", params, &pre, || (d - base, base)));
                        } else {
                            let pre = [mpos, ("p > (n+M) T", pf > thr7)];
                            let r7 = base + tf * tf * b;
                            pts.push(point("forgetting_product_upper_bound", params.clone(), &pre, || (r7 - d, r7)));
                            let r8 = base + (t - i) as f64 * b + tf.powi(3) * b * b;
                            pts.push(point("forgetting_product_upper_bound_tighter", params, &pre, || (r8 - d, r8)));
                        }
                    }
                }
            }
        }
    }
    CheckReport { name: "lemmas".into(), grid: grid.describe(), points: pts }
}

/// Configurations for the theorem checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremGrid {
    /// `(p, n, M)` for the two-task checks.
    pub two_task: Vec<(usize, usize, usize)>,
    pub gap_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    /// `(T, n, M)`; `p` comes from the large-`p` schedule.
    pub orthonormal: Vec<(usize, usize, usize)>,
    /// `(p, n, M, T)` for the general coefficient orderings.
    pub orderings: Vec<(usize, usize, usize, usize)>,
}

impl Default for TheoremGrid {
    fn default() -> Self {
        TheoremGrid {
            two_task: vec![(500, 24, 24), (200, 15, 10), (1000, 10, 40), (80, 20, 12)],
            gap_grid: (0..10).map(|k| 0.05 + 0.2 * k as f64).collect(),
            sigma_grid: (0..10).map(|k| 0.1 * k as f64).collect(),
            orthonormal: vec![(4, 10, 4), (3, 4, 2), (5, 4, 2), (4, 6, 3)],
            orderings: vec![
                (500, 24, 24, 5),
                (1000, 24, 24, 5),
                (3 * 81 * 16 * 8 * 8 + 1, 8, 8, 3),
                (3 * 256 * 14 * 10 * 4 + 1, 10, 4, 4),
                (3 * 625 * 6 * 4 * 2 + 1, 4, 2, 5),
            ],
        }
    }
}

pub fn check_theorems(grid: &TheoremGrid) -> Result<CheckReport> {
    let mut pts = Vec::new();
    for &(p, n, m) in &grid.two_task {
        let base = ProblemConfig::new(p, n, m, 2, 0.0);
        let params = |extra: String| Params { n, p, memory: m, tasks: 2, extra: Some(extra), ..Default::default() };
        let domain = [("p > n + M + 1", p > n + m + 1), ("M >= 1", m >= 1)];
        if domain.iter().any(|d| !d.1) {
            pts.push(point("two_task_iff", params("domain".into()), &domain, || (0.0, 1.0)));
            continue;
        }
        for &gap in &grid.gap_grid {
            for &sigma in &grid.sigma_grid {
                let cfg = ProblemConfig { sigma, ..base };
                let geom = Geometry::new(vec![1.0, 0.6], nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, gap, gap, 0.0]))?;
                let tt = two_task(&cfg, &geom)?;
                let k = tt.constants.expect("M >= 1");
                let df = tt.f_concurrent - tt.f_sequential;
                let dg = tt.g_concurrent - tt.g_sequential;
                let agree = |pred: bool, d: f64| if pred == (d > 0.0) { d.abs() } else { -d.abs() };
                let tag = format!("gap_sq={gap:.2} sigma={sigma:.2}");
                pts.push(point("two_task_forgetting_iff", params(tag.clone()), &[], || {
                    (agree(k.concurrent_forgets_more(&geom, sigma), df), tt.f_concurrent.abs().max(tt.f_sequential.abs()))
                }));
                pts.push(point("two_task_generalization_iff", params(tag), &[], || {
                    (agree(k.concurrent_generalizes_worse(&geom, sigma), dg), tt.g_concurrent.abs().max(tt.g_sequential.abs()))
                }));
            }
        }
        let n1 = 1.0;
        let n2 = 0.6;
        for (name, gap) in [
            ("two_task_forgetting_boundary", forgetting_threshold(&base, n1)),
            ("two_task_generalization_boundary", generalization_threshold(&base, n1 + n2)),
        ] {
            let geom = Geometry::new(vec![n1, n2], nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, gap, gap, 0.0]))?;
            let tt = two_task(&base, &geom)?;
            let d = if name.contains("forgetting") { tt.f_concurrent - tt.f_sequential } else { tt.g_concurrent - tt.g_sequential };
            pts.push(point(name, params(format!("gap_sq={gap:.6e}")), &[], || (1e-10 * n1 - d.abs(), 1e-10 * n1)));
        }
        let rep = coefficient_orderings(&base)?;
        for e in &rep.entries {
            let extra = format!("{} {:?}", e.quantity, e.indices);
            let scale = e.concurrent.abs().max(e.sequential.abs());
            let margin = if e.holds { e.margin.abs().max(2.0 * SLACK * scale) } else { -(e.margin.abs().max(2.0 * SLACK * scale)) };
            pts.push(point("two_task_orderings", params(extra), &domain, || (margin, scale)));
        }
    }

    for &(t, n, m) in &grid.orthonormal {
        let p = large_p_schedule(t, n, m);
        let cfg = ProblemConfig::new(p, n, m, t, 0.0);
        let geom = Geometry::orthonormal(t);
        let params = |extra: &str| Params { n, p, memory: m, tasks: t, extra: Some(extra.into()), ..Default::default() };
        let pre = [("M >= 2", m >= 2)];
        let mut paths = Vec::new();
        for model in [MemoryModel::Exact, MemoryModel::Fractional] {
            let c = predict_recursive(&cfg, &geom, &Rehearsal::Concurrent, model)?;
            let s = predict_recursive(&cfg, &geom, &Rehearsal::Sequential, model)?;
            paths.push((format!("recursion/{model:?}"), c.forgetting.unwrap_or(0.0), s.forgetting.unwrap_or(0.0), c.generalization, s.generalization));
        }
        let tc = predict_coefficients(&cfg, &Rehearsal::Concurrent, MemoryModel::Fractional)?;
        let ts = predict_coefficients(&cfg, &Rehearsal::Sequential, MemoryModel::Fractional)?;
        let ac = assemble_from_coefficients(&tc, &geom, 0.0)?;
        let as_ = assemble_from_coefficients(&ts, &geom, 0.0)?;
        paths.push(("table/Fractional".into(), ac.forgetting.unwrap_or(0.0), as_.forgetting.unwrap_or(0.0), ac.generalization, as_.generalization));
        for (path, fc, fs, gc, gs) in paths {
            pts.push(point("orthonormal_forgetting", params(&path), &pre, || (fc - fs, fc.abs().max(fs.abs()))));
            pts.push(point("orthonormal_generalization", params(&path), &pre, || (gc - gs, gc.abs().max(gs.abs()))));
        }
    }

    for &(p, n, m, t) in &grid.orderings {
        let cfg = ProblemConfig::new(p, n, m, t, 0.0);
        let rep = coefficient_orderings(&cfg)?;
        let proven = rep.proof_conditions_hold();
        for e in &rep.entries {
            let extra = format!("{} {:?}", e.quantity, e.indices);
            let params = Params { n, p, memory: m, tasks: t, extra: Some(extra), ..Default::default() };
            let scale = e.concurrent.abs().max(e.sequential.abs());
            let margin = if e.holds { e.margin.abs().max(2.0 * SLACK * scale) } else { -(e.margin.abs().max(2.0 * SLACK * scale)) };
            let pre = [("p above the ordering proof thresholds", proven)];
            pts.push(point("general_orderings", params, &pre, || (margin, scale)));
        }
    }

    let grid_desc = format!(
        "two-task {:?} on {}x{} gap/sigma grid; orthonormal {:?} at the large-p schedule; orderings {:?}",
        grid.two_task,
        grid.gap_grid.len(),
        grid.sigma_grid.len(),
        grid.orthonormal,
        grid.orderings
    );
    Ok(CheckReport { name: "theorems".into(), grid: grid_desc, points: pts })
}
