use nalgebra::DMatrix;
use serde::Serialize;

use super::{check_cfg, lambda, memory_sizes, Geometry, MemoryModel, Prediction, Rehearsal};
use crate::error::{Error, Result};
use crate::problem::ProblemConfig;

/// Per-step factors, indexed `[t − 1][l]` (or `[t − 1][a]` for `delta`/`gamma`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Helpers {
    pub r0: f64,
    pub r_mem: f64,
    pub b: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
}

/// Explicit coefficients of `E‖w_t − w*_i‖² = d0_t ‖w*_i‖² + Σ_{j<k} d(i;j,k;t) ‖w*_j − w*_k‖² + σ² ν_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub strategy: String,
    pub tasks: usize,
    pub d0: Vec<f64>,
    /// Flat `[t][i][j][k]`, only `j < k` populated.
    pub d: Vec<f64>,
    /// `ν_t`, noise per unit `σ²`.
    pub noise: Vec<f64>,
    /// `c_i = d0_T − d0_i`, `i < T`.
    pub c: Vec<f64>,
    /// Flat `[i][j][k]` for `i < T`: `d(i;j,k;T) − d(i;j,k;i)`.
    pub c_pair: Vec<f64>,
    pub helpers: Helpers,
}

impl CoefficientTable {
    fn idx(&self, t: usize, i: usize, j: usize, k: usize) -> usize {
        let n = self.tasks;
        (((t - 1) * n + (i - 1)) * n + (j - 1)) * n + (k - 1)
    }

    /// `d(i; j, k; t)`, symmetric in `j, k`, zero on the diagonal.
    pub fn d(&self, i: usize, j: usize, k: usize, t: usize) -> f64 {
        if j == k {
            return 0.0;
        }
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.d[self.idx(t, i, a, b)]
    }

    pub fn c_ijk(&self, i: usize, j: usize, k: usize) -> f64 {
        if j == k {
            return 0.0;
        }
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        let n = self.tasks;
        self.c_pair[((i - 1) * n + (a - 1)) * n + (b - 1)]
    }

    pub fn c_i(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    pub fn d0(&self, t: usize) -> f64 {
        self.d0[t - 1]
    }

    pub fn noise(&self, t: usize, sigma: f64) -> f64 {
        self.noise[t - 1] * sigma * sigma
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.tasks;
        let mut d = Vec::new();
        for t in 1..=n {
            for i in 1..=n {
                for j in 1..=n {
                    for k in j + 1..=n {
                        d.push(serde_json::json!({"t": t, "i": i, "j": j, "k": k, "value": self.d(i, j, k, t)}));
                    }
                }
            }
        }
        let mut cp = Vec::new();
        for i in 1..n {
            for j in 1..=n {
                for k in j + 1..=n {
                    cp.push(serde_json::json!({"i": i, "j": j, "k": k, "value": self.c_ijk(i, j, k)}));
                }
            }
        }
        serde_json::json!({
            "strategy": self.strategy,
            "tasks": n,
            "d0": self.d0,
            "noise_per_sigma_sq": self.noise,
            "d": d,
            "c_i": self.c,
            "c_ijk": cp,
            "helpers": self.helpers,
        })
    }
}

struct Acc {
    tasks: usize,
    d: Vec<f64>,
}

impl Acc {
    fn add(&mut self, t: usize, i: usize, j: usize, k: usize, v: f64) {
        if j == k {
            return;
        }
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        let n = self.tasks;
        self.d[(((t - 1) * n + (i - 1)) * n + (a - 1)) * n + (b - 1)] += v;
    }

    /// Adds `v` to `{j, i}` for every `i`.
    fn pull(&mut self, t: usize, j: usize, v: f64) {
        for i in 1..=self.tasks {
            self.add(t, i, j, i, v);
        }
    }

    /// Adds `v` to `{j, k}` for every `i`.
    fn pair(&mut self, t: usize, j: usize, k: usize, v: f64) {
        for i in 1..=self.tasks {
            self.add(t, i, j, k, v);
        }
    }
}

fn positive(den: f64, what: &str) -> Result<f64> {
    if den <= 0.0 {
        return Err(Error::DenominatorDomain(format!("{what} = {den} <= 0")));
    }
    Ok(den)
}

/// Builds the explicit coefficient table. Memory must be uniform per task.
pub fn predict_coefficients(cfg: &ProblemConfig, rehearsal: &Rehearsal, model: MemoryModel) -> Result<CoefficientTable> {
    check_cfg(cfg, None)?;
    rehearsal.check(cfg.tasks)?;
    if model == MemoryModel::Exact {
        return Err(Error::ConfigInvalid("coefficient tables need a uniform per-task memory".into()));
    }
    let tt = cfg.tasks;
    let p = cfg.p as f64;
    let n = cfg.n as f64;
    let mem = cfg.memory as f64;
    let r0 = 1.0 - n / p;
    let r_mem = 1.0 - (n + mem) / p;
    // mu[s-1] for steps s >= 2, zero at s = 1
    let mut mu = vec![0.0; tt];
    for s in 2..=tt {
        mu[s - 1] = memory_sizes(cfg, s, model)?[0];
    }
    let bs = |s: usize| mu[s - 1] / p;
    let (sim, dis): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match rehearsal {
        Rehearsal::Hybrid(part) => ((1..=tt).map(|s| part.sim(s)).collect(), (1..=tt).map(|s| part.dis(s)).collect()),
        _ => (vec![vec![]; tt], vec![vec![]; tt]),
    };

    let mut acc = Acc { tasks: tt, d: vec![0.0; tt.pow(4)] };
    let mut d0 = vec![0.0; tt];
    let mut noise = vec![0.0; tt];
    let mut helpers = Helpers {
        r0,
        r_mem,
        b: vec![],
        h: vec![],
        k: vec![],
        delta: vec![],
        gamma: vec![],
    };

    for t in 1..=tt {
        helpers.b.push((0..t).map(|l| bs(t - l)).collect());
        match rehearsal {
            Rehearsal::Concurrent => {
                let qc = p - n - mem - 1.0;
                let mut hrow = Vec::with_capacity(t);
                for l in 0..t {
                    let s = t - l;
                    let decay = r_mem.powi(l as i32);
                    acc.pull(t, s, (n / p) * decay);
                    if s >= 2 {
                        let b = bs(s);
                        let h = if b == 0.0 { 0.0 } else { b / positive(qc, "p - n - M - 1")? };
                        hrow.push(h);
                        for j in 1..s {
                            acc.pull(t, j, b * decay);
                            acc.pair(t, j, s, n * h * decay);
                            for k in j + 1..s {
                                acc.pair(t, j, k, p * b * h * decay);
                            }
                        }
                        noise[t - 1] += decay * lambda(p, n + mem)?;
                    } else {
                        hrow.push(0.0);
                        noise[t - 1] += decay * lambda(p, n)?;
                    }
                }
                d0[t - 1] = r0 * r_mem.powi(t as i32 - 1);
                helpers.h.push(hrow);
            }
            Rehearsal::Sequential => {
                // delta[a] = Π_{l<a} (1 − B_{l,t})^{t−l−1} r_0
                let mut delta = vec![1.0; t];
                for a in 1..t {
                    let l = a - 1;
                    let s = t - l;
                    delta[a] = delta[a - 1] * (1.0 - bs(s)).powi(s as i32 - 1) * r0;
                }
                for l in 0..t {
                    let s = t - l;
                    let b = bs(s);
                    let dl = delta[l];
                    acc.pull(t, s, (n / p) * (1.0 - b).powi(s as i32 - 1) * dl);
                    noise[t - 1] += dl * (1.0 - b).powi(s as i32 - 1) * lambda(p, n)?;
                    for h in 1..s {
                        let tail = (1.0 - b).powi((s - 1 - h) as i32);
                        acc.pull(t, h, b * tail * dl);
                        noise[t - 1] += dl * tail * lambda(p, mu[s - 1])?;
                    }
                }
                d0[t - 1] = r0 * delta[t - 1];
                helpers.delta.push(delta);
            }
            Rehearsal::Hybrid(_) => {
                let mut gamma = vec![1.0; t];
                for a in 1..t {
                    let s = t - (a - 1);
                    let rs = 1.0 - (n + mu[s - 1] * sim[s - 1].len() as f64) / p;
                    gamma[a] = gamma[a - 1] * (1.0 - bs(s)).powi(dis[s - 1].len() as i32) * rs;
                }
                let mut krow = Vec::with_capacity(t);
                for l in 0..t {
                    let s = t - l;
                    let b = bs(s);
                    let sset = &sim[s - 1];
                    let dset = &dis[s - 1];
                    let joint = n + mu[s - 1] * sset.len() as f64;
                    let kf = if sset.is_empty() || b == 0.0 {
                        0.0
                    } else {
                        b / positive(p - joint - 1.0, "p - n - mu|S| - 1")?
                    };
                    krow.push(kf);
                    let g = gamma[l];
                    let post = (1.0 - b).powi(dset.len() as i32) * g;
                    acc.pull(t, s, (n / p) * post);
                    for (x, &j) in sset.iter().enumerate() {
                        acc.pull(t, j, b * post);
                        acc.pair(t, j, s, n * kf * post);
                        for &k in &sset[x + 1..] {
                            acc.pair(t, j, k, p * b * kf * post);
                        }
                    }
                    noise[t - 1] += post * lambda(p, joint)?;
                    for (f, &h) in dset.iter().enumerate() {
                        let tail = (1.0 - b).powi((dset.len() - f - 1) as i32);
                        acc.pull(t, h, b * tail * g);
                        noise[t - 1] += tail * g * lambda(p, mu[s - 1])?;
                    }
                }
                d0[t - 1] = r0 * gamma[t - 1];
                helpers.k.push(krow);
                helpers.gamma.push(gamma);
            }
        }
    }

    let mut table = CoefficientTable {
        strategy: rehearsal.name().to_string(),
        tasks: tt,
        d0,
        d: acc.d,
        noise,
        c: vec![],
        c_pair: vec![0.0; tt.saturating_sub(1) * tt * tt],
        helpers,
    };
    table.c = (1..tt).map(|i| table.d0(tt) - table.d0(i)).collect();
    for i in 1..tt {
        for j in 1..=tt {
            for k in j + 1..=tt {
                let v = table.d(i, j, k, tt) - table.d(i, j, k, i);
                table.c_pair[((i - 1) * tt + (j - 1)) * tt + (k - 1)] = v;
            }
        }
    }
    Ok(table)
}

/// Metrics and expected errors obtained by contracting a table with a geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assembled {
    pub forgetting: Option<f64>,
    pub generalization: f64,
    pub expected: DMatrix<f64>,
    /// `F_T` contracted directly from `c_i` and `c_ijk`.
    pub forgetting_from_c: Option<f64>,
}

pub fn assemble_from_coefficients(table: &CoefficientTable, geom: &Geometry, sigma: f64) -> Result<Assembled> {
    let tt = table.tasks;
    if geom.tasks() != tt {
        return Err(Error::ShapeMismatch(format!("geometry of {} tasks for a table of {tt}", geom.tasks())));
    }
    let mut expected = DMatrix::zeros(tt, tt);
    for t in 1..=tt {
        for i in 1..=tt {
            let mut v = table.d0(t) * geom.norms_sq[i - 1] + table.noise(t, sigma);
            for j in 1..=tt {
                for k in j + 1..=tt {
                    v += table.d(i, j, k, t) * geom.gap(j, k);
                }
            }
            expected[(i - 1, t - 1)] = v;
        }
    }
    let base = Prediction::from_expected(expected);
    let forgetting_from_c = (tt >= 2).then(|| {
        let mut s = 0.0;
        for i in 1..tt {
            s += table.c_i(i) * geom.norms_sq[i - 1] + table.noise(tt, sigma) - table.noise(i, sigma);
            for j in 1..=tt {
                for k in j + 1..=tt {
                    s += table.c_ijk(i, j, k) * geom.gap(j, k);
                }
            }
        }
        s / (tt - 1) as f64
    });
    Ok(Assembled {
        forgetting: base.forgetting,
        generalization: base.generalization,
        expected: base.expected,
        forgetting_from_c,
    })
}

#[cfg(test)]
mod tests {
    use super::super::predict_recursive;
    use super::*;
    use crate::trainers::Partition;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    fn agree(cfg: &ProblemConfig, geom: &Geometry, r: &Rehearsal) {
        let table = predict_coefficients(cfg, r, MemoryModel::Fractional).unwrap();
        let asm = assemble_from_coefficients(&table, geom, cfg.sigma).unwrap();
        let rec = predict_recursive(cfg, geom, r, MemoryModel::Fractional).unwrap();
        for (a, b) in asm.expected.iter().zip(rec.expected.iter()) {
            assert!(close(*a, *b, 1e-12), "{a} vs {b} for {}", r.name());
        }
        assert!(close(asm.forgetting.unwrap(), rec.forgetting.unwrap(), 1e-10));
        assert!(close(asm.forgetting_from_c.unwrap(), rec.forgetting.unwrap(), 1e-10));
    }

    fn generic(tasks: usize) -> Geometry {
        let norms = (0..tasks).map(|i| 0.5 + 0.3 * i as f64).collect();
        let gaps = DMatrix::from_fn(tasks, tasks, |j, k| if j == k { 0.0 } else { 0.2 + 0.11 * (j + k) as f64 + 0.05 * (j * k) as f64 });
        Geometry::new(norms, gaps).unwrap()
    }

    #[test]
    fn tables_match_recursion() {
        let cfg = ProblemConfig::new(300, 12, 9, 5, 0.7);
        let g = generic(5);
        agree(&cfg, &g, &Rehearsal::Concurrent);
        agree(&cfg, &g, &Rehearsal::Sequential);
        let part = Partition::from_sets(5, &[vec![1], vec![2], vec![1, 3], vec![2]], &[vec![], vec![1], vec![2], vec![1, 3, 4]]).unwrap();
        agree(&cfg, &g, &Rehearsal::Hybrid(part));
    }

    #[test]
    fn hybrid_endpoints_reproduce_pure_tables() {
        let cfg = ProblemConfig::new(200, 10, 6, 4, 0.3);
        let c = predict_coefficients(&cfg, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap();
        let s = predict_coefficients(&cfg, &Rehearsal::Sequential, MemoryModel::Strict).unwrap();
        let hs = predict_coefficients(&cfg, &Rehearsal::Hybrid(Partition::all_similar(4)), MemoryModel::Strict).unwrap();
        let hd = predict_coefficients(&cfg, &Rehearsal::Hybrid(Partition::all_dissimilar(4)), MemoryModel::Strict).unwrap();
        for (a, b) in c.d.iter().zip(hs.d.iter()).chain(s.d.iter().zip(hd.d.iter())) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in c.noise.iter().zip(hs.noise.iter()).chain(s.noise.iter().zip(hd.noise.iter())) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn memoryless_tables_coincide() {
        let cfg = ProblemConfig::new(90, 7, 0, 4, 0.0);
        let c = predict_coefficients(&cfg, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap();
        let s = predict_coefficients(&cfg, &Rehearsal::Sequential, MemoryModel::Strict).unwrap();
        for (a, b) in c.d.iter().zip(s.d.iter()).chain(c.d0.iter().zip(s.d0.iter())) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn exact_model_rejected() {
        let cfg = ProblemConfig::new(90, 7, 3, 3, 0.0);
        assert!(matches!(
            predict_coefficients(&cfg, &Rehearsal::Concurrent, MemoryModel::Exact),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn concurrent_helper_values() {
        let cfg = ProblemConfig::new(100, 10, 6, 3, 0.0);
        let t = predict_coefficients(&cfg, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap();
        assert!((t.helpers.r0 - 0.9).abs() < 1e-15);
        assert!((t.helpers.r_mem - 0.84).abs() < 1e-15);
        // B_{0,3} = 6/(2·100), H = B/(100 − 16 − 1)
        assert!((t.helpers.b[2][0] - 0.03).abs() < 1e-15);
        assert!((t.helpers.h[2][0] - 0.03 / 83.0).abs() < 1e-15);
        assert_eq!(t.helpers.b[2][2], 0.0);
        assert!((t.d0(3) - 0.9 * 0.84 * 0.84).abs() < 1e-15);
    }

    #[test]
    fn json_lists_every_pair() {
        let cfg = ProblemConfig::new(100, 10, 6, 3, 0.0);
        let t = predict_coefficients(&cfg, &Rehearsal::Sequential, MemoryModel::Strict).unwrap();
        let v = t.to_json();
        assert_eq!(v["d"].as_array().unwrap().len(), 3 * 3 * 3);
        assert_eq!(v["c_ijk"].as_array().unwrap().len(), 2 * 3);
    }
}
