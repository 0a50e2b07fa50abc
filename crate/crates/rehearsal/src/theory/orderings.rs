use serde::Serialize;

use super::{large_p_schedule, predict_coefficients, MemoryModel, Rehearsal};
use crate::error::Result;
use crate::problem::ProblemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Concurrent strictly below sequential.
    Less,
    /// Concurrent at least sequential.
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingEntry {
    pub quantity: &'static str,
    pub indices: Vec<usize>,
    pub ordering: Ordering,
    pub concurrent: f64,
    pub sequential: f64,
    /// Positive when the ordering holds with room to spare.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Precondition {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub cfg: ProblemConfig,
    pub entries: Vec<OrderingEntry>,
    pub preconditions: Vec<Precondition>,
    pub violations: usize,
    /// Every pair agrees to 1e-12 relative.
    pub all_equal: bool,
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }

    /// Conditions under which the orderings are proven: `M ≥ 1` and `p` above
    /// `2T³(n+M)²`, `3T⁴(n+M)nM` and `(T⁴+1)(n+M)M`.
    pub fn proof_conditions_hold(&self) -> bool {
        const NEEDED: [&str; 4] = ["p > n + M + 1", "p > 2 T^3 (n + M)^2", "p > 3 T^4 (n + M) n M", "p > (T^4 + 1)(n + M) M"];
        self.cfg.memory >= 1 && NEEDED.iter().all(|n| self.preconditions.iter().any(|c| c.name == *n && c.holds))
    }

    pub fn failures(&self) -> impl Iterator<Item = &OrderingEntry> {
        self.entries.iter().filter(|e| !e.holds)
    }
}

const SLACK: f64 = 1e-12;

fn entry(quantity: &'static str, indices: Vec<usize>, ordering: Ordering, c: f64, s: f64) -> OrderingEntry {
    let scale = c.abs().max(s.abs());
    let (margin, holds) = match ordering {
        Ordering::Less => (s - c, s - c > SLACK * scale),
        Ordering::GreaterEq => (c - s, c - s >= -SLACK * scale),
    };
    OrderingEntry { quantity, indices, ordering, concurrent: c, sequential: s, margin, holds }
}

/// Compares concurrent and sequential coefficients at `T = cfg.tasks`.
pub fn coefficient_orderings(cfg: &ProblemConfig) -> Result<OrderingReport> {
    let conc = predict_coefficients(cfg, &Rehearsal::Concurrent, MemoryModel::Fractional)?;
    let seq = predict_coefficients(cfg, &Rehearsal::Sequential, MemoryModel::Fractional)?;
    let tt = cfg.tasks;
    let mut entries = Vec::new();
    for i in 1..tt {
        entries.push(entry("c_i", vec![i], Ordering::Less, conc.c_i(i), seq.c_i(i)));
    }
    for i in 1..tt {
        for j in 1..=tt {
            for k in j + 1..=tt {
                entries.push(entry("c_ijk", vec![i, j, k], Ordering::GreaterEq, conc.c_ijk(i, j, k), seq.c_ijk(i, j, k)));
            }
        }
    }
    entries.push(entry("d_0T", vec![tt], Ordering::Less, conc.d0(tt), seq.d0(tt)));
    for i in 1..=tt {
        for j in 1..=tt {
            for k in j + 1..=tt {
                entries.push(entry("d_ijkT", vec![i, j, k], Ordering::GreaterEq, conc.d(i, j, k, tt), seq.d(i, j, k, tt)));
            }
        }
    }
    let all_equal = entries
        .iter()
        .all(|e| (e.concurrent - e.sequential).abs() <= SLACK * e.concurrent.abs().max(e.sequential.abs()).max(1e-300));
    let violations = entries.iter().filter(|e| !e.holds).count();

    let (p, n, m, t) = (cfg.p as f64, cfg.n as f64, cfg.memory as f64, tt as f64);
    let a = n + m;
    let mut preconditions = vec![
        Precondition { name: "p > n + M + 1".into(), holds: p > a + 1.0 },
        Precondition { name: "M >= 2".into(), holds: cfg.memory >= 2 },
        Precondition { name: "p > (n + M) T".into(), holds: p > a * t },
        Precondition { name: "p > T M".into(), holds: p > t * m },
        Precondition { name: "p > 2 T^3 (n + M)^2".into(), holds: p > 2.0 * t.powi(3) * a * a },
        Precondition { name: "p > 2 T^4 (n + M) n M".into(), holds: p > 2.0 * t.powi(4) * a * n * m },
        Precondition { name: "p > 3 T^4 (n + M) n M".into(), holds: p > 3.0 * t.powi(4) * a * n * m },
        Precondition { name: "p > (T^4 + 1)(n + M) M".into(), holds: p > (t.powi(4) + 1.0) * a * m },
        Precondition {
            name: "p >= 2 T^4 (n + M)^2 max(M, 1)".into(),
            holds: cfg.p >= large_p_schedule(tt, cfg.n, cfg.memory),
        },
    ];
    if cfg.memory >= 2 {
        preconditions.push(Precondition {
            name: "p > T (n + M) M / (M - 1) + n + M".into(),
            holds: p > t * a * m / (m - 1.0) + a,
        });
    }
    Ok(OrderingReport { cfg: *cfg, entries, preconditions, violations, all_equal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_task_orderings_hold() {
        let r = coefficient_orderings(&ProblemConfig::new(500, 24, 24, 2, 0.0)).unwrap();
        assert!(r.all_hold(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.entries.len(), 1 + 1 + 1 + 2);
    }

    #[test]
    fn memoryless_orderings_are_equalities() {
        let r = coefficient_orderings(&ProblemConfig::new(500, 24, 0, 5, 0.0)).unwrap();
        assert!(r.all_equal);
        assert!(r.failures().all(|e| e.ordering == Ordering::Less));
    }

    #[test]
    fn five_tasks_at_moderate_p() {
        let r = coefficient_orderings(&ProblemConfig::new(500, 24, 24, 5, 0.0)).unwrap();
        for e in &r.entries {
            if e.quantity != "c_ijk" {
                assert!(e.holds, "{e:?}");
            }
        }
        let bad: Vec<Vec<usize>> = r.failures().map(|e| e.indices.clone()).collect();
        assert_eq!(bad, vec![vec![3, 1, 2], vec![3, 2, 3], vec![4, 1, 2], vec![4, 2, 4], vec![4, 3, 4]]);
    }

    #[test]
    fn five_tasks_at_larger_p() {
        let r = coefficient_orderings(&ProblemConfig::new(1000, 24, 24, 5, 0.0)).unwrap();
        assert!(r.all_hold());
    }

    #[test]
    fn schedule_precondition_reported() {
        let cfg = ProblemConfig::new(large_p_schedule(4, 10, 4), 10, 4, 4, 0.0);
        let r = coefficient_orderings(&cfg).unwrap();
        let at = |name: &str| r.preconditions.iter().find(|c| c.name == name).unwrap().holds;
        assert!(at("p >= 2 T^4 (n + M)^2 max(M, 1)"));
        assert!(at("p > 2 T^4 (n + M) n M"));
        assert!(!at("p > 3 T^4 (n + M) n M"));
        assert!(!r.proof_conditions_hold());
        let r = coefficient_orderings(&ProblemConfig::new(3 * 256 * 14 * 10 * 4 + 1, 10, 4, 4, 0.0)).unwrap();
        assert!(r.proof_conditions_hold() && r.all_hold());
    }
}
