//! Static two-panel SVG of a sweep and a gnuplot-friendly data file.

use std::fmt::Write as _;

use rehearsal::montecarlo::{SweepAxis, SweepResult};

pub const WIDTH: f64 = 1200.0;
pub const HEIGHT: f64 = 500.0;

const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

fn color(strategy: &str) -> &'static str {
    match strategy {
        "concurrent" => "#1f77b4",
        "sequential" => "#d62728",
        "hybrid" => "#2ca02c",
        _ => "#555555",
    }
}

#[derive(Clone, Copy)]
enum Metric {
    Forgetting,
    Generalization,
}

struct Series {
    strategy: String,
    /// `(x, mean, se)`.
    empirical: Vec<(f64, f64, f64)>,
    theory: Vec<(f64, f64)>,
}

fn series(result: &SweepResult, metric: Metric) -> Vec<Series> {
    let names: Vec<String> = result.points.first().map(|p| p.estimates.iter().map(|e| e.strategy.clone()).collect()).unwrap_or_default();
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let mut s = Series { strategy: name.clone(), empirical: Vec::new(), theory: Vec::new() };
            for pt in &result.points {
                let e = &pt.estimates[k];
                let (est, th) = match metric {
                    Metric::Forgetting => (e.forgetting, e.theory_forgetting),
                    Metric::Generalization => (Some(e.generalization), e.theory_generalization),
                };
                if let Some(est) = est {
                    s.empirical.push((pt.value, est.mean, est.std_error));
                }
                if let Some(th) = th {
                    s.theory.push((pt.value, th));
                }
            }
            s
        })
        .collect()
}

/// Roughly `target` round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64 + 0.5).unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let stop = (hi / step).floor() as i64;
    (start..=stop).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xlo: f64,
    xhi: f64,
    ylo: f64,
    yhi: f64,
    logx: bool,
}

impl Frame {
    fn tx(&self, x: f64) -> f64 {
        let (a, b, v) = if self.logx { (self.xlo.ln(), self.xhi.ln(), x.ln()) } else { (self.xlo, self.xhi, x) };
        self.x0 + (v - a) / (b - a) * self.w
    }

    fn ty(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ylo) / (self.yhi - self.ylo) * self.h
    }
}

fn padded(lo: f64, hi: f64, frac: f64) -> (f64, f64) {
    if hi > lo {
        let d = (hi - lo) * frac;
        (lo - d, hi + d)
    } else {
        let d = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 0.5 };
        (lo - d, hi + d)
    }
}

fn panel(svg: &mut String, result: &SweepResult, metric: Metric, x0: f64, crossover: (Option<f64>, Option<f64>)) {
    let all = series(result, metric);
    let w = WIDTH / 2.0 - MARGIN_L - MARGIN_R;
    let h = HEIGHT - MARGIN_T - MARGIN_B;
    let xs: Vec<f64> = result.points.iter().map(|p| p.value).collect();
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let logx = result.axis == SweepAxis::P && xmin > 0.0 && xmax / xmin >= 50.0;
    let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &all {
        for &(_, m, se) in &s.empirical {
            ylo = ylo.min(m - se);
            yhi = yhi.max(m + se);
        }
        for &(_, v) in &s.theory {
            ylo = ylo.min(v);
            yhi = yhi.max(v);
        }
    }
    if !ylo.is_finite() {
        (ylo, yhi) = (0.0, 1.0);
    }
    let (ylo, yhi) = padded(ylo, yhi, 0.06);
    let (xlo, xhi) = if logx { (xmin / 1.3, xmax * 1.3) } else { padded(xmin, xmax, 0.04) };
    let f = Frame { x0, y0: MARGIN_T, w, h, xlo, xhi, ylo, yhi, logx };

    let (title, ylabel) = match metric {
        Metric::Forgetting => ("Forgetting", "F_T"),
        Metric::Generalization => ("Generalization error", "G_T"),
    };
    let _ = writeln!(svg, r##"<g class="panel" data-metric="{ylabel}">"##);
    let _ = writeln!(svg, r##"<rect x="{:.2}" y="{:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#333"/>"##, f.x0, f.y0);
    let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">{title}</text>"##, f.x0 + w / 2.0, MARGIN_T - 22.0);

    let yt = nice_ticks(ylo, yhi, 6);
    for v in yt {
        let y = f.ty(v);
        let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/>"##, f.x0, f.x0 + w);
        let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##, f.x0 - 6.0, y + 4.0, fmt_tick(v));
    }
    let xt: Vec<f64> = if logx {
        let (a, b) = (xlo.log10().ceil() as i32, xhi.log10().floor() as i32);
        (a..=b).map(|e| 10f64.powi(e)).collect()
    } else {
        nice_ticks(xlo, xhi, 8)
    };
    for v in xt {
        let x = f.tx(v);
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##, f.y0 + h, f.y0 + h + 5.0);
        let _ = writeln!(svg, r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##, f.y0 + h + 18.0, fmt_tick(v));
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}{}</text>"##,
        f.x0 + w / 2.0,
        HEIGHT - 18.0,
        result.axis.name(),
        if logx { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"##,
        f.x0 - 58.0,
        f.y0 + h / 2.0,
        f.x0 - 58.0,
        f.y0 + h / 2.0
    );
    if ylo < 0.0 && yhi > 0.0 {
        let y = f.ty(0.0);
        let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="2,3"/>"##, f.x0, f.x0 + w);
    }

    for s in &all {
        let c = color(&s.strategy);
        if !s.theory.is_empty() {
            let pts: Vec<String> = s.theory.iter().map(|&(x, v)| format!("{:.2},{:.2}", f.tx(x), f.ty(v))).collect();
            let _ = writeln!(
                svg,
                r##"<polyline class="theory" data-strategy="{}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"##,
                s.strategy,
                pts.join(" ")
            );
        }
        for &(x, m, se) in &s.empirical {
            let (px, py) = (f.tx(x), f.ty(m));
            let _ = writeln!(
                svg,
                r##"<line class="se" x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{c}"/>"##,
                f.ty(m - se),
                f.ty(m + se)
            );
            let _ = writeln!(
                svg,
                r##"<circle class="empirical" data-strategy="{}" cx="{px:.2}" cy="{py:.2}" r="3.5" fill="white" stroke="{c}" stroke-width="1.5"/>"##,
                s.strategy
            );
        }
    }

    let (th, emp) = crossover;
    let mut label_y = f.y0 + 16.0;
    for (kind, x, dash) in [("theory", th, "6,4"), ("empirical", emp, "2,3")] {
        if let Some(x) = x {
            if x >= f.xlo && x <= f.xhi {
                let px = f.tx(x);
                let _ = writeln!(
                    svg,
                    r##"<line class="crossover" x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444" stroke-dasharray="{dash}"/>"##,
                    f.y0,
                    f.y0 + h
                );
                let _ = writeln!(
                    svg,
                    r##"<text class="crossover-label" x="{:.2}" y="{label_y:.2}" font-size="12" fill="#444">{kind} crossover at {} = {}</text>"##,
                    px + 5.0,
                    result.axis.name(),
                    fmt_tick(x)
                );
                label_y += 15.0;
            }
        }
    }

    let mut ly = f.y0 + h - 12.0 - 16.0 * (all.len() as f64 - 1.0);
    for s in &all {
        let c = color(&s.strategy);
        let lx = f.x0 + w - 150.0;
        let _ = writeln!(svg, r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"##, lx + 22.0);
        let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{ly:.2}" r="3.5" fill="white" stroke="{c}" stroke-width="1.5"/>"##, lx + 11.0);
        let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"##, lx + 28.0, ly + 4.0, s.strategy);
        ly += 16.0;
    }
    let _ = writeln!(svg, "</g>");
}

/// Forgetting on the left, generalization on the right; lines are theory,
/// markers are empirical means with ±1 SE bars.
pub fn sweep_svg(result: &SweepResult) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let c = &result.crossovers;
    panel(&mut svg, result, Metric::Forgetting, MARGIN_L, (c.theory_forgetting, c.empirical_forgetting));
    panel(&mut svg, result, Metric::Generalization, WIDTH / 2.0 + MARGIN_L, (c.theory_generalization, c.empirical_generalization));
    let _ = writeln!(svg, "</svg>");
    svg
}

/// One gnuplot data block per strategy (select with `index`).
pub fn sweep_dat(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# axis {}", result.axis.name());
    let _ = writeln!(s, "# columns: axis_value F_mean F_se F_theory G_mean G_se G_theory (NaN = unavailable)");
    let names: Vec<String> = result.points.first().map(|p| p.estimates.iter().map(|e| e.strategy.clone()).collect()).unwrap_or_default();
    let g = |x: Option<f64>| crate::output::fmt_f(x.unwrap_or(f64::NAN));
    for (k, name) in names.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# strategy {name}");
        for pt in &result.points {
            let e = &pt.estimates[k];
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {}",
                crate::output::fmt_f(pt.value),
                g(e.forgetting.map(|v| v.mean)),
                g(e.forgetting.map(|v| v.std_error)),
                g(e.theory_forgetting),
                g(Some(e.generalization.mean)),
                g(Some(e.generalization.std_error)),
                g(e.theory_generalization)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 1.9, 8);
        assert_eq!(t.first(), Some(&0.0));
        assert!(t.len() >= 4 && t.len() <= 12);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(nice_ticks(1.0, 1.0, 5), vec![1.0]);
    }

    #[test]
    fn tick_labels() {
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(2.0), "2");
        assert_eq!(fmt_tick(1e6), "1.0e6");
    }
}
