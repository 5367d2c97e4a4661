//! Line charts as standalone SVG files.
//!
//! Each chart plots one metric against task count or VM count. Values are means over
//! seeds, divided per scenario by the largest mean among the plotted algorithms.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::config::Algorithm;
use crate::experiment::Row;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

const COLORS: [&str; 6] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#a6761d",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    Tasks,
    Vms,
}

impl Axis {
    fn label(self) -> &'static str {
        match self {
            Axis::Tasks => "tasks",
            Axis::Vms => "VMs",
        }
    }

    fn slug(self) -> &'static str {
        match self {
            Axis::Tasks => "tasks",
            Axis::Vms => "vms",
        }
    }

    /// The axis a scenario belongs to and its position on it.
    fn of(row: &Row) -> (Axis, usize) {
        if row.scenario_id.starts_with("vms-") {
            (Axis::Vms, row.n_vms)
        } else {
            (Axis::Tasks, row.n_tasks)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub slug: &'static str,
    pub title: &'static str,
    pub value: fn(&Row) -> Option<f64>,
}

pub const METRICS: [Metric; 4] = [
    Metric {
        slug: "energy",
        title: "Total energy",
        value: |r| Some(r.total_energy_j),
    },
    Metric {
        slug: "act",
        title: "Average completion time",
        value: |r| r.act_s,
    },
    Metric {
        slug: "awt",
        title: "Average wait time",
        value: |r| r.awt_s,
    },
    Metric {
        slug: "avg_power",
        title: "Average power",
        value: |r| Some(r.avg_power_w),
    },
];

/// Normalized series per algorithm: `(x, value in [0, 1])`, sorted by x.
pub fn series(rows: &[Row], axis: Axis, metric: &Metric) -> BTreeMap<Algorithm, Vec<(usize, f64)>> {
    let mut sums: BTreeMap<(usize, Algorithm), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let (a, x) = Axis::of(r);
        if a != axis {
            continue;
        }
        if let Some(v) = (metric.value)(r) {
            let s = sums.entry((x, r.algorithm)).or_insert((0.0, 0));
            s.0 += v;
            s.1 += 1;
        }
    }
    let mut max_at: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(x, _), &(sum, n)) in &sums {
        let m = max_at.entry(x).or_insert(0.0);
        *m = m.max(sum / n as f64);
    }
    let mut out: BTreeMap<Algorithm, Vec<(usize, f64)>> = BTreeMap::new();
    for ((x, alg), (sum, n)) in sums {
        let max = max_at[&x];
        let v = if max > 0.0 { sum / n as f64 / max } else { 0.0 };
        out.entry(alg).or_default().push((x, v));
    }
    out
}

fn render(axis: Axis, metric: &Metric, data: &BTreeMap<Algorithm, Vec<(usize, f64)>>) -> String {
    let mut xs: Vec<usize> = data.values().flatten().map(|p| p.0).collect();
    xs.sort_unstable();
    xs.dedup();
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: usize| -> f64 {
        match (xs.first(), xs.last()) {
            (Some(&lo), Some(&hi)) if hi > lo => LEFT + plot_w * (x - lo) as f64 / (hi - lo) as f64,
            _ => LEFT + plot_w / 2.0,
        }
    };
    let py = |v: f64| TOP + plot_h * (1.0 - v);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{} vs {}</text>"#,
        LEFT + plot_w / 2.0,
        metric.title,
        axis.label()
    );
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{v:.1}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for &x in &xs {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#,
            px(x),
            TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">number of {}</text>"#,
        LEFT + plot_w / 2.0,
        TOP + plot_h + 34.0,
        axis.label()
    );
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle" font-size="10" fill="#555">normalized per scenario by the maximum across algorithms (mean over seeds)</text>"##,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    for (k, (alg, points)) in data.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, v)| format!("{},{}", px(x), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, v) in points {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                px(x),
                py(v)
            );
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            alg.name().to_uppercase()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `(file name, document)` for every metric and every axis present in `rows`.
pub fn render_all(rows: &[Row]) -> Vec<(String, String)> {
    let mut axes: Vec<Axis> = rows.iter().map(|r| Axis::of(r).0).collect();
    axes.sort_unstable();
    axes.dedup();
    let mut out = Vec::new();
    for axis in axes {
        for metric in &METRICS {
            let data = series(rows, axis, metric);
            out.push((
                format!("{}_vs_{}.svg", metric.slug, axis.slug()),
                render(axis, metric, &data),
            ));
        }
    }
    out
}
