//! Hand-emitted SVG: study plots and shape galleries.
//!
//! Everything is plain string building with fixed formatting, so identical
//! inputs produce byte-identical files (the plot tests recompute medians
//! from the CSV and compare against the embedded data attributes).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use polyqd_core::geometry::{express, rasterize, Bitmap, BoundsCase, Genome};
use polyqd_core::pareto;

use crate::experiments::{RunResult, Study};
use crate::median;

const SERIES_COLORS: [&str; 6] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
];

struct Panel {
    key: &'static str,
    title: &'static str,
    value: fn(&RunResult) -> f64,
}

const PANELS: [Panel; 7] = [
    Panel { key: "sdnn_gen", title: "genetic SDNN", value: |r| r.sdnn_gen },
    Panel { key: "spd_gen", title: "genetic SPD", value: |r| r.spd_gen },
    Panel { key: "pd_gen", title: "genetic PD", value: |r| r.pd_gen },
    Panel { key: "sdnn_phen", title: "phenotypic SDNN", value: |r| r.sdnn_phen },
    Panel { key: "spd_phen", title: "phenotypic SPD", value: |r| r.spd_phen },
    Panel { key: "pd_phen", title: "phenotypic PD", value: |r| r.pd_phen },
    Panel { key: "fitness", title: "median fitness", value: |r| r.fitness_median },
];

fn x_category(study: Study, row: &RunResult) -> String {
    match study {
        Study::BinSweep => row.bins.to_string(),
        Study::NeutralitySweep | Study::ParetoDistance => row.case.clone(),
        Study::AutoveCompare => row.algorithm.clone(),
    }
}

fn series_of(study: Study, row: &RunResult) -> String {
    match study {
        Study::AutoveCompare => "archive".to_string(),
        _ => row.algorithm.clone(),
    }
}

fn fmt_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (0.001..10000.0).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

/// Median with min/max band per (series, x) from the per-seed rows, emitted
/// as one chart per metric panel. Returns the written paths.
pub fn plot_study(
    results: &[RunResult],
    study: Study,
    out_dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut xs: Vec<String> = Vec::new();
    if study == Study::BinSweep {
        let mut bins: BTreeSet<usize> = results.iter().map(|r| r.bins).collect();
        xs.extend(std::mem::take(&mut bins).into_iter().map(|b| b.to_string()));
    } else {
        let mut seen = BTreeSet::new();
        for r in results {
            seen.insert(x_category(study, r));
        }
        xs.extend(seen);
    }
    let mut series: Vec<String> = {
        let mut seen = BTreeSet::new();
        for r in results {
            seen.insert(series_of(study, r));
        }
        seen.into_iter().collect()
    };
    series.sort();

    let mut written = Vec::new();
    for panel in &PANELS {
        let svg = render_panel(results, study, panel, &xs, &series);
        let path = out_dir.join(format!("plot_{}.svg", panel.key));
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn render_panel(
    results: &[RunResult],
    study: Study,
    panel: &Panel,
    xs: &[String],
    series: &[String],
) -> String {
    let (width, height) = (520.0, 340.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 36.0, 46.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;

    // aggregate (series, x) -> (median, min, max)
    let mut stats: Vec<Vec<Option<(f64, f64, f64)>>> = vec![vec![None; xs.len()]; series.len()];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (si, s) in series.iter().enumerate() {
        for (xi, x) in xs.iter().enumerate() {
            let vals: Vec<f64> = results
                .iter()
                .filter(|r| &series_of(study, r) == s && &x_category(study, r) == x)
                .map(|r| (panel.value)(r))
                .collect();
            if vals.is_empty() {
                continue;
            }
            let m = median(&vals);
            let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            stats[si][xi] = Some((m, mn, mx));
            lo = lo.min(mn);
            hi = hi.max(mx);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.06 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let x_pos = |xi: usize| -> f64 {
        if xs.len() == 1 {
            ml + plot_w / 2.0
        } else {
            ml + plot_w * xi as f64 / (xs.len() - 1) as f64
        }
    };
    let y_pos = |v: f64| -> f64 { mt + plot_h * (1.0 - (v - lo) / (hi - lo)) };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"11\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"20\" font-size=\"13\">{}</text>\n",
        ml, panel.title
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n",
        mt + plot_h,
        ml + plot_w,
        mt + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml:.1}\" y1=\"{mt:.1}\" x2=\"{ml:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n",
        mt + plot_h
    ));
    for (xi, x) in xs.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x}</text>\n",
            x_pos(xi),
            mt + plot_h + 18.0
        ));
    }
    for tick in 0..=4 {
        let v = lo + (hi - lo) * tick as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ml - 6.0,
            y_pos(v) + 4.0,
            fmt_value(v)
        ));
    }

    for (si, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[si % SERIES_COLORS.len()];
        // min/max band
        let mut band_fwd = Vec::new();
        let mut band_rev = Vec::new();
        let mut line = Vec::new();
        for (xi, stat) in stats[si].iter().enumerate() {
            if let Some((m, mn, mx)) = stat {
                band_fwd.push(format!("{:.2},{:.2}", x_pos(xi), y_pos(*mx)));
                band_rev.push(format!("{:.2},{:.2}", x_pos(xi), y_pos(*mn)));
                line.push(format!("{:.2},{:.2}", x_pos(xi), y_pos(*m)));
            }
        }
        band_rev.reverse();
        if band_fwd.len() > 1 {
            svg.push_str(&format!(
                "<polygon points=\"{} {}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                band_fwd.join(" "),
                band_rev.join(" ")
            ));
        }
        if line.len() > 1 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                line.join(" ")
            ));
        }
        for (xi, stat) in stats[si].iter().enumerate() {
            if let Some((m, mn, mx)) = stat {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\" \
                     data-metric=\"{}\" data-series=\"{s}\" data-x=\"{}\" data-median=\"{m}\" \
                     data-min=\"{mn}\" data-max=\"{mx}\"/>\n",
                    x_pos(xi),
                    y_pos(*m),
                    panel.key,
                    xs[xi]
                ));
            }
        }
        // legend
        let ly = mt + 14.0 * si as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            ml + plot_w - 110.0,
            ly
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{s}</text>\n",
            ml + plot_w - 96.0,
            ly + 9.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Gallery of archive shapes on a near-square grid, shaded by pixel distance
/// to the ground-truth Pareto set: the brightest green marks a solution that
/// matches a ground-truth shape exactly.
pub fn gallery_svg(genomes: &[Genome], case: BoundsCase) -> String {
    let bounds = case.bounds();
    let bitmaps: Vec<Bitmap> = genomes
        .iter()
        .map(|g| rasterize(&express(g, &bounds).expect("archive genomes are in bounds")))
        .collect();
    let truth: Vec<Bitmap> = pareto::ground_truth(&bounds)
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    let errors = pareto::pareto_distances(&bitmaps, &truth);
    let max_err = errors.iter().cloned().fold(1.0f64, f64::max);

    let side = (genomes.len() as f64).sqrt().ceil() as usize;
    let cell = 26.0;
    let size = side as f64 * cell;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#101010\"/>\n");
    for (i, genome) in genomes.iter().enumerate() {
        let polygon = express(genome, &bounds).expect("archive genomes are in bounds");
        let (col, row) = (i % side, i / side);
        let cx = col as f64 * cell + cell / 2.0;
        let cy = row as f64 * cell + cell / 2.0;
        let scale = cell * 0.46;
        let mut path = String::new();
        for (k, (x, y)) in polygon.vertices().iter().enumerate() {
            let px = cx + x * scale;
            let py = cy - y * scale; // svg y grows downward
            path.push_str(&format!("{}{px:.2} {py:.2} ", if k == 0 { "M" } else { "L" }));
        }
        path.push('Z');
        let t = 1.0 - (errors[i] / max_err).clamp(0.0, 1.0);
        let g = (40.0 + 215.0 * t).round() as u8;
        let b = (16.0 + 86.0 * t).round() as u8;
        svg.push_str(&format!(
            "<path d=\"{path}\" fill=\"rgb(0,{g},{b})\" fill-rule=\"evenodd\" \
             data-index=\"{i}\" data-pixel-error=\"{}\"/>\n",
            errors[i]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
