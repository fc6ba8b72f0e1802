//! Error-vs-time plots: CSV parsing, per-timestep aggregation across seeds,
//! and self-contained SVG line charts with seed-band shading.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One row of an evaluation series CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub episode: usize,
    pub step: usize,
    pub time_s: f64,
    pub pos_err_m: f64,
    pub ang_err_rad: f64,
}

/// Parse `episode,step,time_s,pos_err_m,ang_err_rad` with per-cell
/// diagnostics.
pub fn parse_eval_csv(path: &Path) -> Result<Vec<EvalRow>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == crate::evalrun::EVAL_CSV_HEADER => {}
        Some((_, header)) => bail!(
            "{}:1: unexpected header '{header}' (expected '{}')",
            path.display(),
            crate::evalrun::EVAL_CSV_HEADER
        ),
        None => bail!("{}: empty file", path.display()),
    }
    let columns = ["episode", "step", "time_s", "pos_err_m", "ang_err_rad"];
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            bail!(
                "{}:{}: expected {} columns, found {}",
                path.display(),
                idx + 1,
                columns.len(),
                cells.len()
            );
        }
        let field = |col: usize| -> Result<f64> {
            cells[col].parse::<f64>().map_err(|_| {
                anyhow::anyhow!(
                    "{}:{}: column {}: invalid number '{}'",
                    path.display(),
                    idx + 1,
                    columns[col],
                    cells[col]
                )
            })
        };
        rows.push(EvalRow {
            episode: field(0)? as usize,
            step: field(1)? as usize,
            time_s: field(2)?,
            pos_err_m: field(3)?,
            ang_err_rad: field(4)?,
        });
    }
    Ok(rows)
}

/// Mean and band values at each time step for one (config, scenario) cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesAggregate {
    pub time_s: Vec<f64>,
    pub pos_mean: Vec<f64>,
    pub pos_std: Vec<f64>,
    pub ang_mean: Vec<f64>,
    pub ang_std: Vec<f64>,
}

/// Aggregate one seed's CSV rows into per-step episode means.
fn per_step_means(rows: &[EvalRow]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut steps: BTreeMap<usize, (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let entry = steps
            .entry(row.step)
            .or_insert_with(|| (row.time_s, Vec::new(), Vec::new()));
        entry.1.push(row.pos_err_m);
        entry.2.push(row.ang_err_rad);
    }
    let mut time = Vec::with_capacity(steps.len());
    let mut pos = Vec::with_capacity(steps.len());
    let mut ang = Vec::with_capacity(steps.len());
    let episodes = steps.values().next().map_or(0, |(_, p, _)| p.len());
    for (step, (t, p, a)) in steps {
        if p.len() != episodes {
            bail!("step {step} has {} samples, expected {episodes}", p.len());
        }
        time.push(t);
        pos.push(p.iter().sum::<f64>() / p.len() as f64);
        ang.push(a.iter().sum::<f64>() / a.len() as f64);
    }
    Ok((time, pos, ang))
}

/// Across-seed aggregation: each seed contributes its per-step episode
/// mean; the band is the sample standard deviation over seeds (zero for a
/// single seed).
pub fn aggregate_across_seeds(per_seed_rows: &[Vec<EvalRow>]) -> Result<SeriesAggregate> {
    if per_seed_rows.is_empty() {
        return Ok(SeriesAggregate::default());
    }
    let mut seed_means = Vec::with_capacity(per_seed_rows.len());
    for rows in per_seed_rows {
        seed_means.push(per_step_means(rows)?);
    }
    let len = seed_means[0].0.len();
    for (time, _, _) in &seed_means {
        if time.len() != len {
            bail!("seed series lengths differ ({} vs {len})", time.len());
        }
    }
    let n = seed_means.len() as f64;
    let mut agg = SeriesAggregate {
        time_s: seed_means[0].0.clone(),
        ..SeriesAggregate::default()
    };
    for i in 0..len {
        let pos: Vec<f64> = seed_means.iter().map(|(_, p, _)| p[i]).collect();
        let ang: Vec<f64> = seed_means.iter().map(|(_, _, a)| a[i]).collect();
        let pos_mean = pos.iter().sum::<f64>() / n;
        let ang_mean = ang.iter().sum::<f64>() / n;
        agg.pos_mean.push(pos_mean);
        agg.ang_mean.push(ang_mean);
        agg.pos_std.push(sample_std(&pos, pos_mean));
        agg.ang_std.push(sample_std(&ang, ang_mean));
    }
    Ok(agg)
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    var.sqrt()
}

pub const SERIES_CSV_HEADER: &str =
    "config,time_s,pos_err_mean,pos_err_std,ang_err_mean,ang_err_std";

/// Render `series_<scenario>.csv` from the per-config aggregates.
pub fn series_csv(aggregates: &[(String, SeriesAggregate)]) -> String {
    let mut out = String::new();
    out.push_str(SERIES_CSV_HEADER);
    out.push('\n');
    for (config, agg) in aggregates {
        for i in 0..agg.time_s.len() {
            let _ = writeln!(
                out,
                "{config},{},{},{},{},{}",
                agg.time_s[i], agg.pos_mean[i], agg.pos_std[i], agg.ang_mean[i], agg.ang_std[i]
            );
        }
    }
    out
}

const PALETTE: [(&str, &str); 4] = [
    ("naive", "#1f77b4"),
    ("small_dr", "#ff7f0e"),
    ("large_dr", "#2ca02c"),
    ("large_dr_history", "#d62728"),
];

fn color_for(config: &str, fallback_index: usize) -> &'static str {
    for (name, color) in PALETTE {
        if name == config {
            return color;
        }
    }
    PALETTE[fallback_index % PALETTE.len()].1
}

/// Which metric of the aggregate a chart draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Positional,
    Angular,
}

impl Metric {
    pub fn file_stem(&self) -> &'static str {
        match self {
            Metric::Positional => "pos",
            Metric::Angular => "ang",
        }
    }

    fn y_label(&self) -> &'static str {
        match self {
            Metric::Positional => "positional error (m)",
            Metric::Angular => "angular error (rad)",
        }
    }

    fn pick<'a>(&self, agg: &'a SeriesAggregate) -> (&'a [f64], &'a [f64]) {
        match self {
            Metric::Positional => (&agg.pos_mean, &agg.pos_std),
            Metric::Angular => (&agg.ang_mean, &agg.ang_std),
        }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 58.0;

/// Draw one chart: a mean line per config with a +/- one-std band.
pub fn render_chart(
    title: &str,
    metric: Metric,
    aggregates: &[(String, SeriesAggregate)],
) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut x_max = 1.0f64;
    let mut y_max = 1e-9f64;
    for (_, agg) in aggregates {
        let (mean, std) = metric.pick(agg);
        for i in 0..agg.time_s.len() {
            x_max = x_max.max(agg.time_s[i]);
            y_max = y_max.max(mean[i] + std[i]);
        }
    }
    y_max *= 1.05;

    let to_x = |t: f64| MARGIN_LEFT + t / x_max * plot_w;
    let to_y = |v: f64| MARGIN_TOP + (1.0 - (v / y_max).clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"Helvetica, Arial, sans-serif\">"
    );
    let _ = writeln!(
svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
svg,
        "<text x=\"{}\" y=\"26\" font-size=\"17\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        title
    );

    // Axes and ticks.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>",
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
svg,
        "<line x1=\"{x0}\" y1=\"{}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>",
        MARGIN_TOP
    );
    for (t, v) in ticks(x_max) {
        let x = to_x(v);
        let _ = writeln!(
svg,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
svg,
            "<text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{t}</text>",
            y0 + 20.0
        );
    }
    for (t, v) in ticks(y_max) {
        let y = to_y(v);
        let _ = writeln!(
svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{x0}\" y2=\"{y}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{t}</text>",
            x0 - 9.0,
            y + 4.0
        );
        let _ = writeln!(
svg,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>",
            MARGIN_LEFT + plot_w
        );
    }
    let _ = writeln!(
svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">time (s)</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
svg,
        "<text x=\"20\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        metric.y_label()
    );

    // Bands first so lines draw on top.
    for (i, (config, agg)) in aggregates.iter().enumerate() {
        let (mean, std) = metric.pick(agg);
        if agg.time_s.is_empty() {
            continue;
        }
        let color = color_for(config, i);
        let mut points = String::new();
        for k in 0..agg.time_s.len() {
            let _ = write!(points, "{:.2},{:.2} ", to_x(agg.time_s[k]), to_y(mean[k] + std[k]));
        }
        for k in (0..agg.time_s.len()).rev() {
            let _ = write!(points, "{:.2},{:.2} ", to_x(agg.time_s[k]), to_y(mean[k] - std[k]));
        }
        let _ = writeln!(
svg,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
            points.trim_end()
        );
    }
    for (i, (config, agg)) in aggregates.iter().enumerate() {
        let (mean, _) = metric.pick(agg);
        if agg.time_s.is_empty() {
            continue;
        }
        let color = color_for(config, i);
        let mut points = String::new();
        for k in 0..agg.time_s.len() {
            let _ = write!(points, "{:.2},{:.2} ", to_x(agg.time_s[k]), to_y(mean[k]));
        }
        let _ = writeln!(
svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>",
            points.trim_end()
        );
    }

    // Legend, top right.
    for (i, (config, _)) in aggregates.iter().enumerate() {
        let color = color_for(config, i);
        let y = MARGIN_TOP + 14.0 + i as f64 * 18.0;
        let x = MARGIN_LEFT + plot_w - 170.0;
        let _ = writeln!(
svg,
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2.5\"/>",
            x + 24.0
        );
        let _ = writeln!(
svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            x + 30.0,
            y + 4.0,
            config
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Up to six round-valued axis ticks covering [0, max].
fn ticks(max: f64) -> Vec<(String, f64)> {
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| max / s <= 6.0)
        .unwrap_or(mag * 10.0);
    let mut out = Vec::new();
    let mut v = 0.0;
    while v <= max * (1.0 + 1e-9) {
        let label = if step >= 1.0 {
            format!("{v:.0}")
        } else if step >= 0.1 {
            format!("{v:.1}")
        } else {
            format!("{v:.2}")
        };
        out.push((label, v));
        v += step;
    }
    out
}

/// Discover `<runs>/<config>/<seed>/eval/<scenario>.csv` files.
pub fn discover_eval_csvs(
    runs_dir: &Path,
    scenario: &str,
) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let mut by_config: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for config_entry in ordered_dirs(runs_dir)? {
        let config = dir_name(&config_entry);
        for seed_entry in ordered_dirs(&config_entry)? {
            let csv = seed_entry.join("eval").join(format!("{scenario}.csv"));
            if csv.exists() {
                by_config.entry(config.clone()).or_default().push(csv);
            }
        }
    }
    Ok(by_config)
}

fn ordered_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn dir_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Regenerate the six charts (and series CSVs) from eval CSVs on disk.
pub fn plot_from_runs(runs_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for scenario in ["easy", "medium", "hard"] {
        let by_config = discover_eval_csvs(runs_dir, scenario)?;
        let mut aggregates = Vec::new();
        for (config, paths) in &by_config {
            let mut per_seed = Vec::new();
            for p in paths {
                per_seed.push(parse_eval_csv(p)?);
            }
            aggregates.push((config.clone(), aggregate_across_seeds(&per_seed)?));
        }
        if aggregates.is_empty() {
            continue;
        }
        std::fs::write(
            out_dir.join(format!("series_{scenario}.csv")),
            series_csv(&aggregates),
        )?;
        for metric in [Metric::Positional, Metric::Angular] {
            let title = format!(
                "{} error over time ({scenario} payload)",
                match metric {
                    Metric::Positional => "Positional",
                    Metric::Angular => "Angular",
                }
            );
            let svg = render_chart(&title, metric, &aggregates);
            let path = out_dir.join(format!("{}_{scenario}.svg", metric.file_stem()));
            std::fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}
