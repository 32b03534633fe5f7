//! Plot-data extraction: per-panel CSV projections of a tick log plus
//! static SVG line charts with unsafe-region shading.
//!
//! The SVG output is deliberately minimal: fixed-size polyline charts with
//! linear axes, no interactivity, no external assets.

use crate::config::ConfigFile;
use crate::csvlog::{LogReadError, ParsedLog};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(thiserror::Error, Debug)]
pub enum PlotError {
    #[error("cannot read log: {0}")]
    Log(#[from] LogReadError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const SHADE: &str = "#f8d0d0";

struct Series {
    label: String,
    color: String,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

/// Horizontal band `[y0, y1]` to shade as unsafe.
struct Band {
    y0: f64,
    y1: f64,
}

struct Panel {
    title: String,
    y_label: String,
    series: Vec<Series>,
    bands: Vec<Band>,
}

fn write_file(path: &Path, text: &str) -> Result<(), PlotError> {
    std::fs::write(path, text)
        .map_err(|source| PlotError::Io { path: path.to_path_buf(), source })
}

/// Emits the four panel CSVs and SVG charts into `out_dir`; returns the
/// paths written. `config` supplies the frustum for unsafe-band shading
/// when available.
pub fn write_plot_data(
    parsed: &ParsedLog,
    config: Option<&ConfigFile>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PlotError> {
    let n = parsed.follower_count();
    let t = parsed.column("t")?;
    let mut written = Vec::new();

    // panel 1: measured versus desired state, per follower
    let mut state_cols: Vec<(String, Vec<f64>)> = vec![("t".into(), t.clone())];
    for i in 1..=n {
        for name in ["L", "Ld", "phi", "phid", "xi", "xid", "alpha", "alphad"] {
            let full = format!("f{i}.{name}");
            state_cols.push((full.clone(), parsed.column(&full)?));
        }
    }
    let path = out_dir.join("panel_states.csv");
    write_file(&path, &render_csv(&state_cols))?;
    written.push(path);

    // panel 2: minimum barrier value, per follower
    let mut minh_cols: Vec<(String, Vec<f64>)> = vec![("t".into(), t.clone())];
    for i in 1..=n {
        let full = format!("f{i}.minh");
        minh_cols.push((full.clone(), parsed.column(&full)?));
    }
    let path = out_dir.join("panel_min_barrier.csv");
    write_file(&path, &render_csv(&minh_cols))?;
    written.push(path);

    // panel 3: leader speed
    let leader_cols: Vec<(String, Vec<f64>)> =
        vec![("t".into(), t.clone()), ("leader.unorm".into(), parsed.column("leader.unorm")?)];
    let path = out_dir.join("panel_leader_speed.csv");
    write_file(&path, &render_csv(&leader_cols))?;
    written.push(path);

    // panel 4: nominal versus filtered command magnitude and interventions
    let mut cmd_cols: Vec<(String, Vec<f64>)> = vec![("t".into(), t.clone())];
    for i in 1..=n {
        let norm_of = |stem: &str| -> Result<Vec<f64>, LogReadError> {
            let c: [Vec<f64>; 4] = [
                parsed.column(&format!("f{i}.{stem}0"))?,
                parsed.column(&format!("f{i}.{stem}1"))?,
                parsed.column(&format!("f{i}.{stem}2"))?,
                parsed.column(&format!("f{i}.{stem}3"))?,
            ];
            Ok((0..t.len())
                .map(|k| (c[0][k].powi(2) + c[1][k].powi(2) + c[2][k].powi(2) + c[3][k].powi(2)).sqrt())
                .collect())
        };
        cmd_cols.push((format!("f{i}.unom_norm"), norm_of("unom")?));
        cmd_cols.push((format!("f{i}.usafe_norm"), norm_of("usafe")?));
        cmd_cols.push((format!("f{i}.interv"), parsed.column(&format!("f{i}.interv"))?));
    }
    let path = out_dir.join("panel_commands.csv");
    write_file(&path, &render_csv(&cmd_cols))?;
    written.push(path);

    // SVG charts
    let frustum = config.map(|c| &c.frustum);
    let half = |fov: f64| fov / 2.0;

    let mut state_panels = Vec::new();
    for (idx, (name, desired, label)) in [
        ("L", "Ld", "range [m]"),
        ("phi", "phid", "azimuth [rad]"),
        ("xi", "xid", "elevation [rad]"),
        ("alpha", "alphad", "heading [rad]"),
    ]
    .iter()
    .enumerate()
    {
        let mut series = Vec::new();
        for i in 1..=n {
            let color = PALETTE[(i - 1) % PALETTE.len()].to_string();
            series.push(Series {
                label: format!("f{i}.{name}"),
                color: color.clone(),
                dashed: false,
                points: zip(&t, &parsed.column(&format!("f{i}.{name}"))?),
            });
            series.push(Series {
                label: format!("f{i}.{desired}"),
                color,
                dashed: true,
                points: zip(&t, &parsed.column(&format!("f{i}.{desired}"))?),
            });
        }
        let mut bands = Vec::new();
        if let Some(f) = frustum {
            // angle bands outside the field of view are unsafe by
            // construction; range and heading have no pure-angle bound
            if *name == "phi" {
                bands.push(Band { y0: half(f.hfov), y1: f64::INFINITY });
                bands.push(Band { y0: f64::NEG_INFINITY, y1: -half(f.hfov) });
            } else if *name == "xi" {
                bands.push(Band { y0: half(f.vfov), y1: f64::INFINITY });
                bands.push(Band { y0: f64::NEG_INFINITY, y1: -half(f.vfov) });
            }
        }
        state_panels.push(Panel {
            title: if idx == 0 { "relative state versus reference".into() } else { String::new() },
            y_label: label.to_string(),
            series,
            bands,
        });
    }
    let path = out_dir.join("states.svg");
    write_file(&path, &render_chart(&state_panels))?;
    written.push(path);

    let mut minh_series = Vec::new();
    for i in 1..=n {
        minh_series.push(Series {
            label: format!("f{i}.minh"),
            color: PALETTE[(i - 1) % PALETTE.len()].to_string(),
            dashed: false,
            points: zip(&t, &parsed.column(&format!("f{i}.minh"))?),
        });
    }
    let path = out_dir.join("min_barrier.svg");
    write_file(
        &path,
        &render_chart(&[Panel {
            title: "minimum barrier value".into(),
            y_label: "min h [m]".into(),
            series: minh_series,
            bands: vec![Band { y0: f64::NEG_INFINITY, y1: 0.0 }],
        }]),
    )?;
    written.push(path);

    let path = out_dir.join("leader_speed.svg");
    write_file(
        &path,
        &render_chart(&[Panel {
            title: "leader command magnitude".into(),
            y_label: "|u| [m/s]".into(),
            series: vec![Series {
                label: "leader.unorm".into(),
                color: PALETTE[0].to_string(),
                dashed: false,
                points: zip(&t, &parsed.column("leader.unorm")?),
            }],
            bands: vec![],
        }]),
    )?;
    written.push(path);

    let mut cmd_series = Vec::new();
    for i in 1..=n {
        let color = PALETTE[(i - 1) % PALETTE.len()].to_string();
        let unom = &cmd_cols[1 + (i - 1) * 3].1;
        let usafe = &cmd_cols[2 + (i - 1) * 3].1;
        cmd_series.push(Series {
            label: format!("f{i} nominal"),
            color: color.clone(),
            dashed: true,
            points: zip(&t, unom),
        });
        cmd_series.push(Series {
            label: format!("f{i} filtered"),
            color,
            dashed: false,
            points: zip(&t, usafe),
        });
    }
    let path = out_dir.join("commands.svg");
    write_file(
        &path,
        &render_chart(&[Panel {
            title: "follower command magnitude".into(),
            y_label: "|u| [m/s]".into(),
            series: cmd_series,
            bands: vec![],
        }]),
    )?;
    written.push(path);

    Ok(written)
}

fn zip(t: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    t.iter().copied().zip(y.iter().copied()).collect()
}

fn render_csv(cols: &[(String, Vec<f64>)]) -> String {
    let mut out = cols.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    let rows = cols.first().map_or(0, |(_, v)| v.len());
    for k in 0..rows {
        for (c, (_, v)) in cols.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", v[k]).expect("write to string");
        }
        out.push('\n');
    }
    out
}

const PANEL_W: f64 = 880.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

fn render_chart(panels: &[Panel]) -> String {
    let total_h = PANEL_H * panels.len() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_W}\" height=\"{total_h}\" \
         viewBox=\"0 0 {PANEL_W} {total_h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (p, panel) in panels.iter().enumerate() {
        let top = PANEL_H * p as f64;
        render_panel(&mut svg, panel, top);
    }
    svg.push_str("</svg>\n");
    svg
}

fn finite_bounds(panel: &Panel) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &panel.series {
        for &(px, py) in &s.points {
            if px.is_finite() {
                x = (x.0.min(px), x.1.max(px));
            }
            if py.is_finite() {
                y = (y.0.min(py), y.1.max(py));
            }
        }
    }
    if !x.0.is_finite() || x.0 == x.1 {
        x = (0.0, 1.0);
    }
    if !y.0.is_finite() {
        y = (0.0, 1.0);
    }
    if y.0 == y.1 {
        y = (y.0 - 0.5, y.1 + 0.5);
    }
    // headroom so lines do not sit on the frame
    let pad = 0.06 * (y.1 - y.0);
    ((x.0, x.1), (y.0 - pad, y.1 + pad))
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw_step = span / target as f64;
    let mag = 10f64.powf(raw_step.abs().log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64 + 0.5)
        .unwrap_or(mag * 10.0);
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = first;
    while v <= hi + 1e-9 * step {
        ticks.push(v);
        v += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.1e}")
    }
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64) {
    let ((x0, x1), (y0, y1)) = finite_bounds(panel);
    let plot_l = MARGIN_L;
    let plot_r = PANEL_W - MARGIN_R;
    let plot_t = top + MARGIN_T;
    let plot_b = top + PANEL_H - MARGIN_B;
    let sx = |v: f64| plot_l + (v - x0) / (x1 - x0) * (plot_r - plot_l);
    let sy = |v: f64| plot_b - (v - y0) / (y1 - y0) * (plot_b - plot_t);

    // unsafe bands first so data draws over them
    for band in &panel.bands {
        let b0 = band.y0.max(y0);
        let b1 = band.y1.min(y1);
        if b1 <= b0 {
            continue;
        }
        let (py1, py0) = (sy(b0), sy(b1));
        write!(
            svg,
            "<rect x=\"{plot_l:.1}\" y=\"{py0:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
             fill=\"{SHADE}\"/>\n",
            plot_r - plot_l,
            py1 - py0
        )
        .expect("write to string");
    }

    // frame and ticks
    write!(
        svg,
        "<rect x=\"{plot_l:.1}\" y=\"{plot_t:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#444\"/>\n",
        plot_r - plot_l,
        plot_b - plot_t
    )
    .expect("write to string");
    for tx in nice_ticks(x0, x1, 6) {
        let px = sx(tx);
        write!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{plot_b:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#444\"/>\n\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            plot_b + 4.0,
            plot_b + 16.0,
            fmt_tick(tx)
        )
        .expect("write to string");
    }
    for ty in nice_ticks(y0, y1, 5) {
        let py = sy(ty);
        write!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{plot_l:.1}\" y2=\"{py:.1}\" stroke=\"#444\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            plot_l - 4.0,
            plot_l - 7.0,
            py + 4.0,
            fmt_tick(ty)
        )
        .expect("write to string");
    }
    if !panel.title.is_empty() {
        write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" font-weight=\"bold\">{}</text>\n",
            plot_l,
            top + 18.0,
            panel.title
        )
        .expect("write to string");
    }
    // y label, rotated
    write!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" \
         text-anchor=\"middle\">{}</text>\n",
        (plot_t + plot_b) / 2.0,
        (plot_t + plot_b) / 2.0,
        panel.y_label
    )
    .expect("write to string");
    write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">t [s]</text>\n",
        (plot_l + plot_r) / 2.0,
        plot_b + 32.0
    )
    .expect("write to string");

    // series: split polylines at non-finite samples
    for s in &panel.series {
        let dash = if s.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, svg: &mut String| {
            if run.len() >= 2 {
                write!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" \
                     stroke-width=\"1.5\"{dash}/>\n",
                    run.join(" "),
                    s.color
                )
                .expect("write to string");
            }
            run.clear();
        };
        for &(px, py) in &s.points {
            if px.is_finite() && py.is_finite() {
                run.push(format!("{:.1},{:.1}", sx(px), sy(py)));
            } else {
                flush(&mut run, svg);
            }
        }
        flush(&mut run, svg);
    }

    // legend in the right margin
    for (i, s) in panel.series.iter().enumerate() {
        let ly = plot_t + 14.0 * i as f64 + 8.0;
        if ly > plot_b {
            break;
        }
        let dash = if s.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        write!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\" \
             stroke-width=\"1.5\"{dash}/>\n<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            plot_r + 10.0,
            plot_r + 34.0,
            s.color,
            plot_r + 40.0,
            ly + 4.0,
            s.label
        )
        .expect("write to string");
    }
}
