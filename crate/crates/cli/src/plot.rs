//! Static SVG plots of a trace: control signals on top, ROCOF or frequency
//! below, relay thresholds as dashed lines.

use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use lfc_scc::scenario::{read_trace, TraceRow};
use plotters::coord::Shift;
use plotters::prelude::*;

const SIZE: (u32, u32) = (1000, 720);

#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub rocof: f64,
    pub f_over: f64,
    pub f_under: f64,
}

struct Curve<'a> {
    label: &'a str,
    color: RGBColor,
    values: Vec<f64>,
}

/// Writes `rocof.svg` and `frequency.svg` into `dir` and returns their paths.
pub fn plot_trace(trace: &Path, dir: &Path, limits: &Thresholds) -> anyhow::Result<Vec<PathBuf>> {
    let rows = read_trace(trace).with_context(|| format!("reading {}", trace.display()))?;
    if rows.len() < 2 {
        bail!("{} has fewer than two records", trace.display());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let rocof = Curve {
        label: "ROCOF (pu/s)",
        color: BLUE,
        values: rows.iter().map(|r| r.omega_dot_hat).collect(),
    };
    let freq = Curve {
        label: "frequency (pu)",
        color: BLUE,
        values: rows.iter().map(|r| 1.0 + r.d_omega_hat).collect(),
    };

    let rocof_path = dir.join("rocof.svg");
    render(&rocof_path, &rows, rocof, &[-limits.rocof, limits.rocof])?;
    let freq_path = dir.join("frequency.svg");
    render(&freq_path, &rows, freq, &[limits.f_under, limits.f_over])?;
    Ok(vec![rocof_path, freq_path])
}

fn render(
    path: &Path,
    rows: &[TraceRow],
    lower: Curve<'_>,
    thresholds: &[f64],
) -> anyhow::Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE)?;
    let (top, bottom) = root.split_vertically(SIZE.1 / 2);
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();

    let control = [
        Curve {
            label: "legitimate",
            color: BLACK,
            values: rows.iter().map(|r| r.dp_c_legit).collect(),
        },
        Curve {
            label: "attacked",
            color: RED,
            values: rows.iter().map(|r| r.dp_c_attacked).collect(),
        },
        Curve {
            label: "filtered",
            color: BLUE,
            values: rows.iter().map(|r| r.dp_c_star).collect(),
        },
    ];
    panel(&top, "control signal (pu)", &t, &control, &[])?;
    panel(
        &bottom,
        lower.label,
        &t,
        std::slice::from_ref(&lower),
        thresholds,
    )?;
    root.present()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn value_range<'a>(values: impl Iterator<Item = &'a f64>) -> Range<f64> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return -1.0..1.0;
    }
    let pad = ((hi - lo) * 0.05).max(1e-6);
    (lo - pad)..(hi + pad)
}

fn panel(
    area: &DrawingArea<SVGBackend<'_>, Shift>,
    y_label: &str,
    t: &[f64],
    curves: &[Curve<'_>],
    thresholds: &[f64],
) -> anyhow::Result<()> {
    let x_range = t[0]..t[t.len() - 1];
    let y_range = value_range(
        curves
            .iter()
            .flat_map(|c| c.values.iter())
            .chain(thresholds.iter()),
    );

    let mut chart = ChartBuilder::on(area)
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(70)
        .build_cartesian_2d(x_range.clone(), y_range)?;
    chart
        .configure_mesh()
        .x_desc("time (s)")
        .y_desc(y_label)
        .draw()?;

    for c in curves {
        let color = c.color;
        chart
            .draw_series(LineSeries::new(
                t.iter().copied().zip(c.values.iter().copied()),
                color,
            ))?
            .label(c.label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    for &level in thresholds {
        chart.draw_series(DashedLineSeries::new(
            [(x_range.start, level), (x_range.end, level)],
            8,
            6,
            RED.stroke_width(1),
        ))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    Ok(())
}
