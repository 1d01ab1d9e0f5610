//! SVG rendering of deployment tables and sweep aggregates, with the
//! plotted series mirrored into a plain CSV.

use anyhow::{bail, Context, Result};
use std::fs;
use std::path::Path;
use swarmjam::Scenario;

use crate::config::PlotArgs;

struct DeploymentRow {
    id: String,
    x: f64,
    y: f64,
    psi: f64,
}

struct CurvePoint {
    scheme: String,
    m: f64,
    value: f64,
}

/// World-to-viewport mapping with a flipped y axis.
struct Frame {
    min: [f64; 2],
    scale: f64,
    height: f64,
    pad: f64,
}

impl Frame {
    fn fit(points: &[[f64; 2]], width: f64, height: f64, pad: f64) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        for a in 0..2 {
            if !(max[a] - min[a]).is_finite() || max[a] - min[a] < 1e-9 {
                min[a] -= 1.0;
                max[a] += 1.0;
            }
        }
        let scale = ((width - 2.0 * pad) / (max[0] - min[0]))
            .min((height - 2.0 * pad) / (max[1] - min[1]));
        Self {
            min,
            scale,
            height,
            pad,
        }
    }

    fn x(&self, wx: f64) -> f64 {
        self.pad + (wx - self.min[0]) * self.scale
    }

    fn y(&self, wy: f64) -> f64 {
        self.height - self.pad - (wy - self.min[1]) * self.scale
    }
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("reading the CSV header")?
        .iter()
        .map(str::to_string)
        .collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    Ok((headers, rows))
}

fn column(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column: {name}"))
}

pub fn cmd_plot(args: &PlotArgs) -> Result<u8> {
    let (headers, rows) = read_csv(&args.input)?;
    if rows.is_empty() {
        bail!("input CSV has no data rows");
    }
    let data_path = args.out.with_file_name(format!(
        "{}_data.csv",
        args.out
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("plot")
    ));
    if headers.iter().any(|h| h == "uav_id") {
        let svg = render_deployment(args, &headers, &rows, &data_path)?;
        fs::write(&args.out, svg)?;
        Ok(0)
    } else if headers.iter().any(|h| h == "scheme") {
        let svg = render_curves(&headers, &rows, &data_path)?;
        fs::write(&args.out, svg)?;
        Ok(0)
    } else {
        bail!("missing column: uav_id (deployment table) or scheme (sweep aggregate)")
    }
}

fn render_deployment(
    args: &PlotArgs,
    headers: &[String],
    rows: &[csv::StringRecord],
    data_path: &Path,
) -> Result<String> {
    let (ci, cx, cy, cpsi) = (
        column(headers, "uav_id")?,
        column(headers, "x")?,
        column(headers, "y")?,
        column(headers, "psi_rad")?,
    );
    let mut uavs = Vec::new();
    for row in rows {
        uavs.push(DeploymentRow {
            id: row[ci].to_string(),
            x: row[cx].parse().context("parsing x")?,
            y: row[cy].parse().context("parsing y")?,
            psi: row[cpsi].parse().context("parsing psi_rad")?,
        });
    }
    let targets: Vec<[f64; 2]> = match &args.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Scenario::parse_toml(&text)?
                .target_positions()
                .iter()
                .map(|t| [t[0], t[1]])
                .collect()
        }
        None => Vec::new(),
    };

    let mut w = csv::Writer::from_path(data_path)?;
    w.write_record(["kind", "id", "x", "y", "psi_rad"])?;
    for u in &uavs {
        w.write_record([
            "uav",
            &u.id,
            &u.x.to_string(),
            &u.y.to_string(),
            &u.psi.to_string(),
        ])?;
    }
    for (k, t) in targets.iter().enumerate() {
        w.write_record([
            "target",
            &k.to_string(),
            &t[0].to_string(),
            &t[1].to_string(),
            "",
        ])?;
    }
    w.flush()?;

    let mut extent: Vec<[f64; 2]> = uavs.iter().map(|u| [u.x, u.y]).collect();
    extent.extend(targets.iter().copied());
    let span = {
        let xs: Vec<f64> = extent.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = extent.iter().map(|p| p[1]).collect();
        let dx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let dy = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - ys.iter().cloned().fold(f64::INFINITY, f64::min);
        dx.hypot(dy).max(100.0)
    };
    let wedge_len = 0.25 * span;
    let theta = args.half_beamwidth_deg.to_radians();
    for u in &uavs {
        extent.push([u.x + wedge_len * u.psi.cos(), u.y + wedge_len * u.psi.sin()]);
    }
    let (width, height) = (800.0, 600.0);
    let frame = Frame::fit(&extent, width, height, 50.0);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for u in &uavs {
        let (px, py) = (frame.x(u.x), frame.y(u.y));
        let lobe = wedge_len * frame.scale;
        let a1 = u.psi - theta;
        let a2 = u.psi + theta;
        let (x1, y1) = (px + lobe * a1.cos(), py - lobe * a1.sin());
        let (x2, y2) = (px + lobe * a2.cos(), py - lobe * a2.sin());
        svg.push_str(&format!(
            "<path class=\"lobe-wedge\" d=\"M {px:.2} {py:.2} L {x1:.2} {y1:.2} A {lobe:.2} {lobe:.2} 0 0 0 {x2:.2} {y2:.2} Z\" fill=\"#7fb3ff\" fill-opacity=\"0.35\" stroke=\"#4477cc\"/>\n"
        ));
        let (hx, hy) = (
            px + 0.6 * lobe * u.psi.cos(),
            py - 0.6 * lobe * u.psi.sin(),
        );
        svg.push_str(&format!(
            "<line class=\"heading-arrow\" x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{hx:.2}\" y2=\"{hy:.2}\" stroke=\"#224488\" stroke-width=\"2\"/>\n"
        ));
        svg.push_str(&format!(
            "<circle class=\"uav-marker\" cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"6\" fill=\"#224488\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">u{}</text>\n",
            px + 8.0,
            py - 8.0,
            u.id
        ));
    }
    for (k, t) in targets.iter().enumerate() {
        let (px, py) = (frame.x(t[0]), frame.y(t[1]));
        svg.push_str(&format!(
            "<path class=\"target-marker\" d=\"M {0:.2} {1:.2} l 6 6 m -6 0 l 6 -6 m -3 3\" stroke=\"#cc3333\" stroke-width=\"2\" transform=\"translate(-3,-3)\"/>\n",
            px, py
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#cc3333\">t{k}</text>\n",
            px + 8.0,
            py + 12.0
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

const CURVE_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn render_curves(
    headers: &[String],
    rows: &[csv::StringRecord],
    data_path: &Path,
) -> Result<String> {
    let (cs, cm, cv) = (
        column(headers, "scheme")?,
        column(headers, "m")?,
        column(headers, "mean_avg_sinr_db")?,
    );
    let mut points: Vec<CurvePoint> = Vec::new();
    for row in rows {
        if row[cv].is_empty() {
            continue;
        }
        points.push(CurvePoint {
            scheme: row[cs].to_string(),
            m: row[cm].parse().context("parsing m")?,
            value: row[cv].parse().context("parsing mean_avg_sinr_db")?,
        });
    }
    if points.is_empty() {
        bail!("no plottable rows in the aggregate CSV");
    }
    let mut schemes: Vec<String> = points.iter().map(|p| p.scheme.clone()).collect();
    schemes.sort();
    schemes.dedup();

    let mut w = csv::Writer::from_path(data_path)?;
    w.write_record(["scheme", "m", "mean_avg_sinr_db"])?;
    for p in &points {
        w.write_record([&p.scheme, &p.m.to_string(), &p.value.to_string()])?;
    }
    w.flush()?;

    let coords: Vec<[f64; 2]> = points.iter().map(|p| [p.m, p.value]).collect();
    let (width, height) = (800.0, 600.0);
    let frame = Frame::fit(&coords, width, height, 70.0);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    let (x0, y0) = (frame.x(frame.min[0]), frame.y(frame.min[1]));
    svg.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"40\" x2=\"{x0:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n",
        width - 40.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\">number of UAVs</text>\n",
        width / 2.0 - 50.0,
        height - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{:.1}\" font-size=\"13\" transform=\"rotate(-90 15 {:.1})\">average SINR (dB)</text>\n",
        height / 2.0,
        height / 2.0
    ));
    for (si, scheme) in schemes.iter().enumerate() {
        let color = CURVE_COLORS[si % CURVE_COLORS.len()];
        let mut own: Vec<&CurvePoint> = points.iter().filter(|p| &p.scheme == scheme).collect();
        own.sort_by(|a, b| a.m.partial_cmp(&b.m).unwrap());
        let path: Vec<String> = own
            .iter()
            .map(|p| format!("{:.2},{:.2}", frame.x(p.m), frame.y(p.value)))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
        for p in &own {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>\n",
                frame.x(p.m),
                frame.y(p.value)
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"#555\">{:.2}</text>\n",
                frame.x(p.m) + 6.0,
                frame.y(p.value) - 6.0,
                p.value
            ));
        }
        let ly = 50.0 + 18.0 * si as f64;
        svg.push_str(&format!(
            "<rect class=\"legend-swatch\" x=\"{:.1}\" y=\"{ly:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            width - 170.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{scheme}</text>\n",
            width - 152.0,
            ly + 10.0
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
