//! Self-contained SVG figures from CSV logs.

use std::fmt::Write as _;

use crate::dynamics::{step_obstacle, ObstacleState};
use crate::geometry::Pose2;
use crate::log::CsvRow;
use crate::safety::{min_barrier_per_obstacle, Obstacle};
use crate::scenario::ScenarioConfig;
use crate::{Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectory,
    Cbf,
    Controls,
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trajectory" => Ok(PlotKind::Trajectory),
            "cbf" => Ok(PlotKind::Cbf),
            "controls" => Ok(PlotKind::Controls),
            other => Err(format!("unknown plot kind {other:?} (trajectory, cbf, controls)")),
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data coordinates into the drawing area (y up).
struct Frame {
    lo: Vec2,
    hi: Vec2,
}

impl Frame {
    fn new(mut lo: Vec2, mut hi: Vec2, equal_aspect: bool) -> Self {
        for k in 0..2 {
            if hi[k].partial_cmp(&lo[k]) != Some(std::cmp::Ordering::Greater) {
                lo[k] -= 1.0;
                hi[k] += 1.0;
            }
        }
        if equal_aspect {
            let w = WIDTH - 2.0 * MARGIN;
            let h = HEIGHT - 2.0 * MARGIN;
            let scale = ((hi.x - lo.x) / w).max((hi.y - lo.y) / h);
            let c = 0.5 * (lo + hi);
            let half = 0.5 * Vec2::new(w * scale, h * scale);
            lo = c - half;
            hi = c + half;
        }
        Self { lo, hi }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        let fx = (p.x - self.lo.x) / (self.hi.x - self.lo.x);
        let fy = (p.y - self.lo.y) / (self.hi.y - self.lo.y);
        (
            MARGIN + fx * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - fy * (HEIGHT - 2.0 * MARGIN),
        )
    }

    fn points(&self, pts: &[Vec2]) -> String {
        pts.iter()
            .map(|p| {
                let (x, y) = self.map(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 8.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

struct Svg {
    body: String,
}

impl Svg {
    fn new() -> Self {
        Self { body: String::new() }
    }

    fn axes(&mut self, frame: &Frame, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, y0) = frame.map(frame.lo);
        let (x1, y1) = frame.map(frame.hi);
        let _ = writeln!(
            self.body,
            r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            x1 - x0,
            y0 - y1
        );
        for t in nice_ticks(frame.lo.x, frame.hi.x) {
            let (x, _) = frame.map(Vec2::new(t, frame.lo.y));
            let _ = writeln!(
                self.body,
                r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
                y0 + 5.0,
                y0 + 18.0,
                format_tick(t)
            );
        }
        for t in nice_ticks(frame.lo.y, frame.hi.y) {
            let (_, y) = frame.map(Vec2::new(frame.lo.x, t));
            let _ = writeln!(
                self.body,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                format_tick(t)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 18.0,
            escape(xlabel)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&mut self, frame: &Frame, pts: &[Vec2], color: &str, width: f64, dash: bool) {
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>"#,
            frame.points(pts)
        );
    }

    fn polygon(&mut self, frame: &Frame, pts: &[Vec2], stroke: &str, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="1"/>"#,
            frame.points(pts)
        );
    }

    fn marker(&mut self, frame: &Frame, p: Vec2, r: f64, fill: &str) {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            self.body,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}" stroke="#333"/>"##
        );
    }

    fn legend(&mut self, entries: &[(String, &str)]) {
        for (k, (label, color)) in entries.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 150.0;
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                x + 20.0,
                x + 26.0,
                y + 4.0,
                escape(label)
            );
        }
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Obstacle states aligned with the CSV rows.
fn obstacle_history(obstacles: &[Obstacle], steps: usize, dt: f64) -> Vec<Vec<ObstacleState>> {
    obstacles
        .iter()
        .map(|o| {
            let mut s = o.state;
            (0..steps)
                .map(|_| {
                    let cur = s;
                    s = step_obstacle(&s, dt);
                    cur
                })
                .collect()
        })
        .collect()
}

pub fn render(kind: PlotKind, rows: &[CsvRow], scenario: Option<&ScenarioConfig>) -> Result<String> {
    match kind {
        PlotKind::Trajectory => trajectory(rows, scenario),
        PlotKind::Cbf => cbf(rows, scenario),
        PlotKind::Controls => Ok(controls(rows, scenario)),
    }
}

fn trajectory(rows: &[CsvRow], scenario: Option<&ScenarioConfig>) -> Result<String> {
    let path: Vec<Vec2> = rows.iter().map(|r| Vec2::new(r.x, r.y)).collect();
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    let mut grow = |p: Vec2| {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    };
    path.iter().for_each(|p| grow(*p));

    let mut robot_snapshots = Vec::new();
    let mut obstacle_shapes = Vec::new();
    let mut goal = None;
    if let Some(cfg) = scenario {
        let shape = cfg.shape()?;
        let outlines = shape.outlines(48);
        let stride = (rows.len() / 8).max(1);
        for (k, r) in rows.iter().enumerate() {
            if k % stride == 0 || k + 1 == rows.len() {
                let pose = Pose2::new(r.x, r.y, r.theta);
                for o in &outlines {
                    let w: Vec<Vec2> = o.iter().map(|q| pose.body_to_world(q)).collect();
                    w.iter().for_each(|p| grow(*p));
                    robot_snapshots.push(w);
                }
            }
        }
        let obstacles = cfg.obstacles()?;
        let history = obstacle_history(&obstacles, rows.len().max(1), cfg.sim.dt);
        for (o, hist) in obstacles.iter().zip(&history) {
            let outline = o.shape.outline(48);
            let centers: Vec<Vec2> = hist.iter().map(|s| s.p).collect();
            let snaps: Vec<Vec<Vec2>> = [0, hist.len() - 1]
                .iter()
                .map(|&k| outline.iter().map(|q| q + hist[k].p).collect())
                .collect();
            for s in &snaps {
                s.iter().for_each(|p| grow(*p));
            }
            obstacle_shapes.push((centers, snaps));
        }
        let g = cfg.goal().position();
        grow(g);
        goal = Some(g);
    }
    let pad = Vec2::repeat(0.5);
    let frame = Frame::new(lo - pad, hi + pad, true);
    let mut svg = Svg::new();
    svg.axes(&frame, "Trajectory", "x (m)", "y (m)");
    for (centers, snaps) in &obstacle_shapes {
        for (k, s) in snaps.iter().enumerate() {
            svg.polygon(&frame, s, "black", "black", if k == 0 { 0.6 } else { 0.2 });
        }
        if centers.len() > 1 {
            svg.polyline(&frame, centers, "black", 1.5, false);
        }
    }
    for s in &robot_snapshots {
        svg.polygon(&frame, s, "#1f77b4", "#1f77b4", 0.15);
    }
    if path.len() > 1 {
        svg.polyline(&frame, &path, "#1f77b4", 2.0, false);
    }
    if let Some(first) = path.first() {
        svg.marker(&frame, *first, 4.0, "#1f77b4");
    }
    if let Some(g) = goal {
        svg.marker(&frame, g, 7.0, "silver");
    }
    Ok(svg.finish())
}

fn time_frame(rows: &[CsvRow], series: &[Vec<f64>], extra: &[f64]) -> Frame {
    let t0 = rows.first().map_or(0.0, |r| r.t);
    let t1 = rows.last().map_or(1.0, |r| r.t);
    let vals = series.iter().flatten().chain(extra).copied().filter(|v| v.is_finite());
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
    let pad = 0.05 * (hi - lo).max(1e-3);
    Frame::new(Vec2::new(t0, lo - pad), Vec2::new(t1, hi + pad), false)
}

fn draw_series(svg: &mut Svg, frame: &Frame, rows: &[CsvRow], values: &[f64], color: &str) {
    let pts: Vec<Vec2> = rows
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(r, v)| Vec2::new(r.t, *v))
        .collect();
    if pts.len() == 1 {
        svg.marker(frame, pts[0], 4.0, color);
    } else if pts.len() > 1 {
        svg.polyline(frame, &pts, color, 2.0, false);
    }
}

fn hline(svg: &mut Svg, frame: &Frame, y: f64) {
    let pts = [Vec2::new(frame.lo.x, y), Vec2::new(frame.hi.x, y)];
    svg.polyline(frame, &pts, "black", 1.0, true);
}

fn cbf(rows: &[CsvRow], scenario: Option<&ScenarioConfig>) -> Result<String> {
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    match scenario {
        Some(cfg) if !cfg.obstacles.is_empty() => {
            let field = cfg.field()?;
            let obstacles = cfg.obstacles()?;
            let history = obstacle_history(&obstacles, rows.len(), cfg.sim.dt);
            let mut per: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); obstacles.len()];
            let mut moved = obstacles.clone();
            for (k, r) in rows.iter().enumerate() {
                for (o, h) in moved.iter_mut().zip(&history) {
                    o.state = h[k];
                }
                let pose = Pose2::new(r.x, r.y, r.theta);
                for (i, h) in min_barrier_per_obstacle(&field, &pose, &moved).into_iter().enumerate() {
                    per[i].push(h);
                }
            }
            for (i, values) in per.into_iter().enumerate() {
                series.push((format!("obstacle {i}"), values));
            }
        }
        _ => series.push(("min h".to_string(), rows.iter().map(|r| r.min_h).collect())),
    }
    let values: Vec<Vec<f64>> = series.iter().map(|(_, v)| v.clone()).collect();
    let frame = time_frame(rows, &values, &[0.0]);
    let mut svg = Svg::new();
    svg.axes(&frame, "Control barrier functions", "t (s)", "min h (m)");
    hline(&mut svg, &frame, 0.0);
    for (k, (_, v)) in series.iter().enumerate() {
        draw_series(&mut svg, &frame, rows, v, PALETTE[k % PALETTE.len()]);
    }
    let legend: Vec<(String, &str)> = series
        .iter()
        .enumerate()
        .map(|(k, (name, _))| (name.clone(), PALETTE[k % PALETTE.len()]))
        .collect();
    svg.legend(&legend);
    Ok(svg.finish())
}

fn controls(rows: &[CsvRow], scenario: Option<&ScenarioConfig>) -> String {
    let u1: Vec<f64> = rows.iter().map(|r| r.u[0]).collect();
    let u2: Vec<f64> = rows.iter().map(|r| r.u[1]).collect();
    let bounds = scenario.and_then(|c| c.bounds().ok());
    let extra: Vec<f64> = bounds
        .map(|b| vec![b.u_min[0], b.u_min[1], b.u_max[0], b.u_max[1]])
        .unwrap_or_default();
    let frame = time_frame(rows, &[u1.clone(), u2.clone()], &extra);
    let mut svg = Svg::new();
    svg.axes(&frame, "Control inputs", "t (s)", "u");
    for b in extra {
        hline(&mut svg, &frame, b);
    }
    draw_series(&mut svg, &frame, rows, &u1, PALETTE[0]);
    draw_series(&mut svg, &frame, rows, &u2, PALETTE[1]);
    svg.legend(&[("u1".to_string(), PALETTE[0]), ("u2".to_string(), PALETTE[1])]);
    svg.finish()
}
