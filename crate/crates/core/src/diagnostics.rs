//! Convergence traces, error metrics and report emission.
//!
//! Traces are written as CSV with the fixed header
//! `iter,objective,rel_error,norm,alpha,beta,flags`. Floats use the shortest
//! decimal that parses back to the same `f64`, so a written trace reads back
//! bit-for-bit. Plots are standalone SVG 1.1 documents whose bytes depend
//! only on the traces plotted.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, Vector};

pub const CSV_HEADER: &str = "iter,objective,rel_error,norm,alpha,beta,flags";

/// `||x - x*|| / ||x*||`
pub fn relative_error(x: &Vector, x_star: &Vector) -> Result<f64> {
    let denom = norm2(x_star);
    if denom == 0.0 {
        return Err(Error::ZeroVector("ground truth"));
    }
    Ok(norm2(&(x - x_star)) / denom)
}

/// `20 log10(||clean|| / ||noisy - clean||)` in dB.
pub fn measured_snr(clean: &Vector, noisy: &Vector) -> Result<f64> {
    let noise = norm2(&(noisy - clean));
    if noise == 0.0 {
        return Err(Error::ZeroVector("noise"));
    }
    Ok(20.0 * (norm2(clean) / noise).log10())
}

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
    pub struct Flags: u8 {
        /// Objective or iterate became non-finite or ran away.
        const DIVERGED = 1;
        /// Momentum denominator vanished; beta fell back to 0.
        const ZERO_DENOMINATOR = 1 << 1;
        /// Exact line search met a direction without positive curvature.
        const DEGENERATE_DIRECTION = 1 << 2;
        /// Stopping tolerance reached.
        const CONVERGED = 1 << 3;
        /// A DCA subproblem hit its inner iteration cap.
        const INNER_BUDGET = 1 << 4;
    }
}

const FLAG_NAMES: [(Flags, &str); 5] = [
    (Flags::DIVERGED, "diverged"),
    (Flags::ZERO_DENOMINATOR, "zero_denominator"),
    (Flags::DEGENERATE_DIRECTION, "degenerate_direction"),
    (Flags::CONVERGED, "converged"),
    (Flags::INNER_BUDGET, "inner_budget"),
];

impl Flags {
    fn to_field(self) -> String {
        FLAG_NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, name)| *name)
            .collect::<Vec<_>>()
            .join("|")
    }

    fn from_field(field: &str) -> std::result::Result<Self, String> {
        let mut flags = Flags::empty();
        for part in field.split('|').filter(|p| !p.is_empty()) {
            let (flag, _) = FLAG_NAMES
                .iter()
                .find(|(_, name)| *name == part)
                .ok_or_else(|| format!("unknown flag `{part}`"))?;
            flags |= *flag;
        }
        Ok(flags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub rel_error: Option<f64>,
    /// Gradient norm for smooth runs, iterate-change norm for composite runs.
    pub norm: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub recipe_hash: Option<String>,
    pub spec: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub label: String,
    pub rows: Vec<TraceRow>,
    pub meta: TraceMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Objective,
    RelError,
    Norm,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::Objective, Column::RelError, Column::Norm];

    pub fn name(self) -> &'static str {
        match self {
            Column::Objective => "objective",
            Column::RelError => "rel_error",
            Column::Norm => "norm",
        }
    }

    pub fn get(self, row: &TraceRow) -> Option<f64> {
        match self {
            Column::Objective => Some(row.objective),
            Column::RelError => row.rel_error,
            Column::Norm => Some(row.norm),
        }
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Column::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown column `{s}`")))
    }
}

impl Trace {
    pub fn new(label: impl Into<String>) -> Self {
        Trace {
            label: label.into(),
            rows: Vec::new(),
            meta: TraceMeta::default(),
        }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn diverged(&self) -> bool {
        self.rows.iter().any(|r| r.flags.contains(Flags::DIVERGED))
    }

    pub fn has_column(&self, column: Column) -> bool {
        self.rows.iter().any(|r| column.get(r).is_some())
    }

    /// First recorded iteration whose relative error is at or below `tol`.
    pub fn first_iter_rel_error_below(&self, tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.rel_error.is_some_and(|e| e <= tol))
            .map(|r| r.iter)
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.objective)
    }
}

/// Collects rows on the `record_every` grid. Forced rows (the state a run
/// stops in) are kept off-grid as long as the row budget
/// `max_iters / record_every + 1` allows.
pub(crate) struct Recorder {
    trace: Trace,
    every: usize,
    max_rows: usize,
}

impl Recorder {
    pub(crate) fn new(label: String, every: usize, max_iters: usize) -> Self {
        Recorder {
            trace: Trace::new(label),
            every,
            max_rows: max_iters / every + 1,
        }
    }

    pub(crate) fn meta_mut(&mut self) -> &mut TraceMeta {
        &mut self.trace.meta
    }

    pub(crate) fn push(&mut self, row: TraceRow, force: bool) {
        match self.trace.rows.last_mut() {
            Some(last) if last.iter == row.iter => last.flags |= row.flags,
            _ => {
                if row.iter % self.every == 0 || (force && self.trace.rows.len() < self.max_rows) {
                    self.trace.rows.push(row);
                }
            }
        }
    }

    pub(crate) fn finish(mut self, started: std::time::Instant) -> Trace {
        self.trace.meta.wall_seconds = started.elapsed().as_secs_f64();
        self.trace
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt_field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            format_float(r.objective),
            opt_field(r.rel_error),
            format_float(r.norm),
            opt_field(r.alpha),
            opt_field(r.beta),
            r.flags.to_field()
        );
    }
    out
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    write_atomic(path, trace_to_csv(trace).as_bytes())
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_trace_csv(label: &str, text: &str, path: &Path) -> Result<Trace> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(parse_err(path, 1, format!("unexpected header `{h}`"))),
        None => return Err(parse_err(path, 1, "missing header")),
    }
    let mut trace = Trace::new(label);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(path, lineno, format!("expected 7 fields, got {}", fields.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| parse_err(path, lineno, format!("bad number `{s}`: {e}")))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        trace.rows.push(TraceRow {
            iter: fields[0]
                .parse()
                .map_err(|e| parse_err(path, lineno, format!("bad iteration: {e}")))?,
            objective: num(fields[1])?,
            rel_error: opt(fields[2])?,
            norm: num(fields[3])?,
            alpha: opt(fields[4])?,
            beta: opt(fields[5])?,
            flags: Flags::from_field(fields[6]).map_err(|m| parse_err(path, lineno, m))?,
        });
    }
    Ok(trace)
}

/// Reads a trace CSV; the trace label is the file stem.
pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_trace_csv(&label, &text, path)
}

/// Smallest value drawn on a logarithmic axis.
pub const LOG_FLOOR: f64 = 1e-16;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64, log_y: bool) -> String {
    if log_y {
        format!("1e{v:.1}")
    } else {
        format!("{v:.4e}")
    }
}

/// Line chart of one column over iterations, one polyline per trace.
pub fn svg_plot(traces: &[Trace], column: Column, log_y: bool) -> Result<String> {
    if !traces.iter().any(|t| t.has_column(column)) {
        let available = Column::ALL
            .into_iter()
            .filter(|c| traces.iter().any(|t| t.has_column(*c)))
            .map(|c| c.name().to_string())
            .collect();
        return Err(Error::EmptyColumn {
            column: column.name().to_string(),
            available,
        });
    }

    let mut clamped = false;
    let series: Vec<Vec<(f64, f64)>> = traces
        .iter()
        .map(|t| {
            t.rows
                .iter()
                .filter_map(|r| {
                    let v = column.get(r)?;
                    if v.is_nan() || v.is_infinite() {
                        return None;
                    }
                    let y = if log_y {
                        if v <= LOG_FLOOR {
                            clamped = true;
                        }
                        v.max(LOG_FLOOR).log10()
                    } else {
                        v
                    };
                    Some((r.iter as f64, y))
                })
                .collect()
        })
        .collect();

    let points = series.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi <= y_lo {
        let pad = if y_lo == 0.0 { 0.5 } else { 0.5 * y_lo.abs() };
        y_lo -= pad;
        y_hi += pad;
    }

    const W: f64 = 760.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 90.0;
    const RIGHT: f64 = 170.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph;

    let mut title = column.name().to_string();
    if log_y {
        title.push_str(" (log10 scale)");
    }
    if clamped {
        let _ = write!(title, " [values <= {LOG_FLOOR:e} clamped]");
    }

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", xml_escape(&title));
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        xml_escape(&title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let px = sx(xv);
        let py = sy(yv);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            xv.round()
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            tick_label(yv, log_y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">iteration</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );

    for (i, (trace, pts)) in traces.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut coords = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j > 0 {
                coords.push(' ');
            }
            let _ = write!(coords, "{:.2},{:.2}", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>"#
        );
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            xml_escape(&trace.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_svg_plot(traces: &[Trace], column: Column, path: &Path, log_y: bool) -> Result<()> {
    let svg = svg_plot(traces, column, log_y)?;
    write_atomic(path, svg.as_bytes())
}

/// One checked iteration of the fixed-step FR convergence bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub l: usize,
    /// `||r_l||`
    pub lhs: f64,
    /// `l alpha (1 + l rho / 2) ||A|| kappa(Z_{l+1})`
    pub k_bound: f64,
    /// The same constant without the step-size factor.
    pub k_bound_without_alpha: f64,
    pub rhs: f64,
    pub holds: bool,
    pub z_rank: usize,
    pub rho: f64,
    pub kappa_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub kappa_a: f64,
    pub spectral_norm_a: f64,
    pub alpha: f64,
    /// Residual-ratio bound over all checked rows.
    pub rho: f64,
    /// First `l` where `Z_{l+1}` lost full column rank, if any.
    pub truncated_at: Option<usize>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,lhs,k_bound,k_bound_without_alpha,rhs,holds,z_rank,rho,kappa_z\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.l,
                format_float(r.lhs),
                format_float(r.k_bound),
                format_float(r.k_bound_without_alpha),
                format_float(r.rhs),
                r.holds,
                r.z_rank,
                format_float(r.rho),
                format_float(r.kappa_z)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn row(iter: usize, objective: f64) -> TraceRow {
        TraceRow {
            iter,
            objective,
            rel_error: None,
            norm: 1.0,
            alpha: None,
            beta: None,
            flags: Flags::empty(),
        }
    }

    #[test]
    fn relative_error_cases() {
        let xs = v(&[1.0, -2.0, 2.0]);
        assert_eq!(relative_error(&xs, &xs).unwrap(), 0.0);
        assert_eq!(relative_error(&Vector::zeros(3), &xs).unwrap(), 1.0);
        assert_eq!(relative_error(&(&xs * 2.0), &xs).unwrap(), 1.0);
        assert!(relative_error(&xs, &Vector::zeros(3)).is_err());
    }

    #[test]
    fn snr_cases() {
        let clean = v(&[1.0, 0.0]);
        assert!((measured_snr(&clean, &v(&[1.0, 0.1])).unwrap() - 20.0).abs() < 1e-12);
        assert!(measured_snr(&clean, &v(&[1.0, 1.0])).unwrap().abs() < 1e-12);
        assert!(measured_snr(&clean, &clean).is_err());
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(trace_to_csv(&Trace::new("x")), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn single_row_layout() {
        let mut t = Trace::new("x");
        t.rows.push(TraceRow {
            iter: 0,
            objective: 1.5,
            rel_error: None,
            norm: 2.0,
            alpha: Some(0.3),
            beta: None,
            flags: Flags::empty(),
        });
        assert_eq!(trace_to_csv(&t).lines().nth(1), Some("0,1.5,,2,0.3,,"));
    }

    #[test]
    fn flags_field_round_trip() {
        let f = Flags::DIVERGED | Flags::ZERO_DENOMINATOR;
        assert_eq!(f.to_field(), "diverged|zero_denominator");
        assert_eq!(Flags::from_field(&f.to_field()).unwrap(), f);
        assert!(Flags::from_field("bogus").is_err());
    }

    #[test]
    fn float_formatting_round_trips_extremes() {
        for &x in &[0.0, -0.0, 1e-300, 5e-324, 1.7976931348623157e308, 0.1, 1.0 / 3.0, 12345.678] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(1e-20), "1e-20");
    }

    #[test]
    fn rejects_bad_header() {
        let err = parse_trace_csv("x", "iter,objective\n", Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn constant_trace_is_horizontal() {
        let mut t = Trace::new("flat");
        t.rows = (0..5).map(|i| row(i, 3.0)).collect();
        let svg = svg_plot(&[t], Column::Objective, false).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn two_traces_two_polylines() {
        let mut a = Trace::new("a");
        a.rows = (0..3).map(|i| row(i, 1.0 / (i + 1) as f64)).collect();
        let mut b = a.clone();
        b.label = "b".into();
        let svg = svg_plot(&[a, b], Column::Objective, true).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">a</text>") && svg.contains(">b</text>"));
    }

    #[test]
    fn log_plot_clamps_zero() {
        let mut t = Trace::new("z");
        t.rows = vec![row(0, 1.0), row(1, 0.0)];
        let svg = svg_plot(&[t], Column::Objective, true).unwrap();
        assert!(svg.contains("<title>objective (log10 scale) [values &lt;= 1e-16 clamped]</title>"));
    }

    #[test]
    fn empty_column_is_refused_with_alternatives() {
        let mut t = Trace::new("z");
        t.rows = vec![row(0, 1.0)];
        match svg_plot(&[t], Column::RelError, true) {
            Err(Error::EmptyColumn { column, available }) => {
                assert_eq!(column, "rel_error");
                assert_eq!(available, vec!["objective", "norm"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
