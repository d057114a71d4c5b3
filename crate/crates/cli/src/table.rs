//! Result tables and their on-disk forms: CSV with `#` provenance comments and
//! a static SVG line chart.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_json: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn of(config: &ExperimentConfig) -> Self {
        Self {
            config_json: config.provenance_json(),
            config_hash: config.hash(),
            seed: config.master_seed,
            version: VERSION.to_string(),
        }
    }
}

/// Which columns the chart draws. One polyline per `(group key, y column)`,
/// where the key is the tuple of `group` column values.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub x: usize,
    pub ys: Vec<usize>,
    pub group: Vec<usize>,
    pub log_x: bool,
    pub log_y: bool,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: Experiment,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub chart: ChartSpec,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of a named column, in row order.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let i = self
            .column(name)
            .unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        writeln!(out, "# experiment: {}", self.experiment).unwrap();
        writeln!(out, "# version: {}", p.version).unwrap();
        writeln!(out, "# config-sha256: {}", p.config_hash).unwrap();
        writeln!(out, "# seed: {}", p.seed).unwrap();
        writeln!(out, "# config: {}", p.config_json).unwrap();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> String {
        render_svg(self)
    }
}

/// Header and rows of a CSV written by [`ResultTable::to_csv`]; comment lines
/// are returned verbatim without the leading `# `.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv, String> {
    let mut comments = Vec::new();
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            Some(l) if l.starts_with('#') => {
                comments.push(l.trim_start_matches('#').trim_start().to_string())
            }
            Some(l) => break l,
            None => return Err("missing header row".into()),
        }
    };
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| format!("row {n}: `{c}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != columns.len() {
            return Err(format!(
                "row {n} has {} cells, expected {}",
                row.len(),
                columns.len()
            ));
        }
        rows.push(row);
    }
    Ok(ParsedCsv {
        comments,
        columns,
        rows,
    })
}

/// Writes `<experiment>.csv` and `<experiment>.svg` into `dir`. On failure
/// nothing from this call is left behind.
pub fn emit_artifacts(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let targets = [
        (
            dir.join(format!("{}.csv", table.experiment)),
            table.to_csv(),
        ),
        (
            dir.join(format!("{}.svg", table.experiment)),
            table.to_svg(),
        ),
    ];
    let mut written: Vec<PathBuf> = Vec::new();
    for (path, body) in &targets {
        let mut tmp = path.clone().into_os_string();
        tmp.push(".part");
        let tmp = PathBuf::from(tmp);
        let result = fs::write(&tmp, body).and_then(|_| fs::rename(&tmp, path));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            for done in &written {
                let _ = fs::remove_file(done);
            }
            return Err(io(path)(e));
        }
        written.push(path.clone());
    }
    Ok(written)
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 310.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .collect();
        let (mut lo, mut hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let t = if self.log { v.log10() } else { v };
        Some((t - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions (in data units) and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo as i32, self.hi as i32);
            let step = ((b - a) / 8 + 1).max(1);
            (a..=b)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    let v = if v.abs() < 1e-12 * step { 0.0 } else { v };
                    (v, format!("{v:.decimals$}"))
                })
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render_svg(table: &ResultTable) -> String {
    let spec = &table.chart;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let xs = Axis::fit(table.rows.iter().map(|r| r[spec.x]), spec.log_x);
    let ys = Axis::fit(
        table
            .rows
            .iter()
            .flat_map(|r| spec.ys.iter().map(move |&c| r[c])),
        spec.log_y,
    );
    let px = |u: f64| LEFT + u * pw;
    let py = |u: f64| TOP + (1.0 - u) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    for (v, label) in xs.ticks() {
        if let Some(u) = xs.unit(v).filter(|u| (-1e-9..=1.0 + 1e-9).contains(u)) {
            let x = px(u);
            writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 18.0,
                escape(&label)
            )
            .unwrap();
        }
    }
    for (v, label) in ys.ticks() {
        if let Some(u) = ys.unit(v).filter(|u| (-1e-9..=1.0 + 1e-9).contains(u)) {
            let y = py(u);
            writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                escape(&label)
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&table.columns[spec.x])
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    )
    .unwrap();

    // Group keys in order of first appearance.
    let key = |r: &Vec<f64>| -> Vec<u64> { spec.group.iter().map(|&g| r[g].to_bits()).collect() };
    let mut groups: Vec<Vec<u64>> = Vec::new();
    for r in &table.rows {
        let k = key(r);
        if !groups.contains(&k) {
            groups.push(k);
        }
    }
    if groups.is_empty() {
        groups.push(Vec::new());
    }

    let mut series = 0;
    for gk in &groups {
        for &yc in &spec.ys {
            let colour = PALETTE[series % PALETTE.len()];
            let dash = if (series / PALETTE.len()) % 2 == 1 {
                r#" stroke-dasharray="5,3""#
            } else {
                ""
            };
            let mut pts: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| key(r) == *gk)
                .filter_map(|r| Some((xs.unit(r[spec.x])?, ys.unit(r[yc])?)))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if !pts.is_empty() {
                let coords: Vec<String> = pts
                    .iter()
                    .map(|(u, v)| format!("{:.2},{:.2}", px(*u), py(*v)))
                    .collect();
                writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
                    coords.join(" ")
                )
                .unwrap();
            }
            let name = if spec.group.is_empty() {
                table.columns[yc].clone()
            } else {
                let parts: Vec<String> = spec
                    .group
                    .iter()
                    .zip(gk)
                    .map(|(&g, &bits)| format!("{}={}", table.columns[g], f64::from_bits(bits)))
                    .collect();
                format!("{} ({})", table.columns[yc], parts.join(", "))
            };
            let ly = TOP + 10.0 + 16.0 * series as f64;
            if ly < HEIGHT - 10.0 {
                writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                    LEFT + pw + 12.0,
                    LEFT + pw + 32.0,
                    LEFT + pw + 38.0,
                    ly + 4.0,
                    escape(&name)
                )
                .unwrap();
            }
            series += 1;
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: Vec<Vec<f64>>) -> ResultTable {
        ResultTable {
            experiment: Experiment::FimScan,
            columns: vec!["N".into(), "y".into()],
            rows,
            provenance: Provenance::of(&ExperimentConfig::default()),
            chart: ChartSpec {
                x: 0,
                ys: vec![1],
                group: Vec::new(),
                log_x: true,
                log_y: false,
                y_label: "y".into(),
            },
        }
    }

    #[test]
    fn empty_table_has_header_and_axes() {
        let t = sample(vec![]);
        let csv = t.to_csv();
        assert!(csv.ends_with("N,y\n"));
        let parsed = parse_csv(&csv).unwrap();
        assert!(parsed.rows.is_empty());
        let svg = t.to_svg();
        assert!(svg.contains("<rect") && !svg.contains("<polyline"));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let vals = [
            0.1 + 0.2,
            1.0 / 3.0,
            6.02214076e23,
            -1e-300,
            f64::MIN_POSITIVE,
            12345.0,
        ];
        let t = sample(vals.iter().map(|&v| vec![v.abs().max(1e-3), v]).collect());
        let parsed = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(parsed.rows, t.rows);
        assert_eq!(parsed.columns, t.columns);
        assert!(parsed
            .comments
            .iter()
            .any(|c| c.starts_with("config-sha256: ")));
        assert!(!t.to_csv().contains('\r'));
    }

    #[test]
    fn svg_draws_one_polyline_per_series() {
        let mut t = sample(vec![vec![10.0, 1.0], vec![100.0, 2.0], vec![1000.0, 1.5]]);
        assert_eq!(t.to_svg().matches("<polyline").count(), 1);
        t.columns.push("g".into());
        for (i, r) in t.rows.iter_mut().enumerate() {
            r.push((i % 2) as f64);
        }
        t.chart.group = vec![2];
        assert_eq!(t.to_svg().matches("<polyline").count(), 2);
        assert_eq!(t.to_svg(), t.to_svg());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample(vec![vec![10.0, 1.0]]);
        // A directory squatting on the SVG name makes the second rename fail.
        std::fs::create_dir(dir.path().join("fim-scan.svg")).unwrap();
        std::fs::write(dir.path().join("fim-scan.svg").join("x"), "").unwrap();
        let err = emit_artifacts(&t, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 5);
        assert!(!dir.path().join("fim-scan.csv").exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
