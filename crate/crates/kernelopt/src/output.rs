//! CSV, plot-data, SVG and text-report writers. Numbers are written in
//! Rust's shortest round-trip form, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kernelopt_core::algorithm::TrajectoryBatch;
use kernelopt_core::metrics::TailCurve;

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// File-name form of a number, e.g. `0.1`.
pub fn tag(x: f64) -> String {
    num(x)
}

pub fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// `seed,step,x_0..x_{d−1},f_value`, one line per visited point.
pub fn write_batch(path: &Path, batch: &TrajectoryBatch) -> Result<()> {
    let d = batch
        .trajectories
        .first()
        .map_or(0, |t| t.points()[0].dim());
    let mut header = strings(&["seed", "step"]);
    header.extend((0..d).map(|k| format!("x_{k}")));
    header.push("f_value".into());
    let mut rows = Vec::new();
    for t in batch.iter() {
        for (step, (p, v)) in t.points().iter().zip(t.values()).enumerate() {
            let mut r = vec![t.seed.to_string(), step.to_string()];
            r.extend(p.iter().map(|x| num(*x)));
            r.push(num(*v));
            rows.push(r);
        }
    }
    write_rows(path, &header, &rows)
}

/// `kind,epsilon,n,estimate,ci_lo,ci_hi,M`.
pub fn write_tail(path: &Path, curve: &TailCurve) -> Result<()> {
    let header = strings(&["kind", "epsilon", "n", "estimate", "ci_lo", "ci_hi", "M"]);
    let rows: Vec<Vec<String>> = curve
        .entries
        .iter()
        .map(|e| {
            vec![
                curve.kind.as_str().into(),
                num(curve.epsilon),
                e.n.to_string(),
                num(e.estimate),
                num(e.ci_lo),
                num(e.ci_hi),
                e.m.to_string(),
            ]
        })
        .collect();
    write_rows(path, &header, &rows)
}

/// One line series for plot data: `(n, estimate, ci_lo, ci_hi)` points.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, f64, f64)>,
}

impl Series {
    pub fn from_curve(name: impl Into<String>, curve: &TailCurve) -> Self {
        Series {
            name: name.into(),
            points: curve
                .entries
                .iter()
                .map(|e| (e.n as f64, e.estimate, e.ci_lo, e.ci_hi))
                .collect(),
        }
    }
}

/// Plot data: `n` then `<name>,<name>_ci_lo,<name>_ci_hi` per series. All
/// series must share the same `n` column.
pub fn write_plot(path: &Path, series: &[Series]) -> Result<()> {
    let mut header = vec!["n".to_string()];
    for s in series {
        header.extend([
            s.name.clone(),
            format!("{}_ci_lo", s.name),
            format!("{}_ci_hi", s.name),
        ]);
    }
    let len = series.first().map_or(0, |s| s.points.len());
    let rows: Vec<Vec<String>> = (0..len)
        .map(|i| {
            let mut r = vec![num(series[0].points[i].0)];
            for s in series {
                let (_, y, lo, hi) = s.points[i];
                r.extend([num(y), num(lo), num(hi)]);
            }
            r
        })
        .collect();
    write_rows(path, &header, &rows)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line chart of the series against `n` with shaded intervals; y in [0, 1].
pub fn write_svg(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| pad + (x - xmin) / span * (w - 2.0 * pad);
    let py = |y: f64| h - pad - y.clamp(0.0, 1.0) * (h - 2.0 * pad);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )?;
    writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#)?;
    writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    )?;
    writeln!(
        svg,
        r#"<path d="M{pad} {pad} L{pad} {} L{} {}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad,
        h - pad
    )?;
    for t in [0.0, 0.5, 1.0] {
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{t}</text>"#,
            pad - 6.0,
            py(t) + 4.0
        )?;
    }
    for x in [xmin, xmax] {
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            px(x),
            h - pad + 16.0,
            num(x)
        )?;
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut band = String::new();
        for p in &s.points {
            write!(band, "{:.2},{:.2} ", px(p.0), py(p.3))?;
        }
        for p in s.points.iter().rev() {
            write!(band, "{:.2},{:.2} ", px(p.0), py(p.2))?;
        }
        writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        )?;
        let line: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
            .collect();
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        )?;
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            w - pad - 150.0,
            pad + 16.0 * i as f64,
            escape(&s.name)
        )?;
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Output directory plus the human-readable report.
pub struct Outputs {
    dir: PathBuf,
    report: String,
    svg: bool,
}

impl Outputs {
    pub fn new(dir: &Path, svg: bool) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            report: String::new(),
            svg,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }

    pub fn tail(&mut self, curve: &TailCurve) -> Result<PathBuf> {
        let p = self.path(&format!(
            "tails_{}_{}.csv",
            curve.kind.as_str(),
            tag(curve.epsilon)
        ));
        write_tail(&p, curve)?;
        Ok(p)
    }

    /// `plot_<name>.csv`, and `plot_<name>.svg` when enabled.
    pub fn plot(&mut self, name: &str, title: &str, series: &[Series]) -> Result<()> {
        write_plot(&self.path(&format!("plot_{name}.csv")), series)?;
        if self.svg {
            write_svg(&self.path(&format!("plot_{name}.svg")), title, series)?;
        }
        Ok(())
    }

    pub fn report(&self) -> &str {
        &self.report
    }

    pub fn finish(self) -> Result<String> {
        let p = self.path("report.txt");
        fs::write(&p, &self.report).with_context(|| format!("writing {}", p.display()))?;
        Ok(self.report)
    }
}

/// Aligned text rendering of a tail curve for reports.
pub fn curve_table(curve: &TailCurve) -> String {
    let mut s = format!(
        "  {} tail, epsilon = {} ({}% Clopper-Pearson)\n  {:>8} {:>10} {:>10} {:>10} {:>8}\n",
        curve.kind.as_str(),
        num(curve.epsilon),
        num(curve.confidence * 100.0),
        "n",
        "estimate",
        "ci_lo",
        "ci_hi",
        "M"
    );
    for e in &curve.entries {
        let _ = writeln!(
            s,
            "  {:>8} {:>10.5} {:>10.5} {:>10.5} {:>8}",
            e.n, e.estimate, e.ci_lo, e.ci_hi, e.m
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use kernelopt_core::metrics::{TailEntry, TailKind};

    fn curve() -> TailCurve {
        TailCurve {
            kind: TailKind::Sampling,
            epsilon: 0.1,
            confidence: 0.95,
            entries: vec![TailEntry {
                n: 10,
                estimate: 0.5,
                ci_lo: 0.25,
                ci_hi: 0.75,
                m: 4,
                count: 2,
                strict_count: Some(2),
            }],
        }
    }

    #[test]
    fn tail_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::new(dir.path(), true).unwrap();
        let p = out.tail(&curve()).unwrap();
        assert!(p.ends_with("tails_sampling_0.1.csv"));
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(
            text,
            "kind,epsilon,n,estimate,ci_lo,ci_hi,M\nsampling,0.1,10,0.5,0.25,0.75,4\n"
        );
        out.plot("x", "t", &[Series::from_curve("sampling", &curve())])
            .unwrap();
        let plot = fs::read_to_string(dir.path().join("plot_x.csv")).unwrap();
        assert_eq!(
            plot,
            "n,sampling,sampling_ci_lo,sampling_ci_hi\n10,0.5,0.25,0.75\n"
        );
        assert!(fs::read_to_string(dir.path().join("plot_x.svg"))
            .unwrap()
            .starts_with("<svg"));
        out.line("done");
        assert_eq!(out.finish().unwrap(), "done\n");
    }
}
