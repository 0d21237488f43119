use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{AblationRow, EvalReport, RocReport};
use crate::{Error, Result};

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `confusion.csv` and `roc.csv` into `dir`, plus
/// `roc.svg` and `confusion.svg` when `svg` is set. Returns the paths.
pub fn write_report(report: &EvalReport, dir: impl AsRef<Path>, svg: bool) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();

    let p = dir.join("report.json");
    write_text(&p, &report.to_json()?)?;
    out.push(p);

    let p = dir.join("confusion.csv");
    let mut w = csv::Writer::from_path(&p).map_err(|e| csv_err(&p, e))?;
    let c = report.meta.categories;
    let mut header = vec!["true_label".to_string()];
    header.extend((1..=c).map(|j| format!("pred_{j}")));
    w.write_record(&header).map_err(|e| csv_err(&p, e))?;
    for (i, row) in report.confusion.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(|e| csv_err(&p, e))?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    out.push(p);

    let p = dir.join("roc.csv");
    let mut w = csv::Writer::from_path(&p).map_err(|e| csv_err(&p, e))?;
    w.write_record(["positive_label", "fpr", "tpr", "threshold"]).map_err(|e| csv_err(&p, e))?;
    for curve in &report.roc.curves {
        for pt in &curve.points {
            w.write_record([
                curve.positive_label.to_string(),
                pt.fpr.to_string(),
                pt.tpr.to_string(),
                if pt.threshold.is_finite() { pt.threshold.to_string() } else { "inf".into() },
            ])
            .map_err(|e| csv_err(&p, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    out.push(p);

    if svg {
        for (name, body) in [("roc.svg", roc_svg(&report.roc)), ("confusion.svg", confusion_svg(&report.confusion))] {
            let p = dir.join(name);
            write_text(&p, &body)?;
            out.push(p);
        }
    }
    Ok(out)
}

/// `task,categories,mode,accuracy_mean,accuracy_std,cell,note`; empty
/// numeric fields for `n/a` cells.
pub fn write_ablation_csv(rows: &[AblationRow], path: impl AsRef<Path>) -> Result<()> {
    let p = path.as_ref();
    let mut w = csv::Writer::from_path(p).map_err(|e| csv_err(p, e))?;
    w.write_record(["task", "categories", "mode", "accuracy_mean", "accuracy_std", "cell", "note"])
        .map_err(|e| csv_err(p, e))?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.task.as_str().to_string(),
            r.categories.to_string(),
            r.mode.as_str().to_string(),
            num(r.accuracy_mean),
            num(r.accuracy_std),
            r.cell.clone(),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(|e| csv_err(p, e))?;
    }
    w.flush().map_err(|e| Error::io(p, e))
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Minimal standalone SVG of the ROC curves.
pub fn roc_svg(roc: &RocReport) -> String {
    let (size, pad) = (400.0, 40.0);
    let span = size - 2.0 * pad;
    let xy = |fpr: f64, tpr: f64| (pad + fpr * span, size - pad - tpr * span);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="{pad}" y="{pad}" width="{span}" height="{span}" fill="none" stroke="black"/>"#);
    let (x0, y0) = xy(0.0, 0.0);
    let (x1, y1) = xy(1.0, 1.0);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="gray" stroke-dasharray="4"/>"#);
    for (k, curve) in roc.curves.iter().enumerate() {
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|p| {
                let (x, y) = xy(p.fpr, p.tpr);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">class {} AUC {:.3}</text>"#,
            size - pad - 130.0,
            size - pad - 10.0 - 16.0 * k as f64,
            curve.positive_label,
            curve.auc
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">false positive rate</text>"#, size / 2.0, size - 10.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">true positive rate</text>"#, size / 2.0, size / 2.0);
    s.push_str("</svg>\n");
    s
}

/// Row-normalized confusion heat map.
pub fn confusion_svg(confusion: &[Vec<u64>]) -> String {
    let c = confusion.len();
    let (cell, pad) = (60.0, 50.0);
    let size = pad + cell * c as f64 + 10.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="12">"#);
    for (i, row) in confusion.iter().enumerate() {
        let total = row.iter().sum::<u64>().max(1) as f64;
        for (j, &v) in row.iter().enumerate() {
            let frac = v as f64 / total;
            let shade = (255.0 * (1.0 - frac)).round() as u8;
            let (x, y) = (pad + j as f64 * cell, pad + i as f64 * cell);
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="white"/>"#);
            let ink = if frac > 0.5 { "white" } else { "black" };
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{:.2}</text>"#, x + cell / 2.0, y + cell / 2.0 + 4.0, frac);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, pad - 6.0, pad + i as f64 * cell + cell / 2.0 + 4.0, i + 1);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, pad + i as f64 * cell + cell / 2.0, pad - 8.0, i + 1);
    }
    s.push_str("</svg>\n");
    s
}
