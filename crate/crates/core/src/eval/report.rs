//! Report files: `report.json`, `metrics.csv` and `confusion.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::EvalReport;
use super::metrics::AggregateConfusion;
use crate::corpus::LevelA;
use crate::error::{Error, Result};

pub const REPORT_JSON: &str = "report.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const CONFUSION_TXT: &str = "confusion.txt";

const SHORT: [&str; 5] = ["E", "S", "P", "NI", "WI"];

/// Pretty JSON with a trailing newline. Field order is fixed and floats use
/// shortest round-trip formatting, so equal reports give equal bytes.
pub fn report_json(report: &EvalReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn metrics_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fold", "group", "n_test", "precision", "recall", "f1"])?;
    for f in &report.folds {
        w.write_record([
            f.fold.to_string(),
            f.held_out_group.clone(),
            f.n_test.to_string(),
            f.precision.to_string(),
            f.recall.to_string(),
            f.f1.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("writing csv", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Row-normalized percentages to two decimals; rows are true labels.
pub fn render_confusion(c: &AggregateConfusion) -> String {
    let mut out = String::from("true \\ predicted (% of row)\n");
    let _ = write!(out, "{:<24}", "");
    for s in SHORT {
        let _ = write!(out, "{s:>8}");
    }
    out.push('\n');
    for class in LevelA::ALL {
        let i = class.index();
        let _ = write!(out, "{:<24}", class.name());
        if c.supported[i] {
            for v in c.percent[i] {
                let _ = write!(out, "{v:>8.2}");
            }
        } else {
            for _ in 0..5 {
                let _ = write!(out, "{:>8}", "-");
            }
            out.push_str("  (no test samples)");
        }
        out.push('\n');
    }
    out
}

/// Human-readable summary of a report.
pub fn render_report(r: &EvalReport) -> String {
    let mut out = String::new();
    let cfg = &r.config;
    let _ = writeln!(out, "ordcollab {}  seed {}", r.version, r.seed);
    let mixup = match &cfg.mixup {
        Some(m) => format!("{} (alpha {}, tau {}, n {})", m.mode, m.alpha, m.tau, m.n_per_class),
        None => "off".into(),
    };
    let _ = writeln!(
        out,
        "{} {} {} | loss {} | balancing {} | mixup {}",
        cfg.modality, cfg.mapping, cfg.feature_kind, cfg.train.loss, cfg.train.class_balancing, mixup
    );
    let _ = writeln!(out, "{} samples, class counts {:?}\n", r.n_samples, r.class_counts);
    let _ = writeln!(
        out,
        "{:>4}  {:<10} {:>6} {:>9} {:>9} {:>9}",
        "fold", "group", "n_test", "precision", "recall", "f1"
    );
    for f in &r.folds {
        let _ = writeln!(
            out,
            "{:>4}  {:<10} {:>6} {:>9.4} {:>9.4} {:>9.4}",
            f.fold, f.held_out_group, f.n_test, f.precision, f.recall, f.f1
        );
    }
    let s = &r.summary;
    let _ = writeln!(
        out,
        "\nprecision {:.4} ± {:.4}\nrecall    {:.4} ± {:.4}\nf1        {:.4} ± {:.4}\n",
        s.precision.mean, s.precision.std, s.recall.mean, s.recall.std, s.f1.mean, s.f1.std
    );
    out.push_str(&render_confusion(&r.confusion));
    out
}

/// Writes the three report files into `dir`, creating it if needed.
pub fn write_report(dir: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let put = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(format!("writing {}", p.display()), e))
    };
    put(REPORT_JSON, report_json(report)?)?;
    put(METRICS_CSV, metrics_csv(report)?)?;
    put(CONFUSION_TXT, render_confusion(&report.confusion))
}
