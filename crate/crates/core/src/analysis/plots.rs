use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::tables::{diff_tables, ResultsTable};
use super::AnalysisError;
use crate::fewshot::{Case, RunRecord, Shots, FROM_SCRATCH};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmittedFiles {
    pub plots: Vec<PathBuf>,
    pub tables: Vec<PathBuf>,
}

fn file_part(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn color(case: Case) -> &'static str {
    match case {
        Case::Baseline => "#555555",
        Case::Dep => "#1f77b4",
        Case::Amr => "#d62728",
    }
}

/// Difference-vs-K curves for one (target, source) pair as an SVG string.
fn curve_svg(title: &str, ks: &[usize], curves: &BTreeMap<Case, Vec<Option<f64>>>) -> String {
    let values: Vec<f64> = curves.values().flatten().flatten().copied().collect();
    let lo = values.iter().copied().fold(0.0f64, f64::min).floor() - 1.0;
    let hi = values.iter().copied().fold(0.0f64, f64::max).ceil() + 1.0;
    let x = |i: usize| {
        if ks.len() <= 1 {
            MARGIN + (WIDTH - 2.0 * MARGIN) / 2.0
        } else {
            MARGIN + i as f64 * (WIDTH - 2.0 * MARGIN) / (ks.len() - 1) as f64
        }
    };
    let y = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{0:.1}" x2="{1}" y2="{0:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
        y(0.0),
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for (i, k) in ks.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{k}</text>"#,
            x(i),
            HEIGHT - MARGIN + 16.0
        );
    }
    for v in [lo, 0.0, hi] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.0}</text>"#,
            MARGIN - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">K</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    for (row, (case, vals)) in curves.iter().enumerate() {
        let pts: Vec<String> = vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{:.1},{:.1}", x(i), y(v))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            color(*case),
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            WIDTH - MARGIN - 40.0,
            MARGIN + 14.0 * row as f64,
            color(*case),
            case.heading()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write `diff_<target>_from_<source>.svg` curves of graph case minus
/// baseline against K, plus `results.csv`, `diff_case.csv` and
/// `diff_transfer.csv`.
pub fn emit_plots(records: &[RunRecord], out: &Path) -> Result<EmittedFiles, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::Empty("no records to plot".into()));
    }
    fs::create_dir_all(out)?;
    let (case_diff, transfer_diff) = diff_tables(records)?;
    let mut files = EmittedFiles::default();

    let results = out.join("results.csv");
    ResultsTable::from_records(records).write_csv(&results)?;
    files.tables.push(results);
    let p = out.join("diff_case.csv");
    case_diff.write_csv(&p)?;
    files.tables.push(p);
    let p = out.join("diff_transfer.csv");
    transfer_diff.write_csv(&p)?;
    files.tables.push(p);

    let pairs: BTreeSet<(String, String)> = case_diff
        .cells
        .keys()
        .filter(|k| k.k != Shots::Full)
        .map(|k| (k.target.clone(), k.source.clone()))
        .collect();
    for (target, source) in pairs {
        let ks: Vec<usize> = case_diff
            .cells
            .keys()
            .filter(|k| k.target == target && k.source == source)
            .filter_map(|k| match k.k {
                Shots::K(n) => Some(n),
                Shots::Full => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut curves = BTreeMap::new();
        for case in [Case::Dep, Case::Amr] {
            let vals: Vec<Option<f64>> = ks
                .iter()
                .map(|&k| {
                    case_diff
                        .cells
                        .iter()
                        .find(|(key, _)| key.target == target && key.source == source && key.case == case && key.k == Shots::K(k))
                        .map(|(_, v)| *v)
                })
                .collect();
            if vals.iter().any(Option::is_some) {
                curves.insert(case, vals);
            }
        }
        let shown = if source == FROM_SCRATCH { "scratch" } else { source.as_str() };
        let title = format!("{target} from {shown}: F1 difference over baseline");
        let path = out.join(format!("diff_{}_from_{}.svg", file_part(&target), file_part(shown)));
        fs::write(&path, curve_svg(&title, &ks, &curves))?;
        files.plots.push(path);
    }
    Ok(files)
}
