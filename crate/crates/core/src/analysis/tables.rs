use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::anova::{AnovaData, Term};
use super::AnalysisError;
use crate::fewshot::{Case, RunRecord, Shots, FROM_SCRATCH};

/// One cell of the results grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub target: String,
    pub source: String,
    pub case: Case,
    pub k: Shots,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "target={} source={} case={} K={}", self.target, self.source, self.case, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    /// Sample standard deviation; only with two or more seeds.
    pub std: Option<f64>,
    pub n: usize,
    pub by_seed: BTreeMap<u64, f64>,
}

impl CellStats {
    fn from_values(by_seed: BTreeMap<u64, f64>) -> Self {
        let n = by_seed.len();
        let mean = by_seed.values().sum::<f64>() / n as f64;
        let std = (n >= 2).then(|| {
            let ss: f64 = by_seed.values().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        CellStats { mean, std, n, by_seed }
    }
}

/// `83.9 (0.3)`, or just the mean without a spread.
pub fn format_mean_std(mean: f64, std: Option<f64>) -> String {
    match std {
        Some(s) => format!("{mean:.1} ({s:.1})"),
        None => format!("{mean:.1}"),
    }
}

fn source_heading(source: &str) -> &str {
    if source == FROM_SCRATCH {
        "From Scratch"
    } else {
        source
    }
}

/// Sources for one target: from-scratch first, then by name.
fn source_order(a: &str, b: &str) -> std::cmp::Ordering {
    (a != FROM_SCRATCH, a).cmp(&(b != FROM_SCRATCH, b))
}

/// Test macro-F1 grouped by cell, with mean and spread over seeds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub cells: BTreeMap<CellKey, CellStats>,
}

impl ResultsTable {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let mut grouped: BTreeMap<CellKey, BTreeMap<u64, f64>> = BTreeMap::new();
        for r in records {
            grouped
                .entry(CellKey {
                    target: r.target.clone(),
                    source: r.source.clone(),
                    case: r.case,
                    k: r.k,
                })
                .or_default()
                .insert(r.seed, r.test_f1);
        }
        ResultsTable {
            cells: grouped.into_iter().map(|(k, v)| (k, CellStats::from_values(v))).collect(),
        }
    }

    pub fn get(&self, target: &str, source: &str, case: Case, k: Shots) -> Option<&CellStats> {
        self.cells.get(&CellKey {
            target: target.into(),
            source: source.into(),
            case,
            k,
        })
    }

    fn targets(&self) -> Vec<String> {
        self.cells.keys().map(|k| k.target.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    fn fewshot_ks(&self) -> Vec<usize> {
        self.cells
            .keys()
            .filter_map(|k| match k.k {
                Shots::K(n) => Some(n),
                Shots::Full => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// In-domain results: one row per dataset and case.
    pub fn in_domain_table(&self) -> String {
        let mut s = String::from("| Dataset | Case | Mean (std) |\n|---|---|---|\n");
        for t in self.targets() {
            let mut first = true;
            for case in Case::ALL {
                if let Some(c) = self.get(&t, &t, case, Shots::Full) {
                    let name = if first { t.as_str() } else { "" };
                    first = false;
                    let _ = writeln!(s, "| {name} | {} | {} |", case.heading(), format_mean_std(c.mean, c.std));
                }
            }
        }
        s
    }

    /// Few-shot results: rows by target, source and case; one column per K.
    pub fn fewshot_table(&self) -> String {
        let ks = self.fewshot_ks();
        let mut s = String::from("| Target | Source | Case |");
        for k in &ks {
            let _ = write!(s, " {k} |");
        }
        s.push_str("\n|---|---|---|");
        s.push_str(&"---|".repeat(ks.len()));
        s.push('\n');
        for t in self.targets() {
            let mut sources: Vec<String> = self
                .cells
                .keys()
                .filter(|c| c.target == t && c.k != Shots::Full)
                .map(|c| c.source.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            sources.sort_by(|a, b| source_order(a, b));
            let mut first_target = true;
            for src in &sources {
                let mut first_source = true;
                for case in Case::ALL {
                    if !ks.iter().any(|&k| self.get(&t, src, case, Shots::K(k)).is_some()) {
                        continue;
                    }
                    let tn = if first_target { t.as_str() } else { "" };
                    let sn = if first_source { source_heading(src) } else { "" };
                    first_target = false;
                    first_source = false;
                    let _ = write!(s, "| {tn} | {sn} | {} |", case.heading());
                    for &k in &ks {
                        let cell = self
                            .get(&t, src, case, Shots::K(k))
                            .map_or("".to_string(), |c| format_mean_std(c.mean, c.std));
                        let _ = write!(s, " {cell} |");
                    }
                    s.push('\n');
                }
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["target", "source", "case", "k", "n", "mean", "std"])?;
        for (k, c) in &self.cells {
            w.write_record([
                k.target.clone(),
                k.source.clone(),
                k.case.to_string(),
                k.k.to_string(),
                c.n.to_string(),
                format!("{:.6}", c.mean),
                c.std.map_or(String::new(), |s| format!("{s:.6}")),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffKind {
    /// Graph case minus baseline in the same cell.
    CaseVsBaseline,
    /// Transfer from a source minus training from scratch, same case.
    TransferVsScratch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffTable {
    pub kind: DiffKind,
    pub cells: BTreeMap<CellKey, f64>,
}

fn matched_difference(a: &CellStats, b: &CellStats, what: &CellKey) -> Result<f64, AnalysisError> {
    let seeds: Vec<u64> = a.by_seed.keys().filter(|s| b.by_seed.contains_key(s)).copied().collect();
    if seeds.is_empty() {
        return Err(AnalysisError::MissingCell(format!("{what} (no shared seeds)")));
    }
    Ok(seeds.iter().map(|s| a.by_seed[s] - b.by_seed[s]).sum::<f64>() / seeds.len() as f64)
}

/// Both difference tables for `records`; see [`ResultsTable::differences`].
pub fn diff_tables(records: &[RunRecord]) -> Result<(DiffTable, DiffTable), AnalysisError> {
    ResultsTable::from_records(records).differences()
}

impl ResultsTable {
    /// Graph case minus baseline, and transfer minus from-scratch. Each
    /// difference averages over the seeds present in both operands.
    pub fn differences(&self) -> Result<(DiffTable, DiffTable), AnalysisError> {
        let mut case = DiffTable {
            kind: DiffKind::CaseVsBaseline,
            cells: BTreeMap::new(),
        };
        let mut transfer = DiffTable {
            kind: DiffKind::TransferVsScratch,
            cells: BTreeMap::new(),
        };
        for (key, stats) in &self.cells {
            if key.case != Case::Baseline {
                let base = CellKey {
                    case: Case::Baseline,
                    ..key.clone()
                };
                let b = self.cells.get(&base).ok_or_else(|| AnalysisError::MissingCell(base.to_string()))?;
                case.cells.insert(key.clone(), matched_difference(stats, b, &base)?);
            }
            if key.source != FROM_SCRATCH && key.source != key.target {
                let scratch = CellKey {
                    source: FROM_SCRATCH.to_string(),
                    ..key.clone()
                };
                let b = self
                    .cells
                    .get(&scratch)
                    .ok_or_else(|| AnalysisError::MissingCell(scratch.to_string()))?;
                transfer.cells.insert(key.clone(), matched_difference(stats, b, &scratch)?);
            }
        }
        Ok((case, transfer))
    }
}

impl DiffTable {
    /// Rows by target, source and case; one `%.2f` column per K in `ks`
    /// (all few-shot K when empty).
    pub fn format(&self, ks: &[usize]) -> String {
        let ks: Vec<usize> = if ks.is_empty() {
            self.cells
                .keys()
                .filter_map(|k| match k.k {
                    Shots::K(n) => Some(n),
                    Shots::Full => None,
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        } else {
            ks.to_vec()
        };
        let mut s = String::from("| Target | Source | Case |");
        for k in &ks {
            let _ = write!(s, " {k} |");
        }
        s.push_str("\n|---|---|---|");
        s.push_str(&"---|".repeat(ks.len()));
        s.push('\n');
        let rows: BTreeSet<(String, String, Case)> = self
            .cells
            .keys()
            .map(|k| (k.target.clone(), k.source.clone(), k.case))
            .collect();
        let mut rows: Vec<_> = rows.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(source_order(&a.1, &b.1)).then(a.2.cmp(&b.2)));
        let mut last: Option<(String, String)> = None;
        for (t, src, case) in rows {
            let cells: Vec<String> = ks
                .iter()
                .map(|&k| {
                    self.cells
                        .get(&CellKey {
                            target: t.clone(),
                            source: src.clone(),
                            case,
                            k: Shots::K(k),
                        })
                        .map_or(String::new(), |v| format!("{v:.2}"))
                })
                .collect();
            if cells.iter().all(String::is_empty) {
                continue;
            }
            let tn = if last.as_ref().is_some_and(|l| l.0 == t) { "" } else { t.as_str() };
            let sn = if last.as_ref().is_some_and(|l| l.0 == t && l.1 == src) {
                ""
            } else {
                source_heading(&src)
            };
            let _ = write!(s, "| {tn} | {sn} | {} |", case.heading());
            for c in cells {
                let _ = write!(s, " {c} |");
            }
            s.push('\n');
            last = Some((t.clone(), src.clone()));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["target", "source", "case", "k", "difference"])?;
        for (k, v) in &self.cells {
            w.write_record([
                k.target.clone(),
                k.source.clone(),
                k.case.to_string(),
                k.k.to_string(),
                format!("{v:.6}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct PublishedRow {
    target: String,
    source: String,
    case: String,
    k: String,
    mean: f64,
    std: Option<f64>,
}

/// Read published cell summaries, `target,source,case,k,mean,std` rows, as
/// a table of single-seed cells (seed 0) that keep the published spread.
/// A source of `From Scratch` maps to [`FROM_SCRATCH`].
pub fn read_published_means(path: &Path) -> Result<ResultsTable, AnalysisError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut table = ResultsTable::default();
    for row in r.deserialize() {
        let row: PublishedRow = row?;
        let case: Case = row.case.parse().map_err(AnalysisError::Invalid)?;
        let k: Shots = row.k.parse().map_err(AnalysisError::Invalid)?;
        let source = if row.source.eq_ignore_ascii_case("from scratch") {
            FROM_SCRATCH.to_string()
        } else {
            row.source
        };
        table.cells.insert(
            CellKey {
                target: row.target,
                source,
                case,
                k,
            },
            CellStats {
                mean: row.mean,
                std: row.std,
                n: 1,
                by_seed: BTreeMap::from([(0, row.mean)]),
            },
        );
    }
    Ok(table)
}

/// Factors `source`, `target`, `case`, `k`, `transfer` over test F1.
///
/// From-scratch records take their target as the source level, so every
/// non-transfer run has `source == target`.
pub fn records_design(records: &[RunRecord]) -> Result<AnovaData, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::Empty("no records".into()));
    }
    let source: Vec<&str> = records
        .iter()
        .map(|r| if r.source == FROM_SCRATCH { r.target.as_str() } else { r.source.as_str() })
        .collect();
    let target: Vec<&str> = records.iter().map(|r| r.target.as_str()).collect();
    let case: Vec<String> = records.iter().map(|r| r.case.to_string()).collect();
    let k: Vec<String> = records.iter().map(|r| r.k.to_string()).collect();
    let transfer: Vec<&str> = records
        .iter()
        .map(|r| if r.transfer { "transfer" } else { "in-domain" })
        .collect();
    AnovaData::new(records.iter().map(|r| r.test_f1).collect())
        .with_factor("source", &source)?
        .with_factor("target", &target)?
        .with_factor("case", &case)?
        .with_factor("k", &k)?
        .with_factor("transfer", &transfer)
}

/// Main effects plus the case×{source, target, transfer, k} and k×transfer
/// interactions.
pub fn grid_terms() -> Vec<Term> {
    vec![
        Term::main("source"),
        Term::main("target"),
        Term::main("case"),
        Term::main("k"),
        Term::main("transfer"),
        Term::interaction("case", "source"),
        Term::interaction("case", "target"),
        Term::interaction("case", "transfer"),
        Term::interaction("case", "k"),
        Term::interaction("k", "transfer"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(target: &str, source: &str, case: Case, k: Shots, seed: u64, f1: f64) -> RunRecord {
        RunRecord {
            source: source.into(),
            target: target.into(),
            case,
            k,
            seed,
            transfer: source != FROM_SCRATCH && source != target,
            dev_f1: f1,
            test_f1: f1,
            epochs: 1,
        }
    }

    #[test]
    fn mean_std_formatting() {
        assert_eq!(format_mean_std(83.94, Some(0.3)), "83.9 (0.3)");
        assert_eq!(format_mean_std(50.0, None), "50.0");
    }

    #[test]
    fn diffs_by_hand() {
        let mut rs = Vec::new();
        for (seed, (b, d, tb, td)) in [(10.0, 14.0, 9.0, 16.0), (12.0, 18.0, 13.0, 20.0)].iter().enumerate() {
            let seed = seed as u64;
            rs.push(rec("A", FROM_SCRATCH, Case::Baseline, Shots::K(5), seed, *b));
            rs.push(rec("A", FROM_SCRATCH, Case::Dep, Shots::K(5), seed, *d));
            rs.push(rec("A", "B", Case::Baseline, Shots::K(5), seed, *tb));
            rs.push(rec("A", "B", Case::Dep, Shots::K(5), seed, *td));
        }
        let (case, transfer) = diff_tables(&rs).unwrap();
        let k = |s: &str, c| CellKey {
            target: "A".into(),
            source: s.into(),
            case: c,
            k: Shots::K(5),
        };
        assert_eq!(case.cells[&k(FROM_SCRATCH, Case::Dep)], 5.0);
        assert_eq!(case.cells[&k("B", Case::Dep)], 7.0);
        assert_eq!(transfer.cells[&k("B", Case::Baseline)], 0.0);
        assert_eq!(transfer.cells[&k("B", Case::Dep)], 2.0);
        assert!(case.format(&[]).contains("| A | From Scratch | +Dep | 5.00 |"));
    }

    #[test]
    fn missing_counterpart_is_named() {
        let rs = vec![rec("A", "B", Case::Dep, Shots::K(1), 0, 3.0)];
        let err = diff_tables(&rs).unwrap_err();
        assert!(err.to_string().contains("case=baseline"));
    }

    #[test]
    fn tables_render() {
        let rs = vec![
            rec("A", "A", Case::Baseline, Shots::Full, 0, 85.0),
            rec("A", "A", Case::Baseline, Shots::Full, 1, 86.0),
            rec("A", FROM_SCRATCH, Case::Amr, Shots::K(1), 0, 20.0),
        ];
        let t = ResultsTable::from_records(&rs);
        assert!(t.in_domain_table().contains("| A | Baseline | 85.5 (0.7) |"));
        assert!(t.fewshot_table().contains("| A | From Scratch | +AMR | 20.0 |"));
    }
}
