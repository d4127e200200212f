use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::special::{f_survival, t_two_sided};
use super::AnalysisError;

/// A categorical variable observed on every response.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    /// Sorted distinct levels.
    pub levels: Vec<String>,
    /// Level index of each observation.
    pub codes: Vec<usize>,
}

impl Factor {
    pub fn new<S: AsRef<str>>(name: &str, values: &[S]) -> Self {
        let levels: Vec<String> = values
            .iter()
            .map(|v| v.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let codes = values
            .iter()
            .map(|v| levels.binary_search_by(|l| l.as_str().cmp(v.as_ref())).expect("level present"))
            .collect();
        Factor {
            name: name.to_string(),
            levels,
            codes,
        }
    }

    /// Sum-to-zero contrast columns (one per level but the last).
    fn columns(&self) -> Vec<Vec<f64>> {
        let last = self.levels.len() - 1;
        (0..last)
            .map(|c| {
                self.codes
                    .iter()
                    .map(|&x| {
                        if x == c {
                            1.0
                        } else if x == last {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Responses plus the factors describing each one.
#[derive(Debug, Clone, PartialEq)]
pub struct AnovaData {
    pub response: Vec<f64>,
    pub factors: Vec<Factor>,
}

impl AnovaData {
    pub fn new(response: Vec<f64>) -> Self {
        AnovaData {
            response,
            factors: Vec::new(),
        }
    }

    pub fn with_factor<S: AsRef<str>>(mut self, name: &str, values: &[S]) -> Result<Self, AnalysisError> {
        if values.len() != self.response.len() {
            return Err(AnalysisError::Invalid(format!(
                "factor {name} has {} values for {} responses",
                values.len(),
                self.response.len()
            )));
        }
        if self.factor(name).is_some() {
            return Err(AnalysisError::Invalid(format!("duplicate factor {name}")));
        }
        self.factors.push(Factor::new(name, values));
        Ok(self)
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    fn term_columns(&self, term: &Term) -> Result<Vec<Vec<f64>>, AnalysisError> {
        let mut cols = vec![vec![1.0; self.response.len()]];
        for name in &term.0 {
            let f = self
                .factor(name)
                .ok_or_else(|| AnalysisError::Invalid(format!("unknown factor {name}")))?;
            let fc = f.columns();
            let mut next = Vec::with_capacity(cols.len() * fc.len());
            for a in &cols {
                for b in &fc {
                    next.push(a.iter().zip(b).map(|(x, y)| x * y).collect());
                }
            }
            cols = next;
        }
        Ok(cols)
    }
}

/// A main effect (one factor) or an interaction (several).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term(pub Vec<String>);

impl Term {
    pub fn main(f: &str) -> Self {
        Term(vec![f.to_string()])
    }

    pub fn interaction(a: &str, b: &str) -> Self {
        Term(vec![a.to_string(), b.to_string()])
    }

    fn factors(&self) -> BTreeSet<&str> {
        self.0.iter().map(String::as_str).collect()
    }

    /// Whether `self` strictly contains `other`'s factors.
    fn contains(&self, other: &Term) -> bool {
        let a = self.factors();
        let b = other.factors();
        a.len() > b.len() && b.is_subset(&a)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("×"))
    }
}

/// Orthonormal basis grown by modified Gram-Schmidt; dependent columns
/// are dropped.
struct Basis {
    q: Vec<Vec<f64>>,
}

impl Basis {
    fn new() -> Self {
        Basis { q: Vec::new() }
    }

    fn add(&mut self, col: &[f64]) -> bool {
        let norm0 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return false;
        }
        let mut v = col.to_vec();
        for _ in 0..2 {
            for q in &self.q {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= d * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-9 * norm0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.q.push(v);
        true
    }

    fn residual_ss(&self, y: &[f64]) -> f64 {
        let mut r = y.to_vec();
        for q in &self.q {
            let d: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (x, qi) in r.iter_mut().zip(q) {
                *x -= d * qi;
            }
        }
        r.iter().map(|x| x * x).sum()
    }
}

fn fit(data: &AnovaData, terms: &[&Term]) -> Result<(usize, f64), AnalysisError> {
    let mut basis = Basis::new();
    basis.add(&vec![1.0; data.response.len()]);
    for t in terms {
        for c in data.term_columns(t)? {
            basis.add(&c);
        }
    }
    Ok((basis.q.len(), basis.residual_ss(&data.response)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub term: String,
    pub ss: f64,
    pub df: usize,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub residual_ss: f64,
    pub residual_df: usize,
    pub total_ss: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// `p < .01` style, or `p = .23` above the smallest threshold that applies.
pub fn format_p(p: f64) -> String {
    for (cut, s) in [
        (0.0001, ".0001"),
        (0.0005, ".0005"),
        (0.001, ".001"),
        (0.005, ".005"),
        (0.01, ".01"),
        (0.05, ".05"),
    ] {
        if p < cut {
            return format!("p < {s}");
        }
    }
    let s = format!("{p:.2}");
    format!("p = {}", s.trim_start_matches('0'))
}

impl AnovaTable {
    pub fn row(&self, term: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.term == term)
    }

    pub fn residual_ms(&self) -> f64 {
        self.residual_ss / self.residual_df as f64
    }

    /// `F(2, 679) = 5.26, p < .01`
    pub fn format_row(&self, row: &AnovaRow) -> String {
        format!("F({}, {}) = {:.2}, {}", row.df, self.residual_df, row.f, format_p(row.p))
    }
}

impl std::fmt::Display for AnovaTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let width = self.rows.iter().map(|r| r.term.chars().count()).max().unwrap_or(0).max(8);
        writeln!(f, "{:<width$}  {:>12}  {:>4}  {:>9}  {:>10}", "term", "SS", "df", "F", "p")?;
        for r in &self.rows {
            writeln!(f, "{:<width$}  {:>12.4}  {:>4}  {:>9.3}  {:>10.3e}", r.term, r.ss, r.df, r.f, r.p)?;
        }
        writeln!(f, "{:<width$}  {:>12.4}  {:>4}", "residual", self.residual_ss, self.residual_df)?;
        write!(f, "n = {}, R² = {:.4}", self.n, self.r_squared)
    }
}

/// Least-squares fit of the factorial model with sum-to-zero coding and
/// Type II sums of squares: each term is adjusted for every other term
/// that does not contain it.
pub fn fit_anova(data: &AnovaData, terms: &[Term]) -> Result<AnovaTable, AnalysisError> {
    let n = data.response.len();
    if n == 0 {
        return Err(AnalysisError::Empty("no responses".into()));
    }
    if data.response.iter().any(|y| !y.is_finite()) {
        return Err(AnalysisError::Invalid("non-finite response".into()));
    }
    let all: Vec<&Term> = terms.iter().collect();
    let (rank, residual_ss) = fit(data, &all)?;
    if rank >= n {
        return Err(AnalysisError::Invalid(format!(
            "no residual degrees of freedom ({n} observations, model rank {rank})"
        )));
    }
    let residual_df = n - rank;
    let mean = data.response.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = data.response.iter().map(|y| (y - mean).powi(2)).sum();
    let residual_ms = residual_ss / residual_df as f64;

    let mut rows = Vec::new();
    let mut aliased = Vec::new();
    for t in terms {
        let others: Vec<&Term> = terms.iter().filter(|o| *o != t && !o.contains(t)).collect();
        let (r0, rss0) = fit(data, &others)?;
        let mut with = others.clone();
        with.push(t);
        let (r1, rss1) = fit(data, &with)?;
        let df = r1 - r0;
        if df == 0 {
            aliased.push(t.to_string());
            continue;
        }
        let ss = (rss0 - rss1).max(0.0);
        let f = (ss / df as f64) / residual_ms;
        rows.push(AnovaRow {
            term: t.to_string(),
            ss,
            df,
            f,
            p: f_survival(f, df as f64, residual_df as f64),
        });
    }
    if !aliased.is_empty() {
        return Err(AnalysisError::RankDeficient { terms: aliased });
    }
    Ok(AnovaTable {
        rows,
        residual_ss,
        residual_df,
        total_ss,
        r_squared: if total_ss > 0.0 { 1.0 - residual_ss / total_ss } else { 1.0 },
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseT {
    pub a: String,
    pub b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

/// Student-t comparisons between every pair of `levels` of `factor`
/// (all levels when empty), pooling variance through the ANOVA residual
/// mean square.
pub fn posthoc_t(
    data: &AnovaData,
    factor: &str,
    levels: &[&str],
    table: &AnovaTable,
) -> Result<Vec<PairwiseT>, AnalysisError> {
    let f = data
        .factor(factor)
        .ok_or_else(|| AnalysisError::Invalid(format!("unknown factor {factor}")))?;
    let chosen: Vec<&str> = if levels.is_empty() {
        f.levels.iter().map(String::as_str).collect()
    } else {
        levels.to_vec()
    };
    if chosen.len() < 2 {
        return Err(AnalysisError::Invalid("post-hoc comparison needs at least two levels".into()));
    }
    let mut stats = Vec::new();
    for &l in &chosen {
        let ys: Vec<f64> = match f.levels.iter().position(|x| x == l) {
            Some(code) => f
                .codes
                .iter()
                .zip(&data.response)
                .filter(|(c, _)| **c == code)
                .map(|(_, y)| *y)
                .collect(),
            None => Vec::new(),
        };
        if ys.is_empty() {
            return Err(AnalysisError::Invalid(format!("level {l} of {factor} has no records")));
        }
        stats.push((l, ys.iter().sum::<f64>() / ys.len() as f64, ys.len()));
    }
    let ms = table.residual_ms();
    let mut out = Vec::new();
    for i in 0..stats.len() {
        for j in i + 1..stats.len() {
            let (a, ma, na) = stats[i];
            let (b, mb, nb) = stats[j];
            let t = (ma - mb) / (ms * (1.0 / na as f64 + 1.0 / nb as f64)).sqrt();
            out.push(PairwiseT {
                a: a.to_string(),
                b: b.to_string(),
                mean_a: ma,
                mean_b: mb,
                n_a: na,
                n_b: nb,
                t,
                df: table.residual_df,
                p: t_two_sided(t, table.residual_df as f64),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_way_by_hand() {
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let g = ["a", "a", "b", "b", "c", "c"];
        let data = AnovaData::new(y).with_factor("g", &g).unwrap();
        let t = fit_anova(&data, &[Term::main("g")]).unwrap();
        // group means 1.5, 3.5, 5.5; grand 3.5; SS_between = 2·(4+0+4) = 16; SS_within = 6·0.25 = 1.5
        assert!((t.rows[0].ss - 16.0).abs() < 1e-10);
        assert!((t.residual_ss - 1.5).abs() < 1e-10);
        assert_eq!((t.rows[0].df, t.residual_df), (2, 3));
        assert!((t.rows[0].f - 16.0).abs() < 1e-9);
    }

    #[test]
    fn aliased_terms_are_reported() {
        let y = vec![1.0, 2.0, 3.0, 4.0, 2.0, 1.0];
        let a = ["x", "x", "x", "y", "y", "y"];
        let data = AnovaData::new(y)
            .with_factor("a", &a)
            .unwrap()
            .with_factor("b", &a)
            .unwrap();
        match fit_anova(&data, &[Term::main("a"), Term::main("b")]) {
            Err(AnalysisError::RankDeficient { terms }) => assert_eq!(terms, vec!["a", "b"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.00001), "p < .0001");
        assert_eq!(format_p(0.003), "p < .005");
        assert_eq!(format_p(0.2345), "p = .23");
    }
}
