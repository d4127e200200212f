//! ANOVA and post-hoc tests over the published few-shot means.

use std::path::Path;

use lingtransfer::analysis::{fit_anova, grid_terms, posthoc_t, read_published_means, AnovaData, Term};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/published/fewshot_means.csv");
    let table = read_published_means(&path)?;
    let mut y = Vec::new();
    let mut factors: [Vec<String>; 4] = Default::default();
    for (key, cell) in &table.cells {
        y.push(cell.mean);
        factors[0].push(key.target.clone());
        factors[1].push(key.source.clone());
        factors[2].push(key.case.to_string());
        factors[3].push(key.k.to_string());
    }
    let mut data = AnovaData::new(y);
    for (name, values) in ["target", "source", "case", "k"].iter().zip(&factors) {
        data = data.with_factor(name, values)?;
    }
    let terms: Vec<Term> = ["target", "source", "case", "k"].into_iter().map(Term::main).collect();
    let fit = fit_anova(&data, &terms)?;
    println!("{fit}");
    for t in posthoc_t(&data, "case", &[], &fit)? {
        println!("{t:?}");
    }
    println!("run-level designs use {} terms", grid_terms().len());
    Ok(())
}
