//! Run a small resumable experiment grid and print the result tables.
//!
//!     cargo run --release --example run_grid [OUT_DIR]

use std::path::PathBuf;

use lingtransfer::analysis::{emit_plots, ResultsTable};
use lingtransfer::fewshot::{expected_record_count, run_grid, Case, GridConfig, GridMode, RecordStore, TrainConfig};
use lingtransfer::model::{EncoderSpec, TinyAdapter};
use lingtransfer::synthetic::fixture_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("lingtransfer-grid"));
    let datasets = fixture_grid(&["alpha", "beta", "gamma"], 90, 0);
    let encoder = EncoderSpec::Tiny {
        vocab_size: 256,
        hidden: 12,
        max_tokens: 64,
    };
    let train = TrainConfig {
        learning_rate: 1e-2,
        batch_size: 8,
        max_epochs: 20,
        patience: 3,
        ..TrainConfig::default()
    };
    let config = GridConfig {
        encoder: encoder.clone(),
        cases: Case::ALL.to_vec(),
        ks: vec![1, 5, 10],
        seeds: vec![0, 1, 2],
        modes: vec![GridMode::InDomainFull, GridMode::FromScratchFewshot, GridMode::TransferFewshot],
        in_domain: train.clone(),
        fewshot: TrainConfig { batch_size: 4, ..train },
        depth: 2,
        num_bases: None,
    };
    let store = RecordStore::open(&out)?;
    let total = expected_record_count(datasets.len(), &config);
    let mut n = store.records()?.len();
    let records = run_grid(&datasets, &config, &TinyAdapter::new(&encoder).unwrap(), &store, &mut |r| {
        n += 1;
        eprintln!("[{n}/{total}] {} <- {} {} K={} seed={}: {:.1}", r.target, r.source, r.case, r.k, r.seed, r.test_f1);
    })?;
    let table = ResultsTable::from_records(&records);
    println!("{}\n{}", table.in_domain_table(), table.fewshot_table());
    let (_, transfer) = table.differences()?;
    println!("{}", transfer.format(&[]));
    let files = emit_plots(&records, &out.join("analysis"))?;
    println!("wrote {} plots under {}", files.plots.len(), out.display());
    Ok(())
}
