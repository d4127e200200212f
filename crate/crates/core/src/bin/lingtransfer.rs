use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lingtransfer::align::{
    coverage_report, read_alignment_file, realign, write_alignment_file, AlignmentConfig, AlignmentFile,
    RuleLemmatizer,
};
use lingtransfer::analysis::{
    diff_tables, emit_plots, fit_anova, grid_terms, posthoc_t, records_design, AnalysisError, ResultsTable,
};
use lingtransfer::corpus::{load_dataset, read_jsonl, write_jsonl, DocumentSource, LabelSchema, RelationInstance, RuleSegmenter};
use lingtransfer::fewshot::RunRecord;
use lingtransfer::linggraph::{graphs_from_parses, read_graph_file, write_graph_file, Formalism};

#[derive(Parser)]
#[command(name = "lingtransfer", version, about = "Relation extraction with linguistic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Risec,
    Efgc,
    Mscorpus,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormalismArg {
    Dep,
    Amr,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an annotated corpus into relation instances (JSONL) plus a
    /// `<out>.splits.json` manifest.
    Ingest {
        #[arg(long, value_enum)]
        dataset: DatasetArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        merge_map: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build one context graph per instance from parser output.
    Graphs {
        #[arg(long, value_enum)]
        formalism: FormalismArg,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        parses: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend base AMR alignments and report triple coverage before and after.
    Align {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        base_alignments: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the graphs with the new alignments.
        #[arg(long)]
        graphs_out: Option<PathBuf>,
    },
    /// Tables, difference tables, ANOVA and plots from a records store.
    Analyze {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        anova: bool,
        #[arg(long)]
        posthoc: Option<String>,
        #[arg(long)]
        diff: bool,
        #[arg(long)]
        plots: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            dataset,
            input,
            out,
            merge_map,
            seed,
        } => ingest(dataset, &input, &out, merge_map.as_deref(), seed),
        Command::Graphs {
            formalism,
            instances,
            parses,
            out,
        } => graphs(formalism, &instances, &parses, &out),
        Command::Align {
            graphs,
            base_alignments,
            out,
            report,
            graphs_out,
        } => align(&graphs, base_alignments.as_deref(), &out, report.as_deref(), graphs_out.as_deref()),
        Command::Analyze {
            records,
            out,
            anova,
            posthoc,
            diff,
            plots,
        } => analyze(&records, &out, anova, posthoc.as_deref(), diff, plots),
    }
}

fn ingest(dataset: DatasetArg, input: &Path, out: &Path, merge_map: Option<&Path>, seed: u64) -> Result<()> {
    let source = match dataset {
        DatasetArg::Risec => DocumentSource::Risec,
        DatasetArg::Efgc => DocumentSource::Efgc,
        DatasetArg::Mscorpus => DocumentSource::Mscorpus,
        DatasetArg::Generic => DocumentSource::Generic,
    };
    let map = match merge_map {
        Some(p) => Some(LabelSchema::merge_map_from_json(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?),
        None => None,
    };
    let splits = load_dataset(input, source, map, &RuleSegmenter::default(), seed)?;
    let all: Vec<RelationInstance> = splits.all().cloned().collect();
    write_jsonl(out, &all)?;
    let mut manifest = out.as_os_str().to_owned();
    manifest.push(".splits.json");
    fs::write(&manifest, serde_json::to_string_pretty(&splits.manifest())?)?;
    eprintln!(
        "{} instances ({} train, {} dev{}, {} test), {} labels -> {}",
        all.len(),
        splits.train.len(),
        splits.dev.len(),
        if splits.dev_generated { " carved from train" } else { "" },
        splits.test.len(),
        splits.schema.num_classes(),
        out.display()
    );
    Ok(())
}

fn graphs(formalism: FormalismArg, instances: &Path, parses: &Path, out: &Path) -> Result<()> {
    let formalism = match formalism {
        FormalismArg::Dep => Formalism::Dependency,
        FormalismArg::Amr => Formalism::Amr,
    };
    let instances: Vec<RelationInstance> = read_jsonl(instances)?;
    let (graphs, parseless) = graphs_from_parses(formalism, &instances, parses)?;
    write_graph_file(out, &graphs)?;
    eprintln!("{} graphs ({parseless} parseless) -> {}", graphs.len(), out.display());
    Ok(())
}

fn align(
    graphs_path: &Path,
    base: Option<&Path>,
    out: &Path,
    report: Option<&Path>,
    graphs_out: Option<&Path>,
) -> Result<()> {
    let mut graphs = read_graph_file(graphs_path)?;
    let base: AlignmentFile = match base {
        Some(p) => read_alignment_file(p)?,
        None => graphs.iter().map(|(id, g)| (id.clone(), g.alignments.clone())).collect(),
    };
    let config = AlignmentConfig::default();
    let mut realigned = AlignmentFile::new();
    for (id, g) in &graphs {
        let b = base.get(id).cloned().unwrap_or_default();
        realigned.insert(id.clone(), realign(g, &g.tokens, &b, &RuleLemmatizer, &config));
    }
    let empty = BTreeMap::new();
    let before = coverage_report(
        graphs.iter().map(|(id, g)| (id.as_str(), g, base.get(id).unwrap_or(&empty))),
        &config,
    );
    let after = coverage_report(graphs.iter().map(|(id, g)| (id.as_str(), g, &realigned[id])), &config);
    write_alignment_file(out, &realigned)?;
    eprintln!(
        "alignable triples: {}; with an unaligned endpoint: {:.1}% before, {:.1}% after",
        before.total_alignable,
        100.0 * before.unaligned_fraction(),
        100.0 * after.unaligned_fraction()
    );
    if let Some(p) = report {
        fs::write(p, serde_json::to_string_pretty(&serde_json::json!({"before": before, "after": after}))?)?;
    }
    if let Some(p) = graphs_out {
        for (id, g) in graphs.iter_mut() {
            g.alignments = realigned[id].clone();
        }
        write_graph_file(p, &graphs)?;
    }
    Ok(())
}

fn analyze(records: &Path, out: &Path, anova: bool, posthoc: Option<&str>, diff: bool, plots: bool) -> Result<()> {
    let records: Vec<RunRecord> = read_jsonl(records)?;
    if records.is_empty() {
        bail!("no records in the store");
    }
    fs::create_dir_all(out)?;
    let table = ResultsTable::from_records(&records);
    fs::write(out.join("table_in_domain.md"), table.in_domain_table())?;
    fs::write(out.join("table_fewshot.md"), table.fewshot_table())?;
    table.write_csv(&out.join("results.csv"))?;
    if diff {
        let (case, transfer) = diff_tables(&records)?;
        fs::write(out.join("table_diff_case.md"), case.format(&[]))?;
        fs::write(out.join("table_diff_transfer.md"), transfer.format(&[]))?;
        case.write_csv(&out.join("diff_case.csv"))?;
        transfer.write_csv(&out.join("diff_transfer.csv"))?;
    }
    if anova || posthoc.is_some() {
        let data = records_design(&records)?;
        let fit = match fit_anova(&data, &grid_terms()) {
            Err(AnalysisError::RankDeficient { terms }) => {
                bail!("the records do not identify these terms: {}", terms.join(", "))
            }
            r => r?,
        };
        let mut text = format!("{fit}\n\n");
        for row in &fit.rows {
            text.push_str(&format!("{}: {}\n", row.term, fit.format_row(row)));
        }
        fs::write(out.join("anova.txt"), &text)?;
        fs::write(out.join("anova.json"), serde_json::to_string_pretty(&fit)?)?;
        print!("{text}");
        if let Some(factor) = posthoc {
            let pairs = posthoc_t(&data, factor, &[], &fit)?;
            let mut text = String::new();
            for p in &pairs {
                text.push_str(&format!(
                    "{} vs {}: {:.2} vs {:.2}, t({}) = {:.3}, {}\n",
                    p.a,
                    p.b,
                    p.mean_a,
                    p.mean_b,
                    p.df,
                    p.t,
                    lingtransfer::analysis::format_p(p.p)
                ));
            }
            fs::write(out.join(format!("posthoc_{factor}.txt")), &text)?;
            print!("{text}");
        }
    }
    if plots {
        let files = emit_plots(&records, out)?;
        eprintln!("{} plots written", files.plots.len());
    }
    eprintln!("outputs in {}", out.display());
    Ok(())
}
