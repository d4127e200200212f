//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach stdout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use lingtransfer::align::{coverage_report, lemma_match, read_alignment_file, realign, AlignmentConfig, RuleLemmatizer};
use lingtransfer::analysis::{
    emit_plots, f_survival, fit_anova, macro_f1, posthoc_t, read_published_means, AnovaData, ResultsTable, Term,
};
use lingtransfer::corpus::{RelationInstance, Span};
use lingtransfer::fewshot::{
    evaluate, expected_record_count, run_grid, sample_fewshot, train_until_early_stop, Case, GridConfig, GridMode,
    RecordStore, RunRecord, Shots, TrainConfig,
};
use lingtransfer::linggraph::{read_amr_corpus, relation_vocabulary, GraphFile};
use lingtransfer::model::{
    baseline_forward, graph_forward, prepare_instance, Classifier, ClassifierConfig, EncoderSpec, Encoding, GraphInput,
    GraphMode, ModelParameters, PreparedInstance, RelConv, RelEdge, TinyAdapter,
};
use lingtransfer::synthetic::{fixture_grid, graph_decodable_task};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn tiny_spec(hidden: usize) -> EncoderSpec {
    EncoderSpec::Tiny {
        vocab_size: 256,
        hidden,
        max_tokens: 64,
    }
}

fn prepare_all(
    instances: &[RelationInstance],
    graphs: Option<&GraphFile>,
    schema: &lingtransfer::corpus::LabelSchema,
    adapter: &TinyAdapter,
    config: &ClassifierConfig,
) -> Vec<PreparedInstance> {
    let index = config.relation_index();
    instances
        .iter()
        .map(|x| {
            prepare_instance(x, schema.index_of(&x.label), graphs.and_then(|g| g.get(&x.id)), adapter, config, &index)
                .expect("fixture instance prepares")
        })
        .collect()
}

fn zero_graph_equivalence() -> Outcome {
    let task = graph_decodable_task(100, 17);
    let spec = tiny_spec(16);
    let adapter = TinyAdapter::new(&spec).unwrap();
    let mut max_diff = 0.0f64;
    let mut fused = 0;
    let mut compared = 0;
    for (mode, graphs) in [(GraphMode::Dependency, &task.dependency_graphs), (GraphMode::Amr, &task.amr_graphs)] {
        let vocab = relation_vocabulary(graphs.values());
        let config = ClassifierConfig::new(spec.clone(), task.schema.num_classes(), mode, vocab.clone());
        let model = Classifier::new(config.clone(), 3).unwrap();
        let zero = RelConv::zeros(config.hidden(), config.depth, vocab.len(), None);
        let baseline = Classifier {
            config: ClassifierConfig {
                graph_mode: GraphMode::None,
                relation_vocabulary: Vec::new(),
                ..config.clone()
            },
            params: ModelParameters {
                conv: None,
                ..model.params.clone()
            },
        };
        let zeroed = Classifier {
            config: config.clone(),
            params: ModelParameters {
                conv: Some(zero.clone()),
                ..model.params.clone()
            },
        };
        for x in prepare_all(&task.instances, Some(graphs), &task.schema, &adapter, &config) {
            let enc = model.encode(&x).unwrap();
            let g = x.graph.as_ref().unwrap();
            if g.node_tokens.iter().any(|t| t.iter().any(|i| x.e1.contains(i) || x.e2.contains(i))) {
                fused += 1;
            }
            let pb = baseline_forward(&enc, &x.e1, &x.e2, &model.params.head, &x.id).unwrap();
            let pg = graph_forward(&enc, g, &x.e1, &x.e2, &zero, &model.params.head, &x.id).unwrap();
            let mut xb = x.clone();
            xb.graph = None;
            let lb = baseline.logits(&xb).unwrap();
            let lg = zeroed.logits(&x).unwrap();
            for (a, b) in pb.iter().zip(&pg).chain(lb.iter().zip(&lg)) {
                max_diff = max_diff.max((a - b).abs());
            }
            ensure!(pb == pg && lb == lg, "{mode}: instance {} differs by {max_diff:e}", x.id);
            compared += 1;
        }
    }
    ensure!(fused > 0, "no instance exercised the fusion path");
    Ok(format!(
        "{compared} graph-instance pairs bitwise equal ({fused} with aligned entity nodes), max |diff| = {max_diff:e}"
    ))
}

fn random_graph_instance(rng: &mut ChaCha8Rng, vocab: usize, relations: usize, classes: usize) -> PreparedInstance {
    let n_tok = rng.gen_range(4..=10);
    let mut ids: Vec<usize> = (0..vocab).collect();
    ids.shuffle(rng);
    ids.truncate(n_tok);
    let offsets = (0..n_tok).map(|i| Span::new(3 * i, 3 * i + 2)).collect();
    let e1: Vec<usize> = (0..rng.gen_range(1..=2)).collect();
    let e2: Vec<usize> = (n_tok - rng.gen_range(1..=2)..n_tok).collect();
    let n = rng.gen_range(2..=10);
    let mut node_tokens = vec![Vec::new()];
    for _ in 1..n {
        let mut t: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n_tok)).collect();
        t.sort_unstable();
        t.dedup();
        node_tokens.push(t);
    }
    node_tokens[1].push(e1[0]);
    node_tokens[n - 1].push(e2[0]);
    for t in node_tokens.iter_mut() {
        t.sort_unstable();
        t.dedup();
    }
    let mut edges: Vec<RelEdge> = (1..n)
        .map(|i| RelEdge {
            src: rng.gen_range(0..i),
            dst: i,
            rel: rng.gen_range(0..relations),
        })
        .collect();
    for _ in 0..rng.gen_range(0..3) {
        edges.push(RelEdge {
            src: rng.gen_range(0..n),
            dst: rng.gen_range(0..n),
            rel: rng.gen_range(0..relations),
        });
    }
    PreparedInstance {
        id: "random#0".into(),
        label: Some(rng.gen_range(0..classes)),
        encoding: Encoding::Ids { ids, offsets },
        e1,
        e2,
        graph: Some(GraphInput {
            num_nodes: n,
            edges,
            node_tokens,
        }),
    }
}

fn gradient_check() -> Outcome {
    let vocab = 40;
    let relations = vec![":top-link".to_string(), "obj".into(), "nsubj".into()];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let eps = 1e-4;
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut kinks = 0;
    for trial in 0..20 {
        let mut config = ClassifierConfig::new(
            EncoderSpec::Tiny {
                vocab_size: vocab,
                hidden: 8,
                max_tokens: 64,
            },
            3,
            GraphMode::Dependency,
            relations.clone(),
        );
        config.depth = 2;
        if trial % 4 == 3 {
            config.num_bases = Some(2);
        }
        let model = Classifier::new(config.clone(), trial).unwrap();
        let x = random_graph_instance(&mut rng, vocab, relations.len(), 3);
        let label = x.label.unwrap();
        let mut grad = model.params.zeros_like();
        model.loss_and_gradient(&x, label, &mut grad).unwrap();
        let loss_at = |p: &ModelParameters| {
            let c = Classifier {
                config: config.clone(),
                params: p.clone(),
            };
            let mut scratch = p.zeros_like();
            c.loss_and_gradient(&x, label, &mut scratch).unwrap()
        };
        let Encoding::Ids { ids, .. } = &x.encoding else { unreachable!() };
        for (ti, gt) in grad.tensors().iter().enumerate() {
            let hidden = 8;
            let entries: Vec<usize> = if gt.path.starts_with("conv.") {
                (0..gt.data.len()).collect()
            } else if gt.path == "encoder.embeddings" {
                ids.iter().flat_map(|&r| r * hidden..(r + 1) * hidden).collect()
            } else {
                (0..gt.data.len()).step_by(7).collect()
            };
            for i in entries {
                let a = gt.data[i];
                let mut fd = 0.0;
                for step in [eps, eps / 100.0] {
                    let at = |delta: f64| {
                        let mut p = model.params.clone();
                        p.tensors_mut()[ti].data[i] += delta;
                        loss_at(&p)
                    };
                    let (up, mid, down) = (at(step), loss_at(&model.params), at(-step));
                    fd = (up - down) / (2.0 * step);
                    let (fwd, bwd) = ((up - mid) / step, (mid - down) / step);
                    // a ReLU or max-pool switch inside the window shows up as
                    // one-sided slopes that disagree
                    if (fwd - bwd).abs() <= 1e-2 * fwd.abs().max(bwd.abs()).max(1e-6) {
                        break;
                    }
                    if step == eps {
                        kinks += 1;
                    }
                }
                let scale = a.abs().max(fd.abs());
                if scale > 1e-7 {
                    let rel = (a - fd).abs() / scale;
                    worst = worst.max(rel);
                    ensure!(rel < 1e-3, "trial {trial} {}[{i}]: analytic {a:e} vs numeric {fd:e}", gt.path);
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} parameters over 20 graphs, worst relative error {worst:.2e} \
         ({kinks} re-probed at step 1e-6 after a kink inside the 1e-4 window)"
    ))
}

fn sampler_contract() -> Outcome {
    let sizes = [2usize, 7, 150];
    let items: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| (0..n).map(move |_| c))
        .enumerate()
        .collect();
    let ks = [1usize, 5, 10, 20, 50, 100];
    let mut runner = TestRunner::new(PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let result = runner.run(&(any::<u64>(), any::<u64>()), |(seed, order)| {
        let mut pool = items.clone();
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(order));
        let mut previous: Option<HashSet<usize>> = None;
        for &k in &ks {
            let s = sample_fewshot(&pool, |x| x.1, k, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let again = sample_fewshot(&pool, |x| x.1, k, seed).unwrap();
            prop_assert_eq!(&s, &again, "not deterministic");
            let ids: HashSet<usize> = s.iter().map(|x| x.0).collect();
            prop_assert_eq!(ids.len(), s.len(), "duplicate draw");
            for (c, &n) in sizes.iter().enumerate() {
                prop_assert_eq!(s.iter().filter(|x| x.1 == c).count(), k.min(n));
            }
            if let Some(p) = &previous {
                prop_assert!(p.is_subset(&ids), "K={} is not a superset", k);
            }
            previous = Some(ids);
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("1000 seeds × 6 K values: sizes min(K, n), no duplicates, nested, deterministic".into())
}

fn brute_force_macro_f1(pred: &[usize], gold: &[usize], classes: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..classes {
        let predicted = pred.iter().filter(|&&p| p == c).count() as f64;
        let actual = gold.iter().filter(|&&g| g == c).count() as f64;
        let hits = pred.iter().zip(gold).filter(|(p, g)| **p == c && **g == c).count() as f64;
        let precision = if predicted > 0.0 { hits / predicted } else { 0.0 };
        let recall = if actual > 0.0 { hits / actual } else { 0.0 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    100.0 * total / classes as f64
}

fn macro_f1_oracle() -> Outcome {
    // A=0, B=1
    let m = macro_f1(&[0, 1, 1, 1], &[0, 0, 1, 1], 2).unwrap();
    ensure!((m - 100.0 * (2.0 / 3.0 + 4.0 / 5.0) / 2.0).abs() < 1e-9, "worked example gave {m}");
    ensure!((m - 73.33).abs() < 0.005, "worked example rounds to {m:.2}");
    let perfect = macro_f1(&[2, 0, 1, 1, 2], &[2, 0, 1, 1, 2], 3).unwrap();
    ensure!((perfect - 100.0).abs() < 1e-9, "perfect predictions gave {perfect}");
    let constant = macro_f1(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
    ensure!((constant - 100.0 * (2.0 / 3.0) / 2.0).abs() < 1e-9, "constant predictions gave {constant}");

    let mut runner = TestRunner::new(PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (1usize..7).prop_flat_map(|c| {
        (1usize..80).prop_flat_map(move |n| {
            (Just(c), proptest::collection::vec(0..c, n), proptest::collection::vec(0..c, n))
        })
    });
    let result = runner.run(&strategy, |(c, pred, gold)| {
        let got = macro_f1(&pred, &gold, c).unwrap();
        let want = brute_force_macro_f1(&pred, &gold, c);
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("3 worked examples to 1e-9; 1000 random vectors match per-class precision/recall".into())
}

struct Design {
    levels: Vec<usize>,
    cells: Vec<Vec<usize>>,
    y: Vec<f64>,
}

fn balanced_design(levels: &[usize], reps: usize, rng: &mut ChaCha8Rng) -> Design {
    let mut cells = vec![Vec::new()];
    for &l in levels {
        cells = cells
            .into_iter()
            .flat_map(|c: Vec<usize>| {
                (0..l).map(move |v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    let effects: Vec<Vec<f64>> = levels.iter().map(|&l| (0..l).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for c in &cells {
        let inter = rng.gen_range(-1.0..1.0);
        for _ in 0..reps {
            let mean: f64 = c.iter().enumerate().map(|(f, &v)| effects[f][v]).sum::<f64>() + inter;
            y.push(10.0 + mean + rng.gen_range(-1.5..1.5));
            rows.push(c.clone());
        }
    }
    Design {
        levels: levels.to_vec(),
        cells: rows,
        y,
    }
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..(1usize << n))
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Sum of squares of the effect of `term` in a balanced design, by
/// inclusion-exclusion over marginal means.
fn brute_force_ss(d: &Design, term: &[usize]) -> f64 {
    let marginal = |factors: &[usize], row: &[usize]| -> f64 {
        let ys: Vec<f64> = d
            .cells
            .iter()
            .zip(&d.y)
            .filter(|(c, _)| factors.iter().all(|&f| c[f] == row[f]))
            .map(|(_, y)| *y)
            .collect();
        ys.iter().sum::<f64>() / ys.len() as f64
    };
    let mut ss = 0.0;
    for row in &d.cells {
        let mut effect = 0.0;
        for mask in 0..(1usize << term.len()) {
            let sub: Vec<usize> = (0..term.len()).filter(|i| mask & (1 << i) != 0).map(|i| term[i]).collect();
            let sign = if (term.len() - sub.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
            effect += sign * marginal(&sub, row);
        }
        ss += effect * effect;
    }
    ss
}

fn anova_oracle() -> Outcome {
    let names = ["a", "b", "c"];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_f = 0.0f64;
    let mut worst_p = 0.0f64;
    let mut designs = 0;
    for levels in [vec![2], vec![3], vec![2, 3], vec![3, 3], vec![2, 2, 3], vec![3, 3, 3]] {
        for _ in 0..3 {
            let d = balanced_design(&levels, 5, &mut rng);
            let mut data = AnovaData::new(d.y.clone());
            for (f, _) in levels.iter().enumerate() {
                let values: Vec<String> = d.cells.iter().map(|c| format!("L{}", c[f])).collect();
                data = data.with_factor(names[f], &values).map_err(|e| e.to_string())?;
            }
            let terms: Vec<Vec<usize>> = subsets(levels.len());
            let model: Vec<Term> = terms.iter().map(|t| Term(t.iter().map(|&f| names[f].to_string()).collect())).collect();
            let fit = fit_anova(&data, &model).map_err(|e| e.to_string())?;
            let cells: usize = levels.iter().product();
            let n = d.y.len();
            let grand = d.y.iter().sum::<f64>() / n as f64;
            let total: f64 = d.y.iter().map(|y| (y - grand).powi(2)).sum();
            let sse = total - terms.iter().map(|t| brute_force_ss(&d, t)).sum::<f64>();
            let dfe = n - cells;
            ensure!(fit.residual_df == dfe, "residual df {} vs {dfe}", fit.residual_df);
            let decomposed: f64 = fit.rows.iter().map(|r| r.ss).sum::<f64>() + fit.residual_ss;
            ensure!(((decomposed - total) / total).abs() < 1e-8, "SS do not add up: {decomposed} vs {total}");
            ensure!(((fit.r_squared - (1.0 - sse / total)) / fit.r_squared).abs() < 1e-8, "R² mismatch");
            for (t, row) in terms.iter().zip(&fit.rows) {
                let df: usize = t.iter().map(|&f| d.levels[f] - 1).product();
                let ss = brute_force_ss(&d, t);
                let f = (ss / df as f64) / (sse / dfe as f64);
                let rel = ((row.f - f) / f).abs();
                worst_f = worst_f.max(rel);
                ensure!(row.df == df && rel < 1e-8, "{}: F {} vs brute force {f}", row.term, row.f);
                let p = 1.0 - FisherSnedecor::new(df as f64, dfe as f64).unwrap().cdf(f);
                worst_p = worst_p.max((row.p - p).abs());
                ensure!((row.p - p).abs() < 1e-9, "{}: p {} vs {p}", row.term, row.p);
            }
            designs += 1;
        }
    }

    // F(1, ·) = t² on a binary factor: one-way designs of uneven sizes and
    // a balanced two-way design with a binary factor.
    let mut worst_t = 0.0f64;
    for trial in 0..20 {
        let (na, nb) = (rng.gen_range(2..12), rng.gen_range(2..12));
        let y: Vec<f64> = (0..na + nb).map(|i| rng.gen_range(0.0..5.0) + if i < na { 1.0 } else { 0.0 }).collect();
        let g: Vec<&str> = (0..na + nb).map(|i| if i < na { "x" } else { "y" }).collect();
        let mut data = AnovaData::new(y).with_factor("g", &g).map_err(|e| e.to_string())?;
        let mut terms = vec![Term::main("g")];
        if trial % 2 != 0 {
            let d = balanced_design(&[2, 3], 5, &mut rng);
            let a: Vec<String> = d.cells.iter().map(|c| format!("L{}", c[0])).collect();
            let b: Vec<String> = d.cells.iter().map(|c| format!("L{}", c[1])).collect();
            data = AnovaData::new(d.y).with_factor("g", &a).unwrap().with_factor("h", &b).unwrap();
            terms.push(Term::main("h"));
        }
        let fit = fit_anova(&data, &terms).map_err(|e| e.to_string())?;
        let t = posthoc_t(&data, "g", &[], &fit).map_err(|e| e.to_string())?[0].t;
        let f = fit.row("g").unwrap().f;
        let rel = ((t * t - f) / f).abs();
        worst_t = worst_t.max(rel);
        ensure!(rel < 1e-12, "t² = {} but F = {f}", t * t);
        let p = f_survival(f, 1.0, fit.residual_df as f64);
        ensure!((p - fit.row("g").unwrap().p).abs() < 1e-15, "F and t p-values disagree");
    }
    Ok(format!(
        "{designs} balanced designs: worst F rel. error {worst_f:.1e}, worst p abs. error {worst_p:.1e}; t² = F within {worst_t:.1e}"
    ))
}

fn alignment_improvement() -> Outcome {
    let dir = fixtures().join("amr_alignment");
    let gold = read_amr_corpus(&fs::read_to_string(dir.join("gold.amr")).unwrap()).map_err(|e| e.to_string())?;
    let base = read_alignment_file(&dir.join("base_alignments.json")).map_err(|e| e.to_string())?;
    ensure!(gold.len() >= 30, "only {} fixture graphs", gold.len());
    let config = AlignmentConfig::default();
    let lemmatizer = RuleLemmatizer;
    let empty = BTreeMap::new();
    let mut realigned = BTreeMap::new();
    let (mut added, mut correct) = (0usize, 0usize);
    for (id, g) in &gold {
        let mut stripped = g.clone();
        stripped.alignments.clear();
        let b = base.get(id).unwrap_or(&empty);
        let out = realign(&stripped, &g.tokens, b, &lemmatizer, &config);
        ensure!(
            realign(&stripped, &g.tokens, &out, &lemmatizer, &config) == out,
            "{id}: second pass changed the alignments"
        );
        for (node, toks) in &out {
            if b.contains_key(node) {
                continue;
            }
            if lemma_match(&g.nodes[*node].label, &g.tokens, &lemmatizer).len() > 1 {
                continue;
            }
            let want: BTreeSet<usize> = g.alignments.get(node).cloned().unwrap_or_default();
            added += toks.len();
            correct += toks.intersection(&want).count();
        }
        realigned.insert(id.clone(), (stripped, out));
    }
    let before = coverage_report(
        realigned.iter().map(|(id, (g, _))| (id.as_str(), g, base.get(id).unwrap_or(&empty))),
        &config,
    );
    let after = coverage_report(realigned.iter().map(|(id, (g, a))| (id.as_str(), g, a)), &config);
    let gold_cov = coverage_report(gold.iter().map(|(id, g)| (id.as_str(), g, &g.alignments)), &config);
    ensure!(
        after.aligned_fraction() > before.aligned_fraction(),
        "coverage did not increase: {:.3} -> {:.3}",
        before.aligned_fraction(),
        after.aligned_fraction()
    );
    ensure!(added > 0, "nothing added on the unambiguous subset");
    let precision = correct as f64 / added as f64;
    ensure!(precision >= 0.9, "precision {precision:.3} on the unambiguous subset");
    Ok(format!(
        "{} graphs, {} alignable triples: aligned {:.1}% -> {:.1}% (gold {:.1}%); precision {:.3} over {added} new token links; idempotent",
        gold.len(),
        after.total_alignable,
        100.0 * before.aligned_fraction(),
        100.0 * after.aligned_fraction(),
        100.0 * gold_cov.aligned_fraction(),
        precision
    ))
}

fn learnability_separation() -> Outcome {
    let spec = tiny_spec(16);
    let adapter = TinyAdapter::new(&spec).unwrap();
    let train = TrainConfig {
        learning_rate: 1e-2,
        batch_size: 8,
        ..TrainConfig::default()
    };
    let mut scores: BTreeMap<GraphMode, Vec<f64>> = BTreeMap::new();
    for seed in 0..3u64 {
        let ds = graph_decodable_task(200, 100 + seed).into_grid_dataset("graph-task", 0.6, 0.2);
        for mode in [GraphMode::None, GraphMode::Dependency, GraphMode::Amr] {
            let graphs = match mode {
                GraphMode::None => None,
                GraphMode::Dependency => Some(&ds.dependency_graphs),
                GraphMode::Amr => Some(&ds.amr_graphs),
            };
            let vocab = graphs.map(|g| relation_vocabulary(g.values())).unwrap_or_default();
            let config = ClassifierConfig::new(spec.clone(), ds.schema.num_classes(), mode, vocab);
            let prep = |xs: &[RelationInstance]| prepare_all(xs, graphs, &ds.schema, &adapter, &config);
            let (tr, dv, te) = (prep(&ds.train), prep(&ds.dev), prep(&ds.test));
            let model = Classifier::new(config.clone(), seed).unwrap();
            let (best, _) = train_until_early_stop(model, &tr, &dv, &train, seed).map_err(|e| e.to_string())?;
            scores.entry(mode).or_default().push(evaluate(&best, &te).map_err(|e| e.to_string())?);
        }
    }
    let mean = |m: GraphMode| scores[&m].iter().sum::<f64>() / scores[&m].len() as f64;
    let (base, dep, amr) = (mean(GraphMode::None), mean(GraphMode::Dependency), mean(GraphMode::Amr));
    ensure!(dep - base >= 10.0, "dependency {dep:.1} vs baseline {base:.1}");
    ensure!(amr - base >= 10.0, "AMR {amr:.1} vs baseline {base:.1}");
    Ok(format!(
        "mean test macro-F1 over 3 seeds: baseline {base:.1}, +Dep {dep:.1} (+{:.1}), +AMR {amr:.1} (+{:.1})",
        dep - base,
        amr - base
    ))
}

fn markdown_rows(table: &str) -> usize {
    table.lines().skip(2).filter(|l| l.starts_with('|')).count()
}

fn is_mean_std(cell: &str) -> bool {
    let Some((m, rest)) = cell.split_once(" (") else { return false };
    let s = rest.trim_end_matches(')');
    rest.ends_with(')') && [m, s].iter().all(|v| v.parse::<f64>().is_ok() && v.split_once('.').is_some_and(|(_, d)| d.len() == 1))
}

fn grid_bookkeeping() -> Outcome {
    let datasets = fixture_grid(&["alpha", "beta"], 60, 5);
    let spec = tiny_spec(12);
    let adapter = TinyAdapter::new(&spec).unwrap();
    let quick = |batch| TrainConfig {
        learning_rate: 1e-2,
        batch_size: batch,
        max_epochs: 12,
        patience: 3,
        ..TrainConfig::default()
    };
    let config = GridConfig {
        encoder: spec.clone(),
        cases: Case::ALL.to_vec(),
        ks: vec![1, 5],
        seeds: vec![0, 1],
        modes: vec![GridMode::InDomainFull, GridMode::FromScratchFewshot, GridMode::TransferFewshot],
        in_domain: quick(8),
        fewshot: quick(4),
        depth: 2,
        num_bases: None,
    };
    let expected = expected_record_count(datasets.len(), &config);
    ensure!(expected == 60, "expected count formula gives {expected}");

    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::open(dir.path()).map_err(|e| e.to_string())?;
    let mut fresh = 0;
    let records = run_grid(&datasets, &config, &adapter, &store, &mut |_| fresh += 1).map_err(|e| e.to_string())?;
    ensure!(records.len() == expected && fresh == expected, "{} records, {fresh} run", records.len());
    let stored = store.records().map_err(|e| e.to_string())?;
    let cells: HashSet<_> = stored.iter().map(RunRecord::cell).collect();
    ensure!(stored.len() == expected && cells.len() == expected, "store holds {} records", stored.len());

    let mut rerun = 0;
    let again = run_grid(&datasets, &config, &adapter, &store, &mut |_| rerun += 1).map_err(|e| e.to_string())?;
    ensure!(rerun == 0 && again == records, "a complete store re-ran {rerun} cells");

    // drop the tail of the store, as after an interruption
    let text = fs::read_to_string(store.records_path()).unwrap();
    let kept: Vec<&str> = text.lines().take(25).collect();
    fs::write(store.records_path(), kept.join("\n") + "\n").unwrap();
    let mut resumed = 0;
    run_grid(&datasets, &config, &adapter, &store, &mut |_| resumed += 1).map_err(|e| e.to_string())?;
    let stored = store.records().map_err(|e| e.to_string())?;
    let cells: HashSet<_> = stored.iter().map(RunRecord::cell).collect();
    ensure!(
        resumed == expected - 25 && stored.len() == expected && cells.len() == expected,
        "resume ran {resumed} cells, store has {} records ({} distinct)",
        stored.len(),
        cells.len()
    );

    let table = ResultsTable::from_records(&stored);
    let in_domain = table.in_domain_table();
    let fewshot = table.fewshot_table();
    let (case_diff, transfer_diff) = table.differences().map_err(|e| e.to_string())?;
    let diff = transfer_diff.format(&[]);
    ensure!(markdown_rows(&in_domain) == 6, "in-domain table:\n{in_domain}");
    ensure!(markdown_rows(&fewshot) == 12, "few-shot table:\n{fewshot}");
    ensure!(markdown_rows(&diff) == 6, "difference table:\n{diff}");
    ensure!(case_diff.cells.len() == 2 * (2 + 2 * 2 + 2 * 2), "{} case differences", case_diff.cells.len());
    let row = fewshot.lines().nth(2).unwrap();
    let cells: Vec<&str> = row.split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
    ensure!(cells.len() == 5 && is_mean_std(cells[3]) && is_mean_std(cells[4]), "few-shot row {row:?}");
    ensure!(diff.lines().nth(2).unwrap().split('|').nth(4).unwrap().trim().split_once('.').unwrap().1.len() == 2, "difference cells are not %.2f");
    let out = dir.path().join("analysis");
    let files = emit_plots(&stored, &out).map_err(|e| e.to_string())?;
    ensure!(files.plots.len() == 4 && files.tables.iter().all(|p| p.exists()), "emitted {:?}", files);
    Ok(format!(
        "{expected} records; rerun added 0; resume after truncation to 25 ran {resumed}; tables 6/12/6 rows, {} plots",
        files.plots.len()
    ))
}

fn published_tables() -> Outcome {
    let dir = fixtures().join("published");
    let fewshot = read_published_means(&dir.join("fewshot_means.csv")).map_err(|e| e.to_string())?;
    let in_domain = read_published_means(&dir.join("in_domain_means.csv")).map_err(|e| e.to_string())?;
    ensure!(fewshot.cells.len() == 162, "{} few-shot cells", fewshot.cells.len());
    let (_, transfer) = fewshot.differences().map_err(|e| e.to_string())?;

    let mut reader = csv::Reader::from_path(dir.join("transfer_differences.csv")).unwrap();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let case: Case = row[2].parse().unwrap();
        for (k, col) in [(5, 3), (10, 4)] {
            let published: f64 = row[col].parse().unwrap();
            let key = lingtransfer::analysis::CellKey {
                target: row[0].to_string(),
                source: row[1].to_string(),
                case,
                k: Shots::K(k),
            };
            let ours = transfer.cells.get(&key).ok_or(format!("no difference for {key}"))?;
            worst = worst.max((ours - published).abs());
            compared += 1;
        }
    }
    ensure!(compared == 36 && worst <= 0.1, "worst deviation {worst:.3} over {compared} cells");

    let t2 = in_domain.in_domain_table();
    let t3 = fewshot.fewshot_table();
    let t4 = transfer.format(&[5, 10]);
    ensure!(t2.contains("| EFGC | Baseline | 85.0 (0.8) |"), "in-domain table:\n{t2}");
    ensure!(t2.contains("| | +Dep | 88.4 (0.5) |") || t2.contains("|  | +Dep | 88.4 (0.5) |"), "in-domain table:\n{t2}");
    ensure!(t3.contains("| RISeC | From Scratch | Baseline | 18.6 (2.9) | 36.5 (3.2) | 48.3 (3.1) |"), "few-shot table:\n{t3}");
    ensure!(t4.contains("| RISeC | EFGC | Baseline | 5.50 | 5.40 |"), "difference table:\n{t4}");
    Ok(format!(
        "transfer-minus-scratch from published means matches all {compared} published differences within {worst:.2} \
         (inputs are rounded to 0.1); tables emitted in mean (std) and %.2f formats. \
         The published F1 values themselves come from full pretrained-encoder training on the original corpora and \
         are not reproduced here"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 zero-graph equivalence", Duration::from_secs(60), zero_graph_equivalence),
        ("2 gradient correctness", Duration::from_secs(60), gradient_check),
        ("3 sampler contract", Duration::from_secs(60), sampler_contract),
        ("4 macro-F1 oracle", Duration::from_secs(60), macro_f1_oracle),
        ("5 ANOVA oracle", Duration::from_secs(60), anova_oracle),
        ("6 alignment improvement", Duration::from_secs(60), alignment_improvement),
        ("7 learnability separation", Duration::from_secs(600), learnability_separation),
        ("8 grid bookkeeping", Duration::from_secs(900), grid_bookkeeping),
        ("9 published-table arithmetic", Duration::from_secs(60), published_tables),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > budget => Err(format!("took {elapsed:.1?}, budget {budget:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.1?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({elapsed:.1?}): {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
