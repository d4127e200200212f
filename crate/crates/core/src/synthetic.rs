//! Generated relation tasks with controllable text and graph signal.
//!
//! Every instance is one sentence of filler words with two entity words.
//! Both a dependency tree and an AMR-style graph are built over the words;
//! the edge joining the entities can carry a label-specific relation, and
//! the text can carry a label keyword. Used for the learnability and grid
//! fixtures.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, LabelSchema, RelationInstance, Span};
use crate::fewshot::GridDataset;
use crate::linggraph::{
    build_dependency_graph, join_sentence_graphs, Formalism, GraphFile, GraphNode, LinguisticGraph, NodeKind,
    SentenceParse, TypedEdge,
};

const FILLER: &[&str] = &[
    "then", "the", "a", "was", "slowly", "into", "with", "over", "after", "sample", "mixture", "bowl", "layer",
    "until", "gently", "small", "warm", "under", "flask", "batch", "top", "side", "fresh", "clean",
];

const ENTITIES: &[&str] = &["flour", "water", "powder", "oven", "sugar", "pan", "solvent", "film"];

const KEYWORDS: &[&str] = &["heat", "stir", "pour", "cool", "bake", "drain", "press", "rinse"];

/// Where the label is visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TextSignal {
    None,
    /// The first entity word identifies the label.
    EntityKeyword,
    /// A label keyword appears in the sentence with this probability.
    Trigger(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    pub num_labels: usize,
    pub text: TextSignal,
    /// Label the entity-to-entity edge with a label-specific relation.
    pub graph: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    pub schema: LabelSchema,
    pub instances: Vec<RelationInstance>,
    pub dependency_graphs: GraphFile,
    pub amr_graphs: GraphFile,
}

fn label_name(k: usize) -> String {
    format!("rel{k}")
}

fn char_span(words: &[String], w: usize) -> Span {
    let start: usize = words[..w].iter().map(|x| x.chars().count() + 1).sum();
    Span::new(start, start + words[w].chars().count())
}

struct Sentence {
    words: Vec<String>,
    heads: Vec<usize>,
    labels: Vec<usize>,
    e1: usize,
    e2: usize,
}

fn sentence(rng: &mut ChaCha8Rng, label: usize, spec: &TaskSpec) -> Sentence {
    let n = rng.gen_range(6..=10);
    let mut words: Vec<String> = (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect();
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    let (e1, e2) = (slots[0], slots[1]);
    words[e1] = match spec.text {
        TextSignal::EntityKeyword => KEYWORDS[label % KEYWORDS.len()].to_string(),
        _ => ENTITIES.choose(rng).unwrap().to_string(),
    };
    words[e2] = ENTITIES.choose(rng).unwrap().to_string();
    if let TextSignal::Trigger(p) = spec.text {
        if n > 2 && rng.gen_bool(p) {
            words[slots[2]] = KEYWORDS[label % KEYWORDS.len()].to_string();
        }
    }
    // tree rooted at e1 with e2 attached directly to it
    let mut heads = vec![0usize; n];
    let mut labels = vec![usize::MAX; n];
    heads[e2] = e1 + 1;
    labels[e2] = if spec.graph { label } else { usize::MAX };
    let mut attached = vec![e1, e2];
    for &w in &slots[2..] {
        let h = *attached.choose(rng).unwrap();
        heads[w] = h + 1;
        attached.push(w);
    }
    Sentence {
        words,
        heads,
        labels,
        e1,
        e2,
    }
}

fn dependency_graph(s: &Sentence) -> LinguisticGraph {
    let labels = (0..s.words.len())
        .map(|w| match (s.heads[w], s.labels[w]) {
            (0, _) => "root".to_string(),
            (_, usize::MAX) => "dep".to_string(),
            (_, l) => format!("rel:{l}"),
        })
        .collect();
    build_dependency_graph(&[SentenceParse {
        words: s.words.clone(),
        heads: s.heads.clone(),
        labels,
    }])
    .expect("generated trees are well formed")
}

fn amr_graph(rng: &mut ChaCha8Rng, s: &Sentence) -> LinguisticGraph {
    let mut g = LinguisticGraph::empty(Formalism::Amr);
    for (i, w) in s.words.iter().enumerate() {
        g.nodes.push(GraphNode {
            id: i,
            label: w.clone(),
            kind: NodeKind::Concept,
        });
        if i == s.e1 || i == s.e2 || rng.gen_bool(0.8) {
            g.alignments.insert(i, BTreeSet::from([i]));
        }
        match s.heads[i] {
            0 => g.roots.push(i),
            h => g.edges.push(TypedEdge {
                src: h - 1,
                dst: i,
                rel: match s.labels[i] {
                    usize::MAX => ":mod".to_string(),
                    l => format!(":ARG{l}"),
                },
            }),
        }
    }
    let mut joined = join_sentence_graphs(Formalism::Amr, &[g]).expect("single sentence graph");
    joined.tokens = s.words.clone();
    joined
}

/// `n` instances with labels assigned round-robin, ids `{prefix}{i}#0`.
pub fn generate_task(prefix: &str, n: usize, spec: TaskSpec, seed: u64) -> SyntheticTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = LabelSchema::new(prefix, (0..spec.num_labels).map(label_name).collect());
    let mut task = SyntheticTask {
        schema,
        instances: Vec::with_capacity(n),
        dependency_graphs: GraphFile::new(),
        amr_graphs: GraphFile::new(),
    };
    for i in 0..n {
        let label = i % spec.num_labels;
        let s = sentence(&mut rng, label, &spec);
        let id = format!("{prefix}{i}#0");
        task.instances.push(RelationInstance {
            id: id.clone(),
            dataset: Dataset::Fixture,
            context: s.words.join(" "),
            sent_range: (0, 0),
            e1_span: char_span(&s.words, s.e1),
            e2_span: char_span(&s.words, s.e2),
            label: label_name(label),
        });
        task.dependency_graphs.insert(id.clone(), dependency_graph(&s));
        task.amr_graphs.insert(id, amr_graph(&mut rng, &s));
    }
    task
}

/// Labels recoverable only from the relation on the entity-to-entity edge.
pub fn graph_decodable_task(n: usize, seed: u64) -> SyntheticTask {
    generate_task(
        "graph",
        n,
        TaskSpec {
            num_labels: 3,
            text: TextSignal::None,
            graph: true,
        },
        seed,
    )
}

/// Labels recoverable from the first entity's word; graphs carry nothing.
pub fn keyword_task(n: usize, seed: u64) -> SyntheticTask {
    generate_task(
        "keyword",
        n,
        TaskSpec {
            num_labels: 3,
            text: TextSignal::EntityKeyword,
            graph: false,
        },
        seed,
    )
}

impl SyntheticTask {
    /// Split in order into train/dev/test by the given fractions.
    pub fn into_grid_dataset(self, name: &str, train_frac: f64, dev_frac: f64) -> GridDataset {
        let n = self.instances.len();
        let a = (n as f64 * train_frac).round() as usize;
        let b = a + (n as f64 * dev_frac).round() as usize;
        let mut schema = self.schema;
        schema.dataset = name.to_string();
        GridDataset {
            name: name.to_string(),
            schema,
            train: self.instances[..a].to_vec(),
            dev: self.instances[a..b.min(n)].to_vec(),
            test: self.instances[b.min(n)..].to_vec(),
            dependency_graphs: self.dependency_graphs,
            amr_graphs: self.amr_graphs,
        }
    }
}

/// Small datasets for exercising the experiment grid: partly informative
/// text, graph-decodable labels, 3 then 4 then 5 ... classes.
pub fn fixture_grid(names: &[&str], per_dataset: usize, seed: u64) -> Vec<GridDataset> {
    names
        .iter()
        .enumerate()
        .map(|(d, name)| {
            let spec = TaskSpec {
                num_labels: 3 + d,
                text: TextSignal::Trigger(0.6),
                graph: true,
            };
            generate_task(&format!("{name}-"), per_dataset, spec, seed.wrapping_add(d as u64))
                .into_grid_dataset(name, 0.6, 0.2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::slice_chars;

    #[test]
    fn spans_and_graphs_line_up() {
        let t = graph_decodable_task(30, 1);
        for inst in &t.instances {
            assert!(ENTITIES.contains(&slice_chars(&inst.context, inst.e1_span)));
            assert!(ENTITIES.contains(&slice_chars(&inst.context, inst.e2_span)));
            let words = inst.context.split(' ').count();
            let dep = &t.dependency_graphs[&inst.id];
            dep.validate(Some(words)).unwrap();
            t.amr_graphs[&inst.id].validate(Some(words)).unwrap();
            let want = format!("rel:{}", &inst.label[3..]);
            assert_eq!(dep.edges.iter().filter(|e| e.rel == want).count(), 1);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(keyword_task(10, 4).instances, keyword_task(10, 4).instances);
    }

    #[test]
    fn grid_datasets() {
        let ds = fixture_grid(&["A", "B"], 40, 0);
        assert_eq!(ds[1].schema.num_classes(), 4);
        assert_eq!((ds[0].train.len(), ds[0].dev.len(), ds[0].test.len()), (24, 8, 8));
    }
}
