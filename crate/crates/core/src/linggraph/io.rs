use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{
    build_dependency_graph, join_sentence_graphs, parse_conllu, read_amr_document, AmrGraph, Formalism, GraphError,
    LinguisticGraph, SentenceParse,
};
use crate::corpus::{tokenize_words, RelationInstance};

/// Graphs keyed by instance id.
pub type GraphFile = BTreeMap<String, LinguisticGraph>;

pub fn read_graph_file(path: &Path) -> Result<GraphFile, GraphError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| GraphError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_graph_file(path: &Path, graphs: &GraphFile) -> Result<(), GraphError> {
    fs::write(path, serde_json::to_string(graphs)?)?;
    Ok(())
}

enum DocumentParses {
    Dependency(Vec<SentenceParse>),
    Amr(Vec<(Option<AmrGraph>, Option<Vec<String>>)>),
}

fn load_parses(dir: &Path, doc: &str, formalism: Formalism) -> Result<Option<DocumentParses>, GraphError> {
    let path = match formalism {
        Formalism::Dependency => dir.join(format!("{doc}.conllu")),
        Formalism::Amr => dir.join(format!("{doc}.amr")),
    };
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path)?;
    Ok(Some(match formalism {
        Formalism::Dependency => DocumentParses::Dependency(parse_conllu(&text).map_err(|e| GraphError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?),
        Formalism::Amr => DocumentParses::Amr(
            read_amr_document(&text)
                .into_iter()
                .map(|(meta, g)| {
                    let words = match (meta.get("tok"), meta.get("snt")) {
                        (Some(t), _) => Some(t.split_whitespace().map(String::from).collect()),
                        (None, Some(s)) => Some(tokenize_words(s).into_iter().map(|t| t.text).collect()),
                        _ => None,
                    };
                    (g.ok(), words)
                })
                .collect(),
        ),
    }))
}

fn context_graph(parses: &DocumentParses, first: usize, last: usize) -> Option<LinguisticGraph> {
    match parses {
        DocumentParses::Dependency(sents) => {
            build_dependency_graph(sents.get(first..=last)?).ok().filter(|g| !g.parseless)
        }
        DocumentParses::Amr(blocks) => {
            let blocks = blocks.get(first..=last)?;
            let mut offset = 0;
            let mut graphs = Vec::new();
            let mut tokens = Vec::new();
            let mut all_tokenized = true;
            for (g, words) in blocks {
                if let Some(g) = g {
                    graphs.push(g.clone().into_sentence_graph(offset));
                }
                match words {
                    Some(w) => {
                        offset += w.len();
                        tokens.extend(w.iter().cloned());
                    }
                    None => all_tokenized = false,
                }
            }
            let mut joined = join_sentence_graphs(Formalism::Amr, &graphs).ok()?;
            if joined.parseless {
                return None;
            }
            if all_tokenized {
                joined.tokens = tokens;
            }
            Some(joined)
        }
    }
}

/// Build one context graph per instance from per-document parse files.
///
/// `dir` holds `{document}.conllu` (dependency) or `{document}.amr` (one
/// block per document sentence, in order, with `# ::tok` or `# ::snt`
/// metadata giving the words). An instance covers the sentences of its
/// `sent_range`. Instances whose document has no file, whose range is out
/// of bounds, or whose parses are all invalid get a parseless graph; the
/// second return value counts them.
pub fn graphs_from_parses(
    formalism: Formalism,
    instances: &[RelationInstance],
    dir: &Path,
) -> Result<(GraphFile, usize), GraphError> {
    let mut cache: BTreeMap<String, Option<DocumentParses>> = BTreeMap::new();
    let mut out = GraphFile::new();
    let mut parseless = 0;
    for inst in instances {
        let doc = inst.document_id().to_string();
        if !cache.contains_key(&doc) {
            let loaded = load_parses(dir, &doc, formalism)?;
            cache.insert(doc.clone(), loaded);
        }
        let graph = cache[&doc]
            .as_ref()
            .and_then(|p| context_graph(p, inst.sent_range.0, inst.sent_range.1));
        let graph = match graph {
            Some(g) => g,
            None => {
                parseless += 1;
                join_sentence_graphs(formalism, &[])?
            }
        };
        out.insert(inst.id.clone(), graph);
    }
    Ok((out, parseless))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linggraph::{join_sentence_graphs, read_amr_serialization, Formalism};

    #[test]
    fn graph_file_field_names() {
        let g = read_amr_serialization("(b / boil-01~e.0 :ARG1 (w / water))").unwrap().into_sentence_graph(0);
        let g = join_sentence_graphs(Formalism::Amr, &[g]).unwrap();
        let mut file = GraphFile::new();
        file.insert("doc#0".into(), g);
        let json = serde_json::to_value(&file).unwrap();
        let obj = &json["doc#0"];
        assert_eq!(obj["formalism"], "amr");
        assert_eq!(obj["nodes"][0]["kind"], "top");
        assert_eq!(obj["edges"][0]["rel"], ":top-link");
        assert!(obj["edges"][0]["src"].is_u64() && obj["edges"][0]["dst"].is_u64());
        assert_eq!(obj["alignments"]["1"][0], 0);
        assert_eq!(obj["parseless"], false);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graphs.json");
        write_graph_file(&path, &file).unwrap();
        assert_eq!(read_graph_file(&path).unwrap(), file);
    }

    fn instance(id: &str, range: (usize, usize)) -> RelationInstance {
        RelationInstance {
            id: id.into(),
            dataset: crate::corpus::Dataset::Fixture,
            context: String::new(),
            sent_range: range,
            e1_span: crate::corpus::Span::new(0, 1),
            e2_span: crate::corpus::Span::new(0, 1),
            label: "x".into(),
        }
    }

    #[test]
    fn parse_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("d1.conllu"),
            "1\tBoil\t_\t_\t_\t_\t0\troot\t_\t_\n2\twater\t_\t_\t_\t_\t1\tobj\t_\t_\n\n\
             1\tStir\t_\t_\t_\t_\t0\troot\t_\t_\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("d1.amr"),
            "# ::tok Boil water .\n(b / boil-01 :ARG1 (w / water))\n\n# ::tok Stir .\n(s / stir-01)\n",
        )
        .unwrap();
        let insts = vec![instance("d1#0", (0, 1)), instance("d2#0", (0, 0)), instance("d1#1", (1, 2))];

        let (deps, missing) = graphs_from_parses(Formalism::Dependency, &insts, dir.path()).unwrap();
        assert_eq!(missing, 2);
        assert_eq!(deps["d1#0"].num_nodes(), 4);
        assert_eq!(deps["d1#0"].tokens, vec!["Boil", "water", "Stir"]);
        assert!(deps["d2#0"].parseless && deps["d1#1"].parseless);

        let (amrs, _) = graphs_from_parses(Formalism::Amr, &insts, dir.path()).unwrap();
        let g = &amrs["d1#0"];
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.tokens.len(), 5);
        assert!(g.alignments.is_empty());
    }
}
