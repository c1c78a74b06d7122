use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use resumerag::config::AppConfig;
use resumerag::rag::{KnowledgeStore, SourceDocument};

use crate::inputs::{collect_files, file_stem, read_text};
use crate::{fail, ExitCode, Failure, IndexArgs, Outcome, EXIT_INPUT, EXIT_OK};

const DOC_EXTS: [&str; 3] = ["txt", "md", "json"];

/// A `.json` file holds one document object or an array of them; any other
/// file is a plain-text document whose id is the file stem.
fn read_documents(path: &Path) -> Result<Vec<SourceDocument>> {
    let text = read_text(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if !is_json {
        return Ok(vec![SourceDocument {
            doc_id: file_stem(path)?,
            title: String::new(),
            body: text,
            tags: Vec::new(),
        }]);
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed JSON", path.display()))?;
    let docs = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|d| vec![d])
    };
    docs.with_context(|| format!("{}: expected {{doc_id, title, body, tags}}", path.display()))
}

pub fn run(config: &AppConfig, args: &IndexArgs) -> Result<Outcome, Failure> {
    let store_path: PathBuf = args
        .store
        .clone()
        .unwrap_or_else(|| config.paths.store.clone());
    let files = collect_files(&args.paths, &DOC_EXTS).exit_code(EXIT_INPUT)?;

    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for f in &files {
        for doc in read_documents(f).exit_code(EXIT_INPUT)? {
            doc.validate()
                .with_context(|| format!("{}", f.display()))
                .exit_code(EXIT_INPUT)?;
            if !seen.insert(doc.doc_id.clone()) {
                return Err(fail(
                    EXIT_INPUT,
                    format!("{}: duplicate doc_id {:?}", f.display(), doc.doc_id),
                ));
            }
            docs.push((f, doc));
        }
    }

    let gateway = config.gateway().exit_code(EXIT_INPUT)?;
    let model_id = config.provider.embedding_model_id();
    let mut store = if args.append && store_path.exists() {
        let s = KnowledgeStore::load(&store_path).exit_code(EXIT_INPUT)?;
        if s.model_id() != model_id || s.dim() != gateway.dimension() {
            return Err(fail(
                EXIT_INPUT,
                format!(
                    "{} was built with {} ({} dims); the provider embeds with {} ({} dims)",
                    store_path.display(),
                    s.model_id(),
                    s.dim(),
                    model_id,
                    gateway.dimension()
                ),
            ));
        }
        s
    } else {
        KnowledgeStore::new(gateway.dimension(), model_id, config.retrieval)
            .exit_code(EXIT_INPUT)?
    };

    let index_all = |store: &mut KnowledgeStore| -> Result<Vec<(String, usize)>> {
        let mut counts = Vec::new();
        for (f, doc) in &docs {
            let n = store
                .index(&gateway, doc)
                .with_context(|| format!("indexing {}", f.display()))?;
            counts.push((doc.doc_id.clone(), n));
        }
        Ok(counts)
    };
    let counts = index_all(&mut store).exit_code(EXIT_INPUT)?;
    if store.is_empty() {
        return Err(fail(EXIT_INPUT, "no chunks were produced"));
    }
    store.save(&store_path).exit_code(EXIT_INPUT)?;

    for (doc_id, n) in &counts {
        println!("{doc_id}\t{n}");
    }
    println!(
        "indexed {} chunks from {} documents into {} ({} chunks total)",
        counts.iter().map(|(_, n)| n).sum::<usize>(),
        counts.len(),
        store_path.display(),
        store.len()
    );
    Ok(Outcome {
        code: EXIT_OK,
        stats: Some(gateway.stats()),
    })
}
