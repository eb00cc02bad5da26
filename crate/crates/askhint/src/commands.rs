//! Command implementations behind the CLI binary. Kept in the library so
//! integration tests can drive the exact code paths the binary runs.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::client::VlmClient;
use crate::compression::{
    agglomerative_cluster, average_class_embedding, cosine_similarity_matrix, load_compact_set,
    parse_compact_set, render_compression_metaprompt_with_budget, save_compact_set,
    ClassSimilarityMatrix, CompactPromptSet, Dendrogram, EmbeddingVector, ParseMode, StopRule,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    self, allocate_budget, config_fingerprint, report_from_verdicts, run_benchmark,
    run_cross_class, run_cross_dataset, run_granularity_study, run_question_count_ablation,
    AblationSelection, Summarizer, TransferSpec,
};
use crate::inference::{
    run_batch, verdicts_from_jsonl, verdicts_to_jsonl, write_text, PromptMode, PromptSet,
};
use crate::manifest::Manifest;
use crate::pool::{
    load_pool, parse_generated_pool, render_generation_metaprompt, save_pool, PromptPool,
};

// ---------------------------------------------------------------------------
// prompt-set loading

/// Loads a prompt set from a preset name or a file path, sniffing whether
/// the file is a pool or a compact set.
pub fn load_prompt_set(spec: &str) -> Result<PromptSet> {
    if let Ok(set) = crate::presets::compact_set_by_name(spec) {
        return Ok(PromptSet::Compact(set));
    }
    if let Ok(pool) = crate::presets::pool_by_name(spec) {
        return Ok(PromptSet::Pool(pool));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("read prompt set {}", path.display()), e))?;
    load_prompt_set_text(&text)
}

fn load_prompt_set_text(text: &str) -> Result<PromptSet> {
    let looks_compact = text
        .lines()
        .any(|l| l.starts_with("# origin:") || l.starts_with("@classes:") || l.starts_with("# compact"));
    if looks_compact {
        return Ok(PromptSet::Compact(load_compact_set(text)?));
    }
    match load_pool(text) {
        Ok(pool) => Ok(PromptSet::Pool(pool)),
        Err(pool_err) => load_compact_set(text)
            .map(PromptSet::Compact)
            .map_err(|_| pool_err),
    }
}

pub fn load_pool_file(spec: &str) -> Result<PromptPool> {
    if let Ok(pool) = crate::presets::pool_by_name(spec) {
        return Ok(pool);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::io(format!("read pool {spec}"), e))?;
    load_pool(&text)
}

fn load_manifest_resolved(path: &Path, frames_root: Option<&Path>) -> Result<Manifest> {
    let mut manifest = Manifest::load(path)?;
    let root = frames_root
        .map(Path::to_path_buf)
        .or_else(|| path.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    manifest.resolve_frames(&root)?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// embedding-path compression

/// Embedding-mode compression: embed questions, average per class, cluster
/// at `k`, then pick budgeted centroid-nearest questions per cluster.
/// Returns the compact set with its similarity matrix and dendrogram.
pub fn embedding_compact(
    pool: &PromptPool,
    embed: &dyn Fn(&[String]) -> Result<Vec<EmbeddingVector>>,
    k: usize,
    linkage: crate::compression::Linkage,
    budget: Option<usize>,
) -> Result<(CompactPromptSet, ClassSimilarityMatrix, Dendrogram)> {
    let texts: Vec<String> = {
        let mut seen = std::collections::HashSet::new();
        pool.flat_questions()
            .filter(|q| seen.insert(q.text.clone()))
            .map(|q| q.text.clone())
            .collect()
    };
    let vectors = embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(Error::Config(format!(
            "embedding backend returned {} vectors for {} texts",
            vectors.len(),
            texts.len()
        )));
    }
    let by_text: HashMap<String, EmbeddingVector> =
        texts.into_iter().zip(vectors).collect();
    let class_embeddings = average_class_embedding(pool, &by_text)?;
    let (matrix, assignment, dendrogram) = if class_embeddings.len() == 1 {
        // Pairwise similarity needs two classes; a single class is its own
        // cluster with an empty merge history.
        (
            ClassSimilarityMatrix {
                class_names: vec![class_embeddings[0].0.clone()],
                values: vec![vec![1.0]],
            },
            vec![0usize],
            Dendrogram { leaves: vec![class_embeddings[0].0.clone()], merges: Vec::new() },
        )
    } else {
        let matrix = cosine_similarity_matrix(&class_embeddings);
        let k = k.clamp(1, matrix.len());
        let (assignment, dendrogram) =
            agglomerative_cluster(&matrix, linkage, StopRule::NumClusters(k))?;
        (matrix, assignment, dendrogram)
    };

    // Per-cluster availability in cluster-label order.
    let n_clusters = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut available = vec![0usize; n_clusters];
    for (entry, &cluster) in pool.entries.iter().zip(&assignment) {
        available[cluster] += entry.questions.len();
    }
    let budget = budget.unwrap_or_else(|| {
        crate::config::CompressionCfg::default().per_group * n_clusters
    });
    let quotas = allocate_budget(budget, &available);
    let set = crate::compression::summarize_groups_by_centroid(
        pool,
        &class_embeddings,
        &by_text,
        &assignment,
        &quotas,
    )?;
    Ok((set, matrix, dendrogram))
}

/// Deterministic offline summarizer over the hash embedder (tests and the
/// oracle backend use this; budgets are met exactly while the pool allows).
pub fn embedding_compact_with_budget(
    pool: &PromptPool,
    embedder: &crate::client::HashEmbedder,
    budget: usize,
    k: usize,
) -> Result<CompactPromptSet> {
    let embed = |texts: &[String]| Ok(embedder.embed(texts));
    embedding_compact(pool, &embed, k, crate::compression::Linkage::Average, Some(budget))
        .map(|(set, _, _)| set)
}

/// Budgeted summarizer backed by the configured client: `vlm` mode renders
/// the compression meta-prompt and parses the reply, `embedding` mode runs
/// the deterministic pipeline over the client's embeddings.
pub fn summarizer_from_config<'a>(
    config: &'a RunConfig,
    client: &'a dyn VlmClient,
) -> Result<Box<Summarizer<'a>>> {
    match config.compression.mode.as_str() {
        "vlm" => Ok(Box::new(move |pool: &PromptPool, budget: usize| {
            let prompt = render_compression_metaprompt_with_budget(pool, Some(budget));
            let response = client
                .chat(&crate::client::ChatRequest {
                    model_id: config.backend.model_id().to_string(),
                    frames: Vec::new(),
                    prompt,
                    decoding: config.decoding.clone(),
                })
                .map_err(Error::Client)?;
            parse_compact_set(&response.text, ParseMode::Lenient)
        })),
        "embedding" => {
            let linkage = config.compression.linkage()?;
            let k = config.compression.k;
            Ok(Box::new(move |pool: &PromptPool, budget: usize| {
                let embed = |texts: &[String]| client.embed(texts).map_err(Error::Client);
                embedding_compact(pool, &embed, k, linkage, Some(budget)).map(|(set, _, _)| set)
            }))
        }
        other => Err(Error::Config(format!("unknown compression mode {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// commands

/// Renders the generation meta-prompt (or takes a recorded transcript),
/// parses the class-wise pool, and writes it with a JSON mirror. Prints
/// per-class question counts.
pub fn cmd_generate_pool(
    classes_path: &Path,
    config: &RunConfig,
    out: &Path,
    from_text: Option<&Path>,
    min_q: usize,
    max_q: usize,
) -> Result<()> {
    let classes_text = std::fs::read_to_string(classes_path)
        .map_err(|e| Error::io(format!("read classes {}", classes_path.display()), e))?;
    let classes: Vec<String> = classes_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    if classes.is_empty() {
        return Err(Error::EmptyClassList);
    }

    let transcript = match from_text {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("read transcript {}", path.display()), e))?,
        None => {
            let prompt = render_generation_metaprompt(&classes, min_q, max_q)?;
            let client = config.build_client(None)?;
            client
                .chat(&crate::client::ChatRequest {
                    model_id: config.backend.model_id().to_string(),
                    frames: Vec::new(),
                    prompt,
                    decoding: config.decoding.clone(),
                })
                .map_err(Error::Client)?
                .text
        }
    };
    let pool = parse_generated_pool(&transcript, &classes)?;
    write_text(out, &save_pool(&pool)?)?;
    write_text(
        &out.with_extension("json"),
        &serde_json::to_string_pretty(&pool).expect("pool serializes"),
    )?;
    for entry in &pool.entries {
        println!("{}: {} questions", entry.class, entry.questions.len());
    }
    println!("pool -> {}", out.display());
    Ok(())
}

/// Compresses a pool into a compact set; always attempts the similarity
/// heatmap and dendrogram artifacts (integral in embedding mode, best-effort
/// in vlm mode when the backend embeds).
#[allow(clippy::too_many_arguments)]
pub fn cmd_compress(
    pool_path: &str,
    config: &RunConfig,
    out: &Path,
    mode_override: Option<&str>,
    k_override: Option<usize>,
    budget: Option<usize>,
    from_text: Option<&Path>,
    manifest_for_oracle: Option<&Path>,
) -> Result<()> {
    let pool = load_pool_file(pool_path)?;
    let mode = mode_override.unwrap_or(&config.compression.mode);
    let k = k_override.unwrap_or(config.compression.k);
    let manifest = match manifest_for_oracle {
        Some(path) => Some(Manifest::load(path)?),
        None => None,
    };
    let client = config.build_client(manifest.as_ref())?;

    let mut artifacts: Option<(ClassSimilarityMatrix, Dendrogram)> = None;
    let set = match (mode, from_text) {
        ("vlm", Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(format!("read transcript {}", path.display()), e))?;
            let parse_mode = if config.compression.strict {
                ParseMode::Strict
            } else {
                ParseMode::Lenient
            };
            parse_compact_set(&text, parse_mode)?
        }
        ("vlm", None) => {
            let prompt = render_compression_metaprompt_with_budget(&pool, budget);
            let response = client
                .chat(&crate::client::ChatRequest {
                    model_id: config.backend.model_id().to_string(),
                    frames: Vec::new(),
                    prompt,
                    decoding: config.decoding.clone(),
                })
                .map_err(Error::Client)?;
            let parse_mode = if config.compression.strict {
                ParseMode::Strict
            } else {
                ParseMode::Lenient
            };
            parse_compact_set(&response.text, parse_mode)?
        }
        ("embedding", _) => {
            let embed = |texts: &[String]| client.embed(texts).map_err(Error::Client);
            let (set, matrix, dendrogram) =
                embedding_compact(&pool, &embed, k, config.compression.linkage()?, budget)?;
            artifacts = Some((matrix, dendrogram));
            set
        }
        (other, _) => return Err(Error::Config(format!("unknown compression mode {other:?}"))),
    };

    if artifacts.is_none() {
        // vlm path: embeddings are only for the exported artifacts.
        let embed = |texts: &[String]| client.embed(texts).map_err(Error::Client);
        match embedding_compact(&pool, &embed, k, config.compression.linkage()?, None) {
            Ok((_, matrix, dendrogram)) => artifacts = Some((matrix, dendrogram)),
            Err(e) => eprintln!("[warn] skipping similarity artifacts: {e}"),
        }
    }

    write_text(out, &save_compact_set(&set)?)?;
    write_text(
        &out.with_extension("json"),
        &serde_json::to_string_pretty(&set).expect("set serializes"),
    )?;
    if let Some((matrix, dendrogram)) = artifacts {
        let stem = out.with_extension("");
        let stem = stem.to_string_lossy();
        write_text(Path::new(&format!("{stem}_heatmap.csv")), &matrix.to_csv())?;
        write_text(Path::new(&format!("{stem}_dendrogram.json")), &dendrogram.to_json())?;
        write_text(
            Path::new(&format!("{stem}_dendrogram.newick")),
            &format!("{}\n", dendrogram.to_newick()),
        )?;
    }
    println!(
        "compact set: {} groups, {} questions -> {}",
        set.groups.len(),
        set.total_questions(),
        out.display()
    );
    Ok(())
}

/// Infers every manifest video and writes verdicts JSONL.
pub fn cmd_infer(
    manifest_path: &Path,
    frames_root: Option<&Path>,
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    let manifest = load_manifest_resolved(manifest_path, frames_root)?;
    let mode = PromptMode::parse(&config.mode)?;
    let set = prompt_set_for_mode(config, &mode)?;
    let client = config.build_client(Some(&manifest))?;
    let infer_config = config.infer_config()?;
    let verdicts = run_batch(client.as_ref(), &manifest, &mode, &set, &infer_config);
    write_text(out, &verdicts_to_jsonl(&verdicts))?;
    let failed = verdicts
        .iter()
        .filter(|v| v.parse_status == crate::inference::ParseStatus::Failed)
        .count();
    println!("{} verdicts -> {} ({failed} failed parses)", verdicts.len(), out.display());
    Ok(())
}

fn prompt_set_for_mode(config: &RunConfig, mode: &PromptMode) -> Result<PromptSet> {
    let spec = config.prompt_set.as_deref().unwrap_or(match mode {
        PromptMode::FullPool => "ucf_crime_q",
        _ => "ucf_crime_qstar",
    });
    load_prompt_set(spec)
}

/// Scores a verdicts file against a manifest; writes the report JSON and an
/// aligned text table, and prints the table.
pub fn cmd_evaluate(
    verdicts_path: &Path,
    manifest_path: &Path,
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    let text = std::fs::read_to_string(verdicts_path)
        .map_err(|e| Error::io(format!("read verdicts {}", verdicts_path.display()), e))?;
    let verdicts = verdicts_from_jsonl(&text)?;
    let manifest = Manifest::load(manifest_path)?;
    let mode = PromptMode::parse(&config.mode)?;
    let set = prompt_set_for_mode(config, &mode)?;
    let report = report_from_verdicts(
        verdicts,
        &manifest,
        &set,
        &mode,
        &config.infer_config()?,
        config.seed,
    )?;
    write_text(out, &report.to_json())?;
    write_text(&out.with_extension("txt"), &report.to_text_table())?;
    print!("{}", report.to_text_table());
    Ok(())
}

/// Question-count ablation over both selection strategies; emits the
/// combined budget table as CSV plus raw rows as JSON.
pub fn cmd_ablate(
    pool_path: &str,
    counts: &[usize],
    manifest_path: &Path,
    frames_root: Option<&Path>,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<()> {
    let pool = load_pool_file(pool_path)?;
    let manifest = load_manifest_resolved(manifest_path, frames_root)?;
    let client = config.build_client(Some(&manifest))?;
    let infer_config = config.infer_config()?;
    let summarize = summarizer_from_config(config, client.as_ref())?;
    let askhint_rows = run_question_count_ablation(
        client.as_ref(),
        &pool,
        counts,
        AblationSelection::Summarized(summarize.as_ref()),
        &manifest,
        &infer_config,
        config.seed,
    )?;
    let random_rows = run_question_count_ablation(
        client.as_ref(),
        &pool,
        counts,
        AblationSelection::Random { seed: config.seed },
        &manifest,
        &infer_config,
        config.seed,
    )?;
    let csv = evaluation::ablation_csv(&askhint_rows, &random_rows);
    write_text(&out_dir.join("question_count_ablation.csv"), &csv)?;
    let mut all_rows = askhint_rows;
    all_rows.extend(random_rows);
    write_text(
        &out_dir.join("question_count_ablation.json"),
        &serde_json::to_string_pretty(&all_rows).expect("rows serialize"),
    )?;
    print!("{csv}");
    Ok(())
}

/// Cross-dataset transfer: evaluate the target manifest with the source
/// dataset's compact set.
#[allow(clippy::too_many_arguments)]
pub fn cmd_transfer_dataset(
    source_name: &str,
    source_set: &str,
    target_name: &str,
    target_manifest: &Path,
    frames_root: Option<&Path>,
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    let set = match load_prompt_set(source_set)? {
        PromptSet::Compact(set) => set,
        PromptSet::Pool(_) => {
            return Err(Error::Config(
                "cross-dataset transfer needs a compact set as the prompt source".into(),
            ))
        }
    };
    let manifest = load_manifest_resolved(target_manifest, frames_root)?;
    let client = config.build_client(Some(&manifest))?;
    let mut manifests = HashMap::new();
    manifests.insert(target_name.to_string(), manifest);
    let mut promptsets = HashMap::new();
    promptsets.insert(source_name.to_string(), set);
    let spec = TransferSpec {
        prompt_source: source_name.to_string(),
        eval_target: target_name.to_string(),
        seen_classes: None,
    };
    let transfer = run_cross_dataset(
        client.as_ref(),
        &spec,
        &manifests,
        &promptsets,
        &config.infer_config()?,
        config.seed,
    )?;
    write_text(out, &serde_json::to_string_pretty(&transfer).expect("serializes"))?;
    let csv = evaluation::transfer_csv(std::slice::from_ref(&transfer));
    write_text(&out.with_extension("csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

/// Cross-class transfer with the abstract baseline column.
pub fn cmd_transfer_class(
    manifest_path: &Path,
    frames_root: Option<&Path>,
    pool_path: &str,
    seen: &[String],
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    let pool = load_pool_file(pool_path)?;
    let manifest = load_manifest_resolved(manifest_path, frames_root)?;
    let client = config.build_client(Some(&manifest))?;
    let infer_config = config.infer_config()?;
    let summarize = summarizer_from_config(config, client.as_ref())?;
    let askhint = run_cross_class(
        client.as_ref(),
        &manifest,
        seen,
        &pool,
        summarize.as_ref(),
        &infer_config,
        config.seed,
    )?;

    // Abstract baseline on the same split for the comparison column.
    let abstract_report = run_benchmark(
        client.as_ref(),
        &manifest,
        &PromptMode::Abstract,
        &PromptSet::Pool(pool.clone()),
        &infer_config,
        config.seed,
    )?;
    let abstract_cc = split_accuracies(&manifest, &abstract_report, seen);

    let csv = evaluation::cross_class_csv(&[("askhint", &askhint), ("abstract", &abstract_cc)]);
    write_text(out, &serde_json::to_string_pretty(&askhint).expect("serializes"))?;
    write_text(&out.with_extension("csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn split_accuracies(
    manifest: &Manifest,
    report: &evaluation::EvalReport,
    seen: &[String],
) -> evaluation::CrossClassReport {
    let seen_keys: std::collections::HashSet<String> =
        seen.iter().map(|c| crate::pool::class_key(c)).collect();
    let mut seen_counts = (0usize, 0usize);
    let mut unseen_counts = (0usize, 0usize);
    for (record, verdict) in manifest.records.iter().zip(&report.per_video) {
        if record.label != crate::manifest::Label::Abnormal {
            continue;
        }
        let bucket = if seen_keys.contains(&crate::pool::class_key(&record.class_name)) {
            &mut seen_counts
        } else {
            &mut unseen_counts
        };
        bucket.1 += 1;
        if verdict.decision == crate::inference::Decision::Abnormal {
            bucket.0 += 1;
        }
    }
    let ratio = |(h, t): (usize, usize)| (t > 0).then(|| h as f64 / t as f64);
    evaluation::CrossClassReport {
        seen_classes: seen.to_vec(),
        all_auc: report.auc,
        seen_acc: ratio(seen_counts),
        unseen_acc: ratio(unseen_counts),
        report: report.clone(),
    }
}

/// Prompt-granularity study; emits the per-class (mode, AUC, accuracy)
/// table.
pub fn cmd_granularity(
    manifest_path: &Path,
    frames_root: Option<&Path>,
    pool_path: &str,
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    let pool = load_pool_file(pool_path)?;
    let manifest = load_manifest_resolved(manifest_path, frames_root)?;
    let client = config.build_client(Some(&manifest))?;
    let rows = run_granularity_study(
        client.as_ref(),
        &manifest,
        &pool,
        &config.infer_config()?,
        config.seed,
    )?;
    let csv = evaluation::granularity_csv(&rows);
    write_text(out, &serde_json::to_string_pretty(&rows).expect("serializes"))?;
    write_text(&out.with_extension("csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

/// Resolves the documented seen-class preset or a comma-separated list.
pub fn parse_seen_classes(spec: &str) -> Vec<String> {
    match spec.to_lowercase().as_str() {
        "ucf" | "ucf_seen" | "preset" => crate::presets::UCF_SEEN_CLASSES
            .iter()
            .map(|s| s.to_string())
            .collect(),
        _ => spec
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
    }
}

/// Fingerprint passthrough for scripting.
pub fn print_fingerprint(config: &RunConfig) -> Result<()> {
    let mode = PromptMode::parse(&config.mode)?;
    let set = prompt_set_for_mode(config, &mode)?;
    println!(
        "{}",
        config_fingerprint(&set, &mode, &config.infer_config()?, config.seed)
    );
    Ok(())
}
