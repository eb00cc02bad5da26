//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria too.

use std::collections::HashSet;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use askhint::client::{AnswerStyle, ChatRequest, ChatResponse, ClientError, ScriptedOracle};
use askhint::commands;
use askhint::compression::{
    agglomerative_cluster, cophenetic_matrix, cosine_similarity_matrix, EmbeddingVector, Linkage,
    StopRule,
};
use askhint::config::RunConfig;
use askhint::evaluation::{compute_auc, config_fingerprint, mann_whitney_u, run_benchmark};
use askhint::inference::{
    parse_verdict, render_answer_line, sample_frame_indices, AnswerFormat, Decision, InferConfig,
    ParseStatus, PromptMode, PromptSet,
};
use askhint::testutil::{synthetic_manifest, synthetic_manifest_with_classes};

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: u32, description: &str, body: F) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("[PASS] criterion {number}: {description}"),
        Err(cause) => {
            println!("[FAIL] criterion {number}: {description}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0f64;
    let mut pairs = 0.0f64;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Random instance with deliberate tie mass: dyadic scores on a coarse grid.
fn random_instance(rng: &mut ChaCha20Rng, max_n: usize) -> (Vec<f64>, Vec<u8>) {
    let n = rng.random_range(2..=max_n);
    let grid = *[4usize, 8, 16, 64].choose(rng).unwrap();
    let scores: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..=grid) as f64 / grid as f64)
        .collect();
    let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
    labels[0] = 1;
    labels[n - 1] = 0;
    (scores, labels)
}

#[test]
fn criterion_1_auc_oracle_equivalence() {
    criterion(1, "rank-based AUC equals O(n^2) pair counting within 1e-12", || {
        let start = Instant::now();
        let mut rng = ChaCha20Rng::seed_from_u64(20240817);
        for case in 0..200 {
            let (scores, labels) = random_instance(&mut rng, 500);
            let fast = compute_auc(&scores, &labels).unwrap();
            let slow = brute_force_auc(&scores, &labels);
            assert!(
                (fast - slow).abs() < 1e-12,
                "case {case}: rank {fast} vs brute {slow}"
            );
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    });
}

#[test]
fn criterion_2_auc_boundary_suite() {
    criterion(2, "AUC boundaries and exact complement symmetry", || {
        // Perfect separation.
        let auc = compute_auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(auc, 1.0);
        // All tied.
        let auc = compute_auc(&[0.5; 6], &[1, 1, 1, 0, 0, 0]).unwrap();
        assert_eq!(auc, 0.5);
        // Complement symmetry on 1000 random cases. Dyadic scores keep the
        // transform s -> 1-s exact, so ties map to ties and the identity
        // AUC(s) + AUC(1-s) = 1 is checked exactly in the U domain
        // (u + u' == pairs); the divided form is additionally held to one
        // ulp, the tightest bound IEEE division permits for odd pair counts.
        let mut rng = ChaCha20Rng::seed_from_u64(31337);
        for case in 0..1000 {
            let (scores, labels) = random_instance(&mut rng, 200);
            let flipped: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
            let a = mann_whitney_u(&scores, &labels).unwrap();
            let b = mann_whitney_u(&flipped, &labels).unwrap();
            assert_eq!(a.u + b.u, a.pairs, "case {case}: U-domain identity");
            assert!(
                (a.auc() + b.auc() - 1.0).abs() <= f64::EPSILON,
                "case {case}: {} + {} != 1",
                a.auc(),
                b.auc()
            );
        }
    });
}

#[test]
fn criterion_3_analytic_end_to_end() {
    criterion(3, "scripted-oracle pipeline matches AUC = 1 - p analytically", || {
        let start = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let manifest = synthetic_manifest(dir.path(), 200, 200);
        let set = PromptSet::Compact(askhint::presets::ucf_crime_qstar());
        let config = InferConfig { concurrency: 8, ..InferConfig::default() };
        for (i, flip_p) in [0.0f64, 0.1, 0.25, 0.5].into_iter().enumerate() {
            let oracle = ScriptedOracle::new(&manifest, flip_p, 1000 + i as u64, AnswerStyle::Fig5);
            let report = run_benchmark(
                &oracle,
                &manifest,
                &PromptMode::AskHint,
                &set,
                &config,
                0,
            )
            .unwrap();
            let auc = report.auc.unwrap();
            let crime_acc = report.crime_acc.unwrap();
            // Binary scores against a flip-p oracle: AUC = 0.5 + A/(2 na)
            // - B/(2 nn) with A, B binomial, so E[AUC] = 1 - p and
            // SE = 0.5 sqrt(p (1-p) (1/na + 1/nn)).
            let se = 0.5 * (flip_p * (1.0 - flip_p) * (1.0 / 200.0 + 1.0 / 200.0)).sqrt();
            assert!(
                (auc - (1.0 - flip_p)).abs() <= 3.0 * se,
                "flip_p {flip_p}: AUC {auc} vs {} (3 SE = {})",
                1.0 - flip_p,
                3.0 * se
            );
            let sigma = (flip_p * (1.0 - flip_p) / 200.0).sqrt();
            assert!(
                (crime_acc - (1.0 - flip_p)).abs() <= 3.0 * sigma,
                "flip_p {flip_p}: crime_acc {crime_acc} (3 sigma = {})",
                3.0 * sigma
            );
            assert_eq!(report.failed_parses, 0);
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    });
}

#[test]
fn criterion_4_clustering_recovery() {
    criterion(4, "planted clusters recovered; ultrametrics reproduced exactly", || {
        // Three planted clusters: intra-cosine >= 0.95, inter <= 0.1.
        let axes: [[f64; 4]; 3] = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        let spec: [(&str, usize); 9] = [
            ("Arson", 0),
            ("Explosion", 0),
            ("Burglary", 1),
            ("Robbery", 1),
            ("Stealing", 1),
            ("Fighting", 2),
            ("Assault", 2),
            ("Abuse", 2),
            ("Shoplifting", 1),
        ];
        let mut rng = ChaCha20Rng::seed_from_u64(4040);
        let embeddings: Vec<(String, EmbeddingVector)> = spec
            .iter()
            .map(|(name, cluster)| {
                let mut v = axes[*cluster].to_vec();
                v[3] = rng.random_range(0.0..0.2);
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (
                    name.to_string(),
                    EmbeddingVector::new(v.into_iter().map(|x| x / norm).collect()),
                )
            })
            .collect();
        let truth: Vec<usize> = spec.iter().map(|(_, c)| *c).collect();
        let matrix = cosine_similarity_matrix(&embeddings);
        for i in 0..spec.len() {
            for j in (i + 1)..spec.len() {
                if truth[i] == truth[j] {
                    assert!(matrix.values[i][j] >= 0.95);
                } else {
                    assert!(matrix.values[i][j] <= 0.1);
                }
            }
        }
        let same_partition = |a: &[usize], b: &[usize]| -> bool {
            (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
        };
        let (assignment, _) =
            agglomerative_cluster(&matrix, Linkage::Average, StopRule::NumClusters(3)).unwrap();
        assert!(same_partition(&assignment, &truth), "exact recovery at k=3");

        // Permutation invariance up to relabeling.
        for shuffle_seed in 0..5u64 {
            let mut perm: Vec<usize> = (0..embeddings.len()).collect();
            perm.shuffle(&mut ChaCha20Rng::seed_from_u64(shuffle_seed));
            let shuffled: Vec<(String, EmbeddingVector)> =
                perm.iter().map(|&i| embeddings[i].clone()).collect();
            let (got, _) = agglomerative_cluster(
                &cosine_similarity_matrix(&shuffled),
                Linkage::Average,
                StopRule::NumClusters(3),
            )
            .unwrap();
            let mut unshuffled = vec![0usize; got.len()];
            for (pos, &orig) in perm.iter().enumerate() {
                unshuffled[orig] = got[pos];
            }
            assert!(same_partition(&unshuffled, &truth), "seed {shuffle_seed}");
        }

        // Ultrametric inputs (n <= 6): merge heights equal the input
        // cophenetic distances exactly, against a brute-force oracle.
        let mut rng = ChaCha20Rng::seed_from_u64(606);
        for trial in 0..50 {
            let n = rng.random_range(3..=6usize);
            let mut dist = vec![vec![0.0f64; n]; n];
            let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            let mut height = 0.0;
            while clusters.len() > 1 {
                height += rng.random_range(1..=8) as f64 / 256.0;
                let a = rng.random_range(0..clusters.len());
                let ca = clusters.swap_remove(a);
                let b = rng.random_range(0..clusters.len());
                let cb = clusters.swap_remove(b);
                for &i in &ca {
                    for &j in &cb {
                        dist[i][j] = height;
                        dist[j][i] = height;
                    }
                }
                let mut merged = ca;
                merged.extend(cb);
                clusters.push(merged);
            }
            let matrix = askhint::compression::ClassSimilarityMatrix {
                class_names: (0..n).map(|i| format!("C{i}")).collect(),
                values: dist
                    .iter()
                    .map(|row| row.iter().map(|d| 1.0 - d).collect())
                    .collect(),
            };
            let (_, dendrogram) =
                agglomerative_cluster(&matrix, Linkage::Average, StopRule::NumClusters(1)).unwrap();
            let cophenetic = cophenetic_matrix(&dendrogram);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(cophenetic[i][j], dist[i][j], "trial {trial} ({i},{j})");
                }
            }
        }
    });
}

#[test]
fn criterion_5_parser_conformance() {
    criterion(5, "answer grammar parses clean; fuzz recovers; no crashes", || {
        // Canonical grammar corpus: every arrow and case variant must parse
        // clean with the right decision and group.
        let groups = [
            "Violence or Harm to People",
            "Crimes Against Property",
            "Public Safety Incidents",
        ];
        let mut corpus: Vec<(String, Decision, Option<String>)> = vec![
            ("Normal Event. People walking in a mall.".into(), Decision::Normal, None),
            ("normal event. quiet intersection.".into(), Decision::Normal, None),
            ("NORMAL EVENT. Nothing of note.".into(), Decision::Normal, None),
            ("Abnormal Event. Something is burning.".into(), Decision::Abnormal, None),
        ];
        for group in groups {
            for arrow in ["→", "->", "-"] {
                for upper in [false, true] {
                    let head = if upper { "ABNORMAL EVENT" } else { "Abnormal Event" };
                    corpus.push((
                        format!("{head} {arrow} {group}. A short reason."),
                        Decision::Abnormal,
                        Some(group.to_string()),
                    ));
                }
            }
        }
        for (text, decision, group) in &corpus {
            let v = parse_verdict("v", text, AnswerFormat::Structured);
            assert_eq!(v.parse_status, ParseStatus::Clean, "{text:?}");
            assert_eq!(v.decision, *decision, "{text:?}");
            assert_eq!(
                v.group.as_ref().map(|g| g.to_lowercase()),
                group.as_ref().map(|g| g.to_lowercase()),
                "{text:?}"
            );
        }
        // Raw-JSON grammar.
        for (text, decision) in [
            (r#"{"final_label": "Yes"}"#, Decision::Abnormal),
            (r#"{"final_label": "no"}"#, Decision::Normal),
            (r#"{"final_label": "YES"}"#, Decision::Abnormal),
            (r#"{"final_label": "No"}"#, Decision::Normal),
            ("Analysis first.\n{\"final_label\": \"Yes\"}\nDone.", Decision::Abnormal),
        ] {
            let v = parse_verdict("v", text, AnswerFormat::JsonLabel);
            assert_eq!(v.parse_status, ParseStatus::Clean, "{text:?}");
            assert_eq!(v.decision, decision, "{text:?}");
        }

        // 500-case fuzz corpus: canonical answers wrapped in distractor
        // prose; >= 95% must parse clean or recovered.
        let filler = [
            "The footage begins with routine street traffic and pedestrians.",
            "Lighting conditions vary across the clip and the camera shakes.",
            "I examined each sampled image carefully before deciding.",
            "Several people enter and leave the field of view over time.",
            "Weather appears overcast; the timestamp overlay is unreadable.",
        ];
        let mut rng = ChaCha20Rng::seed_from_u64(777);
        let mut ok = 0usize;
        let total = 500usize;
        for _ in 0..total {
            let abnormal = rng.random_bool(0.5);
            let decision = if abnormal { Decision::Abnormal } else { Decision::Normal };
            let group = abnormal.then(|| *groups.choose(&mut rng).unwrap());
            let line = render_answer_line(decision, group, "Concise scripted reason.");
            let mut text = String::new();
            for _ in 0..rng.random_range(0..3) {
                text.push_str(filler.choose(&mut rng).unwrap());
                text.push('\n');
            }
            text.push_str(&line);
            text.push('\n');
            for _ in 0..rng.random_range(0..3) {
                text.push_str(filler.choose(&mut rng).unwrap());
                text.push('\n');
            }
            let v = parse_verdict("v", &text, AnswerFormat::Structured);
            if v.parse_status != ParseStatus::Failed && v.decision == decision {
                ok += 1;
            }
        }
        assert!(
            ok as f64 / total as f64 >= 0.95,
            "fuzz corpus: {ok}/{total} recovered-or-clean"
        );

        // Arbitrary byte strings never crash either grammar.
        let mut rng = ChaCha20Rng::seed_from_u64(888);
        for _ in 0..1000 {
            let len = rng.random_range(0..256);
            let bytes: Vec<u8> = (0..len).map(|_| rng.random::<u8>()).collect();
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_verdict("v", &text, AnswerFormat::Structured);
            let _ = parse_verdict("v", &text, AnswerFormat::JsonLabel);
        }
    });
}

#[test]
fn criterion_6_frame_sampling_properties() {
    criterion(6, "frame sampling invariants over (N, max, duration) grids", || {
        assert_eq!(InferConfig::default().max_frames, 128, "documented default");
        assert_eq!(RunConfig::default().max_frames, 128);
        let frame_counts = [1usize, 2, 3, 7, 50, 127, 128, 129, 300, 1000, 9000];
        let budgets = [1usize, 2, 8, 64, 128, 256];
        let fps_options = [None, Some(1.0f64), Some(10.0), Some(24.0), Some(30.0)];
        for &n in &frame_counts {
            for &max in &budgets {
                for &fps in &fps_options {
                    for duration in [None, fps.map(|f| n as f64 / f)] {
                        let indices = sample_frame_indices(n, fps, duration, max);
                        assert!(!indices.is_empty());
                        assert!(indices.windows(2).all(|w| w[0] < w[1]), "strictly increasing");
                        assert!(*indices.last().unwrap() < n);
                        // Short-video 1 fps exhaustion rule: when the
                        // 1 fps sequence fits the budget it is returned
                        // whole; otherwise exactly max indices spanning the
                        // full range.
                        let fps_eff = match (fps, duration) {
                            (Some(f), _) => f,
                            (None, Some(d)) if d > 0.0 => n as f64 / d,
                            _ => 1.0,
                        };
                        let one_fps = if fps_eff <= 1.0 {
                            n
                        } else {
                            (0..)
                                .map(|k| (k as f64 * fps_eff).round() as usize)
                                .take_while(|&i| i < n)
                                .collect::<HashSet<_>>()
                                .len()
                                .max(1)
                        };
                        if one_fps <= max {
                            assert_eq!(indices.len(), one_fps, "n={n} max={max} fps={fps:?}");
                        } else {
                            assert_eq!(indices.len(), max);
                            assert_eq!(indices[0], 0, "first endpoint");
                            if max >= 2 {
                                assert_eq!(*indices.last().unwrap(), n - 1, "last endpoint");
                            }
                        }
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_7_reproducibility() {
    criterion(7, "warm-cache reruns byte-identical; fingerprint sensitivity", || {
        let dir = tempfile::tempdir().unwrap();
        let manifest_dir = dir.path().join("data");
        let manifest = synthetic_manifest(&manifest_dir, 6, 6);
        let manifest_path = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest_path, manifest.to_jsonl()).unwrap();

        let config_json = serde_json::json!({
            "backend": {"kind": "oracle", "flip_p": 0.25},
            "seed": 5,
            "cache_dir": dir.path().join("cache"),
            "prompt_set": "ucf_crime_qstar",
            "concurrency": 3,
        });
        let config = RunConfig::parse(&config_json.to_string()).unwrap();

        let verdicts1 = dir.path().join("v1.jsonl");
        let verdicts2 = dir.path().join("v2.jsonl");
        commands::cmd_infer(&manifest_path, None, &config, &verdicts1).unwrap();
        commands::cmd_infer(&manifest_path, None, &config, &verdicts2).unwrap();
        let bytes1 = std::fs::read(&verdicts1).unwrap();
        let bytes2 = std::fs::read(&verdicts2).unwrap();
        assert!(!bytes1.is_empty());
        assert_eq!(bytes1, bytes2, "verdict JSONL must be byte-identical");

        let report1 = dir.path().join("r1.json");
        let report2 = dir.path().join("r2.json");
        commands::cmd_evaluate(&verdicts1, &manifest_path, &config, &report1).unwrap();
        commands::cmd_evaluate(&verdicts2, &manifest_path, &config, &report2).unwrap();
        assert_eq!(
            std::fs::read(&report1).unwrap(),
            std::fs::read(&report2).unwrap(),
            "report JSON must be byte-identical"
        );

        // Fingerprint changes when any conditioning input changes.
        let set = PromptSet::Compact(askhint::presets::ucf_crime_qstar());
        let infer = config.infer_config().unwrap();
        let base = config_fingerprint(&set, &PromptMode::AskHint, &infer, 5);
        assert_eq!(base, config_fingerprint(&set, &PromptMode::AskHint, &infer, 5));
        let variations = [
            config_fingerprint(
                &PromptSet::Compact(askhint::presets::xd_violence_qstar()),
                &PromptMode::AskHint,
                &infer,
                5,
            ),
            config_fingerprint(&set, &PromptMode::Abstract, &infer, 5),
            config_fingerprint(
                &set,
                &PromptMode::AskHint,
                &InferConfig { model_id: "other".into(), ..infer.clone() },
                5,
            ),
            config_fingerprint(
                &set,
                &PromptMode::AskHint,
                &InferConfig { max_frames: 8, ..infer.clone() },
                5,
            ),
            config_fingerprint(&set, &PromptMode::AskHint, &infer, 6),
        ];
        let mut unique: HashSet<String> = variations.iter().cloned().collect();
        unique.insert(base);
        assert_eq!(unique.len(), 6, "every varied input must change the hash");
    });
}

struct ModeSensitiveClient {
    oracle: ScriptedOracle,
}

impl askhint::client::VlmClient for ModeSensitiveClient {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        if request.prompt.contains("Task 1: Binary Decision") {
            self.oracle.chat(request)
        } else {
            Ok(ChatResponse {
                text: "Normal Event. No cue matched.".into(),
                abnormal_likelihood: None,
            })
        }
    }
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ClientError> {
        self.oracle.embed(texts)
    }
}

#[test]
fn criterion_8_harness_schemas() {
    criterion(8, "ablation/transfer/granularity tables have the documented shapes", || {
        let dir = tempfile::tempdir().unwrap();

        // --- Question-count ablation: budgets {3, 6, 9, 12}.
        let data_dir = dir.path().join("data");
        let manifest = synthetic_manifest(&data_dir, 6, 6);
        let manifest_path = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest_path, manifest.to_jsonl()).unwrap();
        let config = RunConfig::parse(
            &serde_json::json!({
                "backend": {"kind": "oracle"},
                "seed": 3,
                "compression": {"mode": "embedding", "k": 3}
            })
            .to_string(),
        )
        .unwrap();
        let out_dir = dir.path().join("ablation");
        commands::cmd_ablate(
            "ucf_crime_q",
            &[3, 6, 9, 12],
            &manifest_path,
            None,
            &config,
            &out_dir,
        )
        .unwrap();
        let csv = std::fs::read_to_string(out_dir.join("question_count_ablation.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "questions,askhint_auc,askhint_crime_acc,random_auc,random_crime_acc"
        );
        assert_eq!(lines.len(), 5, "header + one row per budget");
        for (row, budget) in lines[1..].iter().zip([3, 6, 9, 12]) {
            assert!(row.starts_with(&format!("{budget},")), "{row}");
            assert_eq!(row.split(',').count(), 5);
        }

        // --- Cross-dataset transfer: labeled with both dataset names.
        let transfer_out = dir.path().join("transfer_dataset.json");
        commands::cmd_transfer_dataset(
            "UCF-Crime",
            "ucf_crime_qstar",
            "XD-Violence",
            &manifest_path,
            None,
            &config,
            &transfer_out,
        )
        .unwrap();
        let transfer: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&transfer_out).unwrap()).unwrap();
        assert_eq!(transfer["prompt_source"], "UCF-Crime");
        assert_eq!(transfer["eval_target"], "XD-Violence");
        assert!(transfer["auc"].is_number());
        let csv = std::fs::read_to_string(transfer_out.with_extension("csv")).unwrap();
        assert!(csv.starts_with("eval_target,prompt_source,auc,crime_acc,normal_acc"));
        assert!(csv.contains("XD-Violence,UCF-Crime,"));

        // --- Cross-class transfer with the documented seen-class preset.
        let seen = commands::parse_seen_classes("ucf");
        assert_eq!(
            seen,
            [
                "Arson",
                "Road Accident",
                "Explosion",
                "Robbery",
                "Arrest",
                "Assault",
                "Stealing"
            ]
        );
        let cc_dir = dir.path().join("ccdata");
        let cc_manifest = synthetic_manifest_with_classes(
            &cc_dir,
            8,
            18,
            &[
                "Arson",
                "Road Accident",
                "Explosion",
                "Robbery",
                "Arrest",
                "Assault",
                "Stealing",
                "Fighting",
                "Shooting",
            ],
        );
        let cc_manifest_path = dir.path().join("cc_manifest.jsonl");
        std::fs::write(&cc_manifest_path, cc_manifest.to_jsonl()).unwrap();
        let cc_out = dir.path().join("transfer_class.json");
        commands::cmd_transfer_class(&cc_manifest_path, None, "ucf_crime_q", &seen, &config, &cc_out)
            .unwrap();
        let cc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&cc_out).unwrap()).unwrap();
        assert_eq!(cc["seen_classes"].as_array().unwrap().len(), 7);
        assert!(cc["all_auc"].is_number());
        assert!(cc["seen_acc"].is_number());
        assert!(cc["unseen_acc"].is_number());
        let cc_csv = std::fs::read_to_string(cc_out.with_extension("csv")).unwrap();
        assert!(cc_csv.starts_with("setting,askhint,abstract"));
        assert!(cc_csv.contains("all_test_auc,"));
        assert!(cc_csv.contains("seen_classes_acc,"));
        assert!(cc_csv.contains("unseen_classes_acc,"));

        // --- Granularity study: per-class table; under a mode-sensitive
        // oracle the fine-grained mode strictly dominates abstract per class.
        let g_dir = dir.path().join("gdata");
        let g_manifest = synthetic_manifest(&g_dir, 6, 12);
        let client = ModeSensitiveClient {
            oracle: ScriptedOracle::new(&g_manifest, 0.0, 1, AnswerStyle::Fig5),
        };
        let rows = askhint::evaluation::run_granularity_study(
            &client,
            &g_manifest,
            &askhint::presets::ucf_crime_pool(),
            &InferConfig::default(),
            0,
        )
        .unwrap();
        let csv = askhint::evaluation::granularity_csv(&rows);
        assert!(csv.starts_with("class,mode,auc,crime_acc"));
        let classes: HashSet<&str> = rows.iter().map(|r| r.class.as_str()).collect();
        assert_eq!(classes.len(), 4);
        for class in &classes {
            let auc_of = |mode: &str| {
                rows.iter()
                    .find(|r| &r.class == class && r.mode == mode)
                    .and_then(|r| r.auc)
                    .unwrap()
            };
            assert!(
                auc_of("fine_grained") > auc_of("abstract"),
                "{class}: fine-grained must strictly dominate abstract"
            );
        }
    });
}
