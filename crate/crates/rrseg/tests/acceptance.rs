//! Acceptance suite: every release criterion in one sequential test, each
//! printing a `[PASS] criterion N` line (visible with `--nocapture`).
//!
//! Run with:
//!   cargo test -p rrseg --test acceptance -- --nocapture

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rrseg::dataset::{validate_dataset_negatives, Dataset};
use rrseg::evalio::render_report_json;
use rrseg::formats::{DatasetFile, PredictionJson, RleJson};
use rrseg::json::fixed6;
use rrseg::modelio::ModelConfigFile;
use rrseg_core::expr::tag_tokens;
use rrseg_core::gen::{
    strategy_change_attribute, strategy_change_relation, strategy_replace_target, validate_negative,
};
use rrseg_core::lexicon::{CategoryCatalog, ImageContext, Lexicons};
use rrseg_core::mask::{rle_encode, BinaryMask};
use rrseg_core::metrics::{
    aggregate_report, r_iou, robust_recall, ReferenceEval, DEFAULT_PRECISION_THRESHOLDS,
};
use rrseg_core::model::{
    cross_entropy_2class, exist_loss, init_flat, majority_downsample, mhca, model_grad_check,
    predict_mask, run_model, seg_loss, synthetic_input, total_loss, LinearParams, MhcaParams,
    ModelConfig, Tensor, ToyModelParams, DEFAULT_STEP, DEFAULT_TOLERANCE,
};
use rrseg_core::oracle;
use rrseg_core::prompt::toy_tokenize;
use rrseg_core::rng::SplitMix64;

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/annotations_20.json")
}

fn rrseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrseg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn random_mask(rng: &mut SplitMix64, w: u32, h: u32, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.uniform() < density).unwrap()
}

#[test]
fn acceptance_criteria() {
    let suite_start = Instant::now();
    let check = |name: &str, budget: Option<Duration>, body: fn()| {
        let start = Instant::now();
        body();
        let elapsed = start.elapsed();
        if let Some(budget) = budget {
            assert!(
                elapsed < budget,
                "criterion {name} took {elapsed:.2?}, budget {budget:.2?}"
            );
        }
        println!("[PASS] criterion {name} ({elapsed:.2?})");
    };

    check(
        "1: metric oracle equivalence on 200+ randomized references",
        Some(Duration::from_secs(5)),
        criterion_1_oracle_equivalence,
    );
    check(
        "2: worked rIoU case is exactly 0.400000",
        None,
        criterion_2_worked_riou,
    );
    check(
        "3: perfect vs all-empty degenerate pair",
        None,
        criterion_3_degenerate_pair,
    );
    check(
        "4: generator soundness and determinism on the fixture",
        Some(Duration::from_secs(5)),
        criterion_4_generator,
    );
    check(
        "5: printed strategy transformations and vague rejection",
        None,
        criterion_5_strategy_fidelity,
    );
    check(
        "6: model numerics (attention, blank tokens, oracles, gradients)",
        Some(Duration::from_secs(30)),
        criterion_6_model_numerics,
    );
    check(
        "7: loss identities and configuration defaults",
        None,
        criterion_7_loss_identities,
    );
    check(
        "8: inference rule and end-to-end pipeline",
        None,
        criterion_8_end_to_end,
    );

    let total = suite_start.elapsed();
    assert!(
        total < Duration::from_secs(120),
        "acceptance suite took {total:.2?}"
    );
    println!("[PASS] criterion 9: acceptance suite completed in {total:.2?} (< 120s)");
}

/// ≥200 randomized references (masks ≤16x16, 1–4 positives, 0–10 negatives):
/// every metric matches the brute-force pixel-set oracle within 1e-12.
fn criterion_1_oracle_equivalence() {
    let mut rng = SplitMix64::new(20_240_817);
    let refs: Vec<ReferenceEval> = (0..230)
        .map(|i| {
            let w = 1 + rng.below(16) as u32;
            let h = 1 + rng.below(16) as u32;
            let positives = (0..1 + rng.below(4))
                .map(|_| {
                    let pd = rng.uniform();
                    let gd = rng.uniform();
                    (
                        random_mask(&mut rng, w, h, pd),
                        random_mask(&mut rng, w, h, gd),
                    )
                })
                .collect();
            let negatives = (0..rng.below(11))
                .map(|_| {
                    let d = if rng.uniform() < 0.4 {
                        0.0
                    } else {
                        rng.uniform() * 0.5
                    };
                    random_mask(&mut rng, w, h, d)
                })
                .collect();
            ReferenceEval::new(i as u64, positives, negatives).unwrap()
        })
        .collect();

    let report = aggregate_report(&refs, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    let tol = 1e-12;
    assert!((report.r_iou - oracle::r_iou(&refs)).abs() < tol, "rIoU");
    assert!(
        (report.m_rr - oracle::mean_robust_recall(&refs)).abs() < tol,
        "mRR"
    );
    assert!((report.m_iou - oracle::mean_iou(&refs)).abs() < tol, "mIoU");
    assert!(
        (report.o_iou - oracle::overall_iou(&refs)).abs() < tol,
        "oIoU"
    );
    for &(t, p) in &report.precision_at {
        assert!((p - oracle::precision_at(&refs, t)).abs() < tol, "P@{t}");
    }
    assert!(
        (report.r2vos_r.unwrap() - oracle::r2vos_r(&refs).unwrap()).abs() < tol,
        "R"
    );
}

/// One positive pair with |∩| = 6, |∪| = 10 plus a 5-pixel negative
/// prediction: rIoU = 6 / (10 + 5) = 0.4, integer sums before one division.
fn criterion_2_worked_riou() {
    let run = |start: u64, len: u64| {
        BinaryMask::from_fn(5, 5, |x, y| {
            let p = x as u64 * 5 + y as u64;
            p >= start && p < start + len
        })
        .unwrap()
    };
    let pred = run(0, 8);
    let gt = run(2, 8);
    assert_eq!(pred.intersection_area(&gt).unwrap(), 6);
    assert_eq!(pred.union_area(&gt).unwrap(), 10);
    let reference = ReferenceEval::new(1, vec![(pred, gt)], vec![run(12, 5)]).unwrap();
    let value = r_iou(&[reference]).unwrap();
    assert_eq!(value, 0.4, "exact to the last bit");
    assert_eq!(fixed6(value), "0.400000");
}

/// Perfect predictions score (rIoU, mRR) = (1, 1); an all-empty predictor
/// scores (0, 1) — mRR alone cannot expose the all-negative degenerate model.
fn criterion_3_degenerate_pair() {
    let gt = BinaryMask::from_fn(6, 6, |x, y| x >= 2 && y >= 2).unwrap();
    let empty = BinaryMask::new(6, 6).unwrap();

    let perfect = vec![
        ReferenceEval::new(
            1,
            vec![(gt.clone(), gt.clone())],
            vec![empty.clone(), empty.clone()],
        )
        .unwrap(),
        ReferenceEval::new(2, vec![(gt.clone(), gt.clone())], vec![empty.clone()]).unwrap(),
    ];
    let report = aggregate_report(&perfect, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    assert_eq!((report.r_iou, report.m_rr), (1.0, 1.0));

    let blind = vec![
        ReferenceEval::new(
            1,
            vec![(empty.clone(), gt.clone())],
            vec![empty.clone(), empty.clone()],
        )
        .unwrap(),
        ReferenceEval::new(2, vec![(empty.clone(), gt.clone())], vec![empty.clone()]).unwrap(),
    ];
    let report = aggregate_report(&blind, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    assert_eq!((report.r_iou, report.m_rr), (0.0, 1.0));
}

/// Fixture build in val mode: exactly 10 validated, distinct negatives per
/// reference (200 total), byte-identical across runs, validate passes, and
/// train mode yields one negative per positive sentence.
fn criterion_4_generator() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture_path();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let result = rrseg(&[
            "build",
            "--input",
            fixture.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--mode",
            "val",
            "--seed",
            "0",
        ]);
        assert!(
            result.status.success(),
            "{}",
            String::from_utf8_lossy(&result.stderr)
        );
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
        "same seed, byte-identical files"
    );

    let built = Dataset::load(&out_a).unwrap();
    assert_eq!(built.references.len(), 20);
    let mut total = 0;
    for r in &built.references {
        assert_eq!(r.negatives.len(), 10, "reference {}", r.ref_id);
        let distinct: std::collections::BTreeSet<&str> =
            r.negatives.iter().map(|n| n.text.as_str()).collect();
        assert_eq!(distinct.len(), 10, "duplicates in reference {}", r.ref_id);
        total += r.negatives.len();
    }
    assert_eq!(total, 200);
    assert!(validate_dataset_negatives(&built, &Lexicons::builtin()).is_empty());

    let validate = rrseg(&["validate", "--input", out_a.to_str().unwrap()]);
    assert!(validate.status.success());

    let train_out = dir.path().join("train.json");
    let result = rrseg(&[
        "build",
        "--input",
        fixture.to_str().unwrap(),
        "--output",
        train_out.to_str().unwrap(),
        "--mode",
        "train",
    ]);
    assert!(result.status.success());
    let train = Dataset::load(&train_out).unwrap();
    for r in &train.references {
        assert_eq!(
            r.negatives.len(),
            r.sentences.len(),
            "train mode is 1:1 for reference {}",
            r.ref_id
        );
    }
}

/// The printed transformations hold structurally, and vague sentences are
/// always rejected.
fn criterion_5_strategy_fidelity() {
    let catalog = CategoryCatalog::coco_default();
    let lex = Lexicons::builtin();

    // Strategy 3: "man in the left" -> "cat in the left" (cat forced as the
    // only absent category).
    let only_cat_absent = ImageContext::new(
        1,
        catalog
            .entries()
            .iter()
            .map(|e| e.id)
            .filter(|id| *id != 17),
    );
    let expr = tag_tokens("man in the left", &catalog, &lex).unwrap();
    let mut rng = SplitMix64::new(0);
    assert_eq!(
        strategy_replace_target(&expr, &catalog, &only_cat_absent, &mut rng).as_deref(),
        Some("cat in the left")
    );

    // Strategy 4: "man in blue hat" -> "man in black hat" (color slot).
    let two_colors = Lexicons::new(
        vec!["one".into()],
        vec!["black".into(), "blue".into()],
        vec!["left".into()],
        vec!["man".into(), "hat".into()],
    )
    .unwrap();
    let expr = tag_tokens("man in blue hat", &catalog, &two_colors).unwrap();
    let mut rng = SplitMix64::new(0);
    assert_eq!(
        strategy_change_attribute(&expr, &two_colors, &mut rng).as_deref(),
        Some("man in black hat")
    );

    // Strategy 5: "man standing" -> "man standing <pos> to the <category>".
    let expr = tag_tokens("man standing", &catalog, &lex).unwrap();
    let mut rng = SplitMix64::new(1);
    let text = strategy_change_relation(&expr, &catalog, &only_cat_absent, &lex, &mut rng).unwrap();
    let middle = text
        .strip_prefix("man standing ")
        .and_then(|rest| rest.strip_suffix(" to the cat"))
        .unwrap_or_else(|| panic!("unexpected shape: {text:?}"));
    assert!(lex.is_position(middle), "{text:?}");

    // Vague sentences are rejected against any context.
    for sentence in ["left one", "second from left"] {
        for ctx in [ImageContext::new(1, []), only_cat_absent.clone()] {
            assert!(
                !validate_negative(sentence, &catalog, &ctx, &lex),
                "{sentence:?} must always be rejected"
            );
        }
    }
}

/// Attention normalization, blank-token decoupling, building-block oracle
/// equivalence, and the full-model gradient check.
fn criterion_6_model_numerics() {
    let cfg = ModelConfig::default();
    let theta = init_flat(&cfg).unwrap();
    let params = ToyModelParams::from_slice(&cfg, &theta).unwrap();
    let input = synthetic_input(&cfg, 32, 32, 99);
    let trace = run_model(&params, &cfg, &input.image, &input.token_ids).unwrap();

    // Every attention row sums to 1 ± 1e-9.
    for (name, attn) in trace.attention_maps() {
        let lanes = attn.shape()[attn.shape().len() - 1];
        for row in attn.data().chunks(lanes) {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "{name}: row sum {sum}");
        }
    }

    // Blank tokens entering attention 3 are bitwise invariant to the
    // language input; conditional tokens are not.
    let mut other_tokens = input.token_ids.clone();
    other_tokens[0] = (other_tokens[0] + 1) % cfg.lang_vocab;
    let other = run_model(&params, &cfg, &input.image, &other_tokens).unwrap();
    for (a, b) in trace.vltf.iter().zip(&other.vltf) {
        assert_eq!(a.blank_tokens.data(), b.blank_tokens.data());
        assert_ne!(a.cond_tokens.data(), b.cond_tokens.data());
    }

    // Cross attention matches an unvectorized per-head oracle to 1e-12.
    let mut rng = SplitMix64::new(5);
    let mut draw = |shape: Vec<usize>| Tensor::from_fn(shape, |_| rng.normal());
    let p = MhcaParams {
        query: LinearParams {
            weight: draw(vec![4, 6]),
            bias: draw(vec![6]),
        },
        key: LinearParams {
            weight: draw(vec![5, 6]),
            bias: draw(vec![6]),
        },
        value: LinearParams {
            weight: draw(vec![5, 6]),
            bias: draw(vec![6]),
        },
        output: LinearParams {
            weight: draw(vec![6, 6]),
            bias: draw(vec![6]),
        },
        heads: 2,
    };
    let q = draw(vec![3, 4]);
    let kv = draw(vec![4, 5]);
    let (out, attn) = mhca(&p, &q, &kv, &kv).unwrap();
    let (naive_out, naive_attn) = naive_mhca(&p, &q, &kv);
    for (a, b) in out.data().iter().zip(naive_out.data()) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in attn.data().iter().zip(naive_attn.data()) {
        assert!((a - b).abs() < 1e-12);
    }

    // Segmentation loss matches a scalar-loop oracle to 1e-12.
    let ours = seg_loss(&trace.mask_scores, &input.gt, cfg.lambda_aux).unwrap();
    let naive = naive_seg_loss(&trace.mask_scores, &input.gt, cfg.lambda_aux);
    assert!((ours - naive).abs() < 1e-12);

    // Reverse-mode gradients agree with central differences (h = 1e-5) to
    // 1e-4 relative error over ≥100 sampled parameters.
    let report = model_grad_check(
        &cfg,
        &theta,
        &input,
        120,
        DEFAULT_STEP,
        DEFAULT_TOLERANCE,
        7,
        false,
    )
    .unwrap();
    assert!(report.samples.len() >= 100);
    assert!(
        report.passed(),
        "max relative error {}",
        report.max_rel_error
    );
}

#[allow(clippy::needless_range_loop)] // the oracle is deliberately index-based
fn naive_mhca(
    p: &MhcaParams<f64>,
    q_in: &Tensor<f64>,
    kv_in: &Tensor<f64>,
) -> (Tensor<f64>, Tensor<f64>) {
    let affine = |x: &Tensor<f64>, l: &LinearParams<f64>| -> Vec<Vec<f64>> {
        let rows = x.shape()[0];
        (0..rows)
            .map(|r| {
                (0..l.weight.shape()[1])
                    .map(|o| {
                        let mut acc = l.bias.at(&[o]);
                        for i in 0..l.weight.shape()[0] {
                            acc += x.at(&[r, i]) * l.weight.at(&[i, o]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    let q = affine(q_in, &p.query);
    let k = affine(kv_in, &p.key);
    let v = affine(kv_in, &p.value);
    let dim = p.output.weight.shape()[0];
    let hd = dim / p.heads;
    let mut attn = vec![0.0; p.heads * q.len() * k.len()];
    let mut ctx = vec![vec![0.0; dim]; q.len()];
    for h in 0..p.heads {
        for i in 0..q.len() {
            let mut scores: Vec<f64> = (0..k.len())
                .map(|j| {
                    (0..hd)
                        .map(|d| q[i][h * hd + d] * k[j][h * hd + d])
                        .sum::<f64>()
                        / (hd as f64).sqrt()
                })
                .collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = scores.iter().map(|s| (s - max).exp()).sum();
            for s in &mut scores {
                *s = (*s - max).exp() / total;
            }
            for (j, s) in scores.iter().enumerate() {
                attn[(h * q.len() + i) * k.len() + j] = *s;
                for d in 0..hd {
                    ctx[i][h * hd + d] += s * v[j][h * hd + d];
                }
            }
        }
    }
    let ctx_tensor = Tensor::new(vec![q.len(), dim], ctx.into_iter().flatten().collect());
    let out = affine(&ctx_tensor, &p.output);
    (
        Tensor::new(vec![q.len(), dim], out.into_iter().flatten().collect()),
        Tensor::new(vec![p.heads, q.len(), k.len()], attn),
    )
}

#[allow(clippy::needless_range_loop)] // the oracle is deliberately index-based
fn naive_seg_loss(scores: &[Tensor<f64>; 4], gt: &BinaryMask, lambda: f64) -> f64 {
    let level = |m: &Tensor<f64>| -> f64 {
        let (mh, mw) = (m.shape()[0], m.shape()[1]);
        let (fh, fw) = (gt.height() as usize / mh, gt.width() as usize / mw);
        let mut total = 0.0;
        for i in 0..mh {
            for j in 0..mw {
                let mut fg = 0usize;
                for y in i * fh..(i + 1) * fh {
                    for x in j * fw..(j + 1) * fw {
                        if gt.get(x as u32, y as u32) {
                            fg += 1;
                        }
                    }
                }
                let target = 2 * fg >= fh * fw;
                let (z0, z1) = (m.at(&[i, j, 0]), m.at(&[i, j, 1]));
                let denom = z0.exp() + z1.exp();
                let p_true = if target { z1.exp() } else { z0.exp() } / denom;
                total -= p_true.ln();
            }
        }
        total / (mh * mw) as f64
    };
    level(&scores[0]) + lambda * (level(&scores[1]) + level(&scores[2]) + level(&scores[3]))
}

/// L(γ=0) = L_s, L_s(λ=0) = CE(y, M_1), L_e(0.5) = ln 2, and the reference
/// defaults load from configuration.
fn criterion_7_loss_identities() {
    let cfg = ModelConfig::default();
    let (_, params) = ToyModelParams::init(&cfg).unwrap();
    let input = synthetic_input(&cfg, 32, 32, 13);
    let trace = run_model(&params, &cfg, &input.image, &input.token_ids).unwrap();

    let seg = seg_loss(&trace.mask_scores, &input.gt, cfg.lambda_aux).unwrap();
    let exist = exist_loss(trace.exist_prob, input.exists);
    assert!(
        (total_loss(seg, exist, 0.0) - seg).abs() < 1e-12,
        "L(γ=0) = L_s"
    );

    let fine_only = seg_loss(&trace.mask_scores, &input.gt, 0.0).unwrap();
    let target = majority_downsample(&input.gt, 8, 8).unwrap();
    let ce1 = cross_entropy_2class(&trace.mask_scores[0], &target).unwrap();
    assert!((fine_only - ce1).abs() < 1e-12, "L_s(λ=0) = CE(y, M_1)");

    assert!((exist_loss(0.5, true) - std::f64::consts::LN_2).abs() < 1e-12);

    // Defaults come from configuration: an empty file yields the reference
    // values, and explicit values land where they should.
    let empty: ModelConfigFile = serde_json::from_str("{}").unwrap();
    let cfg = empty.into_config().unwrap();
    assert_eq!(cfg.lambda_aux, 0.4);
    assert_eq!(cfg.gamma_exist, 1.0);
    assert_eq!(cfg.cond_tokens, 20);
    assert_eq!(cfg.blank_tokens, 10);

    let explicit: ModelConfigFile = serde_json::from_str(
        r#"{"lambda": 0.4, "gamma": 1.0, "cond_tokens": 20, "blank_tokens": 10}"#,
    )
    .unwrap();
    assert_eq!(explicit.into_config().unwrap(), ModelConfig::default());
}

/// ê < 0.5 forces an exact 0-pixel mask (which robust recall counts), and
/// the whole pipeline — build, model predictions, eval — produces a
/// well-formed report.
fn criterion_8_end_to_end() {
    // Inference gate.
    let cfg = ModelConfig::default();
    let (_, params) = ToyModelParams::init(&cfg).unwrap();
    let input = synthetic_input(&cfg, 32, 32, 21);
    let mut trace = run_model(&params, &cfg, &input.image, &input.token_ids).unwrap();
    trace.exist_prob = 0.2;
    let gated = predict_mask(&trace);
    assert_eq!(gated.area(), 0);
    let gt = BinaryMask::from_fn(32, 32, |x, _| x < 5).unwrap();
    let reference = ReferenceEval::new(1, vec![(gt.clone(), gt)], vec![gated]).unwrap();
    assert_eq!(robust_recall(&reference).unwrap(), 1.0);

    // Build the fixture, predict every sentence with the model, evaluate.
    let dir = tempfile::tempdir().unwrap();
    let built_path = dir.path().join("robust.json");
    let result = rrseg(&[
        "build",
        "--input",
        fixture_path().to_str().unwrap(),
        "--output",
        built_path.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let file: DatasetFile =
        serde_json::from_str(&std::fs::read_to_string(&built_path).unwrap()).unwrap();

    let mut predictions = Vec::new();
    for r in &file.references {
        let image_meta = file.images.iter().find(|i| i.id == r.image_id).unwrap();
        let mut rng = SplitMix64::new(r.image_id);
        let image = Tensor::from_fn(
            vec![
                image_meta.height as usize,
                image_meta.width as usize,
                cfg.in_channels,
            ],
            |_| rng.normal(),
        );
        let mut predict = |sentence: &str, sentence_id: usize, is_negative: bool| {
            let token_ids: Vec<usize> = toy_tokenize(sentence, cfg.lang_vocab)
                .into_iter()
                .take(cfg.max_text_len)
                .collect();
            let trace = run_model(&params, &cfg, &image, &token_ids).unwrap();
            let mask = predict_mask(&trace);
            predictions.push(PredictionJson {
                ref_id: r.ref_id,
                sentence_id,
                is_negative,
                rle: if mask.is_empty() {
                    None
                } else {
                    Some(RleJson::from_mask(&rle_encode(&mask)))
                },
            });
        };
        for (i, s) in r.sentences.iter().enumerate() {
            predict(s, i, false);
        }
        for (i, n) in r.negatives.iter().enumerate() {
            predict(&n.text, i, true);
        }
    }
    assert_eq!(predictions.len(), 240, "40 positives + 200 negatives");
    let preds_path = dir.path().join("preds.json");
    std::fs::write(&preds_path, serde_json::to_string(&predictions).unwrap()).unwrap();

    let eval = rrseg(&[
        "eval",
        "--input",
        built_path.to_str().unwrap(),
        "--predictions",
        preds_path.to_str().unwrap(),
        "--json",
    ]);
    assert!(
        eval.status.success(),
        "{}",
        String::from_utf8_lossy(&eval.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&eval.stdout)).unwrap();
    for key in ["r_iou", "m_rr", "m_iou", "o_iou"] {
        let value = report[key]
            .as_f64()
            .unwrap_or_else(|| panic!("{key} present"));
        assert!((0.0..=1.0).contains(&value), "{key} = {value}");
    }
    assert_eq!(report["reference_count"], 20);
    assert!(report["precision_at"]["0.5"].is_number());

    // The library path renders the same report without error.
    let dataset = Dataset::load(&built_path).unwrap();
    let evals = rrseg::evalio::assemble_reference_evals(&dataset, &predictions).unwrap();
    let lib_report = aggregate_report(&evals, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    let rendered = render_report_json(&lib_report);
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&rendered).unwrap()["r_iou"],
        report["r_iou"]
    );
}
