//! Prediction ingestion and metric-report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rrseg_core::mask::{rle_decode, BinaryMask};
use rrseg_core::metrics::{MetricReport, ReferenceEval};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::formats::PredictionJson;
use crate::json::fixed6;

/// Joins a predictions file with a dataset into per-reference evaluation
/// inputs.
///
/// Every positive sentence and every negative of every reference must be
/// covered exactly once; missing, duplicate, or unknown `(ref_id,
/// sentence_id, is_negative)` keys are reported together. A `null` RLE is an
/// explicit 0-pixel mask.
pub fn assemble_reference_evals(
    dataset: &Dataset,
    predictions: &[PredictionJson],
) -> Result<Vec<ReferenceEval>> {
    type Key = (u64, bool, usize);
    let mut by_key: BTreeMap<Key, &PredictionJson> = BTreeMap::new();
    let mut problems: Vec<String> = Vec::new();
    for p in predictions {
        let key = (p.ref_id, p.is_negative, p.sentence_id);
        if by_key.insert(key, p).is_some() {
            problems.push(format!(
                "duplicate prediction for ref {} {} {}",
                p.ref_id,
                if p.is_negative {
                    "negative"
                } else {
                    "positive"
                },
                p.sentence_id
            ));
        }
    }

    let mut expected: usize = 0;
    let mut evals = Vec::with_capacity(dataset.references.len());
    for record in &dataset.references {
        let image = dataset
            .image(record.image_id)
            .expect("validated referential integrity");
        let (w, h) = (image.width, image.height);
        let gt = rle_decode(&record.gt_rle)?;
        let mut positives = Vec::with_capacity(record.sentences.len());
        let mut negatives = Vec::with_capacity(record.negatives.len());
        let mut decode = |key: Key, out: &mut Vec<BinaryMask>| -> Result<()> {
            expected += 1;
            match by_key.get(&key) {
                None => {
                    problems.push(format!(
                        "missing prediction for ref {} {} {}",
                        key.0,
                        if key.1 { "negative" } else { "positive" },
                        key.2
                    ));
                }
                Some(p) => match &p.rle {
                    None => out.push(BinaryMask::new(w, h)?),
                    Some(rle) => {
                        if rle.size != [h, w] {
                            return Err(Error::Validation(format!(
                                "prediction for ref {} has RLE size {:?}, image is [{}, {}]",
                                key.0, rle.size, h, w
                            )));
                        }
                        out.push(rle_decode(&rle.to_mask()?)?);
                    }
                },
            }
            Ok(())
        };
        for sentence_id in 0..record.sentences.len() {
            decode((record.ref_id, false, sentence_id), &mut positives)?;
        }
        for sentence_id in 0..record.negatives.len() {
            decode((record.ref_id, true, sentence_id), &mut negatives)?;
        }
        if problems.is_empty() {
            let pairs = positives.into_iter().map(|p| (p, gt.clone())).collect();
            evals.push(ReferenceEval::new(record.ref_id, pairs, negatives)?);
        }
    }

    if by_key.len() > expected {
        // Some provided keys never matched a dataset pair.
        let known: Vec<Key> = dataset
            .references
            .iter()
            .flat_map(|r| {
                let pos = (0..r.sentences.len()).map(move |i| (r.ref_id, false, i));
                let neg = (0..r.negatives.len()).map(move |i| (r.ref_id, true, i));
                pos.chain(neg)
            })
            .collect();
        for key in by_key.keys() {
            if !known.contains(key) {
                problems.push(format!(
                    "prediction for unknown pair: ref {} {} {}",
                    key.0,
                    if key.1 { "negative" } else { "positive" },
                    key.2
                ));
            }
        }
    }

    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    Ok(evals)
}

/// Metric report as canonical JSON with every value at six decimals
/// (`r2vos_r` may be `null`).
pub fn render_report_json(report: &MetricReport) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"m_iou\": {},", fixed6(report.m_iou));
    let _ = writeln!(out, "  \"m_rr\": {},", fixed6(report.m_rr));
    let _ = writeln!(out, "  \"o_iou\": {},", fixed6(report.o_iou));
    out.push_str("  \"precision_at\": {\n");
    for (i, (threshold, precision)) in report.precision_at.iter().enumerate() {
        let comma = if i + 1 == report.precision_at.len() {
            ""
        } else {
            ","
        };
        let _ = writeln!(
            out,
            "    \"{}\": {}{comma}",
            format_threshold(*threshold),
            fixed6(*precision)
        );
    }
    out.push_str("  },\n");
    match report.r2vos_r {
        Some(r) => {
            let _ = writeln!(out, "  \"r2vos_r\": {},", fixed6(r));
        }
        None => out.push_str("  \"r2vos_r\": null,\n"),
    }
    let _ = writeln!(out, "  \"r_iou\": {},", fixed6(report.r_iou));
    let _ = writeln!(out, "  \"reference_count\": {}", report.reference_count);
    out.push_str("}\n");
    out
}

/// Threshold keys keep their shortest decimal form ("0.5", "0.75").
fn format_threshold(threshold: f64) -> String {
    let mut s = format!("{threshold:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.push('0');
    }
    s
}

/// Aligned plain-text table of the same values.
pub fn render_report_table(report: &MetricReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("rIoU".into(), fixed6(report.r_iou)),
        ("mRR".into(), fixed6(report.m_rr)),
        ("mIoU".into(), fixed6(report.m_iou)),
        ("oIoU".into(), fixed6(report.o_iou)),
    ];
    for (threshold, precision) in &report.precision_at {
        rows.push((
            format!("P@{}", format_threshold(*threshold)),
            fixed6(*precision),
        ));
    }
    rows.push((
        "R".into(),
        report.r2vos_r.map(fixed6).unwrap_or_else(|| "n/a".into()),
    ));
    rows.push(("references".into(), report.reference_count.to_string()));

    let name_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let value_width = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<name_width$}  {:>value_width$}", "metric", "value");
    for (name, value) in rows {
        let _ = writeln!(out, "{name:<name_width$}  {value:>value_width$}");
    }
    out
}
