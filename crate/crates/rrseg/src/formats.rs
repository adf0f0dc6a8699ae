//! Wire formats: the annotation/robust dataset JSON schema, the predictions
//! file, and the RLE object.

use rrseg_core::mask::{MaskError, RleMask};
use serde::{Deserialize, Serialize};

/// Run-length encoded mask object: `{"size": [height, width], "counts": [...]}`.
///
/// `size` is height-first, matching the dominant annotation convention;
/// counts are column-major, alternating runs starting with background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleJson {
    pub size: [u32; 2],
    pub counts: Vec<u64>,
}

impl RleJson {
    pub fn to_mask(&self) -> Result<RleMask, MaskError> {
        let [height, width] = self.size;
        RleMask::new(width, height, self.counts.clone())
    }

    pub fn from_mask(rle: &RleMask) -> Self {
        Self {
            size: [rle.height(), rle.width()],
            counts: rle.counts().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageJson {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    pub categories_present: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryJson {
    pub id: u32,
    pub name: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegativeJson {
    pub text: String,
    pub strategy: String,
    pub source_ref_id: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceJson {
    pub ref_id: u64,
    pub image_id: u64,
    pub split: String,
    pub sentences: Vec<String>,
    pub gt_rle: RleJson,
    /// Absent in raw annotations; populated in built robust datasets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negatives: Vec<NegativeJson>,
}

/// Top-level dataset schema, both for raw annotations (no negatives) and
/// built robust datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub images: Vec<ImageJson>,
    pub categories: Vec<CategoryJson>,
    pub references: Vec<ReferenceJson>,
}

/// One predicted mask. `sentence_id` indexes the positive sentences of the
/// reference when `is_negative` is false, and its negatives otherwise;
/// `rle: null` is an explicit 0-pixel prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionJson {
    pub ref_id: u64,
    pub sentence_id: usize,
    pub is_negative: bool,
    pub rle: Option<RleJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rrseg_core::mask::{rle_encode, BinaryMask};

    #[test]
    fn rle_json_is_height_first() {
        let mask = BinaryMask::from_fn(3, 2, |x, y| x == 0 && y == 1).unwrap();
        let json = RleJson::from_mask(&rle_encode(&mask));
        assert_eq!(json.size, [2, 3]);
        assert_eq!(json.counts, vec![1, 1, 4]);
        let back = json.to_mask().unwrap();
        assert_eq!(back.width(), 3);
        assert_eq!(back.height(), 2);
    }

    #[test]
    fn rle_json_rejects_bad_sum() {
        let json = RleJson {
            size: [2, 2],
            counts: vec![5],
        };
        assert!(json.to_mask().is_err());
    }

    #[test]
    fn predictions_parse_null_rle() {
        let raw = r#"[{"ref_id": 3, "sentence_id": 0, "is_negative": true, "rle": null}]"#;
        let preds: Vec<PredictionJson> = serde_json::from_str(raw).unwrap();
        assert!(preds[0].rle.is_none());
        assert!(preds[0].is_negative);
    }
}
