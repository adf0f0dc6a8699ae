//! Dataset ingestion, robust-split construction, statistics, and
//! serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rrseg_core::gen::{
    generate_negatives, validate_negative, GenStrategy, NegativeSentence, ReferenceInput,
};
use rrseg_core::lexicon::{CategoryCatalog, CategoryEntry, ImageContext, Lexicons};
use rrseg_core::mask::RleMask;
use rrseg_core::rng::sub_seed;

use crate::error::{Error, Result};
use crate::formats::{CategoryJson, DatasetFile, ImageJson, NegativeJson, ReferenceJson, RleJson};
use crate::json::{read_json, write_canonical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImageInfo {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    pub context: ImageContext,
}

#[derive(Debug, Clone)]
pub struct RefRecord {
    pub ref_id: u64,
    pub image_id: u64,
    pub split: Split,
    pub sentences: Vec<String>,
    pub gt_rle: RleMask,
    pub negatives: Vec<NegativeSentence>,
}

/// A fully cross-linked dataset: images, catalog, references (negatives
/// empty until a robust split is built). Images and references are kept in
/// ascending id order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Vec<ImageInfo>,
    pub catalog: CategoryCatalog,
    pub references: Vec<RefRecord>,
}

impl Dataset {
    pub fn image(&self, id: u64) -> Option<&ImageInfo> {
        self.images.iter().find(|i| i.id == id)
    }

    /// Validates referential integrity and mask shapes while converting from
    /// the wire format.
    pub fn from_file(file: DatasetFile) -> Result<Self> {
        let entries: Vec<CategoryEntry> = file
            .categories
            .into_iter()
            .map(|c| CategoryEntry {
                id: c.id,
                name: c.name,
                synonyms: c.synonyms,
            })
            .collect();
        let catalog = CategoryCatalog::new(entries)?;

        let mut images = Vec::with_capacity(file.images.len());
        let mut image_ids = BTreeSet::new();
        for img in file.images {
            if !image_ids.insert(img.id) {
                return Err(Error::Validation(format!("duplicate image id {}", img.id)));
            }
            for cid in &img.categories_present {
                if !catalog.contains_id(*cid) {
                    return Err(Error::Validation(format!(
                        "image {} lists unknown category id {cid}",
                        img.id
                    )));
                }
            }
            images.push(ImageInfo {
                id: img.id,
                width: img.width,
                height: img.height,
                context: ImageContext::new(img.id, img.categories_present.iter().copied()),
            });
        }
        images.sort_by_key(|i| i.id);

        let mut references = Vec::with_capacity(file.references.len());
        let mut ref_ids = BTreeSet::new();
        for r in file.references {
            if !ref_ids.insert(r.ref_id) {
                return Err(Error::Validation(format!("duplicate ref_id {}", r.ref_id)));
            }
            let image = images.iter().find(|i| i.id == r.image_id).ok_or_else(|| {
                Error::Validation(format!(
                    "reference {} points at missing image {}",
                    r.ref_id, r.image_id
                ))
            })?;
            if r.sentences.is_empty() {
                return Err(Error::Validation(format!(
                    "reference {} has no positive sentences",
                    r.ref_id
                )));
            }
            let split = Split::from_label(&r.split).ok_or_else(|| {
                Error::Validation(format!(
                    "reference {} has unknown split {:?}",
                    r.ref_id, r.split
                ))
            })?;
            let [rle_h, rle_w] = r.gt_rle.size;
            if (rle_w, rle_h) != (image.width, image.height) {
                return Err(Error::Validation(format!(
                    "reference {}: ground-truth RLE size {}x{} does not match image {}x{}",
                    r.ref_id, rle_w, rle_h, image.width, image.height
                )));
            }
            let gt_rle = r.gt_rle.to_mask()?;
            let mut negatives = Vec::with_capacity(r.negatives.len());
            for n in r.negatives {
                let strategy = GenStrategy::from_label(&n.strategy).ok_or_else(|| {
                    Error::Validation(format!(
                        "reference {}: unknown strategy {:?}",
                        r.ref_id, n.strategy
                    ))
                })?;
                negatives.push(NegativeSentence {
                    text: n.text,
                    strategy,
                    source_ref_id: n.source_ref_id,
                });
            }
            references.push(RefRecord {
                ref_id: r.ref_id,
                image_id: r.image_id,
                split,
                sentences: r.sentences,
                gt_rle,
                negatives,
            });
        }
        references.sort_by_key(|r| r.ref_id);

        Ok(Self {
            images,
            catalog,
            references,
        })
    }

    pub fn to_file(&self) -> DatasetFile {
        DatasetFile {
            images: self
                .images
                .iter()
                .map(|i| ImageJson {
                    id: i.id,
                    width: i.width,
                    height: i.height,
                    categories_present: i.context.categories_present.iter().copied().collect(),
                })
                .collect(),
            categories: self
                .catalog
                .entries()
                .iter()
                .map(|e| CategoryJson {
                    id: e.id,
                    name: e.name.clone(),
                    synonyms: e.synonyms.clone(),
                })
                .collect(),
            references: self
                .references
                .iter()
                .map(|r| ReferenceJson {
                    ref_id: r.ref_id,
                    image_id: r.image_id,
                    split: r.split.label().to_string(),
                    sentences: r.sentences.clone(),
                    gt_rle: RleJson::from_mask(&r.gt_rle),
                    negatives: r
                        .negatives
                        .iter()
                        .map(|n| NegativeJson {
                            text: n.text.clone(),
                            strategy: n.strategy.label().to_string(),
                            source_ref_id: n.source_ref_id,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(read_json(path)?)
    }

    /// Canonical JSON (sorted keys, LF, trailing newline); loading and
    /// re-saving a file reproduces it byte for byte.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_canonical(path, &self.to_file())
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Train mode generates one negative per positive sentence (1:1);
    /// val mode generates a fixed count per reference.
    pub mode: Split,
    /// Negatives per reference in val mode (10 by default).
    pub negatives_per_ref: usize,
    pub seed: u64,
    pub lexicons: Lexicons,
    /// Drop absolute-position words from the attribute lexicons, as done for
    /// datasets that ban location language.
    pub exclude_absolute_positions: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            mode: Split::Val,
            negatives_per_ref: 10,
            seed: 0,
            lexicons: Lexicons::builtin(),
            exclude_absolute_positions: false,
        }
    }
}

/// Generates negatives for every reference of the dataset.
///
/// The sentence pool spans all references (same-image sentences are skipped
/// at draw time); each reference generates from an independent sub-seeded
/// stream, so the result is a pure function of `(dataset, options)`.
pub fn build_robust_split(dataset: &Dataset, options: &BuildOptions) -> Result<Dataset> {
    let lexicons = if options.exclude_absolute_positions {
        options.lexicons.without_absolute_positions()
    } else {
        options.lexicons.clone()
    };
    let pool: Vec<(String, ImageContext)> = dataset
        .references
        .iter()
        .flat_map(|r| {
            let ctx = &dataset
                .image(r.image_id)
                .expect("validated referential integrity")
                .context;
            r.sentences.iter().map(move |s| (s.clone(), ctx.clone()))
        })
        .collect();

    let mut out = dataset.clone();
    for record in &mut out.references {
        let count = match options.mode {
            Split::Train => record.sentences.len(),
            Split::Val => options.negatives_per_ref,
        };
        let context = &dataset
            .image(record.image_id)
            .expect("validated referential integrity")
            .context;
        let reference = ReferenceInput {
            ref_id: record.ref_id,
            positives: &record.sentences,
            context,
        };
        record.negatives = generate_negatives(
            &reference,
            &pool,
            &dataset.catalog,
            &lexicons,
            count,
            sub_seed(options.seed, record.ref_id),
        )?;
    }
    Ok(out)
}

/// Emitted-negative counts per strategy, for build reporting.
pub fn strategy_counts(dataset: &Dataset) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for strategy in GenStrategy::ALL {
        counts.insert(strategy.label(), 0);
    }
    for r in &dataset.references {
        for n in &r.negatives {
            *counts.entry(n.strategy.label()).or_default() += 1;
        }
    }
    counts
}

/// Re-checks every stored negative against its image context. Returns the
/// offending `(ref_id, text)` pairs; empty means the dataset is sound.
pub fn validate_dataset_negatives(dataset: &Dataset, lexicons: &Lexicons) -> Vec<(u64, String)> {
    let mut offending = Vec::new();
    for r in &dataset.references {
        let context = &dataset
            .image(r.image_id)
            .expect("validated referential integrity")
            .context;
        for n in &r.negatives {
            if !validate_negative(&n.text, &dataset.catalog, context, lexicons) {
                offending.push((r.ref_id, n.text.clone()));
            }
        }
    }
    offending
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitStats {
    pub reference_count: usize,
    pub sentences_per_reference: f64,
    pub negatives_per_reference: f64,
}

/// Per-split dataset statistics. `sentences_per_reference` counts positives
/// plus negatives.
pub fn compute_stats(dataset: &Dataset) -> Result<BTreeMap<Split, SplitStats>> {
    if dataset.references.is_empty() {
        return Err(Error::Validation(String::from("dataset has no references")));
    }
    let mut grouped: BTreeMap<Split, (usize, usize, usize)> = BTreeMap::new();
    for r in &dataset.references {
        let entry = grouped.entry(r.split).or_default();
        entry.0 += 1;
        entry.1 += r.sentences.len();
        entry.2 += r.negatives.len();
    }
    Ok(grouped
        .into_iter()
        .map(|(split, (refs, sentences, negatives))| {
            (
                split,
                SplitStats {
                    reference_count: refs,
                    sentences_per_reference: (sentences + negatives) as f64 / refs as f64,
                    negatives_per_reference: negatives as f64 / refs as f64,
                },
            )
        })
        .collect())
}
