//! Regenerates the shipped 20-reference annotation fixture.
//!
//! Usage: cargo run -p rrseg --example gen_fixture [-- <output-path>]
//!
//! The fixture covers 8 images (all sides divisible by 32 so the demo model
//! can run on them), 20 references with 40 positive sentences (mean 2.0),
//! rectangular ground-truth masks, and the full built-in category catalog.

use std::path::PathBuf;

use rrseg::formats::{CategoryJson, DatasetFile, ImageJson, ReferenceJson, RleJson};
use rrseg::json::write_canonical;
use rrseg_core::lexicon::CategoryCatalog;
use rrseg_core::mask::{rle_encode, BinaryMask};

struct Image {
    id: u64,
    width: u32,
    height: u32,
    categories: &'static [u32],
}

struct Reference {
    ref_id: u64,
    image_id: u64,
    sentences: &'static [&'static str],
    /// Ground-truth rectangle (x, y, width, height).
    rect: (u32, u32, u32, u32),
}

const IMAGES: &[Image] = &[
    Image {
        id: 1,
        width: 64,
        height: 64,
        categories: &[1, 15, 28],
    },
    Image {
        id: 2,
        width: 64,
        height: 32,
        categories: &[24, 25],
    },
    Image {
        id: 3,
        width: 32,
        height: 32,
        categories: &[17, 63],
    },
    Image {
        id: 4,
        width: 96,
        height: 64,
        categories: &[1, 37, 40],
    },
    Image {
        id: 5,
        width: 64,
        height: 64,
        categories: &[1, 18, 34],
    },
    Image {
        id: 6,
        width: 32,
        height: 64,
        categories: &[3, 6, 10],
    },
    Image {
        id: 7,
        width: 64,
        height: 64,
        categories: &[51, 52, 53, 67],
    },
    Image {
        id: 8,
        width: 96,
        height: 32,
        categories: &[19, 20, 21],
    },
];

const REFERENCES: &[Reference] = &[
    Reference {
        ref_id: 1,
        image_id: 1,
        sentences: &[
            "woman with the umbrella",
            "person sitting on the bench",
            "lady holding an umbrella",
        ],
        rect: (8, 8, 16, 24),
    },
    Reference {
        ref_id: 2,
        image_id: 1,
        sentences: &["man on the left", "guy in the red jacket"],
        rect: (2, 20, 12, 30),
    },
    Reference {
        ref_id: 3,
        image_id: 2,
        sentences: &["zebra on the left", "smaller zebra"],
        rect: (4, 4, 20, 24),
    },
    Reference {
        ref_id: 4,
        image_id: 2,
        sentences: &["giraffe behind the zebra", "tall giraffe"],
        rect: (30, 2, 18, 28),
    },
    Reference {
        ref_id: 5,
        image_id: 3,
        sentences: &["cat on the couch", "black cat", "cat sleeping on the sofa"],
        rect: (10, 12, 14, 10),
    },
    Reference {
        ref_id: 6,
        image_id: 3,
        sentences: &["the gray couch"],
        rect: (0, 16, 32, 16),
    },
    Reference {
        ref_id: 7,
        image_id: 4,
        sentences: &["pitcher throwing the ball", "man with the glove"],
        rect: (40, 10, 20, 40),
    },
    Reference {
        ref_id: 8,
        image_id: 4,
        sentences: &["batter in white uniform", "player on the right"],
        rect: (70, 20, 20, 40),
    },
    Reference {
        ref_id: 9,
        image_id: 4,
        sentences: &["catcher crouching low", "man in blue helmet"],
        rect: (10, 30, 18, 30),
    },
    Reference {
        ref_id: 10,
        image_id: 5,
        sentences: &["dog catching the frisbee", "brown dog"],
        rect: (20, 30, 20, 16),
    },
    Reference {
        ref_id: 11,
        image_id: 5,
        sentences: &["man throwing the frisbee", "person in the park"],
        rect: (5, 10, 14, 34),
    },
    Reference {
        ref_id: 12,
        image_id: 6,
        sentences: &["yellow bus", "bus near the traffic light"],
        rect: (4, 10, 24, 30),
    },
    Reference {
        ref_id: 13,
        image_id: 6,
        sentences: &["red car behind the bus", "small car"],
        rect: (6, 44, 16, 12),
    },
    Reference {
        ref_id: 14,
        image_id: 7,
        sentences: &["bowl of bananas", "bowl on the table"],
        rect: (22, 22, 20, 14),
    },
    Reference {
        ref_id: 15,
        image_id: 7,
        sentences: &["green apple", "apple next to the bowl"],
        rect: (46, 26, 8, 8),
    },
    Reference {
        ref_id: 16,
        image_id: 7,
        sentences: &["ripe banana on the table"],
        rect: (24, 24, 10, 6),
    },
    Reference {
        ref_id: 17,
        image_id: 8,
        sentences: &["brown cow", "cow in the middle"],
        rect: (36, 6, 20, 20),
    },
    Reference {
        ref_id: 18,
        image_id: 8,
        sentences: &["white sheep", "sheep near the fence"],
        rect: (4, 10, 16, 14),
    },
    Reference {
        ref_id: 19,
        image_id: 8,
        sentences: &["horse on the right", "large horse grazing"],
        rect: (66, 4, 24, 24),
    },
    Reference {
        ref_id: 20,
        image_id: 8,
        sentences: &["cow closest to the camera", "the big cow"],
        rect: (30, 14, 22, 16),
    },
];

fn main() {
    let output = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/annotations_20.json")
        });

    let images: Vec<ImageJson> = IMAGES
        .iter()
        .map(|i| ImageJson {
            id: i.id,
            width: i.width,
            height: i.height,
            categories_present: i.categories.to_vec(),
        })
        .collect();
    let categories: Vec<CategoryJson> = CategoryCatalog::coco_default()
        .entries()
        .iter()
        .map(|e| CategoryJson {
            id: e.id,
            name: e.name.clone(),
            synonyms: e.synonyms.clone(),
        })
        .collect();
    let references: Vec<ReferenceJson> = REFERENCES
        .iter()
        .map(|r| {
            let image = IMAGES.iter().find(|i| i.id == r.image_id).expect("image");
            let (x0, y0, rw, rh) = r.rect;
            assert!(
                x0 + rw <= image.width && y0 + rh <= image.height,
                "rect fits"
            );
            let mask = BinaryMask::from_fn(image.width, image.height, |x, y| {
                x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh
            })
            .expect("valid dims");
            ReferenceJson {
                ref_id: r.ref_id,
                image_id: r.image_id,
                split: "val".to_string(),
                sentences: r.sentences.iter().map(|s| s.to_string()).collect(),
                gt_rle: RleJson::from_mask(&rle_encode(&mask)),
                negatives: vec![],
            }
        })
        .collect();

    let total_sentences: usize = REFERENCES.iter().map(|r| r.sentences.len()).sum();
    assert_eq!(REFERENCES.len(), 20);
    assert_eq!(total_sentences, 40, "fixture means are pinned at 2.0");

    let file = DatasetFile {
        images,
        categories,
        references,
    };
    write_canonical(&output, &file).expect("write fixture");
    println!("wrote {}", output.display());
}
