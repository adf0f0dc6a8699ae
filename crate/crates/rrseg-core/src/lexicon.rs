//! Word lists and the category catalog backing the deterministic tagger.
//!
//! The tagger deliberately avoids a statistical part-of-speech model: for the
//! short, formulaic register of referring expressions, lexicon lookup against
//! the category catalog plus a shipped common-noun list is accurate enough
//! and keeps generation fully reproducible. The default lists ship embedded
//! in the crate and can be overridden from a sectioned plain-text file.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Embedded default lexicon, `[vague]`/`[colors]`/`[positions]`/`[nouns]`
/// sections, one word per line.
pub const DEFAULT_LEXICON: &str = include_str!("../data/default_lexicon.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconError {
    /// A word outside any `[section]` header, or an unknown section name.
    UnknownSection { line: usize },
    /// A required section is missing or empty.
    EmptySection { section: &'static str },
    /// The color and position lists must not share words.
    ColorPositionOverlap { word: String },
    /// Catalog ids must be unique and names non-empty.
    BadCatalog { detail: String },
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::UnknownSection { line } => {
                write!(f, "lexicon line {line}: word outside a known [section]")
            }
            LexiconError::EmptySection { section } => {
                write!(f, "lexicon section [{section}] is missing or empty")
            }
            LexiconError::ColorPositionOverlap { word } => {
                write!(f, "word {word:?} appears in both [colors] and [positions]")
            }
            LexiconError::BadCatalog { detail } => write!(f, "bad category catalog: {detail}"),
        }
    }
}

impl core::error::Error for LexiconError {}

/// The word lists consulted during tagging, vague filtering, and attribute
/// substitution.
///
/// Every color and position word counts as vague in addition to the explicit
/// `[vague]` entries: a sentence made only of such words ("left one", "the
/// black") depends entirely on image context and can never be certified as a
/// negative.
#[derive(Debug, Clone)]
pub struct Lexicons {
    vague_words: BTreeSet<String>,
    colors: Vec<String>,
    positions: Vec<String>,
    nouns: BTreeSet<String>,
}

impl Lexicons {
    pub fn new(
        vague: impl IntoIterator<Item = String>,
        colors: Vec<String>,
        positions: Vec<String>,
        nouns: impl IntoIterator<Item = String>,
    ) -> Result<Self, LexiconError> {
        if colors.is_empty() {
            return Err(LexiconError::EmptySection { section: "colors" });
        }
        if positions.is_empty() {
            return Err(LexiconError::EmptySection {
                section: "positions",
            });
        }
        let color_set: BTreeSet<&String> = colors.iter().collect();
        if let Some(word) = positions.iter().find(|p| color_set.contains(p)) {
            return Err(LexiconError::ColorPositionOverlap { word: word.clone() });
        }
        let mut vague_words: BTreeSet<String> = vague.into_iter().collect();
        if vague_words.is_empty() {
            return Err(LexiconError::EmptySection { section: "vague" });
        }
        vague_words.extend(colors.iter().cloned());
        vague_words.extend(positions.iter().cloned());
        let nouns: BTreeSet<String> = nouns.into_iter().collect();
        if nouns.is_empty() {
            return Err(LexiconError::EmptySection { section: "nouns" });
        }
        Ok(Self {
            vague_words,
            colors,
            positions,
            nouns,
        })
    }

    /// Parses the sectioned plain-text format (see [`DEFAULT_LEXICON`]).
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = match name {
                    "vague" => Some("vague"),
                    "colors" => Some("colors"),
                    "positions" => Some("positions"),
                    "nouns" => Some("nouns"),
                    _ => return Err(LexiconError::UnknownSection { line: i + 1 }),
                };
                continue;
            }
            let section = current.ok_or(LexiconError::UnknownSection { line: i + 1 })?;
            sections
                .entry(section)
                .or_default()
                .push(line.to_lowercase());
        }
        let mut take = |name: &'static str| -> Result<Vec<String>, LexiconError> {
            sections
                .remove(name)
                .filter(|v| !v.is_empty())
                .ok_or(LexiconError::EmptySection { section: name })
        };
        let vague = take("vague")?;
        let mut colors = take("colors")?;
        let mut positions = take("positions")?;
        let nouns = take("nouns")?;
        colors.dedup();
        positions.dedup();
        Self::new(vague, colors, positions, nouns)
    }

    /// The built-in defaults shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("embedded lexicon is well-formed")
    }

    /// Copy with an empty position list for attribute generation, used when
    /// building splits in the style of datasets that ban absolute location
    /// words. Position words remain in the vague set.
    pub fn without_absolute_positions(&self) -> Self {
        Self {
            vague_words: self.vague_words.clone(),
            colors: self.colors.clone(),
            positions: Vec::new(),
            nouns: self.nouns.clone(),
        }
    }

    pub fn is_vague(&self, token: &str) -> bool {
        self.vague_words.contains(token)
    }

    pub fn is_color(&self, token: &str) -> bool {
        self.colors.iter().any(|c| c == token)
    }

    pub fn is_position(&self, token: &str) -> bool {
        self.positions.iter().any(|p| p == token)
    }

    pub fn is_common_noun(&self, token: &str) -> bool {
        lookup_with_plural(token, |t| self.nouns.contains(t))
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn positions(&self) -> &[String] {
        &self.positions
    }
}

/// Tries `token` as written, then with common plural endings folded away.
pub(crate) fn lookup_with_plural(token: &str, mut hit: impl FnMut(&str) -> bool) -> bool {
    if hit(token) {
        return true;
    }
    if let Some(stem) = token.strip_suffix("ies") {
        let mut y = String::with_capacity(stem.len() + 1);
        y.push_str(stem);
        y.push('y');
        if hit(&y) {
            return true;
        }
    }
    if let Some(stem) = token.strip_suffix("es") {
        if hit(stem) {
            return true;
        }
    }
    if let Some(stem) = token.strip_suffix('s') {
        if hit(stem) {
            return true;
        }
    }
    false
}

/// One catalog category: a stable id, a display name, and single-word
/// synonyms that resolve to it during tagging and validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryEntry {
    pub id: u32,
    pub name: String,
    pub synonyms: Vec<String>,
}

/// The closed set of object categories used to decide whether a sentence can
/// describe something in a given image.
///
/// A word resolves to a category if it equals a single-word name, the head
/// (last) word of a multi-word name, or any synonym; plural endings are
/// folded. Resolution is deliberately generous — mapping "bag" to several
/// bag-like categories only ever makes validation stricter.
#[derive(Debug, Clone)]
pub struct CategoryCatalog {
    entries: Vec<CategoryEntry>,
    word_index: BTreeMap<String, BTreeSet<u32>>,
}

impl CategoryCatalog {
    pub fn new(entries: Vec<CategoryEntry>) -> Result<Self, LexiconError> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if e.name.trim().is_empty() {
                return Err(LexiconError::BadCatalog {
                    detail: alloc::format!("category {} has an empty name", e.id),
                });
            }
            if !seen.insert(e.id) {
                return Err(LexiconError::BadCatalog {
                    detail: alloc::format!("duplicate category id {}", e.id),
                });
            }
        }
        let mut word_index: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
        for e in &entries {
            let name = e.name.to_lowercase();
            let words: Vec<&str> = name.split_whitespace().collect();
            let key = if words.len() == 1 {
                words[0]
            } else {
                *words.last().expect("non-empty name")
            };
            word_index.entry(key.to_string()).or_default().insert(e.id);
            for syn in &e.synonyms {
                word_index
                    .entry(syn.to_lowercase())
                    .or_default()
                    .insert(e.id);
            }
        }
        Ok(Self {
            entries,
            word_index,
        })
    }

    /// The standard 80-category object catalog with curated synonyms.
    pub fn coco_default() -> Self {
        let entries = COCO_CATEGORIES
            .iter()
            .map(|(id, name, synonyms)| CategoryEntry {
                id: *id,
                name: (*name).to_string(),
                synonyms: synonyms.iter().map(|s| (*s).to_string()).collect(),
            })
            .collect();
        Self::new(entries).expect("built-in catalog is well-formed")
    }

    pub fn entries(&self) -> &[CategoryEntry] {
        &self.entries
    }

    pub fn contains_id(&self, id: u32) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    pub fn name_of(&self, id: u32) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.name.as_str())
    }

    /// Category ids a token resolves to (plural-folded). Empty if none.
    pub fn resolve_word(&self, token: &str) -> BTreeSet<u32> {
        let mut ids = BTreeSet::new();
        lookup_with_plural(token, |t| {
            if let Some(found) = self.word_index.get(t) {
                ids.extend(found.iter().copied());
                true
            } else {
                false
            }
        });
        ids
    }

    /// Whether the token names any catalog category.
    pub fn is_category_word(&self, token: &str) -> bool {
        !self.resolve_word(token).is_empty()
    }
}

/// The categories annotated as present in one image; the ground truth against
/// which candidate negatives are validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageContext {
    pub image_id: u64,
    pub categories_present: BTreeSet<u32>,
}

impl ImageContext {
    pub fn new(image_id: u64, categories_present: impl IntoIterator<Item = u32>) -> Self {
        Self {
            image_id,
            categories_present: categories_present.into_iter().collect(),
        }
    }
}

/// The standard 80 object categories (stable ids with the historical gaps)
/// plus single-word synonyms tuned for referring-expression text.
const COCO_CATEGORIES: &[(u32, &str, &[&str])] = &[
    (
        1,
        "person",
        &[
            "man",
            "men",
            "woman",
            "women",
            "boy",
            "girl",
            "guy",
            "lady",
            "ladies",
            "kid",
            "child",
            "children",
            "baby",
            "people",
            "player",
            "male",
            "female",
            "dude",
            "gentleman",
            "toddler",
            "teenager",
            "adult",
            "human",
            "skier",
            "snowboarder",
            "surfer",
            "skater",
            "rider",
            "driver",
            "batter",
            "pitcher",
            "catcher",
            "couple",
            "crowd",
            "chef",
            "officer",
            "worker",
        ],
    ),
    (2, "bicycle", &["bike"]),
    (
        3,
        "car",
        &["automobile", "sedan", "taxi", "cab", "suv", "jeep", "van"],
    ),
    (4, "motorcycle", &["motorbike", "moped"]),
    (5, "airplane", &["plane", "jet", "aircraft"]),
    (6, "bus", &["minibus"]),
    (7, "train", &["locomotive", "subway", "tram"]),
    (8, "truck", &["lorry", "pickup", "semi"]),
    (
        9,
        "boat",
        &[
            "ship", "sailboat", "canoe", "kayak", "yacht", "ferry", "raft",
        ],
    ),
    (10, "traffic light", &["stoplight"]),
    (11, "fire hydrant", &[]),
    (13, "stop sign", &[]),
    (14, "parking meter", &[]),
    (15, "bench", &[]),
    (
        16,
        "bird",
        &[
            "pigeon", "seagull", "gull", "duck", "goose", "geese", "swan", "crow", "sparrow",
            "eagle", "hawk", "owl", "parrot", "chicken", "hen", "rooster", "flamingo", "penguin",
            "ostrich", "peacock",
        ],
    ),
    (17, "cat", &["kitten", "kitty"]),
    (18, "dog", &["puppy", "pup"]),
    (19, "horse", &["pony", "foal", "stallion", "mare"]),
    (20, "sheep", &["lamb", "ram", "ewe"]),
    (21, "cow", &["bull", "calf", "cattle", "ox"]),
    (22, "elephant", &[]),
    (23, "bear", &["cub", "panda"]),
    (24, "zebra", &[]),
    (25, "giraffe", &[]),
    (27, "backpack", &["knapsack"]),
    (28, "umbrella", &["parasol"]),
    (31, "handbag", &["purse", "bag"]),
    (32, "tie", &["necktie", "bowtie"]),
    (33, "suitcase", &["luggage", "briefcase"]),
    (34, "frisbee", &["disc"]),
    (35, "skis", &["ski"]),
    (36, "snowboard", &[]),
    (
        37,
        "sports ball",
        &[
            "baseball",
            "basketball",
            "football",
            "volleyball",
            "softball",
        ],
    ),
    (38, "kite", &[]),
    (39, "baseball bat", &[]),
    (40, "baseball glove", &["mitt"]),
    (41, "skateboard", &[]),
    (42, "surfboard", &[]),
    (43, "tennis racket", &["racquet"]),
    (44, "bottle", &[]),
    (46, "wine glass", &[]),
    (47, "cup", &["mug"]),
    (48, "fork", &[]),
    (49, "knife", &[]),
    (50, "spoon", &[]),
    (51, "bowl", &[]),
    (52, "banana", &[]),
    (53, "apple", &[]),
    (54, "sandwich", &[]),
    (55, "orange", &[]),
    (56, "broccoli", &[]),
    (57, "carrot", &[]),
    (58, "hot dog", &["hotdog", "frank", "wiener"]),
    (59, "pizza", &[]),
    (60, "donut", &["doughnut"]),
    (61, "cake", &["cupcake"]),
    (62, "chair", &["armchair", "stool", "seat"]),
    (63, "couch", &["sofa", "loveseat"]),
    (64, "potted plant", &["houseplant"]),
    (65, "bed", &["mattress"]),
    (67, "dining table", &["desk"]),
    (70, "toilet", &["urinal"]),
    (72, "tv", &["television", "monitor", "screen"]),
    (73, "laptop", &["computer", "macbook"]),
    (74, "mouse", &[]),
    (75, "remote", &[]),
    (76, "keyboard", &[]),
    (
        77,
        "cell phone",
        &["cellphone", "smartphone", "iphone", "telephone", "mobile"],
    ),
    (78, "microwave", &[]),
    (79, "oven", &["stove"]),
    (80, "toaster", &[]),
    (81, "sink", &["basin"]),
    (82, "refrigerator", &["fridge", "freezer"]),
    (84, "book", &[]),
    (85, "clock", &["watch"]),
    (86, "vase", &[]),
    (87, "scissors", &["shears"]),
    (88, "teddy bear", &["teddy"]),
    (89, "hair drier", &["hairdryer", "dryer", "blowdryer"]),
    (90, "toothbrush", &[]),
];
