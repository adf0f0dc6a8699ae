//! Negative-sentence generation.
//!
//! Five strategies turn positive referring expressions into sentences that
//! provably do not describe anything in the target image: (1) borrow a
//! sentence from a reference on another image, (2) emit an absent category
//! name, (3) replace the target noun with an absent category, (4) change an
//! attribute (color/position) of the target, (5) change or add the related
//! object. Every candidate must pass [`validate_negative`]: none of its nouns
//! may resolve to a category present in the image, and it must not consist
//! solely of vague words, which would make its truth depend on image context.
//!
//! [`generate_negatives`] cycles the strategies round-robin, falls back to
//! strategy (2) when a strategy cannot produce a valid candidate, rejects
//! duplicates, and is a pure function of its inputs and seed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{first_noun, tag_tokens, ReferringExpression, Tag};
use crate::lexicon::{CategoryCatalog, ImageContext, Lexicons};
use crate::rng::SplitMix64;

/// Draws from the sentence pool before strategy (1) gives up.
pub const POOL_DRAW_LIMIT: usize = 64;
/// Attempts per output slot before falling back to strategy (2), and per
/// fallback before the whole generation fails.
pub const SLOT_RETRY_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenStrategy {
    RandomSentence,
    CategoryName,
    ReplaceTarget,
    ChangeAttribute,
    ChangeRelation,
}

impl GenStrategy {
    pub const ALL: [GenStrategy; 5] = [
        GenStrategy::RandomSentence,
        GenStrategy::CategoryName,
        GenStrategy::ReplaceTarget,
        GenStrategy::ChangeAttribute,
        GenStrategy::ChangeRelation,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GenStrategy::RandomSentence => "random_sentence",
            GenStrategy::CategoryName => "category_name",
            GenStrategy::ReplaceTarget => "replace_target",
            GenStrategy::ChangeAttribute => "change_attribute",
            GenStrategy::ChangeRelation => "change_relation",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.label() == label)
    }
}

/// A generated negative sentence. `source_ref_id` is the reference the
/// sentence was generated for; its image context is the one the sentence was
/// validated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSentence {
    pub text: String,
    pub strategy: GenStrategy,
    pub source_ref_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    /// Requested zero negatives.
    InvalidCount,
    /// Every catalog category is present in the image.
    NoAbsentCategory,
    /// Bounded retries could not produce enough distinct valid negatives.
    GenerationExhausted {
        ref_id: u64,
        produced: usize,
        requested: usize,
    },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InvalidCount => write!(f, "negative count must be at least 1"),
            GenError::NoAbsentCategory => {
                write!(f, "no catalog category is absent from the image")
            }
            GenError::GenerationExhausted {
                ref_id,
                produced,
                requested,
            } => write!(
                f,
                "reference {ref_id}: produced only {produced} of {requested} distinct valid negatives"
            ),
        }
    }
}

impl core::error::Error for GenError {}

/// True iff `text` can be certified as a negative for the target image:
/// (a) none of its nouns resolve to a category present in the image, and
/// (b) it is not made exclusively of vague or untagged words.
pub fn validate_negative(
    text: &str,
    catalog: &CategoryCatalog,
    target: &ImageContext,
    lex: &Lexicons,
) -> bool {
    let Ok(expr) = tag_tokens(text, catalog, lex) else {
        return false;
    };
    for (token, tag) in expr.tokens.iter().zip(&expr.tags) {
        if *tag == Tag::Noun {
            let ids = catalog.resolve_word(token);
            if ids.iter().any(|id| target.categories_present.contains(id)) {
                return false;
            }
        }
    }
    let vague_only = expr
        .tokens
        .iter()
        .zip(&expr.tags)
        .all(|(token, tag)| lex.is_vague(token) || *tag == Tag::Other);
    !vague_only
}

/// Strategy (1): draw a sentence from a reference on a different image whose
/// nouns match nothing present in the target image. Returns the sentence with
/// its original casing, or `None` after [`POOL_DRAW_LIMIT`] draws.
pub fn strategy_random_sentence(
    pool: &[(String, ImageContext)],
    target: &ImageContext,
    catalog: &CategoryCatalog,
    lex: &Lexicons,
    rng: &mut SplitMix64,
) -> Option<String> {
    if pool.is_empty() {
        return None;
    }
    for _ in 0..POOL_DRAW_LIMIT {
        let (text, source) = &pool[rng.below(pool.len())];
        if source.image_id == target.image_id {
            continue;
        }
        if validate_negative(text, catalog, target, lex) {
            return Some(text.clone());
        }
    }
    None
}

/// Strategy (2): a category name verified absent from the image.
pub fn strategy_category(
    catalog: &CategoryCatalog,
    target: &ImageContext,
    rng: &mut SplitMix64,
) -> Result<String, GenError> {
    let absent: Vec<&str> = catalog
        .entries()
        .iter()
        .filter(|e| !target.categories_present.contains(&e.id))
        .map(|e| e.name.as_str())
        .collect();
    if absent.is_empty() {
        return Err(GenError::NoAbsentCategory);
    }
    Ok(String::from(absent[rng.below(absent.len())]))
}

fn pick_absent_category<'c>(
    catalog: &'c CategoryCatalog,
    target: &ImageContext,
    rng: &mut SplitMix64,
) -> Option<&'c str> {
    let absent: Vec<&str> = catalog
        .entries()
        .iter()
        .filter(|e| !target.categories_present.contains(&e.id))
        .map(|e| e.name.as_str())
        .collect();
    if absent.is_empty() {
        None
    } else {
        Some(absent[rng.below(absent.len())])
    }
}

fn splice_tokens(tokens: &[String], index: usize, replacement: &str) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len() + 2);
    out.extend(tokens[..index].iter().map(String::as_str));
    out.extend(replacement.split_whitespace());
    out.extend(tokens[index + 1..].iter().map(String::as_str));
    out.join(" ")
}

/// Strategy (3): replace the first noun (the target object) with an absent
/// category name, keeping the rest of the sentence intact.
pub fn strategy_replace_target(
    expr: &ReferringExpression,
    catalog: &CategoryCatalog,
    target: &ImageContext,
    rng: &mut SplitMix64,
) -> Option<String> {
    let noun = first_noun(expr)?;
    let name = pick_absent_category(catalog, target, rng)?;
    Some(splice_tokens(&expr.tokens, noun, name))
}

/// Strategy (4): change an attribute of the target object. If the expression
/// has color/position tokens, one of them (uniformly chosen) is replaced by a
/// different word from the same lexicon; otherwise a random position word is
/// prepended and a random color word inserted before the first noun.
pub fn strategy_change_attribute(
    expr: &ReferringExpression,
    lex: &Lexicons,
    rng: &mut SplitMix64,
) -> Option<String> {
    let attrs = expr.attribute_indices();
    if !attrs.is_empty() {
        let index = attrs[rng.below(attrs.len())];
        let original = expr.tokens[index].as_str();
        let list = match expr.tags[index] {
            Tag::AdjColor => lex.colors(),
            Tag::AdjPosition => lex.positions(),
            _ => unreachable!("attribute_indices returns only adjective tags"),
        };
        let candidates: Vec<&str> = list
            .iter()
            .map(String::as_str)
            .filter(|w| *w != original)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let replacement = candidates[rng.below(candidates.len())];
        return Some(splice_tokens(&expr.tokens, index, replacement));
    }
    // No attributes: add a random position and color around the target noun.
    let noun = first_noun(expr)?;
    if lex.positions().is_empty() || lex.colors().is_empty() {
        return None;
    }
    let position = &lex.positions()[rng.below(lex.positions().len())];
    let color = &lex.colors()[rng.below(lex.colors().len())];
    let mut out: Vec<&str> = Vec::with_capacity(expr.tokens.len() + 2);
    out.push(position);
    out.extend(expr.tokens[..noun].iter().map(String::as_str));
    out.push(color);
    out.extend(expr.tokens[noun..].iter().map(String::as_str));
    Some(out.join(" "))
}

/// Strategy (5): change the related object. With two or more nouns the second
/// becomes an absent category name; with exactly one, a relation to an absent
/// category is appended ("<position> to the <category>").
pub fn strategy_change_relation(
    expr: &ReferringExpression,
    catalog: &CategoryCatalog,
    target: &ImageContext,
    lex: &Lexicons,
    rng: &mut SplitMix64,
) -> Option<String> {
    let nouns = expr.noun_indices();
    if nouns.is_empty() {
        return None;
    }
    let name = pick_absent_category(catalog, target, rng)?;
    if nouns.len() >= 2 {
        return Some(splice_tokens(&expr.tokens, nouns[1], name));
    }
    if lex.positions().is_empty() {
        return None;
    }
    let position = &lex.positions()[rng.below(lex.positions().len())];
    let mut out = expr.normalized();
    out.push(' ');
    out.push_str(position);
    out.push_str(" to the ");
    out.push_str(name);
    Some(out)
}

/// Everything the generator needs to know about one reference.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceInput<'a> {
    pub ref_id: u64,
    pub positives: &'a [String],
    pub context: &'a ImageContext,
}

/// Generates exactly `n` distinct, validated negative sentences for one
/// reference.
///
/// Strategies cycle 1→2→3→4→5→1…; a slot whose strategy cannot produce a
/// valid, distinct candidate within [`SLOT_RETRY_LIMIT`] attempts falls back
/// to strategy (2) and is labeled accordingly. Word-level strategies pick a
/// positive sentence uniformly per attempt. Deterministic for fixed inputs
/// and seed.
pub fn generate_negatives(
    reference: &ReferenceInput<'_>,
    pool: &[(String, ImageContext)],
    catalog: &CategoryCatalog,
    lex: &Lexicons,
    n: usize,
    seed: u64,
) -> Result<Vec<NegativeSentence>, GenError> {
    if n == 0 {
        return Err(GenError::InvalidCount);
    }
    let mut rng = SplitMix64::new(seed);
    let tagged: Vec<Option<ReferringExpression>> = reference
        .positives
        .iter()
        .map(|s| tag_tokens(s, catalog, lex).ok())
        .collect();
    let pick_tagged = |rng: &mut SplitMix64| -> Option<&ReferringExpression> {
        if tagged.is_empty() {
            return None;
        }
        tagged[rng.below(tagged.len())].as_ref()
    };

    let mut out: Vec<NegativeSentence> = Vec::with_capacity(n);
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for slot in 0..n {
        let strategy = GenStrategy::ALL[slot % GenStrategy::ALL.len()];
        let mut accepted: Option<(String, GenStrategy)> = None;

        for _ in 0..SLOT_RETRY_LIMIT {
            let candidate = match strategy {
                GenStrategy::RandomSentence => {
                    strategy_random_sentence(pool, reference.context, catalog, lex, &mut rng)
                }
                GenStrategy::CategoryName => {
                    strategy_category(catalog, reference.context, &mut rng).ok()
                }
                GenStrategy::ReplaceTarget => pick_tagged(&mut rng).and_then(|expr| {
                    strategy_replace_target(expr, catalog, reference.context, &mut rng)
                }),
                GenStrategy::ChangeAttribute => pick_tagged(&mut rng)
                    .filter(|expr| first_noun(expr).is_some())
                    .and_then(|expr| strategy_change_attribute(expr, lex, &mut rng)),
                GenStrategy::ChangeRelation => pick_tagged(&mut rng).and_then(|expr| {
                    strategy_change_relation(expr, catalog, reference.context, lex, &mut rng)
                }),
            };
            if let Some(text) = candidate {
                if validate_negative(&text, catalog, reference.context, lex)
                    && !seen.contains(&text)
                {
                    accepted = Some((text, strategy));
                    break;
                }
            }
        }

        if accepted.is_none() && strategy != GenStrategy::CategoryName {
            for _ in 0..SLOT_RETRY_LIMIT {
                if let Ok(text) = strategy_category(catalog, reference.context, &mut rng) {
                    if validate_negative(&text, catalog, reference.context, lex)
                        && !seen.contains(&text)
                    {
                        accepted = Some((text, GenStrategy::CategoryName));
                        break;
                    }
                } else {
                    break;
                }
            }
        }

        match accepted {
            Some((text, strategy)) => {
                seen.insert(text.clone());
                out.push(NegativeSentence {
                    text,
                    strategy,
                    source_ref_id: reference.ref_id,
                });
            }
            None => {
                return Err(GenError::GenerationExhausted {
                    ref_id: reference.ref_id,
                    produced: out.len(),
                    requested: n,
                })
            }
        }
    }
    Ok(out)
}
