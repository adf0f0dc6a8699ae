//! Tokenization and lexicon tagging of referring expressions.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::{CategoryCatalog, Lexicons};

/// Per-token tag. A token is a noun if it resolves in the category catalog or
/// the common-noun list; color and position adjectives take precedence so a
/// word like "orange" always reads as the color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Noun,
    AdjColor,
    AdjPosition,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    /// The input contains no tokens after normalization.
    EmptyExpression,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::EmptyExpression => write!(f, "expression is empty"),
        }
    }
}

impl core::error::Error for ExprError {}

/// A tokenized, tagged referring expression.
///
/// `text` keeps the original input; `tokens` are its normalized form
/// (lowercased, punctuation stripped, whitespace collapsed) and `tags` run
/// parallel to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferringExpression {
    pub text: String,
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
}

impl ReferringExpression {
    /// Normalized form: tokens joined by single spaces.
    pub fn normalized(&self) -> String {
        self.tokens.join(" ")
    }

    /// Indices of noun tokens, in order.
    pub fn noun_indices(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == Tag::Noun)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of attribute (color or position) tokens, in order.
    pub fn attribute_indices(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, Tag::AdjColor | Tag::AdjPosition))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Lowercases, replaces every non-alphanumeric character with a space, and
/// splits on whitespace.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().map(String::from).collect()
}

/// Tokenizes and tags an expression against the catalog and lexicons.
pub fn tag_tokens(
    text: &str,
    catalog: &CategoryCatalog,
    lex: &Lexicons,
) -> Result<ReferringExpression, ExprError> {
    let tokens = normalize_tokens(text);
    if tokens.is_empty() {
        return Err(ExprError::EmptyExpression);
    }
    let tags = tokens
        .iter()
        .map(|t| {
            if lex.is_color(t) {
                Tag::AdjColor
            } else if lex.is_position(t) {
                Tag::AdjPosition
            } else if catalog.is_category_word(t) || lex.is_common_noun(t) {
                Tag::Noun
            } else {
                Tag::Other
            }
        })
        .collect();
    Ok(ReferringExpression {
        text: String::from(text),
        tokens,
        tags,
    })
}

/// Index of the first noun token — the target object of the expression.
pub fn first_noun(expr: &ReferringExpression) -> Option<usize> {
    expr.tags.iter().position(|t| *t == Tag::Noun)
}
