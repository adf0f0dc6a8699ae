//! Text-prompt concatenation: folding a reference's sentences into one input.
//!
//! References usually carry several sentences describing the same object.
//! Instead of evaluating each separately, they can be concatenated into one
//! long expression so the model forwards once per reference. The result is
//! clamped to the model's maximum text length.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::normalize_tokens;
use crate::rng::SplitMix64;

/// Maximum number of input tokens accepted by the model.
pub const MAX_TEXT_TOKENS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromptError {
    NoSentences,
    /// Sentences normalized to zero tokens.
    EmptyPrompt,
}

impl fmt::Display for PromptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptError::NoSentences => write!(f, "prompt needs at least one sentence"),
            PromptError::EmptyPrompt => write!(f, "sentences contain no tokens"),
        }
    }
}

impl core::error::Error for PromptError {}

/// A concatenated prompt; `truncated` flags that the joined sentences
/// exceeded `max_tokens` and were cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatPrompt {
    pub text: String,
    pub truncated: bool,
}

/// Normalizes each sentence, joins all tokens with single spaces, and
/// truncates to `max_tokens`.
pub fn text_prompt_concat(
    sentences: &[String],
    max_tokens: usize,
) -> Result<ConcatPrompt, PromptError> {
    if sentences.is_empty() {
        return Err(PromptError::NoSentences);
    }
    let mut tokens: Vec<String> = Vec::new();
    for sentence in sentences {
        tokens.extend(normalize_tokens(sentence));
    }
    if tokens.is_empty() {
        return Err(PromptError::EmptyPrompt);
    }
    let truncated = tokens.len() > max_tokens;
    if truncated {
        tokens.truncate(max_tokens);
    }
    Ok(ConcatPrompt {
        text: tokens.join(" "),
        truncated,
    })
}

/// Maps words to stable token ids in `[0, vocab_size)` for the desk-scale
/// language stub. Not a real tokenizer; just a reproducible word hash.
pub fn toy_tokenize(text: &str, vocab_size: usize) -> Vec<usize> {
    assert!(vocab_size > 0);
    normalize_tokens(text)
        .iter()
        .map(|word| {
            let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
            for b in word.as_bytes() {
                acc = acc.wrapping_mul(0x0100_0000_01b3) ^ u64::from(*b);
            }
            (SplitMix64::new(acc).next_u64() % vocab_size as u64) as usize
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn concatenates_in_order() {
        let sentences = vec![
            "woman on the right".to_string(),
            "woman in black".to_string(),
        ];
        let prompt = text_prompt_concat(&sentences, MAX_TEXT_TOKENS).unwrap();
        assert_eq!(prompt.text, "woman on the right woman in black");
        assert!(!prompt.truncated);
    }

    #[test]
    fn single_sentence_is_identity() {
        let prompt = text_prompt_concat(&["left zebra".to_string()], MAX_TEXT_TOKENS).unwrap();
        assert_eq!(prompt.text, "left zebra");
        assert!(!prompt.truncated);
    }

    #[test]
    fn truncation_sets_flag() {
        let long: Vec<String> = (0..7).map(|_| "a b c".to_string()).collect();
        let prompt = text_prompt_concat(&long, MAX_TEXT_TOKENS).unwrap();
        assert!(prompt.truncated);
        assert_eq!(prompt.text.split(' ').count(), MAX_TEXT_TOKENS);
    }

    #[test]
    fn errors_on_empty_input() {
        assert_eq!(
            text_prompt_concat(&[], MAX_TEXT_TOKENS).unwrap_err(),
            PromptError::NoSentences
        );
        assert_eq!(
            text_prompt_concat(&["..".to_string()], MAX_TEXT_TOKENS).unwrap_err(),
            PromptError::EmptyPrompt
        );
    }

    #[test]
    fn tokenizer_is_stable_and_bounded() {
        let a = toy_tokenize("man in blue hat", 128);
        let b = toy_tokenize("Man, in BLUE hat!", 128);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|&id| id < 128));
        // Same word, same id.
        assert_eq!(a[0], toy_tokenize("man", 128)[0]);
    }
}
