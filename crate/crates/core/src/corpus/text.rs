//! Sentence, word, and syllable counts, and the Flesch-Kincaid grade level.
//!
//! Tokenization:
//! - a word is a maximal run of letters, digits, and apostrophes containing a letter or digit;
//! - sentences are the pieces between runs of `.`, `!`, `?` that contain at least one word;
//! - syllables are maximal runs of the vowels `aeiouy`, minus one for a final `e` after a
//!   non-vowel when more than one run was counted, with a minimum of one per word.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextError {
    #[error("text contains no words")]
    Empty,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
    pub avg_words_per_sentence: f64,
    pub avg_syllables_per_word: f64,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

pub fn syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let mut count = 0;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            count += 1;
        }
        prev_vowel = v;
    }
    if let [.., before, 'e'] = letters[..] {
        if !is_vowel(before) && count > 1 {
            count -= 1;
        }
    }
    count.max(1)
}

fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’'))
        .filter(|w| w.chars().any(char::is_alphanumeric))
}

pub fn text_stats(text: &str) -> Result<TextStats, TextError> {
    let word_list: Vec<&str> = words(text).collect();
    if word_list.is_empty() {
        return Err(TextError::Empty);
    }
    let sentences = text
        .split(['.', '!', '?'])
        .filter(|piece| words(piece).next().is_some())
        .count();
    let syllable_total: usize = word_list.iter().map(|w| syllables(w)).sum();
    Ok(TextStats {
        sentences,
        words: word_list.len(),
        syllables: syllable_total,
        avg_words_per_sentence: word_list.len() as f64 / sentences as f64,
        avg_syllables_per_word: syllable_total as f64 / word_list.len() as f64,
    })
}

/// Grade level `0.39·wps + 11.8·spw − 15.59`.
pub fn flesch_kincaid(avg_words_per_sentence: f64, avg_syllables_per_word: f64) -> Result<f64, TextError> {
    if avg_words_per_sentence.is_nan() || avg_words_per_sentence <= 0.0 {
        return Err(TextError::NonPositive("average words per sentence"));
    }
    if avg_syllables_per_word.is_nan() || avg_syllables_per_word <= 0.0 {
        return Err(TextError::NonPositive("average syllables per word"));
    }
    Ok(0.39 * avg_words_per_sentence + 11.8 * avg_syllables_per_word - 15.59)
}

pub fn flesch_kincaid_text(text: &str) -> Result<f64, TextError> {
    let s = text_stats(text)?;
    flesch_kincaid(s.avg_words_per_sentence, s.avg_syllables_per_word)
}
