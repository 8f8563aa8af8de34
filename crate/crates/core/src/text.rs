//! Tokenization shared by query expansion and the hash embedder.

/// Fixed English stop list; everything else counts as a content word.
pub const STOP_WORDS: [&str; 50] = [
    "a", "about", "all", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can",
    "could", "did", "do", "does", "for", "from", "had", "has", "have", "how", "i", "in", "is", "it",
    "its", "me", "of", "on", "or", "that", "the", "their", "there", "these", "this", "to", "was",
    "we", "were", "what", "when", "where", "which", "who", "with", "you",
];

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.contains(&word)
}

/// Whitespace tokens, lowercased, with surrounding punctuation trimmed,
/// minus stop words. Order of first occurrence, no duplicates.
pub fn content_words(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for raw in text.split_whitespace() {
        let word = raw
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if word.is_empty() || is_stop_word(&word) || out.contains(&word) {
            continue;
        }
        out.push(word);
    }
    out
}

/// Lowercased alphanumeric runs (keeping inner `-` and `_`), stop words
/// removed, duplicates kept.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_'))
        .map(|t| t.trim_matches(|c| c == '-' || c == '_').to_lowercase())
        .filter(|t| !t.is_empty() && !is_stop_word(t))
        .collect()
}
