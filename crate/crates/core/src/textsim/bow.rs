use std::collections::BTreeMap;

use super::stopwords::is_stopword;

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for t in tokenize(text).into_iter().filter(|t| !is_stopword(t)) {
        *tf.entry(t).or_insert(0.0) += 1.0;
    }
    tf
}

/// Term-frequency cosine after stopword removal; 0 when either side has no content words.
pub fn bow_cosine(a: &str, b: &str) -> f64 {
    let ta = term_frequencies(a);
    let tb = term_frequencies(b);
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let dot: f64 = ta
        .iter()
        .filter_map(|(k, v)| tb.get(k).map(|w| v * w))
        .sum();
    let na = ta.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb = tb.values().map(|v| v * v).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(0.0, 1.0)
}
