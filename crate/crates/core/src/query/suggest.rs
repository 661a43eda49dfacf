use crate::index::IndexSnapshot;

/// Top `k` unigrams and bigrams starting with `prefix`, by corpus frequency
/// then lexicographically.
pub fn suggest(index: &IndexSnapshot, prefix: &str, k: usize) -> Vec<String> {
    let prefix = prefix.trim().to_lowercase();
    if prefix.is_empty() || k == 0 {
        return Vec::new();
    }
    let mut found: Vec<(&String, u64)> = index
        .suggestions()
        .range(prefix.clone()..)
        .take_while(|(entry, _)| entry.starts_with(&prefix))
        .map(|(entry, &count)| (entry, count))
        .collect();
    found.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    found.into_iter().take(k).map(|(e, _)| e.clone()).collect()
}
