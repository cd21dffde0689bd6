//! Unit-cost edit distance between label sequences.

/// Minimum number of insertions, deletions and substitutions turning `s`
/// into `t`.
pub fn levenshtein<T: PartialEq>(s: &[T], t: &[T]) -> usize {
    *prefix_distances(s, t)
        .last()
        .expect("row has |t| + 1 entries")
}

/// `out[p] = levenshtein(s, &t[..p])` for every `p` in `0..=t.len()`.
pub fn prefix_distances<T: PartialEq>(s: &[T], t: &[T]) -> Vec<usize> {
    let mut prev: Vec<usize> = (0..=t.len()).collect();
    let mut cur = vec![0; t.len() + 1];
    for (i, a) in s.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in t.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}
