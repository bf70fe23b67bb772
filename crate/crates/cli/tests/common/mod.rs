//! Test-side oracles shared by the acceptance suite.

pub mod lm;

/// Levenshtein distance by top-down recursion over suffix offsets.
pub fn brute_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut [Option<usize>], w: usize) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(v) = memo[i * w + j] {
            return v;
        }
        let diag = go(a, b, i + 1, j + 1, memo, w) + usize::from(a[i] != b[j]);
        let del = go(a, b, i + 1, j, memo, w) + 1;
        let ins = go(a, b, i, j + 1, memo, w) + 1;
        let v = diag.min(del).min(ins);
        memo[i * w + j] = Some(v);
        v
    }
    let w = b.len() + 1;
    let mut memo = vec![None; (a.len() + 1) * w];
    go(a, b, 0, 0, &mut memo, w)
}

/// Lowest rank among the hypotheses closest to the reference.
pub fn brute_oracle_rank(reference: &[String], hyps: &[Vec<String>]) -> usize {
    let mut best = (usize::MAX, 0);
    for (i, h) in hyps.iter().enumerate() {
        let d = brute_edit_distance(reference, h);
        if d < best.0 {
            best = (d, i + 1);
        }
    }
    best.1
}
