use serde::{Deserialize, Serialize};

/// Edit decomposition of a hypothesis against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub ref_len: usize,
}

impl AlignmentResult {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

// Cell cost: (edit errors, insertions + deletions). Minimizing the pair
// lexicographically keeps the edit distance minimal and, among minimal
// alignments, maximizes substitutions. Since insertions - deletions is fixed
// by the lengths, the resulting counts do not depend on argument order.
type Cost = (usize, usize);

fn add(c: Cost, err: usize, gap: usize) -> Cost {
    (c.0 + err, c.1 + gap)
}

/// Minimum-cost word alignment under unit costs.
pub fn align<S: AsRef<str>, T: AsRef<str>>(reference: &[S], hypothesis: &[T]) -> AlignmentResult {
    let rows = reference.len();
    let cols = hypothesis.len();
    let width = cols + 1;
    let mut dp: Vec<Cost> = vec![(0, 0); (rows + 1) * width];
    for (j, cell) in dp.iter_mut().enumerate().take(width) {
        *cell = (j, j);
    }
    for i in 1..=rows {
        dp[i * width] = (i, i);
        for j in 1..=cols {
            let same = reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
            let diag = add(dp[(i - 1) * width + j - 1], usize::from(!same), 0);
            let ins = add(dp[i * width + j - 1], 1, 1);
            let del = add(dp[(i - 1) * width + j], 1, 1);
            dp[i * width + j] = diag.min(ins).min(del);
        }
    }

    // Backtrace; among equal-cost predecessors prefer sub/match, then insertion, then deletion.
    let mut out = AlignmentResult {
        ref_len: rows,
        ..Default::default()
    };
    let (mut i, mut j) = (rows, cols);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
            if add(dp[(i - 1) * width + j - 1], usize::from(!same), 0) == here {
                if !same {
                    out.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && add(dp[i * width + j - 1], 1, 1) == here {
            out.insertions += 1;
            j -= 1;
        } else {
            out.deletions += 1;
            i -= 1;
        }
    }
    out
}

/// Plain edit distance between two word sequences.
pub fn edit_errors<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    align(a, b).errors()
}
