//! Binary indexed tree over bucket widths.
//!
//! Supports point updates, append, and "find the bucket containing slot
//! `s`" in O(log n). Used by the thinning scan of the histogram engine,
//! where buckets are appended far more often than they are rebuilt.

#[derive(Debug, Clone, Default)]
pub struct Fenwick {
    tree: Vec<u64>, // 1-based
}

impl Fenwick {
    pub fn new() -> Self {
        Fenwick { tree: Vec::new() }
    }

    pub fn rebuild(&mut self, widths: impl Iterator<Item = u64> + Clone) {
        self.tree.clear();
        for w in widths {
            self.push(w);
        }
    }

    /// Appends one slot of weight `w` in O(log n).
    pub fn push(&mut self, w: u64) {
        let i = self.tree.len() + 1; // 1-based index of the new node
        let lowbit = i & i.wrapping_neg();
        // tree[i] covers (i - lowbit, i]; the new element contributes w,
        // the rest is prefix(i-1) - prefix(i - lowbit).
        let mut covered = w;
        if lowbit > 1 {
            covered += self.prefix(i - 1) - self.prefix(i - lowbit);
        }
        self.tree.push(covered);
    }

    /// Sum of widths of buckets `0..=idx` (0-based inclusive).
    pub fn prefix(&self, mut i: usize) -> u64 {
        // here `i` is a 1-based count of elements
        let mut s = 0u64;
        while i > 0 {
            s += self.tree[i - 1];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Adds `delta` (signed) to the width of 0-based bucket `idx`.
    pub fn add(&mut self, idx: usize, delta: i64) {
        let mut i = idx + 1;
        while i <= self.tree.len() {
            let v = self.tree[i - 1] as i64 + delta;
            debug_assert!(v >= 0);
            self.tree[i - 1] = v as u64;
            i += i & i.wrapping_neg();
        }
    }

    /// Returns `(bucket, offset)` such that slot `s` (0-based over the
    /// concatenation of all widths) falls in that bucket. The caller must
    /// guarantee `s < total`.
    pub fn locate(&self, s: u64) -> (usize, u64) {
        let mut pos = 0usize; // 1-based prefix position reached so far
        let mut rem = s;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.tree.len() && self.tree[next - 1] <= rem {
                rem -= self.tree[next - 1];
                pos = next;
            }
            step >>= 1;
        }
        (pos, rem) // pos is 0-based index of the bucket containing s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_locate(widths: &[u64], s: u64) -> (usize, u64) {
        let mut rem = s;
        for (i, &w) in widths.iter().enumerate() {
            if rem < w {
                return (i, rem);
            }
            rem -= w;
        }
        panic!("slot out of range");
    }

    #[test]
    fn matches_linear_scan_under_random_ops() {
        let mut seed = 0x1234_5678_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            seed >> 33
        };
        let mut widths: Vec<u64> = Vec::new();
        let mut fw = Fenwick::new();
        for round in 0..2000 {
            match next() % 3 {
                0 => {
                    let w = next() % 5;
                    widths.push(w);
                    fw.push(w);
                }
                1 if !widths.is_empty() => {
                    let idx = (next() as usize) % widths.len();
                    if widths[idx] > 0 {
                        widths[idx] -= 1;
                        fw.add(idx, -1);
                    } else {
                        widths[idx] += 3;
                        fw.add(idx, 3);
                    }
                }
                _ => {}
            }
            let total: u64 = widths.iter().sum();
            assert_eq!(total, fw.prefix(widths.len()), "round {round}");
            if total > 0 {
                for _ in 0..4 {
                    let s = next() % total;
                    assert_eq!(fw.locate(s), linear_locate(&widths, s), "slot {s}");
                }
            }
        }
    }

    #[test]
    fn push_matches_rebuild() {
        let widths = [3u64, 0, 7, 1, 1, 0, 2, 9, 4];
        let mut a = Fenwick::new();
        for &w in &widths {
            a.push(w);
        }
        let mut b = Fenwick::new();
        b.rebuild(widths.iter().copied());
        assert_eq!(a.tree, b.tree);
    }
}
