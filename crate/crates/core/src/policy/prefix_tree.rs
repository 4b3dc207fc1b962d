//! Append-only Fenwick tree over nonnegative scores.

#[inline(always)]
fn lsb(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Prefix sums over nonnegative `f64` scores with `O(log n)` append and search.
///
/// Node `k` (1-based) holds the sum of values `(k - lsb(k), k]`. Appending
/// builds the new node from its children, so no subtraction is ever performed
/// and the stored sums stay accurate to summation rounding.
#[derive(Clone, Debug, Default)]
pub struct PrefixSumTree {
    values: Vec<f64>,
    // nodes[0] is unused
    nodes: Vec<f64>,
}

impl PrefixSumTree {
    pub fn new() -> Self {
        Self { values: Vec::new(), nodes: vec![0.0] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let mut tree = Self::new();
        tree.nodes.reserve(values.len());
        for v in values {
            tree.push(v);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn push(&mut self, value: f64) {
        debug_assert!(value >= 0.0, "scores must be nonnegative");
        self.values.push(value);
        let k = self.values.len();
        let mut acc = value;
        let stop = k - lsb(k);
        let mut child = k - 1;
        while child > stop {
            acc += self.nodes[child];
            child -= lsb(child);
        }
        self.nodes.push(acc);
    }

    /// Multiply every value by `factor` and rebuild.
    pub fn scale(&mut self, factor: f64) {
        let values: Vec<f64> = self.values.iter().map(|v| v * factor).collect();
        *self = Self::from_values(values);
    }

    /// Sum of the first `k` values.
    pub fn prefix_sum(&self, mut k: usize) -> f64 {
        let mut acc = 0.0;
        while k > 0 {
            acc += self.nodes[k];
            k -= lsb(k);
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.prefix_sum(self.len())
    }

    /// Index `i` with `prefix_sum(i) <= target < prefix_sum(i + 1)`.
    ///
    /// Zero-valued entries are never returned. When rounding pushes `target`
    /// past the last positive entry, that entry is returned. `None` only when
    /// all values are zero.
    pub fn find(&self, target: f64) -> Option<usize> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        let mut pos = 0usize;
        let mut rem = target.max(0.0);
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.nodes[next] <= rem {
                pos = next;
                rem -= self.nodes[next];
            }
            step >>= 1;
        }
        if pos < n {
            Some(pos)
        } else {
            self.values.iter().rposition(|&v| v > 0.0)
        }
    }
}
