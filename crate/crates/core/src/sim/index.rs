//! Index helpers for applying local operators to dense registers.

/// Enumerates groups of entries that differ only in a chosen set of bit positions.
///
/// `positions[j]` is the register bit carrying local bit `j`. For each group,
/// [`base`](Self::base) gives the index with all chosen bits clear and
/// `offsets[l]` the displacement of local index `l`.
#[derive(Debug, Clone)]
pub(crate) struct LocalIndexer {
    sorted: Vec<usize>,
    pub offsets: Vec<usize>,
    groups: usize,
}

impl LocalIndexer {
    pub fn new(total_bits: usize, positions: &[usize]) -> Self {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let k = positions.len();
        let offsets = (0..1usize << k)
            .map(|l| {
                positions
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| l >> j & 1 == 1)
                    .map(|(_, &p)| 1usize << p)
                    .sum()
            })
            .collect();
        LocalIndexer { sorted, offsets, groups: 1usize << (total_bits - k) }
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    #[inline]
    pub fn base(&self, mut i: usize) -> usize {
        for &p in &self.sorted {
            let low = i & ((1usize << p) - 1);
            i = low | (i >> p) << (p + 1);
        }
        i
    }
}

/// In-place Walsh–Hadamard transform (unnormalised).
pub(crate) fn walsh_hadamard<T: crate::Real>(v: &mut [T]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}
