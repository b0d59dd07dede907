use crate::error::{NpfError, Result};

/// `n` choose `k`, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Strictly ascending `k`-tuples from `{0, .., D-1}`, in lexicographic order.
///
/// This is the single basis ordering for k-forms used by Gram fields, caches and
/// neural forms. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexTable {
    dim: usize,
    degree: usize,
    entries: Vec<Vec<usize>>,
}

impl MultiIndexTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<usize>] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.entries[i]
    }

    /// Position of a multi-index in the table.
    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.entries.binary_search_by(|e| e.as_slice().cmp(index)).ok()
    }
}

pub fn multi_index_table(dim: usize, degree: usize) -> Result<MultiIndexTable> {
    if degree < 1 || degree > dim {
        return Err(NpfError::InvalidDegree { k: degree, dim });
    }
    let mut entries = Vec::with_capacity(binomial(dim, degree));
    let mut current: Vec<usize> = (0..degree).collect();
    loop {
        entries.push(current.clone());
        // advance the rightmost index that still has room
        let mut i = degree;
        loop {
            if i == 0 {
                return Ok(MultiIndexTable { dim, degree, entries });
            }
            i -= 1;
            if current[i] < dim - degree + i {
                break;
            }
        }
        current[i] += 1;
        for j in i + 1..degree {
            current[j] = current[j - 1] + 1;
        }
    }
}
