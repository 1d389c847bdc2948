use crate::error::{Error, Result};

/// The joint strategy space `A = A_1 x ... x A_p` in lexicographic order,
/// player 1 most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    counts: Vec<usize>,
}

impl ProfileSpace {
    pub fn new(counts: Vec<usize>) -> Self {
        ProfileSpace { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `prod m_i`, saturating at `u128::MAX`.
    pub fn product(&self) -> u128 {
        self.counts
            .iter()
            .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
            .unwrap_or(u128::MAX)
    }

    /// `|A|` if it does not exceed `cap`.
    pub fn size_capped(&self, cap: u128) -> Result<usize> {
        let product = self.product();
        if product > cap || product > usize::MAX as u128 {
            return Err(Error::Capacity { product, cap });
        }
        Ok(product as usize)
    }

    /// Writes the profile with lexicographic rank `index` into `out`.
    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &m) in out.iter_mut().zip(&self.counts).rev() {
            *slot = index % m;
            index /= m;
        }
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.counts.len()];
        self.decode_into(index, &mut out);
        out
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        x.iter()
            .zip(&self.counts)
            .fold(0usize, |acc, (&s, &m)| acc * m + s)
    }

    /// Iterates every profile in lexicographic order (no cap check).
    pub fn iter(&self) -> ProfileIter<'_> {
        ProfileIter {
            counts: &self.counts,
            next: Some(vec![0; self.counts.len()]),
        }
    }
}

pub struct ProfileIter<'a> {
    counts: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for ProfileIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for k in (0..succ.len()).rev() {
            succ[k] += 1;
            if succ[k] < self.counts[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    }
}
