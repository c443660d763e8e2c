//! Walsh-Hadamard spreading codebooks and chip-level spreading/despreading.
//!
//! Code length equals node count: node `l` owns Hadamard row `l` (row 0 is
//! the all-ones row). All arithmetic is exact over {+1, -1} integers.

use crate::error::{Error, Result};

/// An L x L Sylvester Hadamard matrix; row `l` is node `l`'s chip code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadingCodebook {
    l: usize,
    rows: Vec<i8>, // row-major, l * l entries in {+1, -1}
}

impl SpreadingCodebook {
    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    /// Chip code of one node.
    pub fn code(&self, node: usize) -> &[i8] {
        &self.rows[node * self.l..(node + 1) * self.l]
    }

    /// Chip `k` of node `l`'s code.
    #[inline]
    pub fn chip(&self, node: usize, k: usize) -> i8 {
        self.rows[node * self.l + k]
    }
}

/// Builds the Sylvester-construction Hadamard codebook of size `l`.
pub fn build_hadamard(l: usize) -> Result<SpreadingCodebook> {
    if l == 0 || !l.is_power_of_two() {
        return Err(Error::invalid(
            "l",
            format!("code length must be a power of 2, got {l}"),
        ));
    }
    let mut rows = vec![1i8; l * l];
    // entry (i, k) = (-1)^{popcount(i & k)}
    for i in 0..l {
        for k in 0..l {
            if (i & k).count_ones() % 2 == 1 {
                rows[i * l + k] = -1;
            }
        }
    }
    Ok(SpreadingCodebook { l, rows })
}

/// A node's information bits as a +/-1 sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<i8>,
    node_id: usize,
}

impl BitStream {
    /// Wraps a +/-1 sequence; rejects anything else.
    pub fn from_pm1(bits: Vec<i8>, node_id: usize) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::invalid(
                "bits",
                format!("entry {pos} is {}, expected +1 or -1", bits[pos]),
            ));
        }
        Ok(BitStream { bits, node_id })
    }

    /// Converts {0, 1} bits at the boundary: 0 -> -1, 1 -> +1.
    pub fn from_binary(bits: &[u8], node_id: usize) -> Result<Self> {
        let mapped = bits
            .iter()
            .enumerate()
            .map(|(pos, &b)| match b {
                0 => Ok(-1i8),
                1 => Ok(1i8),
                other => Err(Error::invalid(
                    "bits",
                    format!("entry {pos} is {other}, expected 0 or 1"),
                )),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(BitStream {
            bits: mapped,
            node_id,
        })
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Spreads a bit stream by one code row: chip `(n-1)L + k` carries
/// `b_n * c_k`. Output length is `bits.len() * code.len()`.
pub fn spread(bits: &BitStream, code: &[i8]) -> Vec<i8> {
    let mut chips = Vec::with_capacity(bits.len() * code.len());
    for &b in bits.bits() {
        chips.extend(code.iter().map(|&c| b * c));
    }
    chips
}

/// Inner product of one bit period's aggregate chips with a code row.
///
/// When the aggregate is `sum_k b^(k) * c^(k)` over all nodes, orthogonality
/// makes this exactly `L * b^(l)` for code row `l`.
pub fn despread_exact(aggregate_chips: &[i64], code: &[i8]) -> Result<i64> {
    if aggregate_chips.len() != code.len() {
        return Err(Error::LengthMismatch {
            expected: code.len(),
            actual: aggregate_chips.len(),
        });
    }
    Ok(aggregate_chips
        .iter()
        .zip(code)
        .map(|(&a, &c)| a * c as i64)
        .sum())
}
