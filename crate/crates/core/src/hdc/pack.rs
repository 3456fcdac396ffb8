use super::BipolarHv;
use crate::error::{Error, Result};

/// Dimension-packed hypervector: `dim / n` sums of `n` adjacent bipolar
/// elements, each in `[-n, n]` with the parity of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedHv {
    elems: Vec<i8>,
    n: u8,
}

impl PackedHv {
    pub fn new(elems: Vec<i8>, n: u8) -> Result<Self> {
        if !(1..=7).contains(&n) {
            return Err(Error::param(format!("pack factor must be in 1..=7, got {n}")));
        }
        let bound = n as i8;
        if let Some(&bad) = elems.iter().find(|&&e| e.abs() > bound || (e - bound).rem_euclid(2) != 0) {
            return Err(Error::param(format!("packed element {bad} invalid for n={n}")));
        }
        Ok(Self { elems, n })
    }

    pub fn elems(&self) -> &[i8] {
        &self.elems
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Bipolar dimension this vector was packed from.
    pub fn dim(&self) -> usize {
        self.elems.len() * self.n as usize
    }

    pub fn negate(&self) -> Self {
        Self {
            elems: self.elems.iter().map(|&e| -e).collect(),
            n: self.n,
        }
    }
}

/// Least multiple of `n` that is at least `dim`.
pub fn padded_dimension(dim: usize, n: usize) -> usize {
    dim.div_ceil(n) * n
}

pub fn pack(h: &BipolarHv, n: u8) -> Result<PackedHv> {
    if !(1..=7).contains(&n) {
        return Err(Error::param(format!("pack factor must be in 1..=7, got {n}")));
    }
    if !h.dim().is_multiple_of(n as usize) {
        return Err(Error::param(format!(
            "dimension {} is not divisible by pack factor {n}",
            h.dim()
        )));
    }
    let elems = h
        .as_slice()
        .chunks_exact(n as usize)
        .map(|c| c.iter().sum::<i8>())
        .collect();
    Ok(PackedHv { elems, n })
}

pub fn dot_bipolar(a: &BipolarHv, b: &BipolarHv) -> Result<i64> {
    if a.dim() != b.dim() {
        return Err(Error::param(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| (x * y) as i64)
        .sum())
}

/// Exact integer similarity of two packed vectors; the noiseless reference
/// for what the array computes.
pub fn dot_packed(p: &PackedHv, q: &PackedHv) -> Result<i64> {
    if p.n != q.n || p.len() != q.len() {
        return Err(Error::param(format!(
            "packed shape mismatch: {}x{} vs {}x{}",
            p.len(),
            p.n,
            q.len(),
            q.n
        )));
    }
    Ok(p.elems
        .iter()
        .zip(&q.elems)
        .map(|(&x, &y)| x as i64 * y as i64)
        .sum())
}

pub fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
