//! N-bit Exact Cover 3 instances.
//!
//! A clause `(a, b, c)` over 1-based bit indices is satisfied when exactly one
//! of `z_a`, `z_b`, `z_c` equals 1. Assignments map to basis indices with
//! `z_1` as the least-significant bit.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Default largest `N` for which exhaustive enumeration is permitted.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Three strictly increasing 1-based bit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    a: usize,
    b: usize,
    c: usize,
}

impl Clause {
    pub fn new(a: usize, b: usize, c: usize) -> Result<Self> {
        if a == 0 || !(a < b && b < c) {
            return Err(Error::input(format!(
                "clause ({a}, {b}, {c}) must satisfy 1 <= a < b < c"
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn indices(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    /// Largest bit index referenced.
    pub fn max_index(&self) -> usize {
        self.c
    }

    /// Basis-index mask with the three addressed bits set.
    pub fn mask(&self) -> usize {
        (1 << (self.a - 1)) | (1 << (self.b - 1)) | (1 << (self.c - 1))
    }

    /// Clause test on a basis index; the caller guarantees the bits exist.
    #[inline]
    pub fn satisfied_by_index(&self, index: usize) -> bool {
        (index & self.mask()).count_ones() == 1
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parses `0`/`1` values; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::input(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Decodes basis index `index` into `n_bits` values, `z_1` least significant.
    pub fn from_index(index: usize, n_bits: usize) -> Self {
        Self {
            bits: (0..n_bits).map(|j| index >> j & 1 == 1).collect(),
        }
    }

    pub fn to_index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &bit)| bit)
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Value of `z_j` for 1-based `j`.
    pub fn bit(&self, j: usize) -> Option<bool> {
        j.checked_sub(1).and_then(|i| self.bits.get(i).copied())
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }
}

pub fn clause_satisfied(clause: &Clause, z: &Assignment) -> Result<bool> {
    let mut sum = 0;
    for j in clause.indices() {
        let bit = z.bit(j).ok_or_else(|| {
            Error::input(format!(
                "clause {clause} addresses bit {j} of a {}-bit assignment",
                z.len()
            ))
        })?;
        sum += u32::from(bit);
    }
    Ok(sum == 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ec3Instance {
    n_bits: usize,
    clauses: Vec<Clause>,
}

impl Ec3Instance {
    pub fn new(n_bits: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::input("an instance needs at least one bit"));
        }
        let mut seen = BTreeSet::new();
        for clause in &clauses {
            if clause.max_index() > n_bits {
                return Err(Error::input(format!(
                    "clause {clause} exceeds bit count {n_bits}"
                )));
            }
            if !seen.insert(*clause) {
                return Err(Error::input(format!("duplicate clause {clause}")));
            }
        }
        Ok(Self { n_bits, clauses })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Number of violated clauses for basis index `index`.
    #[inline]
    pub fn violations_at(&self, index: usize) -> u32 {
        self.clauses
            .iter()
            .filter(|c| !c.satisfied_by_index(index))
            .count() as u32
    }

    pub fn violation_count(&self, z: &Assignment) -> Result<usize> {
        if z.len() != self.n_bits {
            return Err(Error::input(format!(
                "assignment has {} bits, instance has {}",
                z.len(),
                self.n_bits
            )));
        }
        let mut count = 0;
        for clause in &self.clauses {
            if !clause_satisfied(clause, z)? {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Every satisfying assignment, in ascending basis-index order.
    pub fn enumerate_solutions(&self) -> Result<Vec<Assignment>> {
        self.enumerate_solutions_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_solutions_capped(&self, cap: usize) -> Result<Vec<Assignment>> {
        if self.n_bits > cap {
            return Err(Error::Resource(format!(
                "enumerating 2^{} assignments exceeds the cap of 2^{cap}",
                self.n_bits
            )));
        }
        Ok((0..1usize << self.n_bits)
            .filter(|&k| self.violations_at(k) == 0)
            .map(|k| Assignment::from_index(k, self.n_bits))
            .collect())
    }

    /// Number of distinct clauses per 1-based bit, returned 0-based.
    pub fn degrees(&self) -> Vec<u32> {
        let mut degrees = vec![0; self.n_bits];
        for clause in &self.clauses {
            for j in clause.indices() {
                degrees[j - 1] += 1;
            }
        }
        degrees
    }
}

/// Number of distinct clauses available over `n_bits` bits.
fn clause_space(n_bits: usize) -> usize {
    n_bits * n_bits.saturating_sub(1) * n_bits.saturating_sub(2) / 6
}

fn draw_clause<R: Rng + ?Sized>(n_bits: usize, rng: &mut R) -> Clause {
    let mut picked = index::sample(rng, n_bits, 3).into_vec();
    picked.sort_unstable();
    Clause {
        a: picked[0] + 1,
        b: picked[1] + 1,
        c: picked[2] + 1,
    }
}

/// Draws a random instance with exactly one satisfying assignment.
///
/// Clauses are added one at a time (uniform over clauses not yet present)
/// while the surviving solution set is filtered; generation stops once at most
/// one solution is left and restarts from scratch if none is. No instance over
/// three bits has a unique solution, so `n_bits` must be at least 4.
pub fn generate_usa_instance<R: Rng + ?Sized>(n_bits: usize, rng: &mut R) -> Result<Ec3Instance> {
    if n_bits < 4 {
        return Err(Error::input(format!(
            "no {n_bits}-bit Exact Cover 3 instance has a unique solution; need n_bits >= 4"
        )));
    }
    if n_bits > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Resource(format!(
            "{n_bits} bits exceeds the enumeration cap of {DEFAULT_ENUMERATION_CAP}"
        )));
    }
    let available = clause_space(n_bits);
    loop {
        let mut clauses = Vec::new();
        let mut present = BTreeSet::new();
        let mut solutions: Vec<u32> = (0..1u32 << n_bits).collect();
        while solutions.len() > 1 && clauses.len() < available {
            let clause = draw_clause(n_bits, rng);
            if !present.insert(clause) {
                continue;
            }
            let mask = clause.mask() as u32;
            solutions.retain(|&k| (k & mask).count_ones() == 1);
            clauses.push(clause);
        }
        if solutions.len() == 1 {
            return Ec3Instance::new(n_bits, clauses);
        }
    }
}
