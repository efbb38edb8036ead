use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("generator {letter} out of range for {n} strands")]
    OutOfRange { letter: i32, n: usize },
    #[error("braids need at least one strand")]
    NoStrands,
    #[error("cannot parse {0:?} as a generator")]
    Parse(String),
    #[error("strand counts differ: {0} vs {1}")]
    StrandMismatch(usize, usize),
}

/// Signed Artin generators: `i` is σ_i, `-i` is σ_i⁻¹ (1-based). A positive
/// letter interchanges the strands at positions i, i+1 counterclockwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    n_strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(n_strands: usize, letters: Vec<i32>) -> Result<Self, WordError> {
        if n_strands == 0 {
            return Err(WordError::NoStrands);
        }
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize >= n_strands {
                return Err(WordError::OutOfRange { letter: l, n: n_strands });
            }
        }
        Ok(Self { n_strands, letters })
    }

    pub fn identity(n_strands: usize) -> Self {
        Self { n_strands: n_strands.max(1), letters: Vec::new() }
    }

    /// Parses whitespace-separated signed integers, e.g. `"1 -2 1"`.
    pub fn parse(n_strands: usize, s: &str) -> Result<Self, WordError> {
        let letters = s
            .split_whitespace()
            .map(|t| t.parse::<i32>().map_err(|_| WordError::Parse(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n_strands, letters)
    }

    pub fn n_strands(&self) -> usize {
        self.n_strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self { n_strands: self.n_strands, letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    pub fn concat(&self, other: &BraidWord) -> Result<Self, WordError> {
        if self.n_strands != other.n_strands {
            return Err(WordError::StrandMismatch(self.n_strands, other.n_strands));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Self { n_strands: self.n_strands, letters })
    }

    pub fn pow(&self, k: i32) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Self { n_strands: self.n_strands, letters }
    }

    /// u⁻¹ · self · u.
    pub fn conjugate_by(&self, u: &BraidWord) -> Result<Self, WordError> {
        u.inverse().concat(self)?.concat(u)
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.signum() as i64).sum()
    }

    /// π(i) = final position of the strand starting at position i (0-based),
    /// letters acting left to right.
    pub fn permutation(&self) -> Vec<usize> {
        let mut at: Vec<usize> = (0..self.n_strands).collect();
        for &l in &self.letters {
            let i = l.unsigned_abs() as usize - 1;
            at.swap(i, i + 1);
        }
        let mut perm = vec![0; self.n_strands];
        for (pos, &s) in at.iter().enumerate() {
            perm[s] = pos;
        }
        perm
    }

    /// Free reduction: cancels adjacent σ_i σ_i⁻¹ pairs.
    pub fn reduce(&self) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self { n_strands: self.n_strands, letters: out }
    }

    /// Free reduction followed by cancellation across the wrap.
    pub fn cyclic_reduce(&self) -> Self {
        let r = self.reduce().letters;
        let (mut a, mut b) = (0, r.len());
        while b - a >= 2 && r[a] == -r[b - 1] {
            a += 1;
            b -= 1;
        }
        Self { n_strands: self.n_strands, letters: r[a..b].to_vec() }
    }

    /// σ₁σ₂⋯σ_{n−1}.
    pub fn rotation_generator(n_strands: usize) -> Self {
        Self { n_strands, letters: (1..n_strands as i32).collect() }
    }

    /// Half twist Δ = (σ₁)(σ₂σ₁)⋯(σ_{n−1}⋯σ₁).
    pub fn half_twist(n_strands: usize) -> Self {
        let mut letters = Vec::new();
        for k in 1..n_strands as i32 {
            letters.extend((1..=k).rev());
        }
        Self { n_strands, letters }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.letters {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

/// Parses `"n: letters"`; the bare letter form needs the strand count elsewhere.
impl FromStr for BraidWord {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, rest) = s.split_once(':').ok_or_else(|| WordError::Parse(s.to_string()))?;
        let n = n.trim().parse::<usize>().map_err(|_| WordError::Parse(n.to_string()))?;
        Self::parse(n, rest)
    }
}

/// Conjugacy class of the permutation as a sorted list of cycle lengths.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable();
    out
}
