//! Periodic words of the full shift, the orbit Q and its cylinder memberships,
//! and a linear horseshoe braid realizing Q.

use serde::{Deserialize, Serialize};

use crate::braid::word::{BraidWord, WordError};
use crate::entropy::{gamma_estimate, EntropyError, GrowthEstimate};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("alphabet size must be at least 3, got {0}")]
    Domain(usize),
    #[error("symbol {symbol} outside 1..={m}")]
    BadSymbol { symbol: u8, m: usize },
    #[error("empty word")]
    Empty,
    #[error("orbit points coincide; the template needs a primitive word")]
    TemplateDegenerate,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Periodic point of the shift on m symbols; `word[0]` sits at position 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolWord {
    m: usize,
    word: Vec<u8>,
}

impl SymbolWord {
    pub fn new(m: usize, word: Vec<u8>) -> Result<Self, SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::Empty);
        }
        if let Some(&s) = word.iter().find(|&&s| s == 0 || s as usize > m) {
            return Err(SymbolicError::BadSymbol { symbol: s, m });
        }
        Ok(Self { m, word })
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// Least period of the bi-infinite repetition.
    pub fn period(&self) -> usize {
        let n = self.word.len();
        (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| self.word[i] == self.word[(i + p) % n])).unwrap_or(n)
    }

    /// θ_k of the marked point.
    pub fn symbol(&self, k: i64) -> u8 {
        self.word[k.rem_euclid(self.word.len() as i64) as usize]
    }

    /// The point whose 0th symbol is the current kth.
    pub fn shift(&self, k: i64) -> Self {
        let n = self.word.len();
        let s = k.rem_euclid(n as i64) as usize;
        Self { m: self.m, word: (0..n).map(|i| self.word[(i + s) % n]).collect() }
    }

    pub fn member(&self, position: i64, cylinder: Cylinder) -> bool {
        match cylinder {
            Cylinder::V(j) => self.symbol(position) == j,
            Cylinder::H(j) => self.symbol(position - 1) == j,
            Cylinder::ImageOfH(j) => self.symbol(position - 2) == j,
        }
    }
}

/// V_j: θ₀ = j. H_j = φⁿ(V_j): θ₋₁ = j. φⁿ(H_j): θ₋₂ = j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cylinder {
    V(u8),
    H(u8),
    ImageOfH(u8),
}

/// Concatenation over j = 2..m−1 of (m j 1 j 1 j m j).
pub fn build_q(m: usize) -> Result<SymbolWord, SymbolicError> {
    if m < 3 {
        return Err(SymbolicError::Domain(m));
    }
    if m > u8::MAX as usize {
        return Err(SymbolicError::BadSymbol { symbol: u8::MAX, m });
    }
    let mm = m as u8;
    let word = (2..mm).flat_map(|j| [mm, j, 1, j, 1, j, mm, j]).collect();
    SymbolWord::new(m, word)
}

pub fn full_shift_entropy(m: usize) -> f64 {
    (m as f64).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub j: usize,
    pub point: String,
    pub condition: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QStructureReport {
    pub m: usize,
    pub period: usize,
    pub expected_period: usize,
    pub rows: Vec<CheckRow>,
}

impl QStructureReport {
    pub fn all_pass(&self) -> bool {
        self.period == self.expected_period && self.rows.iter().all(|r| r.pass)
    }
}

/// q_l^j sits at offset 8(j−2) + l + 1 of Q.
fn q_position(j: usize, l: usize) -> i64 {
    (8 * (j - 2) + l + 1) as i64
}

pub fn verify_q_structure(m: usize) -> Result<QStructureReport, SymbolicError> {
    verify_word_structure(&build_q(m)?)
}

/// Runs the membership and period checks against an arbitrary word, so that
/// altered words can be shown to fail.
pub fn verify_word_structure(q: &SymbolWord) -> Result<QStructureReport, SymbolicError> {
    let m = q.alphabet();
    if m < 3 {
        return Err(SymbolicError::Domain(m));
    }
    let mm = m as u8;
    let mut rows = Vec::new();
    for j in 2..m {
        let ju = j as u8;
        let triple = [(1, 1, mm), (3, 1, 1), (5, mm, 1), (7, mm, mm)];
        for (l, v, h) in triple {
            let p = q_position(j, l);
            let pass = q.member(p, Cylinder::V(v)) && q.member(p, Cylinder::H(ju)) && q.member(p, Cylinder::ImageOfH(h));
            rows.push(CheckRow {
                j,
                point: format!("q_{l}^{j}"),
                condition: format!("V_{v} ∩ H_{j} ∩ φ(H_{h})"),
                pass,
            });
        }
        for l in [2, 4, 6, 8] {
            let p = q_position(j, l);
            rows.push(CheckRow {
                j,
                point: format!("q_{l}^{j}"),
                condition: format!("H_1 ∪ H_{m}"),
                pass: q.member(p, Cylinder::H(1)) || q.member(p, Cylinder::H(mm)),
            });
        }
    }
    Ok(QStructureReport { m, period: q.period(), expected_period: 8 * (m - 2), rows })
}

/// Braid of the orbit of `q` under the orientation-preserving linear horseshoe
/// with vertical strips V_1..V_m left to right and images H_1..H_m bottom to top.
///
/// Points are ordered along the horizontal axis by their forward codes. The
/// horizontal stretch keeps that order; afterwards the piece of strip j is
/// raised to row j and slid left over the rows below it, so each slide is the
/// positive permutation braid of a merge.
pub fn horseshoe_template_braid(q: &SymbolWord) -> Result<BraidWord, SymbolicError> {
    let p = q.word().len();
    if q.period() != p {
        return Err(SymbolicError::TemplateDegenerate);
    }
    let forward = |i: usize| -> Vec<u8> { (0..p).map(|k| q.symbol((i + k) as i64)).collect() };
    // final horizontal key of point i is the forward code of its image
    let key: Vec<Vec<u8>> = (0..p).map(|i| forward(i + 1)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by_key(|&i| forward(i));

    let mut letters = Vec::new();
    let mut prefix = 0;
    for j in 1..=q.alphabet() as u8 {
        let block = order.iter().filter(|&&i| q.symbol(i as i64) == j).count();
        let end = prefix + block;
        if j > 1 {
            // bubble the new block leftwards into the sorted lower rows
            for a in prefix..end {
                let mut b = a;
                while b > 0 && key[order[b - 1]] > key[order[b]] {
                    letters.push(b as i32);
                    order.swap(b - 1, b);
                    b -= 1;
                }
            }
        }
        prefix = end;
    }
    Ok(BraidWord::new(p, letters)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QBraidDemo {
    pub m: usize,
    pub strands: usize,
    pub braid: BraidWord,
    pub estimate: GrowthEstimate,
    /// log(m − 2)
    pub bound: f64,
}

pub fn q_braid_gamma_demo(m: usize, iterations: usize) -> Result<QBraidDemo, SymbolicError> {
    let q = build_q(m)?;
    let braid = horseshoe_template_braid(&q)?;
    let estimate = gamma_estimate(&braid, iterations)?;
    Ok(QBraidDemo { m, strands: braid.n_strands(), braid, estimate, bound: ((m - 2) as f64).ln() })
}
