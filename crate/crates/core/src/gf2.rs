//! Bit-packed linear algebra over the two-element field and the pairing
//! construction for maps whose composite is an isomorphism.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimensions must lie in 1..=64, got {rows}x{cols}")]
    BadDimensions { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("vectors are dependent or meet the subspace")]
    Transversality,
    #[error("composite map is not an isomorphism")]
    NotIsomorphism,
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

/// Row i is a bitmask; bit j is entry (i, j).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

fn mask(n: usize) -> u64 {
    if n == 64 { u64::MAX } else { (1u64 << n) - 1 }
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, Gf2Error> {
        if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
            return Err(Gf2Error::BadDimensions { rows, cols });
        }
        Ok(Self { rows, cols, data: vec![0; rows] })
    }

    pub fn identity(n: usize) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i] = 1 << i;
        }
        Ok(m)
    }

    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.into_iter().enumerate() {
            if r & !mask(cols) != 0 {
                return Err(Gf2Error::DimensionMismatch(format!("row {i} has bits past column {cols}")));
            }
            m.data[i] = r;
        }
        Ok(m)
    }

    /// Matrix whose column j is the bitmask `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[u64]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows, columns.len())?;
        for (j, &c) in columns.iter().enumerate() {
            if c & !mask(rows) != 0 {
                return Err(Gf2Error::DimensionMismatch(format!("column {j} has bits past row {rows}")));
            }
            for i in 0..rows {
                if c >> i & 1 == 1 {
                    m.data[i] |= 1 << j;
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i] >> j & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        if v {
            self.data[i] |= 1 << j;
        } else {
            self.data[i] &= !(1 << j);
        }
    }

    pub fn row(&self, i: usize) -> u64 {
        self.data[i]
    }

    pub fn column(&self, j: usize) -> u64 {
        (0..self.rows).filter(|&i| self.get(i, j)).fold(0, |acc, i| acc | 1 << i)
    }

    pub fn transpose(&self) -> Self {
        let cols: Vec<u64> = self.data.clone();
        Self::from_columns(self.cols, &cols).expect("same bounds")
    }

    pub fn mul(&self, other: &GF2Matrix) -> Result<Self, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            let mut acc = 0;
            let mut r = self.data[i];
            while r != 0 {
                let k = r.trailing_zeros() as usize;
                acc ^= other.data[k];
                r &= r - 1;
            }
            out.data[i] = acc;
        }
        Ok(out)
    }

    /// Image of the column vector `v` (bit j is coordinate j).
    pub fn apply(&self, v: u64) -> u64 {
        (0..self.rows).filter(|&i| (self.data[i] & v).count_ones() % 2 == 1).fold(0, |acc, i| acc | 1 << i)
    }

    pub fn rank(&self) -> usize {
        rank_of(&self.data)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Self, Gf2Error> {
        if self.rows != self.cols {
            return Err(Gf2Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n)?.data;
        for c in 0..n {
            let p = (c..n).find(|&r| a[r] >> c & 1 == 1).ok_or(Gf2Error::Singular)?;
            a.swap(c, p);
            inv.swap(c, p);
            for r in 0..n {
                if r != c && a[r] >> c & 1 == 1 {
                    a[r] ^= a[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Ok(Self { rows: n, cols: n, data: inv })
    }

    /// Basis of {v : self·v = 0} as column bitmasks.
    pub fn kernel(&self) -> Vec<u64> {
        let mut a = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..self.rows).find(|&i| a[i] >> c & 1 == 1) else { continue };
            a.swap(r, p);
            for i in 0..self.rows {
                if i != r && a[i] >> c & 1 == 1 {
                    a[i] ^= a[r];
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = 1u64 << free;
            for (row, &pc) in pivots.iter().enumerate() {
                if a[row] >> free & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Rows of 0/1 characters, whitespace between entries optional.
    pub fn parse_grid(s: &str) -> Result<Self, Gf2Error> {
        let rows: Vec<Vec<bool>> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Gf2Error::Parse(format!("unexpected {other:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Gf2Error::Parse("ragged rows".into()));
        }
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        Ok(m)
    }
}

impl fmt::Display for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<&str> = (0..self.cols).map(|j| if self.get(i, j) { "1" } else { "0" }).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn rank_of(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Injective ι with coordinate ι(j) of `w[j]` equal to 1 and the coordinate
/// span of ι transverse to `z`. Ties go to the smallest coordinate.
pub fn transverse_selection(w: &[u64], z: &[u64], dim: usize) -> Result<Vec<usize>, Gf2Error> {
    let n = w.len();
    if dim > MAX_DIM || w.iter().chain(z).any(|v| v & !mask(dim) != 0) {
        return Err(Gf2Error::DimensionMismatch(format!("vectors exceed dimension {dim}")));
    }
    let all: Vec<u64> = w.iter().chain(z).copied().collect();
    if rank_of(&all) != n + z.len() || rank_of(z) != z.len() {
        return Err(Gf2Error::Transversality);
    }
    let iota = select(w.to_vec(), z.to_vec())?;
    let mut span: Vec<u64> = iota.iter().map(|&i| 1u64 << i).collect();
    span.extend_from_slice(z);
    let distinct = iota.iter().collect::<std::collections::BTreeSet<_>>().len() == n;
    if !distinct || rank_of(&span) != n + z.len() || (0..n).any(|j| w[j] >> iota[j] & 1 == 0) {
        return Err(Gf2Error::Transversality);
    }
    Ok(iota)
}

fn select(mut w: Vec<u64>, mut z: Vec<u64>) -> Result<Vec<usize>, Gf2Error> {
    let Some(last) = w.pop() else { return Ok(Vec::new()) };
    let mut q = w.clone();
    q.extend_from_slice(&z);
    let base = rank_of(&q);
    let mut bits = last;
    let chosen = loop {
        if bits == 0 {
            return Err(Gf2Error::Transversality);
        }
        let i = bits.trailing_zeros() as usize;
        q.push(1 << i);
        let outside = rank_of(&q) > base;
        q.pop();
        if outside {
            break i;
        }
        bits &= bits - 1;
    };
    let clear = !(1u64 << chosen);
    for v in w.iter_mut().chain(z.iter_mut()) {
        *v &= clear;
    }
    let mut iota = select(w, z)?;
    iota.push(chosen);
    Ok(iota)
}

/// f injective into 0..m, g a bijection of 0..n (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

/// For F: V → R (m×n) and G: R → V (n×m) with G·F invertible, finds (f, g)
/// with r_{f(i)} appearing in F(v_i) and v_{g(i)} appearing in G(r_{f(i)}).
pub fn pairing_from_maps(f_map: &GF2Matrix, g_map: &GF2Matrix) -> Result<Pairing, Gf2Error> {
    let (m, n) = (f_map.rows(), f_map.cols());
    if g_map.rows() != n || g_map.cols() != m {
        return Err(Gf2Error::DimensionMismatch(format!(
            "F is {m}x{n}, G is {}x{}",
            g_map.rows(),
            g_map.cols()
        )));
    }
    if !g_map.mul(f_map)?.is_invertible() {
        return Err(Gf2Error::NotIsomorphism);
    }
    let w: Vec<u64> = (0..n).map(|i| f_map.column(i)).collect();
    let f = transverse_selection(&w, &g_map.kernel(), m)?;
    let w2: Vec<u64> = f.iter().map(|&j| g_map.column(j)).collect();
    let g = transverse_selection(&w2, &[], n)?;
    let p = Pairing { f, g };
    if !verify_pairing(f_map, g_map, &p) {
        return Err(Gf2Error::NotIsomorphism);
    }
    Ok(p)
}

pub fn verify_pairing(f_map: &GF2Matrix, g_map: &GF2Matrix, p: &Pairing) -> bool {
    let (m, n) = (f_map.rows(), f_map.cols());
    if g_map.rows() != n || g_map.cols() != m || p.f.len() != n || p.g.len() != n {
        return false;
    }
    let mut seen_f = vec![false; m];
    let mut seen_g = vec![false; n];
    for i in 0..n {
        let (fi, gi) = (p.f[i], p.g[i]);
        if fi >= m || gi >= n || seen_f[fi] || seen_g[gi] {
            return false;
        }
        seen_f[fi] = true;
        seen_g[gi] = true;
        if !f_map.get(fi, i) || !g_map.get(gi, fi) {
            return false;
        }
    }
    true
}

/// Backtracking search over all injective f and bijective g; returns the
/// first valid pairing in lexicographic order.
pub fn exhaustive_pairing(f_map: &GF2Matrix, g_map: &GF2Matrix) -> Option<Pairing> {
    let (m, n) = (f_map.rows(), f_map.cols());
    if g_map.rows() != n || g_map.cols() != m {
        return None;
    }
    fn assign_g(g_map: &GF2Matrix, f: &[usize], g: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = g.len();
        if i == f.len() {
            return true;
        }
        for v in 0..used.len() {
            if !used[v] && g_map.get(v, f[i]) {
                used[v] = true;
                g.push(v);
                if assign_g(g_map, f, g, used) {
                    return true;
                }
                g.pop();
                used[v] = false;
            }
        }
        false
    }
    fn assign_f(
        f_map: &GF2Matrix,
        g_map: &GF2Matrix,
        f: &mut Vec<usize>,
        used: &mut [bool],
    ) -> Option<Vec<usize>> {
        let i = f.len();
        if i == f_map.cols() {
            let mut g = Vec::new();
            let mut used_g = vec![false; f_map.cols()];
            return assign_g(g_map, f, &mut g, &mut used_g).then_some(g);
        }
        for r in 0..used.len() {
            if !used[r] && f_map.get(r, i) {
                used[r] = true;
                f.push(r);
                if let Some(g) = assign_f(f_map, g_map, f, used) {
                    return Some(g);
                }
                f.pop();
                used[r] = false;
            }
        }
        None
    }
    let mut f = Vec::new();
    let mut used = vec![false; m];
    let g = assign_f(f_map, g_map, &mut f, &mut used)?;
    Some(Pairing { f, g })
}

/// Random (F, G) with G·F invertible, 1 ≤ n ≤ m ≤ max_dim.
pub fn random_instance<R: Rng>(rng: &mut R, max_dim: usize) -> (GF2Matrix, GF2Matrix) {
    loop {
        let m = rng.gen_range(1..=max_dim);
        let n = rng.gen_range(1..=m);
        let f = GF2Matrix::from_rows(n, (0..m).map(|_| rng.gen::<u64>() & mask(n)).collect()).expect("bounded");
        let g = GF2Matrix::from_rows(m, (0..n).map(|_| rng.gen::<u64>() & mask(m)).collect()).expect("bounded");
        if g.mul(&f).expect("compatible").is_invertible() {
            return (f, g);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub instances: usize,
    pub max_dim: usize,
    pub constructed_and_verified: usize,
    pub oracle_found: usize,
    pub failures: Vec<usize>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs the construction and the exhaustive oracle on `instances` random
/// instances drawn from a ChaCha stream seeded by `seed`.
pub fn run_corpus(seed: u64, instances: usize, max_dim: usize) -> CorpusReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus: Vec<(GF2Matrix, GF2Matrix)> = (0..instances).map(|_| random_instance(&mut rng, max_dim)).collect();
    let results: Vec<(bool, bool)> = corpus
        .par_iter()
        .map(|(f, g)| {
            let built = pairing_from_maps(f, g).map(|p| verify_pairing(f, g, &p)).unwrap_or(false);
            let oracle = exhaustive_pairing(f, g).is_some_and(|p| verify_pairing(f, g, &p));
            (built, oracle)
        })
        .collect();
    CorpusReport {
        seed,
        instances,
        max_dim,
        constructed_and_verified: results.iter().filter(|r| r.0).count(),
        oracle_found: results.iter().filter(|r| r.1).count(),
        failures: results.iter().enumerate().filter(|(_, r)| !(r.0 && r.1)).map(|(i, _)| i).collect(),
    }
}
