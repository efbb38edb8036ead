//! Word-length growth of the Artin action on the free group of the punctured disk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::BraidWord;

/// Letters per word before iteration stops with a saturation flag.
pub const DEFAULT_LETTER_CAP: usize = 1 << 25;

pub const LOWER_BOUND_LABEL: &str =
    "lower-bound estimate for the topological entropy of any diffeomorphism realizing the braid";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntropyError {
    #[error("need at least 4 iterations, got {0}")]
    TooFewIterations(usize),
    #[error("generator {0} out of range")]
    BadGenerator(i32),
}

/// Letters are ±i for x_i^{±1}, 1-based.
pub type FreeWord = Vec<i32>;

pub fn free_reduce(w: &[i32]) -> FreeWord {
    let mut out: FreeWord = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn free_inverse(w: &[i32]) -> FreeWord {
    w.iter().rev().map(|l| -l).collect()
}

fn cyclic_bounds<T: Copy + PartialEq + std::ops::Neg<Output = T>>(w: &[T]) -> (usize, usize) {
    let (mut a, mut b) = (0, w.len());
    while b - a >= 2 && w[a] == -w[b - 1] {
        a += 1;
        b -= 1;
    }
    (a, b)
}

/// Length of the cyclic reduction of a freely reduced word.
pub fn cyclic_length(w: &[i32]) -> usize {
    let (a, b) = cyclic_bounds(w);
    b - a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeGroupEndo {
    rank: usize,
    images: Vec<FreeWord>,
}

impl FreeGroupEndo {
    pub fn identity(rank: usize) -> Self {
        Self { rank, images: (1..=rank as i32).map(|i| vec![i]).collect() }
    }

    pub fn from_images(images: Vec<FreeWord>) -> Result<Self, EntropyError> {
        let rank = images.len();
        for img in &images {
            if let Some(&l) = img.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > rank) {
                return Err(EntropyError::BadGenerator(l));
            }
        }
        Ok(Self { rank, images: images.iter().map(|w| free_reduce(w)).collect() })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn apply(&self, w: &[i32]) -> FreeWord {
        let mut out = Vec::new();
        for &l in w {
            let img = &self.images[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.extend_from_slice(img);
            } else {
                out.extend(img.iter().rev().map(|x| -x));
            }
        }
        free_reduce(&out)
    }

    /// x ↦ other(self(x)).
    pub fn then(&self, other: &FreeGroupEndo) -> Self {
        Self { rank: self.rank, images: self.images.iter().map(|w| other.apply(w)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rank)
    }

    /// Whether `candidate` inverts self on both sides.
    pub fn is_inverse(&self, candidate: &FreeGroupEndo) -> bool {
        self.then(candidate).is_identity() && candidate.then(self).is_identity()
    }
}

fn generator_action(n: usize, letter: i32) -> FreeGroupEndo {
    let mut e = FreeGroupEndo::identity(n);
    let i = letter.unsigned_abs() as usize - 1;
    let (a, b) = (i as i32 + 1, i as i32 + 2);
    if letter > 0 {
        e.images[i] = vec![a, b, -a];
        e.images[i + 1] = vec![a];
    } else {
        e.images[i] = vec![b];
        e.images[i + 1] = vec![-b, a, b];
    }
    e
}

/// Action on the free group of the n-punctured disk; letters act in word order.
pub fn artin_action(word: &BraidWord) -> FreeGroupEndo {
    let n = word.n_strands();
    let mut images = FreeGroupEndo::identity(n).images;
    for &l in word.letters() {
        let g = generator_action(n, l);
        for img in &mut images {
            *img = g.apply(img);
        }
    }
    FreeGroupEndo { rank: n, images }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub word: String,
    pub n_strands: usize,
    pub iterations: usize,
    /// lengths[g][k] is the cyclically reduced length after k applications;
    /// g runs over the test loops x_i x_{i+1}.
    pub lengths: Vec<Vec<u64>>,
    pub iterations_used: Vec<usize>,
    pub saturated: Vec<bool>,
    pub rate: f64,
    pub label: String,
}

impl GrowthEstimate {
    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }
}

fn reduce_into(out: &mut Vec<i16>, l: i16) {
    if out.last() == Some(&-l) {
        out.pop();
    } else {
        out.push(l);
    }
}

/// Iterates `e` on the cyclic word `w`, recording cyclically reduced lengths.
fn iterate_lengths(e: &FreeGroupEndo, w: &[i32], iterations: usize, cap: usize) -> (Vec<u64>, bool) {
    let images: Vec<(Vec<i16>, Vec<i16>)> = e
        .images
        .iter()
        .map(|img| {
            let f: Vec<i16> = img.iter().map(|&x| x as i16).collect();
            let b: Vec<i16> = img.iter().rev().map(|&x| -x as i16).collect();
            (f, b)
        })
        .collect();
    let mut cur: Vec<i16> = w.iter().map(|&x| x as i16).collect();
    let (a, b) = cyclic_bounds(&cur);
    cur = cur[a..b].to_vec();
    let mut lengths = vec![cur.len() as u64];
    let mut next = Vec::new();
    for _ in 0..iterations {
        next.clear();
        let mut saturated = false;
        for &l in &cur {
            let (f, b) = &images[l.unsigned_abs() as usize - 1];
            for &x in if l > 0 { f } else { b } {
                reduce_into(&mut next, x);
            }
            if next.len() > cap {
                saturated = true;
                break;
            }
        }
        if saturated {
            return (lengths, true);
        }
        let (a, b) = cyclic_bounds(&next);
        cur.clear();
        cur.extend_from_slice(&next[a..b]);
        lengths.push(cur.len() as u64);
    }
    (lengths, false)
}

/// Least-squares slope of ln L_k against k over the last half of the recorded
/// iterations (k ≥ 1).
pub fn tail_slope(lengths: &[u64]) -> f64 {
    let last = lengths.len() - 1;
    if last < 2 {
        return 0.0;
    }
    let first = last - last / 2;
    let pts: Vec<(f64, f64)> = (first..=last).map(|k| (k as f64, (lengths[k].max(1) as f64).ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn gamma_estimate(word: &BraidWord, iterations: usize) -> Result<GrowthEstimate, EntropyError> {
    gamma_estimate_with_cap(word, iterations, DEFAULT_LETTER_CAP)
}

pub fn gamma_estimate_with_cap(word: &BraidWord, iterations: usize, cap: usize) -> Result<GrowthEstimate, EntropyError> {
    if iterations < 4 {
        return Err(EntropyError::TooFewIterations(iterations));
    }
    let n = word.n_strands();
    let e = artin_action(word);
    let loops: Vec<FreeWord> = (1..n as i32).map(|i| vec![i, i + 1]).collect();
    let runs: Vec<(Vec<u64>, bool)> = loops.par_iter().map(|w| iterate_lengths(&e, w, iterations, cap)).collect();
    let rate = runs.iter().map(|(l, _)| tail_slope(l)).fold(0.0, f64::max);
    Ok(GrowthEstimate {
        word: word.to_string(),
        n_strands: n,
        iterations,
        iterations_used: runs.iter().map(|(l, _)| l.len() - 1).collect(),
        saturated: runs.iter().map(|(_, s)| *s).collect(),
        lengths: runs.into_iter().map(|(l, _)| l).collect(),
        rate,
        label: LOWER_BOUND_LABEL.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn generator_images() {
        let e = artin_action(&w(2, "1"));
        assert_eq!(e.images(), &[vec![1, 2, -1], vec![1]]);
        assert!(artin_action(&BraidWord::identity(4)).is_identity());
        let inv = artin_action(&w(2, "-1"));
        assert!(e.is_inverse(&inv));
    }

    #[test]
    fn word_actions_invert() {
        let x = w(4, "1 -2 3 3 -1 2");
        assert!(artin_action(&x).is_inverse(&artin_action(&x.inverse())));
    }

    #[test]
    fn boundary_loop_is_fixed() {
        let e = artin_action(&w(4, "1 -3 2 2 -1"));
        assert_eq!(e.apply(&[1, 2, 3, 4]), vec![1, 2, 3, 4]);
    }

    #[test]
    fn saturation_is_flagged() {
        let g = gamma_estimate_with_cap(&w(3, "1 -2"), 18, 1000).unwrap();
        assert!(g.any_saturated());
        assert!(g.iterations_used.iter().all(|&k| k < 18));
        assert!(g.rate > 0.8);
        assert!(gamma_estimate(&w(3, "1"), 3).is_err());
    }

    #[test]
    fn periodic_braid_has_no_growth() {
        let g = gamma_estimate(&w(3, "1 2"), 12).unwrap();
        assert!(g.rate <= 0.05);
        assert!(g.rate >= 0.0);
    }
}
