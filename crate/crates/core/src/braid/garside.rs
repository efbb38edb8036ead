//! Left normal form in the classical Garside structure of B_n.
//!
//! A simple element is stored as the permutation π with π(i) = final position
//! of the strand starting at position i. Products compose as π_AB = π_B ∘ π_A.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::word::{BraidWord, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutationBraid(Vec<u8>);

impl PermutationBraid {
    pub fn identity(n: usize) -> Self {
        Self((0..n as u8).collect())
    }

    pub fn delta(n: usize) -> Self {
        Self((0..n as u8).rev().collect())
    }

    /// Simple element σ_i (1-based).
    pub fn generator(n: usize, i: usize) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(i - 1, i);
        p
    }

    pub fn from_perm(perm: &[usize]) -> Option<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        Some(Self(perm.iter().map(|&p| p as u8).collect()))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn perm(&self) -> Vec<usize> {
        self.0.iter().map(|&p| p as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| p as usize == i)
    }

    pub fn is_delta(&self) -> bool {
        let n = self.n();
        self.0.iter().enumerate().all(|(i, &p)| p as usize == n - 1 - i)
    }

    fn inverse_perm(&self) -> Vec<u8> {
        let mut inv = vec![0u8; self.n()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        inv
    }

    /// Δ·A·Δ⁻¹: τ(π)(i) = n−1−π(n−1−i).
    pub fn tau(&self) -> Self {
        let n = self.n();
        Self((0..n).map(|i| (n - 1 - self.0[n - 1 - i] as usize) as u8).collect())
    }

    pub fn tau_pow(&self, k: i64) -> Self {
        if k.rem_euclid(2) == 1 {
            self.tau()
        } else {
            self.clone()
        }
    }

    /// {i : A = A'σ_i}, 0-based.
    pub fn finishing_set(&self) -> Vec<usize> {
        let inv = self.inverse_perm();
        (0..self.n().saturating_sub(1)).filter(|&i| inv[i] > inv[i + 1]).collect()
    }

    /// {i : A = σ_i A'}, 0-based.
    pub fn starting_set(&self) -> Vec<usize> {
        (0..self.n().saturating_sub(1)).filter(|&i| self.0[i] > self.0[i + 1]).collect()
    }

    fn finishes_with(&self, i: usize) -> bool {
        let inv = self.inverse_perm();
        inv[i] > inv[i + 1]
    }

    fn starts_with(&self, i: usize) -> bool {
        self.0[i] > self.0[i + 1]
    }

    /// A·σ_i (requires i ∉ Finish(A)).
    fn mul_generator_right(&mut self, i: usize) {
        for p in self.0.iter_mut() {
            if *p as usize == i {
                *p = (i + 1) as u8;
            } else if *p as usize == i + 1 {
                *p = i as u8;
            }
        }
    }

    /// σ_i⁻¹·B (requires i ∈ Start(B)).
    fn strip_generator_left(&mut self, i: usize) {
        self.0.swap(i, i + 1);
    }

    /// The simple X with X·A = Δ.
    pub fn left_complement(&self) -> Self {
        // π_Δ = π_A ∘ π_X  ⇒  π_X = π_A⁻¹ ∘ π_Δ
        let inv = self.inverse_perm();
        let n = self.n();
        Self((0..n).map(|i| inv[n - 1 - i]).collect())
    }

    /// Positive word realising the permutation braid (each pair crosses once).
    pub fn to_letters(&self) -> Vec<i32> {
        let mut arr: Vec<u8> = (0..self.n() as u8).collect();
        let mut letters = Vec::new();
        loop {
            let mut swapped = false;
            for j in 0..arr.len().saturating_sub(1) {
                if self.0[arr[j] as usize] > self.0[arr[j + 1] as usize] {
                    arr.swap(j, j + 1);
                    letters.push(j as i32 + 1);
                    swapped = true;
                }
            }
            if !swapped {
                return letters;
            }
        }
    }

    /// Crossing count (length as a positive word).
    pub fn length(&self) -> usize {
        let n = self.n();
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.0[i] > self.0[j] {
                    c += 1;
                }
            }
        }
        c
    }
}

impl fmt::Display for PermutationBraid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", p + 1)?;
        }
        f.write_str("]")
    }
}

/// Δ^inf · A₁⋯A_r with A_i simple, neither 1 nor Δ, and each pair left-weighted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalForm {
    pub n: usize,
    pub inf: i64,
    pub factors: Vec<PermutationBraid>,
}

/// Makes (a, b) left-weighted: moves generators from the front of b onto a.
fn left_weight(a: &mut PermutationBraid, b: &mut PermutationBraid) -> bool {
    let mut changed = false;
    loop {
        let n = a.n();
        let pick = (0..n - 1).find(|&i| b.starts_with(i) && !a.finishes_with(i));
        match pick {
            Some(i) => {
                a.mul_generator_right(i);
                b.strip_generator_left(i);
                changed = true;
            }
            None => return changed,
        }
    }
}

impl NormalForm {
    /// Normal form of Δ^p · F₁⋯F_k for arbitrary simple factors.
    pub fn from_parts(n: usize, p: i64, factors: Vec<PermutationBraid>) -> Self {
        let mut fs = factors;
        loop {
            let mut changed = false;
            for i in 0..fs.len().saturating_sub(1) {
                let (l, r) = fs.split_at_mut(i + 1);
                if left_weight(&mut l[i], &mut r[0]) {
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let lead = fs.iter().take_while(|f| f.is_delta()).count();
        let mut inf = p + lead as i64;
        let rest: Vec<PermutationBraid> = fs.into_iter().skip(lead).filter(|f| !f.is_identity()).collect();
        // Δ's left of other factors commute to the front with a τ twist; after
        // left-weighting they can only appear first, so `rest` has none.
        debug_assert!(rest.iter().all(|f| !f.is_delta()));
        if n <= 1 {
            inf = 0;
        }
        Self { n, inf, factors: rest }
    }

    pub fn from_word(w: &BraidWord) -> Self {
        let n = w.n_strands();
        let letters = w.letters();
        let delta = PermutationBraid::delta(n);
        // factors right of j pick up one τ per inverse letter to their right
        let mut factors = Vec::with_capacity(letters.len());
        let mut inv_right = 0i64;
        for &l in letters.iter().rev() {
            let i = l.unsigned_abs() as usize;
            let simple = if l > 0 {
                PermutationBraid::generator(n, i)
            } else {
                // σ_i⁻¹ = Δ⁻¹·X with π_X = s_i ∘ π_Δ
                let mut x = delta.clone();
                for p in x.0.iter_mut() {
                    if *p as usize == i - 1 {
                        *p = i as u8;
                    } else if *p as usize == i {
                        *p = (i - 1) as u8;
                    }
                }
                x
            };
            factors.push(simple.tau_pow(inv_right));
            if l < 0 {
                inv_right += 1;
            }
        }
        factors.reverse();
        Self::from_parts(n, -inv_right, factors)
    }

    pub fn sup(&self) -> i64 {
        self.inf + self.factors.len() as i64
    }

    pub fn canonical_length(&self) -> usize {
        self.factors.len()
    }

    pub fn to_word(&self) -> BraidWord {
        let d = BraidWord::half_twist(self.n).pow(self.inf as i32);
        let mut letters = d.letters().to_vec();
        for f in &self.factors {
            letters.extend(f.to_letters());
        }
        BraidWord::new(self.n.max(1), letters).expect("letters in range")
    }

    /// Normal form of s⁻¹·x·s for a simple s.
    pub fn conjugate_by_simple(&self, s: &PermutationBraid) -> NormalForm {
        // s⁻¹ = Δ⁻¹·Y with Y·s = Δ; Y·Δ^p = Δ^p·τ^p(Y)
        let y = s.left_complement().tau_pow(self.inf);
        let mut fs = Vec::with_capacity(self.factors.len() + 2);
        fs.push(y);
        fs.extend(self.factors.iter().cloned());
        fs.push(s.clone());
        NormalForm::from_parts(self.n, self.inf - 1, fs)
    }

    /// Cycling: conjugation by τ^inf(A₁). Returns the result and the conjugator.
    pub fn cycling(&self) -> (NormalForm, PermutationBraid) {
        match self.factors.first() {
            None => (self.clone(), PermutationBraid::identity(self.n)),
            Some(a1) => {
                let c = a1.tau_pow(self.inf);
                let mut fs: Vec<PermutationBraid> = self.factors[1..].to_vec();
                fs.push(c.clone());
                (NormalForm::from_parts(self.n, self.inf, fs), c)
            }
        }
    }

    /// Decycling: A_r·x·A_r⁻¹, i.e. conjugation by A_r⁻¹. Returns the result and A_r.
    pub fn decycling(&self) -> (NormalForm, PermutationBraid) {
        match self.factors.last() {
            None => (self.clone(), PermutationBraid::identity(self.n)),
            Some(ar) => {
                let mut fs = vec![ar.tau_pow(self.inf)];
                fs.extend(self.factors[..self.factors.len() - 1].iter().cloned());
                (NormalForm::from_parts(self.n, self.inf, fs), ar.clone())
            }
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D^{}", self.inf)?;
        for a in &self.factors {
            write!(f, " . {a}")?;
        }
        Ok(())
    }
}

pub fn normal_form(w: &BraidWord) -> NormalForm {
    NormalForm::from_word(w)
}

pub fn words_equal(a: &BraidWord, b: &BraidWord) -> Result<bool, WordError> {
    if a.n_strands() != b.n_strands() {
        return Err(WordError::StrandMismatch(a.n_strands(), b.n_strands()));
    }
    Ok(NormalForm::from_word(a) == NormalForm::from_word(b))
}

/// All n! simple elements, identity first.
pub fn all_simple_elements(n: usize) -> Vec<PermutationBraid> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<PermutationBraid>) {
        if k <= 1 {
            out.push(PermutationBraid::from_perm(perm).expect("valid"));
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut perm, &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn braid_relation_and_commutation() {
        assert!(words_equal(&w(3, "1 2 1"), &w(3, "2 1 2")).unwrap());
        assert!(!words_equal(&w(3, "1 2"), &w(3, "2 1")).unwrap());
        assert!(words_equal(&w(4, "1 3"), &w(4, "3 1")).unwrap());
        assert!(words_equal(&w(3, "1 -1 2 -2"), &BraidWord::identity(3)).unwrap());
        assert!(words_equal(&w(3, "-1 -2 1 2 2 -1 -2 1"), &w(3, "-1 -2 1 2 2 -1 -2 1").reduce()).unwrap());
        assert!(words_equal(&w(3, "1"), &w(2, "1")).is_err());
    }

    #[test]
    fn full_twist_is_central() {
        let d2 = BraidWord::half_twist(3).pow(2);
        let s1 = w(3, "1");
        assert!(words_equal(&d2.concat(&s1).unwrap(), &s1.concat(&d2).unwrap()).unwrap());
        let nf = normal_form(&d2);
        assert_eq!(nf.inf, 2);
        assert!(nf.factors.is_empty());
    }

    #[test]
    fn inverse_letters_normalize() {
        let nf = normal_form(&w(3, "-1"));
        assert_eq!(nf.inf, -1);
        assert_eq!(nf.factors.len(), 1);
        assert!(words_equal(&nf.to_word(), &w(3, "-1")).unwrap());
        let x = w(4, "1 -2 3 3 -1 2 -3 -3 2");
        assert!(words_equal(&normal_form(&x).to_word(), &x).unwrap());
        assert!(words_equal(&x.concat(&x.inverse()).unwrap(), &BraidWord::identity(4)).unwrap());
    }

    #[test]
    fn simple_elements_count() {
        assert_eq!(all_simple_elements(4).len(), 24);
        assert!(all_simple_elements(3)[0].is_identity());
    }

    #[test]
    fn cycling_is_conjugation() {
        let x = w(4, "1 2 -3 1 2 2 -1 3");
        let nf = normal_form(&x);
        let (c, a) = nf.cycling();
        let cw = BraidWord::new(4, a.to_letters()).unwrap();
        assert!(words_equal(&c.to_word(), &x.conjugate_by(&cw).unwrap()).unwrap());
        let (d, ar) = nf.decycling();
        let aw = BraidWord::new(4, ar.to_letters()).unwrap();
        assert!(words_equal(&d.to_word(), &x.conjugate_by(&aw.inverse()).unwrap()).unwrap());
        for s in all_simple_elements(4) {
            let sw = BraidWord::new(4, s.to_letters()).unwrap();
            assert!(words_equal(&nf.conjugate_by_simple(&s).to_word(), &x.conjugate_by(&sw).unwrap()).unwrap());
        }
    }
}
