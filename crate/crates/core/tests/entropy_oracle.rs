use approx::assert_abs_diff_eq;
use num_bigint::BigUint;

use braidstab::braid::BraidWord;
use braidstab::entropy::{artin_action, cyclic_length, gamma_estimate, FreeGroupEndo};

/// Exact cyclically reduced lengths of e^k(w), computed without any cap.
fn exact_lengths(e: &FreeGroupEndo, w: &[i32], k: usize) -> Vec<u64> {
    let mut cur = w.to_vec();
    let mut out = vec![cyclic_length(&cur) as u64];
    for _ in 0..k {
        let mut next: Vec<i32> = Vec::new();
        for &l in &cur {
            let img = &e.images()[l.unsigned_abs() as usize - 1];
            let letters: Vec<i32> = if l > 0 { img.clone() } else { img.iter().rev().map(|x| -x).collect() };
            for x in letters {
                if next.last() == Some(&-x) {
                    next.pop();
                } else {
                    next.push(x);
                }
            }
        }
        // cyclic reduction
        let (mut a, mut b) = (0, next.len());
        while b - a >= 2 && next[a] == -next[b - 1] {
            a += 1;
            b -= 1;
        }
        cur = next[a..b].to_vec();
        out.push(cur.len() as u64);
    }
    out
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_u64_digits().first().copied().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Growth rate of σ₁σ₂⁻¹ from exact lengths: once the lengths obey the
/// trace recurrence L_{k+1} = 3L_k − L_{k−1}, the sequence is continued in
/// big integers and the log-ratio read off far out.
fn oracle_rate() -> f64 {
    let w = BraidWord::parse(3, "1 -2").unwrap();
    let e = artin_action(&w);
    let l = exact_lengths(&e, &[1, 2], 14);
    let start = (1..l.len() - 1).find(|&k| (k..l.len() - 1).all(|j| l[j + 1] + l[j - 1] == 3 * l[j])).unwrap();
    assert!(start <= 6, "recurrence starts late: {l:?}");
    let (mut a, mut b) = (BigUint::from(l[start - 1]), BigUint::from(l[start]));
    for _ in 0..400 {
        let c = BigUint::from(3u32) * &b - &a;
        a = b;
        b = c;
    }
    ln_big(&b) - ln_big(&a)
}

#[test]
fn oracle_agrees_with_the_golden_dilatation() {
    let target = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    assert_abs_diff_eq!(oracle_rate(), target, epsilon = 1e-9);
    assert_abs_diff_eq!(target, 0.962424, epsilon = 1e-6);
}

#[test]
fn estimator_tracks_the_oracle() {
    let g = gamma_estimate(&BraidWord::parse(3, "1 -2").unwrap(), 18).unwrap();
    assert!((g.rate - oracle_rate()).abs() < 0.01, "{}", g.rate);
}

#[test]
fn capped_lengths_agree_with_exact_ones() {
    let w = BraidWord::parse(4, "1 -2 3 -2").unwrap();
    let e = artin_action(&w);
    let g = gamma_estimate(&w, 8).unwrap();
    for (i, lengths) in g.lengths.iter().enumerate() {
        let loop_word = [i as i32 + 1, i as i32 + 2];
        assert_eq!(lengths, &exact_lengths(&e, &loop_word, lengths.len() - 1));
    }
}

#[test]
fn inverse_braid_has_the_same_rate() {
    let w = BraidWord::parse(3, "1 -2").unwrap();
    let a = gamma_estimate(&w, 16).unwrap().rate;
    let b = gamma_estimate(&w.inverse(), 16).unwrap().rate;
    assert_abs_diff_eq!(a, b, epsilon = 0.02);
}
