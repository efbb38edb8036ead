use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use braidstab::braid::conjugacy::{verify_verdict, DEFAULT_BUDGET};
use braidstab::braid::{are_conjugate, normal_form, words_equal, BraidWord, ConjugacyVerdict};
use braidstab::entropy::{artin_action, free_reduce};
use braidstab::flow::{Flow, HamiltonianFlow};
use braidstab::gf2::{exhaustive_pairing, pairing_from_maps, random_instance, verify_pairing};
use braidstab::symbolic::{build_q, verify_q_structure};
use braidstab::{TimePeriodicHamiltonian, Vec2};

fn word(n: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    let g = (1..n as i32).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)]);
    prop::collection::vec(g, 0..=max_len).prop_map(move |l| BraidWord::new(n, l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_round_trips(w in word(4, 10)) {
        let back = normal_form(&w).to_word();
        prop_assert!(words_equal(&w, &back).unwrap());
        prop_assert_eq!(normal_form(&back), normal_form(&w));
        prop_assert!(normal_form(&w.concat(&w.inverse()).unwrap()).to_word().is_empty());
    }

    #[test]
    fn conjugates_are_recognised(w in word(4, 6), u in word(4, 4)) {
        let v = w.conjugate_by(&u).unwrap();
        let verdict = are_conjugate(&w, &v, DEFAULT_BUDGET).unwrap();
        let not_no = !matches!(verdict, ConjugacyVerdict::No { .. });
        prop_assert!(not_no, "{:?}", verdict);
        if verdict.is_yes() {
            prop_assert!(verify_verdict(&w, &v, &verdict).unwrap());
        }
    }

    #[test]
    fn different_exponent_sums_are_not_conjugate(w in word(3, 6)) {
        let v = w.concat(&BraidWord::new(3, vec![1]).unwrap()).unwrap();
        let verdict = are_conjugate(&w, &v, DEFAULT_BUDGET).unwrap();
        let no = matches!(verdict, ConjugacyVerdict::No { .. });
        prop_assert!(no, "{:?}", verdict);
    }

    #[test]
    fn artin_action_is_a_homomorphism(a in word(4, 5), b in word(4, 5)) {
        let ab = artin_action(&a.concat(&b).unwrap());
        let composed = artin_action(&a).then(&artin_action(&b));
        prop_assert_eq!(ab.images(), composed.images());
        prop_assert!(artin_action(&a).is_inverse(&artin_action(&a.inverse())));
    }

    #[test]
    fn free_reduction_is_idempotent(l in prop::collection::vec(prop_oneof![-3i32..=-1, 1i32..=3], 0..30)) {
        let r = free_reduce(&l);
        prop_assert_eq!(free_reduce(&r), r.clone());
        prop_assert!(r.windows(2).all(|p| p[0] != -p[1]));
    }

    #[test]
    fn pairing_construction_verifies(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g) = random_instance(&mut rng, 5);
        let p = pairing_from_maps(&f, &g).unwrap();
        prop_assert!(verify_pairing(&f, &g, &p));
        prop_assert!(exhaustive_pairing(&f, &g).is_some());
    }

    #[test]
    fn flows_preserve_area(x in -0.6f64..0.6, y in -0.6f64..0.6, t in 0.1f64..1.5) {
        let h = TimePeriodicHamiltonian::cellular(0.5);
        let (_, m) = HamiltonianFlow::with_step(h, 1e-3).advance_with_jacobian(0.0, t, Vec2::new(x, y)).unwrap();
        prop_assert!((m.det() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn q_words_for_all_small_alphabets() {
    for m in 3..=12 {
        let q = build_q(m).unwrap();
        assert_eq!(q.period(), 8 * (m - 2));
        assert!(verify_q_structure(m).unwrap().all_pass(), "m={m}");
    }
}
