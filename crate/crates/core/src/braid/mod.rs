//! Braid words, Garside normal forms, conjugacy and word extraction from
//! sampled orbit sets.

pub mod conjugacy;
pub mod extract;
pub mod garside;
pub mod word;

pub use conjugacy::{are_conjugate, ConjugacyVerdict, NotConjugateReason};
pub use extract::{
    braid_word_from_geometric, braid_word_with_retry, projection_invariance_check, suspend_orbits, ExtractError,
    GeometricBraid,
};
pub use garside::{normal_form, words_equal, NormalForm, PermutationBraid};
pub use word::BraidWord;
