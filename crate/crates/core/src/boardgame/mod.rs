//! Duhamel-expansion combinatorics: collapsing maps and their board-game
//! classes, the localisation expansion of `L`, and the counting lemmas.

mod counting;
mod lexpansion;
mod maps;

pub use counting::{
    dyadic_min_sum, dyadic_min_sum_scan, iterates3_check, iterates3_count_chains, iterates4_find_t,
    iterates4_holds, MinSumForm, MinSumScan, DYADIC_CAP_LOG2,
};
pub use lexpansion::{expand_l, LMonomial, WFactor};
pub use maps::{
    apply_move, canonicalize, class_count, classes, enumerate_maps, orbit, CollapsingMap,
    EquivalenceClass, MAX_DEPTH,
};
