//! Fixtures shared by the criterion benches.

use relbound::{classical_embed, pure_state_lift, CQChannel, ClassicalChannel};

pub fn typewriter_lift() -> CQChannel {
    pure_state_lift(&ClassicalChannel::noisy_typewriter(5, 0.5))
}

pub fn typewriter_embedded() -> CQChannel {
    classical_embed(&ClassicalChannel::noisy_typewriter(5, 0.5))
}

pub fn bsc_embedded(p: f64) -> CQChannel {
    classical_embed(&ClassicalChannel::bsc(p))
}

/// Seeded random CQ channel with `inputs` states of dimension `d`.
pub fn random_cq(inputs: usize, d: usize, seed: u64) -> CQChannel {
    relbound::random::cq_channel(inputs, d, &mut relbound::random::rng(seed))
}
