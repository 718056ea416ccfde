//! Named random substreams for one episode.
//!
//! A master seed keys four independent ChaCha streams so that a policy which
//! consumes a different number of tie-break draws can never desynchronize
//! the environment (activations, contexts, reward noise) it is compared on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct EnvStreams {
    pub activation: ChaCha8Rng,
    pub contexts: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub tie_break: ChaCha8Rng,
}

impl EnvStreams {
    pub fn new(seed: u64) -> Self {
        let derive = |stream: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            rng
        };
        Self {
            activation: derive(1),
            contexts: derive(2),
            noise: derive(3),
            tie_break: derive(4),
        }
    }
}
