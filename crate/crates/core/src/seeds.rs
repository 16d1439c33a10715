//! Seed derivation. Every random stream in a run is a pure function of the
//! master seed, the trial index and a purpose tag, so results never depend
//! on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose tags for the independent streams used inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Roles = 1,
    P2pGraph = 2,
    AnonymityGraph = 3,
    Routing = 4,
    Transactions = 5,
    Propagation = 6,
    Training = 7,
    Estimator = 8,
    Timers = 9,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for `(seed, trial, purpose)`.
pub fn trial_rng(seed: u64, trial: u64, purpose: Stream) -> SimRng {
    let mut rng = SimRng::seed_from_u64(splitmix64(seed ^ splitmix64(purpose as u64)));
    rng.set_stream(trial);
    rng
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Deterministic uniform in [0, 1) keyed by a tuple of integers.
pub fn hash_unit(keys: &[u64]) -> f64 {
    let h = keys.iter().fold(0x51_7cc1_b727_220a_u64, |acc, &k| splitmix64(acc ^ k));
    (h >> 11) as f64 / (1u64 << 53) as f64
}
