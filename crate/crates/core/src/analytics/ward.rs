use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::ForwardingScheme;

fn one_to_one_ward<R: Rng + ?Sized>(p: f64, rng: &mut R) -> usize {
    // walk the predecessor line until a spy cuts it; every honest
    // predecessor joins the ward with probability 1/2
    let mut size = 1;
    while rng.gen::<f64>() >= p {
        if rng.gen::<bool>() {
            size += 1;
        }
    }
    size
}

fn all_to_one_ward<R: Rng + ?Sized>(p: f64, rng: &mut R) -> usize {
    // binary upstream tree; each child is pruned (spy, or routes its
    // traffic away) with probability (1+p)/2
    let prune = (1.0 + p) / 2.0;
    let mut size = 1;
    let mut frontier = 1usize;
    while frontier > 0 {
        frontier -= 1;
        for _ in 0..2 {
            if rng.gen::<f64>() >= prune {
                size += 1;
                frontier += 1;
            }
        }
    }
    size
}

/// Empirical ward-size pmf from `trials` draws; index `w` holds the
/// frequency of size `w` (index 0 is always 0).
pub fn simulate_ward_size<R: Rng + ?Sized>(
    scheme: ForwardingScheme,
    p: f64,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p out of domain: {p}")));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let draw: fn(f64, &mut R) -> usize = match scheme {
        ForwardingScheme::OneToOne => one_to_one_ward,
        ForwardingScheme::AllToOne => all_to_one_ward,
        other => return Err(Error::invalid(format!("no ward model for {}", other.label()))),
    };
    let mut counts: Vec<u64> = Vec::new();
    for _ in 0..trials {
        let w = draw(p, rng);
        if counts.len() <= w {
            counts.resize(w + 1, 0);
        }
        counts[w] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}
