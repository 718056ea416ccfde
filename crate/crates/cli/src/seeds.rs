//! Deterministic seed derivation.
//!
//! Every cell's environment seed is a hash of the scenario's values and the
//! replicate seed, independent of grid position and of the method list, so
//! adding a method or scenario never shifts another cell's draws, and all
//! methods compared within a cell see identical data.

use crate::config::{PMode, Scenario};

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn scenario_hash(s: &Scenario) -> u64 {
    let mut h = 0x4d4f4c4152u64; // tag
    for v in [s.d, s.n, s.m, s.s, s.t, s.h0, s.k] {
        h = mix(h, v as u64);
    }
    h = mix(h, s.sigma.to_bits());
    h = mix(
        h,
        match &s.p_mode {
            PMode::Uniform => 1,
            PMode::Fixed { probs } => {
                let mut p = 2u64;
                for v in probs {
                    p = mix(p, v.to_bits());
                }
                p
            }
            PMode::Linspace { lo, hi } => mix(mix(3, lo.to_bits()), hi.to_bits()),
        },
    );
    h
}

/// Seed for data/environment generation in one (scenario, replicate) cell.
pub fn cell_seed(scenario: &Scenario, replicate: u64) -> u64 {
    mix(scenario_hash(scenario), replicate)
}

/// Seed for the world parameters of a bandit scenario (shared across
/// replicates, so one world is played under many environment draws).
pub fn world_seed(scenario: &Scenario) -> u64 {
    mix(scenario_hash(scenario), 0x574f524c44)
}
