//! Counter-based random streams.
//!
//! Every random draw in the crate is addressed by the triple
//! `(master seed, replication index, draw counter)` plus a stream label that
//! separates independent uses inside one replication (innovations, Brownian
//! increments, inner Monte Carlo loops, ...). The generator is a keyed
//! SplitMix64 counter: output `i` is the SplitMix64 finalizer applied to
//! `key + i * GOLDEN_GAMMA`. Replications therefore consume no shared state
//! and can be generated in any order, on any number of workers, with
//! bit-identical results.

use rand::rand_core::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective mix of the 64-bit input.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Address of one replication within one experiment.
///
/// A lineage owns no generator state; it only derives keys. Call
/// [`SeedLineage::stream`] to obtain an actual generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeedLineage {
    pub master: u64,
    pub replication: u64,
}

impl SeedLineage {
    pub fn new(master: u64, replication: u64) -> Self {
        SeedLineage {
            master,
            replication,
        }
    }

    /// Same master seed, different replication index.
    pub fn replication(self, replication: u64) -> Self {
        SeedLineage {
            master: self.master,
            replication,
        }
    }

    /// A generator for the given stream label, independent of all other
    /// labels and replications under the same master seed.
    pub fn stream(self, label: u64) -> CounterRng {
        let key = mix64(
            mix64(self.master ^ GOLDEN_GAMMA)
                ^ mix64(self.replication.wrapping_mul(GOLDEN_GAMMA) ^ 0xA5A5_A5A5_A5A5_A5A5)
                ^ mix64(label.wrapping_mul(0xD605_0F74_A1C3_95D7)),
        );
        CounterRng { key, counter: 0 }
    }

    /// Derive an independent lineage family for an internal Monte Carlo loop
    /// (oracle calibration, nested estimators, diagnostics). The label keeps
    /// distinct loops apart; the returned lineage's replication index is free
    /// for the loop to use without colliding with the caller's replications.
    pub fn subexperiment(self, label: u64) -> SeedLineage {
        SeedLineage {
            master: mix64(
                mix64(self.master ^ 0xF1EA_5EED_BADC_0DE5)
                    ^ mix64(self.replication.wrapping_mul(GOLDEN_GAMMA))
                    ^ mix64(label ^ 0x5F35_6495_A511_E371),
            ),
            replication: 0,
        }
    }
}

/// Conventional stream labels used by the crate.
pub mod streams {
    /// Innovation draws for a path bundle.
    pub const INNOVATIONS: u64 = 0;
    /// Brownian increments for limit-law samples.
    pub const BROWNIAN: u64 = 1;
    /// Inner loops of nested Monte Carlo estimators.
    pub const NESTED_INNER: u64 = 2;
    /// Auxiliary draws (pair norms, conditional-mean oracles).
    pub const AUXILIARY: u64 = 3;
}

/// Keyed counter generator; see module docs.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    /// The raw 64-bit word at a given counter position.
    #[inline]
    pub fn word_at(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter += 1;
        w
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let mut chunks = dest.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rem = chunks.into_remainder();
        if !rem.is_empty() {
            let w = self.next_u64().to_le_bytes();
            rem.copy_from_slice(&w[..rem.len()]);
        }
    }
}
