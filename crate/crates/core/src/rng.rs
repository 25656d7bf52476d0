//! Counter-based random substreams.
//!
//! Every Gaussian draw in the crate comes from a ChaCha8 generator whose
//! 256-bit key is the concatenation of four little-endian `u64` words:
//!
//! ```text
//! key = master_seed || domain || path_index || component_index
//! ```
//!
//! Distinct keys give statistically independent ChaCha streams, so the
//! ensemble produced for a given master seed does not depend on the order
//! in which paths are generated or on how many worker threads generate
//! them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the random inputs of processes that must be independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Driving fBm of the first (or only) fOU process.
    ProcessA,
    /// Driving fBm of the second, independent fOU process.
    ProcessB,
    /// Standard Brownian increments of the Volterra generator.
    Volterra,
    /// Random probe grids for the covariance bound checks.
    Probe,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::ProcessA => 0x4650_4f55_0000_000a,
            Domain::ProcessB => 0x4650_4f55_0000_000b,
            Domain::Volterra => 0x564f_4c54_4552_5241,
            Domain::Probe => 0x5052_4f42_4500_0000,
        }
    }
}

/// Generator for the substream `(master, domain, path, component)`.
pub fn substream(master: u64, domain: Domain, path: u64, component: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&domain.tag().to_le_bytes());
    key[16..24].copy_from_slice(&path.to_le_bytes());
    key[24..32].copy_from_slice(&component.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
