//! Run manifests: every output directory gets exactly one `manifest.json`
//! recording what produced its contents. The hash covers everything that
//! determines the outputs (input file bytes and effective settings), so two
//! manifests with equal hashes and seeds promise byte-identical data files.
//! Timings are diagnostics only and are excluded from that promise.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Subcommand that produced the directory.
    pub command: String,
    /// Input paths as given on the command line.
    pub inputs: Vec<String>,
    /// FNV-1a 64 hash (hex) of the run configuration: flag settings plus the
    /// raw bytes of every input file, in `inputs` order.
    pub config_hash: String,
    /// Seed used for any randomised stage; absent for deterministic commands.
    pub rng_seed: Option<u64>,
    pub tool_version: String,
    /// Wall-clock milliseconds per phase. Informational; varies run to run.
    pub timings_ms: BTreeMap<String, u64>,
}

/// Accumulates the configuration hash for a run.
pub struct ConfigHash {
    state: u64,
}

impl ConfigHash {
    pub fn new() -> Self {
        ConfigHash {
            state: 0xcbf2_9ce4_8422_2325,
        }
    }

    pub fn add_bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(0x0000_0100_0000_01b3);
        }
        // Separator so concatenations cannot collide across field boundaries.
        self.state ^= 0xff;
        self.state = self.state.wrapping_mul(0x0000_0100_0000_01b3);
        self
    }

    pub fn add_str(&mut self, s: &str) -> &mut Self {
        self.add_bytes(s.as_bytes())
    }

    pub fn hex(&self) -> String {
        format!("{:016x}", self.state)
    }
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, hash: &ConfigHash, rng_seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs,
            config_hash: hash.hex(),
            rng_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, phase: &str, ms: u64) {
        self.timings_ms.insert(phase.to_string(), ms);
    }

    /// Serialises the manifest into `dir/manifest.json` atomically.
    pub fn write(&self, dir: &Path) -> pickwin::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serialises");
        bytes.push(b'\n');
        pickwin::io::atomic_write(&dir.join("manifest.json"), &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_separator_sensitive() {
        let mut a = ConfigHash::new();
        a.add_str("ab").add_str("c");
        let mut b = ConfigHash::new();
        b.add_str("a").add_str("bc");
        assert_ne!(a.hex(), b.hex());

        let mut c = ConfigHash::new();
        c.add_str("ab").add_str("c");
        assert_eq!(a.hex(), c.hex());
        assert_eq!(a.hex().len(), 16);
    }

    #[test]
    fn empty_hash_is_the_fnv_offset_basis_with_separator() {
        // Pinned so accidental algorithm changes show up in review.
        let h = ConfigHash::new();
        assert_eq!(h.hex(), "cbf29ce484222325");
    }
}
