//! Stable seed derivation.
//!
//! Seeds must not depend on the standard library's hasher, which is allowed to
//! change between releases.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte sequence, finished with a splitmix64 avalanche.
#[derive(Debug, Clone)]
pub struct StableHasher(u64);

impl Default for StableHasher {
    fn default() -> Self {
        StableHasher(FNV_OFFSET)
    }
}

impl StableHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        // field separator so ("ab","c") != ("a","bc")
        self.0 ^= 0xff;
        self.0 = self.0.wrapping_mul(FNV_PRIME);
        self
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes())
    }

    pub fn u64(self, v: u64) -> Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn f64(self, v: f64) -> Self {
        // -0.0 and 0.0 hash alike
        let v = if v == 0.0 { 0.0 } else { v };
        self.u64(v.to_bits())
    }

    pub fn finish(&self) -> u64 {
        splitmix64(self.0)
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies one training run inside an experiment grid.
#[derive(Debug, Clone, Copy)]
pub struct CellKey<'a> {
    pub master_seed: u64,
    pub dataset: &'a str,
    pub transform: &'a str,
    pub classifier: &'a str,
    pub fold: usize,
    pub grid_point: usize,
}

impl CellKey<'_> {
    pub fn seed(&self) -> u64 {
        StableHasher::new()
            .u64(self.master_seed)
            .str(self.dataset)
            .str(self.transform)
            .str(self.classifier)
            .u64(self.fold as u64)
            .u64(self.grid_point as u64)
            .finish()
    }
}
