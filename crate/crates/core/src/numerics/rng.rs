//! Splittable, replayable random streams.
//!
//! A stream is keyed by `(master_seed, stream_index)`. Draws are organised in
//! fixed-size blocks; block `b` of a stream always maps to the same ChaCha
//! state, so a computation that indexes its work by block number produces the
//! same numbers whatever the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Number of draws (trials, points) handled by one RNG block.
pub const BLOCK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Derive an independent child stream; `label` distinguishes siblings.
    pub fn child(&self, label: u64) -> Self {
        let mixed = splitmix64(self.stream_index ^ splitmix64(label.wrapping_add(0x5EED)));
        Self {
            master_seed: self.master_seed,
            stream_index: mixed,
        }
    }

    /// Derive a child stream from a string label (experiment names, sides).
    pub fn named(&self, label: &str) -> Self {
        // FNV-1a, stable across platforms and releases.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h)
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        let mut s = splitmix64(self.master_seed) ^ self.stream_index.rotate_left(17);
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        key
    }

    /// Generator for block `block` of this stream.
    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(block);
        rng
    }

    /// Generator for a single indexed draw (used where work is per item).
    pub fn item_rng(&self, item: u64) -> ChaCha8Rng {
        self.child(item).block_rng(0)
    }
}

/// Run `f` over `[0, total)` split into [`BLOCK`]-sized blocks, in parallel,
/// returning one result per block in block order.
///
/// `f(rng, start, end)` receives the block's own generator.
pub fn par_blocks<T, F>(stream: &RngStream, total: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize, usize) -> T + Sync + Send,
{
    let nblocks = total.div_ceil(BLOCK);
    (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(total);
            let mut rng = stream.block_rng(b as u64);
            f(&mut rng, start, end)
        })
        .collect()
}

/// Parallel map over indices without randomness, preserving order.
pub fn par_map<T, F>(total: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..total).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn replay_is_exact() {
        let s = RngStream::new(7, 3);
        let a: Vec<u64> = (0..5).map(|_| s.block_rng(2).gen()).collect();
        let b: Vec<u64> = (0..5).map(|_| s.block_rng(2).gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn blocks_and_streams_differ() {
        let s = RngStream::new(7, 3);
        let x: u64 = s.block_rng(0).gen();
        let y: u64 = s.block_rng(1).gen();
        let z: u64 = RngStream::new(7, 4).block_rng(0).gen();
        let w: u64 = RngStream::new(8, 3).block_rng(0).gen();
        assert!(x != y && x != z && x != w);
        assert_ne!(s.child(1), s.child(2));
        assert_ne!(s.named("lhs"), s.named("rhs"));
    }

    #[test]
    fn par_blocks_independent_of_pool_size() {
        let s = RngStream::new(11, 0);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                par_blocks(&s, 3000, |rng, a, b| {
                    (a..b).map(|_| rng.gen::<f64>()).sum::<f64>()
                })
            })
        };
        assert_eq!(run(1), run(3));
    }
}
