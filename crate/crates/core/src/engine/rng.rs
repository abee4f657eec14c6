use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 256-bit ChaCha key for `(master_seed, label)`.
///
/// The derivation is a fixed function of its inputs (no std hasher), so
/// streams are stable across processes, platforms and compiler versions.
fn derive_key(master_seed: u64, label: &str) -> [u8; 32] {
    let mut state = master_seed ^ fnv1a(label.as_bytes()).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// A named, independently seeded random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, label: &str) -> Self {
        RngStream {
            label: label.to_owned(),
            rng: ChaCha8Rng::from_seed(derive_key(master_seed, label)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn normal(&mut self, mean: f64, sigma: f64) -> f64 {
        mean + sigma * self.standard_normal()
    }

    /// Exponential draw with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        Exp::new(1.0 / mean).expect("positive mean").sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Registry of substreams under one master seed. Asking for the same label
/// twice returns the same stream, at its current position.
#[derive(Debug)]
pub struct Streams {
    master_seed: u64,
    streams: BTreeMap<String, RngStream>,
}

impl Streams {
    pub fn new(master_seed: u64) -> Self {
        Streams {
            master_seed,
            streams: BTreeMap::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&mut self, label: &str) -> &mut RngStream {
        let seed = self.master_seed;
        self.streams
            .entry(label.to_owned())
            .or_insert_with(|| RngStream::new(seed, label))
    }

    /// Detaches a fresh stream for exclusive ownership by one component.
    pub fn fork(&self, label: &str) -> RngStream {
        RngStream::new(self.master_seed, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_label_reproduce() {
        let mut a = RngStream::new(42, "fading");
        let mut b = RngStream::new(42, "fading");
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn registry_keeps_position() {
        let mut s = Streams::new(7);
        let first = s.stream("traffic").uniform();
        let second = s.stream("traffic").uniform();
        let mut fresh = RngStream::new(7, "traffic");
        assert_eq!(first, fresh.uniform());
        assert_eq!(second, fresh.uniform());
    }

    #[test]
    fn adding_streams_does_not_perturb_others() {
        let mut s1 = Streams::new(99);
        let a: Vec<u64> = (0..5).map(|_| s1.stream("shadowing").next_u64()).collect();
        let mut s2 = Streams::new(99);
        s2.stream("new.component").next_u64();
        let b: Vec<u64> = (0..5).map(|_| s2.stream("shadowing").next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_give_distinct_first_draws() {
        let collisions = (0..10_000u64)
            .filter(|&seed| {
                RngStream::new(seed, "fading").next_u64() == RngStream::new(seed, "traffic").next_u64()
            })
            .count();
        assert_eq!(collisions, 0);
    }

    #[test]
    fn uniform_mean_is_one_half() {
        let mut r = RngStream::new(2024, "phy.error");
        let n = 1_000_000;
        let mean = (0..n).map(|_| r.uniform()).sum::<f64>() / n as f64;
        assert!((0.499..=0.501).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn streams_are_uncorrelated() {
        let mut a = RngStream::new(5, "fading");
        let mut b = RngStream::new(5, "traffic");
        let n = 200_000;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (a.uniform(), b.uniform())).unzip();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
        let corr = cov / (1.0 / 12.0);
        // 4 standard errors of a null correlation
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }
}
