//! Self-contained seeded RNG (xoshiro256++ seeded through splitmix64).
//!
//! Every randomized component in the crate draws from this generator so that
//! results are bit-reproducible for a given seed, independent of platform,
//! crate versions, and worker-thread count.

/// xoshiro256++ with splitmix64 seeding.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        let mut s = seed;
        Rng {
            state: [
                splitmix64(&mut s),
                splitmix64(&mut s),
                splitmix64(&mut s),
                splitmix64(&mut s),
            ],
        }
    }

    /// Derive an independent stream for a subcomponent. Mixing the label in
    /// keeps sibling components (tree i, epoch j, ...) decorrelated while
    /// staying a pure function of the master seed.
    pub fn derive(seed: u64, label: u64) -> Self {
        let mut s = seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mixed = splitmix64(&mut s);
        Rng::seed_from(mixed)
    }

    pub fn next_u64(&mut self) -> u64 {
        let [s0, s1, s2, s3] = self.state;
        let result = s0
            .wrapping_add(s3)
            .rotate_left(23)
            .wrapping_add(s0);
        let t = s1 << 17;
        let mut s = [s0, s1, s2, s3];
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        self.state = s;
        result
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Uses rejection to stay unbiased.
    pub fn gen_range(&mut self, n: usize) -> usize {
        assert!(n > 0, "gen_range on empty range");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return (v % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.gen_range(i + 1);
            items.swap(i, j);
        }
    }

    /// Sample `k` distinct values from 0..n (partial Fisher-Yates), in
    /// selection order.
    pub fn sample_indices(&mut self, n: usize, k: usize, scratch: &mut Vec<usize>) -> Vec<usize> {
        let k = k.min(n);
        scratch.clear();
        scratch.extend(0..n);
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let j = i + self.gen_range(n - i);
            scratch.swap(i, j);
            out.push(scratch[i]);
        }
        out
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        // u in (0, 1] so the log is finite.
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}
