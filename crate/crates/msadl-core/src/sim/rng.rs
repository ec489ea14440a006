//! xoshiro256** — the scheduler's PRNG.
//!
//! The algorithm is fixed by name so that traces reproduce bit-for-bit
//! across platforms and implementations. A 64-bit seed is expanded to the
//! 256-bit state with splitmix64.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Xoshiro256StarStar {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s = [splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm)];
        Xoshiro256StarStar { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform index into `0..n`. `n` must be non-zero.
    pub fn pick(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_matches_hand_computed_steps() {
        // state {1,2,3,4}: out1 = rotl(2*5,7)*9 = 1280*9; the update then
        // zeroes s[1], so out2 = 0
        let mut rng = Xoshiro256StarStar { s: [1, 2, 3, 4] };
        assert_eq!(rng.next_u64(), 11520);
        assert_eq!(rng.s, [7, 0, 262146, 6u64 << 45]);
        assert_eq!(rng.next_u64(), 0);
    }

    #[test]
    fn splitmix_expansion_is_stable() {
        // freezes the seed expansion so traces reproduce across releases
        let rng = Xoshiro256StarStar::from_seed(0);
        assert_eq!(
            rng.s,
            [
                0xE220A8397B1DCDAF,
                0x6E789E6AA1B965F4,
                0x06C45D188009454F,
                0xF88BB8A8724C81EC,
            ]
        );
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut a = Xoshiro256StarStar::from_seed(42);
        let mut b = Xoshiro256StarStar::from_seed(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = Xoshiro256StarStar::from_seed(0);
        let mut b = Xoshiro256StarStar::from_seed(1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn pick_covers_all_indices() {
        let mut rng = Xoshiro256StarStar::from_seed(7);
        let mut seen = [false; 6];
        for _ in 0..1000 {
            seen[rng.pick(6)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
