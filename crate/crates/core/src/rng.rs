//! Counter-based random numbers.
//!
//! Every random quantity is a pure function of `(seed, key, stream)`: there is
//! no generator state to thread through, so a configuration comes out the same
//! whichever order edges are visited in and however many workers share the job.
//!
//! The mixer is the splitmix64 finalizer. A key is absorbed by xor-ing it into
//! the running hash and re-mixing, which is a bijection in the key for a fixed
//! prefix, so distinct keys never collide within one `(seed, stream)`.

/// Stream tag for the orientation coin of an edge.
pub const STREAM_ORIENT: u64 = 0x6f72_6965_6e74;
/// Stream tag for the forward arc of the independent arc process.
pub const STREAM_FORWARD_ARC: u64 = 0x6677_6461_7263;
/// Stream tag for the backward arc of the independent arc process.
pub const STREAM_BACKWARD_ARC: u64 = 0x6277_6461_7263;

const SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const CHILD_SALT: u64 = 0xd1b5_4a32_d192_ed03;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed, e.g. one per Monte Carlo sample.
#[inline]
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed ^ CHILD_SALT) ^ tag)
}

/// Derives a child seed from a path of tags.
pub fn derive_path(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(seed, |s, &t| derive(s, t))
}

/// 64 random bits for `key` in `stream` under `seed`.
#[inline]
pub fn bits(seed: u64, key: u64, stream: u64) -> u64 {
    let h = mix64(seed ^ SEED_SALT);
    let h = mix64(h ^ stream);
    mix64(h ^ key)
}

/// A uniform draw in `[0, 1)` on the 2^-53 grid.
#[inline]
pub fn uniform(seed: u64, key: u64, stream: u64) -> f64 {
    (bits(seed, key, stream) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli(p) coin: true iff `U < p`. Exact at `p = 0` and `p = 1`.
#[inline]
pub fn coin(seed: u64, key: u64, stream: u64, p: f64) -> bool {
    uniform(seed, key, stream) < p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_in_unit_interval() {
        for k in 0..10_000u64 {
            let u = uniform(7, k, STREAM_ORIENT);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn streams_and_seeds_differ() {
        assert_ne!(bits(1, 5, STREAM_ORIENT), bits(2, 5, STREAM_ORIENT));
        assert_ne!(bits(1, 5, STREAM_ORIENT), bits(1, 5, STREAM_FORWARD_ARC));
        assert_ne!(derive(3, 0), derive(3, 1));
    }

    #[test]
    fn coin_extremes() {
        for k in 0..1000 {
            assert!(!coin(9, k, STREAM_ORIENT, 0.0));
            assert!(coin(9, k, STREAM_ORIENT, 1.0));
        }
    }

    #[test]
    fn mean_is_half() {
        let n = 200_000u64;
        let s: f64 = (0..n).map(|k| uniform(11, k, STREAM_ORIENT)).sum();
        let mean = s / n as f64;
        // sd of the mean is 1/sqrt(12 n) ~ 6.5e-4
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / (12.0 * n as f64)).sqrt());
    }
}
