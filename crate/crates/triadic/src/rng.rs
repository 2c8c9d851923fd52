//! Counter-based deterministic random streams.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so replicates
//! can be evaluated in any order, on any number of workers, and still produce
//! bit-identical results. The mixer is the splitmix64 finalizer applied three
//! times with distinct odd multipliers; it is not cryptographic.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 uniform bits for the `(seed, stream, counter)` triple.
#[inline]
pub fn counter_u64(seed: u64, stream: u64, counter: u64) -> u64 {
    let mut z = mix64(seed.wrapping_add(GOLDEN_GAMMA));
    z = mix64(z ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = mix64(z ^ counter.wrapping_mul(0x2545_F491_4F6C_DD1D));
    z
}

/// Uniform draw in the open interval (0, 1) with 53-bit resolution.
///
/// Never returns exactly 0 or 1, so it is safe to feed into a normal
/// quantile transform.
#[inline]
pub fn unit_uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    let mantissa = counter_u64(seed, stream, counter) >> 11;
    (mantissa as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}
