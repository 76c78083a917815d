//! Counter-based deterministic randomness for sketching.
//!
//! Sketch construction needs random values addressable by key — the i-th
//! hyperplane coordinate for vertex x, or the i-th permutation value of x —
//! so that any worker can evaluate any coordinate without coordinating with
//! the others. A keyed mix of the (seed, stream, element) triple provides
//! that: same key, same value, regardless of thread schedule.

/// 64-bit finalizer with full avalanche (the MurmurHash3 constants).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 33;
    z = z.wrapping_mul(0xff51afd7ed558ccd);
    z ^= z >> 33;
    z = z.wrapping_mul(0xc4ceb9fe1a85ec53);
    z ^ (z >> 33)
}

const GAMMA_STREAM: u64 = 0x9E3779B97F4A7C15;
const GAMMA_ELEM: u64 = 0xD1B54A32D192ED03;

/// Uniform 64-bit value keyed by (seed, stream, element).
#[inline]
pub(crate) fn keyed_u64(seed: u64, stream: u64, element: u64) -> u64 {
    let a = mix64(seed ^ GAMMA_STREAM.wrapping_mul(stream.wrapping_add(1)));
    mix64(a ^ GAMMA_ELEM.wrapping_mul(element.wrapping_add(1)))
}

/// Standard normal deviate keyed by (seed, stream, element), via Box–Muller
/// over two uniforms derived from the key.
#[inline]
pub(crate) fn keyed_normal(seed: u64, stream: u64, element: u64) -> f64 {
    let h1 = keyed_u64(seed, stream, element);
    let h2 = mix64(h1 ^ GAMMA_STREAM);
    // u1 ∈ (0, 1] keeps ln finite; u2 ∈ [0, 1).
    let u1 = ((h1 >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let u2 = (h2 >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
