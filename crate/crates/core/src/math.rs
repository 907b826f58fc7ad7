//! f64 math routed through std or libm depending on build flags.

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("no_std builds require the `libm` feature");

#[cfg(feature = "std")]
mod imp {
    pub fn log2(x: f64) -> f64 {
        x.log2()
    }
    pub fn exp2(x: f64) -> f64 {
        x.exp2()
    }
    pub fn round(x: f64) -> f64 {
        x.round()
    }
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
mod imp {
    pub fn log2(x: f64) -> f64 {
        libm::log2(x)
    }
    pub fn exp2(x: f64) -> f64 {
        libm::exp2(x)
    }
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
}

pub use imp::{abs, exp2, log2, round};

/// log2(a + b) given log2-domain inputs; tolerates -inf on either side.
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + log2(1.0 + exp2(lo - hi))
}

/// Uniform f64 in [0, 1) from 53 random bits.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generator keyed by (seed, stream a, stream b). Randomized corpus
/// passes derive one per work item (e.g. a = copy, b = line) so output
/// never depends on worker scheduling.
pub fn stream_rng(seed: u64, a: u64, b: u64) -> rand_chacha::ChaCha8Rng {
    use rand_core::SeedableRng;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    rand_chacha::ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_add_matches_linear() {
        let a: f64 = 0.3;
        let b: f64 = 0.45;
        let got = log2_add(a.log2(), b.log2());
        assert!((got - (a + b).log2()).abs() < 1e-12);
    }

    #[test]
    fn log2_add_handles_neg_inf() {
        assert_eq!(log2_add(f64::NEG_INFINITY, -2.0), -2.0);
        assert_eq!(
            log2_add(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn unit_f64_range() {
        for bits in [0u64, 1, u64::MAX, 0x8000_0000_0000_0000] {
            let x = unit_f64(bits);
            assert!((0.0..1.0).contains(&x));
        }
    }
}
