/// SplitMix64 finaliser. Used to derive independent, reproducible seeds
/// from a base seed and a tag (state-space size, cell index, ...).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `ceil` that ignores representation noise just above an integer, so that
/// `log_0.5(0.25)` evaluated as `2.0000000000000004` still yields 2.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `log_base(x)` in natural-log arithmetic.
pub(crate) fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

pub(crate) fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}
