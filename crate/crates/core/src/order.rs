/// Ordering key for a non-negative score at single precision. Scores that
/// differ only by rounding noise in the last few bits share a key, so ties
/// between them fall through to the caller's index tie-break.
#[inline]
pub(crate) fn coarse_key(score: f64) -> u64 {
    debug_assert!(score >= 0.0 || score.is_nan(), "negative score {score}");
    // IEEE-754 bit patterns of non-negative doubles sort like the values;
    // dropping 29 of the 52 mantissa bits keeps a 2^-23 relative resolution.
    score.max(0.0).to_bits() >> 29
}
