//! Serialization helpers shared by certificates and CLI reports.

use serde::Serializer;

/// Writes non-finite reals as the strings `"inf"`, `"-inf"` or `"nan"`
/// so that unbounded diameters survive a JSON round trip.
pub fn extended_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}
