use super::SimError;
use crate::scalar::Scalar;

/// Number of positions at which two equal-length strings differ.
pub fn hamming_distance(a: &str, b: &str) -> Result<usize, SimError> {
    let (la, lb) = (a.chars().count(), b.chars().count());
    if la != lb {
        return Err(SimError::Domain(format!(
            "hamming distance needs equal lengths, got {la} and {lb}"
        )));
    }
    Ok(a.chars().zip(b.chars()).filter(|(x, y)| x != y).count())
}

/// Relative-distance similarity `1 - |x - y| / max(x, y)` for positive values.
pub fn relative_distance<T: Scalar>(x: T, y: T) -> Result<T, SimError> {
    if !(x > T::zero() && y > T::zero()) || x.is_infinite() || y.is_infinite() {
        return Err(SimError::Domain(format!("relative distance needs finite positive values, got {x} and {y}")));
    }
    Ok((T::one() - (x - y).abs() / x.max(y)).unit())
}
