//! Fairness between the two sources.

use crate::closed_form::DomainError;
use crate::scalar::Scalar;

/// Jain's fairness index of two average ages, `(d1 + d2)² / (2 (d1² + d2²))`.
///
/// Lies in `[0.5, 1]`; equals 1 exactly when `d1 == d2`.
pub fn jain_index<T: Scalar>(d1: T, d2: T) -> Result<T, DomainError> {
    for (name, v) in [("d1", &d1), ("d2", &d2)] {
        if *v <= T::zero() {
            return Err(DomainError::OutOfDomain {
                name,
                requirement: "> 0",
                value: v.to_string(),
            });
        }
    }
    let sum = d1.clone() + d2.clone();
    let squares = d1.clone() * d1 + d2.clone() * d2;
    Ok(sum.clone() * sum / (T::int(2) * squares))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn known_values() {
        assert_eq!(jain_index(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(jain_index(ratio(1, 1), ratio(3, 1)).unwrap(), ratio(4, 5));
        assert!(jain_index(0.0, 1.0).is_err());
        assert!(jain_index(1.0, -2.0).is_err());
    }

    #[test]
    fn scale_invariant() {
        let a = jain_index(1.0_f64, 5.0).unwrap();
        let b = jain_index(10.0_f64, 50.0).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a - 36.0 / 52.0).abs() < 1e-15);
    }
}
