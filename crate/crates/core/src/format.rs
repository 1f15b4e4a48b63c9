//! Fixed-precision number formatting shared by the CSV and JSON writers.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// `f64` serialized with [`sci`]; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sci(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for v in [0.0, -1.5, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX] {
            assert_eq!(sci(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(sci(0.125), "1.2500000000000000e-1");
    }

    #[test]
    fn json() {
        let s = serde_json::to_string(&vec![Sci(2.0 / 3.0), Sci(f64::NAN)]).unwrap();
        assert_eq!(s, "[6.6666666666666663e-1,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(2.0 / 3.0));
    }
}
