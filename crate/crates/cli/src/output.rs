//! Output formatting: 12-significant-digit numbers everywhere, so repeated
//! runs diff cleanly and reproduction checks at 1e-6 have headroom.

use serde::Serialize;
use serde_json::Value;

/// Formats one numeric cell with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.11e}")
}

/// Rounds every number in a JSON tree to 12 significant digits.
pub fn round_numbers(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if f.is_finite() {
                    let rounded: f64 = format!("{f:.11e}").parse().unwrap_or(f);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *value = Value::Number(num);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Serializes to pretty JSON with rounded numbers and a trailing newline.
pub fn to_rounded_json<T: Serialize>(value: &T) -> String {
    let mut tree = serde_json::to_value(value).expect("output serializes");
    round_numbers(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree).expect("json prints");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_has_twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig(-2.009950493836208), "-2.00995049384e0");
    }

    #[test]
    fn rounding_truncates_to_twelve_digits() {
        let mut v = serde_json::json!({ "x": [1.2345678901234567, 2.0] });
        round_numbers(&mut v);
        assert_eq!(v["x"][0].as_f64().unwrap(), 1.23456789012);
        assert_eq!(v["x"][1].as_f64().unwrap(), 2.0);
    }
}
