//! Half-up decimal rounding for display.
//!
//! Rounding works on the shortest decimal string that round-trips the f64,
//! so a value printed as `0.98905` rounds to `0.9891` even though its binary
//! value lies slightly below the decimal tie.

pub const DISPLAY_PLACES: usize = 4;

pub fn round_half_up(x: f64, places: usize) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    if frac_part.len() <= places {
        return x;
    }
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().take(places))
        .map(|b| b - b'0')
        .collect();
    if frac_part.as_bytes()[places] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    let render = |ds: &[u8]| ds.iter().map(|d| char::from(b'0' + d)).collect::<String>();
    let rounded: f64 = format!("{}.{}", render(&digits[..split]), render(&digits[split..]))
        .parse()
        .expect("digit string parses");
    if x.is_sign_negative() {
        -rounded
    } else {
        rounded
    }
}

/// Rounded to four places, for json output.
pub fn display_value(x: f64) -> f64 {
    round_half_up(x, DISPLAY_PLACES)
}

/// Rounded and rendered with exactly four decimals, for text and csv output.
pub fn display(x: f64) -> String {
    format!("{:.*}", DISPLAY_PLACES, display_value(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_values() {
        assert_eq!(display(633.0 / 640.0), "0.9891");
        assert_eq!(display(0.971875), "0.9719");
        assert_eq!(display(1.0), "1.0000");
        assert_eq!(display(0.0), "0.0000");
    }

    #[test]
    fn decimal_ties_round_up() {
        assert_eq!(round_half_up(0.98905, 4), 0.9891);
        assert_eq!(round_half_up(0.12345, 4), 0.1235);
        assert_eq!(round_half_up(0.99995, 4), 1.0);
        assert_eq!(round_half_up(0.123449999, 4), 0.1234);
        assert_eq!(round_half_up(-0.00005, 4), -0.0001);
    }

    proptest! {
        #[test]
        fn within_half_unit(x in 0.0f64..=1.0) {
            let r = round_half_up(x, 4);
            prop_assert!((r - x).abs() <= 0.00005 + 1e-12);
            prop_assert_eq!(round_half_up(r, 4), r);
        }
    }
}
