/// Formats an `f32` with nine significant digits, trimming trailing zeros.
///
/// Nine digits identify every `f32` uniquely, so parsing the output back as
/// `f32` reproduces the value bit-for-bit. Plain notation is used for
/// decimal exponents in `-5..9`, scientific otherwise; both are valid JSON.
pub fn format_sig9(v: f32) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.8e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };

    if (-5..9).contains(&exp) {
        let body = if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                format!("{}{}", digits, "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        format!("{sign}{body}")
    } else {
        let frac = &digits[1..];
        if frac.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{}e{exp}", &digits[..1], frac)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(0.125), "0.125");
        assert_eq!(format_sig9(123456.0), "123456");
        assert_eq!(format_sig9(2f32.powi(-20)), "9.53674316e-7");
        assert_eq!(format_sig9(2f32.powi(40)), "1.09951163e12");
        assert_eq!(format_sig9(1e10), "1e10");
        assert_eq!(format_sig9(0.1), "0.100000001");
    }

    proptest! {
        #[test]
        fn round_trips_every_finite_f32(bits in any::<u32>()) {
            let v = f32::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = format_sig9(v);
            let back: f32 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
            // at most 9 significant digits
            let sig = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit())
                .collect::<String>();
            prop_assert!(sig.trim_start_matches('0').len() <= 9);
        }
    }
}
