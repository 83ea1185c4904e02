//! Locale-free complex literals: `a`, `bi`, `a+bi`, `a-bi`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid complex literal `{s}`, expected a+bi"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |txt: &str| -> Result<f64> {
        match txt {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => txt.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Formats as `a+bi` / `a-bi`, the inverse of [`parse_complex`].
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn literals() {
        let c = Complex64::new;
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("-0.3").unwrap(), c(-0.3, 0.0));
        assert_eq!(parse_complex("0.3+0.4i").unwrap(), c(0.3, 0.4));
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), c(0.3, -0.4));
        assert_eq!(parse_complex("0.7i").unwrap(), c(0.0, 0.7));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2E+1i").unwrap(), c(1e-3, -20.0));
        assert_eq!(parse_complex(" 0.1 + 0.2i ").unwrap(), c(0.1, 0.2));
        for bad in ["", "abc", "0.3+0.4", "1+2ii", "+i+"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let z = Complex64::new(re, im);
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
