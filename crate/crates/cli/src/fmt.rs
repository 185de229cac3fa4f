//! `%.17g`-style numeric formatting: 17 significant digits, trailing zeros
//! stripped, scientific notation outside the `%g` fixed-point range. Pure
//! function of the bits, so output files are byte-stable across runs, and 17
//! digits round-trip every f64 exactly.

pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // The exponent in {:e} output is exact; deriving it from log10 can
    // misround near powers of ten.
    let sci = format!("{x:e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if exp < -4 || exp >= 17 {
        let full = format!("{x:.16e}");
        let (mantissa, exponent) = full.split_at(full.find('e').unwrap());
        format!("{}{}", trim_zeros(mantissa), exponent)
    } else {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(-2.25), "-2.25");
        assert_eq!(g17(1024.0), "1024");
    }

    #[test]
    fn scientific_range() {
        assert_eq!(g17(1e-5), "1.0000000000000001e-5");
        assert_eq!(g17(1e20), "1e20");
        assert_eq!(g17(1e-4), "0.0001");
    }

    #[test]
    fn round_trips_exactly() {
        for &x in &[
            std::f64::consts::PI,
            1.0 / 3.0,
            -9.87654321e-13,
            6.02214076e23,
            f64::MIN_POSITIVE,
        ] {
            let s = g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
