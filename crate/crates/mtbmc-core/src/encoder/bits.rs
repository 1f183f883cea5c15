//! Scalar bit-vector semantics at width `w <= 64`.
//!
//! Single source of truth for what each operator means: term-level constant
//! folding, model evaluation, and the concrete interpreter all call these,
//! while the bit-blaster implements the same functions as circuits (the
//! width-4 exhaustive tests cross-check the two).

/// Keep the low `w` bits.
pub fn mask(v: u64, w: u32) -> u64 {
    if w >= 64 {
        v
    } else {
        v & ((1u64 << w) - 1)
    }
}

/// Interpret a `w`-bit value as a signed integer.
pub fn to_signed(v: u64, w: u32) -> i64 {
    let v = mask(v, w);
    if w == 0 || w >= 64 {
        return v as i64;
    }
    let sign = 1u64 << (w - 1);
    if v & sign != 0 {
        (v | !((1u64 << w) - 1)) as i64
    } else {
        v as i64
    }
}

/// Encode a signed integer as a `w`-bit value.
pub fn from_signed(v: i64, w: u32) -> u64 {
    mask(v as u64, w)
}

pub fn add(a: u64, b: u64, w: u32) -> u64 {
    mask(a.wrapping_add(b), w)
}

pub fn sub(a: u64, b: u64, w: u32) -> u64 {
    mask(a.wrapping_sub(b), w)
}

pub fn mul(a: u64, b: u64, w: u32) -> u64 {
    mask(a.wrapping_mul(b), w)
}

pub fn neg(a: u64, w: u32) -> u64 {
    mask(a.wrapping_neg(), w)
}

pub fn not(a: u64, w: u32) -> u64 {
    mask(!a, w)
}

/// Signed division, C99 truncation toward zero. Division by zero follows
/// the fixed bit-vector convention: `1` for negative dividends, all-ones
/// otherwise, so every tool in the pipeline agrees on one value.
pub fn sdiv(a: u64, b: u64, w: u32) -> u64 {
    let (sa, sb) = (to_signed(a, w), to_signed(b, w));
    if sb == 0 {
        return if sa < 0 { mask(1, w) } else { mask(u64::MAX, w) };
    }
    from_signed((sa as i128 / sb as i128) as i64, w)
}

/// Signed remainder, sign follows the dividend; `a % 0 = a`.
pub fn srem(a: u64, b: u64, w: u32) -> u64 {
    let (sa, sb) = (to_signed(a, w), to_signed(b, w));
    if sb == 0 {
        return mask(a, w);
    }
    from_signed((sa as i128 % sb as i128) as i64, w)
}

/// Left shift; amounts are unsigned, `>= w` yields zero.
pub fn shl(a: u64, amt: u64, w: u32) -> u64 {
    if amt >= w as u64 {
        0
    } else {
        mask(a << amt, w)
    }
}

/// Logical right shift; amounts `>= w` yield zero.
pub fn lshr(a: u64, amt: u64, w: u32) -> u64 {
    if amt >= w as u64 {
        0
    } else {
        mask(mask(a, w) >> amt, w)
    }
}

/// Arithmetic right shift; amounts `>= w` yield the sign fill.
pub fn ashr(a: u64, amt: u64, w: u32) -> u64 {
    let sa = to_signed(a, w);
    if amt >= w as u64 {
        return if sa < 0 { mask(u64::MAX, w) } else { 0 };
    }
    from_signed(sa >> amt, w)
}

pub fn slt(a: u64, b: u64, w: u32) -> bool {
    to_signed(a, w) < to_signed(b, w)
}

pub fn sle(a: u64, b: u64, w: u32) -> bool {
    to_signed(a, w) <= to_signed(b, w)
}

pub fn ult(a: u64, b: u64, w: u32) -> bool {
    mask(a, w) < mask(b, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_round_trip_at_w4() {
        for v in -8i64..8 {
            assert_eq!(to_signed(from_signed(v, 4), 4), v);
        }
    }

    #[test]
    fn division_truncates_toward_zero() {
        assert_eq!(to_signed(sdiv(from_signed(-7, 8), from_signed(2, 8), 8), 8), -3);
        assert_eq!(to_signed(srem(from_signed(-7, 8), from_signed(2, 8), 8), 8), -1);
        assert_eq!(to_signed(sdiv(from_signed(7, 8), from_signed(-2, 8), 8), 8), -3);
        assert_eq!(to_signed(srem(from_signed(7, 8), from_signed(-2, 8), 8), 8), 1);
    }

    #[test]
    fn int_min_over_minus_one_wraps() {
        let w = 8;
        let int_min = from_signed(-128, w);
        let minus1 = from_signed(-1, w);
        assert_eq!(sdiv(int_min, minus1, w), int_min);
    }

    #[test]
    fn shift_overflow_is_defined() {
        assert_eq!(shl(0b1011, 4, 4), 0);
        assert_eq!(lshr(0b1011, 9, 4), 0);
        assert_eq!(ashr(0b1011, 9, 4), 0b1111);
        assert_eq!(ashr(0b0011, 9, 4), 0);
    }
}
