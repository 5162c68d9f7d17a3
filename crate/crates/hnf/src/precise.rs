//! Thin wrapper over `astro-float` for fixed-precision real evaluation.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// Arithmetic at a fixed binary precision, with its constants cache.
pub struct HighPrecision {
    bits: usize,
    cc: Consts,
}

impl std::fmt::Debug for HighPrecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HighPrecision({} bits)", self.bits)
    }
}

impl HighPrecision {
    pub fn new(bits: usize) -> Self {
        Self {
            bits,
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    pub fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.bits)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.bits, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.bits, RM, &mut self.cc)
    }

    /// `e^a − 1` without cancellation for small `a`.
    pub fn expm1(&mut self, a: &BigFloat) -> BigFloat {
        let one = self.int(1);
        let small = a.abs() < self.num(1.0 / 256.0);
        if !small || a.is_zero() {
            let e = self.exp(a);
            return self.sub(&e, &one);
        }
        let mut term = a.clone();
        let mut sum = a.clone();
        for k in 2..self.bits {
            term = self.div(&self.mul(&term, a), &self.int(k as i64));
            let next = self.add(&sum, &term);
            if next == sum {
                break;
            }
            sum = next;
        }
        sum
    }

    /// `a^b` for `a > 0`.
    pub fn pow(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.pow(b, self.bits, RM, &mut self.cc)
    }

    pub fn powi(&self, a: &BigFloat, n: usize) -> BigFloat {
        a.powi(n, self.bits, RM)
    }

    /// Nearest double; saturates to ±∞ or 0 outside the double range.
    pub fn to_f64(&mut self, a: &BigFloat) -> f64 {
        if a.is_zero() {
            return 0.0;
        }
        let s = a.format(Radix::Dec, RM, &mut self.cc).expect("decimal formatting");
        s.parse().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_transcendentals() {
        let mut hp = HighPrecision::new(128);
        for x in [1.0, -0.375, 1e-300, 12345.678] {
            let b = hp.num(x);
            assert_eq!(hp.to_f64(&b), x);
        }
        let e = hp.exp(&hp.int(1));
        assert!((hp.to_f64(&e) - std::f64::consts::E).abs() < 1e-15);
        let l = hp.ln(&e);
        assert!((hp.to_f64(&l) - 1.0).abs() < 1e-30);
        let r = hp.pow(&hp.int(2), &hp.num(0.5));
        assert!((hp.to_f64(&r) - std::f64::consts::SQRT_2).abs() < 1e-15);
        let tiny = hp.num(1e-20);
        let m = hp.expm1(&tiny);
        let rel = hp.to_f64(&hp.div(&hp.sub(&m, &tiny), &tiny));
        assert!((rel - 5e-21).abs() < 1e-30);
        let huge = hp.exp(&hp.int(2000));
        assert_eq!(hp.to_f64(&huge), f64::INFINITY);
    }
}
