//! The base field ℚ(θ)(i).
//!
//! Elements are stored as four rationals over the basis `{1, θ, i, iθ}`.
//! θ is a root of an integer polynomial of degree at most two; in the
//! degree one case θ is itself rational and the θ components stay zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modp::{self, Residue};
use super::ScalarError;

/// Configuration of the generator θ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseField {
    /// Integer coefficients `[c0, c1, c2]` of `c2 x^2 + c1 x + c0` (c2 may be 0).
    minpoly: [BigInt; 3],
    kind: ThetaKind,
    residue: Option<Residue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ThetaKind {
    Rational(BigRational),
    /// θ² = t0 + t1 θ, with discriminant `disc` of the minimal polynomial.
    Quadratic {
        t0: BigRational,
        t1: BigRational,
        disc: BigInt,
    },
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

impl BaseField {
    /// The field ℚ(i), where θ = 0 is a placeholder.
    pub fn rational() -> Arc<Self> {
        let minpoly = [BigInt::zero(), BigInt::one(), BigInt::zero()];
        Arc::new(Self {
            residue: modp::residue_for(&minpoly),
            minpoly,
            kind: ThetaKind::Rational(BigRational::zero()),
        })
    }

    /// θ = √m, the root of `x^2 - m`.
    pub fn sqrt(m: i64) -> Result<Arc<Self>, ScalarError> {
        Self::from_minpoly([BigInt::from(-m), BigInt::zero(), BigInt::one()])
    }

    /// Builds the field from `c2 x^2 + c1 x + c0`.
    ///
    /// A degree two polynomial must be irreducible over ℚ and must not generate
    /// ℚ(i), since then the basis `{1, θ, i, iθ}` would be dependent.
    pub fn from_minpoly(coeffs: [BigInt; 3]) -> Result<Arc<Self>, ScalarError> {
        let [c0, c1, c2] = coeffs.clone();
        if c2.is_zero() {
            if c1.is_zero() {
                return Err(ScalarError::BadMinpoly("constant polynomial".into()));
            }
            let root = BigRational::new(-c0, c1);
            return Ok(Arc::new(Self {
                residue: modp::residue_for(&coeffs),
                minpoly: coeffs,
                kind: ThetaKind::Rational(root),
            }));
        }
        let disc = &c1 * &c1 - BigInt::from(4) * &c2 * &c0;
        if is_square(&disc) {
            return Err(ScalarError::BadMinpoly(format!(
                "reducible over the rationals (discriminant {disc})"
            )));
        }
        if is_square(&(-disc.clone())) {
            return Err(ScalarError::BadMinpoly(
                "theta would generate the imaginary unit".into(),
            ));
        }
        let t0 = BigRational::new(-c0, c2.clone());
        let t1 = BigRational::new(-c1, c2);
        Ok(Arc::new(Self {
            residue: modp::residue_for(&coeffs),
            minpoly: coeffs,
            kind: ThetaKind::Quadratic { t0, t1, disc },
        }))
    }

    pub fn minpoly(&self) -> &[BigInt; 3] {
        &self.minpoly
    }

    pub(crate) fn residue(&self) -> Option<Residue> {
        self.residue
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, ThetaKind::Quadratic { .. })
    }

    /// Numerical value of θ; the root `(-c1 + sqrt(disc)) / (2 c2)` is used.
    pub fn theta_f64(&self) -> Complex64 {
        match &self.kind {
            ThetaKind::Rational(r) => Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0),
            ThetaKind::Quadratic { disc, .. } => {
                let c1 = self.minpoly[1].to_f64().unwrap_or(f64::NAN);
                let c2 = self.minpoly[2].to_f64().unwrap_or(f64::NAN);
                let dd = disc.to_f64().unwrap_or(f64::NAN);
                let root = if dd >= 0.0 {
                    Complex64::new(dd.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, (-dd).sqrt())
                };
                (Complex64::new(-c1, 0.0) + root) / (2.0 * c2)
            }
        }
    }

    /// Rational approximation of θ (real and imaginary parts) with error
    /// below `2^-bits` in each part.
    pub fn theta_approx(&self, bits: u32) -> (BigRational, BigRational) {
        match &self.kind {
            ThetaKind::Rational(r) => (r.clone(), BigRational::zero()),
            ThetaKind::Quadratic { disc, .. } => {
                // sqrt(|disc|) to bits + 4 extra bits, floor of the scaled root.
                let extra = bits + 8 + self.minpoly[2].bits() as u32;
                let scale = BigInt::one() << extra;
                let scaled = (disc.abs() * &scale * &scale).sqrt();
                let root = BigRational::new(scaled, scale);
                let c1 = BigRational::from_integer(self.minpoly[1].clone());
                let c2 = BigRational::from_integer(self.minpoly[2].clone() * 2);
                if disc.is_negative() {
                    (-c1 / &c2, root / c2)
                } else {
                    ((root - c1) / c2, BigRational::zero())
                }
            }
        }
    }
}

/// An element of ℚ(θ)(i).
#[derive(Clone, PartialEq, Eq)]
pub struct BaseNumber {
    field: Arc<BaseField>,
    /// Coefficients of `1, θ, i, iθ`.
    c: [BigRational; 4],
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl BaseNumber {
    pub fn zero(field: &Arc<BaseField>) -> Self {
        Self::from_parts(field, [0, 0, 0, 0].map(rat))
    }

    pub fn one(field: &Arc<BaseField>) -> Self {
        Self::from_rational(field, rat(1))
    }

    pub fn from_i64(field: &Arc<BaseField>, n: i64) -> Self {
        Self::from_rational(field, rat(n))
    }

    pub fn from_rational(field: &Arc<BaseField>, q: BigRational) -> Self {
        Self::from_parts(field, [q, rat(0), rat(0), rat(0)])
    }

    /// `re + θ·re_theta + i·(im + θ·im_theta)`, reduced for a rational θ.
    pub fn from_parts(field: &Arc<BaseField>, mut c: [BigRational; 4]) -> Self {
        if let ThetaKind::Rational(r) = &field.kind {
            let t1 = std::mem::replace(&mut c[1], rat(0));
            let t3 = std::mem::replace(&mut c[3], rat(0));
            c[0] += t1 * r;
            c[2] += t3 * r;
        }
        Self {
            field: field.clone(),
            c,
        }
    }

    pub fn theta(field: &Arc<BaseField>) -> Self {
        Self::from_parts(field, [rat(0), rat(1), rat(0), rat(0)])
    }

    pub fn imag_unit(field: &Arc<BaseField>) -> Self {
        Self::from_parts(field, [rat(0), rat(0), rat(1), rat(0)])
    }

    pub fn field(&self) -> &Arc<BaseField> {
        &self.field
    }

    pub fn parts(&self) -> &[BigRational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// True when the value lies in ℚ(θ), i.e. has no `i` component.
    pub fn is_real_form(&self) -> bool {
        self.c[2].is_zero() && self.c[3].is_zero()
    }

    /// The rational value, if the number is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.c[1..]
            .iter()
            .all(Zero::is_zero)
            .then_some(&self.c[0])
    }

    /// Image under the automorphism `i ↦ -i` fixing θ.
    pub fn conj_i(&self) -> Self {
        Self {
            field: self.field.clone(),
            c: [
                self.c[0].clone(),
                self.c[1].clone(),
                -self.c[2].clone(),
                -self.c[3].clone(),
            ],
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            field: self.field.clone(),
            c: [0, 1, 2, 3].map(|k| &self.c[k] * q),
        }
    }

    fn theta_rule(&self) -> (BigRational, BigRational) {
        match &self.field.kind {
            ThetaKind::Rational(_) => (rat(0), rat(0)),
            ThetaKind::Quadratic { t0, t1, .. } => (t0.clone(), t1.clone()),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let (t0, t1) = self.theta_rule();
        // Write the element as A + iB with A, B in ℚ(θ).
        let qmul = |x: (&BigRational, &BigRational), y: (&BigRational, &BigRational)| {
            let bd = x.1 * y.1;
            (x.0 * y.0 + &bd * &t0, x.0 * y.1 + x.1 * y.0 + bd * &t1)
        };
        let a = (&self.c[0], &self.c[1]);
        let b = (&self.c[2], &self.c[3]);
        let aa = qmul(a, a);
        let bb = qmul(b, b);
        let n = (aa.0 + bb.0, aa.1 + bb.1);
        // Norm of n = x + yθ down to ℚ via the conjugate x + y t1 - yθ.
        let conj = (&n.0 + &n.1 * &t1, -n.1.clone());
        let norm = &n.0 * &n.0 + &n.0 * &n.1 * &t1 - &n.1 * &n.1 * &t0;
        let n_inv = (&conj.0 / &norm, &conj.1 / &norm);
        let re = qmul(a, (&n_inv.0, &n_inv.1));
        let im = qmul(b, (&n_inv.0, &n_inv.1));
        Some(Self {
            field: self.field.clone(),
            c: [re.0, re.1, -im.0, -im.1],
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let th = self.field.theta_f64();
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        let a = Complex64::new(f(&self.c[0]), 0.0) + th * f(&self.c[1]);
        let b = Complex64::new(f(&self.c[2]), 0.0) + th * f(&self.c[3]);
        a + Complex64::i() * b
    }

    /// Exact value with θ replaced by the rational pair `theta` (re, im).
    pub fn to_complex_rational(
        &self,
        theta: &(BigRational, BigRational),
    ) -> (BigRational, BigRational) {
        let (tr, ti) = theta;
        // A = c0 + c1 θ, B = c2 + c3 θ; value = A + iB.
        let a = (&self.c[0] + &self.c[1] * tr, &self.c[1] * ti);
        let b = (&self.c[2] + &self.c[3] * tr, &self.c[3] * ti);
        (a.0 - b.1, a.1 + b.0)
    }

    /// Canonical text form, e.g. `3/7+1/2*theta` or `-i*theta`.
    pub fn to_canonical(&self) -> String {
        let names = ["", "theta", "i", "i*theta"];
        let mut out = String::new();
        for (k, q) in self.c.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let term = if k == 0 {
                q.to_string()
            } else if q.is_one() {
                names[k].to_string()
            } else if (-q).is_one() {
                format!("-{}", names[k])
            } else {
                format!("{q}*{}", names[k])
            };
            if !out.is_empty() && !term.starts_with('-') {
                out.push('+');
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Number of nonzero basis components.
    pub fn term_count(&self) -> usize {
        self.c.iter().filter(|q| !q.is_zero()).count()
    }
}

impl fmt::Debug for BaseNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl fmt::Display for BaseNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl Add for &BaseNumber {
    type Output = BaseNumber;
    fn add(self, o: &BaseNumber) -> BaseNumber {
        debug_assert!(self.field == o.field || Arc::ptr_eq(&self.field, &o.field));
        BaseNumber {
            field: self.field.clone(),
            c: [0, 1, 2, 3].map(|k| &self.c[k] + &o.c[k]),
        }
    }
}

impl Sub for &BaseNumber {
    type Output = BaseNumber;
    fn sub(self, o: &BaseNumber) -> BaseNumber {
        BaseNumber {
            field: self.field.clone(),
            c: [0, 1, 2, 3].map(|k| &self.c[k] - &o.c[k]),
        }
    }
}

impl Neg for &BaseNumber {
    type Output = BaseNumber;
    fn neg(self) -> BaseNumber {
        BaseNumber {
            field: self.field.clone(),
            c: [0, 1, 2, 3].map(|k| -&self.c[k]),
        }
    }
}

impl Mul for &BaseNumber {
    type Output = BaseNumber;
    fn mul(self, o: &BaseNumber) -> BaseNumber {
        // Fast paths for rational operands keep the common case cheap.
        if let Some(q) = o.as_rational_fast() {
            return self.scale(q);
        }
        if let Some(q) = self.as_rational_fast() {
            return o.scale(q);
        }
        let (t0, t1) = self.theta_rule();
        let qmul = |x0: &BigRational, x1: &BigRational, y0: &BigRational, y1: &BigRational| {
            let bd = x1 * y1;
            (x0 * y0 + &bd * &t0, x0 * y1 + x1 * y0 + bd * &t1)
        };
        let (a, b) = ((&self.c[0], &self.c[1]), (&self.c[2], &self.c[3]));
        let (c, d) = ((&o.c[0], &o.c[1]), (&o.c[2], &o.c[3]));
        let ac = qmul(a.0, a.1, c.0, c.1);
        let bd = qmul(b.0, b.1, d.0, d.1);
        let ad = qmul(a.0, a.1, d.0, d.1);
        let bc = qmul(b.0, b.1, c.0, c.1);
        BaseNumber {
            field: self.field.clone(),
            c: [ac.0 - bd.0, ac.1 - bd.1, ad.0 + bc.0, ad.1 + bc.1],
        }
    }
}

impl BaseNumber {
    /// Image in `𝔽_p` for the field's residue prime.
    pub(crate) fn reduce_mod(&self, r: &Residue) -> Option<u64> {
        let p = r.p;
        let [a, b, c, d] = [0, 1, 2, 3].map(|k| modp::rational(&self.c[k], p));
        let re = modp::add(a?, modp::mul(b?, r.theta, p), p);
        let im = modp::add(c?, modp::mul(d?, r.theta, p), p);
        Some(modp::add(re, modp::mul(im, r.i, p), p))
    }

    fn as_rational_fast(&self) -> Option<&BigRational> {
        (self.c[1].is_zero() && self.c[2].is_zero() && self.c[3].is_zero()).then_some(&self.c[0])
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for BaseNumber {
            type Output = BaseNumber;
            fn $m(self, o: BaseNumber) -> BaseNumber {
                (&self).$m(&o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for BaseNumber {
    type Output = BaseNumber;
    fn neg(self) -> BaseNumber {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn theta_squared_reduces() {
        let f = BaseField::sqrt(2).unwrap();
        let t = BaseNumber::theta(&f);
        assert_eq!(&t * &t, BaseNumber::from_i64(&f, 2));
        let i = BaseNumber::imag_unit(&f);
        assert_eq!(&i * &i, BaseNumber::from_i64(&f, -1));
    }

    #[test]
    fn golden_field() {
        let f = BaseField::from_minpoly([(-1).into(), (-1).into(), 1.into()]).unwrap();
        let t = BaseNumber::theta(&f);
        assert_eq!(&t * &t, &t + &BaseNumber::one(&f));
        assert!((f.theta_f64().re - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        let f = BaseField::sqrt(3).unwrap();
        let x = BaseNumber::from_parts(&f, [q(1, 2), q(-3, 5), q(7, 3), q(2, 1)]);
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        assert!(BaseNumber::zero(&f).inv().is_none());
    }

    #[test]
    fn rejects_bad_minpolys() {
        assert!(BaseField::sqrt(4).is_err());
        assert!(BaseField::sqrt(-1).is_err());
        assert!(BaseField::sqrt(-4).is_err());
        assert!(BaseField::sqrt(-2).is_ok());
    }

    #[test]
    fn rational_theta_folds_in() {
        let f = BaseField::from_minpoly([(-3).into(), 2.into(), 0.into()]).unwrap();
        let t = BaseNumber::theta(&f);
        assert_eq!(t, BaseNumber::from_rational(&f, q(3, 2)));
    }

    #[test]
    fn canonical_text() {
        let f = BaseField::sqrt(2).unwrap();
        let x = BaseNumber::from_parts(&f, [q(3, 7), q(1, 2), q(0, 1), q(-1, 1)]);
        assert_eq!(x.to_canonical(), "3/7+1/2*theta-i*theta");
        assert_eq!(BaseNumber::zero(&f).to_canonical(), "0");
    }

    #[test]
    fn theta_approximation() {
        let f = BaseField::sqrt(2).unwrap();
        let (re, im) = f.theta_approx(200);
        assert!(im.is_zero());
        let err = &re * &re - rat(2);
        assert!(err.abs() < BigRational::new(BigInt::one(), BigInt::one() << 195));
    }
}
