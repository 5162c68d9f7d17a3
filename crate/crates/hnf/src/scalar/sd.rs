use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{AlphaContext, BaseNumber, OmegaPoly, ResonanceForm, ScalarError};

type ExactComplex = Complex<BigRational>;

/// A rational function `N(ω) / Π (α+ω, J)^m`.
///
/// The representation is kept reduced: no denominator form divides the
/// numerator, J vectors are sign-normalised, and zero has an empty
/// denominator. Since the forms are irreducible and pairwise non-associate,
/// reduced representations are unique, so structural equality is equality of
/// rational functions.
#[derive(Clone, PartialEq, Eq)]
pub struct SmallDenomScalar {
    num: OmegaPoly,
    den: BTreeMap<ResonanceForm, u32>,
}

impl SmallDenomScalar {
    pub fn zero(dim: usize) -> Self {
        Self {
            num: OmegaPoly::zero(dim),
            den: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BaseNumber) -> Self {
        Self {
            num: OmegaPoly::constant(dim, c),
            den: BTreeMap::new(),
        }
    }

    pub fn from_i64(ctx: &AlphaContext, n: i64) -> Self {
        Self::constant(ctx.dim(), BaseNumber::from_i64(ctx.field(), n))
    }

    pub fn one(ctx: &AlphaContext) -> Self {
        Self::from_i64(ctx, 1)
    }

    pub fn from_poly(num: OmegaPoly) -> Self {
        Self {
            num,
            den: BTreeMap::new(),
        }
    }

    /// The coordinate function ω_i.
    pub fn omega(ctx: &AlphaContext, i: usize) -> Self {
        Self::from_poly(OmegaPoly::var(ctx.dim(), i, ctx.field()))
    }

    /// `1 / (α+ω, J)` for a normalised form.
    pub fn inv_form(form: &ResonanceForm) -> Self {
        let dim = form.j().len();
        let mut den = BTreeMap::new();
        den.insert(form.clone(), 1);
        Self {
            num: OmegaPoly::constant(dim, BaseNumber::one(form.value().field())),
            den,
        }
    }

    /// `1 / (α+ω, J)` for any nonzero non-resonant J.
    pub fn inv_pairing(ctx: &AlphaContext, j: &[i64]) -> Result<Self, ScalarError> {
        let (form, factor) = ctx.form(j)?;
        let s = Self::inv_form(&form);
        Ok(if factor == 1 {
            s
        } else {
            s.scale_rational(&BigRational::new(1.into(), factor.into()))
        })
    }

    /// Builds `num / Π den` and reduces it.
    pub fn from_parts(num: OmegaPoly, den: BTreeMap<ResonanceForm, u32>) -> Self {
        let mut s = Self { num, den };
        s.reduce();
        s
    }

    pub fn dim(&self) -> usize {
        self.num.dim()
    }

    pub fn numerator(&self) -> &OmegaPoly {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<ResonanceForm, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value if the scalar is an ω-free constant.
    pub fn as_constant(&self) -> Option<&BaseNumber> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// True when the scalar does not depend on ω (zero included).
    pub fn is_omega_free(&self) -> bool {
        self.is_zero() || self.as_constant().is_some()
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        if self.num.total_degree() == 0 {
            return;
        }
        let forms: Vec<ResonanceForm> = self.den.keys().cloned().collect();
        for f in forms {
            loop {
                let m = *self.den.get(&f).unwrap_or(&0);
                if m == 0 || self.num.total_degree() == 0 {
                    break;
                }
                match self.num.div_linear(f.value(), f.j()) {
                    Some(q) => {
                        self.num = q;
                        if m == 1 {
                            self.den.remove(&f);
                        } else {
                            self.den.insert(f.clone(), m - 1);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    /// Numerator multiplied by the forms needed to reach `target`.
    fn lift_to(&self, target: &BTreeMap<ResonanceForm, u32>) -> OmegaPoly {
        let mut n = self.num.clone();
        for (f, &m) in target {
            let have = self.den.get(f).copied().unwrap_or(0);
            for _ in have..m {
                n = n.mul_linear(f.value(), f.j());
            }
        }
        n
    }

    pub fn add(&self, o: &Self) -> Self {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return Self::from_parts(self.num.add(&o.num), self.den.clone());
        }
        let mut lcm = self.den.clone();
        for (f, &m) in &o.den {
            let e = lcm.entry(f.clone()).or_insert(0);
            *e = (*e).max(m);
        }
        let n = self.lift_to(&lcm).add(&o.lift_to(&lcm));
        Self::from_parts(n, lcm)
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.dim());
        }
        if let Some(c) = o.as_constant() {
            return self.scale(c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale(c);
        }
        let mut den = self.den.clone();
        for (f, &m) in &o.den {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        Self::from_parts(self.num.mul(&o.num), den)
    }

    pub fn scale(&self, k: &BaseNumber) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim());
        }
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim());
        }
        Self {
            num: self.num.scale_rational(k),
            den: self.den.clone(),
        }
    }

    /// Quotient by a nonzero base number.
    pub fn div_base(&self, k: &BaseNumber) -> Option<Self> {
        k.inv().map(|inv| self.scale(&inv))
    }

    /// Partial derivative ∂/∂ω_i by the quotient rule.
    ///
    /// Each denominator form with `J_i ≠ 0` gains one unit of multiplicity
    /// before reduction.
    pub fn d_omega(&self, i: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let hit: Vec<(&ResonanceForm, u32)> = self
            .den
            .iter()
            .filter(|(f, _)| f.j()[i] != 0)
            .map(|(f, &m)| (f, m))
            .collect();
        if hit.is_empty() && self.num.degree_in(i) == 0 {
            return Self::zero(self.dim());
        }
        let mut product = OmegaPoly::constant(self.dim(), self.unit());
        for (f, _) in &hit {
            product = product.mul_linear(f.value(), f.j());
        }
        let mut num = self.num.derivative(i).mul(&product);
        for (k, (f, m)) in hit.iter().enumerate() {
            let mut others = OmegaPoly::constant(self.dim(), self.unit());
            for (k2, (g, _)) in hit.iter().enumerate() {
                if k2 != k {
                    others = others.mul_linear(g.value(), g.j());
                }
            }
            let coef = BigRational::from_integer(BigInt::from(i64::from(*m) * f.j()[i]));
            num = num.sub(&self.num.mul(&others).scale_rational(&coef));
        }
        let mut den = self.den.clone();
        for (f, _) in &hit {
            *den.get_mut(*f).expect("form present") += 1;
        }
        Self::from_parts(num, den)
    }

    fn unit(&self) -> BaseNumber {
        let field = self
            .num
            .terms()
            .next()
            .map(|(_, c)| c.field().clone())
            .expect("nonzero numerator");
        BaseNumber::one(&field)
    }

    /// Exact evaluation with θ replaced by the rational pair `theta`.
    pub fn eval_exact(
        &self,
        omega: &[ExactComplex],
        theta: &(BigRational, BigRational),
    ) -> Result<ExactComplex, ScalarError> {
        self.eval_exact_with_guard(omega, theta, None)
    }

    fn eval_exact_with_guard(
        &self,
        omega: &[ExactComplex],
        theta: &(BigRational, BigRational),
        vanish_below: Option<&BigRational>,
    ) -> Result<ExactComplex, ScalarError> {
        if omega.len() != self.dim() {
            return Err(ScalarError::Dimension {
                expected: self.dim(),
                got: omega.len(),
            });
        }
        let to_c = |b: &BaseNumber| {
            let (re, im) = b.to_complex_rational(theta);
            Complex::new(re, im)
        };
        let zero = Complex::new(BigRational::zero(), BigRational::zero());
        let mut value = self.num.eval_with(omega, zero.clone(), to_c);
        for (f, &m) in &self.den {
            let mut l = to_c(f.value());
            for (k, &jk) in f.j().iter().enumerate() {
                if jk != 0 {
                    let s = BigRational::from_integer(jk.into());
                    l += Complex::new(&omega[k].re * &s, &omega[k].im * &s);
                }
            }
            let n2 = &l.re * &l.re + &l.im * &l.im;
            let vanishes = match vanish_below {
                Some(eps) => &n2 <= eps,
                None => n2.is_zero(),
            };
            if vanishes {
                return Err(ScalarError::DivisorVanishes(f.j().to_vec()));
            }
            for _ in 0..m {
                value /= l.clone();
            }
        }
        Ok(value)
    }

    /// Evaluation at a numeric ω, carried out exactly with θ approximated to
    /// `precision` bits and rounded to doubles at the end.
    ///
    /// A divisor whose modulus falls below `2^-(precision - 8)` is treated as
    /// vanishing, since it cannot be told apart from zero at this precision.
    pub fn eval(&self, omega: &[Complex64], precision: u32) -> Result<Complex64, ScalarError> {
        let w = exact_point(omega);
        let theta = self.theta_for(precision);
        let bits = precision.saturating_sub(8).max(1);
        let eps = BigRational::new(BigInt::one(), BigInt::one() << (2 * bits as usize));
        let v = self.eval_exact_with_guard(&w, &theta, Some(&eps))?;
        Ok(Complex64::new(
            v.re.to_f64().unwrap_or(f64::NAN),
            v.im.to_f64().unwrap_or(f64::NAN),
        ))
    }

    fn theta_for(&self, precision: u32) -> (BigRational, BigRational) {
        let field = self
            .num
            .terms()
            .next()
            .map(|(_, c)| c.field().clone())
            .or_else(|| self.den.keys().next().map(|f| f.value().field().clone()));
        match field {
            Some(f) => f.theta_approx(precision),
            None => (BigRational::zero(), BigRational::zero()),
        }
    }

    /// Canonical text: `num` or `(num)/(L[..]^m*...)`.
    pub fn to_canonical(&self) -> String {
        if self.den.is_empty() {
            return self.num.to_canonical();
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(f, &m)| {
                if m == 1 {
                    f.to_canonical()
                } else {
                    format!("{}^{m}", f.to_canonical())
                }
            })
            .collect();
        format!("({})/({})", self.num.to_canonical(), den.join("*"))
    }
}

/// Accumulates many products before a single reduction.
///
/// Terms sharing a denominator are summed as plain polynomials; the groups
/// are brought to a common denominator only once, in [`SdSum::finish`].
#[derive(Clone, Debug)]
pub struct SdSum {
    dim: usize,
    groups: BTreeMap<BTreeMap<ResonanceForm, u32>, OmegaPoly>,
}

impl SdSum {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            groups: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, x: &SmallDenomScalar) {
        self.push_raw(x.num.clone(), &x.den);
    }

    pub fn push_scaled(&mut self, x: &SmallDenomScalar, k: &BigRational) {
        self.push_raw(x.num.scale_rational(k), &x.den);
    }

    /// Adds `k · x · y` without reducing the product.
    pub fn push_product(&mut self, x: &SmallDenomScalar, y: &SmallDenomScalar, k: &BigRational) {
        if x.is_zero() || y.is_zero() || k.is_zero() {
            return;
        }
        let num = x.num.mul(&y.num).scale_rational(k);
        if y.den.is_empty() {
            self.push_raw(num, &x.den);
        } else if x.den.is_empty() {
            self.push_raw(num, &y.den);
        } else {
            let mut den = x.den.clone();
            for (f, &m) in &y.den {
                *den.entry(f.clone()).or_insert(0) += m;
            }
            self.push_raw(num, &den);
        }
    }

    fn push_raw(&mut self, num: OmegaPoly, den: &BTreeMap<ResonanceForm, u32>) {
        if num.is_zero() {
            return;
        }
        match self.groups.get_mut(den) {
            Some(acc) => {
                for (e, c) in num.terms() {
                    acc.add_term(e.clone(), c.clone());
                }
            }
            None => {
                self.groups.insert(den.clone(), num);
            }
        }
    }

    pub fn finish(self) -> SmallDenomScalar {
        let mut groups: Vec<_> = self
            .groups
            .into_iter()
            .filter(|(_, n)| !n.is_zero())
            .collect();
        match groups.len() {
            0 => SmallDenomScalar::zero(self.dim),
            1 => {
                let (den, num) = groups.pop().expect("one group");
                SmallDenomScalar::from_parts(num, den)
            }
            _ => {
                // Reduce each group first so the common denominator stays small.
                let parts: Vec<SmallDenomScalar> = groups
                    .into_iter()
                    .map(|(den, num)| SmallDenomScalar::from_parts(num, den))
                    .collect();
                let mut lcm: BTreeMap<ResonanceForm, u32> = BTreeMap::new();
                for p in &parts {
                    for (f, &m) in &p.den {
                        let e = lcm.entry(f.clone()).or_insert(0);
                        *e = (*e).max(m);
                    }
                }
                let mut n = OmegaPoly::zero(self.dim);
                for p in &parts {
                    for (e, c) in p.lift_to(&lcm).terms() {
                        n.add_term(e.clone(), c.clone());
                    }
                }
                SmallDenomScalar::from_parts(n, lcm)
            }
        }
    }
}

/// Exact rational image of a double-precision point.
pub fn exact_point(omega: &[Complex64]) -> Vec<ExactComplex> {
    omega
        .iter()
        .map(|z| {
            Complex::new(
                BigRational::from_float(z.re).unwrap_or_else(BigRational::zero),
                BigRational::from_float(z.im).unwrap_or_else(BigRational::zero),
            )
        })
        .collect()
}

impl fmt::Debug for SmallDenomScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl fmt::Display for SmallDenomScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}
