//! Arbitrary-precision complex scalars on top of MPFR floats, with a
//! deterministic simultaneous root finder.
//!
//! Every value carries its own mantissa precision; binary operations
//! round once at the larger of the two operand precisions, so constants
//! made through the [`Field`] interface (which has no precision slot)
//! upgrade on first contact with real data.

use num_rational::BigRational;
use rug::float::Constant;
use rug::Float;

use crate::error::Error;
use crate::poly::Poly;
use crate::scalar::Field;
use crate::Result;

/// Precision used for constants created without a precision argument.
const STUB_PREC: u32 = 64;

/// Complex number with per-value precision.
#[derive(Clone, Debug)]
pub struct Cplx {
    re: Float,
    im: Float,
}

impl PartialEq for Cplx {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cplx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    /// Exact embedding of a rational, rounded once at `prec`.
    pub fn from_rational(prec: u32, r: &BigRational) -> Self {
        let n = rug::Integer::from_str_radix(&r.numer().to_str_radix(16), 16)
            .expect("hex digits of a big integer");
        let d = rug::Integer::from_str_radix(&r.denom().to_str_radix(16), 16)
            .expect("hex digits of a big integer");
        let q = rug::Rational::from((n, d));
        Cplx {
            re: Float::with_val(prec, &q),
            im: Float::new(prec),
        }
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// Rounds both parts to `prec`.
    pub fn with_prec(&self, prec: u32) -> Self {
        Cplx {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Cplx {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let rr = Float::with_val(prec, &self.re * &self.re);
        let ii = Float::with_val(prec, &self.im * &self.im);
        rr + ii
    }

    pub fn abs(&self) -> Float {
        let prec = self.prec();
        Float::with_val(prec, self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale_f64(&self, k: f64) -> Self {
        let prec = self.prec();
        let kf = Float::with_val(prec, k);
        Cplx {
            re: Float::with_val(prec, &self.re * &kf),
            im: Float::with_val(prec, &self.im * &kf),
        }
    }

    /// Principal square root (branch cut on the negative real axis,
    /// nonnegative imaginary part on the cut).
    pub fn sqrt(&self) -> Self {
        let prec = self.prec();
        if self.re.is_zero() && self.im.is_zero() {
            return Cplx {
                re: Float::new(prec),
                im: Float::new(prec),
            };
        }
        let r = self.abs();
        if !self.re.is_sign_negative() {
            // u = sqrt((r + re)/2), v = im / (2u); stable for re >= 0.
            let u = (Float::with_val(prec, &r + &self.re) / 2u32).sqrt();
            let two_u = Float::with_val(prec, &u) * 2;
            let v = Float::with_val(prec, &self.im / &two_u);
            Cplx { re: u, im: v }
        } else {
            let vmag = (Float::with_val(prec, &r - &self.re) / 2u32).sqrt();
            // A zero imaginary part counts as the cut approached from
            // above, regardless of its floating-point sign.
            let v = if self.im.is_sign_negative() && !self.im.is_zero() {
                -vmag
            } else {
                vmag
            };
            let two_v = Float::with_val(prec, &v) * 2;
            let u = Float::with_val(prec, &self.im / &two_v);
            Cplx { re: u, im: v }
        }
    }

    /// `exp(i * pi * numer / denom)` at the given precision.
    pub fn from_polar_pi_fraction(prec: u32, numer: i64, denom: i64) -> Self {
        let pi = Float::with_val(prec, Constant::Pi);
        let theta = pi * numer / denom;
        let (sin, cos) = theta.sin_cos(Float::new(prec));
        Cplx { re: cos, im: sin }
    }
}

impl Field for Cplx {
    fn zero() -> Self {
        Cplx::from_f64(STUB_PREC, 0.0, 0.0)
    }
    fn one() -> Self {
        Cplx::from_f64(STUB_PREC, 1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Cplx {
            re: Float::with_val(STUB_PREC, n),
            im: Float::new(STUB_PREC),
        }
    }
    fn add(&self, rhs: &Self) -> Self {
        let prec = self.prec().max(rhs.prec());
        Cplx {
            re: Float::with_val(prec, &self.re + &rhs.re),
            im: Float::with_val(prec, &self.im + &rhs.im),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        let prec = self.prec().max(rhs.prec());
        Cplx {
            re: Float::with_val(prec, &self.re - &rhs.re),
            im: Float::with_val(prec, &self.im - &rhs.im),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        let prec = self.prec().max(rhs.prec());
        let ac = Float::with_val(prec, &self.re * &rhs.re);
        let bd = Float::with_val(prec, &self.im * &rhs.im);
        let ad = Float::with_val(prec, &self.re * &rhs.im);
        let bc = Float::with_val(prec, &self.im * &rhs.re);
        Cplx {
            re: ac - bd,
            im: ad + bc,
        }
    }
    fn div(&self, rhs: &Self) -> Self {
        let prec = self.prec().max(rhs.prec());
        let den = rhs.norm_sqr();
        let ac = Float::with_val(prec, &self.re * &rhs.re);
        let bd = Float::with_val(prec, &self.im * &rhs.im);
        let bc = Float::with_val(prec, &self.im * &rhs.re);
        let ad = Float::with_val(prec, &self.re * &rhs.im);
        Cplx {
            re: (ac + bd) / &den,
            im: (bc - ad) / &den,
        }
    }
    fn neg(&self) -> Self {
        let prec = self.prec();
        Cplx {
            re: Float::with_val(prec, -&self.re),
            im: Float::with_val(prec, -&self.im),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

/// Maximum simultaneous-iteration sweeps before declaring failure.
const ROOTS_MAX_SWEEPS: usize = 2000;
/// Newton polishing passes applied to every located root.
const ROOTS_POLISH_PASSES: usize = 4;

/// Total order by (real, imaginary) part; finite values only.
pub fn lex_cmp(a: &Cplx, b: &Cplx) -> std::cmp::Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
}


/// All complex roots of `p`, with multiplicity, sorted lexicographically
/// by (real, imaginary) part.
///
/// Deterministic simultaneous (Weierstrass) iteration started on a circle
/// of the Cauchy bound radius, followed by Newton polishing. Simple roots
/// come out accurate to nearly the working precision; a root of
/// multiplicity m stalls near the m-th root of the rounding error, which
/// the acceptance threshold allows for.
pub fn roots(p: &Poly<Cplx>) -> Result<Vec<Cplx>> {
    let deg = p.degree();
    if deg < 1 || p.is_zero() {
        return Err(Error::InvalidConfig(
            "root finding needs a nonconstant polynomial".into(),
        ));
    }
    let lead = p.leading().expect("nonzero polynomial").clone();
    let prec = (0..=deg).map(|k| p.coeff(k).prec()).max().unwrap();
    let monic = Poly::new(
        (0..=deg)
            .map(|k| p.coeff(k).div(&lead).with_prec(prec))
            .collect(),
    );
    if deg == 1 {
        return Ok(vec![monic.coeff(0).neg()]);
    }
    // Cauchy bound: every root has modulus < 1 + max |a_k|.
    let radius = 1.0
        + (0..deg)
            .map(|k| monic.coeff(k).abs_f64())
            .fold(0.0_f64, f64::max);
    if !radius.is_finite() {
        return Err(Error::TrackingFailure(
            "polynomial coefficients overflow the root radius bound".into(),
        ));
    }
    let mut zs: Vec<Cplx> = (0..deg)
        .map(|j| {
            // Fixed angular offset keeps the start set asymmetric.
            Cplx::from_polar_pi_fraction(prec, (2 * j as i64) * 137 + 71, 137 * deg as i64)
                .scale_f64(radius)
        })
        .collect();
    let scale = Float::with_val(prec, radius.max(1.0));
    let tol_converged = Float::with_val(prec, &scale >> prec.saturating_sub(8));
    let tol_accept = Float::with_val(prec, &scale >> (prec / 3));
    let mut worst = Float::with_val(prec, 0);
    for _ in 0..ROOTS_MAX_SWEEPS {
        worst = Float::with_val(prec, 0);
        for j in 0..deg {
            let mut den = Cplx::one().with_prec(prec);
            for k in 0..deg {
                if k != j {
                    den = den.mul(&zs[j].sub(&zs[k]));
                }
            }
            if den.is_zero() {
                // Collided iterates: deterministic nudge apart.
                zs[j] = zs[j].add(&Cplx::from_f64(prec, 1e-3 * (j + 1) as f64, 1e-3));
                worst = Float::with_val(prec, &scale);
                continue;
            }
            let step = monic.eval(&zs[j]).div(&den);
            if !step.is_finite() {
                return Err(Error::TrackingFailure(
                    "root iteration produced a non-finite value".into(),
                ));
            }
            let mag = step.abs();
            if mag > worst {
                worst = mag;
            }
            zs[j] = zs[j].sub(&step);
        }
        if worst < tol_converged {
            break;
        }
    }
    if worst > tol_accept {
        return Err(Error::TrackingFailure(format!(
            "root iteration did not converge (last sweep moved {:.3e})",
            worst.to_f64()
        )));
    }
    let deriv = monic.derivative();
    for z in zs.iter_mut() {
        for _ in 0..ROOTS_POLISH_PASSES {
            let d = deriv.eval(z);
            if d.is_zero() {
                break;
            }
            let step = monic.eval(z).div(&d);
            if !step.is_finite() {
                break;
            }
            *z = z.sub(&step);
        }
        if !z.is_finite() {
            return Err(Error::TrackingFailure(
                "root polishing produced a non-finite value".into(),
            ));
        }
    }
    zs.sort_by(lex_cmp);
    Ok(zs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;

    fn close(a: &Cplx, re: f64, im: f64, tol: f64) -> bool {
        (a.re().to_f64() - re).abs() < tol && (a.im().to_f64() - im).abs() < tol
    }

    #[test]
    fn field_ops_and_precision_propagation() {
        let x = Cplx::from_f64(300, 3.0, 4.0);
        let z = Field::zero();
        let s = x.add(&z);
        assert_eq!(s.prec(), 300);
        assert_eq!(s, x);
        let y = Cplx::from_f64(300, 1.0, -2.0);
        let p = x.mul(&y);
        assert!(close(&p, 11.0, -2.0, 1e-12));
        let q = p.div(&y);
        assert!(close(&q, 3.0, 4.0, 1e-12));
        assert!(x.sub(&x).is_zero());
        assert_eq!(x.abs_f64(), 5.0);
    }

    #[test]
    fn rational_embedding_is_exact_for_dyadics() {
        let r = parse_rational("-13/32").unwrap();
        let x = Cplx::from_rational(212, &r);
        assert_eq!(x.re().to_f64(), -13.0 / 32.0);
        assert!(x.im().is_zero());
        let big = parse_rational("123456789012345678901234567890").unwrap();
        let y = Cplx::from_rational(212, &big);
        let expect = Float::with_val(
            212,
            rug::Integer::from_str_radix("123456789012345678901234567890", 10).unwrap(),
        );
        assert_eq!(y.re(), &expect);
    }

    #[test]
    fn principal_sqrt_branches() {
        let prec = 212;
        let i = Cplx::from_f64(prec, -1.0, 0.0).sqrt();
        assert!(close(&i, 0.0, 1.0, 1e-30));
        let m = Cplx::from_f64(prec, -1.0, -0.0).sqrt();
        // The cut maps to the nonnegative imaginary axis from above.
        assert!(m.im().to_f64() > 0.0 || m.im().to_f64() == 1.0);
        let z = Cplx::from_f64(prec, 3.0, -4.0);
        let s = z.sqrt();
        assert!(close(&s.mul(&s), 3.0, -4.0, 1e-40));
        assert!(s.re().to_f64() >= 0.0);
        let zero = Cplx::from_f64(prec, 0.0, 0.0).sqrt();
        assert!(zero.is_zero());
    }

    #[test]
    fn polar_fraction_unit() {
        let z = Cplx::from_polar_pi_fraction(212, 1, 2);
        assert!(close(&z, 0.0, 1.0, 1e-50));
        let w = Cplx::from_polar_pi_fraction(212, 2, 3);
        assert!(close(&w, -0.5, 0.8660254037844386, 1e-15));
    }

    #[test]
    fn cube_roots_of_unity_sorted() {
        let prec = 212;
        let one = Cplx::from_f64(prec, 1.0, 0.0);
        let p = Poly::new(vec![
            one.neg(),
            Cplx::from_f64(prec, 0.0, 0.0),
            Cplx::from_f64(prec, 0.0, 0.0),
            one.clone(),
        ]);
        let rs = roots(&p).unwrap();
        assert_eq!(rs.len(), 3);
        let h = 0.8660254037844386;
        assert!(close(&rs[0], -0.5, -h, 1e-40) || close(&rs[0], -0.5, h, 1e-40));
        assert!(close(&rs[2], 1.0, 0.0, 1e-40));
        // Lexicographic: both roots with real part -1/2 precede 1, with
        // the negative imaginary part first.
        assert!(rs[0].im().to_f64() < rs[1].im().to_f64());
    }

    #[test]
    fn high_precision_simple_roots() {
        // (z - 2)(z + 1)(z - i): residual should be near the working
        // precision, far below f64 resolution.
        let prec = 424;
        let i = Cplx::from_f64(prec, 0.0, 1.0);
        let two = Cplx::from_f64(prec, 2.0, 0.0);
        let m1 = Cplx::from_f64(prec, -1.0, 0.0);
        let p = Poly::from_roots(&[two, m1, i]);
        let rs = roots(&p).unwrap();
        for r in &rs {
            let resid = p.eval(r).abs();
            let bound = Float::with_val(prec, 1) >> 380u32;
            assert!(resid < bound, "residual {:?}", resid.to_f64());
        }
    }

    #[test]
    fn double_root_located_to_acceptance() {
        let prec = 212;
        let two = Cplx::from_f64(prec, 2.0, 0.0);
        let m1 = Cplx::from_f64(prec, -1.0, 0.0);
        let p = Poly::from_roots(&[two.clone(), two.clone(), m1]);
        let rs = roots(&p).unwrap();
        let near_two: Vec<&Cplx> = rs
            .iter()
            .filter(|z| (z.re().to_f64() - 2.0).abs() < 1e-6)
            .collect();
        assert_eq!(near_two.len(), 2);
        for z in near_two {
            assert!((z.re().to_f64() - 2.0).abs() < 1e-20);
        }
    }
}
