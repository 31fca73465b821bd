//! Exact elliptic-curve layer.
//!
//! Everything in this module is computed symbolically over an abstract
//! [`Field`], so the same code runs over exact rationals, the cyclotomic
//! field of cube roots of unity, and arbitrary-precision complex floats.
//!
//! The pieces provided here:
//!
//! * short-Weierstrass arithmetic `y^2 = x^3 + a x + b` with chord-tangent
//!   addition and an independent closed-form triplication map,
//! * division polynomials for the 2- and 3-torsion loci,
//! * the birational change of model between a marked double cover
//!   `w^2 = q(t)` (quartic `q`, marked point sent to the origin of the
//!   group law) and its short-Weierstrass form, including the closed
//!   formulas for the images of the conjugate marked point and of the two
//!   points over `t = infinity`,
//! * cross-ratio and j-invariant of four distinct points on the projective
//!   line,
//! * an exact verification that the genus-1 double covers branched over
//!   3-torsion abscissas are isotrivial with `j = 0`, carried out on the
//!   nine base points of the Hesse pencil over the cyclotomic field.
//!
//! Triplication uses fixed integer polynomials in the curve coefficients.
//! Their correctness is not assumed: the unit tests compare the closed
//! form against three chord-tangent additions on exact rational points,
//! and the resultant identity guarantees the numerator and denominator
//! never vanish simultaneously on a smooth curve.

use crate::cplx::{self, Cplx};
use crate::cyclo::Cyclo;
use crate::error::Error;
use crate::poly::Poly;
use crate::scalar::Field;
use crate::Result;

/// Point on a short-Weierstrass curve, the origin of the group law being
/// the point at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum CurvePoint<S> {
    Infinity,
    Affine { x: S, y: S },
}

impl<S: Field> CurvePoint<S> {
    pub fn affine(x: S, y: S) -> Self {
        CurvePoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }
}

/// Smooth curve `y^2 = x^3 + a x + b` (discriminant-checked).
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassCurve<S: Field> {
    a: S,
    b: S,
}

fn c<S: Field>(n: i64) -> S {
    S::from_i64(n)
}

impl<S: Field> WeierstrassCurve<S> {
    /// Requires `4a^3 + 27b^2 != 0`.
    pub fn new(a: S, b: S) -> Result<Self> {
        let curve = WeierstrassCurve { a, b };
        if curve.discriminant_core().is_zero() {
            return Err(Error::DegenerateInput(
                "singular cubic: 4a^3 + 27b^2 = 0".into(),
            ));
        }
        Ok(curve)
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    /// `4a^3 + 27b^2`.
    pub fn discriminant_core(&self) -> S {
        let a3 = self.a.mul(&self.a).mul(&self.a);
        let b2 = self.b.mul(&self.b);
        c::<S>(4).mul(&a3).add(&c::<S>(27).mul(&b2))
    }

    /// `j = 1728 * 4a^3 / (4a^3 + 27b^2)`.
    pub fn j_invariant(&self) -> S {
        let a3 = self.a.mul(&self.a).mul(&self.a);
        let num = c::<S>(1728 * 4).mul(&a3);
        num.div(&self.discriminant_core())
    }

    pub fn contains(&self, p: &CurvePoint<S>) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                let rhs = x.mul(x).mul(x).add(&self.a.mul(x)).add(&self.b);
                y.mul(y).sub(&rhs).is_zero()
            }
        }
    }

    pub fn negate(&self, p: &CurvePoint<S>) -> CurvePoint<S> {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::affine(x.clone(), y.neg()),
        }
    }

    /// Chord-tangent addition.
    pub fn add_points(&self, p: &CurvePoint<S>, q: &CurvePoint<S>) -> CurvePoint<S> {
        let (x1, y1) = match p {
            CurvePoint::Infinity => return q.clone(),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let (x2, y2) = match q {
            CurvePoint::Infinity => return p.clone(),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let slope = if x1.sub(x2).is_zero() {
            if y1.add(y2).is_zero() {
                return CurvePoint::Infinity;
            }
            // Tangent line; y1 = y2 != 0 here.
            let num = c::<S>(3).mul(&x1.mul(x1)).add(&self.a);
            num.div(&c::<S>(2).mul(y1))
        } else {
            y2.sub(y1).div(&x2.sub(x1))
        };
        let x3 = slope.mul(&slope).sub(x1).sub(x2);
        let y3 = slope.mul(&x1.sub(&x3)).sub(y1);
        CurvePoint::affine(x3, y3)
    }

    /// Cubic `x^3 + a x + b` whose roots are the abscissas of the three
    /// affine points of order 2.
    pub fn two_torsion_cubic(&self) -> Poly<S> {
        Poly::new(vec![self.b.clone(), self.a.clone(), c(0), c(1)])
    }

    /// Quartic `3x^4 + 6a x^2 + 12b x - a^2` whose roots are the abscissas
    /// of the eight affine points of order 3 (two points per root).
    pub fn three_torsion_quartic(&self) -> Poly<S> {
        let a2 = self.a.mul(&self.a);
        Poly::new(vec![
            a2.neg(),
            c::<S>(12).mul(&self.b),
            c::<S>(6).mul(&self.a),
            c(0),
            c(3),
        ])
    }

    /// Numerator of the triplication abscissa, degree 9.
    pub fn triplication_numerator(&self) -> Poly<S> {
        let a = &self.a;
        let b = &self.b;
        let a2 = a.mul(a);
        let a3 = a2.mul(a);
        let a4 = a3.mul(a);
        let b2 = b.mul(b);
        let b3 = b2.mul(b);
        Poly::new(vec![
            c::<S>(8).mul(&a3.mul(b)).add(&c::<S>(64).mul(&b3)),
            c::<S>(9).mul(&a4).add(&c::<S>(96).mul(&a.mul(&b2))),
            c::<S>(48).mul(&a2.mul(b)),
            c::<S>(36).mul(&a3).add(&c::<S>(48).mul(&b2)),
            c::<S>(-24).mul(&a.mul(b)),
            c::<S>(30).mul(&a2),
            c::<S>(-96).mul(b),
            c::<S>(-12).mul(a),
            c(0),
            c(1),
        ])
    }

    /// Odd part of the triplication ordinate, degree 12: the image
    /// ordinate is `y * g(x) / d(x)^3` with `d` the 3-torsion quartic.
    pub fn triplication_ordinate_factor(&self) -> Poly<S> {
        let a = &self.a;
        let b = &self.b;
        let a2 = a.mul(a);
        let a3 = a2.mul(a);
        let a4 = a3.mul(a);
        let a5 = a4.mul(a);
        let a6 = a5.mul(a);
        let b2 = b.mul(b);
        let b3 = b2.mul(b);
        let b4 = b3.mul(b);
        Poly::new(vec![
            c::<S>(-3)
                .mul(&a6)
                .add(&c::<S>(-96).mul(&a3.mul(&b2)))
                .add(&c::<S>(-512).mul(&b4)),
            c::<S>(-132)
                .mul(&a4.mul(b))
                .add(&c::<S>(-896).mul(&a.mul(&b3))),
            c::<S>(-90)
                .mul(&a5)
                .add(&c::<S>(-624).mul(&a2.mul(&b2))),
            c::<S>(-80)
                .mul(&a3.mul(b))
                .add(&c::<S>(-320).mul(&b3)),
            c::<S>(-185)
                .mul(&a4)
                .add(&c::<S>(-960).mul(&a.mul(&b2))),
            c::<S>(264).mul(&a2.mul(b)),
            c::<S>(-92)
                .mul(&a3)
                .add(&c::<S>(-1776).mul(&b2)),
            c::<S>(-528).mul(&a.mul(b)),
            c::<S>(-165).mul(&a2),
            c::<S>(220).mul(b),
            c::<S>(22).mul(a),
            c(0),
            c(1),
        ])
    }

    /// Closed-form multiplication by 3 on the group of points. Points
    /// whose abscissa kills the 3-torsion quartic map to the origin; the
    /// resultant of the numerator and that quartic is a unit times the
    /// sixth power of the discriminant, so the two never vanish together
    /// on a smooth curve.
    pub fn multiply_by_3(&self, p: &CurvePoint<S>) -> CurvePoint<S> {
        let (x, y) = match p {
            CurvePoint::Infinity => return CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => (x, y),
        };
        let den = self.three_torsion_quartic().eval(x);
        if den.is_zero() {
            return CurvePoint::Infinity;
        }
        let num = self.triplication_numerator().eval(x);
        let den2 = den.mul(&den);
        let x3 = num.div(&den2);
        let g = self.triplication_ordinate_factor().eval(x);
        let y3 = y.mul(&g).div(&den2.mul(&den));
        CurvePoint::affine(x3, y3)
    }
}

/// Division polynomial in the abscissa alone: `n = 2` gives the monic
/// cubic vanishing on the 2-torsion abscissas, `n = 3` the quartic
/// vanishing on the 3-torsion abscissas.
pub fn division_polynomial<S: Field>(curve: &WeierstrassCurve<S>, n: u32) -> Result<Poly<S>> {
    match n {
        2 => Ok(curve.two_torsion_cubic()),
        3 => Ok(curve.three_torsion_quartic()),
        _ => Err(Error::InvalidConfig(format!(
            "division polynomial index must be 2 or 3, got {n}"
        ))),
    }
}

/// Marked double cover of the line: `w^2 = q(t)` with `q` a squarefree
/// quartic and a marked non-branch point `(t0, w0)`, `w0 != 0`.
///
/// The associated short-Weierstrass model sends the marked point to the
/// origin of the group law. All coefficients of the model are polynomial
/// in the coefficients of `q`, `t0`, and `w0^2`, so the model of a
/// rational configuration is exactly rational even when `w0` itself is
/// irrational; `w0` enters the point maps only linearly.
#[derive(Clone, Debug)]
pub struct QuarticModel<S: Field> {
    quartic: Poly<S>,
    t0: S,
    w0: S,
    /// Coefficients of `q(t0 + s)` in `s`: `[w0^2, a1, a2, a3, a4]`.
    shifted: [S; 5],
    curve: WeierstrassCurve<S>,
}

fn weierstrass_coefficients<S: Field>(sh: &[S; 5]) -> (S, S) {
    let [a0, a1, a2, a3, a4] = sh;
    let w2 = a0;
    // a = (3 a1 a3 - a2^2 - 12 a4 w0^2) / 3
    let a_num = c::<S>(3)
        .mul(&a1.mul(a3))
        .sub(&a2.mul(a2))
        .sub(&c::<S>(12).mul(&a4.mul(w2)));
    let a = a_num.div(&c(3));
    // b = (27 a1^2 a4 - 9 a1 a2 a3 + 2 a2^3 - 72 a2 a4 w0^2
    //      + 27 a3^2 w0^2) / 27
    let b_num = c::<S>(27)
        .mul(&a1.mul(a1).mul(a4))
        .sub(&c::<S>(9).mul(&a1.mul(a2).mul(a3)))
        .add(&c::<S>(2).mul(&a2.mul(a2).mul(a2)))
        .sub(&c::<S>(72).mul(&a2.mul(a4).mul(w2)))
        .add(&c::<S>(27).mul(&a3.mul(a3).mul(w2)));
    let b = b_num.div(&c(27));
    (a, b)
}

/// Weierstrass curve of a marked quartic double cover computed from the
/// *square* of the marked ordinate. Usable over the rationals even when
/// the ordinate itself is irrational. Returns the curve together with
/// the local coefficients `[w0^2, a1, a2, a3, a4]` of the quartic at the
/// marked abscissa.
pub fn weierstrass_from_marked_square<S: Field>(
    quartic: &Poly<S>,
    t0: &S,
    w0_squared: &S,
) -> Result<(WeierstrassCurve<S>, [S; 5])> {
    if quartic.degree() != 4 {
        return Err(Error::InvalidConfig(format!(
            "expected a degree-4 polynomial, got degree {}",
            quartic.degree()
        )));
    }
    if w0_squared.is_zero() {
        return Err(Error::DegenerateInput(
            "marked point lies on the branch locus".into(),
        ));
    }
    let shifted_poly = quartic.taylor_shift(t0);
    let mut shifted: [S; 5] = [c(0), c(0), c(0), c(0), c(0)];
    for (k, slot) in shifted.iter_mut().enumerate() {
        *slot = shifted_poly.coeff(k);
    }
    if !shifted[0].sub(w0_squared).is_zero() {
        return Err(Error::InvalidConfig(
            "marked square must equal the quartic at the marked abscissa".into(),
        ));
    }
    let (a, b) = weierstrass_coefficients(&shifted);
    Ok((WeierstrassCurve::new(a, b)?, shifted))
}

impl<S: Field> QuarticModel<S> {
    /// Validates the marked cover and computes its Weierstrass model.
    /// The squarefreeness test uses exact arithmetic; build the model
    /// over an exact scalar type and [`Self::map`] it into floats.
    pub fn new(quartic: Poly<S>, t0: S, w0: S) -> Result<Self> {
        if quartic.degree() != 4 {
            return Err(Error::InvalidConfig(format!(
                "expected a degree-4 polynomial, got degree {}",
                quartic.degree()
            )));
        }
        if !quartic.is_squarefree() {
            return Err(Error::DegenerateInput(
                "quartic has a repeated root".into(),
            ));
        }
        if w0.is_zero() {
            return Err(Error::DegenerateInput(
                "marked point lies on the branch locus".into(),
            ));
        }
        if !w0.mul(&w0).sub(&quartic.eval(&t0)).is_zero() {
            return Err(Error::InvalidConfig(
                "marked value squared must equal the quartic at the marked abscissa".into(),
            ));
        }
        Self::new_unchecked(quartic, t0, w0)
    }

    /// Skips the squarefreeness and membership tests; used after [`Self::map`]
    /// into inexact scalars and by the checked constructor.
    pub fn new_unchecked(quartic: Poly<S>, t0: S, w0: S) -> Result<Self> {
        let shifted_poly = quartic.taylor_shift(&t0);
        let mut shifted: [S; 5] = [c(0), c(0), c(0), c(0), c(0)];
        for (k, slot) in shifted.iter_mut().enumerate() {
            *slot = shifted_poly.coeff(k);
        }
        shifted[0] = w0.mul(&w0);
        let (a, b) = weierstrass_coefficients(&shifted);
        let curve = WeierstrassCurve::new(a, b)?;
        Ok(QuarticModel {
            quartic,
            t0,
            w0,
            shifted,
            curve,
        })
    }

    pub fn quartic(&self) -> &Poly<S> {
        &self.quartic
    }

    pub fn marked_point(&self) -> (S, S) {
        (self.t0.clone(), self.w0.clone())
    }

    pub fn weierstrass(&self) -> &WeierstrassCurve<S> {
        &self.curve
    }

    /// Converts scalars, keeping the derived data aligned.
    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> Result<QuarticModel<T>> {
        QuarticModel::new_unchecked(
            Poly::new((0..5).map(|k| f(&self.quartic.coeff(k))).collect()),
            f(&self.t0),
            f(&self.w0),
        )
    }

    /// Image of a point of the double cover on the Weierstrass model.
    /// The marked point goes to the origin; its hyperelliptic conjugate
    /// is routed through the closed form to avoid the removable 0/0.
    pub fn forward(&self, t: &S, w: &S) -> CurvePoint<S> {
        let s = t.sub(&self.t0);
        if s.is_zero() {
            if w.sub(&self.w0).is_zero() {
                return CurvePoint::Infinity;
            }
            return self.conjugate_image();
        }
        let [_, a1, a2, a3, _] = &self.shifted;
        let w0 = &self.w0;
        let w02 = w0.mul(w0);
        let s2 = s.mul(&s);
        let s3 = s2.mul(&s);
        // x = (3 a1 s + a2 s^2 + 6 w w0 + 6 w0^2) / (3 s^2)
        let x_num = c::<S>(3)
            .mul(&a1.mul(&s))
            .add(&a2.mul(&s2))
            .add(&c::<S>(6).mul(&w.mul(w0)))
            .add(&c::<S>(6).mul(&w02));
        let x = x_num.div(&c::<S>(3).mul(&s2));
        // y = (a1 s w + 3 a1 s w0 + 2 a2 s^2 w0 + a3 s^3 w0
        //      + 4 w w0^2 + 4 w0^3) / s^3
        let y_num = a1
            .mul(&s.mul(w))
            .add(&c::<S>(3).mul(&a1.mul(&s.mul(w0))))
            .add(&c::<S>(2).mul(&a2.mul(&s2.mul(w0))))
            .add(&a3.mul(&s3.mul(w0)))
            .add(&c::<S>(4).mul(&w.mul(&w02)))
            .add(&c::<S>(4).mul(&w02.mul(w0)));
        let y = y_num.div(&s3);
        CurvePoint::affine(x, y)
    }

    /// Preimage on the double cover. Fails exactly on the two points over
    /// `t = infinity`, whose images are [`Self::images_over_infinite_t`].
    pub fn inverse(&self, p: &CurvePoint<S>) -> Result<(S, S)> {
        let (x, y) = match p {
            CurvePoint::Infinity => return Ok(self.marked_point()),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let [_, a1, a2, a3, _] = &self.shifted;
        let w0 = &self.w0;
        let w02 = w0.mul(w0);
        // s = (3 a1^2 - 4 w0^2 (2 a2 + 3 x))
        //     / (a1 (3 x - a2) + 6 w0 (a3 w0 - y))
        let den = a1
            .mul(&c::<S>(3).mul(x).sub(a2))
            .add(&c::<S>(6).mul(&w0.mul(&a3.mul(w0).sub(y))));
        if den.is_zero() {
            return Err(Error::DegenerateInput(
                "point has no preimage at finite t".into(),
            ));
        }
        let num = c::<S>(3)
            .mul(&a1.mul(a1))
            .sub(&c::<S>(4).mul(&w02.mul(&c::<S>(2).mul(a2).add(&c::<S>(3).mul(x)))));
        let s = num.div(&den);
        let t = self.t0.add(&s);
        let s2 = s.mul(&s);
        // w = (3 s^2 x - 3 a1 s - a2 s^2 - 6 w0^2) / (6 w0)
        let w_num = c::<S>(3)
            .mul(&s2.mul(x))
            .sub(&c::<S>(3).mul(&a1.mul(&s)))
            .sub(&a2.mul(&s2))
            .sub(&c::<S>(6).mul(&w02));
        let w = w_num.div(&c::<S>(6).mul(w0));
        Ok((t, w))
    }

    /// Image of the hyperelliptic conjugate `(t0, -w0)` of the marked
    /// point.
    pub fn conjugate_image(&self) -> CurvePoint<S> {
        let [_, a1, a2, a3, _] = &self.shifted;
        let w0 = &self.w0;
        let w02 = w0.mul(w0);
        let x = a1
            .mul(a1)
            .div(&c::<S>(4).mul(&w02))
            .sub(&c::<S>(2).mul(a2).div(&c(3)));
        let y_num = a1
            .mul(a1)
            .mul(a1)
            .sub(&c::<S>(4).mul(&a1.mul(&a2.mul(&w02))))
            .add(&c::<S>(8).mul(&a3.mul(&w02.mul(&w02))));
        let y = y_num.div(&c::<S>(8).mul(&w02.mul(w0))).neg();
        CurvePoint::affine(x, y)
    }

    /// Images of the two points of the double cover over `t = infinity`.
    /// `sqrt_leading` must square to the leading coefficient of the
    /// quartic (for a monic quartic pass 1); the two choices of sign swap
    /// the pair.
    pub fn images_over_infinite_t(&self, sqrt_leading: &S) -> [CurvePoint<S>; 2] {
        let [_, a1, a2, a3, _] = &self.shifted;
        let w0 = &self.w0;
        let r = sqrt_leading;
        let base_x = a2.div(&c(3));
        let off_x = c::<S>(2).mul(&r.mul(w0));
        let base_y = a3.mul(w0);
        let off_y = a1.mul(r);
        [
            CurvePoint::affine(base_x.add(&off_x), base_y.add(&off_y)),
            CurvePoint::affine(base_x.sub(&off_x), base_y.sub(&off_y)),
        ]
    }
}

/// Point of the projective line over `S`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjPoint<S> {
    Finite(S),
    Infinity,
}

impl<S: Field> ProjPoint<S> {
    fn eq_point(&self, other: &Self) -> bool {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => true,
            (ProjPoint::Finite(a), ProjPoint::Finite(b)) => a.sub(b).is_zero(),
            _ => false,
        }
    }
}

/// Cross-ratio `(p1 - p3)(p2 - p4) / ((p2 - p3)(p1 - p4))` of four
/// distinct points, with the usual cancellation when one of them is
/// infinite. Distinctness guarantees the value avoids `{0, 1, infinity}`.
pub fn cross_ratio<S: Field>(points: &[ProjPoint<S>; 4]) -> Result<S> {
    for i in 0..4 {
        for j in (i + 1)..4 {
            if points[i].eq_point(&points[j]) {
                return Err(Error::DegenerateInput(
                    "cross-ratio requires four distinct points".into(),
                ));
            }
        }
    }
    let fin = |p: &ProjPoint<S>| match p {
        ProjPoint::Finite(v) => v.clone(),
        ProjPoint::Infinity => unreachable!("handled by the infinity cases"),
    };
    let idx_inf = points.iter().position(|p| *p == ProjPoint::Infinity);
    let (p1, p2, p3, p4) = (&points[0], &points[1], &points[2], &points[3]);
    Ok(match idx_inf {
        None => {
            let (p1, p2, p3, p4) = (fin(p1), fin(p2), fin(p3), fin(p4));
            p1.sub(&p3)
                .mul(&p2.sub(&p4))
                .div(&p2.sub(&p3).mul(&p1.sub(&p4)))
        }
        Some(0) => fin(p2).sub(&fin(p4)).div(&fin(p2).sub(&fin(p3))),
        Some(1) => fin(p1).sub(&fin(p3)).div(&fin(p1).sub(&fin(p4))),
        Some(2) => fin(p2).sub(&fin(p4)).div(&fin(p1).sub(&fin(p4))),
        _ => fin(p1).sub(&fin(p3)).div(&fin(p2).sub(&fin(p3))),
    })
}

/// `j = 256 (l^2 - l + 1)^3 / (l^2 (l - 1)^2)`, defined away from
/// `l in {0, 1}`.
pub fn j_from_lambda<S: Field>(lambda: &S) -> Result<S> {
    if lambda.is_zero() || lambda.sub(&c(1)).is_zero() {
        return Err(Error::DegenerateInput(
            "cross-ratio 0 or 1 has no j-invariant".into(),
        ));
    }
    let one = c::<S>(1);
    let t = lambda.mul(lambda).sub(lambda).add(&one);
    let num = c::<S>(256).mul(&t.mul(&t).mul(&t));
    let lm1 = lambda.sub(&one);
    let den = lambda.mul(lambda).mul(&lm1.mul(&lm1));
    Ok(num.div(&den))
}

/// j-invariant of the double cover of the line branched over four
/// distinct points, via the cross-ratio of the given ordering. Invariant
/// under reordering.
pub fn j_from_four_points<S: Field>(points: &[ProjPoint<S>; 4]) -> Result<S> {
    j_from_lambda(&cross_ratio(points)?)
}

/// Relative tolerance for declaring two located roots distinct.
pub const ROOT_SEPARATION_REL_TOL: f64 = 1e-10;

/// Abscissas of the 3-torsion points of a complex Weierstrass curve,
/// located to the working precision, sorted lexicographically by
/// (real, imaginary) part. Certifies that the four values are pairwise
/// distinct and disjoint from the 2-torsion abscissas.
pub fn three_torsion_branch_points(curve: &WeierstrassCurve<Cplx>) -> Result<Vec<Cplx>> {
    let quartic = curve.three_torsion_quartic();
    let roots = cplx::roots(&quartic)?;
    let cubic = curve.two_torsion_cubic();
    let halves = cplx::roots(&cubic)?;
    let scale = roots
        .iter()
        .chain(halves.iter())
        .map(|r| r.abs_f64())
        .fold(1.0_f64, f64::max);
    let tol = ROOT_SEPARATION_REL_TOL * scale;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            if roots[i].sub(&roots[j]).abs_f64() < tol {
                return Err(Error::DegenerateInput(
                    "3-torsion abscissas collide".into(),
                ));
            }
        }
        for h in &halves {
            if roots[i].sub(h).abs_f64() < tol {
                return Err(Error::DegenerateInput(
                    "3-torsion abscissa meets a 2-torsion abscissa".into(),
                ));
            }
        }
    }
    Ok(roots)
}

/// Outcome of the exact isotriviality verification on the Hesse pencil.
#[derive(Clone, Debug)]
pub struct HesseReport {
    /// The nine projective base points `[x : y : z]` of the pencil, each
    /// satisfying `x^3 + y^3 + z^3 = 0` and `xyz = 0` exactly.
    pub base_points: Vec<[Cyclo; 3]>,
    /// Index of the distinguished point `[1 : -1 : 0]` in `base_points`.
    pub identity_index: usize,
    /// The four images of the eight non-distinguished base points under
    /// `[x : y : z] -> [x + y : z]`, each hit exactly twice.
    pub images: Vec<ProjPoint<Cyclo>>,
    /// Cross-ratio of the four images in a fixed order; a primitive sixth
    /// root of unity.
    pub lambda: Cyclo,
    /// j-invariant of the four images; exactly zero.
    pub j: Cyclo,
}

/// Exact verification, over the field of cube roots of unity, that the
/// double cover of the line branched over the four 3-torsion abscissas
/// has j-invariant exactly 0, independent of the curve.
///
/// The verification runs on the base points of the Hesse pencil, where
/// all nine 3-torsion points are rational over the cyclotomic field: the
/// eight non-distinguished base points project two-to-one onto four
/// values whose cross-ratio is a primitive sixth root of unity, and
/// `l^2 - l + 1 = 0` forces `j = 256 (l^2 - l + 1)^3 / (l (l - 1))^2 = 0`.
pub fn hesse_isotriviality_check() -> Result<HesseReport> {
    let zeta = Cyclo::zeta();
    let one = Cyclo::one();
    let zero = Cyclo::zero();
    let mut base_points: Vec<[Cyclo; 3]> = Vec::with_capacity(9);
    let mut zk = one.clone();
    for _ in 0..3 {
        base_points.push([zero.clone(), one.clone(), zk.neg()]);
        base_points.push([one.clone(), zero.clone(), zk.neg()]);
        base_points.push([one.clone(), zk.neg(), zero.clone()]);
        zk = zk.mul(&zeta);
    }
    for [x, y, z] in &base_points {
        let cubes = x
            .mul(x)
            .mul(x)
            .add(&y.mul(y).mul(y))
            .add(&z.mul(z).mul(z));
        if !cubes.is_zero() || !x.mul(y).mul(z).is_zero() {
            return Err(Error::Internal(
                "pencil base point fails its defining equations".into(),
            ));
        }
    }
    let identity_index = base_points
        .iter()
        .position(|[x, y, z]| x.sub(&one).is_zero() && y.add(&one).is_zero() && z.is_zero())
        .ok_or_else(|| Error::Internal("distinguished base point missing".into()))?;

    let mut images: Vec<ProjPoint<Cyclo>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, [x, y, z]) in base_points.iter().enumerate() {
        if i == identity_index {
            continue;
        }
        let num = x.add(y);
        let image = if z.is_zero() {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(num.div(z))
        };
        match images.iter().position(|p| p.eq_point(&image)) {
            Some(k) => counts[k] += 1,
            None => {
                images.push(image);
                counts.push(1);
            }
        }
    }
    if images.len() != 4 || counts.iter().any(|&k| k != 2) {
        return Err(Error::Internal(
            "projection must hit four values twice each".into(),
        ));
    }

    // Fixed ordering: -1, -zeta, infinity, -zeta^2.
    let want = [
        ProjPoint::Finite(one.neg()),
        ProjPoint::Finite(zeta.neg()),
        ProjPoint::Infinity,
        ProjPoint::Finite(zeta.mul(&zeta).neg()),
    ];
    for w in &want {
        if !images.iter().any(|p| p.eq_point(w)) {
            return Err(Error::Internal(
                "projection image set is not the expected one".into(),
            ));
        }
    }
    let lambda = cross_ratio(&want)?;
    if !lambda.mul(&lambda).sub(&lambda).add(&one).is_zero() {
        return Err(Error::Internal(
            "cross-ratio is not a primitive sixth root of unity".into(),
        ));
    }
    let j = j_from_four_points(&want)?;
    if !j.is_zero() {
        return Err(Error::Internal("j-invariant is not exactly zero".into()));
    }
    Ok(HesseReport {
        base_points,
        identity_index,
        images,
        lambda,
        j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Field::from_i64(n)
    }

    fn qr(n: i64, d: i64) -> Q {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn curve(a: i64, b: i64) -> WeierstrassCurve<Q> {
        WeierstrassCurve::new(q(a), q(b)).unwrap()
    }

    #[test]
    fn rejects_singular_cubic() {
        assert!(WeierstrassCurve::new(q(-3), q(2)).is_err());
        assert!(WeierstrassCurve::new(q(0), q(0)).is_err());
    }

    #[test]
    fn chord_tangent_group_law() {
        // (1, 2) lies on y^2 = x^3 - 2x + 5.
        let e = curve(-2, 5);
        let p = CurvePoint::affine(q(1), q(2));
        assert!(e.contains(&p));
        let two_p = e.add_points(&p, &p);
        assert!(e.contains(&two_p));
        let minus_p = e.negate(&p);
        assert_eq!(e.add_points(&p, &minus_p), CurvePoint::Infinity);
        assert_eq!(e.add_points(&p, &CurvePoint::Infinity), p);
        // Associativity on a mixed triple.
        let r = e.add_points(&two_p, &p);
        let r2 = e.add_points(&p, &two_p);
        assert_eq!(r, r2);
        let four_a = e.add_points(&e.add_points(&two_p, &p), &p);
        let four_b = e.add_points(&two_p, &two_p);
        assert_eq!(four_a, four_b);
    }

    #[test]
    fn division_polynomials_match_orders() {
        let e = curve(1, 0);
        assert_eq!(
            division_polynomial(&e, 2).unwrap(),
            Poly::new(vec![q(0), q(1), q(0), q(1)])
        );
        assert_eq!(
            division_polynomial(&e, 3).unwrap(),
            Poly::new(vec![q(-1), q(0), q(6), q(0), q(3)])
        );
        assert!(division_polynomial(&e, 4).is_err());
        // (0, 0) has order 2.
        let p = CurvePoint::affine(q(0), q(0));
        assert!(e.contains(&p));
        assert_eq!(e.add_points(&p, &p), CurvePoint::Infinity);
    }

    #[test]
    fn triplication_kills_three_torsion() {
        // On y^2 = x^3 + 1 the point (0, 1) has order 3: the 3-torsion
        // quartic 3x^4 + 12x vanishes at x = 0.
        let e = curve(0, 1);
        let p = CurvePoint::affine(q(0), q(1));
        assert!(e.contains(&p));
        assert_eq!(e.multiply_by_3(&p), CurvePoint::Infinity);
        let sum = e.add_points(&e.add_points(&p, &p), &p);
        assert_eq!(sum, CurvePoint::Infinity);
        assert_eq!(e.multiply_by_3(&CurvePoint::Infinity), CurvePoint::Infinity);
    }

    #[test]
    fn triplication_matches_three_chord_tangent_additions() {
        // Random rational points: choose (a, x, y) and let b close the
        // curve equation.
        let mut rng = StdRng::seed_from_u64(7);
        let mut done = 0;
        while done < 60 {
            let a = qr(rng.random_range(-9..9), rng.random_range(1..5));
            let x = qr(rng.random_range(-9..9), rng.random_range(1..5));
            let y = qr(rng.random_range(-9..9), rng.random_range(1..5));
            let b = y.mul(&y).sub(&x.mul(&x).mul(&x)).sub(&a.mul(&x));
            let e = match WeierstrassCurve::new(a, b) {
                Ok(e) => e,
                Err(_) => continue,
            };
            let p = CurvePoint::affine(x, y);
            assert!(e.contains(&p));
            let by_formula = e.multiply_by_3(&p);
            let by_additions = e.add_points(&e.add_points(&p, &p), &p);
            assert_eq!(by_formula, by_additions);
            assert!(e.contains(&by_formula));
            done += 1;
        }
    }

    #[test]
    fn torsion_loci_are_disjoint() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut done = 0;
        while done < 50 {
            let a = qr(rng.random_range(-20..20), rng.random_range(1..6));
            let b = qr(rng.random_range(-20..20), rng.random_range(1..6));
            let e = match WeierstrassCurve::new(a, b) {
                Ok(e) => e,
                Err(_) => continue,
            };
            let g = e.two_torsion_cubic().gcd(&e.three_torsion_quartic());
            assert_eq!(g.degree(), 0);
            done += 1;
        }
    }

    fn example_model() -> QuarticModel<Q> {
        // q(t) = (t-1)(t-2)(t-3)(t-6), marked point (0, 6).
        let quartic: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(3), q(6)]);
        QuarticModel::new(quartic, q(0), q(6)).unwrap()
    }

    #[test]
    fn quartic_model_weierstrass_coefficients() {
        let m = example_model();
        assert_eq!(m.weierstrass().a(), &qr(-49, 3));
        assert_eq!(m.weierstrass().b(), &qr(286, 27));
        assert_eq!(m.weierstrass().j_invariant(), qr(470596, 225));
    }

    #[test]
    fn j_matches_cross_ratio_of_branch_points() {
        let m = example_model();
        let pts = [
            ProjPoint::Finite(q(1)),
            ProjPoint::Finite(q(2)),
            ProjPoint::Finite(q(3)),
            ProjPoint::Finite(q(6)),
        ];
        assert_eq!(cross_ratio(&pts).unwrap(), qr(8, 5));
        assert_eq!(j_from_four_points(&pts).unwrap(), qr(470596, 225));
        assert_eq!(m.weierstrass().j_invariant(), qr(470596, 225));
    }

    #[test]
    fn marked_point_maps_to_origin_and_back() {
        let m = example_model();
        assert_eq!(m.forward(&q(0), &q(6)), CurvePoint::Infinity);
        assert_eq!(m.inverse(&CurvePoint::Infinity).unwrap(), (q(0), q(6)));
    }

    #[test]
    fn conjugate_point_roundtrip() {
        let m = example_model();
        let image = m.conjugate_image();
        assert_eq!(image, CurvePoint::affine(qr(14, 3), q(6)));
        assert!(m.weierstrass().contains(&image));
        assert_eq!(m.forward(&q(0), &q(-6)), image);
        assert_eq!(m.inverse(&image).unwrap(), (q(0), q(-6)));
    }

    #[test]
    fn rational_points_roundtrip_exactly() {
        // Interpolate a quartic through prescribed square values, so the
        // cover has ten exact rational points to roundtrip.
        let abscissas = [q(0), q(1), q(-1), q(2), q(-2)];
        let w_values = [q(2), q(3), q(1), q(5), q(7)];
        let mut quartic: Poly<Q> = Poly::zero();
        for i in 0..5 {
            let others: Vec<Q> = (0..5)
                .filter(|&j| j != i)
                .map(|j| abscissas[j].clone())
                .collect();
            let basis = Poly::from_roots(&others);
            let denom = basis.eval(&abscissas[i]);
            let target = w_values[i].mul(&w_values[i]);
            quartic = quartic.add(&basis.scale(&target.div(&denom)));
        }
        let m = QuarticModel::new(quartic.clone(), q(0), q(2)).unwrap();
        for i in 0..5 {
            assert_eq!(quartic.eval(&abscissas[i]), w_values[i].mul(&w_values[i]));
            for sign in [1i64, -1] {
                let t = abscissas[i].clone();
                let w = w_values[i].mul(&q(sign));
                let p = m.forward(&t, &w);
                assert!(m.weierstrass().contains(&p));
                let (t2, w2) = m.inverse(&p).unwrap();
                assert_eq!((t2, w2), (t, w));
            }
        }
    }

    #[test]
    fn images_over_infinite_t_lie_on_curve_and_reject_inverse() {
        let m = example_model();
        let [p_plus, p_minus] = m.images_over_infinite_t(&q(1));
        assert!(m.weierstrass().contains(&p_plus));
        assert!(m.weierstrass().contains(&p_minus));
        assert!(m.inverse(&p_plus).is_err());
        assert!(m.inverse(&p_minus).is_err());
        assert_ne!(p_plus, p_minus);
    }

    #[test]
    fn quartic_model_rejects_bad_input() {
        let quartic: Poly<Q> = Poly::from_roots(&[q(1), q(1), q(3), q(6)]);
        assert!(QuarticModel::new(quartic, q(0), q(6)).is_err());
        let quartic: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(3), q(6)]);
        assert!(QuarticModel::new(quartic.clone(), q(0), q(5)).is_err());
        assert!(QuarticModel::new(quartic.clone(), q(1), q(0)).is_err());
        let cubic: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(3)]);
        assert!(QuarticModel::new(cubic, q(0), q(6)).is_err());
    }

    #[test]
    fn cross_ratio_examples() {
        // Normal form: the formula sends (0, 1, l, inf) to l / (l - 1),
        // which lies in the same six-element orbit as l, so every derived
        // j-invariant agrees.
        let l = qr(8, 5);
        let pts = [
            ProjPoint::Finite(q(0)),
            ProjPoint::Finite(q(1)),
            ProjPoint::Finite(l.clone()),
            ProjPoint::Infinity,
        ];
        let got = cross_ratio(&pts).unwrap();
        assert_eq!(got, l.div(&l.sub(&q(1))));
        assert_eq!(
            j_from_lambda(&got).unwrap(),
            j_from_lambda(&l).unwrap()
        );
        // Harmonic quadruple: j = 1728.
        let pts = [
            ProjPoint::Finite(q(0)),
            ProjPoint::Finite(q(1)),
            ProjPoint::Finite(q(-1)),
            ProjPoint::Infinity,
        ];
        assert_eq!(j_from_four_points(&pts).unwrap(), q(1728));
        // Coincident points are rejected.
        let pts = [
            ProjPoint::Finite(q(0)),
            ProjPoint::Finite(q(0)),
            ProjPoint::Finite(q(1)),
            ProjPoint::Infinity,
        ];
        assert!(cross_ratio(&pts).is_err());
    }

    #[test]
    fn j_constant_under_all_reorderings() {
        let base = [q(0), q(1), qr(8, 5), q(7)];
        let expected = j_from_four_points(&[
            ProjPoint::Finite(base[0].clone()),
            ProjPoint::Finite(base[1].clone()),
            ProjPoint::Finite(base[2].clone()),
            ProjPoint::Finite(base[3].clone()),
        ])
        .unwrap();
        // All 24 orderings agree.
        let mut perm = [0usize, 1, 2, 3];
        let mut stack = vec![(perm, 0usize)];
        let mut seen = 0;
        while let Some((p, k)) = stack.pop() {
            if k == 4 {
                let pts = [
                    ProjPoint::Finite(base[p[0]].clone()),
                    ProjPoint::Finite(base[p[1]].clone()),
                    ProjPoint::Finite(base[p[2]].clone()),
                    ProjPoint::Finite(base[p[3]].clone()),
                ];
                assert_eq!(j_from_four_points(&pts).unwrap(), expected);
                seen += 1;
                continue;
            }
            for i in k..4 {
                perm = p;
                perm.swap(k, i);
                stack.push((perm, k + 1));
            }
        }
        assert_eq!(seen, 24);
    }

    #[test]
    fn hesse_pencil_is_isotrivial_with_j_zero() {
        let report = hesse_isotriviality_check().unwrap();
        assert_eq!(report.base_points.len(), 9);
        assert_eq!(report.images.len(), 4);
        assert!(report.j.is_zero());
        let zeta = Cyclo::zeta();
        assert_eq!(report.lambda, Cyclo::one().add(&zeta));
        // lambda^6 = 1 but no smaller power is 1.
        let mut pow = Cyclo::one();
        for k in 1..=6 {
            pow = pow.mul(&report.lambda);
            if k < 6 {
                assert!(!pow.sub(&Cyclo::one()).is_zero());
            }
        }
        assert!(pow.sub(&Cyclo::one()).is_zero());
    }
}
