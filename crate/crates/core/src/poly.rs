//! Dense univariate polynomials over any [`Field`], ascending coefficient
//! order.

use crate::scalar::Field;

#[derive(Clone, PartialEq, Debug)]
pub struct Poly<S: Field> {
    /// coeffs[k] multiplies x^k; no trailing zeros except for the zero
    /// polynomial, which is an empty vector.
    pub coeffs: Vec<S>,
}

impl<S: Field> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(Field::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// x - r
    pub fn linear_root(r: &S) -> Self {
        Poly::new(vec![r.neg(), S::one()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.mul(&S::from_i64(i as i64 + 1)))
                .collect(),
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Poly<S>, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(S::zero);
        Poly::new((0..n).map(|i| get(self, i).add(&get(rhs, i))).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&S::from_i64(-1)))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Monic product of (x - r) over the given roots.
    pub fn from_roots(roots: &[S]) -> Self {
        let mut p = Poly::constant(S::one());
        for r in roots {
            p = p.mul(&Poly::linear_root(r));
        }
        p
    }

    /// Coefficient of x^k (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// The polynomial `s -> p(c + s)` (Horner in the shifted variable).
    pub fn taylor_shift(&self, c: &S) -> Self {
        let mut out = Poly::zero();
        for k in (0..self.coeffs.len()).rev() {
            let shifted = Poly::new(vec![c.clone(), S::one()]);
            out = out.mul(&shifted).add(&Poly::constant(self.coeffs[k].clone()));
        }
        out
    }

    pub fn make_monic(&self) -> Self {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => self.scale(&S::one().div(l)),
        }
    }

    /// Euclidean division (quotient, remainder). Meaningful for exact
    /// scalar types.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = vec![S::zero(); self.coeffs.len().saturating_sub(d.coeffs.len() - 1)];
        let dl = d.leading().unwrap().clone();
        while !rem.is_zero() && rem.degree() >= d.degree() {
            let shift = rem.degree() - d.degree();
            let c = rem.leading().unwrap().div(&dl);
            quot[shift] = c.clone();
            let mut sub = vec![S::zero(); shift];
            sub.extend(d.coeffs.iter().map(|x| x.mul(&c)));
            rem = rem.sub(&Poly::new(sub));
        }
        (Poly::new(quot), rem)
    }

    /// Monic gcd by the Euclidean algorithm (exact scalar types).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// True iff gcd with the derivative is constant.
    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Field::from_i64(n)
    }

    #[test]
    fn eval_and_derivative() {
        // p = x^3 - 2x + 5
        let p = Poly::new(vec![q(5), q(-2), q(0), q(1)]);
        assert_eq!(p.eval(&q(3)), q(26));
        let dp = p.derivative();
        assert_eq!(dp.eval(&q(3)), q(25));
    }

    #[test]
    fn from_roots_expands() {
        let p: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(3)]);
        // x^3 - 6x^2 + 11x - 6
        assert_eq!(p.coeffs, vec![q(-6), q(11), q(-6), q(1)]);
        for r in [1, 2, 3] {
            assert!(Field::is_zero(&p.eval(&q(r))));
        }
    }

    #[test]
    fn ring_identities() {
        let p = Poly::new(vec![q(1), q(2)]);
        let r = Poly::new(vec![q(-3), q(0), q(4)]);
        let lhs = p.mul(&r).add(&r);
        let rhs = r.mul(&p.add(&Poly::constant(q(1))));
        assert_eq!(lhs, rhs);
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn taylor_shift_translates_roots() {
        let p: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(5)]);
        let shifted = p.taylor_shift(&q(2));
        assert_eq!(shifted, Poly::from_roots(&[q(-1), q(0), q(3)]));
        assert_eq!(shifted.coeff(3), q(1));
        assert_eq!(shifted.coeff(9), q(0));
    }

    #[test]
    fn division_reconstructs() {
        let p: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(3), q(7)]);
        let d = Poly::new(vec![q(5), q(-1), q(2)]);
        let (quot, rem) = p.div_rem(&d);
        assert_eq!(quot.mul(&d).add(&rem), p);
        assert!(rem.degree() < d.degree());
    }

    #[test]
    fn gcd_extracts_common_roots() {
        let a: Poly<Q> = Poly::from_roots(&[q(1), q(2), q(4)]);
        let b: Poly<Q> = Poly::from_roots(&[q(2), q(4), q(9)]);
        let g = a.gcd(&b);
        assert_eq!(g, Poly::from_roots(&[q(2), q(4)]));
        assert!(a.is_squarefree());
        let sq = a.mul(&Poly::linear_root(&q(2)));
        assert!(!sq.is_squarefree());
    }
}
