//! Covers of marked surfaces as permutation tuples.
//!
//! A degree-d cover of a genus-g base with n marked points is the data of
//! permutations `A_1, B_1, ..., A_g, B_g, C_1, ..., C_n` of `{0..d-1}`
//! subject to the surface relation
//!
//! ```text
//! [A_1,B_1] ... [A_g,B_g] C_1 ... C_n = identity
//! ```
//!
//! where words act on fiber indices left to right (the first letter is
//! applied first) and `[A,B] = A B A^{-1} B^{-1}`. Under this convention the
//! `C_j` are the monodromies of loops around the marked points, composable
//! in marked-point order.

use crate::error::Error;
use crate::perm::{orbits, product_action, CycleType, Permutation};
use crate::Result;
use std::fmt;

/// Base surface: genus plus an ordered list of distinct marked-point labels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MarkedBase {
    pub genus: usize,
    pub points: Vec<String>,
}

impl MarkedBase {
    pub fn new(genus: usize, points: Vec<String>) -> Result<Self> {
        let mut sorted = points.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateLabel(w[0].clone()));
            }
        }
        Ok(MarkedBase { genus, points })
    }

    /// Genus-0 base, the common case.
    pub fn line(points: Vec<String>) -> Result<Self> {
        MarkedBase::new(0, points)
    }
}

/// One letter of a word in the cover's generators: generator index in the
/// order `A_1, B_1, ..., A_g, B_g, C_1, ..., C_n`, and whether it is
/// inverted.
pub type Letter = (usize, bool);

/// A branched cover presented by its monodromy permutations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cover {
    pub base: MarkedBase,
    pub degree: usize,
    /// Handle pairs (A_i, B_i), one per base genus.
    pub handles: Vec<(Permutation, Permutation)>,
    /// Loop monodromies C_j, one per marked point.
    pub loops: Vec<Permutation>,
}

/// Structured report of the first well-formedness failure of a cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverViolation(pub String);

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Cover {
    pub fn new(
        base: MarkedBase,
        degree: usize,
        handles: Vec<(Permutation, Permutation)>,
        loops: Vec<Permutation>,
    ) -> Result<Self> {
        let cover = Cover {
            base,
            degree,
            handles,
            loops,
        };
        match cover.validate() {
            Ok(()) => Ok(cover),
            Err(v) => Err(Error::InvalidCover(v.0)),
        }
    }

    /// Number of generators, `2g + n`.
    pub fn n_generators(&self) -> usize {
        2 * self.handles.len() + self.loops.len()
    }

    /// Generator by index in the order `A_1, B_1, ..., A_g, B_g, C_1..C_n`.
    pub fn generator(&self, k: usize) -> &Permutation {
        let h = self.handles.len();
        if k < 2 * h {
            let (a, b) = &self.handles[k / 2];
            if k % 2 == 0 {
                a
            } else {
                b
            }
        } else {
            &self.loops[k - 2 * h]
        }
    }

    pub fn all_generators(&self) -> Vec<Permutation> {
        (0..self.n_generators())
            .map(|k| self.generator(k).clone())
            .collect()
    }

    /// Evaluates a word of generators acting left to right.
    pub fn eval_word(&self, word: &[Letter]) -> Permutation {
        let mut images: Vec<usize> = (0..self.degree).collect();
        for &(k, inv) in word {
            let g = self.generator(k);
            if inv {
                let gi = g.inverse();
                for im in images.iter_mut() {
                    *im = gi.apply(*im);
                }
            } else {
                for im in images.iter_mut() {
                    *im = g.apply(*im);
                }
            }
        }
        Permutation::new(images).expect("word evaluation preserves bijectivity")
    }

    /// The surface relation as a word.
    pub fn relation_word(&self) -> Vec<Letter> {
        let mut word = Vec::new();
        for i in 0..self.handles.len() {
            let (a, b) = (2 * i, 2 * i + 1);
            word.extend_from_slice(&[(a, false), (b, false), (a, true), (b, true)]);
        }
        let offset = 2 * self.handles.len();
        word.extend((0..self.loops.len()).map(|j| (offset + j, false)));
        word
    }

    /// Checks permutation well-formedness and the surface relation,
    /// reporting the first failure. Never panics.
    pub fn validate(&self) -> std::result::Result<(), CoverViolation> {
        if self.base.points.len() != self.loops.len() {
            return Err(CoverViolation(format!(
                "{} marked points but {} loop permutations",
                self.base.points.len(),
                self.loops.len()
            )));
        }
        if self.base.genus != self.handles.len() {
            return Err(CoverViolation(format!(
                "base genus {} but {} handle pairs",
                self.base.genus,
                self.handles.len()
            )));
        }
        for k in 0..self.n_generators() {
            if self.generator(k).degree() != self.degree {
                return Err(CoverViolation(format!(
                    "generator {k} has degree {} instead of {}",
                    self.generator(k).degree(),
                    self.degree
                )));
            }
        }
        let rel = self.eval_word(&self.relation_word());
        if !rel.is_identity() {
            return Err(CoverViolation(format!(
                "surface relation violated: product acts as {:?}",
                rel
            )));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Orbit blocks of the full generator set.
    pub fn components(&self) -> Vec<Vec<usize>> {
        orbits(self.degree, &self.all_generators()).expect("generators share the cover degree")
    }

    /// Genus of the (connected) cover surface by Riemann-Hurwitz.
    pub fn genus(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let d = self.degree as i64;
        let base_chi = 2 - 2 * self.base.genus as i64;
        let ram: i64 = self
            .loops
            .iter()
            .map(|c| c.cycle_type().ramification() as i64)
            .sum();
        let chi = d * base_chi - ram;
        if chi % 2 != 0 || chi > 2 {
            return Err(Error::NonIntegralGenus(chi));
        }
        Ok(((2 - chi) / 2) as usize)
    }

    /// Cycle type of the monodromy at marked point `k` (the ramification
    /// profile over that point).
    pub fn profile(&self, k: usize) -> Result<CycleType> {
        self.loops
            .get(k)
            .map(Permutation::cycle_type)
            .ok_or(Error::IndexOutOfRange(k, self.loops.len()))
    }

    /// Appends marked points with identity monodromy. Genus and
    /// connectivity are unchanged.
    pub fn refine_marked_points(&self, extra: &[String]) -> Result<Cover> {
        let mut points = self.base.points.clone();
        points.extend_from_slice(extra);
        let base = MarkedBase::new(self.base.genus, points)?;
        let mut loops = self.loops.clone();
        loops.extend(extra.iter().map(|_| Permutation::identity(self.degree)));
        Cover::new(base, self.degree, self.handles.clone(), loops)
    }

    /// Drops marked points whose monodromy is the identity (the inverse of
    /// [`Cover::refine_marked_points`]; also used to discard spurious branch
    /// candidates after tracking).
    pub fn forget_trivial_points(&self) -> Cover {
        let mut points = Vec::new();
        let mut loops = Vec::new();
        for (label, c) in self.base.points.iter().zip(&self.loops) {
            if !c.is_identity() {
                points.push(label.clone());
                loops.push(c.clone());
            }
        }
        Cover {
            base: MarkedBase {
                genus: self.base.genus,
                points,
            },
            degree: self.degree,
            handles: self.handles.clone(),
            loops,
        }
    }

    /// The degree-1 cover of a base (used as the apex of fiber products
    /// over the base itself).
    pub fn trivial(base: MarkedBase) -> Cover {
        let loops = base.points.iter().map(|_| Permutation::identity(1)).collect();
        let handles = (0..base.genus)
            .map(|_| (Permutation::identity(1), Permutation::identity(1)))
            .collect();
        Cover {
            base,
            degree: 1,
            handles,
            loops,
        }
    }
}

/// A map of covers over the same base: a fiber surjection commuting with
/// every generator's monodromy.
#[derive(Clone, Debug)]
pub struct CoverMap {
    pub source: Cover,
    pub target: Cover,
    pub fiber_map: Vec<usize>,
}

impl CoverMap {
    pub fn new(source: Cover, target: Cover, fiber_map: Vec<usize>) -> Result<Self> {
        if source.base != target.base {
            return Err(Error::InvalidCoverMap(
                "source and target live over different marked bases".into(),
            ));
        }
        if fiber_map.len() != source.degree {
            return Err(Error::InvalidCoverMap(format!(
                "fiber map has {} entries for a degree-{} source",
                fiber_map.len(),
                source.degree
            )));
        }
        if source.degree % target.degree != 0 {
            return Err(Error::InvalidCoverMap(format!(
                "source degree {} not a multiple of target degree {}",
                source.degree, target.degree
            )));
        }
        let expected_fiber = source.degree / target.degree;
        let mut counts = vec![0usize; target.degree];
        for &im in &fiber_map {
            if im >= target.degree {
                return Err(Error::InvalidCoverMap(format!(
                    "fiber image {im} out of range"
                )));
            }
            counts[im] += 1;
        }
        if counts.iter().any(|&c| c != expected_fiber) {
            return Err(Error::InvalidCoverMap(format!(
                "fibers are not all of size {expected_fiber}"
            )));
        }
        for k in 0..source.n_generators() {
            let gs = source.generator(k);
            let gt = target.generator(k);
            for i in 0..source.degree {
                if fiber_map[gs.apply(i)] != gt.apply(fiber_map[i]) {
                    return Err(Error::InvalidCoverMap(format!(
                        "equivariance fails at generator {k}, fiber index {i}"
                    )));
                }
            }
        }
        Ok(CoverMap {
            source,
            target,
            fiber_map,
        })
    }

    pub fn relative_degree(&self) -> usize {
        self.source.degree / self.target.degree
    }

    /// Identity map on a cover.
    pub fn identity(c: &Cover) -> CoverMap {
        CoverMap {
            source: c.clone(),
            target: c.clone(),
            fiber_map: (0..c.degree).collect(),
        }
    }

    /// Composition `self` after `inner` (inner's target must equal self's
    /// source).
    pub fn compose(&self, inner: &CoverMap) -> Result<CoverMap> {
        if inner.target != self.source {
            return Err(Error::InvalidCoverMap(
                "composition mismatch: inner target differs from outer source".into(),
            ));
        }
        CoverMap::new(
            inner.source.clone(),
            self.target.clone(),
            inner.fiber_map.iter().map(|&i| self.fiber_map[i]).collect(),
        )
    }
}

/// True iff, at marked point `k`, every source fiber index has the same
/// local order as its image: the map is unramified over point `k` exactly
/// when this holds.
pub fn relative_ramification_ok(m: &CoverMap, point_index: usize) -> Result<bool> {
    if point_index >= m.source.loops.len() {
        return Err(Error::IndexOutOfRange(point_index, m.source.loops.len()));
    }
    let cs = &m.source.loops[point_index];
    let ct = &m.target.loops[point_index];
    Ok((0..m.source.degree).all(|i| {
        cs.orbit_length_of(i) == ct.orbit_length_of(m.fiber_map[i])
    }))
}

/// True iff the map is unramified over every marked point.
pub fn is_etale(m: &CoverMap) -> Result<bool> {
    for k in 0..m.source.loops.len() {
        if !relative_ramification_ok(m, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Normalized fiber product of two cover maps with a common target.
///
/// Returns the connected components of the matched-pair action, each with
/// its two projections, sorted by (degree, lexicographically minimal pair).
pub fn fiber_product(
    a: &CoverMap,
    b: &CoverMap,
) -> Result<Vec<(Cover, CoverMap, CoverMap)>> {
    if a.target != b.target {
        return Err(Error::InvalidCoverMap(
            "fiber product requires a common target cover".into(),
        ));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..a.source.degree {
        for j in 0..b.source.degree {
            if a.fiber_map[i] == b.fiber_map[j] {
                pairs.push((i, j));
            }
        }
    }

    let n_gens = a.source.n_generators();
    let mut prod_gens = Vec::with_capacity(n_gens);
    for k in 0..n_gens {
        prod_gens.push(product_action(
            &pairs,
            a.source.generator(k),
            b.source.generator(k),
        )?);
    }

    let blocks = orbits(pairs.len(), &prod_gens)?;
    let mut components = Vec::new();
    for block in &blocks {
        let lookup: std::collections::HashMap<usize, usize> = block
            .iter()
            .copied()
            .enumerate()
            .map(|(new, old)| (old, new))
            .collect();
        let restrict = |g: &Permutation| -> Permutation {
            Permutation::new(block.iter().map(|&old| lookup[&g.apply(old)]).collect())
                .expect("orbit blocks are generator-invariant")
        };
        let gens: Vec<Permutation> = prod_gens.iter().map(restrict).collect();
        let g = a.source.base.genus;
        let handles: Vec<(Permutation, Permutation)> = (0..g)
            .map(|i| (gens[2 * i].clone(), gens[2 * i + 1].clone()))
            .collect();
        let loops: Vec<Permutation> = gens[2 * g..].to_vec();
        let cover = Cover::new(a.source.base.clone(), block.len(), handles, loops)?;
        let to_a = CoverMap::new(
            cover.clone(),
            a.source.clone(),
            block.iter().map(|&n| pairs[n].0).collect(),
        );
        let to_b = CoverMap::new(
            cover.clone(),
            b.source.clone(),
            block.iter().map(|&n| pairs[n].1).collect(),
        );
        // Projections of a fiber-product component can fail the equal-fiber
        // constraint only when the component misses sheets of a factor; that
        // happens for disconnected factors, which we treat as malformed
        // input here.
        components.push((cover, to_a?, to_b?, pairs[block[0]]));
    }
    components.sort_by(|x, y| (x.0.degree, x.3).cmp(&(y.0.degree, y.3)));
    Ok(components.into_iter().map(|(c, pa, pb, _)| (c, pa, pb)).collect())
}
