//! Exact permutation algebra on dense 0-based fiber indices.
//!
//! Conventions used throughout the crate:
//!
//! - a `Permutation` stores its image table, so `p.apply(i) = images[i]`;
//! - `compose(p, q)` is the function `i -> p(q(i))`, i.e. "q first";
//! - words of generators (paths, relators) are applied left to right, which
//!   is the opposite fold: see [`crate::cover`].

use crate::error::Error;
use crate::Result;
use std::collections::HashMap;
use std::fmt;

/// A bijection of `{0..d-1}`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images)
    }
}

impl Permutation {
    /// Validates that `images` is a bijection on `{0..d-1}`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &im in &images {
            if im >= d {
                return Err(Error::NotABijection {
                    degree: d,
                    detail: format!("image {im} out of range"),
                });
            }
            if seen[im] {
                return Err(Error::NotABijection {
                    degree: d,
                    detail: format!("image {im} repeated"),
                });
            }
            seen[im] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    /// The transposition `(i j)` on `{0..d-1}`.
    pub fn transposition(degree: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..degree).collect();
        images.swap(i, j);
        Permutation { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| i == im)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &im) in self.images.iter().enumerate() {
            images[im] = i;
        }
        Permutation { images }
    }

    /// `(p.compose(q))(i) = p(q(i))`.
    pub fn compose(&self, q: &Permutation) -> Result<Permutation> {
        if self.degree() != q.degree() {
            return Err(Error::DegreeMismatch(self.degree(), q.degree()));
        }
        Ok(Permutation {
            images: q.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    /// Cycles of the permutation, each rotated to start at its minimal
    /// element, listed in order of those minimal elements. Fixed points are
    /// included as singleton cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.images[start];
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.images[j];
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut lengths: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { lengths }
    }

    /// Order of the cycle containing `i` (the local ramification index when
    /// the permutation is the monodromy of a loop).
    pub fn orbit_length_of(&self, i: usize) -> usize {
        let mut len = 1;
        let mut j = self.images[i];
        while j != i {
            len += 1;
            j = self.images[j];
        }
        len
    }
}

/// Multiset of cycle lengths, stored descending; lengths sum to the degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleType {
    lengths: Vec<usize>,
}

impl CycleType {
    pub fn from_lengths(mut lengths: Vec<usize>) -> Self {
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { lengths }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn degree(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// Total ramification contribution `sum(len - 1)` of this profile.
    pub fn ramification(&self) -> usize {
        self.lengths.iter().map(|l| l - 1).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.lengths.iter().all(|&l| l == 1)
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.lengths.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Finest partition of `{0..degree-1}` closed under all generators.
///
/// Blocks are sorted internally and by minimal element, so the output is
/// deterministic. An empty generator list yields singleton blocks.
pub fn orbits(degree: usize, generators: &[Permutation]) -> Result<Vec<Vec<usize>>> {
    for g in generators {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
    }
    let inverses: Vec<Permutation> = generators.iter().map(Permutation::inverse).collect();
    let mut block_of = vec![usize::MAX; degree];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for start in 0..degree {
        if block_of[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut queue = vec![start];
        block_of[start] = id;
        let mut members = vec![start];
        while let Some(i) = queue.pop() {
            for g in generators.iter().chain(&inverses) {
                let j = g.apply(i);
                if block_of[j] == usize::MAX {
                    block_of[j] = id;
                    members.push(j);
                    queue.push(j);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    Ok(blocks)
}

/// The induced permutation of `pairs` under the coordinatewise action of
/// `(p, q)`. The pair set must be closed under the action.
pub fn product_action(
    pairs: &[(usize, usize)],
    p: &Permutation,
    q: &Permutation,
) -> Result<Permutation> {
    let index: HashMap<(usize, usize), usize> = pairs
        .iter()
        .copied()
        .enumerate()
        .map(|(n, pr)| (pr, n))
        .collect();
    let mut images = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        let target = (p.apply(i), q.apply(j));
        match index.get(&target) {
            Some(&n) => images.push(n),
            None => return Err(Error::ClosureViolation(i, j)),
        }
    }
    Permutation::new(images)
}

/// Node budget for the conjugacy backtracking search. Exceeding it is an
/// error, never a silent "not conjugate".
const CONJUGACY_NODE_BUDGET: u64 = 10_000_000;

/// Searches for a relabeling `r` with `r(a_k(i)) = b_k(r(i))` for all `k`.
///
/// Candidates are pruned by per-point cycle-length profiles (a conjugacy
/// invariant), then forced by propagation: once `r(i)` is chosen, `r` is
/// determined on the whole orbit of `i` under the tuple.
pub fn are_simultaneously_conjugate(
    tuple_a: &[Permutation],
    tuple_b: &[Permutation],
) -> Result<Option<Permutation>> {
    if tuple_a.len() != tuple_b.len() {
        return Err(Error::DegreeMismatch(tuple_a.len(), tuple_b.len()));
    }
    if tuple_a.is_empty() {
        return Ok(Some(Permutation::identity(0)));
    }
    let d = tuple_a[0].degree();
    for g in tuple_a.iter().chain(tuple_b.iter()) {
        if g.degree() != d {
            return Err(Error::DegreeMismatch(d, g.degree()));
        }
    }

    let profile = |tuple: &[Permutation], i: usize| -> Vec<usize> {
        tuple.iter().map(|g| g.orbit_length_of(i)).collect()
    };
    let prof_a: Vec<Vec<usize>> = (0..d).map(|i| profile(tuple_a, i)).collect();
    let prof_b: Vec<Vec<usize>> = (0..d).map(|i| profile(tuple_b, i)).collect();

    let mut budget = CONJUGACY_NODE_BUDGET;
    let mut r = vec![usize::MAX; d];
    let mut r_inv = vec![usize::MAX; d];
    if backtrack(
        tuple_a, tuple_b, &prof_a, &prof_b, &mut r, &mut r_inv, &mut budget,
    )? {
        Ok(Some(Permutation::new(r)?))
    } else {
        Ok(None)
    }
}

fn backtrack(
    a: &[Permutation],
    b: &[Permutation],
    prof_a: &[Vec<usize>],
    prof_b: &[Vec<usize>],
    r: &mut [usize],
    r_inv: &mut [usize],
    budget: &mut u64,
) -> Result<bool> {
    let i = match r.iter().position(|&x| x == usize::MAX) {
        None => return Ok(true),
        Some(i) => i,
    };
    for j in 0..r.len() {
        if r_inv[j] != usize::MAX || prof_a[i] != prof_b[j] {
            continue;
        }
        // Propagate r(i) = j through the tuple action; record assignments
        // for rollback.
        let mut assigned: Vec<(usize, usize)> = Vec::new();
        let mut ok = true;
        let mut queue = vec![(i, j)];
        r[i] = j;
        r_inv[j] = i;
        assigned.push((i, j));
        while let Some((x, y)) = queue.pop() {
            for k in 0..a.len() {
                *budget = budget
                    .checked_sub(1)
                    .ok_or(Error::ConjugacyTimeout)?;
                let xa = a[k].apply(x);
                let yb = b[k].apply(y);
                if r[xa] == usize::MAX && r_inv[yb] == usize::MAX {
                    r[xa] = yb;
                    r_inv[yb] = xa;
                    assigned.push((xa, yb));
                    queue.push((xa, yb));
                } else if r[xa] != yb {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok && backtrack(a, b, prof_a, prof_b, r, r_inv, budget)? {
            return Ok(true);
        }
        for (x, y) in assigned {
            r[x] = usize::MAX;
            r_inv[y] = usize::MAX;
        }
    }
    Ok(false)
}

/// Checks `r(a_k(i)) = b_k(r(i))` for all `k, i` by direct composition.
pub fn verifies_conjugacy(r: &Permutation, tuple_a: &[Permutation], tuple_b: &[Permutation]) -> bool {
    tuple_a.len() == tuple_b.len()
        && tuple_a.iter().zip(tuple_b).all(|(ak, bk)| {
            match (r.compose(ak), bk.compose(r)) {
                (Ok(lhs), Ok(rhs)) => lhs == rhs,
                _ => false,
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_perm(rng: &mut ChaCha8Rng, d: usize) -> Permutation {
        let mut v: Vec<usize> = (0..d).collect();
        v.shuffle(rng);
        Permutation::new(v).unwrap()
    }

    #[test]
    fn compose_identity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_perm(&mut rng, 8);
            let id = Permutation::identity(8);
            assert_eq!(id.compose(&p).unwrap(), p);
            assert_eq!(p.compose(&id).unwrap(), p);
            assert!(p.compose(&p.inverse()).unwrap().is_identity());
        }
    }

    #[test]
    fn compose_matches_per_index_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = random_perm(&mut rng, 8);
            let q = random_perm(&mut rng, 8);
            let r = p.compose(&q).unwrap();
            for i in 0..8 {
                // oracle: evaluate q, then look the result up in p's table
                let step = q.images()[i];
                assert_eq!(r.apply(i), p.images()[step]);
            }
        }
    }

    #[test]
    fn compose_degree_mismatch_is_error() {
        let p = Permutation::identity(3);
        let q = Permutation::identity(4);
        assert!(matches!(p.compose(&q), Err(Error::DegreeMismatch(3, 4))));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3]).is_err());
    }

    #[test]
    fn cycle_types() {
        assert_eq!(
            Permutation::identity(4).cycle_type().lengths(),
            &[1, 1, 1, 1]
        );
        let four_cycle = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        assert_eq!(four_cycle.cycle_type().lengths(), &[4]);
        let t = Permutation::transposition(4, 1, 3);
        assert_eq!(t.cycle_type().lengths(), &[2, 1, 1]);
        assert_eq!(t.cycle_type().to_string(), "{2,1,1}");
    }

    #[test]
    fn cycle_type_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_perm(&mut rng, 12);
            let c = random_perm(&mut rng, 12);
            let conj = c.compose(&p).unwrap().compose(&c.inverse()).unwrap();
            assert_eq!(p.cycle_type(), conj.cycle_type());
        }
    }

    #[test]
    fn orbit_examples() {
        let id = Permutation::identity(3);
        assert_eq!(orbits(3, &[id]).unwrap(), vec![vec![0], vec![1], vec![2]]);
        let a = Permutation::transposition(3, 0, 1);
        let b = Permutation::transposition(3, 1, 2);
        assert_eq!(orbits(3, &[a, b]).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(orbits(3, &[]).unwrap().len(), 3);
    }

    #[test]
    fn orbits_match_union_find_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let d = 15;
            let gens: Vec<Permutation> = (0..3).map(|_| random_perm(&mut rng, d)).collect();
            let blocks = orbits(d, &gens).unwrap();

            // oracle: plain union-find over all (i, g(i)) edges
            let mut parent: Vec<usize> = (0..d).collect();
            fn find(parent: &mut Vec<usize>, x: usize) -> usize {
                if parent[x] != x {
                    let r = find(parent, parent[x]);
                    parent[x] = r;
                }
                parent[x]
            }
            for g in &gens {
                for i in 0..d {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, g.apply(i)));
                    parent[a] = b;
                }
            }
            for block in &blocks {
                let root = find(&mut parent, block[0]);
                for &x in block {
                    assert_eq!(find(&mut parent, x), root);
                }
            }
            let n_roots = (0..d).filter(|&x| find(&mut parent, x) == x).count();
            assert_eq!(blocks.len(), n_roots);
        }
    }

    #[test]
    fn product_action_examples() {
        let id2 = Permutation::identity(2);
        let full: Vec<(usize, usize)> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).collect();
        assert!(product_action(&full, &id2, &id2).unwrap().is_identity());

        let t = Permutation::transposition(2, 0, 1);
        let swap = product_action(&full, &t, &t).unwrap();
        assert_eq!(swap.cycle_type().lengths(), &[2, 2]);
    }

    #[test]
    fn product_action_closure_violation() {
        let t = Permutation::transposition(2, 0, 1);
        let partial = vec![(0, 0)];
        assert!(matches!(
            product_action(&partial, &t, &t),
            Err(Error::ClosureViolation(0, 0))
        ));
    }

    #[test]
    fn product_action_lcm_gcd_law() {
        use num_integer::Integer;
        for e in 1..=6usize {
            for f in 1..=6usize {
                let p = Permutation::new((0..e).map(|i| (i + 1) % e).collect()).unwrap();
                let q = Permutation::new((0..f).map(|j| (j + 1) % f).collect()).unwrap();
                let pairs: Vec<(usize, usize)> =
                    (0..e).flat_map(|i| (0..f).map(move |j| (i, j))).collect();
                let prod = product_action(&pairs, &p, &q).unwrap();
                let blocks = orbits(e * f, &[prod]).unwrap();
                let lcm = e.lcm(&f);
                let gcd = e.gcd(&f);
                assert_eq!(blocks.len(), gcd);
                assert!(blocks.iter().all(|b| b.len() == lcm));
            }
        }
    }

    #[test]
    fn conjugacy_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tuple: Vec<Permutation> = (0..3).map(|_| random_perm(&mut rng, 10)).collect();
        let r = are_simultaneously_conjugate(&tuple, &tuple).unwrap().unwrap();
        assert!(verifies_conjugacy(&r, &tuple, &tuple));

        // distinct cycle-type multisets -> definitely not conjugate
        let a = vec![Permutation::transposition(4, 0, 1)];
        let b = vec![Permutation::new(vec![1, 2, 3, 0]).unwrap()];
        assert!(are_simultaneously_conjugate(&a, &b).unwrap().is_none());
    }

    #[test]
    fn conjugacy_randomized_verified_by_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..100 {
            let d = 2 + (trial % 35);
            let tuple_a: Vec<Permutation> = (0..3).map(|_| random_perm(&mut rng, d)).collect();
            let c = random_perm(&mut rng, d);
            // b_k = c a_k c^{-1}, so c itself is a witness
            let tuple_b: Vec<Permutation> = tuple_a
                .iter()
                .map(|ak| c.compose(ak).unwrap().compose(&c.inverse()).unwrap())
                .collect();
            let r = are_simultaneously_conjugate(&tuple_a, &tuple_b)
                .unwrap()
                .expect("conjugate by construction");
            assert!(verifies_conjugacy(&r, &tuple_a, &tuple_b));
        }
    }
}
