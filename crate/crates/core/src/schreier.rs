//! Homology of the closed cover surface via its Schreier graph, and the
//! multiplication-by-3 torsor cover built from the mod-3 homology cocycle.
//!
//! The Schreier graph of a cover has one vertex per fiber index and one
//! edge per (vertex, generator). Cycles of the graph relative to a BFS
//! spanning tree present H_1 of the punctured cover surface; quotienting by
//! the lifted surface relation at every vertex and by the boundary cycles
//! (one per cycle of each marked-point monodromy) yields H_1 of the closed
//! surface. All linear algebra is over GF(p).
//!
//! `class_of_word` sends any basepoint-stabilizing word in the base
//! generators to its class, which is exactly the cocycle needed to build
//! the (Z/3)^2 translation cover of a genus-1 cover: the subgroup killed by
//! it is the kernel of pi_1 -> H_1(closed surface; Z/3), i.e. the
//! multiplication-by-3 isogeny cover when the cover is an elliptic curve.

use crate::cover::{Cover, CoverMap, Letter};
use crate::error::Error;
use crate::perm::Permutation;
use crate::Result;

/// Row-reduced GF(p) matrix with a recorded pivot structure, supporting
/// reduction of further vectors against it.
struct RowReduced {
    p: u64,
    cols: usize,
    rows: Vec<Vec<u64>>,
    pivot_col_of_row: Vec<usize>,
    is_pivot_col: Vec<bool>,
}

impl RowReduced {
    fn new(p: u64, cols: usize) -> Self {
        RowReduced {
            p,
            cols,
            rows: Vec::new(),
            pivot_col_of_row: Vec::new(),
            is_pivot_col: vec![false; cols],
        }
    }

    fn mod_inv(&self, a: u64) -> u64 {
        // p is prime and a != 0 mod p
        let mut result = 1u64;
        let mut base = a % self.p;
        let mut exp = self.p - 2;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        result
    }

    /// Reduces `v` in place against the current rows; returns the pivot
    /// column if a nonzero remainder was inserted as a new row.
    fn insert(&mut self, mut v: Vec<u64>) -> Option<usize> {
        self.reduce(&mut v);
        let pivot = v.iter().position(|&x| x != 0)?;
        let inv = self.mod_inv(v[pivot]);
        for x in v.iter_mut() {
            *x = *x * inv % self.p;
        }
        // back-substitute into existing rows to keep them fully reduced
        for r in 0..self.rows.len() {
            let c = self.rows[r][pivot];
            if c != 0 {
                for j in 0..self.cols {
                    self.rows[r][j] = (self.rows[r][j] + (self.p - c) * v[j]) % self.p;
                }
            }
        }
        self.rows.push(v);
        self.pivot_col_of_row.push(pivot);
        self.is_pivot_col[pivot] = true;
        Some(pivot)
    }

    fn reduce(&self, v: &mut [u64]) {
        for (r, row) in self.rows.iter().enumerate() {
            let c = v[self.pivot_col_of_row[r]];
            if c != 0 {
                for j in 0..self.cols {
                    v[j] = (v[j] + (self.p - c) * row[j]) % self.p;
                }
            }
        }
    }
}

/// H_1 of the closed cover surface with GF(p) coefficients, presented on
/// the non-tree edges of the Schreier graph.
pub struct SurfaceHomology {
    cover: Cover,
    modulus: u64,
    /// Edge (vertex, generator) -> column index, or usize::MAX for tree
    /// edges (and their reverse traversals).
    edge_col: Vec<Vec<usize>>,
    n_cols: usize,
    relators: RowReduced,
    /// Columns that are free (non-pivot) after reduction; coordinates of a
    /// class are read off at these columns.
    free_cols: Vec<usize>,
    /// BFS tree: for each vertex, the word of generators leading from the
    /// basepoint (the Schreier transversal).
    transversal: Vec<Vec<Letter>>,
    pub rank: usize,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl SurfaceHomology {
    /// Computes the homology presentation. `modulus` must be prime (the
    /// pipeline uses 2 and 3).
    pub fn new(cover: &Cover, modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::UnsupportedModulus(modulus));
        }
        if !cover.is_connected() {
            return Err(Error::Disconnected);
        }
        let d = cover.degree;
        let n_gens = cover.n_generators();
        let gens: Vec<Permutation> = cover.all_generators();

        // BFS spanning tree from basepoint 0, exploring generators in order
        // (deterministic transversal).
        let mut transversal: Vec<Vec<Letter>> = vec![Vec::new(); d];
        let mut visited = vec![false; d];
        visited[0] = true;
        let mut tree_edge = vec![vec![false; n_gens]; d];
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for (k, g) in gens.iter().enumerate() {
                let w = g.apply(v);
                if !visited[w] {
                    visited[w] = true;
                    tree_edge[v][k] = true;
                    let mut word = transversal[v].clone();
                    word.push((k, false));
                    transversal[w] = word;
                    queue.push_back(w);
                }
            }
        }

        // Columns: one per non-tree edge.
        let mut edge_col = vec![vec![usize::MAX; n_gens]; d];
        let mut n_cols = 0;
        for v in 0..d {
            for k in 0..n_gens {
                if !tree_edge[v][k] {
                    edge_col[v][k] = n_cols;
                    n_cols += 1;
                }
            }
        }

        let mut hom = SurfaceHomology {
            cover: cover.clone(),
            modulus,
            edge_col,
            n_cols,
            relators: RowReduced::new(modulus, n_cols),
            free_cols: Vec::new(),
            transversal,
            rank: 0,
        };

        // Relators: the surface relation lifted at every vertex...
        let relation = cover.relation_word();
        for v in 0..d {
            let row = hom.raw_vector_from(v, &relation)?;
            hom.relators.insert(row);
        }
        // ...and one boundary cycle per cycle of each marked-point loop:
        // from a cycle representative v, the path C_k^len(cycle) closes up.
        let offset = 2 * cover.handles.len();
        for (j, c) in cover.loops.iter().enumerate() {
            for cyc in c.cycles() {
                let word: Vec<Letter> = vec![(offset + j, false); cyc.len()];
                let row = hom.raw_vector_from(cyc[0], &word)?;
                hom.relators.insert(row);
            }
        }

        hom.free_cols = (0..n_cols)
            .filter(|&c| !hom.relators.is_pivot_col[c])
            .collect();
        hom.rank = hom.free_cols.len();

        let genus = cover.genus()?;
        if hom.rank != 2 * genus {
            return Err(Error::HomologyRankMismatch {
                rank: hom.rank,
                expected: 2 * genus,
            });
        }
        Ok(hom)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Edge vector (over edge columns) of the closed path obtained by
    /// tracing `word` from fiber vertex `start`. The path must close up.
    fn raw_vector_from(&self, start: usize, word: &[Letter]) -> Result<Vec<u64>> {
        let mut v = vec![0u64; self.n_cols];
        let mut at = start;
        let p = self.modulus;
        for &(k, inv) in word {
            let g = self.cover.generator(k);
            if !inv {
                let col = self.edge_col[at][k];
                if col != usize::MAX {
                    v[col] = (v[col] + 1) % p;
                }
                at = g.apply(at);
            } else {
                let from = g.inverse().apply(at);
                let col = self.edge_col[from][k];
                if col != usize::MAX {
                    v[col] = (v[col] + p - 1) % p;
                }
                at = from;
            }
        }
        if at != start {
            return Err(Error::Internal(format!(
                "word does not close up: started at {start}, ended at {at}"
            )));
        }
        Ok(v)
    }

    /// Homology class of a basepoint-stabilizing word, as coordinates at
    /// the free columns. Tree-edge contributions vanish by construction, so
    /// the raw edge vector reduced by the relator rows is the class.
    pub fn class_of_word(&self, word: &[Letter]) -> Result<Vec<u64>> {
        let mut v = self.raw_vector_from(0, word)?;
        self.relators.reduce(&mut v);
        Ok(self.free_cols.iter().map(|&c| v[c]).collect())
    }

    /// The Schreier transversal word for fiber vertex `v` (path from the
    /// basepoint along the BFS tree).
    pub fn transversal_word(&self, v: usize) -> &[Letter] {
        &self.transversal[v]
    }
}

/// Inverts a word: reverses letter order and flips signs.
fn invert_word(word: &[Letter]) -> Vec<Letter> {
    word.iter().rev().map(|&(k, inv)| (k, !inv)).collect()
}

/// Builds the translation cover of a connected genus-1 cover `e` whose
/// fiber over the `basepoint` sheet is (Z/3)^2: the kernel of
/// pi_1 -> H_1(closed surface; Z/3) acting on (e-fiber) x (Z/3)^2.
///
/// Each generator g sends (x, t) to (g(x), t + h(u)) where u is the
/// tree-conjugated loop `transversal(x) . g . transversal(g(x))^{-1}` and h
/// is the mod-3 homology class. The result is a degree-9·deg(e) cover with
/// an unramified projection onto `e`.
pub fn mul3_torsor_cover(e: &Cover, basepoint: usize) -> Result<(Cover, CoverMap)> {
    if e.genus()? != 1 {
        return Err(Error::InvalidCover(format!(
            "multiplication-by-3 torsor requires a genus-1 cover, got genus {}",
            e.genus()?
        )));
    }
    if basepoint >= e.degree {
        return Err(Error::IndexOutOfRange(basepoint, e.degree));
    }
    // Reindex so the chosen basepoint is sheet 0 (the homology transversal
    // is rooted there).
    let reindexed;
    let e = if basepoint == 0 {
        e
    } else {
        let mut relabel: Vec<usize> = (0..e.degree).collect();
        relabel.swap(0, basepoint);
        let r = Permutation::new(relabel)?;
        let conj = |g: &Permutation| -> Result<Permutation> {
            r.compose(g)?.compose(&r.inverse())
        };
        let handles = e
            .handles
            .iter()
            .map(|(a, b)| Ok((conj(a)?, conj(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let loops = e.loops.iter().map(|c| conj(c)).collect::<Result<Vec<_>>>()?;
        reindexed = Cover::new(e.base.clone(), e.degree, handles, loops)?;
        &reindexed
    };

    let hom = SurfaceHomology::new(e, 3)?;
    debug_assert_eq!(hom.rank, 2);

    let d = e.degree;
    let n_gens = e.n_generators();
    // fiber index: x * 9 + (3*t0 + t1) for translation (t0, t1) in (Z/3)^2
    let fiber = |x: usize, t0: u64, t1: u64| -> usize { x * 9 + (3 * t0 + t1) as usize };

    let mut new_gens: Vec<Permutation> = Vec::with_capacity(n_gens);
    for k in 0..n_gens {
        let g = e.generator(k);
        let mut images = vec![0usize; 9 * d];
        for x in 0..d {
            let gx = g.apply(x);
            let mut word: Vec<Letter> = hom.transversal_word(x).to_vec();
            word.push((k, false));
            word.extend(invert_word(hom.transversal_word(gx)));
            let h = hom.class_of_word(&word)?;
            for t0 in 0..3u64 {
                for t1 in 0..3u64 {
                    images[fiber(x, t0, t1)] =
                        fiber(gx, (t0 + h[0]) % 3, (t1 + h[1]) % 3);
                }
            }
        }
        new_gens.push(Permutation::new(images)?);
    }

    let g = e.handles.len();
    let handles: Vec<(Permutation, Permutation)> = (0..g)
        .map(|i| (new_gens[2 * i].clone(), new_gens[2 * i + 1].clone()))
        .collect();
    let loops: Vec<Permutation> = new_gens[2 * g..].to_vec();
    let cover = Cover::new(e.base.clone(), 9 * d, handles, loops)?;
    let fiber_map: Vec<usize> = (0..9 * d).map(|i| i / 9).collect();
    let proj = CoverMap::new(cover.clone(), e.clone(), fiber_map)?;
    Ok((cover, proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{is_etale, MarkedBase};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("s{i}")).collect()
    }

    fn y_cover() -> Cover {
        let t = Permutation::transposition(2, 0, 1);
        Cover::new(MarkedBase::line(labels(6)).unwrap(), 2, vec![], vec![t; 6]).unwrap()
    }

    fn e_cover() -> Cover {
        let t = Permutation::transposition(2, 0, 1);
        let id = Permutation::identity(2);
        Cover::new(
            MarkedBase::line(labels(6)).unwrap(),
            2,
            vec![],
            vec![t.clone(), t.clone(), t.clone(), t, id.clone(), id],
        )
        .unwrap()
    }

    #[test]
    fn homology_ranks() {
        // genus-1 double cover mod 3 -> rank 2
        assert_eq!(SurfaceHomology::new(&e_cover(), 3).unwrap().rank, 2);
        // genus-2 double cover mod 2 -> rank 4
        assert_eq!(SurfaceHomology::new(&y_cover(), 2).unwrap().rank, 4);
        // degree-1 cover of the line -> rank 0
        let triv = Cover::trivial(MarkedBase::line(labels(3)).unwrap());
        assert_eq!(SurfaceHomology::new(&triv, 3).unwrap().rank, 0);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(matches!(
            SurfaceHomology::new(&e_cover(), 6),
            Err(Error::UnsupportedModulus(6))
        ));
    }

    #[test]
    fn boundary_loops_are_nullhomologous() {
        let e = e_cover();
        let hom = SurfaceHomology::new(&e, 3).unwrap();
        // the squared loop around s1 stabilizes sheet 0 and bounds
        let word = vec![(0usize, false); 2];
        assert_eq!(hom.class_of_word(&word).unwrap(), vec![0, 0]);
        // a loop around the unramified point s5 lifts closed and bounds
        let word = vec![(4usize, false)];
        assert_eq!(hom.class_of_word(&word).unwrap(), vec![0, 0]);
    }

    #[test]
    fn cocycle_is_additive_on_concatenation() {
        let e = e_cover();
        let hom = SurfaceHomology::new(&e, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // random stabilizing words: squares of single loops concatenated
        let mut words: Vec<Vec<Letter>> = Vec::new();
        for _ in 0..10 {
            let mut w = Vec::new();
            for _ in 0..3 {
                let k = rng.random_range(0..6);
                w.push((k, false));
                w.push((k, false));
            }
            words.push(w);
        }
        for w1 in &words {
            for w2 in &words {
                let mut cat = w1.clone();
                cat.extend_from_slice(w2);
                let c1 = hom.class_of_word(w1).unwrap();
                let c2 = hom.class_of_word(w2).unwrap();
                let cc = hom.class_of_word(&cat).unwrap();
                for i in 0..c1.len() {
                    assert_eq!((c1[i] + c2[i]) % 3, cc[i]);
                }
            }
        }
    }

    #[test]
    fn mul3_cover_is_degree_18_etale_genus_1() {
        let e = e_cover();
        let (cover, proj) = mul3_torsor_cover(&e, 0).unwrap();
        assert_eq!(cover.degree, 18);
        assert!(cover.validate().is_ok());
        assert!(is_etale(&proj).unwrap());
        assert!(cover.is_connected());
        assert_eq!(cover.genus().unwrap(), 1);
        // the composite to the line is branched (order 2) over s1..s4 and
        // unramified over s5, s6
        for j in 0..4 {
            assert_eq!(cover.profile(j).unwrap().lengths(), &[2; 9]);
        }
        for j in 4..6 {
            assert!(cover.profile(j).unwrap().is_trivial());
        }
    }

    #[test]
    fn mul3_cover_basepoint_choice_gives_conjugate_covers() {
        let e = e_cover();
        let (c0, _) = mul3_torsor_cover(&e, 0).unwrap();
        let (c1, _) = mul3_torsor_cover(&e, 1).unwrap();
        let r = crate::perm::are_simultaneously_conjugate(
            &c0.all_generators(),
            &c1.all_generators(),
        )
        .unwrap();
        assert!(r.is_some());
    }

    #[test]
    fn rejects_non_genus_1_input() {
        assert!(mul3_torsor_cover(&y_cover(), 0).is_err());
    }
}
