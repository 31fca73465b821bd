//! Numeric monodromy engine.
//!
//! A *sheet system* describes a finite branched cover of the line by
//! giving, for any regular base value, the full fiber as a list of
//! coordinate vectors, together with a Newton refinement step. Monodromy
//! permutations are obtained by tracking the whole fiber along polygonal
//! loops and matching the transported fiber against the starting one.
//!
//! Loop scheduling uses a rail layout. Candidates (branch points plus
//! known coordinate-degeneration points) are separated along a rotated
//! real axis; the rotation angle is chosen among 137 equispaced values to
//! maximize the minimal gap `delta` between projections. Every loop then
//! consists of a horizontal rail segment above all candidates, a vertical
//! drop to just above its target, and a 24-gon circle of radius
//! `delta / 3` traversed counterclockwise. Any point of the path stays at
//! planar distance at least `2 delta / 3` from every non-target
//! candidate and at least `delta / 2` from the rail's own clearance
//! band, so tracking never approaches a singular fiber.
//!
//! Correctness controls baked into the tracker:
//!
//! * every accepted step moves each sheet by less than a third of the
//!   minimal pairwise separation of the previous fiber, which pins the
//!   sheet identity unconditionally;
//! * every accepted fiber satisfies the defining equations to a relative
//!   residual below `1e-(prec/4)`;
//! * steps that fail are bisected, with a bounded depth; a leg that
//!   cannot be completed reports a tracking failure so the caller can
//!   raise the working precision and rerun deterministically.
//!
//! Sheet states are compared through a list of comparison components.
//! Each component is a point of the Riemann sphere in homogeneous form
//! `(numerator, denominator)`, and the state distance is the sup of the
//! chordal distances of matching components. Raw coordinates are always
//! included. Stages whose auxiliary coordinates have poles at encircled
//! candidates also expose pole-normalized ratios (an ordinate divided by
//! a shifted power of its abscissa), so that every pair of sheets stays
//! separated near the pole, at worst linearly in the loop radius, while
//! the coordinates passing near the pole move slowly in the metric
//! instead of demanding microscopic steps. The one-third rule below is a
//! pigeonhole bound valid in any metric, so the component choice affects
//! efficiency, never the correctness of the matching.

use num_rational::BigRational;
use rayon::prelude::*;
use rug::Float;

use crate::cplx::{lex_cmp, Cplx};
use crate::elliptic::{CurvePoint, QuarticModel};
use crate::error::Error;
use crate::perm::Permutation;
use crate::poly::Poly;
use crate::scalar::Field;
use crate::Result;

/// Candidates closer than this fraction of the largest candidate
/// magnitude are refused: the plan geometry is laid out in doubles, so
/// gaps below roughly `eps * magnitude` are not resolvable, and this
/// keeps a six-decade safety margin above that floor.
pub const MIN_CANDIDATE_SEPARATION_REL: f64 = 1e-10;
/// Minimal acceptable axis gap after the rotation search, as a fraction
/// of the largest candidate magnitude.
pub const MIN_AXIS_GAP_REL: f64 = 1e-12;
/// Number of rotation angles tried (multiples of pi / 137).
pub const ROTATION_STEPS: usize = 137;
/// Chords approximating each loop circle.
pub const CIRCLE_SEGMENTS: usize = 24;
/// Circle radius as a fraction of the axis gap.
pub const CIRCLE_RADIUS_NUM: f64 = 1.0;
pub const CIRCLE_RADIUS_DEN: f64 = 3.0;
/// A sheet may move at most this fraction of the fiber separation per
/// accepted step.
pub const MOVE_FRACTION_DEN: f64 = 3.0;
/// Maximum bisection depth per waypoint segment.
pub const MAX_BISECTION_DEPTH: u32 = 30;
/// Newton iteration cap.
const NEWTON_MAX_ITERS: usize = 80;

/// Binary shift giving the `1e-(prec/4)` relative residual bound:
/// `prec / 4 * log2(10)` bits.
pub(crate) fn residual_shift(prec: u32) -> u32 {
    ((prec as u64 * 83_048) / 100_000) as u32
}

/// Polygonal loop around one candidate, anchored at the common base
/// point (first and last waypoint).
#[derive(Clone, Debug)]
pub struct LoopPlan {
    /// Index into the candidate list handed to the planner.
    pub candidate: usize,
    pub waypoints: Vec<Cplx>,
}

/// Full loop schedule for one plane of candidates.
#[derive(Clone, Debug)]
pub struct RailPlan {
    pub base: Cplx,
    /// Chosen rotation: angle `rotation_index * pi / ROTATION_STEPS`.
    pub rotation_index: usize,
    /// Minimal gap between rotated real parts of distinct candidates.
    pub axis_gap: f64,
    /// Lower bound for the planar distance from any path point to any
    /// non-target candidate.
    pub clearance: f64,
    /// Candidate indices ordered by rotated real part; legs are listed
    /// in this order and their product in this order is contractible
    /// whenever the candidates cover all finite branch points and
    /// infinity is unbranched.
    pub order: Vec<usize>,
    pub legs: Vec<LoopPlan>,
}

fn rotated_parts(candidates: &[(f64, f64)], k: usize) -> Vec<(f64, f64)> {
    let phi = std::f64::consts::PI * (k as f64) / (ROTATION_STEPS as f64);
    let (s, c) = phi.sin_cos();
    // Multiply by exp(-i phi).
    candidates
        .iter()
        .map(|&(x, y)| (x * c + y * s, y * c - x * s))
        .collect()
}

fn min_gap(parts: &[(f64, f64)]) -> f64 {
    let mut xs: Vec<f64> = parts.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Builds the rail schedule for a candidate set. Fails with a degenerate
/// input error if candidates collide or cannot be separated along any of
/// the tried axes.
pub fn plan_rail(candidates: &[Cplx], prec: u32) -> Result<RailPlan> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidates to encircle".into()));
    }
    let pts: Vec<(f64, f64)> = candidates.iter().map(Cplx::to_f64_pair).collect();
    for p in &pts {
        if !p.0.is_finite() || !p.1.is_finite() {
            return Err(Error::DegenerateInput(
                "candidate overflows the double range".into(),
            ));
        }
    }
    let mut scale = 0.0f64;
    for p in &pts {
        scale = scale.max(p.0.hypot(p.1));
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
            if d < MIN_CANDIDATE_SEPARATION_REL * scale {
                return Err(Error::DegenerateInput(format!(
                    "candidates {i} and {j} are only {d:.3e} apart (scale {scale:.3e})"
                )));
            }
        }
    }
    let (mut best_k, mut best_gap) = (0usize, f64::NEG_INFINITY);
    for k in 0..ROTATION_STEPS {
        let gap = if pts.len() == 1 {
            1.0
        } else {
            min_gap(&rotated_parts(&pts, k))
        };
        if gap > best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    if best_gap < MIN_AXIS_GAP_REL * scale {
        return Err(Error::DegenerateInput(format!(
            "no rotation separates the candidates (best gap {best_gap:.3e}, scale {scale:.3e})"
        )));
    }
    let rot = rotated_parts(&pts, best_k);
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| rot[a].0.partial_cmp(&rot[b].0).unwrap());
    let x_min = rot.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = rot.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_max = rot.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = x_max - x_min;
    let margin = 0.5 * spread.max(1.0);
    let rail_height = y_max + margin;
    let radius = best_gap * CIRCLE_RADIUS_NUM / CIRCLE_RADIUS_DEN;
    let clearance = (2.0 * best_gap / 3.0).min(margin);

    // Waypoints are laid out in rotated coordinates and mapped back by
    // the inverse rotation, all at the working precision.
    let unit = Cplx::from_polar_pi_fraction(prec, best_k as i64, ROTATION_STEPS as i64);
    let back = |x: f64, y: f64| -> Cplx { unit.mul(&Cplx::from_f64(prec, x, y)) };
    let base = back(x_max + margin, rail_height);
    let mut legs = Vec::with_capacity(order.len());
    for &idx in &order {
        let (cx, cy) = rot[idx];
        let mut w = Vec::with_capacity(CIRCLE_SEGMENTS + 5);
        w.push(base.clone());
        w.push(back(cx, rail_height));
        w.push(back(cx, cy + radius));
        for m in 1..=CIRCLE_SEGMENTS {
            let theta =
                std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * (m as f64) / (CIRCLE_SEGMENTS as f64);
            w.push(back(cx + radius * theta.cos(), cy + radius * theta.sin()));
        }
        w.push(back(cx, rail_height));
        w.push(base.clone());
        legs.push(LoopPlan {
            candidate: idx,
            waypoints: w,
        });
    }
    Ok(RailPlan {
        base,
        rotation_index: best_k,
        axis_gap: best_gap,
        clearance,
        order,
        legs,
    })
}

/// One comparison component of a sheet state: a point of the Riemann
/// sphere in homogeneous form `(numerator, denominator)`.
pub type MetricComponent = (Cplx, Cplx);

/// Family of fibers over one coordinate plane.
pub trait SheetSystem: Sync {
    fn degree(&self) -> usize;
    /// Coordinates per sheet.
    fn dim(&self) -> usize;
    /// Working precision in bits.
    fn prec(&self) -> u32;
    /// Full fiber at a regular value, in the system's canonical sheet
    /// order.
    fn solve(&self, z: &Cplx) -> Result<Vec<Vec<Cplx>>>;
    /// Newton refinement of one sheet at `z` starting from `guess`;
    /// `None` when the iteration does not converge cleanly.
    fn refine(&self, z: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>>;
    /// Defining-equation residual test at relative tolerance
    /// `1e-(prec/4)`.
    fn residual_ok(&self, z: &Cplx, state: &[Cplx]) -> bool;
    /// Comparison components of a state. The default (each coordinate
    /// over 1) is correct whenever all coordinates stay bounded along
    /// tracked paths; systems with coordinate poles near encircled
    /// candidates must add normalized ratios that keep every sheet pair
    /// separated there. A component's numerator and denominator must
    /// never vanish simultaneously on a tracked state.
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        state.iter().map(|c| (c.clone(), Cplx::one())).collect()
    }
}

/// Chordal distance between two homogeneous sphere points: the Euclidean
/// distance of their images on a sphere of diameter 1.
fn sphere_dist(a: &MetricComponent, b: &MetricComponent) -> Float {
    let cross = a.0.mul(&b.1).sub(&b.0.mul(&a.1)).abs();
    let na = a.0.norm_sqr() + a.1.norm_sqr();
    let nb = b.0.norm_sqr() + b.1.norm_sqr();
    cross / (na * nb).sqrt()
}

/// Sup over comparison components of the chordal distance.
fn state_dist(sys: &dyn SheetSystem, a: &[Cplx], b: &[Cplx]) -> Float {
    let ca = sys.metric_components(a);
    let cb = sys.metric_components(b);
    let mut best = Float::with_val(a[0].prec().max(64), 0);
    for (x, y) in ca.iter().zip(&cb) {
        let d = sphere_dist(x, y);
        if d > best {
            best = d;
        }
    }
    best
}

fn min_pairwise_separation(sys: &dyn SheetSystem, fiber: &[Vec<Cplx>]) -> Float {
    let prec = fiber[0][0].prec().max(64);
    let comps: Vec<Vec<MetricComponent>> = fiber
        .iter()
        .map(|state| sys.metric_components(state))
        .collect();
    let mut best: Option<Float> = None;
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            // Sup over components; a pair is abandoned as soon as one
            // component already exceeds the current minimum.
            let mut pair = Float::with_val(prec, 0);
            let mut dominated = false;
            for (x, y) in comps[i].iter().zip(&comps[j]) {
                let d = sphere_dist(x, y);
                if let Some(b) = &best {
                    if &d >= b {
                        dominated = true;
                        break;
                    }
                }
                if d > pair {
                    pair = d;
                }
            }
            if !dominated && best.as_ref().map_or(true, |b| &pair < b) {
                best = Some(pair);
            }
        }
    }
    best.unwrap_or_else(|| Float::with_val(prec, f64::INFINITY))
}

/// Validated fiber at a base value: counts sheets, checks residuals and
/// pairwise separation.
pub fn solve_fiber(sys: &dyn SheetSystem, z: &Cplx) -> Result<Vec<Vec<Cplx>>> {
    let fiber = sys.solve(z)?;
    if fiber.len() != sys.degree() {
        return Err(Error::TrackingFailure(format!(
            "fiber has {} sheets, expected {}",
            fiber.len(),
            sys.degree()
        )));
    }
    for state in &fiber {
        if state.len() != sys.dim() || state.iter().any(|c| !c.is_finite()) {
            return Err(Error::TrackingFailure(
                "fiber state is malformed or non-finite".into(),
            ));
        }
        if !sys.residual_ok(z, state) {
            return Err(Error::TrackingFailure(
                "fiber state fails the residual test".into(),
            ));
        }
    }
    let sep = min_pairwise_separation(sys, &fiber);
    if !(sep.to_f64() > 0.0) {
        return Err(Error::TrackingFailure(
            "fiber sheets are not separated at the base point".into(),
        ));
    }
    Ok(fiber)
}

/// One tentative transport of the whole fiber to `z2`. Soft failure
/// (`None`) when any sheet refuses to converge, fails residuals, or
/// moves farther than both the supplied allowance and a third of the
/// destination fiber's own separation: a sheet can stay inside the
/// start allowance yet land in a wrong basin when the destination fiber
/// is tighter than the start fiber, so the bound is applied at both
/// ends.
fn try_step(
    sys: &dyn SheetSystem,
    fiber: &[Vec<Cplx>],
    allowance: &Float,
    z2: &Cplx,
) -> Option<Vec<Vec<Cplx>>> {
    let mut next = Vec::with_capacity(fiber.len());
    let mut moves = Vec::with_capacity(fiber.len());
    for state in fiber {
        let refined = sys.refine(z2, state)?;
        if refined.len() != state.len() || refined.iter().any(|c| !c.is_finite()) {
            return None;
        }
        let moved = state_dist(sys, state, &refined);
        if &moved >= allowance {
            return None;
        }
        if !sys.residual_ok(z2, &refined) {
            return None;
        }
        moves.push(moved);
        next.push(refined);
    }
    let sep_new = min_pairwise_separation(sys, &next);
    if !(sep_new.to_f64() > 0.0) {
        return None;
    }
    let bound = sep_new / MOVE_FRACTION_DEN;
    if moves.iter().any(|m| m >= &bound) {
        return None;
    }
    Some(next)
}

/// Transports `fiber` along the polygonal path, bisecting segments as
/// needed. Returns the number of accepted steps.
pub fn advance_path(
    sys: &dyn SheetSystem,
    fiber: &mut Vec<Vec<Cplx>>,
    waypoints: &[Cplx],
) -> Result<usize> {
    let half = Cplx::from_f64(64, 0.5, 0.0);
    let mut steps = 0usize;
    let mut allowance = min_pairwise_separation(sys, fiber) / MOVE_FRACTION_DEN;
    for seg in waypoints.windows(2) {
        let mut stack: Vec<(Cplx, Cplx, u32)> = vec![(seg[0].clone(), seg[1].clone(), 0)];
        while let Some((a, b, depth)) = stack.pop() {
            match try_step(sys, fiber, &allowance, &b) {
                Some(next) => {
                    *fiber = next;
                    steps += 1;
                    allowance = min_pairwise_separation(sys, fiber) / MOVE_FRACTION_DEN;
                }
                None => {
                    if depth >= MAX_BISECTION_DEPTH {
                        return Err(Error::TrackingFailure(format!(
                            "segment refused to converge after {MAX_BISECTION_DEPTH} bisections \
                             near ({:.6}, {:.6})",
                            b.re().to_f64(),
                            b.im().to_f64()
                        )));
                    }
                    let mid = a.add(&b).mul(&half);
                    stack.push((mid.clone(), b, depth + 1));
                    stack.push((a, mid, depth + 1));
                }
            }
        }
    }
    Ok(steps)
}

/// Tracks the fiber around one closed polygonal loop and matches the
/// transported states back to the starting fiber. Returns the monodromy
/// permutation (sheet `i` ends on sheet `perm(i)`) and the number of
/// accepted steps.
pub fn track_loop(
    sys: &dyn SheetSystem,
    base_fiber: &[Vec<Cplx>],
    waypoints: &[Cplx],
) -> Result<(Permutation, usize)> {
    if waypoints.len() < 2 || base_fiber.is_empty() {
        return Err(Error::InvalidConfig("empty tracking request".into()));
    }
    let mut fiber: Vec<Vec<Cplx>> = base_fiber.to_vec();
    let steps = advance_path(sys, &mut fiber, waypoints)?;
    let allowance = min_pairwise_separation(sys, base_fiber) / MOVE_FRACTION_DEN;
    let base_comps: Vec<Vec<MetricComponent>> = base_fiber
        .iter()
        .map(|state| sys.metric_components(state))
        .collect();
    let mut images = vec![usize::MAX; fiber.len()];
    let mut taken = vec![false; fiber.len()];
    for (i, end_state) in fiber.iter().enumerate() {
        let end_comps = sys.metric_components(end_state);
        let mut best: Option<(usize, Float)> = None;
        for (j, start_comps) in base_comps.iter().enumerate() {
            let mut d = Float::with_val(end_state[0].prec().max(64), 0);
            for (x, y) in end_comps.iter().zip(start_comps) {
                let c = sphere_dist(x, y);
                if c > d {
                    d = c;
                }
            }
            if best.as_ref().map_or(true, |(_, b)| &d < b) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("nonempty fiber");
        if d >= allowance || taken[j] {
            return Err(Error::TrackingFailure(
                "transported fiber does not match the base fiber cleanly".into(),
            ));
        }
        taken[j] = true;
        images[i] = j;
    }
    Ok((Permutation::new(images)?, steps))
}

/// Monodromy of every leg of a rail plan, legs tracked independently
/// (in parallel) from a shared validated base fiber.
#[derive(Clone, Debug)]
pub struct MonodromyOutcome {
    /// One permutation per leg, in plan (rail) order.
    pub perms: Vec<Permutation>,
    /// Accepted steps per leg.
    pub substeps: Vec<usize>,
    /// Minimal pairwise sheet separation at the base point.
    pub base_separation: f64,
}

impl MonodromyOutcome {
    /// Left-to-right product of the leg permutations (first leg acts
    /// first).
    pub fn product(&self) -> Result<Permutation> {
        let degree = self
            .perms
            .first()
            .map(Permutation::degree)
            .ok_or_else(|| Error::InvalidConfig("no legs tracked".into()))?;
        let mut acc = Permutation::identity(degree);
        for p in &self.perms {
            acc = p.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// Tracks every leg of the plan. When `require_full_relation` is set the
/// left-to-right product of all legs must be the identity (valid when
/// the candidate list covers all finite branch points and infinity is
/// unbranched in the tracked plane).
pub fn monodromy(
    sys: &dyn SheetSystem,
    plan: &RailPlan,
    require_full_relation: bool,
) -> Result<MonodromyOutcome> {
    let base_fiber = solve_fiber(sys, &plan.base)?;
    let tracked: Result<Vec<(Permutation, usize)>> = plan
        .legs
        .par_iter()
        .map(|leg| track_loop(sys, &base_fiber, &leg.waypoints))
        .collect();
    let tracked = tracked?;
    let outcome = MonodromyOutcome {
        perms: tracked.iter().map(|(p, _)| p.clone()).collect(),
        substeps: tracked.iter().map(|(_, s)| *s).collect(),
        base_separation: min_pairwise_separation(sys, &base_fiber).to_f64(),
    };
    if require_full_relation && !outcome.product()?.is_identity() {
        return Err(Error::TrackingFailure(
            "product of all loops is not the identity".into(),
        ));
    }
    Ok(outcome)
}

fn newton<F>(f_df: F, guess: &Cplx, prec: u32) -> Option<Cplx>
where
    F: Fn(&Cplx) -> (Cplx, Cplx),
{
    let mut x = guess.with_prec(prec);
    let shift = prec.saturating_sub(12);
    let mut last: Option<Float> = None;
    for _ in 0..NEWTON_MAX_ITERS {
        let (f, df) = f_df(&x);
        if df.is_zero() {
            return None;
        }
        let step = f.div(&df);
        if !step.is_finite() {
            return None;
        }
        x = x.sub(&step);
        if !x.is_finite() {
            return None;
        }
        let mag = step.abs();
        let scale = Float::with_val(prec, 1) + x.abs();
        let tol = scale.clone() >> shift;
        if mag <= tol {
            return Some(x);
        }
        if let Some(prev) = &last {
            let grew = mag.clone() > prev.clone() * 4u32;
            let big = mag.clone() > scale / 4u32;
            if grew && big {
                return None;
            }
        }
        last = Some(mag);
    }
    None
}

/// Branch-continuous square root: solves `x^2 = target` near `guess`.
fn newton_sqrt(target: &Cplx, guess: &Cplx, prec: u32) -> Option<Cplx> {
    newton(
        |x| (x.mul(x).sub(target), x.add(x)),
        guess,
        prec,
    )
}

fn rel_residual_ok(lhs: &Cplx, rhs: &Cplx, prec: u32) -> bool {
    let shift = residual_shift(prec);
    let diff = lhs.sub(rhs).abs();
    let mut scale = Float::with_val(prec, 1);
    let la = lhs.abs();
    let ra = rhs.abs();
    if la > scale {
        scale = la;
    }
    if ra > scale {
        scale = ra;
    }
    diff <= (scale >> shift)
}

/// Shared numeric data for all stages of one configuration, at one
/// working precision.
pub struct NumericContext {
    prec: u32,
    /// Branch abscissas of the genus-2 curve.
    pub s: Vec<Cplx>,
    /// Sextic with the six branch abscissas as roots.
    pub p6: Poly<Cplx>,
    /// Quartic with the first four branch abscissas as roots.
    pub q4: Poly<Cplx>,
    /// Marked double cover `w^2 = q4` at `(s5, w5)` and its Weierstrass
    /// model.
    pub model: QuarticModel<Cplx>,
    pub psi2: Poly<Cplx>,
    pub psi3: Poly<Cplx>,
    pub phi3: Poly<Cplx>,
    pub g3: Poly<Cplx>,
    psi3_d: Poly<Cplx>,
    phi3_d: Poly<Cplx>,
    /// Integer at distance >= 1/2 from every root of `psi2` and `psi3`:
    /// `(u - shift)^2` never vanishes together with a torsion ordinate,
    /// so it is a valid normalizing denominator for metric components.
    pub metric_shift_u: Cplx,
    /// Integer at distance >= 1/2 from every branch abscissa; same role
    /// on the t-line.
    pub metric_shift_t: Cplx,
}

/// Smallest integer at least `3 + 3 max|avoid|` whose distance to every
/// avoided point is at least 1/2. Exists within `avoid.len() + 1`
/// consecutive integers because each avoided point disqualifies at most
/// one of them.
fn integer_shift(prec: u32, avoid: &[Cplx]) -> Cplx {
    let max_abs = avoid
        .iter()
        .map(|c| c.abs_f64())
        .fold(0.0f64, f64::max);
    let start = (3.0 + 3.0 * max_abs).ceil() as i64;
    for k in start..=start + avoid.len() as i64 {
        let kc = Cplx::from_i64(k).with_prec(prec);
        if avoid.iter().all(|r| kc.sub(r).abs_f64() >= 0.5) {
            return kc;
        }
    }
    Cplx::from_i64(start).with_prec(prec)
}

impl NumericContext {
    pub fn new(branch_points: &[BigRational], w5_plus: bool, prec: u32) -> Result<Self> {
        if branch_points.len() != 6 {
            return Err(Error::InvalidConfig(format!(
                "expected 6 branch abscissas, got {}",
                branch_points.len()
            )));
        }
        let s: Vec<Cplx> = branch_points
            .iter()
            .map(|r| Cplx::from_rational(prec, r))
            .collect();
        let q4 = Poly::from_roots(&s[0..4]);
        let p6 = Poly::from_roots(&s);
        let w5_abs = q4.eval(&s[4]).sqrt();
        let w5 = if w5_plus { w5_abs } else { w5_abs.neg() };
        if w5.is_zero() {
            return Err(Error::DegenerateInput(
                "marked abscissa lies on the branch locus".into(),
            ));
        }
        let model = QuarticModel::new_unchecked(q4.clone(), s[4].clone(), w5)?;
        let curve = model.weierstrass().clone();
        let psi2 = curve.two_torsion_cubic();
        let psi3 = curve.three_torsion_quartic();
        let phi3 = curve.triplication_numerator();
        let g3 = curve.triplication_ordinate_factor();
        let mut torsion_abscissas = crate::cplx::roots(&psi2)?;
        torsion_abscissas.extend(crate::cplx::roots(&psi3)?);
        let metric_shift_u = integer_shift(prec, &torsion_abscissas);
        let metric_shift_t = integer_shift(prec, &s);
        Ok(NumericContext {
            prec,
            s,
            p6,
            q4,
            model,
            psi3_d: psi3.derivative(),
            phi3_d: phi3.derivative(),
            psi2,
            psi3,
            phi3,
            g3,
            metric_shift_u,
            metric_shift_t,
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Both coordinates of the Weierstrass image of a point of the
    /// marked double cover; fails off the finite chart.
    fn forward_xy(&self, t: &Cplx, w: &Cplx) -> Option<(Cplx, Cplx)> {
        match self.model.forward(t, w) {
            CurvePoint::Affine { x, y } => Some((x, y)),
            CurvePoint::Infinity => None,
        }
    }

    /// Newton step for the degree-9 triplication preimage equation
    /// `phi3(u) - x * psi3(u)^2 = 0`.
    fn refine_preimage_u(&self, x: &Cplx, guess: &Cplx) -> Option<Cplx> {
        newton(
            |u| {
                let psi = self.psi3.eval(u);
                let f = self.phi3.eval(u).sub(&x.mul(&psi.mul(&psi)));
                let df = self
                    .phi3_d
                    .eval(u)
                    .sub(&x.mul(&Cplx::from_i64(2).mul(&psi).mul(&self.psi3_d.eval(u))));
                (f, df)
            },
            guess,
            self.prec,
        )
    }

    /// Monic degree-9 polynomial whose roots are the abscissas of the
    /// nine triplication preimages of a point with abscissa `x`.
    pub fn preimage_polynomial(&self, x: &Cplx) -> Poly<Cplx> {
        let psi_sq = self.psi3.mul(&self.psi3);
        self.phi3.sub(&psi_sq.scale(x))
    }

    /// Ordinate of the triplication preimage candidate `(u, v)`: given
    /// the target ordinate `y`, returns `v` with
    /// `v * g3(u) / psi3(u)^3 = y`, or `None` when the division is not
    /// decisive.
    fn preimage_v_from_y(&self, u: &Cplx, y: &Cplx) -> Option<Cplx> {
        let g = self.g3.eval(u);
        if g.is_zero() {
            return None;
        }
        let psi = self.psi3.eval(u);
        let v = y.mul(&psi.mul(&psi).mul(&psi)).div(&g);
        if !v.is_finite() {
            return None;
        }
        // Consistency with the curve equation.
        let rhs = self.psi2.eval(u);
        if !rel_residual_ok(&v.mul(&v), &rhs, self.prec) {
            return None;
        }
        Some(v)
    }

    fn sqrt_pair(&self, value: &Cplx) -> [Cplx; 2] {
        let r = value.sqrt();
        let mut pair = [r.clone(), r.neg()];
        pair.sort_by(lex_cmp);
        pair
    }
}

/// Degree-2 cover `y^2 = p6(t)` of the t-line (the genus-2 curve).
/// States are `(y, t)`: the base point rides along so that base motion
/// counts toward the step size and the shifted-power ratio below keeps
/// the ordinate pair separated where `y` grows like `t^3`.
pub struct GenusTwoStage<'a>(pub &'a NumericContext);

impl SheetSystem for GenusTwoStage<'_> {
    fn degree(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        2
    }
    fn prec(&self) -> u32 {
        self.0.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        Ok(self
            .0
            .sqrt_pair(&self.0.p6.eval(t))
            .into_iter()
            .map(|y| vec![y, t.clone()])
            .collect())
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let y = newton_sqrt(&self.0.p6.eval(t), &guess[0], self.0.prec)?;
        Some(vec![y, t.clone()])
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        rel_residual_ok(&state[0].mul(&state[0]), &self.0.p6.eval(t), self.0.prec)
            && rel_residual_ok(&state[1], t, self.0.prec)
    }
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let one = Cplx::one();
        let dt = state[1].sub(&self.0.metric_shift_t);
        let dt3 = dt.mul(&dt).mul(&dt);
        vec![
            (state[0].clone(), one.clone()),
            (state[0].clone(), dt3),
            (state[1].clone(), one),
        ]
    }
}

/// Degree-2 cover `w^2 = q4(t)` of the t-line (the elliptic quotient).
/// States are `(w, t)`; see the genus-2 stage for the layout rationale,
/// with `w` growing like `t^2` here.
pub struct EllipticStage<'a>(pub &'a NumericContext);

impl SheetSystem for EllipticStage<'_> {
    fn degree(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        2
    }
    fn prec(&self) -> u32 {
        self.0.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        Ok(self
            .0
            .sqrt_pair(&self.0.q4.eval(t))
            .into_iter()
            .map(|w| vec![w, t.clone()])
            .collect())
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let w = newton_sqrt(&self.0.q4.eval(t), &guess[0], self.0.prec)?;
        Some(vec![w, t.clone()])
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        rel_residual_ok(&state[0].mul(&state[0]), &self.0.q4.eval(t), self.0.prec)
            && rel_residual_ok(&state[1], t, self.0.prec)
    }
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let one = Cplx::one();
        let dt = state[1].sub(&self.0.metric_shift_t);
        let dt2 = dt.mul(&dt);
        vec![
            (state[0].clone(), one.clone()),
            (state[0].clone(), dt2),
            (state[1].clone(), one),
        ]
    }
}

/// Degree-4 cover of the t-line: states `(w, y, t)` with `w^2 = q4(t)`,
/// `y^2 = p6(t)`. Sheet index is `w_index * 2 + y_index` with each
/// branch pair in lexicographic order at the base point.
pub struct FiberSquareStage<'a>(pub &'a NumericContext);

impl SheetSystem for FiberSquareStage<'_> {
    fn degree(&self) -> usize {
        4
    }
    fn dim(&self) -> usize {
        3
    }
    fn prec(&self) -> u32 {
        self.0.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        let ws = self.0.sqrt_pair(&self.0.q4.eval(t));
        let ys = self.0.sqrt_pair(&self.0.p6.eval(t));
        let mut fiber = Vec::with_capacity(4);
        for w in &ws {
            for y in &ys {
                fiber.push(vec![w.clone(), y.clone(), t.clone()]);
            }
        }
        Ok(fiber)
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let w = newton_sqrt(&self.0.q4.eval(t), &guess[0], self.0.prec)?;
        let y = newton_sqrt(&self.0.p6.eval(t), &guess[1], self.0.prec)?;
        Some(vec![w, y, t.clone()])
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        rel_residual_ok(&state[0].mul(&state[0]), &self.0.q4.eval(t), self.0.prec)
            && rel_residual_ok(&state[1].mul(&state[1]), &self.0.p6.eval(t), self.0.prec)
            && rel_residual_ok(&state[2], t, self.0.prec)
    }
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let one = Cplx::one();
        let dt = state[2].sub(&self.0.metric_shift_t);
        let dt2 = dt.mul(&dt);
        let dt3 = dt2.mul(&dt);
        vec![
            (state[0].clone(), one.clone()),
            (state[1].clone(), one.clone()),
            (state[0].clone(), dt2),
            (state[1].clone(), dt3),
            (state[2].clone(), one),
        ]
    }
}

/// Degree-36 cover of the t-line: states `(w, y, u, v, t)` where
/// `(t, w)` lies on the elliptic quotient, `y` on the genus-2 curve, and
/// `(u, v)` is a triplication preimage of the Weierstrass image of
/// `(t, w)`. Sheet index is `(w_index * 9 + u_index) * 2 + y_index`.
pub struct TripleCoverStage<'a>(pub &'a NumericContext);

impl TripleCoverStage<'_> {
    fn solve_impl(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        let ctx = self.0;
        let ws = ctx.sqrt_pair(&ctx.q4.eval(t));
        let ys = ctx.sqrt_pair(&ctx.p6.eval(t));
        let mut fiber = Vec::with_capacity(36);
        for w in &ws {
            let (x_img, y_img) = ctx
                .forward_xy(t, w)
                .ok_or_else(|| Error::TrackingFailure("base point maps to the origin".into()))?;
            let us = crate::cplx::roots(&ctx.preimage_polynomial(&x_img))?;
            if us.len() != 9 {
                return Err(Error::TrackingFailure(
                    "triplication preimage equation lost roots".into(),
                ));
            }
            for u in &us {
                let v = ctx.preimage_v_from_y(u, &y_img).ok_or_else(|| {
                    Error::TrackingFailure(
                        "preimage ordinate is not decisive at the base point".into(),
                    )
                })?;
                for y in &ys {
                    fiber.push(vec![w.clone(), y.clone(), u.clone(), v.clone(), t.clone()]);
                }
            }
        }
        Ok(fiber)
    }

    fn refine_impl(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let ctx = self.0;
        let w = newton_sqrt(&ctx.q4.eval(t), &guess[0], ctx.prec)?;
        let y = newton_sqrt(&ctx.p6.eval(t), &guess[1], ctx.prec)?;
        let (x_img, y_img) = ctx.forward_xy(t, &w)?;
        let u = ctx.refine_preimage_u(&x_img, &guess[2])?;
        let v = newton_sqrt(&ctx.psi2.eval(&u), &guess[3], ctx.prec)?;
        // The ordinate must reproduce the Weierstrass ordinate; a branch
        // flip here means the step was too coarse.
        let psi = ctx.psi3.eval(&u);
        let lhs = v.mul(&ctx.g3.eval(&u));
        let rhs = y_img.mul(&psi.mul(&psi).mul(&psi));
        if !rel_residual_ok(&lhs, &rhs, ctx.prec) {
            return None;
        }
        Some(vec![w, y, u, v, t.clone()])
    }

    fn residual_impl(&self, t: &Cplx, state: &[Cplx]) -> bool {
        let ctx = self.0;
        let (w, y, u, v) = (&state[0], &state[1], &state[2], &state[3]);
        if !rel_residual_ok(&w.mul(w), &ctx.q4.eval(t), ctx.prec)
            || !rel_residual_ok(&y.mul(y), &ctx.p6.eval(t), ctx.prec)
            || !rel_residual_ok(&v.mul(v), &ctx.psi2.eval(u), ctx.prec)
            || !rel_residual_ok(&state[4], t, ctx.prec)
        {
            return false;
        }
        match ctx.forward_xy(t, w) {
            Some((x_img, y_img)) => {
                let psi = ctx.psi3.eval(u);
                let psi_sq = psi.mul(&psi);
                rel_residual_ok(&ctx.phi3.eval(u), &x_img.mul(&psi_sq), ctx.prec)
                    && rel_residual_ok(
                        &v.mul(&ctx.g3.eval(u)),
                        &y_img.mul(&psi_sq.mul(&psi)),
                        ctx.prec,
                    )
            }
            None => false,
        }
    }

    // On the loop around the marked abscissa one preimage abscissa has a
    // double pole and its ordinate pair collapses chordally like the
    // fourth power of the loop radius; normalized by the shifted square
    // of the abscissa the pair separates linearly. The downstairs
    // ordinates get the same treatment in t for the rail stretches at
    // large base abscissa.
    fn metric_impl(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let one = Cplx::one();
        let du = state[2].sub(&self.0.metric_shift_u);
        let du2 = du.mul(&du);
        let dt = state[4].sub(&self.0.metric_shift_t);
        let dt2 = dt.mul(&dt);
        let dt3 = dt2.mul(&dt);
        vec![
            (state[0].clone(), one.clone()),
            (state[1].clone(), one.clone()),
            (state[2].clone(), one.clone()),
            (state[3].clone(), one.clone()),
            (state[3].clone(), du2),
            (state[0].clone(), dt2),
            (state[1].clone(), dt3),
            (state[4].clone(), one),
        ]
    }
}

impl SheetSystem for TripleCoverStage<'_> {
    fn degree(&self) -> usize {
        36
    }
    fn dim(&self) -> usize {
        5
    }
    fn prec(&self) -> u32 {
        self.0.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        self.solve_impl(t)
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        self.refine_impl(t, guess)
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        self.residual_impl(t, state)
    }
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        self.metric_impl(state)
    }
}

/// Degree-72 cover of the t-line: the degree-36 states extended by
/// `z^2 = psi3(u)` appended as the last coordinate. Sheet index is
/// `base_index * 2 + z_index`.
pub struct TopCoverStage<'a>(pub &'a NumericContext);

impl SheetSystem for TopCoverStage<'_> {
    fn degree(&self) -> usize {
        72
    }
    fn dim(&self) -> usize {
        6
    }
    fn prec(&self) -> u32 {
        self.0.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        let inner = TripleCoverStage(self.0).solve_impl(t)?;
        let mut fiber = Vec::with_capacity(72);
        for state in inner {
            let zs = self.0.sqrt_pair(&self.0.psi3.eval(&state[2]));
            for z in &zs {
                let mut s = state.clone();
                s.push(z.clone());
                fiber.push(s);
            }
        }
        Ok(fiber)
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let mut state = TripleCoverStage(self.0).refine_impl(t, &guess[0..5])?;
        let z = newton_sqrt(&self.0.psi3.eval(&state[2]), &guess[5], self.0.prec)?;
        state.push(z);
        Some(state)
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        TripleCoverStage(self.0).residual_impl(t, &state[0..5])
            && rel_residual_ok(
                &state[5].mul(&state[5]),
                &self.0.psi3.eval(&state[2]),
                self.0.prec,
            )
    }
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let mut comps = TripleCoverStage(self.0).metric_impl(&state[0..5]);
        let du = state[2].sub(&self.0.metric_shift_u);
        let du2 = du.mul(&du);
        comps.push((state[5].clone(), Cplx::one()));
        comps.push((state[5].clone(), du2));
        comps
    }
}

/// Degree-4 cover of the u-line, tracked in the chart
/// `zeta = 1 / (u - mu)` so that `u = infinity` becomes the finite
/// candidate `zeta = 0`. States are `(v, y, t, w, u)`: `(u, v)` a point
/// of the triplication source, `(t, w)` the exact preimage of its
/// triplication image on the marked double cover, `y` an ordinate of the
/// genus-2 curve over `t`. Sheet index is `v_index * 2 + y_index`.
pub struct LineChartStage<'a> {
    pub ctx: &'a NumericContext,
    pub mu: Cplx,
}

impl LineChartStage<'_> {
    fn u_of(&self, zeta: &Cplx) -> Option<Cplx> {
        if zeta.is_zero() {
            return None;
        }
        let u = self.mu.add(&Cplx::one().div(zeta));
        u.is_finite().then_some(u)
    }

    /// Triplication image and exact `(t, w)` for a source point.
    fn downstairs(&self, u: &Cplx, v: &Cplx) -> Option<(Cplx, Cplx)> {
        let ctx = self.ctx;
        let psi = ctx.psi3.eval(u);
        if psi.is_zero() {
            return None;
        }
        let psi_sq = psi.mul(&psi);
        let x = ctx.phi3.eval(u).div(&psi_sq);
        let y = v.mul(&ctx.g3.eval(u)).div(&psi_sq.mul(&psi));
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        ctx.model
            .inverse(&CurvePoint::affine(x, y))
            .ok()
            .filter(|(t, w)| t.is_finite() && w.is_finite())
    }
}

impl SheetSystem for LineChartStage<'_> {
    fn degree(&self) -> usize {
        4
    }
    fn dim(&self) -> usize {
        5
    }
    fn prec(&self) -> u32 {
        self.ctx.prec
    }
    fn solve(&self, zeta: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        let u = self
            .u_of(zeta)
            .ok_or_else(|| Error::TrackingFailure("base point sits at the chart center".into()))?;
        let vs = self.ctx.sqrt_pair(&self.ctx.psi2.eval(&u));
        let mut fiber = Vec::with_capacity(4);
        for v in &vs {
            let (t, w) = self.downstairs(&u, v).ok_or_else(|| {
                Error::TrackingFailure("base point has no finite downstairs image".into())
            })?;
            let ys = self.ctx.sqrt_pair(&self.ctx.p6.eval(&t));
            for y in &ys {
                fiber.push(vec![v.clone(), y.clone(), t.clone(), w.clone(), u.clone()]);
            }
        }
        Ok(fiber)
    }
    fn refine(&self, zeta: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let u = self.u_of(zeta)?;
        let v = newton_sqrt(&self.ctx.psi2.eval(&u), &guess[0], self.ctx.prec)?;
        let (t, w) = self.downstairs(&u, &v)?;
        let y = newton_sqrt(&self.ctx.p6.eval(&t), &guess[1], self.ctx.prec)?;
        Some(vec![v, y, t, w, u])
    }
    fn residual_ok(&self, zeta: &Cplx, state: &[Cplx]) -> bool {
        let u = match self.u_of(zeta) {
            Some(u) => u,
            None => return false,
        };
        let (v, y, t, w) = (&state[0], &state[1], &state[2], &state[3]);
        if !rel_residual_ok(&v.mul(v), &self.ctx.psi2.eval(&u), self.ctx.prec)
            || !rel_residual_ok(&w.mul(w), &self.ctx.q4.eval(t), self.ctx.prec)
            || !rel_residual_ok(&y.mul(y), &self.ctx.p6.eval(t), self.ctx.prec)
            || !rel_residual_ok(&state[4], &u, self.ctx.prec)
        {
            return false;
        }
        // The squared relations above are sign-blind; recomputing the
        // downstairs point pins the stored `(t, w)` to this `(u, v)`
        // branch and rejects states that drifted onto the conjugate.
        match self.downstairs(&u, v) {
            Some((t_chk, w_chk)) => {
                rel_residual_ok(t, &t_chk, self.ctx.prec)
                    && rel_residual_ok(w, &w_chk, self.ctx.prec)
            }
            None => false,
        }
    }
    // Near preimages of the infinite abscissa the downstairs ordinates
    // grow like powers of t and their raw pairs collapse chordally;
    // near the chart center the source ordinate does the same in u. The
    // shifted-power ratios keep each pair separated.
    fn metric_components(&self, state: &[Cplx]) -> Vec<MetricComponent> {
        let one = Cplx::one();
        let dt = state[2].sub(&self.ctx.metric_shift_t);
        let dt2 = dt.mul(&dt);
        let dt3 = dt2.mul(&dt);
        let du = state[4].sub(&self.ctx.metric_shift_u);
        let du2 = du.mul(&du);
        vec![
            (state[0].clone(), one.clone()),
            (state[1].clone(), one.clone()),
            (state[2].clone(), one.clone()),
            (state[3].clone(), one.clone()),
            (state[4].clone(), one),
            (state[1].clone(), dt3),
            (state[3].clone(), dt2),
            (state[0].clone(), du2),
        ]
    }
}

/// Degree-3 test cover `z^3 - 3z = t`, used to pin the composition and
/// orientation conventions of the tracker against independently computed
/// permutations.
pub struct DepressedCubicStage {
    pub prec: u32,
}

impl SheetSystem for DepressedCubicStage {
    fn degree(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        1
    }
    fn prec(&self) -> u32 {
        self.prec
    }
    fn solve(&self, t: &Cplx) -> Result<Vec<Vec<Cplx>>> {
        let p = Poly::new(vec![
            t.neg().with_prec(self.prec),
            Cplx::from_i64(-3).with_prec(self.prec),
            Cplx::zero().with_prec(self.prec),
            Cplx::one().with_prec(self.prec),
        ]);
        Ok(crate::cplx::roots(&p)?.into_iter().map(|z| vec![z]).collect())
    }
    fn refine(&self, t: &Cplx, guess: &[Cplx]) -> Option<Vec<Cplx>> {
        let three = Cplx::from_i64(3);
        let z = newton(
            |z| {
                let f = z.mul(z).mul(z).sub(&three.mul(z)).sub(t);
                let df = three.mul(&z.mul(z)).sub(&three);
                (f, df)
            },
            &guess[0],
            self.prec,
        )?;
        Some(vec![z])
    }
    fn residual_ok(&self, t: &Cplx, state: &[Cplx]) -> bool {
        let z = &state[0];
        let lhs = z.mul(z).mul(z).sub(&Cplx::from_i64(3).mul(z));
        rel_residual_ok(&lhs, t, self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;

    fn c(prec: u32, re: f64, im: f64) -> Cplx {
        Cplx::from_f64(prec, re, im)
    }

    #[test]
    fn rail_plan_for_two_real_candidates() {
        let prec = 212;
        let cands = [c(prec, -2.0, 0.0), c(prec, 2.0, 0.0)];
        let plan = plan_rail(&cands, prec).unwrap();
        assert_eq!(plan.rotation_index, 0);
        assert!((plan.axis_gap - 4.0).abs() < 1e-12);
        assert_eq!(plan.order, vec![0, 1]);
        let (bx, by) = plan.base.to_f64_pair();
        assert!((bx - 4.0).abs() < 1e-12 && (by - 2.0).abs() < 1e-12);
        for leg in &plan.legs {
            assert_eq!(leg.waypoints.len(), CIRCLE_SEGMENTS + 5);
            let first = leg.waypoints.first().unwrap().to_f64_pair();
            let last = leg.waypoints.last().unwrap().to_f64_pair();
            assert!((first.0 - last.0).abs() < 1e-12 && (first.1 - last.1).abs() < 1e-12);
        }
        // Circle points sit at radius delta/3 from the candidate.
        let target = cands[plan.legs[0].candidate].to_f64_pair();
        for w in &plan.legs[0].waypoints[3..3 + CIRCLE_SEGMENTS] {
            let (x, y) = w.to_f64_pair();
            let r = (x - target.0).hypot(y - target.1);
            assert!((r - 4.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rail_plan_rejects_near_collisions() {
        let prec = 212;
        let cands = [c(prec, 1.0, 1.0), c(prec, 1.0, 1.0 + 1e-12)];
        match plan_rail(&cands, prec) {
            Err(Error::DegenerateInput(_)) => {}
            other => panic!("expected degenerate input, got {other:?}"),
        }
    }

    #[test]
    fn rail_plan_separates_rotated_collinear_points() {
        // Equal real parts force a nonzero rotation.
        let prec = 212;
        let cands = [c(prec, 0.0, -1.0), c(prec, 0.0, 1.0)];
        let plan = plan_rail(&cands, prec).unwrap();
        assert!(plan.rotation_index != 0);
        assert!(plan.axis_gap > 1.0);
    }

    fn cubic_plan(prec: u32) -> RailPlan {
        let cands = [c(prec, -2.0, 0.0), c(prec, 2.0, 0.0)];
        plan_rail(&cands, prec).unwrap()
    }

    #[test]
    fn depressed_cubic_convention_is_pinned() {
        // Expected permutations computed with an independent arbitrary
        // precision continuation along the same waypoints: around t = -2
        // the middle and largest base roots (lex order) swap; around
        // t = +2 the two smallest swap.
        let prec = 212;
        let sys = DepressedCubicStage { prec };
        let plan = cubic_plan(prec);
        let out = monodromy(&sys, &plan, false).unwrap();
        assert_eq!(out.perms.len(), 2);
        let p_minus = &out.perms[plan.order.iter().position(|&i| i == 0).unwrap()];
        let p_plus = &out.perms[plan.order.iter().position(|&i| i == 1).unwrap()];
        assert_eq!(p_minus.images(), &[0, 2, 1]);
        assert_eq!(p_plus.images(), &[1, 0, 2]);
        // Left-to-right product (leg order: -2 then +2) is inverse to
        // the loop around infinity, where the cover is totally ramified.
        let prod = out.product().unwrap();
        assert_eq!(prod.cycle_type().lengths(), &[3]);
        assert_eq!(prod.images(), &[1, 2, 0]);
    }

    #[test]
    fn tracking_is_invariant_under_path_refinement_and_precision() {
        let prec = 212;
        let sys = DepressedCubicStage { prec };
        let plan = cubic_plan(prec);
        let base = solve_fiber(&sys, &plan.base).unwrap();
        let leg = &plan.legs[0];
        let (perm_coarse, _) = track_loop(&sys, &base, &leg.waypoints).unwrap();
        // Doubling the waypoint density must not change the result.
        let half = c(prec, 0.5, 0.0);
        let mut dense = Vec::new();
        for seg in leg.waypoints.windows(2) {
            dense.push(seg[0].clone());
            dense.push(seg[0].add(&seg[1]).mul(&half));
        }
        dense.push(leg.waypoints.last().unwrap().clone());
        let (perm_dense, _) = track_loop(&sys, &base, &dense).unwrap();
        assert_eq!(perm_coarse, perm_dense);
        // A 1.5x precision rerun must agree sheet-for-sheet because the
        // base fiber order is the deterministic lexicographic one.
        let prec_hi = 318;
        let sys_hi = DepressedCubicStage { prec: prec_hi };
        let plan_hi = cubic_plan(prec_hi);
        let out_lo = monodromy(&sys, &plan, false).unwrap();
        let out_hi = monodromy(&sys_hi, &plan_hi, false).unwrap();
        assert_eq!(out_lo.perms, out_hi.perms);
    }

    #[test]
    fn contractible_loop_returns_identity() {
        let prec = 212;
        let sys = DepressedCubicStage { prec };
        let base = c(prec, 4.0, 2.0);
        let fiber = solve_fiber(&sys, &base).unwrap();
        let square = [
            base.clone(),
            c(prec, 5.0, 2.0),
            c(prec, 5.0, 3.0),
            c(prec, 4.0, 3.0),
            base.clone(),
        ];
        let (perm, _) = track_loop(&sys, &fiber, &square).unwrap();
        assert!(perm.is_identity());
    }

    fn example_context(prec: u32) -> NumericContext {
        let s: Vec<_> = ["0", "1", "2", "3", "4", "6"]
            .iter()
            .map(|x| parse_rational(x).unwrap())
            .collect();
        NumericContext::new(&s, true, prec).unwrap()
    }

    #[test]
    fn genus_two_stage_has_transpositions_at_branch_points() {
        let prec = 212;
        let ctx = example_context(prec);
        let sys = GenusTwoStage(&ctx);
        let plan = plan_rail(&ctx.s, prec).unwrap();
        let out = monodromy(&sys, &plan, true).unwrap();
        for p in &out.perms {
            assert_eq!(p.cycle_type().lengths(), &[2]);
        }
    }

    #[test]
    fn elliptic_stage_sees_only_four_branch_points() {
        let prec = 212;
        let ctx = example_context(prec);
        let sys = EllipticStage(&ctx);
        let plan = plan_rail(&ctx.s, prec).unwrap();
        let out = monodromy(&sys, &plan, true).unwrap();
        for (leg, p) in plan.legs.iter().zip(&out.perms) {
            if leg.candidate < 4 {
                assert_eq!(p.cycle_type().lengths(), &[2]);
            } else {
                assert!(p.is_identity());
            }
        }
    }

    #[test]
    fn fiber_square_stage_matches_product_of_doubles() {
        let prec = 212;
        let ctx = example_context(prec);
        let plan = plan_rail(&ctx.s, prec).unwrap();
        let doubles_w = monodromy(&EllipticStage(&ctx), &plan, true).unwrap();
        let doubles_y = monodromy(&GenusTwoStage(&ctx), &plan, true).unwrap();
        let combined = monodromy(&FiberSquareStage(&ctx), &plan, true).unwrap();
        for k in 0..plan.legs.len() {
            let w = &doubles_w.perms[k];
            let y = &doubles_y.perms[k];
            let c = &combined.perms[k];
            // Index convention: sheet = w_index * 2 + y_index.
            for wi in 0..2 {
                for yi in 0..2 {
                    let from = wi * 2 + yi;
                    let to = w.apply(wi) * 2 + y.apply(yi);
                    assert_eq!(c.apply(from), to);
                }
            }
        }
    }
}
