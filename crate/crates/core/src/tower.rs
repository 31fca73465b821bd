//! Pipeline from six rational branch abscissas to a certified tower of
//! covers of the projective line.
//!
//! The input fixes a genus-2 curve: the double cover of the t-line
//! branched over the six abscissas, with the fifth abscissa marked. Its
//! quotient elliptic curve is the double cover branched over the first
//! four, pointed at the marked place. The pipeline climbs from there:
//!
//! * the degree-4 fiber join of the two double covers,
//! * the degree-36 stage adding a triplication-preimage coordinate on
//!   the pointed curve,
//! * the degree-72 top stage adjoining a square root of the 3-torsion
//!   quartic in the preimage abscissa.
//!
//! Every stage is realized as tracked numeric monodromy over a shared
//! rail of loops; the composite stages are rebuilt a second time by
//! purely symbolic fiber products and an index-9 torsor construction,
//! and the two engines must agree up to simultaneous relabeling before
//! a certificate is issued. The headline verdicts: the top stage is
//! connected of genus 37, its projection onto the genus-2 curve is
//! unramified of degree 36, and 36 < 37.

use crate::cert::{
    f64_string, float_string, perm_string, BranchingVerdict, BranchingWitness, Certificate,
    ConjugacyReport, ConnectedVerdict, CrossValidation, CurveEcho, DegreeVerdict, Diagnostics,
    EtalePointWitness, EtaleVerdict, GenusVerdict, InputEcho, MarkedPointReport, PencilVerdict,
    PlaneDiagnostics, StageDegreesVerdict, StageReport, Verdicts, SCHEMA_VERSION,
};
use crate::cover::{
    fiber_product, is_etale, relative_ramification_ok, Cover, CoverMap, MarkedBase,
};
use crate::cplx::{lex_cmp, roots, Cplx};
use crate::cyclo::Cyclo;
use crate::elliptic::{
    hesse_isotriviality_check, j_from_four_points, weierstrass_from_marked_square, CurvePoint,
    ProjPoint, WeierstrassCurve,
};
use crate::error::Error;
use crate::perm::{are_simultaneously_conjugate, verifies_conjugacy, Permutation};
use crate::poly::Poly;
use crate::scalar::{rational_to_string, Field};
use crate::schreier::mul3_torsor_cover;
use crate::track::{
    monodromy, plan_rail, EllipticStage, FiberSquareStage, GenusTwoStage, LineChartStage,
    NumericContext, RailPlan, SheetSystem, TopCoverStage, TripleCoverStage,
};
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::sync::Once;

/// Hard floor on the working precision.
pub const MIN_PRECISION_BITS: u32 = 128;
/// Starting precision when the caller does not pick one.
pub const DEFAULT_PRECISION_BITS: u32 = 212;
/// Escalation cap: precision doubles after a tracking failure until it
/// would pass this.
pub const DEFAULT_MAX_PRECISION_BITS: u32 = 848;
/// A numeric j-invariant below this magnitude counts as zero.
pub const J_ZERO_TOL: f64 = 1e-8;

static THREAD_POOL: Once = Once::new();

/// Caps the rayon pool at `PRILL_THREADS` when the variable is set to a
/// positive integer. First call wins; later calls are no-ops.
pub fn init_thread_pool() {
    THREAD_POOL.call_once(|| {
        if let Ok(raw) = std::env::var("PRILL_THREADS") {
            if let Ok(n) = raw.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
}

/// Which projective line a stage is tracked over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    T,
    U,
}

impl Plane {
    pub fn name(self) -> &'static str {
        match self {
            Plane::T => "t",
            Plane::U => "u",
        }
    }
}

/// The six tracked monodromy stages, in certificate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Genus-2 double cover of the t-line.
    Y,
    /// Elliptic double cover of the t-line.
    E,
    /// Degree-4 fiber join of the two double covers.
    C1,
    /// Degree-36 stage with the triplication-preimage coordinate.
    C2OverT,
    /// Degree-72 top stage with the torsion-quartic square root.
    XOverT,
    /// The degree-36 stage re-read as a degree-4 cover of the preimage
    /// line, tracked in a reciprocal chart.
    C2OverU,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Y,
        Stage::E,
        Stage::C1,
        Stage::C2OverT,
        Stage::XOverT,
        Stage::C2OverU,
    ];

    pub fn expected_degree(self) -> usize {
        match self {
            Stage::Y | Stage::E => 2,
            Stage::C1 | Stage::C2OverU => 4,
            Stage::C2OverT => 36,
            Stage::XOverT => 72,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Y => "y",
            Stage::E => "e",
            Stage::C1 => "c1",
            Stage::C2OverT => "c2_over_t",
            Stage::XOverT => "x_over_t",
            Stage::C2OverU => "c2_over_u",
        }
    }

    pub fn plane(self) -> Plane {
        match self {
            Stage::C2OverU => Plane::U,
            _ => Plane::T,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TowerOptions {
    /// Sign choice for the marked ordinate (the square root of the
    /// quartic at the fifth abscissa).
    pub w5_plus: bool,
    pub precision_bits: u32,
    pub max_precision_bits: u32,
}

impl Default for TowerOptions {
    fn default() -> Self {
        TowerOptions {
            w5_plus: true,
            precision_bits: DEFAULT_PRECISION_BITS,
            max_precision_bits: DEFAULT_MAX_PRECISION_BITS,
        }
    }
}

fn br(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Product of `f` over the two roots of `x^2 - sigma x + pi`, read off
/// the linear remainder `alpha x + beta` of `f` modulo the quadratic:
/// the product is `alpha^2 pi + alpha beta sigma + beta^2`.
pub fn quad_eval_product(
    f: &Poly<BigRational>,
    sigma: &BigRational,
    pi: &BigRational,
) -> BigRational {
    let quad = Poly::new(vec![pi.clone(), -sigma.clone(), br(1)]);
    let (_, rem) = f.div_rem(&quad);
    let alpha = rem.coeff(1);
    let beta = rem.coeff(0);
    let aa = &alpha * &alpha;
    let ab = &alpha * &beta;
    let bb = &beta * &beta;
    &(&aa * pi) + &(&(&ab * sigma) + &bb)
}

/// Exact invariants of one configuration, computed over the rationals
/// before any tracking starts. Construction rejects every input whose
/// special points collide, so that downstream loop candidates are
/// provably distinct.
#[derive(Clone, Debug)]
pub struct ExactData {
    /// The six branch abscissas; index 4 is the marked one.
    pub s: Vec<BigRational>,
    /// Monic quartic with the first four abscissas as roots.
    pub q4: Poly<BigRational>,
    /// Monic sextic with all six abscissas as roots.
    pub p6: Poly<BigRational>,
    /// Value of the quartic at the marked abscissa (the square of the
    /// marked ordinate).
    pub w5_squared: BigRational,
    /// Quartic coefficients re-centered at the marked abscissa.
    pub shifted: [BigRational; 5],
    pub curve: WeierstrassCurve<BigRational>,
    pub psi2: Poly<BigRational>,
    pub psi3: Poly<BigRational>,
    /// Image abscissa of the second point over the marked abscissa.
    pub conj_x: BigRational,
    /// Image abscissas of the four quartic ramification points.
    pub ram_x: [BigRational; 4],
    /// Sum and product of the two image abscissas over the sixth branch
    /// value.
    pub pair_s6: (BigRational, BigRational),
    /// Sum and product of the two image abscissas over t = infinity.
    pub pair_inf: (BigRational, BigRational),
}

impl ExactData {
    pub fn new(branch_points: &[BigRational]) -> Result<Self> {
        if branch_points.len() != 6 {
            return Err(Error::InvalidConfig(format!(
                "expected 6 branch abscissas, got {}",
                branch_points.len()
            )));
        }
        for i in 0..6 {
            for j in (i + 1)..6 {
                if branch_points[i] == branch_points[j] {
                    return Err(Error::DegenerateInput(format!(
                        "branch abscissas #{} and #{} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let s = branch_points.to_vec();
        let q4 = Poly::from_roots(&s[0..4]);
        let p6 = Poly::from_roots(&s);
        let w5_squared = q4.eval(&s[4]);
        let (curve, shifted) = weierstrass_from_marked_square(&q4, &s[4], &w5_squared)?;
        let psi2 = curve.two_torsion_cubic();
        let psi3 = curve.three_torsion_quartic();
        let [a0, a1, a2, a3, _a4] = &shifted;

        // Image abscissa of the second marked-fiber point, and the
        // numerator deciding whether that image is 2-torsion.
        let conj_x = {
            let head = &(a1 * a1) / &(&br(4) * a0);
            &head - &(&(&br(2) * a2) / &br(3))
        };
        let n_c = {
            let cube = &(a1 * a1) * a1;
            let mid = &(&(&br(4) * a1) * a2) * a0;
            let tail = &(&(&br(8) * a3) * a0) * a0;
            &(&cube - &mid) + &tail
        };
        if n_c.is_zero() {
            return Err(Error::DegenerateInput(
                "the image of the second marked-fiber point is a 2-torsion point".into(),
            ));
        }
        if psi3.eval(&conj_x).is_zero() {
            return Err(Error::DegenerateInput(
                "the image of the second marked-fiber point is a 3-torsion point".into(),
            ));
        }

        // Image abscissas of the four quartic ramification points:
        // (3 a1 tau + a2 tau^2 + 6 a0) / (3 tau^2) at tau = s_j - s_5.
        let image_x = |tau: &BigRational| -> BigRational {
            let tau2 = tau * tau;
            let num = &(&(&(&br(3) * a1) * tau) + &(a2 * &tau2)) + &(&br(6) * a0);
            &num / &(&br(3) * &tau2)
        };
        let ram_vec: Vec<BigRational> = (0..4).map(|j| image_x(&(&s[j] - &s[4]))).collect();
        let ram_x: [BigRational; 4] = [
            ram_vec[0].clone(),
            ram_vec[1].clone(),
            ram_vec[2].clone(),
            ram_vec[3].clone(),
        ];

        // Sum and product of the image abscissas over the sixth branch
        // value; the pair solves x^2 - sigma x + pi.
        let tau6 = &s[5] - &s[4];
        let tau6_2 = &tau6 * &tau6;
        let u6 = &(&(&(&br(3) * a1) * &tau6) + &(a2 * &tau6_2)) + &(&br(6) * a0);
        let sigma_s6 = &(&br(2) * &u6) / &(&br(3) * &tau6_2);
        let pi_s6 = {
            let num = &(&u6 * &u6) - &(&(&br(36) * &q4.eval(&s[5])) * a0);
            &num / &(&br(9) * &(&tau6_2 * &tau6_2))
        };
        // Same data for the pair over t = infinity.
        let sigma_inf = &(&br(2) * a2) / &br(3);
        let pi_inf = &(&(a2 * a2) / &br(9)) - &(&br(4) * a0);

        if quad_eval_product(&psi2, &sigma_s6, &pi_s6).is_zero() {
            return Err(Error::DegenerateInput(
                "a point over the sixth branch abscissa maps to a 2-torsion point".into(),
            ));
        }
        if quad_eval_product(&psi2, &sigma_inf, &pi_inf).is_zero() {
            return Err(Error::DegenerateInput(
                "a point over t = infinity maps to a 2-torsion point".into(),
            ));
        }

        // The three special image families must stay pairwise disjoint,
        // otherwise loop candidates on the preimage line collide.
        let qy = |x: &BigRational| -> BigRational {
            &(&(x * x) - &(&sigma_s6 * x)) + &pi_s6
        };
        let qi = |x: &BigRational| -> BigRational {
            &(&(x * x) - &(&sigma_inf * x)) + &pi_inf
        };
        if qy(&conj_x).is_zero() {
            return Err(Error::DegenerateInput(
                "the conjugate image abscissa collides with an image over the sixth branch abscissa"
                    .into(),
            ));
        }
        if qi(&conj_x).is_zero() {
            return Err(Error::DegenerateInput(
                "the conjugate image abscissa collides with an image over t = infinity".into(),
            ));
        }
        for x in &ram_x {
            if qy(x).is_zero() {
                return Err(Error::DegenerateInput(
                    "a ramification image abscissa collides with an image over the sixth branch abscissa".into(),
                ));
            }
            if qi(x).is_zero() {
                return Err(Error::DegenerateInput(
                    "a ramification image abscissa collides with an image over t = infinity"
                        .into(),
                ));
            }
        }
        // Resultant of the two monic quadratics.
        let alpha = &sigma_s6 - &sigma_inf;
        let beta = &pi_inf - &pi_s6;
        let resultant = {
            let aa = &(&alpha * &alpha) * &pi_s6;
            let ab = &(&alpha * &beta) * &sigma_s6;
            &(&aa + &ab) + &(&beta * &beta)
        };
        if resultant.is_zero() {
            return Err(Error::DegenerateInput(
                "images over the sixth branch abscissa and over t = infinity share an abscissa"
                    .into(),
            ));
        }

        Ok(ExactData {
            s,
            q4,
            p6,
            w5_squared,
            shifted,
            curve,
            psi2,
            psi3,
            conj_x,
            ram_x,
            pair_s6: (sigma_s6, pi_s6),
            pair_inf: (sigma_inf, pi_inf),
        })
    }
}

/// Kind of a t-line loop candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TPointKind {
    /// One of the six branch abscissas (0-based input index).
    BranchAbscissa(usize),
    /// t-coordinate of an affine 2-torsion point pulled back through
    /// the quotient map (0-based index in lexicographic order).
    TwoTorsionImage(usize),
}

impl TPointKind {
    pub fn label(self) -> String {
        match self {
            TPointKind::BranchAbscissa(j) => format!("s{}", j + 1),
            TPointKind::TwoTorsionImage(j) => format!("b{}", j + 1),
        }
    }

    pub fn kind_name(self) -> &'static str {
        match self {
            TPointKind::BranchAbscissa(_) => "branch-abscissa",
            TPointKind::TwoTorsionImage(_) => "two-torsion-image",
        }
    }
}

/// Kind of a u-line loop candidate (tracked in the reciprocal chart).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UPointKind {
    /// Root of the 3-torsion quartic.
    ThreeTorsionRoot,
    /// Root of the 2-torsion cubic.
    TwoTorsionAbscissa,
    /// Triplication preimage of the conjugate image abscissa.
    ConjugatePreimage,
    /// Triplication preimage of an image over the sixth branch value.
    SexticPairPreimage,
    /// Triplication preimage of a ramification image abscissa.
    QuarticRamPreimage,
    /// Triplication preimage of an image over t = infinity.
    PolePreimage,
    /// Center of the reciprocal chart (u = infinity).
    InfinityChart,
}

impl UPointKind {
    pub fn kind_name(self) -> &'static str {
        match self {
            UPointKind::ThreeTorsionRoot => "three-torsion-root",
            UPointKind::TwoTorsionAbscissa => "two-torsion-abscissa",
            UPointKind::ConjugatePreimage => "conjugate-preimage",
            UPointKind::SexticPairPreimage => "sextic-pair-preimage",
            UPointKind::QuarticRamPreimage => "quartic-ramification-preimage",
            UPointKind::PolePreimage => "pole-preimage",
            UPointKind::InfinityChart => "infinity-chart",
        }
    }
}

/// t-line candidates: the six branch abscissas, then the t-coordinates
/// of the three affine 2-torsion points, lexicographically sorted.
fn t_candidates(ctx: &NumericContext) -> Result<(Vec<Cplx>, Vec<TPointKind>)> {
    let mut points = ctx.s.clone();
    let mut kinds: Vec<TPointKind> = (0..6).map(TPointKind::BranchAbscissa).collect();
    let mut torsion_t: Vec<Cplx> = Vec::with_capacity(3);
    for b in roots(&ctx.psi2)? {
        let (t, _w) = ctx
            .model
            .inverse(&CurvePoint::affine(b, Cplx::zero()))?;
        if !t.is_finite() {
            return Err(Error::DegenerateInput(
                "a 2-torsion point sits over t = infinity".into(),
            ));
        }
        torsion_t.push(t);
    }
    torsion_t.sort_by(lex_cmp);
    for (j, t) in torsion_t.into_iter().enumerate() {
        points.push(t);
        kinds.push(TPointKind::TwoTorsionImage(j));
    }
    Ok((points, kinds))
}

fn push_sorted(
    us: &mut Vec<Option<Cplx>>,
    kinds: &mut Vec<UPointKind>,
    labels: &mut Vec<String>,
    mut group: Vec<Cplx>,
    kind: UPointKind,
    prefix: &str,
) {
    group.sort_by(lex_cmp);
    for (j, u) in group.into_iter().enumerate() {
        us.push(Some(u));
        kinds.push(kind);
        labels.push(format!("{prefix}{}", j + 1));
    }
}

fn affine_x(p: CurvePoint<Cplx>, what: &str) -> Result<Cplx> {
    match p {
        CurvePoint::Affine { x, .. } => Ok(x),
        CurvePoint::Infinity => Err(Error::Internal(format!("{what} is not affine"))),
    }
}

/// u-line candidates in assembly order: 3-torsion roots, 2-torsion
/// abscissas, then the triplication preimages of the conjugate image,
/// of the sixth-abscissa pair, of the four ramification images, and of
/// the pair over t = infinity; the chart center comes last. Each group
/// is lexicographically sorted and labeled with its own prefix.
pub fn u_candidates(
    ctx: &NumericContext,
) -> Result<(Vec<Option<Cplx>>, Vec<UPointKind>, Vec<String>)> {
    let mut us: Vec<Option<Cplx>> = Vec::with_capacity(89);
    let mut kinds: Vec<UPointKind> = Vec::with_capacity(89);
    let mut labels: Vec<String> = Vec::with_capacity(89);

    let d = roots(&ctx.psi3)?;
    push_sorted(&mut us, &mut kinds, &mut labels, d, UPointKind::ThreeTorsionRoot, "d");
    let e = roots(&ctx.psi2)?;
    push_sorted(&mut us, &mut kinds, &mut labels, e, UPointKind::TwoTorsionAbscissa, "e");

    let conj = affine_x(ctx.model.conjugate_image(), "the conjugate image")?;
    let c_pre = roots(&ctx.preimage_polynomial(&conj))?;
    push_sorted(&mut us, &mut kinds, &mut labels, c_pre, UPointKind::ConjugatePreimage, "c");

    let w6 = ctx.q4.eval(&ctx.s[5]).sqrt();
    let mut y_pre = Vec::with_capacity(18);
    for w in [w6.clone(), w6.neg()] {
        let x = affine_x(ctx.model.forward(&ctx.s[5], &w), "a sixth-abscissa image")?;
        y_pre.extend(roots(&ctx.preimage_polynomial(&x))?);
    }
    push_sorted(&mut us, &mut kinds, &mut labels, y_pre, UPointKind::SexticPairPreimage, "y");

    let mut w_pre = Vec::with_capacity(36);
    for j in 0..4 {
        let x = affine_x(
            ctx.model.forward(&ctx.s[j], &Cplx::zero()),
            "a ramification image",
        )?;
        w_pre.extend(roots(&ctx.preimage_polynomial(&x))?);
    }
    push_sorted(&mut us, &mut kinds, &mut labels, w_pre, UPointKind::QuarticRamPreimage, "w");

    let mut p_pre = Vec::with_capacity(18);
    for pt in ctx.model.images_over_infinite_t(&Cplx::one()) {
        let x = affine_x(pt, "an image over t = infinity")?;
        p_pre.extend(roots(&ctx.preimage_polynomial(&x))?);
    }
    push_sorted(&mut us, &mut kinds, &mut labels, p_pre, UPointKind::PolePreimage, "p");

    us.push(None);
    kinds.push(UPointKind::InfinityChart);
    labels.push("inf".into());
    Ok((us, kinds, labels))
}

/// Chart center for the reciprocal u-chart `zeta = 1 / (u - center)`.
///
/// The center is grid-searched to maximize the worst relative gap of
/// the chart images (`zeta = 0`, the image of `u = infinity`, included):
/// a center placed beyond the whole cloud would compress every image by
/// the squared distance and make loop tracking needlessly stiff when
/// one abscissa dwarfs the rest, while a center too close to one
/// candidate blows that image up. The search is deterministic.
pub fn chart_center(prec: u32, finite: &[Cplx]) -> Cplx {
    const GRID: usize = 24;
    let pts: Vec<(f64, f64)> = finite.iter().map(Cplx::to_f64_pair).collect();
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let diam = (x1 - x0).hypot(y1 - y0);
    let pad = 0.25 * (diam + 1.0);
    let mut best_score = f64::NEG_INFINITY;
    let mut best = (x1 + pad, y1 + pad);
    let mut images: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    for i in 0..=GRID {
        for j in 0..=GRID {
            let cx = x0 - pad + (x1 - x0 + 2.0 * pad) * (i as f64) / (GRID as f64);
            let cy = y0 - pad + (y1 - y0 + 2.0 * pad) * (j as f64) / (GRID as f64);
            images.clear();
            images.push((0.0, 0.0));
            let mut usable = true;
            for &(x, y) in &pts {
                let (dx, dy) = (x - cx, y - cy);
                let n = dx * dx + dy * dy;
                if n < 1e-300 {
                    usable = false;
                    break;
                }
                images.push((dx / n, -dy / n));
            }
            if !usable {
                continue;
            }
            let mut magnitude = 0.0f64;
            for &(zx, zy) in &images {
                magnitude = magnitude.max(zx.hypot(zy));
            }
            let mut min_gap = f64::INFINITY;
            for a in 0..images.len() {
                for b in (a + 1)..images.len() {
                    let g = (images[a].0 - images[b].0).hypot(images[a].1 - images[b].1);
                    if g < min_gap {
                        min_gap = g;
                    }
                }
            }
            if !(magnitude > 0.0) {
                continue;
            }
            let score = min_gap / magnitude;
            if score > best_score {
                best_score = score;
                best = (cx, cy);
            }
        }
    }
    Cplx::from_f64(prec, best.0, best.1)
}

/// One stage's tracked monodromy, assembled as a cover of the marked
/// line.
#[derive(Clone, Debug)]
pub struct TrackedStage {
    pub stage: Stage,
    pub cover: Cover,
    /// Substep count per rail leg, in marked-point order.
    pub substeps: Vec<usize>,
    /// Minimal chordal separation of the fiber over the rail corner.
    pub base_separation: f64,
}

/// Shared rail data for one plane of candidates.
#[derive(Clone, Debug)]
pub struct PlaneData {
    pub base: MarkedBase,
    pub plan: RailPlan,
    /// Chart coordinates of the candidates in rail order.
    pub points: Vec<Cplx>,
    pub labels: Vec<String>,
}

/// The composite stages rebuilt without numerics: transposition covers
/// for the two double covers, fiber products for the joins, and the
/// index-9 torsor cover for the triplication step.
pub struct SymbolicTower {
    pub y: Cover,
    pub e: Cover,
    pub c1: Cover,
    pub c2: Cover,
    pub c1_to_y: CoverMap,
    pub c1_to_e: CoverMap,
    pub c2_to_c1: CoverMap,
}

/// Everything one configuration produces: exact invariants, both
/// candidate rails, the six tracked stages, and the symbolic rebuild.
pub struct TowerModel {
    pub branch_points: Vec<BigRational>,
    pub w5_plus: bool,
    pub requested_precision_bits: u32,
    pub max_precision_bits: u32,
    /// Precision of the accepted run (after any escalation).
    pub precision_bits: u32,
    pub exact: ExactData,
    pub t_plane: PlaneData,
    pub t_kinds: Vec<TPointKind>,
    pub u_plane: PlaneData,
    pub u_kinds: Vec<UPointKind>,
    /// Center of the reciprocal chart on the u-line.
    pub mu: Cplx,
    /// u-coordinates of the u-line candidates in rail order; None for
    /// the chart center.
    pub u_values: Vec<Option<Cplx>>,
    pub y: TrackedStage,
    pub e: TrackedStage,
    pub c1: TrackedStage,
    pub c2_t: TrackedStage,
    pub x_t: TrackedStage,
    pub c2_u: TrackedStage,
    pub symbolic: SymbolicTower,
    /// 3-torsion abscissas, lexicographically sorted.
    pub d_points: Vec<Cplx>,
    /// Numeric j-invariant of the four 3-torsion abscissas.
    pub j_three_torsion: Cplx,
}

impl TowerModel {
    pub fn tracked(&self, stage: Stage) -> &TrackedStage {
        match stage {
            Stage::Y => &self.y,
            Stage::E => &self.e,
            Stage::C1 => &self.c1,
            Stage::C2OverT => &self.c2_t,
            Stage::XOverT => &self.x_t,
            Stage::C2OverU => &self.c2_u,
        }
    }
}

fn symbolic_tower(base: &MarkedBase, kinds: &[TPointKind]) -> Result<SymbolicTower> {
    let swap = Permutation::transposition(2, 0, 1);
    let id2 = Permutation::identity(2);
    let mut y_loops = Vec::with_capacity(kinds.len());
    let mut e_loops = Vec::with_capacity(kinds.len());
    for k in kinds {
        match k {
            TPointKind::BranchAbscissa(j) => {
                y_loops.push(swap.clone());
                e_loops.push(if *j < 4 { swap.clone() } else { id2.clone() });
            }
            TPointKind::TwoTorsionImage(_) => {
                y_loops.push(id2.clone());
                e_loops.push(id2.clone());
            }
        }
    }
    let y = Cover::new(base.clone(), 2, Vec::new(), y_loops)?;
    let e = Cover::new(base.clone(), 2, Vec::new(), e_loops)?;

    let point = Cover::trivial(base.clone());
    let y_to_line = CoverMap::new(y.clone(), point.clone(), vec![0, 0])?;
    let e_to_line = CoverMap::new(e.clone(), point, vec![0, 0])?;
    let mut square = fiber_product(&y_to_line, &e_to_line)?;
    if square.len() != 1 {
        return Err(Error::Internal(format!(
            "the fiber join of the two double covers has {} components, expected 1",
            square.len()
        )));
    }
    let (c1, c1_to_y, c1_to_e) = square.pop().expect("one component");
    if c1.degree != 4 {
        return Err(Error::Internal(format!(
            "fiber join degree {}, expected 4",
            c1.degree
        )));
    }

    let (_torsor, torsor_to_e) = mul3_torsor_cover(&e, 0)?;
    let mut lifted = fiber_product(&c1_to_e, &torsor_to_e)?;
    if lifted.len() != 1 {
        return Err(Error::Internal(format!(
            "the torsor join has {} components, expected 1",
            lifted.len()
        )));
    }
    let (c2, c2_to_c1, _c2_to_torsor) = lifted.pop().expect("one component");
    if c2.degree != 36 {
        return Err(Error::Internal(format!(
            "torsor join degree {}, expected 36",
            c2.degree
        )));
    }
    Ok(SymbolicTower {
        y,
        e,
        c1,
        c2,
        c1_to_y,
        c1_to_e,
        c2_to_c1,
    })
}

fn track_stage(
    sys: &dyn SheetSystem,
    stage: Stage,
    base: &MarkedBase,
    plan: &RailPlan,
) -> Result<TrackedStage> {
    let out = monodromy(sys, plan, true).map_err(|e| match e {
        Error::TrackingFailure(detail) => {
            Error::TrackingFailure(format!("{}: {detail}", stage.name()))
        }
        other => other,
    })?;
    let cover = Cover::new(base.clone(), stage.expected_degree(), Vec::new(), out.perms)?;
    Ok(TrackedStage {
        stage,
        cover,
        substeps: out.substeps,
        base_separation: out.base_separation,
    })
}

/// Chart coordinates of the loop candidates a stage is tracked around:
/// t-values for t-line stages, reciprocal-chart values for the u-line
/// stage (chart center last).
pub fn branch_candidates(stage: Stage, ctx: &NumericContext) -> Result<Vec<Cplx>> {
    match stage {
        Stage::Y | Stage::C1 => Ok(ctx.s.clone()),
        Stage::E => Ok(ctx.s[0..4].to_vec()),
        Stage::C2OverT | Stage::XOverT => Ok(t_candidates(ctx)?.0),
        Stage::C2OverU => {
            let (u_opts, _, _) = u_candidates(ctx)?;
            let finite: Vec<Cplx> = u_opts.iter().flatten().cloned().collect();
            let mu = chart_center(ctx.prec(), &finite);
            Ok(u_opts
                .iter()
                .map(|o| match o {
                    Some(u) => Cplx::one().div(&u.sub(&mu)),
                    None => Cplx::zero().with_prec(ctx.prec()),
                })
                .collect())
        }
    }
}

/// Runs the whole pipeline at the requested precision, doubling it
/// after a tracking failure until the cap; every other error aborts
/// immediately.
pub fn build_tower(branch_points: &[BigRational], options: &TowerOptions) -> Result<TowerModel> {
    init_thread_pool();
    if options.precision_bits < MIN_PRECISION_BITS {
        return Err(Error::InvalidConfig(format!(
            "precision {} is below the minimum {}",
            options.precision_bits, MIN_PRECISION_BITS
        )));
    }
    if options.max_precision_bits < options.precision_bits {
        return Err(Error::InvalidConfig(
            "maximum precision is below the starting precision".into(),
        ));
    }
    let exact = ExactData::new(branch_points)?;
    let mut prec = options.precision_bits;
    loop {
        match build_at_precision(&exact, options, prec) {
            Err(Error::TrackingFailure(detail)) if prec < options.max_precision_bits => {
                let next = prec.saturating_mul(2).min(options.max_precision_bits);
                let _ = detail;
                prec = next;
            }
            other => return other,
        }
    }
}

fn build_at_precision(
    exact: &ExactData,
    options: &TowerOptions,
    prec: u32,
) -> Result<TowerModel> {
    let ctx = NumericContext::new(&exact.s, options.w5_plus, prec)?;

    let (t_raw, t_kinds_raw) = t_candidates(&ctx)?;
    let t_plan = plan_rail(&t_raw, prec)?;
    let t_points: Vec<Cplx> = t_plan.order.iter().map(|&i| t_raw[i].clone()).collect();
    let t_kinds: Vec<TPointKind> = t_plan.order.iter().map(|&i| t_kinds_raw[i]).collect();
    let t_labels: Vec<String> = t_kinds.iter().map(|k| k.label()).collect();
    let t_base = MarkedBase::line(t_labels.clone())?;

    let (u_opts, u_kinds_raw, u_labels_raw) = u_candidates(&ctx)?;
    let finite: Vec<Cplx> = u_opts.iter().flatten().cloned().collect();
    let mu = chart_center(prec, &finite);
    let chart: Vec<Cplx> = u_opts
        .iter()
        .map(|o| match o {
            Some(u) => Cplx::one().div(&u.sub(&mu)),
            None => Cplx::zero().with_prec(prec),
        })
        .collect();
    let u_plan = plan_rail(&chart, prec)?;
    let u_points: Vec<Cplx> = u_plan.order.iter().map(|&i| chart[i].clone()).collect();
    let u_kinds: Vec<UPointKind> = u_plan.order.iter().map(|&i| u_kinds_raw[i]).collect();
    let u_labels: Vec<String> = u_plan
        .order
        .iter()
        .map(|&i| u_labels_raw[i].clone())
        .collect();
    let u_values: Vec<Option<Cplx>> = u_plan.order.iter().map(|&i| u_opts[i].clone()).collect();
    let u_base = MarkedBase::line(u_labels.clone())?;

    let y = track_stage(&GenusTwoStage(&ctx), Stage::Y, &t_base, &t_plan)?;
    let e = track_stage(&EllipticStage(&ctx), Stage::E, &t_base, &t_plan)?;
    let c1 = track_stage(&FiberSquareStage(&ctx), Stage::C1, &t_base, &t_plan)?;
    let c2_t = track_stage(&TripleCoverStage(&ctx), Stage::C2OverT, &t_base, &t_plan)?;
    let x_t = track_stage(&TopCoverStage(&ctx), Stage::XOverT, &t_base, &t_plan)?;
    let c2_u = track_stage(
        &LineChartStage {
            ctx: &ctx,
            mu: mu.clone(),
        },
        Stage::C2OverU,
        &u_base,
        &u_plan,
    )?;

    let symbolic = symbolic_tower(&t_base, &t_kinds)?;

    let mut d_points = roots(&ctx.psi3)?;
    d_points.sort_by(lex_cmp);
    if d_points.len() != 4 {
        return Err(Error::Internal(format!(
            "expected 4 roots of the 3-torsion quartic, found {}",
            d_points.len()
        )));
    }
    let d_proj = [
        ProjPoint::Finite(d_points[0].clone()),
        ProjPoint::Finite(d_points[1].clone()),
        ProjPoint::Finite(d_points[2].clone()),
        ProjPoint::Finite(d_points[3].clone()),
    ];
    let j_three_torsion = j_from_four_points(&d_proj)?;

    Ok(TowerModel {
        branch_points: exact.s.clone(),
        w5_plus: options.w5_plus,
        requested_precision_bits: options.precision_bits,
        max_precision_bits: options.max_precision_bits,
        precision_bits: prec,
        exact: exact.clone(),
        t_plane: PlaneData {
            base: t_base,
            plan: t_plan,
            points: t_points,
            labels: t_labels,
        },
        t_kinds,
        u_plane: PlaneData {
            base: u_base,
            plan: u_plan,
            points: u_points,
            labels: u_labels,
        },
        u_kinds,
        mu,
        u_values,
        y,
        e,
        c1,
        c2_t,
        x_t,
        c2_u,
        symbolic,
        d_points,
        j_three_torsion,
    })
}

fn tuple_strings(tuple: &[Permutation]) -> Vec<String> {
    tuple.iter().map(perm_string).collect()
}

fn conjugacy_report(numeric: &Cover, symbolic: &Cover) -> Result<ConjugacyReport> {
    let a = &numeric.loops;
    let b = &symbolic.loops;
    let numeric_genus = numeric.genus().ok();
    let symbolic_genus = symbolic.genus().ok();
    Ok(match are_simultaneously_conjugate(a, b)? {
        Some(r) => {
            let verified = verifies_conjugacy(&r, a, b);
            ConjugacyReport {
                conjugate: true,
                witness_verified: verified,
                relabeling: Some(perm_string(&r)),
                numeric_genus,
                symbolic_genus,
                numeric_tuple: if verified { None } else { Some(tuple_strings(a)) },
                symbolic_tuple: if verified { None } else { Some(tuple_strings(b)) },
            }
        }
        None => ConjugacyReport {
            conjugate: false,
            witness_verified: false,
            relabeling: None,
            numeric_genus,
            symbolic_genus,
            numeric_tuple: Some(tuple_strings(a)),
            symbolic_tuple: Some(tuple_strings(b)),
        },
    })
}

/// Compares the tracked composite stages against their symbolic
/// rebuilds: the full loop tuples must be simultaneously conjugate and
/// both engines must report genus 3 and 19.
pub fn cross_validate(model: &TowerModel) -> Result<CrossValidation> {
    let fiber_square = conjugacy_report(&model.c1.cover, &model.symbolic.c1)?;
    let triple_cover = conjugacy_report(&model.c2_t.cover, &model.symbolic.c2)?;
    let ok = fiber_square.conjugate
        && fiber_square.witness_verified
        && fiber_square.numeric_genus == Some(3)
        && fiber_square.symbolic_genus == Some(3)
        && triple_cover.conjugate
        && triple_cover.witness_verified
        && triple_cover.numeric_genus == Some(19)
        && triple_cover.symbolic_genus == Some(19);
    Ok(CrossValidation {
        ok,
        fiber_square,
        triple_cover,
    })
}

fn proj_cyclo_string(p: &ProjPoint<Cyclo>) -> String {
    match p {
        ProjPoint::Finite(c) => format!("{c:?}"),
        ProjPoint::Infinity => "inf".into(),
    }
}

fn stage_report(model: &TowerModel, stage: Stage) -> Result<StageReport> {
    let ts = model.tracked(stage);
    let plane = match stage.plane() {
        Plane::T => &model.t_plane,
        Plane::U => &model.u_plane,
    };
    let comps = ts.cover.components();
    let connected = comps.len() == 1;
    let genus = if connected { ts.cover.genus().ok() } else { None };
    let mut marked = Vec::with_capacity(plane.points.len());
    for k in 0..plane.points.len() {
        let kind = match stage.plane() {
            Plane::T => model.t_kinds[k].kind_name(),
            Plane::U => model.u_kinds[k].kind_name(),
        };
        let (u_re, u_im) = if stage.plane() == Plane::U {
            match &model.u_values[k] {
                Some(u) => (Some(float_string(u.re())), Some(float_string(u.im()))),
                None => (None, None),
            }
        } else {
            (None, None)
        };
        marked.push(MarkedPointReport {
            label: plane.labels[k].clone(),
            kind: kind.into(),
            position_re: float_string(plane.points[k].re()),
            position_im: float_string(plane.points[k].im()),
            u_re,
            u_im,
            cycle_type: ts.cover.profile(k)?.lengths().to_vec(),
            permutation: perm_string(&ts.cover.loops[k]),
            substeps: ts.substeps.get(k).copied().unwrap_or(0),
        });
    }
    Ok(StageReport {
        stage: stage.name().into(),
        plane: stage.plane().name().into(),
        degree: ts.cover.degree,
        connected,
        components: comps.len(),
        genus,
        base_separation: f64_string(ts.base_separation),
        marked_points: marked,
    })
}

fn plane_diagnostics(plane: &PlaneData, center: Option<&Cplx>, min_sep: f64) -> PlaneDiagnostics {
    PlaneDiagnostics {
        rotation_index: plane.plan.rotation_index,
        axis_gap: f64_string(plane.plan.axis_gap),
        clearance: f64_string(plane.plan.clearance),
        base_re: float_string(plane.plan.base.re()),
        base_im: float_string(plane.plan.base.im()),
        chart_center_re: center.map(|c| float_string(c.re())),
        chart_center_im: center.map(|c| float_string(c.im())),
        min_base_separation: f64_string(min_sep),
    }
}

/// Evaluates every verdict on a built tower and assembles the full
/// certificate. The certificate is complete even when a verdict fails;
/// `failed` then records that it must be read as a refutation.
pub fn certify(model: &TowerModel, seed: u64) -> Result<Certificate> {
    let stages = Stage::ALL
        .iter()
        .map(|&st| stage_report(model, st))
        .collect::<Result<Vec<_>>>()?;

    let x = &model.x_t.cover;
    let y = &model.y.cover;
    let c2 = &model.c2_t.cover;
    let c1 = &model.c1.cover;

    // Sheet index layout: top sheet i = ((w * 9 + u) * 2 + y) * 2 + z,
    // so the genus-2 coordinate of sheet i is (i / 2) % 2.
    let fiber_map_xy: Vec<usize> = (0..x.degree).map(|i| (i / 2) % 2).collect();
    let map_xy = CoverMap::new(x.clone(), y.clone(), fiber_map_xy.clone());
    let etale = match &map_xy {
        Ok(m) => {
            let mut points = Vec::with_capacity(x.loops.len());
            let mut all = true;
            for k in 0..x.loops.len() {
                let unramified = relative_ramification_ok(m, k)?;
                all &= unramified;
                points.push(EtalePointWitness {
                    label: x.base.points[k].clone(),
                    top_cycle_type: x.profile(k)?.lengths().to_vec(),
                    bottom_cycle_type: y.profile(k)?.lengths().to_vec(),
                    unramified,
                });
            }
            let ok = all && is_etale(m)?;
            EtaleVerdict {
                ok,
                detail: if ok {
                    "every top cycle maps to a base cycle of equal length".into()
                } else {
                    "relative ramification found at a marked point".into()
                },
                fiber_map: fiber_map_xy.clone(),
                points,
            }
        }
        Err(e) => EtaleVerdict {
            ok: false,
            detail: e.to_string(),
            fiber_map: fiber_map_xy.clone(),
            points: Vec::new(),
        },
    };

    let cover_degree = match &map_xy {
        Ok(m) => DegreeVerdict {
            ok: m.relative_degree() == 36,
            degree: m.relative_degree(),
        },
        Err(_) => DegreeVerdict {
            ok: false,
            degree: 0,
        },
    };

    let comps = x.components();
    let top_connected = ConnectedVerdict {
        ok: comps.len() == 1,
        component_sizes: comps.iter().map(Vec::len).collect(),
    };

    let genus_rh = x.genus().ok();
    let euler = match y.genus().ok() {
        Some(g) if g >= 1 && cover_degree.ok => 1 + cover_degree.degree * (g - 1),
        _ => 0,
    };
    let top_genus = GenusVerdict {
        ok: euler > 0 && genus_rh == Some(euler),
        genus: genus_rh,
        genus_from_euler_ratio: euler,
    };

    let m_x_c2 = CoverMap::new(x.clone(), c2.clone(), (0..x.degree).map(|i| i / 2).collect());
    let m_c2_c1 = CoverMap::new(
        c2.clone(),
        c1.clone(),
        (0..c2.degree).map(|i| (i / 18) * 2 + i % 2).collect(),
    );
    let m_c1_y = CoverMap::new(c1.clone(), y.clone(), (0..c1.degree).map(|i| i % 2).collect());
    let rel = |m: &Result<CoverMap>| m.as_ref().map(CoverMap::relative_degree).unwrap_or(0);
    let stage_degrees = StageDegreesVerdict {
        ok: rel(&m_x_c2) == 2 && rel(&m_c2_c1) == 9 && rel(&m_c1_y) == 2,
        top_to_triple: rel(&m_x_c2),
        triple_to_square: rel(&m_c2_c1),
        square_to_genus_two: rel(&m_c1_y),
    };

    let mut witnesses = Vec::with_capacity(4);
    let mut branching_ok = true;
    for (k, kind) in model.u_kinds.iter().enumerate() {
        if *kind != UPointKind::ThreeTorsionRoot {
            continue;
        }
        let ct = model.c2_u.cover.profile(k)?;
        branching_ok &= matches!(ct.lengths(), [2, 2]);
        let (u_re, u_im) = match &model.u_values[k] {
            Some(u) => (float_string(u.re()), float_string(u.im())),
            None => ("inf".into(), "inf".into()),
        };
        witnesses.push(BranchingWitness {
            label: model.u_plane.labels[k].clone(),
            u_re,
            u_im,
            cycle_type: ct.lengths().to_vec(),
        });
    }
    branching_ok &= witnesses.len() == 4;
    let torsion_double_branching = BranchingVerdict {
        ok: branching_ok,
        points: witnesses,
    };

    let hesse = hesse_isotriviality_check()?;
    let exact_zero = hesse.j.is_zero();
    let j_abs = model.j_three_torsion.abs_f64();
    let pencil_j_invariant = PencilVerdict {
        ok: exact_zero && j_abs.is_finite() && j_abs < J_ZERO_TOL,
        numeric_j_re: float_string(model.j_three_torsion.re()),
        numeric_j_im: float_string(model.j_three_torsion.im()),
        numeric_j_abs: f64_string(j_abs),
        tolerance: f64_string(J_ZERO_TOL),
        exact_j_is_zero: exact_zero,
        exact_images: hesse.images.iter().map(proj_cyclo_string).collect(),
        exact_lambda: format!("{:?}", hesse.lambda),
    };

    let mut loop_products_contractible = true;
    for st in Stage::ALL {
        let cover = &model.tracked(st).cover;
        let mut acc = Permutation::identity(cover.degree);
        for p in &cover.loops {
            acc = p.compose(&acc)?;
        }
        loop_products_contractible &= acc.is_identity();
    }

    let cross_validation = cross_validate(model)?;

    let degree_below_genus = match (cover_degree.ok, genus_rh) {
        (true, Some(g)) => cover_degree.degree < g,
        _ => false,
    };

    let failed = !(etale.ok
        && cover_degree.ok
        && top_connected.ok
        && top_genus.ok
        && stage_degrees.ok
        && torsion_double_branching.ok
        && pencil_j_invariant.ok
        && degree_below_genus
        && loop_products_contractible
        && cross_validation.ok);

    let t_min_sep = [&model.y, &model.e, &model.c1, &model.c2_t, &model.x_t]
        .iter()
        .map(|ts| ts.base_separation)
        .fold(f64::INFINITY, f64::min);
    let diagnostics = Diagnostics {
        residual_bound: format!("2^-{}", crate::track::residual_shift(model.precision_bits)),
        total_substeps: Stage::ALL
            .iter()
            .map(|&s| model.tracked(s).substeps.iter().sum::<usize>())
            .sum(),
        t_plane: plane_diagnostics(&model.t_plane, None, t_min_sep),
        u_plane: plane_diagnostics(&model.u_plane, Some(&model.mu), model.c2_u.base_separation),
    };

    Ok(Certificate {
        schema: SCHEMA_VERSION,
        failed,
        input: InputEcho {
            branch_points: model.branch_points.iter().map(rational_to_string).collect(),
            w5_sign: if model.w5_plus { "+" } else { "-" }.into(),
            seed,
            requested_precision_bits: model.requested_precision_bits,
            precision_bits: model.precision_bits,
            max_precision_bits: model.max_precision_bits,
        },
        curve: CurveEcho {
            weierstrass_a: rational_to_string(model.exact.curve.a()),
            weierstrass_b: rational_to_string(model.exact.curve.b()),
            j_invariant: rational_to_string(&model.exact.curve.j_invariant()),
            conjugate_abscissa: rational_to_string(&model.exact.conj_x),
        },
        stages,
        verdicts: Verdicts {
            unramified_over_genus_two: etale,
            cover_degree,
            top_connected,
            top_genus,
            stage_degrees,
            torsion_double_branching,
            pencil_j_invariant,
            degree_below_genus,
            loop_products_contractible,
        },
        cross_validation,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(values: [i64; 6]) -> Vec<BigRational> {
        values.iter().map(|&v| br(v)).collect()
    }

    #[test]
    fn stage_metadata_is_consistent() {
        assert_eq!(Stage::ALL.len(), 6);
        let degrees: Vec<usize> = Stage::ALL.iter().map(|s| s.expected_degree()).collect();
        assert_eq!(degrees, vec![2, 2, 4, 36, 72, 4]);
        let names: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).collect();
        assert_eq!(
            names,
            vec!["y", "e", "c1", "c2_over_t", "x_over_t", "c2_over_u"]
        );
        for s in Stage::ALL {
            match s {
                Stage::C2OverU => assert_eq!(s.plane(), Plane::U),
                _ => assert_eq!(s.plane(), Plane::T),
            }
        }
    }

    #[test]
    fn quad_eval_product_matches_direct_evaluation() {
        // Quadratic x^2 - x - 1 with roots r1 r2 = -1, r1 + r2 = 1.
        let sigma = br(1);
        let pi = br(-1);
        // f = x^2: product over roots is (r1 r2)^2 = 1.
        let f = Poly::new(vec![br(0), br(0), br(1)]);
        assert_eq!(quad_eval_product(&f, &sigma, &pi), br(1));
        // f = x^3: product is (r1 r2)^3 = -1.
        let f3 = Poly::new(vec![br(0), br(0), br(0), br(1)]);
        assert_eq!(quad_eval_product(&f3, &sigma, &pi), br(-1));
        // f = x - 3: product is (r1 - 3)(r2 - 3) = pi - 3 sigma + 9 = 5.
        let f1 = Poly::new(vec![br(-3), br(1)]);
        assert_eq!(quad_eval_product(&f1, &sigma, &pi), br(5));
    }

    #[test]
    fn exact_data_matches_hand_computed_model() {
        // Quartic t(t-1)(t-2)(t-3) recentred at the marked abscissa 4:
        // coefficients 24, 50, 35, 10, 1.
        let data = ExactData::new(&ints([0, 1, 2, 3, 4, 6])).unwrap();
        assert_eq!(data.shifted, [br(24), br(50), br(35), br(10), br(1)]);
        assert_eq!(data.w5_squared, br(24));
        assert_eq!(*data.curve.a(), q(-13, 3));
        assert_eq!(*data.curve.b(), q(70, 27));
        // Cross-ratio of {0,1,2,3} is 4/3, whose j-invariant is 35152/9.
        assert_eq!(data.curve.j_invariant(), q(35152, 9));
        assert_eq!(data.conj_x, q(65, 24));
        // Ordinate squared of the conjugate image.
        assert_eq!(data.psi2.eval(&data.conj_x), q(148225, 13824));
    }

    #[test]
    fn exact_data_rejects_two_torsion_pole_pair() {
        // For the quartic (t-1)(t-2)(t-3)(t-6) marked at 0 the point
        // over t = infinity with abscissa 11/3 is exactly 2-torsion:
        // 11/3 is a root of x^3 - (49/3)x + 286/27.
        let err = ExactData::new(&ints([1, 2, 3, 6, 0, 4])).unwrap_err();
        match err {
            Error::DegenerateInput(msg) => assert!(msg.contains("infinity"), "{msg}"),
            other => panic!("expected degenerate input, got {other}"),
        }
    }

    #[test]
    fn exact_data_rejects_coinciding_abscissas() {
        let err = ExactData::new(&ints([1, 2, 3, 6, 0, 1])).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)), "{err}");
    }

    #[test]
    fn exact_data_rejects_two_torsion_conjugate_image() {
        // For the even quartic (t^2-1)(t^2-4) marked at 0 the second
        // marked-fiber point maps to an affine 2-torsion point.
        let err = ExactData::new(&ints([1, -1, 2, -2, 0, 3])).unwrap_err();
        match err {
            Error::DegenerateInput(msg) => assert!(msg.contains("2-torsion"), "{msg}"),
            other => panic!("expected degenerate input, got {other}"),
        }
    }

    #[test]
    fn exact_data_requires_six_abscissas() {
        let err = ExactData::new(&ints([1, 2, 3, 6, 0, 4])[..5].to_vec().as_slice()).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn candidate_counts_and_labels() {
        let data = ExactData::new(&ints([0, 1, 2, 3, 4, 6])).unwrap();
        let ctx = NumericContext::new(&data.s, true, 192).unwrap();
        let (t_pts, t_kinds) = t_candidates(&ctx).unwrap();
        assert_eq!(t_pts.len(), 9);
        assert_eq!(
            t_kinds.iter().map(|k| k.label()).collect::<Vec<_>>(),
            vec!["s1", "s2", "s3", "s4", "s5", "s6", "b1", "b2", "b3"]
        );
        let (u_opts, u_kinds, u_labels) = u_candidates(&ctx).unwrap();
        assert_eq!(u_opts.len(), 89);
        assert_eq!(u_kinds.len(), 89);
        assert_eq!(u_labels.len(), 89);
        assert_eq!(u_labels[0], "d1");
        assert_eq!(u_labels[4], "e1");
        assert_eq!(u_labels[7], "c1");
        assert_eq!(u_labels[16], "y1");
        assert_eq!(u_labels[34], "w1");
        assert_eq!(u_labels[70], "p1");
        assert_eq!(u_labels[88], "inf");
        assert!(u_opts[88].is_none());
        assert_eq!(u_kinds[88], UPointKind::InfinityChart);
        // All finite candidates pairwise distinct.
        let finite: Vec<Cplx> = u_opts.iter().flatten().cloned().collect();
        assert_eq!(finite.len(), 88);
        for i in 0..finite.len() {
            for j in (i + 1)..finite.len() {
                assert!(
                    finite[i].sub(&finite[j]).abs_f64() > 1e-8,
                    "candidates {i} and {j} collide"
                );
            }
        }
    }

    #[test]
    fn symbolic_tower_has_expected_degrees_and_genera() {
        let labels: Vec<String> = ["s1", "s2", "s3", "s4", "s5", "s6", "b1", "b2", "b3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let base = MarkedBase::line(labels).unwrap();
        let kinds: Vec<TPointKind> = (0..6)
            .map(TPointKind::BranchAbscissa)
            .chain((0..3).map(TPointKind::TwoTorsionImage))
            .collect();
        let tower = symbolic_tower(&base, &kinds).unwrap();
        assert_eq!(tower.y.degree, 2);
        assert_eq!(tower.y.genus().unwrap(), 2);
        assert_eq!(tower.e.degree, 2);
        assert_eq!(tower.e.genus().unwrap(), 1);
        assert_eq!(tower.c1.degree, 4);
        assert_eq!(tower.c1.genus().unwrap(), 3);
        assert_eq!(tower.c2.degree, 36);
        assert_eq!(tower.c2.genus().unwrap(), 19);
        assert_eq!(tower.c1_to_y.relative_degree(), 2);
        assert_eq!(tower.c1_to_e.relative_degree(), 2);
        assert_eq!(tower.c2_to_c1.relative_degree(), 9);
    }

    #[test]
    fn build_rejects_low_precision() {
        let out = build_tower(
            &ints([0, 1, 2, 3, 4, 6]),
            &TowerOptions {
                precision_bits: 64,
                ..TowerOptions::default()
            },
        );
        match out {
            Err(Error::InvalidConfig(_)) => {}
            Err(other) => panic!("expected invalid config, got {other}"),
            Ok(_) => panic!("expected invalid config, got a tower"),
        }
    }
}
