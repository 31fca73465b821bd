//! Machine-readable certificate types (serialization layer).
//!
//! A [`Certificate`] is the full, self-contained record of one pipeline
//! run: the input echo, the tracked monodromy of every stage, the
//! verdict block, the two-engine cross-check, and enough diagnostics to
//! replay the computation. Serialization is plain JSON with a fixed
//! field order, so re-serializing a parsed certificate reproduces the
//! original bytes.
//!
//! Numbers that are not exact integers travel as decimal strings:
//! arbitrary-precision floats print with [`float_string`], doubles with
//! [`f64_string`], and permutations as their image list via
//! [`perm_string`]. Strings survive round-trips unchanged; native JSON
//! floats would not.

use crate::perm::Permutation;
use crate::Result;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Bumped whenever the certificate layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

/// Decimal rendering of an arbitrary-precision float, full precision.
pub fn float_string(f: &Float) -> String {
    f.to_string_radix(10, None)
}

/// Shortest round-trip rendering of a double.
pub fn f64_string(x: f64) -> String {
    format!("{x:?}")
}

/// A permutation as its 0-based image list, e.g. `[1, 0, 3, 2]`.
pub fn perm_string(p: &Permutation) -> String {
    format!("{:?}", p.images())
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Certificate {
    pub schema: u32,
    /// True when any verdict below failed; consumers must treat such a
    /// certificate as a refutation record, not a proof.
    pub failed: bool,
    pub input: InputEcho,
    pub curve: CurveEcho,
    pub stages: Vec<StageReport>,
    pub verdicts: Verdicts,
    pub cross_validation: CrossValidation,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct InputEcho {
    /// The six branch abscissas as exact rationals.
    pub branch_points: Vec<String>,
    /// "+" or "-": which square root of the quartic at the marked
    /// abscissa serves as the marked ordinate.
    pub w5_sign: String,
    pub seed: u64,
    pub requested_precision_bits: u32,
    /// Working precision that actually produced this certificate (may
    /// exceed the request after escalation).
    pub precision_bits: u32,
    pub max_precision_bits: u32,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CurveEcho {
    /// Short Weierstrass coefficients of the elliptic quotient.
    pub weierstrass_a: String,
    pub weierstrass_b: String,
    pub j_invariant: String,
    /// Abscissa of the image of the second point over the marked
    /// branch value.
    pub conjugate_abscissa: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stage: String,
    /// "t" or "u": which projective line the monodromy was tracked on.
    pub plane: String,
    pub degree: usize,
    pub connected: bool,
    pub components: usize,
    /// Genus by Riemann-Hurwitz; absent when the cover is disconnected.
    pub genus: Option<usize>,
    /// Minimal chordal separation of the fiber over the rail corner.
    pub base_separation: String,
    pub marked_points: Vec<MarkedPointReport>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MarkedPointReport {
    pub label: String,
    pub kind: String,
    /// Chart coordinate of the candidate (t on the t-line, the
    /// reciprocal chart value on the u-line).
    pub position_re: String,
    pub position_im: String,
    /// For u-line candidates, the u-coordinate itself; absent on the
    /// t-line and for the chart center.
    pub u_re: Option<String>,
    pub u_im: Option<String>,
    pub cycle_type: Vec<usize>,
    pub permutation: String,
    pub substeps: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Verdicts {
    pub unramified_over_genus_two: EtaleVerdict,
    pub cover_degree: DegreeVerdict,
    pub top_connected: ConnectedVerdict,
    pub top_genus: GenusVerdict,
    pub stage_degrees: StageDegreesVerdict,
    pub torsion_double_branching: BranchingVerdict,
    pub pencil_j_invariant: PencilVerdict,
    /// The headline comparison: covering degree strictly below the
    /// genus of the covering curve.
    pub degree_below_genus: bool,
    /// Product of the loop permutations is the identity on every
    /// tracked stage (contractibility of the full boundary loop).
    pub loop_products_contractible: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EtaleVerdict {
    pub ok: bool,
    pub detail: String,
    /// Sheet projection from the top cover to the genus-2 cover.
    pub fiber_map: Vec<usize>,
    pub points: Vec<EtalePointWitness>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EtalePointWitness {
    pub label: String,
    pub top_cycle_type: Vec<usize>,
    pub bottom_cycle_type: Vec<usize>,
    /// True when every top cycle over this point maps to a bottom
    /// cycle of equal length.
    pub unramified: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DegreeVerdict {
    pub ok: bool,
    pub degree: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConnectedVerdict {
    pub ok: bool,
    pub component_sizes: Vec<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct GenusVerdict {
    pub ok: bool,
    /// Riemann-Hurwitz over the t-line from the tracked cycle types.
    pub genus: Option<usize>,
    /// Euler-characteristic ratio route: 1 + d(g_base - 1) for an
    /// unramified degree-d cover.
    pub genus_from_euler_ratio: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct StageDegreesVerdict {
    pub ok: bool,
    pub top_to_triple: usize,
    pub triple_to_square: usize,
    pub square_to_genus_two: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BranchingVerdict {
    pub ok: bool,
    pub points: Vec<BranchingWitness>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BranchingWitness {
    pub label: String,
    pub u_re: String,
    pub u_im: String,
    pub cycle_type: Vec<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PencilVerdict {
    pub ok: bool,
    pub numeric_j_re: String,
    pub numeric_j_im: String,
    pub numeric_j_abs: String,
    pub tolerance: String,
    /// Exact-arithmetic confirmation that the j-invariant vanishes.
    pub exact_j_is_zero: bool,
    /// The four exact base abscissas in the cyclotomic field.
    pub exact_images: Vec<String>,
    pub exact_lambda: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CrossValidation {
    pub ok: bool,
    pub fiber_square: ConjugacyReport,
    pub triple_cover: ConjugacyReport,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConjugacyReport {
    /// Numeric and symbolic loop tuples are simultaneously conjugate.
    pub conjugate: bool,
    /// The found relabeling was replayed generator by generator.
    pub witness_verified: bool,
    pub relabeling: Option<String>,
    pub numeric_genus: Option<usize>,
    pub symbolic_genus: Option<usize>,
    /// Dumped only on disagreement, for post-mortem comparison.
    pub numeric_tuple: Option<Vec<String>>,
    pub symbolic_tuple: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Residual acceptance bound used by the path tracker.
    pub residual_bound: String,
    pub total_substeps: usize,
    pub t_plane: PlaneDiagnostics,
    pub u_plane: PlaneDiagnostics,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PlaneDiagnostics {
    pub rotation_index: usize,
    pub axis_gap: String,
    pub clearance: String,
    pub base_re: String,
    pub base_im: String,
    /// Center of the reciprocal chart (u-line only).
    pub chart_center_re: Option<String>,
    pub chart_center_im: Option<String>,
    pub min_base_separation: String,
}

impl Certificate {
    pub fn ok(&self) -> bool {
        !self.failed
    }

    /// Pretty JSON with a trailing newline; byte-stable across runs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text)
            .map_err(|e| crate::Error::InvalidConfig(format!("certificate parse error: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_string_is_bracketed_image_list() {
        let p = Permutation::new(vec![1, 0, 3, 2]).unwrap();
        assert_eq!(perm_string(&p), "[1, 0, 3, 2]");
    }

    #[test]
    fn f64_string_round_trips() {
        for x in [0.05_f64, 1e-9, 137.25, 0.3333333333333333] {
            assert_eq!(f64_string(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn float_string_keeps_all_digits() {
        let f = Float::with_val(160, 1) / Float::with_val(160, 3);
        let s = float_string(&f);
        assert!(s.len() > 40, "expected full-precision digits, got {s}");
        assert!(s.starts_with("3.33333") || s.starts_with("0.33333") || s.contains("3.3333"));
    }
}
