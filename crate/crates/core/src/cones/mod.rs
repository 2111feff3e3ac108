//! Membership oracles and support functions for the cones of maps
//! `P ⊃ D ⊃ CP ⊃ T ⊃ SP` (plus `CcP`) and their slices.
//!
//! All oracles take the Choi matrix `D` (block convention of [`crate::matcore`]).
//! Verdicts carry a certificate that can be re-evaluated independently.

mod dykstra;
mod fixtures;
mod oracle;
mod seesaw;
mod separable;
mod slice;
mod support;
mod sym;
mod witness;

pub use dykstra::{decomposable_split, Split, SplitOutcome};
pub use fixtures::{choi_map_fixture, validate_fixture, FixtureReport};
pub use oracle::{cone_membership, cone_membership_herm};
pub(crate) use seesaw::block_positive_ray;
pub use seesaw::{product_extremum, seesaw_min, SeesawResult};
pub use separable::{separable_decomposition, SeparableFit};
pub use slice::slice_membership;
pub(crate) use slice::slice_membership_herm;
pub use support::{support_function, Support};
pub use sym::{sym_trace_norm_d, SymDecision};
pub use witness::{ppt_witness_search, WitnessResult};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{HermMat, MatrixJson, C64};

/// One of the six cones of maps on `M_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeId {
    /// Positive maps (block-positive Choi matrix).
    P,
    /// Decomposable maps.
    D,
    /// Completely positive maps.
    CP,
    /// Completely copositive maps.
    CcP,
    /// PPT maps, `CP ∩ CcP`.
    T,
    /// Superpositive (entanglement-breaking) maps.
    SP,
}

impl ConeId {
    pub const ALL: [ConeId; 6] = [
        ConeId::P,
        ConeId::D,
        ConeId::CP,
        ConeId::CcP,
        ConeId::T,
        ConeId::SP,
    ];

    /// The five cones of the main chain, largest first.
    pub const CHAIN: [ConeId; 5] = [ConeId::P, ConeId::D, ConeId::CP, ConeId::T, ConeId::SP];

    /// Dual cone under `⟨A, B⟩ = Tr AB`.
    pub fn dual(self) -> ConeId {
        match self {
            ConeId::P => ConeId::SP,
            ConeId::SP => ConeId::P,
            ConeId::D => ConeId::T,
            ConeId::T => ConeId::D,
            ConeId::CP => ConeId::CP,
            ConeId::CcP => ConeId::CcP,
        }
    }

    /// `self ⊆ other`.
    pub fn is_subcone_of(self, other: ConeId) -> bool {
        use ConeId::*;
        if self == other {
            return true;
        }
        match self {
            SP => true,
            T => other != SP,
            CP | CcP => matches!(other, D | P),
            D => other == P,
            P => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConeId::P => "P",
            ConeId::D => "D",
            ConeId::CP => "CP",
            ConeId::CcP => "CcP",
            ConeId::T => "T",
            ConeId::SP => "SP",
        }
    }
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p" => Ok(ConeId::P),
            "d" => Ok(ConeId::D),
            "cp" => Ok(ConeId::CP),
            "ccp" => Ok(ConeId::CcP),
            "t" | "ppt" => Ok(ConeId::T),
            "sp" => Ok(ConeId::SP),
            _ => Err(Error::InvalidParams(format!("unknown cone '{s}'"))),
        }
    }
}

/// Affine or symmetric slice of a cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slice {
    /// The cone itself.
    Cone,
    /// `Tr D = N`.
    Base,
    /// `Tr_B D = I`.
    TP,
    /// `Tr_B D ⪯ I` (CP only).
    TNI,
    /// `conv(−C^b ∪ C^b)`.
    Sym,
    /// Order interval `(e − C*) ∩ (−e + C*)`, the polar of `Sym`.
    SymPolar,
}

impl Slice {
    pub fn name(self) -> &'static str {
        match self {
            Slice::Cone => "cone",
            Slice::Base => "base",
            Slice::TP => "tp",
            Slice::TNI => "tni",
            Slice::Sym => "sym",
            Slice::SymPolar => "sympolar",
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cone" => Ok(Slice::Cone),
            "base" => Ok(Slice::Base),
            "tp" => Ok(Slice::TP),
            "tni" => Ok(Slice::TNI),
            "sym" => Ok(Slice::Sym),
            "sympolar" | "sym-polar" => Ok(Slice::SymPolar),
            _ => Err(Error::InvalidParams(format!("unknown slice '{s}'"))),
        }
    }
}

/// Tunable oracle settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// PSD tolerance relative to `‖D‖_HS`.
    pub psd_tol: f64,
    /// Absolute tolerance for the affine slice constraints.
    pub slice_tol: f64,
    pub seesaw_restarts: usize,
    pub seesaw_iters: usize,
    /// See-saw values below `-seesaw_out · max(1, ‖D‖_HS)` are violations.
    pub seesaw_out: f64,
    pub dykstra_max_iter: usize,
    pub dykstra_tol: f64,
    pub separable_pool: usize,
    pub separable_tol: f64,
    pub witness_iters: usize,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            slice_tol: 1e-9,
            seesaw_restarts: 50,
            seesaw_iters: 200,
            seesaw_out: 1e-8,
            dykstra_max_iter: 50_000,
            dykstra_tol: 1e-7,
            separable_pool: 50_000,
            separable_tol: 1e-6,
            witness_iters: 400,
            seed: 0x5eed,
        }
    }
}

impl OracleParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if !(self.psd_tol >= 0.0 && self.slice_tol >= 0.0 && self.seesaw_out >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if self.seesaw_restarts == 0 || self.seesaw_iters == 0 {
            return bad("see-saw needs at least one restart and one iteration");
        }
        if self.dykstra_max_iter == 0 || self.separable_pool == 0 {
            return bad("iteration caps and pool size must be positive");
        }
        Ok(())
    }

    pub(crate) fn psd_slack(&self, d: &HermMat) -> f64 {
        self.psd_tol * d.hs_norm().max(1.0)
    }
}

/// A convex body: cone, slice, and matrix size `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub cone: ConeId,
    pub n: usize,
    pub slice: Slice,
    #[serde(default)]
    pub params: OracleParams,
}

impl BodySpec {
    pub fn new(cone: ConeId, n: usize, slice: Slice) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "N must be at least 2, got {n}"
            )));
        }
        if slice == Slice::TNI && cone != ConeId::CP {
            return Err(Error::Unsupported(format!(
                "trace-non-increasing slice is defined for CP only, not {cone}"
            )));
        }
        Ok(Self {
            cone,
            n,
            slice,
            params: OracleParams::default(),
        })
    }

    pub fn with_params(mut self, params: OracleParams) -> Self {
        self.params = params;
        self
    }

    /// Side length `N²` of the Choi matrices.
    pub fn choi_dim(&self) -> usize {
        self.n * self.n
    }

    /// Real dimension of the body's affine hull.
    pub fn dimension(&self) -> usize {
        let n2 = self.n * self.n;
        match self.slice {
            Slice::Cone | Slice::TNI | Slice::Sym | Slice::SymPolar => n2 * n2,
            Slice::Base => n2 * n2 - 1,
            Slice::TP => n2 * n2 - n2,
        }
    }

    /// Reference center: `I/N` for bases and TP sections, `I/(2N)` for TNI,
    /// zero for the symmetric bodies.
    pub fn center(&self) -> HermMat {
        let n2 = self.choi_dim();
        let nf = self.n as f64;
        match self.slice {
            Slice::Sym | Slice::SymPolar => HermMat::zeros(n2),
            Slice::TNI => HermMat::identity(n2).scale(0.5 / nf),
            _ => HermMat::identity(n2).scale(1.0 / nf),
        }
    }

    /// Known in/out-radius about [`BodySpec::center`], where available.
    pub fn radii(&self) -> Option<(f64, f64)> {
        let n = self.n as f64;
        let k = (n * n - 1.0).sqrt();
        match self.slice {
            Slice::Base => Some((1.0 / k, k)),
            Slice::TP => match self.cone {
                // PPT channels satisfy λ_max(D) ≤ 1, hence ‖D − I/N‖² ≤ N − 1.
                ConeId::T | ConeId::SP => Some((1.0 / k, (n - 1.0).sqrt())),
                _ => Some((1.0 / k, k)),
            },
            Slice::TNI => Some((0.5 / n, (n * n - 0.75).sqrt())),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        format!("{}_{}^{}", self.cone, self.n, self.slice)
    }
}

/// Outcome of a membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    In,
    Out,
    Unknown,
}

/// Evidence attached to a [`Verdict`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `⟨v|M|v⟩ = value` with `M = D` or `M = D^{T_B}`.
    Eigenvector {
        vector: Vec<C64>,
        value: f64,
        partial_transpose: bool,
    },
    /// `⟨η|Φ(|ξ⟩⟨ξ|)|η⟩ = value`.
    ProductPair {
        xi: Vec<C64>,
        eta: Vec<C64>,
        value: f64,
    },
    /// `D = A + B^{T_B}` with `A, B ⪰ 0`.
    Decomposition {
        a: MatrixJson,
        b: MatrixJson,
        residual: f64,
    },
    /// `D/Tr D ≈ Σ w_i |ξ_i η_i⟩⟨ξ_i η_i|`.
    Separable {
        terms: Vec<(f64, Vec<C64>, Vec<C64>)>,
        residual: f64,
    },
    /// Distance of `D/Tr D` from the maximally mixed state against the separable ball radius.
    Ball {
        distance: f64,
        radius: f64,
    },
    /// PPT state `σ` with `Tr(Dσ) = value`.
    PptWitness {
        sigma: MatrixJson,
        value: f64,
    },
    /// Violated affine or order constraint.
    Constraint {
        name: String,
        value: f64,
    },
    /// Decomposition `y = X + Γ(y − X)` with trace-norm cost `value`.
    SymPrimal {
        x: MatrixJson,
        value: f64,
    },
    /// Dual matrix `Z` with `‖Z‖_∞, ‖Z^Γ‖_∞ ≤ 1` and `⟨y, Z⟩ = value`.
    SymDual {
        z: MatrixJson,
        value: f64,
    },
    /// Verdict of the dual cone on `e ∓ y`.
    Dual {
        side: i8,
        inner: Box<Verdict>,
    },
    Note {
        text: String,
    },
}

/// Membership verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    /// Smallest slack seen (negative when violated).
    pub margin: f64,
    pub certificate: Option<Certificate>,
    /// True when `In` rests on a non-exhaustive search.
    pub heuristic: bool,
}

impl Verdict {
    pub fn inside(margin: f64, certificate: Option<Certificate>) -> Self {
        Self {
            status: Status::In,
            margin,
            certificate,
            heuristic: false,
        }
    }

    pub fn outside(margin: f64, certificate: Certificate) -> Self {
        Self {
            status: Status::Out,
            margin,
            certificate: Some(certificate),
            heuristic: false,
        }
    }

    pub fn unknown(margin: f64, certificate: Option<Certificate>) -> Self {
        Self {
            status: Status::Unknown,
            margin,
            certificate,
            heuristic: true,
        }
    }

    pub fn heuristic(mut self) -> Self {
        self.heuristic = true;
        self
    }

    pub fn is_in(&self) -> bool {
        self.status == Status::In
    }

    pub fn is_out(&self) -> bool {
        self.status == Status::Out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

/// Re-evaluates an `Out` certificate against `d` (an `N²×N²` Choi matrix).
///
/// Returns the recomputed violating value; negative means the violation holds.
pub fn reevaluate_certificate(cert: &Certificate, d: &HermMat, n: usize) -> Option<f64> {
    use crate::matcore::partial_transpose_herm;
    match cert {
        Certificate::Eigenvector {
            vector,
            partial_transpose,
            ..
        } => {
            let m = if *partial_transpose {
                partial_transpose_herm(d, n)
            } else {
                d.clone()
            };
            Some(m.expectation(vector).re)
        }
        Certificate::ProductPair { xi, eta, .. } => Some(seesaw::product_value(d, n, xi, eta)),
        Certificate::PptWitness { sigma, .. } => {
            let s = HermMat::new(crate::matcore::CMat::try_from(sigma.clone()).ok()?).ok()?;
            Some(d.hs_inner(&s))
        }
        _ => None,
    }
}
