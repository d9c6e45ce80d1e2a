//! Ansatz construction and data-to-angle encoding.
//!
//! The ansatz family alternates brick-wall rows of parameterized rotation
//! gates with rows of fixed entangling gates. The fermionic kinds use
//! two-qubit matchgates throughout; the unrestricted baselines (`Pqc`,
//! `TensorPqc`) use per-wire single-qubit rotations and, for `Pqc`, a
//! controlled-X brick wall instead of the matchgate entanglers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, BlockKind, Mat2, Matchgate};

/// Scaling coefficient applied to the random offsets `theta_r`.
pub const C_THETA: f64 = std::f64::consts::FRAC_PI_2;
/// Scaling coefficient applied to the data features.
pub const C_X: f64 = std::f64::consts::FRAC_PI_2;

/// The circuit families supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzKind {
    /// Matchgate rotations with `U(Z, X)` entanglers.
    Fpqc,
    /// Matchgate rotations with `U(H, H)` entanglers.
    Hfpqc,
    /// Matchgate rotations, no entangler rows.
    TensorFpqc,
    /// Unrestricted baseline: single-qubit rotations plus CX entanglers.
    /// Only executable on the statevector backend.
    Pqc,
    /// Unrestricted unentangled baseline: single-qubit rotations only.
    TensorPqc,
}

impl AnsatzKind {
    /// True for the kinds whose gates are all matchgates, i.e. the kinds
    /// with a polynomial-size transfer-matrix representation.
    pub fn is_fermionic(self) -> bool {
        matches!(self, AnsatzKind::Fpqc | AnsatzKind::Hfpqc | AnsatzKind::TensorFpqc)
    }

    pub fn has_entanglers(self) -> bool {
        matches!(self, AnsatzKind::Fpqc | AnsatzKind::Hfpqc | AnsatzKind::Pqc)
    }

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::Fpqc => "fpqc",
            AnsatzKind::Hfpqc => "hfpqc",
            AnsatzKind::TensorFpqc => "tensor-fpqc",
            AnsatzKind::Pqc => "pqc",
            AnsatzKind::TensorPqc => "tensor-pqc",
        }
    }
}

impl std::str::FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fpqc" => Ok(AnsatzKind::Fpqc),
            "hfpqc" => Ok(AnsatzKind::Hfpqc),
            "tensor-fpqc" | "tensor_fpqc" | "xfpqc" => Ok(AnsatzKind::TensorFpqc),
            "pqc" => Ok(AnsatzKind::Pqc),
            "tensor-pqc" | "tensor_pqc" | "xpqc" => Ok(AnsatzKind::TensorPqc),
            other => Err(Error::Config(format!("unknown ansatz kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation axis of a parameterized gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationAxis {
    Y,
    Z,
}

impl RotationAxis {
    fn block(self, angle: f64) -> Mat2 {
        match self {
            RotationAxis::Y => gates::rotation_y(angle),
            RotationAxis::Z => gates::rotation_z(angle),
        }
    }
}

/// Block pair of a fixed matchgate entangler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntanglerBlocks {
    /// `U(Z, X)`.
    Zx,
    /// `U(H, H)`.
    Hh,
}

/// One gate placement in a circuit layout. Wires are 0-based; two-qubit
/// placements act on `(wire, wire + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Two-qubit matchgate rotation `U(R(slot0), R(slot1))`.
    MatchRotation {
        axis: RotationAxis,
        wire: usize,
        slots: [usize; 2],
    },
    /// Fixed two-qubit matchgate entangler.
    MatchEntangler { blocks: EntanglerBlocks, wire: usize },
    /// Single-qubit rotation (unrestricted baselines only).
    WireRotation {
        axis: RotationAxis,
        wire: usize,
        slot: usize,
    },
    /// Controlled-X with control `wire`, target `wire + 1` (PQC baseline).
    ControlledX { wire: usize },
}

impl Placement {
    /// First wire the placement touches.
    pub fn wire(&self) -> usize {
        match *self {
            Placement::MatchRotation { wire, .. }
            | Placement::MatchEntangler { wire, .. }
            | Placement::WireRotation { wire, .. }
            | Placement::ControlledX { wire } => wire,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        !matches!(self, Placement::WireRotation { .. })
    }

    pub fn is_entangler(&self) -> bool {
        matches!(
            self,
            Placement::MatchEntangler { .. } | Placement::ControlledX { .. }
        )
    }
}

/// A fully laid-out circuit: gate placements plus parameter-slot wiring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitSpec {
    n: usize,
    kind: AnsatzKind,
    depth: usize,
    layout: Vec<Placement>,
    num_params: usize,
}

impl CircuitSpec {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> AnsatzKind {
        self.kind
    }

    /// Number of layer pairs.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layout(&self) -> &[Placement] {
        &self.layout
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// JSON dump of the gate list, used for debugging and golden tests.
    pub fn layout_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Encoding configuration: fixed scale factors plus the per-slot random
/// offsets drawn from `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodingParams {
    pub c_theta: f64,
    pub c_x: f64,
    pub theta_r: Vec<f64>,
    pub seed: u64,
}

/// Rotation angles for every parameter slot of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector(pub Vec<f64>);

impl AngleVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Circuit depth in layer pairs: `ceil(chi / n)` for `chi` features.
pub fn depth(chi: usize, n: usize) -> usize {
    chi.div_ceil(n)
}

struct LayoutBuilder {
    layout: Vec<Placement>,
    next_slot: usize,
}

impl LayoutBuilder {
    fn new() -> Self {
        Self {
            layout: Vec::new(),
            next_slot: 0,
        }
    }

    /// Brick-wall pairs: odd pairs (0,1),(2,3),... then even pairs
    /// (1,2),(3,4),...
    fn brick_wall_wires(n: usize) -> impl Iterator<Item = usize> {
        (0..n.saturating_sub(1))
            .step_by(2)
            .chain((1..n.saturating_sub(1)).step_by(2))
    }

    fn match_rotation_row(&mut self, n: usize, axis: RotationAxis) {
        for wire in Self::brick_wall_wires(n) {
            let slots = [self.next_slot, self.next_slot + 1];
            self.next_slot += 2;
            self.layout.push(Placement::MatchRotation { axis, wire, slots });
        }
    }

    fn match_entangler_row(&mut self, n: usize, blocks: EntanglerBlocks) {
        for wire in Self::brick_wall_wires(n) {
            self.layout.push(Placement::MatchEntangler { blocks, wire });
        }
    }

    fn wire_rotation_row(&mut self, n: usize, axis: RotationAxis) {
        for wire in 0..n {
            let slot = self.next_slot;
            self.next_slot += 1;
            self.layout.push(Placement::WireRotation { axis, wire, slot });
        }
    }

    fn cx_row(&mut self, n: usize) {
        for wire in Self::brick_wall_wires(n) {
            self.layout.push(Placement::ControlledX { wire });
        }
    }
}

/// Builds the circuit layout for `(n, chi, kind)` and draws the random
/// encoding offsets from `seed`. Pure: identical inputs give identical
/// outputs.
pub fn build_ansatz(
    n: usize,
    chi: usize,
    kind: AnsatzKind,
    seed: u64,
) -> Result<(CircuitSpec, EncodingParams)> {
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    if chi == 0 {
        return Err(Error::Empty {
            what: "feature set (chi = 0)",
        });
    }
    let d = depth(chi, n);
    let mut b = LayoutBuilder::new();
    for _ in 0..d {
        match kind {
            AnsatzKind::Fpqc | AnsatzKind::Hfpqc | AnsatzKind::TensorFpqc => {
                let blocks = if kind == AnsatzKind::Hfpqc {
                    EntanglerBlocks::Hh
                } else {
                    EntanglerBlocks::Zx
                };
                b.match_rotation_row(n, RotationAxis::Y);
                if kind.has_entanglers() {
                    b.match_entangler_row(n, blocks);
                }
                b.match_rotation_row(n, RotationAxis::Z);
                if kind.has_entanglers() {
                    b.match_entangler_row(n, blocks);
                }
            }
            AnsatzKind::Pqc | AnsatzKind::TensorPqc => {
                b.wire_rotation_row(n, RotationAxis::Y);
                if kind.has_entanglers() {
                    b.cx_row(n);
                }
                b.wire_rotation_row(n, RotationAxis::Z);
                if kind.has_entanglers() {
                    b.cx_row(n);
                }
            }
        }
    }
    let num_params = b.next_slot;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta_r: Vec<f64> = (0..num_params).map(|_| rng.gen::<f64>()).collect();
    let spec = CircuitSpec {
        n,
        kind,
        depth: d,
        layout: b.layout,
        num_params,
    };
    let params = EncodingParams {
        c_theta: C_THETA,
        c_x: C_X,
        theta_r,
        seed,
    };
    Ok((spec, params))
}

/// Encodes a feature vector into rotation angles: slot `j` receives
/// `c_theta * theta_r[j] + c_x * x[j mod chi]`.
pub fn encode_angles(
    x: &[f64],
    params: &EncodingParams,
    spec: &CircuitSpec,
) -> Result<AngleVector> {
    if x.is_empty() {
        return Err(Error::Empty {
            what: "feature vector",
        });
    }
    if params.theta_r.len() != spec.num_params {
        return Err(Error::DimensionMismatch {
            what: "theta_r",
            expected: spec.num_params,
            got: params.theta_r.len(),
        });
    }
    let chi = x.len();
    let angles = (0..spec.num_params)
        .map(|j| params.c_theta * params.theta_r[j] + params.c_x * x[j % chi])
        .collect();
    Ok(AngleVector(angles))
}

/// A placement resolved against a concrete angle vector.
#[derive(Debug, Clone)]
pub enum ConcreteGate {
    Match(Matchgate),
    Single { wire: usize, unitary: Mat2 },
    ControlledX { wire: usize },
}

/// Resolves every placement of `spec` into a concrete gate using `angles`.
pub fn concrete_gates(spec: &CircuitSpec, angles: &AngleVector) -> Result<Vec<ConcreteGate>> {
    if angles.len() != spec.num_params {
        return Err(Error::AngleCountMismatch {
            expected: spec.num_params,
            got: angles.len(),
        });
    }
    let a = angles.as_slice();
    spec.layout
        .iter()
        .map(|p| match *p {
            Placement::MatchRotation { axis, wire, slots } => {
                let g = Matchgate::new(axis.block(a[slots[0]]), axis.block(a[slots[1]]), wire)?;
                Ok(ConcreteGate::Match(g))
            }
            Placement::MatchEntangler { blocks, wire } => {
                let (even, odd) = match blocks {
                    EntanglerBlocks::Zx => (
                        gates::rotation_block(BlockKind::Z, None)?,
                        gates::rotation_block(BlockKind::X, None)?,
                    ),
                    EntanglerBlocks::Hh => (
                        gates::rotation_block(BlockKind::H, None)?,
                        gates::rotation_block(BlockKind::H, None)?,
                    ),
                };
                Ok(ConcreteGate::Match(Matchgate::new(even, odd, wire)?))
            }
            Placement::WireRotation { axis, wire, slot } => Ok(ConcreteGate::Single {
                wire,
                unitary: axis.block(a[slot]),
            }),
            Placement::ControlledX { wire } => Ok(ConcreteGate::ControlledX { wire }),
        })
        .collect()
}
