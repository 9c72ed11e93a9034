//! Gate-level circuits: the three data-encoding feature maps and the
//! trainable `RY` + `CX`-ring ansatz.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dmcore::{local, pauli, ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    RX(usize, f64),
    RY(usize, f64),
    RZ(usize, f64),
    Phase(usize, f64),
    CX { control: usize, target: usize },
}

impl Gate {
    /// Qubits the gate acts on, in local-operator order.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::RX(q, _) | Gate::RY(q, _) | Gate::RZ(q, _) | Gate::Phase(q, _) => vec![q],
            Gate::CX { control, target } => vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::RX(_, a) | Gate::RY(_, a) | Gate::RZ(_, a) | Gate::Phase(_, a) => Some(a),
            _ => None,
        }
    }

    /// Local unitary (2x2, or 4x4 with the control as the high bit).
    pub fn matrix(&self) -> ComplexMatrix {
        let c = |re: f64, im: f64| C64::new(re, im);
        let m2 = |a, b, cc, d| ComplexMatrix::from_vec(2, 2, vec![a, b, cc, d]).expect("2x2");
        match *self {
            Gate::H(_) => pauli::hadamard(),
            Gate::RX(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                m2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
            }
            Gate::RY(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                m2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
            }
            Gate::RZ(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                m2(c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s))
            }
            Gate::Phase(_, t) => m2(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, t)),
            Gate::CX { .. } => {
                let mut m = ComplexMatrix::zeros(4, 4);
                m[(0, 0)] = c(1.0, 0.0);
                m[(1, 1)] = c(1.0, 0.0);
                m[(2, 3)] = c(1.0, 0.0);
                m[(3, 2)] = c(1.0, 0.0);
                m
            }
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidGate(format!("non-finite angle in {self:?}")));
            }
        }
        let qubits = self.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!("{self:?} repeats a qubit")));
        }
        Ok(())
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::dmcore::MAX_QUBITS {
            return Err(Error::Dimension(format!("{n_qubits} qubits")));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends every gate of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension(format!(
                "appending a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }
}

/// Full register unitary `G_k ... G_1` of a circuit.
pub fn apply_circuit_unitary(circuit: &Circuit) -> ComplexMatrix {
    let n = circuit.n_qubits();
    let mut u = ComplexMatrix::identity(1 << n);
    for gate in circuit.gates() {
        u = local::apply_left(&u, &gate.matrix(), &gate.qubits(), n);
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureMapKind {
    ZMap,
    ZZMap,
    PauliMap,
}

impl FeatureMapKind {
    pub const ALL: [FeatureMapKind; 3] = [FeatureMapKind::ZMap, FeatureMapKind::ZZMap, FeatureMapKind::PauliMap];

    pub fn slug(self) -> &'static str {
        match self {
            FeatureMapKind::ZMap => "z",
            FeatureMapKind::ZZMap => "zz",
            FeatureMapKind::PauliMap => "pauli",
        }
    }
}

impl fmt::Display for FeatureMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FeatureMapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .to_ascii_lowercase()
            .trim_end_matches("featuremap")
            .trim_end_matches("map")
        {
            "z" => Ok(FeatureMapKind::ZMap),
            "zz" => Ok(FeatureMapKind::ZZMap),
            "pauli" => Ok(FeatureMapKind::PauliMap),
            _ => Err(Error::Config(format!("unknown feature map `{s}`"))),
        }
    }
}

/// Default Pauli terms of [`FeatureMapKind::PauliMap`].
pub const DEFAULT_PAULIS: [&str; 3] = ["Z", "ZZ", "XY"];

/// A feature-map specification: kind, repetitions and (for the Pauli map)
/// the Pauli terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub kind: FeatureMapKind,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Pauli terms for [`FeatureMapKind::PauliMap`]; character `k` acts on
    /// the `k`-th qubit of each linear-entanglement block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paulis: Option<Vec<String>>,
}

fn default_reps() -> usize {
    2
}

impl FeatureMap {
    pub fn new(kind: FeatureMapKind) -> Self {
        Self {
            kind,
            reps: default_reps(),
            paulis: None,
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_paulis<S: Into<String>>(mut self, paulis: impl IntoIterator<Item = S>) -> Self {
        self.paulis = Some(paulis.into_iter().map(Into::into).collect());
        self
    }

    /// Short label used in file names, e.g. `zz2`.
    pub fn label(&self) -> String {
        format!("{}{}", self.kind.slug(), self.reps)
    }

    /// Pauli terms, upper-cased, for the Pauli map.
    pub fn pauli_terms(&self) -> Vec<String> {
        match (&self.kind, &self.paulis) {
            (FeatureMapKind::ZMap, _) => vec!["Z".into()],
            (FeatureMapKind::ZZMap, _) => vec!["Z".into(), "ZZ".into()],
            (FeatureMapKind::PauliMap, Some(p)) => p.iter().map(|s| s.to_ascii_uppercase()).collect(),
            (FeatureMapKind::PauliMap, None) => DEFAULT_PAULIS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Encodes `x` as a gate list on `x.len()` qubits.
///
/// Every repetition starts with a Hadamard layer. Single-qubit terms rotate
/// by `Phase(2 x_i)`; multi-qubit terms on linear blocks `(i, i+1, ...)` use
/// the angle `2 Π (π - x_k)` realized as a CX ladder around a phase gate,
/// with `X` terms conjugated by `H` and `Y` terms by `RX(±π/2)`.
pub fn build_feature_map(fm: &FeatureMap, x: &[f64]) -> Result<Circuit> {
    if !(1..=4).contains(&fm.reps) {
        return Err(Error::Config(format!("feature-map reps {} outside 1..=4", fm.reps)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.len();
    let mut circuit = Circuit::new(n)?;
    let terms = fm.pauli_terms();
    for term in &terms {
        if term.is_empty() || !term.chars().all(|ch| matches!(ch, 'X' | 'Y' | 'Z' | 'I')) {
            return Err(Error::Config(format!("invalid Pauli term `{term}`")));
        }
    }
    for _ in 0..fm.reps {
        for q in 0..n {
            circuit.push(Gate::H(q))?;
        }
        for term in &terms {
            let width = term.len();
            if width > n {
                continue;
            }
            for start in 0..=(n - width) {
                let block: Vec<usize> = (start..start + width).collect();
                let angle = if width == 1 {
                    2.0 * x[start]
                } else {
                    2.0 * block.iter().map(|&k| PI - x[k]).product::<f64>()
                };
                push_pauli_evolution(&mut circuit, term, &block, angle)?;
            }
        }
    }
    Ok(circuit)
}

fn push_pauli_evolution(circuit: &mut Circuit, term: &str, block: &[usize], angle: f64) -> Result<()> {
    let active: Vec<(char, usize)> = term
        .chars()
        .zip(block.iter().copied())
        .filter(|(p, _)| *p != 'I')
        .collect();
    let Some(&(_, last)) = active.last() else {
        return Ok(());
    };
    for &(p, q) in &active {
        match p {
            'X' => {
                circuit.push(Gate::H(q))?;
            }
            'Y' => {
                circuit.push(Gate::RX(q, FRAC_PI_2))?;
            }
            _ => {}
        }
    }
    for w in active.windows(2) {
        circuit.push(Gate::CX {
            control: w[0].1,
            target: w[1].1,
        })?;
    }
    circuit.push(Gate::Phase(last, angle))?;
    for w in active.windows(2).rev() {
        circuit.push(Gate::CX {
            control: w[0].1,
            target: w[1].1,
        })?;
    }
    for &(p, q) in &active {
        match p {
            'X' => {
                circuit.push(Gate::H(q))?;
            }
            'Y' => {
                circuit.push(Gate::RX(q, -FRAC_PI_2))?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Number of ansatz parameters for `layers` entangling layers.
pub fn ansatz_parameter_count(n_qubits: usize, layers: usize) -> usize {
    n_qubits * (layers + 1)
}

/// `RY` layer, then `layers` x (`CX` ring, `RY` layer).
///
/// The ring is `CX(i, i+1 mod n)` for every `i`; it is omitted on one qubit.
pub fn build_ansatz(n_qubits: usize, layers: usize, theta: &[f64]) -> Result<Circuit> {
    let expected = ansatz_parameter_count(n_qubits, layers);
    if theta.len() != expected {
        return Err(Error::Dimension(format!(
            "ansatz on {n_qubits} qubits with {layers} layers needs {expected} parameters, got {}",
            theta.len()
        )));
    }
    let mut circuit = Circuit::new(n_qubits)?;
    let mut params = theta.iter().copied();
    for layer in 0..=layers {
        if layer > 0 && n_qubits > 1 {
            for i in 0..n_qubits {
                circuit.push(Gate::CX {
                    control: i,
                    target: (i + 1) % n_qubits,
                })?;
            }
        }
        for q in 0..n_qubits {
            circuit.push(Gate::RY(q, params.next().expect("length checked")))?;
        }
    }
    Ok(circuit)
}
