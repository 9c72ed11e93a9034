//! Single-qubit Kraus noise channels.
//!
//! Every kind is built from its published operator set. The thermal-relaxation
//! set `{sqrt(1-p0-p1) I, sqrt(p1) σ-, sqrt(p0) σ+}` does not complete to the
//! identity (`Σ K†K = diag(1-p0, 1-p1)`), so it is flagged non-trace-preserving;
//! [`ThermalModel::Corrected`] selects a trace-preserving alternative with the
//! same population transfer rates.
//!
//! Ladder operators follow the Pauli-algebra convention `σ± = (X ± iY)/2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dmcore::{pauli, ComplexMatrix, DensityMatrix, C64, STRUCTURAL_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseKind {
    Dephasing,
    AmplitudeDamping,
    Depolarizing,
    ThermalRelaxation,
    BitFlip,
    PhaseFlip,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::Dephasing,
        NoiseKind::AmplitudeDamping,
        NoiseKind::Depolarizing,
        NoiseKind::ThermalRelaxation,
        NoiseKind::BitFlip,
        NoiseKind::PhaseFlip,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::ThermalRelaxation => "thermal_relaxation",
            NoiseKind::BitFlip => "bit_flip",
            NoiseKind::PhaseFlip => "phase_flip",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.slug().replace('_', "") == norm || format!("{k:?}").to_ascii_lowercase() == norm)
            .ok_or_else(|| Error::Config(format!("unknown noise kind `{s}`")))
    }
}

/// Which thermal-relaxation operator set to build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalModel {
    /// The published operator set; loses trace.
    #[default]
    Verbatim,
    /// Two-sided damping that completes to the identity.
    Corrected,
}

/// Named channel parameters. Only the ones relevant to a kind are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
}

impl ChannelParams {
    pub fn probability(p: f64) -> Self {
        Self {
            p: Some(p),
            ..Self::default()
        }
    }

    pub fn gamma(gamma: f64) -> Self {
        Self {
            gamma: Some(gamma),
            ..Self::default()
        }
    }

    pub fn thermal(p0: f64, p1: f64) -> Self {
        Self {
            p0: Some(p0),
            p1: Some(p1),
            ..Self::default()
        }
    }

    /// Maps a single sweep level onto the parameters of `kind`.
    ///
    /// Thermal relaxation splits the level evenly: `p0 = p1 = level / 2`.
    pub fn from_level(kind: NoiseKind, level: f64) -> Self {
        match kind {
            NoiseKind::AmplitudeDamping => Self::gamma(level),
            NoiseKind::ThermalRelaxation => Self::thermal(level / 2.0, level / 2.0),
            _ => Self::probability(level),
        }
    }

    fn require(value: Option<f64>, kind: NoiseKind, name: &'static str) -> Result<f64> {
        let v = value.ok_or(Error::MissingParameter { kind, name })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParameterOutOfRange { name, value: v });
        }
        Ok(v)
    }
}

/// A single-qubit channel as a Kraus operator set.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: NoiseKind,
    params: ChannelParams,
    thermal_model: ThermalModel,
    operators: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl KrausChannel {
    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn params(&self) -> ChannelParams {
        self.params
    }

    pub fn thermal_model(&self) -> ThermalModel {
        self.thermal_model
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ K_i† K_i`.
    pub fn completeness_sum(&self) -> ComplexMatrix {
        completeness_sum(&self.operators)
    }

    /// `max |Σ K_i† K_i - I|`.
    pub fn completeness_residual(&self) -> f64 {
        self.completeness_sum().max_abs_diff(&ComplexMatrix::identity(2))
    }
}

fn completeness_sum(ops: &[ComplexMatrix]) -> ComplexMatrix {
    ops.iter()
        .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&k.adjoint() * k))
}

/// Builds the published operator set for `kind`; thermal relaxation uses
/// [`ThermalModel::Verbatim`].
pub fn build_channel(kind: NoiseKind, params: ChannelParams) -> Result<KrausChannel> {
    build_channel_with(kind, params, ThermalModel::Verbatim)
}

pub fn build_channel_with(kind: NoiseKind, params: ChannelParams, thermal_model: ThermalModel) -> Result<KrausChannel> {
    let id = pauli::identity();
    let operators = match kind {
        NoiseKind::Dephasing | NoiseKind::PhaseFlip => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            vec![id.scale_real((1.0 - p).sqrt()), pauli::z().scale_real(p.sqrt())]
        }
        NoiseKind::BitFlip => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            vec![id.scale_real((1.0 - p).sqrt()), pauli::x().scale_real(p.sqrt())]
        }
        NoiseKind::Depolarizing => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            let side = (p / 4.0).sqrt();
            vec![
                id.scale_real((1.0 - 3.0 * p / 4.0).sqrt()),
                pauli::x().scale_real(side),
                pauli::y().scale_real(side),
                pauli::z().scale_real(side),
            ]
        }
        NoiseKind::AmplitudeDamping => {
            let g = ChannelParams::require(params.gamma, kind, "gamma")?;
            vec![
                ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - g).sqrt()]])?,
                ComplexMatrix::from_real_rows(&[&[0.0, g.sqrt()], &[0.0, 0.0]])?,
            ]
        }
        NoiseKind::ThermalRelaxation => {
            let p0 = ChannelParams::require(params.p0, kind, "p0")?;
            let p1 = ChannelParams::require(params.p1, kind, "p1")?;
            if p0 + p1 > 1.0 {
                return Err(Error::ParameterOutOfRange {
                    name: "p0 + p1",
                    value: p0 + p1,
                });
            }
            match thermal_model {
                ThermalModel::Verbatim => vec![
                    id.scale_real((1.0 - p0 - p1).sqrt()),
                    pauli::sigma_minus().scale_real(p1.sqrt()),
                    pauli::sigma_plus().scale_real(p0.sqrt()),
                ],
                ThermalModel::Corrected => vec![
                    ComplexMatrix::from_real_rows(&[&[(1.0 - p1).sqrt(), 0.0], &[0.0, (1.0 - p0).sqrt()]])?,
                    pauli::sigma_minus().scale_real(p1.sqrt()),
                    pauli::sigma_plus().scale_real(p0.sqrt()),
                ],
            }
        }
    };
    let residual = completeness_sum(&operators).max_abs_diff(&ComplexMatrix::identity(2));
    Ok(KrausChannel {
        kind,
        params,
        thermal_model,
        operators,
        trace_preserving: residual <= STRUCTURAL_TOL,
    })
}

/// `ρ' = Σ K_i ρ K_i†` with each `K_i` acting on `target_qubit`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, target_qubit: usize) -> Result<DensityMatrix> {
    if target_qubit >= rho.n_qubits() {
        return Err(Error::QubitOutOfRange {
            index: target_qubit,
            n_qubits: rho.n_qubits(),
        });
    }
    rho.operator_sum_local(&ch.operators, &[target_qubit])
}

/// Entrywise closed-form single-qubit evolution for each published channel.
///
/// Independent of the Kraus path; thermal relaxation always uses the
/// published (verbatim) expression.
pub fn closed_form_evolve(kind: NoiseKind, params: ChannelParams, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.n_qubits() != 1 {
        return Err(Error::Unsupported(format!(
            "closed form is single-qubit only, got {} qubits",
            rho.n_qubits()
        )));
    }
    let r00 = rho.entry(0, 0);
    let r01 = rho.entry(0, 1);
    let r10 = rho.entry(1, 0);
    let r11 = rho.entry(1, 1);
    let re = |x: f64| C64::new(x, 0.0);

    let [a, b, c, d] = match kind {
        NoiseKind::Dephasing | NoiseKind::PhaseFlip => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            let f = re(1.0 - 2.0 * p);
            [r00, f * r01, f * r10, r11]
        }
        NoiseKind::AmplitudeDamping => {
            let g = ChannelParams::require(params.gamma, kind, "gamma")?;
            let f = re((1.0 - g).sqrt());
            [r00 + re(g) * r11, f * r01, f * r10, re(1.0 - g) * r11]
        }
        NoiseKind::Depolarizing => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            let f = re(1.0 - p);
            [f * r00 + re(p / 2.0), f * r01, f * r10, f * r11 + re(p / 2.0)]
        }
        NoiseKind::ThermalRelaxation => {
            let p0 = ChannelParams::require(params.p0, kind, "p0")?;
            let p1 = ChannelParams::require(params.p1, kind, "p1")?;
            if p0 + p1 > 1.0 {
                return Err(Error::ParameterOutOfRange {
                    name: "p0 + p1",
                    value: p0 + p1,
                });
            }
            let f = re(1.0 - p0 - p1);
            [f * r00 + re(p0) * r11, f * r01, f * r10, f * r11 + re(p1) * r00]
        }
        NoiseKind::BitFlip => {
            let p = ChannelParams::require(params.p, kind, "p")?;
            let (keep, flip) = (re(1.0 - p), re(p));
            [
                keep * r00 + flip * r11,
                keep * r01 + flip * r10,
                keep * r10 + flip * r01,
                keep * r11 + flip * r00,
            ]
        }
    };
    DensityMatrix::from_matrix(ComplexMatrix::from_vec(2, 2, vec![a, b, c, d])?)
}

/// Noise attached to every gate of an evolved circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub level: f64,
    #[serde(default)]
    pub thermal_model: ThermalModel,
}

impl NoiseConfig {
    pub fn new(kind: NoiseKind, level: f64) -> Self {
        Self {
            kind,
            level,
            thermal_model: ThermalModel::Verbatim,
        }
    }

    pub fn with_thermal_model(mut self, model: ThermalModel) -> Self {
        self.thermal_model = model;
        self
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        if !(0.0..=1.0).contains(&self.level) {
            return Err(Error::ParameterOutOfRange {
                name: "level",
                value: self.level,
            });
        }
        build_channel_with(
            self.kind,
            ChannelParams::from_level(self.kind, self.level),
            self.thermal_model,
        )
    }
}
