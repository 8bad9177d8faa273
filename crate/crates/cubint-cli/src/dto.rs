//! Wire formats: JSON structures for candidate files, job specs and
//! reports. Rationals travel as strings "p/q" so exact data never passes
//! through floats; expressions travel as text in the library's infix
//! format.

use cubint_core::charts::{ChartTag, Coeffs10, COEFF_NAMES};
use cubint_core::determine::{PotentialComponent, SeparablePotential};
use cubint_core::expr::{parse_expr, Expr};
use cubint_core::rat::{format_rat, parse_rat, Rat};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug)]
pub enum DtoError {
    BadRational(String),
    BadCoefficient(String),
    BadExpr { field: String, message: String },
    BadChart(String),
}

impl std::fmt::Display for DtoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DtoError::BadRational(s) => write!(f, "bad rational `{s}` (expected p/q)"),
            DtoError::BadCoefficient(s) => write!(f, "unknown coefficient `{s}`"),
            DtoError::BadExpr { field, message } => {
                write!(f, "bad expression in `{field}`: {message}")
            }
            DtoError::BadChart(s) => write!(f, "unknown chart `{s}`"),
        }
    }
}

impl std::error::Error for DtoError {}

pub fn parse_rat_str(s: &str) -> Result<Rat, DtoError> {
    parse_rat(s).ok_or_else(|| DtoError::BadRational(s.to_string()))
}

pub fn parse_expr_field(field: &str, s: &str) -> Result<Expr, DtoError> {
    parse_expr(s).map_err(|e| DtoError::BadExpr {
        field: field.to_string(),
        message: e.to_string(),
    })
}

pub fn coeffs_from_map(m: &BTreeMap<String, String>) -> Result<Coeffs10, DtoError> {
    let mut c = Coeffs10::zero();
    for (name, val) in m {
        let idx = COEFF_NAMES
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DtoError::BadCoefficient(name.clone()))?;
        c.0[idx] = parse_rat_str(val)?;
    }
    Ok(c)
}

pub fn coeffs_to_map(c: &Coeffs10) -> BTreeMap<String, String> {
    COEFF_NAMES
        .iter()
        .zip(c.0.iter())
        .map(|(n, v)| (n.to_string(), format_rat(v)))
        .collect()
}

pub fn chart_from_str(s: &str) -> Result<ChartTag, DtoError> {
    ChartTag::parse(s).ok_or_else(|| DtoError::BadChart(s.to_string()))
}

/// Separable potential descriptor: expression text per component plus
/// optional exact parameter values (a, aprime, a1, a2, sigma, ...).
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PotentialDto {
    pub chart: String,
    #[serde(default)]
    pub v1: Option<String>,
    #[serde(default)]
    pub v2: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl PotentialDto {
    pub fn build(&self) -> Result<SeparablePotential, DtoError> {
        let chart = chart_from_str(&self.chart)?;
        let v1 = match &self.v1 {
            Some(s) => parse_expr_field("v1", s)?,
            None => Expr::zero(),
        };
        let v2 = match &self.v2 {
            Some(s) => parse_expr_field("v2", s)?,
            None => Expr::zero(),
        };
        let mut params = Vec::new();
        for (name, val) in &self.params {
            params.push((name.clone(), parse_rat_str(val)?));
        }
        Ok(SeparablePotential {
            chart,
            comp1: PotentialComponent::Symbolic(v1),
            comp2: PotentialComponent::Symbolic(v2),
            params,
        })
    }
}

/// Candidate integral file: coefficients, gauge fields, hbar, potential.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CandidateDto {
    pub coeffs: BTreeMap<String, String>,
    pub g1: String,
    pub g2: String,
    #[serde(default)]
    pub hbar: Option<String>,
    pub potential: PotentialDto,
}

/// Residual report of the four determining equations.
#[derive(Serialize, Deserialize, Debug)]
pub struct CheckReport {
    pub eq_second_order: [String; 3],
    pub eq_zeroth_order: String,
    pub linear_compatibility: String,
    pub all_zero: bool,
    pub first_nonzero: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<ResidualPointDto>,
}

/// Residual values at one evaluation point (eq3, eq4, eq5, eq6,
/// linear compatibility).
#[derive(Serialize, Deserialize, Debug)]
pub struct ResidualPointDto {
    pub point: [f64; 2],
    pub values: Vec<String>,
}

/// Special-function job mirror of the CLI flags.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SpecFunJobDto {
    pub kind: String,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub g3: f64,
    #[serde(default)]
    pub z0: f64,
    #[serde(default)]
    pub w0: f64,
    #[serde(default)]
    pub dw0: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub tolerance: f64,
    pub samples: usize,
}

/// Kernel report on the wire.
#[derive(Serialize, Deserialize, Debug)]
pub struct KernelReportDto {
    pub chart: String,
    pub selected: Vec<String>,
    pub dimension: usize,
    pub sampled_dimension: usize,
    pub methods_agree: bool,
    pub basis: Vec<BTreeMap<String, String>>,
}

/// Reduced ODE on the wire.
#[derive(Serialize, Deserialize, Debug)]
pub struct OdeSpecDto {
    pub var: String,
    /// derivative orders 3, 2, 1, 0
    pub coeffs: [String; 4],
    pub inhomogeneity: Vec<InhomogTermDto>,
    pub fixed_var: String,
    pub fixed_value: String,
    pub degenerate: bool,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct InhomogTermDto {
    pub constant: String,
    pub multiplier: String,
}

/// Consistency report on the wire.
#[derive(Serialize, Deserialize, Debug)]
pub struct CompatReportDto {
    pub chart: String,
    pub vectors: usize,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
    pub worst_residual: String,
    pub per_vector: Vec<CompatVectorDto>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct CompatVectorDto {
    pub coeffs: BTreeMap<String, String>,
    pub max_residual: String,
    pub degenerate_points: usize,
}

/// Simulation job.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SimulateJobDto {
    pub potential: PotentialDto,
    #[serde(default)]
    pub candidate: Option<CandidateInlineDto>,
    #[serde(default)]
    pub integrals: Vec<NamedExprDto>,
    pub state0: [f64; 4],
    pub t_end: f64,
    pub tolerance: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CandidateInlineDto {
    pub coeffs: BTreeMap<String, String>,
    pub g1: String,
    pub g2: String,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct NamedExprDto {
    pub name: String,
    pub expr: String,
}

/// Gauge-field quadrature job.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SolveGJobDto {
    pub potential: PotentialDto,
    pub coeffs: BTreeMap<String, String>,
    pub window: WindowDto,
    pub basepoint: [f64; 2],
    pub resolution: usize,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct WindowDto {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Serialize, Deserialize, Debug)]
pub struct SolveGReportDto {
    pub base: [f64; 2],
    pub resolution: usize,
    pub residual_norms: [String; 3],
}

/// 17 significant digits, locale-free.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
