//! Problem file format, version "1".

use serde::{Deserialize, Serialize};

use crate::evolution::SolveOptions;
use crate::hypotheses::HypothesisConfig;

pub const FORMAT_VERSION: &str = "1";

type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub grid: GridSpec,
    /// Generator, dense row-major.
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixMapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<VectorMapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<VectorMapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<NonlocalSpec>,
    pub vi: ViSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub hypotheses: HypothesisConfig,
    /// Radius of the state ball used for construction-time and growth probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridKindSpec {
    #[default]
    Uniform,
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub intervals: usize,
    #[serde(default)]
    pub kind: GridKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// `B(xi, theta)`, an `n x m` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixMapSpec {
    Constant {
        matrix: Matrix,
    },
    /// Entry-wise expressions in `xi` and `theta_i`.
    Expr {
        entries: Vec<Vec<String>>,
    },
}

/// `f(xi, theta)` or `g(xi, theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorMapSpec {
    Constant {
        vector: Vec<f64>,
    },
    /// `matrix theta + offset`.
    Affine {
        matrix: Matrix,
        offset: Vec<f64>,
    },
    /// Component-wise expressions in `xi` and `theta_i`.
    Expr {
        components: Vec<String>,
    },
}

/// A time in `[0, T]` given as a number or as the string `"T"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeRef {
    At(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTerm {
    pub time: TimeRef,
    pub matrix: Matrix,
}

/// Nonlocal initial condition `theta(0) = h(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlocalSpec {
    Constant {
        vector: Vec<f64>,
    },
    /// `sum_j M_j theta(t_j) + offset`, with `theta` interpolated linearly.
    PointSum {
        terms: Vec<PointTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    /// `M (1/T) int_0^T theta + offset` (trapezoid rule).
    Mean {
        matrix: Matrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViSpec {
    pub set: SetSpec,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub phi: PhiSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{x : normals_i . x <= offsets_i}` with a strictly feasible point.
    Halfspaces {
        normals: Matrix,
        offsets: Vec<f64>,
        interior: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// `G(u) = matrix u + offset`.
    Affine { matrix: Matrix, offset: Vec<f64> },
    /// Component-wise expressions in `u_i`.
    Expr {
        components: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    #[default]
    Zero,
    WeightedL1 {
        weights: Vec<f64>,
    },
    /// `1/2 u' P u + r' u`.
    Quadratic {
        matrix: Matrix,
        linear: Vec<f64>,
    },
    PiecewiseLinear {
        components: Vec<PiecewiseSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_outer: usize,
    pub damping: f64,
    pub seed: u64,
    pub vi_tol: f64,
    pub vi_max_iter: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            tol: d.tol,
            max_outer: d.max_outer,
            damping: d.damping,
            seed: 0,
            vi_tol: d.vi_tol,
            vi_max_iter: d.vi_max_iter,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_outer: self.max_outer,
            damping: self.damping,
            vi_tol: self.vi_tol,
            vi_max_iter: self.vi_max_iter,
        }
    }
}
