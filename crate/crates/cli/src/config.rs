//! Experiment configuration: flat `key = value` text with an optional
//! `[box]` section. Unknown keys and malformed values are rejected with the
//! offending line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use fracsep_core::envelope::SamplingBox;

use crate::expr::Expr;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    LinearCoeff,
    Nonlinear,
    Shifted,
}

/// Right-hand-side or coefficient selection: a named builtin or a parsed
/// expression.
#[derive(Debug, Clone)]
pub enum FuncSpec {
    PaperEx1,
    ConstLambda,
    CubicDamped,
    Expression(Expr),
}

impl FuncSpec {
    fn parse(text: &str, line: usize) -> Result<Self, ConfigError> {
        match text {
            "paper-ex1" => Ok(FuncSpec::PaperEx1),
            "const-lambda" => Ok(FuncSpec::ConstLambda),
            "cubic-damped" => Ok(FuncSpec::CubicDamped),
            other => Expr::parse(other)
                .map(FuncSpec::Expression)
                .map_err(|e| err(Some(line), format!("expression error {e}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub kind: ProblemKind,
    pub coeff: Option<FuncSpec>,
    pub rhs: Option<FuncSpec>,
    pub lambda: Option<f64>,
    pub x0: Option<f64>,
    pub x0_b: Option<f64>,
    pub t_end: f64,
    pub h: f64,
    pub measure_refine: usize,
    pub x_target: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub boxx: SamplingBox,
}

const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "kind",
    "coeff",
    "rhs",
    "lambda",
    "x0",
    "x0_b",
    "t_end",
    "h",
    "measure_refine",
    "x_target",
    "tol",
    "max_iter",
    "box.x_min",
    "box.x_max",
    "box.deadzone",
    "box.n_x",
];

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(None, format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(Some(line_no), "unterminated section header"))?
                    .trim();
                if name != "box" {
                    return Err(err(Some(line_no), format!("unknown section '[{name}]'")));
                }
                section = format!("{name}.");
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(Some(line_no), "expected 'key = value'"))?;
            let key = format!("{section}{}", key.trim());
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(Some(line_no), format!("unknown key '{key}'")));
            }
            if entries.insert(key.clone(), (value, line_no)).is_some() {
                return Err(err(Some(line_no), format!("duplicate key '{key}'")));
            }
        }

        let f64_field = |key: &str| -> Result<Option<(f64, usize)>, ConfigError> {
            match entries.get(key) {
                None => Ok(None),
                Some((v, line)) => v
                    .parse::<f64>()
                    .map(|x| Some((x, *line)))
                    .map_err(|_| err(Some(*line), format!("'{key}' is not a number: '{v}'"))),
            }
        };
        let require = |key: &str, got: Option<(f64, usize)>| -> Result<(f64, usize), ConfigError> {
            got.ok_or_else(|| err(None, format!("missing required key '{key}'")))
        };

        let (alpha, alpha_line) = require("alpha", f64_field("alpha")?)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(err(
                Some(alpha_line),
                format!("alpha must lie in (0, 1], got {alpha}"),
            ));
        }
        let (t_end, t_line) = require("t_end", f64_field("t_end")?)?;
        if !(t_end > 0.0) {
            return Err(err(Some(t_line), format!("t_end must be positive, got {t_end}")));
        }
        let (h, h_line) = require("h", f64_field("h")?)?;
        if !(h > 0.0) {
            return Err(err(Some(h_line), format!("h must be positive, got {h}")));
        }

        let (kind_text, kind_line) = entries
            .get("kind")
            .cloned()
            .ok_or_else(|| err(None, "missing required key 'kind'"))?;
        let kind = match kind_text.as_str() {
            "linear-coeff" => ProblemKind::LinearCoeff,
            "nonlinear" => ProblemKind::Nonlinear,
            "shifted" => ProblemKind::Shifted,
            other => {
                return Err(err(
                    Some(kind_line),
                    format!("kind must be linear-coeff, nonlinear, or shifted; got '{other}'"),
                ))
            }
        };

        let coeff = match entries.get("coeff") {
            Some((v, line)) => Some(FuncSpec::parse(v, *line)?),
            None => None,
        };
        let rhs = match entries.get("rhs") {
            Some((v, line)) => Some(FuncSpec::parse(v, *line)?),
            None => None,
        };
        match kind {
            ProblemKind::LinearCoeff => {
                let (spec, line) = match (&coeff, entries.get("coeff")) {
                    (Some(s), Some((_, l))) => (s, *l),
                    _ => return Err(err(None, "kind linear-coeff requires 'coeff'")),
                };
                if let FuncSpec::Expression(e) = spec {
                    if e.uses_x() {
                        return Err(err(
                            Some(line),
                            "'coeff' must be a function of t only; it mentions x",
                        ));
                    }
                }
                if matches!(spec, FuncSpec::CubicDamped) {
                    return Err(err(Some(line), "cubic-damped is not a linear coefficient"));
                }
            }
            ProblemKind::Nonlinear | ProblemKind::Shifted => {
                if rhs.is_none() {
                    return Err(err(None, "this kind requires 'rhs'"));
                }
                if matches!(rhs, Some(FuncSpec::PaperEx1)) {
                    // paper-ex1 as an rhs means a(t) * x
                }
            }
        }

        let lambda = f64_field("lambda")?.map(|(v, _)| v);
        let needs_lambda = matches!(coeff, Some(FuncSpec::ConstLambda))
            || matches!(rhs, Some(FuncSpec::ConstLambda));
        if needs_lambda && lambda.is_none() {
            return Err(err(None, "const-lambda requires a 'lambda' key"));
        }

        let x0 = f64_field("x0")?.map(|(v, _)| v);
        let x0_b = f64_field("x0_b")?.map(|(v, _)| v);
        let x_target = f64_field("x_target")?.map(|(v, _)| v);
        let tol = match f64_field("tol")? {
            Some((v, line)) => {
                if !(v > 0.0) {
                    return Err(err(Some(line), format!("tol must be positive, got {v}")));
                }
                Some(v)
            }
            None => None,
        };
        let max_iter = match entries.get("max_iter") {
            Some((v, line)) => Some(v.parse::<usize>().map_err(|_| {
                err(Some(*line), format!("'max_iter' is not a positive integer: '{v}'"))
            })?),
            None => None,
        };
        let measure_refine = match entries.get("measure_refine") {
            Some((v, line)) => {
                let n = v.parse::<usize>().map_err(|_| {
                    err(Some(*line), format!("'measure_refine' is not an integer: '{v}'"))
                })?;
                if n == 0 {
                    return Err(err(Some(*line), "measure_refine must be >= 1"));
                }
                n
            }
            None => 10,
        };

        let default_box = SamplingBox::default();
        let x_min = f64_field("box.x_min")?.map(|(v, _)| v).unwrap_or(default_box.x_min);
        let x_max = f64_field("box.x_max")?.map(|(v, _)| v).unwrap_or(default_box.x_max);
        let deadzone = f64_field("box.deadzone")?
            .map(|(v, _)| v)
            .unwrap_or(default_box.deadzone);
        let n_x = match entries.get("box.n_x") {
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|_| err(Some(*line), format!("'box.n_x' is not an integer: '{v}'")))?,
            None => default_box.n_x,
        };
        let boxx = SamplingBox::new(x_min, x_max, deadzone, n_x)
            .map_err(|e| err(None, format!("invalid [box]: {e}")))?;

        Ok(ExperimentConfig {
            alpha,
            kind,
            coeff,
            rhs,
            lambda,
            x0,
            x0_b,
            t_end,
            h,
            measure_refine,
            x_target,
            tol,
            max_iter,
            boxx,
        })
    }

    /// The linear coefficient a(t), when the kind carries one.
    pub fn coefficient(&self) -> Result<Box<dyn Fn(f64) -> f64>, ConfigError> {
        let spec = self
            .coeff
            .as_ref()
            .ok_or_else(|| err(None, "no 'coeff' in this configuration"))?;
        Ok(match spec {
            FuncSpec::PaperEx1 => Box::new(paper_ex1_coeff),
            FuncSpec::ConstLambda => {
                let l = self.lambda.expect("validated");
                Box::new(move |_t| l)
            }
            FuncSpec::CubicDamped => unreachable!("rejected during validation"),
            FuncSpec::Expression(e) => {
                let e = e.clone();
                Box::new(move |t| e.eval(t, 0.0))
            }
        })
    }

    /// The full right-hand side f(t, x) for the configured problem.
    pub fn right_hand_side(&self) -> Result<Box<dyn Fn(f64, f64) -> f64>, ConfigError> {
        match self.kind {
            ProblemKind::LinearCoeff => {
                let a = self.coefficient()?;
                Ok(Box::new(move |t, x| a(t) * x))
            }
            ProblemKind::Nonlinear | ProblemKind::Shifted => {
                let spec = self.rhs.as_ref().expect("validated");
                Ok(match spec {
                    FuncSpec::PaperEx1 => Box::new(|t, x| paper_ex1_coeff(t) * x),
                    FuncSpec::ConstLambda => {
                        let l = self.lambda.expect("validated");
                        Box::new(move |_t, x| l * x)
                    }
                    FuncSpec::CubicDamped => Box::new(|_t, x: f64| -x - x * x * x),
                    FuncSpec::Expression(e) => {
                        let e = e.clone();
                        Box::new(move |t, x| e.eval(t, x))
                    }
                })
            }
        }
    }
}

/// a(t) = -(1 + 4t + 3 cos 4t)/2, the worked-example coefficient.
pub fn paper_ex1_coeff(t: f64) -> f64 {
    -0.5 * (1.0 + 4.0 * t + 3.0 * (4.0 * t).cos())
}
