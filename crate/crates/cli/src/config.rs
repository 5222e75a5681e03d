use serde::{Deserialize, Serialize};
use thiserror::Error;

use pelks_core::cyclic_algebra::CyclicAlgebraDescriptor;
use pelks_core::pel_modules::QuadraticRing;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeTag {
    A,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PelInstanceConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(rename = "type")]
    pub kind: TypeTag,
    pub n: usize,
    pub r: usize,
    pub signature: (usize, usize),
    #[serde(default)]
    pub local: Vec<LocalPlace>,
    #[serde(default)]
    pub global: Option<GlobalData>,
    #[serde(default)]
    pub archimedean: Option<ArchimedeanData>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalPlace {
    pub q: u32,
    #[serde(default = "one")]
    pub f: u32,
    #[serde(default)]
    pub s: u32,
    /// The place splits in the quadratic extension (type A only).
    #[serde(default)]
    pub split: bool,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalData {
    /// Squarefree d with F = ℚ(√d).
    pub d: i64,
    #[serde(default = "default_max_signature")]
    pub max_signature: usize,
}

fn default_max_signature() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchimedeanData {
    pub model: FieldModel,
    pub mu: MuMode,
}

/// Complex numbers are written as [re, im].
pub type ComplexEntry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldModel {
    /// O = ℤ[i] inside ℚ(i), type A with n = 1.
    Gaussian {},
    /// O = ℤ, type C with n = 1.
    Rational {},
    /// (a, b)_ℚ ⊗ ℚ(i) with the order ℤ⟨I, J⟩ ⊗ ℤ[i]; type A, n = 2, r = 2.
    QuaternionGaussian { a: i64, b: i64 },
    Custom { algebra: Vec<AlgebraElementSpec>, structure_constants: Vec<Vec<Vec<i64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraElementSpec {
    pub label: String,
    /// n×n, row-major.
    pub sigma: Vec<Vec<ComplexEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MuMode {
    Explicit { matrix: Vec<Vec<ComplexEntry>> },
    SelfDualAuto {},
    UnitCovolume {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_precision")]
    pub local_precision: i64,
    /// Bound on |ratio − 1| in the metric identity.
    #[serde(default = "default_epsilon")]
    pub numeric_epsilon: f64,
}

fn default_precision() -> i64 {
    8
}

fn default_epsilon() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { local_precision: default_precision(), numeric_epsilon: default_epsilon() }
    }
}

impl PelInstanceConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (n, r) = (self.n, self.r);
        let (p, q) = self.signature;
        if n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        if r == 0 {
            return Err(invalid("r", "must be positive"));
        }
        match self.kind {
            TypeTag::A => {
                if p + q != r {
                    return Err(invalid("signature", format!("type A needs p + q = r, got ({p}, {q}) with r = {r}")));
                }
                if r % n != 0 {
                    return Err(invalid("n", format!("type A needs n | r, got n = {n}, r = {r}")));
                }
            }
            TypeTag::C => {
                if (p, q) != (r, r) {
                    return Err(invalid("signature", format!("type C carries signature (r, r) = ({r}, {r}), got ({p}, {q})")));
                }
                if (2 * r) % n != 0 {
                    return Err(invalid("n", format!("type C needs n | 2r, got n = {n}, r = {r}")));
                }
            }
        }
        let prec = self.tolerances.local_precision;
        if prec < 2 {
            return Err(invalid("tolerances.local_precision", "must be at least 2"));
        }
        if !(self.tolerances.numeric_epsilon > 0.0 && self.tolerances.numeric_epsilon.is_finite()) {
            return Err(invalid("tolerances.numeric_epsilon", "must be a positive finite number"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        for (i, place) in self.local.iter().enumerate() {
            let field = format!("local[{i}]");
            if place.split && self.kind == TypeTag::C {
                return Err(invalid(field, "split places occur only for type A"));
            }
            CyclicAlgebraDescriptor::new(n as u32, place.q, place.f, place.s, prec).map_err(|e| invalid(field, e.to_string()))?;
        }
        if let Some(g) = &self.global {
            if self.kind != TypeTag::A {
                return Err(invalid("global", "the rank lemma concerns the unitary (type A) case"));
            }
            if QuadraticRing::new(g.d).is_none() {
                return Err(invalid("global.d", format!("{} is not a squarefree integer other than 0, 1", g.d)));
            }
            if g.max_signature > 6 {
                return Err(invalid("global.max_signature", "at most 6"));
            }
        }
        if let Some(a) = &self.archimedean {
            self.validate_archimedean(a)?;
        }
        Ok(())
    }

    fn validate_archimedean(&self, a: &ArchimedeanData) -> Result<(), ConfigError> {
        let (p, q) = self.signature;
        if self.kind == TypeTag::A && p != q {
            return Err(invalid("signature", format!("archimedean checks need p = q, got ({p}, {q})")));
        }
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(invalid("archimedean.model", msg)) };
        match &a.model {
            FieldModel::Gaussian {} => need(self.kind == TypeTag::A && self.n == 1, "gaussian needs type A with n = 1")?,
            FieldModel::Rational {} => need(self.kind == TypeTag::C && self.n == 1, "rational needs type C with n = 1")?,
            FieldModel::QuaternionGaussian { .. } => {
                need(self.kind == TypeTag::A && self.n == 2 && self.r == 2, "quaternion-gaussian needs type A with n = 2, r = 2")?
            }
            FieldModel::Custom { algebra, structure_constants } => {
                if algebra.is_empty() {
                    return Err(invalid("archimedean.model.algebra", "empty"));
                }
                for (i, e) in algebra.iter().enumerate() {
                    if e.sigma.len() != self.n || e.sigma.iter().any(|row| row.len() != self.n) {
                        return Err(invalid(format!("archimedean.model.algebra[{i}].sigma"), format!("must be {0}×{0}", self.n)));
                    }
                }
                let m = algebra.len();
                if structure_constants.len() != m || structure_constants.iter().any(|a| a.len() != m || a.iter().any(|b| b.len() != m)) {
                    return Err(invalid("archimedean.model.structure_constants", format!("must be {m}×{m}×{m}")));
                }
            }
        }
        if let MuMode::Explicit { matrix } = &a.mu {
            if matrix.len() != self.n || matrix.iter().any(|row| row.len() != self.n) {
                return Err(invalid("archimedean.mu.matrix", format!("must be {0}×{0}", self.n)));
            }
        }
        Ok(())
    }
}
