//! JSON system description.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "drift": { "eigenvalues": [1.4142135623730951, 1.7320508075688772, 2.23606797749979],
//!              "exact": [{ "irrational": { "sqrt(2)": 1 } }, { "irrational": { "sqrt(3)": 1 } },
//!                        { "irrational": { "sqrt(5)": 1 } }] },
//!   "controls": [{ "sparse": [[0, 1, 1.0, 0.0], [1, 2, 1.0, 0.0]] }],
//!   "tolerances": { "rank_tol": 1e-9 },
//!   "truncations": [2, 3]
//! }
//! ```
//!
//! Dense matrices are lists of rows; an entry is a real number or a
//! `[re, im]` pair. Sparse entries are 0-based `[row, col, re, im]` and the
//! Hermitian partner of every off-diagonal entry is filled in.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{ClosureOptions, Thm2Options, DEFAULT_MAX_PASSES, DEFAULT_RANK_TOL};
use crate::linop::{ComplexMatrix, ControlSystem, DEFAULT_TOL};
use crate::spectral::{default_gap_tol, DriftSpectrum, ExactValue, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL};

/// A number or a string such as `"1/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(serde_json::Number),
    Text(String),
}

impl Scalar {
    fn as_text(&self) -> String {
        match self {
            Scalar::Number(n) => n.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "serde_json::Value")]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl TryFrom<serde_json::Value> for ComplexEntry {
    type Error = String;

    fn try_from(v: serde_json::Value) -> std::result::Result<Self, String> {
        let num = |x: &serde_json::Value| x.as_f64().ok_or_else(|| format!("expected a number, found {x}"));
        match &v {
            serde_json::Value::Number(_) => Ok(ComplexEntry::Real(num(&v)?)),
            serde_json::Value::Array(p) if p.len() == 2 => Ok(ComplexEntry::Pair([num(&p[0])?, num(&p[1])?])),
            other => Err(format!("expected a number or [re, im], found {other}")),
        }
    }
}

impl ComplexEntry {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexEntry::Real(x) => Complex64::new(x, 0.0),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }

    fn of(z: Complex64) -> Self {
        ComplexEntry::Pair([z.re, z.im])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    #[serde(default = "zero_scalar")]
    pub rational: Scalar,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub irrational: BTreeMap<String, Scalar>,
}

fn zero_scalar() -> Scalar {
    Scalar::Text("0".into())
}

impl Default for Scalar {
    fn default() -> Self {
        zero_scalar()
    }
}

impl ExactConfig {
    pub fn to_exact(&self) -> Result<ExactValue> {
        let terms: Vec<(String, String)> = self.irrational.iter().map(|(k, v)| (k.clone(), v.as_text())).collect();
        ExactValue::from_parts(&self.rational.as_text(), &terms)
    }

    pub fn from_exact(v: &ExactValue) -> Self {
        Self {
            rational: Scalar::Text(v.rational.to_string()),
            irrational: v.terms.iter().map(|(s, c)| (s.to_string(), Scalar::Text(c.to_string()))).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<ExactConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexEntry>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlConfig {
    Dense(Vec<Vec<ComplexEntry>>),
    Sparse(Vec<(usize, usize, f64, f64)>),
}

/// Overrides; unset fields take the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_passes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
}

impl Tolerances {
    /// Applies one `KEY=VAL` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("invalid value {value:?} for tolerance {key}"));
        let real = || value.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0).ok_or_else(bad);
        match key.trim() {
            "rank_tol" => self.rank_tol = Some(real()?),
            "edge_tol" => self.edge_tol = Some(real()?),
            "independence_tol" => self.independence_tol = Some(real()?),
            "gap_tol" => self.gap_tol = Some(real()?),
            "max_passes" => self.max_passes = Some(value.trim().parse().map_err(|_| bad())?),
            "coeff_bound" => self.coeff_bound = Some(value.trim().parse().map_err(|_| bad())?),
            other => return Err(Error::Config(format!("unknown tolerance key {other:?}"))),
        }
        Ok(())
    }

    /// Later overrides win.
    pub fn merged(&self, over: &Tolerances) -> Tolerances {
        Tolerances {
            rank_tol: over.rank_tol.or(self.rank_tol),
            max_passes: over.max_passes.or(self.max_passes),
            edge_tol: over.edge_tol.or(self.edge_tol),
            independence_tol: over.independence_tol.or(self.independence_tol),
            coeff_bound: over.coeff_bound.or(self.coeff_bound),
            gap_tol: over.gap_tol.or(self.gap_tol),
        }
    }

    pub fn closure_options(&self) -> ClosureOptions {
        ClosureOptions {
            rank_tol: self.rank_tol.unwrap_or(DEFAULT_RANK_TOL),
            max_passes: self.max_passes.unwrap_or(DEFAULT_MAX_PASSES),
        }
    }

    pub fn thm2_options(&self) -> Thm2Options {
        Thm2Options {
            coeff_bound: self.coeff_bound.unwrap_or(DEFAULT_COEFF_BOUND),
            independence_tol: self.independence_tol.unwrap_or(DEFAULT_INDEPENDENCE_TOL),
            edge_tol: self.edge_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dim: usize,
    pub drift: DriftConfig,
    #[serde(default)]
    pub controls: Vec<ControlConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncations: Vec<usize>,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn dense(rows: &[Vec<ComplexEntry>], dim: usize, what: &str) -> Result<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Config(format!("{what} must be {dim}x{dim}")));
    }
    let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(config_err)
}

fn sparse(entries: &[(usize, usize, f64, f64)], dim: usize, what: &str) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(dim);
    let mut seen = vec![false; dim * dim];
    for &(r, c, re, im) in entries {
        if r >= dim || c >= dim {
            return Err(Error::Config(format!("{what}: entry ({r}, {c}) outside {dim}x{dim}")));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Config(format!("{what}: non-finite entry at ({r}, {c})")));
        }
        let z = Complex64::new(re, im);
        if r == c && im != 0.0 {
            return Err(Error::Config(format!("{what}: diagonal entry ({r}, {r}) must be real")));
        }
        for (i, j, v) in [(r, c, z), (c, r, z.conj())] {
            if seen[i * dim + j] && m.get(i, j) != v {
                return Err(Error::Config(format!("{what}: conflicting entries at ({r}, {c})")));
            }
            seen[i * dim + j] = true;
            m.set(i, j, v);
        }
    }
    Ok(m)
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds and validates the system; every failure is a [`Error::Config`].
    pub fn to_system(&self) -> Result<ControlSystem> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        let d = &self.drift;
        let drift = match (&d.eigenvalues, &d.matrix) {
            (Some(values), None) => {
                if values.len() != n {
                    return Err(Error::Config(format!("drift has {} eigenvalues, dim is {n}", values.len())));
                }
                let gap = self.tolerances.gap_tol.unwrap_or_else(|| default_gap_tol(values));
                let spectrum = DriftSpectrum::group_degenerate(values, gap).map_err(config_err)?;
                match &d.exact {
                    Some(tags) => {
                        if tags.len() != n {
                            return Err(Error::Config(format!("drift has {} exact tags, dim is {n}", tags.len())));
                        }
                        let tags: Vec<ExactValue> =
                            tags.iter().map(ExactConfig::to_exact).collect::<Result<_>>().map_err(config_err)?;
                        spectrum.with_exact(&tags).map_err(config_err)?
                    }
                    None => spectrum,
                }
            }
            (None, Some(rows)) => {
                if d.exact.is_some() {
                    return Err(Error::Config("exact tags need an eigenvalue list".into()));
                }
                let h = dense(rows, n, "drift matrix")?;
                if !h.is_hermitian(DEFAULT_TOL * h.max_abs().max(1.0)) {
                    return Err(Error::Config("drift matrix is not Hermitian".into()));
                }
                DriftSpectrum::from_hermitian(&h.hermitian_part(), self.tolerances.gap_tol).map_err(config_err)?
            }
            _ => return Err(Error::Config("drift needs exactly one of eigenvalues or matrix".into())),
        };
        let mut controls = Vec::with_capacity(self.controls.len());
        for (l, c) in self.controls.iter().enumerate() {
            let what = format!("control H{}", l + 1);
            controls.push(match c {
                ControlConfig::Dense(rows) => dense(rows, n, &what)?,
                ControlConfig::Sparse(entries) => sparse(entries, n, &what)?,
            });
        }
        ControlSystem::new(drift, controls).map_err(config_err)
    }

    /// Describes an existing system; diagonal drifts are written as eigenvalue
    /// lists (with exact tags when present), others as dense matrices.
    pub fn from_system(system: &ControlSystem) -> Self {
        let n = system.dim();
        let h0 = system.drift_matrix();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h0.get(i, j) == Complex64::new(0.0, 0.0)));
        let spectrum = system.drift();
        let drift = if diagonal {
            let values: Vec<f64> = (0..n).map(|i| h0.get(i, i).re).collect();
            let exact = spectrum.exact_values().map(|tags| {
                let mut per_raw = vec![ExactConfig::default(); n];
                for (k, tag) in tags.iter().enumerate() {
                    let cfg = ExactConfig::from_exact(tag);
                    for &i in spectrum.cluster_members(k) {
                        per_raw[i] = cfg.clone();
                    }
                }
                per_raw
            });
            DriftConfig {
                eigenvalues: Some(values),
                exact,
                matrix: None,
            }
        } else {
            DriftConfig {
                eigenvalues: None,
                exact: None,
                matrix: Some(matrix_rows(h0)),
            }
        };
        SystemConfig {
            dim: n,
            drift,
            controls: system.controls().iter().map(|h| ControlConfig::Dense(matrix_rows(h))).collect(),
            tolerances: Tolerances::default(),
            truncations: Vec::new(),
        }
    }
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<ComplexEntry>> {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| ComplexEntry::of(m.get(i, j))).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_thm2_model, Coupling, SpectrumKind};

    const EXAMPLE: &str = r#"{
        "dim": 3,
        "drift": { "eigenvalues": [1.4142135623730951, 1.7320508075688772, 2.23606797749979],
                   "exact": [{ "irrational": { "sqrt(2)": 1 } }, { "irrational": { "sqrt(3)": 1 } },
                             { "irrational": { "sqrt(5)": "1" } }] },
        "controls": [{ "sparse": [[0, 1, 1.0, 0.0], [1, 2, 0.0, 2.0]] }],
        "tolerances": { "rank_tol": 1e-9 },
        "truncations": [2, 3]
    }"#;

    #[test]
    fn parses_example() {
        let cfg = SystemConfig::from_json(EXAMPLE).unwrap();
        let sys = cfg.to_system().unwrap();
        assert_eq!(sys.dim(), 3);
        assert!(sys.drift().exact_values().is_some());
        let h = &sys.controls()[0];
        assert_eq!(h.get(2, 1), Complex64::new(0.0, -2.0));
        assert_eq!(cfg.truncations, vec![2, 3]);
    }

    #[test]
    fn dense_entries_real_or_pair() {
        let text = r#"{"dim": 2, "drift": {"matrix": [[1, [0.5, 0.5]], [[0.5, -0.5], 2]]},
                       "controls": [{"dense": [[0, 1], [1, 0]]}]}"#;
        let sys = SystemConfig::from_json(text).unwrap().to_system().unwrap();
        assert_eq!(sys.drift().len(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            r#"{"dim": 2, "drift": {"eigenvalues": [1, 2, 3]}}"#,
            r#"{"dim": 2, "drift": {}}"#,
            r#"{"dim": 2, "drift": {"matrix": [[1, 1], [0, 1]]}}"#,
            r#"{"dim": 2, "drift": {"eigenvalues": [1, 2]}, "controls": [{"sparse": [[0, 5, 1, 0]]}]}"#,
            r#"{"dim": 2, "drift": {"eigenvalues": [1, 2]}, "controls": [{"sparse": [[0, 0, 1, 1]]}]}"#,
            r#"{"dim": 2, "drift": {"eigenvalues": [1, 2]}, "controls": [{"dense": [[0, [0, 1]], [[0, 1], 0]]}]}"#,
            r#"{"dim": 2, "drift": {"eigenvalues": [1, 2], "exact": [{"rational": 1}, {"rational": 5}]}}"#,
        ];
        for c in cases {
            let err = SystemConfig::from_json(c).unwrap().to_system().unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{c}: {err}");
        }
        assert!(matches!(SystemConfig::from_json("{\"dim\": 2}"), Err(Error::Json(_))));
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("rank_tol", "1e-8").unwrap();
        t.set("coeff_bound", "7").unwrap();
        assert_eq!(t.closure_options().rank_tol, 1e-8);
        assert_eq!(t.thm2_options().coeff_bound, 7);
        assert!(t.set("bogus", "1").is_err());
        assert!(t.set("rank_tol", "x").is_err());
    }

    #[test]
    fn system_round_trip() {
        let sys = make_thm2_model(4, SpectrumKind::SqrtPrimes, Coupling::Tridiagonal).unwrap();
        let cfg = SystemConfig::from_system(&sys);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = SystemConfig::from_json(&text).unwrap().to_system().unwrap();
        assert_eq!(back.drift().eigenvalues(), sys.drift().eigenvalues());
        assert_eq!(back.drift().exact_values(), sys.drift().exact_values());
        assert_eq!(back.controls()[0], sys.controls()[0]);
    }
}
