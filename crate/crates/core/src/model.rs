//! JSON model files: parsing, validation and conversion into the
//! geometric types.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebroid::Algebroid;
use crate::connection::Connection;
use crate::error::ModelError;
use crate::expr;
use crate::field::ScalarField;
use crate::forms::{Chart, FormField, SymTensor, VectorField};
use crate::index::{sort_with_sign, Alternating};
use crate::momentum::GammaSign;
use crate::multisym::PrenPlecticData;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_POINTS: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_MULTISYM_DEGREE: usize = 4;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema_version: u32,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    description: Option<String>,
    chart: RawChart,
    algebroid: RawAlgebroid,
    #[serde(default)]
    metric: Option<RawBlock>,
    #[serde(default)]
    inverse_metric: Option<RawBlock>,
    #[serde(default)]
    b_field: Option<RawBlock>,
    #[serde(default)]
    presymplectic: Option<RawBlock>,
    #[serde(default)]
    eta_boundary: Option<RawBlock>,
    #[serde(default)]
    mu: Option<RawBlock>,
    #[serde(default)]
    alpha: Option<RawBlock>,
    #[serde(default)]
    beta: Option<RawBlock>,
    #[serde(default, rename = "V")]
    potential: Option<RawBlock>,
    #[serde(default)]
    tau: Option<RawBlock>,
    #[serde(default)]
    beta_killing: Option<RawBlock>,
    #[serde(default)]
    multisym: Option<RawMultisym>,
    #[serde(default)]
    sampling: Option<RawSampling>,
    #[serde(default)]
    tolerances: Option<RawTolerances>,
    #[serde(default)]
    conventions: Option<RawConventions>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coordinates: Vec<String>,
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebroid {
    rank: usize,
    anchor: RawBlock,
    #[serde(default)]
    structure: Option<RawBlock>,
    #[serde(default)]
    connection: Option<RawBlock>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    #[serde(default)]
    symmetry: Option<Symmetry>,
    entries: Vec<RawEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    idx: Vec<usize>,
    expr: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMultisym {
    n: usize,
    #[serde(default)]
    h: Option<RawBlock>,
    #[serde(default)]
    eta: Vec<RawEta>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEta {
    k: usize,
    #[serde(default)]
    symmetry: Option<Symmetry>,
    entries: Vec<RawEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    points: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConventions {
    #[serde(default)]
    gamma_sign: Option<GammaSignName>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum GammaSignName {
    Standard,
    Flipped,
}

/// Index symmetry of a sparse block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    None,
    Symmetric,
    Antisymmetric,
    /// Antisymmetric in the last two indices.
    AntisymmetricLower,
    /// Antisymmetric separately in the form indices and the bundle indices.
    AntisymmetricSplit,
}

/// Sampling and tolerance settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
}

/// A validated model.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: Option<String>,
    pub hash: String,
    pub chart: Chart,
    pub algebroid: Algebroid,
    pub connection: Connection,
    pub metric: Option<SymTensor>,
    pub inverse_metric: Option<SymTensor>,
    pub b_field: Option<FormField>,
    pub presymplectic: Option<FormField>,
    pub eta_boundary: Option<FormField>,
    pub mu: Option<Vec<ScalarField>>,
    pub alpha: Option<Vec<ScalarField>>,
    pub beta: Option<VectorField>,
    pub potential: Option<ScalarField>,
    /// `tau[a][b] = τ^b_a`.
    pub tau: Option<Vec<Vec<ScalarField>>>,
    pub beta_killing: Option<Vec<FormField>>,
    pub multisym: Option<PrenPlecticData>,
    pub settings: Settings,
    pub gamma_sign: GammaSign,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Schema { path: path.into(), message: message.into() }
}

fn index_error(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Index { path: path.into(), message: message.into() }
}

pub fn load_model(path: &Path) -> Result<Model, ModelError> {
    let src = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    Model::from_json(&src)
}

impl Model {
    pub fn from_json(src: &str) -> Result<Model, ModelError> {
        let de = &mut serde_json::Deserializer::from_str(src);
        let raw: RawModel = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(if path == "." { "$".to_string() } else { format!("$.{path}") }, e.inner().to_string())
        })?;
        let hash = hex::encode(Sha256::digest(src.as_bytes()));
        Builder::new(&raw)?.build(raw, hash)
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn rank(&self) -> usize {
        self.algebroid.rank()
    }

    /// The pre-symplectic form of the momentum suite.
    pub fn momentum_form(&self) -> Option<&FormField> {
        self.presymplectic.as_ref().or(self.b_field.as_ref())
    }

    /// `(g, g^{-1})` from whichever is given.
    pub fn metric_pair(&self) -> Option<(SymTensor, SymTensor)> {
        match (&self.metric, &self.inverse_metric) {
            (Some(g), Some(gi)) => Some((g.clone(), gi.clone())),
            (Some(g), None) => Some((g.clone(), g.inverse())),
            (None, Some(gi)) => Some((gi.inverse(), gi.clone())),
            (None, None) => None,
        }
    }
}

struct Builder {
    chart: Chart,
    rank: usize,
    probes: Vec<Vec<f64>>,
}

/// A parsed component with its canonical key.
struct Component {
    key: Vec<usize>,
    field: ScalarField,
    path: String,
}

impl Builder {
    fn new(raw: &RawModel) -> Result<Self, ModelError> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(schema("$.schema_version", format!("unsupported version {}", raw.schema_version)));
        }
        let coords = &raw.chart.coordinates;
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(schema(format!("$.chart.coordinates[{i}]"), format!("duplicate coordinate `{c}`")));
            }
            if c.is_empty() || !c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_') || !c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
                return Err(schema(format!("$.chart.coordinates[{i}]"), format!("`{c}` is not an identifier")));
            }
        }
        if raw.chart.bounds.len() != coords.len() {
            return Err(schema("$.chart.box", "one interval per coordinate"));
        }
        let bounds: Vec<(f64, f64)> = raw.chart.bounds.iter().map(|b| (b[0], b[1])).collect();
        let chart = Chart::new(coords.clone(), bounds).map_err(|e| schema("$.chart", e.to_string()))?;
        if raw.algebroid.rank == 0 {
            return Err(schema("$.algebroid.rank", "rank must be positive"));
        }
        let probes = [0.5, 0.31, 0.73]
            .iter()
            .enumerate()
            .map(|(n, &t)| {
                chart
                    .bounds()
                    .iter()
                    .enumerate()
                    .map(|(i, &(lo, hi))| {
                        let s = if n == 0 { t } else { (t + 0.17 * i as f64).fract() };
                        lo + s * (hi - lo)
                    })
                    .collect()
            })
            .collect();
        Ok(Builder { chart, rank: raw.algebroid.rank, probes })
    }

    fn parse(&self, src: &str, path: &str) -> Result<ScalarField, ModelError> {
        expr::parse(src, self.chart.coords())
            .map(Into::into)
            .map_err(|source| ModelError::Expression { path: format!("{path}.expr"), source })
    }

    fn agree(&self, a: &ScalarField, b: &ScalarField) -> bool {
        self.probes.iter().all(|p| match (a.value(p), b.value(p)) {
            (Ok(x), Ok(y)) => (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())),
            (Err(_), Err(_)) => true,
            _ => false,
        })
    }

    /// Parses a sparse block into canonical components. `ranges` gives the
    /// bound of each index slot and `groups` the antisymmetric or symmetric
    /// slot groups of the declared class.
    fn components(
        &self,
        block: &RawBlock,
        path: &str,
        natural: Symmetry,
        ranges: &[usize],
        split: usize,
    ) -> Result<Vec<Component>, ModelError> {
        if let Some(s) = block.symmetry {
            if s != natural {
                return Err(schema(format!("{path}.symmetry"), format!("expected {natural:?}, found {s:?}")));
            }
        }
        self.entries(&block.entries, path, natural, ranges, split)
    }

    fn entries(&self, entries: &[RawEntry], path: &str, natural: Symmetry, ranges: &[usize], split: usize) -> Result<Vec<Component>, ModelError> {
        let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut out: Vec<Component> = Vec::new();
        for (n, e) in entries.iter().enumerate() {
            let epath = format!("{path}.entries[{n}]");
            if e.idx.len() != ranges.len() {
                return Err(index_error(format!("{epath}.idx"), format!("expected {} indices, found {}", ranges.len(), e.idx.len())));
            }
            for (slot, (&i, &bound)) in e.idx.iter().zip(ranges).enumerate() {
                if i >= bound {
                    return Err(index_error(format!("{epath}.idx[{slot}]"), format!("index {i} out of range 0..{bound}")));
                }
            }
            let field = self.parse(&e.expr, &epath)?;
            let (key, sign) = match canonical(&e.idx, natural, split) {
                Some(ks) => ks,
                None => {
                    if self.agree(&field, &ScalarField::zero()) {
                        continue;
                    }
                    return Err(index_error(format!("{epath}.idx"), "repeated index in an antisymmetric slot"));
                }
            };
            let field = if sign < 0.0 { -field } else { field };
            if let Some(&prev) = seen.get(&key) {
                if !self.agree(&out[prev].field, &field) {
                    return Err(ModelError::Contradiction { path: epath, other: out[prev].path.clone() });
                }
                continue;
            }
            seen.insert(key.clone(), out.len());
            out.push(Component { key, field, path: epath });
        }
        Ok(out)
    }

    fn vector(&self, block: Option<&RawBlock>, path: &str, len: usize) -> Result<Option<Vec<ScalarField>>, ModelError> {
        let Some(block) = block else { return Ok(None) };
        let mut v = vec![ScalarField::zero(); len];
        for c in self.components(block, path, Symmetry::None, &[len], 0)? {
            v[c.key[0]] = c.field;
        }
        Ok(Some(v))
    }

    fn two_form(&self, block: Option<&RawBlock>, path: &str) -> Result<Option<FormField>, ModelError> {
        let Some(block) = block else { return Ok(None) };
        let d = self.chart.dim();
        let mut w = FormField::zero(d, 2);
        for c in self.components(block, path, Symmetry::Antisymmetric, &[d, d], 0)? {
            w.set(&c.key, c.field);
        }
        Ok(Some(w))
    }

    fn sym(&self, block: Option<&RawBlock>, path: &str) -> Result<Option<SymTensor>, ModelError> {
        let Some(block) = block else { return Ok(None) };
        let d = self.chart.dim();
        let mut g = SymTensor::zero(d);
        for c in self.components(block, path, Symmetry::Symmetric, &[d, d], 0)? {
            g.set(c.key[0], c.key[1], c.field);
        }
        Ok(Some(g))
    }

    fn build(self, raw: RawModel, hash: String) -> Result<Model, ModelError> {
        let (d, r) = (self.chart.dim(), self.rank);

        let mut anchor = vec![vec![ScalarField::zero(); d]; r];
        for c in self.components(&raw.algebroid.anchor, "$.algebroid.anchor", Symmetry::None, &[d, r], 0)? {
            anchor[c.key[1]][c.key[0]] = c.field;
        }
        let anchor: Vec<VectorField> = anchor.into_iter().map(VectorField::new).collect();
        let mut structure = vec![Alternating::zero(r, 2); r];
        if let Some(block) = &raw.algebroid.structure {
            for c in self.components(block, "$.algebroid.structure", Symmetry::AntisymmetricLower, &[r, r, r], 0)? {
                structure[c.key[0]].set(&c.key[1..], c.field);
            }
        }
        let algebroid = Algebroid::new(d, anchor, structure).map_err(|e| schema("$.algebroid", e.to_string()))?;
        let mut connection = Connection::zero(r, d);
        if let Some(block) = &raw.algebroid.connection {
            for c in self.components(block, "$.algebroid.connection", Symmetry::None, &[r, r, d], 0)? {
                connection.set(c.key[0], c.key[1], c.key[2], c.field);
            }
        }

        let metric = self.sym(raw.metric.as_ref(), "$.metric")?;
        let inverse_metric = self.sym(raw.inverse_metric.as_ref(), "$.inverse_metric")?;
        let b_field = self.two_form(raw.b_field.as_ref(), "$.b_field")?;
        let presymplectic = self.two_form(raw.presymplectic.as_ref(), "$.presymplectic")?;
        let eta_boundary = self.vector(raw.eta_boundary.as_ref(), "$.eta_boundary", d)?.map(FormField::one_form);
        let mu = self.vector(raw.mu.as_ref(), "$.mu", r)?;
        let alpha = self.vector(raw.alpha.as_ref(), "$.alpha", r)?;
        let beta = self.vector(raw.beta.as_ref(), "$.beta", d)?.map(VectorField::new);
        let potential = match &raw.potential {
            None => None,
            Some(block) => {
                let comps = self.components(block, "$.V", Symmetry::None, &[], 0)?;
                Some(comps.into_iter().next().map_or_else(ScalarField::zero, |c| c.field))
            }
        };
        let tau = match &raw.tau {
            None => None,
            Some(block) => {
                let mut t = vec![vec![ScalarField::zero(); r]; r];
                for c in self.components(block, "$.tau", Symmetry::None, &[r, r], 0)? {
                    t[c.key[1]][c.key[0]] = c.field;
                }
                Some(t)
            }
        };
        let beta_killing = match &raw.beta_killing {
            None => None,
            Some(block) => {
                let mut forms = vec![vec![ScalarField::zero(); d]; r];
                for c in self.components(block, "$.beta_killing", Symmetry::None, &[r, d], 0)? {
                    forms[c.key[0]][c.key[1]] = c.field;
                }
                Some(forms.into_iter().map(FormField::one_form).collect())
            }
        };

        let multisym = match &raw.multisym {
            None => None,
            Some(ms) => Some(self.multisym(ms, &algebroid, &connection)?),
        };

        let sampling = raw.sampling.as_ref();
        let settings = Settings {
            seed: sampling.and_then(|s| s.seed).unwrap_or(DEFAULT_SEED),
            points: sampling.and_then(|s| s.points).unwrap_or(DEFAULT_POINTS),
            tol: raw.tolerances.as_ref().and_then(|t| t.tol).unwrap_or(DEFAULT_TOL),
        };
        if settings.points == 0 {
            return Err(schema("$.sampling.points", "at least one sample point"));
        }
        if !(settings.tol.is_finite() && settings.tol > 0.0) {
            return Err(schema("$.tolerances.tol", "tolerance must be positive and finite"));
        }
        let gamma_sign = match raw.conventions.as_ref().and_then(|c| c.gamma_sign) {
            Some(GammaSignName::Flipped) => GammaSign::Flipped,
            _ => GammaSign::Standard,
        };

        Ok(Model {
            name: raw.name,
            hash,
            chart: self.chart,
            algebroid,
            connection,
            metric,
            inverse_metric,
            b_field,
            presymplectic,
            eta_boundary,
            mu,
            alpha,
            beta,
            potential,
            tau,
            beta_killing,
            multisym,
            settings,
            gamma_sign,
        })
    }

    fn multisym(&self, ms: &RawMultisym, alg: &Algebroid, conn: &Connection) -> Result<PrenPlecticData, ModelError> {
        let (d, r, n) = (self.chart.dim(), self.rank, ms.n);
        if n == 0 || n > MAX_MULTISYM_DEGREE {
            return Err(schema("$.multisym.n", format!("degree must lie in 1..={MAX_MULTISYM_DEGREE}")));
        }
        let mut h = FormField::zero(d, n + 1);
        if let Some(block) = &ms.h {
            let comps = self.components(block, "$.multisym.h", Symmetry::Antisymmetric, &vec![d; n + 1], 0)?;
            if n + 1 > d && !comps.is_empty() {
                return Err(index_error("$.multisym.h", format!("no nonzero {}-forms in dimension {d}", n + 1)));
            }
            for c in comps {
                h.set(&c.key, c.field);
            }
        }
        let mut data = PrenPlecticData::new(alg.clone(), conn.clone(), n, h);
        let mut seen = vec![false; n + 1];
        for (j, e) in ms.eta.iter().enumerate() {
            let path = format!("$.multisym.eta[{j}]");
            if e.k > n {
                return Err(schema(format!("{path}.k"), format!("form degree {} exceeds n = {n}", e.k)));
            }
            if std::mem::replace(&mut seen[e.k], true) {
                return Err(schema(format!("{path}.k"), format!("second block for k = {}", e.k)));
            }
            if let Some(s) = e.symmetry {
                if s != Symmetry::AntisymmetricSplit {
                    return Err(schema(format!("{path}.symmetry"), format!("expected AntisymmetricSplit, found {s:?}")));
                }
            }
            let mut ranges = vec![d; e.k];
            ranges.extend(vec![r; n - e.k]);
            let comps = self.entries(&e.entries, &path, Symmetry::AntisymmetricSplit, &ranges, e.k)?;
            if e.k > d && !comps.is_empty() {
                return Err(index_error(&path, format!("no nonzero {}-forms in dimension {d}", e.k)));
            }
            for c in comps {
                data.eta[e.k].set(&c.key[..e.k], &c.key[e.k..], c.field);
            }
        }
        Ok(data)
    }
}

/// Canonical index tuple and sign, or `None` for a repeated index in an
/// antisymmetric group.
fn canonical(idx: &[usize], sym: Symmetry, split: usize) -> Option<(Vec<usize>, f64)> {
    match sym {
        Symmetry::None => Some((idx.to_vec(), 1.0)),
        Symmetry::Symmetric => {
            let mut k = idx.to_vec();
            k.sort_unstable();
            Some((k, 1.0))
        }
        Symmetry::Antisymmetric => sort_with_sign(idx),
        Symmetry::AntisymmetricLower => {
            let (tail, s) = sort_with_sign(&idx[1..])?;
            let mut k = vec![idx[0]];
            k.extend(tail);
            Some((k, s))
        }
        Symmetry::AntisymmetricSplit => {
            let (f, s1) = sort_with_sign(&idx[..split])?;
            let (b, s2) = sort_with_sign(&idx[split..])?;
            Some(([f, b].concat(), s1 * s2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROTATION: &str = r#"{
        "schema_version": 1,
        "chart": {"coordinates": ["x", "y"], "box": [[-1, 1], [-1, 1]]},
        "algebroid": {"rank": 1, "anchor": {"entries": [{"idx": [0, 0], "expr": "-y"}, {"idx": [1, 0], "expr": "x"}]}},
        "presymplectic": {"symmetry": "antisymmetric", "entries": [{"idx": [0, 1], "expr": "1"}]},
        "mu": {"entries": [{"idx": [0], "expr": "-(x^2 + y^2)/2"}]}
    }"#;

    #[test]
    fn loads_and_defaults() {
        let m = Model::from_json(ROTATION).unwrap();
        assert_eq!((m.dim(), m.rank()), (2, 1));
        assert!(m.connection.is_zero());
        assert_eq!(m.settings, Settings { seed: 42, points: 32, tol: 1e-8 });
        assert_eq!(m.hash.len(), 64);
    }

    #[test]
    fn index_range_reported() {
        let bad = ROTATION.replace("\"idx\": [1, 0], \"expr\": \"x\"", "\"idx\": [5, 0], \"expr\": \"x\"");
        match Model::from_json(&bad) {
            Err(ModelError::Index { path, .. }) => assert_eq!(path, "$.algebroid.anchor.entries[1].idx[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_path_reported() {
        let bad = ROTATION.replace("\"rank\": 1", "\"rank\": \"one\"");
        match Model::from_json(&bad) {
            Err(ModelError::Schema { path, .. }) => assert_eq!(path, "$.algebroid.rank"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expression_offset_reported() {
        let bad = ROTATION.replace("\"-y\"", "\"-y + w\"");
        match Model::from_json(&bad) {
            Err(ModelError::Expression { path, source }) => {
                assert_eq!(path, "$.algebroid.anchor.entries[0].expr");
                assert_eq!(source.offset(), 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradictory_duplicates_rejected() {
        let consistent = ROTATION.replace(
            "[{\"idx\": [0, 1], \"expr\": \"1\"}]",
            "[{\"idx\": [0, 1], \"expr\": \"1\"}, {\"idx\": [1, 0], \"expr\": \"-1\"}]",
        );
        assert!(Model::from_json(&consistent).is_ok());
        let bad = ROTATION.replace(
            "[{\"idx\": [0, 1], \"expr\": \"1\"}]",
            "[{\"idx\": [0, 1], \"expr\": \"1\"}, {\"idx\": [1, 0], \"expr\": \"1\"}]",
        );
        assert!(matches!(Model::from_json(&bad), Err(ModelError::Contradiction { .. })));
        let wrong_class = ROTATION.replace("\"symmetry\": \"antisymmetric\"", "\"symmetry\": \"symmetric\"");
        assert!(matches!(Model::from_json(&wrong_class), Err(ModelError::Schema { .. })));
    }

    #[test]
    fn split_canonical_sign() {
        assert_eq!(canonical(&[2, 1, 3, 0], Symmetry::AntisymmetricSplit, 2), Some((vec![1, 2, 0, 3], 1.0)));
        assert_eq!(canonical(&[0, 2, 1], Symmetry::AntisymmetricLower, 0), Some((vec![0, 1, 2], -1.0)));
        assert_eq!(canonical(&[1, 1], Symmetry::Antisymmetric, 0), None);
    }
}
