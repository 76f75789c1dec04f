//! JSON documents for ensembles, measurements, certificates and reports.
//!
//! Every document is an object carrying `"schema": "mcd-ensemble/1"` and a
//! `"kind"` discriminator. Complex entries are `[re, im]` pairs and matrices
//! are row-major arrays of rows.
//!
//! ```json
//! {
//!   "schema": "mcd-ensemble/1",
//!   "kind": "ensemble",
//!   "dim": 2,
//!   "states": [
//!     { "prior": 0.5, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]] },
//!     { "prior": 0.5, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]] }
//!   ]
//! }
//! ```
//!
//! Other kinds are `measurement`, `certificate` and `factorization-report`.
//! Values are written with shortest round-trip formatting, so saving and
//! loading reproduces every entry exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::confidence::Measurement;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::CMatrix;
use crate::optimizer::{OptimizationCertificate, Tolerances};
use crate::scalar::{cx, lit, to_f64, Real};
use crate::sequence::{FactorizationReport, Mode};

pub const SCHEMA: &str = "mcd-ensemble/1";

pub const KIND_ENSEMBLE: &str = "ensemble";
pub const KIND_MEASUREMENT: &str = "measurement";
pub const KIND_CERTIFICATE: &str = "certificate";
pub const KIND_FACTORIZATION: &str = "factorization-report";

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
struct Header {
    schema: String,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct EnsembleDoc {
    schema: String,
    kind: String,
    dim: usize,
    states: Vec<StateDoc>,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    prior: f64,
    matrix: RawMatrix,
}

#[derive(Serialize, Deserialize)]
struct MeasurementBody {
    inconclusive: RawMatrix,
    outcomes: Vec<RawMatrix>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementDoc {
    schema: String,
    kind: String,
    dim: usize,
    #[serde(flatten)]
    body: MeasurementBody,
}

#[derive(Serialize, Deserialize)]
struct PrimalDoc {
    value: f64,
    measurement: MeasurementBody,
}

#[derive(Serialize, Deserialize)]
struct DualDoc {
    value: f64,
    h: RawMatrix,
}

#[derive(Serialize, Deserialize)]
struct CertificateDoc {
    schema: String,
    kind: String,
    dim: usize,
    tolerances: Tolerances,
    primal: PrimalDoc,
    dual: DualDoc,
    gap: f64,
    slackness: Vec<f64>,
    certified: bool,
}

#[derive(Serialize, Deserialize)]
struct FactorizationDoc {
    schema: String,
    kind: String,
    quantity: String,
    mode: String,
    tolerance: f64,
    tolerances: Tolerances,
    steps: Vec<f64>,
    product: Option<f64>,
    direct: Option<f64>,
    deviation: Option<f64>,
    within: bool,
    certified: bool,
}

/// A stored primal/dual pair with the values and residuals reported when it
/// was produced. Nothing here is trusted by [`crate::optimizer::certify_pair`].
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub tolerances: Tolerances,
    pub measurement: Measurement<T>,
    pub primal_value: T,
    pub h: HermitianOperator<T>,
    pub dual_value: T,
    pub gap: T,
    pub slackness: Vec<T>,
    pub certified: bool,
}

impl<T: Real> From<&OptimizationCertificate<T>> for Certificate<T> {
    fn from(c: &OptimizationCertificate<T>) -> Self {
        Self {
            tolerances: c.tolerances,
            measurement: c.primal.measurement.clone(),
            primal_value: c.primal.value,
            h: c.dual.h.clone(),
            dual_value: c.dual.value,
            gap: c.gap,
            slackness: c.slackness.clone(),
            certified: c.certified,
        }
    }
}

/// A factorization report with the quantity it describes and the deviation
/// tolerance it was judged against.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationDocument<T> {
    /// `"confidence"` or `"p_g"`.
    pub quantity: String,
    /// Largest accepted `|direct − product|`.
    pub tolerance: f64,
    /// Tolerances of the underlying solves.
    pub tolerances: Tolerances,
    pub report: FactorizationReport<T>,
}

fn parse_error(context: impl Into<String>) -> Error {
    Error::Parse {
        context: context.into(),
    }
}

fn json_error(e: serde_json::Error) -> Error {
    parse_error(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn decode<D: DeserializeOwned>(text: &str, kind: &str) -> Result<D> {
    let header: Header = serde_json::from_str(text).map_err(json_error)?;
    if header.schema != SCHEMA {
        return Err(parse_error(format!(
            "schema: expected {SCHEMA:?}, found {:?}",
            header.schema
        )));
    }
    if header.kind != kind {
        return Err(parse_error(format!(
            "kind: expected {kind:?}, found {:?}",
            header.kind
        )));
    }
    serde_json::from_str(text).map_err(json_error)
}

/// Reads the `kind` of any document in the schema family.
pub fn document_kind(text: &str) -> Result<String> {
    let header: Header = serde_json::from_str(text).map_err(json_error)?;
    if header.schema != SCHEMA {
        return Err(parse_error(format!(
            "schema: expected {SCHEMA:?}, found {:?}",
            header.schema
        )));
    }
    Ok(header.kind)
}

fn encode<S: Serialize>(doc: &S) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn raw_matrix<T: Real>(m: &CMatrix<T>) -> RawMatrix {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| [to_f64(m[(r, c)].re), to_f64(m[(r, c)].im)])
                .collect()
        })
        .collect()
}

fn operator_from_raw<T: Real>(raw: &RawMatrix, dim: usize, path: &str) -> Result<HermitianOperator<T>> {
    if raw.len() != dim {
        return Err(parse_error(format!(
            "{path}: expected {dim} rows, found {}",
            raw.len()
        )));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(parse_error(format!(
                "{path}[{r}]: expected {dim} entries, found {} (matrix must be square)",
                row.len()
            )));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(parse_error(format!("{path}[{r}][{c}]: non-finite entry")));
            }
            data.push(cx(lit(re), lit(im)));
        }
    }
    HermitianOperator::new(CMatrix::from_row_major(dim, dim, data))
        .map_err(|e| parse_error(format!("{path}: {e}")))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(parse_error("dim: must be positive"));
    }
    Ok(())
}

fn measurement_body<T: Real>(m: &Measurement<T>) -> MeasurementBody {
    MeasurementBody {
        inconclusive: raw_matrix(m.inconclusive().matrix()),
        outcomes: m.outcomes().iter().map(|o| raw_matrix(o.matrix())).collect(),
    }
}

fn measurement_from_body<T: Real>(b: &MeasurementBody, dim: usize, path: &str) -> Result<Measurement<T>> {
    let inconclusive = operator_from_raw(&b.inconclusive, dim, &format!("{path}inconclusive"))?;
    let outcomes = b
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, raw)| operator_from_raw(raw, dim, &format!("{path}outcomes[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if outcomes.is_empty() {
        return Err(parse_error(format!("{path}outcomes: empty")));
    }
    Ok(Measurement::new(inconclusive, outcomes))
}

pub fn ensemble_to_json<T: Real>(e: &Ensemble<T>) -> String {
    encode(&EnsembleDoc {
        schema: SCHEMA.into(),
        kind: KIND_ENSEMBLE.into(),
        dim: e.dim(),
        states: (0..e.len())
            .map(|i| StateDoc {
                prior: to_f64(e.prior(i)),
                matrix: raw_matrix(e.state(i).matrix()),
            })
            .collect(),
    })
}

/// Parses and validates an ensemble document. Structural problems are
/// [`Error::Parse`]; broken ensemble invariants are [`Error::InvalidEnsemble`].
pub fn ensemble_from_json<T: Real>(text: &str) -> Result<Ensemble<T>> {
    let doc: EnsembleDoc = decode(text, KIND_ENSEMBLE)?;
    check_dim(doc.dim)?;
    if doc.states.is_empty() {
        return Err(parse_error("states: empty"));
    }
    let mut priors = Vec::with_capacity(doc.states.len());
    let mut states = Vec::with_capacity(doc.states.len());
    for (i, s) in doc.states.iter().enumerate() {
        if !s.prior.is_finite() {
            return Err(parse_error(format!("states[{i}].prior: non-finite")));
        }
        priors.push(lit(s.prior));
        states.push(operator_from_raw(&s.matrix, doc.dim, &format!("states[{i}].matrix"))?);
    }
    Ensemble::new(priors, states)
}

pub fn measurement_to_json<T: Real>(m: &Measurement<T>) -> String {
    encode(&MeasurementDoc {
        schema: SCHEMA.into(),
        kind: KIND_MEASUREMENT.into(),
        dim: m.dim(),
        body: measurement_body(m),
    })
}

/// Parses a measurement without judging positivity or completeness.
pub fn measurement_from_json<T: Real>(text: &str) -> Result<Measurement<T>> {
    let doc: MeasurementDoc = decode(text, KIND_MEASUREMENT)?;
    check_dim(doc.dim)?;
    measurement_from_body(&doc.body, doc.dim, "")
}

pub fn certificate_to_json<T: Real>(c: &Certificate<T>) -> String {
    encode(&CertificateDoc {
        schema: SCHEMA.into(),
        kind: KIND_CERTIFICATE.into(),
        dim: c.h.dim(),
        tolerances: c.tolerances,
        primal: PrimalDoc {
            value: to_f64(c.primal_value),
            measurement: measurement_body(&c.measurement),
        },
        dual: DualDoc {
            value: to_f64(c.dual_value),
            h: raw_matrix(c.h.matrix()),
        },
        gap: to_f64(c.gap),
        slackness: c.slackness.iter().map(|&r| to_f64(r)).collect(),
        certified: c.certified,
    })
}

pub fn certificate_from_json<T: Real>(text: &str) -> Result<Certificate<T>> {
    let doc: CertificateDoc = decode(text, KIND_CERTIFICATE)?;
    check_dim(doc.dim)?;
    Ok(Certificate {
        tolerances: doc.tolerances,
        measurement: measurement_from_body(&doc.primal.measurement, doc.dim, "primal.measurement.")?,
        primal_value: lit(doc.primal.value),
        h: operator_from_raw(&doc.dual.h, doc.dim, "dual.h")?,
        dual_value: lit(doc.dual.value),
        gap: lit(doc.gap),
        slackness: doc.slackness.iter().map(|&r| lit(r)).collect(),
        certified: doc.certified,
    })
}

pub fn factorization_to_json<T: Real>(d: &FactorizationDocument<T>) -> String {
    let r = &d.report;
    encode(&FactorizationDoc {
        schema: SCHEMA.into(),
        kind: KIND_FACTORIZATION.into(),
        quantity: d.quantity.clone(),
        mode: r.mode.to_string(),
        tolerance: d.tolerance,
        tolerances: d.tolerances,
        steps: r.steps.iter().map(|&v| to_f64(v)).collect(),
        product: r.product.map(to_f64),
        direct: r.direct.map(to_f64),
        deviation: r.deviation().map(to_f64),
        within: r.within(lit(d.tolerance)),
        certified: r.certified,
    })
}

pub fn factorization_from_json<T: Real>(text: &str) -> Result<FactorizationDocument<T>> {
    let doc: FactorizationDoc = decode(text, KIND_FACTORIZATION)?;
    let mode: Mode = doc
        .mode
        .parse()
        .map_err(|e: String| parse_error(format!("mode: {e}")))?;
    Ok(FactorizationDocument {
        quantity: doc.quantity,
        tolerance: doc.tolerance,
        tolerances: doc.tolerances,
        report: FactorizationReport {
            mode,
            steps: doc.steps.iter().map(|&v| lit(v)).collect(),
            product: doc.product.map(lit),
            direct: doc.direct.map(lit),
            certified: doc.certified,
        },
    })
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

pub fn load_ensemble<T: Real>(path: impl AsRef<Path>) -> Result<Ensemble<T>> {
    ensemble_from_json(&read(path.as_ref())?)
}

/// Validates before writing so that no invalid ensemble file is produced.
pub fn save_ensemble<T: Real>(e: &Ensemble<T>, path: impl AsRef<Path>) -> Result<()> {
    e.ensure_valid()?;
    Ok(fs::write(path, ensemble_to_json(e))?)
}

pub fn load_measurement<T: Real>(path: impl AsRef<Path>) -> Result<Measurement<T>> {
    measurement_from_json(&read(path.as_ref())?)
}

pub fn save_measurement<T: Real>(m: &Measurement<T>, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, measurement_to_json(m))?)
}

pub fn load_certificate<T: Real>(path: impl AsRef<Path>) -> Result<Certificate<T>> {
    certificate_from_json(&read(path.as_ref())?)
}

pub fn save_certificate<T: Real>(c: &Certificate<T>, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, certificate_to_json(c))?)
}
