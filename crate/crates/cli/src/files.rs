//! On-disk JSON descriptions of channels, states, and observables, and the
//! conversions to the library types. Every file carries a mandatory
//! `convention` string naming the coordinate and normalization choices; a
//! file with any other value is rejected outright rather than reinterpreted.

use gausschan::channels::GaussianChannel;
use gausschan::observables::GaussianObservable;
use gausschan::states::GaussianState;
use gausschan::symplectic::SymplecticSpace;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// Interleaved (x1, y1, x2, y2, ...) coordinates with vacuum covariance I/2.
pub const CONVENTION: &str = "xyxy-halfvac";

/// Serialize one double as a decimal with 17 significant digits, enough to
/// reproduce the bit pattern on re-parse. The exponent sign is always
/// written so the text survives a serde_json Value round-trip unchanged.
pub fn f17(x: f64) -> serde_json::Number {
    let s = format!("{x:.16e}");
    let normalized = match s.find('e') {
        Some(p) if !matches!(s.as_bytes()[p + 1], b'+' | b'-') => {
            format!("{}+{}", &s[..=p], &s[p + 1..])
        }
        _ => s,
    };
    serde_json::Number::from_string_unchecked(normalized)
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    f17(*x).serialize(s)
}

pub fn ser_vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| f17(x)))
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => f17(*v).serialize(s),
        None => s.serialize_none(),
    }
}

fn check_convention(found: &str) -> Result<(), CliError> {
    if found == CONVENTION {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "field `convention`: unknown value {found:?}, this tool reads only {CONVENTION:?}"
        )))
    }
}

fn check_len(field: &str, got: usize, want: usize) -> Result<(), CliError> {
    if got == want {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "field `{field}`: expected {want} entries, found {got}"
        )))
    }
}

fn matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// A channel acting on `n_modes_in` modes with `n_modes_out` output modes.
/// `K` is the 2n_in x 2n_out argument pullback (output characteristic
/// arguments to input ones), `m` the mean shift, `alpha` the added noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub n_modes_in: usize,
    pub n_modes_out: usize,
    #[serde(rename = "K", serialize_with = "ser_vec_f64")]
    pub k: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub m: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub alpha: Vec<f64>,
    pub convention: String,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<GaussianChannel, CliError> {
        check_convention(&self.convention)?;
        let (da, db) = (2 * self.n_modes_in, 2 * self.n_modes_out);
        check_len("K", self.k.len(), da * db)?;
        check_len("m", self.m.len(), db)?;
        check_len("alpha", self.alpha.len(), db * db)?;
        let space_in = SymplecticSpace::standard_form(self.n_modes_in)
            .map_err(|e| CliError::usage(format!("field `n_modes_in`: {e}")))?;
        let space_out = SymplecticSpace::standard_form(self.n_modes_out)
            .map_err(|e| CliError::usage(format!("field `n_modes_out`: {e}")))?;
        GaussianChannel::new(
            space_in,
            space_out,
            matrix(da, db, &self.k),
            DVector::from_row_slice(&self.m),
            matrix(db, db, &self.alpha),
        )
        .map_err(|e| CliError::usage(format!("channel file rejected: {e}")))
    }

    pub fn from_channel(c: &GaussianChannel) -> Self {
        Self {
            n_modes_in: c.space_in().n_modes(),
            n_modes_out: c.space_out().n_modes(),
            k: row_major(c.k()),
            m: c.m().iter().copied().collect(),
            alpha: row_major(c.alpha()),
            convention: CONVENTION.to_string(),
        }
    }
}

/// A state with mean vector and covariance on `n_modes` modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub n_modes: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub mean: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub cov: Vec<f64>,
    pub convention: String,
}

impl StateFile {
    pub fn to_state(&self) -> Result<GaussianState, CliError> {
        check_convention(&self.convention)?;
        let d = 2 * self.n_modes;
        check_len("mean", self.mean.len(), d)?;
        check_len("cov", self.cov.len(), d * d)?;
        let space = SymplecticSpace::standard_form(self.n_modes)
            .map_err(|e| CliError::usage(format!("field `n_modes`: {e}")))?;
        GaussianState::new(
            space,
            DVector::from_row_slice(&self.mean),
            matrix(d, d, &self.cov),
        )
        .map_err(|e| CliError::usage(format!("state file rejected: {e}")))
    }

    pub fn from_state(s: &GaussianState) -> Self {
        Self {
            n_modes: s.space().n_modes(),
            mean: s.mean().iter().copied().collect(),
            cov: row_major(s.cov()),
            convention: CONVENTION.to_string(),
        }
    }
}

/// An observable measured on `n_modes_sys` system modes with outcomes in
/// `n_modes_out` phase-space pairs; `mu` is the measurement noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    pub n_modes_sys: usize,
    pub n_modes_out: usize,
    #[serde(rename = "K", serialize_with = "ser_vec_f64")]
    pub k: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub mu: Vec<f64>,
    pub convention: String,
}

impl ObservableFile {
    pub fn to_observable(&self) -> Result<GaussianObservable, CliError> {
        check_convention(&self.convention)?;
        let (da, db) = (2 * self.n_modes_sys, 2 * self.n_modes_out);
        check_len("K", self.k.len(), da * db)?;
        check_len("mu", self.mu.len(), db * db)?;
        let space_sys = SymplecticSpace::standard_form(self.n_modes_sys)
            .map_err(|e| CliError::usage(format!("field `n_modes_sys`: {e}")))?;
        let space_out = SymplecticSpace::standard_form(self.n_modes_out)
            .map_err(|e| CliError::usage(format!("field `n_modes_out`: {e}")))?;
        GaussianObservable::new(
            space_sys,
            space_out,
            matrix(da, db, &self.k),
            matrix(db, db, &self.mu),
        )
        .map_err(|e| CliError::usage(format!("observable file rejected: {e}")))
    }
}

/// What kind of object a file describes, decided by its mode-count fields.
#[derive(Debug, Clone)]
pub enum InputFile {
    Channel(ChannelFile),
    State(StateFile),
    Observable(ObservableFile),
}

/// Untyped probe used to sniff the file kind before committing to a schema.
#[derive(Deserialize)]
struct KindProbe {
    n_modes_in: Option<usize>,
    n_modes_sys: Option<usize>,
    n_modes: Option<usize>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("cannot parse {path}: {e}")))
}

/// Read a file as whichever of the three schemas its fields select.
pub fn read_any(path: &str) -> Result<InputFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
    let probe: KindProbe = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse {path}: {e}")))?;
    let parsed = if probe.n_modes_in.is_some() {
        InputFile::Channel(
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("cannot parse {path} as a channel: {e}")))?,
        )
    } else if probe.n_modes_sys.is_some() {
        InputFile::Observable(serde_json::from_str(&text).map_err(|e| {
            CliError::usage(format!("cannot parse {path} as an observable: {e}"))
        })?)
    } else if probe.n_modes.is_some() {
        InputFile::State(
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("cannot parse {path} as a state: {e}")))?,
        )
    } else {
        return Err(CliError::usage(format!(
            "{path}: none of the fields `n_modes_in`, `n_modes_sys`, `n_modes` present; \
             cannot tell channels, observables, and states apart"
        )));
    };
    Ok(parsed)
}

pub fn write_json<T: Serialize>(path: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::usage(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::usage(format!("cannot write {path}: {e}")))
}
