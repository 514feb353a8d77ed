//! Machine-readable analysis reports and their terminal rendering. Every
//! verdict a report carries is reproducible by re-running the command with
//! the tolerances and seed echoed in the report; wall time lives in its own
//! field so the rest of the document is byte-stable.

use gausschan::eb::{EbReason, EbStatus, EbVerdict, PptReport, PptSign};
use gausschan::one_mode::{LogBase, OneModeClass};
use gausschan::symplectic::PsdReport;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::Value;

use crate::files::{ser_f64, ser_opt_f64, ser_vec_f64};

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    #[serde(serialize_with = "ser_f64")]
    pub tol: f64,
    #[serde(serialize_with = "ser_f64")]
    pub feas_tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValiditySection {
    /// Which inequality was checked: channel noise, state covariance, or
    /// observable noise.
    pub kind: String,
    pub valid: bool,
    #[serde(serialize_with = "ser_f64")]
    pub min_eig: f64,
    #[serde(serialize_with = "ser_f64")]
    pub scale: f64,
}

impl ValiditySection {
    pub fn from_psd(kind: &str, r: &PsdReport) -> Self {
        Self {
            kind: kind.to_string(),
            valid: r.psd,
            min_eig: r.min_eig,
            scale: r.scale,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PptSection {
    pub holds: bool,
    #[serde(serialize_with = "ser_f64")]
    pub plus_min_eig: f64,
    #[serde(serialize_with = "ser_f64")]
    pub minus_min_eig: f64,
}

impl PptSection {
    pub fn from_report(r: &PptReport) -> Self {
        Self {
            holds: r.holds,
            plus_min_eig: r.plus.min_eig,
            minus_min_eig: r.minus.min_eig,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixSection {
    pub rows: usize,
    pub cols: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub data: Vec<f64>,
}

impl MatrixSection {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSection {
    pub nu: MatrixSection,
    pub mu: MatrixSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct EbSection {
    /// "feasible", "infeasible", or "undecided".
    pub status: String,
    /// Short machine-greppable token, e.g. "ppt-plus-sign" or
    /// "solver-converged".
    pub reason: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(serialize_with = "ser_opt_f64", skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
}

pub fn status_str(s: EbStatus) -> &'static str {
    match s {
        EbStatus::Feasible => "feasible",
        EbStatus::Infeasible => "infeasible",
        EbStatus::Undecided => "undecided",
    }
}

impl EbSection {
    pub fn from_verdict(v: &EbVerdict) -> Self {
        let (reason, detail, iterations, margin) = match &v.reason {
            EbReason::ClassicalQuantum => (
                "classical-quantum",
                "pulled-back symplectic form vanishes; split is trivial".to_string(),
                None,
                None,
            ),
            EbReason::OneModeAnalytic { case } => (
                "one-mode-analytic",
                format!("closed-form domain for family {case}"),
                None,
                None,
            ),
            EbReason::PptViolated { sign, min_eig } => (
                match sign {
                    PptSign::Plus => "ppt-plus-sign",
                    PptSign::Minus => "ppt-minus-sign",
                },
                format!("necessary partial-transpose form has min eigenvalue {min_eig:.6e}"),
                None,
                Some(*min_eig),
            ),
            EbReason::SolverConverged { iterations, margin } => (
                "solver-converged",
                format!("verified split after {iterations} iterations"),
                Some(*iterations),
                Some(*margin),
            ),
            EbReason::IterationBudget {
                iterations,
                best_margin,
            } => (
                "iteration-budget",
                format!("no verified split within {iterations} iterations"),
                Some(*iterations),
                Some(*best_margin),
            ),
        };
        Self {
            status: status_str(v.status).to_string(),
            reason: reason.to_string(),
            detail,
            iterations,
            margin,
            certificate: v.certificate.as_ref().map(|c| CertificateSection {
                nu: MatrixSection::from_matrix(&c.nu),
                mu: MatrixSection::from_matrix(&c.mu),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassSection {
    pub case: String,
    #[serde(serialize_with = "ser_f64")]
    pub gain: f64,
    #[serde(serialize_with = "ser_opt_f64", skip_serializing_if = "Option::is_none")]
    pub added_noise: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub det_k: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sqrt_det_alpha: f64,
    pub low_confidence: bool,
    /// Closed-form breaking verdict for the classified family.
    pub breaking_analytic: bool,
}

impl ClassSection {
    pub fn from_class(cls: &OneModeClass, breaking: bool) -> Self {
        Self {
            case: cls.case.to_string(),
            gain: cls.gain,
            added_noise: cls.added_noise,
            det_k: cls.invariants.det_k,
            sqrt_det_alpha: cls.invariants.sqrt_det_alpha,
            low_confidence: cls.low_confidence,
            breaking_analytic: breaking,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacitySection {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub log_base: String,
    #[serde(serialize_with = "ser_f64")]
    pub photon_budget: f64,
    /// Always "CONJECTURED": the formula assumes an unproven optimality.
    pub status: String,
}

pub fn base_str(b: LogBase) -> &'static str {
    match b {
        LogBase::Nat => "nat",
        LogBase::Two => "two",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationSection {
    pub n_modes_ancilla: usize,
    pub k_c: MatrixSection,
    pub alpha_c: MatrixSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSection {
    pub n_samples: usize,
    pub seed: u64,
    pub reference_cov: MatrixSection,
    pub empirical_cov: MatrixSection,
    pub empirical_mean_rows: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub empirical_mean: Vec<f64>,
    /// Largest covariance deviation measured in estimated standard errors.
    #[serde(serialize_with = "ser_f64")]
    pub max_dev_in_se: f64,
    pub within_five_se: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub index: usize,
    #[serde(serialize_with = "ser_f64")]
    pub k: f64,
    #[serde(serialize_with = "ser_f64")]
    pub n: f64,
    pub breaking_analytic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSection {
    pub case: String,
    pub cells: Vec<SweepCell>,
}

/// Top-level analysis report. One per CLI invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    /// Canonical echo of the parsed input file(s), keyed by role.
    pub input: Value,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity: Option<ValiditySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_quantum: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppt: Option<PptSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eb: Option<EbSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dilation: Option<DilationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    /// Free-form diagnostic accompanying a negative verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Not part of the determinism contract; everything above this field is
    /// byte-stable for fixed inputs, flags, and seed.
    #[serde(serialize_with = "ser_f64")]
    pub walltime_ms: f64,
}

impl Report {
    pub fn new(command: &str, input: Value, tolerances: Tolerances) -> Self {
        Self {
            command: command.to_string(),
            input,
            tolerances,
            validity: None,
            classical_quantum: None,
            ppt: None,
            eb: None,
            classification: None,
            capacity: None,
            dilation: None,
            simulation: None,
            sweep: None,
            output_path: None,
            note: None,
            walltime_ms: 0.0,
        }
    }

    /// Terminal rendering; numbers are shortened for reading, the JSON form
    /// keeps full precision.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("command: {}", self.command));
        if let Some(v) = &self.validity {
            line(format!(
                "validity ({}): {} (min eigenvalue {:.6e}, scale {:.3e})",
                v.kind,
                if v.valid { "PASS" } else { "FAIL" },
                v.min_eig,
                v.scale
            ));
        }
        if let Some(cq) = self.classical_quantum {
            line(format!("classical-quantum: {}", if cq { "yes" } else { "no" }));
        }
        if let Some(p) = &self.ppt {
            line(format!(
                "partial-transpose screen: {} (plus {:.6e}, minus {:.6e})",
                if p.holds { "holds" } else { "VIOLATED" },
                p.plus_min_eig,
                p.minus_min_eig
            ));
        }
        if let Some(c) = &self.classification {
            let noise = c
                .added_noise
                .map(|n| format!("{n:.6}"))
                .unwrap_or_else(|| "-".to_string());
            line(format!(
                "one-mode class: {} (gain {:.6}, added noise {}, det K {:.6e}, sqrt det alpha {:.6e}{}{})",
                c.case,
                c.gain,
                noise,
                c.det_k,
                c.sqrt_det_alpha,
                if c.low_confidence { ", low confidence" } else { "" },
                if c.breaking_analytic {
                    ", breaking"
                } else {
                    ", not breaking"
                }
            ));
        }
        if let Some(e) = &self.eb {
            line(format!("entanglement-breaking: {} [{}]", e.status, e.reason));
            line(format!("  {}", e.detail));
            if let (Some(it), Some(m)) = (e.iterations, e.margin) {
                line(format!("  iterations {it}, margin {m:.6e}"));
            }
            if let Some(cert) = &e.certificate {
                line(format!(
                    "  certificate: nu ({}x{}) + mu ({}x{}) verified",
                    cert.nu.rows, cert.nu.cols, cert.mu.rows, cert.mu.cols
                ));
            }
        }
        if let Some(c) = &self.capacity {
            line(format!(
                "capacity ({} budget {:.4}): {:.9} [{}]",
                c.log_base, c.photon_budget, c.value, c.status
            ));
        }
        if let Some(d) = &self.dilation {
            line(format!(
                "dilation: ancilla {} mode(s), K_C {}x{}, alpha_C {}x{}",
                d.n_modes_ancilla, d.k_c.rows, d.k_c.cols, d.alpha_c.rows, d.alpha_c.cols
            ));
        }
        if let Some(s) = &self.simulation {
            line(format!(
                "simulation: {} samples, seed {}, max |dev| = {:.3} se, within 5 se: {}",
                s.n_samples, s.seed, s.max_dev_in_se, s.within_five_se
            ));
        }
        if let Some(s) = &self.sweep {
            line(format!("sweep over family {}:", s.case));
            line("  index        k        N  analytic  numeric".to_string());
            for c in &s.cells {
                line(format!(
                    "  {:>5} {:>8.4} {:>8.4}  {:>8} {:>8}",
                    c.index,
                    c.k,
                    c.n,
                    if c.breaking_analytic { "true" } else { "false" },
                    c.numeric_status.as_deref().unwrap_or("-")
                ));
            }
        }
        if let Some(p) = &self.output_path {
            line(format!("output written: {p}"));
        }
        if let Some(n) = &self.note {
            line(format!("note: {n}"));
        }
        line(format!("walltime: {:.3} ms", self.walltime_ms));
        out
    }
}
