//! Flat record streams for traces and certificates.
//!
//! Every record is one JSON object tagged by `rec`, written one per line,
//! so a stream can be produced and consumed incrementally and inspected
//! with ordinary line tools. Terms travel as concrete syntax; a stream
//! therefore only carries terms without tracked variables, which is all a
//! finished certificate contains.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lift::LeastFixpointCertificate;
use crate::reduce::{BaseRule, Conversion, RedexKind, ReduceError, Step, StepDir};
use crate::syntax::{parse, print, ParseError};
use crate::term::{Dir, Path, Term};
use crate::Family;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("malformed record stream: {0}")]
    Malformed(String),
}

fn bad(msg: impl Into<String>) -> RecordError {
    RecordError::Malformed(msg.into())
}

/// One contraction in serializable form. `path` is the list of direction
/// tokens from the root; `rule` is the redex-kind token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub dir: String,
    pub from: String,
    pub path: Vec<String>,
    pub rule: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertHeader {
    pub function: String,
    pub fixed_point: String,
    pub probe: String,
    pub family: String,
    pub rule: String,
    pub normal_form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rec", rename_all = "kebab-case")]
pub enum Record {
    /// A step of a plain reduction trace.
    Step(StepRecord),
    /// A step of a certificate's fixed-point witness.
    WitnessStep(StepRecord),
    /// A step of a certificate's main conversion.
    MainStep(StepRecord),
    /// Certificate endpoints and parameters.
    Cert(CertHeader),
    /// Tracked-variable legend for lifted traces.
    Descriptor {
        index: usize,
        tag: String,
        detail: String,
    },
    /// Outcome of a joinability query.
    Join {
        joinable: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        meet: Option<String>,
        left_steps: usize,
        right_steps: usize,
    },
    /// Final outcome of a run.
    Status {
        status: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
    },
}

// ===========================================================================
// Steps
// ===========================================================================

pub fn step_record(dir: StepDir, step: &Step) -> StepRecord {
    StepRecord {
        dir: dir.token().to_string(),
        from: print(&step.source),
        path: step
            .path
            .dirs()
            .iter()
            .map(|d| d.token().to_string())
            .collect(),
        rule: step.kind.token().to_string(),
        to: print(&step.target),
    }
}

pub fn step_from_record(r: &StepRecord) -> Result<(StepDir, Step), RecordError> {
    let dir = StepDir::from_token(&r.dir).ok_or_else(|| bad(format!("bad dir {:?}", r.dir)))?;
    let kind =
        RedexKind::from_token(&r.rule).ok_or_else(|| bad(format!("bad rule {:?}", r.rule)))?;
    let mut dirs = Vec::with_capacity(r.path.len());
    for tok in &r.path {
        dirs.push(Dir::from_token(tok).ok_or_else(|| bad(format!("bad path token {tok:?}")))?);
    }
    Ok((
        dir,
        Step {
            source: parse(&r.from)?,
            path: Path::of(dirs),
            kind,
            target: parse(&r.to)?,
        },
    ))
}

// ===========================================================================
// Certificates
// ===========================================================================

/// Flatten a certificate into a record stream: one header, then the
/// fixed-point witness, then the main conversion.
pub fn certificate_records(cert: &LeastFixpointCertificate) -> Vec<Record> {
    let mut out = Vec::new();
    out.push(Record::Cert(CertHeader {
        function: print(&cert.function),
        fixed_point: print(&cert.fixed_point),
        probe: print(&cert.probe),
        family: cert.family.token().to_string(),
        rule: cert.rule_base.token().to_string(),
        normal_form: print(&cert.normal_form),
    }));
    for (dir, step) in cert.fixpoint_witness.steps() {
        out.push(Record::WitnessStep(step_record(*dir, step)));
    }
    for (dir, step) in cert.main_conversion.steps() {
        out.push(Record::MainStep(step_record(*dir, step)));
    }
    out
}

/// Rebuild a certificate from a record stream. Chaining of both
/// conversions is validated here; rule-level validity is the verifier's
/// job.
pub fn certificate_from_records(
    records: &[Record],
) -> Result<LeastFixpointCertificate, RecordError> {
    let mut header: Option<&CertHeader> = None;
    for r in records {
        if let Record::Cert(h) = r {
            if header.is_some() {
                return Err(bad("more than one cert record"));
            }
            header = Some(h);
        }
    }
    let h = header.ok_or_else(|| bad("no cert record"))?;
    let function = parse(&h.function)?;
    let fixed_point = parse(&h.fixed_point)?;
    let probe = parse(&h.probe)?;
    let normal_form = parse(&h.normal_form)?;
    let family =
        Family::from_token(&h.family).ok_or_else(|| bad(format!("bad family {:?}", h.family)))?;
    let rule_base =
        BaseRule::from_token(&h.rule).ok_or_else(|| bad(format!("bad rule {:?}", h.rule)))?;

    let mut witness = Conversion::empty(Term::app(function.clone(), fixed_point.clone()));
    let mut main = Conversion::empty(Term::app(fixed_point.clone(), probe.clone()));
    for r in records {
        match r {
            Record::WitnessStep(sr) => {
                let (dir, step) = step_from_record(sr)?;
                witness.push(dir, step)?;
            }
            Record::MainStep(sr) => {
                let (dir, step) = step_from_record(sr)?;
                main.push(dir, step)?;
            }
            _ => {}
        }
    }
    Ok(LeastFixpointCertificate {
        function,
        fixed_point,
        probe,
        family,
        rule_base,
        fixpoint_witness: witness,
        normal_form,
        main_conversion: main,
    })
}

// ===========================================================================
// JSON lines
// ===========================================================================

pub fn write_json_lines<W: io::Write>(mut w: W, records: &[Record]) -> Result<(), RecordError> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_json_lines<R: io::BufRead>(r: R) -> Result<Vec<Record>, RecordError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
