//! `lfp`: normalize lambda terms, check fixed points, and produce or
//! recheck least-fixed-point certificates.
//!
//! Exit codes: 0 success, 1 refuted or invalid, 2 inconclusive (fuel ran
//! out), 3 usage or parse error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lfp_core::records::{
    certificate_from_records, certificate_records, read_json_lines, step_record, write_json_lines,
    Record, RecordError,
};
use lfp_core::{
    certify_least, find_fixpoint_witness, join, normalize, parse_definitions, parse_with, BaseRule,
    CertifyFailure, Conversion, Definitions, Family, JoinResult, LiftError, NormalizeResult,
    RuleSet, StepDir, Term, VarKind,
};

const OK: u8 = 0;
const REFUTED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lfp",
    version,
    about = "Lambda-calculus reduction and least-fixed-point certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce a term to normal form
    Normalize(ReduceArgs),
    /// Reduce a term, showing every step
    Trace(ReduceArgs),
    /// Test whether two terms reduce to a common term
    Joinable(JoinArgs),
    /// Check that a term is a fixed point of a function
    FixpointCheck(FixpointArgs),
    /// Produce a least-fixed-point certificate
    Certify(CertifyArgs),
    /// Recheck a certificate record stream
    CheckCert(CheckCertArgs),
}

#[derive(Args)]
struct CommonOpts {
    /// Reduction rules: beta or beta-eta
    #[arg(long, default_value = "beta", value_parser = rule_from_arg)]
    rule: BaseRule,
    /// Maximum number of reduction steps
    #[arg(long, default_value_t = 10_000)]
    fuel: u64,
    /// Definitions file (NAME = term per line)
    #[arg(long)]
    defs: Option<PathBuf>,
    /// Emit JSON-lines records instead of text
    #[arg(long)]
    json_lines: bool,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Term to reduce
    term: String,
    #[command(flatten)]
    common: CommonOpts,
    /// Extension variable for the rule y -> F y
    #[arg(long, requires = "fix_term")]
    fix_var: Option<String>,
    /// Extension function F for the rule y -> F y
    #[arg(long, requires = "fix_var")]
    fix_term: Option<String>,
}

#[derive(Args)]
struct JoinArgs {
    left: String,
    right: String,
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long, requires = "fix_term")]
    fix_var: Option<String>,
    #[arg(long, requires = "fix_var")]
    fix_term: Option<String>,
}

#[derive(Args)]
struct FixpointArgs {
    /// Function F
    function: String,
    /// Candidate fixed point M
    candidate: String,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct CertifyArgs {
    /// Function F
    function: String,
    /// Fixed point M of F
    fixed_point: String,
    /// Probe term the fixed point is applied to
    probe: String,
    /// Combinator family: y or theta
    #[arg(long, default_value = "y", value_parser = family_from_arg)]
    family: Family,
    #[command(flatten)]
    common: CommonOpts,
    /// Include the driving plain normalization in the output
    #[arg(long)]
    diagnostic: bool,
}

#[derive(Args)]
struct CheckCertArgs {
    /// Certificate file (JSON lines), or - for stdin
    file: String,
    #[command(flatten)]
    common: CommonOpts,
}

fn rule_from_arg(s: &str) -> Result<BaseRule, String> {
    BaseRule::from_token(s).ok_or_else(|| format!("expected beta or beta-eta, got {s:?}"))
}

fn family_from_arg(s: &str) -> Result<Family, String> {
    Family::from_token(s).ok_or_else(|| format!("expected y or theta, got {s:?}"))
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Out = Box<dyn Write>;

impl CommonOpts {
    fn definitions(&self) -> Result<Definitions, Failure> {
        match &self.defs {
            None => Ok(Definitions::default()),
            Some(path) => {
                let src = fs::read_to_string(path)
                    .map_err(|e| fail(USAGE, format!("cannot read {}: {e}", path.display())))?;
                parse_definitions(&src).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
            }
        }
    }

    fn term(&self, src: &str, defs: &Definitions) -> Result<Term, Failure> {
        parse_with(src, defs).map_err(|e| fail(USAGE, format!("in {src:?}: {e}")))
    }

    fn output(&self) -> Result<Out, Failure> {
        match &self.out {
            None => Ok(Box::new(io::stdout().lock())),
            Some(path) => {
                let f = fs::File::create(path)
                    .map_err(|e| fail(USAGE, format!("cannot write {}: {e}", path.display())))?;
                Ok(Box::new(io::BufWriter::new(f)))
            }
        }
    }

    fn emit(&self, records: &[Record]) -> Result<(), Failure> {
        let out = self.output()?;
        write_records(out, records)
    }
}

// a closed pipe downstream is not an error worth reporting
fn io_failure(e: io::Error) -> Failure {
    if e.kind() == io::ErrorKind::BrokenPipe {
        std::process::exit(i32::from(OK));
    }
    fail(USAGE, format!("cannot write output: {e}"))
}

fn record_failure(e: RecordError) -> Failure {
    match e {
        RecordError::Io(inner) => io_failure(inner),
        other => fail(USAGE, format!("cannot write output: {other}")),
    }
}

fn write_records(mut out: Out, records: &[Record]) -> Result<(), Failure> {
    write_json_lines(&mut out, records).map_err(record_failure)?;
    out.flush().map_err(io_failure)
}

fn extension(
    base: BaseRule,
    fix_var: &Option<String>,
    fix_term: &Option<String>,
    defs: &Definitions,
    common: &CommonOpts,
) -> Result<RuleSet, Failure> {
    match (fix_var, fix_term) {
        (Some(v), Some(t)) => {
            let var = match common.term(v, defs)? {
                Term::Var(VarKind::Named(name)) => name,
                _ => {
                    return Err(fail(
                        USAGE,
                        format!("--fix-var must be a variable, got {v:?}"),
                    ))
                }
            };
            let term = common.term(t, defs)?;
            RuleSet::with_fix_var(base, var, term).map_err(|e| fail(USAGE, e.to_string()))
        }
        _ => Ok(RuleSet::new(base)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => OK,
                _ => USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Normalize(a) => reduce_cmd(a, false),
        Cmd::Trace(a) => reduce_cmd(a, true),
        Cmd::Joinable(a) => joinable_cmd(a),
        Cmd::FixpointCheck(a) => fixpoint_cmd(a),
        Cmd::Certify(a) => certify_cmd(a),
        Cmd::CheckCert(a) => check_cert_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("lfp: {message}");
            ExitCode::from(code)
        }
    }
}

fn reduce_cmd(a: ReduceArgs, trace: bool) -> Result<u8, Failure> {
    let defs = a.common.definitions()?;
    let term = a.common.term(&a.term, &defs)?;
    let rules = extension(a.common.rule, &a.fix_var, &a.fix_term, &defs, &a.common)?;
    let result = normalize(&term, &rules, a.common.fuel);
    let (steps, final_term, done) = match &result {
        NormalizeResult::Normalized { normal_form, steps } => (steps, normal_form, true),
        NormalizeResult::FuelExhausted { partial, steps } => (steps, partial, false),
    };

    if a.common.json_lines {
        let mut records = Vec::new();
        if trace {
            for s in steps {
                records.push(Record::Step(step_record(StepDir::Forward, s)));
            }
        }
        records.push(Record::Status {
            status: if done {
                "normal-form"
            } else {
                "fuel-exhausted"
            }
            .into(),
            detail: Some(final_term.to_string()),
        });
        a.common.emit(&records)?;
    } else {
        let mut out = a.common.output()?;
        let write = |out: &mut Out| -> io::Result<()> {
            if trace {
                writeln!(out, "  {term}")?;
                for s in steps {
                    writeln!(out, "» {} @ {}", s.kind, s.path)?;
                    writeln!(out, "  {}", s.target)?;
                }
            }
            if done {
                writeln!(out, "{final_term}")?;
            } else {
                writeln!(
                    out,
                    "fuel exhausted after {} steps at: {final_term}",
                    steps.len()
                )?;
            }
            Ok(())
        };
        write(&mut out).map_err(io_failure)?;
        out.flush().map_err(io_failure)?;
    }
    Ok(if done { OK } else { INCONCLUSIVE })
}

fn joinable_cmd(a: JoinArgs) -> Result<u8, Failure> {
    let defs = a.common.definitions()?;
    let left = a.common.term(&a.left, &defs)?;
    let right = a.common.term(&a.right, &defs)?;
    let rules = extension(a.common.rule, &a.fix_var, &a.fix_term, &defs, &a.common)?;
    let result = join(&left, &right, &rules, a.common.fuel);
    let (code, record, text) = match &result {
        JoinResult::Joined {
            meet,
            left_steps,
            right_steps,
        } => (
            OK,
            Record::Join {
                joinable: true,
                meet: Some(meet.to_string()),
                left_steps: left_steps.len(),
                right_steps: right_steps.len(),
            },
            format!("joinable at: {meet}"),
        ),
        JoinResult::Separated {
            left_normal,
            right_normal,
        } => (
            REFUTED,
            Record::Join {
                joinable: false,
                meet: None,
                left_steps: 0,
                right_steps: 0,
            },
            format!("distinct normal forms: {left_normal} and {right_normal}"),
        ),
        JoinResult::Inconclusive { .. } => (
            INCONCLUSIVE,
            Record::Status {
                status: "fuel-exhausted".into(),
                detail: None,
            },
            "inconclusive: fuel exhausted before both sides normalized".to_string(),
        ),
    };
    if a.common.json_lines {
        a.common.emit(&[record])?;
    } else {
        let mut out = a.common.output()?;
        writeln!(out, "{text}").map_err(io_failure)?;
        out.flush().map_err(io_failure)?;
    }
    Ok(code)
}

fn witness_records(witness: &Conversion) -> Vec<Record> {
    witness
        .steps()
        .iter()
        .map(|(dir, s)| Record::WitnessStep(step_record(*dir, s)))
        .collect()
}

fn fixpoint_cmd(a: FixpointArgs) -> Result<u8, Failure> {
    let defs = a.common.definitions()?;
    let function = a.common.term(&a.function, &defs)?;
    let candidate = a.common.term(&a.candidate, &defs)?;
    match find_fixpoint_witness(&function, &candidate, a.common.rule, a.common.fuel) {
        Ok(witness) => {
            if a.common.json_lines {
                let mut records = witness_records(&witness);
                records.push(Record::Status {
                    status: "fixed-point".into(),
                    detail: Some(witness.finish().to_string()),
                });
                a.common.emit(&records)?;
            } else {
                let mut out = a.common.output()?;
                writeln!(out, "fixed point confirmed in {} steps", witness.len())
                    .map_err(io_failure)?;
                out.flush().map_err(io_failure)?;
            }
            Ok(OK)
        }
        Err(e) => certify_failure(e, &a.common),
    }
}

fn certify_failure(e: CertifyFailure, common: &CommonOpts) -> Result<u8, Failure> {
    let (code, status) = match &e {
        CertifyFailure::NotAFixpoint { .. } => (REFUTED, "refuted"),
        CertifyFailure::FixpointInconclusive => (INCONCLUSIVE, "fuel-exhausted"),
        CertifyFailure::Lift(LiftError::FuelExhausted { .. }) => (INCONCLUSIVE, "fuel-exhausted"),
        CertifyFailure::TrackedInput => (USAGE, "usage"),
        _ => (REFUTED, "invalid"),
    };
    if common.json_lines {
        common.emit(&[Record::Status {
            status: status.into(),
            detail: Some(e.to_string()),
        }])?;
        Ok(code)
    } else {
        Err(fail(code, e.to_string()))
    }
}

fn certify_cmd(a: CertifyArgs) -> Result<u8, Failure> {
    let defs = a.common.definitions()?;
    let function = a.common.term(&a.function, &defs)?;
    let fixed_point = a.common.term(&a.fixed_point, &defs)?;
    let probe = a.common.term(&a.probe, &defs)?;
    let cert = match certify_least(
        &function,
        &fixed_point,
        &probe,
        a.family,
        a.common.rule,
        a.common.fuel,
    ) {
        Ok(cert) => cert,
        Err(e) => return certify_failure(e, &a.common),
    };

    if a.common.json_lines || a.common.out.is_some() {
        let mut records = certificate_records(&cert);
        if a.diagnostic {
            // re-derive the driving plain reduction for inspection
            let combinator = match a.family {
                Family::Y => lfp_core::y_combinator(),
                Family::Theta => lfp_core::theta(),
            };
            let start = Term::app(Term::app(combinator, function.clone()), probe.clone());
            if let NormalizeResult::Normalized { steps, .. } =
                normalize(&start, &RuleSet::new(a.common.rule), a.common.fuel)
            {
                for s in &steps {
                    records.push(Record::Step(step_record(StepDir::Forward, s)));
                }
            }
        }
        records.push(Record::Status {
            status: "certified".into(),
            detail: Some(cert.normal_form.to_string()),
        });
        a.common.emit(&records)?;
    } else {
        let mut out = a.common.output()?;
        let write = |out: &mut Out| -> io::Result<()> {
            writeln!(
                out,
                "certified: {} probe reaches {}",
                a.fixed_point, cert.normal_form
            )?;
            writeln!(
                out,
                "fixed-point witness: {} steps; main conversion: {} steps",
                cert.fixpoint_witness.len(),
                cert.main_conversion.len()
            )?;
            Ok(())
        };
        write(&mut out).map_err(io_failure)?;
        out.flush().map_err(io_failure)?;
    }
    Ok(OK)
}

fn check_cert_cmd(a: CheckCertArgs) -> Result<u8, Failure> {
    let text = if a.file == "-" {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| fail(USAGE, format!("cannot read stdin: {e}")))?;
        buf
    } else {
        fs::read_to_string(&a.file)
            .map_err(|e| fail(USAGE, format!("cannot read {}: {e}", a.file)))?
    };
    let records = read_json_lines(io::Cursor::new(text))
        .map_err(|e| fail(USAGE, format!("bad record stream: {e}")))?;
    let cert = match certificate_from_records(&records) {
        Ok(cert) => cert,
        Err(e) => return refute_check(&a, format!("certificate does not reconstruct: {e}")),
    };
    if let Err(e) = cert.verify() {
        return refute_check(&a, format!("certificate refuted: {e}"));
    }
    if a.common.json_lines {
        a.common.emit(&[Record::Status {
            status: "valid".into(),
            detail: Some(cert.normal_form.to_string()),
        }])?;
    } else {
        let mut out = a.common.output()?;
        writeln!(
            out,
            "valid: {} applied to {} reaches {}",
            cert.fixed_point, cert.probe, cert.normal_form
        )
        .map_err(io_failure)?;
        out.flush().map_err(io_failure)?;
    }
    Ok(OK)
}

fn refute_check(a: &CheckCertArgs, message: String) -> Result<u8, Failure> {
    if a.common.json_lines {
        a.common.emit(&[Record::Status {
            status: "invalid".into(),
            detail: Some(message),
        }])?;
        Ok(REFUTED)
    } else {
        Err(fail(REFUTED, message))
    }
}
