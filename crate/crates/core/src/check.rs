//! Independent validation of recorded steps and conversions.
//!
//! Deliberately re-derives every claim from the term primitives alone
//! (subterm access, substitution, grafting, alpha comparison) instead of
//! calling into the reduction engine, so a bug there cannot vouch for its
//! own output.

use thiserror::Error;

use crate::reduce::{Conversion, RedexKind, RuleSet, Step, StepDir};
use crate::term::{Dir, Term, VarKind};

#[derive(Debug, Error, PartialEq)]
pub enum CheckFailure {
    #[error("path leaves the term")]
    BadPath,
    #[error("{kind} steps are not allowed by the rule set")]
    KindNotAllowed { kind: RedexKind },
    #[error("subterm at the path is not a {kind} redex")]
    WrongShape { kind: RedexKind },
    #[error("eta side condition fails: the binder occurs free in the function part")]
    EtaSideCondition,
    #[error("the extension variable is bound at the path")]
    ExtensionVarShadowed,
    #[error("recorded target differs from the contraction")]
    TargetMismatch,
    #[error("step {index} does not enter at the previous term")]
    BrokenChain { index: usize },
    #[error("conversion finish differs from the last term reached")]
    WrongFinish,
    #[error("step {index}: {cause}")]
    StepInvalid {
        index: usize,
        cause: Box<CheckFailure>,
    },
}

/// Recheck one recorded step from scratch.
pub fn check_step(step: &Step, rules: &RuleSet) -> Result<(), CheckFailure> {
    if !rules.allows(step.kind) {
        return Err(CheckFailure::KindNotAllowed { kind: step.kind });
    }
    let sub = step
        .source
        .subterm_at(&step.path)
        .map_err(|_| CheckFailure::BadPath)?;
    let expected = match step.kind {
        RedexKind::Beta => {
            let Term::App(f, a) = sub else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            let Term::Lam(u, b) = &**f else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            step.source
                .replace_at(&step.path, b.substitute(u, a))
                .map_err(|_| CheckFailure::BadPath)?
        }
        RedexKind::Eta => {
            let Term::Lam(v, b) = sub else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            let Term::App(m, a) = &**b else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            let Term::Var(VarKind::Named(u)) = &**a else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            if u != v {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            }
            if m.has_free(v) {
                return Err(CheckFailure::EtaSideCondition);
            }
            step.source
                .replace_at(&step.path, (**m).clone())
                .map_err(|_| CheckFailure::BadPath)?
        }
        RedexKind::FixVar => {
            let ext = rules
                .fix_var()
                .expect("allows() checked the extension is present");
            let Term::Var(VarKind::Named(u)) = sub else {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            };
            if u != ext.var() {
                return Err(CheckFailure::WrongShape { kind: step.kind });
            }
            let mut cur = &step.source;
            for d in step.path.dirs() {
                cur = match (cur, d) {
                    (Term::Lam(v, b), Dir::Body) => {
                        if v == ext.var() {
                            return Err(CheckFailure::ExtensionVarShadowed);
                        }
                        b
                    }
                    (Term::App(f, _), Dir::FunSide) => f,
                    (Term::App(_, a), Dir::ArgSide) => a,
                    _ => return Err(CheckFailure::BadPath),
                };
            }
            let unfolded = Term::app(ext.term().clone(), Term::var(ext.var().clone()));
            step.source
                .graft(&step.path, unfolded)
                .map_err(|_| CheckFailure::BadPath)?
        }
    };
    if expected != step.target {
        return Err(CheckFailure::TargetMismatch);
    }
    Ok(())
}

/// Recheck a whole conversion: every step individually, the chaining of
/// endpoints, and the declared start and finish.
pub fn check_conversion(conv: &Conversion, rules: &RuleSet) -> Result<(), CheckFailure> {
    let mut cur = conv.start();
    for (index, (dir, step)) in conv.steps().iter().enumerate() {
        let (enter, exit) = match dir {
            StepDir::Forward => (&step.source, &step.target),
            StepDir::Backward => (&step.target, &step.source),
        };
        if enter != cur {
            return Err(CheckFailure::BrokenChain { index });
        }
        check_step(step, rules).map_err(|cause| CheckFailure::StepInvalid {
            index,
            cause: Box::new(cause),
        })?;
        cur = exit;
    }
    if cur != conv.finish() {
        return Err(CheckFailure::WrongFinish);
    }
    Ok(())
}

/// [`check_conversion`] with the failure returned as a value.
pub fn conversion_error(conv: &Conversion, rules: &RuleSet) -> Option<CheckFailure> {
    check_conversion(conv, rules).err()
}
