//! Fixed-point combinators and tracked unfolding.
//!
//! A tracked variable stands for one member of the unfolding family of a
//! combinator application: `Y F`, its internal unrollings, the
//! self-application pair those unrollings expose, or `Θ F` and its head
//! reducts. [`UpsilonElem`] is the descriptor; [`realize`] maps it back to
//! the plain term; [`upsilon_step`] explains one base-rule step landing
//! inside a realization as descriptor evolution plus a replayable chain of
//! steps in the extended system `y -> F y`.

use std::fmt;

use thiserror::Error;

use crate::reduce::{
    lift_steps, make_step, subst_conversion, Conversion, RedexKind, ReduceError, RuleSet, Step,
};
use crate::term::{Dir, Path, Term, TermError, VarKind, VarName};

#[derive(Debug, Error, PartialEq)]
pub enum FixpointError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("rule set has no extension variable")]
    MissingExtension,
    #[error("extension term does not match the descriptor's base")]
    ExtensionMismatch,
    #[error("realization has no redex at {path}")]
    NoRedexAt { path: Path },
    #[error("term is not a reduct of the pairing combinator")]
    NotAThetaReduct,
    #[error("descriptor is inconsistent: {0}")]
    Malformed(String),
}

// ===========================================================================
// Combinators
// ===========================================================================

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Y,
    Theta,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Y => "y",
            Family::Theta => "theta",
        }
    }

    pub fn from_token(tok: &str) -> Option<Family> {
        match tok {
            "y" => Some(Family::Y),
            "theta" => Some(Family::Theta),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// `f` applied `n` times to `arg`.
pub fn iterate_app(f: &Term, n: usize, arg: Term) -> Term {
    let mut out = arg;
    for _ in 0..n {
        out = Term::app(f.clone(), out);
    }
    out
}

/// The self-application pair `(λx.f (x x)) (λx.f (x x))`, with the binder
/// kept clear of the names of `f`.
pub fn y_pair(f: &Term) -> Term {
    let avoid = f.all_names();
    let x = crate::term::fresh_from("x", &avoid);
    let xx = Term::app(Term::var(x.clone()), Term::var(x.clone()));
    let half = Term::lam(x, Term::app(f.clone(), xx));
    Term::app(half.clone(), half)
}

/// The n-fold unrolling `λf.fⁿ((λx.f (x x)) (λx.f (x x)))`. The zero case
/// is the plain fixed-point combinator.
pub fn y_n(n: usize) -> Term {
    let f = Term::var("f");
    Term::lam("f", iterate_app(&f, n, y_pair(&f)))
}

pub fn y_combinator() -> Term {
    y_n(0)
}

/// `(λw.λu.u (w w u)) (λw.λu.u (w w u))`.
pub fn theta() -> Term {
    let w = Term::var("w");
    let u = Term::var("u");
    let half = Term::lam(
        "w",
        Term::lam(
            "u",
            Term::app(u.clone(), Term::app(Term::app(w.clone(), w), u)),
        ),
    );
    Term::app(half.clone(), half)
}

// ===========================================================================
// Descriptors
// ===========================================================================

/// Descriptor of one member of the unfolding family. Witness fields record
/// base-rule steps that reach the stored reducts: `f_witness` runs from the
/// original function term, `witness1`/`witness2` from the function applied
/// to the hole variable, `theta_witness` from the pairing combinator.
#[derive(Clone, Debug)]
pub enum UpsilonElem {
    /// `Yₙ F'` for a reduct `F'` of the function.
    YnForm {
        n: usize,
        f_reduct: Term,
        f_witness: Vec<Step>,
    },
    /// `(λg.B₁[z≔g g]) (λg.B₂[z≔g g])` for reducts `B₁`, `B₂` of `F z`,
    /// where `z` is the hole variable and `g` is chosen fresh.
    PairForm {
        hole: VarName,
        body1: Term,
        witness1: Vec<Step>,
        body2: Term,
        witness2: Vec<Step>,
    },
    /// `T F'` for a reduct `T` of the pairing combinator and `F'` of the
    /// function.
    ThetaForm {
        theta_reduct: Term,
        theta_witness: Vec<Step>,
        f_reduct: Term,
        f_witness: Vec<Step>,
    },
}

impl UpsilonElem {
    pub fn form_tag(&self) -> &'static str {
        match self {
            UpsilonElem::YnForm { .. } => "y-unroll",
            UpsilonElem::PairForm { .. } => "pair",
            UpsilonElem::ThetaForm { .. } => "theta",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            UpsilonElem::YnForm { n, f_witness, .. } => {
                format!("y-unroll(n={n}, f-steps={})", f_witness.len())
            }
            UpsilonElem::PairForm {
                witness1, witness2, ..
            } => format!(
                "pair(left-steps={}, right-steps={})",
                witness1.len(),
                witness2.len()
            ),
            UpsilonElem::ThetaForm {
                theta_witness,
                f_witness,
                ..
            } => format!(
                "theta(head-steps={}, f-steps={})",
                theta_witness.len(),
                f_witness.len()
            ),
        }
    }

    /// The original function term the descriptor unfolds, recovered from
    /// the first witness step. `None` when the descriptor does not pin it
    /// down (a pair whose bodies already diverged from applied shape).
    pub fn base_function(&self) -> Option<Term> {
        match self {
            UpsilonElem::YnForm {
                f_reduct,
                f_witness,
                ..
            }
            | UpsilonElem::ThetaForm {
                f_reduct,
                f_witness,
                ..
            } => Some(
                f_witness
                    .first()
                    .map(|s| s.source.clone())
                    .unwrap_or_else(|| f_reduct.clone()),
            ),
            UpsilonElem::PairForm {
                hole,
                body1,
                witness1,
                ..
            } => {
                let start = witness1
                    .first()
                    .map(|s| s.source.clone())
                    .unwrap_or_else(|| body1.clone());
                match &start {
                    Term::App(f, a) => match &**a {
                        Term::Var(VarKind::Named(u)) if u == hole => Some((**f).clone()),
                        _ => None,
                    },
                    _ => None,
                }
            }
        }
    }
}

pub fn initial_elem(family: Family, f: &Term) -> UpsilonElem {
    match family {
        Family::Y => UpsilonElem::YnForm {
            n: 0,
            f_reduct: f.clone(),
            f_witness: Vec::new(),
        },
        Family::Theta => UpsilonElem::ThetaForm {
            theta_reduct: theta(),
            theta_witness: Vec::new(),
            f_reduct: f.clone(),
            f_witness: Vec::new(),
        },
    }
}

/// The plain term a descriptor stands for.
pub fn realize(elem: &UpsilonElem) -> Term {
    match elem {
        UpsilonElem::YnForm { n, f_reduct, .. } => Term::app(y_n(*n), f_reduct.clone()),
        UpsilonElem::PairForm {
            hole, body1, body2, ..
        } => {
            let mut avoid = body1.all_names();
            avoid.extend(body2.all_names());
            avoid.insert(hole.clone());
            let g = crate::term::fresh_from("g", &avoid);
            let gg = Term::app(Term::var(g.clone()), Term::var(g.clone()));
            Term::app(
                Term::lam(g.clone(), body1.substitute(hole, &gg)),
                Term::lam(g, body2.substitute(hole, &gg)),
            )
        }
        UpsilonElem::ThetaForm {
            theta_reduct,
            f_reduct,
            ..
        } => Term::app(theta_reduct.clone(), f_reduct.clone()),
    }
}

// ===========================================================================
// Single-step decomposition
// ===========================================================================

/// How a head contraction unrolled the realization.
#[derive(Clone, Debug)]
pub enum Unrolling {
    /// The result is `copies` applications of the function reduct around
    /// the next tracked variable. Internal steps that leave the applied
    /// shape untouched report zero copies.
    Spine { copies: usize },
    /// The result is `body` with the next tracked variable substituted for
    /// the free occurrences of `hole`.
    Context { body: Term, hole: VarName },
}

/// Explanation of one base-rule step inside a realization.
#[derive(Clone, Debug)]
pub struct StepDecomposition {
    pub shape: Unrolling,
    /// Latest function data in play: the function reduct for spines, the
    /// hole-parameterized body for contexts.
    pub f_reduct: Term,
    pub f_witness: Vec<Step>,
    pub next: UpsilonElem,
    /// Tracked replacement for the stepped variable; realizes to the
    /// contraction of the realization.
    pub result: Term,
    /// Steps in the extended system from the bare extension variable to the
    /// projection of `result`. Empty when the step is internal.
    pub phi_steps: Vec<Step>,
}

/// Steps `y -> F y -> F (F y) -> …` (`copies` unfoldings), then each copy
/// of `F` reduced along `f_witness`.
fn spine_phi(
    copies: usize,
    f_witness: &[Step],
    rules: &RuleSet,
) -> Result<Vec<Step>, FixpointError> {
    let ext = rules.fix_var().ok_or(FixpointError::MissingExtension)?;
    let mut steps = Vec::new();
    let mut cur = Term::var(ext.var().clone());
    for i in 0..copies {
        let at = Path::of(vec![Dir::ArgSide; i]);
        let s = make_step(&cur, &at, RedexKind::FixVar, rules)?;
        cur = s.target.clone();
        steps.push(s);
    }
    for i in 0..copies {
        let mut dirs = vec![Dir::ArgSide; i];
        dirs.push(Dir::FunSide);
        let lifted = lift_steps(&cur, &Path::of(dirs), f_witness, rules)?;
        if let Some(last) = lifted.last() {
            cur = last.target.clone();
        }
        steps.extend(lifted);
    }
    Ok(steps)
}

/// A canonical reduction of the pairing combinator to the given reduct,
/// rebuilt from the reduct's shape.
fn theta_witness_for(reduct: &Term, base: &RuleSet) -> Result<Vec<Step>, FixpointError> {
    if *reduct == theta() {
        return Ok(Vec::new());
    }
    let Term::Lam(u, body) = reduct else {
        return Err(FixpointError::NotAThetaReduct);
    };
    let (k, s) = peel_theta_body(body, u)?;
    let first = make_step(&theta(), &Path::root(), RedexKind::Beta, base)?;
    let mut steps = vec![first.clone()];
    let mut cur = first.target;
    let inner_at = Path::of(vec![Dir::Body, Dir::ArgSide, Dir::FunSide]);
    if k == 1 {
        let inner = theta_witness_for(&s, base)?;
        let lifted = lift_steps(&cur, &inner_at, &inner, base)?;
        if let Some(last) = lifted.last() {
            cur = last.target.clone();
        }
        steps.extend(lifted);
    } else {
        let prev = Term::lam(
            u.clone(),
            iterate_app(
                &Term::var(u.clone()),
                k - 1,
                Term::app(s.clone(), Term::var(u.clone())),
            ),
        );
        let inner = theta_witness_for(&prev, base)?;
        let lifted = lift_steps(&cur, &inner_at, &inner, base)?;
        if let Some(last) = lifted.last() {
            cur = last.target.clone();
        }
        steps.extend(lifted);
        let final_beta = make_step(
            &cur,
            &Path::of(vec![Dir::Body, Dir::ArgSide]),
            RedexKind::Beta,
            base,
        )?;
        cur = final_beta.target.clone();
        steps.push(final_beta);
    }
    if cur != *reduct {
        return Err(FixpointError::Malformed(
            "rebuilt head witness misses the reduct".into(),
        ));
    }
    Ok(steps)
}

/// Split `u(u(…u(S u)…))` into the copy count and `S`.
fn peel_theta_body(body: &Term, u: &VarName) -> Result<(usize, Term), FixpointError> {
    let mut k = 0usize;
    let mut cur = body;
    loop {
        let Term::App(h, a) = cur else {
            return Err(FixpointError::NotAThetaReduct);
        };
        match &**h {
            Term::Var(VarKind::Named(v)) if v == u => {
                k += 1;
                cur = a;
            }
            _ => {
                // innermost must be S u with u not free in S
                let Term::Var(VarKind::Named(v)) = &**a else {
                    return Err(FixpointError::NotAThetaReduct);
                };
                if v != u || k == 0 || h.has_free(u) {
                    return Err(FixpointError::NotAThetaReduct);
                }
                return Ok((k, (**h).clone()));
            }
        }
    }
}

fn strip_fun_prefix(steps: &[Step]) -> Option<Vec<Step>> {
    let fun = Path::of(vec![Dir::FunSide]);
    let mut out = Vec::new();
    for s in steps {
        if s.path.dirs().first() != Some(&Dir::FunSide) {
            return None;
        }
        let source = s.source.subterm_at(&fun).ok()?.clone();
        let target = s.target.subterm_at(&fun).ok()?.clone();
        out.push(Step {
            source,
            path: Path::of(s.path.dirs()[1..].to_vec()),
            kind: s.kind,
            target,
        });
    }
    Some(out)
}

/// Explain the base-rule step at `path` inside `realize(elem)`. `rules`
/// must carry the extension `y -> F y` for the original function the
/// descriptor unfolds; returned `phi_steps` live in that extended system.
pub fn upsilon_step(
    elem: &UpsilonElem,
    path: &Path,
    kind: RedexKind,
    rules: &RuleSet,
) -> Result<StepDecomposition, FixpointError> {
    let ext = rules.fix_var().ok_or(FixpointError::MissingExtension)?;
    if let Some(base) = elem.base_function() {
        if base != *ext.term() {
            return Err(FixpointError::ExtensionMismatch);
        }
    }
    let base_rules = rules.without_fix();
    let no_redex = || FixpointError::NoRedexAt { path: path.clone() };
    let dirs = path.dirs();

    match elem {
        UpsilonElem::YnForm {
            n,
            f_reduct,
            f_witness,
        } => match dirs.first() {
            // (λf.fⁿ(pair)) F' -> F'ⁿ(pair[f≔F']), spawning the pair
            None => {
                if kind != RedexKind::Beta {
                    return Err(no_redex());
                }
                let avoid: std::collections::BTreeSet<_> = ext
                    .term()
                    .all_names()
                    .into_iter()
                    .chain(f_reduct.all_names())
                    .chain([ext.var().clone()])
                    .collect();
                let hole = crate::term::fresh_from("z", &avoid);
                let applied_base = Term::app(ext.term().clone(), Term::var(hole.clone()));
                let witness = lift_steps(
                    &applied_base,
                    &Path::of(vec![Dir::FunSide]),
                    f_witness,
                    &base_rules,
                )?;
                let body = Term::app(f_reduct.clone(), Term::var(hole.clone()));
                let next = UpsilonElem::PairForm {
                    hole,
                    body1: body.clone(),
                    witness1: witness.clone(),
                    body2: body,
                    witness2: witness,
                };
                let result = iterate_app(f_reduct, *n, Term::tracked(next.clone()));
                let phi_steps = spine_phi(*n, f_witness, rules)?;
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: *n },
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                    next,
                    result,
                    phi_steps,
                })
            }
            // the unrolling's sole internal redex bumps n
            Some(Dir::FunSide) => {
                let want_len = 2 + n;
                let shape_ok = dirs.len() == want_len
                    && dirs[1] == Dir::Body
                    && dirs[2..].iter().all(|d| *d == Dir::ArgSide);
                if !shape_ok || kind != RedexKind::Beta {
                    return Err(no_redex());
                }
                let next = UpsilonElem::YnForm {
                    n: n + 1,
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                };
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: 0 },
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                    result: Term::tracked(next.clone()),
                    next,
                    phi_steps: Vec::new(),
                })
            }
            // a step inside the function reduct
            Some(Dir::ArgSide) => {
                let rest = Path::of(dirs[1..].to_vec());
                let step = make_step(f_reduct, &rest, kind, &base_rules)?;
                let mut f_witness = f_witness.clone();
                let f_reduct = step.target.clone();
                f_witness.push(step);
                let next = UpsilonElem::YnForm {
                    n: *n,
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                };
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: 0 },
                    f_reduct,
                    f_witness,
                    result: Term::tracked(next.clone()),
                    next,
                    phi_steps: Vec::new(),
                })
            }
            Some(Dir::Body) => Err(no_redex()),
        },

        UpsilonElem::PairForm {
            hole,
            body1,
            witness1,
            body2,
            witness2,
        } => match dirs.first() {
            // (λg.B₁[z≔g g]) (λg.B₂[z≔g g]) -> B₁[z≔pair of B₂]
            None => {
                if kind != RedexKind::Beta {
                    return Err(no_redex());
                }
                let next = UpsilonElem::PairForm {
                    hole: hole.clone(),
                    body1: body2.clone(),
                    witness1: witness2.clone(),
                    body2: body2.clone(),
                    witness2: witness2.clone(),
                };
                let result = body1.substitute(hole, &Term::tracked(next.clone()));

                let mut phi_steps = Vec::new();
                let unfold = make_step(
                    &Term::var(ext.var().clone()),
                    &Path::root(),
                    RedexKind::FixVar,
                    rules,
                )?;
                let after_unfold = unfold.target.clone();
                phi_steps.push(unfold);
                if !witness1.is_empty() {
                    let conv = Conversion::from_forward_steps(
                        witness1[0].source.clone(),
                        witness1.clone(),
                    )?;
                    let substituted =
                        subst_conversion(&conv, hole, &Term::var(ext.var().clone()), rules)?;
                    if *substituted.start() != after_unfold {
                        return Err(FixpointError::Malformed(
                            "pair witness does not start at the applied function".into(),
                        ));
                    }
                    phi_steps.extend(substituted.steps().iter().map(|(_, s)| s.clone()));
                }

                let spine = match body1 {
                    Term::App(h, a) => match &**a {
                        Term::Var(VarKind::Named(v)) if v == hole => {
                            strip_fun_prefix(witness1).map(|w| ((**h).clone(), w))
                        }
                        _ => None,
                    },
                    _ => None,
                };
                let (shape, f_reduct, f_witness) = match spine {
                    Some((head, stripped)) => (Unrolling::Spine { copies: 1 }, head, stripped),
                    None => (
                        Unrolling::Context {
                            body: body1.clone(),
                            hole: hole.clone(),
                        },
                        body1.clone(),
                        witness1.clone(),
                    ),
                };
                Ok(StepDecomposition {
                    shape,
                    f_reduct,
                    f_witness,
                    next,
                    result,
                    phi_steps,
                })
            }
            // a step inside one of the bodies, replayed on the stored
            // hole-parameterized form at the same position
            Some(side @ (Dir::FunSide | Dir::ArgSide)) => {
                if dirs.get(1) != Some(&Dir::Body) {
                    return Err(no_redex());
                }
                let rest = Path::of(dirs[2..].to_vec());
                let left = *side == Dir::FunSide;
                let body = if left { body1 } else { body2 };
                let step = make_step(body, &rest, kind, &base_rules)?;
                let (mut w1, mut w2) = (witness1.clone(), witness2.clone());
                let (mut b1, mut b2) = (body1.clone(), body2.clone());
                if left {
                    b1 = step.target.clone();
                    w1.push(step);
                } else {
                    b2 = step.target.clone();
                    w2.push(step);
                }
                let next = UpsilonElem::PairForm {
                    hole: hole.clone(),
                    body1: b1.clone(),
                    witness1: w1.clone(),
                    body2: b2,
                    witness2: w2,
                };
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: 0 },
                    f_reduct: b1,
                    f_witness: w1,
                    result: Term::tracked(next.clone()),
                    next,
                    phi_steps: Vec::new(),
                })
            }
            Some(Dir::Body) => Err(no_redex()),
        },

        UpsilonElem::ThetaForm {
            theta_reduct,
            theta_witness,
            f_reduct,
            f_witness,
        } => match dirs.first() {
            // (λu.uᵏ(S u)) F' -> F'ᵏ(S F')
            None => {
                if kind != RedexKind::Beta {
                    return Err(no_redex());
                }
                let Term::Lam(u, body) = theta_reduct else {
                    return Err(no_redex());
                };
                let (k, s) = peel_theta_body(body, u)?;
                let next = UpsilonElem::ThetaForm {
                    theta_witness: theta_witness_for(&s, &base_rules)?,
                    theta_reduct: s,
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                };
                let result = iterate_app(f_reduct, k, Term::tracked(next.clone()));
                let phi_steps = spine_phi(k, f_witness, rules)?;
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: k },
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                    next,
                    result,
                    phi_steps,
                })
            }
            // a step inside the head reduct
            Some(Dir::FunSide) => {
                let rest = Path::of(dirs[1..].to_vec());
                let step = make_step(theta_reduct, &rest, kind, &base_rules)?;
                let mut theta_witness = theta_witness.clone();
                let theta_reduct = step.target.clone();
                theta_witness.push(step);
                let next = UpsilonElem::ThetaForm {
                    theta_reduct,
                    theta_witness,
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                };
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: 0 },
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                    result: Term::tracked(next.clone()),
                    next,
                    phi_steps: Vec::new(),
                })
            }
            // a step inside the function reduct
            Some(Dir::ArgSide) => {
                let rest = Path::of(dirs[1..].to_vec());
                let step = make_step(f_reduct, &rest, kind, &base_rules)?;
                let mut f_witness = f_witness.clone();
                let f_reduct = step.target.clone();
                f_witness.push(step);
                let next = UpsilonElem::ThetaForm {
                    theta_reduct: theta_reduct.clone(),
                    theta_witness: theta_witness.clone(),
                    f_reduct: f_reduct.clone(),
                    f_witness: f_witness.clone(),
                };
                Ok(StepDecomposition {
                    shape: Unrolling::Spine { copies: 0 },
                    f_reduct,
                    f_witness,
                    result: Term::tracked(next.clone()),
                    next,
                    phi_steps: Vec::new(),
                })
            }
            Some(Dir::Body) => Err(no_redex()),
        },
    }
}
