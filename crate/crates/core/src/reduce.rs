//! Reduction machinery: rule sets, redex enumeration in leftmost-outermost
//! order, single steps, fuel-bounded normalization, joinability, and
//! two-directional conversion sequences assembled from checkable steps.

use std::fmt;

use thiserror::Error;

use crate::term::{Dir, Path, Term, TermError, VarKind, VarName};

#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("no {kind} redex at {path}")]
    NotARedex { path: Path, kind: RedexKind },
    #[error("{kind} steps are not part of the active rule set")]
    RuleNotEnabled { kind: RedexKind },
    #[error("extension variable {var} occurs free in the extension term")]
    ExtensionVarInTerm { var: VarName },
    #[error("extension term must not contain tracked variables")]
    ExtensionTermTracked,
    #[error("conversion endpoints do not meet: have {have}, next step enters at {enter}")]
    EndpointMismatch { have: Term, enter: Term },
    #[error("lifted step acts on {found} where the context holds {expected}")]
    LiftMismatch { expected: Term, found: Term },
    #[error("cannot substitute for the extension variable {var}")]
    SubstitutesExtensionVar { var: VarName },
}

// ===========================================================================
// Rule sets
// ===========================================================================

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BaseRule {
    Beta,
    BetaEta,
}

impl BaseRule {
    pub fn allows_eta(self) -> bool {
        matches!(self, BaseRule::BetaEta)
    }

    pub fn token(self) -> &'static str {
        match self {
            BaseRule::Beta => "beta",
            BaseRule::BetaEta => "beta-eta",
        }
    }

    pub fn from_token(tok: &str) -> Option<BaseRule> {
        match tok {
            "beta" => Some(BaseRule::Beta),
            "beta-eta" => Some(BaseRule::BetaEta),
            _ => None,
        }
    }
}

impl fmt::Display for BaseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// The extra rule `y -> F y` for a designated free variable `y` and term
/// `F` with `y` not free in `F`. Only free occurrences of `y` are redexes.
#[derive(Clone, Debug)]
pub struct FixVarExt {
    var: VarName,
    term: Term,
}

impl FixVarExt {
    pub fn var(&self) -> &VarName {
        &self.var
    }

    pub fn term(&self) -> &Term {
        &self.term
    }
}

#[derive(Clone, Debug)]
pub struct RuleSet {
    base: BaseRule,
    fix: Option<FixVarExt>,
}

impl RuleSet {
    pub fn new(base: BaseRule) -> RuleSet {
        RuleSet { base, fix: None }
    }

    pub fn with_fix_var(base: BaseRule, var: VarName, term: Term) -> Result<RuleSet, ReduceError> {
        if term.has_free(&var) {
            return Err(ReduceError::ExtensionVarInTerm { var });
        }
        if term.contains_tracked() {
            return Err(ReduceError::ExtensionTermTracked);
        }
        Ok(RuleSet {
            base,
            fix: Some(FixVarExt { var, term }),
        })
    }

    pub fn base(&self) -> BaseRule {
        self.base
    }

    pub fn fix_var(&self) -> Option<&FixVarExt> {
        self.fix.as_ref()
    }

    pub fn without_fix(&self) -> RuleSet {
        RuleSet {
            base: self.base,
            fix: None,
        }
    }

    pub fn allows(&self, kind: RedexKind) -> bool {
        match kind {
            RedexKind::Beta => true,
            RedexKind::Eta => self.base.allows_eta(),
            RedexKind::FixVar => self.fix.is_some(),
        }
    }
}

// ===========================================================================
// Redexes and steps
// ===========================================================================

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RedexKind {
    Beta,
    Eta,
    FixVar,
}

impl RedexKind {
    pub fn token(self) -> &'static str {
        match self {
            RedexKind::Beta => "beta",
            RedexKind::Eta => "eta",
            RedexKind::FixVar => "fix-var",
        }
    }

    pub fn from_token(tok: &str) -> Option<RedexKind> {
        match tok {
            "beta" => Some(RedexKind::Beta),
            "eta" => Some(RedexKind::Eta),
            "fix-var" => Some(RedexKind::FixVar),
            _ => None,
        }
    }
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One contraction, recorded with enough context to be rechecked without
/// trusting the code that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub source: Term,
    pub path: Path,
    pub kind: RedexKind,
    pub target: Term,
}

fn redex_kind_here(t: &Term, rules: &RuleSet, bound: &[VarName]) -> Option<RedexKind> {
    match t {
        Term::App(f, _) if matches!(**f, Term::Lam(_, _)) => Some(RedexKind::Beta),
        Term::Lam(v, b) if rules.base().allows_eta() => match &**b {
            Term::App(m, a) => match &**a {
                Term::Var(VarKind::Named(u)) if u == v && !m.has_free(v) => Some(RedexKind::Eta),
                _ => None,
            },
            _ => None,
        },
        Term::Var(VarKind::Named(v)) => match rules.fix_var() {
            Some(ext) if ext.var() == v && !bound.contains(v) => Some(RedexKind::FixVar),
            _ => None,
        },
        _ => None,
    }
}

/// All redexes in leftmost-outermost (preorder, function before argument)
/// order.
pub fn enumerate_redexes(term: &Term, rules: &RuleSet) -> Vec<(Path, RedexKind)> {
    fn walk(
        t: &Term,
        rules: &RuleSet,
        here: &mut Vec<Dir>,
        bound: &mut Vec<VarName>,
        out: &mut Vec<(Path, RedexKind)>,
    ) {
        if let Some(kind) = redex_kind_here(t, rules, bound) {
            out.push((Path::of(here.clone()), kind));
        }
        match t {
            Term::Var(_) => {}
            Term::App(f, a) => {
                here.push(Dir::FunSide);
                walk(f, rules, here, bound, out);
                here.pop();
                here.push(Dir::ArgSide);
                walk(a, rules, here, bound, out);
                here.pop();
            }
            Term::Lam(v, b) => {
                here.push(Dir::Body);
                bound.push(v.clone());
                walk(b, rules, here, bound, out);
                bound.pop();
                here.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(term, rules, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// The leftmost-outermost redex, if any. Agrees with the head of
/// [`enumerate_redexes`].
pub fn first_redex(term: &Term, rules: &RuleSet) -> Option<(Path, RedexKind)> {
    fn walk(
        t: &Term,
        rules: &RuleSet,
        here: &mut Vec<Dir>,
        bound: &mut Vec<VarName>,
    ) -> Option<(Path, RedexKind)> {
        if let Some(kind) = redex_kind_here(t, rules, bound) {
            return Some((Path::of(here.clone()), kind));
        }
        match t {
            Term::Var(_) => None,
            Term::App(f, a) => {
                here.push(Dir::FunSide);
                let r = walk(f, rules, here, bound);
                here.pop();
                if r.is_some() {
                    return r;
                }
                here.push(Dir::ArgSide);
                let r = walk(a, rules, here, bound);
                here.pop();
                r
            }
            Term::Lam(v, b) => {
                here.push(Dir::Body);
                bound.push(v.clone());
                let r = walk(b, rules, here, bound);
                bound.pop();
                here.pop();
                r
            }
        }
    }
    walk(term, rules, &mut Vec::new(), &mut Vec::new())
}

pub fn is_reduced(term: &Term, rules: &RuleSet) -> bool {
    first_redex(term, rules).is_none()
}

/// Contract the redex of the given kind at `path`.
pub fn contract(
    term: &Term,
    path: &Path,
    kind: RedexKind,
    rules: &RuleSet,
) -> Result<Term, ReduceError> {
    if !rules.allows(kind) {
        return Err(ReduceError::RuleNotEnabled { kind });
    }
    let not_a_redex = || ReduceError::NotARedex {
        path: path.clone(),
        kind,
    };
    let sub = term.subterm_at(path)?;
    match kind {
        RedexKind::Beta => {
            let Term::App(f, a) = sub else {
                return Err(not_a_redex());
            };
            let Term::Lam(u, b) = &**f else {
                return Err(not_a_redex());
            };
            Ok(term.replace_at(path, b.substitute(u, a))?)
        }
        RedexKind::Eta => {
            let Term::Lam(v, b) = sub else {
                return Err(not_a_redex());
            };
            let Term::App(m, a) = &**b else {
                return Err(not_a_redex());
            };
            let Term::Var(VarKind::Named(u)) = &**a else {
                return Err(not_a_redex());
            };
            if u != v || m.has_free(v) {
                return Err(not_a_redex());
            }
            Ok(term.replace_at(path, (**m).clone())?)
        }
        RedexKind::FixVar => {
            let ext = rules.fix_var().expect("allows() checked the extension");
            let Term::Var(VarKind::Named(u)) = sub else {
                return Err(not_a_redex());
            };
            if u != ext.var() {
                return Err(not_a_redex());
            }
            // only free occurrences count: no binder of the same name above
            let mut cur = term;
            for d in path.dirs() {
                if let (Term::Lam(v, _), Dir::Body) = (cur, *d) {
                    if v == ext.var() {
                        return Err(not_a_redex());
                    }
                }
                cur = match (cur, d) {
                    (Term::App(f, _), Dir::FunSide) => f,
                    (Term::App(_, a), Dir::ArgSide) => a,
                    (Term::Lam(_, b), Dir::Body) => b,
                    _ => unreachable!("subterm_at validated the path"),
                };
            }
            let unfolded = Term::app(ext.term().clone(), Term::var(ext.var().clone()));
            Ok(term.graft(path, unfolded)?)
        }
    }
}

/// Contract and record the step.
pub fn make_step(
    term: &Term,
    path: &Path,
    kind: RedexKind,
    rules: &RuleSet,
) -> Result<Step, ReduceError> {
    let target = contract(term, path, kind, rules)?;
    Ok(Step {
        source: term.clone(),
        path: path.clone(),
        kind,
        target,
    })
}

// ===========================================================================
// Normalization and joins
// ===========================================================================

#[derive(Clone, Debug)]
pub enum NormalizeResult {
    Normalized { normal_form: Term, steps: Vec<Step> },
    FuelExhausted { partial: Term, steps: Vec<Step> },
}

impl NormalizeResult {
    pub fn term(&self) -> &Term {
        match self {
            NormalizeResult::Normalized { normal_form, .. } => normal_form,
            NormalizeResult::FuelExhausted { partial, .. } => partial,
        }
    }

    pub fn steps(&self) -> &[Step] {
        match self {
            NormalizeResult::Normalized { steps, .. } => steps,
            NormalizeResult::FuelExhausted { steps, .. } => steps,
        }
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self, NormalizeResult::Normalized { .. })
    }

    pub fn normal_form(&self) -> Option<&Term> {
        match self {
            NormalizeResult::Normalized { normal_form, .. } => Some(normal_form),
            NormalizeResult::FuelExhausted { .. } => None,
        }
    }

    pub fn into_steps(self) -> Vec<Step> {
        match self {
            NormalizeResult::Normalized { steps, .. } => steps,
            NormalizeResult::FuelExhausted { steps, .. } => steps,
        }
    }
}

/// Leftmost-outermost reduction until no redex remains or `fuel` steps have
/// been taken.
pub fn normalize(term: &Term, rules: &RuleSet, fuel: u64) -> NormalizeResult {
    let mut cur = term.clone();
    let mut steps = Vec::new();
    loop {
        let Some((path, kind)) = first_redex(&cur, rules) else {
            return NormalizeResult::Normalized {
                normal_form: cur,
                steps,
            };
        };
        if steps.len() as u64 >= fuel {
            return NormalizeResult::FuelExhausted {
                partial: cur,
                steps,
            };
        }
        let step = make_step(&cur, &path, kind, rules).expect("enumerated redex contracts");
        cur = step.target.clone();
        steps.push(step);
    }
}

#[derive(Clone, Debug)]
pub enum JoinResult {
    Joined {
        meet: Term,
        left_steps: Vec<Step>,
        right_steps: Vec<Step>,
    },
    Separated {
        left_normal: Term,
        right_normal: Term,
    },
    Inconclusive {
        left: NormalizeResult,
        right: NormalizeResult,
    },
}

/// Do the two terms reduce to a common normal form within the fuel bound?
pub fn join(left: &Term, right: &Term, rules: &RuleSet, fuel: u64) -> JoinResult {
    let l = normalize(left, rules, fuel);
    let r = normalize(right, rules, fuel);
    match (l, r) {
        (
            NormalizeResult::Normalized {
                normal_form: ln,
                steps: ls,
            },
            NormalizeResult::Normalized {
                normal_form: rn,
                steps: rs,
            },
        ) => {
            if ln == rn {
                JoinResult::Joined {
                    meet: ln,
                    left_steps: ls,
                    right_steps: rs,
                }
            } else {
                JoinResult::Separated {
                    left_normal: ln,
                    right_normal: rn,
                }
            }
        }
        (l, r) => JoinResult::Inconclusive { left: l, right: r },
    }
}

// ===========================================================================
// Conversions
// ===========================================================================

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepDir {
    Forward,
    Backward,
}

impl StepDir {
    pub fn token(self) -> &'static str {
        match self {
            StepDir::Forward => "forward",
            StepDir::Backward => "backward",
        }
    }

    pub fn from_token(tok: &str) -> Option<StepDir> {
        match tok {
            "forward" => Some(StepDir::Forward),
            "backward" => Some(StepDir::Backward),
            _ => None,
        }
    }
}

/// A zig-zag of reduction steps read left to right: a `Forward` step is
/// taken source to target, a `Backward` step target to source. Endpoints of
/// consecutive steps are required to agree up to alpha when the sequence is
/// built, so a `Conversion` always denotes a valid convertibility witness
/// provided each individual step checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Conversion {
    start: Term,
    finish: Term,
    steps: Vec<(StepDir, Step)>,
}

impl Conversion {
    pub fn empty(t: Term) -> Conversion {
        Conversion {
            start: t.clone(),
            finish: t,
            steps: Vec::new(),
        }
    }

    pub fn from_forward_steps(start: Term, steps: Vec<Step>) -> Result<Conversion, ReduceError> {
        let mut conv = Conversion::empty(start);
        for s in steps {
            conv.push(StepDir::Forward, s)?;
        }
        Ok(conv)
    }

    pub fn start(&self) -> &Term {
        &self.start
    }

    pub fn finish(&self) -> &Term {
        &self.finish
    }

    pub fn steps(&self) -> &[(StepDir, Step)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, dir: StepDir, step: Step) -> Result<(), ReduceError> {
        let (enter, exit) = match dir {
            StepDir::Forward => (&step.source, &step.target),
            StepDir::Backward => (&step.target, &step.source),
        };
        if *enter != self.finish {
            return Err(ReduceError::EndpointMismatch {
                have: self.finish.clone(),
                enter: enter.clone(),
            });
        }
        self.finish = exit.clone();
        self.steps.push((dir, step));
        Ok(())
    }

    pub fn push_forward(&mut self, step: Step) -> Result<(), ReduceError> {
        self.push(StepDir::Forward, step)
    }

    pub fn push_backward(&mut self, step: Step) -> Result<(), ReduceError> {
        self.push(StepDir::Backward, step)
    }

    pub fn concat(mut self, other: Conversion) -> Result<Conversion, ReduceError> {
        if other.start != self.finish {
            return Err(ReduceError::EndpointMismatch {
                have: self.finish,
                enter: other.start,
            });
        }
        self.steps.extend(other.steps);
        self.finish = other.finish;
        Ok(self)
    }

    pub fn reversed(&self) -> Conversion {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|(dir, s)| {
                let flipped = match dir {
                    StepDir::Forward => StepDir::Backward,
                    StepDir::Backward => StepDir::Forward,
                };
                (flipped, s.clone())
            })
            .collect();
        Conversion {
            start: self.finish.clone(),
            finish: self.start.clone(),
            steps,
        }
    }
}

// ===========================================================================
// Lifting steps into contexts
// ===========================================================================

/// Replay steps on the subterm of `ctx` at `at` as steps on the whole term.
/// Each step is re-contracted in context, so the results remain valid even
/// when surrounding binders force fresh names.
pub fn lift_steps(
    ctx: &Term,
    at: &Path,
    steps: &[Step],
    rules: &RuleSet,
) -> Result<Vec<Step>, ReduceError> {
    let mut cur = ctx.clone();
    let mut out = Vec::new();
    for s in steps {
        let inner = cur.subterm_at(at)?;
        if *inner != s.source {
            return Err(ReduceError::LiftMismatch {
                expected: s.source.clone(),
                found: inner.clone(),
            });
        }
        let lifted = make_step(&cur, &at.joined(&s.path), s.kind, rules)?;
        cur = lifted.target.clone();
        out.push(lifted);
    }
    Ok(out)
}

/// Replay a whole conversion inside a context. Backward edges graft the
/// step's source into the hole, renaming context binders that would capture
/// it, then recheck that contracting returns to the current term.
pub fn lift_conversion(
    ctx: &Term,
    at: &Path,
    conv: &Conversion,
    rules: &RuleSet,
) -> Result<Conversion, ReduceError> {
    let inner = ctx.subterm_at(at)?;
    if *inner != *conv.start() {
        return Err(ReduceError::LiftMismatch {
            expected: conv.start().clone(),
            found: inner.clone(),
        });
    }
    let mut out = Conversion::empty(ctx.clone());
    let mut cur = ctx.clone();
    for (dir, s) in conv.steps() {
        match dir {
            StepDir::Forward => {
                let lifted = make_step(&cur, &at.joined(&s.path), s.kind, rules)?;
                cur = lifted.target.clone();
                out.push(StepDir::Forward, lifted)?;
            }
            StepDir::Backward => {
                let prev = cur.graft(at, s.source.clone())?;
                let lifted = make_step(&prev, &at.joined(&s.path), s.kind, rules)?;
                out.push(StepDir::Backward, lifted)?;
                cur = prev;
            }
        }
    }
    Ok(out)
}

/// Substitute a term for a free named variable throughout a conversion.
/// Every step is re-contracted at its original path, which stays valid
/// because substitution preserves the spine above each redex. Substituting
/// for the extension variable itself is rejected: that could create or
/// destroy extension redexes.
pub fn subst_conversion(
    conv: &Conversion,
    v: &VarName,
    n: &Term,
    rules: &RuleSet,
) -> Result<Conversion, ReduceError> {
    if let Some(ext) = rules.fix_var() {
        if ext.var() == v {
            return Err(ReduceError::SubstitutesExtensionVar { var: v.clone() });
        }
    }
    let mut out = Conversion::empty(conv.start().substitute(v, n));
    for (dir, s) in conv.steps() {
        let src = s.source.substitute(v, n);
        let step = make_step(&src, &s.path, s.kind, rules)?;
        out.push(*dir, step)?;
    }
    let want = conv.finish().substitute(v, n);
    if *out.finish() != want {
        return Err(ReduceError::EndpointMismatch {
            have: out.finish().clone(),
            enter: want,
        });
    }
    Ok(out)
}
