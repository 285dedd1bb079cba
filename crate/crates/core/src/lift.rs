//! Transport of a plain normalization into the extended system `y -> F y`.
//!
//! Normalizing `l[y≔C F]` for a combinator application `C F` never
//! terminates in the combinator's own unfolding, so the combinator
//! occurrences are tracked: [`rho`] realizes a tracked term back to the
//! plain one, [`phi`] projects every tracked variable to the bare extension
//! variable, and [`gamma`] pushes one plain reduction step through both
//! views at once, emitting replacement steps in the extended system. The
//! top-level drivers assemble those pieces into checkable conversion
//! certificates ending in [`certify_least`].

use std::collections::BTreeSet;

use thiserror::Error;

use crate::check::{check_conversion, CheckFailure};
use crate::fixpoint::{initial_elem, upsilon_step, Family, FixpointError};
use crate::reduce::{
    is_reduced, join, lift_conversion, lift_steps, make_step, normalize, BaseRule, Conversion,
    JoinResult, NormalizeResult, RedexKind, ReduceError, RuleSet, Step,
};
use crate::term::{
    fresh_from, fresh_name, Dir, Path, Term, TermError, TrackedVar, VarKind, VarName,
};

#[derive(Debug, Error)]
pub enum LiftError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Fixpoint(#[from] FixpointError),
    #[error("rule set has no extension variable")]
    MissingExtension,
    #[error("state does not realize the step's source")]
    StateMismatch,
    #[error("transported result does not realize the step's target")]
    TransportMismatch,
    #[error("projected chain does not track the projection of the result")]
    ShadowMismatch,
    #[error("extension steps cannot appear in a plain normalization")]
    UnexpectedExtensionStep,
    #[error("term shape not supported at this position")]
    UnsupportedShape,
    #[error("extension variable {var} occurs free in the function")]
    ExtensionVarInFunction { var: VarName },
    #[error("extension variable {var} is bound in the context")]
    ExtensionVarBound { var: VarName },
    #[error("extension variable {var} occurs free in the candidate")]
    ExtensionVarInCandidate { var: VarName },
    #[error("input must not contain tracked variables")]
    TrackedInput,
    #[error("tracked variables survived normalization")]
    ResidualTracked,
    #[error("witness must finish at the candidate fixed point")]
    WitnessEndpoints,
    #[error("normalization ran out of fuel after {steps} steps")]
    FuelExhausted { steps: usize },
    #[error("lifted conversion failed its self-check: {0}")]
    SelfCheck(CheckFailure),
}

// ===========================================================================
// Realization and projection
// ===========================================================================

fn replace_tracked<F>(t: &Term, avoid: &BTreeSet<VarName>, repl: &F) -> Term
where
    F: Fn(&TrackedVar) -> Term,
{
    match t {
        Term::Var(VarKind::Tracked(tv)) => repl(tv),
        Term::Var(VarKind::Named(_)) => t.clone(),
        Term::App(f, a) => Term::app(
            replace_tracked(f, avoid, repl),
            replace_tracked(a, avoid, repl),
        ),
        Term::Lam(v, b) => {
            if b.contains_tracked() && avoid.contains(v) {
                let mut local = b.named_free_vars();
                local.extend(avoid.iter().cloned());
                local.insert(v.clone());
                let v2 = fresh_from(v.as_str(), &local);
                let b2 = b.substitute(v, &Term::var(v2.clone()));
                Term::lam(v2, replace_tracked(&b2, avoid, repl))
            } else {
                Term::lam(v.clone(), replace_tracked(b, avoid, repl))
            }
        }
    }
}

/// Replace every tracked variable by the realization of its descriptor,
/// renaming binders that would capture a realization's free names.
pub fn rho(term: &Term) -> Term {
    let mut avoid = BTreeSet::new();
    for tv in term.tracked_vars() {
        avoid.extend(tv.realization().named_free_vars());
    }
    replace_tracked(term, &avoid, &|tv: &TrackedVar| tv.realization().clone())
}

/// Replace every tracked variable by the extension variable `y`, renaming
/// binders named `y` that sit above a tracked occurrence.
pub fn phi(term: &Term, y: &VarName) -> Term {
    let avoid: BTreeSet<VarName> = [y.clone()].into();
    replace_tracked(term, &avoid, &|_| Term::var(y.clone()))
}

// ===========================================================================
// Step transport
// ===========================================================================

/// A tracked term together with its projection into the extended system and
/// the extended-system steps accumulated so far.
#[derive(Clone, Debug)]
pub struct LiftState {
    pub tracked: Term,
    pub shadow: Term,
    pub phi_steps: Vec<Step>,
}

impl LiftState {
    pub fn new(tracked: Term, y: &VarName) -> LiftState {
        let shadow = phi(&tracked, y);
        LiftState {
            tracked,
            shadow,
            phi_steps: Vec::new(),
        }
    }
}

fn gamma_root(
    m: &Term,
    kind: RedexKind,
    y: &VarName,
    rules: &RuleSet,
) -> Result<(Term, Vec<Step>), LiftError> {
    match kind {
        RedexKind::Beta => {
            let Term::App(f, a) = m else {
                return Err(LiftError::UnsupportedShape);
            };
            let Term::Lam(u, b) = &**f else {
                return Err(LiftError::UnsupportedShape);
            };
            let result = b.substitute(u, a);
            let step = make_step(&phi(m, y), &Path::root(), RedexKind::Beta, rules)?;
            Ok((result, vec![step]))
        }
        RedexKind::Eta => {
            let Term::Lam(v, b) = m else {
                return Err(LiftError::UnsupportedShape);
            };
            let Term::App(inner, arg) = &**b else {
                return Err(LiftError::UnsupportedShape);
            };
            let Term::Var(VarKind::Named(u)) = &**arg else {
                return Err(LiftError::UnsupportedShape);
            };
            if u != v || inner.has_free(v) {
                return Err(LiftError::UnsupportedShape);
            }
            let step = make_step(&phi(m, y), &Path::root(), RedexKind::Eta, rules)?;
            Ok(((**inner).clone(), vec![step]))
        }
        RedexKind::FixVar => Err(LiftError::UnexpectedExtensionStep),
    }
}

fn gamma_rec(
    m: &Term,
    dirs: &[Dir],
    kind: RedexKind,
    y: &VarName,
    rules: &RuleSet,
) -> Result<(Term, Vec<Step>), LiftError> {
    if let Term::Var(VarKind::Tracked(tv)) = m {
        let d = upsilon_step(tv.elem(), &Path::of(dirs.to_vec()), kind, rules)?;
        return Ok((d.result, d.phi_steps));
    }
    let Some((dir, rest)) = dirs.split_first() else {
        return gamma_root(m, kind, y, rules);
    };
    match (m, dir) {
        (Term::App(f, a), Dir::FunSide) => {
            let (f2, inner) = gamma_rec(f, rest, kind, y, rules)?;
            let lifted = lift_steps(&phi(m, y), &Path::of(vec![Dir::FunSide]), &inner, rules)?;
            Ok((Term::app(f2, (**a).clone()), lifted))
        }
        (Term::App(f, a), Dir::ArgSide) => {
            let (a2, inner) = gamma_rec(a, rest, kind, y, rules)?;
            let lifted = lift_steps(&phi(m, y), &Path::of(vec![Dir::ArgSide]), &inner, rules)?;
            Ok((Term::app((**f).clone(), a2), lifted))
        }
        (Term::Lam(v, b), Dir::Body) => {
            // keep the extension variable out of binder position so the
            // projection below the binder matches the projection of the body
            let (binder, body) = if v == y {
                let mut local = b.named_free_vars();
                local.insert(y.clone());
                let v2 = fresh_from(v.as_str(), &local);
                let b2 = b.substitute(v, &Term::var(v2.clone()));
                (v2, b2)
            } else {
                (v.clone(), (**b).clone())
            };
            let aligned = Term::lam(binder.clone(), body.clone());
            let (b2, inner) = gamma_rec(&body, rest, kind, y, rules)?;
            let lifted = lift_steps(&phi(&aligned, y), &Path::of(vec![Dir::Body]), &inner, rules)?;
            Ok((Term::lam(binder, b2), lifted))
        }
        _ => Err(LiftError::UnsupportedShape),
    }
}

/// Push one plain reduction step (taken on the realization of
/// `state.tracked`) through the tracked term, extending the projected chain
/// in the extended system accordingly.
pub fn gamma(state: LiftState, step: &Step, rules: &RuleSet) -> Result<LiftState, LiftError> {
    let ext = rules.fix_var().ok_or(LiftError::MissingExtension)?;
    if step.kind == RedexKind::FixVar {
        return Err(LiftError::UnexpectedExtensionStep);
    }
    if rho(&state.tracked) != step.source {
        return Err(LiftError::StateMismatch);
    }
    let (tracked, new_phi) = gamma_rec(
        &state.tracked,
        step.path.dirs(),
        step.kind,
        ext.var(),
        rules,
    )?;
    if rho(&tracked) != step.target {
        return Err(LiftError::TransportMismatch);
    }
    let LiftState {
        mut shadow,
        mut phi_steps,
        ..
    } = state;
    for s in new_phi {
        if s.source != shadow {
            return Err(LiftError::ShadowMismatch);
        }
        shadow = s.target.clone();
        phi_steps.push(s);
    }
    if phi(&tracked, ext.var()) != shadow {
        return Err(LiftError::ShadowMismatch);
    }
    Ok(LiftState {
        tracked,
        shadow,
        phi_steps,
    })
}

// ===========================================================================
// Drivers
// ===========================================================================

/// Result of lifting a normalization into the extended system.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub start: Term,
    pub normal_form: Term,
    /// `start` to `normal_form` in the extended system.
    pub steps: Vec<Step>,
    /// The driving plain normalization of `start[y≔C F]`.
    pub base_steps: Vec<Step>,
}

fn binds_var(t: &Term, y: &VarName) -> bool {
    match t {
        Term::Var(_) => false,
        Term::App(f, a) => binds_var(f, y) || binds_var(a, y),
        Term::Lam(v, b) => v == y || binds_var(b, y),
    }
}

/// Normalize `l[y≔C F]` (for the family's combinator `C`) under the base
/// rules and transport the whole reduction onto `l` in the system extended
/// with `y -> F y`. The result is a checkable reduction from `l` to the
/// normal form in which every combinator unfolding has been replaced by
/// extension-variable unfoldings.
pub fn lift_normalization(
    f: &Term,
    family: Family,
    l: &Term,
    y: &VarName,
    base: BaseRule,
    fuel: u64,
) -> Result<Lifted, LiftError> {
    if f.contains_tracked() || l.contains_tracked() {
        return Err(LiftError::TrackedInput);
    }
    if f.has_free(y) {
        return Err(LiftError::ExtensionVarInFunction { var: y.clone() });
    }
    if binds_var(l, y) {
        return Err(LiftError::ExtensionVarBound { var: y.clone() });
    }
    let rules = RuleSet::with_fix_var(base, y.clone(), f.clone())?;
    let m0 = l.substitute(y, &Term::tracked(initial_elem(family, f)));
    let n0 = rho(&m0);
    let driven = match normalize(&n0, &rules.without_fix(), fuel) {
        NormalizeResult::Normalized { steps, .. } => steps,
        NormalizeResult::FuelExhausted { steps, .. } => {
            return Err(LiftError::FuelExhausted { steps: steps.len() })
        }
    };
    let mut state = LiftState::new(m0, y);
    for step in &driven {
        state = gamma(state, step, &rules)?;
    }
    if state.tracked.contains_tracked() {
        return Err(LiftError::ResidualTracked);
    }
    let conv = Conversion::from_forward_steps(l.clone(), state.phi_steps.clone())?;
    check_conversion(&conv, &rules).map_err(LiftError::SelfCheck)?;
    if *conv.finish() != state.tracked {
        return Err(LiftError::ShadowMismatch);
    }
    Ok(Lifted {
        start: l.clone(),
        normal_form: state.tracked,
        steps: state.phi_steps,
        base_steps: driven,
    })
}

/// A conversion from `F M` to `M` obtained by joining both sides on their
/// common normal form.
pub fn find_fixpoint_witness(
    f: &Term,
    m: &Term,
    base: BaseRule,
    fuel: u64,
) -> Result<Conversion, CertifyFailure> {
    let rules = RuleSet::new(base);
    let fm = Term::app(f.clone(), m.clone());
    match join(&fm, m, &rules, fuel) {
        JoinResult::Joined {
            left_steps,
            right_steps,
            ..
        } => {
            let mut conv =
                Conversion::from_forward_steps(fm, left_steps).map_err(LiftError::from)?;
            for s in right_steps.iter().rev() {
                conv.push_backward(s.clone()).map_err(LiftError::from)?;
            }
            Ok(conv)
        }
        JoinResult::Separated {
            left_normal,
            right_normal,
        } => Err(CertifyFailure::NotAFixpoint {
            applied_normal: left_normal,
            candidate_normal: right_normal,
        }),
        JoinResult::Inconclusive { .. } => Err(CertifyFailure::FixpointInconclusive),
    }
}

/// Replay an extended-system reduction of `l` as a base-rule conversion on
/// `l[y≔m]`: plain steps are re-contracted in place, and each unfolding
/// `y -> F y` is replaced by the reversed fixed-point witness `m = F m`
/// lifted to the unfolding's position.
pub fn substitute_fixed_point(
    l: &Term,
    steps: &[Step],
    y: &VarName,
    m: &Term,
    witness: &Conversion,
    base: BaseRule,
) -> Result<Conversion, LiftError> {
    if m.has_free(y) {
        return Err(LiftError::ExtensionVarInCandidate { var: y.clone() });
    }
    if *witness.finish() != *m {
        return Err(LiftError::WitnessEndpoints);
    }
    let rules = RuleSet::new(base);
    let rev = witness.reversed();
    let mut conv = Conversion::empty(l.substitute(y, m));
    for s in steps {
        let here = conv.finish().clone();
        match s.kind {
            RedexKind::FixVar => {
                let lifted = lift_conversion(&here, &s.path, &rev, &rules)?;
                conv = conv.concat(lifted)?;
            }
            kind => {
                let step = make_step(&here, &s.path, kind, &rules)?;
                conv.push_forward(step)?;
            }
        }
    }
    Ok(conv)
}

// ===========================================================================
// Certificates
// ===========================================================================

#[derive(Debug, Error)]
pub enum CertifyFailure {
    #[error("candidate is not a fixed point: sides normalize to {applied_normal} and {candidate_normal}")]
    NotAFixpoint {
        applied_normal: Term,
        candidate_normal: Term,
    },
    #[error("fixed-point check ran out of fuel")]
    FixpointInconclusive,
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("certificate failed verification: {0}")]
    Invalid(#[from] CheckFailure),
    #[error("inputs must not contain tracked variables")]
    TrackedInput,
    #[error("certificate is inconsistent: {0}")]
    Endpoints(&'static str),
}

/// Everything needed to confirm, by independent rechecking, that the normal
/// form of the combinator application on the probe is reachable from any
/// given fixed point applied to the same probe.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastFixpointCertificate {
    pub function: Term,
    pub fixed_point: Term,
    pub probe: Term,
    pub family: Family,
    pub rule_base: BaseRule,
    /// `F M = M` as a joinability conversion.
    pub fixpoint_witness: Conversion,
    /// Normal form of the combinator application on the probe.
    pub normal_form: Term,
    /// `M probe = normal_form` under the base rules alone.
    pub main_conversion: Conversion,
}

impl LeastFixpointCertificate {
    /// Recheck the certificate from scratch: endpoint identities, the
    /// normality of the claimed normal form, and every step of both
    /// conversions via the independent checker.
    pub fn verify(&self) -> Result<(), CertifyFailure> {
        let rules = RuleSet::new(self.rule_base);
        if self.normal_form.contains_tracked()
            || self.function.contains_tracked()
            || self.fixed_point.contains_tracked()
            || self.probe.contains_tracked()
        {
            return Err(CertifyFailure::TrackedInput);
        }
        let fm = Term::app(self.function.clone(), self.fixed_point.clone());
        if *self.fixpoint_witness.start() != fm {
            return Err(CertifyFailure::Endpoints(
                "fixed-point witness must start at the function applied to the candidate",
            ));
        }
        if *self.fixpoint_witness.finish() != self.fixed_point {
            return Err(CertifyFailure::Endpoints(
                "fixed-point witness must finish at the candidate",
            ));
        }
        let mn = Term::app(self.fixed_point.clone(), self.probe.clone());
        if *self.main_conversion.start() != mn {
            return Err(CertifyFailure::Endpoints(
                "main conversion must start at the candidate applied to the probe",
            ));
        }
        if *self.main_conversion.finish() != self.normal_form {
            return Err(CertifyFailure::Endpoints(
                "main conversion must finish at the normal form",
            ));
        }
        if !is_reduced(&self.normal_form, &rules) {
            return Err(CertifyFailure::Endpoints(
                "declared normal form is reducible",
            ));
        }
        check_conversion(&self.fixpoint_witness, &rules)?;
        check_conversion(&self.main_conversion, &rules)?;
        Ok(())
    }
}

/// Certify that the normal form of the family's combinator applied to
/// `function` and then to `probe` is reachable, by base-rule conversion,
/// from `fixed_point probe`: the combinator's fixed point sits below every
/// fixed point of `function` in the normal-form order.
pub fn certify_least(
    function: &Term,
    fixed_point: &Term,
    probe: &Term,
    family: Family,
    base: BaseRule,
    fuel: u64,
) -> Result<LeastFixpointCertificate, CertifyFailure> {
    if function.contains_tracked() || fixed_point.contains_tracked() || probe.contains_tracked() {
        return Err(CertifyFailure::TrackedInput);
    }
    let witness = find_fixpoint_witness(function, fixed_point, base, fuel)?;
    let mut avoid = function.all_names();
    avoid.extend(fixed_point.all_names());
    avoid.extend(probe.all_names());
    let y = fresh_name(&avoid);
    let l = Term::app(Term::var(y.clone()), probe.clone());
    let lifted = lift_normalization(function, family, &l, &y, base, fuel)?;
    let main = substitute_fixed_point(&l, &lifted.steps, &y, fixed_point, &witness, base)?;
    let cert = LeastFixpointCertificate {
        function: function.clone(),
        fixed_point: fixed_point.clone(),
        probe: probe.clone(),
        family,
        rule_base: base,
        fixpoint_witness: witness,
        normal_form: lifted.normal_form,
        main_conversion: main,
    };
    cert.verify()?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{realize, theta, y_combinator, UpsilonElem};

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn const_fn() -> Term {
        Term::lam("f", Term::lam("x", v("x")))
    }

    #[test]
    fn rho_realizes_and_renames() {
        let f = Term::lam("q", v("a"));
        let e = initial_elem(Family::Y, &f);
        let tracked = Term::tracked(e.clone());
        assert_eq!(rho(&tracked), realize(&e));
        // binder that would capture the realization's free name is renamed
        let t = Term::lam("a", Term::app(v("a"), Term::tracked(e.clone())));
        let r = rho(&t);
        match &r {
            Term::Lam(b, body) => {
                assert_ne!(b.as_str(), "a");
                assert!(body.has_free(&"a".into()));
            }
            other => panic!("expected lambda, got {other:?}"),
        }
        assert_eq!(r, Term::lam("c", Term::app(v("c"), realize(&e))));
    }

    #[test]
    fn phi_projects_tracked_variables() {
        let e = initial_elem(Family::Y, &const_fn());
        let t = Term::app(Term::tracked(e.clone()), Term::lam("y", Term::tracked(e)));
        let p = phi(&t, &"y".into());
        // the outer occurrence becomes y; the bound binder is renamed so
        // the inner occurrence stays free
        assert_eq!(p, Term::app(v("y"), Term::lam("w", v("y"))));
    }

    #[test]
    fn lift_normalization_y_on_probe() {
        let f = const_fn();
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("n"));
        let lifted = lift_normalization(&f, Family::Y, &l, &y, BaseRule::Beta, 1000).unwrap();
        assert_eq!(lifted.normal_form, v("n"));
        assert_eq!(lifted.start, l);
        // the chain is y n -> (F y) n -> (λx.x) n -> n
        assert_eq!(lifted.steps.len(), 3);
        assert_eq!(lifted.steps[0].kind, RedexKind::FixVar);
        assert_eq!(lifted.base_steps.len(), 4);
        // base normalization starts at the plain combinator application
        assert_eq!(
            lifted.base_steps[0].source,
            Term::app(Term::app(y_combinator(), f.clone()), v("n"))
        );
    }

    #[test]
    fn lift_normalization_theta_on_probe() {
        let f = const_fn();
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("n"));
        let lifted = lift_normalization(&f, Family::Theta, &l, &y, BaseRule::Beta, 1000).unwrap();
        assert_eq!(lifted.normal_form, v("n"));
        assert_eq!(
            lifted.base_steps[0].source,
            Term::app(Term::app(theta(), f.clone()), v("n"))
        );
        assert!(lifted.steps.iter().any(|s| s.kind == RedexKind::FixVar));
    }

    #[test]
    fn lift_normalization_validates_inputs() {
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("n"));
        let err = lift_normalization(&v("y"), Family::Y, &l, &y, BaseRule::Beta, 100);
        assert!(matches!(err, Err(LiftError::ExtensionVarInFunction { .. })));
        let bound = Term::lam("y", v("y"));
        let err = lift_normalization(&const_fn(), Family::Y, &bound, &y, BaseRule::Beta, 100);
        assert!(matches!(err, Err(LiftError::ExtensionVarBound { .. })));
        let err = lift_normalization(
            &Term::lam("f", Term::app(v("f"), v("f"))),
            Family::Y,
            &l,
            &y,
            BaseRule::Beta,
            20,
        );
        assert!(matches!(err, Err(LiftError::FuelExhausted { .. })));
    }

    #[test]
    fn fixpoint_witness_round_trip() {
        let f = const_fn();
        let m = Term::lam("x", v("x"));
        let w = find_fixpoint_witness(&f, &m, BaseRule::Beta, 100).unwrap();
        assert_eq!(*w.start(), Term::app(f, m.clone()));
        assert_eq!(*w.finish(), m);
        check_conversion(&w, &RuleSet::new(BaseRule::Beta)).unwrap();

        let not_fp = Term::lam("x", Term::app(v("x"), v("x")));
        assert!(matches!(
            find_fixpoint_witness(&const_fn(), &not_fp, BaseRule::Beta, 100),
            Err(CertifyFailure::NotAFixpoint { .. })
        ));
    }

    #[test]
    fn certify_least_y_constant_function() {
        let f = const_fn();
        let m = Term::lam("x", v("x"));
        let cert = certify_least(&f, &m, &v("w"), Family::Y, BaseRule::Beta, 1000).unwrap();
        cert.verify().unwrap();
        assert_eq!(cert.normal_form, v("w"));
        assert_eq!(*cert.main_conversion.start(), Term::app(m, v("w")));
        assert_eq!(*cert.main_conversion.finish(), v("w"));
        // the replay contains the reversed witness where the unfolding was
        assert!(cert
            .main_conversion
            .steps()
            .iter()
            .any(|(dir, _)| *dir == crate::reduce::StepDir::Backward));
    }

    #[test]
    fn certify_least_theta_matches_y() {
        let f = const_fn();
        let m = Term::lam("x", v("x"));
        let y_cert = certify_least(&f, &m, &v("w"), Family::Y, BaseRule::Beta, 1000).unwrap();
        let t_cert = certify_least(&f, &m, &v("w"), Family::Theta, BaseRule::Beta, 1000).unwrap();
        assert_eq!(y_cert.normal_form, t_cert.normal_form);
    }

    #[test]
    fn certify_least_eta_collapsing_function() {
        // F ignores its argument and returns an eta-expanded applier, so
        // the identity is a fixed point up to beta-eta conversion
        let f = Term::lam(
            "g",
            Term::lam("x", Term::lam("z", Term::app(v("x"), v("z")))),
        );
        let m = Term::lam("x", v("x"));
        let cert = certify_least(&f, &m, &v("w"), Family::Y, BaseRule::BetaEta, 2000).unwrap();
        assert_eq!(cert.normal_form, v("w"));
        assert!(cert
            .main_conversion
            .steps()
            .iter()
            .any(|(_, s)| s.kind == RedexKind::Eta));
    }

    #[test]
    fn certify_rejects_non_fixed_points() {
        let err = certify_least(
            &const_fn(),
            &Term::lam("x", Term::app(v("x"), v("x"))),
            &v("w"),
            Family::Y,
            BaseRule::Beta,
            500,
        );
        assert!(matches!(err, Err(CertifyFailure::NotAFixpoint { .. })));
    }

    #[test]
    fn substitute_fixed_point_replays_unfoldings() {
        let f = const_fn();
        let m = Term::lam("x", v("x"));
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("w"));
        let lifted = lift_normalization(&f, Family::Y, &l, &y, BaseRule::Beta, 1000).unwrap();
        let witness = find_fixpoint_witness(&f, &m, BaseRule::Beta, 100).unwrap();
        let conv =
            substitute_fixed_point(&l, &lifted.steps, &y, &m, &witness, BaseRule::Beta).unwrap();
        assert_eq!(*conv.start(), Term::app(m, v("w")));
        assert_eq!(*conv.finish(), v("w"));
        check_conversion(&conv, &RuleSet::new(BaseRule::Beta)).unwrap();
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let f = const_fn();
        let m = Term::lam("x", v("x"));
        let mut cert = certify_least(&f, &m, &v("w"), Family::Y, BaseRule::Beta, 1000).unwrap();
        cert.normal_form = v("q");
        assert!(cert.verify().is_err());
    }

    #[test]
    fn gamma_rejects_mismatched_state() {
        let f = const_fn();
        let rules = RuleSet::with_fix_var(BaseRule::Beta, "y".into(), f.clone()).unwrap();
        let e = initial_elem(Family::Y, &f);
        let state = LiftState::new(Term::tracked(e), &"y".into());
        let bogus = Step {
            source: v("a"),
            path: Path::root(),
            kind: RedexKind::Beta,
            target: v("a"),
        };
        assert!(matches!(
            gamma(state, &bogus, &rules),
            Err(LiftError::StateMismatch)
        ));
    }

    #[test]
    fn divergent_unfolding_exhausts_fuel() {
        // the eta-expander regenerates itself under beta alone
        let f = Term::lam("f", Term::lam("x", Term::app(v("f"), v("x"))));
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("n"));
        let err = lift_normalization(&f, Family::Y, &l, &y, BaseRule::Beta, 60);
        assert!(matches!(err, Err(LiftError::FuelExhausted { .. })));
        let _ = UpsilonElem::YnForm {
            n: 0,
            f_reduct: f,
            f_witness: Vec::new(),
        };
    }

    #[test]
    fn eta_steps_survive_lifting() {
        let f = Term::lam(
            "g",
            Term::lam("x", Term::lam("z", Term::app(v("x"), v("z")))),
        );
        let y: VarName = "y".into();
        let l = Term::app(v("y"), v("n"));
        let lifted = lift_normalization(&f, Family::Y, &l, &y, BaseRule::BetaEta, 1000).unwrap();
        assert_eq!(lifted.normal_form, v("n"));
        assert!(lifted.steps.iter().any(|s| s.kind == RedexKind::Eta));
        assert!(lifted.steps.iter().any(|s| s.kind == RedexKind::FixVar));
    }
}
