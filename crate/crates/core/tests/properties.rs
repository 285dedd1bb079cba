use lfp_core::{
    alpha_eq, check_step, enumerate_redexes, first_redex, is_reduced, make_step, normalize, parse,
    print, BaseRule, Dir, NormalizeResult, Path, RedexKind, RuleSet, Term, VarName,
};
use proptest::prelude::*;

const POOL: [&str; 6] = ["a", "b", "c", "x", "y", "z"];

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = (0..POOL.len()).prop_map(|i| Term::var(POOL[i]));
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            ((0..POOL.len()), inner).prop_map(|(i, b)| Term::lam(POOL[i], b)),
        ]
    })
}

fn arb_rules() -> impl Strategy<Value = RuleSet> {
    let base = prop_oneof![Just(BaseRule::Beta), Just(BaseRule::BetaEta)];
    (base, proptest::option::of(0..POOL.len() - 1)).prop_map(|(base, fix)| match fix {
        // extension terms from a fixed closed pool so y is never free in F
        Some(i) => {
            let f = match i {
                0 => Term::lam("u", Term::var("u")),
                1 => Term::lam("f", Term::lam("x", Term::var("x"))),
                2 => Term::lam("u", Term::app(Term::var("u"), Term::var("u"))),
                3 => Term::lam(
                    "f",
                    Term::lam("x", Term::app(Term::var("f"), Term::var("x"))),
                ),
                _ => Term::lam("u", Term::lam("v", Term::var("u"))),
            };
            RuleSet::with_fix_var(base, "y".into(), f).unwrap()
        }
        None => RuleSet::new(base),
    })
}

// redex definitions restated from scratch: a beta redex is an applied
// abstraction, an eta redex is λv.M v with v not free in M, an extension
// redex is a free occurrence of the extension variable
fn oracle_here(t: &Term, bound: &[VarName], rules: &RuleSet) -> Option<RedexKind> {
    match t {
        Term::App(f, _) => match **f {
            Term::Lam(_, _) => Some(RedexKind::Beta),
            _ => None,
        },
        Term::Lam(v, b) => {
            if !rules.base().allows_eta() {
                return None;
            }
            let Term::App(m, arg) = &**b else {
                return None;
            };
            let is_v = matches!(&**arg, Term::Var(k) if *k == lfp_core::VarKind::Named(v.clone()));
            if is_v && !m.named_free_vars().contains(v) && !m.has_free(v) {
                Some(RedexKind::Eta)
            } else {
                None
            }
        }
        Term::Var(lfp_core::VarKind::Named(n)) => {
            let ext = rules.fix_var()?;
            if n == ext.var() && !bound.contains(n) {
                Some(RedexKind::FixVar)
            } else {
                None
            }
        }
        Term::Var(_) => None,
    }
}

fn oracle_walk(
    t: &Term,
    path: &mut Vec<Dir>,
    bound: &mut Vec<VarName>,
    rules: &RuleSet,
    out: &mut Vec<(Path, RedexKind)>,
) {
    if let Some(kind) = oracle_here(t, bound, rules) {
        out.push((Path::of(path.clone()), kind));
    }
    match t {
        Term::Var(_) => {}
        Term::App(f, a) => {
            path.push(Dir::FunSide);
            oracle_walk(f, path, bound, rules, out);
            path.pop();
            path.push(Dir::ArgSide);
            oracle_walk(a, path, bound, rules, out);
            path.pop();
        }
        Term::Lam(v, b) => {
            path.push(Dir::Body);
            bound.push(v.clone());
            oracle_walk(b, path, bound, rules, out);
            bound.pop();
            path.pop();
        }
    }
}

fn oracle_redexes(t: &Term, rules: &RuleSet) -> Vec<(Path, RedexKind)> {
    let mut out = Vec::new();
    oracle_walk(t, &mut Vec::new(), &mut Vec::new(), rules, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn print_parse_round_trip(t in arb_term()) {
        let s = print(&t);
        let back = parse(&s).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn enumeration_matches_oracle(t in arb_term(), rules in arb_rules()) {
        let got = enumerate_redexes(&t, &rules);
        let want = oracle_redexes(&t, &rules);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn first_redex_is_head_of_enumeration(t in arb_term(), rules in arb_rules()) {
        prop_assert_eq!(
            first_redex(&t, &rules),
            enumerate_redexes(&t, &rules).into_iter().next()
        );
    }

    #[test]
    fn checker_accepts_every_engine_step(t in arb_term(), rules in arb_rules()) {
        for (path, kind) in enumerate_redexes(&t, &rules) {
            let step = make_step(&t, &path, kind, &rules).unwrap();
            check_step(&step, &rules).unwrap();
            prop_assert_eq!(&step.source, &t);
        }
    }

    #[test]
    fn subterm_replace_identity(t in arb_term(), rules in arb_rules()) {
        for (path, _) in enumerate_redexes(&t, &rules) {
            let sub = t.subterm_at(&path).unwrap().clone();
            let back = t.replace_at(&path, sub).unwrap();
            prop_assert_eq!(&back, &t);
        }
    }

    #[test]
    fn normalization_is_checkable(t in arb_term()) {
        let rules = RuleSet::new(BaseRule::BetaEta);
        match normalize(&t, &rules, 40) {
            NormalizeResult::Normalized { normal_form, steps } => {
                prop_assert!(is_reduced(&normal_form, &rules));
                let mut cur = t.clone();
                for s in &steps {
                    check_step(s, &rules).unwrap();
                    prop_assert_eq!(&s.source, &cur);
                    cur = s.target.clone();
                }
                prop_assert_eq!(&cur, &normal_form);
            }
            NormalizeResult::FuelExhausted { steps, .. } => {
                for s in &steps {
                    check_step(s, &rules).unwrap();
                }
            }
        }
    }

    #[test]
    fn substitute_absent_var_is_identity(t in arb_term(), s in arb_term()) {
        let fresh: VarName = "q".into();
        prop_assert!(!t.has_free(&fresh));
        prop_assert_eq!(t.substitute(&fresh, &s), t);
    }

    #[test]
    fn substitution_composition(t in arb_term(), s in arb_term(), r in arb_term()) {
        // t[a≔s][b≔r] = t[b≔r][a≔s[b≔r]] when a is not free in r
        let a: VarName = "a".into();
        let b: VarName = "b".into();
        prop_assume!(!r.has_free(&a));
        let lhs = t.substitute(&a, &s).substitute(&b, &r);
        let rhs = t
            .substitute(&b, &r)
            .substitute(&a, &s.substitute(&b, &r));
        prop_assert!(alpha_eq(&lhs, &rhs), "lhs {lhs} vs rhs {rhs}");
    }

    #[test]
    fn substitution_respects_alpha(t in arb_term(), s in arb_term()) {
        // substituting through a bound renaming gives an alpha-equal result
        let x: VarName = "x".into();
        let t2 = Term::lam("x", t.clone());
        let t3 = {
            let w: VarName = "w".into();
            prop_assume!(!t.has_free(&w));
            Term::lam("w", t.substitute(&x, &Term::var("w")))
        };
        prop_assert_eq!(&t2, &t3);
        let u2 = t2.substitute(&x, &s);
        let u3 = t3.substitute(&x, &s);
        prop_assert_eq!(u2, u3);
    }

    #[test]
    fn contraction_preserves_closedness(t in arb_term(), rules in arb_rules()) {
        // free variables never appear out of nowhere; extension unfolding
        // may re-introduce the extension variable but nothing else
        let free = t.named_free_vars();
        for (path, kind) in enumerate_redexes(&t, &rules) {
            let step = make_step(&t, &path, kind, &rules).unwrap();
            for v in step.target.named_free_vars() {
                prop_assert!(
                    free.contains(&v)
                        || rules.fix_var().map(|e| *e.var() == v).unwrap_or(false),
                    "unexpected new free variable {} in {}",
                    v.as_str(),
                    step.target
                );
            }
        }
    }
}
