use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lfp_core::records::{certificate_from_records, certificate_records};
use lfp_core::{
    certify_least, check_conversion, normalize, parse, y_combinator, BaseRule, Family,
    NormalizeResult, RuleSet, Term,
};

fn nf(term: &Term, base: BaseRule) -> Term {
    match normalize(term, &RuleSet::new(base), 100_000) {
        NormalizeResult::Normalized { normal_form, .. } => normal_form,
        NormalizeResult::FuelExhausted { .. } => panic!("bench term diverged"),
    }
}

fn bench_normalize(c: &mut Criterion) {
    let rules = RuleSet::new(BaseRule::Beta);

    let doubling = parse("(λf.λg x.g (g x)) q").unwrap();
    let applied = Term::app(
        Term::app(y_combinator(), parse("λf.λg x.g (g x)").unwrap()),
        parse("λs z.s (s z)").unwrap(),
    );
    c.bench_function("normalize/fixpoint-application", |b| {
        b.iter(|| normalize(black_box(&applied), &rules, 100_000))
    });
    c.bench_function("normalize/small-term", |b| {
        b.iter(|| normalize(black_box(&doubling), &rules, 100_000))
    });

    // 3^3 on Church numerals, a larger pure-beta workout
    let church_exp = parse("(λm n.n m) (λs z.s (s (s z))) (λs z.s (s (s z)))").unwrap();
    c.bench_function("normalize/church-exponentiation", |b| {
        b.iter(|| normalize(black_box(&church_exp), &rules, 100_000))
    });
}

fn bench_certify(c: &mut Criterion) {
    let f = parse("λf.λg x.g (g x)").unwrap();
    let m = nf(&Term::app(y_combinator(), f.clone()), BaseRule::Beta);
    let n = parse("λs z.s (s z)").unwrap();

    c.bench_function("certify/y-beta", |b| {
        b.iter(|| {
            certify_least(
                black_box(&f),
                black_box(&m),
                black_box(&n),
                Family::Y,
                BaseRule::Beta,
                100_000,
            )
            .unwrap()
        })
    });

    let eta_f = parse("λf.λx z.x z").unwrap();
    let eta_m = nf(&Term::app(y_combinator(), eta_f.clone()), BaseRule::BetaEta);
    c.bench_function("certify/theta-beta-eta", |b| {
        b.iter(|| {
            certify_least(
                black_box(&eta_f),
                black_box(&eta_m),
                black_box(&n),
                Family::Theta,
                BaseRule::BetaEta,
                100_000,
            )
            .unwrap()
        })
    });
}

fn bench_check(c: &mut Criterion) {
    let f = parse("λf.λg x.g (g x)").unwrap();
    let m = nf(&Term::app(y_combinator(), f.clone()), BaseRule::Beta);
    let n = parse("λs z.s (s z)").unwrap();
    let cert = certify_least(&f, &m, &n, Family::Y, BaseRule::Beta, 100_000).unwrap();
    let rules = RuleSet::new(BaseRule::Beta);
    let records = certificate_records(&cert);

    c.bench_function("check/certificate-verify", |b| {
        b.iter(|| black_box(&cert).verify().unwrap())
    });
    c.bench_function("check/main-conversion", |b| {
        b.iter(|| check_conversion(black_box(&cert.main_conversion), &rules).unwrap())
    });
    c.bench_function("check/records-round-trip", |b| {
        b.iter(|| {
            certificate_from_records(black_box(&records))
                .unwrap()
                .verify()
                .unwrap()
        })
    });
}

criterion_group!(benches, bench_normalize, bench_certify, bench_check);
criterion_main!(benches);
