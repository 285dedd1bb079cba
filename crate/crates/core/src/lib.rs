//! Kernel for the untyped lambda calculus with checkable reduction
//! certificates.
//!
//! The crate provides terms up to alpha-equivalence ([`term`]), a concrete
//! syntax ([`syntax`]), notions of reduction as data with positional steps
//! and two-way conversions ([`reduce`]), an independent step/conversion
//! checker ([`check`]), the Curry and Turing fixed-point combinator families
//! with their unfolding descriptors ([`fixpoint`]), and the lifting
//! construction that turns a normalization of `(Y F) n` into a certificate
//! that any fixed point `M` of `F` reaches the same normal form ([`lift`]).
//! Record-stream serialization for traces and certificates lives in
//! [`records`].

pub mod check;
pub mod fixpoint;
pub mod lift;
pub mod records;
pub mod reduce;
pub mod syntax;
pub mod term;

pub use check::{check_conversion, check_step, conversion_error, CheckFailure};
pub use fixpoint::{
    initial_elem, iterate_app, realize, theta, upsilon_step, y_combinator, y_n, y_pair, Family,
    FixpointError, StepDecomposition, Unrolling, UpsilonElem,
};
pub use lift::{
    certify_least, find_fixpoint_witness, gamma, lift_normalization, phi, rho,
    substitute_fixed_point, CertifyFailure, LeastFixpointCertificate, LiftError, LiftState, Lifted,
};
pub use reduce::{
    contract, enumerate_redexes, first_redex, is_reduced, join, lift_conversion, lift_steps,
    make_step, normalize, subst_conversion, BaseRule, Conversion, FixVarExt, JoinResult,
    NormalizeResult, RedexKind, ReduceError, RuleSet, Step, StepDir,
};
pub use syntax::{parse, parse_definitions, parse_with, print, Definitions, ParseError};
pub use term::{
    alpha_eq, fresh_from, fresh_name, Dir, Path, Term, TermError, TrackedVar, VarKind, VarName,
};
