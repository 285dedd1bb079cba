//! Terms of the untyped lambda calculus over two kinds of variables:
//! ordinary named variables and tracked variables that stand for members of
//! a fixed-point combinator's unfolding family (see [`crate::fixpoint`]).
//!
//! Terms are identified up to alpha-equivalence: `==` and `Ord` on [`Term`]
//! ignore binder names, and every equality stated elsewhere in the crate
//! means exactly this relation. Concrete binder names are retained only so
//! printed output stays close to the input.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::fixpoint::UpsilonElem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("path leaves the term at depth {depth}")]
    InvalidPath { depth: usize },
}

// ===========================================================================
// Variables
// ===========================================================================

/// An ordinary variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(name: &str) -> Self {
        VarName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::new(s)
    }
}

impl From<String> for VarName {
    fn from(s: String) -> Self {
        VarName(Arc::from(s.as_str()))
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A tracked variable: an opaque descriptor of one member of the unfolding
/// family of a combinator application. Two tracked variables are the same
/// variable exactly when their descriptors realize alpha-equivalent terms.
#[derive(Clone)]
pub struct TrackedVar {
    inner: Arc<TrackedInner>,
}

struct TrackedInner {
    elem: UpsilonElem,
    realization: OnceLock<Term>,
}

impl TrackedVar {
    pub fn new(elem: UpsilonElem) -> Self {
        TrackedVar {
            inner: Arc::new(TrackedInner {
                elem,
                realization: OnceLock::new(),
            }),
        }
    }

    pub fn elem(&self) -> &UpsilonElem {
        &self.inner.elem
    }

    /// The plain term this descriptor stands for, computed once per descriptor.
    pub fn realization(&self) -> &Term {
        self.inner
            .realization
            .get_or_init(|| crate::fixpoint::realize(&self.inner.elem))
    }
}

impl PartialEq for TrackedVar {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.realization() == other.realization()
    }
}

impl Eq for TrackedVar {}

impl PartialOrd for TrackedVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TrackedVar {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return Ordering::Equal;
        }
        self.realization().cmp(other.realization())
    }
}

impl fmt::Debug for TrackedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrackedVar({:?})", self.inner.elem.form_tag())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum VarKind {
    Named(VarName),
    Tracked(TrackedVar),
}

// ===========================================================================
// Paths
// ===========================================================================

/// One child selector in a term tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Dir {
    FunSide,
    ArgSide,
    Body,
}

impl Dir {
    pub fn token(self) -> &'static str {
        match self {
            Dir::FunSide => "fun",
            Dir::ArgSide => "arg",
            Dir::Body => "body",
        }
    }

    pub fn from_token(tok: &str) -> Option<Dir> {
        match tok {
            "fun" => Some(Dir::FunSide),
            "arg" => Some(Dir::ArgSide),
            "body" => Some(Dir::Body),
            _ => None,
        }
    }
}

/// A position in a term. Lexicographic `Ord` (with `FunSide < ArgSide <
/// Body`) is leftmost-outermost order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Path(Vec<Dir>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn of(dirs: impl Into<Vec<Dir>>) -> Self {
        Path(dirs.into())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dirs(&self) -> &[Dir] {
        &self.0
    }

    pub fn push(&mut self, d: Dir) {
        self.0.push(d);
    }

    /// This path extended by `tail`.
    pub fn joined(&self, tail: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&tail.0);
        Path(v)
    }

    /// This path extended by one selector.
    pub fn child(&self, d: Dir) -> Path {
        let mut v = self.0.clone();
        v.push(d);
        Path(v)
    }
}

impl From<Vec<Dir>> for Path {
    fn from(v: Vec<Dir>) -> Self {
        Path(v)
    }
}

impl FromIterator<Dir> for Path {
    fn from_iter<I: IntoIterator<Item = Dir>>(iter: I) -> Self {
        Path(iter.into_iter().collect())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("·");
        }
        let mut first = true;
        for d in &self.0 {
            if !first {
                f.write_str(".")?;
            }
            f.write_str(d.token())?;
            first = false;
        }
        Ok(())
    }
}

// ===========================================================================
// Terms
// ===========================================================================

#[derive(Clone, Debug)]
pub enum Term {
    Var(VarKind),
    App(Arc<Term>, Arc<Term>),
    Lam(VarName, Arc<Term>),
}

impl Term {
    pub fn var(name: impl Into<VarName>) -> Term {
        Term::Var(VarKind::Named(name.into()))
    }

    pub fn tracked(elem: UpsilonElem) -> Term {
        Term::Var(VarKind::Tracked(TrackedVar::new(elem)))
    }

    pub fn tracked_var(tv: TrackedVar) -> Term {
        Term::Var(VarKind::Tracked(tv))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Arc::new(fun), Arc::new(arg))
    }

    pub fn lam(binder: impl Into<VarName>, body: Term) -> Term {
        Term::Lam(binder.into(), Arc::new(body))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lam(_, b) => 1 + b.size(),
        }
    }

    /// Free variables of both kinds. Tracked variables are always free.
    // the OnceLock inside TrackedVar is a cache of a value determined by
    // the immutable descriptor, so the ordering of keys never changes
    #[allow(clippy::mutable_key_type)]
    pub fn free_vars(&self) -> BTreeSet<VarKind> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    #[allow(clippy::mutable_key_type)]
    fn collect_free(&self, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarKind>) {
        match self {
            Term::Var(VarKind::Named(v)) => {
                if !bound.contains(v) {
                    out.insert(VarKind::Named(v.clone()));
                }
            }
            Term::Var(VarKind::Tracked(tv)) => {
                out.insert(VarKind::Tracked(tv.clone()));
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Lam(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Free named variables only.
    pub fn named_free_vars(&self) -> BTreeSet<VarName> {
        self.free_vars()
            .into_iter()
            .filter_map(|k| match k {
                VarKind::Named(v) => Some(v),
                VarKind::Tracked(_) => None,
            })
            .collect()
    }

    /// Distinct tracked variables in first-occurrence order.
    pub fn tracked_vars(&self) -> Vec<TrackedVar> {
        fn walk(t: &Term, out: &mut Vec<TrackedVar>) {
            match t {
                Term::Var(VarKind::Tracked(tv)) => {
                    if !out.iter().any(|seen| seen == tv) {
                        out.push(tv.clone());
                    }
                }
                Term::Var(VarKind::Named(_)) => {}
                Term::App(f, a) => {
                    walk(f, out);
                    walk(a, out);
                }
                Term::Lam(_, b) => walk(b, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn contains_tracked(&self) -> bool {
        match self {
            Term::Var(VarKind::Tracked(_)) => true,
            Term::Var(VarKind::Named(_)) => false,
            Term::App(f, a) => f.contains_tracked() || a.contains_tracked(),
            Term::Lam(_, b) => b.contains_tracked(),
        }
    }

    /// Does the named variable `v` occur free?
    pub fn has_free(&self, v: &VarName) -> bool {
        match self {
            Term::Var(VarKind::Named(u)) => u == v,
            Term::Var(VarKind::Tracked(_)) => false,
            Term::App(f, a) => f.has_free(v) || a.has_free(v),
            Term::Lam(u, b) => u != v && b.has_free(v),
        }
    }

    /// Every name appearing in the term, free or as a binder. Useful as an
    /// avoid set when a fresh name must not clash even with bound names.
    pub fn all_names(&self) -> BTreeSet<VarName> {
        fn walk(t: &Term, out: &mut BTreeSet<VarName>) {
            match t {
                Term::Var(VarKind::Named(v)) => {
                    out.insert(v.clone());
                }
                Term::Var(VarKind::Tracked(_)) => {}
                Term::App(f, a) => {
                    walk(f, out);
                    walk(a, out);
                }
                Term::Lam(v, b) => {
                    out.insert(v.clone());
                    walk(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// Capture-avoiding substitution of `n` for the free named variable `v`.
    /// Binders that would capture a free name of `n` are renamed with
    /// [`fresh_from`]; subterms without a free `v` are returned unchanged.
    /// Tracked variables are never substituted for.
    pub fn substitute(&self, v: &VarName, n: &Term) -> Term {
        if !self.has_free(v) {
            return self.clone();
        }
        let n_free = n.named_free_vars();
        self.subst_inner(v, n, &n_free)
    }

    fn subst_inner(&self, v: &VarName, n: &Term, n_free: &BTreeSet<VarName>) -> Term {
        if !self.has_free(v) {
            return self.clone();
        }
        match self {
            // has_free above guarantees this is exactly Var(Named(v))
            Term::Var(_) => n.clone(),
            Term::App(f, a) => Term::app(f.subst_inner(v, n, n_free), a.subst_inner(v, n, n_free)),
            Term::Lam(u, b) => {
                if n_free.contains(u) {
                    let mut avoid = b.named_free_vars();
                    avoid.extend(n_free.iter().cloned());
                    avoid.insert(v.clone());
                    let u2 = fresh_from(u.as_str(), &avoid);
                    let b2 = b.substitute(u, &Term::var(u2.clone()));
                    Term::lam(u2, b2.subst_inner(v, n, n_free))
                } else {
                    Term::lam(u.clone(), b.subst_inner(v, n, n_free))
                }
            }
        }
    }

    pub fn subterm_at(&self, path: &Path) -> Result<&Term, TermError> {
        let mut cur = self;
        for (depth, d) in path.dirs().iter().enumerate() {
            cur = match (cur, d) {
                (Term::App(f, _), Dir::FunSide) => f,
                (Term::App(_, a), Dir::ArgSide) => a,
                (Term::Lam(_, b), Dir::Body) => b,
                _ => return Err(TermError::InvalidPath { depth }),
            };
        }
        Ok(cur)
    }

    /// Structural replacement of the subterm at `path`. No renaming: free
    /// names of `sub` that collide with binders along the path are captured.
    pub fn replace_at(&self, path: &Path, sub: Term) -> Result<Term, TermError> {
        self.replace_rec(path.dirs(), 0, sub)
    }

    fn replace_rec(&self, dirs: &[Dir], depth: usize, sub: Term) -> Result<Term, TermError> {
        let Some((d, rest)) = dirs.split_first() else {
            return Ok(sub);
        };
        match (self, d) {
            (Term::App(f, a), Dir::FunSide) => Ok(Term::App(
                Arc::new(f.replace_rec(rest, depth + 1, sub)?),
                a.clone(),
            )),
            (Term::App(f, a), Dir::ArgSide) => Ok(Term::App(
                f.clone(),
                Arc::new(a.replace_rec(rest, depth + 1, sub)?),
            )),
            (Term::Lam(v, b), Dir::Body) => Ok(Term::Lam(
                v.clone(),
                Arc::new(b.replace_rec(rest, depth + 1, sub)?),
            )),
            _ => Err(TermError::InvalidPath { depth }),
        }
    }

    /// Replacement of the subterm at `path` that renames binders along the
    /// path when they would capture a free name of `sub`.
    pub fn graft(&self, path: &Path, sub: Term) -> Result<Term, TermError> {
        let sub_free = sub.named_free_vars();
        self.graft_rec(path.dirs(), 0, sub, &sub_free)
    }

    fn graft_rec(
        &self,
        dirs: &[Dir],
        depth: usize,
        sub: Term,
        sub_free: &BTreeSet<VarName>,
    ) -> Result<Term, TermError> {
        let Some((d, rest)) = dirs.split_first() else {
            return Ok(sub);
        };
        match (self, d) {
            (Term::App(f, a), Dir::FunSide) => Ok(Term::App(
                Arc::new(f.graft_rec(rest, depth + 1, sub, sub_free)?),
                a.clone(),
            )),
            (Term::App(f, a), Dir::ArgSide) => Ok(Term::App(
                f.clone(),
                Arc::new(a.graft_rec(rest, depth + 1, sub, sub_free)?),
            )),
            (Term::Lam(v, b), Dir::Body) => {
                if sub_free.contains(v) {
                    let mut avoid = b.named_free_vars();
                    avoid.extend(sub_free.iter().cloned());
                    avoid.insert(v.clone());
                    let v2 = fresh_from(v.as_str(), &avoid);
                    let b2 = b.substitute(v, &Term::var(v2.clone()));
                    Ok(Term::Lam(
                        v2,
                        Arc::new(b2.graft_rec(rest, depth + 1, sub, sub_free)?),
                    ))
                } else {
                    Ok(Term::Lam(
                        v.clone(),
                        Arc::new(b.graft_rec(rest, depth + 1, sub, sub_free)?),
                    ))
                }
            }
            _ => Err(TermError::InvalidPath { depth }),
        }
    }
}

// ===========================================================================
// Alpha-equivalence and the induced total order
// ===========================================================================

/// Alpha-equivalence. `Term`'s `==` is this relation.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    cmp_alpha(a, b, &mut Vec::new(), &mut Vec::new()) == Ordering::Equal
}

fn lookup(env: &[VarName], v: &VarName) -> Option<usize> {
    env.iter().rev().position(|u| u == v)
}

fn cmp_alpha(a: &Term, b: &Term, ea: &mut Vec<VarName>, eb: &mut Vec<VarName>) -> Ordering {
    fn rank(t: &Term) -> u8 {
        match t {
            Term::Var(_) => 0,
            Term::App(_, _) => 1,
            Term::Lam(_, _) => 2,
        }
    }
    match (a, b) {
        (Term::Var(ka), Term::Var(kb)) => {
            // bound < free named < tracked; bound variables compare by
            // binding depth, so binder names are irrelevant
            let key = |k: &VarKind, env: &[VarName]| match k {
                VarKind::Named(v) => match lookup(env, v) {
                    Some(i) => (0u8, Some(i), Some(v.clone()), None),
                    None => (1u8, None, Some(v.clone()), None),
                },
                VarKind::Tracked(tv) => (2u8, None, None, Some(tv.clone())),
            };
            let (ra, ia, na, ta) = key(ka, ea);
            let (rb, ib, nb, tb) = key(kb, eb);
            ra.cmp(&rb)
                .then_with(|| ia.cmp(&ib))
                .then_with(|| match (ra, &na, &nb) {
                    (1, Some(x), Some(y)) => x.cmp(y),
                    _ => Ordering::Equal,
                })
                .then_with(|| match (&ta, &tb) {
                    (Some(x), Some(y)) => x.cmp(y),
                    _ => Ordering::Equal,
                })
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => {
            cmp_alpha(f1, f2, ea, eb).then_with(|| cmp_alpha(a1, a2, ea, eb))
        }
        (Term::Lam(v1, b1), Term::Lam(v2, b2)) => {
            ea.push(v1.clone());
            eb.push(v2.clone());
            let r = cmp_alpha(b1, b2, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

// ===========================================================================
// Fresh names
// ===========================================================================

/// First name of the deterministic scheme `a, b, …, z, a1, b1, …` not in
/// `avoid`.
pub fn fresh_name(avoid: &BTreeSet<VarName>) -> VarName {
    for round in 0u32.. {
        for c in 'a'..='z' {
            let cand = if round == 0 {
                c.to_string()
            } else {
                format!("{c}{round}")
            };
            let cand = VarName::from(cand);
            if !avoid.contains(&cand) {
                return cand;
            }
        }
    }
    unreachable!()
}

/// `base` itself if unused, otherwise `base1`, `base2`, … Deterministic.
pub fn fresh_from(base: &str, avoid: &BTreeSet<VarName>) -> VarName {
    let cand = VarName::from(base);
    if !avoid.contains(&cand) {
        return cand;
    }
    for i in 1u64.. {
        let cand = VarName::from(format!("{base}{i}"));
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}
