//! Abstract syntax: one syntactic category spanning universes, cubes, topes,
//! shapes, types and terms, disambiguated during checking.
//!
//! Variables occur in two forms: `Var(name)` straight from the parser and
//! `BoundVar(index, hint)` (de Bruijn) after elaboration; `GlobalRef` marks a
//! resolved reference to a module-level definition or postulate. α-equivalence
//! treats both forms uniformly and ignores binder names and spans.

use crate::span::Span;
use std::rc::Rc;

pub type Name = String;

/// Binder pattern: a name, a wildcard, or a (nested) pair pattern as used for
/// product-cube binders like `\ (t , s) → …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Name),
    Wildcard,
    Pair(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    /// Names bound by this pattern, left to right (`None` for wildcards).
    pub fn collect_names<'a>(&'a self, out: &mut Vec<Option<&'a str>>) {
        match self {
            Pattern::Var(n) => out.push(Some(n)),
            Pattern::Wildcard => out.push(None),
            Pattern::Pair(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }

    pub fn names(&self) -> Vec<Option<&str>> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    /// Number of variables this pattern binds.
    pub fn arity(&self) -> usize {
        match self {
            Pattern::Var(_) | Pattern::Wildcard => 1,
            Pattern::Pair(a, b) => a.arity() + b.arity(),
        }
    }

    /// Same tree shape; binder names are irrelevant.
    pub fn same_shape(&self, other: &Pattern) -> bool {
        match (self, other) {
            (Pattern::Pair(a1, b1), Pattern::Pair(a2, b2)) => {
                a1.same_shape(a2) && b1.same_shape(b2)
            }
            (Pattern::Pair(..), _) | (_, Pattern::Pair(..)) => false,
            _ => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Rc<Expr> {
        Rc::new(Expr { kind, span })
    }

    pub fn synthetic(kind: ExprKind) -> Rc<Expr> {
        Rc::new(Expr { kind, span: Span::synthetic() })
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    // Universes.
    Universe,
    UniverseCube,
    UniverseTope,
    // Cube layer.
    CubeUnit,
    Cube2,
    CubeProduct(Rc<Expr>, Rc<Expr>),
    PointStar,
    PointZero,
    PointOne,
    /// Point-level pair/projections (elaborated forms of `Pair`/`First`/`Second`
    /// whose subject lives in a cube).
    PointPair(Rc<Expr>, Rc<Expr>),
    PointFirst(Rc<Expr>),
    PointSecond(Rc<Expr>),
    // Tope layer.
    TopeTop,
    TopeBottom,
    TopeAnd(Rc<Expr>, Rc<Expr>),
    TopeOr(Rc<Expr>, Rc<Expr>),
    TopeEqT(Rc<Expr>, Rc<Expr>),
    TopeLeq(Rc<Expr>, Rc<Expr>),
    /// Shape `{pat : I | φ}`.
    Shape { binder: Pattern, cube: Rc<Expr>, tope: Rc<Expr> },
    // Types and terms.
    Pi { binder: Pattern, domain: Rc<Expr>, codomain: Rc<Expr> },
    Sigma { binder: Pattern, domain: Rc<Expr>, codomain: Rc<Expr> },
    Lambda { binder: Pattern, domain: Option<Rc<Expr>>, body: Rc<Expr> },
    App(Rc<Expr>, Rc<Expr>),
    Pair(Rc<Expr>, Rc<Expr>),
    First(Rc<Expr>),
    Second(Rc<Expr>),
    /// `a =_{A} b`; the annotation is optional in the surface syntax.
    IdType { ty: Option<Rc<Expr>>, lhs: Rc<Expr>, rhs: Rc<Expr> },
    /// `refl`, `refl_{a}`, `refl_{a : A}`.
    Refl { ty: Option<Rc<Expr>>, term: Option<Rc<Expr>> },
    /// Based path induction `idJ (A , a , C , d , x , p)`.
    IndPath {
        ty: Rc<Expr>,
        base: Rc<Expr>,
        motive: Rc<Expr>,
        refl_case: Rc<Expr>,
        target: Rc<Expr>,
        path: Rc<Expr>,
    },
    /// Refinement `A [φ₁ ↦ a₁ , … , φₖ ↦ aₖ]` (k ≥ 1).
    Refinement { ty: Rc<Expr>, constraints: Vec<(Rc<Expr>, Rc<Expr>)> },
    /// `recOR (φ₁ ↦ a₁ , … , φₖ ↦ aₖ)`.
    RecOr(Vec<(Rc<Expr>, Rc<Expr>)>),
    RecBot,
    /// `(e : T)` ascription.
    Ascription(Rc<Expr>, Rc<Expr>),
    Hole,
    /// Unresolved (surface) variable.
    Var(Name),
    /// Resolved de Bruijn index with its display hint.
    BoundVar(usize, Name),
    /// Resolved module-level name.
    GlobalRef(Name),
}

/// One parameter group of a declaration: `(x y : A)` or `((t , s) : I × J)`.
#[derive(Clone, Debug)]
pub struct ParamGroup {
    pub patterns: Vec<Pattern>,
    pub ty: Rc<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Declaration {
    Define {
        name: Name,
        name_span: Span,
        uses: Vec<Name>,
        params: Vec<ParamGroup>,
        result: Rc<Expr>,
        body: Rc<Expr>,
    },
    Postulate {
        name: Name,
        name_span: Span,
        uses: Vec<Name>,
        params: Vec<ParamGroup>,
        result: Rc<Expr>,
    },
    SectionBegin { name: Name, span: Span },
    SectionEnd { name: Name, span: Span },
    /// `#variable x : T` / `#variables x y z : T`.
    Variables { names: Vec<(Name, Span)>, ty: Rc<Expr>, span: Span },
}

impl Declaration {
    pub fn display_name(&self) -> Option<&str> {
        match self {
            Declaration::Define { name, .. } | Declaration::Postulate { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Declaration::Define { name_span, .. } | Declaration::Postulate { name_span, .. } => {
                name_span.clone()
            }
            Declaration::SectionBegin { span, .. }
            | Declaration::SectionEnd { span, .. }
            | Declaration::Variables { span, .. } => span.clone(),
        }
    }
}

/// A parsed source file. `language` is the `#lang` pragma value when present
/// (it is required before the first declaration, and recorded but otherwise
/// ignored).
#[derive(Clone, Debug)]
pub struct SourceModule {
    pub file: String,
    pub language: Option<String>,
    pub decls: Vec<Declaration>,
}

// ---------------------------------------------------------------------------
// α-equivalence
// ---------------------------------------------------------------------------

enum VarRef<'a> {
    Bound(usize),
    Free(&'a str),
}

/// Binder stack for one side of the comparison. De Bruijn: index 0 is the
/// innermost binder.
struct Scope<'a> {
    names: Vec<Option<&'a str>>,
}

impl<'a> Scope<'a> {
    fn resolve(&self, e: &'a ExprKind) -> Option<VarRef<'a>> {
        match e {
            ExprKind::Var(n) | ExprKind::GlobalRef(n) => {
                for (i, slot) in self.names.iter().rev().enumerate() {
                    if *slot == Some(n.as_str()) {
                        return Some(VarRef::Bound(i));
                    }
                }
                Some(VarRef::Free(n))
            }
            ExprKind::BoundVar(i, _) => Some(VarRef::Bound(*i)),
            _ => None,
        }
    }
}

fn alpha_opt<'a>(
    a: &'a Option<Rc<Expr>>,
    b: &'a Option<Rc<Expr>>,
    sa: &mut Scope<'a>,
    sb: &mut Scope<'a>,
) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => alpha_rec(a, b, sa, sb),
        _ => false,
    }
}

fn alpha_under<'a>(
    pa: &'a Pattern,
    pb: &'a Pattern,
    ba: &'a Expr,
    bb: &'a Expr,
    sa: &mut Scope<'a>,
    sb: &mut Scope<'a>,
) -> bool {
    if !pa.same_shape(pb) {
        return false;
    }
    let na = pa.names();
    let nb = pb.names();
    let depth = na.len();
    sa.names.extend(na);
    sb.names.extend(nb);
    let r = alpha_rec(ba, bb, sa, sb);
    sa.names.truncate(sa.names.len() - depth);
    sb.names.truncate(sb.names.len() - depth);
    r
}

fn alpha_rec<'a>(a: &'a Expr, b: &'a Expr, sa: &mut Scope<'a>, sb: &mut Scope<'a>) -> bool {
    use ExprKind::*;
    if let (Some(ra), Some(rb)) = (sa.resolve(&a.kind), sb.resolve(&b.kind)) {
        return match (ra, rb) {
            (VarRef::Bound(i), VarRef::Bound(j)) => i == j,
            (VarRef::Free(n), VarRef::Free(m)) => n == m,
            _ => false,
        };
    }
    match (&a.kind, &b.kind) {
        (Universe, Universe)
        | (UniverseCube, UniverseCube)
        | (UniverseTope, UniverseTope)
        | (CubeUnit, CubeUnit)
        | (Cube2, Cube2)
        | (PointStar, PointStar)
        | (PointZero, PointZero)
        | (PointOne, PointOne)
        | (TopeTop, TopeTop)
        | (TopeBottom, TopeBottom)
        | (RecBot, RecBot)
        | (Hole, Hole) => true,
        (CubeProduct(a1, a2), CubeProduct(b1, b2))
        | (PointPair(a1, a2), PointPair(b1, b2))
        | (TopeAnd(a1, a2), TopeAnd(b1, b2))
        | (TopeOr(a1, a2), TopeOr(b1, b2))
        | (TopeEqT(a1, a2), TopeEqT(b1, b2))
        | (TopeLeq(a1, a2), TopeLeq(b1, b2))
        | (App(a1, a2), App(b1, b2))
        | (Pair(a1, a2), Pair(b1, b2))
        | (Ascription(a1, a2), Ascription(b1, b2)) => {
            alpha_rec(a1, b1, sa, sb) && alpha_rec(a2, b2, sa, sb)
        }
        (PointFirst(a1), PointFirst(b1))
        | (PointSecond(a1), PointSecond(b1))
        | (First(a1), First(b1))
        | (Second(a1), Second(b1)) => alpha_rec(a1, b1, sa, sb),
        (
            Shape { binder: pa, cube: ca, tope: ta },
            Shape { binder: pb, cube: cb, tope: tb },
        ) => alpha_rec(ca, cb, sa, sb) && alpha_under(pa, pb, ta, tb, sa, sb),
        (
            Pi { binder: pa, domain: da, codomain: ca },
            Pi { binder: pb, domain: db, codomain: cb },
        )
        | (
            Sigma { binder: pa, domain: da, codomain: ca },
            Sigma { binder: pb, domain: db, codomain: cb },
        ) => alpha_rec(da, db, sa, sb) && alpha_under(pa, pb, ca, cb, sa, sb),
        (
            Lambda { binder: pa, domain: da, body: ba },
            Lambda { binder: pb, domain: db, body: bb },
        ) => alpha_opt(da, db, sa, sb) && alpha_under(pa, pb, ba, bb, sa, sb),
        (IdType { ty: ta, lhs: la, rhs: ra }, IdType { ty: tb, lhs: lb, rhs: rb }) => {
            alpha_opt(ta, tb, sa, sb) && alpha_rec(la, lb, sa, sb) && alpha_rec(ra, rb, sa, sb)
        }
        (Refl { ty: ta, term: ma }, Refl { ty: tb, term: mb }) => {
            alpha_opt(ta, tb, sa, sb) && alpha_opt(ma, mb, sa, sb)
        }
        (
            IndPath { ty: a1, base: a2, motive: a3, refl_case: a4, target: a5, path: a6 },
            IndPath { ty: b1, base: b2, motive: b3, refl_case: b4, target: b5, path: b6 },
        ) => {
            alpha_rec(a1, b1, sa, sb)
                && alpha_rec(a2, b2, sa, sb)
                && alpha_rec(a3, b3, sa, sb)
                && alpha_rec(a4, b4, sa, sb)
                && alpha_rec(a5, b5, sa, sb)
                && alpha_rec(a6, b6, sa, sb)
        }
        (Refinement { ty: ta, constraints: ca }, Refinement { ty: tb, constraints: cb }) => {
            alpha_rec(ta, tb, sa, sb)
                && ca.len() == cb.len()
                && ca.iter().zip(cb).all(|((f1, v1), (f2, v2))| {
                    alpha_rec(f1, f2, sa, sb) && alpha_rec(v1, v2, sa, sb)
                })
        }
        (RecOr(ca), RecOr(cb)) => {
            ca.len() == cb.len()
                && ca.iter().zip(cb).all(|((f1, v1), (f2, v2))| {
                    alpha_rec(f1, f2, sa, sb) && alpha_rec(v1, v2, sa, sb)
                })
        }
        _ => false,
    }
}

/// Structural equality up to renaming of bound variables; spans and binder
/// names are ignored, free names compare literally.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    let mut sa = Scope { names: Vec::new() };
    let mut sb = Scope { names: Vec::new() };
    alpha_rec(a, b, &mut sa, &mut sb)
}

/// α-equivalence of declarations (same head form, same name, α-equal bodies
/// with parameters treated as binders).
pub fn alpha_eq_decl(a: &Declaration, b: &Declaration) -> bool {
    fn groups<'a>(
        gs_a: &'a [ParamGroup],
        gs_b: &'a [ParamGroup],
        sa: &mut Scope<'a>,
        sb: &mut Scope<'a>,
        k: &mut dyn FnMut(&mut Scope<'a>, &mut Scope<'a>) -> bool,
    ) -> bool {
        match (gs_a.split_first(), gs_b.split_first()) {
            (None, None) => k(sa, sb),
            (Some((ga, rest_a)), Some((gb, rest_b))) => {
                if ga.patterns.len() != gb.patterns.len() {
                    return false;
                }
                if !alpha_rec(&ga.ty, &gb.ty, sa, sb) {
                    return false;
                }
                let mut depth = 0;
                for (pa, pb) in ga.patterns.iter().zip(&gb.patterns) {
                    if !pa.same_shape(pb) {
                        return false;
                    }
                    sa.names.extend(pa.names());
                    sb.names.extend(pb.names());
                    depth += pa.arity();
                }
                let r = groups(rest_a, rest_b, sa, sb, k);
                sa.names.truncate(sa.names.len() - depth);
                sb.names.truncate(sb.names.len() - depth);
                r
            }
            _ => false,
        }
    }

    let mut sa = Scope { names: Vec::new() };
    let mut sb = Scope { names: Vec::new() };
    match (a, b) {
        (
            Declaration::Define { name: na, uses: ua, params: pa, result: ra, body: ba, .. },
            Declaration::Define { name: nb, uses: ub, params: pb, result: rb, body: bb, .. },
        ) => {
            na == nb
                && ua == ub
                && groups(pa, pb, &mut sa, &mut sb, &mut |sa, sb| {
                    alpha_rec(ra, rb, sa, sb) && alpha_rec(ba, bb, sa, sb)
                })
        }
        (
            Declaration::Postulate { name: na, uses: ua, params: pa, result: ra, .. },
            Declaration::Postulate { name: nb, uses: ub, params: pb, result: rb, .. },
        ) => {
            na == nb
                && ua == ub
                && groups(pa, pb, &mut sa, &mut sb, &mut |sa, sb| alpha_rec(ra, rb, sa, sb))
        }
        (Declaration::SectionBegin { name: na, .. }, Declaration::SectionBegin { name: nb, .. })
        | (Declaration::SectionEnd { name: na, .. }, Declaration::SectionEnd { name: nb, .. }) => {
            na == nb
        }
        (
            Declaration::Variables { names: na, ty: ta, .. },
            Declaration::Variables { names: nb, ty: tb, .. },
        ) => {
            na.len() == nb.len()
                && na.iter().zip(nb).all(|((x, _), (y, _))| x == y)
                && alpha_rec(ta, tb, &mut sa, &mut sb)
        }
        _ => false,
    }
}
