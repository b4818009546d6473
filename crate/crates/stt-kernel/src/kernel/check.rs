//! Bidirectional elaboration: surface expressions to core expressions,
//! with types computed as values.
//!
//! `infer` synthesizes a type, `check` pushes an expected one. Checking
//! resolves the surface punning between the term and the point layers
//! (pairs and projections) by the sort of the subject, turns names into
//! de Bruijn indices, annotates what evaluation needs (lambda domains,
//! identity types, `refl` witnesses), and discharges tope obligations:
//! applying a function to a point of its shape domain, covering a case
//! split, and matching boundary refinements.

use super::equal::{self, skeletons_equal};
use super::eval::{
    self, apply, apply0, atoms_for_cube, do_app, do_first, peel_refine, quote,
    unfold_all, AtomBudgetExceeded, TopeCtx,
};
use super::value::{Closure, Env, Lvl, PointVal, Value};
use crate::ast::{Expr, ExprKind, Name, Pattern};
use crate::diagnostics::{Code, Diagnostic};
use crate::module::GlobalEnv;
use crate::printer;
use crate::span::Span;
use crate::tope::Tope;
use std::rc::Rc;

/// What kind of thing a type-position expression turned out to be.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sort {
    /// A type (classified by `U`).
    Type,
    /// A cube or shape (classified by `CUBE`).
    Cube,
    /// A tope (classified by `TOPE`).
    Tope,
}

/// A named entry of the typing context. `lvl` is the environment slot it
/// lives in; `steps` projects out of that slot (`0` first, `1` second),
/// through pairs of points (`point`) or of terms.
#[derive(Clone, Debug)]
pub struct ScopeEntry {
    pub name: Name,
    pub lvl: Lvl,
    pub ty: Rc<Value>,
    pub point: bool,
    pub steps: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct Ctx {
    pub env: Env,
    pub scopes: Vec<ScopeEntry>,
    pub tcx: TopeCtx,
    /// Display name of each environment slot (binder patterns collapse
    /// to one slot).
    pub names: Vec<Name>,
}

impl Ctx {
    pub fn new(limit: usize) -> Ctx {
        Ctx {
            env: Vec::new(),
            scopes: Vec::new(),
            tcx: TopeCtx::new(limit),
            names: Vec::new(),
        }
    }

    pub fn lvl(&self) -> Lvl {
        self.env.len()
    }
}

fn pattern_display(pat: &Pattern) -> String {
    match pat {
        Pattern::Var(n) => n.clone(),
        Pattern::Wildcard => "_".to_string(),
        Pattern::Pair(a, b) => {
            format!("({} , {})", pattern_display(a), pattern_display(b))
        }
    }
}

pub struct Elab<'g> {
    pub genv: &'g GlobalEnv,
}

type Infer = Result<(Rc<Expr>, Rc<Value>), Diagnostic>;
type Check = Result<Rc<Expr>, Diagnostic>;

impl<'g> Elab<'g> {
    pub fn new(genv: &'g GlobalEnv) -> Elab<'g> {
        Elab { genv }
    }

    pub fn val(&self, ctx: &Ctx, core: &Expr) -> Rc<Value> {
        eval::eval(self.genv, &ctx.tcx, &ctx.env, core)
    }

    /// Pretty-print a value for diagnostics.
    pub fn show(&self, ctx: &Ctx, v: &Rc<Value>) -> String {
        printer::pretty(&quote(self.genv, &ctx.tcx, &ctx.names, v))
    }

    fn show_tope(&self, ctx: &Ctx, t: &Tope) -> String {
        printer::pretty(&eval::quote_tope(&ctx.tcx, &ctx.names, t))
    }

    fn tope_failure(
        &self,
        ctx: &Ctx,
        span: &Span,
        goal: &Tope,
        what: &str,
    ) -> Diagnostic {
        let mut d = Diagnostic::new(
            Code::Tope,
            span.clone(),
            format!("{}: {} is not entailed here", what, self.show_tope(ctx, goal)),
        );
        if let Some(m) = ctx.tcx.countermodel(goal) {
            d = d.with_note("counterexample", m);
        }
        d
    }

    // -----------------------------------------------------------------
    // binders
    // -----------------------------------------------------------------

    /// Bind a pattern against a type-sorted domain: one environment slot,
    /// scope entries per pattern name (projections for pair patterns).
    pub fn bind_term(
        &self,
        ctx: &Ctx,
        pat: &Pattern,
        ty: Rc<Value>,
        span: &Span,
    ) -> Result<Ctx, Diagnostic> {
        let mut ctx2 = ctx.clone();
        let slot_lvl = ctx2.lvl();
        let slot_name = pattern_display(pat);
        let slot = Value::var(slot_lvl, slot_name.clone(), ty.clone());
        ctx2.env.push(slot.clone());
        ctx2.names.push(slot_name);
        self.term_entries(&mut ctx2, pat, &ty, slot, slot_lvl, &mut Vec::new(), span)?;
        Ok(ctx2)
    }

    fn term_entries(
        &self,
        ctx: &mut Ctx,
        pat: &Pattern,
        ty: &Rc<Value>,
        value: Rc<Value>,
        slot_lvl: Lvl,
        steps: &mut Vec<u8>,
        span: &Span,
    ) -> Result<(), Diagnostic> {
        match pat {
            Pattern::Wildcard => Ok(()),
            Pattern::Var(n) => {
                ctx.scopes.push(ScopeEntry {
                    name: n.clone(),
                    lvl: slot_lvl,
                    ty: ty.clone(),
                    point: false,
                    steps: steps.clone(),
                });
                Ok(())
            }
            Pattern::Pair(p, q) => {
                let tyw = peel_refine(unfold_all(self.genv, &ctx.tcx, ty.clone()));
                match &*tyw {
                    Value::SigmaV { domain, cod, .. } => {
                        let v1 = do_first(self.genv, &ctx.tcx, value.clone());
                        steps.push(0);
                        self.term_entries(ctx, p, domain, v1.clone(), slot_lvl, steps, span)?;
                        steps.pop();
                        let ty2 = apply(self.genv, &ctx.tcx, cod, v1);
                        let v2 = eval::do_second(self.genv, &ctx.tcx, value);
                        steps.push(1);
                        self.term_entries(ctx, q, &ty2, v2, slot_lvl, steps, span)?;
                        steps.pop();
                        Ok(())
                    }
                    _ => Err(Diagnostic::new(
                        Code::TypeMismatch,
                        span.clone(),
                        format!(
                            "pair pattern used at non-pair type {}",
                            self.show(ctx, ty)
                        ),
                    )),
                }
            }
        }
    }

    /// Bind a pattern against a cube-sorted domain: the slot holds a
    /// point built from fresh interval atoms; shape layers of the domain
    /// become hypotheses.
    pub fn bind_point(
        &self,
        ctx: &Ctx,
        pat: &Pattern,
        cube: Rc<Value>,
        span: &Span,
    ) -> Result<Ctx, Diagnostic> {
        let structural = unfold_all(self.genv, &ctx.tcx, cube.clone());
        if !structural.is_cube_sorted() {
            return Err(Diagnostic::new(
                Code::Point,
                span.clone(),
                "cannot bind a point of an abstract cube".to_string(),
            ));
        }
        let mut ctx2 = ctx.clone();
        let slot_lvl = ctx2.lvl();
        let slot_name = pattern_display(pat);
        let mut hyps = Vec::new();
        let pv = atoms_for_cube(
            self.genv,
            &mut ctx2.tcx,
            slot_lvl,
            &structural,
            Some(pat),
            &slot_name,
            &mut hyps,
        )
        .map_err(|AtomBudgetExceeded| {
            Diagnostic::new(
                Code::Bound,
                span.clone(),
                format!(
                    "binder exceeds the interval-variable bound ({})",
                    ctx.tcx.limit
                ),
            )
        })?;
        for h in hyps {
            ctx2.tcx.hyps.push(h);
        }
        ctx2.env.push(Value::point(pv));
        ctx2.names.push(slot_name);
        self.point_entries(&mut ctx2, pat, &cube, slot_lvl, &mut Vec::new(), span)?;
        Ok(ctx2)
    }

    fn point_entries(
        &self,
        ctx: &mut Ctx,
        pat: &Pattern,
        cube: &Rc<Value>,
        slot_lvl: Lvl,
        steps: &mut Vec<u8>,
        span: &Span,
    ) -> Result<(), Diagnostic> {
        match pat {
            Pattern::Wildcard => Ok(()),
            Pattern::Var(n) => {
                ctx.scopes.push(ScopeEntry {
                    name: n.clone(),
                    lvl: slot_lvl,
                    ty: cube.clone(),
                    point: true,
                    steps: steps.clone(),
                });
                Ok(())
            }
            Pattern::Pair(p, q) => {
                let structural = unfold_all(self.genv, &ctx.tcx, cube.clone());
                let inner = match &*structural {
                    Value::ShapeV { cube, .. } => cube.clone(),
                    _ => structural.clone(),
                };
                let inner = unfold_all(self.genv, &ctx.tcx, inner);
                match &*inner {
                    Value::CubeProduct(c1, c2) => {
                        steps.push(0);
                        self.point_entries(ctx, p, c1, slot_lvl, steps, span)?;
                        steps.pop();
                        steps.push(1);
                        self.point_entries(ctx, q, c2, slot_lvl, steps, span)?;
                        steps.pop();
                        Ok(())
                    }
                    Value::ShapeV { .. } => {
                        // Nested shape layers: unwrap them all.
                        self.point_entries(ctx, pat, &inner, slot_lvl, steps, span)
                    }
                    _ => Err(Diagnostic::new(
                        Code::TypeMismatch,
                        span.clone(),
                        format!(
                            "pair pattern used at non-product cube {}",
                            self.show(ctx, cube)
                        ),
                    )),
                }
            }
        }
    }

    /// Bind either kind of domain by its sort.
    fn bind_domain(
        &self,
        ctx: &Ctx,
        pat: &Pattern,
        sort: Sort,
        dom: Rc<Value>,
        span: &Span,
    ) -> Result<Ctx, Diagnostic> {
        match sort {
            Sort::Cube => self.bind_point(ctx, pat, dom, span),
            Sort::Type => self.bind_term(ctx, pat, dom, span),
            Sort::Tope => Err(Diagnostic::new(
                Code::NotType,
                span.clone(),
                "a tope is not a type; shapes carry constraints instead".to_string(),
            )),
        }
    }

    // -----------------------------------------------------------------
    // type positions
    // -----------------------------------------------------------------

    /// Elaborate an expression in type position, classifying it.
    pub fn check_type(&self, ctx: &Ctx, e: &Expr) -> Result<(Rc<Expr>, Sort), Diagnostic> {
        let (core, ty) = self.infer(ctx, e)?;
        match &*unfold_all(self.genv, &ctx.tcx, ty.clone()) {
            Value::Universe => Ok((core, Sort::Type)),
            Value::UniverseCube => Ok((core, Sort::Cube)),
            Value::UniverseTope => Ok((core, Sort::Tope)),
            _ => Err(Diagnostic::new(
                Code::NotType,
                e.span.clone(),
                format!("not a type: its type is {}", self.show(ctx, &ty)),
            )),
        }
    }

    fn expect_cube(&self, ctx: &Ctx, e: &Expr) -> Check {
        let (core, sort) = self.check_type(ctx, e)?;
        if sort == Sort::Cube {
            Ok(core)
        } else {
            Err(Diagnostic::new(
                Code::NotType,
                e.span.clone(),
                "expected a cube or shape".to_string(),
            ))
        }
    }

    fn expect_tope(&self, ctx: &Ctx, e: &Expr) -> Check {
        let (core, ty) = self.infer(ctx, e)?;
        match &*unfold_all(self.genv, &ctx.tcx, ty.clone()) {
            Value::UniverseTope => Ok(core),
            _ => Err(Diagnostic::new(
                Code::NotType,
                e.span.clone(),
                format!("expected a constraint, found {}", self.show(ctx, &ty)),
            )),
        }
    }

    // -----------------------------------------------------------------
    // synthesis
    // -----------------------------------------------------------------

    pub fn infer(&self, ctx: &Ctx, e: &Expr) -> Infer {
        use ExprKind::*;
        match &e.kind {
            Universe | UniverseCube | UniverseTope => Ok((
                Expr::new(e.kind.clone(), e.span.clone()),
                Rc::new(Value::Universe),
            )),
            CubeUnit | Cube2 => Ok((
                Expr::new(e.kind.clone(), e.span.clone()),
                Rc::new(Value::UniverseCube),
            )),
            CubeProduct(a, b) => {
                let ca = self.expect_cube(ctx, a)?;
                let cb = self.expect_cube(ctx, b)?;
                Ok((
                    Expr::new(CubeProduct(ca, cb), e.span.clone()),
                    Rc::new(Value::UniverseCube),
                ))
            }
            PointStar => Ok((
                Expr::new(PointStar, e.span.clone()),
                Rc::new(Value::CubeUnit),
            )),
            PointZero | PointOne => Ok((
                Expr::new(e.kind.clone(), e.span.clone()),
                Rc::new(Value::Cube2),
            )),
            TopeTop | TopeBottom => Ok((
                Expr::new(e.kind.clone(), e.span.clone()),
                Rc::new(Value::UniverseTope),
            )),
            TopeAnd(a, b) | TopeOr(a, b) => {
                let ca = self.expect_tope(ctx, a)?;
                let cb = self.expect_tope(ctx, b)?;
                let kind = match &e.kind {
                    TopeAnd(..) => TopeAnd(ca, cb),
                    _ => TopeOr(ca, cb),
                };
                Ok((Expr::new(kind, e.span.clone()), Rc::new(Value::UniverseTope)))
            }
            TopeEqT(a, b) => {
                let (ca, tya) = self.infer(ctx, a)?;
                let (cb, tyb) = self.infer(ctx, b)?;
                let ska = self.point_skeleton(ctx, &tya, &a.span)?;
                let skb = self.point_skeleton(ctx, &tyb, &b.span)?;
                if !skeletons_equal(&ska, &skb) {
                    return Err(Diagnostic::new(
                        Code::Point,
                        e.span.clone(),
                        "points of different cubes cannot be compared".to_string(),
                    ));
                }
                Ok((
                    Expr::new(TopeEqT(ca, cb), e.span.clone()),
                    Rc::new(Value::UniverseTope),
                ))
            }
            TopeLeq(a, b) => {
                let (ca, tya) = self.infer(ctx, a)?;
                let (cb, tyb) = self.infer(ctx, b)?;
                let ska = self.point_skeleton(ctx, &tya, &a.span)?;
                let skb = self.point_skeleton(ctx, &tyb, &b.span)?;
                let is2 = |s: &Rc<Value>| matches!(&**s, Value::Cube2);
                if !is2(&ska) || !is2(&skb) {
                    return Err(Diagnostic::new(
                        Code::Point,
                        e.span.clone(),
                        "the order relation compares points of the directed interval"
                            .to_string(),
                    ));
                }
                Ok((
                    Expr::new(TopeLeq(ca, cb), e.span.clone()),
                    Rc::new(Value::UniverseTope),
                ))
            }
            Shape { binder, cube, tope } => {
                let ccube = self.expect_cube(ctx, cube)?;
                let cube_v = self.val(ctx, &ccube);
                let ctx2 = self.bind_point(ctx, binder, cube_v, &e.span)?;
                let ctope = self.expect_tope(&ctx2, tope)?;
                Ok((
                    Expr::new(
                        Shape { binder: binder.clone(), cube: ccube, tope: ctope },
                        e.span.clone(),
                    ),
                    Rc::new(Value::UniverseCube),
                ))
            }
            Pi { binder, domain, codomain } => {
                let (cdom, sort) = self.check_type(ctx, domain)?;
                let dom_v = self.val(ctx, &cdom);
                let ctx2 = self.bind_domain(ctx, binder, sort, dom_v, &domain.span)?;
                let (ccod, csort) = self.check_type(&ctx2, codomain)?;
                if csort != Sort::Type {
                    return Err(Diagnostic::new(
                        Code::NotType,
                        codomain.span.clone(),
                        "the result of a function type must be a type".to_string(),
                    ));
                }
                Ok((
                    Expr::new(
                        Pi { binder: binder.clone(), domain: cdom, codomain: ccod },
                        e.span.clone(),
                    ),
                    Rc::new(Value::Universe),
                ))
            }
            Sigma { binder, domain, codomain } => {
                let (cdom, sort) = self.check_type(ctx, domain)?;
                if sort != Sort::Type {
                    return Err(Diagnostic::new(
                        Code::NotType,
                        domain.span.clone(),
                        "pair types take type components".to_string(),
                    ));
                }
                let dom_v = self.val(ctx, &cdom);
                let ctx2 = self.bind_term(ctx, binder, dom_v, &domain.span)?;
                let (ccod, csort) = self.check_type(&ctx2, codomain)?;
                if csort != Sort::Type {
                    return Err(Diagnostic::new(
                        Code::NotType,
                        codomain.span.clone(),
                        "pair types take type components".to_string(),
                    ));
                }
                Ok((
                    Expr::new(
                        Sigma { binder: binder.clone(), domain: cdom, codomain: ccod },
                        e.span.clone(),
                    ),
                    Rc::new(Value::Universe),
                ))
            }
            Lambda { binder, domain: Some(dom), body } => {
                let (cdom, sort) = self.check_type(ctx, dom)?;
                let dom_v = self.val(ctx, &cdom);
                let ctx2 = self.bind_domain(ctx, binder, sort, dom_v.clone(), &dom.span)?;
                let (cbody, body_ty) = self.infer(&ctx2, body)?;
                let cod_core = quote(self.genv, &ctx2.tcx, &ctx2.names, &body_ty);
                let ty = Rc::new(Value::PiV {
                    binder: binder.clone(),
                    domain: dom_v,
                    cod: Closure { env: ctx.env.clone(), body: cod_core },
                });
                Ok((
                    Expr::new(
                        Lambda {
                            binder: binder.clone(),
                            domain: Some(cdom),
                            body: cbody,
                        },
                        e.span.clone(),
                    ),
                    ty,
                ))
            }
            Lambda { domain: None, .. } => Err(Diagnostic::new(
                Code::Infer,
                e.span.clone(),
                "cannot infer the type of an unannotated function; \
                 annotate the binder or check against a function type"
                    .to_string(),
            )),
            App(f, a) => {
                let (cf, tyf) = self.infer(ctx, f)?;
                let tyw = peel_refine(unfold_all(self.genv, &ctx.tcx, tyf.clone()));
                match &*tyw {
                    Value::PiV { domain, cod, .. } => {
                        let ca = self.check(ctx, a, domain)?;
                        let av = self.val(ctx, &ca);
                        let ty = apply(self.genv, &ctx.tcx, cod, av);
                        Ok((Expr::new(App(cf, ca), e.span.clone()), ty))
                    }
                    _ => Err(Diagnostic::new(
                        Code::NotFunction,
                        f.span.clone(),
                        format!(
                            "this is not a function: its type is {}",
                            self.show(ctx, &tyf)
                        ),
                    )),
                }
            }
            First(p) => {
                let (cp, typ) = self.infer(ctx, p)?;
                let tyw = peel_refine(unfold_all(self.genv, &ctx.tcx, typ.clone()));
                match &*tyw {
                    Value::SigmaV { domain, .. } => Ok((
                        Expr::new(First(cp), e.span.clone()),
                        domain.clone(),
                    )),
                    _ if tyw.is_cube_sorted() => {
                        let sk = self.point_skeleton(ctx, &typ, &p.span)?;
                        match &*sk {
                            Value::CubeProduct(c1, _) => Ok((
                                Expr::new(PointFirst(cp), e.span.clone()),
                                c1.clone(),
                            )),
                            _ => Err(Diagnostic::new(
                                Code::NotPair,
                                p.span.clone(),
                                "projection of a point that is not a pair".to_string(),
                            )),
                        }
                    }
                    _ => Err(Diagnostic::new(
                        Code::NotPair,
                        p.span.clone(),
                        format!(
                            "projection subject is not a pair: its type is {}",
                            self.show(ctx, &typ)
                        ),
                    )),
                }
            }
            Second(p) => {
                let (cp, typ) = self.infer(ctx, p)?;
                let tyw = peel_refine(unfold_all(self.genv, &ctx.tcx, typ.clone()));
                match &*tyw {
                    Value::SigmaV { cod, .. } => {
                        let pv = self.val(ctx, &cp);
                        let first = do_first(self.genv, &ctx.tcx, pv);
                        let ty = apply(self.genv, &ctx.tcx, cod, first);
                        Ok((Expr::new(Second(cp), e.span.clone()), ty))
                    }
                    _ if tyw.is_cube_sorted() => {
                        let sk = self.point_skeleton(ctx, &typ, &p.span)?;
                        match &*sk {
                            Value::CubeProduct(_, c2) => Ok((
                                Expr::new(PointSecond(cp), e.span.clone()),
                                c2.clone(),
                            )),
                            _ => Err(Diagnostic::new(
                                Code::NotPair,
                                p.span.clone(),
                                "projection of a point that is not a pair".to_string(),
                            )),
                        }
                    }
                    _ => Err(Diagnostic::new(
                        Code::NotPair,
                        p.span.clone(),
                        format!(
                            "projection subject is not a pair: its type is {}",
                            self.show(ctx, &typ)
                        ),
                    )),
                }
            }
            IdType { ty, lhs, rhs } => {
                let (cty, clhs, crhs) = match ty {
                    Some(t) => {
                        let (ct, sort) = self.check_type(ctx, t)?;
                        if sort != Sort::Type {
                            return Err(Diagnostic::new(
                                Code::NotType,
                                t.span.clone(),
                                "paths live in a type".to_string(),
                            ));
                        }
                        let tv = self.val(ctx, &ct);
                        let cl = self.check(ctx, lhs, &tv)?;
                        let cr = self.check(ctx, rhs, &tv)?;
                        (ct, cl, cr)
                    }
                    None => {
                        let (cl, tv) = self.infer(ctx, lhs)?;
                        if unfold_all(self.genv, &ctx.tcx, tv.clone()).is_cube_sorted() {
                            return Err(Diagnostic::new(
                                Code::Point,
                                e.span.clone(),
                                "points are compared with ≡, not with =".to_string(),
                            ));
                        }
                        let cr = self.check(ctx, rhs, &tv)?;
                        let ct = quote(self.genv, &ctx.tcx, &ctx.names, &tv);
                        (ct, cl, cr)
                    }
                };
                Ok((
                    Expr::new(
                        IdType { ty: Some(cty), lhs: clhs, rhs: crhs },
                        e.span.clone(),
                    ),
                    Rc::new(Value::Universe),
                ))
            }
            Refl { ty: None, term: None } => Err(Diagnostic::new(
                Code::Infer,
                e.span.clone(),
                "cannot infer the endpoints of a bare refl; check it against \
                 a path type or annotate it"
                    .to_string(),
            )),
            Refl { ty, term: Some(w) } => {
                let (cw, wty) = match ty {
                    Some(t) => {
                        let (ct, sort) = self.check_type(ctx, t)?;
                        if sort != Sort::Type {
                            return Err(Diagnostic::new(
                                Code::NotType,
                                t.span.clone(),
                                "paths live in a type".to_string(),
                            ));
                        }
                        let tv = self.val(ctx, &ct);
                        (self.check(ctx, w, &tv)?, tv)
                    }
                    None => self.infer(ctx, w)?,
                };
                let wv = self.val(ctx, &cw);
                Ok((
                    Expr::new(
                        Refl { ty: None, term: Some(cw) },
                        e.span.clone(),
                    ),
                    Rc::new(Value::IdV { ty: wty, lhs: wv.clone(), rhs: wv }),
                ))
            }
            Refl { ty: Some(_), term: None } => unreachable!("refl with type but no term"),
            IndPath { ty, base, motive, refl_case, target, path } => {
                let (cty, sort) = self.check_type(ctx, ty)?;
                if sort != Sort::Type {
                    return Err(Diagnostic::new(
                        Code::NotType,
                        ty.span.clone(),
                        "path induction eliminates paths in a type".to_string(),
                    ));
                }
                let a_ty = self.val(ctx, &cty);
                let cbase = self.check(ctx, base, &a_ty)?;
                let base_v = self.val(ctx, &cbase);
                let motive_ty = self.j_motive_ty(&a_ty, &base_v);
                let cmotive = self.check(ctx, motive, &motive_ty)?;
                let motive_v = self.val(ctx, &cmotive);
                let refl_ty = do_app(
                    self.genv,
                    &ctx.tcx,
                    do_app(self.genv, &ctx.tcx, motive_v.clone(), base_v.clone()),
                    Rc::new(Value::ReflV(base_v.clone())),
                );
                let crefl = self.check(ctx, refl_case, &refl_ty)?;
                let ctarget = self.check(ctx, target, &a_ty)?;
                let target_v = self.val(ctx, &ctarget);
                let path_ty = Rc::new(Value::IdV {
                    ty: a_ty.clone(),
                    lhs: base_v,
                    rhs: target_v.clone(),
                });
                let cpath = self.check(ctx, path, &path_ty)?;
                let path_v = self.val(ctx, &cpath);
                let out_ty = do_app(
                    self.genv,
                    &ctx.tcx,
                    do_app(self.genv, &ctx.tcx, motive_v, target_v),
                    path_v,
                );
                Ok((
                    Expr::new(
                        IndPath {
                            ty: cty,
                            base: cbase,
                            motive: cmotive,
                            refl_case: crefl,
                            target: ctarget,
                            path: cpath,
                        },
                        e.span.clone(),
                    ),
                    out_ty,
                ))
            }
            Refinement { ty, constraints } => {
                let (cty, sort) = self.check_type(ctx, ty)?;
                if sort != Sort::Type {
                    return Err(Diagnostic::new(
                        Code::NotType,
                        ty.span.clone(),
                        "boundary constraints refine a type".to_string(),
                    ));
                }
                let carrier = self.val(ctx, &cty);
                let mut ccons = Vec::new();
                let mut arm_vals: Vec<(Tope, Rc<Expr>, Span)> = Vec::new();
                for (phi, a) in constraints {
                    let cphi = self.expect_tope(ctx, phi)?;
                    let phi_t = eval::as_tope(self.genv, &ctx.tcx, self.val(ctx, &cphi));
                    let mut actx = ctx.clone();
                    actx.tcx = actx.tcx.with_hyp(phi_t.clone());
                    let ca = self.check(&actx, a, &carrier)?;
                    arm_vals.push((phi_t, ca.clone(), a.span.clone()));
                    ccons.push((cphi, ca));
                }
                // Arms must agree wherever their constraints overlap.
                for i in 0..arm_vals.len() {
                    for j in (i + 1)..arm_vals.len() {
                        let (ti, ci, _) = &arm_vals[i];
                        let (tj, cj, sj) = &arm_vals[j];
                        let mut octx = ctx.clone();
                        octx.tcx = octx.tcx.with_hyp(ti.clone()).with_hyp(tj.clone());
                        if !octx.tcx.satisfiable() {
                            continue;
                        }
                        let vi = self.val(&octx, ci);
                        let vj = self.val(&octx, cj);
                        if !equal::equal_terms(
                            self.genv,
                            &octx.tcx,
                            octx.lvl(),
                            &carrier,
                            &vi,
                            &vj,
                        ) {
                            return Err(Diagnostic::new(
                                Code::Boundary,
                                sj.clone(),
                                "overlapping boundary constraints disagree".to_string(),
                            )
                            .with_note("on", format!(
                                "{} ∧ {}",
                                self.show_tope(ctx, ti),
                                self.show_tope(ctx, tj)
                            ))
                            .with_note("first", self.show(&octx, &vi))
                            .with_note("second", self.show(&octx, &vj)));
                        }
                    }
                }
                Ok((
                    Expr::new(
                        Refinement { ty: cty, constraints: ccons },
                        e.span.clone(),
                    ),
                    Rc::new(Value::Universe),
                ))
            }
            RecOr(_) => Err(Diagnostic::new(
                Code::Infer,
                e.span.clone(),
                "a case split by constraints needs an expected type".to_string(),
            )),
            RecBot => Err(Diagnostic::new(
                Code::Infer,
                e.span.clone(),
                "the empty-case eliminator needs an expected type".to_string(),
            )),
            Pair(..) => Err(Diagnostic::new(
                Code::Infer,
                e.span.clone(),
                "cannot infer the type of a bare pair; check it against a \
                 pair type or a product cube"
                    .to_string(),
            )),
            Ascription(inner, t) => {
                let (ct, _sort) = self.check_type(ctx, t)?;
                let tv = self.val(ctx, &ct);
                let ci = self.check(ctx, inner, &tv)?;
                Ok((ci, tv))
            }
            Hole => Err(Diagnostic::new(
                Code::Hole,
                e.span.clone(),
                "hole of unknown type".to_string(),
            )),
            Var(n) => self.infer_var(ctx, n, &e.span),
            BoundVar(..) | GlobalRef(..) | PointPair(..) | PointFirst(..)
            | PointSecond(..) => {
                unreachable!("core-only form in surface syntax")
            }
        }
    }

    fn infer_var(&self, ctx: &Ctx, name: &str, span: &Span) -> Infer {
        if let Some(entry) = ctx.scopes.iter().rev().find(|s| s.name == name) {
            let idx = ctx.lvl() - 1 - entry.lvl;
            let mut core = Expr::new(
                ExprKind::BoundVar(idx, ctx.names[entry.lvl].clone()),
                span.clone(),
            );
            for step in &entry.steps {
                let kind = match (entry.point, step) {
                    (true, 0) => ExprKind::PointFirst(core),
                    (true, _) => ExprKind::PointSecond(core),
                    (false, 0) => ExprKind::First(core),
                    (false, _) => ExprKind::Second(core),
                };
                core = Expr::new(kind, span.clone());
            }
            return Ok((core, entry.ty.clone()));
        }
        if let Some(sd) = self.genv.section_def(name) {
            let env: Env = ctx.env[..sd.tele_len].to_vec();
            let ty = eval::eval(self.genv, &ctx.tcx, &env, &sd.ty_core);
            return Ok((
                Expr::new(ExprKind::GlobalRef(name.to_string()), span.clone()),
                ty,
            ));
        }
        if let Some(entry) = self.genv.global(name) {
            return Ok((
                Expr::new(ExprKind::GlobalRef(name.to_string()), span.clone()),
                entry.ty.clone(),
            ));
        }
        Err(Diagnostic::new(
            Code::Unbound,
            span.clone(),
            format!("unbound name '{}'", name),
        ))
    }

    /// The skeleton of the cube a point's type lives over; errors if the
    /// type is not cube-sorted.
    fn point_skeleton(
        &self,
        ctx: &Ctx,
        ty: &Rc<Value>,
        span: &Span,
    ) -> Result<Rc<Value>, Diagnostic> {
        let w = unfold_all(self.genv, &ctx.tcx, ty.clone());
        if !w.is_cube_sorted() {
            return Err(Diagnostic::new(
                Code::Point,
                span.clone(),
                format!("expected a point, found a value of {}", self.show(ctx, ty)),
            ));
        }
        Ok(equal::cube_skeleton(self.genv, &ctx.tcx, &w))
    }

    // -----------------------------------------------------------------
    // checking
    // -----------------------------------------------------------------

    pub fn check(&self, ctx: &Ctx, e: &Expr, expected: &Rc<Value>) -> Check {
        let expected_w = unfold_all(self.genv, &ctx.tcx, expected.clone());

        // A boundary-refined expectation: check against the carrier, then
        // require agreement with each constraint under its tope.
        if let Value::RefineV { ty: carrier, arms } = &*expected_w {
            let core = self.check(ctx, e, carrier)?;
            let v = self.val(ctx, &core);
            for (phi, arm) in arms {
                let under = ctx.tcx.with_hyp(phi.clone());
                if !under.satisfiable() {
                    continue;
                }
                let want = apply0(self.genv, &under, arm);
                if !equal::equal_terms(self.genv, &under, ctx.lvl(), carrier, &v, &want)
                {
                    let mut uctx = ctx.clone();
                    uctx.tcx = under.clone();
                    return Err(Diagnostic::new(
                        Code::Boundary,
                        e.span.clone(),
                        "value disagrees with the required boundary".to_string(),
                    )
                    .with_note("under", self.show_tope(ctx, phi))
                    .with_note("required", self.show(&uctx, &want))
                    .with_note("actual", self.show(&uctx, &v)));
                }
            }
            return Ok(core);
        }

        // A cube-sorted expectation: elaborate as a point, then discharge
        // the shape constraint.
        if expected_w.is_cube_sorted() {
            let sk = equal::cube_skeleton(self.genv, &ctx.tcx, &expected_w);
            let core = self.check_point_skeleton(ctx, e, &sk)?;
            let pv = eval::as_point(self.genv, &ctx.tcx, self.val(ctx, &core));
            let phi = equal::domain_tope(self.genv, &ctx.tcx, &expected_w, &pv);
            if !ctx.tcx.entails(&phi) {
                return Err(self.tope_failure(
                    ctx,
                    &e.span,
                    &phi,
                    "the point lies outside the required shape",
                ));
            }
            return Ok(core);
        }

        match (&e.kind, &*expected_w) {
            (
                ExprKind::Lambda { binder, domain, body },
                Value::PiV { domain: dv, cod, .. },
            ) => {
                if let Some(d) = domain {
                    let (cd, _sort) = self.check_type(ctx, d)?;
                    let given = self.val(ctx, &cd);
                    if !equal::equal_types(self.genv, &ctx.tcx, ctx.lvl(), &given, dv) {
                        return Err(Diagnostic::new(
                            Code::TypeMismatch,
                            d.span.clone(),
                            format!(
                                "binder annotation {} disagrees with the expected \
                                 domain {}",
                                self.show(ctx, &given),
                                self.show(ctx, dv)
                            ),
                        ));
                    }
                }
                let dom_core = quote(self.genv, &ctx.tcx, &ctx.names, dv);
                let cube = unfold_all(self.genv, &ctx.tcx, dv.clone()).is_cube_sorted();
                let ctx2 = if cube {
                    self.bind_point(ctx, binder, dv.clone(), &e.span)?
                } else {
                    self.bind_term(ctx, binder, dv.clone(), &e.span)?
                };
                let arg = ctx2.env.last().expect("binder slot").clone();
                let body_ty = apply(self.genv, &ctx2.tcx, cod, arg);
                let cbody = self.check(&ctx2, body, &body_ty)?;
                Ok(Expr::new(
                    ExprKind::Lambda {
                        binder: binder.clone(),
                        domain: Some(dom_core),
                        body: cbody,
                    },
                    e.span.clone(),
                ))
            }
            (ExprKind::Lambda { .. }, _) => Err(Diagnostic::new(
                Code::TypeMismatch,
                e.span.clone(),
                format!(
                    "checking a function against a non-function type {}",
                    self.show(ctx, expected)
                ),
            )),
            (ExprKind::Pair(a, b), Value::SigmaV { domain, cod, .. }) => {
                let ca = self.check(ctx, a, domain)?;
                let av = self.val(ctx, &ca);
                let snd_ty = apply(self.genv, &ctx.tcx, cod, av);
                let cb = self.check(ctx, b, &snd_ty)?;
                Ok(Expr::new(ExprKind::Pair(ca, cb), e.span.clone()))
            }
            (ExprKind::Refl { ty, term }, Value::IdV { ty: t, lhs, rhs }) => {
                let cw = match (ty, term) {
                    (None, None) => quote(self.genv, &ctx.tcx, &ctx.names, lhs),
                    (None, Some(w)) => self.check(ctx, w, t)?,
                    (Some(anno), Some(w)) => {
                        let (canno, sort) = self.check_type(ctx, anno)?;
                        if sort != Sort::Type {
                            return Err(Diagnostic::new(
                                Code::NotType,
                                anno.span.clone(),
                                "paths live in a type".to_string(),
                            ));
                        }
                        let av = self.val(ctx, &canno);
                        if !equal::equal_types(self.genv, &ctx.tcx, ctx.lvl(), &av, t) {
                            return Err(Diagnostic::new(
                                Code::TypeMismatch,
                                anno.span.clone(),
                                format!(
                                    "refl annotation {} disagrees with the path \
                                     type over {}",
                                    self.show(ctx, &av),
                                    self.show(ctx, t)
                                ),
                            ));
                        }
                        self.check(ctx, w, t)?
                    }
                    (Some(_), None) => unreachable!("refl with type but no term"),
                };
                let wv = self.val(ctx, &cw);
                let leq = equal::equal_terms(self.genv, &ctx.tcx, ctx.lvl(), t, lhs, &wv);
                let req = equal::equal_terms(self.genv, &ctx.tcx, ctx.lvl(), t, rhs, &wv);
                if !(leq && req) {
                    return Err(Diagnostic::new(
                        Code::TypeMismatch,
                        e.span.clone(),
                        "refl only proves a path whose endpoints are equal by \
                         computation"
                            .to_string(),
                    )
                    .with_note("left endpoint", self.show(ctx, lhs))
                    .with_note("right endpoint", self.show(ctx, rhs))
                    .with_note("witness", self.show(ctx, &wv)));
                }
                Ok(Expr::new(
                    ExprKind::Refl { ty: None, term: Some(cw) },
                    e.span.clone(),
                ))
            }
            (ExprKind::RecOr(branches), _) => {
                let mut cbranches = Vec::new();
                let mut arm_vals: Vec<(Tope, Rc<Expr>, Span)> = Vec::new();
                let mut coverage = Tope::Bot;
                for (phi, a) in branches {
                    let cphi = self.expect_tope(ctx, phi)?;
                    let phi_t =
                        eval::as_tope(self.genv, &ctx.tcx, self.val(ctx, &cphi));
                    coverage = Tope::or(coverage, phi_t.clone());
                    let mut actx = ctx.clone();
                    actx.tcx = actx.tcx.with_hyp(phi_t.clone());
                    let ca = self.check(&actx, a, expected)?;
                    arm_vals.push((phi_t, ca.clone(), a.span.clone()));
                    cbranches.push((cphi, ca));
                }
                if !ctx.tcx.entails(&coverage) {
                    return Err(self.tope_failure(
                        ctx,
                        &e.span,
                        &coverage,
                        "the case split does not cover this context",
                    ));
                }
                for i in 0..arm_vals.len() {
                    for j in (i + 1)..arm_vals.len() {
                        let (ti, ci, _) = &arm_vals[i];
                        let (tj, cj, sj) = &arm_vals[j];
                        let mut octx = ctx.clone();
                        octx.tcx = octx.tcx.with_hyp(ti.clone()).with_hyp(tj.clone());
                        if !octx.tcx.satisfiable() {
                            continue;
                        }
                        let vi = self.val(&octx, ci);
                        let vj = self.val(&octx, cj);
                        if !equal::equal_terms(
                            self.genv,
                            &octx.tcx,
                            octx.lvl(),
                            expected,
                            &vi,
                            &vj,
                        ) {
                            return Err(Diagnostic::new(
                                Code::Boundary,
                                sj.clone(),
                                "overlapping case branches disagree".to_string(),
                            )
                            .with_note("on", format!(
                                "{} ∧ {}",
                                self.show_tope(ctx, ti),
                                self.show_tope(ctx, tj)
                            ))
                            .with_note("first", self.show(&octx, &vi))
                            .with_note("second", self.show(&octx, &vj)));
                        }
                    }
                }
                Ok(Expr::new(ExprKind::RecOr(cbranches), e.span.clone()))
            }
            (ExprKind::RecBot, _) => {
                if ctx.tcx.satisfiable() {
                    return Err(self.tope_failure(
                        ctx,
                        &e.span,
                        &Tope::Bot,
                        "the empty-case eliminator needs an impossible context",
                    ));
                }
                Ok(Expr::new(ExprKind::RecBot, e.span.clone()))
            }
            (ExprKind::Hole, _) => Err(Diagnostic::new(
                Code::Hole,
                e.span.clone(),
                "hole".to_string(),
            )
            .with_note("expected type", self.show(ctx, expected))),
            _ => {
                let (core, ty) = self.infer(ctx, e)?;
                if equal::subtype(self.genv, &ctx.tcx, ctx.lvl(), &ty, expected) {
                    Ok(core)
                } else {
                    Err(Diagnostic::new(
                        Code::TypeMismatch,
                        e.span.clone(),
                        "type mismatch".to_string(),
                    )
                    .with_note("expected", self.show(ctx, expected))
                    .with_note("found", self.show(ctx, &ty)))
                }
            }
        }
    }

    /// Elaborate a point against a raw cube skeleton (constraints are the
    /// caller's responsibility).
    fn check_point_skeleton(&self, ctx: &Ctx, e: &Expr, skel: &Rc<Value>) -> Check {
        match (&e.kind, &**skel) {
            (ExprKind::Pair(a, b), Value::CubeProduct(c1, c2)) => {
                let ca = self.check_point_skeleton(ctx, a, c1)?;
                let cb = self.check_point_skeleton(ctx, b, c2)?;
                Ok(Expr::new(ExprKind::PointPair(ca, cb), e.span.clone()))
            }
            (ExprKind::Pair(..), _) => Err(Diagnostic::new(
                Code::TypeMismatch,
                e.span.clone(),
                "a pair of points against a non-product cube".to_string(),
            )),
            (ExprKind::Ascription(inner, t), _) => {
                let (ct, sort) = self.check_type(ctx, t)?;
                if sort != Sort::Cube {
                    return Err(Diagnostic::new(
                        Code::TypeMismatch,
                        t.span.clone(),
                        "a point can only be ascribed a cube or shape".to_string(),
                    ));
                }
                let tv = self.val(ctx, &ct);
                let ci = self.check(ctx, inner, &tv)?;
                let sk2 = self.point_skeleton(ctx, &tv, &t.span)?;
                if !skeletons_equal(&sk2, skel) {
                    return Err(Diagnostic::new(
                        Code::TypeMismatch,
                        e.span.clone(),
                        "ascribed cube does not match the expected cube".to_string(),
                    ));
                }
                Ok(ci)
            }
            _ => {
                let (core, ty) = self.infer(ctx, e)?;
                let sk2 = self.point_skeleton(ctx, &ty, &e.span)?;
                if !skeletons_equal(&sk2, skel) {
                    return Err(Diagnostic::new(
                        Code::TypeMismatch,
                        e.span.clone(),
                        "point of a different cube".to_string(),
                    ));
                }
                Ok(core)
            }
        }
    }

    /// The type of a path-induction motive over `a_ty` based at `base`:
    /// `(x : A) → (base = x) → U`.
    fn j_motive_ty(&self, a_ty: &Rc<Value>, base: &Rc<Value>) -> Rc<Value> {
        use ExprKind::*;
        let bv = |i: usize, n: &str| Expr::synthetic(BoundVar(i, n.to_string()));
        let inner = Expr::synthetic(Pi {
            binder: Pattern::Wildcard,
            domain: Expr::synthetic(IdType {
                ty: Some(bv(2, "A")),
                lhs: bv(1, "a"),
                rhs: bv(0, "x"),
            }),
            codomain: Expr::synthetic(Universe),
        });
        Rc::new(Value::PiV {
            binder: Pattern::Var("x".to_string()),
            domain: a_ty.clone(),
            cod: Closure {
                env: vec![a_ty.clone(), base.clone()],
                body: inner,
            },
        })
    }
}
