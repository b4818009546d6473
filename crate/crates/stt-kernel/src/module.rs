//! Module-level state: global definitions and postulates, plus the stack
//! of open section frames with their variable telescopes and in-section
//! definitions.
//!
//! While a section is open, its variables form a telescope of bound
//! levels `0 .. telescope_len()`; every expression elaborated inside the
//! section lives over (a prefix of) that telescope. An in-section
//! definition stores its cores over the telescope it saw, and is
//! generalized over the variables it actually uses when the section ends.

use crate::ast::{Declaration, Expr, ExprKind, Name, Pattern, SourceModule};
use crate::diagnostics::{Code, DeclStatus, Diagnostic, RunReport};
use crate::kernel::check::{Ctx, Elab, Sort};
use crate::kernel::eval::{self, TopeCtx};
use crate::kernel::value::{Env, Lvl, Value};
use crate::parser;
use crate::span::Span;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalKind {
    Define,
    Postulate,
}

#[derive(Clone, Debug)]
pub struct DefBody {
    /// Closed core expression of the body.
    pub core: Rc<Expr>,
    /// Its evaluated form, used when a folded reference is unfolded.
    pub value: Rc<Value>,
}

#[derive(Clone, Debug)]
pub struct GlobalEntry {
    /// Evaluated (closed) type.
    pub ty: Rc<Value>,
    /// Closed core expression of the type.
    pub ty_core: Rc<Expr>,
    /// Body, absent for postulates.
    pub def: Option<DefBody>,
    pub kind: GlobalKind,
    pub span: Span,
}

/// One `#variable` of an open section frame. Its type core is elaborated
/// over the telescope prefix below it (so its own level equals the length
/// of that prefix). `deps` is the transitively closed set of telescope
/// levels its type mentions.
#[derive(Clone, Debug)]
pub struct FrameVar {
    pub name: Name,
    pub ty_core: Rc<Expr>,
    pub deps: BTreeSet<Lvl>,
    pub span: Span,
}

/// A definition made while its section frame is open.
#[derive(Clone, Debug)]
pub struct SectionDef {
    pub name: Name,
    /// Type and body cores over the first `tele_len` telescope levels.
    pub ty_core: Rc<Expr>,
    pub body_core: Rc<Expr>,
    pub tele_len: usize,
    /// Telescope levels used by type, body, or a `uses` declaration,
    /// transitively closed over referenced section definitions and over
    /// variable type dependencies.
    pub used: BTreeSet<Lvl>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub name: Name,
    pub span: Span,
    /// Telescope length when this frame opened; its own variables occupy
    /// levels `start_level ..`.
    pub start_level: Lvl,
    pub vars: Vec<FrameVar>,
    pub defs: Vec<SectionDef>,
}

impl Frame {
    pub fn end_level(&self) -> Lvl {
        self.start_level + self.vars.len()
    }
}

#[derive(Debug, Default)]
pub struct GlobalEnv {
    pub globals: HashMap<Name, GlobalEntry>,
    /// Registration order of globals, for stable reporting.
    pub order: Vec<Name>,
    pub frames: Vec<Frame>,
}

impl GlobalEnv {
    pub fn new() -> GlobalEnv {
        GlobalEnv::default()
    }

    /// Current telescope length (all open frames).
    pub fn telescope_len(&self) -> usize {
        self.frames.last().map(|f| f.end_level()).unwrap_or(0)
    }

    pub fn global(&self, name: &str) -> Option<&GlobalEntry> {
        self.globals.get(name)
    }

    /// In-section definition by name, innermost frame first.
    pub fn section_def(&self, name: &str) -> Option<&SectionDef> {
        self.frames
            .iter()
            .rev()
            .find_map(|f| f.defs.iter().find(|d| d.name == name))
    }

    /// Telescope variable by name, innermost first; returns its level.
    pub fn telescope_var(&self, name: &str) -> Option<(Lvl, &FrameVar)> {
        for frame in self.frames.iter().rev() {
            for (i, v) in frame.vars.iter().enumerate().rev() {
                if v.name == name {
                    return Some((frame.start_level + i, v));
                }
            }
        }
        None
    }

    /// Telescope variable at an absolute level.
    pub fn var_at(&self, lvl: Lvl) -> &FrameVar {
        for frame in &self.frames {
            if lvl < frame.end_level() {
                return &frame.vars[lvl - frame.start_level];
            }
        }
        unreachable!("telescope level {} out of range", lvl)
    }

    /// Whether `name` is taken by a global or an in-section definition
    /// (telescope variables may shadow without conflict).
    pub fn defines_name(&self, name: &str) -> bool {
        self.globals.contains_key(name) || self.section_def(name).is_some()
    }

    /// The definition body behind a folded reference, if it has one.
    /// `tele` is the telescope environment captured at the reference.
    pub fn unfold(&self, name: &str, tele: &Env, tcx: &TopeCtx) -> Option<Rc<Value>> {
        if let Some(sd) = self.section_def(name) {
            let env: Env = tele[..sd.tele_len].to_vec();
            Some(eval::eval(self, tcx, &env, &sd.body_core))
        } else {
            self.globals
                .get(name)
                .and_then(|e| e.def.as_ref())
                .map(|d| d.value.clone())
        }
    }
}

// ---------------------------------------------------------------------------
// telescope usage analysis
// ---------------------------------------------------------------------------

/// Telescope levels referenced by a core elaborated over a telescope of
/// length `tele_len`, transitively through referenced in-section
/// definitions.
fn used_levels(genv: &GlobalEnv, core: &Expr, tele_len: usize) -> BTreeSet<Lvl> {
    fn walk(genv: &GlobalEnv, e: &Expr, tele_len: usize, d: usize, out: &mut BTreeSet<Lvl>) {
        use ExprKind::*;
        match &e.kind {
            BoundVar(idx, _) => {
                if *idx >= d {
                    out.insert(tele_len + d - 1 - idx);
                }
            }
            GlobalRef(g) => {
                if let Some(sd) = genv.section_def(g) {
                    out.extend(sd.used.iter().copied());
                }
            }
            Universe | UniverseCube | UniverseTope | CubeUnit | Cube2 | PointStar
            | PointZero | PointOne | TopeTop | TopeBottom | RecBot | Hole | Var(_) => {}
            CubeProduct(a, b)
            | PointPair(a, b)
            | TopeAnd(a, b)
            | TopeOr(a, b)
            | TopeEqT(a, b)
            | TopeLeq(a, b)
            | App(a, b)
            | Pair(a, b)
            | Ascription(a, b) => {
                walk(genv, a, tele_len, d, out);
                walk(genv, b, tele_len, d, out);
            }
            PointFirst(a) | PointSecond(a) | First(a) | Second(a) => {
                walk(genv, a, tele_len, d, out)
            }
            Shape { cube, tope, .. } => {
                walk(genv, cube, tele_len, d, out);
                walk(genv, tope, tele_len, d + 1, out);
            }
            Pi { domain, codomain, .. } | Sigma { domain, codomain, .. } => {
                walk(genv, domain, tele_len, d, out);
                walk(genv, codomain, tele_len, d + 1, out);
            }
            Lambda { domain, body, .. } => {
                if let Some(t) = domain {
                    walk(genv, t, tele_len, d, out);
                }
                walk(genv, body, tele_len, d + 1, out);
            }
            IdType { ty, lhs, rhs } => {
                if let Some(t) = ty {
                    walk(genv, t, tele_len, d, out);
                }
                walk(genv, lhs, tele_len, d, out);
                walk(genv, rhs, tele_len, d, out);
            }
            Refl { ty, term } => {
                if let Some(t) = ty {
                    walk(genv, t, tele_len, d, out);
                }
                if let Some(t) = term {
                    walk(genv, t, tele_len, d, out);
                }
            }
            IndPath { ty, base, motive, refl_case, target, path } => {
                for part in [ty, base, motive, refl_case, target, path] {
                    walk(genv, part, tele_len, d, out);
                }
            }
            Refinement { ty, constraints } => {
                walk(genv, ty, tele_len, d, out);
                for (phi, a) in constraints {
                    walk(genv, phi, tele_len, d, out);
                    walk(genv, a, tele_len, d, out);
                }
            }
            RecOr(branches) => {
                for (phi, a) in branches {
                    walk(genv, phi, tele_len, d, out);
                    walk(genv, a, tele_len, d, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(genv, core, tele_len, 0, &mut out);
    out
}

/// Close a level set under the (precomputed, already closed) type
/// dependencies of the telescope variables it mentions.
fn close_deps(genv: &GlobalEnv, set: &mut BTreeSet<Lvl>) {
    let direct: Vec<Lvl> = set.iter().copied().collect();
    for l in direct {
        set.extend(genv.var_at(l).deps.iter().copied());
    }
}

// ---------------------------------------------------------------------------
// section-end generalization
// ---------------------------------------------------------------------------

/// New de Bruijn index for telescope level `l` inside a core that now
/// sits under `d` local binders plus `retained.len()` freshly introduced
/// binders over the retained frame variables. Levels below `frame_start`
/// stay in the (parent) telescope.
fn reindex(l: Lvl, d: usize, retained: &[Lvl], frame_start: Lvl) -> usize {
    let m = retained.len();
    if l >= frame_start {
        let pos = retained
            .binary_search(&l)
            .unwrap_or_else(|_| unreachable!("retained set not dependency-closed"));
        d + (m - 1 - pos)
    } else {
        d + m + (frame_start - 1 - l)
    }
}

/// Rewrite a core expression at section end: retained frame variables
/// become the innermost binders, outer telescope references shift, and
/// references to sibling definitions of the closing frame become
/// applications to their own retained variables.
fn rewrite_core(
    e: &Expr,
    d: usize,
    retained: &[Lvl],
    frame_start: Lvl,
    own_tele_len: usize,
    sibling_retained: &HashMap<Name, Vec<Lvl>>,
    var_name: &dyn Fn(Lvl) -> Name,
) -> Rc<Expr> {
    use ExprKind::*;
    let go = |x: &Expr, dd: usize| {
        rewrite_core(x, dd, retained, frame_start, own_tele_len, sibling_retained, var_name)
    };
    let kind = match &e.kind {
        BoundVar(idx, name) => {
            if *idx < d {
                BoundVar(*idx, name.clone())
            } else {
                let l = own_tele_len + d - 1 - idx;
                BoundVar(reindex(l, d, retained, frame_start), name.clone())
            }
        }
        GlobalRef(g) => match sibling_retained.get(g) {
            Some(args) => {
                let mut acc = Expr::new(GlobalRef(g.clone()), e.span.clone());
                for l in args {
                    let arg = Expr::new(
                        BoundVar(reindex(*l, d, retained, frame_start), var_name(*l)),
                        e.span.clone(),
                    );
                    acc = Expr::new(App(acc, arg), e.span.clone());
                }
                return acc;
            }
            None => GlobalRef(g.clone()),
        },
        Universe | UniverseCube | UniverseTope | CubeUnit | Cube2 | PointStar
        | PointZero | PointOne | TopeTop | TopeBottom | RecBot | Hole | Var(_) => {
            e.kind.clone()
        }
        CubeProduct(a, b) => CubeProduct(go(a, d), go(b, d)),
        PointPair(a, b) => PointPair(go(a, d), go(b, d)),
        PointFirst(a) => PointFirst(go(a, d)),
        PointSecond(a) => PointSecond(go(a, d)),
        TopeAnd(a, b) => TopeAnd(go(a, d), go(b, d)),
        TopeOr(a, b) => TopeOr(go(a, d), go(b, d)),
        TopeEqT(a, b) => TopeEqT(go(a, d), go(b, d)),
        TopeLeq(a, b) => TopeLeq(go(a, d), go(b, d)),
        Shape { binder, cube, tope } => Shape {
            binder: binder.clone(),
            cube: go(cube, d),
            tope: go(tope, d + 1),
        },
        Pi { binder, domain, codomain } => Pi {
            binder: binder.clone(),
            domain: go(domain, d),
            codomain: go(codomain, d + 1),
        },
        Sigma { binder, domain, codomain } => Sigma {
            binder: binder.clone(),
            domain: go(domain, d),
            codomain: go(codomain, d + 1),
        },
        Lambda { binder, domain, body } => Lambda {
            binder: binder.clone(),
            domain: domain.as_ref().map(|t| go(t, d)),
            body: go(body, d + 1),
        },
        App(a, b) => App(go(a, d), go(b, d)),
        Pair(a, b) => Pair(go(a, d), go(b, d)),
        First(a) => First(go(a, d)),
        Second(a) => Second(go(a, d)),
        IdType { ty, lhs, rhs } => IdType {
            ty: ty.as_ref().map(|t| go(t, d)),
            lhs: go(lhs, d),
            rhs: go(rhs, d),
        },
        Refl { ty, term } => Refl {
            ty: ty.as_ref().map(|t| go(t, d)),
            term: term.as_ref().map(|t| go(t, d)),
        },
        IndPath { ty, base, motive, refl_case, target, path } => IndPath {
            ty: go(ty, d),
            base: go(base, d),
            motive: go(motive, d),
            refl_case: go(refl_case, d),
            target: go(target, d),
            path: go(path, d),
        },
        Refinement { ty, constraints } => Refinement {
            ty: go(ty, d),
            constraints: constraints
                .iter()
                .map(|(p, a)| (go(p, d), go(a, d)))
                .collect(),
        },
        RecOr(branches) => RecOr(
            branches.iter().map(|(p, a)| (go(p, d), go(a, d))).collect(),
        ),
    };
    Expr::new(kind, e.span.clone())
}

// ---------------------------------------------------------------------------
// batch checking session
// ---------------------------------------------------------------------------

/// A batch checking session: files are loaded in order into one growing
/// global environment; failures are recorded and checking continues with
/// the next declaration.
pub struct Session {
    pub genv: GlobalEnv,
    pub report: RunReport,
    /// Interval-variable budget per context.
    pub limit: usize,
}

impl Session {
    pub fn new(limit: usize) -> Session {
        Session { genv: GlobalEnv::new(), report: RunReport::default(), limit }
    }

    /// Rebuild the typing context of the current telescope.
    fn telescope_ctx(&self) -> Result<Ctx, Diagnostic> {
        let elab = Elab::new(&self.genv);
        let mut ctx = Ctx::new(self.limit);
        for frame in &self.genv.frames {
            for var in &frame.vars {
                let ty_v = elab.val(&ctx, &var.ty_core);
                ctx = elab.bind_term(
                    &ctx,
                    &Pattern::Var(var.name.clone()),
                    ty_v,
                    &var.span,
                )?;
            }
        }
        Ok(ctx)
    }

    /// Elaborate and record one declaration; errors are reported, not
    /// propagated.
    pub fn load_module(&mut self, m: &SourceModule) {
        for decl in &m.decls {
            match decl {
                Declaration::Define { name, name_span, uses, params, result, body } => {
                    let full_ty = parser::fold_pi(params, result.clone());
                    let full_body = parser::fold_lambda(params, body.clone());
                    let outcome = self.run_define(
                        name,
                        name_span,
                        uses,
                        &full_ty,
                        &full_body,
                    );
                    self.record(&m.file, name, outcome);
                }
                Declaration::Postulate { name, name_span, uses, params, result } => {
                    let full_ty = parser::fold_pi(params, result.clone());
                    let outcome = self.run_postulate(name, name_span, uses, &full_ty);
                    self.record(&m.file, name, outcome);
                }
                Declaration::SectionBegin { name, span } => {
                    self.genv.frames.push(Frame {
                        name: name.clone(),
                        span: span.clone(),
                        start_level: self.genv.telescope_len(),
                        vars: Vec::new(),
                        defs: Vec::new(),
                    });
                }
                Declaration::SectionEnd { name, span } => {
                    if let Err(d) = self.run_section_end(name, span) {
                        self.report.diagnostics.push(d);
                    }
                }
                Declaration::Variables { names, ty, span } => {
                    if let Err(d) = self.run_variables(names, ty, span) {
                        self.report.diagnostics.push(d);
                    }
                }
            }
        }
    }

    fn record(&mut self, file: &str, name: &str, outcome: Result<(), Diagnostic>) {
        let ok = match outcome {
            Ok(()) => true,
            Err(d) => {
                self.report.diagnostics.push(d);
                false
            }
        };
        self.report.statuses.push(DeclStatus {
            file: file.to_string(),
            name: name.to_string(),
            ok,
        });
        self.report.checked += 1;
        if !ok {
            self.report.failed += 1;
        }
    }

    fn run_define(
        &mut self,
        name: &str,
        name_span: &Span,
        uses: &[Name],
        full_ty: &Rc<Expr>,
        full_body: &Rc<Expr>,
    ) -> Result<(), Diagnostic> {
        if self.genv.defines_name(name) {
            return Err(Diagnostic::new(
                Code::Dup,
                name_span.clone(),
                format!("the name '{}' is already defined", name),
            ));
        }
        let ctx = self.telescope_ctx()?;
        let elab = Elab::new(&self.genv);
        let (cty, sort) = elab.check_type(&ctx, full_ty)?;
        if sort == Sort::Tope {
            return Err(Diagnostic::new(
                Code::NotType,
                full_ty.span.clone(),
                "a tope is not a type; use a shape or a boundary refinement"
                    .to_string(),
            ));
        }
        let ty_v = elab.val(&ctx, &cty);
        let cbody = elab.check(&ctx, full_body, &ty_v)?;

        let in_section = !self.genv.frames.is_empty();
        if !in_section {
            if !uses.is_empty() {
                self.report.diagnostics.push(Diagnostic::new(
                    Code::UnusedUses,
                    name_span.clone(),
                    "a uses clause outside a section has no effect".to_string(),
                ));
            }
            let tcx = TopeCtx::new(self.limit);
            let value = eval::eval(&self.genv, &tcx, &Vec::new(), &cbody);
            self.genv.globals.insert(
                name.to_string(),
                GlobalEntry {
                    ty: ty_v,
                    ty_core: cty,
                    def: Some(DefBody { core: cbody, value }),
                    kind: GlobalKind::Define,
                    span: name_span.clone(),
                },
            );
            self.genv.order.push(name.to_string());
            return Ok(());
        }

        // Usage hygiene: every telescope variable the body needs beyond
        // what the type already mentions must be declared.
        let tele_len = self.genv.telescope_len();
        let mut ty_used = used_levels(&self.genv, &cty, tele_len);
        close_deps(&self.genv, &mut ty_used);
        let mut body_used = used_levels(&self.genv, &cbody, tele_len);
        close_deps(&self.genv, &mut body_used);
        let mut declared = BTreeSet::new();
        for u in uses {
            match self.genv.telescope_var(u) {
                Some((l, _)) => {
                    declared.insert(l);
                }
                None => {
                    return Err(Diagnostic::new(
                        Code::Uses,
                        name_span.clone(),
                        format!("unknown section variable '{}' in uses clause", u),
                    ));
                }
            }
        }
        let implicit: BTreeSet<Lvl> = body_used.difference(&ty_used).copied().collect();
        let missing: Vec<Lvl> = implicit.difference(&declared).copied().collect();
        if !missing.is_empty() {
            let names: Vec<&str> =
                missing.iter().map(|l| self.genv.var_at(*l).name.as_str()).collect();
            return Err(Diagnostic::new(
                Code::Uses,
                name_span.clone(),
                format!(
                    "the body uses section variables that its type does not \
                     mention; declare them with: uses ({})",
                    names.join(" ")
                ),
            ));
        }
        let extra: Vec<Lvl> = declared.difference(&implicit).copied().collect();
        if !extra.is_empty() {
            let names: Vec<&str> =
                extra.iter().map(|l| self.genv.var_at(*l).name.as_str()).collect();
            self.report.diagnostics.push(Diagnostic::new(
                Code::UnusedUses,
                name_span.clone(),
                format!("declared but not needed: uses ({})", names.join(" ")),
            ));
        }
        let mut used = ty_used;
        used.extend(body_used);
        used.extend(declared);
        close_deps(&self.genv, &mut used);
        let frame = self.genv.frames.last_mut().expect("inside a section");
        frame.defs.push(SectionDef {
            name: name.to_string(),
            ty_core: cty,
            body_core: cbody,
            tele_len,
            used,
            span: name_span.clone(),
        });
        Ok(())
    }

    fn run_postulate(
        &mut self,
        name: &str,
        name_span: &Span,
        uses: &[Name],
        full_ty: &Rc<Expr>,
    ) -> Result<(), Diagnostic> {
        if !self.genv.frames.is_empty() {
            return Err(Diagnostic::new(
                Code::Section,
                name_span.clone(),
                "postulates are not allowed inside a section; use #variable"
                    .to_string(),
            ));
        }
        if self.genv.defines_name(name) {
            return Err(Diagnostic::new(
                Code::Dup,
                name_span.clone(),
                format!("the name '{}' is already defined", name),
            ));
        }
        if !uses.is_empty() {
            self.report.diagnostics.push(Diagnostic::new(
                Code::UnusedUses,
                name_span.clone(),
                "a uses clause outside a section has no effect".to_string(),
            ));
        }
        let ctx = self.telescope_ctx()?;
        let elab = Elab::new(&self.genv);
        let (cty, sort) = elab.check_type(&ctx, full_ty)?;
        match sort {
            Sort::Cube => {
                return Err(Diagnostic::new(
                    Code::Point,
                    full_ty.span.clone(),
                    "cannot postulate a point of a cube; points must be \
                     constructed"
                        .to_string(),
                ));
            }
            Sort::Tope => {
                return Err(Diagnostic::new(
                    Code::NotType,
                    full_ty.span.clone(),
                    "a tope is not a type".to_string(),
                ));
            }
            Sort::Type => {}
        }
        let ty_v = elab.val(&ctx, &cty);
        if matches!(
            &*eval::unfold_all(&self.genv, &ctx.tcx, ty_v.clone()),
            Value::UniverseTope
        ) {
            return Err(Diagnostic::new(
                Code::Point,
                full_ty.span.clone(),
                "cannot postulate an abstract constraint; constraints must \
                 be built from ≡, ≤ and the connectives"
                    .to_string(),
            ));
        }
        self.genv.globals.insert(
            name.to_string(),
            GlobalEntry {
                ty: ty_v,
                ty_core: cty,
                def: None,
                kind: GlobalKind::Postulate,
                span: name_span.clone(),
            },
        );
        self.genv.order.push(name.to_string());
        Ok(())
    }

    fn run_variables(
        &mut self,
        names: &[(Name, Span)],
        ty: &Rc<Expr>,
        span: &Span,
    ) -> Result<(), Diagnostic> {
        if self.genv.frames.is_empty() {
            return Err(Diagnostic::new(
                Code::Section,
                span.clone(),
                "variable declarations belong inside a section".to_string(),
            ));
        }
        let elab = Elab::new(&self.genv);
        let mut ctx = self.telescope_ctx()?;
        let mut new_vars = Vec::new();
        for (name, nspan) in names {
            let (cty, sort) = elab.check_type(&ctx, ty)?;
            if sort != Sort::Type {
                return Err(Diagnostic::new(
                    Code::Section,
                    ty.span.clone(),
                    "section variables must range over types".to_string(),
                ));
            }
            let ty_v = elab.val(&ctx, &cty);
            if matches!(
                &*eval::unfold_all(&self.genv, &ctx.tcx, ty_v.clone()),
                Value::UniverseTope
            ) {
                return Err(Diagnostic::new(
                    Code::Section,
                    ty.span.clone(),
                    "a section variable cannot range over abstract constraints"
                        .to_string(),
                ));
            }
            let tele_len = ctx.lvl();
            let mut deps = used_levels(&self.genv, &cty, tele_len);
            close_deps(&self.genv, &mut deps);
            new_vars.push(FrameVar {
                name: name.clone(),
                ty_core: cty,
                deps,
                span: nspan.clone(),
            });
            ctx = elab.bind_term(&ctx, &Pattern::Var(name.clone()), ty_v, nspan)?;
        }
        let frame = self.genv.frames.last_mut().expect("inside a section");
        frame.vars.extend(new_vars);
        Ok(())
    }

    fn run_section_end(&mut self, name: &str, span: &Span) -> Result<(), Diagnostic> {
        let frame = match self.genv.frames.pop() {
            Some(f) => f,
            None => {
                return Err(Diagnostic::new(
                    Code::Section,
                    span.clone(),
                    "stray #end with no open section".to_string(),
                ));
            }
        };
        let mismatch = if frame.name != name {
            Some(Diagnostic::new(
                Code::Section,
                span.clone(),
                format!(
                    "section name mismatch: opened as '{}', closed as '{}'",
                    frame.name, name
                ),
            ))
        } else {
            None
        };

        let f_start = frame.start_level;
        let f_end = frame.end_level();
        let sibling_retained: HashMap<Name, Vec<Lvl>> = frame
            .defs
            .iter()
            .map(|d| {
                let r: Vec<Lvl> =
                    d.used.iter().copied().filter(|l| *l >= f_start).collect();
                (d.name.clone(), r)
            })
            .collect();
        let frame_var_names: Vec<Name> =
            frame.vars.iter().map(|v| v.name.clone()).collect();
        let genv = &self.genv;
        let var_name = |l: Lvl| -> Name {
            if l >= f_start && l < f_end {
                frame_var_names[l - f_start].clone()
            } else {
                // An outer-telescope variable: its display name.
                genv.var_at(l).name.clone()
            }
        };

        // Phase one: rewrite every definition of the closing frame.
        let mut promoted: Vec<SectionDef> = Vec::new();
        for def in &frame.defs {
            let retained = &sibling_retained[&def.name];
            let mut ty_core = rewrite_core(
                &def.ty_core,
                0,
                retained,
                f_start,
                def.tele_len,
                &sibling_retained,
                &var_name,
            );
            let mut body_core = rewrite_core(
                &def.body_core,
                0,
                retained,
                f_start,
                def.tele_len,
                &sibling_retained,
                &var_name,
            );
            // Wrap in binders over the retained variables, innermost last.
            for p in (0..retained.len()).rev() {
                let l = retained[p];
                let var = &frame.vars[l - f_start];
                let dom = rewrite_core(
                    &var.ty_core,
                    0,
                    &retained[..p],
                    f_start,
                    l,
                    &sibling_retained,
                    &var_name,
                );
                ty_core = Expr::new(
                    ExprKind::Pi {
                        binder: Pattern::Var(var.name.clone()),
                        domain: dom.clone(),
                        codomain: ty_core,
                    },
                    def.span.clone(),
                );
                body_core = Expr::new(
                    ExprKind::Lambda {
                        binder: Pattern::Var(var.name.clone()),
                        domain: Some(dom),
                        body: body_core,
                    },
                    def.span.clone(),
                );
            }
            let outer_used: BTreeSet<Lvl> =
                def.used.iter().copied().filter(|l| *l < f_start).collect();
            promoted.push(SectionDef {
                name: def.name.clone(),
                ty_core,
                body_core,
                tele_len: f_start,
                used: outer_used,
                span: def.span.clone(),
            });
        }

        // Phase two: hand them to the parent frame, or make them global.
        for def in promoted {
            if let Some(parent) = self.genv.frames.last_mut() {
                parent.defs.push(def);
            } else {
                let tcx = TopeCtx::new(self.limit);
                let ty = eval::eval(&self.genv, &tcx, &Vec::new(), &def.ty_core);
                let value =
                    eval::eval(&self.genv, &tcx, &Vec::new(), &def.body_core);
                self.genv.order.push(def.name.clone());
                self.genv.globals.insert(
                    def.name.clone(),
                    GlobalEntry {
                        ty,
                        ty_core: def.ty_core,
                        def: Some(DefBody { core: def.body_core, value }),
                        kind: GlobalKind::Define,
                        span: def.span,
                    },
                );
            }
        }

        match mismatch {
            Some(d) => Err(d),
            None => Ok(()),
        }
    }

    // -----------------------------------------------------------------
    // expression services (used by the command-line driver and tests)
    // -----------------------------------------------------------------

    /// Infer an expression against the current (telescope) context.
    pub fn infer_expr(&self, e: &Expr) -> Result<(Rc<Expr>, Rc<Value>), Diagnostic> {
        let ctx = self.telescope_ctx()?;
        let elab = Elab::new(&self.genv);
        elab.infer(&ctx, e)
    }

    /// Normal forms of an expression and of its type, with definitions
    /// unfolded.
    pub fn normalize_expr(
        &self,
        e: &Expr,
    ) -> Result<(Rc<Expr>, Rc<Expr>), Diagnostic> {
        let ctx = self.telescope_ctx()?;
        let elab = Elab::new(&self.genv);
        let (core, ty) = elab.infer(&ctx, e)?;
        let v = elab.val(&ctx, &core);
        let nf = eval::quote_deep(&self.genv, &ctx.tcx, &ctx.names, &v);
        let ty_nf = eval::quote_deep(&self.genv, &ctx.tcx, &ctx.names, &ty);
        Ok((nf, ty_nf))
    }
}
