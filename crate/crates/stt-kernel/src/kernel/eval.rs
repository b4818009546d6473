//! Evaluation, forcing, unfolding, and quotation.
//!
//! `eval` is strict to weak head normal form. `force` applies the two
//! hypothesis-sensitive computation rules: a neutral whose type carries a
//! boundary constraint entailed by the current hypotheses becomes that
//! constraint's value, and a stuck tope-case split whose branch tope
//! becomes entailed takes that branch. `unfold_all` additionally unfolds
//! definitions (references stay folded otherwise, which keeps printed
//! output readable). `quote` reads a value back into a core expression.

use super::value::*;
use crate::ast::{Expr, ExprKind, Name, Pattern};
use crate::module::GlobalEnv;
use crate::tope::{solver, Pt, Tope};
use std::rc::Rc;

/// The tope side of a typing context: the scalar interval variables in
/// scope and the hypotheses constraining them. `limit` caps the number of
/// atoms (reported as an error by the binder that would exceed it).
#[derive(Clone, Debug)]
pub struct TopeCtx {
    pub atoms: Vec<AtomInfo>,
    pub hyps: Vec<Tope>,
    pub limit: usize,
}

impl TopeCtx {
    pub fn new(limit: usize) -> TopeCtx {
        TopeCtx { atoms: Vec::new(), hyps: Vec::new(), limit }
    }

    pub fn entails(&self, goal: &Tope) -> bool {
        solver::entails(self.atoms.len(), &self.hyps, goal)
    }

    pub fn satisfiable(&self) -> bool {
        solver::satisfiable(self.atoms.len(), &self.hyps)
    }

    pub fn with_hyp(&self, t: Tope) -> TopeCtx {
        let mut out = self.clone();
        out.hyps.push(t);
        out
    }

    pub fn atom_names(&self) -> Vec<String> {
        self.atoms.iter().map(|a| a.name.clone()).collect()
    }

    /// Rendered countermodel for a failed entailment, for diagnostics.
    pub fn countermodel(&self, goal: &Tope) -> Option<String> {
        solver::countermodel(self.atoms.len(), &self.hyps, goal)
            .map(|m| m.display(&self.atom_names()))
    }
}

/// Raised when a binder would exceed the interval-variable budget.
pub struct AtomBudgetExceeded;

/// Allocate scalar atoms for a point of `cube` bound at level `lvl`,
/// returning its canonical value. Shape layers contribute their topes to
/// `hyps_out`. `pattern` aligns display names with the binder when its
/// structure matches; `slot` is the display name of the whole binder.
pub fn atoms_for_cube(
    genv: &GlobalEnv,
    tcx: &mut TopeCtx,
    lvl: Lvl,
    cube: &Rc<Value>,
    pattern: Option<&Pattern>,
    slot: &str,
    hyps_out: &mut Vec<Tope>,
) -> Result<PointVal, AtomBudgetExceeded> {
    fn go(
        genv: &GlobalEnv,
        tcx: &mut TopeCtx,
        lvl: Lvl,
        cube: &Rc<Value>,
        pattern: Option<&Pattern>,
        path: &mut Vec<u8>,
        slot: &str,
        hyps_out: &mut Vec<Tope>,
    ) -> Result<PointVal, AtomBudgetExceeded> {
        let structural = unfold_all(genv, tcx, cube.clone());
        match &*structural {
            Value::CubeUnit => Ok(PointVal::Star),
            Value::Cube2 => {
                if tcx.atoms.len() >= tcx.limit {
                    return Err(AtomBudgetExceeded);
                }
                let name = match pattern {
                    Some(Pattern::Var(n)) => n.clone(),
                    _ if path.is_empty() => slot.to_string(),
                    _ => {
                        let digits: Vec<String> =
                            path.iter().map(|c| (c + 1).to_string()).collect();
                        format!("{}.{}", slot, digits.join("."))
                    }
                };
                let idx = tcx.atoms.len() as u32;
                tcx.atoms.push(AtomInfo {
                    lvl,
                    path: path.clone(),
                    name,
                    slot: slot.to_string(),
                });
                Ok(PointVal::Atom(idx))
            }
            Value::CubeProduct(c1, c2) => {
                let (p1, p2) = match pattern {
                    Some(Pattern::Pair(a, b)) => (Some(&**a), Some(&**b)),
                    _ => (None, None),
                };
                path.push(0);
                let a = go(genv, tcx, lvl, c1, p1, path, slot, hyps_out)?;
                path.pop();
                path.push(1);
                let b = go(genv, tcx, lvl, c2, p2, path, slot, hyps_out)?;
                path.pop();
                Ok(PointVal::Pair(Rc::new(a), Rc::new(b)))
            }
            Value::ShapeV { cube, tope, .. } => {
                let cube = cube.clone();
                let tope = tope.clone();
                let pv = go(genv, tcx, lvl, &cube, pattern, path, slot, hyps_out)?;
                let t = as_tope(
                    genv,
                    tcx,
                    apply(genv, tcx, &tope, Value::point(pv.clone())),
                );
                hyps_out.push(t);
                Ok(pv)
            }
            _ => {
                // An abstract cube cannot be split into atoms; the checker
                // rejects binders over it before reaching this point.
                unreachable!("binding a point of a non-structural cube")
            }
        }
    }
    let mut path = Vec::new();
    go(genv, tcx, lvl, cube, pattern, &mut path, slot, hyps_out)
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

pub fn eval(genv: &GlobalEnv, tcx: &TopeCtx, env: &Env, e: &Expr) -> Rc<Value> {
    use ExprKind::*;
    match &e.kind {
        Universe => Rc::new(Value::Universe),
        UniverseCube => Rc::new(Value::UniverseCube),
        UniverseTope => Rc::new(Value::UniverseTope),
        CubeUnit => Rc::new(Value::CubeUnit),
        Cube2 => Rc::new(Value::Cube2),
        CubeProduct(a, b) => Rc::new(Value::CubeProduct(
            eval(genv, tcx, env, a),
            eval(genv, tcx, env, b),
        )),
        PointStar => Value::point(PointVal::Star),
        PointZero => Value::point(PointVal::Zero),
        PointOne => Value::point(PointVal::One),
        PointPair(a, b) => {
            let pa = as_point(genv, tcx, eval(genv, tcx, env, a));
            let pb = as_point(genv, tcx, eval(genv, tcx, env, b));
            Value::point(PointVal::Pair(Rc::new(pa), Rc::new(pb)))
        }
        PointFirst(p) => match as_point(genv, tcx, eval(genv, tcx, env, p)) {
            PointVal::Pair(a, _) => Value::point((*a).clone()),
            other => unreachable!("first of non-pair point {:?}", other),
        },
        PointSecond(p) => match as_point(genv, tcx, eval(genv, tcx, env, p)) {
            PointVal::Pair(_, b) => Value::point((*b).clone()),
            other => unreachable!("second of non-pair point {:?}", other),
        },
        TopeTop => Value::tope(Tope::Top),
        TopeBottom => Value::tope(Tope::Bot),
        TopeAnd(a, b) => {
            let ta = as_tope(genv, tcx, eval(genv, tcx, env, a));
            let tb = as_tope(genv, tcx, eval(genv, tcx, env, b));
            Value::tope(Tope::and(ta, tb))
        }
        TopeOr(a, b) => {
            let ta = as_tope(genv, tcx, eval(genv, tcx, env, a));
            let tb = as_tope(genv, tcx, eval(genv, tcx, env, b));
            Value::tope(Tope::or(ta, tb))
        }
        TopeEqT(a, b) => {
            let pa = as_point(genv, tcx, eval(genv, tcx, env, a));
            let pb = as_point(genv, tcx, eval(genv, tcx, env, b));
            Value::tope(point_eq_tope(&pa, &pb))
        }
        TopeLeq(a, b) => {
            let pa = as_point(genv, tcx, eval(genv, tcx, env, a));
            let pb = as_point(genv, tcx, eval(genv, tcx, env, b));
            Value::tope(Tope::Leq(scalar(&pa), scalar(&pb)))
        }
        Shape { binder, cube, tope } => Rc::new(Value::ShapeV {
            binder: binder.clone(),
            cube: eval(genv, tcx, env, cube),
            tope: Closure { env: env.clone(), body: tope.clone() },
        }),
        Pi { binder, domain, codomain } => Rc::new(Value::PiV {
            binder: binder.clone(),
            domain: eval(genv, tcx, env, domain),
            cod: Closure { env: env.clone(), body: codomain.clone() },
        }),
        Sigma { binder, domain, codomain } => Rc::new(Value::SigmaV {
            binder: binder.clone(),
            domain: eval(genv, tcx, env, domain),
            cod: Closure { env: env.clone(), body: codomain.clone() },
        }),
        Lambda { binder, domain, body } => Rc::new(Value::Lam {
            binder: binder.clone(),
            domain: eval(
                genv,
                tcx,
                env,
                domain.as_ref().expect("elaborated lambda carries its domain"),
            ),
            closure: Closure { env: env.clone(), body: body.clone() },
        }),
        App(f, a) => {
            let vf = eval(genv, tcx, env, f);
            let va = eval(genv, tcx, env, a);
            do_app(genv, tcx, vf, va)
        }
        Pair(a, b) => Rc::new(Value::PairV(
            eval(genv, tcx, env, a),
            eval(genv, tcx, env, b),
        )),
        First(p) => do_first(genv, tcx, eval(genv, tcx, env, p)),
        Second(p) => do_second(genv, tcx, eval(genv, tcx, env, p)),
        IdType { ty, lhs, rhs } => Rc::new(Value::IdV {
            ty: eval(
                genv,
                tcx,
                env,
                ty.as_ref().expect("elaborated identity type is annotated"),
            ),
            lhs: eval(genv, tcx, env, lhs),
            rhs: eval(genv, tcx, env, rhs),
        }),
        Refl { term, .. } => Rc::new(Value::ReflV(eval(
            genv,
            tcx,
            env,
            term.as_ref().expect("elaborated refl is annotated"),
        ))),
        IndPath { ty, base, motive, refl_case, target, path } => {
            let jty = eval(genv, tcx, env, ty);
            let jbase = eval(genv, tcx, env, base);
            let jmotive = eval(genv, tcx, env, motive);
            let jrefl = eval(genv, tcx, env, refl_case);
            let jtarget = eval(genv, tcx, env, target);
            let jpath = eval(genv, tcx, env, path);
            do_j(genv, tcx, jty, jbase, jmotive, jrefl, jtarget, jpath)
        }
        Refinement { ty, constraints } => {
            let carrier = eval(genv, tcx, env, ty);
            let arms = constraints
                .iter()
                .map(|(tope, value)| {
                    (
                        as_tope(genv, tcx, eval(genv, tcx, env, tope)),
                        Closure { env: env.clone(), body: value.clone() },
                    )
                })
                .collect();
            Rc::new(Value::RefineV { ty: carrier, arms })
        }
        RecOr(branches) => {
            let arms: Vec<(Tope, Closure)> = branches
                .iter()
                .map(|(tope, value)| {
                    (
                        as_tope(genv, tcx, eval(genv, tcx, env, tope)),
                        Closure { env: env.clone(), body: value.clone() },
                    )
                })
                .collect();
            for (t, arm) in &arms {
                if tcx.entails(t) {
                    return apply0(genv, tcx, arm);
                }
            }
            Rc::new(Value::RecOrV { arms, pending: Vec::new() })
        }
        RecBot => Rc::new(Value::RecBotV),
        Ascription(term, _) => eval(genv, tcx, env, term),
        BoundVar(idx, _) => env[env.len() - 1 - idx].clone(),
        GlobalRef(n) => eval_global(genv, tcx, env, n),
        Var(n) => unreachable!("unresolved variable '{}' in core expression", n),
        Hole => unreachable!("hole in core expression"),
    }
}

fn eval_global(genv: &GlobalEnv, tcx: &TopeCtx, env: &Env, name: &str) -> Rc<Value> {
    if let Some(sd) = genv.section_def(name) {
        // The type core is over the telescope as it stood when the
        // definition was made; the head keeps the full current telescope
        // so the body can be unfolded later.
        let ty_env: Env = env[..sd.tele_len].to_vec();
        let ty = eval(genv, tcx, &ty_env, &sd.ty_core);
        let tele: Env = env[..genv.telescope_len()].to_vec();
        Value::neutral(Head::Global { name: name.to_string(), tele }, Vec::new(), ty)
    } else {
        let entry = genv
            .global(name)
            .unwrap_or_else(|| unreachable!("unresolved global '{}'", name));
        Value::neutral(
            Head::Global { name: name.to_string(), tele: Vec::new() },
            Vec::new(),
            entry.ty.clone(),
        )
    }
}

pub fn apply(genv: &GlobalEnv, tcx: &TopeCtx, clo: &Closure, arg: Rc<Value>) -> Rc<Value> {
    let mut env = clo.env.clone();
    env.push(arg);
    eval(genv, tcx, &env, &clo.body)
}

/// Evaluate a binder-free closure (refinement and case arms).
pub fn apply0(genv: &GlobalEnv, tcx: &TopeCtx, clo: &Closure) -> Rc<Value> {
    eval(genv, tcx, &clo.env, &clo.body)
}

// ---------------------------------------------------------------------------
// eliminations
// ---------------------------------------------------------------------------

pub fn do_elim(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>, e: &Elim) -> Rc<Value> {
    match e {
        Elim::App { arg } => do_app(genv, tcx, v, arg.clone()),
        Elim::First => do_first(genv, tcx, v),
        Elim::Second => do_second(genv, tcx, v),
        Elim::J { ty, base, motive, refl_case, target } => do_j(
            genv,
            tcx,
            ty.clone(),
            base.clone(),
            motive.clone(),
            refl_case.clone(),
            target.clone(),
            v,
        ),
    }
}

fn extend_neutral(n: &Neutral, elim: Elim, ty: Rc<Value>) -> Rc<Value> {
    let mut spine = n.spine.clone();
    spine.push(elim);
    Value::neutral(n.head.clone(), spine, ty)
}

fn stuck_extend(v: Rc<Value>, elim: Elim) -> Rc<Value> {
    match &*v {
        Value::RecOrV { arms, pending } => {
            let mut pending = pending.clone();
            pending.push(elim);
            Rc::new(Value::RecOrV { arms: arms.clone(), pending })
        }
        Value::RecBotV => v.clone(),
        _ => unreachable!("cannot eliminate {:?}", v),
    }
}

pub fn do_app(genv: &GlobalEnv, tcx: &TopeCtx, f: Rc<Value>, a: Rc<Value>) -> Rc<Value> {
    let f = force(genv, tcx, f);
    match &*f {
        Value::Lam { closure, .. } => apply(genv, tcx, closure, a),
        Value::Neutral(n) => {
            let ty = match &*peel_refine(unfold_all(genv, tcx, n.ty.clone())) {
                Value::PiV { cod, .. } => apply(genv, tcx, cod, a.clone()),
                _ => Rc::new(Value::Universe),
            };
            extend_neutral(n, Elim::App { arg: a }, ty)
        }
        _ => stuck_extend(f, Elim::App { arg: a }),
    }
}

pub fn do_first(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Rc<Value> {
    let v = force(genv, tcx, v);
    match &*v {
        Value::PairV(a, _) => a.clone(),
        Value::Point(PointVal::Pair(a, _)) => Value::point((**a).clone()),
        Value::Neutral(n) => {
            let ty = match &*peel_refine(unfold_all(genv, tcx, n.ty.clone())) {
                Value::SigmaV { domain, .. } => domain.clone(),
                Value::CubeProduct(c1, _) => c1.clone(),
                _ => Rc::new(Value::Universe),
            };
            extend_neutral(n, Elim::First, ty)
        }
        _ => stuck_extend(v, Elim::First),
    }
}

pub fn do_second(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Rc<Value> {
    let v = force(genv, tcx, v);
    match &*v {
        Value::PairV(_, b) => b.clone(),
        Value::Point(PointVal::Pair(_, b)) => Value::point((**b).clone()),
        Value::Neutral(n) => {
            let ty = match &*peel_refine(unfold_all(genv, tcx, n.ty.clone())) {
                Value::SigmaV { cod, .. } => {
                    let first = do_first(genv, tcx, v.clone());
                    apply(genv, tcx, cod, first)
                }
                Value::CubeProduct(_, c2) => c2.clone(),
                _ => Rc::new(Value::Universe),
            };
            extend_neutral(n, Elim::Second, ty)
        }
        _ => stuck_extend(v, Elim::Second),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn do_j(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    ty: Rc<Value>,
    base: Rc<Value>,
    motive: Rc<Value>,
    refl_case: Rc<Value>,
    target: Rc<Value>,
    path: Rc<Value>,
) -> Rc<Value> {
    let path = force(genv, tcx, path);
    match &*path {
        Value::ReflV(_) => refl_case,
        Value::Neutral(n) => {
            let applied = do_app(genv, tcx, motive.clone(), target.clone());
            let out_ty = do_app(genv, tcx, applied, path.clone());
            extend_neutral(
                n,
                Elim::J { ty, base, motive, refl_case, target },
                out_ty,
            )
        }
        _ => stuck_extend(path, Elim::J { ty, base, motive, refl_case, target }),
    }
}

// ---------------------------------------------------------------------------
// forcing and unfolding
// ---------------------------------------------------------------------------

/// Fire hypothesis-sensitive computation: boundary constraints on a
/// neutral's type, and entailed branches of a stuck case split.
pub fn force(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Rc<Value> {
    match &*v {
        Value::Neutral(n) => {
            let tw = unfold_all(genv, tcx, n.ty.clone());
            if let Value::RefineV { arms, .. } = &*tw {
                for (tope, arm) in arms {
                    if tcx.entails(tope) {
                        return force(genv, tcx, apply0(genv, tcx, arm));
                    }
                }
            }
            v
        }
        Value::RecOrV { arms, pending } => {
            for (tope, arm) in arms {
                if tcx.entails(tope) {
                    let mut out = apply_pending(genv, tcx, apply0(genv, tcx, arm), pending);
                    out = force(genv, tcx, out);
                    return out;
                }
            }
            v
        }
        _ => v,
    }
}

fn apply_pending(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    mut v: Rc<Value>,
    pending: &[Elim],
) -> Rc<Value> {
    for e in pending {
        v = do_elim(genv, tcx, v, e);
    }
    v
}

/// `force`, then unfold definition heads until the value is structural
/// (or an unexpandable neutral). Used in type positions and as the
/// fallback during comparison.
pub fn unfold_all(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Rc<Value> {
    let mut v = force(genv, tcx, v);
    loop {
        let unfolded = match &*v {
            Value::Neutral(n) => match &n.head {
                Head::Global { name, tele } => genv
                    .unfold(name, tele, tcx)
                    .map(|base| apply_pending(genv, tcx, base, &n.spine)),
                _ => None,
            },
            _ => None,
        };
        match unfolded {
            Some(u) => v = force(genv, tcx, u),
            None => return v,
        }
    }
}

/// Strip boundary refinements off a type (their carrier governs the
/// structural rules).
pub fn peel_refine(v: Rc<Value>) -> Rc<Value> {
    match &*v {
        Value::RefineV { ty, .. } => peel_refine(ty.clone()),
        _ => v,
    }
}

/// Rebuild a neutral from its head, re-eliminating the spine under the
/// current hypotheses so intermediate boundary rules can fire.
pub fn deep_force(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Rc<Value> {
    match &*v {
        Value::Neutral(n) => {
            let head = match &n.head {
                Head::Var { lvl, name, ty } => Value::neutral(
                    Head::Var { lvl: *lvl, name: name.clone(), ty: ty.clone() },
                    Vec::new(),
                    ty.clone(),
                ),
                Head::Global { name, tele } => {
                    let ty = global_head_ty(genv, tcx, name, tele);
                    Value::neutral(
                        Head::Global { name: name.clone(), tele: tele.clone() },
                        Vec::new(),
                        ty,
                    )
                }
            };
            let head = force(genv, tcx, head);
            apply_pending(genv, tcx, head, &n.spine)
        }
        _ => force(genv, tcx, v.clone()),
    }
}

pub fn global_head_ty(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    name: &str,
    tele: &Env,
) -> Rc<Value> {
    if let Some(sd) = genv.section_def(name) {
        let ty_env: Env = tele[..sd.tele_len].to_vec();
        eval(genv, tcx, &ty_env, &sd.ty_core)
    } else if let Some(entry) = genv.global(name) {
        entry.ty.clone()
    } else {
        unreachable!("unknown global '{}'", name)
    }
}

// ---------------------------------------------------------------------------
// points and topes
// ---------------------------------------------------------------------------

pub fn as_point(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> PointVal {
    match &*unfold_all(genv, tcx, v) {
        Value::Point(p) => p.clone(),
        other => unreachable!("expected a point value, found {:?}", other),
    }
}

pub fn as_tope(genv: &GlobalEnv, tcx: &TopeCtx, v: Rc<Value>) -> Tope {
    match &*unfold_all(genv, tcx, v) {
        Value::TopeVal(t) => t.clone(),
        other => unreachable!("expected a tope value, found {:?}", other),
    }
}

fn scalar(p: &PointVal) -> Pt {
    match p {
        PointVal::Zero => Pt::Zero,
        PointVal::One => Pt::One,
        PointVal::Atom(i) => Pt::Var(*i),
        other => unreachable!("expected a scalar interval point, found {:?}", other),
    }
}

/// Pointwise equality of two points of the same cube, as a tope.
pub fn point_eq_tope(a: &PointVal, b: &PointVal) -> Tope {
    match (a, b) {
        (PointVal::Star, PointVal::Star) => Tope::Top,
        (PointVal::Pair(a1, a2), PointVal::Pair(b1, b2)) => {
            Tope::and(point_eq_tope(a1, b1), point_eq_tope(a2, b2))
        }
        _ => Tope::Eq(scalar(a), scalar(b)),
    }
}

// ---------------------------------------------------------------------------
// quotation
// ---------------------------------------------------------------------------

fn syn(kind: ExprKind) -> Rc<Expr> {
    Expr::synthetic(kind)
}

fn fresh_name(names: &[Name], hint: &str) -> Name {
    let hint = if hint.is_empty() { "x" } else { hint };
    if hint == "_" {
        return "_".to_string();
    }
    let mut candidate = hint.to_string();
    while names.iter().any(|n| n == &candidate) {
        candidate.push('′');
    }
    candidate
}

/// Freshen every name in a binder pattern against `names`; returns the
/// renamed pattern and its display string (the binder "slot" name).
fn freshen_pattern(names: &[Name], pat: &Pattern) -> (Pattern, String) {
    fn go(names: &mut Vec<Name>, pat: &Pattern) -> Pattern {
        match pat {
            Pattern::Var(n) => {
                let fresh = fresh_name(names, n);
                names.push(fresh.clone());
                Pattern::Var(fresh)
            }
            Pattern::Wildcard => Pattern::Wildcard,
            Pattern::Pair(a, b) => {
                let a = go(names, a);
                let b = go(names, b);
                Pattern::Pair(Box::new(a), Box::new(b))
            }
        }
    }
    let mut scratch = names.to_vec();
    let renamed = go(&mut scratch, pat);
    let mut display = String::new();
    fn show(p: &Pattern, out: &mut String) {
        match p {
            Pattern::Var(n) => out.push_str(n),
            Pattern::Wildcard => out.push('_'),
            Pattern::Pair(a, b) => {
                out.push('(');
                show(a, out);
                out.push_str(" , ");
                show(b, out);
                out.push(')');
            }
        }
    }
    show(&renamed, &mut display);
    (renamed, display)
}

/// Bind a fresh variable (or point atoms) for `domain` while quoting
/// under a binder. Returns the bound value and the tope context to quote
/// the body under.
fn quote_binder(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    names: &[Name],
    pat: &Pattern,
    slot: &str,
    domain: &Rc<Value>,
) -> (Rc<Value>, TopeCtx) {
    let structural = unfold_all(genv, tcx, domain.clone());
    if structural.is_cube_sorted() {
        let mut tcx2 = tcx.clone();
        let mut hyps = Vec::new();
        let pv = match atoms_for_cube(
            genv,
            &mut tcx2,
            names.len(),
            &structural,
            Some(pat),
            slot,
            &mut hyps,
        ) {
            Ok(pv) => pv,
            Err(AtomBudgetExceeded) => {
                unreachable!("atom budget exceeded while quoting")
            }
        };
        for h in hyps {
            tcx2.hyps.push(h);
        }
        (Value::point(pv), tcx2)
    } else {
        let name = match pat {
            Pattern::Var(n) => n.clone(),
            _ => slot.to_string(),
        };
        (
            Value::var(names.len(), name, domain.clone()),
            tcx.clone(),
        )
    }
}

pub fn quote(genv: &GlobalEnv, tcx: &TopeCtx, names: &[Name], v: &Rc<Value>) -> Rc<Expr> {
    quote_mode(genv, tcx, names, v, false)
}

/// Quote with definition heads unfolded everywhere (full normalization).
pub fn quote_deep(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    names: &[Name],
    v: &Rc<Value>,
) -> Rc<Expr> {
    quote_mode(genv, tcx, names, v, true)
}

fn quote_mode(
    genv: &GlobalEnv,
    tcx: &TopeCtx,
    names: &[Name],
    v: &Rc<Value>,
    deep: bool,
) -> Rc<Expr> {
    let v = if deep {
        unfold_all(genv, tcx, v.clone())
    } else {
        force(genv, tcx, v.clone())
    };
    match &*v {
        Value::Universe => syn(ExprKind::Universe),
        Value::UniverseCube => syn(ExprKind::UniverseCube),
        Value::UniverseTope => syn(ExprKind::UniverseTope),
        Value::CubeUnit => syn(ExprKind::CubeUnit),
        Value::Cube2 => syn(ExprKind::Cube2),
        Value::CubeProduct(a, b) => syn(ExprKind::CubeProduct(
            quote_mode(genv, tcx, names, a, deep),
            quote_mode(genv, tcx, names, b, deep),
        )),
        Value::ShapeV { binder, cube, tope } => {
            let cube_q = quote_mode(genv, tcx, names, cube, deep);
            let (pat, slot) = freshen_pattern(names, binder);
            let (pv, tcx2) = quote_binder(genv, tcx, names, &pat, &slot, cube);
            let mut names2 = names.to_vec();
            names2.push(slot);
            let t = as_tope(genv, &tcx2, apply(genv, &tcx2, tope, pv));
            syn(ExprKind::Shape {
                binder: pat,
                cube: cube_q,
                tope: quote_tope(&tcx2, &names2, &t),
            })
        }
        Value::Point(p) => quote_point(tcx, names, p),
        Value::TopeVal(t) => quote_tope(tcx, names, t),
        Value::PiV { binder, domain, cod } => {
            let dom_q = quote_mode(genv, tcx, names, domain, deep);
            let (pat, slot) = freshen_pattern(names, binder);
            let (arg, tcx2) = quote_binder(genv, tcx, names, &pat, &slot, domain);
            let mut names2 = names.to_vec();
            names2.push(slot);
            let body = apply(genv, &tcx2, cod, arg);
            syn(ExprKind::Pi {
                binder: pat,
                domain: dom_q,
                codomain: quote_mode(genv, &tcx2, &names2, &body, deep),
            })
        }
        Value::SigmaV { binder, domain, cod } => {
            let dom_q = quote_mode(genv, tcx, names, domain, deep);
            let (pat, slot) = freshen_pattern(names, binder);
            let (arg, tcx2) = quote_binder(genv, tcx, names, &pat, &slot, domain);
            let mut names2 = names.to_vec();
            names2.push(slot);
            let body = apply(genv, &tcx2, cod, arg);
            syn(ExprKind::Sigma {
                binder: pat,
                domain: dom_q,
                codomain: quote_mode(genv, &tcx2, &names2, &body, deep),
            })
        }
        Value::Lam { binder, domain, closure } => {
            let dom_q = quote_mode(genv, tcx, names, domain, deep);
            let (pat, slot) = freshen_pattern(names, binder);
            let (arg, tcx2) = quote_binder(genv, tcx, names, &pat, &slot, domain);
            let mut names2 = names.to_vec();
            names2.push(slot);
            let body = apply(genv, &tcx2, closure, arg);
            syn(ExprKind::Lambda {
                binder: pat,
                domain: Some(dom_q),
                body: quote_mode(genv, &tcx2, &names2, &body, deep),
            })
        }
        Value::PairV(a, b) => syn(ExprKind::Pair(
            quote_mode(genv, tcx, names, a, deep),
            quote_mode(genv, tcx, names, b, deep),
        )),
        Value::IdV { ty, lhs, rhs } => syn(ExprKind::IdType {
            ty: Some(quote_mode(genv, tcx, names, ty, deep)),
            lhs: quote_mode(genv, tcx, names, lhs, deep),
            rhs: quote_mode(genv, tcx, names, rhs, deep),
        }),
        Value::ReflV(t) => syn(ExprKind::Refl {
            ty: None,
            term: Some(quote_mode(genv, tcx, names, t, deep)),
        }),
        Value::RefineV { ty, arms } => {
            let carrier = quote_mode(genv, tcx, names, ty, deep);
            let constraints = arms
                .iter()
                .map(|(tope, arm)| {
                    let tcx2 = tcx.with_hyp(tope.clone());
                    let val = apply0(genv, &tcx2, arm);
                    (
                        quote_tope(tcx, names, tope),
                        quote_mode(genv, &tcx2, names, &val, deep),
                    )
                })
                .collect();
            syn(ExprKind::Refinement { ty: carrier, constraints })
        }
        Value::RecOrV { arms, pending } => {
            let branches = arms
                .iter()
                .map(|(tope, arm)| {
                    let tcx2 = tcx.with_hyp(tope.clone());
                    let val = apply_pending(
                        genv,
                        &tcx2,
                        apply0(genv, &tcx2, arm),
                        pending,
                    );
                    (
                        quote_tope(tcx, names, tope),
                        quote_mode(genv, &tcx2, names, &val, deep),
                    )
                })
                .collect();
            syn(ExprKind::RecOr(branches))
        }
        Value::RecBotV => syn(ExprKind::RecBot),
        Value::Neutral(n) => {
            let mut acc = match &n.head {
                Head::Var { lvl, .. } => {
                    let name = names
                        .get(*lvl)
                        .cloned()
                        .unwrap_or_else(|| format!("x{}", lvl));
                    syn(ExprKind::BoundVar(names.len() - 1 - lvl, name))
                }
                Head::Global { name, .. } => syn(ExprKind::GlobalRef(name.clone())),
            };
            for elim in &n.spine {
                acc = match elim {
                    Elim::App { arg } => {
                        syn(ExprKind::App(acc, quote_mode(genv, tcx, names, arg, deep)))
                    }
                    Elim::First => syn(ExprKind::First(acc)),
                    Elim::Second => syn(ExprKind::Second(acc)),
                    Elim::J { ty, base, motive, refl_case, target } => {
                        syn(ExprKind::IndPath {
                            ty: quote_mode(genv, tcx, names, ty, deep),
                            base: quote_mode(genv, tcx, names, base, deep),
                            motive: quote_mode(genv, tcx, names, motive, deep),
                            refl_case: quote_mode(genv, tcx, names, refl_case, deep),
                            target: quote_mode(genv, tcx, names, target, deep),
                            path: acc,
                        })
                    }
                };
            }
            acc
        }
    }
}

fn quote_point(tcx: &TopeCtx, names: &[Name], p: &PointVal) -> Rc<Expr> {
    match p {
        PointVal::Star => syn(ExprKind::PointStar),
        PointVal::Zero => syn(ExprKind::PointZero),
        PointVal::One => syn(ExprKind::PointOne),
        PointVal::Atom(i) => atom_accessor(tcx, names, *i),
        PointVal::Pair(a, b) => syn(ExprKind::PointPair(
            quote_point(tcx, names, a),
            quote_point(tcx, names, b),
        )),
    }
}

fn atom_accessor(tcx: &TopeCtx, names: &[Name], i: u32) -> Rc<Expr> {
    let info = &tcx.atoms[i as usize];
    let idx = names.len() - 1 - info.lvl;
    let mut acc = syn(ExprKind::BoundVar(idx, info.slot.clone()));
    for step in &info.path {
        acc = if *step == 0 {
            syn(ExprKind::PointFirst(acc))
        } else {
            syn(ExprKind::PointSecond(acc))
        };
    }
    acc
}

pub fn quote_tope(tcx: &TopeCtx, names: &[Name], t: &Tope) -> Rc<Expr> {
    let pt = |p: &Pt| -> Rc<Expr> {
        match p {
            Pt::Zero => syn(ExprKind::PointZero),
            Pt::One => syn(ExprKind::PointOne),
            Pt::Var(i) => atom_accessor(tcx, names, *i),
        }
    };
    match t {
        Tope::Top => syn(ExprKind::TopeTop),
        Tope::Bot => syn(ExprKind::TopeBottom),
        Tope::And(a, b) => syn(ExprKind::TopeAnd(
            quote_tope(tcx, names, a),
            quote_tope(tcx, names, b),
        )),
        Tope::Or(a, b) => syn(ExprKind::TopeOr(
            quote_tope(tcx, names, a),
            quote_tope(tcx, names, b),
        )),
        Tope::Eq(p, q) => syn(ExprKind::TopeEqT(pt(p), pt(q))),
        Tope::Leq(p, q) => syn(ExprKind::TopeLeq(pt(p), pt(q))),
    }
}
