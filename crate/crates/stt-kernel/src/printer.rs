//! Pretty-printing of surface expressions and a stable structural dump.
//!
//! `pretty` emits concrete syntax that reparses to an α-equivalent
//! expression; `dump` emits a compact s-expression used by `--dump-ast`,
//! with no spans or other run-dependent data so output is byte-stable.

use crate::ast::*;
use std::fmt::Write;
use std::rc::Rc;

/// Binding tightness, loosest to tightest. A node prints parens around
/// itself when the context demands more tightness than the node provides.
mod prec {
    pub const ARROW: u8 = 0;
    pub const EQ: u8 = 1;
    pub const OR: u8 = 2;
    pub const AND: u8 = 3;
    pub const CMP: u8 = 4;
    pub const PROD: u8 = 5;
    pub const APP: u8 = 6;
    pub const ATOM: u8 = 7;
}

pub fn pretty(e: &Expr) -> String {
    let mut s = String::new();
    go(e, prec::ARROW, &mut s);
    s
}

fn pattern(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var(n) => out.push_str(n),
        Pattern::Wildcard => out.push('_'),
        Pattern::Pair(a, b) => {
            out.push('(');
            pattern(a, out);
            out.push_str(" , ");
            pattern(b, out);
            out.push(')');
        }
    }
}

fn go(e: &Expr, want: u8, out: &mut String) {
    let level = level_of(e);
    if level < want {
        out.push('(');
        go_node(e, out);
        out.push(')');
    } else {
        go_node(e, out);
    }
}

fn level_of(e: &Expr) -> u8 {
    use ExprKind::*;
    match &e.kind {
        Pi { .. } | Lambda { .. } | Sigma { .. } => prec::ARROW,
        IdType { .. } => prec::EQ,
        TopeOr(..) => prec::OR,
        TopeAnd(..) => prec::AND,
        TopeEqT(..) | TopeLeq(..) => prec::CMP,
        CubeProduct(..) => prec::PROD,
        App(..) | First(..) | Second(..) | Refinement { .. } => prec::APP,
        _ => prec::ATOM,
    }
}

fn go_node(e: &Expr, out: &mut String) {
    use ExprKind::*;
    match &e.kind {
        Universe => out.push('U'),
        UniverseCube => out.push_str("CUBE"),
        UniverseTope => out.push_str("TOPE"),
        CubeUnit => out.push('1'),
        Cube2 => out.push('2'),
        CubeProduct(l, r) => {
            go(l, prec::APP, out);
            out.push_str(" × ");
            go(r, prec::PROD, out);
        }
        PointStar => out.push_str("*₁"),
        PointZero => out.push_str("0₂"),
        PointOne => out.push_str("1₂"),
        PointPair(l, r) => {
            out.push('(');
            go(l, prec::ARROW, out);
            out.push_str(" , ");
            go(r, prec::ARROW, out);
            out.push(')');
        }
        PointFirst(p) => {
            out.push_str("first ");
            go(p, prec::ATOM, out);
        }
        PointSecond(p) => {
            out.push_str("second ");
            go(p, prec::ATOM, out);
        }
        TopeTop => out.push('⊤'),
        TopeBottom => out.push('⊥'),
        TopeAnd(l, r) => {
            go(l, prec::AND, out);
            out.push_str(" ∧ ");
            go(r, prec::CMP, out);
        }
        TopeOr(l, r) => {
            go(l, prec::OR, out);
            out.push_str(" ∨ ");
            go(r, prec::AND, out);
        }
        TopeEqT(l, r) => {
            go(l, prec::PROD, out);
            out.push_str(" ≡ ");
            go(r, prec::PROD, out);
        }
        TopeLeq(l, r) => {
            go(l, prec::PROD, out);
            out.push_str(" ≤ ");
            go(r, prec::PROD, out);
        }
        Shape { binder, cube, tope } => {
            out.push('{');
            pattern(binder, out);
            out.push_str(" : ");
            go(cube, prec::ARROW, out);
            out.push_str(" | ");
            go(tope, prec::ARROW, out);
            out.push('}');
        }
        Pi { binder, domain, codomain } => {
            match binder {
                Pattern::Wildcard => go(domain, prec::EQ, out),
                _ => {
                    out.push('(');
                    pattern(binder, out);
                    out.push_str(" : ");
                    go(domain, prec::ARROW, out);
                    out.push(')');
                }
            }
            out.push_str(" → ");
            go(codomain, prec::ARROW, out);
        }
        Sigma { binder, domain, codomain } => {
            out.push_str("Σ (");
            pattern(binder, out);
            out.push_str(" : ");
            go(domain, prec::ARROW, out);
            out.push_str(") , ");
            go(codomain, prec::ARROW, out);
        }
        Lambda { binder, domain, body } => {
            out.push('\\');
            out.push(' ');
            match domain {
                Some(d) => {
                    out.push('(');
                    pattern(binder, out);
                    out.push_str(" : ");
                    go(d, prec::ARROW, out);
                    out.push(')');
                }
                None => pattern(binder, out),
            }
            out.push_str(" → ");
            go(body, prec::ARROW, out);
        }
        App(f, a) => {
            go(f, prec::APP, out);
            out.push(' ');
            go(a, prec::ATOM, out);
        }
        Pair(a, b) => {
            out.push('(');
            go(a, prec::ARROW, out);
            out.push_str(" , ");
            go(b, prec::ARROW, out);
            out.push(')');
        }
        First(p) => {
            out.push_str("first ");
            go(p, prec::ATOM, out);
        }
        Second(p) => {
            out.push_str("second ");
            go(p, prec::ATOM, out);
        }
        IdType { ty, lhs, rhs } => {
            go(lhs, prec::OR, out);
            match ty {
                Some(t) => {
                    out.push_str(" =_{");
                    go(t, prec::ARROW, out);
                    out.push_str("} ");
                }
                None => out.push_str(" = "),
            }
            go(rhs, prec::OR, out);
        }
        Refl { ty, term } => {
            out.push_str("refl");
            match (term, ty) {
                (Some(t), Some(a)) => {
                    out.push_str("_{");
                    go(t, prec::ARROW, out);
                    out.push_str(" : ");
                    go(a, prec::ARROW, out);
                    out.push('}');
                }
                (Some(t), None) => {
                    out.push_str("_{");
                    go(t, prec::ARROW, out);
                    out.push('}');
                }
                (None, _) => {}
            }
        }
        IndPath { ty, base, motive, refl_case, target, path } => {
            out.push_str("idJ (");
            for (i, part) in [ty, base, motive, refl_case, target, path].iter().enumerate() {
                if i > 0 {
                    out.push_str(" , ");
                }
                go(part, prec::ARROW, out);
            }
            out.push(')');
        }
        Refinement { ty, constraints } => {
            go(ty, prec::APP, out);
            out.push_str(" [");
            for (i, (tope, value)) in constraints.iter().enumerate() {
                if i > 0 {
                    out.push_str(" , ");
                }
                go(tope, prec::OR, out);
                out.push_str(" ↦ ");
                go(value, prec::ARROW, out);
            }
            out.push(']');
        }
        RecOr(branches) => {
            out.push_str("recOR (");
            for (i, (tope, value)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" , ");
                }
                go(tope, prec::OR, out);
                out.push_str(" ↦ ");
                go(value, prec::ARROW, out);
            }
            out.push(')');
        }
        RecBot => out.push_str("recBOT"),
        Ascription(term, ty) => {
            out.push('(');
            go(term, prec::ARROW, out);
            out.push_str(" : ");
            go(ty, prec::ARROW, out);
            out.push(')');
        }
        Hole => out.push('?'),
        Var(n) | GlobalRef(n) => out.push_str(n),
        BoundVar(_, n) => out.push_str(n),
    }
}

/// Stable structural dump: s-expressions with quoted names, no spans.
pub fn dump(e: &Expr) -> String {
    let mut s = String::new();
    dump_into(e, &mut s);
    s
}

fn dump_pat(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var(n) => {
            let _ = write!(out, "\"{}\"", n);
        }
        Pattern::Wildcard => out.push('_'),
        Pattern::Pair(a, b) => {
            out.push_str("(pat-pair ");
            dump_pat(a, out);
            out.push(' ');
            dump_pat(b, out);
            out.push(')');
        }
    }
}

fn dump_into(e: &Expr, out: &mut String) {
    use ExprKind::*;
    let tag = |out: &mut String, name: &str, parts: &[&Rc<Expr>]| {
        out.push('(');
        out.push_str(name);
        for p in parts {
            out.push(' ');
            dump_into(p, out);
        }
        out.push(')');
    };
    match &e.kind {
        Universe => out.push_str("U"),
        UniverseCube => out.push_str("CUBE"),
        UniverseTope => out.push_str("TOPE"),
        CubeUnit => out.push_str("cube-1"),
        Cube2 => out.push_str("cube-2"),
        CubeProduct(l, r) => tag(out, "cube-prod", &[l, r]),
        PointStar => out.push_str("point-star"),
        PointZero => out.push_str("point-0"),
        PointOne => out.push_str("point-1"),
        PointPair(l, r) => tag(out, "point-pair", &[l, r]),
        PointFirst(p) => tag(out, "point-first", &[p]),
        PointSecond(p) => tag(out, "point-second", &[p]),
        TopeTop => out.push_str("top"),
        TopeBottom => out.push_str("bot"),
        TopeAnd(l, r) => tag(out, "and", &[l, r]),
        TopeOr(l, r) => tag(out, "or", &[l, r]),
        TopeEqT(l, r) => tag(out, "teq", &[l, r]),
        TopeLeq(l, r) => tag(out, "tleq", &[l, r]),
        Shape { binder, cube, tope } => {
            out.push_str("(shape ");
            dump_pat(binder, out);
            out.push(' ');
            dump_into(cube, out);
            out.push(' ');
            dump_into(tope, out);
            out.push(')');
        }
        Pi { binder, domain, codomain } => {
            out.push_str("(pi ");
            dump_pat(binder, out);
            out.push(' ');
            dump_into(domain, out);
            out.push(' ');
            dump_into(codomain, out);
            out.push(')');
        }
        Sigma { binder, domain, codomain } => {
            out.push_str("(sigma ");
            dump_pat(binder, out);
            out.push(' ');
            dump_into(domain, out);
            out.push(' ');
            dump_into(codomain, out);
            out.push(')');
        }
        Lambda { binder, domain, body } => {
            out.push_str("(lam ");
            dump_pat(binder, out);
            out.push(' ');
            match domain {
                Some(d) => dump_into(d, out),
                None => out.push('_'),
            }
            out.push(' ');
            dump_into(body, out);
            out.push(')');
        }
        App(f, a) => tag(out, "app", &[f, a]),
        Pair(a, b) => tag(out, "pair", &[a, b]),
        First(p) => tag(out, "first", &[p]),
        Second(p) => tag(out, "second", &[p]),
        IdType { ty, lhs, rhs } => {
            out.push_str("(id ");
            match ty {
                Some(t) => dump_into(t, out),
                None => out.push('_'),
            }
            out.push(' ');
            dump_into(lhs, out);
            out.push(' ');
            dump_into(rhs, out);
            out.push(')');
        }
        Refl { ty, term } => {
            out.push_str("(refl ");
            match ty {
                Some(t) => dump_into(t, out),
                None => out.push('_'),
            }
            out.push(' ');
            match term {
                Some(t) => dump_into(t, out),
                None => out.push('_'),
            }
            out.push(')');
        }
        IndPath { ty, base, motive, refl_case, target, path } => {
            tag(out, "idJ", &[ty, base, motive, refl_case, target, path])
        }
        Refinement { ty, constraints } => {
            out.push_str("(refine ");
            dump_into(ty, out);
            for (tope, value) in constraints {
                out.push_str(" (");
                dump_into(tope, out);
                out.push(' ');
                dump_into(value, out);
                out.push(')');
            }
            out.push(')');
        }
        RecOr(branches) => {
            out.push_str("(recOR");
            for (tope, value) in branches {
                out.push_str(" (");
                dump_into(tope, out);
                out.push(' ');
                dump_into(value, out);
                out.push(')');
            }
            out.push(')');
        }
        RecBot => out.push_str("recBOT"),
        Ascription(term, ty) => tag(out, "ascribe", &[term, ty]),
        Hole => out.push('?'),
        Var(n) => {
            let _ = write!(out, "(var \"{}\")", n);
        }
        GlobalRef(n) => {
            let _ = write!(out, "(global \"{}\")", n);
        }
        BoundVar(i, _) => {
            let _ = write!(out, "(bound {})", i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;
    use crate::parser::parse_expr;

    fn round_trip(src: &str) {
        let e = parse_expr("<t>", src).unwrap();
        let printed = pretty(&e);
        let back = parse_expr("<t>", &printed)
            .unwrap_or_else(|err| panic!("reparse of {:?} failed: {}", printed, err));
        assert!(
            alpha_eq(&e, &back),
            "round trip changed meaning:\n  source:  {}\n  printed: {}",
            src,
            printed
        );
    }

    #[test]
    fn round_trips_cover_every_connective() {
        for src in [
            "U",
            "(t : Δ¹) → A [t ≡ 0₂ ↦ a , t ≡ 1₂ ↦ b]",
            "\\ x → \\ (y : A) → f x y",
            "\\ (t , s) → g t s",
            "Σ (x : A) , B x",
            "first (second p)",
            "first f x",
            "f (first g)",
            "a =_{hom A x y} b",
            "idJ (A , a , \\ x p → C x p , d , b , q)",
            "recOR (t ≡ 0₂ ↦ a , t ≡ 1₂ ↦ b)",
            "recBOT",
            "{(t , s) : 2 × 2 | s ≤ t ∧ ⊤}",
            "(f : (x : A) → B x) → (a : A) → f a = g a",
            "((t , s) : Δ²) → A [s ≡ 0₂ ∨ t ≡ 1₂ ↦ u t s]",
            "(x : A) → (⊥ → ⊤) → 2 × (2 × 1)",
            "refl_{f a : B}",
            "?",
            "x ≤ y ∨ y ≤ x",
            "(a , b , c)",
        ] {
            round_trip(src);
        }
    }

    #[test]
    fn printing_is_deterministic_and_span_free() {
        let a = parse_expr("<one>", "\\ x → f x").unwrap();
        let b = parse_expr("<two>", "\\ x  →  f   x").unwrap();
        assert_eq!(pretty(&a), pretty(&b));
        assert_eq!(dump(&a), dump(&b));
    }

    #[test]
    fn dump_is_structural() {
        let e = parse_expr("<t>", "\\ x → x y").unwrap();
        assert_eq!(dump(&e), "(lam \"x\" _ (app (var \"x\") (var \"y\")))");
    }

    #[test]
    fn nested_arrows_re_associate_correctly() {
        let e = parse_expr("<t>", "(A → B) → C").unwrap();
        let p = pretty(&e);
        assert_eq!(p, "(A → B) → C");
        round_trip("(A → B) → C");
        round_trip("A → B → C");
    }
}
