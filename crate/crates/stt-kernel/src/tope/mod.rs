//! Tope logic: syntax, decidable entailment, and the semantic model layer.
//!
//! A tope is a constraint over interval variables. The fragment is:
//! `⊤`, `⊥`, conjunction, disjunction, equality between points, and the
//! order relation `≤` on the directed interval. There is no negation and
//! no implication, which is what keeps entailment decidable by finite
//! model enumeration.
//!
//! Two independent deciders live here:
//!
//! * [`solver::entails`] — the production route: hypotheses are put in
//!   disjunctive normal form and, per disjunct, the models are *generated*
//!   from the constraint graph (equalities collapse classes, `≤` edges
//!   form a DAG, weak-order extensions are enumerated).
//! * [`model::oracle_entails`] — the reference route: enumerate *every*
//!   model of the ambient variables combinatorially and filter.
//!
//! The two must agree on everything; tests compare them exhaustively.

pub mod model;
pub mod solver;

use std::fmt;
use std::rc::Rc;

/// A point occurring in a tope atom, already scalarized: either an endpoint
/// of the directed interval or one of the query's interval variables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Pt {
    Zero,
    One,
    Var(u32),
}

/// Tope formula over scalar points.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Tope {
    Top,
    Bot,
    And(Rc<Tope>, Rc<Tope>),
    Or(Rc<Tope>, Rc<Tope>),
    Eq(Pt, Pt),
    Leq(Pt, Pt),
}

impl Tope {
    pub fn and(a: Tope, b: Tope) -> Tope {
        match (&a, &b) {
            (Tope::Top, _) => b,
            (_, Tope::Top) => a,
            (Tope::Bot, _) | (_, Tope::Bot) => Tope::Bot,
            _ => Tope::And(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn or(a: Tope, b: Tope) -> Tope {
        match (&a, &b) {
            (Tope::Bot, _) => b,
            (_, Tope::Bot) => a,
            (Tope::Top, _) | (_, Tope::Top) => Tope::Top,
            _ => Tope::Or(Rc::new(a), Rc::new(b)),
        }
    }

    /// Conjunction of a whole list.
    pub fn conj(ts: &[Tope]) -> Tope {
        ts.iter().fold(Tope::Top, |acc, t| Tope::and(acc, t.clone()))
    }

    /// Split into disjunction-free disjuncts (disjunctive normal form).
    /// The formula is equivalent to the disjunction of the result.
    pub fn disjuncts(&self) -> Vec<Tope> {
        match self {
            Tope::Or(a, b) => {
                let mut out = a.disjuncts();
                out.extend(b.disjuncts());
                out
            }
            Tope::And(a, b) => {
                let da = a.disjuncts();
                let db = b.disjuncts();
                let mut out = Vec::with_capacity(da.len() * db.len());
                for x in &da {
                    for y in &db {
                        out.push(Tope::and(x.clone(), y.clone()));
                    }
                }
                out
            }
            _ => vec![self.clone()],
        }
    }

    /// Largest variable index mentioned, plus one.
    pub fn var_bound(&self) -> usize {
        fn pt(p: Pt) -> usize {
            match p {
                Pt::Var(i) => i as usize + 1,
                _ => 0,
            }
        }
        match self {
            Tope::Top | Tope::Bot => 0,
            Tope::And(a, b) | Tope::Or(a, b) => a.var_bound().max(b.var_bound()),
            Tope::Eq(p, q) | Tope::Leq(p, q) => pt(*p).max(pt(*q)),
        }
    }
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pt::Zero => write!(f, "0₂"),
            Pt::One => write!(f, "1₂"),
            Pt::Var(i) => write!(f, "x{}", i),
        }
    }
}

impl fmt::Display for Tope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Tope, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let mine = match t {
                Tope::Or(..) => 0,
                Tope::And(..) => 1,
                _ => 2,
            };
            if mine < prec {
                write!(f, "(")?;
            }
            match t {
                Tope::Top => write!(f, "⊤")?,
                Tope::Bot => write!(f, "⊥")?,
                Tope::And(a, b) => {
                    go(a, 1, f)?;
                    write!(f, " ∧ ")?;
                    go(b, 2, f)?;
                }
                Tope::Or(a, b) => {
                    go(a, 0, f)?;
                    write!(f, " ∨ ")?;
                    go(b, 1, f)?;
                }
                Tope::Eq(p, q) => write!(f, "{} ≡ {}", p, q)?,
                Tope::Leq(p, q) => write!(f, "{} ≤ {}", p, q)?,
            }
            if mine < prec {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

/// Convert a parsed surface expression into a solver tope, resolving
/// variable names against `vars`. Used by the command-line tope checker
/// and by tests; the kernel has its own richer conversion.
pub fn tope_from_expr(
    e: &crate::ast::Expr,
    vars: &[String],
) -> Result<Tope, String> {
    use crate::ast::ExprKind as E;
    fn point(e: &crate::ast::Expr, vars: &[String]) -> Result<Pt, String> {
        match &e.kind {
            E::PointZero => Ok(Pt::Zero),
            E::PointOne => Ok(Pt::One),
            E::Var(n) => match vars.iter().position(|v| v == n) {
                Some(i) => Ok(Pt::Var(i as u32)),
                None => Err(format!("unknown interval variable '{}'", n)),
            },
            _ => Err("points in a tope query must be variables, 0₂, or 1₂".into()),
        }
    }
    match &e.kind {
        E::TopeTop => Ok(Tope::Top),
        E::TopeBottom => Ok(Tope::Bot),
        E::TopeAnd(a, b) => Ok(Tope::And(
            Rc::new(tope_from_expr(a, vars)?),
            Rc::new(tope_from_expr(b, vars)?),
        )),
        E::TopeOr(a, b) => Ok(Tope::Or(
            Rc::new(tope_from_expr(a, vars)?),
            Rc::new(tope_from_expr(b, vars)?),
        )),
        E::TopeEqT(a, b) => Ok(Tope::Eq(point(a, vars)?, point(b, vars)?)),
        E::TopeLeq(a, b) => Ok(Tope::Leq(point(a, vars)?, point(b, vars)?)),
        _ => Err("expected a tope formula".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    #[test]
    fn display_round_trips_through_parser() {
        let vars = vec!["t".to_string(), "s".to_string()];
        for src in ["t ≡ 0₂ ∨ t ≡ 1₂", "s ≤ t ∧ (s ≡ 0₂ ∨ ⊤)", "⊥"] {
            let t = tope_from_expr(&parse_expr("<t>", src).unwrap(), &vars).unwrap();
            let shown = t.to_string().replace("x0", "t").replace("x1", "s");
            let back = tope_from_expr(&parse_expr("<t>", &shown).unwrap(), &vars).unwrap();
            assert_eq!(t, back, "display of {} was {}", src, shown);
        }
    }

    #[test]
    fn conversion_rejects_non_points() {
        let e = parse_expr("<t>", "f x ≡ 0₂").unwrap();
        assert!(tope_from_expr(&e, &[]).is_err());
        let e = parse_expr("<t>", "u ≤ v").unwrap();
        assert!(tope_from_expr(&e, &["u".into()]).is_err());
    }

    #[test]
    fn smart_constructors_simplify_units() {
        assert_eq!(Tope::and(Tope::Top, Tope::Bot), Tope::Bot);
        assert_eq!(Tope::or(Tope::Bot, Tope::Top), Tope::Top);
        assert_eq!(Tope::conj(&[]), Tope::Top);
    }
}
