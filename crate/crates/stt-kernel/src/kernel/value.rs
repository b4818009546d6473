//! Semantic values.
//!
//! Evaluation is normalization by evaluation: expressions evaluate into
//! this value language, `quote` reads values back into core expressions.
//! Binders become closures (captured environment + body); variables become
//! neutral heads carrying their type, which is what lets a boundary
//! constraint on a neutral's type fire computationally once the ambient
//! tope hypotheses become strong enough.
//!
//! Points are kept *scalarized*: a binder over a product cube immediately
//! becomes a pair of atoms, each atom being one solver variable of the
//! tope layer. Tope values are solver formulas directly.

use crate::ast::{Expr, Name, Pattern};
use crate::tope::Tope;
use std::rc::Rc;

pub type Env = Vec<Rc<Value>>;
pub type Lvl = usize;

/// A binder body: evaluate `body` in `env` extended with the argument
/// (or, for constraint arms which bind nothing, in `env` as is).
#[derive(Clone, Debug)]
pub struct Closure {
    pub env: Env,
    pub body: Rc<Expr>,
}

/// A point of some cube, in canonical form. Atoms are scalar interval
/// variables registered with the ambient tope context; `index` is the
/// solver variable they correspond to.
#[derive(Clone, Debug, PartialEq)]
pub enum PointVal {
    /// The unique point of the unit cube.
    Star,
    Zero,
    One,
    /// A scalar interval variable (index into [`TopeCtx::atoms`]).
    ///
    /// [`TopeCtx::atoms`]: super::eval::TopeCtx
    Atom(u32),
    Pair(Rc<PointVal>, Rc<PointVal>),
}

#[derive(Clone, Debug)]
pub enum Head {
    /// A bound variable, identified by its binding level.
    Var { lvl: Lvl, name: Name, ty: Rc<Value> },
    /// A reference to a global or in-section definition; kept folded until
    /// something demands its structure. `tele` is the enclosing section
    /// telescope environment needed to unfold in-section definitions
    /// (empty for true globals).
    Global { name: Name, tele: Env },
}

#[derive(Clone, Debug)]
pub enum Elim {
    App { arg: Rc<Value> },
    First,
    Second,
    /// Path induction, blocked on a neutral path. All parameters are kept
    /// so the eliminator can be replayed and compared.
    J {
        ty: Rc<Value>,
        base: Rc<Value>,
        motive: Rc<Value>,
        refl_case: Rc<Value>,
        target: Rc<Value>,
    },
}

/// A stuck computation with its type. The type drives both η-rules and
/// the refinement computation rule.
#[derive(Clone, Debug)]
pub struct Neutral {
    pub head: Head,
    pub spine: Vec<Elim>,
    pub ty: Rc<Value>,
}

#[derive(Clone, Debug)]
pub enum Value {
    Universe,
    UniverseCube,
    UniverseTope,

    CubeUnit,
    Cube2,
    CubeProduct(Rc<Value>, Rc<Value>),
    /// `{pattern : cube | tope}`; the closure receives the point.
    ShapeV { binder: Pattern, cube: Rc<Value>, tope: Closure },

    Point(PointVal),
    TopeVal(Tope),

    PiV { binder: Pattern, domain: Rc<Value>, cod: Closure },
    SigmaV { binder: Pattern, domain: Rc<Value>, cod: Closure },
    Lam { binder: Pattern, domain: Rc<Value>, closure: Closure },
    PairV(Rc<Value>, Rc<Value>),

    IdV { ty: Rc<Value>, lhs: Rc<Value>, rhs: Rc<Value> },
    ReflV(Rc<Value>),

    /// A type with boundary constraints: `ty [φ₁ ↦ a₁ , …]`. Arm bodies
    /// are evaluated on demand, under the hypotheses that include their
    /// tope.
    RefineV { ty: Rc<Value>, arms: Vec<(Tope, Closure)> },

    /// A tope-case split none of whose branches is entailed yet.
    /// `pending` records eliminations applied while stuck.
    RecOrV { arms: Vec<(Tope, Closure)>, pending: Vec<Elim> },
    /// The eliminator of the empty shape; inert (only well typed where
    /// the hypotheses are inconsistent).
    RecBotV,

    Neutral(Rc<Neutral>),
}

impl Value {
    pub fn neutral(head: Head, spine: Vec<Elim>, ty: Rc<Value>) -> Rc<Value> {
        Rc::new(Value::Neutral(Rc::new(Neutral { head, spine, ty })))
    }

    /// Fresh variable of a given type at a binding level.
    pub fn var(lvl: Lvl, name: impl Into<Name>, ty: Rc<Value>) -> Rc<Value> {
        Value::neutral(Head::Var { lvl, name: name.into(), ty: ty.clone() }, Vec::new(), ty)
    }

    pub fn point(p: PointVal) -> Rc<Value> {
        Rc::new(Value::Point(p))
    }

    pub fn tope(t: Tope) -> Rc<Value> {
        Rc::new(Value::TopeVal(t))
    }

    pub fn is_cube_sorted(&self) -> bool {
        matches!(
            self,
            Value::CubeUnit
                | Value::Cube2
                | Value::CubeProduct(..)
                | Value::ShapeV { .. }
        )
    }
}

/// Information about one scalar interval variable in scope: which binder
/// level it belongs to, the projection path from that binder's point
/// (`0` = first component, `1` = second), the display name used in
/// countermodels, and the display name of the whole binder slot used when
/// quoting projection chains.
#[derive(Clone, Debug)]
pub struct AtomInfo {
    pub lvl: Lvl,
    pub path: Vec<u8>,
    pub name: String,
    pub slot: String,
}
