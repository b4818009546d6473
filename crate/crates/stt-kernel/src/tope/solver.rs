//! Production tope entailment.
//!
//! `hyps ⊨ goal` is decided by computing the exact set of semantic models
//! of the hypotheses and evaluating the goal in each:
//!
//! 1. the hypothesis conjunction is flattened to disjunctive normal form;
//! 2. for each disjunct, equalities collapse points into classes
//!    (union–find), `≤` atoms become edges of a digraph over the classes
//!    (with the implicit `0 ≤ x ≤ 1` edges), cycles collapse further by
//!    antisymmetry, and `0 ≡ 1` kills the disjunct;
//! 3. every weak-order extension of the resulting DAG is enumerated by
//!    repeatedly peeling a nonempty lower set off the remaining classes;
//! 4. the union over disjuncts, deduplicated, is the model set.
//!
//! Entailment only enumerates variables up to the highest index the
//! judgment mentions, so trailing unconstrained dimensions of a wide cube
//! cost nothing. The brute-force oracle in [`super::model`] is the
//! independent cross-check.

use super::model::{IntervalModel, Rank};
use super::{Pt, Tope};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Lit {
    Eq(Pt, Pt),
    Leq(Pt, Pt),
}

/// Disjunctive normal form: a list of conjunctions of literals.
/// `Top` is the empty conjunction; `Bot` contributes no disjunct.
fn dnf(t: &Tope) -> Vec<Vec<Lit>> {
    match t {
        Tope::Top => vec![vec![]],
        Tope::Bot => vec![],
        Tope::Eq(p, q) => vec![vec![Lit::Eq(*p, *q)]],
        Tope::Leq(p, q) => vec![vec![Lit::Leq(*p, *q)]],
        Tope::Or(a, b) => {
            let mut out = dnf(a);
            out.extend(dnf(b));
            out
        }
        Tope::And(a, b) => {
            let da = dnf(a);
            let db = dnf(b);
            let mut out = Vec::with_capacity(da.len() * db.len());
            for xs in &da {
                for ys in &db {
                    let mut c = xs.clone();
                    c.extend(ys.iter().copied());
                    out.push(c);
                }
            }
            out
        }
    }
}

struct Uf {
    parent: Vec<usize>,
}

impl Uf {
    fn new(n: usize) -> Uf {
        Uf { parent: (0..n).collect() }
    }
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// All models (over `n_vars` ambient variables) of one DNF disjunct.
fn disjunct_models(n_vars: usize, lits: &[Lit], out: &mut Vec<IntervalModel>) {
    // Nodes: 0 ↦ the endpoint 0₂, 1 ↦ the endpoint 1₂, 2+i ↦ variable i.
    let n_nodes = n_vars + 2;
    let node = |p: Pt| -> usize {
        match p {
            Pt::Zero => 0,
            Pt::One => 1,
            Pt::Var(i) => 2 + i as usize,
        }
    };
    let mut uf = Uf::new(n_nodes);
    for l in lits {
        if let Lit::Eq(p, q) = l {
            uf.union(node(*p), node(*q));
        }
    }

    // Order edges, including the implicit bounds of the interval.
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    for v in 0..n_vars {
        edges.push((0, 2 + v));
        edges.push((2 + v, 1));
    }
    for l in lits {
        if let Lit::Leq(p, q) = l {
            edges.push((node(*p), node(*q)));
        }
    }

    // Antisymmetry: collapse ≤-cycles until the class graph is a DAG.
    loop {
        let mut reach = vec![vec![false; n_nodes]; n_nodes];
        for &(a, b) in &edges {
            reach[uf.find(a)][uf.find(b)] = true;
        }
        for k in 0..n_nodes {
            for i in 0..n_nodes {
                if reach[i][k] {
                    for j in 0..n_nodes {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut merged = false;
        for i in 0..n_nodes {
            for j in (i + 1)..n_nodes {
                let (ri, rj) = (uf.find(i), uf.find(j));
                if ri != rj && reach[ri][rj] && reach[rj][ri] {
                    uf.union(ri, rj);
                    merged = true;
                }
            }
        }
        if !merged {
            break;
        }
    }

    if uf.find(0) == uf.find(1) {
        return; // 0 ≡ 1: inconsistent disjunct
    }

    // Compress classes and rebuild the DAG over them.
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![usize::MAX; n_nodes];
    for i in 0..n_nodes {
        let r = uf.find(i);
        let c = match reps.iter().position(|&x| x == r) {
            Some(c) => c,
            None => {
                reps.push(r);
                reps.len() - 1
            }
        };
        class_of[i] = c;
    }
    let m = reps.len();
    debug_assert!(m <= 32, "class graph too large");
    let mut pred = vec![0u32; m]; // pred[c] = bitmask of classes with an edge into c
    for &(a, b) in &edges {
        let (ca, cb) = (class_of[uf.find(a)], class_of[uf.find(b)]);
        if ca != cb {
            pred[cb] |= 1 << ca;
        }
    }
    let c_zero = class_of[0];
    let c_one = class_of[1];

    // Peel lower sets: each block is a nonempty subset of the remaining
    // classes with no incoming edge from outside it, and the endpoints
    // never share a block.
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut blocks: Vec<u32> = Vec::new();
    fn peel(
        remaining: u32,
        m: usize,
        pred: &[u32],
        c_zero: usize,
        c_one: usize,
        blocks: &mut Vec<u32>,
        emit: &mut dyn FnMut(&[u32]),
    ) {
        if remaining == 0 {
            emit(blocks);
            return;
        }
        // Enumerate nonempty subsets of `remaining`.
        let mut b = remaining;
        loop {
            let closed = (0..m).all(|c| {
                b & (1 << c) == 0 || pred[c] & remaining & !b == 0
            });
            let splits_endpoints =
                b & (1 << c_zero) != 0 && b & (1 << c_one) != 0;
            if closed && !splits_endpoints {
                blocks.push(b);
                peel(remaining & !b, m, pred, c_zero, c_one, blocks, emit);
                blocks.pop();
            }
            if b == 0 {
                break;
            }
            b = (b - 1) & remaining;
            if b == 0 {
                break;
            }
        }
    }
    let n_before = out.len();
    let mut emit = |blocks: &[u32]| {
        let last = blocks.len() - 1;
        let mut rank = Vec::with_capacity(n_vars);
        let mut interior = 0u32;
        let mut interior_of_block = vec![0u32; blocks.len()];
        for (bi, _) in blocks.iter().enumerate() {
            if bi != 0 && bi != last {
                interior += 1;
                interior_of_block[bi] = interior;
            }
        }
        for v in 0..n_vars {
            let c = class_of[uf.find(2 + v)];
            let bi = blocks.iter().position(|&b| b & (1 << c) != 0).unwrap();
            rank.push(if bi == 0 {
                Rank::Zero
            } else if bi == last {
                Rank::One
            } else {
                Rank::Interior(interior_of_block[bi])
            });
        }
        out.push(IntervalModel { rank });
    };
    peel(full, m, &pred, c_zero, c_one, &mut blocks, &mut emit);
    let _ = n_before;
}

fn compute_models(n_vars: usize, hyps: &[Tope]) -> Vec<IntervalModel> {
    let mut out = Vec::new();
    for disjunct in dnf(&Tope::conj(hyps)) {
        disjunct_models(n_vars, &disjunct, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

thread_local! {
    static MODEL_CACHE: RefCell<HashMap<(usize, Vec<Tope>), Rc<Vec<IntervalModel>>>> =
        RefCell::new(HashMap::new());
}

/// The models of a hypothesis list, memoized per thread.
pub fn models_of(n_vars: usize, hyps: &[Tope]) -> Rc<Vec<IntervalModel>> {
    MODEL_CACHE.with(|cache| {
        if let Some(ms) = cache.borrow().get(&(n_vars, hyps.to_vec())) {
            return ms.clone();
        }
        let ms = Rc::new(compute_models(n_vars, hyps));
        cache.borrow_mut().insert((n_vars, hyps.to_vec()), ms.clone());
        ms
    })
}

/// Decide `hyps ⊨ goal` over `n_vars` interval variables.
///
/// Variables above the highest index actually mentioned cannot influence
/// the answer, so the model search is capped there.
pub fn entails(n_vars: usize, hyps: &[Tope], goal: &Tope) -> bool {
    let used = hyps
        .iter()
        .map(|h| h.var_bound())
        .chain(std::iter::once(goal.var_bound()))
        .max()
        .unwrap_or(0);
    let n = n_vars.min(used);
    models_of(n, hyps).iter().all(|m| m.satisfies(goal))
}

/// Is the hypothesis list satisfiable at all?
pub fn satisfiable(n_vars: usize, hyps: &[Tope]) -> bool {
    let used = hyps.iter().map(|h| h.var_bound()).max().unwrap_or(0);
    !models_of(n_vars.min(used), hyps).is_empty()
}

/// A model of the hypotheses violating the goal, if entailment fails.
/// Models are kept sorted, so the witness is deterministic.
pub fn countermodel(
    n_vars: usize,
    hyps: &[Tope],
    goal: &Tope,
) -> Option<IntervalModel> {
    models_of(n_vars, hyps).iter().find(|m| !m.satisfies(goal)).cloned()
}

#[cfg(test)]
mod tests {
    use super::super::model::{enumerate_models, oracle_entails, oracle_satisfiable};
    use super::*;

    const T: Pt = Pt::Var(0);
    const S: Pt = Pt::Var(1);

    fn or(a: Tope, b: Tope) -> Tope {
        Tope::Or(Rc::new(a), Rc::new(b))
    }
    fn and(a: Tope, b: Tope) -> Tope {
        Tope::And(Rc::new(a), Rc::new(b))
    }

    #[test]
    fn order_axioms_hold() {
        // Reflexivity, transitivity, antisymmetry, totality.
        assert!(entails(1, &[], &Tope::Leq(T, T)));
        assert!(entails(
            3,
            &[Tope::Leq(T, S), Tope::Leq(S, Pt::Var(2))],
            &Tope::Leq(T, Pt::Var(2))
        ));
        assert!(entails(2, &[Tope::Leq(T, S), Tope::Leq(S, T)], &Tope::Eq(T, S)));
        assert!(entails(2, &[], &or(Tope::Leq(T, S), Tope::Leq(S, T))));
        // Bounds.
        assert!(entails(1, &[], &Tope::Leq(Pt::Zero, T)));
        assert!(entails(1, &[], &Tope::Leq(T, Pt::One)));
        // Distinctness of endpoints.
        assert!(entails(0, &[Tope::Eq(Pt::Zero, Pt::One)], &Tope::Bot));
        assert!(entails(1, &[Tope::Leq(Pt::One, Pt::Zero)], &Tope::Bot));
        assert!(!entails(1, &[], &or(Tope::Eq(T, Pt::Zero), Tope::Eq(T, Pt::One))));
    }

    #[test]
    fn equality_is_a_congruence_for_the_order() {
        assert!(entails(
            2,
            &[Tope::Eq(T, S), Tope::Leq(S, Pt::Zero)],
            &Tope::Eq(T, Pt::Zero)
        ));
        assert!(entails(2, &[Tope::Eq(T, S)], &Tope::Eq(S, T)));
        assert!(entails(
            3,
            &[Tope::Eq(T, S), Tope::Eq(S, Pt::Var(2))],
            &Tope::Eq(T, Pt::Var(2))
        ));
    }

    #[test]
    fn disjunction_hypotheses_split() {
        // (t ≡ 0 ∨ t ≡ 1) ⊨ t ≡ 0 ∨ t ≡ 1, but neither disjunct alone.
        let boundary = or(Tope::Eq(T, Pt::Zero), Tope::Eq(T, Pt::One));
        assert!(entails(1, &[boundary.clone()], &boundary));
        assert!(!entails(1, &[boundary.clone()], &Tope::Eq(T, Pt::Zero)));
        // Distribution both ways.
        let lhs = and(Tope::Leq(T, S), or(Tope::Eq(T, Pt::Zero), Tope::Eq(S, Pt::One)));
        let rhs = or(
            and(Tope::Leq(T, S), Tope::Eq(T, Pt::Zero)),
            and(Tope::Leq(T, S), Tope::Eq(S, Pt::One)),
        );
        assert!(entails(2, &[lhs.clone()], &rhs));
        assert!(entails(2, &[rhs], &lhs));
    }

    #[test]
    fn triangle_shape_inclusions() {
        // Over the square with coordinates (t, s): the triangle is s ≤ t,
        // its boundary is s ≡ 0 ∨ s ≡ t ∨ t ≡ 1, and the inner horn drops
        // the diagonal.
        let triangle = Tope::Leq(S, T);
        let boundary = or(
            Tope::Eq(S, Pt::Zero),
            or(Tope::Eq(S, T), Tope::Eq(T, Pt::One)),
        );
        let horn = or(Tope::Eq(S, Pt::Zero), Tope::Eq(T, Pt::One));
        assert!(entails(2, &[horn.clone()], &boundary));
        assert!(entails(2, &[boundary.clone()], &triangle));
        assert!(entails(2, &[horn.clone()], &triangle));
        // None of the reverse inclusions hold.
        assert!(!entails(2, &[boundary.clone()], &horn));
        assert!(!entails(2, &[triangle.clone()], &boundary));
        // The diagonal is in the boundary but not the horn.
        assert!(entails(2, &[Tope::Eq(S, T)], &boundary));
        assert!(!entails(2, &[Tope::Eq(S, T) ], &horn));
    }

    #[test]
    fn countermodels_are_deterministic_and_correct() {
        let triangle = Tope::Leq(S, T);
        let boundary = or(
            Tope::Eq(S, Pt::Zero),
            or(Tope::Eq(S, T), Tope::Eq(T, Pt::One)),
        );
        let m = countermodel(2, &[triangle.clone()], &boundary).expect("countermodel");
        assert!(m.satisfies(&triangle));
        assert!(!m.satisfies(&boundary));
        let names = vec!["t".to_string(), "s".to_string()];
        // Sorted order pins the reported witness.
        assert_eq!(m.display(&names), "0 = ∅ < {s} < {t} < 1");
        assert!(countermodel(2, &[boundary], &triangle).is_none());
    }

    #[test]
    fn generated_models_match_oracle_filter() {
        // The generator must produce exactly the oracle's filtered model
        // set for every hypothesis in a structured family.
        let atoms = [
            Tope::Top,
            Tope::Bot,
            Tope::Eq(T, S),
            Tope::Eq(T, Pt::Zero),
            Tope::Eq(S, Pt::One),
            Tope::Leq(T, S),
            Tope::Leq(S, T),
            Tope::Leq(S, Pt::Zero),
        ];
        let mut formulas: Vec<Tope> = atoms.to_vec();
        for a in &atoms {
            for b in &atoms {
                formulas.push(and(a.clone(), b.clone()));
                formulas.push(or(a.clone(), b.clone()));
            }
        }
        let all = enumerate_models(2);
        for f in &formulas {
            let expected: Vec<_> =
                all.iter().filter(|m| m.satisfies(f)).cloned().collect();
            let got = compute_models(2, std::slice::from_ref(f));
            assert_eq!(got, expected, "model mismatch for {}", f);
        }
    }

    #[test]
    fn agrees_with_oracle_on_three_variable_formulas() {
        let u = Pt::Var(2);
        let cases: Vec<(Vec<Tope>, Tope)> = vec![
            (vec![Tope::Leq(T, S), Tope::Leq(S, u)], Tope::Leq(T, u)),
            (
                vec![or(Tope::Eq(T, S), Tope::Eq(S, u))],
                or(Tope::Eq(T, S), or(Tope::Eq(S, u), Tope::Eq(T, u))),
            ),
            (
                vec![Tope::Leq(T, S), Tope::Eq(S, Pt::Zero)],
                Tope::Eq(T, Pt::Zero),
            ),
            (vec![], or(Tope::Leq(T, S), Tope::Leq(S, T))),
            (vec![Tope::Eq(u, T), Tope::Leq(T, S), Tope::Leq(S, u)], Tope::Eq(T, S)),
            (vec![and(Tope::Leq(S, T), Tope::Leq(u, S))], Tope::Leq(u, T)),
        ];
        for (hyps, goal) in cases {
            assert_eq!(
                entails(3, &hyps, &goal),
                oracle_entails(3, &hyps, &goal),
                "disagreement on {:?} ⊨ {}",
                hyps,
                goal
            );
        }
    }

    #[test]
    fn satisfiability_matches_oracle() {
        let cases: Vec<Vec<Tope>> = vec![
            vec![Tope::Eq(T, Pt::Zero), Tope::Eq(T, Pt::One)],
            vec![Tope::Leq(S, T), Tope::Eq(S, Pt::One), Tope::Eq(T, Pt::Zero)],
            vec![Tope::Leq(S, T), Tope::Eq(S, Pt::One)],
            vec![Tope::Bot],
            vec![],
        ];
        for hyps in cases {
            assert_eq!(
                satisfiable(2, &hyps),
                oracle_satisfiable(2, &hyps),
                "satisfiability disagreement on {:?}",
                hyps
            );
        }
    }

    #[test]
    fn wide_cubes_only_pay_for_mentioned_variables() {
        // The judgments below live in a 6-dimensional cube but only touch
        // the first two (resp. last) coordinates; answers must match the
        // narrow versions.
        assert!(entails(6, &[Tope::Leq(T, S), Tope::Leq(S, T)], &Tope::Eq(T, S)));
        assert!(!entails(6, &[], &Tope::Eq(Pt::Var(4), Pt::Var(5))));
        assert!(entails(6, &[], &Tope::Leq(Pt::Var(5), Pt::One)));
        assert!(!entails(6, &[Tope::Leq(Pt::Var(5), Pt::Var(4))], &Tope::Eq(T, S)));
    }
}
