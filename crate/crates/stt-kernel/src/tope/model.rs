//! Semantic models of the directed interval and the brute-force oracle.
//!
//! A model places each interval variable somewhere on `[0, 1]`: at the
//! bottom endpoint, at the top endpoint, or in one of finitely many
//! *interior clusters* that are strictly ordered between the endpoints.
//! Only the induced weak order is observable by `≡` and `≤`, so this
//! finite data decides every tope formula.
//!
//! The number of models over `n` variables is `1, 3, 11, 51, …` for
//! `n = 0, 1, 2, 3, …` (each variable independently sits at an endpoint
//! or joins the interior weak order); the exact counts are frozen in a
//! test below as a canary against enumeration bugs.

use super::{Pt, Tope};
use std::fmt::Write as _;

/// Placement of one variable in a model.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Rank {
    /// Equal to the bottom endpoint `0₂`.
    Zero,
    /// In the `i`-th interior cluster (1-based, strictly between endpoints).
    Interior(u32),
    /// Equal to the top endpoint `1₂`.
    One,
}

/// A weak ordering of `n` interval variables between the endpoints.
///
/// Invariant: the interior ranks used form a contiguous range `1..=k`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct IntervalModel {
    pub rank: Vec<Rank>,
}

impl IntervalModel {
    /// Numeric position used to decide `≡`/`≤`; endpoints at the extremes.
    fn position(&self, p: Pt) -> u64 {
        match p {
            Pt::Zero => 0,
            Pt::One => u64::MAX,
            Pt::Var(i) => match self.rank[i as usize] {
                Rank::Zero => 0,
                Rank::Interior(c) => c as u64,
                Rank::One => u64::MAX,
            },
        }
    }

    pub fn satisfies(&self, t: &Tope) -> bool {
        match t {
            Tope::Top => true,
            Tope::Bot => false,
            Tope::And(a, b) => self.satisfies(a) && self.satisfies(b),
            Tope::Or(a, b) => self.satisfies(a) || self.satisfies(b),
            Tope::Eq(p, q) => self.position(*p) == self.position(*q),
            Tope::Leq(p, q) => self.position(*p) <= self.position(*q),
        }
    }

    pub fn satisfies_all(&self, ts: &[Tope]) -> bool {
        ts.iter().all(|t| self.satisfies(t))
    }

    /// Render as an order diagram, e.g. `0 = ∅ < {s} < {t} < 1`.
    ///
    /// The bottom endpoint always displays its cluster (`∅` when no
    /// variable sits there); the top endpoint displays one only when
    /// some variable does.
    pub fn display(&self, names: &[String]) -> String {
        let name = |i: usize| {
            names.get(i).cloned().unwrap_or_else(|| format!("x{}", i))
        };
        let set = |ranks: &[usize]| {
            let mut parts: Vec<String> = ranks.iter().map(|&i| name(i)).collect();
            parts.sort();
            format!("{{{}}}", parts.join(", "))
        };
        let zeros: Vec<usize> =
            (0..self.rank.len()).filter(|&i| self.rank[i] == Rank::Zero).collect();
        let ones: Vec<usize> =
            (0..self.rank.len()).filter(|&i| self.rank[i] == Rank::One).collect();
        let k = self
            .rank
            .iter()
            .filter_map(|r| match r {
                Rank::Interior(c) => Some(*c),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        if zeros.is_empty() {
            out.push_str("0 = ∅");
        } else {
            let _ = write!(out, "0 = {}", set(&zeros));
        }
        for c in 1..=k {
            let cluster: Vec<usize> = (0..self.rank.len())
                .filter(|&i| self.rank[i] == Rank::Interior(c))
                .collect();
            let _ = write!(out, " < {}", set(&cluster));
        }
        out.push_str(" < 1");
        if !ones.is_empty() {
            let _ = write!(out, " = {}", set(&ones));
        }
        out
    }
}

/// Every model over `n` variables, in a deterministic order.
pub fn enumerate_models(n: usize) -> Vec<IntervalModel> {
    // Choose endpoint/interior status per variable, then every ordered
    // partition of the interior set into clusters.
    let mut out = Vec::new();
    let mut rank = vec![Rank::Zero; n];
    fn assign(
        i: usize,
        n: usize,
        rank: &mut Vec<Rank>,
        interior: &mut Vec<usize>,
        out: &mut Vec<IntervalModel>,
    ) {
        if i == n {
            // Order the interior variables into clusters 1..=k.
            fn clusters(
                remaining: &[usize],
                next: u32,
                rank: &mut Vec<Rank>,
                out: &mut Vec<IntervalModel>,
            ) {
                if remaining.is_empty() {
                    out.push(IntervalModel { rank: rank.clone() });
                    return;
                }
                // Every nonempty subset of `remaining` can be the next cluster.
                let m = remaining.len();
                for mask in 1u32..(1 << m) {
                    let mut rest = Vec::new();
                    for (j, &v) in remaining.iter().enumerate() {
                        if mask & (1 << j) != 0 {
                            rank[v] = Rank::Interior(next);
                        } else {
                            rest.push(v);
                        }
                    }
                    clusters(&rest, next + 1, rank, out);
                }
            }
            clusters(interior, 1, rank, out);
            return;
        }
        rank[i] = Rank::Zero;
        assign(i + 1, n, rank, interior, out);
        rank[i] = Rank::One;
        assign(i + 1, n, rank, interior, out);
        interior.push(i);
        assign(i + 1, n, rank, interior, out);
        interior.pop();
    }
    assign(0, n, &mut rank, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// Reference decision procedure: enumerate all models of the ambient
/// variable set, keep those satisfying every hypothesis, and require the
/// goal in each. Exponential and proud of it.
pub fn oracle_entails(n_vars: usize, hyps: &[Tope], goal: &Tope) -> bool {
    enumerate_models(n_vars)
        .iter()
        .filter(|m| m.satisfies_all(hyps))
        .all(|m| m.satisfies(goal))
}

/// Reference satisfiability check.
pub fn oracle_satisfiable(n_vars: usize, hyps: &[Tope]) -> bool {
    enumerate_models(n_vars).iter().any(|m| m.satisfies_all(hyps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Frozen model counts for 0–3 variables. These are the number of weak
    /// orderings of `n` labeled elements relative to two fixed, distinct
    /// endpoints; recomputing them guards the enumerator against drift.
    #[test]
    fn model_counts_are_frozen() {
        let counts: Vec<usize> = (0..=3).map(|n| enumerate_models(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 11, 51]);
        // And 4 variables, for good measure: 2·51 + independent checks via
        // the recurrence would be overkill; pin the computed value.
        assert_eq!(enumerate_models(4).len(), 299);
    }

    #[test]
    fn enumeration_has_no_duplicates_and_contiguous_clusters() {
        for n in 0..=3 {
            let ms = enumerate_models(n);
            let set: HashSet<_> = ms.iter().cloned().collect();
            assert_eq!(set.len(), ms.len());
            for m in &ms {
                let mut used: Vec<u32> = m
                    .rank
                    .iter()
                    .filter_map(|r| match r {
                        Rank::Interior(c) => Some(*c),
                        _ => None,
                    })
                    .collect();
                used.sort();
                used.dedup();
                let k = used.len() as u32;
                assert_eq!(used, (1..=k).collect::<Vec<_>>(), "gap in clusters: {:?}", m);
            }
        }
    }

    #[test]
    fn single_variable_models_are_the_three_placements() {
        let ms = enumerate_models(1);
        let ranks: HashSet<Rank> = ms.iter().map(|m| m.rank[0]).collect();
        assert_eq!(
            ranks,
            [Rank::Zero, Rank::Interior(1), Rank::One].into_iter().collect()
        );
    }

    #[test]
    fn satisfaction_of_basic_atoms() {
        let m = IntervalModel { rank: vec![Rank::Interior(1), Rank::Interior(2)] };
        let t = Pt::Var(0);
        let s = Pt::Var(1);
        assert!(m.satisfies(&Tope::Leq(t, s)));
        assert!(!m.satisfies(&Tope::Leq(s, t)));
        assert!(!m.satisfies(&Tope::Eq(t, s)));
        assert!(m.satisfies(&Tope::Leq(Pt::Zero, t)));
        assert!(m.satisfies(&Tope::Leq(s, Pt::One)));
        assert!(!m.satisfies(&Tope::Eq(t, Pt::Zero)));
        assert!(!m.satisfies(&Tope::Eq(Pt::Zero, Pt::One)));
        assert!(m.satisfies(&Tope::Leq(Pt::Zero, Pt::One)));
    }

    #[test]
    fn display_matches_pinned_format() {
        let names = vec!["t".to_string(), "s".to_string()];
        // s strictly below t, both interior.
        let m = IntervalModel { rank: vec![Rank::Interior(2), Rank::Interior(1)] };
        assert_eq!(m.display(&names), "0 = ∅ < {s} < {t} < 1");
        let m = IntervalModel { rank: vec![Rank::One, Rank::Zero] };
        assert_eq!(m.display(&names), "0 = {s} < 1 = {t}");
        let m = IntervalModel { rank: vec![Rank::Interior(1), Rank::Interior(1)] };
        assert_eq!(m.display(&names), "0 = ∅ < {s, t} < 1");
        let m = IntervalModel { rank: vec![] };
        assert_eq!(m.display(&[]), "0 = ∅ < 1");
    }

    #[test]
    fn oracle_decides_classic_judgments() {
        let t = Pt::Var(0);
        let s = Pt::Var(1);
        // Reflexivity and totality of ≤ on the directed interval.
        assert!(oracle_entails(1, &[], &Tope::Leq(t, t)));
        assert!(oracle_entails(
            2,
            &[],
            &Tope::Or(
                std::rc::Rc::new(Tope::Leq(t, s)),
                std::rc::Rc::new(Tope::Leq(s, t))
            )
        ));
        // Antisymmetry.
        assert!(oracle_entails(
            2,
            &[Tope::Leq(t, s), Tope::Leq(s, t)],
            &Tope::Eq(t, s)
        ));
        // Distinct endpoints.
        assert!(oracle_entails(0, &[Tope::Eq(Pt::Zero, Pt::One)], &Tope::Bot));
        assert!(!oracle_entails(1, &[], &Tope::Eq(t, Pt::Zero)));
        assert!(oracle_satisfiable(1, &[Tope::Eq(t, Pt::Zero)]));
        assert!(!oracle_satisfiable(
            1,
            &[Tope::Eq(t, Pt::Zero), Tope::Eq(t, Pt::One)]
        ));
    }
}
