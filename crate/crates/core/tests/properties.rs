use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use villadsen_core::construction::{
    certify_perforation, expansion_rank, perforation_expand, ExpansionGuard, Method, MultiplicityPolicy, StageConfig,
    StageState,
};
use villadsen_core::rank_calculus::{
    binomial_decompose, binomial_dichotomy, tdg_estimate, DescriptorGraph, Gr, GrowthProfile, Relation,
};
use villadsen_core::{
    chern_class, euler_class, euler_nonzero, hall_check, CohomologyClass, LineBundle, Monomial, VectorBundle,
};

const AMBIENT: usize = 6;

fn class_strategy() -> impl Strategy<Value = CohomologyClass> {
    prop::collection::vec((prop::collection::btree_set(1..=AMBIENT, 0..=3), -4i64..=4), 0..5).prop_map(|terms| {
        CohomologyClass::from_terms(
            AMBIENT,
            terms
                .into_iter()
                .map(|(s, c)| (Monomial::from_indices(s).unwrap(), BigInt::from(c))),
        )
        .unwrap()
    })
}

fn line_strategy(ambient: usize) -> impl Strategy<Value = LineBundle> {
    prop::collection::btree_map(1..=ambient, 1u32..=3, 1..=3)
        .prop_map(move |indices| LineBundle::new(ambient, indices).unwrap())
}

fn bundle_strategy(ambient: usize) -> impl Strategy<Value = VectorBundle> {
    (0usize..=1, prop::collection::vec(line_strategy(ambient), 0..=4))
        .prop_map(move |(t, lines)| VectorBundle::new(ambient, t, lines).unwrap())
}

// Coefficient of ∏_{s∈T} x_s in ∏_j c₁(L_j): sum over bijections j → T of ∏ mult.
fn sdr_weight(lines: &[LineBundle], target: &[usize]) -> BigInt {
    fn go(lines: &[LineBundle], j: usize, free: &mut Vec<usize>) -> BigInt {
        if j == lines.len() {
            return BigInt::from(1);
        }
        let mut total = BigInt::from(0);
        for pos in 0..free.len() {
            let s = free[pos];
            if let Some(&mult) = lines[j].indices().get(&s) {
                free.swap_remove(pos);
                total += go(lines, j + 1, free) * mult;
                free.push(s);
                let last = free.len() - 1;
                free.swap(pos, last);
            }
        }
        total
    }
    go(lines, 0, &mut target.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cup_is_commutative_and_associative(a in class_strategy(), b in class_strategy(), c in class_strategy()) {
        prop_assert_eq!(a.cup(&b).unwrap(), b.cup(&a).unwrap());
        prop_assert_eq!(a.cup(&b).unwrap().cup(&c).unwrap(), a.cup(&b.cup(&c).unwrap()).unwrap());
    }

    #[test]
    fn cup_distributes_over_addition(a in class_strategy(), b in class_strategy(), c in class_strategy()) {
        let left = a.cup(&b.add(&c).unwrap()).unwrap();
        let right = a.cup(&b).unwrap().add(&a.cup(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn euler_coefficients_count_weighted_sdrs(v in bundle_strategy(AMBIENT)) {
        let e = euler_class(&v).unwrap();
        if v.trivial_rank() > 0 {
            prop_assert!(e.is_zero());
        } else {
            let k = v.lines().len();
            for mask in 0u32..(1 << AMBIENT) {
                let target: Vec<usize> = (1..=AMBIENT).filter(|s| mask >> (s - 1) & 1 == 1).collect();
                if target.len() != k {
                    continue;
                }
                let mono = Monomial::from_indices(target.iter().copied()).unwrap();
                prop_assert_eq!(e.coefficient(&mono), sdr_weight(v.lines(), &target));
            }
        }
    }

    #[test]
    fn hall_agrees_with_expanded_euler_class(v in bundle_strategy(AMBIENT)) {
        let expanded = !euler_class(&v).unwrap().is_zero();
        prop_assert_eq!(euler_nonzero(&v).unwrap(), expanded);
        if v.trivial_rank() == 0 {
            prop_assert_eq!(hall_check(&v.supports()).unwrap().holds(), expanded);
        }
    }

    #[test]
    fn characteristic_classes_are_multiplicative(v in bundle_strategy(AMBIENT), w in bundle_strategy(AMBIENT)) {
        let sum = v.whitney_sum(&w).unwrap();
        prop_assert_eq!(euler_class(&sum).unwrap(), euler_class(&v).unwrap().cup(&euler_class(&w).unwrap()).unwrap());
        prop_assert_eq!(chern_class(&sum).unwrap(), chern_class(&v).unwrap().cup(&chern_class(&w).unwrap()).unwrap());
    }

    #[test]
    fn ranks_add_and_multiply(v in bundle_strategy(AMBIENT), w in bundle_strategy(AMBIENT)) {
        prop_assert_eq!(v.whitney_sum(&w).unwrap().rank(), v.rank() + w.rank());
        prop_assert_eq!(v.tensor(&w).unwrap().rank(), v.rank() * w.rank());
    }

    #[test]
    fn top_chern_component_is_euler(lines in prop::collection::vec(line_strategy(AMBIENT), 0..=4)) {
        let v = VectorBundle::from_lines(AMBIENT, lines).unwrap();
        prop_assert_eq!(chern_class(&v).unwrap().top_term(v.rank()), euler_class(&v).unwrap());
    }

    #[test]
    fn stage_invariants_hold_under_any_policy(
        target in 1u32..=3,
        m in prop::option::of(1u64..=4),
        n1 in prop::option::of(1u64..=12),
        stages in 1usize..=6,
    ) {
        let mut config = StageConfig::new(target);
        config.n1 = n1;
        if let Some(m) = m {
            config.policy = MultiplicityPolicy::Constant { m };
        }
        let mut state = StageState::init(&config).unwrap();
        state.advance_to(stages).unwrap();
        prop_assert_eq!(state.check_invariants(), Ok(()));
        for stage in 2..=stages {
            prop_assert!(state.minimality(stage).unwrap().unwrap().holds());
        }
    }

    #[test]
    fn direct_and_recursive_agree_on_toy_overrides(n1 in 1u64..=8, m in 1u64..=2, stages in 1usize..=2) {
        let mut config = StageConfig::new(2);
        config.n1 = Some(n1);
        config.policy = MultiplicityPolicy::Constant { m };
        let mut state = StageState::init(&config).unwrap();
        state.advance_to(stages).unwrap();
        let guard = ExpansionGuard::default();
        for stage in 1..=stages {
            let d = certify_perforation(&state, stage, 2, Method::Direct, &guard).is_ok();
            let r = certify_perforation(&state, stage, 2, Method::Recursive, &guard).is_ok();
            prop_assert_eq!(d, r, "n1 {} m {} stage {}", n1, m, stage);
            let v = perforation_expand(&state, stage, 2, &guard).unwrap();
            prop_assert_eq!(BigUint::from(v.rank()), expansion_rank(&state, stage, 2).unwrap());
        }
    }

    #[test]
    fn closed_form_tdg(c in 1u64..=100, k in 0u32..=6) {
        let p = GrowthProfile::ClosedForm { c: BigUint::from(c), k };
        prop_assert_eq!(tdg_estimate(&p, 10, 1e-3).unwrap().verdict.value(), Some(k + 1));
    }

    #[test]
    fn binomial_rows_sum_and_split(a in 1u32..=20, b in 1u32..=20) {
        let total: BigUint = binomial_decompose(a + b).unwrap().into_iter().map(|t| t.multiplicity).sum();
        prop_assert_eq!(total, BigUint::from(2u32).pow(a + b));
        prop_assert_eq!(binomial_dichotomy(a, b).unwrap(), None);
    }
}

// Random descriptor graphs consistent with a hidden growth-rank assignment.
#[derive(Debug, Clone)]
struct HiddenGraph {
    truth: Vec<Gr>,
    bounds: Vec<(u32, Gr)>,
    relations: Vec<Relation<usize>>,
}

fn gr_value() -> impl Strategy<Value = Gr> {
    prop_oneof![4 => (1u32..=6).prop_map(Gr::Finite), 1 => Just(Gr::Infinite)]
}

fn satisfies(truth: &[Gr], r: &Relation<usize>) -> bool {
    let t = |i: &usize| truth[*i];
    match r {
        Relation::Hereditary { sub, of } => t(sub) <= t(of),
        Relation::Quotient { quotient, of } => t(quotient) <= t(of),
        Relation::Stabilization { stable, of } => t(stable) == t(of),
        Relation::Tensor { product, factors } => factors.iter().all(|f| t(product) <= t(f)),
        Relation::DirectSum { sum, summands } => {
            let total = summands.iter().fold(Gr::Finite(0), |acc, s| acc.saturating_add(t(s)));
            t(sum) <= total && summands.iter().all(|s| t(s) <= t(sum))
        }
        Relation::HereditarySum { sum, parts, of } => {
            let total = parts.iter().fold(Gr::Finite(0), |acc, s| acc.saturating_add(t(s)));
            t(sum) <= total && parts.iter().all(|s| t(s) <= t(sum) && t(s) <= t(of)) && t(sum) <= t(of)
        }
        Relation::InductiveLimit { limit, stages } => stages.iter().any(|s| t(limit) <= t(s)),
        Relation::Extension { algebra, ideal, quotient } => {
            let one = Gr::Finite(1);
            t(ideal) <= t(algebra)
                && t(quotient) <= t(algebra)
                && !(t(ideal) == one && t(quotient) == one && t(algebra) != one)
        }
    }
}

fn hidden_graph() -> impl Strategy<Value = HiddenGraph> {
    (2usize..=20)
        .prop_flat_map(|n| {
            let truth = prop::collection::vec(gr_value(), n);
            let slack = prop::collection::vec((0u32..=3, prop::option::of(0u32..=3)), n);
            let picks = prop::collection::vec((0u8..8, prop::collection::vec(0..n, 4)), 0..=40);
            (truth, slack, picks)
        })
        .prop_map(|(truth, slack, picks)| {
            let bounds = truth
                .iter()
                .zip(slack)
                .map(|(t, (down, up))| match t {
                    Gr::Finite(v) => (v.saturating_sub(down).max(1), up.map_or(Gr::Infinite, |u| Gr::Finite(v + u))),
                    Gr::Infinite => (1 + down, Gr::Infinite),
                })
                .collect();
            let relations = picks
                .into_iter()
                .map(|(kind, nodes)| {
                    let (a, b, c, d) = (nodes[0], nodes[1], nodes[2], nodes[3]);
                    match kind {
                        0 => Relation::Hereditary { sub: a, of: b },
                        1 => Relation::Quotient { quotient: a, of: b },
                        2 => Relation::Stabilization { stable: a, of: b },
                        3 => Relation::Tensor { product: a, factors: vec![b, c] },
                        4 => Relation::DirectSum { sum: a, summands: vec![b, c] },
                        5 => Relation::HereditarySum { sum: a, parts: vec![b, c], of: d },
                        6 => Relation::InductiveLimit { limit: a, stages: vec![b, c, d] },
                        _ => Relation::Extension { algebra: a, ideal: b, quotient: c },
                    }
                })
                .filter(|r| satisfies(&truth, r))
                .collect();
            HiddenGraph { truth, bounds, relations }
        })
}

fn build(h: &HiddenGraph) -> DescriptorGraph {
    let mut g = DescriptorGraph::new();
    for (i, (lower, upper)) in h.bounds.iter().enumerate() {
        g.add_node(format!("A{i}"), *lower, *upper).unwrap();
    }
    for r in &h.relations {
        g.add_relation(r.clone()).unwrap();
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn propagation_is_sound_monotone_and_stable(h in hidden_graph()) {
        let mut g = build(&h);
        let before: Vec<(u32, Gr)> = g.nodes().iter().map(|d| (d.lower, d.upper)).collect();
        let summary = g.propagate().unwrap();
        let after: Vec<(u32, Gr)> = g.nodes().iter().map(|d| (d.lower, d.upper)).collect();
        for (i, ((l0, u0), (l1, u1))) in before.iter().zip(&after).enumerate() {
            prop_assert!(l1 >= l0 && u1 <= u0, "node {} loosened", i);
            prop_assert!(Gr::Finite(*l1) <= h.truth[i] && h.truth[i] <= *u1, "node {} lost its true value", i);
        }
        let max_bound = after
            .iter()
            .chain(&before)
            .flat_map(|(l, u)| [Some(*l), u.finite()])
            .flatten()
            .max()
            .unwrap_or(1) as usize;
        prop_assert!(summary.sweeps <= h.relations.len().max(1) * max_bound * 2 + 1);
        let again = g.propagate().unwrap();
        prop_assert_eq!(again.updates, 0);
        prop_assert_eq!(again.sweeps, 1);
    }
}

#[test]
fn contradiction_is_detected_when_bounds_cannot_hold() {
    let mut g = DescriptorGraph::new();
    let a = g.add_node("A", 1, Gr::Finite(1)).unwrap();
    let i = g.add_node("I", 1, Gr::Finite(1)).unwrap();
    let q = g.add_node("Q", 1, Gr::Finite(1)).unwrap();
    let e = g.add_node("E", 2, Gr::Infinite).unwrap();
    g.add_relation(Relation::Extension { algebra: e, ideal: i, quotient: q }).unwrap();
    g.add_relation(Relation::Hereditary { sub: a, of: e }).unwrap();
    let err = g.propagate().unwrap_err().to_string();
    assert!(err.contains("E"), "{err}");
}
