use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use proptest::prelude::*;

use rotor_core::algebra::{arborescence_count, period_vector};
use rotor_core::divisors::{
    apply_firing, apply_firing_exact, enumerate_w_reduced, Divisor, FiringConvention, PicardGroup,
};
use rotor_core::graph::{fixtures, parse_digraph, Digraph};
use rotor_core::rotor::{
    arborescence_to_unicycle, classify_by_simulation, enumerate_arborescences, is_unicycle, step,
    unicycle_to_arborescence, Recurrence, StateSpace,
};
use rotor_core::DEFAULT_CAP;

fn small_graph() -> impl Strategy<Value = Digraph> {
    (2usize..=5, 0usize..=4, any::<u64>())
        .prop_map(|(n, extra, seed)| Digraph::random(n, extra, seed).unwrap())
}

fn fixture_graph() -> impl Strategy<Value = Digraph> {
    prop::sample::select(fixtures::all().into_iter().map(|(_, d)| d).collect::<Vec<_>>())
}

/// Breadth-first reachability from `s`, written independently of the library.
fn reaches_all(d: &Digraph, s: usize) -> bool {
    let mut seen = vec![false; d.n()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(v) = stack.pop() {
        for &h in d.heads(v) {
            if !seen[h] {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// Searches `z` in `[-r, r]^n` with `x = y + L z`.
fn witness_in_box(d: &Digraph, x: &Divisor, y: &Divisor, r: i64) -> bool {
    let n = d.n();
    let mut z = vec![-r; n];
    loop {
        if apply_firing(d, y, &z).unwrap() == *x {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            if z[i] < r {
                z[i] += 1;
                break;
            }
            z[i] = -r;
            i += 1;
        }
    }
}

fn degree_zero(n: usize, raw: &[i64]) -> Divisor {
    let mut v = raw[..n].to_vec();
    v[n - 1] = -v[..n - 1].iter().sum::<i64>();
    Divisor(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_graphs_are_strongly_connected(d in small_graph()) {
        for v in 0..d.n() {
            prop_assert!(reaches_all(&d, v));
        }
    }

    #[test]
    fn serialization_round_trips(d in small_graph()) {
        prop_assert_eq!(parse_digraph(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn laplacian_columns_vanish(d in small_graph()) {
        let l = d.laplacian();
        for j in 0..d.n() {
            let s: BigInt = (0..d.n()).map(|i| &l[(i, j)]).sum();
            prop_assert_eq!(s, BigInt::from(0));
        }
    }

    #[test]
    fn step_permutes_unicycles(d in small_graph()) {
        let space = StateSpace::new(&d, DEFAULT_CAP).unwrap();
        let mut preds: HashMap<_, usize> = HashMap::new();
        for s in space.states() {
            let t = step(&d, &s);
            if is_unicycle(&d, &s) {
                prop_assert!(is_unicycle(&d, &t));
            }
            if is_unicycle(&d, &t) && is_unicycle(&d, &s) {
                *preds.entry(t).or_default() += 1;
            }
        }
        for s in space.states().filter(|s| is_unicycle(&d, s)) {
            prop_assert_eq!(preds.get(&s).copied(), Some(1), "{}", s);
        }
    }

    #[test]
    fn recurrent_iff_unicycle(d in small_graph()) {
        let space = StateSpace::new(&d, DEFAULT_CAP).unwrap();
        for s in space.states() {
            let (class, steps) = classify_by_simulation(&d, &s);
            prop_assert!(steps <= space.size() + 1);
            prop_assert_eq!(class == Recurrence::Recurrent, is_unicycle(&d, &s));
        }
    }

    #[test]
    fn matrix_tree_matches_backtracking(n in 2usize..=6, extra in 0usize..=5, seed: u64) {
        let d = Digraph::random(n, extra, seed).unwrap();
        for w in 0..n {
            let arbs = enumerate_arborescences(&d, w);
            prop_assert_eq!(BigInt::from(arbs.len()), arborescence_count(&d, w));
            let distinct: HashSet<_> = arbs.iter().collect();
            prop_assert_eq!(distinct.len(), arbs.len());
        }
    }

    #[test]
    fn arborescence_unicycle_round_trip(d in small_graph()) {
        for w in 0..d.n() {
            let mut images = HashSet::new();
            for t in enumerate_arborescences(&d, w) {
                for k in 0..d.out_degree(w) {
                    let s = arborescence_to_unicycle(&d, &t, k).unwrap();
                    prop_assert!(is_unicycle(&d, &s));
                    let (back, k2) = unicycle_to_arborescence(&d, &s, w).unwrap();
                    prop_assert_eq!(&back, &t);
                    prop_assert_eq!(k2, k);
                    prop_assert!(images.insert(s));
                }
            }
        }
    }

    #[test]
    fn period_vector_is_primitive_kernel(d in small_graph()) {
        let per = period_vector(&d).unwrap();
        let lp = d.laplacian().mul_vec(per.as_slice());
        prop_assert!(lp.iter().all(|x| *x == BigInt::from(0)));
        prop_assert!(per.as_slice().iter().all(|x| *x >= BigInt::from(1)));
    }

    #[test]
    fn firing_preserves_degree(
        d in small_graph(),
        raw_x in prop::collection::vec(-20i64..=20, 5),
        raw_f in prop::collection::vec(-5i64..=5, 5),
    ) {
        let n = d.n();
        let x = Divisor(raw_x[..n].to_vec());
        let y = apply_firing(&d, &x, &raw_f[..n]).unwrap();
        prop_assert_eq!(y.degree(), x.degree());
    }

    #[test]
    fn equivalence_is_an_equivalence(
        d in fixture_graph(),
        a in prop::collection::vec(-5i64..=5, 3),
        b in prop::collection::vec(-5i64..=5, 3),
        c in prop::collection::vec(-5i64..=5, 3),
    ) {
        let n = d.n();
        let (x, y, z) = (degree_zero(n, &a), degree_zero(n, &b), degree_zero(n, &c));
        let group = PicardGroup::new(&d).unwrap();
        let eq = |p: &Divisor, q: &Divisor| -> bool {
            match group.equivalent(p, q).unwrap() {
                Some(w) => {
                    let pb: Vec<BigInt> = p.values().iter().map(|&v| v.into()).collect();
                    let qb: Vec<BigInt> = q.values().iter().map(|&v| v.into()).collect();
                    assert_eq!(apply_firing_exact(&d, &qb, &w), pb);
                    true
                }
                None => false,
            }
        };
        prop_assert!(eq(&x, &x));
        prop_assert_eq!(eq(&x, &y), eq(&y, &x));
        if eq(&x, &y) && eq(&y, &z) {
            prop_assert!(eq(&x, &z));
        }
        prop_assert_eq!(
            group.canonical_form(&x).unwrap() == group.canonical_form(&y).unwrap(),
            eq(&x, &y)
        );
    }
}

#[test]
fn canonical_form_matches_bounded_witness_search() {
    for (name, d) in fixtures::all() {
        let group = PicardGroup::new(&d).unwrap();
        let n = d.n();
        let divisors: Vec<Divisor> = (-2i64..=2)
            .flat_map(|a| (-2i64..=2).map(move |b| (a, b)))
            .map(|(a, b)| {
                let mut v = vec![0i64; n];
                v[0] = a;
                v[1 % n] += b;
                v[n - 1] -= a + b;
                Divisor(v)
            })
            .collect();
        for x in &divisors {
            for y in &divisors {
                let same = group.canonical_form(x).unwrap() == group.canonical_form(y).unwrap();
                let found = witness_in_box(&d, x, y, 6);
                assert_eq!(same, found, "{name}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn triangle_generator_class_is_nontrivial() {
    let d = fixtures::g4();
    let x = Divisor(vec![1, -1, 0]);
    assert!(!witness_in_box(&d, &x, &Divisor::zeros(3), 6));
    assert!(PicardGroup::new(&d).unwrap().equivalent(&x, &Divisor::zeros(3)).unwrap().is_none());
}

#[test]
fn reduced_counts_match_arborescences_on_random_graphs() {
    for seed in 0..40u64 {
        let d = Digraph::random(2 + (seed % 4) as usize, (seed % 5) as usize, seed).unwrap();
        for w in 0..d.n() {
            let found = enumerate_w_reduced(&d, w, FiringConvention::RootFixed, 100_000).unwrap();
            assert_eq!(BigInt::from(found.len()), arborescence_count(&d, w), "{d}");
        }
    }
}
