use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use powerspace_core::oracle;
use powerspace_core::sample::{self, ProgramShape};
use powerspace_core::{
    feasible_transport, interpolate, leq, llcurly, max_flow, parse, separate, waybelow_prec, FinitePoset,
    Rational, SimpleValuation, Space, TransportInstance,
};

fn poset() -> impl Strategy<Value = Space> {
    (1usize..=5)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)))
        .prop_map(|(n, bits)| {
            let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
            let pairs: Vec<(String, String)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .zip(bits)
                .filter(|(_, on)| *on)
                .map(|((i, j), _)| (names[i].clone(), names[j].clone()))
                .collect();
            Arc::new(FinitePoset::build(names, pairs).unwrap())
        })
}

fn valuation(p: &Space) -> impl Strategy<Value = SimpleValuation> {
    let p = p.clone();
    proptest::collection::vec((0..p.len(), 1i64..=16, 1i64..=8), 0..=4).prop_map(move |entries| {
        SimpleValuation::new(&p, entries.into_iter().map(|(x, n, d)| (x, Rational::new(n, d)))).unwrap()
    })
}

fn space_and(k: usize) -> impl Strategy<Value = (Space, Vec<SimpleValuation>)> {
    poset().prop_flat_map(move |p| {
        let vals = proptest::collection::vec(valuation(&p), k);
        (Just(p), vals)
    })
}

fn instance() -> impl Strategy<Value = TransportInstance> {
    (1usize..=4, 1usize..=4, any::<bool>())
        .prop_flat_map(|(m, n, strict)| {
            (
                proptest::collection::vec((1i64..=8, 1i64..=4), m),
                proptest::collection::vec((1i64..=8, 1i64..=4), n),
                proptest::collection::vec(any::<bool>(), m * n),
                Just((n, strict)),
            )
        })
        .prop_map(|(rows, cols, bits, (n, strict))| {
            let q = |v: Vec<(i64, i64)>| v.into_iter().map(|(a, b)| Rational::new(a, b)).collect();
            let allowed: Vec<(usize, usize)> =
                bits.iter().enumerate().filter(|(_, on)| **on).map(|(k, _)| (k / n, k % n)).collect();
            TransportInstance::new(q(rows), q(cols), allowed, strict).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leq_matches_pointwise_oracle((_, v) in space_and(2)) {
        let decided = leq(&v[0], &v[1]).unwrap().verdict;
        prop_assert_eq!(decided, oracle::leq_pointwise(&v[0], &v[1]).unwrap().is_none());
    }

    #[test]
    fn leq_is_a_partial_order((_, v) in space_and(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        prop_assert!(leq(a, a).unwrap().verdict);
        if leq(a, b).unwrap().verdict && leq(b, c).unwrap().verdict {
            prop_assert!(leq(a, c).unwrap().verdict);
        }
        if leq(a, b).unwrap().verdict && leq(b, a).unwrap().verdict {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn addition_is_monotone((_, v) in space_and(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        if leq(a, b).unwrap().verdict {
            prop_assert!(leq(&a.add(c).unwrap(), &b.add(c).unwrap()).unwrap().verdict);
        }
        prop_assert!(leq(a, &a.add(c).unwrap()).unwrap().verdict);
    }

    #[test]
    fn scaling_composes((_, v) in space_and(1), a in 0i64..6, b in 1i64..6) {
        let (ra, rb) = (Rational::new(a, 3), Rational::new(b, 2));
        let twice = v[0].scale(&rb).unwrap().scale(&ra).unwrap();
        prop_assert_eq!(twice, v[0].scale(&(ra * rb)).unwrap());
    }

    #[test]
    fn strict_relations((_, v) in space_and(3)) {
        let (x, m, n) = (&v[0], &v[1], &v[2]);
        let strict = llcurly(x, m).unwrap().verdict;
        prop_assert_eq!(strict, waybelow_prec(x, m).unwrap().verdict);
        if strict {
            prop_assert!(leq(x, m).unwrap().verdict);
            if leq(m, n).unwrap().verdict {
                prop_assert!(llcurly(x, n).unwrap().verdict);
            }
        }
        let zero = SimpleValuation::zero(x.space());
        prop_assert!(llcurly(&zero, m).unwrap().verdict);
        prop_assert!(waybelow_prec(&zero, m).unwrap().verdict);
    }

    #[test]
    fn interpolation_and_separation((_, v) in space_and(3)) {
        let (mu, nu, xi) = (&v[0], &v[1], &v[2]);
        if llcurly(mu, xi).unwrap().verdict && llcurly(nu, xi).unwrap().verdict {
            let mid = interpolate(mu, nu, xi).unwrap();
            prop_assert!(llcurly(mu, &mid).unwrap().verdict);
            prop_assert!(llcurly(nu, &mid).unwrap().verdict);
            prop_assert!(llcurly(&mid, xi).unwrap().verdict);
        }
        if !leq(mu, nu).unwrap().verdict {
            let below = separate(mu, nu).unwrap();
            prop_assert!(llcurly(&below, mu).unwrap().verdict);
            prop_assert!(!leq(&below, nu).unwrap().verdict);
        }
    }

    #[test]
    fn range_is_small_and_complete((_, v) in space_and(1)) {
        let xi = &v[0];
        let range = xi.range().unwrap();
        prop_assert!(range.len() <= 1 << xi.support_len());
        prop_assert!(range.contains(&Rational::zero()));
        prop_assert!(range.contains(&xi.total_mass()));
        prop_assert_eq!(range, oracle::range_by_scan(xi).unwrap());
    }

    #[test]
    fn transport_matches_hall(inst in instance()) {
        let feasible = feasible_transport(&inst);
        prop_assert_eq!(feasible.is_feasible(), oracle::transport_by_hall(&inst).unwrap());
        let flow = max_flow(&inst);
        prop_assert!(flow.value <= inst.total_supply());
        for (b, s) in inst.supplies().iter().enumerate() {
            prop_assert!(flow.plan.row_sum(b) <= *s);
        }
        for (c, s) in inst.capacities().iter().enumerate() {
            prop_assert!(flow.plan.col_sum(c) <= *s);
        }
        for &(b, c) in flow.plan.entries().keys() {
            prop_assert!(inst.allowed().contains(&(b, c)));
        }
        if !inst.is_strict() {
            prop_assert_eq!(feasible.is_feasible(), flow.value == inst.total_supply());
        }
    }

    #[test]
    fn programs_print_and_parse_back(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Space = Arc::new(sample::random_poset(&mut rng, n, 0.5));
        let program = sample::random_program(&mut rng, &p, &ProgramShape::default());
        prop_assert_eq!(parse(&program.to_string(), &p).unwrap(), program);
    }
}
