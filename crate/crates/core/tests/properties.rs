use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use klab::graph_sheaf::Section;
use klab::ring_linalg::{annihilator, cokernel_exponents, MatrixR, ResidueRing, Submodule};
use klab::selmer_instance::{generate_instance, local_pairing, prime_indices, vertices, SelmerInstance};
use klab::suites::{appendix, case_rng, local, random_params, sheaf};
use klab::systems::{invariant_profile, kolyvagin_modules, pi_transform, psi_map, psi_map_ordered, stark_module};
use klab::local_model::FrobeniusModule;

const SMALL_RINGS: [(u64, u32); 4] = [(2, 2), (3, 1), (3, 2), (3, 3)];

fn ring_strategy() -> impl Strategy<Value = ResidueRing> {
    (0..SMALL_RINGS.len()).prop_map(|i| ResidueRing::new(SMALL_RINGS[i].0, SMALL_RINGS[i].1).unwrap())
}

fn matrix_strategy(max_rows: usize, cols: usize) -> impl Strategy<Value = (ResidueRing, Vec<Vec<u64>>)> {
    ring_strategy().prop_flat_map(move |ring| {
        let q = ring.modulus();
        (Just(ring), prop::collection::vec(prop::collection::vec(0..q, cols), 1..=max_rows))
    })
}

fn instance(seed: u64) -> SelmerInstance {
    let params = random_params(&mut case_rng(seed, 0), 1, 3, 4);
    generate_instance(&params).expect("feasible params")
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn howell_form_is_canonical((ring, a) in matrix_strategy(4, 3), (_, b) in matrix_strategy(4, 3), seed in any::<u64>()) {
        let a = MatrixR::from_rows(ring, 3, &a);
        let b = MatrixR::from_rows(ring, 3, &b.into_iter().map(|r| r.into_iter().map(|x| x % ring.modulus()).collect()).collect::<Vec<_>>());
        let sa = Submodule::from_generators(&a);
        let u = appendix::random_invertible(ring, a.rows, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&Submodule::from_generators(&u.mul(&a).unwrap()), &sa);
        let sb = Submodule::from_generators(&b);
        prop_assert_eq!(sa == sb, sa.enumerate() == sb.enumerate());
    }

    #[test]
    fn invariant_factors_ignore_unimodular_changes((ring, a) in matrix_strategy(4, 3), seed in any::<u64>()) {
        let a = MatrixR::from_rows(ring, 3, &a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = appendix::random_invertible(ring, a.rows, &mut rng);
        let v = appendix::random_invertible(ring, 3, &mut rng);
        prop_assert_eq!(cokernel_exponents(&u.mul(&a).unwrap().mul(&v).unwrap()), cokernel_exponents(&a));
    }

    #[test]
    fn annihilator_duality((ring, rows) in matrix_strategy(4, 4)) {
        let x = Submodule::from_rows(ring, 4, &rows);
        let j = local_pairing(ring, 2);
        let ann = annihilator(&x, &j).unwrap();
        prop_assert_eq!(x.length() + ann.length(), 4 * ring.k());
        prop_assert_eq!(annihilator(&ann, &j).unwrap(), x);
    }

    #[test]
    fn frobenius_polynomial_split(ring in ring_strategy(), d in 1usize..=3, seed in any::<u64>()) {
        let fr = local::random_frobenius(ring, d, &mut ChaCha8Rng::seed_from_u64(seed));
        let module = FrobeniusModule::new(fr, 1).unwrap();
        let (p, q) = module.char_poly_split().unwrap();
        let mut prod = vec![0; q.len() + 1];
        for (i, &c) in q.iter().enumerate() {
            prod[i + 1] = ring.add(prod[i + 1], c);
            prod[i] = ring.sub(prod[i], c);
        }
        let trim = |mut v: Vec<u64>| { while v.last() == Some(&0) { v.pop(); } v };
        prop_assert_eq!(trim(prod), trim(p));
    }

    #[test]
    fn hub_sections_propagate_generator_index(ring in ring_strategy(), n in 2usize..=6, twist in any::<bool>(), seed in any::<u64>()) {
        let (sh, _) = sheaf::hub_sheaf(ring, n, twist, &mut ChaCha8Rng::seed_from_u64(seed));
        let gamma = sh.global_sections();
        for s in gamma.generators() {
            prop_assert!(sh.propagation_holds(&s));
        }
        // evaluation at the hub is injective
        prop_assert!(gamma.evaluation(&sh, 0).is_injective());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn psi_maps_ignore_prime_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let inst = instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        for n in vertices(inst.all_primes()) {
            let mut order = prime_indices(n);
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            for m in vertices(n) {
                prop_assert_eq!(psi_map_ordered(&inst, n, m, &order).unwrap().mat, psi_map(&inst, n, m).unwrap().mat);
            }
        }
    }

    #[test]
    fn transform_is_linear_and_keeps_the_profile(seed in any::<u64>(), c in 0u64..125) {
        let inst = instance(seed);
        let all = inst.all_primes();
        let ss = stark_module(&inst, all).unwrap();
        let km = kolyvagin_modules(&inst, all).unwrap();
        let g = ss.generator().unwrap();
        let c = c % inst.ring.modulus();
        let scaled = Section { values: g.values.iter().map(|v| v.iter().map(|&x| inst.ring.mul(x, c)).collect()).collect() };
        let kg = pi_transform(&inst, &ss, &g, &km.selmer).unwrap();
        let ks = pi_transform(&inst, &ss, &scaled, &km.selmer).unwrap();
        for (i, stalk) in km.selmer.sheaf.stalks.iter().enumerate() {
            let cx: Vec<u64> = kg.values[i].iter().map(|&x| inst.ring.mul(x, c)).collect();
            prop_assert_eq!(stalk.reduce(&ks.values[i]), stalk.reduce(&cx));
        }
        let pe = invariant_profile(&ss.hasse, &ss.sheaf.stalks, &scaled);
        let pk = invariant_profile(km.hasse(), &km.selmer.sheaf.stalks, &ks);
        prop_assert_eq!((pe.dphi, pe.ord, pe.d), (pk.dphi, pk.ord, pk.d));
        prop_assert!(km.selmer.sheaf.is_section(&ks));
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let inst = instance(seed);
        let back: SelmerInstance = serde_json::from_str(&inst.to_json()).unwrap();
        prop_assert_eq!(back.hash(), inst.hash());
        prop_assert_eq!(back, inst);
    }
}
