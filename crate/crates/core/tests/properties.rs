use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use planar_peeling::boltzmann::sample_boltzmann;
use planar_peeling::map::{canonical_encoding, is_isomorphic_rooted, read_map, vertex_distances, write_map};
use planar_peeling::peeling::{read_trace_csv, replay, write_trace_csv, EdgeSelector, Exploration, UniformSelector};
use planar_peeling::{PeelParams, Side, Transition};

fn params_for(alpha: f64) -> PeelParams {
    PeelParams::from_alpha(alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transitions_sum_to_one(alpha in 0.67f64..0.99, p in 2usize..400) {
        let pp = params_for(alpha);
        let mut s = pp.peel_transition(p, Transition::Fresh).unwrap();
        for k in 1..=p.saturating_sub(2) {
            for side in [Side::Left, Side::Right] {
                s += pp.peel_transition(p, Transition::Swallow { side, k }).unwrap();
            }
        }
        prop_assert!((s - 1.0).abs() < 1e-9, "sum {s}");
    }

    #[test]
    fn boltzmann_maps_are_valid(alpha in 0.67f64..0.99, p in 2usize..15, seed in any::<u64>()) {
        let pp = params_for(alpha);
        let t = sample_boltzmann(p, &pp, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        t.validate().unwrap();
        prop_assert_eq!(t.perimeter(), p);
    }

    #[test]
    fn encoding_ignores_labels(p in 2usize..10, seed in any::<u64>()) {
        let pp = params_for(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = sample_boltzmann(p, &pp, &mut rng).unwrap();
        let u = t.relabeled(&mut rng);
        u.validate().unwrap();
        prop_assert_eq!(canonical_encoding(&t), canonical_encoding(&u));
        prop_assert!(is_isomorphic_rooted(&t, &u));
    }

    #[test]
    fn random_peels_stay_valid(alpha in 0.68f64..0.95, seed in any::<u64>(), steps in 1u64..120) {
        let pp = params_for(alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sel = UniformSelector::new(seed ^ 1);
        let mut ex = Exploration::new(&pp);
        for _ in 0..steps {
            let e = sel.select(&ex).unwrap();
            ex.peel(e, &mut rng).unwrap();
            ex.map().validate().unwrap();
        }
        prop_assert_eq!(ex.distances(), &vertex_distances(ex.map(), 0)[..]);
    }

    #[test]
    fn files_and_traces_round_trip(seed in any::<u64>(), steps in 1u64..80) {
        let pp = params_for(0.75);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sel = UniformSelector::new(seed);
        let mut ex = Exploration::new(&pp);
        ex.run(&mut sel, steps, &mut rng).unwrap();

        let mut buf = Vec::new();
        write_map(ex.map(), &mut buf).unwrap();
        let back = read_map(&buf[..]).unwrap();
        prop_assert_eq!(canonical_encoding(&back), canonical_encoding(ex.map()));

        let mut csv = Vec::new();
        write_trace_csv(&mut csv, ex.trace()).unwrap();
        let records = read_trace_csv(&csv[..]).unwrap();
        prop_assert_eq!(&records[..], ex.trace());
        let rebuilt = replay(&pp, &records).unwrap();
        prop_assert_eq!(canonical_encoding(&rebuilt), canonical_encoding(ex.map()));
    }
}
