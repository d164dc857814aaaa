mod common;

use proptest::prelude::*;

use common::{random_profile_any_size, small_instance};
use ebmc::dynamics::{
    br_plus, brs_free, brs_free_with, enumerate_pne, random_profile, zr, DynamicsConfig,
};
use ebmc::game::{check_separation, phi, utility, StrategyProfile, UtilityKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u128 = 100_000;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returned_equilibria_are_listed(seed in 0u64..400) {
        let inst = small_instance(seed);
        let Ok(list) = enumerate_pne(&inst, UtilityKind::Selfish, CAP) else { return Ok(()) };
        let listed: Vec<_> = list.iter().map(|(p, _)| p.clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = random_profile(&inst, &mut rng);
        let cfg = DynamicsConfig { seed, ..Default::default() };
        if let Some(p) = brs_free(&inst, &init, &cfg).unwrap().pne {
            prop_assert!(listed.contains(&p));
        }
        let out = br_plus(&inst, &init, &cfg).unwrap();
        for p in &out.pne_list {
            prop_assert!(listed.contains(p));
        }
        let z = zr(&inst, None, &cfg).unwrap();
        prop_assert_eq!(z.pne.is_none(), listed.is_empty());
        if let Some(p) = &z.pne {
            prop_assert_eq!(phi(&inst, p), list[0].1);
        }
    }

    #[test]
    fn master_values_never_increase(seed in 0u64..400, all in any::<bool>()) {
        let inst = small_instance(seed);
        let cfg = DynamicsConfig { zr_cut_all_deviations: all, ..Default::default() };
        let z = zr(&inst, None, &cfg).unwrap();
        prop_assert!(z.master_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(z.record.cuts_added, z.cuts.len());
    }

    #[test]
    fn br_plus_equilibria_improve(seed in 0u64..400) {
        let inst = small_instance(seed);
        let out = br_plus(&inst, &StrategyProfile::zeros(inst.num_lakes()), &DynamicsConfig::default()).unwrap();
        let phis: Vec<i64> = out.pne_list.iter().map(|p| phi(&inst, p)).collect();
        // only the last step may fail to improve
        if phis.len() >= 2 {
            prop_assert!(phis[..phis.len() - 1].windows(2).all(|w| w[1] > w[0]));
        }
        if let Some(best) = &out.best {
            prop_assert!(check_separation(&inst, UtilityKind::Selfish, best).unwrap().is_pne());
            prop_assert_eq!(Some(phi(&inst, best)), phis.iter().copied().max());
        }
    }

    #[test]
    fn dynamics_never_break_budgets(seed in 0u64..400) {
        let inst = small_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a);
        let init = random_profile_any_size(&inst, &mut rng);
        for kind in [UtilityKind::Selfish, UtilityKind::Altruistic] {
            let out = brs_free_with(&inst, &init, &DynamicsConfig::default(), kind, None).unwrap();
            if let Some(p) = out.pne {
                prop_assert!(p.is_feasible(&inst));
                prop_assert!(check_separation(&inst, kind, &p).unwrap().is_pne());
            }
        }
    }

    #[test]
    fn altruistic_dynamics_always_converge(seed in 0u64..400) {
        let inst = small_instance(seed);
        let out = brs_free_with(
            &inst,
            &StrategyProfile::zeros(inst.num_lakes()),
            &DynamicsConfig { init_max: 1, ..Default::default() },
            UtilityKind::Altruistic,
            None,
        )
        .unwrap();
        prop_assert!(out.pne.is_some());
        prop_assert!(!out.record.cycle_detected);
    }

    #[test]
    fn enumerated_list_is_sorted_and_exact(seed in 0u64..400) {
        let inst = small_instance(seed);
        let Ok(list) = enumerate_pne(&inst, UtilityKind::Selfish, CAP) else { return Ok(()) };
        prop_assert!(list.windows(2).all(|w| w[0].1 >= w[1].1));
        for (p, v) in &list {
            prop_assert_eq!(*v, phi(&inst, p));
            let sum: i64 = (0..inst.num_counties()).map(|c| utility(&inst, UtilityKind::Selfish, c, p)).sum();
            prop_assert_eq!(sum, *v);
        }
    }
}
