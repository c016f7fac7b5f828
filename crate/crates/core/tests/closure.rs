//! The rule engine against a brute-force closure over random knowledge
//! bases and rule sets.
mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::gen::{
    brute_force_closure, entailed_kb, entailed_world, gen_parents, gen_rules, gen_world, permuted, rules_text,
};
use moira_core::fusion::{audit, parse_rules, run_rules};

const MAX_FACTS: usize = 20;
const MAX_RULES: usize = 5;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fixpoint_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = gen_parents(&mut rng);
        let (mut kb, world) = gen_world(&mut rng, &parents, MAX_FACTS);
        prop_assert!(kb.facts().len() <= MAX_FACTS);
        let generated = gen_rules(&mut rng, MAX_RULES);
        let text = rules_text(&generated);
        let rules = parse_rules(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        run_rules(&mut kb, &rules).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        audit(&kb, &rules).map_err(TestCaseError::fail)?;

        let expected = entailed_world(&brute_force_closure(&world, &parents, &generated), &parents);
        prop_assert_eq!(entailed_kb(&kb, &parents), expected, "rules:\n{}", text);
    }

    #[test]
    fn rule_order_does_not_change_the_fixpoint(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = gen_parents(&mut rng);
        let (kb, _) = gen_world(&mut rng, &parents, MAX_FACTS);
        let generated = gen_rules(&mut rng, MAX_RULES);
        let mut first = kb.clone();
        run_rules(&mut first, &parse_rules(&rules_text(&generated)).unwrap()).unwrap();
        for _ in 0..3 {
            let shuffled = permuted(&mut rng, &generated);
            let mut again = kb.clone();
            run_rules(&mut again, &parse_rules(&rules_text(&shuffled)).unwrap()).unwrap();
            prop_assert_eq!(entailed_kb(&again, &parents), entailed_kb(&first, &parents));
        }
    }

    #[test]
    fn running_again_adds_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = gen_parents(&mut rng);
        let (mut kb, _) = gen_world(&mut rng, &parents, MAX_FACTS);
        let rules = parse_rules(&rules_text(&gen_rules(&mut rng, MAX_RULES))).unwrap();
        run_rules(&mut kb, &rules).unwrap();
        let settled = kb.clone();
        run_rules(&mut kb, &rules).unwrap();
        prop_assert_eq!(kb, settled);
    }
}

#[test]
fn generated_cases_are_not_vacuous() {
    let mut inferred = 0;
    let mut made = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = gen_parents(&mut rng);
        let (mut kb, _) = gen_world(&mut rng, &parents, MAX_FACTS);
        let (facts, instances) = (kb.facts().len(), kb.instances().count());
        run_rules(&mut kb, &parse_rules(&rules_text(&gen_rules(&mut rng, MAX_RULES))).unwrap()).unwrap();
        inferred += usize::from(kb.facts().len() > facts);
        made += usize::from(kb.instances().count() > instances);
    }
    println!("{inferred} of 100 inferred facts, {made} made instances");
    assert!(inferred >= 50, "{inferred}");
    assert!(made >= 10, "{made}");
}
