//! Structural invariants of the two-sided algorithms: deferred acceptance is
//! A-optimal among all stable matchings, projecting any stable matching of
//! the duplicated instance yields a dominant matching of the base, and
//! certainly popular matchings never leave a mutually acceptable pair
//! unmatched.

use popmatch::gen::{generate, FlavorConfig, GeneratorConfig, SplitMix64};
use popmatch::instance::{MarketInstance, Matching, Profile, Side};
use popmatch::oracle::{brute_check, brute_exists, enumerate_matchings, EnumerationBudget, Property};
use popmatch::two_sided::{
    duplicate_instance, gale_shapley, project_matching, CopyKind, DuplicatedInstance,
    DuplicatedMatching, EdgeCopy,
};

fn budget() -> EnumerationBudget {
    EnumerationBudget {
        max_matchings: 1_000_000,
        max_profiles: 1_000_000,
    }
}

fn deterministic_two_sided(seed: u64, max_n: u64) -> MarketInstance {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x77ff1));
    generate(&GeneratorConfig {
        seed,
        model: Side::TwoSided,
        n_a: 1 + (rng.next_u64() % max_n) as usize,
        n_b: 1 + (rng.next_u64() % max_n) as usize,
        list_len: (1, max_n as usize),
        flavor: FlavorConfig::Layers { count: 1 },
        capacity: (1, 1),
    })
    .unwrap()
}

fn rank_in(profile: &Profile, u: &str, v: Option<&String>) -> u64 {
    v.and_then(|v| profile.rank_of(u, v)).map_or(u64::MAX, |r| r as u64)
}

#[test]
fn deferred_acceptance_is_a_optimal() {
    let budget = budget();
    for seed in 0..150 {
        let inst = deterministic_two_sided(seed, 5);
        let profile = inst.first_profile();
        let gs = gale_shapley(&inst, &profile).unwrap();
        for candidate in enumerate_matchings(&inst, &budget).unwrap() {
            if !brute_check(&inst, &candidate, Property::Stable, &budget)
                .unwrap()
                .holds
            {
                continue;
            }
            for a in inst.agents_a() {
                let got = rank_in(&profile, a, gs.partner_of_a(a));
                let other = rank_in(&profile, a, candidate.partner_of_a(a));
                assert!(
                    got <= other,
                    "agent {a} does better in {candidate} than in {gs} (seed {seed})"
                );
            }
        }
    }
}

/// All matchings of the duplicated multigraph that no edge copy blocks,
/// enumerated by brute force over copy subsets. Only defined here, in test
/// code, as the reference for the projection theorem.
fn stable_duplicated_matchings(dup: &DuplicatedInstance) -> Vec<DuplicatedMatching> {
    let copies: Vec<EdgeCopy> = dup
        .base
        .edges()
        .iter()
        .flat_map(|(a, b)| {
            [
                EdgeCopy {
                    kind: CopyKind::X,
                    a: a.clone(),
                    b: b.clone(),
                },
                EdgeCopy {
                    kind: CopyKind::Y,
                    a: a.clone(),
                    b: b.clone(),
                },
            ]
        })
        .collect();
    let rank_a = |a: &String, c: &EdgeCopy| -> usize {
        dup.lists_a[a][0].iter().position(|x| x == c).unwrap()
    };
    let rank_b = |b: &String, c: &EdgeCopy| -> usize {
        dup.lists_b[b][0].iter().position(|x| x == c).unwrap()
    };
    let mut out = Vec::new();
    let n = copies.len();
    assert!(n <= 20, "brute duplicated enumeration is exponential");
    'subsets: for mask in 0u32..(1 << n) {
        let chosen: Vec<&EdgeCopy> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &copies[i])
            .collect();
        let mut at_a: std::collections::BTreeMap<&String, &EdgeCopy> = Default::default();
        let mut at_b: std::collections::BTreeMap<&String, &EdgeCopy> = Default::default();
        for c in &chosen {
            if at_a.insert(&c.a, c).is_some() || at_b.insert(&c.b, c).is_some() {
                continue 'subsets;
            }
        }
        let blocked = copies.iter().any(|c| {
            if chosen.contains(&c) {
                return false;
            }
            let a_wants = at_a
                .get(&c.a)
                .map_or(true, |held| rank_a(&c.a, c) < rank_a(&c.a, held));
            let b_wants = at_b
                .get(&c.b)
                .map_or(true, |held| rank_b(&c.b, c) < rank_b(&c.b, held));
            a_wants && b_wants
        });
        if !blocked {
            out.push(DuplicatedMatching(chosen.into_iter().cloned().collect()));
        }
    }
    out
}

#[test]
fn stable_duplicated_matchings_project_to_dominant() {
    let budget = budget();
    let mut seen_nonempty = 0;
    for seed in 0..120 {
        let inst = deterministic_two_sided(seed, 3);
        if inst.edges().len() > 8 {
            continue;
        }
        let dup = duplicate_instance(&inst).unwrap();
        let stable = stable_duplicated_matchings(&dup);
        assert!(!stable.is_empty(), "duplicated instances always admit a stable matching");
        for m in stable {
            let projected = project_matching(&m);
            seen_nonempty += usize::from(!projected.is_empty());
            let v = brute_check(&inst, &projected, Property::Dominant, &budget).unwrap();
            assert!(v.holds, "projection {projected} is not dominant (seed {seed})");
        }
    }
    assert!(seen_nonempty > 20, "the family must exercise nonempty projections");
}

#[test]
fn certainly_popular_matchings_cover_mutually_acceptable_pairs() {
    let budget = budget();
    let mut found = 0;
    for seed in 0..120u64 {
        let mut rng = SplitMix64::new(seed.wrapping_mul(0xfe12));
        let inst = generate(&GeneratorConfig {
            seed,
            model: Side::TwoSided,
            n_a: 1 + (rng.next_u64() % 3) as usize,
            n_b: 1 + (rng.next_u64() % 3) as usize,
            list_len: (1, 3),
            flavor: FlavorConfig::Independent { set_size: 2 },
            capacity: (1, 1),
        })
        .unwrap();
        let Some(m) = brute_exists(&inst, Property::CertainlyPopular, &budget).unwrap() else {
            continue;
        };
        found += 1;
        for (a, b) in inst.edges() {
            let both_unmatched = m.partner_of_a(a).is_none() && m.partner_of_b(b).is_none();
            assert!(
                !both_unmatched,
                "popular matching {m} leaves edge ({a},{b}) exposed (seed {seed})"
            );
        }
    }
    assert!(found > 30, "family too thin: only {found} popular instances");
}
