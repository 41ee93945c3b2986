use num_bigint::BigUint;
use overtake::busy_beaver::{sigma, sigma_unpruned, SearchOptions};
use overtake::codec::{ell_index, table_index, to_standard};
use overtake::ell::{emulate_ell, make_constant, run_ell, EllBase, EllMachine, MachineTable2};
use overtake::factory::{register_family, toy_specs, Registry, DEFAULT_TABLE_BUDGET};
use overtake::growth::{build_counterexample_family, g_at_index, GrowthFunction, Search};
use overtake::machine::{run_with, RunOptions};
use overtake::codec::word_of_u64;

#[test]
fn ell_machine_and_its_emulation_agree() {
    // ⟨n, copier⟩ prints n on every input; the one-tape emulation
    // base ∘ τ ∘ iₙ with an unpair-then-echo-n base does the same.
    let echo_n = overtake::ell::unpair_program(overtake::ell::Component::Parameter).compile();
    for n in [0u64, 3] {
        let two_tape = EllMachine::new(BigUint::from(n), EllBase::TwoTape(MachineTable2::copy_parameter()));
        let emulated = emulate_ell(&echo_n, &BigUint::from(n)).unwrap();
        for x in [0u64, 1, 5] {
            let a = run_ell(&two_tape, &word_of_u64(x), 10_000).unwrap().output;
            let b = run_with(&emulated, &word_of_u64(x), RunOptions::without_loop_detection(500_000_000))
                .unwrap()
                .output;
            assert_eq!(a, b, "n={n} x={x}");
        }
    }
}

#[test]
fn to_standard_of_valid_codes_exceeds_the_code() {
    let base = make_constant(&BigUint::from(4u32));
    let m = table_index(&base);
    for n in 0..4u32 {
        let i = ell_index(&n.into(), &m);
        assert!(to_standard(&i) >= i);
    }
}

#[test]
fn registry_drives_g_for_the_toy_family() {
    let mut reg = Registry::with_basics();
    let members = register_family(&mut reg, &toy_specs(0..=2).unwrap(), DEFAULT_TABLE_BUDGET).unwrap();
    let g2 = g_at_index(&members[2].ell_index, &reg, Search::default()).unwrap();
    assert_eq!(g2.value(), Some(&BigUint::from(33u32)));
    let restored = Registry::from_json(&reg.to_json()).unwrap();
    assert_eq!(g_at_index(&members[2].ell_index, &restored, Search::default()).unwrap(), g2);
}

#[test]
fn counterexample_family_satisfies_the_g_identity() {
    for h in ["n + 1", "n^2"] {
        let mut reg = Registry::new();
        let r = build_counterexample_family(&GrowthFunction::parse(h).unwrap(), 0..=2, &mut reg).unwrap();
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert_eq!(row.g.value(), Some(&(&row.hprime + 1u32)));
        }
    }
}

#[test]
fn pruned_and_unpruned_searches_agree() {
    for (n, cut) in [(1u8, 10u64), (2, 30)] {
        assert_eq!(
            sigma(n, SearchOptions::new(cut)).unwrap().value,
            sigma_unpruned(n, SearchOptions::new(cut)).unwrap().value
        );
    }
}

#[test]
fn shard_merge_equals_monolithic_search() {
    let one = sigma(3, SearchOptions::new(50)).unwrap();
    for s in [2, 4, 8] {
        assert_eq!(sigma(3, SearchOptions::new(50).shards(s)).unwrap(), one);
    }
    let doubled = sigma(3, SearchOptions::new(100)).unwrap();
    assert_eq!((doubled.value, doubled.exact), (one.value, one.exact));
}
