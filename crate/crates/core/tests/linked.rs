use twogen::linked::Chain;
use twogen::pipeline::{run_triple, RunConfig};

fn chain(p: u32, r: u32) -> Chain {
    let cfg = RunConfig::default();
    Chain::new(p, r, cfg.bounds(p, p), cfg.search_cap).unwrap()
}

#[test]
fn cubic_chain_matches_direct_search() {
    let cfg = RunConfig::default();
    for p in [6, 8, 10, 12] {
        let linked = chain(p, 3).run().unwrap();
        let direct = run_triple(&cfg, p, p, 3).unwrap();
        assert_eq!(linked.count("contour"), direct.count("contour"), "({p},{p},3)");
    }
}

#[test]
fn quintic_over_hexagonal_field_leaves_one_candidate() {
    let out = chain(6, 5).run().unwrap();
    assert_eq!(out.count("identity_reals"), Some(31));
    assert_eq!(out.count("contour"), Some(1));
}

#[test]
fn heptagonal_quartic_head_counts() {
    let out = chain(7, 4).run().unwrap();
    for (stage, n) in [("c0", 412), ("linked", 8979), ("beta_divisible", 1303), ("top", 452), ("head_top", 187)] {
        assert_eq!(out.count(stage), Some(n), "{stage}");
    }
    assert_eq!(out.count("irreducible"), Some(0));
}

#[test]
fn quartic_chains_without_groups() {
    for p in [8, 12] {
        assert_eq!(chain(p, 4).run().unwrap().count("irreducible"), Some(0), "({p},{p},4)");
    }
    assert_eq!(chain(8, 5).run().unwrap().count("irreducible"), Some(0));
}
