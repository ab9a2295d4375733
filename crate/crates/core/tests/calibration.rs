use genprob::estimate::estimate;
use genprob::GroupKind;

#[test]
fn wilson_intervals_cover_the_exact_value() {
    let truth = 53.0 / 90.0;
    let covered = (0..200u64)
        .filter(|&seed| {
            let e = estimate(GroupKind::Alt, 6, 20_000, seed, 0.99).unwrap();
            e.giant_ci.contains(truth)
        })
        .count();
    assert!(covered >= 190, "99% intervals covered 53/90 for {covered} of 200 seeds");
}

#[test]
fn distinct_seeds_give_distinct_streams() {
    let a = estimate(GroupKind::Sym, 7, 5_000, 1, 0.99).unwrap();
    let b = estimate(GroupKind::Sym, 7, 5_000, 2, 0.99).unwrap();
    assert_ne!(a.counts, b.counts);
    let again = estimate(GroupKind::Sym, 7, 5_000, 1, 0.99).unwrap();
    assert_eq!(a, again);
}
