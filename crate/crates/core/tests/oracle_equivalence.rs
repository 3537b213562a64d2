mod common;

use common::{naive_summary, naive_value, NaiveStat};
use proptest::prelude::*;
use streaklab_core::exact::enumerate_summary;
use streaklab_core::{statistic, NullModel, Outcomes, Sequence, StatKind, UndefinedPolicy};

fn to_naive(stat: StatKind) -> NaiveStat {
    match stat {
        StatKind::AfterHitRun(m) => NaiveStat::Hit(m as usize),
        StatKind::AfterMissRun(m) => NaiveStat::Miss(m as usize),
        StatKind::Difference(m) => NaiveStat::Diff(m as usize),
    }
}

fn stat_strategy(max_run: u32) -> impl Strategy<Value = StatKind> {
    (0..3u8, 1..=max_run).prop_map(|(v, m)| match v {
        0 => StatKind::AfterHitRun(m),
        1 => StatKind::AfterMissRun(m),
        _ => StatKind::Difference(m),
    })
}

fn check_summary(k: u32, p: f64, stat: StatKind) {
    let oracle = naive_summary(k as usize, p, to_naive(stat));
    let model = NullModel::new(p, k).unwrap();
    let s = match enumerate_summary(model, stat, UndefinedPolicy::Exclude) {
        Ok(s) => s,
        Err(_) => {
            assert_eq!(oracle.defined_count, 0, "k={k} p={p} {stat}");
            return;
        }
    };
    assert_eq!(s.defined_count, oracle.defined_count);
    assert!((s.unweighted_mean - oracle.unweighted_exclude).abs() < 1e-12, "k={k} p={p} {stat}");
    assert!((s.pooled_mean - oracle.pooled).abs() < 1e-12, "k={k} p={p} {stat}");
    assert!((s.defined_probability - oracle.defined_probability).abs() < 1e-12);
    assert_eq!(s.histogram.len(), oracle.histogram.len());
    let mut expected: Vec<_> = oracle.histogram.iter().collect();
    expected.sort_by(|((a, b), _), ((c, d), _)| (a * d).cmp(&(c * b)));
    for ((v, m), ((on, od), om)) in s.histogram.iter().zip(expected) {
        assert_eq!((v.numer() as i64, v.denom() as i64), (*on, *od));
        assert!((m - om).abs() < 1e-12);
    }
    if !stat.is_difference() {
        let z = enumerate_summary(model, stat, UndefinedPolicy::IncludeAsZero).unwrap();
        assert!((z.unweighted_mean - oracle.unweighted_zero).abs() < 1e-12);
    }
}

#[test]
fn every_small_case_matches_oracle() {
    for k in 2..=10u32 {
        for &p in &[0.3, 0.5, 0.7] {
            for m in 1..k.min(4) {
                for stat in [StatKind::AfterHitRun(m), StatKind::AfterMissRun(m), StatKind::Difference(m)] {
                    check_summary(k, p, stat);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn summaries_match_oracle(k in 2..=10u32, pi in 0..3usize, stat in stat_strategy(9)) {
        prop_assume!(stat.run() < k);
        check_summary(k, [0.3, 0.5, 0.7][pi], stat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn per_sequence_matches_oracle(
        chars in proptest::collection::vec(prop_oneof![Just('H'), Just('T')], 1..=64),
        stat in stat_strategy(6),
    ) {
        let text: String = chars.iter().collect();
        let seq: Sequence = text.parse().unwrap();
        prop_assert_eq!(seq.to_string(), text.clone());
        let unpacked: Outcomes = text.parse().unwrap();
        if (stat.run() as usize) < chars.len() {
            let want = naive_value(&chars, to_naive(stat));
            let got = statistic(&seq, stat).unwrap().map(|r| (r.numer() as i64, r.denom() as i64));
            prop_assert_eq!(got, want);
            let got_unpacked = statistic(&unpacked, stat).unwrap().map(|r| (r.numer() as i64, r.denom() as i64));
            prop_assert_eq!(got_unpacked, want);
        } else {
            prop_assert!(statistic(&seq, stat).is_err());
        }
    }

    #[test]
    fn frequency_bounds_and_relabeling(bits in any::<u64>(), len in 2..=64usize, m in 1..4u32) {
        prop_assume!((m as usize) < len);
        let seq = Sequence::from_bits(bits, len).unwrap();
        for stat in [StatKind::AfterHitRun(m), StatKind::AfterMissRun(m)] {
            let t = stat.tally(&seq);
            if let streaklab_core::StatTally::Single(t) = t {
                prop_assert!(t.successes <= t.eligible);
            }
            if let Some(v) = statistic(&seq, stat).unwrap() {
                prop_assert!(v.to_f64() >= 0.0 && v.to_f64() <= 1.0);
            }
        }
        // H/T relabeling: hits after hit runs on the complement = 1 - hits after miss runs.
        let on_complement = statistic(&seq.complement(), StatKind::AfterHitRun(m)).unwrap();
        let original = statistic(&seq, StatKind::AfterMissRun(m)).unwrap();
        prop_assert_eq!(on_complement, original.map(|v| streaklab_core::Ratio::ONE - v));
    }

    #[test]
    fn grouped_means_agree_on_equal_counts(means in proptest::collection::vec(0.0..1.0f64, 1..20), count in 1..1000u64) {
        use streaklab_core::{pooled_mean, unweighted_mean, GroupSummary};
        let groups: Vec<_> = means.iter().map(|&m| GroupSummary::new(m, count).unwrap()).collect();
        prop_assert!((pooled_mean(&groups).unwrap() - unweighted_mean(&groups).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pooled_of_tallies_is_total_ratio(texts in proptest::collection::vec("[HT]{2,20}", 1..30)) {
        use streaklab_core::{pooled_mean, GroupSummary};
        let tallies: Vec<_> = texts
            .iter()
            .map(|t| match StatKind::AfterHitRun(1).tally(&t.parse::<Sequence>().unwrap()) {
                streaklab_core::StatTally::Single(t) => t,
                _ => unreachable!(),
            })
            .filter(|t| t.eligible > 0)
            .collect();
        prop_assume!(!tallies.is_empty());
        let groups: Vec<_> = tallies
            .iter()
            .map(|t| GroupSummary::new(t.successes as f64 / t.eligible as f64, t.eligible as u64).unwrap())
            .collect();
        let direct = tallies.iter().map(|t| t.successes).sum::<u32>() as f64 / tallies.iter().map(|t| t.eligible).sum::<u32>() as f64;
        prop_assert!((pooled_mean(&groups).unwrap() - direct).abs() < 1e-12);
    }
}
