use ensavg_core::ensemble::{argmax, argmax_predict, average};
use ensavg_core::ingest::{read_predictions, write_predictions};
use ensavg_core::metrics::{build_confusion, compute_report};
use ensavg_core::synth::{brute_force_metrics, generate_from_confusion};
use ensavg_core::{ClassCatalog, ConfusionMatrix, F1Mode, LabelVector, Metric, ProbabilityMatrix, SampleId};
use proptest::prelude::*;

fn catalog(k: usize) -> ClassCatalog {
    ClassCatalog::new((0..k).map(|c| format!("class_{c}"))).unwrap()
}

fn ids(n: usize) -> Vec<SampleId> {
    (0..n).map(|i| SampleId::new(format!("id{i}")).unwrap()).collect()
}

fn confusion_strategy() -> impl Strategy<Value = ConfusionMatrix> {
    (2usize..=6)
        .prop_flat_map(|k| {
            let cap = 500 / (k * k) as u64;
            (Just(k), prop::collection::vec(0..=cap, k * k))
        })
        .prop_filter("non-empty", |(_, counts)| counts.iter().sum::<u64>() > 0)
        .prop_map(|(k, counts)| {
            ConfusionMatrix::from_rows(counts.chunks(k).map(<[u64]>::to_vec).collect(), catalog(k)).unwrap()
        })
}

fn label_pairs() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (2usize..=6, 1usize..=200).prop_flat_map(|(k, n)| {
        (
            Just(k),
            prop::collection::vec(0..k, n),
            prop::collection::vec(0..k, n),
        )
    })
}

fn simplex_row(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], k)
        .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        })
}

fn matrices(count: usize) -> impl Strategy<Value = Vec<ProbabilityMatrix>> {
    (2usize..=5, 1usize..=20).prop_flat_map(move |(k, n)| {
        prop::collection::vec(prop::collection::vec(simplex_row(k), n), count).prop_map(move |ms| {
            ms.into_iter()
                .map(|rows| ProbabilityMatrix::new(ids(n), rows, catalog(k)).unwrap())
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn micro_scores_collapse_to_accuracy(cm in confusion_strategy()) {
        for mode in [F1Mode::Definition, F1Mode::PaperReplication] {
            let r = compute_report(&cm, mode).unwrap();
            let acc = r.weighted_accuracy;
            prop_assert!((r.micro_precision - acc).abs() <= 1e-12);
            prop_assert!((r.micro_recall - acc).abs() <= 1e-12);
            prop_assert!((r.micro_f1 - acc).abs() <= 1e-12);
            prop_assert!((r.weighted_recall - acc).abs() <= 1e-12);
        }
    }

    #[test]
    fn metrics_bounded_and_perfect_only_on_diagonal(cm in confusion_strategy()) {
        let r = compute_report(&cm, F1Mode::Definition).unwrap();
        prop_assert!(r.scalars().iter().all(|v| (0.0..=1.0).contains(v)));
        let diagonal = (0..cm.k()).all(|a| (0..cm.k()).all(|p| a == p || cm.get(a, p) == 0));
        let every_class_seen = (0..cm.k()).all(|c| cm.get(c, c) > 0);
        let all_one = r.scalars().iter().all(|&v| v == 1.0);
        // Macro averages include absent classes, so perfection also needs every class present.
        prop_assert_eq!(all_one, diagonal && every_class_seen);
        let stats = &r.per_class;
        prop_assert_eq!(stats.classes.iter().map(|s| s.tp).sum::<u64>(), cm.trace());
        for (c, s) in stats.classes.iter().enumerate() {
            prop_assert_eq!(s.tp + s.fn_, s.support);
            prop_assert_eq!(s.support, cm.row_sum(c));
        }
    }

    #[test]
    fn class_relabeling_leaves_scalars_unchanged(cm in confusion_strategy(), seed in any::<u64>()) {
        let k = cm.k();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut state = seed;
        for i in (1..k).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted = cm.permuted(&perm).unwrap();
        for mode in [F1Mode::Definition, F1Mode::PaperReplication] {
            let a = compute_report(&cm, mode).unwrap();
            let b = compute_report(&permuted, mode).unwrap();
            for m in Metric::ALL {
                prop_assert!((a.get(m) - b.get(m)).abs() <= 1e-12, "{m}");
            }
            for (c, &src) in perm.iter().enumerate() {
                prop_assert_eq!(&b.per_class.classes[c], &a.per_class.classes[src]);
            }
        }
    }

    #[test]
    fn engine_matches_brute_force((k, pred, truth) in label_pairs()) {
        let n = pred.len();
        let cat = catalog(k);
        let pred = LabelVector::new(ids(n), pred, &cat).unwrap();
        let truth = LabelVector::new(ids(n), truth, &cat).unwrap();
        let cm = build_confusion(&pred, &truth, &cat).unwrap();
        prop_assert_eq!(cm.total(), n as u64);
        for mode in [F1Mode::Definition, F1Mode::PaperReplication] {
            let engine = compute_report(&cm, mode).unwrap();
            let oracle = brute_force_metrics(&pred, &truth, &cat, mode).unwrap();
            for m in Metric::ALL {
                prop_assert!((engine.get(m) - oracle.get(m)).abs() <= 1e-12, "{m}");
            }
        }
    }

    #[test]
    fn average_is_valid_and_order_free(ms in matrices(3)) {
        let avg = average(&[&ms[0], &ms[1], &ms[2]]).unwrap();
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let other = average(&[&ms[perm[0]], &ms[perm[1]], &ms[perm[2]]]).unwrap();
            prop_assert_eq!(other.as_flat(), avg.as_flat());
        }
        for row in avg.rows() {
            prop_assert!(row.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
        prop_assert!(ProbabilityMatrix::from_flat(avg.ids().to_vec(), avg.as_flat().to_vec(), avg.catalog().clone()).is_ok());
    }

    #[test]
    fn average_of_duplicates_is_identity(ms in matrices(1), copies in 2usize..=6) {
        let m = &ms[0];
        prop_assert_eq!(&average(&[m, m]).unwrap(), m);
        let many = vec![m; copies];
        prop_assert_eq!(&average(&many).unwrap(), m);
    }

    #[test]
    fn argmax_survives_rescaling(row in simplex_row(4), scale in 0.01f64..100.0) {
        let scaled: Vec<f64> = row.iter().map(|v| v * scale).collect();
        let s: f64 = scaled.iter().sum();
        let renormalized: Vec<f64> = scaled.iter().map(|v| v / s).collect();
        let original = argmax(&row);
        let after = argmax(&renormalized);
        // Rescaling can only merge near-ties through rounding; the winner keeps the max.
        prop_assert!(after == original || (row[after] - row[original]).abs() <= 1e-12);
    }

    #[test]
    fn synth_round_trip(cm in confusion_strategy(), seed in any::<u64>(), bump in 0.01f64..=1.0) {
        let k = cm.k() as f64;
        let sharpness = (1.0 / k + bump).min(1.0);
        let s = generate_from_confusion(&cm, seed, sharpness).unwrap();
        let back = build_confusion(&argmax_predict(&s.predictions), &s.labels, cm.catalog()).unwrap();
        prop_assert_eq!(back, cm);
    }

    #[test]
    fn prediction_file_round_trip(ms in matrices(1)) {
        let m = &ms[0];
        let mut buf = Vec::new();
        write_predictions(m, &mut buf).unwrap();
        let back = read_predictions(buf.as_slice(), m.catalog()).unwrap();
        prop_assert_eq!(back.ids(), m.ids());
        for (a, b) in back.as_flat().iter().zip(m.as_flat()) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-9) + 1e-9);
        }
        // Re-writing only moves digits beyond the ninth significant one.
        let mut again = Vec::new();
        write_predictions(&back, &mut again).unwrap();
        let twice = read_predictions(again.as_slice(), m.catalog()).unwrap();
        for (a, b) in twice.as_flat().iter().zip(back.as_flat()) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-9) + 1e-9);
        }
    }
}
