//! Randomized invariants of the verification protocol: ROC shape on
//! arbitrary score tables, threshold-sweep monotonicity, and the
//! identical-image probe guarantee through the full trained pipeline.

use fbface_core::dissimilarity::embed_probe;
use fbface_core::experiment::{
    extract_features, to_distance_score, train_stage, Classifier, ExperimentConfig, TrainedModel,
};
use fbface_core::face::{DescriptorMode, DescriptorVariant};
use fbface_core::synth::{write_dataset, SynthConfig};
use fbface_core::verification::{build_roc, confirm_claim, VerificationRun};
use fbface_core::dataset::{self, Partition};
use proptest::collection::vec;
use proptest::prelude::*;

/// A random run: `subjects` gallery subjects, one score row per probe,
/// probes assigned to subjects round-robin.
fn random_run(rows: Vec<Vec<f64>>) -> VerificationRun {
    let subjects: Vec<String> = (0..rows[0].len()).map(|s| format!("s{s}")).collect();
    let mut run = VerificationRun::new(subjects.clone());
    for (p, row) in rows.into_iter().enumerate() {
        run.push_probe(&format!("p{p}"), &subjects[p % subjects.len()], row)
            .unwrap();
    }
    run
}

fn score_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6, 1usize..24)
        .prop_flat_map(|(subjects, probes)| vec(vec(0.0..10.0f64, subjects), probes))
}

proptest! {
    /// Every ROC has exactly 100 points, probabilities within [0, 1],
    /// strictly increasing thresholds spanning the observed score range,
    /// jointly non-decreasing (P_F, P_V), and the all-confirmed endpoint.
    #[test]
    fn roc_shape_holds_for_arbitrary_score_tables(rows in score_rows()) {
        let all_scores: Vec<f64> = rows.iter().flatten().cloned().collect();
        let lo = all_scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = all_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let run = random_run(rows);
        let roc = build_roc(&run).unwrap();

        prop_assert_eq!(roc.points().len(), 100);
        prop_assert_eq!(roc.thresholds().len(), 100);
        prop_assert!((roc.thresholds()[0] - lo).abs() <= 1e-12 * (1.0 + lo.abs()));
        prop_assert!((roc.thresholds()[99] - hi).abs() <= 1e-12 * (1.0 + hi.abs()));
        for w in roc.thresholds().windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        for &(pf, pv) in roc.points() {
            prop_assert!((0.0..=1.0).contains(&pf));
            prop_assert!((0.0..=1.0).contains(&pv));
        }
        for w in roc.points().windows(2) {
            prop_assert!(w[1].0 >= w[0].0);
            prop_assert!(w[1].1 >= w[0].1);
        }
        prop_assert_eq!(*roc.points().last().unwrap(), (1.0, 1.0));
        // Just below the smallest observed score nothing is confirmed.
        let below_min = roc.thresholds()[0] - 1e-9;
        for &s in &all_scores {
            prop_assert!(!confirm_claim(s, below_min));
        }
    }

    /// Rebuilding an ROC from the same run is bit-identical, and the
    /// verification rate at a false-alarm budget is monotone in the budget.
    #[test]
    fn roc_is_deterministic_and_budget_monotone(rows in score_rows()) {
        let run = random_run(rows);
        let a = build_roc(&run).unwrap();
        let b = build_roc(&run).unwrap();
        prop_assert_eq!(&a, &b);

        let budgets = [0.0, 0.05, 0.10, 0.25, 0.5, 1.0];
        for pair in budgets.windows(2) {
            prop_assert!(a.pv_at_pf(pair[0]) <= a.pv_at_pf(pair[1]));
        }
        prop_assert_eq!(a.pv_at_pf(1.0), 1.0);
    }

    /// When every true claim scores strictly below every false claim, some
    /// threshold reaches the perfect (P_F, P_V) = (0, 1) corner.
    #[test]
    fn separated_scores_reach_the_perfect_corner(
        subjects in 2usize..6,
        probes in 1usize..20,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<String> = (0..subjects).map(|s| format!("s{s}")).collect();
        let mut run = VerificationRun::new(ids.clone());
        for p in 0..probes {
            let t = p % subjects;
            let row: Vec<f64> = (0..subjects)
                .map(|s| {
                    if s == t {
                        rng.gen_range(0.0..1.0)
                    } else {
                        rng.gen_range(2.0..3.0)
                    }
                })
                .collect();
            run.push_probe(&format!("p{p}"), &ids[t], row).unwrap();
        }
        let roc = build_roc(&run).unwrap();
        prop_assert!(roc.points().contains(&(0.0, 1.0)));
        prop_assert_eq!(roc.pv_at_pf(0.10), 1.0);
    }
}

/// A probe that is pixel-identical to a gallery image scores its own
/// subject strictly best (smallest distance) through the fully trained
/// pipeline of descriptors, embedding, and discriminant.
#[test]
fn identical_image_probe_scores_its_true_subject_best() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = write_dataset(
        &SynthConfig {
            subjects: 5,
            images_per_subject: 2,
            noise_sd: 4.0,
            seed: 917,
        },
        dir.path(),
    )
    .unwrap();
    let manifest = dataset::ingest(&manifest_path).unwrap();
    let config = ExperimentConfig {
        mode: DescriptorMode::Global,
        variant: DescriptorVariant::Raw,
        classifier: Classifier::Pfld,
        max_order: 10,
        max_root: 4,
        angular_step_deg: 6,
        ..ExperimentConfig::default()
    };

    let model = train_stage(&manifest, &config).unwrap();
    let TrainedModel::Pfld(pfld) = &model else {
        panic!("trained classifier should be the discriminant");
    };
    let features = extract_features(&manifest, &config).unwrap();
    let descriptor_of = |id: &str| -> &Vec<f64> {
        &features.iter().find(|(fid, _)| fid == id).unwrap().1
    };
    let gallery = manifest.partition(Partition::Gallery);
    let gallery_descs: Vec<Vec<f64>> = gallery
        .iter()
        .map(|e| descriptor_of(&e.image_id).clone())
        .collect();

    for entry in &gallery {
        // Feed the gallery image back through the probe path unchanged.
        let embedded = embed_probe(descriptor_of(&entry.image_id), &gallery_descs).unwrap();
        let similarities = pfld.score_probe(&embedded).unwrap();
        let distances: Vec<f64> = similarities.iter().map(|&s| to_distance_score(s)).collect();
        let true_idx = pfld
            .subject_ids()
            .iter()
            .position(|s| s == &entry.subject_id)
            .unwrap();
        for (idx, &d) in distances.iter().enumerate() {
            if idx != true_idx {
                assert!(
                    d > distances[true_idx],
                    "{}: subject {} scored {:.6}, not above its own {:.6}",
                    entry.image_id,
                    idx,
                    d,
                    distances[true_idx]
                );
            }
        }
    }
}
