use std::time::Instant;

use physio_arc::data::ExerciseClass;
use physio_arc::eval::{
    cross_validate, plan_subject_folds_of, plan_temporal_folds_of, ClassifierKind, EvalReport,
    PipelineSpec, WindowGeometry,
};
use physio_arc::features::featurize_recordings;
use physio_arc::segment::SegmentationSpec;
use physio_arc::synth::{generate_dataset, SynthConfig};

fn top_offdiag(report: &EvalReport) -> Vec<(u64, String)> {
    let n = report.n_classes;
    let name = |i: usize| format!("{}", ExerciseClass::ALL[i]);
    let mut pairs: Vec<(u64, String)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mass = report.confusion[i * n + j] + report.confusion[j * n + i];
            (mass, format!("{}<->{}", name(i), name(j)))
        })
        .collect();
    pairs.sort_by(|a, b| b.0.cmp(&a.0));
    pairs.truncate(5);
    pairs
}

#[test]
#[ignore]
fn probe_criterion10() {
    let cfg = SynthConfig::default();
    let t0 = Instant::now();
    let (recs, _) = generate_dataset(&cfg).unwrap();
    let seg = SegmentationSpec::new(2.0, 0.75, cfg.fs_hz);
    let features = featurize_recordings(&recs, &seg).unwrap();
    println!(
        "dataset: {:.1}s, {} recordings, {} x {} features",
        t0.elapsed().as_secs_f64(),
        recs.len(),
        features.n(),
        features.d
    );
    let geom = WindowGeometry::of_features(&features).unwrap();
    let tplan = plan_temporal_folds_of(geom, 5).unwrap();
    let splan = plan_subject_folds_of(geom, 5, 0x5EED).unwrap();

    let rf = PipelineSpec {
        classifier: ClassifierKind::RandomForest { n_estimators: 150, max_features_fraction: 0.10 },
        ..PipelineSpec::default()
    };
    let t0 = Instant::now();
    let rf_t = cross_validate(&features, &tplan, &rf).unwrap();
    println!(
        "RF temporal: {:.4} (+-{:.4}) train_acc {:.4}  [{:.0}s]",
        rf_t.validation_accuracy_mean,
        rf_t.validation_accuracy_std,
        rf_t.train_accuracy_mean,
        t0.elapsed().as_secs_f64()
    );
    let t0 = Instant::now();
    let rf_s = cross_validate(&features, &splan, &rf).unwrap();
    println!(
        "RF subject:  {:.4} (+-{:.4})  gap {:.4}  [{:.0}s]",
        rf_s.validation_accuracy_mean,
        rf_s.validation_accuracy_std,
        rf_t.validation_accuracy_mean - rf_s.validation_accuracy_mean,
        t0.elapsed().as_secs_f64()
    );
    println!("subject confusion top pairs: {:?}", top_offdiag(&rf_s));
    let n = rf_s.n_classes;
    for r in 0..n {
        let row: Vec<u64> = (0..n).map(|c| rf_s.confusion[r * n + c]).collect();
        println!("  {:?}", row);
    }

    let mut knn_acc = [[0.0f64; 2]; 2]; // [k index][protocol index: 0 temporal, 1 subject]
    for (ki, k) in [1usize, 30].into_iter().enumerate() {
        for (pi, plan) in [&tplan, &splan].into_iter().enumerate() {
            let spec = PipelineSpec { classifier: ClassifierKind::Knn { k }, ..rf.clone() };
            let t0 = Instant::now();
            let r = cross_validate(&features, plan, &spec).unwrap();
            knn_acc[ki][pi] = r.validation_accuracy_mean;
            println!(
                "knn k={k} {}: {:.4}  [{:.0}s]",
                if pi == 0 { "temporal" } else { "subject " },
                r.validation_accuracy_mean,
                t0.elapsed().as_secs_f64()
            );
        }
    }
    println!(
        "k1-k30 temporal margin {:+.4} (want >0), k30-k1 subject margin {:+.4} (want >0)",
        knn_acc[0][0] - knn_acc[1][0],
        knn_acc[1][1] - knn_acc[0][1]
    );
}

#[test]
#[ignore]
fn probe_overlap_sweep() {
    let cfg = SynthConfig::default();
    let (recs, _) = generate_dataset(&cfg).unwrap();
    let spec = PipelineSpec {
        classifier: ClassifierKind::RandomForest { n_estimators: 60, max_features_fraction: 0.10 },
        ranking_trees: 60,
        ..PipelineSpec::default()
    };
    for overlap in [0.0, 0.5, 0.75, 0.9, 0.95] {
        let seg = SegmentationSpec::new(2.0, overlap, cfg.fs_hz);
        let t0 = Instant::now();
        let features = featurize_recordings(&recs, &seg).unwrap();
        let geom = WindowGeometry::of_features(&features).unwrap();
        let plan = plan_temporal_folds_of(geom, 5).unwrap();
        let r = cross_validate(&features, &plan, &spec).unwrap();
        println!(
            "overlap {overlap}: {} windows, acc {:.4}  [{:.0}s]",
            features.n(),
            r.validation_accuracy_mean,
            t0.elapsed().as_secs_f64()
        );
    }
}
