//! Randomized cross-module invariants.
//!
//! Each block checks a structural promise of the public API on generated
//! inputs: distances agree with brute-force re-derivations and behave like
//! (pseudo-)metrics, feature maps stay inside their analytic envelopes,
//! landmark draws are prefix-stable, splits and folds partition their input,
//! and every file format round-trips losslessly.

use ndarray::Array2;
use proptest::prelude::*;

use d2ke::distance::oracle::{dtw_all_paths, edit_by_deepening, mod_hausdorff_direct};
use d2ke::distance::{edit_distance, pairwise_distances};
use d2ke::embedding::{features_from_distances, softmin_distance};
use d2ke::gram::pseudo_euclidean_embed;
use d2ke::io::{
    load_dataset, load_omega_sample, read_matrix, save_dataset, save_omega_sample, write_matrix,
    FileFormat,
};
use d2ke::learn::stratified_folds;
use d2ke::sampling::sample_omegas;
use d2ke::seeding::derive_seed;
use d2ke::synthetic::{gen_synthetic, SyntheticTask};
use d2ke::{
    Dataset, EigenTreatment, EmbeddingModel, GramMatrix, Measure, ObjectKind, OmegaDistribution,
    StructuredObject, SymbolString, TimeSeries, VectorSet,
};

fn string_strategy(max_len: usize, alphabet: u32) -> impl Strategy<Value = StructuredObject> {
    prop::collection::vec(0..alphabet, 0..=max_len)
        .prop_map(move |syms| SymbolString::new(syms, alphabet).unwrap().into())
}

fn series_strategy(max_len: usize, vars: usize) -> impl Strategy<Value = StructuredObject> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, vars), 1..=max_len)
        .prop_map(|rows| TimeSeries::from_rows(rows).unwrap().into())
}

fn set_strategy(max_size: usize, dim: usize) -> impl Strategy<Value = StructuredObject> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 1..=max_size)
        .prop_map(|rows| VectorSet::from_rows(rows).unwrap().into())
}

fn any_measure() -> impl Strategy<Value = Measure> {
    prop::sample::select(vec![Measure::Dtw, Measure::Edit, Measure::ModHausdorff])
}

fn distribution_for(kind: ObjectKind) -> OmegaDistribution {
    match kind {
        ObjectKind::TimeSeries => OmegaDistribution::RandomTimeSeries {
            length_min: 2,
            length_max: 6,
            n_variables: 2,
            element_std: 1.0,
        },
        ObjectKind::String => {
            OmegaDistribution::RandomString { length_min: 2, length_max: 6, alphabet_size: 3 }
        }
        ObjectKind::VectorSet => {
            OmegaDistribution::RandomVectorSet { size_min: 2, size_max: 5, dim: 2 }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, .. ProptestConfig::default() })]

    #[test]
    fn edit_distance_matches_script_search(
        a in string_strategy(5, 2),
        b in string_strategy(5, 2),
    ) {
        let fast = Measure::Edit.evaluate(&a, &b).unwrap();
        let slow = edit_by_deepening(a.as_string().unwrap(), b.as_string().unwrap()).unwrap();
        prop_assert_eq!(fast, slow as f64);
    }

    #[test]
    fn dtw_matches_path_enumeration(
        a in series_strategy(6, 2),
        b in series_strategy(6, 2),
    ) {
        let fast = Measure::Dtw.evaluate(&a, &b).unwrap();
        let slow = dtw_all_paths(a.as_time_series().unwrap(), b.as_time_series().unwrap())
            .unwrap();
        prop_assert!((fast - slow).abs() <= 1e-9, "dp {fast} vs enumeration {slow}");
    }

    #[test]
    fn mod_hausdorff_matches_direct_formula(
        a in set_strategy(5, 3),
        b in set_strategy(5, 3),
    ) {
        let fast = Measure::ModHausdorff.evaluate(&a, &b).unwrap();
        let slow = mod_hausdorff_direct(a.as_vector_set().unwrap(), b.as_vector_set().unwrap())
            .unwrap();
        prop_assert!((fast - slow).abs() <= 1e-12, "fast {fast} vs direct {slow}");
    }

    #[test]
    fn edit_distance_is_a_metric(
        a in string_strategy(8, 3),
        b in string_strategy(8, 3),
        c in string_strategy(8, 3),
    ) {
        let (a, b, c) = (a.as_string().unwrap(), b.as_string().unwrap(), c.as_string().unwrap());
        let dab = edit_distance(a, b).unwrap();
        let dba = edit_distance(b, a).unwrap();
        let dac = edit_distance(a, c).unwrap();
        let dcb = edit_distance(c, b).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(edit_distance(a, a).unwrap(), 0);
        prop_assert!((dab == 0) == (a == b));
        prop_assert!(dab <= dac + dcb, "triangle: {dab} > {dac} + {dcb}");
    }

    #[test]
    fn distances_are_nonnegative_and_symmetric(
        measure in any_measure(),
        seed in 0u64..1000,
    ) {
        let objs = sample_omegas(&distribution_for(measure.object_kind()), 2, seed).unwrap();
        let (x, y) = (&objs.objects()[0], &objs.objects()[1]);
        let dxy = measure.evaluate(x, y).unwrap();
        let dyx = measure.evaluate(y, x).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - dyx).abs() <= 1e-12 * (1.0 + dxy), "{dxy} vs {dyx}");
        prop_assert_eq!(measure.evaluate(x, x).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn pairwise_matrix_has_zero_diagonal_and_symmetry(
        measure in any_measure(),
        objs_seed in 0u64..500,
    ) {
        let objs = sample_omegas(&distribution_for(measure.object_kind()), 6, objs_seed)
            .unwrap();
        let d = pairwise_distances(objs.objects(), objs.objects(), measure).unwrap();
        for i in 0..d.nrows() {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..i {
                let scale = 1.0 + d[(i, j)].abs();
                prop_assert!((d[(i, j)] - d[(j, i)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn features_stay_inside_the_analytic_envelope(
        measure in any_measure(),
        seed in 0u64..500,
        gamma in prop::sample::select(vec![0.1f64, 1.0, 10.0]),
    ) {
        let dist = distribution_for(measure.object_kind());
        let omegas = sample_omegas(&dist, 16, seed).unwrap();
        let data = sample_omegas(&dist, 5, seed ^ 0x9e37).unwrap();
        let model = EmbeddingModel::new(omegas, gamma, measure).unwrap();
        let f = model.embed_objects(data.objects()).unwrap();
        let cap = 1.0 / (f.ncols() as f64).sqrt();
        for &v in f.iter() {
            prop_assert!(v > 0.0 && v <= cap + 1e-15, "feature {v} outside (0, {cap}]");
        }
        for row in f.rows() {
            let norm_sq: f64 = row.iter().map(|v| v * v).sum();
            prop_assert!(norm_sq <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn feature_distance_is_lipschitz_in_the_metric(
        a in string_strategy(8, 3),
        b in string_strategy(8, 3),
        gamma in prop::sample::select(vec![0.1f64, 1.0]),
    ) {
        let dist = distribution_for(ObjectKind::String);
        let omegas = sample_omegas(&dist, 32, 7).unwrap();
        let model = EmbeddingModel::new(omegas, gamma, Measure::Edit).unwrap();
        let fa = model.embed(&a).unwrap();
        let fb = model.embed(&b).unwrap();
        let gap: f64 = fa
            .iter()
            .zip(fb.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let d = Measure::Edit.evaluate(&a, &b).unwrap();
        prop_assert!(gap <= gamma * d + 1e-12, "{gap} > {gamma} * {d}");
    }

    #[test]
    fn softmin_lies_between_min_and_min_plus_log_r(
        measure in any_measure(),
        seed in 0u64..500,
        gamma in prop::sample::select(vec![0.5f64, 2.0, 50.0]),
    ) {
        let dist = distribution_for(measure.object_kind());
        let omegas = sample_omegas(&dist, 8, seed).unwrap();
        let pair = sample_omegas(&dist, 2, seed ^ 0x51ed).unwrap();
        let (x, y) = (&pair.objects()[0], &pair.objects()[1]);
        let soft = softmin_distance(&omegas, gamma, x, y, measure).unwrap();
        let min: f64 = omegas
            .objects()
            .iter()
            .map(|w| {
                measure.evaluate(x, w).unwrap() + measure.evaluate(w, y).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let slack = (omegas.len() as f64).ln() / gamma;
        prop_assert!(soft >= min - 1e-9, "softmin {soft} below min sum {min}");
        prop_assert!(soft <= min + slack + 1e-9, "softmin {soft} above {min} + {slack}");
    }

    #[test]
    fn kernel_equals_exponentiated_softmin(
        measure in any_measure(),
        seed in 0u64..500,
        gamma in prop::sample::select(vec![0.5f64, 2.0]),
    ) {
        let dist = distribution_for(measure.object_kind());
        let omegas = sample_omegas(&dist, 16, seed).unwrap();
        let pair = sample_omegas(&dist, 2, seed ^ 0xab12).unwrap();
        let (x, y) = (&pair.objects()[0], &pair.objects()[1]);
        let model = EmbeddingModel::new(omegas.clone(), gamma, measure).unwrap();
        let k = model.rf_kernel(x, y).unwrap();
        let soft = softmin_distance(&omegas, gamma, x, y, measure).unwrap();
        prop_assert!((k - (-gamma * soft).exp()).abs() <= 1e-10);
    }

    #[test]
    fn landmark_draws_are_prefix_stable(
        kind in prop::sample::select(vec![
            ObjectKind::TimeSeries,
            ObjectKind::String,
            ObjectKind::VectorSet,
        ]),
        seed in 0u64..500,
        r_small in 1usize..8,
    ) {
        let dist = distribution_for(kind);
        let large = sample_omegas(&dist, 16, seed).unwrap();
        let small = sample_omegas(&dist, r_small, seed).unwrap();
        prop_assert_eq!(large.prefix(r_small).unwrap(), small);
    }

    #[test]
    fn holdout_draws_are_prefix_stable(
        seed in 0u64..500,
        without_replacement in any::<bool>(),
        r_small in 1usize..8,
    ) {
        let source = gen_synthetic(SyntheticTask::MotifString, 12, seed).unwrap();
        let dist = OmegaDistribution::DataHoldout { source, without_replacement };
        let large = sample_omegas(&dist, 12, seed).unwrap();
        let small = sample_omegas(&dist, r_small, seed).unwrap();
        prop_assert_eq!(large.prefix(r_small).unwrap(), small);
    }
}

/// Multiset equality for labeled objects, by counting matches both ways.
fn same_labeled_multiset(
    left: &[(StructuredObject, i64)],
    right: &[(StructuredObject, i64)],
) -> bool {
    left.len() == right.len()
        && left.iter().all(|item| {
            let in_left = left.iter().filter(|x| *x == item).count();
            let in_right = right.iter().filter(|x| *x == item).count();
            in_left == in_right
        })
}

fn labeled(ds: &Dataset) -> Vec<(StructuredObject, i64)> {
    ds.objects()
        .iter()
        .cloned()
        .zip(ds.labels().iter().map(|&c| ds.original_label(c)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, .. ProptestConfig::default() })]

    #[test]
    fn splits_partition_the_dataset(
        task in prop::sample::select(vec![
            SyntheticTask::MotifString,
            SyntheticTask::ShiftedSine,
            SyntheticTask::TwoClusterSets,
        ]),
        seed in 0u64..200,
        fraction in 0.2f64..0.8,
    ) {
        let ds = gen_synthetic(task, 30, seed).unwrap();
        let (train, test) = ds.split(fraction, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), ds.len());
        let mut combined = labeled(&train);
        combined.extend(labeled(&test));
        prop_assert!(same_labeled_multiset(&combined, &labeled(&ds)));
        // Largest-remainder rounding keeps every class within one object of
        // its target count.
        for class in 0..ds.n_classes() {
            let total = ds.labels().iter().filter(|&&c| c == class).count();
            let got = train.labels().iter().filter(|&&c| c == class).count();
            let target = fraction * total as f64;
            prop_assert!((got as f64 - target).abs() <= 1.0, "class {class}: {got} vs {target}");
        }
    }

    #[test]
    fn stratified_folds_partition_and_balance(
        seed in 0u64..200,
        folds in 2usize..5,
    ) {
        let ds = gen_synthetic(SyntheticTask::MotifString, 23, seed).unwrap();
        let labels = ds.labels();
        let assignment = stratified_folds(labels, folds, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        for fold in &assignment {
            for &i in fold {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1), "each index in exactly one fold");
        for class in 0..ds.n_classes() {
            let per_fold: Vec<usize> = assignment
                .iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            let min = per_fold.iter().min().unwrap();
            let max = per_fold.iter().max().unwrap();
            prop_assert!(max - min <= 1, "class {class} spread {per_fold:?}");
        }
    }

    #[test]
    fn dataset_files_round_trip(
        task in prop::sample::select(vec![
            SyntheticTask::MotifString,
            SyntheticTask::ShiftedSine,
            SyntheticTask::TwoClusterSets,
        ]),
        seed in 0u64..200,
    ) {
        let ds = gen_synthetic(task, 10, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let format = FileFormat::for_kind(ds.kind());
        let path = dir.path().join(format!("data{}", format.suffix()));
        save_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path, ds.kind(), format).unwrap();
        prop_assert_eq!(back.objects(), ds.objects());
        prop_assert_eq!(back.labels(), ds.labels());
        prop_assert_eq!(&back.meta().label_map, &ds.meta().label_map);
    }

    #[test]
    fn omega_files_round_trip(
        kind in prop::sample::select(vec![
            ObjectKind::TimeSeries,
            ObjectKind::String,
            ObjectKind::VectorSet,
        ]),
        seed in 0u64..200,
    ) {
        let sample = sample_omegas(&distribution_for(kind), 6, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let format = FileFormat::for_kind(kind);
        let path = dir.path().join(format!("omegas{}", format.suffix()));
        save_omega_sample(&sample, &path).unwrap();
        let back = load_omega_sample(&path, format).unwrap();
        prop_assert_eq!(back, sample);
    }

    #[test]
    fn matrix_files_round_trip_bitwise(
        rows in prop::collection::vec(
            prop::collection::vec(-1e6f64..1e6, 3),
            1..6,
        ),
    ) {
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Array2::from_shape_vec((n, 3), flat).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.txt");
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        prop_assert_eq!(back.dim(), m.dim());
        for (a, b) in back.iter().zip(m.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits(), "{} != {}", a, b);
        }
    }

    #[test]
    fn feature_grams_are_numerically_psd(
        measure in any_measure(),
        seed in 0u64..200,
    ) {
        let dist = distribution_for(measure.object_kind());
        let omegas = sample_omegas(&dist, 8, seed).unwrap();
        let data = sample_omegas(&dist, 10, seed ^ 0x77).unwrap();
        let model = EmbeddingModel::new(omegas, 1.0, measure).unwrap();
        let f = model.embed_objects(data.objects()).unwrap();
        let min_eig = GramMatrix::from_features(&f).min_eigenvalue().unwrap();
        prop_assert!(min_eig >= -1e-8, "min eigenvalue {min_eig}");
    }

    #[test]
    fn planar_distance_matrices_reconstruct_at_rank_two(
        points in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..9),
    ) {
        let n = points.len();
        let mut d = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let dx = points[i][0] - points[j][0];
                let dy = points[i][1] - points[j][1];
                d[(i, j)] = (dx * dx + dy * dy).sqrt();
            }
        }
        let emb = pseudo_euclidean_embed(&d, 2.min(n), EigenTreatment::Clip).unwrap();
        for i in 0..n {
            for j in 0..n {
                let rec = emb.reconstructed_distance(i, j);
                prop_assert!((rec - d[(i, j)]).abs() <= 1e-8, "({i},{j}): {rec} vs {}", d[(i, j)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, .. ProptestConfig::default() })]

    #[test]
    fn derived_seeds_do_not_collide_across_neighbors(
        master in any::<u64>(),
        stream in any::<u64>(),
        index in 0u64..1_000_000,
    ) {
        let here = derive_seed(master, stream, index);
        prop_assert_eq!(here, derive_seed(master, stream, index));
        prop_assert_ne!(here, derive_seed(master, stream, index + 1));
        prop_assert_ne!(here, derive_seed(master, stream.wrapping_add(1), index));
        prop_assert_ne!(here, derive_seed(master.wrapping_add(1), stream, index));
    }
}

#[test]
fn embedding_features_match_distance_transform_bitwise() {
    let dist = distribution_for(ObjectKind::String);
    let omegas = sample_omegas(&dist, 12, 3).unwrap();
    let data = sample_omegas(&dist, 7, 4).unwrap();
    let gamma = 0.7;
    let model = EmbeddingModel::new(omegas.clone(), gamma, Measure::Edit).unwrap();
    let f = model.embed_objects(data.objects()).unwrap();
    let d = pairwise_distances(data.objects(), omegas.objects(), Measure::Edit).unwrap();
    let g = features_from_distances(&d, gamma);
    assert_eq!(f.dim(), g.dim());
    for (a, b) in f.iter().zip(g.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn dataset_checksums_are_content_addressed() {
    let a = gen_synthetic(SyntheticTask::MotifString, 10, 1).unwrap();
    let b = gen_synthetic(SyntheticTask::MotifString, 10, 1).unwrap();
    let c = gen_synthetic(SyntheticTask::MotifString, 10, 2).unwrap();
    assert_eq!(a.meta().checksum, b.meta().checksum);
    assert_ne!(a.meta().checksum, c.meta().checksum);
}

#[test]
fn string_files_carry_their_alphabet() {
    let ds = gen_synthetic(SyntheticTask::MotifString, 6, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strings.str.txt");
    save_dataset(&ds, &path).unwrap();
    let back = load_dataset(&path, ObjectKind::String, FileFormat::StringTxt).unwrap();
    let sizes: Vec<u32> = back
        .objects()
        .iter()
        .map(|o| o.as_string().unwrap().alphabet_size())
        .collect();
    assert!(sizes.iter().all(|&s| s == sizes[0]));
    assert_eq!(back.objects(), ds.objects());
}
