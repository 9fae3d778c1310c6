use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use simplex_clf::classifiers::{KnnFit, RdaModel, RdaParams};
use simplex_clf::dataio::LabeledCompositionDataset;
use simplex_clf::evaluation::{
    allocate_test_counts, cv_evaluate, make_splits, stratified_split, CvConfig, Method,
};
use simplex_clf::metrics::{alpha_distance, esov_distance, MetricSpec};
use simplex_clf::simplex::{closure, Alpha, Composition, ContrastMatrix};

fn a(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Strictly positive compositions, spread over several orders of magnitude.
fn positive(dim: usize) -> impl Strategy<Value = Composition> {
    prop::collection::vec(-4.0f64..4.0, dim)
        .prop_map(|l| closure(&l.iter().map(|v| v.exp()).collect::<Vec<_>>()).unwrap())
}

/// Compositions that may contain zeros but are never all zero.
fn with_zeros(dim: usize) -> impl Strategy<Value = Composition> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], dim)
        .prop_filter("not all zero", |v| v.iter().any(|&p| p > 0.0))
        .prop_map(|v| closure(&v).unwrap())
}

fn pair(dim: usize) -> impl Strategy<Value = (Composition, Composition)> {
    (positive(dim), positive(dim))
}

fn sized_positive() -> impl Strategy<Value = Composition> {
    (2usize..9).prop_flat_map(positive)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn metrics() -> impl Strategy<Value = MetricSpec> {
    prop_oneof![
        Just(MetricSpec::Esov),
        (-1.0f64..1.0).prop_map(|v| MetricSpec::alpha(a(v))),
        Just(MetricSpec::alpha(Alpha::ZERO)),
    ]
}

fn labelled(
    n: usize,
    groups: usize,
    dim: usize,
) -> impl Strategy<Value = (Vec<Composition>, Vec<usize>)> {
    prop::collection::vec(positive(dim), n).prop_map(move |pts| {
        let labels = (0..pts.len()).map(|i| i % groups).collect();
        (pts, labels)
    })
}

fn dataset(pts: &[Composition], labels: &[usize]) -> LabeledCompositionDataset {
    let names = (0..pts[0].dim()).map(|i| format!("p{i}")).collect();
    let raw = pts.iter().map(|p| p.parts().to_vec()).collect();
    let labels = labels.iter().map(|l| format!("g{l}")).collect();
    LabeledCompositionDataset::from_raw(names, raw, labels, "generated").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transform_round_trip(x in sized_positive(), alpha in prop::sample::select(vec![-1.0, -0.5, 0.0, 0.5, 1.0])) {
        let h = ContrastMatrix::helmert(x.dim()).unwrap();
        let back = h.transform(&x, a(alpha)).unwrap().invert().unwrap();
        prop_assert!(norm(&diff(back.parts(), x.parts())) <= 1e-10);
    }

    #[test]
    fn round_trip_with_zeros(x in (2usize..9).prop_flat_map(with_zeros), alpha in 0.05f64..1.0) {
        let h = ContrastMatrix::helmert(x.dim()).unwrap();
        let back = h.transform(&x, a(alpha)).unwrap().invert().unwrap();
        prop_assert!(norm(&diff(back.parts(), x.parts())) <= 1e-10);
    }

    #[test]
    fn transform_approaches_clr(x in prop::collection::vec(-2.0f64..2.0, 3..10)
        .prop_map(|l| closure(&l.iter().map(|v| v.exp()).collect::<Vec<_>>()).unwrap()))
    {
        let h = ContrastMatrix::helmert(x.dim()).unwrap();
        let z0 = h.transform(&x, Alpha::ZERO).unwrap().coords;
        let err = |alpha: f64| norm(&diff(&h.transform(&x, a(alpha)).unwrap().coords, &z0));
        let (e3, e4) = (err(1e-3), err(1e-4));
        let shifted: Vec<f64> = z0.iter().map(|v| v + 1.0).collect();
        prop_assert!(e3 <= 10.0 * 1e-3 * norm(&shifted));
        // first order in alpha; an exact clr has zero error at both
        if e4 > 1e-12 {
            prop_assert!((8.0..=12.0).contains(&(e3 / e4)), "ratio {}", e3 / e4);
        }
    }

    #[test]
    fn transform_ignores_scale(raw in prop::collection::vec(0.01f64..10.0, 2..8), c in 1e-3f64..1e3, alpha in -1.0f64..1.0) {
        let x = closure(&raw).unwrap();
        let y = closure(&raw.iter().map(|v| v * c).collect::<Vec<_>>()).unwrap();
        let h = ContrastMatrix::helmert(x.dim()).unwrap();
        let zx = h.transform(&x, a(alpha)).unwrap().coords;
        let zy = h.transform(&y, a(alpha)).unwrap().coords;
        prop_assert!(norm(&diff(&zx, &zy)) <= 1e-10 * (1.0 + norm(&zx)));
    }

    #[test]
    fn alpha_metric_axioms((x, y) in (2usize..8).prop_flat_map(pair), z_seed in any::<u64>(), alpha in -1.0f64..1.0) {
        let alpha = a(alpha);
        let dxy = alpha_distance(&x, &y, alpha).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert_eq!(alpha_distance(&x, &x, alpha).unwrap(), 0.0);
        prop_assert_eq!(dxy, alpha_distance(&y, &x, alpha).unwrap());
        // a third point from the seed, for the triangle inequality
        let mut s = z_seed;
        let raw: Vec<f64> = (0..x.dim()).map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 8.0 - 4.0
        }).map(f64::exp).collect();
        let z = closure(&raw).unwrap();
        let via = alpha_distance(&x, &z, alpha).unwrap() + alpha_distance(&z, &y, alpha).unwrap();
        prop_assert!(dxy <= via * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn metrics_ignore_permutation((x, y) in (2usize..8).prop_flat_map(pair), shuffle in any::<u64>(), metric in metrics()) {
        let dim = x.dim();
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut s = shuffle;
        for i in (1..dim).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let d = metric.distance(&x, &y).unwrap();
        let dp = metric.distance(&x.permuted(&perm).unwrap(), &y.permuted(&perm).unwrap()).unwrap();
        prop_assert!(rel(d, dp) <= 1e-12, "{d} vs {dp}");
    }

    #[test]
    fn esov_axioms(x in with_zeros(5), y in with_zeros(5), z in with_zeros(5)) {
        let dxy = esov_distance(&x, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert_eq!(esov_distance(&x, &x).unwrap(), 0.0);
        prop_assert_eq!(dxy, esov_distance(&y, &x).unwrap());
        let via = esov_distance(&x, &z).unwrap() + esov_distance(&z, &y).unwrap();
        prop_assert!(dxy <= via + 1e-12);
    }

    #[test]
    fn knn_matches_sorting((train, labels) in labelled(30, 3, 4), queries in prop::collection::vec(positive(4), 10),
                           k in 1usize..8, metric in metrics(), seed in any::<u64>()) {
        let fit = KnnFit::new(train.clone(), labels.clone(), 3, k, metric).unwrap();
        for (q, x) in queries.iter().enumerate() {
            let mut all: Vec<(f64, usize)> = train.iter().enumerate()
                .map(|(i, t)| (metric.distance(x, t).unwrap(), i)).collect();
            all.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            let want: Vec<usize> = all[..k].iter().map(|p| p.1).collect();
            prop_assert_eq!(fit.neighbours(x).unwrap(), want.clone());

            let mut counts = [0usize; 3];
            for &i in &want {
                counts[labels[i]] += 1;
            }
            let top = *counts.iter().max().unwrap();
            let got = fit.predict(x, &mut ChaCha8Rng::seed_from_u64(seed ^ q as u64)).unwrap();
            prop_assert_eq!(counts[got], top);
        }
    }

    #[test]
    fn rda_ignores_rotation((pts, labels) in labelled(45, 3, 4), queries in prop::collection::vec(positive(4), 5),
                            lambda in 0.0f64..1.0, gamma in 0.0f64..1.0, alpha in 0.0f64..1.0, rot in prop::collection::vec(-1.0f64..1.0, 9)) {
        let h = ContrastMatrix::helmert(4).unwrap();
        let r = DMatrix::from_vec(3, 3, rot).qr().q();
        let params = RdaParams::new(a(alpha), lambda, gamma);
        let m1 = RdaModel::fit_with_basis(&pts, &labels, 3, params, h.clone());
        let m2 = RdaModel::fit_with_basis(&pts, &labels, 3, params, h.rotated(&r).unwrap());
        // near-singular draws are allowed to fail, but consistently
        prop_assert_eq!(m1.is_ok(), m2.is_ok());
        if let (Ok(m1), Ok(m2)) = (m1, m2) {
            for x in &queries {
                let (s1, s2) = (m1.scores(x).unwrap(), m2.scores(x).unwrap());
                let scale = 1.0 + norm(&s1);
                prop_assert!(norm(&diff(&s1, &s2)) <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn allocation_is_stratified(sizes in prop::collection::vec(1usize..60, 1..7), frac in 0.0f64..1.0) {
        let n: usize = sizes.iter().sum();
        let g = sizes.len();
        prop_assume!(n > g);
        let n_test = g + ((n - g - 1) as f64 * frac) as usize;
        let alloc = allocate_test_counts(&sizes, n_test).unwrap();
        prop_assert_eq!(alloc.iter().sum::<usize>(), n_test);
        for (&ni, &ti) in sizes.iter().zip(&alloc) {
            prop_assert!(ti >= 1 && ti <= ni);
            let dev = (ti as f64 / n_test as f64 - ni as f64 / n as f64).abs();
            prop_assert!(dev <= 1.0 / n_test as f64 + 1.0 / n as f64, "sizes {sizes:?} alloc {alloc:?}");
        }
    }

    // every quota is already at least one, so plain largest remainder applies
    #[test]
    fn allocation_without_floor_is_within_one(sizes in prop::collection::vec(1usize..60, 1..7), frac in 0.0f64..1.0) {
        let n: usize = sizes.iter().sum();
        let g = sizes.len();
        prop_assume!(n > g);
        let n_test = g + ((n - g - 1) as f64 * frac) as usize;
        prop_assume!(sizes.iter().all(|&ni| ni * n_test >= n));
        let alloc = allocate_test_counts(&sizes, n_test).unwrap();
        prop_assert_eq!(alloc.iter().sum::<usize>(), n_test);
        for (&ni, &ti) in sizes.iter().zip(&alloc) {
            let quota = ni as f64 * n_test as f64 / n as f64;
            prop_assert!((ti as f64 - quota).abs() < 1.0, "sizes {sizes:?} alloc {alloc:?}");
            let dev = (ti as f64 / n_test as f64 - ni as f64 / n as f64).abs();
            prop_assert!(dev <= 1.0 / n_test as f64 + 1.0 / n as f64);
        }
    }

    #[test]
    fn split_partitions_and_repeats(sizes in prop::collection::vec(2usize..20, 2..5), seed in any::<u64>()) {
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
        let n_test = sizes.len() + 1;
        let s1 = stratified_split(&labels, sizes.len(), n_test, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let s2 = stratified_split(&labels, sizes.len(), n_test, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&s1, &s2);
        let mut all: Vec<usize> = s1.train.iter().chain(&s1.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for g in 0..sizes.len() {
            prop_assert!(s1.test.iter().any(|&i| labels[i] == g));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cv_is_deterministic_and_consistent((pts, labels) in labelled(40, 2, 3), seed in any::<u64>(), k in 1usize..5,
                                          alpha in 0.0f64..1.0, n_test in 2usize..12) {
        let ds = dataset(&pts, &labels);
        let cv = CvConfig::new(n_test, 6, seed);
        for method in [
            Method::Knn { k, metric: MetricSpec::alpha(a(alpha)) },
            Method::Rda(RdaParams::lda(a(alpha))),
        ] {
            let r1 = cv_evaluate(&ds, &method, &cv).unwrap();
            let r2 = cv_evaluate(&ds, &method, &cv).unwrap();
            prop_assert_eq!(&r1, &r2);
            for q in &r1.q {
                let hits = q * n_test as f64;
                prop_assert!((hits - hits.round()).abs() < 1e-9);
            }
            let mean = r1.q.iter().sum::<f64>() / r1.q.len() as f64;
            prop_assert!((mean - r1.mean_q).abs() < 1e-12);
        }
        prop_assert_eq!(make_splits(&ds, &cv).unwrap(), make_splits(&ds, &cv).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // stand-ins for the fuzz targets: arbitrary input is an error, never a panic

    #[test]
    fn dataset_parser_total(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = simplex_clf::dataio::parse_dataset_bytes(&bytes, &simplex_clf::dataio::DatasetSchema::new("label"));
    }

    #[test]
    fn dataset_parser_on_near_csv(text in "[ab,]{0,6}label\n([-0-9.eE,\"x]{0,12}\n){0,4}") {
        let schema = simplex_clf::dataio::DatasetSchema::new("label");
        if let Ok(ds) = simplex_clf::dataio::parse_dataset_bytes(text.as_bytes(), &schema) {
            for row in ds.rows() {
                prop_assert!((row.parts().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn range_parser_total(text in "[-0-9.:,e ]{0,16}") {
        if let Ok(v) = simplex_clf::evaluation::parse_range(&text) {
            prop_assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
        }
        let _ = simplex_clf::evaluation::parse_int_range(&text);
    }
}
