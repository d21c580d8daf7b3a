use proptest::prelude::*;

use cdcr::eval::{bcubed, link_f, Clustering};
use cdcr::simfns::{jaro_winkler, qgram_similarity, QGramConfig};

fn clustering(labels: &[u8]) -> Clustering<usize> {
    Clustering::from_labels(labels.iter().enumerate().map(|(i, l)| (i, l.to_string())).collect())
}

proptest! {
    #[test]
    fn f32_tracks_f64_for_string_scores(a in "[a-e ]{0,12}", b in "[a-e ]{0,12}") {
        let wide: f64 = jaro_winkler(&a, &b, 0.1).unwrap();
        let narrow: f32 = jaro_winkler(&a, &b, 0.1).unwrap();
        prop_assert!((wide - narrow as f64).abs() < 1e-6);
        let wide: f64 = qgram_similarity(&a, &b, QGramConfig::default());
        let narrow: f32 = qgram_similarity(&a, &b, QGramConfig::default());
        prop_assert!((wide - narrow as f64).abs() < 1e-6);
    }

    #[test]
    fn f32_tracks_f64_for_metrics(
        labels in proptest::collection::vec((0u8..4, 0u8..4), 1..40),
    ) {
        let sys: Vec<u8> = labels.iter().map(|l| l.0).collect();
        let gold: Vec<u8> = labels.iter().map(|l| l.1).collect();
        let (s, g) = (clustering(&sys), clustering(&gold));
        let wide: cdcr::MetricReport = bcubed(&s, &g).unwrap();
        let narrow: cdcr::eval::MetricReport<f32> = bcubed(&s, &g).unwrap();
        prop_assert!((wide.f_measure - narrow.f_measure as f64).abs() < 1e-5);
        prop_assert_eq!((wide.tp, wide.fp, wide.fn_), (narrow.tp, narrow.fp, narrow.fn_));
        let wide: cdcr::MetricReport = link_f(&s, &g).unwrap();
        let narrow: cdcr::eval::MetricReport<f32> = link_f(&s, &g).unwrap();
        prop_assert!((wide.precision - narrow.precision as f64).abs() < 1e-5);
    }
}
