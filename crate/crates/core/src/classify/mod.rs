//! Pair featurization, scoring and the two-threshold coreference decision.

mod features;
mod score;

pub use features::{featurize, Feature, FeatureStats, FeatureValue, FeatureVector, Level, ValueKind};
pub use score::{
    score_pair, CategoryScore, ClassifierConfig, FeatureSpec, Prepared, PreparedFeatures, Scorer, SimilarityFn,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::CandidatePair;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("classifier configuration: {0}")]
    Config(String),
    #[error("pair {0}: no feature present on both sides")]
    NoFeatures(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore<T: Scalar> {
    pub pair: CandidatePair,
    pub per_feature: BTreeMap<Feature, T>,
    pub combined: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Coreferent,
    Possible,
    NonCoreferent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Coreferent => "coreferent",
            Verdict::Possible => "possible",
            Verdict::NonCoreferent => "nonCoreferent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower and upper classification thresholds, `0 <= lower <= upper <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    lower: f64,
    upper: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { lower: 0.5, upper: 0.5 }
    }
}

impl Thresholds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, ClassifyError> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(ClassifyError::Config(format!(
                "thresholds must satisfy 0 <= lower <= upper <= 1, got lower {lower}, upper {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `>= upper` coreferent, `< lower` non-coreferent, otherwise possible.
    pub fn verdict<T: Scalar>(&self, combined: T) -> Verdict {
        if combined >= T::lit(self.upper) {
            Verdict::Coreferent
        } else if combined < T::lit(self.lower) {
            Verdict::NonCoreferent
        } else {
            Verdict::Possible
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision<T: Scalar> {
    pub pair: CandidatePair,
    pub verdict: Verdict,
    pub combined: T,
}

pub fn decide<T: Scalar>(score: &PairScore<T>, lower: f64, upper: f64) -> Result<PairDecision<T>, ClassifyError> {
    Ok(decide_with(score, Thresholds::new(lower, upper)?))
}

pub fn decide_with<T: Scalar>(score: &PairScore<T>, thresholds: Thresholds) -> PairDecision<T> {
    PairDecision { pair: score.pair.clone(), verdict: thresholds.verdict(score.combined), combined: score.combined }
}

/// One review-file line: pair id, combined score, verdict, `feature=score`
/// list separated by `;`.
pub fn review_line<T: Scalar>(score: &PairScore<T>, verdict: Verdict) -> String {
    let features: Vec<String> = score.per_feature.iter().map(|(f, s)| format!("{f}={s}")).collect();
    format!("{}\t{}\t{}\t{}", score.pair, score.combined, verdict, features.join(";"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;
    use crate::extract::MentionId;
    use crate::simfns::{jaro_winkler, word_tokens, CanonicalDate, DEFAULT_PREFIX_SCALE};
    use proptest::prelude::*;

    fn pair() -> CandidatePair {
        CandidatePair::new(MentionId::new("a", Span::new(0, 1)), MentionId::new("b", Span::new(0, 1))).unwrap()
    }

    fn fv(surface: &str, context: &str) -> FeatureVector {
        let mut v = FeatureVector::default();
        v.insert(Feature::Surface, FeatureValue::Text(surface.into()));
        v.insert(Feature::Context, FeatureValue::Tokens(word_tokens(context)));
        v
    }

    fn scorer(specs: Vec<FeatureSpec>) -> Scorer<f64> {
        let cfg = ClassifierConfig { features: specs, ..ClassifierConfig::default() };
        Scorer::new(&cfg, FeatureStats::default()).unwrap()
    }

    fn two_feature() -> Scorer<f64> {
        scorer(vec![
            FeatureSpec::with(Feature::Surface, SimilarityFn::Exact, 0.5),
            FeatureSpec::with(Feature::Context, SimilarityFn::Jaccard, 0.5),
        ])
    }

    #[test]
    fn weighted_sum_toy_case() {
        // surface exact: 1.0; context jaccard {a,b} vs {a}: 0.5
        let s = score_pair(pair(), &fv("Obama", "a b"), &fv("Obama", "a"), &two_feature()).unwrap();
        assert_eq!(s.per_feature[&Feature::Surface], 1.0);
        assert_eq!(s.per_feature[&Feature::Context], 0.5);
        assert_eq!(s.combined, 0.75);
    }

    #[test]
    fn identical_and_disjoint() {
        let sc = scorer(vec![
            FeatureSpec::with(Feature::Surface, SimilarityFn::JaroWinkler, 0.3),
            FeatureSpec::with(Feature::Context, SimilarityFn::Jaccard, 0.9),
        ]);
        let a = fv("Barack Obama", "the senator from illinois");
        assert_eq!(score_pair(pair(), &a, &a.clone(), &sc).unwrap().combined, 1.0);
        let s = score_pair(pair(), &fv("abc", "x y"), &fv("xyz", "p q"), &sc).unwrap();
        assert_eq!(s.combined, 0.0);
    }

    #[test]
    fn absent_features_renormalize() {
        let mut b = FeatureVector::default();
        b.insert(Feature::Surface, FeatureValue::Text("Obama".into()));
        let s = score_pair(pair(), &fv("Obama", "a"), &b, &two_feature()).unwrap();
        assert_eq!(s.per_feature.len(), 1);
        assert_eq!(s.combined, 1.0);
        let err = score_pair(pair(), &FeatureVector::default(), &b, &two_feature()).unwrap_err();
        assert!(matches!(err, ClassifyError::NoFeatures(_)));
    }

    #[test]
    fn default_config_scores() {
        let sc = Scorer::<f64>::new(&ClassifierConfig::default(), FeatureStats::default()).unwrap();
        let mk = |s: &str| {
            let mut v = fv(s, "x");
            v.insert(Feature::Soundex, FeatureValue::Text(crate::simfns::soundex(s).unwrap()));
            v
        };
        let s = score_pair(pair(), &mk("Daniel"), &mk("Damiel"), &sc).unwrap();
        let jw: f64 = jaro_winkler("Daniel", "Damiel", DEFAULT_PREFIX_SCALE).unwrap();
        assert_eq!(s.per_feature[&Feature::Soundex], 1.0);
        assert_eq!(s.per_feature[&Feature::Surface], jw);
        assert!((s.combined - (jw + 2.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tfidf_and_date_features() {
        let mut stats = FeatureStats::new([Feature::Body]);
        let body = |t: &str| {
            let mut v = FeatureVector::default();
            v.insert(Feature::Body, FeatureValue::Tokens(word_tokens(t)));
            v
        };
        stats.add("d1", &body("obama visits berlin"));
        stats.add("d2", &body("obama visits paris"));
        stats.add("d3", &body("markets fall"));
        let cfg = ClassifierConfig {
            features: vec![FeatureSpec::new(Feature::Body), FeatureSpec::new(Feature::Date)],
            ..ClassifierConfig::default()
        };
        let sc = Scorer::<f64>::new(&cfg, stats).unwrap();
        let mut a = body("obama visits berlin");
        a.insert(Feature::Date, FeatureValue::Date(CanonicalDate::from_ymd(2009, 1, 1).unwrap()));
        let mut b = body("obama visits paris");
        b.insert(Feature::Date, FeatureValue::Date(CanonicalDate::from_ymd(2009, 1, 2).unwrap()));
        let s = score_pair(pair(), &a, &b, &sc).unwrap();
        assert_eq!(s.per_feature[&Feature::Date], 0.5);
        let cos = s.per_feature[&Feature::Body];
        assert!(cos > 0.0 && cos < 1.0);

        assert!(Scorer::<f64>::new(&cfg, FeatureStats::default()).is_err());
    }

    #[test]
    fn decision_examples() {
        let at = |c: f64| PairScore { pair: pair(), per_feature: BTreeMap::new(), combined: c };
        assert_eq!(decide(&at(0.5), 0.5, 0.5).unwrap().verdict, Verdict::Coreferent);
        assert_eq!(decide(&at(0.49), 0.5, 0.5).unwrap().verdict, Verdict::NonCoreferent);
        assert_eq!(decide(&at(0.6), 0.5, 0.7).unwrap().verdict, Verdict::Possible);
        assert!(matches!(decide(&at(0.6), 0.7, 0.5), Err(ClassifyError::Config(_))));
        assert!(Thresholds::new(-0.1, 0.5).is_err());
        assert!(Thresholds::new(0.5, 1.1).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = |features| ClassifierConfig { features, ..ClassifierConfig::default() };
        assert!(cfg(vec![]).validate().is_err());
        assert!(cfg(vec![FeatureSpec::new(Feature::Surface), FeatureSpec::new(Feature::Surface)]).validate().is_err());
        assert!(cfg(vec![FeatureSpec::with(Feature::Date, SimilarityFn::Edit, 1.0)]).validate().is_err());
        assert!(cfg(vec![FeatureSpec::with(Feature::Surface, SimilarityFn::Edit, -1.0)]).validate().is_err());
        assert!(cfg(vec![FeatureSpec::with(Feature::Surface, SimilarityFn::Edit, 0.0)]).validate().is_err());
        let mut spec = FeatureSpec::new(Feature::Surface);
        spec.q = Some(3);
        assert!(cfg(vec![spec.clone()]).validate().is_err());
        spec.function = Some(SimilarityFn::Qgram);
        assert!(cfg(vec![spec]).validate().is_ok());
    }

    #[test]
    fn toml_config() {
        let text = r#"
            lower = 0.4
            upper = 0.8

            [[features]]
            feature = "surface"
            function = "qgram"
            q = 3
            denominator = "average"
            weight = 2.0

            [[features]]
            feature = "doc-type"

            [[categories]]
            a = "story"
            b = "advis"
            score = 0.25
        "#;
        let cfg = ClassifierConfig::from_toml(text).unwrap();
        assert_eq!(cfg.features.len(), 2);
        assert_eq!(cfg.features[1].function(), SimilarityFn::Categorical);
        assert_eq!(cfg.thresholds().unwrap().upper(), 0.8);
        assert!(ClassifierConfig::from_toml("lower = 0.9\nupper = 0.1\n").is_err());
        assert!(ClassifierConfig::from_toml("bogus = 1\n").is_err());
        assert_eq!(ClassifierConfig::from_toml("").unwrap(), ClassifierConfig::default());
    }

    #[test]
    fn review_format() {
        let mut per_feature = BTreeMap::new();
        per_feature.insert(Feature::Surface, 0.75);
        per_feature.insert(Feature::Context, 0.5);
        let s = PairScore { pair: pair(), per_feature, combined: 0.625 };
        assert_eq!(review_line(&s, Verdict::Possible), "a:0-1|b:0-1\t0.625\tpossible\tsurface=0.75;context=0.5");
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-e]{1,4}"
    }

    fn vector() -> impl Strategy<Value = FeatureVector> {
        (word(), proptest::collection::vec(word(), 0..5)).prop_map(|(s, ctx)| fv(&s, &ctx.join(" ")))
    }

    proptest! {
        #[test]
        fn symmetric(a in vector(), b in vector()) {
            let sc = Scorer::<f64>::new(&ClassifierConfig::default(), FeatureStats::default()).unwrap();
            let ab = score_pair(pair(), &a, &b, &sc).unwrap();
            let ba = score_pair(pair(), &b, &a, &sc).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn weight_scaling_invariant(a in vector(), b in vector(), w1 in 0.01f64..10.0, w2 in 0.01f64..10.0, c in 0.01f64..100.0) {
            let specs = |k: f64| vec![
                FeatureSpec::with(Feature::Surface, SimilarityFn::JaroWinkler, w1 * k),
                FeatureSpec::with(Feature::Context, SimilarityFn::Jaccard, w2 * k),
            ];
            let x = score_pair(pair(), &a, &b, &scorer(specs(1.0))).unwrap().combined;
            let y = score_pair(pair(), &a, &b, &scorer(specs(c))).unwrap().combined;
            prop_assert!((x - y).abs() < 1e-12);
        }

        #[test]
        fn identical_copy_is_coreferent(a in vector()) {
            let sc = Scorer::<f64>::new(&ClassifierConfig::default(), FeatureStats::default()).unwrap();
            let s = score_pair(pair(), &a, &a.clone(), &sc).unwrap();
            prop_assert_eq!(decide_with(&s, sc.thresholds()).verdict, Verdict::Coreferent);
        }

        #[test]
        fn threshold_monotonicity(c in 0.0f64..=1.0, l in 0.0f64..=1.0, u in 0.0f64..=1.0, d in 0.0f64..=0.5) {
            let (l, u) = if l <= u { (l, u) } else { (u, l) };
            let base = Thresholds::new(l, u).unwrap();
            if let Ok(raised) = Thresholds::new(l, (u + d).min(1.0)) {
                if raised.verdict(c) == Verdict::Coreferent {
                    prop_assert_eq!(base.verdict(c), Verdict::Coreferent);
                }
            }
            let lowered = Thresholds::new((l - d).max(0.0), u).unwrap();
            if lowered.verdict(c) == Verdict::NonCoreferent {
                prop_assert_eq!(base.verdict(c), Verdict::NonCoreferent);
            }
        }
    }
}
