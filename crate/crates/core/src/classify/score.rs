use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::features::{Feature, FeatureStats, FeatureValue, FeatureVector, ValueKind};
use super::{ClassifyError, PairScore, Thresholds};
use crate::block::CandidatePair;
use crate::scalar::Scalar;
use crate::simfns::{
    categorical_similarity, date_similarity, edit_similarity, jaccard_sets, jaro, jaro_winkler, phonetic_equal,
    qgram_similarity, word_tokens, CanonicalDate, CategoryTable, QGramConfig, QGramDenominator, TfIdfVector,
    DEFAULT_PREFIX_SCALE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityFn {
    JaroWinkler,
    Jaro,
    Edit,
    Qgram,
    Jaccard,
    TfidfCosine,
    Phonetic,
    Exact,
    Categorical,
    Date,
}

impl SimilarityFn {
    pub fn default_for(feature: Feature) -> Self {
        match feature {
            Feature::Surface | Feature::NormalizedSurface => SimilarityFn::JaroWinkler,
            Feature::Soundex => SimilarityFn::Phonetic,
            Feature::Context => SimilarityFn::Jaccard,
            Feature::Headline | Feature::Body => SimilarityFn::TfidfCosine,
            Feature::DocType => SimilarityFn::Categorical,
            Feature::Date => SimilarityFn::Date,
        }
    }

    fn accepts(self, kind: ValueKind) -> bool {
        match self {
            SimilarityFn::Date => kind == ValueKind::Date,
            SimilarityFn::Jaccard | SimilarityFn::TfidfCosine => kind != ValueKind::Date,
            _ => kind == ValueKind::Text,
        }
    }
}

/// One enabled feature: which function scores it and with what weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FeatureSpec {
    pub feature: Feature,
    #[serde(default)]
    pub function: Option<SimilarityFn>,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default)]
    pub prefix_scale: Option<f64>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub denominator: Option<QGramDenominator>,
}

fn one() -> f64 {
    1.0
}

impl FeatureSpec {
    pub fn new(feature: Feature) -> Self {
        Self { feature, function: None, weight: 1.0, prefix_scale: None, q: None, denominator: None }
    }

    pub fn with(feature: Feature, function: SimilarityFn, weight: f64) -> Self {
        Self { function: Some(function), weight, ..Self::new(feature) }
    }

    pub fn function(&self) -> SimilarityFn {
        self.function.unwrap_or_else(|| SimilarityFn::default_for(self.feature))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CategoryScore {
    pub a: String,
    pub b: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassifierConfig {
    pub features: Vec<FeatureSpec>,
    pub lower: f64,
    pub upper: f64,
    /// Similarities between categorical values such as document types.
    pub categories: Vec<CategoryScore>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            features: vec![
                FeatureSpec::new(Feature::Surface),
                FeatureSpec::new(Feature::Soundex),
                FeatureSpec::new(Feature::Context),
            ],
            lower: 0.5,
            upper: 0.5,
            categories: Vec::new(),
        }
    }
}

impl ClassifierConfig {
    pub fn enabled(&self) -> Vec<Feature> {
        self.features.iter().map(|s| s.feature).collect()
    }

    /// Features whose statistics must be collected before scoring.
    pub fn tfidf_features(&self) -> Vec<Feature> {
        self.features.iter().filter(|s| s.function() == SimilarityFn::TfidfCosine).map(|s| s.feature).collect()
    }

    pub fn thresholds(&self) -> Result<Thresholds, ClassifyError> {
        Thresholds::new(self.lower, self.upper)
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: String| Err(ClassifyError::Config(m));
        if self.features.is_empty() {
            return bad("no features enabled".into());
        }
        let mut seen = BTreeSet::new();
        for s in &self.features {
            if !seen.insert(s.feature) {
                return bad(format!("feature `{}` listed twice", s.feature));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return bad(format!("feature `{}`: weight must be finite and non-negative", s.feature));
            }
            let f = s.function();
            if !f.accepts(s.feature.kind()) {
                return bad(format!("feature `{}` cannot be scored with {f:?}", s.feature));
            }
            if let Some(p) = s.prefix_scale {
                if f != SimilarityFn::JaroWinkler || !(0.0..=0.25).contains(&p) {
                    return bad(format!("feature `{}`: prefix-scale needs jaro-winkler and [0, 0.25]", s.feature));
                }
            }
            if (s.q.is_some() || s.denominator.is_some()) && f != SimilarityFn::Qgram {
                return bad(format!("feature `{}`: q-gram parameters need the qgram function", s.feature));
            }
            if s.q == Some(0) {
                return bad(format!("feature `{}`: q must be positive", s.feature));
            }
        }
        if self.features.iter().all(|s| s.weight == 0.0) {
            return bad("all feature weights are zero".into());
        }
        self.category_table()?;
        self.thresholds()?;
        Ok(())
    }

    pub fn category_table(&self) -> Result<CategoryTable, ClassifyError> {
        let mut t = CategoryTable::new();
        for c in &self.categories {
            t.insert(&c.a, &c.b, c.score).map_err(|e| ClassifyError::Config(e.to_string()))?;
        }
        Ok(t)
    }

    pub fn from_toml(text: &str) -> Result<Self, ClassifyError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ClassifyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A feature value converted into the representation its function needs.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Text(String),
    /// Soundex code, compared by equality.
    Code(String),
    Set(BTreeSet<String>),
    Vector(TfIdfVector),
    Date(CanonicalDate),
}

/// Prepared values indexed like `ClassifierConfig::features`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreparedFeatures {
    values: Vec<Option<Prepared>>,
}

#[derive(Debug, Clone)]
struct Slot {
    feature: Feature,
    function: SimilarityFn,
    weight: f64,
    prefix_scale: f64,
    qgram: QGramConfig,
}

/// Scores prepared mention features. Built once per run and shared.
#[derive(Debug, Clone)]
pub struct Scorer<T: Scalar> {
    slots: Vec<Slot>,
    stats: FeatureStats,
    categories: CategoryTable,
    thresholds: Thresholds,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> Scorer<T> {
    pub fn new(config: &ClassifierConfig, stats: FeatureStats) -> Result<Self, ClassifyError> {
        config.validate()?;
        for f in config.tfidf_features() {
            if stats.get(f).is_none_or(|s| s.is_empty()) {
                return Err(ClassifyError::Config(format!("no tf-idf statistics for feature `{f}`")));
            }
        }
        let slots = config
            .features
            .iter()
            .map(|s| Slot {
                feature: s.feature,
                function: s.function(),
                weight: s.weight,
                prefix_scale: s.prefix_scale.unwrap_or(DEFAULT_PREFIX_SCALE),
                qgram: QGramConfig::new(s.q.unwrap_or(2), s.denominator.unwrap_or_default())
                    .expect("validated q"),
            })
            .collect();
        Ok(Self {
            slots,
            stats,
            categories: config.category_table()?,
            thresholds: config.thresholds()?,
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        self.slots.iter().map(|s| s.feature)
    }

    fn prepare_one(&self, slot: &Slot, value: &FeatureValue) -> Option<Prepared> {
        let tokens = |v: &FeatureValue| match v {
            FeatureValue::Tokens(t) => t.clone(),
            FeatureValue::Text(s) => word_tokens(s),
            FeatureValue::Date(_) => Vec::new(),
        };
        match (slot.function, value) {
            (SimilarityFn::Date, FeatureValue::Date(d)) => Some(Prepared::Date(*d)),
            (SimilarityFn::Date, _) => None,
            (SimilarityFn::Jaccard, v) => Some(Prepared::Set(tokens(v).into_iter().collect())),
            (SimilarityFn::TfidfCosine, v) => {
                let stats = self.stats.get(slot.feature)?;
                let vector = stats.vectorize(&tokens(v)).ok()?;
                (!vector.is_zero()).then_some(Prepared::Vector(vector))
            }
            (SimilarityFn::Phonetic, FeatureValue::Text(s)) if slot.feature == Feature::Soundex => {
                Some(Prepared::Code(s.clone()))
            }
            (_, FeatureValue::Text(s)) => Some(Prepared::Text(s.clone())),
            _ => None,
        }
    }

    pub fn prepare(&self, fv: &FeatureVector) -> PreparedFeatures {
        let values = self.slots.iter().map(|slot| fv.get(slot.feature).and_then(|v| self.prepare_one(slot, v))).collect();
        PreparedFeatures { values }
    }

    fn similarity(&self, slot: &Slot, a: &Prepared, b: &Prepared) -> Option<T> {
        use Prepared as P;
        let s = match (slot.function, a, b) {
            (SimilarityFn::JaroWinkler, P::Text(x), P::Text(y)) => {
                jaro_winkler(x, y, T::lit(slot.prefix_scale)).expect("validated prefix scale")
            }
            (SimilarityFn::Jaro, P::Text(x), P::Text(y)) => jaro(x, y),
            (SimilarityFn::Edit, P::Text(x), P::Text(y)) => edit_similarity(x, y),
            (SimilarityFn::Qgram, P::Text(x), P::Text(y)) => qgram_similarity(x, y, slot.qgram),
            (SimilarityFn::Exact, P::Text(x), P::Text(y)) => {
                if x == y {
                    T::one()
                } else {
                    T::zero()
                }
            }
            (SimilarityFn::Phonetic, P::Code(x), P::Code(y)) => {
                if x == y {
                    T::one()
                } else {
                    T::zero()
                }
            }
            (SimilarityFn::Phonetic, P::Text(x), P::Text(y)) => phonetic_equal(x, y),
            (SimilarityFn::Categorical, P::Text(x), P::Text(y)) => categorical_similarity(x, y, &self.categories),
            (SimilarityFn::Jaccard, P::Set(x), P::Set(y)) => jaccard_sets(x, y),
            (SimilarityFn::TfidfCosine, P::Vector(x), P::Vector(y)) => x.cosine(y),
            (SimilarityFn::Date, P::Date(x), P::Date(y)) => date_similarity(*x, *y),
            _ => return None,
        };
        Some(s)
    }

    /// Per-feature scores and the weighted combination over features present
    /// on both sides.
    pub fn score(&self, a: &PreparedFeatures, b: &PreparedFeatures) -> Option<(BTreeMap<Feature, T>, T)> {
        let mut per_feature = BTreeMap::new();
        let (mut num, mut den) = (T::zero(), T::zero());
        for (k, slot) in self.slots.iter().enumerate() {
            let (Some(Some(x)), Some(Some(y))) = (a.values.get(k), b.values.get(k)) else { continue };
            let Some(s) = self.similarity(slot, x, y) else { continue };
            per_feature.insert(slot.feature, s);
            let w = T::lit(slot.weight);
            num = num + w * s;
            den = den + w;
        }
        if den > T::zero() {
            Some((per_feature, (num / den).unit()))
        } else {
            None
        }
    }

    pub fn score_pair(
        &self,
        pair: CandidatePair,
        a: &PreparedFeatures,
        b: &PreparedFeatures,
    ) -> Result<PairScore<T>, ClassifyError> {
        match self.score(a, b) {
            Some((per_feature, combined)) => Ok(PairScore { pair, per_feature, combined }),
            None => Err(ClassifyError::NoFeatures(pair.to_string())),
        }
    }
}

/// Score two feature vectors directly, preparing them on the fly.
pub fn score_pair<T: Scalar>(
    pair: CandidatePair,
    a: &FeatureVector,
    b: &FeatureVector,
    scorer: &Scorer<T>,
) -> Result<PairScore<T>, ClassifyError> {
    scorer.score_pair(pair, &scorer.prepare(a), &scorer.prepare(b))
}
