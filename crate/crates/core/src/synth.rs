//! Seeded synthetic data generators.
//!
//! Real institution-level extracts cannot be redistributed, so the
//! analyses that need a population of entities are exercised on
//! generated corpora instead. Both generators are fully determined by
//! their seed: same seed, same entities, byte for byte downstream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use std::collections::BTreeMap;

use crate::dataset::{EntityId, EntityKind, EntityMetrics, WorldBaseline};
use crate::fields::FieldId;
use crate::indicators::CountPair;
use crate::reports::CorpusEntity;

/// Controls for [`world_proportional_sample`].
#[derive(Debug, Clone, Copy)]
pub struct SampleParams {
    pub entity_count: usize,
    /// Field counts are scaled by independent factors drawn uniformly
    /// from `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    /// Entity scale relative to the world, drawn log-uniformly.
    pub scale_range: (f64, f64),
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            entity_count: 189,
            jitter: 0.2,
            scale_range: (1e-4, 0.3),
        }
    }
}

/// Entities whose field profiles are jittered, scaled-down copies of
/// the world baseline. Sizes span several orders of magnitude, the way
/// country outputs do.
pub fn world_proportional_sample(
    world: &WorldBaseline,
    params: &SampleParams,
    seed: u64,
) -> Vec<EntityMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = params.scale_range;
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let mut entities = Vec::with_capacity(params.entity_count);
    for i in 0..params.entity_count {
        let scale = rng.random_range(ln_lo..ln_hi).exp();
        let mut by_field: BTreeMap<FieldId, CountPair> = BTreeMap::new();
        for &field in FieldId::ALL.iter() {
            let base = world.field_counts(field);
            let u: f64 = rng.random_range(1.0 - params.jitter..1.0 + params.jitter);
            let v: f64 = rng.random_range(1.0 - params.jitter..1.0 + params.jitter);
            let n = ((base.n_docs as f64) * scale * u).round().max(1.0) as u64;
            let c = ((base.citations as f64) * scale * v).round().max(0.0) as u64;
            by_field.insert(field, CountPair::new(n, c));
        }
        let totals = CountPair::new(
            by_field.values().map(|p| p.n_docs).sum(),
            by_field.values().map(|p| p.citations).sum(),
        );
        entities.push(EntityMetrics {
            id: EntityId::new(format!("SYN{i:03}"), EntityKind::Country),
            totals,
            by_field,
        });
    }
    entities
}

/// Controls for [`citation_corpus`].
#[derive(Debug, Clone, Copy)]
pub struct CorpusParams {
    pub entity_count: usize,
    /// Paper counts per entity, drawn log-uniformly.
    pub papers_range: (u64, u64),
    /// Mean of the entity-level log citation rate.
    pub quality_ln_mean: f64,
    /// Spread of the entity-level log citation rate.
    pub quality_ln_sd: f64,
    /// Within-entity spread of per-paper log citations; large values
    /// give the long tail real citation data shows.
    pub citation_ln_sd: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        Self {
            entity_count: 200,
            papers_range: (50, 5000),
            quality_ln_mean: 6.0f64.ln(),
            quality_ln_sd: 0.5,
            citation_ln_sd: 1.2,
        }
    }
}

/// Entities with per-paper citation lists drawn from a long-tail
/// (log-normal) distribution around an entity-level citation rate.
pub fn citation_corpus(params: &CorpusParams, seed: u64) -> Vec<CorpusEntity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = params.papers_range;
    let (ln_lo, ln_hi) = ((lo as f64).ln(), (hi as f64).ln());
    let quality =
        Normal::new(params.quality_ln_mean, params.quality_ln_sd).expect("valid normal parameters");
    let mut corpus = Vec::with_capacity(params.entity_count);
    for i in 0..params.entity_count {
        let papers = rng.random_range(ln_lo..ln_hi).exp().round() as usize;
        let mu = quality.sample(&mut rng);
        let per_paper =
            LogNormal::new(mu, params.citation_ln_sd).expect("valid log-normal parameters");
        let citations: Vec<u64> = (0..papers.max(1))
            .map(|_| per_paper.sample(&mut rng).floor().max(0.0) as u64)
            .collect();
        corpus.push(CorpusEntity {
            id: EntityId::new(format!("SYN{i:03}"), EntityKind::Institution),
            citations,
        });
    }
    corpus
}
