//! Geometric-mean research-output indicators over publication and
//! citation counts, with the dataset ingestion and statistics needed
//! to analyse them.
//!
//! The crate is organised in five layers:
//!
//! - [`fields`]: the closed enumeration of the 22 research fields.
//! - [`indicators`]: pure index computations (gro, rro, p, cq, h,
//!   specialization, aggregation) over `(N, C)` count pairs.
//! - [`dataset`]: CSV ingestion and validation of entity metrics,
//!   world baselines, economic records and exclusion lists.
//! - [`stats`]: correlation, least squares, covariance PCA and
//!   agglomerative hierarchical clustering, all deterministic.
//! - [`reports`]: per-entity indicator reports and the downstream
//!   analyses (linearity, scheme aggregation, PCA maps, wealth
//!   regressions, indicator comparison).
//!
//! [`synth`] provides the seeded generators used when no real
//! institution-level extract is available.
//!
//! Everything is a pure function of its inputs; parsed datasets are
//! immutable and safe to share across threads.

pub mod dataset;
pub mod fields;
pub mod indicators;
pub mod reports;
pub mod stats;
pub mod synth;

pub use dataset::{
    apply_threshold, parse_econ, parse_entity_metrics, parse_exclusions, parse_world_baseline,
    Dataset, EconRecord, EntityId, EntityKind, EntityMetrics, ParseError, WorldBaseline,
    DEFAULT_MIN_DOCS,
};
pub use fields::FieldId;
pub use indicators::{
    aggregate, cq_index, field_indexes, geometric_mean, gro, h_index, p_index, rro, specialization,
    CountPair, FieldIndexValues, IndexError, IndexValues, Specialization,
};
pub use reports::{
    aggregate_by_scheme, build_report, build_reports, indicator_comparison, linearity_study,
    pca_map, wealth_study, ClusterScheme, Comparison, ComparisonRow, CorpusEntity, IndicatorReport,
    LinearityStudy, PcaMap, ReportError, SchemeError, WealthPoint, WealthStudy,
};
pub use stats::{
    covariance_pca, hcluster, log_transform, ols, pearson, rank_desc, Dendrogram, Distance,
    Linkage, PcaResult, RegressionResult, StatsError,
};
