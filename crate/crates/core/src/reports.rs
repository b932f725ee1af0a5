//! Per-entity indicator reports and the downstream analyses built on
//! them: field profiles, linearity of whole-entity indexes against
//! field sums, scheme aggregation, PCA maps, wealth regressions and
//! the multi-indicator comparison harness.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dataset::{EconRecord, EntityId, EntityMetrics, WorldBaseline};
use crate::fields::FieldId;
use crate::indicators::{
    aggregate, cq_index, field_indexes, gro, h_index, p_index, specialization, CountPair,
    FieldIndexValues, IndexError, IndexValues,
};
use crate::stats::{self, covariance_pca, ols, pearson, RegressionResult, StatsError};

/// Two principal components explaining at least this fraction of the
/// variance marks a map as structurally informative.
pub const EXPLAINED_TOP2_FLAG: f64 = 0.70;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("entity `{code}` has zero documents; filter it out with the document threshold first")]
    ZeroDocEntity { code: String },
    #[error("need at least {needed} usable entities, got {got}")]
    TooFewEntities { needed: usize, got: usize },
    #[error("cluster scheme needs at least two groups, got {got}")]
    TooFewGroups { got: usize },
    #[error("no economic record for entity `{code}`")]
    MissingEcon { code: String },
    #[error("entity `{code}` has wealth index {wth}, cannot take logarithms")]
    BadWealth { code: String, wth: f64 },
    #[error("comparison corpus is empty")]
    EmptyCorpus,
    #[error("corpus entity `{code}` has no papers")]
    EmptyEntity { code: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Everything computed for one entity: whole-entity indexes, per-field
/// indexes, field shares and specialization.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    pub id: EntityId,
    pub indexes: IndexValues,
    pub by_field: BTreeMap<FieldId, FieldIndexValues>,
    pub sum_gro_r: f64,
    pub sum_rro_r: f64,
    pub sgr: f64,
    pub top2: f64,
    /// Competition rank by gro; 0 until assigned by [`build_reports`].
    pub gro_rank: usize,
    /// Share of each present field's gro in `sum_gro_r`.
    pub shares: BTreeMap<FieldId, f64>,
}

/// Named, pairwise-disjoint groups of research fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterScheme {
    pub name: String,
    pub groups: BTreeMap<String, BTreeSet<FieldId>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error("line {line}: expected `name: field; field; ...`")]
    BadLine { line: usize },
    #[error("line {line}: unknown field name `{name}`")]
    UnknownField { line: usize, name: String },
    #[error("line {line}: duplicate group `{name}`")]
    DuplicateGroup { line: usize, name: String },
    #[error("line {line}: field `{field}` already belongs to group `{group}`")]
    OverlappingGroups {
        line: usize,
        field: String,
        group: String,
    },
    #[error("line {line}: group `{name}` has no fields")]
    EmptyGroup { line: usize, name: String },
    #[error("scheme has no groups")]
    Empty,
}

impl ClusterScheme {
    /// Parses scheme text: one group per line, `name: field; field; ...`,
    /// `#` comments and blank lines ignored. Groups must be non-empty
    /// and pairwise disjoint.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, SchemeError> {
        let mut groups: BTreeMap<String, BTreeSet<FieldId>> = BTreeMap::new();
        let mut owner: BTreeMap<FieldId, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (group, fields) = content
                .split_once(':')
                .ok_or(SchemeError::BadLine { line })?;
            let group = group.trim();
            if group.is_empty() {
                return Err(SchemeError::BadLine { line });
            }
            if groups.contains_key(group) {
                return Err(SchemeError::DuplicateGroup {
                    line,
                    name: group.to_string(),
                });
            }
            let mut set = BTreeSet::new();
            for field_name in fields.split(';') {
                let field_name = field_name.trim();
                if field_name.is_empty() {
                    continue;
                }
                let field =
                    FieldId::parse(field_name).ok_or_else(|| SchemeError::UnknownField {
                        line,
                        name: field_name.to_string(),
                    })?;
                if let Some(existing) = owner.get(&field) {
                    return Err(SchemeError::OverlappingGroups {
                        line,
                        field: field.name().to_string(),
                        group: existing.clone(),
                    });
                }
                owner.insert(field, group.to_string());
                set.insert(field);
            }
            if set.is_empty() {
                return Err(SchemeError::EmptyGroup {
                    line,
                    name: group.to_string(),
                });
            }
            groups.insert(group.to_string(), set);
        }
        if groups.is_empty() {
            return Err(SchemeError::Empty);
        }
        Ok(Self {
            name: name.into(),
            groups,
        })
    }

    /// The built-in five-way grouping of the 22 fields.
    pub fn default_scheme() -> Self {
        Self::parse("default", DEFAULT_SCHEME_TEXT).expect("embedded scheme parses")
    }
}

/// Shipped grouping of the 22 research fields into five thematic
/// clusters.
pub const DEFAULT_SCHEME_TEXT: &str = "\
agrenv: Agricultural Sciences; Environment/Ecology; Plant & Animal Science
medlife: Biology & Biochemistry; Molecular Biol. & Genetics; Clinical Medicine; Microbiology; Multidisciplinary; Immunology; Neuroscience & Behavior; Pharmaco. & Toxicology
chemateng: Chemistry; Materials Science; Engineering; Computer Science; Mathematics
socsci: Psychiatry/Psychology; Social Sciences, general; Economics & Business
geophy: Physics; Space Science; Geosciences
";

/// Whole-entity and per-field indexes for one entity against the world
/// baseline. Fields without documents are absent: they are omitted
/// from `by_field`, the field sums and the shares.
pub fn build_report(
    entity: &EntityMetrics,
    world: &WorldBaseline,
) -> Result<IndicatorReport, ReportError> {
    if entity.totals.n_docs == 0 {
        return Err(ReportError::ZeroDocEntity {
            code: entity.id.code.clone(),
        });
    }
    let indexes = IndexValues::compute(entity.totals, world.quality())?;

    let mut by_field = BTreeMap::new();
    for (&field, &pair) in &entity.by_field {
        if pair.n_docs == 0 {
            continue;
        }
        let fi = field_indexes(pair, world.field_counts(field), field)?;
        by_field.insert(field, fi);
    }

    let sum_gro_r: f64 = by_field.values().map(|fi| fi.gro_r).sum();
    let sum_rro_r: f64 = by_field.values().map(|fi| fi.rro_r).sum();

    let gros: BTreeMap<FieldId, f64> = by_field.iter().map(|(&f, fi)| (f, fi.gro_r)).collect();
    let (shares, sgr, top2) = if sum_gro_r > 0.0 {
        let spec = specialization(&gros)?;
        let shares = gros.iter().map(|(&f, &g)| (f, g / sum_gro_r)).collect();
        (shares, spec.sgr, spec.top2)
    } else {
        // entity with no cited or no field data at all
        (BTreeMap::new(), 0.0, 0.0)
    };

    Ok(IndicatorReport {
        id: entity.id.clone(),
        indexes,
        by_field,
        sum_gro_r,
        sum_rro_r,
        sgr,
        top2,
        gro_rank: 0,
        shares,
    })
}

/// Builds a report per entity, sorted by code, with competition ranks
/// over the gro index assigned.
pub fn build_reports(
    entities: &[EntityMetrics],
    world: &WorldBaseline,
) -> Result<Vec<IndicatorReport>, ReportError> {
    let mut reports: Vec<IndicatorReport> = entities
        .iter()
        .map(|e| build_report(e, world))
        .collect::<Result<_, _>>()?;
    reports.sort_by(|a, b| a.id.code.cmp(&b.id.code));
    let values: BTreeMap<String, f64> = reports
        .iter()
        .map(|r| (r.id.code.clone(), r.indexes.gro))
        .collect();
    let ranks = stats::rank_desc(&values);
    for report in reports.iter_mut() {
        report.gro_rank = ranks[&report.id.code];
    }
    Ok(reports)
}

/// Regressions of the whole-entity indexes on their field sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearityStudy {
    /// gro on sum of gro_r.
    pub gro_fit: RegressionResult,
    /// rro on sum of rro_r.
    pub rro_fit: RegressionResult,
}

/// Fits gro against Σ gro_r and rro against Σ rro_r across entities.
pub fn linearity_study(reports: &[IndicatorReport]) -> Result<LinearityStudy, ReportError> {
    if reports.len() < 3 {
        return Err(ReportError::TooFewEntities {
            needed: 3,
            got: reports.len(),
        });
    }
    let sum_gro: Vec<f64> = reports.iter().map(|r| r.sum_gro_r).collect();
    let gro: Vec<f64> = reports.iter().map(|r| r.indexes.gro).collect();
    let sum_rro: Vec<f64> = reports.iter().map(|r| r.sum_rro_r).collect();
    let rro: Vec<f64> = reports.iter().map(|r| r.indexes.rro).collect();
    Ok(LinearityStudy {
        gro_fit: ols(&sum_gro, &gro)?,
        rro_fit: ols(&sum_rro, &rro)?,
    })
}

/// Counts and indexes of one scheme group for one entity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupAggregate {
    pub counts: CountPair,
    /// Indexes on the summed counts; the relative index uses the
    /// world's quality over the same group of fields.
    pub indexes: IndexValues,
}

/// Sums an entity's field counts over each scheme group and computes
/// indexes on the sums. Groups the entity has no documents in are
/// absent from the result.
pub fn aggregate_by_scheme(
    entity: &EntityMetrics,
    scheme: &ClusterScheme,
    world: &WorldBaseline,
) -> Result<BTreeMap<String, GroupAggregate>, ReportError> {
    let mut out = BTreeMap::new();
    for (group, fields) in &scheme.groups {
        let pairs: Vec<CountPair> = fields
            .iter()
            .filter_map(|f| entity.by_field.get(f))
            .copied()
            .filter(|p| p.n_docs > 0)
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let counts = aggregate(&pairs)?;
        let world_counts = aggregate(
            &fields
                .iter()
                .map(|&f| world.field_counts(f))
                .collect::<Vec<_>>(),
        )?;
        let world_quality = world_counts.citations as f64 / world_counts.n_docs as f64;
        let indexes = IndexValues::compute(counts, world_quality)?;
        out.insert(group.clone(), GroupAggregate { counts, indexes });
    }
    Ok(out)
}

/// One entity's position on the first two principal components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaRow {
    pub code: String,
    pub pc1: f64,
    pub pc2: f64,
    /// Mathematical quadrant of (pc1, pc2): Q1 for (+,+), Q2 for
    /// (-,+), Q3 for (-,-), Q4 for (+,-); "none" when degenerate.
    pub quadrant: String,
}

/// Covariance PCA over per-group gro scores.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaMap {
    pub pca: stats::PcaResult,
    pub rows: Vec<PcaRow>,
    /// Group names in column order.
    pub group_names: Vec<String>,
    /// Entities skipped for incomplete group coverage.
    pub skipped: Vec<String>,
    /// Set when the data carry no usable variance on two axes.
    pub degenerate: bool,
    pub explained_top2: f64,
    /// Whether the first two components reach [`EXPLAINED_TOP2_FLAG`].
    pub informative: bool,
}

/// Maps entities onto the first two principal components of their
/// per-group gro scores. Only entities covering every group enter the
/// analysis; at least three are required.
pub fn pca_map(
    entities: &[EntityMetrics],
    scheme: &ClusterScheme,
    world: &WorldBaseline,
) -> Result<PcaMap, ReportError> {
    if scheme.groups.len() < 2 {
        return Err(ReportError::TooFewGroups {
            got: scheme.groups.len(),
        });
    }
    let group_names: Vec<String> = scheme.groups.keys().cloned().collect();

    let mut codes = Vec::new();
    let mut skipped = Vec::new();
    let mut matrix: Vec<Vec<f64>> = Vec::new();
    let mut sorted: Vec<&EntityMetrics> = entities.iter().collect();
    sorted.sort_by(|a, b| a.id.code.cmp(&b.id.code));
    for entity in sorted {
        let groups = aggregate_by_scheme(entity, scheme, world)?;
        if group_names.iter().all(|g| groups.contains_key(g)) {
            matrix.push(group_names.iter().map(|g| groups[g].indexes.gro).collect());
            codes.push(entity.id.code.clone());
        } else {
            skipped.push(entity.id.code.clone());
        }
    }
    if codes.len() < 3 {
        return Err(ReportError::TooFewEntities {
            needed: 3,
            got: codes.len(),
        });
    }

    let pca = covariance_pca(&matrix)?;
    let total: f64 = pca.eigenvalues.iter().sum();
    let degenerate =
        total <= 0.0 || pca.eigenvalues.get(1).copied().unwrap_or(0.0) <= f64::EPSILON * total;
    let explained_top2 = pca.explained_fraction.iter().take(2).sum::<f64>();

    let rows = codes
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let pc1 = pca.scores[i][0];
            let pc2 = pca.scores[i].get(1).copied().unwrap_or(0.0);
            let quadrant = if degenerate {
                "none".to_string()
            } else {
                match (pc1 >= 0.0, pc2 >= 0.0) {
                    (true, true) => "Q1",
                    (false, true) => "Q2",
                    (false, false) => "Q3",
                    (true, false) => "Q4",
                }
                .to_string()
            };
            PcaRow {
                code: code.clone(),
                pc1,
                pc2,
                quadrant,
            }
        })
        .collect();

    Ok(PcaMap {
        informative: explained_top2 >= EXPLAINED_TOP2_FLAG,
        pca,
        rows,
        group_names,
        skipped,
        degenerate,
        explained_top2,
    })
}

/// One entity's position in the wealth regression.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthPoint {
    pub code: String,
    pub ln_wth: Option<f64>,
    pub ln_gro: Option<f64>,
    pub excluded: bool,
    /// Non-empty exactly when `excluded`.
    pub reason: String,
}

/// Regression of ln(gro) on ln(wth) plus the full point list.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthStudy {
    pub fit: RegressionResult,
    pub points: Vec<WealthPoint>,
}

/// Regresses ln(gro) on ln(wth) over all non-excluded reports.
/// Excluded entities stay in the output with their reason; entities
/// with a zero index are excluded automatically because their
/// logarithm is undefined. A non-excluded entity without an economic
/// record is an error.
pub fn wealth_study(
    reports: &[IndicatorReport],
    econ: &BTreeMap<String, EconRecord>,
    exclusions: &BTreeSet<String>,
) -> Result<WealthStudy, ReportError> {
    let mut points = Vec::with_capacity(reports.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sorted: Vec<&IndicatorReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.id.code.cmp(&b.id.code));
    for report in sorted {
        let code = report.id.code.clone();
        let record = econ.get(&code);
        let ln_wth = match record {
            Some(r) if r.wth > 0.0 => Some(r.wth.ln()),
            _ => None,
        };
        let ln_gro = if report.indexes.gro > 0.0 {
            Some(report.indexes.gro.ln())
        } else {
            None
        };
        if exclusions.contains(&code) {
            points.push(WealthPoint {
                code,
                ln_wth,
                ln_gro,
                excluded: true,
                reason: "listed in exclusion file".to_string(),
            });
            continue;
        }
        let record = record.ok_or(ReportError::MissingEcon { code: code.clone() })?;
        if !record.wth.is_finite() || record.wth <= 0.0 {
            return Err(ReportError::BadWealth {
                code,
                wth: record.wth,
            });
        }
        if ln_gro.is_none() {
            points.push(WealthPoint {
                code,
                ln_wth,
                ln_gro: None,
                excluded: true,
                reason: "zero index, logarithm undefined".to_string(),
            });
            continue;
        }
        xs.push(ln_wth.expect("positive wth"));
        ys.push(ln_gro.expect("positive gro"));
        points.push(WealthPoint {
            code,
            ln_wth,
            ln_gro,
            excluded: false,
            reason: String::new(),
        });
    }
    let fit = ols(&xs, &ys)?;
    Ok(WealthStudy { fit, points })
}

/// One corpus entity: an identifier plus per-paper citation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntity {
    pub id: EntityId,
    pub citations: Vec<u64>,
}

/// All indicators for one corpus entity.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub code: String,
    pub n_papers: u64,
    pub citations: u64,
    pub gro: f64,
    pub h: u64,
    pub p: f64,
    pub cq: f64,
    /// Papers at or above the corpus-wide 90th percentile citation
    /// count (nearest-rank percentile over all papers in the corpus).
    pub top_decile: u64,
}

/// Correlation of two log-indicators; `None` when undefined (zero
/// variance after exclusions, or fewer than two usable entities).
pub type LogCorrelation = Option<f64>;

/// Output of the indicator comparison harness.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Indicator names, in the order used by `log_correlations`.
    pub indicator_names: Vec<&'static str>,
    /// Symmetric matrix of Pearson correlations among ln-indicators.
    pub log_correlations: Vec<Vec<LogCorrelation>>,
    /// Entities left out of the log correlations because one of their
    /// indicators is zero.
    pub excluded_from_log: Vec<String>,
    /// Citation value at the corpus-wide 90th percentile.
    pub top_decile_threshold: u64,
}

/// Computes gro/h/p/cq per corpus entity plus the correlation matrix
/// of the log-transformed indicators.
pub fn indicator_comparison(corpus: &[CorpusEntity]) -> Result<Comparison, ReportError> {
    if corpus.is_empty() {
        return Err(ReportError::EmptyCorpus);
    }
    let mut all_citations: Vec<u64> = Vec::new();
    for entity in corpus {
        if entity.citations.is_empty() {
            return Err(ReportError::EmptyEntity {
                code: entity.id.code.clone(),
            });
        }
        all_citations.extend_from_slice(&entity.citations);
    }
    // nearest-rank percentile: value at rank ceil(0.9 * M), 1-based,
    // over the ascending-sorted corpus
    all_citations.sort_unstable();
    let rank = ((0.9 * all_citations.len() as f64).ceil() as usize).max(1);
    let top_decile_threshold = all_citations[rank - 1];

    let mut sorted: Vec<&CorpusEntity> = corpus.iter().collect();
    sorted.sort_by(|a, b| a.id.code.cmp(&b.id.code));

    let mut rows = Vec::with_capacity(corpus.len());
    for entity in sorted {
        let n_papers = entity.citations.len() as u64;
        let citations: u64 = entity.citations.iter().sum();
        let pair = CountPair::new(n_papers, citations);
        let signed: Vec<i64> = entity.citations.iter().map(|&c| c as i64).collect();
        rows.push(ComparisonRow {
            code: entity.id.code.clone(),
            n_papers,
            citations,
            gro: gro(pair)?,
            h: h_index(&signed)?,
            p: p_index(pair)?,
            cq: cq_index(pair)?,
            top_decile: entity
                .citations
                .iter()
                .filter(|&&c| c >= top_decile_threshold)
                .count() as u64,
        });
    }

    let indicator_names = vec!["gro", "h", "p", "cq"];
    let mut excluded_from_log = Vec::new();
    let mut usable: Vec<&ComparisonRow> = Vec::new();
    for row in &rows {
        if row.gro > 0.0 && row.h > 0 && row.p > 0.0 && row.cq > 0.0 {
            usable.push(row);
        } else {
            excluded_from_log.push(row.code.clone());
        }
    }
    let columns: Vec<Vec<f64>> = vec![
        usable.iter().map(|r| r.gro.ln()).collect(),
        usable.iter().map(|r| (r.h as f64).ln()).collect(),
        usable.iter().map(|r| r.p.ln()).collect(),
        usable.iter().map(|r| r.cq.ln()).collect(),
    ];
    let k = indicator_names.len();
    let mut log_correlations = vec![vec![None; k]; k];
    for i in 0..k {
        log_correlations[i][i] = Some(1.0);
        for j in (i + 1)..k {
            let r = pearson(&columns[i], &columns[j]).ok();
            log_correlations[i][j] = r;
            log_correlations[j][i] = r;
        }
    }

    Ok(Comparison {
        rows,
        indicator_names,
        log_correlations,
        excluded_from_log,
        top_decile_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::EntityKind;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn world_table() -> WorldBaseline {
        let rows: [(FieldId, u64, u64); 22] = [
            (FieldId::AgriculturalSciences, 350182, 4214897),
            (FieldId::BiologyBiochemistry, 655603, 15040990),
            (FieldId::Chemistry, 1489725, 28295481),
            (FieldId::ClinicalMedicine, 2350035, 40702524),
            (FieldId::ComputerScience, 304964, 3505363),
            (FieldId::EconomicsBusiness, 229392, 2820097),
            (FieldId::Engineering, 1006427, 11974992),
            (FieldId::EnvironmentEcology, 370443, 6883427),
            (FieldId::Geosciences, 377291, 6472810),
            (FieldId::Immunology, 224428, 5737206),
            (FieldId::MaterialsScience, 658410, 10850762),
            (FieldId::Mathematics, 370480, 2267589),
            (FieldId::Microbiology, 177598, 3687959),
            (FieldId::MolecularBiologyGenetics, 394274, 13354013),
            (FieldId::Multidisciplinary, 16759, 355231),
            (FieldId::NeuroscienceBehavior, 452541, 11128242),
            (FieldId::PharmacologyToxicology, 340426, 5950164),
            (FieldId::Physics, 1024499, 15784117),
            (FieldId::PlantAnimalScience, 644911, 8171135),
            (FieldId::PsychiatryPsychology, 339808, 5959524),
            (FieldId::SocialSciencesGeneral, 758582, 7542918),
            (FieldId::SpaceScience, 132500, 3245915),
        ];
        WorldBaseline {
            totals: CountPair::new(12669278, 213945356),
            by_field: rows
                .iter()
                .map(|&(f, n, c)| (f, CountPair::new(n, c)))
                .collect(),
        }
    }

    fn world_as_entity() -> EntityMetrics {
        let world = world_table();
        EntityMetrics {
            id: EntityId::new("WLD", EntityKind::Country),
            totals: world.totals,
            by_field: world.by_field,
        }
    }

    fn uniform_world() -> WorldBaseline {
        WorldBaseline {
            totals: CountPair::new(22_000, 44_000),
            by_field: FieldId::ALL
                .iter()
                .map(|&f| (f, CountPair::new(1000, 2000)))
                .collect(),
        }
    }

    #[test]
    fn report_for_world_against_itself() {
        let world = world_table();
        let report = build_report(&world_as_entity(), &world).unwrap();
        assert!(rel_err(report.indexes.gro, 29651.0) < 1e-3);
        for fi in report.by_field.values() {
            assert!(rel_err(fi.relative_quality, 1.0) < 1e-12);
        }
        let ratio = report.indexes.gro / report.sum_gro_r;
        assert!((ratio - 0.231).abs() < 0.002, "ratio {ratio}");
        assert_eq!(report.by_field.len(), 22);
        let share_sum: f64 = report.shares.values().sum();
        assert!((share_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_single_field_entity() {
        let world = world_table();
        let entity = EntityMetrics {
            id: EntityId::new("ONE", EntityKind::Institution),
            totals: CountPair::new(100, 900),
            by_field: [(FieldId::Physics, CountPair::new(100, 900))].into(),
        };
        let report = build_report(&entity, &world).unwrap();
        assert_eq!(report.sgr, 1.0);
        assert_eq!(report.top2, 1.0);
        assert!(rel_err(report.sum_gro_r, report.by_field[&FieldId::Physics].gro_r) < 1e-15);
    }

    #[test]
    fn report_two_field_hand_example() {
        let entity = EntityMetrics {
            id: EntityId::new("TWO", EntityKind::Institution),
            totals: CountPair::new(200, 500),
            by_field: [
                (FieldId::Chemistry, CountPair::new(100, 400)),
                (FieldId::Physics, CountPair::new(100, 100)),
            ]
            .into(),
        };
        let report = build_report(&entity, &uniform_world()).unwrap();
        let chem = &report.by_field[&FieldId::Chemistry];
        let phys = &report.by_field[&FieldId::Physics];
        assert!(rel_err(chem.gro_r, 28.2842712475) < 1e-9);
        assert!(rel_err(chem.rro_r, 20.0) < 1e-9);
        assert!(rel_err(phys.gro_r, 10.0) < 1e-9);
        assert!(rel_err(phys.rro_r, 7.0710678119) < 1e-9);
        assert!(rel_err(report.sum_gro_r, 38.2842712475) < 1e-9);
        assert!(rel_err(report.sgr, 0.7387961250) < 1e-9);
        assert_eq!(report.top2, 1.0);
        assert!(rel_err(report.indexes.gro, 28.1170662595) < 1e-9);
        assert!(rel_err(report.indexes.rro, 19.8817682192) < 1e-9);
        assert!(rel_err(report.indexes.quantity_q, 316.2277660168) < 1e-9);
        assert!(rel_err(report.indexes.quality_q, 2.5) < 1e-12);
    }

    #[test]
    fn report_absent_field_is_omitted() {
        let entity = EntityMetrics {
            id: EntityId::new("ABS", EntityKind::Institution),
            totals: CountPair::new(10, 20),
            by_field: [
                (FieldId::Physics, CountPair::new(10, 20)),
                (FieldId::Chemistry, CountPair::new(0, 0)),
            ]
            .into(),
        };
        let report = build_report(&entity, &uniform_world()).unwrap();
        assert!(report.by_field.contains_key(&FieldId::Physics));
        assert!(!report.by_field.contains_key(&FieldId::Chemistry));
        assert!(!report.shares.contains_key(&FieldId::Chemistry));
    }

    #[test]
    fn report_zero_doc_entity_is_rejected() {
        let entity = EntityMetrics {
            id: EntityId::new("NIL", EntityKind::Institution),
            totals: CountPair::new(0, 0),
            by_field: BTreeMap::new(),
        };
        assert!(matches!(
            build_report(&entity, &uniform_world()),
            Err(ReportError::ZeroDocEntity { .. })
        ));
    }

    #[test]
    fn reports_rank_by_gro() {
        let world = uniform_world();
        let make = |code: &str, n: u64, c: u64| EntityMetrics {
            id: EntityId::new(code, EntityKind::Country),
            totals: CountPair::new(n, c),
            by_field: [(FieldId::Physics, CountPair::new(n, c))].into(),
        };
        let entities = vec![
            make("AAA", 10, 40),
            make("BBB", 10, 400),
            make("CCC", 10, 100),
        ];
        let reports = build_reports(&entities, &world).unwrap();
        let by_code: BTreeMap<&str, usize> = reports
            .iter()
            .map(|r| (r.id.code.as_str(), r.gro_rank))
            .collect();
        assert_eq!(by_code["BBB"], 1);
        assert_eq!(by_code["CCC"], 2);
        assert_eq!(by_code["AAA"], 3);
    }

    #[test]
    fn linearity_on_scaled_world_copies() {
        let world = world_table();
        let mut entities = Vec::new();
        for (i, scale) in [0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.004].iter().enumerate() {
            let by_field: BTreeMap<FieldId, CountPair> = world
                .by_field
                .iter()
                .map(|(&f, p)| {
                    (
                        f,
                        CountPair::new(
                            (p.n_docs as f64 * scale).round() as u64,
                            (p.citations as f64 * scale).round() as u64,
                        ),
                    )
                })
                .collect();
            let totals = CountPair::new(
                by_field.values().map(|p| p.n_docs).sum(),
                by_field.values().map(|p| p.citations).sum(),
            );
            entities.push(EntityMetrics {
                id: EntityId::new(format!("S{i:02}"), EntityKind::Country),
                totals,
                by_field,
            });
        }
        let reports = build_reports(&entities, &world).unwrap();
        let study = linearity_study(&reports).unwrap();
        // scaled copies lie on the world's own line through the origin
        assert!(
            (study.gro_fit.slope - 0.2312).abs() < 0.002,
            "{}",
            study.gro_fit.slope
        );
        assert!(study.gro_fit.r_squared > 0.999999);
        assert!(study.rro_fit.r_squared > 0.999999);
    }

    #[test]
    fn linearity_identical_entities_with_duplicates() {
        let world = uniform_world();
        let make = |code: &str, k: u64| EntityMetrics {
            id: EntityId::new(code, EntityKind::Country),
            totals: CountPair::new(10 * k, 40 * k),
            by_field: [
                (FieldId::Physics, CountPair::new(5 * k, 20 * k)),
                (FieldId::Chemistry, CountPair::new(5 * k, 20 * k)),
            ]
            .into(),
        };
        // two distinct profiles, each duplicated, zero noise
        let entities = vec![
            make("AAA", 1),
            make("AAB", 1),
            make("BBA", 4),
            make("BBB", 4),
        ];
        let reports = build_reports(&entities, &world).unwrap();
        let study = linearity_study(&reports).unwrap();
        assert!((study.gro_fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_parses_and_validates() {
        let scheme = ClusterScheme::default_scheme();
        assert_eq!(scheme.groups.len(), 5);
        let covered: usize = scheme.groups.values().map(|s| s.len()).sum();
        assert_eq!(covered, 22);

        assert!(matches!(
            ClusterScheme::parse("x", "a: Physics; NotAField"),
            Err(SchemeError::UnknownField { .. })
        ));
        assert!(matches!(
            ClusterScheme::parse("x", "a: Physics\nb: Physics"),
            Err(SchemeError::OverlappingGroups { .. })
        ));
        assert!(matches!(
            ClusterScheme::parse("x", ""),
            Err(SchemeError::Empty)
        ));
        assert!(matches!(
            ClusterScheme::parse("x", "a: Physics\na: Chemistry"),
            Err(SchemeError::DuplicateGroup { .. })
        ));
    }

    #[test]
    fn scheme_aggregation_matches_spreadsheet_sums() {
        let world = world_table();
        let entity = world_as_entity();
        let groups =
            aggregate_by_scheme(&entity, &ClusterScheme::default_scheme(), &world).unwrap();
        assert_eq!(groups["agrenv"].counts, CountPair::new(1365536, 19269459));
        assert_eq!(groups["medlife"].counts, CountPair::new(4611664, 95956329));
        assert_eq!(
            groups["chemateng"].counts,
            CountPair::new(3830006, 56894187)
        );
        assert_eq!(groups["socsci"].counts, CountPair::new(1327782, 16322539));
        assert_eq!(groups["geophy"].counts, CountPair::new(1534290, 25502842));
        assert!(rel_err(groups["medlife"].indexes.gro, 20921.4030) < 1e-6);
    }

    #[test]
    fn scheme_aggregation_single_group_covers_all_fields() {
        let world = world_table();
        let entity = world_as_entity();
        let all_fields = FieldId::ALL
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join("; ");
        let scheme = ClusterScheme::parse("all", &format!("everything: {all_fields}")).unwrap();
        let groups = aggregate_by_scheme(&entity, &scheme, &world).unwrap();
        // the group aggregate is the field sum, which here equals the
        // totals row because the baseline partitions exactly
        assert_eq!(
            groups["everything"].counts,
            CountPair::new(12669278, 213945356)
        );
    }

    #[test]
    fn scheme_aggregation_absent_group() {
        let world = world_table();
        let entity = EntityMetrics {
            id: EntityId::new("PHY", EntityKind::Institution),
            totals: CountPair::new(10, 100),
            by_field: [(FieldId::Physics, CountPair::new(10, 100))].into(),
        };
        let groups =
            aggregate_by_scheme(&entity, &ClusterScheme::default_scheme(), &world).unwrap();
        assert!(groups.contains_key("geophy"));
        assert!(!groups.contains_key("medlife"));
    }

    #[test]
    fn singleton_scheme_reproduces_field_values() {
        let world = world_table();
        let entity = world_as_entity();
        let text: String = FieldId::ALL
            .iter()
            .enumerate()
            .map(|(i, f)| format!("g{i:02}: {}\n", f.name()))
            .collect();
        let scheme = ClusterScheme::parse("singletons", &text).unwrap();
        let report = build_report(&entity, &world).unwrap();
        let groups = aggregate_by_scheme(&entity, &scheme, &world).unwrap();
        for (i, f) in FieldId::ALL.iter().enumerate() {
            let g = &groups[&format!("g{i:02}")];
            assert!(rel_err(g.indexes.gro, report.by_field[f].gro_r) < 1e-12);
            assert!(rel_err(g.indexes.rro, report.by_field[f].rro_r) < 1e-12);
        }
    }

    #[test]
    fn pca_map_clones_are_degenerate() {
        let world = world_table();
        let clone = world_as_entity();
        let entities: Vec<EntityMetrics> = (0..4)
            .map(|i| {
                let mut e = clone.clone();
                e.id = EntityId::new(format!("C{i:02}"), EntityKind::Country);
                e
            })
            .collect();
        let map = pca_map(&entities, &ClusterScheme::default_scheme(), &world).unwrap();
        assert!(map.degenerate);
        for row in &map.rows {
            assert_eq!(row.quadrant, "none");
            assert!(row.pc1.abs() < 1e-9);
            assert!(row.pc2.abs() < 1e-9);
        }
    }

    #[test]
    fn pca_map_two_blocs_split() {
        let world = world_table();
        let mut entities = Vec::new();
        // bloc A leans on chemistry-type fields, bloc B on physics-type
        for i in 0..6 {
            let heavy = i < 3;
            let mut by_field = BTreeMap::new();
            for &f in FieldId::ALL.iter() {
                let base = world.field_counts(f);
                let scale = 0.001 * (1.0 + 0.05 * i as f64);
                let boost = match (heavy, f) {
                    (
                        true,
                        FieldId::Chemistry | FieldId::MaterialsScience | FieldId::Engineering,
                    ) => 6.0,
                    (false, FieldId::Physics | FieldId::SpaceScience | FieldId::Geosciences) => 6.0,
                    _ => 1.0,
                };
                by_field.insert(
                    f,
                    CountPair::new(
                        ((base.n_docs as f64) * scale * boost).round() as u64,
                        ((base.citations as f64) * scale * boost).round() as u64,
                    ),
                );
            }
            let totals = CountPair::new(
                by_field.values().map(|p| p.n_docs).sum(),
                by_field.values().map(|p| p.citations).sum(),
            );
            entities.push(EntityMetrics {
                id: EntityId::new(format!("B{i:02}"), EntityKind::Country),
                totals,
                by_field,
            });
        }
        let map = pca_map(&entities, &ClusterScheme::default_scheme(), &world).unwrap();
        assert!(!map.degenerate);
        let a_signs: Vec<bool> = map.rows[..3].iter().map(|r| r.pc1 >= 0.0).collect();
        let b_signs: Vec<bool> = map.rows[3..].iter().map(|r| r.pc1 >= 0.0).collect();
        assert!(a_signs.iter().all(|&s| s == a_signs[0]));
        assert!(b_signs.iter().all(|&s| s == b_signs[0]));
        assert_ne!(
            a_signs[0], b_signs[0],
            "blocs must land in opposite half-planes"
        );
    }

    #[test]
    fn pca_map_planted_structure_is_informative() {
        // 55 entities whose per-group scores vary along two planted
        // directions (overall scale and a chem-vs-physics tilt); the
        // first two components must carry at least the 70% flag level
        let world = world_table();
        let mut state = 0xFEED_FACE_CAFE_BEEFu64;
        let mut unit = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut entities = Vec::new();
        for i in 0..55 {
            let scale = 0.0005 + 0.004 * unit();
            let tilt = 8.0 * unit(); // 0 = chemistry bloc, 8 = physics bloc
            let mut by_field = BTreeMap::new();
            for &f in FieldId::ALL.iter() {
                let boost = match f {
                    FieldId::Chemistry | FieldId::MaterialsScience | FieldId::Engineering => {
                        1.0 + (8.0 - tilt)
                    }
                    FieldId::Physics | FieldId::SpaceScience | FieldId::Geosciences => 1.0 + tilt,
                    _ => 1.0 + 0.2 * unit(),
                };
                let w = world.field_counts(f);
                by_field.insert(
                    f,
                    CountPair::new(
                        ((w.n_docs as f64) * scale * boost).round().max(1.0) as u64,
                        ((w.citations as f64) * scale * boost).round() as u64,
                    ),
                );
            }
            let totals = CountPair::new(
                by_field.values().map(|p| p.n_docs).sum(),
                by_field.values().map(|p| p.citations).sum(),
            );
            entities.push(EntityMetrics {
                id: EntityId::new(format!("P{i:02}"), EntityKind::Country),
                totals,
                by_field,
            });
        }
        let map = pca_map(&entities, &ClusterScheme::default_scheme(), &world).unwrap();
        assert_eq!(map.rows.len(), 55);
        assert!(!map.degenerate);
        assert!(
            map.explained_top2 >= EXPLAINED_TOP2_FLAG,
            "explained_top2 {}",
            map.explained_top2
        );
        assert!(map.informative);
    }

    #[test]
    fn pca_map_centering_invariance() {
        let world = world_table();
        let base = |code: &str, tilt: f64| {
            let by_field: BTreeMap<FieldId, CountPair> = FieldId::ALL
                .iter()
                .enumerate()
                .map(|(i, &f)| {
                    let w = world.field_counts(f);
                    let s = 0.001 * (1.0 + tilt * (i as f64 / 21.0 - 0.5));
                    (
                        f,
                        CountPair::new(
                            (w.n_docs as f64 * s).round() as u64,
                            (w.citations as f64 * s).round() as u64,
                        ),
                    )
                })
                .collect();
            let totals = CountPair::new(
                by_field.values().map(|p| p.n_docs).sum(),
                by_field.values().map(|p| p.citations).sum(),
            );
            EntityMetrics {
                id: EntityId::new(code, EntityKind::Country),
                totals,
                by_field,
            }
        };
        let entities = vec![
            base("AAA", 0.9),
            base("BBB", -0.7),
            base("CCC", 0.2),
            base("DDD", -0.1),
        ];
        let scheme = ClusterScheme::default_scheme();
        let map1 = pca_map(&entities, &scheme, &world).unwrap();

        // adding the same per-group profile to every entity only moves
        // the centroid, which centering removes; quadrants are stable
        let mut shifted = entities.clone();
        for e in shifted.iter_mut() {
            for p in e.by_field.values_mut() {
                *p = CountPair::new(p.n_docs + 5000, p.citations + 50_000);
            }
        }
        // recompute so gro shifts equally are NOT exactly equal; this
        // invariance is exact only at the score-matrix level, so check
        // it there directly
        let matrix1: Vec<Vec<f64>> = map1.rows.iter().map(|r| vec![r.pc1, r.pc2]).collect();
        let mut matrix_shifted: Vec<Vec<f64>> = Vec::new();
        for e in &entities {
            let groups = aggregate_by_scheme(e, &scheme, &world).unwrap();
            matrix_shifted.push(
                map1.group_names
                    .iter()
                    .map(|g| groups[g].indexes.gro + 123.0)
                    .collect(),
            );
        }
        let pca_shifted = covariance_pca(&matrix_shifted).unwrap();
        for (i, row) in matrix1.iter().enumerate() {
            assert!((row[0] - pca_shifted.scores[i][0]).abs() < 1e-6);
            assert!((row[1] - pca_shifted.scores[i][1]).abs() < 1e-6);
        }
    }

    fn simple_reports(pairs: &[(&str, u64, u64)]) -> Vec<IndicatorReport> {
        let world = uniform_world();
        let entities: Vec<EntityMetrics> = pairs
            .iter()
            .map(|&(code, n, c)| EntityMetrics {
                id: EntityId::new(code, EntityKind::Country),
                totals: CountPair::new(n, c),
                by_field: [(FieldId::Physics, CountPair::new(n, c))].into(),
            })
            .collect();
        build_reports(&entities, &world).unwrap()
    }

    #[test]
    fn wealth_study_basic_and_exclusions() {
        let reports = simple_reports(&[("AAA", 10, 100), ("BBB", 40, 800), ("CCC", 90, 2700)]);
        let econ: BTreeMap<String, EconRecord> = [
            ("AAA".to_string(), EconRecord::new("AAA", 2.0, 2.0)),
            ("BBB".to_string(), EconRecord::new("BBB", 8.0, 8.0)),
            ("CCC".to_string(), EconRecord::new("CCC", 20.0, 20.0)),
        ]
        .into();
        let study = wealth_study(&reports, &econ, &BTreeSet::new()).unwrap();
        assert_eq!(study.fit.n_points, 3);
        assert_eq!(study.points.len(), 3);
        assert!(study.points.iter().all(|p| !p.excluded));

        // exclude all but two: exact fit
        let exclusions: BTreeSet<String> = ["AAA".to_string()].into();
        let study = wealth_study(&reports, &econ, &exclusions).unwrap();
        assert_eq!(study.fit.n_points, 2);
        assert!((study.fit.r_squared - 1.0).abs() < 1e-12);
        let excluded: Vec<&WealthPoint> = study.points.iter().filter(|p| p.excluded).collect();
        assert_eq!(excluded.len(), 1);
        assert!(!excluded[0].reason.is_empty());
    }

    #[test]
    fn wealth_study_missing_econ_is_an_error() {
        let reports = simple_reports(&[("AAA", 10, 100), ("BBB", 40, 800)]);
        let econ: BTreeMap<String, EconRecord> =
            [("AAA".to_string(), EconRecord::new("AAA", 2.0, 2.0))].into();
        assert!(matches!(
            wealth_study(&reports, &econ, &BTreeSet::new()),
            Err(ReportError::MissingEcon { code }) if code == "BBB"
        ));
    }

    #[test]
    fn wealth_study_zero_index_is_reported_not_fitted() {
        let reports = simple_reports(&[
            ("AAA", 10, 100),
            ("BBB", 40, 800),
            ("CCC", 90, 2700),
            ("ZZZ", 10, 0),
        ]);
        let econ: BTreeMap<String, EconRecord> = ["AAA", "BBB", "CCC", "ZZZ"]
            .iter()
            .enumerate()
            .map(|(i, code)| {
                (
                    code.to_string(),
                    EconRecord::new(*code, (i + 2) as f64, (i + 2) as f64),
                )
            })
            .collect();
        let study = wealth_study(&reports, &econ, &BTreeSet::new()).unwrap();
        assert_eq!(study.fit.n_points, 3);
        let zzz = study.points.iter().find(|p| p.code == "ZZZ").unwrap();
        assert!(zzz.excluded);
        assert!(zzz.ln_gro.is_none());
        assert!(zzz.reason.contains("zero"));
    }

    #[test]
    fn wealth_regression_scale_equivariance() {
        let reports = simple_reports(&[("AAA", 10, 100), ("BBB", 40, 800), ("CCC", 90, 2700)]);
        let econ = |k: f64| -> BTreeMap<String, EconRecord> {
            [("AAA", 2.0), ("BBB", 8.0), ("CCC", 20.0)]
                .iter()
                .map(|&(code, w)| (code.to_string(), EconRecord::new(code, k * w, k * w)))
                .collect()
        };
        let base = wealth_study(&reports, &econ(1.0), &BTreeSet::new()).unwrap();
        let scaled = wealth_study(&reports, &econ(7.0), &BTreeSet::new()).unwrap();
        assert!((base.fit.slope - scaled.fit.slope).abs() < 1e-9);
        assert!((base.fit.r_squared - scaled.fit.r_squared).abs() < 1e-9);
        let expected_intercept = base.fit.intercept - base.fit.slope * 7.0f64.ln();
        assert!((scaled.fit.intercept - expected_intercept).abs() < 1e-9);
    }

    #[test]
    fn comparison_single_entity_hand_values() {
        let corpus = vec![CorpusEntity {
            id: EntityId::new("ONE", EntityKind::Institution),
            citations: vec![10, 8, 5, 4, 3],
        }];
        let cmp = indicator_comparison(&corpus).unwrap();
        let row = &cmp.rows[0];
        assert_eq!(row.n_papers, 5);
        assert_eq!(row.citations, 30);
        assert_eq!(row.h, 4);
        assert!(rel_err(row.gro, (27000.0f64 / 5.0).powf(0.25)) < 1e-12);
        assert!(rel_err(row.p, 5.6462161733) < 1e-9);
        assert!(rel_err(row.cq, row.gro * row.gro) < 1e-12);
        // corpus-wide 90th percentile of [3,4,5,8,10] is the 5th value
        assert_eq!(cmp.top_decile_threshold, 10);
        assert_eq!(row.top_decile, 1);
    }

    #[test]
    fn comparison_identical_entities_have_undefined_correlations() {
        let corpus: Vec<CorpusEntity> = (0..5)
            .map(|i| CorpusEntity {
                id: EntityId::new(format!("E{i}"), EntityKind::Institution),
                citations: vec![4, 4, 4, 4],
            })
            .collect();
        let cmp = indicator_comparison(&corpus).unwrap();
        assert_eq!(cmp.log_correlations[0][1], None);
        assert_eq!(cmp.log_correlations[0][0], Some(1.0));
    }

    #[test]
    fn comparison_rejects_empty_inputs() {
        assert!(matches!(
            indicator_comparison(&[]),
            Err(ReportError::EmptyCorpus)
        ));
        let corpus = vec![CorpusEntity {
            id: EntityId::new("E", EntityKind::Institution),
            citations: vec![],
        }];
        assert!(matches!(
            indicator_comparison(&corpus),
            Err(ReportError::EmptyEntity { .. })
        ));
    }

    #[test]
    fn comparison_excludes_zero_index_entities_from_log_correlations() {
        let mut corpus: Vec<CorpusEntity> = (0..4)
            .map(|i| CorpusEntity {
                id: EntityId::new(format!("E{i}"), EntityKind::Institution),
                citations: vec![3 + i, 2 * i, 7],
            })
            .collect();
        corpus.push(CorpusEntity {
            id: EntityId::new("NIL", EntityKind::Institution),
            citations: vec![0, 0],
        });
        let cmp = indicator_comparison(&corpus).unwrap();
        assert_eq!(cmp.excluded_from_log, vec!["NIL".to_string()]);
        let nil = cmp.rows.iter().find(|r| r.code == "NIL").unwrap();
        assert_eq!(nil.gro, 0.0);
        assert_eq!(nil.h, 0);
    }

    #[test]
    fn comparison_h_bounded_by_counts() {
        let corpus = vec![
            CorpusEntity {
                id: EntityId::new("A", EntityKind::Institution),
                citations: vec![100, 3, 0],
            },
            CorpusEntity {
                id: EntityId::new("B", EntityKind::Institution),
                citations: vec![1],
            },
        ];
        let cmp = indicator_comparison(&corpus).unwrap();
        for row in &cmp.rows {
            assert!(row.h <= row.n_papers);
            assert!(row.h <= row.citations);
        }
    }
}
