//! One function per subcommand. Every command reads its inputs, runs
//! the corresponding analysis and writes CSV output plus a JSON run
//! summary into the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use grometrics::synth::{citation_corpus, world_proportional_sample, CorpusParams, SampleParams};
use grometrics::{
    apply_threshold, build_report, build_reports, hcluster, indicator_comparison, linearity_study,
    parse_econ, parse_entity_metrics, parse_exclusions, parse_world_baseline, pca_map,
    wealth_study, ClusterScheme, CorpusEntity, EntityId, EntityKind, EntityMetrics, FieldId,
    IndicatorReport, RegressionResult, WorldBaseline,
};

use crate::config::RunConfig;
use crate::output::{csv_text, fmt4, fmt4_opt, write_output, write_summary};
use crate::CliError;

fn required<'a>(
    path: &'a Option<PathBuf>,
    flag: &str,
    command: &str,
) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::usage(format!("--{flag} is required for `{command}`")))
}

fn load_world(config: &RunConfig, command: &str) -> Result<WorldBaseline, CliError> {
    Ok(parse_world_baseline(required(
        &config.world,
        "world",
        command,
    )?)?)
}

/// Parses entities, prints validation warnings, applies the exclusion
/// file (redundant entities dropped) and the document threshold.
/// Returns the analysed set and the codes excluded at each step.
struct LoadedEntities {
    analysed: Vec<EntityMetrics>,
    dropped_by_exclusion: Vec<String>,
    below_threshold: Vec<String>,
}

/// For most commands the exclusion file removes redundant entities
/// from the dataset; `wealth` instead keeps them and only leaves them
/// out of the fit, so it loads with `drop_excluded = false`.
fn load_entities(
    config: &RunConfig,
    command: &str,
    drop_excluded: bool,
) -> Result<LoadedEntities, CliError> {
    let parsed = parse_entity_metrics(required(&config.entities, "entities", command)?)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    let exclusions = match (&config.exclude, drop_excluded) {
        (Some(path), true) => parse_exclusions(path)?,
        _ => BTreeSet::new(),
    };
    let (kept, dropped): (Vec<EntityMetrics>, Vec<EntityMetrics>) = parsed
        .entities
        .into_iter()
        .partition(|e| !exclusions.contains(&e.id.code));
    let (analysed, below) = apply_threshold(kept, config.min_docs);
    Ok(LoadedEntities {
        analysed,
        dropped_by_exclusion: dropped.into_iter().map(|e| e.id.code).collect(),
        below_threshold: below.into_iter().map(|e| e.id.code).collect(),
    })
}

fn load_scheme(config: &RunConfig) -> Result<ClusterScheme, CliError> {
    match &config.scheme {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scheme".to_string());
            ClusterScheme::parse(name, &text)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
        }
        None => Ok(ClusterScheme::default_scheme()),
    }
}

fn fit_json(fit: &RegressionResult) -> serde_json::Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
    })
}

/// `index`: ranked table of whole-entity indexes.
pub fn cmd_index(config: &RunConfig) -> Result<(), CliError> {
    let world = load_world(config, "index")?;
    let loaded = load_entities(config, "index", true)?;
    if loaded.analysed.is_empty() {
        return Err(CliError::analysis(
            "no entities above the document threshold".to_string(),
        ));
    }
    let reports = build_reports(&loaded.analysed, &world)?;

    let totals: BTreeMap<&str, &EntityMetrics> = loaded
        .analysed
        .iter()
        .map(|e| (e.id.code.as_str(), e))
        .collect();
    let mut ordered: Vec<&IndicatorReport> = reports.iter().collect();
    ordered.sort_by(|a, b| {
        a.gro_rank
            .cmp(&b.gro_rank)
            .then_with(|| a.id.code.cmp(&b.id.code))
    });
    let rows: Vec<Vec<String>> = ordered
        .iter()
        .map(|r| {
            let entity = totals[r.id.code.as_str()];
            vec![
                r.gro_rank.to_string(),
                r.id.code.clone(),
                fmt4(r.indexes.gro),
                fmt4(r.indexes.rro),
                entity.totals.n_docs.to_string(),
                entity.totals.citations.to_string(),
                fmt4(r.indexes.quality_q),
            ]
        })
        .collect();
    let csv = csv_text(
        &["rank", "entity", "gro", "rro", "n_docs", "citations", "q"],
        &rows,
    )?;
    write_output(&config.out, "rankings.csv", &csv)?;

    let mut summary = json!({
        "command": "index",
        "min_docs": config.min_docs,
        "entities": {
            "analysed": reports.len(),
            "below_threshold": loaded.below_threshold,
            "dropped_by_exclusion": loaded.dropped_by_exclusion,
        },
        "world": {
            "n_docs": world.totals.n_docs,
            "citations": world.totals.citations,
            "quality": world.quality(),
        },
        "top_entity": ordered.first().map(|r| r.id.code.clone()),
    });
    if !config.bands.is_empty() {
        let mut bands = Vec::new();
        let mut upper = f64::INFINITY;
        for &threshold in &config.bands {
            let count = ordered
                .iter()
                .filter(|r| r.indexes.gro > threshold && r.indexes.gro <= upper)
                .count();
            bands.push(json!({"above": threshold, "count": count}));
            upper = threshold;
        }
        let tail = ordered.iter().filter(|r| r.indexes.gro <= upper).count();
        bands.push(json!({"above": 0.0, "count": tail}));
        summary["bands"] = json!(bands);
    }
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// `profile`: per-field indexes and shares for one entity.
pub fn cmd_profile(config: &RunConfig, code: &str) -> Result<(), CliError> {
    let world = load_world(config, "profile")?;
    let parsed = parse_entity_metrics(required(&config.entities, "entities", "profile")?)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    let entity = parsed
        .entities
        .iter()
        .find(|e| e.id.code == code)
        .ok_or_else(|| CliError::analysis(format!("entity not found: {code}")))?;
    let report = build_report(entity, &world)?;

    let rows: Vec<Vec<String>> = report
        .by_field
        .iter()
        .map(|(field, fi)| {
            vec![
                report.id.code.clone(),
                field.name().to_string(),
                fmt4(fi.gro_r),
                fmt4(fi.rro_r),
                fmt4(report.shares.get(field).copied().unwrap_or(0.0)),
            ]
        })
        .collect();
    let csv = csv_text(&["entity", "field", "gro_r", "rro_r", "share"], &rows)?;
    write_output(&config.out, "profile.csv", &csv)?;

    let summary = json!({
        "command": "profile",
        "entity": report.id.code,
        "kind": report.id.kind.name(),
        "indexes": {
            "quantity_q": report.indexes.quantity_q,
            "quality_q": report.indexes.quality_q,
            "gro": report.indexes.gro,
            "rro": report.indexes.rro,
            "p_index": report.indexes.p_index,
            "cq": report.indexes.cq,
        },
        "fields_present": report.by_field.len(),
        "sum_gro_r": report.sum_gro_r,
        "sum_rro_r": report.sum_rro_r,
        "sgr": report.sgr,
        "top2": report.top2,
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// `wealth`: regression of log index on log wealth.
pub fn cmd_wealth(config: &RunConfig) -> Result<(), CliError> {
    let world = load_world(config, "wealth")?;
    let loaded = load_entities(config, "wealth", false)?;
    let econ = parse_econ(required(&config.econ, "econ", "wealth")?)?;
    let reports = build_reports(&loaded.analysed, &world)?;
    let exclusions = match &config.exclude {
        Some(path) => parse_exclusions(path)?,
        None => BTreeSet::new(),
    };
    let study = wealth_study(&reports, &econ, &exclusions)?;

    let rows: Vec<Vec<String>> = study
        .points
        .iter()
        .map(|p| {
            vec![
                p.code.clone(),
                fmt4_opt(p.ln_wth),
                fmt4_opt(p.ln_gro),
                p.excluded.to_string(),
                p.reason.clone(),
            ]
        })
        .collect();
    let csv = csv_text(&["entity", "ln_wth", "ln_gro", "excluded", "reason"], &rows)?;
    write_output(&config.out, "wealth.csv", &csv)?;

    let excluded: Vec<&str> = study
        .points
        .iter()
        .filter(|p| p.excluded)
        .map(|p| p.code.as_str())
        .collect();
    let summary = json!({
        "command": "wealth",
        "fit": fit_json(&study.fit),
        "excluded": excluded,
        "points": study.points.len(),
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// `pca`: entity scores on the first two principal components of the
/// per-group index matrix.
pub fn cmd_pca(config: &RunConfig) -> Result<(), CliError> {
    let world = load_world(config, "pca")?;
    let loaded = load_entities(config, "pca", true)?;
    let scheme = load_scheme(config)?;
    let map = pca_map(&loaded.analysed, &scheme, &world)?;

    let rows: Vec<Vec<String>> = map
        .rows
        .iter()
        .map(|r| vec![r.code.clone(), fmt4(r.pc1), fmt4(r.pc2), r.quadrant.clone()])
        .collect();
    let csv = csv_text(&["entity", "pc1", "pc2", "quadrant"], &rows)?;
    write_output(&config.out, "pca_scores.csv", &csv)?;

    let loadings: BTreeMap<String, Vec<f64>> = map
        .pca
        .components
        .iter()
        .enumerate()
        .take(2)
        .map(|(i, comp)| (format!("pc{}", i + 1), comp.clone()))
        .collect();
    let summary = json!({
        "command": "pca",
        "scheme": scheme.name,
        "groups": map.group_names,
        "eigenvalues": map.pca.eigenvalues,
        "explained_fraction": map.pca.explained_fraction,
        "explained_top2": map.explained_top2,
        "informative": map.informative,
        "degenerate": map.degenerate,
        "loadings": loadings,
        "entities": map.rows.len(),
        "skipped_incomplete_coverage": map.skipped,
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// `cluster`: hierarchical clustering of the research fields over the
/// entities' field scores.
pub fn cmd_cluster(config: &RunConfig) -> Result<(), CliError> {
    let world = load_world(config, "cluster")?;
    let loaded = load_entities(config, "cluster", true)?;
    if loaded.analysed.is_empty() {
        return Err(CliError::analysis(
            "no entities above the document threshold".to_string(),
        ));
    }
    let scheme = load_scheme(config)?;
    let reports = build_reports(&loaded.analysed, &world)?;

    // items: the 22 fields; features: each entity's score in the field
    // (0 when the entity is absent from it)
    let profiles: Vec<Vec<f64>> = FieldId::ALL
        .iter()
        .map(|field| {
            reports
                .iter()
                .map(|r| r.by_field.get(field).map(|fi| fi.gro_r).unwrap_or(0.0))
                .collect()
        })
        .collect();
    let dendrogram = hcluster(&profiles, config.linkage, config.distance)?;
    let k = scheme.groups.len().clamp(1, FieldId::COUNT);
    let cut = dendrogram.cut(k)?;

    let mut text = String::new();
    text.push_str(&format!(
        "linkage: {:?}\ndistance: {:?}\nitems: {}\n\nmerges:\n",
        config.linkage,
        config.distance,
        FieldId::COUNT
    ));
    for (i, merge) in dendrogram.merges.iter().enumerate() {
        text.push_str(&format!(
            "{:>3}: {:>3} + {:>3} -> {:>3}  height {}\n",
            i,
            merge.a,
            merge.b,
            FieldId::COUNT + i,
            fmt4(merge.height)
        ));
    }
    text.push_str(&format!("\ncut at k = {k}:\n"));
    let mut clusters: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, &label) in cut.iter().enumerate() {
        clusters
            .entry(label)
            .or_default()
            .push(FieldId::ALL[i].name());
    }
    for (label, fields) in &clusters {
        text.push_str(&format!("cluster {label}: {}\n", fields.join("; ")));
    }
    write_output(&config.out, "dendrogram.txt", &text)?;

    let assignments: BTreeMap<&str, usize> = cut
        .iter()
        .enumerate()
        .map(|(i, &label)| (FieldId::ALL[i].name(), label))
        .collect();
    let merges: Vec<serde_json::Value> = dendrogram
        .merges
        .iter()
        .map(|m| json!({"a": m.a, "b": m.b, "height": m.height}))
        .collect();
    let summary = json!({
        "command": "cluster",
        "linkage": format!("{:?}", config.linkage).to_lowercase(),
        "distance": match config.distance {
            grometrics::Distance::Euclidean => "euclidean",
            grometrics::Distance::OneMinusPearson => "one_minus_pearson",
        },
        "k": k,
        "entities": reports.len(),
        "assignments": assignments,
        "merges": merges,
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// Reads a citation corpus file: header `entity,cites`, one row per
/// paper.
fn parse_corpus(path: &Path) -> Result<Vec<CorpusEntity>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let found = headers.iter().collect::<Vec<_>>().join(",");
        if found != "entity,cites" {
            return Err(CliError::parse(format!(
                "{}:1: expected header `entity,cites`, found `{found}`",
                path.display()
            )));
        }
    }
    let mut grouped: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let code = record.get(0).unwrap_or("").trim();
        if code.is_empty() {
            return Err(CliError::parse(format!(
                "{}:{line}: empty entity code",
                path.display()
            )));
        }
        let cites_raw = record.get(1).unwrap_or("").trim();
        let cites: u64 = cites_raw.parse().map_err(|_| {
            CliError::parse(format!(
                "{}:{line}: cites must be a nonnegative integer, got `{cites_raw}`",
                path.display()
            ))
        })?;
        grouped.entry(code.to_string()).or_default().push(cites);
    }
    if grouped.is_empty() {
        return Err(CliError::parse(format!("{}: no entities", path.display())));
    }
    Ok(grouped
        .into_iter()
        .map(|(code, citations)| CorpusEntity {
            id: EntityId::new(code, EntityKind::Institution),
            citations,
        })
        .collect())
}

/// `compare`: the whole-entity indicators side by side over a paper
/// corpus, with log-correlations.
pub fn cmd_compare(config: &RunConfig) -> Result<(), CliError> {
    let (corpus, source) = match &config.corpus {
        Some(path) => (
            parse_corpus(path)?,
            json!({"file": path.display().to_string()}),
        ),
        None => (
            citation_corpus(&CorpusParams::default(), config.seed),
            json!({"synthetic": {"entities": 200, "seed": config.seed}}),
        ),
    };
    let cmp = indicator_comparison(&corpus)?;

    let rows: Vec<Vec<String>> = cmp
        .rows
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                r.n_papers.to_string(),
                r.citations.to_string(),
                fmt4(r.gro),
                r.h.to_string(),
                fmt4(r.p),
                fmt4(r.cq),
                r.top_decile.to_string(),
            ]
        })
        .collect();
    let csv = csv_text(
        &["entity", "n", "c", "gro", "h", "p", "cq", "top_decile"],
        &rows,
    )?;
    write_output(&config.out, "comparison.csv", &csv)?;

    let mut correlations = serde_json::Map::new();
    for (i, a) in cmp.indicator_names.iter().enumerate() {
        for (j, b) in cmp.indicator_names.iter().enumerate() {
            if j <= i {
                continue;
            }
            let key = format!("ln_{a}__ln_{b}");
            correlations.insert(key, json!(cmp.log_correlations[i][j]));
        }
    }
    let summary = json!({
        "command": "compare",
        "source": source,
        "entities": cmp.rows.len(),
        "top_decile_threshold": cmp.top_decile_threshold,
        "log_correlations": correlations,
        "excluded_from_log": cmp.excluded_from_log,
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}

/// `linearity`: whole-entity index against the sum of its per-field
/// scores, for real or synthetic entities.
pub fn cmd_linearity(config: &RunConfig) -> Result<(), CliError> {
    let world = load_world(config, "linearity")?;
    let (entities, source) = match &config.entities {
        Some(_) => {
            let loaded = load_entities(config, "linearity", true)?;
            (loaded.analysed, json!({"file": true}))
        }
        None => (
            world_proportional_sample(&world, &SampleParams::default(), config.seed),
            json!({"synthetic": {"entities": 189, "jitter": 0.2, "seed": config.seed}}),
        ),
    };
    let reports = build_reports(&entities, &world)?;
    let study = linearity_study(&reports)?;

    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.id.code.clone(),
                fmt4(r.sum_gro_r),
                fmt4(r.indexes.gro),
                fmt4(r.sum_rro_r),
                fmt4(r.indexes.rro),
            ]
        })
        .collect();
    let csv = csv_text(&["entity", "sum_gro_r", "gro", "sum_rro_r", "rro"], &rows)?;
    write_output(&config.out, "linearity.csv", &csv)?;

    let summary = json!({
        "command": "linearity",
        "source": source,
        "entities": reports.len(),
        "gro_fit": fit_json(&study.gro_fit),
        "rro_fit": fit_json(&study.rro_fit),
    });
    write_summary(&config.out, &summary)?;
    Ok(())
}
