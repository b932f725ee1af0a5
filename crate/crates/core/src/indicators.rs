//! Closed-form research-output indexes over document/citation counts.
//!
//! The central quantity is the GRO index, the geometric mean of a
//! size-dependent quantity `Q = sqrt(N*C)` and a scale-free quality
//! `q = C/N`, which collapses to `(C^3/N)^(1/4)`. Companion indexes
//! (RRO, p, CQ, h) and per-field variants live here too.
//!
//! Fractional powers are evaluated in the log domain,
//! `exp((3*ln C - ln N)/4)`, because `C^3` overflows 64-bit integers
//! for world-scale citation counts.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fields::FieldId;

/// Errors from index computations.
#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("geometric mean requires nonnegative inputs, got ({0}, {1})")]
    NegativeInput(f64, f64),
    #[error("index undefined for an entity with zero documents")]
    ZeroDocs,
    #[error("world quality must be positive, got {0}")]
    NonPositiveWorldQuality(f64),
    #[error("world counts must be positive (n_docs {n_docs}, citations {citations})")]
    ZeroWorldCounts { n_docs: u64, citations: u64 },
    #[error("citation count at position {index} is negative ({value})")]
    NegativeCitations { index: usize, value: i64 },
    #[error("cannot aggregate an empty list of count pairs")]
    EmptyAggregate,
    #[error("count overflow while aggregating")]
    CountOverflow,
    #[error("specialization requires at least one strictly positive field value")]
    NoPositiveShares,
}

/// Document and citation counts for one entity or one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CountPair {
    /// Number of articles and reviews.
    pub n_docs: u64,
    /// Total citations accrued by those documents.
    pub citations: u64,
}

impl CountPair {
    pub fn new(n_docs: u64, citations: u64) -> Self {
        Self { n_docs, citations }
    }

    /// Citations per document, `q = C/N`.
    pub fn quality(self) -> Result<f64, IndexError> {
        if self.n_docs == 0 {
            return Err(IndexError::ZeroDocs);
        }
        Ok(self.citations as f64 / self.n_docs as f64)
    }
}

/// The full set of whole-entity indexes computed from one count pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValues {
    /// Quantity `Q = sqrt(N*C)`.
    pub quantity_q: f64,
    /// Quality `q = C/N`.
    pub quality_q: f64,
    /// `(C^3/N)^(1/4)`, geometric mean of Q and q.
    pub gro: f64,
    /// GRO with quality replaced by the world-relative ratio `q/q_w`;
    /// algebraically `gro / sqrt(q_w)`.
    pub rro: f64,
    /// `(C^2/N)^(1/3)`.
    pub p_index: f64,
    /// `(C^3/N)^(1/2)`; equals `gro^2`.
    pub cq: f64,
}

impl IndexValues {
    /// Computes every index for `pair`, using `world_quality` (the
    /// all-fields world `C/N`) for the relative index.
    pub fn compute(pair: CountPair, world_quality: f64) -> Result<Self, IndexError> {
        Ok(Self {
            quantity_q: quantity(pair)?,
            quality_q: pair.quality()?,
            gro: gro(pair)?,
            rro: rro(pair, world_quality)?,
            p_index: p_index(pair)?,
            cq: cq_index(pair)?,
        })
    }
}

/// Per-field indexes for one entity, relative to the world counts of
/// the same field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldIndexValues {
    pub field: FieldId,
    /// `(C^3/N)^(1/4)` on the entity's field counts.
    pub gro_r: f64,
    /// Geometric mean of the field quantity and `relative_quality`.
    pub rro_r: f64,
    /// Entity field quality divided by world field quality.
    pub relative_quality: f64,
}

/// Specialization of an entity across its field scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Specialization {
    /// Largest share of one field in the sum of field scores.
    pub sgr: f64,
    /// Sum of the two largest shares (equals `sgr` with one field).
    pub top2: f64,
}

/// Geometric mean of two nonnegative reals.
pub fn geometric_mean(a: f64, b: f64) -> Result<f64, IndexError> {
    if a < 0.0 || b < 0.0 {
        return Err(IndexError::NegativeInput(a, b));
    }
    Ok((a * b).sqrt())
}

/// Quantity index `Q = sqrt(N*C)`.
pub fn quantity(pair: CountPair) -> Result<f64, IndexError> {
    geometric_mean(pair.n_docs as f64, pair.citations as f64)
}

/// GRO index `(C^3/N)^(1/4)`.
///
/// Zero citations is a valid uncited corpus and yields 0; zero
/// documents leaves the underlying ratio undefined and is an error.
pub fn gro(pair: CountPair) -> Result<f64, IndexError> {
    if pair.n_docs == 0 {
        return Err(IndexError::ZeroDocs);
    }
    if pair.citations == 0 {
        return Ok(0.0);
    }
    let ln_n = (pair.n_docs as f64).ln();
    let ln_c = (pair.citations as f64).ln();
    Ok(((3.0 * ln_c - ln_n) / 4.0).exp())
}

/// RRO index: the geometric mean of the quantity `Q` and the
/// world-relative quality `q / world_quality`.
///
/// Equal, up to rounding, to `gro(pair) / sqrt(world_quality)`.
pub fn rro(pair: CountPair, world_quality: f64) -> Result<f64, IndexError> {
    if world_quality <= 0.0 || !world_quality.is_finite() {
        return Err(IndexError::NonPositiveWorldQuality(world_quality));
    }
    let q = quantity(pair)?;
    let relative = pair.quality()? / world_quality;
    geometric_mean(q, relative)
}

/// p index `(C^2/N)^(1/3)`.
pub fn p_index(pair: CountPair) -> Result<f64, IndexError> {
    if pair.n_docs == 0 {
        return Err(IndexError::ZeroDocs);
    }
    if pair.citations == 0 {
        return Ok(0.0);
    }
    let ln_n = (pair.n_docs as f64).ln();
    let ln_c = (pair.citations as f64).ln();
    Ok(((2.0 * ln_c - ln_n) / 3.0).exp())
}

/// CQ index `(C^3/N)^(1/2)`, the square of the GRO index.
pub fn cq_index(pair: CountPair) -> Result<f64, IndexError> {
    if pair.n_docs == 0 {
        return Err(IndexError::ZeroDocs);
    }
    if pair.citations == 0 {
        return Ok(0.0);
    }
    let ln_n = (pair.n_docs as f64).ln();
    let ln_c = (pair.citations as f64).ln();
    Ok(((3.0 * ln_c - ln_n) / 2.0).exp())
}

/// h index: the largest `h` such that at least `h` entries are `>= h`.
///
/// The input order is never significant; a defensive copy is sorted.
pub fn h_index(citations_per_paper: &[i64]) -> Result<u64, IndexError> {
    for (index, &value) in citations_per_paper.iter().enumerate() {
        if value < 0 {
            return Err(IndexError::NegativeCitations { index, value });
        }
    }
    let mut sorted: Vec<i64> = citations_per_paper.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0u64;
    for (i, &c) in sorted.iter().enumerate() {
        if c >= (i + 1) as i64 {
            h = (i + 1) as u64;
        } else {
            break;
        }
    }
    Ok(h)
}

/// Specialization over per-field scores: the maximum share and the sum
/// of the two largest shares of the total.
pub fn specialization(field_scores: &BTreeMap<FieldId, f64>) -> Result<Specialization, IndexError> {
    let total: f64 = field_scores.values().sum();
    if field_scores.is_empty() || total <= 0.0 || !total.is_finite() {
        return Err(IndexError::NoPositiveShares);
    }
    let mut largest = 0.0f64;
    let mut second = 0.0f64;
    for &v in field_scores.values() {
        if v > largest {
            second = largest;
            largest = v;
        } else if v > second {
            second = v;
        }
    }
    let sgr = largest / total;
    let top2 = if field_scores.len() == 1 {
        sgr
    } else {
        (largest + second) / total
    };
    Ok(Specialization { sgr, top2 })
}

/// Component-wise sum of count pairs; group indexes are computed on the
/// sums.
pub fn aggregate(pairs: &[CountPair]) -> Result<CountPair, IndexError> {
    if pairs.is_empty() {
        return Err(IndexError::EmptyAggregate);
    }
    let mut n: u64 = 0;
    let mut c: u64 = 0;
    for p in pairs {
        n = n.checked_add(p.n_docs).ok_or(IndexError::CountOverflow)?;
        c = c
            .checked_add(p.citations)
            .ok_or(IndexError::CountOverflow)?;
    }
    Ok(CountPair::new(n, c))
}

/// Per-field indexes for an entity's field counts against the world
/// counts of the same field.
///
/// A field for which the entity has no documents must be treated as
/// absent by callers, not passed here as zeros.
pub fn field_indexes(
    pair: CountPair,
    world_pair: CountPair,
    field: FieldId,
) -> Result<FieldIndexValues, IndexError> {
    if world_pair.n_docs == 0 || world_pair.citations == 0 {
        return Err(IndexError::ZeroWorldCounts {
            n_docs: world_pair.n_docs,
            citations: world_pair.citations,
        });
    }
    if pair.n_docs == 0 {
        return Err(IndexError::ZeroDocs);
    }
    let world_quality = world_pair.quality()?;
    let relative_quality = pair.quality()? / world_quality;
    let rro_r = geometric_mean(quantity(pair)?, relative_quality)?;
    Ok(FieldIndexValues {
        field,
        gro_r: gro(pair)?,
        rro_r,
        relative_quality,
    })
}
