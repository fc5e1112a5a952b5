//! Inspection followed by the transformation passes, with a pass log.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::inspect::{
    cholesky_supernodes_counted, coarsen_prune_set, coarsen_row_patterns, col_patterns_counted, etree_counted,
    node_equivalence_supernodes_counted, reach_set_counted, row_patterns_counted, Algorithm, BlockSet,
    EliminationTree, InspectError, InspectionPayload, InspectionSet, ReachSet, RowPatternTable, SetLevel,
    Transformation, Visits,
};
use crate::kir::names::{BLOCK_REACH_SET, BLOCK_ROW_PATTERN, REACH_SET, ROW_PATTERN, SUPERNODES};
use crate::kir::{
    apply_lowlevel, build_cholesky_ir, build_triangular_ir, vi_prune, vs_block, KernelIr, LowLevelContext,
    SetRegistry, Thresholds, TransformError,
};
use crate::matio::{RhsPattern, SparsityPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PassKind {
    VsBlock,
    ViPrune,
    LowLevel,
}

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::VsBlock => "vsblock",
            PassKind::ViPrune => "viprune",
            PassKind::LowLevel => "lowlevel",
        }
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PassKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vsblock" => Ok(PassKind::VsBlock),
            "viprune" => Ok(PassKind::ViPrune),
            "lowlevel" => Ok(PassKind::LowLevel),
            other => Err(PipelineError::UnknownPass(other.to_string())),
        }
    }
}

/// Blocking first, so pruning sees the block loop.
pub const DEFAULT_PASSES: [PassKind; 3] = [PassKind::VsBlock, PassKind::ViPrune, PassKind::LowLevel];

/// Parses a comma-separated pass list such as `vsblock,viprune`.
pub fn parse_passes(s: &str) -> Result<Vec<PassKind>, PipelineError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown pass '{0}'")]
    UnknownPass(String),
    #[error(transparent)]
    Inspect(#[from] InspectError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub thresholds: Thresholds,
    pub passes: Vec<PassKind>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            passes: DEFAULT_PASSES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PipelineInput<'a> {
    /// `l` is the pattern of the triangular factor.
    Triangular { l: &'a SparsityPattern, rhs: &'a RhsPattern },
    /// `a` is the lower triangle of a symmetric matrix.
    Cholesky { a: &'a SparsityPattern },
}

impl PipelineInput<'_> {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            PipelineInput::Triangular { .. } => Algorithm::TriangularSolve,
            PipelineInput::Cholesky { .. } => Algorithm::Cholesky,
        }
    }
}

/// Everything the symbolic inspectors found.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InspectionReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub nnz: usize,
    /// Elimination tree; Cholesky only.
    pub parent: Option<Vec<Option<usize>>>,
    /// Reach-set of the right-hand side; solve only.
    pub prune_set: Option<ReachSet>,
    /// Row patterns of `L`; Cholesky only.
    pub row_patterns: Option<RowPatternTable>,
    pub block_set: BlockSet,
    pub average_supernode_width: f64,
    /// Stored entries per column of `L`.
    pub column_counts: Vec<usize>,
    pub l_nnz: usize,
    /// Visit counters per inspector.
    pub visits: BTreeMap<String, u64>,
    #[serde(skip)]
    pub lpat: SparsityPattern,
    #[serde(skip)]
    pub tree: Option<EliminationTree>,
}

/// Runs every inspector the algorithm needs.
pub fn inspect_all(input: PipelineInput<'_>) -> Result<InspectionReport, PipelineError> {
    let mut visits = BTreeMap::new();
    let mut count = |name: &str, v: Visits| {
        visits.insert(name.to_string(), v.0);
    };
    match input {
        PipelineInput::Triangular { l, rhs } => {
            let mut v = Visits::default();
            let reach = reach_set_counted(l, rhs, &mut v)?;
            count("reach_set", v);
            let mut v = Visits::default();
            let blocks = node_equivalence_supernodes_counted(l, &mut v);
            count("node_equivalence_supernodes", v);
            Ok(InspectionReport {
                algorithm: Algorithm::TriangularSolve,
                n: l.n(),
                nnz: l.nnz(),
                parent: None,
                prune_set: Some(reach),
                row_patterns: None,
                average_supernode_width: blocks.average_supernode_width(),
                block_set: blocks,
                column_counts: (0..l.n()).map(|j| l.col_count(j)).collect(),
                l_nnz: l.nnz(),
                visits,
                lpat: l.clone(),
                tree: None,
            })
        }
        PipelineInput::Cholesky { a } => {
            let mut v = Visits::default();
            let t = etree_counted(a, &mut v)?;
            count("etree", v);
            let mut v = Visits::default();
            let rows = row_patterns_counted(a, &t, &mut v)?;
            count("row_patterns", v);
            let mut v = Visits::default();
            let lpat = col_patterns_counted(a, &t, &mut v)?;
            count("col_patterns", v);
            let mut v = Visits::default();
            let blocks = cholesky_supernodes_counted(&lpat, &t, &mut v)?;
            count("cholesky_supernodes", v);
            Ok(InspectionReport {
                algorithm: Algorithm::Cholesky,
                n: a.n(),
                nnz: a.nnz(),
                parent: Some(t.parent().to_vec()),
                prune_set: None,
                row_patterns: Some(rows),
                average_supernode_width: blocks.average_supernode_width(),
                block_set: blocks,
                column_counts: (0..lpat.n()).map(|j| lpat.col_count(j)).collect(),
                l_nnz: lpat.nnz(),
                visits,
                lpat,
                tree: Some(t),
            })
        }
    }
}

/// A transformed kernel with the sets it refers to.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub ir: KernelIr,
    pub sets: SetRegistry,
    /// One `PASS ...` line per requested pass.
    pub log: Vec<String>,
    pub report: InspectionReport,
}

impl Schedule {
    /// Pattern of `L`: the input pattern for solves, the filled pattern for
    /// Cholesky.
    pub fn lpat(&self) -> &SparsityPattern {
        &self.report.lpat
    }

    /// Whether the log records `pass` as applied.
    pub fn applied(&self, pass: PassKind) -> bool {
        let prefix = format!("PASS {} ", pass.name());
        self.log.iter().any(|l| l.starts_with(&prefix) && l.ends_with("result=applied"))
    }
}

fn column_set(alg: Algorithm, tr: Transformation, payload: InspectionPayload) -> Result<InspectionSet, InspectError> {
    InspectionSet::new(alg, tr, SetLevel::Column, payload)
}

fn block_set(alg: Algorithm, payload: InspectionPayload) -> Result<InspectionSet, InspectError> {
    InspectionSet::new(alg, Transformation::ViPrune, SetLevel::Block, payload)
}

/// Inspects, builds the base IR and runs `config.passes` in order.
///
/// VS-Block is skipped when the average supernode width is below
/// `thresholds.min_avg_supernode`. A pass with nothing to work on is
/// skipped and logged, never an error.
pub fn build_schedule(input: PipelineInput<'_>, config: &PipelineConfig) -> Result<Schedule, PipelineError> {
    transform(inspect_all(input)?, config)
}

/// The transformation half of [`build_schedule`], for a finished report.
pub fn transform(report: InspectionReport, config: &PipelineConfig) -> Result<Schedule, PipelineError> {
    let alg = report.algorithm;
    let n = report.n;
    let mut sets = SetRegistry::new();
    let mut ir = match alg {
        Algorithm::TriangularSolve => {
            let reach = report.prune_set.clone().expect("solve report has a prune set");
            sets.insert(
                REACH_SET.into(),
                column_set(alg, Transformation::ViPrune, InspectionPayload::PruneSet(reach))?,
            );
            build_triangular_ir(n)
        }
        Algorithm::Cholesky => {
            let rows = report.row_patterns.clone().expect("Cholesky report has row patterns");
            sets.insert(
                ROW_PATTERN.into(),
                column_set(alg, Transformation::ViPrune, InspectionPayload::RowPatterns(rows))?,
            );
            build_cholesky_ir(n)
        }
    };
    sets.insert(
        SUPERNODES.into(),
        column_set(alg, Transformation::VsBlock, InspectionPayload::BlockSet(report.block_set.clone()))?,
    );

    let mut log = Vec::new();
    for &pass in &config.passes {
        let line = |path: &str, set: &str, result: &str| format!("PASS {pass} loop={path} set={set} result={result}");
        match pass {
            PassKind::VsBlock => {
                let Some(path) = ir.find_blockable() else {
                    log.push(line("-", SUPERNODES, "skipped:no-blockable-loop"));
                    continue;
                };
                let name = ir.loop_at(&path).and_then(|l| l.blockable()).unwrap_or(SUPERNODES).to_string();
                let avg = report.block_set.average_supernode_width();
                let min = config.thresholds.min_avg_supernode;
                if avg < min as f64 {
                    log.push(line(
                        &path.to_string(),
                        &name,
                        &format!("skipped:avg-supernode-width={avg:.2}<{min}"),
                    ));
                    continue;
                }
                ir = vs_block(&ir, &path, &sets[&name])?;
                match alg {
                    Algorithm::TriangularSolve => {
                        let coarse = coarsen_prune_set(sets[REACH_SET].as_prune_set().unwrap(), &report.block_set);
                        sets.insert(BLOCK_REACH_SET.into(), block_set(alg, InspectionPayload::PruneSet(coarse))?);
                    }
                    Algorithm::Cholesky => {
                        let coarse = coarsen_row_patterns(sets[ROW_PATTERN].as_row_patterns().unwrap(), &report.block_set);
                        sets.insert(BLOCK_ROW_PATTERN.into(), block_set(alg, InspectionPayload::RowPatterns(coarse))?);
                    }
                }
                log.push(line(&path.to_string(), &name, "applied"));
            }
            PassKind::ViPrune => {
                let Some(path) = ir.find_prunable() else {
                    log.push(line("-", "-", "skipped:no-prunable-loop"));
                    continue;
                };
                let name = ir.loop_at(&path).and_then(|l| l.prunable()).map(|p| p.0.to_string()).unwrap_or_default();
                let Some(set) = sets.get(&name) else {
                    log.push(line(&path.to_string(), &name, "skipped:set-unavailable"));
                    continue;
                };
                ir = vi_prune(&ir, &path, set)?;
                log.push(line(&path.to_string(), &name, "applied"));
            }
            PassKind::LowLevel => {
                let ctx = LowLevelContext {
                    sets: &sets,
                    pattern: &report.lpat,
                };
                ir = apply_lowlevel(&ir, &config.thresholds, &ctx)?;
                log.push(line("*", "*", "applied"));
            }
        }
    }
    Ok(Schedule { ir, sets, log, report })
}
