//! JSON records written by the command-line front end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::billiard::{BilliardState, BilliardTable, CornerRule, OrbitResult, Outcome};
use crate::carpet::{CarpetParams, PeripheralSquare};
use crate::compat::{SequenceClass, SequenceResult};
use crate::geom::{Point, Rational};
use crate::segment::{Certificate, SegmentClassification};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub params: CarpetParams,
    pub corner_rule: CornerRule,
    pub initial: BilliardState,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub footprint: Vec<Point>,
}

impl OrbitRecord {
    pub fn new(table: &BilliardTable, orbit: &OrbitResult) -> Self {
        OrbitRecord {
            params: table.params,
            corner_rule: table.corner_rule,
            initial: orbit.initial.clone(),
            outcome: orbit.outcome.clone(),
            footprint: orbit.footprint.clone(),
        }
    }

    pub fn orbit(&self) -> OrbitResult {
        OrbitResult { initial: self.initial.clone(), footprint: self.footprint.clone(), outcome: self.outcome.clone() }
    }
}

/// The point (and square) that decided a classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Point,
    pub level: u32,
    pub square: PeripheralSquare,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub params: CarpetParams,
    pub start: Point,
    pub slope: Rational,
    /// `avoids-all`, `hits-corner` or `enters-interior`.
    pub classification: String,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
}

impl ClassifyRecord {
    pub fn new(params: CarpetParams, start: Point, slope: Rational, c: &SegmentClassification) -> Self {
        let (certificate, witness) = match c.clone() {
            SegmentClassification::AvoidsAll { certified } => (Some(certified), None),
            SegmentClassification::HitsCorner { point, level, square } => (None, Some(Witness { point, level, square })),
            SegmentClassification::EntersInterior { level, square, entry_point } => {
                (None, Some(Witness { point: entry_point, level, square }))
            }
        };
        ClassifyRecord { params, start, slope, classification: c.label().to_string(), certificate, witness }
    }

    /// Inverse of [`ClassifyRecord::new`]; `None` for malformed records.
    pub fn classification(&self) -> Option<SegmentClassification> {
        match (self.classification.as_str(), &self.certificate, &self.witness) {
            ("avoids-all", Some(c), None) => Some(SegmentClassification::AvoidsAll { certified: c.clone() }),
            ("hits-corner", None, Some(w)) => {
                Some(SegmentClassification::HitsCorner { point: w.point.clone(), level: w.level, square: w.square.clone() })
            }
            ("enters-interior", None, Some(w)) => Some(SegmentClassification::EntersInterior {
                level: w.level,
                square: w.square.clone(),
                entry_point: w.point.clone(),
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub footprint: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub a: u64,
    pub initial: BilliardState,
    pub levels: (u32, u32),
    pub per_level: Vec<LevelRecord>,
    pub onset: Option<u32>,
    pub classification: SequenceClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trivial_limit: Option<Vec<Point>>,
}

impl SequenceRecord {
    pub fn new(seq: &SequenceResult, initial: &BilliardState) -> Self {
        SequenceRecord {
            a: seq.a,
            initial: initial.clone(),
            levels: seq.levels,
            per_level: seq
                .orbits
                .iter()
                .map(|o| LevelRecord { level: o.level, outcome: o.orbit.outcome.clone(), footprint: o.orbit.footprint.clone() })
                .collect(),
            onset: seq.onset,
            classification: seq.classification,
            trivial_limit: crate::compat::trivial_limit(seq).ok(),
        }
    }
}

/// Description of one CLI run and the files it wrote.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            params: BTreeMap::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}
