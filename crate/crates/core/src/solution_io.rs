//! Solution files: trips, bus blocks and metrics as JSON.
//!
//! Runtime is left out so that the same run always writes the same bytes.
//! Loading keeps recorded loads, travel times and deadheads as written, so
//! [`crate::decomposition::verify_solution`] can catch a tampered file.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::decomposition::{Metrics, Method, Solution, UtcState};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::routing::SolveStatus;
use crate::scheduling::{BusBlock, Link, Schedule};
use crate::trips::{RoutingPlan, Trip};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub method: String,
    pub blocks: Vec<BlockRecord>,
    pub nob: usize,
    pub total_deadhead_s: i64,
    pub trips: Vec<TripRecord>,
    pub metrics: MetricsRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub school_status: Vec<StatusRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utc: Option<Vec<UtcRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockRecord {
    pub trips: Vec<String>,
    pub pull_out_s: i64,
    pub links: Vec<LinkRecord>,
    pub pull_in_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub from: String,
    pub to: String,
    pub dd_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripRecord {
    pub id: String,
    pub school: String,
    pub stops: Vec<String>,
    pub load: u32,
    pub travel_time_s: i64,
    /// School this trip was assigned to during routing, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRecord {
    pub nob: usize,
    pub not: usize,
    pub tvt_s: i64,
    pub tvt_minutes: i64,
    pub trip_travel_time_s: i64,
    pub internal_deadhead_s: i64,
    pub depot_deadhead_s: i64,
    pub max_trip_travel_time_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatusRecord {
    pub school: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtcRecord {
    pub school: String,
    pub utc: usize,
    pub consumed: usize,
}

impl SolutionFile {
    pub fn from_solution(solution: &Solution, instance: &Instance) -> Self {
        let trip_id = |t: usize| solution.plan.trips[t].id.clone();
        let school_id = |k: usize| instance.school(k).id.clone();
        let m = &solution.metrics;
        Self {
            method: m.method.name().to_string(),
            blocks: solution
                .schedule
                .blocks
                .iter()
                .map(|b| BlockRecord {
                    trips: b.trips.iter().map(|&t| trip_id(t)).collect(),
                    pull_out_s: b.pull_out,
                    links: b
                        .links
                        .iter()
                        .map(|l| LinkRecord {
                            from: trip_id(l.from),
                            to: trip_id(l.to),
                            dd_s: l.deadhead,
                        })
                        .collect(),
                    pull_in_s: b.pull_in,
                })
                .collect(),
            nob: solution.schedule.nob,
            total_deadhead_s: solution.schedule.total_deadhead,
            trips: solution
                .plan
                .trips
                .iter()
                .zip(&solution.assignments)
                .map(|(t, a)| TripRecord {
                    id: t.id.clone(),
                    school: school_id(t.school),
                    stops: t.stops.iter().map(|&s| instance.stop(s).id.clone()).collect(),
                    load: t.load,
                    travel_time_s: t.travel_time,
                    target: a.map(school_id),
                })
                .collect(),
            metrics: MetricsRecord {
                nob: m.nob,
                not: m.not,
                tvt_s: m.tvt,
                tvt_minutes: m.tvt_minutes(),
                trip_travel_time_s: m.trip_travel_time,
                internal_deadhead_s: m.internal_deadhead,
                depot_deadhead_s: m.depot_deadhead,
                max_trip_travel_time_s: m.max_trip_travel_time,
            },
            school_status: solution
                .school_status
                .iter()
                .enumerate()
                .filter_map(|(k, s)| {
                    s.map(|s| StatusRecord {
                        school: school_id(k),
                        status: s.as_str().to_string(),
                    })
                })
                .collect(),
            utc: solution.utc.as_ref().map(|state| {
                (0..state.utc.len())
                    .map(|k| UtcRecord {
                        school: school_id(k),
                        utc: state.utc[k],
                        consumed: state.consumed[k],
                    })
                    .collect()
            }),
        }
    }

    /// Rebuilds the in-memory solution. Ids must resolve against `instance`;
    /// recorded numbers are kept as written.
    pub fn into_solution(self, instance: &Instance) -> Result<Solution> {
        let bad = |what: String| Error::InvalidArgument(format!("solution file: {what}"));
        let method: Method = self.method.parse()?;
        let school = |id: &str| instance.school_by_id(id).ok_or_else(|| bad(format!("unknown school {id:?}")));

        let mut trips = Vec::with_capacity(self.trips.len());
        let mut assignments = Vec::with_capacity(self.trips.len());
        for rec in &self.trips {
            let stops = rec
                .stops
                .iter()
                .map(|s| instance.stop_by_id(s).ok_or_else(|| bad(format!("unknown stop {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            trips.push(Trip {
                id: rec.id.clone(),
                school: school(&rec.school)?,
                stops,
                load: rec.load,
                travel_time: rec.travel_time_s,
            });
            assignments.push(rec.target.as_deref().map(school).transpose()?);
        }
        let index: HashMap<&str, usize> = self.trips.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        if index.len() != self.trips.len() {
            return Err(bad("duplicate trip id".into()));
        }
        let trip = |id: &str| index.get(id).copied().ok_or_else(|| bad(format!("unknown trip {id:?}")));

        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(BusBlock {
                    trips: b.trips.iter().map(|t| trip(t)).collect::<Result<_>>()?,
                    pull_out: b.pull_out_s,
                    links: b
                        .links
                        .iter()
                        .map(|l| {
                            Ok(Link {
                                from: trip(&l.from)?,
                                to: trip(&l.to)?,
                                deadhead: l.dd_s,
                            })
                        })
                        .collect::<Result<_>>()?,
                    pull_in: b.pull_in_s,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut school_status = vec![None; instance.schools().len()];
        for rec in &self.school_status {
            let status = match rec.status.as_str() {
                "optimal" => SolveStatus::Optimal,
                "time_limited" => SolveStatus::TimeLimited,
                "heuristic" => SolveStatus::Heuristic,
                other => return Err(bad(format!("unknown status {other:?}"))),
            };
            school_status[school(&rec.school)?] = Some(status);
        }
        let utc = match &self.utc {
            None => None,
            Some(records) => {
                let n = instance.schools().len();
                let mut state = UtcState {
                    utc: vec![0; n],
                    solved: vec![true; n],
                    consumed: vec![0; n],
                };
                for rec in records {
                    let k = school(&rec.school)?;
                    state.utc[k] = rec.utc;
                    state.consumed[k] = rec.consumed;
                }
                Some(state)
            }
        };

        let m = &self.metrics;
        let metrics = Metrics {
            method,
            nob: m.nob,
            not: m.not,
            trip_travel_time: m.trip_travel_time_s,
            internal_deadhead: m.internal_deadhead_s,
            depot_deadhead: m.depot_deadhead_s,
            tvt: m.tvt_s,
            max_trip_travel_time: m.max_trip_travel_time_s,
            runtime: Duration::ZERO,
        };
        Ok(Solution {
            plan: RoutingPlan { trips },
            schedule: Schedule {
                blocks,
                nob: self.nob,
                total_deadhead: self.total_deadhead_s,
            },
            assignments,
            school_status,
            utc,
            metrics,
        })
    }
}

pub fn solution_to_json(solution: &Solution, instance: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&SolutionFile::from_solution(solution, instance))
        .expect("solution serialization cannot fail");
    text.push('\n');
    text
}

pub fn solution_from_json(text: &str, context: &str, instance: &Instance) -> Result<Solution> {
    let file: SolutionFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        context: context.to_string(),
        source,
    })?;
    file.into_solution(instance)
}

pub fn save_solution(solution: &Solution, instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, solution_to_json(solution, instance)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_solution(path: impl AsRef<Path>, instance: &Instance) -> Result<Solution> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    solution_from_json(&text, &path.display().to_string(), instance)
}
