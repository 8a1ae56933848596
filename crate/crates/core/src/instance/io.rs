use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Instance, Node, SchoolSpec, StopSpec};
use crate::error::{Error, Result};

/// On-disk representation of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub capacity: u32,
    pub speed_mph: f64,
    pub square_side_ft: i64,
    pub depot: Node,
    pub schools: Vec<SchoolRecord>,
    pub stops: Vec<StopRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchoolRecord {
    pub id: String,
    pub x: i64,
    pub y: i64,
    pub bell_time_s: i64,
    /// Optional redundant membership list; checked against the stops' `school` fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stops: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRecord {
    pub id: String,
    pub x: i64,
    pub y: i64,
    pub students: u32,
    pub school: String,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            capacity: instance.capacity(),
            speed_mph: instance.speed_mph(),
            square_side_ft: instance.square_side(),
            depot: instance.depot(),
            schools: instance
                .schools()
                .iter()
                .map(|k| SchoolRecord {
                    id: k.id.clone(),
                    x: k.node.x,
                    y: k.node.y,
                    bell_time_s: k.bell_time,
                    stops: Some(k.stops.iter().map(|&s| instance.stop(s).id.clone()).collect()),
                })
                .collect(),
            stops: instance
                .stops()
                .iter()
                .map(|s| StopRecord {
                    id: s.id.clone(),
                    x: s.node.x,
                    y: s.node.y,
                    students: s.students,
                    school: instance.school(s.school).id.clone(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        let stop_owner: HashMap<&str, &str> = self
            .stops
            .iter()
            .map(|s| (s.id.as_str(), s.school.as_str()))
            .collect();
        let mut claimed: HashMap<&str, &str> = HashMap::new();
        for (k, school) in self.schools.iter().enumerate() {
            let Some(listed) = &school.stops else { continue };
            for stop in listed {
                if let Some(other) = claimed.insert(stop, &school.id) {
                    return Err(Error::invalid(
                        format!("schools[{k}].stops"),
                        format!("stop {stop:?} claimed by schools {other:?} and {:?}", school.id),
                    ));
                }
                match stop_owner.get(stop.as_str()) {
                    None => {
                        return Err(Error::invalid(
                            format!("schools[{k}].stops"),
                            format!("unknown stop {stop:?}"),
                        ))
                    }
                    Some(owner) if *owner != school.id => {
                        return Err(Error::invalid(
                            format!("schools[{k}].stops"),
                            format!("stop {stop:?} claimed by schools {owner:?} and {:?}", school.id),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        for (s, stop) in self.stops.iter().enumerate() {
            let listed_somewhere = self.schools.iter().any(|k| k.stops.is_some());
            if listed_somewhere && !claimed.contains_key(stop.id.as_str()) {
                let owner = self.schools.iter().find(|k| k.id == stop.school);
                if owner.is_some_and(|k| k.stops.is_some()) {
                    return Err(Error::invalid(
                        format!("stops[{s}]"),
                        format!("stop {:?} missing from its school's stop list", stop.id),
                    ));
                }
            }
        }

        let schools = self
            .schools
            .into_iter()
            .map(|k| SchoolSpec {
                id: k.id,
                node: Node::new(k.x, k.y),
                bell_time: k.bell_time_s,
            })
            .collect();
        let stops = self
            .stops
            .into_iter()
            .map(|s| StopSpec {
                id: s.id,
                node: Node::new(s.x, s.y),
                students: s.students,
                school: s.school,
            })
            .collect();
        Instance::new(
            schools,
            stops,
            self.depot,
            self.capacity,
            self.speed_mph,
            self.square_side_ft,
        )
    }
}

pub fn instance_from_json(text: &str, context: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        context: context.to_string(),
        source,
    })?;
    file.into_instance()
}

pub fn instance_to_json(instance: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(instance))
        .expect("instance serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    instance_from_json(&text, &path.display().to_string())
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_json(instance)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
