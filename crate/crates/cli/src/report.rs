use serde::{Deserialize, Serialize};

use crate::io::DatasetInfo;

/// Bumped whenever a field of an emitted JSON document changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Software {
    pub fn current() -> Self {
        Software {
            name: "simplex-clf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Common wrapper of every JSON document the tool writes.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub software: Software,
    pub command: &'static str,
    pub config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetInfo>,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &'static str, config: C, result: R) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            software: Software::current(),
            command,
            config,
            seed: None,
            dataset: None,
            result,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dataset(mut self, info: DatasetInfo) -> Self {
        self.dataset = Some(info);
        self
    }
}
