//! JSON documents written next to routed circuits.

use serde::{Deserialize, Serialize};

use crate::mcts::{MctsParams, Objective, TransformResult};

/// Mapping sidecar: `{initial, final, perm}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSidecar {
    pub initial: Vec<u32>,
    #[serde(rename = "final")]
    pub final_: Vec<u32>,
    pub perm: Vec<u32>,
}

impl MappingSidecar {
    pub fn from_result(r: &TransformResult) -> Self {
        MappingSidecar {
            initial: r.initial_mapping.as_slice().to_vec(),
            final_: r.final_mapping.as_slice().to_vec(),
            perm: r.perm.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub added_cnots: usize,
    pub added_depth: usize,
    pub wall_time: f64,
    pub fallbacks: usize,
}

impl TrialReport {
    pub fn from_result(seed: u64, r: &TransformResult) -> Self {
        TrialReport {
            seed,
            added_cnots: r.added_cnots,
            added_depth: r.added_depth,
            wall_time: r.wall_time,
            fallbacks: r.fallbacks,
        }
    }
}

/// Report of one `route` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub circuit: String,
    pub arch: String,
    pub objective: Objective,
    pub params: MctsParams,
    pub trials: Vec<TrialReport>,
    pub best: TrialReport,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_uses_final_key() {
        let s = MappingSidecar {
            initial: vec![0, 1],
            final_: vec![1, 0],
            perm: vec![1, 0, 2],
        };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"initial":[0,1],"final":[1,0],"perm":[1,0,2]}"#);
        assert_eq!(serde_json::from_str::<MappingSidecar>(&json).unwrap(), s);
    }
}
