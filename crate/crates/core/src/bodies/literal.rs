//! Body literals as JSON:
//!
//! ```text
//! {"type":"hpoly","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}
//! {"type":"vpoly","vertices":[[1,0],[0,1],[-1,-1]]}
//! {"type":"ball","r":2.0,"n":3}
//! {"type":"named","name":"cube","n":4}
//! ```

use serde::{Deserialize, Serialize};

use super::{named, Ball, Body, HPolytope, VPolytope};
use crate::error::{Error, Result};
use crate::numkit::{matrix::rows_to_matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Hpoly {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Vpoly {
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Named {
        name: String,
        n: usize,
    },
}

impl BodySpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid body literal: {e}")))
    }

    /// Builds the body. A ball literal without `n` takes `default_dim`.
    pub fn build(&self, default_dim: Option<usize>) -> Result<Body> {
        match self {
            BodySpec::Hpoly { a, b } => {
                let a = rows_to_matrix(a)?;
                Ok(Body::H(HPolytope::new(a, Vector::from_vec(b.clone()))?))
            }
            BodySpec::Vpoly { vertices } => Ok(Body::V(VPolytope::new(rows_to_matrix(vertices)?)?)),
            BodySpec::Ball { r, n } => {
                let n = n.or(default_dim).ok_or_else(|| Error::invalid("ball literal needs a dimension"))?;
                Ok(Body::Ball(Ball::new(n, *r)?))
            }
            BodySpec::Named { name, n } => named(name, *n),
        }
    }
}

impl std::str::FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BodySpec::parse(s)
    }
}
