//! A loaded problem instance: one chart plus named data fields.
//!
//! Check suites locate their inputs through reserved slot names: `theta`
//! (the (1,1) candidate, also the almost contact `phi`), `eta` (1-form),
//! `omega` (2-form), `xi` (vector field), and connections `nabla` /
//! `nabla_star`. When `nabla` is absent, suites fall back to the
//! Levi-Civita connection of the metric; a declared `nabla_star` is always
//! cross-checked against the computed dual.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::ChartRef;
use crate::connection::ConnectionRef;
use crate::tensor::{Metric, TensorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Debug)]
pub struct Manifold {
    pub name: String,
    pub chart: ChartRef,
    pub metric: Option<Metric>,
    pub connections: BTreeMap<String, ConnectionRef>,
    pub tensors: BTreeMap<String, TensorField>,
    /// Suite-level outcome declarations (the golden matrix for zoo entries,
    /// the `[expect]` section for spec files).
    pub expectations: BTreeMap<String, Expectation>,
}

impl Manifold {
    pub fn new(name: impl Into<String>, chart: ChartRef) -> Manifold {
        Manifold {
            name: name.into(),
            chart,
            metric: None,
            connections: BTreeMap::new(),
            tensors: BTreeMap::new(),
            expectations: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn slot(&self, name: &str, r: usize, s: usize) -> Option<&TensorField> {
        self.tensors.get(name).filter(|t| t.valence() == (r, s))
    }

    pub fn theta(&self) -> Option<&TensorField> {
        self.slot("theta", 1, 1)
    }

    pub fn eta(&self) -> Option<&TensorField> {
        self.slot("eta", 0, 1)
    }

    pub fn omega(&self) -> Option<&TensorField> {
        self.slot("omega", 0, 2)
    }

    pub fn xi(&self) -> Option<&TensorField> {
        self.slot("xi", 1, 0)
    }

    pub fn nabla(&self) -> Option<&ConnectionRef> {
        self.connections.get("nabla")
    }

    pub fn nabla_star(&self) -> Option<&ConnectionRef> {
        self.connections.get("nabla_star")
    }

    pub fn expect(&mut self, suite: &str, outcome: Expectation) {
        self.expectations.insert(suite.into(), outcome);
    }
}
