//! Chain checkpoints as JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Current, FiniteGraph, GraphDump};

/// `{"graph", "beta", "counts": [[edge, k], ...], "sweep", "seed"}` with
/// sparse counts keyed by directed edge slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub graph: GraphDump,
    pub beta: f64,
    pub counts: Vec<(usize, u32)>,
    pub sweep: u64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(dump: GraphDump, beta: f64, current: &Current, sweep: u64, seed: u64) -> Self {
        Checkpoint {
            graph: dump,
            beta,
            counts: current.to_sparse(),
            sweep,
            seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and checks the graph, `beta` and edge indices.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_slice(bytes)?;
        if !(cp.beta >= 0.0) || !cp.beta.is_finite() {
            return Err(Error::Domain(format!("beta {} invalid", cp.beta)));
        }
        let g = cp.graph.to_graph()?;
        cp.current(&g)?;
        Ok(cp)
    }

    /// The dense current on `graph`.
    pub fn current(&self, graph: &FiniteGraph) -> Result<Current> {
        let mut c = Current::zeros(graph);
        let mut seen = vec![false; graph.directed_edge_count()];
        for &(d, k) in &self.counts {
            if d >= graph.directed_edge_count() {
                return Err(Error::UnknownEdge(d));
            }
            if std::mem::replace(&mut seen[d], true) {
                return Err(Error::Domain(format!("edge {d} listed twice")));
            }
            c.set(crate::graphs::DirEdge(d), k);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{DirEdge, LatticeBox};

    #[test]
    fn roundtrip() {
        let l = LatticeBox::new(1);
        let mut c = Current::zeros(l.graph());
        c.set(DirEdge(3), 2);
        c.set(DirEdge(2), 2);
        let cp = Checkpoint::new(l.dump(), 0.7, &c, 120, 9);
        let json = cp.to_json().unwrap();
        assert!(json.contains("\"counts\":[[2,2],[3,2]]"));
        let back = Checkpoint::from_json(json.as_bytes()).unwrap();
        assert_eq!(back, cp);
        assert_eq!(back.current(l.graph()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        let l = LatticeBox::new(1);
        let base = Checkpoint::new(l.dump(), 0.5, &Current::zeros(l.graph()), 0, 0);
        let mut bad = base.clone();
        bad.counts = vec![(999, 1)];
        assert!(Checkpoint::from_json(bad.to_json().unwrap().as_bytes()).is_err());
        let mut bad = base.clone();
        bad.counts = vec![(1, 1), (1, 2)];
        assert!(Checkpoint::from_json(bad.to_json().unwrap().as_bytes()).is_err());
        assert!(Checkpoint::from_json(b"{\"graph\":1}").is_err());
        let neg = base.to_json().unwrap().replace("0.5", "-0.5");
        assert!(Checkpoint::from_json(neg.as_bytes()).is_err());
    }
}
