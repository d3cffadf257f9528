//! JSON form of a cycle partition:
//! `{"cycles": [{"edges": [[edge, time], ...], "layer": k}, ...]}`.

use serde::{Deserialize, Serialize};

use super::{check_cover, Cycle, CyclePartition};
use crate::error::{Error, Result};
use crate::graphs::{DirEdge, FiniteGraph};
use crate::sampler::{LocalTimeField, PoissonEdgeSet, PoissonPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleDump {
    pub edges: Vec<(usize, f64)>,
    pub layer: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDump {
    pub cycles: Vec<CycleDump>,
}

impl PartitionDump {
    pub fn new(pi: &PoissonEdgeSet, partition: &CyclePartition) -> Self {
        let cycles = partition
            .cycles()
            .iter()
            .zip(partition.layers())
            .map(|(c, &layer)| CycleDump {
                edges: c
                    .points()
                    .iter()
                    .map(|&i| {
                        let p = pi.points()[i];
                        (p.edge.0, p.time)
                    })
                    .collect(),
                layer,
            })
            .collect();
        PartitionDump { cycles }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Rebuilds the edge set (the union of all cycles) and the partition,
    /// checking that the cycles cover it disjointly.
    pub fn resolve(
        &self,
        graph: &FiniteGraph,
        budget: &LocalTimeField,
    ) -> Result<(PoissonEdgeSet, CyclePartition)> {
        let mut points = Vec::new();
        for c in &self.cycles {
            for &(e, time) in &c.edges {
                if e >= graph.directed_edge_count() {
                    return Err(Error::UnknownEdge(e));
                }
                points.push(PoissonPoint {
                    edge: DirEdge(e),
                    time,
                });
            }
        }
        let pi = PoissonEdgeSet::new(graph, budget, points.clone())?;
        let mut cycles = Vec::new();
        let mut layers = Vec::new();
        let mut k = 0;
        for c in &self.cycles {
            let idx: Vec<usize> = points[k..k + c.edges.len()]
                .iter()
                .map(|p| pi.index_of(p).expect("point present"))
                .collect();
            k += c.edges.len();
            cycles.push(Cycle::from_points(graph, &pi, &idx)?);
            layers.push(c.layer);
        }
        let partition = CyclePartition { cycles, layers };
        check_cover(graph, &pi, &partition)?;
        Ok((pi, partition))
    }
}

#[cfg(test)]
mod tests {
    use super::super::decompose;
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn roundtrip() {
        let (g, t, pi) = figure_eight();
        let p = decompose(&g, &pi).unwrap();
        let json = PartitionDump::new(&pi, &p).to_json().unwrap();
        assert!(json.starts_with("{\"cycles\":[{\"edges\":[["));
        let (pi2, p2) = PartitionDump::from_json(json.as_bytes())
            .unwrap()
            .resolve(&g, &t)
            .unwrap();
        assert_eq!(pi2, pi);
        assert_eq!(p2, p);
    }

    #[test]
    fn rejects_broken_cycles() {
        let (g, t, _) = figure_eight();
        let d = PartitionDump {
            cycles: vec![CycleDump {
                edges: vec![(0, 0.5)],
                layer: 1,
            }],
        };
        assert!(d.resolve(&g, &t).is_err());
        assert!(PartitionDump::from_json(b"{\"cycles\":[{\"edges\":[[0]]}]}").is_err());
    }
}
