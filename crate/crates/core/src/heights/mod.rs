//! The dual height function of a sourceless current on a box, its signs,
//! the cycles surrounding a face, a direct Gibbs sampler for the height
//! law, and the Ising/FK structure of the signs given `|h|`.
//!
//! Convention: along a directed edge `xy`,
//! `h(face on the right) - h(face on the left) = n_xy - n_yx`, and the
//! outer face has height 0. A clockwise loop therefore raises the faces it
//! encloses by one.

mod gibbs;
mod ising;
mod surround;

pub use gibbs::{gibbs_height_sweep, HeightGibbs, PhiTable};
pub use ising::{connectivity, fk_edges, ising_couplings, FkComponents, FkEdgeSet, IsingCoupling};
pub use surround::{cycle_orientation, surrounded_faces, surrounding_count, surrounds, winding_height};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{source_function, Current, LatticeBox};

/// Heights on all faces; the last entry is the outer face and is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    values: Vec<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HeightRecord {
    face_x: i64,
    face_y: i64,
    h: i64,
}

impl HeightField {
    pub fn zeros(lattice: &LatticeBox) -> Self {
        HeightField {
            values: vec![0; lattice.face_count()],
        }
    }

    /// From interior values in face-index order.
    pub fn from_interior(lattice: &LatticeBox, interior: Vec<i64>) -> Result<Self> {
        if interior.len() != lattice.interior_face_count() {
            return Err(Error::Domain("one height per interior face required".into()));
        }
        let mut values = interior;
        values.push(0);
        Ok(HeightField { values })
    }

    #[inline]
    pub fn get(&self, face: usize) -> i64 {
        self.values[face]
    }

    #[inline]
    pub(crate) fn set(&mut self, face: usize, h: i64) {
        self.values[face] = h;
    }

    /// All faces, outer last.
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn interior(&self) -> &[i64] {
        &self.values[..self.values.len() - 1]
    }

    pub fn abs(&self) -> Vec<i64> {
        self.values.iter().map(|h| h.abs()).collect()
    }

    pub fn signs(&self) -> SignField {
        SignField {
            values: self.values.iter().map(|h| h.signum() as i8).collect(),
        }
    }

    /// CSV with header `face_x,face_y,h`, one row per interior face.
    pub fn to_csv(&self, lattice: &LatticeBox) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (f, &h) in self.interior().iter().enumerate() {
            let (face_x, face_y) = lattice.face_corner(f).expect("interior face");
            w.serialize(HeightRecord { face_x, face_y, h })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses the CSV form; every interior face must appear exactly once.
    pub fn from_csv(lattice: &LatticeBox, text: &[u8]) -> Result<Self> {
        let mut values = vec![0i64; lattice.face_count()];
        let mut seen = vec![false; lattice.interior_face_count()];
        let mut r = csv::Reader::from_reader(text);
        for rec in r.deserialize() {
            let rec: HeightRecord = rec?;
            let f = lattice.face_index(rec.face_x, rec.face_y);
            if f == lattice.outer_face() {
                return Err(Error::Domain(format!(
                    "({}, {}) is not an interior face",
                    rec.face_x, rec.face_y
                )));
            }
            if std::mem::replace(&mut seen[f], true) {
                return Err(Error::Domain(format!(
                    "face ({}, {}) repeated",
                    rec.face_x, rec.face_y
                )));
            }
            values[f] = rec.h;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("missing faces".into()));
        }
        Ok(HeightField { values })
    }
}

/// `sign(h)` per face; 0 on the outer face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignField {
    values: Vec<i8>,
}

impl SignField {
    #[inline]
    pub fn get(&self, face: usize) -> i8 {
        self.values[face]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

/// Integrates `orientation * (n_xy - n_yx)` across a dual spanning tree from
/// the outer face, then checks every remaining dual edge. `orientation = -1`
/// gives the mirrored convention.
pub fn integrate_heights(lattice: &LatticeBox, current: &Current, orientation: i64) -> Result<HeightField> {
    let g = lattice.graph();
    if current.len() != g.directed_edge_count() {
        return Err(Error::Domain("current size mismatch".into()));
    }
    if let Some((vertex, &divergence)) = source_function(g, current)
        .iter()
        .enumerate()
        .find(|(_, &d)| d != 0)
    {
        return Err(Error::NotSourceless { vertex, divergence });
    }
    let mut h = HeightField::zeros(lattice);
    for step in lattice.dual_tree() {
        let v = h.get(step.parent) + step.sign * orientation * current.net_flow(step.edge);
        h.set(step.face, v);
    }
    for &e in lattice.dual_non_tree() {
        let (r, l) = lattice.edge_faces(e);
        if h.get(r) - h.get(l) != orientation * current.net_flow(e) {
            return Err(Error::HeightInconsistent { edge: e });
        }
    }
    Ok(h)
}

/// The height function of a sourceless current.
pub fn height_from_current(lattice: &LatticeBox, current: &Current) -> Result<HeightField> {
    integrate_heights(lattice, current, 1)
}

/// First undirected edge violating `h(right) - h(left) = n_xy - n_yx`.
pub fn gradient_violation(lattice: &LatticeBox, current: &Current, h: &HeightField) -> Option<usize> {
    (0..lattice.graph().edge_count()).find(|&e| {
        let (r, l) = lattice.edge_faces(e);
        h.get(r) - h.get(l) != current.net_flow(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::DirEdge;
    use proptest::prelude::*;

    pub(crate) fn loop_current(lattice: &LatticeBox, corners: &[(i64, i64)]) -> Current {
        let g = lattice.graph();
        let mut c = Current::zeros(g);
        for w in 0..corners.len() {
            let (x0, y0) = corners[w];
            let (x1, y1) = corners[(w + 1) % corners.len()];
            let (dx, dy) = ((x1 - x0).signum(), (y1 - y0).signum());
            let (mut x, mut y) = (x0, y0);
            while (x, y) != (x1, y1) {
                let a = lattice.vertex_index(x, y).unwrap();
                let b = lattice.vertex_index(x + dx, y + dy).unwrap();
                c.increment(g.find_edge(a, b).unwrap());
                x += dx;
                y += dy;
            }
        }
        c
    }

    #[test]
    fn zero_current_flat() {
        let l = LatticeBox::new(3);
        let h = height_from_current(&l, &Current::zeros(l.graph())).unwrap();
        assert!(h.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn clockwise_plaquette_raises_face() {
        let l = LatticeBox::new(2);
        let f = l.face_index(0, 0);
        let mut c = Current::zeros(l.graph());
        for &d in l.plaquette(f) {
            c.increment(d);
        }
        let h = height_from_current(&l, &c).unwrap();
        for face in 0..l.face_count() {
            assert_eq!(h.get(face), (face == f) as i64);
        }
        // same loop written out by corners, clockwise
        let c2 = loop_current(&l, &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        assert_eq!(c2, c);
    }

    #[test]
    fn nested_loops() {
        let l = LatticeBox::new(2);
        let mut c = loop_current(&l, &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        let ring = loop_current(&l, &[(-1, -1), (-1, 2), (2, 2), (2, -1)]);
        for d in l.graph().directed_edges() {
            for _ in 0..ring.get(d) {
                c.increment(d);
            }
        }
        let h = height_from_current(&l, &c).unwrap();
        for a in -2..2 {
            for b in -2..2 {
                let want = if (a, b) == (0, 0) {
                    2
                } else if (-1..=1).contains(&a) && (-1..=1).contains(&b) {
                    1
                } else {
                    0
                };
                assert_eq!(h.get(l.face_index(a, b)), want, "face {a},{b}");
            }
        }
    }

    #[test]
    fn sourced_current_rejected() {
        let l = LatticeBox::new(1);
        let mut c = Current::zeros(l.graph());
        c.increment(DirEdge(0));
        assert!(matches!(
            height_from_current(&l, &c),
            Err(Error::NotSourceless { .. })
        ));
    }

    #[test]
    fn mirrored_orientation_violates_gradient() {
        let l = LatticeBox::new(2);
        let c = loop_current(&l, &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        let h = integrate_heights(&l, &c, -1).unwrap();
        assert!(gradient_violation(&l, &c, &h).is_some());
        let h = height_from_current(&l, &c).unwrap();
        assert!(gradient_violation(&l, &c, &h).is_none());
    }

    #[test]
    fn csv_roundtrip() {
        let l = LatticeBox::new(1);
        let c = loop_current(&l, &[(-1, -1), (-1, 0), (0, 0), (0, -1)]);
        let h = height_from_current(&l, &c).unwrap();
        let text = h.to_csv(&l).unwrap();
        assert!(text.starts_with("face_x,face_y,h\n-1,-1,1\n"));
        assert_eq!(HeightField::from_csv(&l, text.as_bytes()).unwrap(), h);
        assert!(HeightField::from_csv(&l, b"face_x,face_y,h\n5,5,1\n").is_err());
        assert!(HeightField::from_csv(&l, b"face_x,face_y,h\n0,0,1\n").is_err());
    }

    proptest! {
        #[test]
        fn random_plaquette_sums_integrate(
            picks in proptest::collection::vec((0usize..16, any::<bool>(), 1u32..3), 0..12)
        ) {
            let l = LatticeBox::new(2);
            let mut c = Current::zeros(l.graph());
            for (f, rev, k) in picks {
                for &d in l.plaquette(f) {
                    let d = if rev { d.reverse() } else { d };
                    for _ in 0..k {
                        c.increment(d);
                    }
                }
            }
            let h = height_from_current(&l, &c).unwrap();
            prop_assert!(gradient_violation(&l, &c, &h).is_none());
            prop_assert_eq!(h.get(l.outer_face()), 0);
        }
    }
}
