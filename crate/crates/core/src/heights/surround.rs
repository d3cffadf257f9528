//! Which cycles surround which faces.
//!
//! Cycles of a proper partition visit each vertex once, so on the box they
//! are simple closed lattice curves: even-odd crossing parity decides the
//! interior and the shoelace sign gives the orientation.

use crate::cycles::CyclePartition;
use crate::graphs::LatticeBox;
use crate::sampler::PoissonEdgeSet;

/// `+1` for clockwise, `-1` for counter-clockwise, `0` for degenerate
/// (two-point) cycles.
pub fn cycle_orientation(lattice: &LatticeBox, vertices: &[usize]) -> i64 {
    let mut twice_area = 0i64;
    for i in 0..vertices.len() {
        let (x0, y0) = lattice.vertex_coords(vertices[i]);
        let (x1, y1) = lattice.vertex_coords(vertices[(i + 1) % vertices.len()]);
        twice_area += x0 * y1 - x1 * y0;
    }
    -twice_area.signum()
}

/// Whether the closed curve through `vertices` encloses `face`, by the
/// parity of crossings of the ray from the face centre towards `+x`.
pub fn surrounds(lattice: &LatticeBox, vertices: &[usize], face: usize) -> bool {
    let Some((a, b)) = lattice.face_corner(face) else {
        return false;
    };
    let mut inside = false;
    for i in 0..vertices.len() {
        let (x0, y0) = lattice.vertex_coords(vertices[i]);
        let (x1, y1) = lattice.vertex_coords(vertices[(i + 1) % vertices.len()]);
        // vertical unit segment between heights b and b + 1, right of the centre
        if x0 == x1 && x0 > a && y0.min(y1) == b && y0.max(y1) == b + 1 {
            inside = !inside;
        }
    }
    inside
}

/// Lower-left corners of the faces enclosed by the closed curve, sorted.
pub fn surrounded_faces(lattice: &LatticeBox, vertices: &[usize]) -> Vec<(i64, i64)> {
    let coords: Vec<(i64, i64)> = vertices.iter().map(|&v| lattice.vertex_coords(v)).collect();
    let (Some(x0), Some(x1)) = (coords.iter().map(|c| c.0).min(), coords.iter().map(|c| c.0).max()) else {
        return Vec::new();
    };
    let y0 = coords.iter().map(|c| c.1).min().expect("non-empty");
    let y1 = coords.iter().map(|c| c.1).max().expect("non-empty");
    let mut out = Vec::new();
    for a in x0..x1 {
        for b in y0..y1 {
            if surrounds(lattice, vertices, lattice.face_index(a, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Number of cycles of `partition` surrounding both faces.
pub fn surrounding_count(
    lattice: &LatticeBox,
    pi: &PoissonEdgeSet,
    partition: &CyclePartition,
    a: usize,
    b: usize,
) -> usize {
    let g = lattice.graph();
    partition
        .cycles()
        .iter()
        .filter(|c| {
            let v = c.vertices(g, pi);
            surrounds(lattice, &v, a) && surrounds(lattice, &v, b)
        })
        .count()
}

/// `sum_η orientation(η) * 1[η surrounds face]`, which equals the height.
pub fn winding_height(
    lattice: &LatticeBox,
    pi: &PoissonEdgeSet,
    partition: &CyclePartition,
    face: usize,
) -> i64 {
    let g = lattice.graph();
    partition
        .cycles()
        .iter()
        .map(|c| {
            let v = c.vertices(g, pi);
            if surrounds(lattice, &v, face) {
                cycle_orientation(lattice, &v)
            } else {
                0
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::decompose;
    use crate::heights::height_from_current;
    use crate::rng::chain_rng;
    use crate::sampler::{assign_times, run_chain, LocalTimeField, McmcConfig, MoveSet, PoissonPoint};

    fn plaquette_set(l: &LatticeBox, faces: &[usize], t: &LocalTimeField) -> PoissonEdgeSet {
        let mut pts = Vec::new();
        for (k, &f) in faces.iter().enumerate() {
            for (i, &d) in l.plaquette(f).iter().enumerate() {
                pts.push(PoissonPoint {
                    edge: d,
                    time: 0.01 * (10 * k + i + 1) as f64,
                });
            }
        }
        PoissonEdgeSet::new(l.graph(), t, pts).unwrap()
    }

    #[test]
    fn empty_and_single_plaquette() {
        let l = LatticeBox::new(2);
        let t = LocalTimeField::constant(25, 2.0).unwrap();
        let empty = PoissonEdgeSet::empty(l.graph());
        let p = decompose(l.graph(), &empty).unwrap();
        let f00 = l.face_index(0, 0);
        let f01 = l.face_index(0, 1);
        assert_eq!(surrounding_count(&l, &empty, &p, f00, f00), 0);
        let pi = plaquette_set(&l, &[f00], &t);
        let p = decompose(l.graph(), &pi).unwrap();
        assert_eq!(surrounding_count(&l, &pi, &p, f00, f00), 1);
        assert_eq!(surrounding_count(&l, &pi, &p, f00, f01), 0);
        let v = p.cycles()[0].vertices(l.graph(), &pi);
        assert_eq!(cycle_orientation(&l, &v), 1);
        assert!(!surrounds(&l, &v, l.outer_face()));
    }

    #[test]
    fn surrounded_faces_match_full_scan() {
        let l = LatticeBox::new(3);
        let t = LocalTimeField::constant(49, 2.0).unwrap();
        let faces = [l.face_index(0, 0), l.face_index(-2, 1)];
        let pi = plaquette_set(&l, &faces, &t);
        let p = decompose(l.graph(), &pi).unwrap();
        for c in p.cycles() {
            let v = c.vertices(l.graph(), &pi);
            let want: Vec<(i64, i64)> = (0..l.interior_face_count())
                .filter(|&f| surrounds(&l, &v, f))
                .map(|f| l.face_corner(f).unwrap())
                .collect();
            let mut got = surrounded_faces(&l, &v);
            got.sort_by_key(|&(a, b)| (b, a));
            assert_eq!(got, want);
            assert_eq!(got.len(), 1);
        }
    }

    #[test]
    fn winding_matches_height_on_sampled_currents() {
        let l = LatticeBox::new(2);
        let g = l.graph();
        let t = LocalTimeField::constant(g.vertex_count(), 1.0).unwrap();
        let cfg = McmcConfig {
            sweeps: 2000,
            burnin: 100,
            thin: 19,
            ..McmcConfig::default()
        };
        let mut rng = chain_rng(3, 3);
        run_chain(g, &t, &MoveSet::plaquettes(&l), &cfg, 0, None, |c| {
            let pi = assign_times(g, &t, c, &mut rng).unwrap();
            let p = decompose(g, &pi).unwrap();
            let h = height_from_current(&l, c).unwrap();
            for f in 0..l.interior_face_count() {
                assert_eq!(winding_height(&l, &pi, &p, f), h.get(f));
            }
        })
        .unwrap();
    }
}
