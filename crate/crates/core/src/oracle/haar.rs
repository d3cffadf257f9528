//! Tensor-grid quadrature of spin correlations over the Haar measure.
//!
//! The integrand is periodic and analytic in every angle, so the uniform
//! grid (trapezoidal rule) converges geometrically. One angle is pinned to
//! zero by global rotation invariance.

use std::f64::consts::TAU;

use super::RadiusField;
use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;

const MAX_VERTICES: usize = 4;

/// Matrix of `Re <σ_x σ̄_y>` for all vertex pairs.
pub fn haar_two_point_matrix(
    graph: &FiniteGraph,
    radius: &RadiusField,
    grid_points: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = graph.vertex_count();
    if n > MAX_VERTICES {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_VERTICES,
        });
    }
    if grid_points < 64 {
        return Err(Error::Domain(format!(
            "need at least 64 grid points, got {grid_points}"
        )));
    }
    if radius.len() != n {
        return Err(Error::Domain("radius field size mismatch".into()));
    }
    let r = radius.values();
    let cos_table: Vec<f64> = (0..grid_points)
        .map(|k| (TAU * k as f64 / grid_points as f64).cos())
        .collect();
    let couplings: Vec<(usize, usize, f64)> =
        graph.edges().iter().map(|&(u, v)| (u, v, r[u] * r[v])).collect();
    let shift: f64 = couplings.iter().map(|c| c.2).sum();

    let mut idx = vec![0usize; n];
    let mut z = 0.0;
    let mut acc = vec![vec![0.0; n]; n];
    let diff = |a: usize, b: usize| (a + grid_points - b) % grid_points;
    if n == 0 {
        return Ok(Vec::new());
    }
    loop {
        let energy: f64 = couplings
            .iter()
            .map(|&(u, v, j)| j * cos_table[diff(idx[u], idx[v])])
            .sum();
        let w = (energy - shift).exp();
        z += w;
        for x in 0..n {
            for y in x + 1..n {
                acc[x][y] += w * cos_table[diff(idx[x], idx[y])];
            }
        }
        // odometer over vertices 1..n (vertex 0 pinned)
        let mut i = 1;
        loop {
            if i >= n {
                let mut out = vec![vec![1.0; n]; n];
                for x in 0..n {
                    for y in x + 1..n {
                        out[x][y] = acc[x][y] / z;
                        out[y][x] = out[x][y];
                    }
                }
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] == grid_points {
                idx[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// `Re <σ_x σ̄_y>` by quadrature; graphs with at most four vertices.
pub fn haar_two_point(
    graph: &FiniteGraph,
    radius: &RadiusField,
    x: usize,
    y: usize,
    grid_points: usize,
) -> Result<f64> {
    let n = graph.vertex_count();
    if x >= n || y >= n {
        return Err(Error::UnknownVertex(x.max(y)));
    }
    let m = haar_two_point_matrix(graph, radius, grid_points)?;
    Ok(m[x][y])
}
