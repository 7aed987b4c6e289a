//! Mesh and curvature-grid export.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::chart::{Chart, ChartError};
use crate::surfgeom::{ChartGrid, GeomOptions, Grid, Result};

/// Wavefront OBJ of `c` over `grid`: vertices row-major (`u` fastest),
/// two triangles per cell, counter-clockwise in `(u, v)`.
pub fn to_obj(c: &dyn Chart, grid: &Grid) -> Result<String, ChartError> {
    let pts = grid.nodes().into_par_iter().map(|(u, v)| c.point(u, v)).collect::<Result<Vec<_>, _>>()?;
    let mut out = String::new();
    let _ = writeln!(out, "# {} x {} grid, u in [{}, {}], v in [{}, {}]", grid.nu, grid.nv, grid.u0, grid.u1, grid.v0, grid.v1);
    for p in &pts {
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", p.x, p.y, p.z);
    }
    let idx = |i: usize, j: usize| j * grid.nu + i + 1;
    for j in 0..grid.nv.saturating_sub(1) {
        for i in 0..grid.nu.saturating_sub(1) {
            let (a, b, c2, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            let _ = writeln!(out, "f {a} {b} {c2}");
            let _ = writeln!(out, "f {a} {c2} {d}");
        }
    }
    Ok(out)
}

/// CSV with columns `u,v,E,F,G,K,H,nu`; degenerate nodes leave the
/// form columns empty.
pub fn to_csv(c: &dyn Chart, grid: &Grid, opts: &GeomOptions) -> Result<String> {
    let cg = ChartGrid::sample(c, *grid, opts)?;
    let mut out = String::from("u,v,E,F,G,K,H,nu\n");
    for (s, (u, v)) in cg.samples.iter().zip(grid.nodes()) {
        match s {
            Some(s) => {
                let f = &s.forms;
                let k = &s.curvature;
                let nu = k.nu.map(|x| format!("{x:.12e}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{u:.12e},{v:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{nu}",
                    f.e, f.f, f.g, k.k, k.h
                );
            }
            None => {
                let _ = writeln!(out, "{u:.12e},{v:.12e},,,,,,");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ExprChart;

    #[test]
    fn plane_mesh_is_planar_and_indexed() {
        let plane = ExprChart::parse(["u", "v", "0"]).unwrap();
        let obj = to_obj(&plane, &Grid::square(-1.0, 1.0, 3)).unwrap();
        let verts: Vec<&str> = obj.lines().filter(|l| l.starts_with("v ")).collect();
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(verts.len(), 9);
        assert_eq!(faces.len(), 8);
        assert_eq!(faces[0], "f 1 2 5");
        assert!(verts.iter().all(|v| v.ends_with(" 0.000000000000e0")));
    }

    #[test]
    fn csv_columns() {
        let c = ExprChart::parse(["u", "v", "u^2"]).unwrap();
        let csv = to_csv(&c, &Grid::square(-1.0, 1.0, 3), &GeomOptions::default()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("u,v,E,F,G,K,H,nu"));
        assert_eq!(lines.count(), 9);
    }
}
