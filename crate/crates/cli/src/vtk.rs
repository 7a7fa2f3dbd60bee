//! Legacy-VTK (ASCII, unstructured grid) output of fields on a triangle mesh.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nash_stokes::mesh::TriMesh;

/// One named data array.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    PointVector(String, Vec<[f64; 2]>),
    PointScalar(String, Vec<f64>),
    CellVector(String, Vec<[f64; 2]>),
    CellScalar(String, Vec<f64>),
}

impl Field {
    pub fn name(&self) -> &str {
        match self {
            Field::PointVector(n, _) | Field::PointScalar(n, _) | Field::CellVector(n, _) | Field::CellScalar(n, _) => n,
        }
    }

    fn len(&self) -> usize {
        match self {
            Field::PointVector(_, v) | Field::CellVector(_, v) => v.len(),
            Field::PointScalar(_, v) | Field::CellScalar(_, v) => v.len(),
        }
    }

    fn on_points(&self) -> bool {
        matches!(self, Field::PointVector(..) | Field::PointScalar(..))
    }
}

fn num(v: f64) -> String {
    // -0 and 0 print the same so zero fields are byte-identical.
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:e}")
    }
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        bail!("VTK array name '{name}' must be non-empty without whitespace");
    }
    Ok(())
}

pub fn write_vtk<W: Write>(mesh: &TriMesh, title: &str, fields: &[Field], mut out: W) -> Result<()> {
    let (np, nc) = (mesh.n_vertices(), mesh.n_triangles());
    for f in fields {
        check_name(f.name())?;
        let expected = if f.on_points() { np } else { nc };
        if f.len() != expected {
            bail!("field '{}' has {} entries, mesh has {expected}", f.name(), f.len());
        }
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or("").chars().take(255).collect::<String>())?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {np} double")?;
    for p in mesh.vertices() {
        writeln!(out, "{} {} 0", num(p[0]), num(p[1]))?;
    }
    writeln!(out, "CELLS {nc} {}", 4 * nc)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(out, "5")?;
    }
    for (on_points, header) in [(true, format!("POINT_DATA {np}")), (false, format!("CELL_DATA {nc}"))] {
        let selected: Vec<&Field> = fields.iter().filter(|f| f.on_points() == on_points).collect();
        if selected.is_empty() {
            continue;
        }
        writeln!(out, "{header}")?;
        for f in selected {
            match f {
                Field::PointVector(name, v) | Field::CellVector(name, v) => {
                    writeln!(out, "VECTORS {name} double")?;
                    for x in v {
                        writeln!(out, "{} {} 0", num(x[0]), num(x[1]))?;
                    }
                }
                Field::PointScalar(name, v) | Field::CellScalar(name, v) => {
                    writeln!(out, "SCALARS {name} double 1")?;
                    writeln!(out, "LOOKUP_TABLE default")?;
                    for x in v {
                        writeln!(out, "{}", num(*x))?;
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_vtk_file(mesh: &TriMesh, title: &str, fields: &[Field], path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_vtk(mesh, title, fields, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use nash_stokes::mesh::{generate, DomainSpec};

    use super::*;

    fn render(mesh: &TriMesh, fields: &[Field]) -> String {
        let mut buf = Vec::new();
        write_vtk(mesh, "test", fields, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn layout_of_a_small_mesh() {
        let mesh = generate(&DomainSpec::unit_square(2)).unwrap();
        let fields = [
            Field::PointVector("velocity".into(), vec![[0.0, -0.0]; 9]),
            Field::PointScalar("pressure".into(), vec![0.0; 9]),
            Field::CellScalar("subdomain".into(), vec![0.0; 8]),
        ];
        let text = render(&mesh, &fields);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[2], "ASCII");
        assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
        assert_eq!(lines[4], "POINTS 9 double");
        assert!(text.contains("CELLS 8 32\n"));
        let types = lines.iter().position(|l| *l == "CELL_TYPES 8").unwrap();
        assert!(lines[types + 1..types + 9].iter().all(|l| *l == "5"));
        assert!(text.contains("POINT_DATA 9\nVECTORS velocity double\n0 0 0\n"));
        assert!(text.contains("SCALARS pressure double 1\nLOOKUP_TABLE default\n0\n"));
        assert!(text.contains("CELL_DATA 8\nSCALARS subdomain double 1"));
        assert_eq!(text, render(&mesh, &fields));
    }

    #[test]
    fn mismatched_lengths_and_bad_names_rejected() {
        let mesh = generate(&DomainSpec::unit_square(2)).unwrap();
        let mut buf = Vec::new();
        assert!(write_vtk(&mesh, "t", &[Field::PointScalar("p".into(), vec![0.0; 8])], &mut buf).is_err());
        assert!(write_vtk(&mesh, "t", &[Field::CellScalar("a b".into(), vec![0.0; 8])], &mut buf).is_err());
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let mesh = generate(&DomainSpec::unit_square(1)).unwrap();
        let path = Path::new("/nonexistent-dir/out.vtk");
        assert!(write_vtk_file(&mesh, "t", &[], path).is_err());
    }
}
