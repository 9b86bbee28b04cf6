//! Height fields on masked grids and the `translator-field v1` text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::closed_form::ClosedFormFamily;
use crate::error::{Error, Result};
use crate::grid::{GridDomain, NodeTag, ShapeMeta};

/// Graph heights sampled on a [`GridDomain`].
///
/// Values are finite on interior and boundary nodes; exterior nodes carry
/// NaN and never enter any stencil. Boundary values are kept alongside the
/// node values and always agree with them.
#[derive(Clone, Debug)]
pub struct HeightField {
    domain: GridDomain,
    values: Vec<f64>,
    boundary_values: Vec<f64>,
}

impl HeightField {
    /// Zero heights on interior and boundary, NaN outside.
    pub fn zero(domain: GridDomain) -> Self {
        let mut values = vec![f64::NAN; domain.node_count()];
        for j in 0..domain.ny {
            for i in 0..domain.nx {
                if domain.tag(i, j) != NodeTag::Exterior {
                    values[domain.idx(i, j)] = 0.0;
                }
            }
        }
        Self::from_values(domain, values).expect("zero field is finite")
    }

    /// Sample `f(x, y)` on every non-exterior node.
    pub fn from_fn(domain: GridDomain, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = vec![f64::NAN; domain.node_count()];
        for j in 0..domain.ny {
            for i in 0..domain.nx {
                if domain.tag(i, j) != NodeTag::Exterior {
                    values[domain.idx(i, j)] = f(domain.node_x(i), domain.node_y(j));
                }
            }
        }
        Self::from_values(domain, values)
    }

    /// Sample a closed-form family; fails if any non-exterior node falls
    /// outside the family's strip.
    pub fn sample_closed_form(domain: GridDomain, fam: ClosedFormFamily) -> Result<Self> {
        let mut values = vec![f64::NAN; domain.node_count()];
        for j in 0..domain.ny {
            for i in 0..domain.nx {
                if domain.tag(i, j) != NodeTag::Exterior {
                    values[domain.idx(i, j)] = fam.evaluate(domain.node_x(i), domain.node_y(j))?;
                }
            }
        }
        Self::from_values(domain, values)
    }

    /// Wrap a full-grid value vector. Non-exterior nodes must be finite.
    pub fn from_values(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::InvalidParameter(format!(
                "value vector length {} does not match grid ({} nodes)",
                values.len(),
                domain.node_count()
            )));
        }
        for &(i, j) in domain.interior_nodes().iter().chain(domain.boundary_nodes()) {
            if !values[domain.idx(i, j)].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite value at node ({i},{j})"
                )));
            }
        }
        let boundary_values = domain
            .boundary_nodes()
            .iter()
            .map(|&(i, j)| values[domain.idx(i, j)])
            .collect();
        Ok(HeightField {
            domain,
            values,
            boundary_values,
        })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Boundary heights, aligned with `domain().boundary_nodes()`.
    pub fn boundary_values(&self) -> &[f64] {
        &self.boundary_values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.idx(i, j)]
    }

    /// Height at the origin node, NaN when the origin is exterior.
    pub fn center_value(&self) -> f64 {
        self.value(self.domain.ic(), self.domain.jc())
    }

    pub fn max_value(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for &(i, j) in self.domain.interior_nodes().iter().chain(self.domain.boundary_nodes()) {
            m = m.max(self.value(i, j));
        }
        m
    }

    pub fn max_abs_value(&self) -> f64 {
        let mut m = 0.0f64;
        for &(i, j) in self.domain.interior_nodes().iter().chain(self.domain.boundary_nodes()) {
            m = m.max(self.value(i, j).abs());
        }
        m
    }

    /// Shift all non-exterior values by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            if v.is_finite() {
                *v += c;
            }
        }
        for v in &mut out.boundary_values {
            *v += c;
        }
        out
    }

    /// Largest |self - other| over shared non-exterior nodes. Grids must be
    /// identical in size; intended for fields on one shared window grid.
    pub fn sup_diff(&self, other: &HeightField) -> f64 {
        assert_eq!(self.domain.nx, other.domain.nx);
        assert_eq!(self.domain.ny, other.domain.ny);
        let mut m = 0.0f64;
        for j in 0..self.domain.ny {
            for i in 0..self.domain.nx {
                let (a, b) = (self.value(i, j), other.value(i, j));
                if a.is_finite() && b.is_finite() {
                    m = m.max((a - b).abs());
                }
            }
        }
        m
    }

    pub(crate) fn set_interior(&mut self, interior_values: &[f64]) {
        let nodes = self.domain.interior_nodes();
        assert_eq!(nodes.len(), interior_values.len());
        for (k, &(i, j)) in nodes.iter().enumerate() {
            let idx = self.domain.idx(i, j);
            self.values[idx] = interior_values[k];
        }
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Serialize in the `translator-field v1` format. Finite values are written
/// with 17 significant digits, which round-trips f64 exactly.
pub fn write_field_string(f: &HeightField) -> String {
    let d = f.domain();
    let mut s = String::new();
    s.push_str("# translator-field v1\n");
    let _ = writeln!(
        s,
        "{} {} {} {} {} {}",
        d.nx,
        d.ny,
        fmt_f64(d.x0()),
        fmt_f64(d.y0()),
        fmt_f64(d.dx),
        fmt_f64(d.dy)
    );
    match d.shape {
        ShapeMeta::Rectangle { half_x, half_y } => {
            let _ = writeln!(s, "shape Rectangle {} {}", fmt_f64(half_x), fmt_f64(half_y));
        }
        ShapeMeta::Annulus {
            inner_x,
            inner_y,
            outer_x,
            outer_y,
        } => {
            let _ = writeln!(
                s,
                "shape Annulus {} {} {} {}",
                fmt_f64(inner_x),
                fmt_f64(inner_y),
                fmt_f64(outer_x),
                fmt_f64(outer_y)
            );
        }
    }
    for j in 0..d.ny {
        let row: Vec<String> = (0..d.nx).map(|i| fmt_f64(f.value(i, j))).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_field_file(f: &HeightField, path: &Path) -> Result<()> {
    std::fs::write(path, write_field_string(f))?;
    Ok(())
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Format(format!("bad float token {tok:?}")))
}

/// Parse the `translator-field v1` format. The mask is reconstructed from
/// the shape line, so the file stays self-describing.
pub fn read_field_string(text: &str) -> Result<HeightField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
    if header.trim() != "# translator-field v1" {
        return Err(Error::Format(format!("unexpected header {header:?}")));
    }
    let meta = lines.next().ok_or_else(|| Error::Format("missing size line".into()))?;
    let toks: Vec<&str> = meta.split_whitespace().collect();
    if toks.len() != 6 {
        return Err(Error::Format("size line must hold nx ny x0 y0 dx dy".into()));
    }
    let nx: usize = toks[0]
        .parse()
        .map_err(|_| Error::Format(format!("bad nx {:?}", toks[0])))?;
    let ny: usize = toks[1]
        .parse()
        .map_err(|_| Error::Format(format!("bad ny {:?}", toks[1])))?;
    let x0 = parse_f64(toks[2])?;
    let y0 = parse_f64(toks[3])?;
    let shape_line = lines.next().ok_or_else(|| Error::Format("missing shape line".into()))?;
    let st: Vec<&str> = shape_line.split_whitespace().collect();
    let domain = match st.as_slice() {
        ["shape", "Rectangle", l, b] => {
            crate::grid::make_rectangle_domain(parse_f64(l)?, parse_f64(b)?, nx, ny)?
        }
        ["shape", "Annulus", a, b, aa, bb] => crate::grid::make_annular_domain(
            parse_f64(a)?,
            parse_f64(b)?,
            parse_f64(aa)?,
            parse_f64(bb)?,
            nx,
            ny,
        )?,
        _ => return Err(Error::Format(format!("unrecognized shape line {shape_line:?}"))),
    };
    if (domain.x0() - x0).abs() > 1e-9 * (1.0 + x0.abs())
        || (domain.y0() - y0).abs() > 1e-9 * (1.0 + y0.abs())
    {
        return Err(Error::Format(
            "recorded origin disagrees with the shape metadata".into(),
        ));
    }
    let mut values = vec![f64::NAN; nx * ny];
    for j in 0..ny {
        let row = lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing value row {j}")))?;
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != nx {
            return Err(Error::Format(format!(
                "row {j} holds {} values, expected {nx}",
                toks.len()
            )));
        }
        for (i, tok) in toks.iter().enumerate() {
            values[j * nx + i] = parse_f64(tok)?;
        }
    }
    HeightField::from_values(domain, values)
}

pub fn read_field_file(path: &Path) -> Result<HeightField> {
    read_field_string(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_annular_domain, make_rectangle_domain};

    #[test]
    fn zero_field_has_nan_sentinel_outside() {
        let d = make_annular_domain(1.0, 1.0, 2.0, 2.0, 9, 9).unwrap();
        let f = HeightField::zero(d);
        assert!(f.value(4, 4).is_nan()); // center of the hole
        assert_eq!(f.value(1, 1), 0.0);
    }

    #[test]
    fn boundary_values_track_node_values() {
        let d = make_rectangle_domain(1.0, 1.0, 5, 5).unwrap();
        let f = HeightField::from_fn(d, |x, y| x + 2.0 * y).unwrap();
        for (k, &(i, j)) in f.domain().boundary_nodes().iter().enumerate() {
            assert_eq!(f.boundary_values()[k], f.value(i, j));
        }
    }

    #[test]
    fn rejects_non_finite_interior() {
        let d = make_rectangle_domain(1.0, 1.0, 5, 5).unwrap();
        let mut values = vec![0.0; d.node_count()];
        values[d.idx(2, 2)] = f64::INFINITY;
        assert!(HeightField::from_values(d, values).is_err());
    }

    #[test]
    fn field_file_roundtrip_rectangle() {
        let d = make_rectangle_domain(1.5, 0.75, 7, 5).unwrap();
        let f = HeightField::from_fn(d, |x, y| (1.0 + x).ln_1p() * 0.1 + y * y).unwrap();
        let s = write_field_string(&f);
        let g = read_field_string(&s).unwrap();
        assert_eq!(f.values().len(), g.values().len());
        for (a, b) in f.values().iter().zip(g.values()) {
            if a.is_nan() {
                assert!(b.is_nan());
            } else {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn field_file_roundtrip_annulus_keeps_nan() {
        let d = make_annular_domain(1.0, 1.0, 2.0, 2.0, 9, 9).unwrap();
        let f = HeightField::zero(d);
        let g = read_field_string(&write_field_string(&f)).unwrap();
        assert!(g.value(4, 4).is_nan());
        assert_eq!(g.domain().interior_nodes().len(), 24);
    }
}
