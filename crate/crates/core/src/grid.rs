//! Uniform planar grids with interior/boundary/exterior masks.
//!
//! Two region shapes are supported: the solid rectangle `[-L,L] x [-b,b]`
//! and the rectangular annulus between nested rectangles. Both are centered
//! at the origin and require odd node counts so that `(0,0)` is a node and
//! the mask is exactly symmetric under both axis reflections.

use crate::error::{Error, Result};

/// Per-node classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    Boundary,
    Exterior,
}

/// Continuous region a grid discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeMeta {
    /// `[-half_x, half_x] x [-half_y, half_y]`.
    Rectangle { half_x: f64, half_y: f64 },
    /// Region between `[-outer_x,outer_x] x [-outer_y,outer_y]` and the open
    /// inner rectangle `(-inner_x,inner_x) x (-inner_y,inner_y)`.
    Annulus {
        inner_x: f64,
        inner_y: f64,
        outer_x: f64,
        outer_y: f64,
    },
}

/// Uniform grid plus node mask.
///
/// Node `(i, j)` sits at `(node_x(i), node_y(j))`; coordinates are computed
/// from the signed index distance to the center node, so mirror-image nodes
/// have exactly opposite coordinates.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub shape: ShapeMeta,
    mask: Vec<NodeTag>,
    interior: Vec<(usize, usize)>,
    boundary: Vec<(usize, usize)>,
}

impl GridDomain {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn tag(&self, i: usize, j: usize) -> NodeTag {
        self.mask[self.idx(i, j)]
    }

    /// Center node index along x (the grid is centered at the origin).
    #[inline]
    pub fn ic(&self) -> usize {
        (self.nx - 1) / 2
    }

    #[inline]
    pub fn jc(&self) -> usize {
        (self.ny - 1) / 2
    }

    #[inline]
    pub fn node_x(&self, i: usize) -> f64 {
        (i as f64 - self.ic() as f64) * self.dx
    }

    #[inline]
    pub fn node_y(&self, j: usize) -> f64 {
        (j as f64 - self.jc() as f64) * self.dy
    }

    pub fn x0(&self) -> f64 {
        self.node_x(0)
    }

    pub fn y0(&self) -> f64 {
        self.node_y(0)
    }

    /// Interior nodes in a fixed deterministic order (row-major, j outer).
    pub fn interior_nodes(&self) -> &[(usize, usize)] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[(usize, usize)] {
        &self.boundary
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Every interior node must have all 8 neighbors interior or boundary.
    pub fn check_mask_invariant(&self) -> Result<()> {
        for &(i, j) in &self.interior {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
                        return Err(Error::Numerical(format!(
                            "interior node ({i},{j}) touches the grid edge"
                        )));
                    }
                    if self.tag(ii as usize, jj as usize) == NodeTag::Exterior {
                        return Err(Error::Numerical(format!(
                            "interior node ({i},{j}) has an exterior neighbor"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn from_mask(nx: usize, ny: usize, dx: f64, dy: f64, shape: ShapeMeta, mask: Vec<NodeTag>) -> Self {
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                match mask[j * nx + i] {
                    NodeTag::Interior => interior.push((i, j)),
                    NodeTag::Boundary => boundary.push((i, j)),
                    NodeTag::Exterior => {}
                }
            }
        }
        GridDomain {
            nx,
            ny,
            dx,
            dy,
            shape,
            mask,
            interior,
            boundary,
        }
    }
}

fn require_odd(name: &str, n: usize) -> Result<()> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!("{name} = {n} must be >= 5")));
    }
    if n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "{name} = {n} must be odd so the grid is symmetric about the origin"
        )));
    }
    Ok(())
}

/// Grid over the rectangle `[-l, l] x [-b, b]` with `dx = 2l/(nx-1)`,
/// `dy = 2b/(ny-1)`. Node counts must be odd and at least 5.
pub fn make_rectangle_domain(l: f64, b: f64, nx: usize, ny: usize) -> Result<GridDomain> {
    if !(l > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rectangle half-widths must be positive, got L = {l}, b = {b}"
        )));
    }
    require_odd("nx", nx)?;
    require_odd("ny", ny)?;
    let dx = 2.0 * l / (nx - 1) as f64;
    let dy = 2.0 * b / (ny - 1) as f64;
    let mut mask = vec![NodeTag::Interior; nx * ny];
    for i in 0..nx {
        mask[i] = NodeTag::Boundary;
        mask[(ny - 1) * nx + i] = NodeTag::Boundary;
    }
    for j in 0..ny {
        mask[j * nx] = NodeTag::Boundary;
        mask[j * nx + nx - 1] = NodeTag::Boundary;
    }
    Ok(GridDomain::from_mask(
        nx,
        ny,
        dx,
        dy,
        ShapeMeta::Rectangle {
            half_x: l,
            half_y: b,
        },
        mask,
    ))
}

/// Smallest odd `n >= lo` such that `inner*(n-1)/(2*outer)` is an integer.
fn smallest_aligned(inner: f64, outer: f64, lo: usize) -> Option<usize> {
    let mut n = if lo % 2 == 0 { lo + 1 } else { lo };
    while n < 100_000 {
        let k = inner * (n - 1) as f64 / (2.0 * outer);
        if (k - k.round()).abs() < 1e-9 && k.round() >= 1.0 {
            return Some(n);
        }
        n += 2;
    }
    None
}

/// Grid over the annular region between the rectangles with half-widths
/// `(a, b)` (inner) and `(aa, bb)` (outer). Spacings are `dx = 2*aa/(nx-1)`,
/// `dy = 2*bb/(ny-1)`; both rectangle traces must land exactly on nodes,
/// otherwise the call is rejected naming the smallest compatible node counts.
pub fn make_annular_domain(
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    nx: usize,
    ny: usize,
) -> Result<GridDomain> {
    if !(a > 0.0) || !(b > 0.0) || !(a < aa) || !(b < bb) {
        return Err(Error::InvalidParameter(format!(
            "annulus requires 0 < a < A and 0 < b < B, got a={a}, b={b}, A={aa}, B={bb}"
        )));
    }
    require_odd("nx", nx)?;
    require_odd("ny", ny)?;
    let dx = 2.0 * aa / (nx - 1) as f64;
    let dy = 2.0 * bb / (ny - 1) as f64;
    let kx = a / dx;
    let ky = b / dy;
    let aligned_x = (kx - kx.round()).abs() < 1e-9;
    let aligned_y = (ky - ky.round()).abs() < 1e-9;
    if !aligned_x || !aligned_y {
        return Err(Error::IncompatibleGrid {
            message: format!(
                "inner rectangle is not node-aligned (a/dx = {kx}, b/dy = {ky}); \
                 smallest compatible counts: nx = {:?}, ny = {:?}",
                smallest_aligned(a, aa, nx),
                smallest_aligned(b, bb, ny)
            ),
            suggested_nx: smallest_aligned(a, aa, nx),
            suggested_ny: smallest_aligned(b, bb, ny),
        });
    }
    let ka = kx.round() as usize;
    let kb = ky.round() as usize;
    let (ic, jc) = ((nx - 1) / 2, (ny - 1) / 2);
    if ka == 0 || kb == 0 || ka >= ic || kb >= jc {
        return Err(Error::IncompatibleGrid {
            message: format!("inner rectangle trace at ({ka},{kb}) index units leaves no interior ring"),
            suggested_nx: None,
            suggested_ny: None,
        });
    }
    let mut mask = vec![NodeTag::Interior; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let jx = (i as i64 - ic as i64).unsigned_abs() as usize;
            let jy = (j as i64 - jc as i64).unsigned_abs() as usize;
            let tag = if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                NodeTag::Boundary
            } else if jx < ka && jy < kb {
                NodeTag::Exterior
            } else if (jx == ka && jy <= kb) || (jy == kb && jx <= ka) {
                NodeTag::Boundary
            } else {
                NodeTag::Interior
            };
            mask[j * nx + i] = tag;
        }
    }
    let dom = GridDomain::from_mask(
        nx,
        ny,
        dx,
        dy,
        ShapeMeta::Annulus {
            inner_x: a,
            inner_y: b,
            outer_x: aa,
            outer_y: bb,
        },
        mask,
    );
    dom.check_mask_invariant()?;
    Ok(dom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_5x5_counts() {
        let d = make_rectangle_domain(1.0, 1.0, 5, 5).unwrap();
        assert_eq!(d.node_count(), 25);
        assert_eq!(d.interior_nodes().len(), 9);
        assert_eq!(d.boundary_nodes().len(), 16);
    }

    #[test]
    fn rectangle_spacing() {
        let d = make_rectangle_domain(4.0, std::f64::consts::FRAC_PI_4, 257, 65).unwrap();
        assert_eq!(d.dx, 8.0 / 256.0);
        assert_eq!(d.dx, 0.03125);
        // origin is a node
        assert_eq!(d.node_x(d.ic()), 0.0);
        assert_eq!(d.node_y(d.jc()), 0.0);
    }

    #[test]
    fn rectangle_rejects_even_counts() {
        assert!(make_rectangle_domain(1.0, 1.0, 4, 5).is_err());
        assert!(make_rectangle_domain(1.0, 1.0, 5, 64).is_err());
        assert!(make_rectangle_domain(-1.0, 1.0, 5, 5).is_err());
        assert!(make_rectangle_domain(1.0, 0.0, 5, 5).is_err());
    }

    /// Independent oracle: classify nodes by coordinates instead of index
    /// arithmetic and compare with the constructed mask.
    #[test]
    fn annulus_mask_matches_bruteforce() {
        let (a, b, aa, bb) = (1.0, 1.0, 2.0, 2.0);
        let d = make_annular_domain(a, b, aa, bb, 9, 9).unwrap();
        let eps = 1e-12;
        let mut interior = 0;
        for j in 0..d.ny {
            for i in 0..d.nx {
                let (x, y) = (d.node_x(i), d.node_y(j));
                let expected = if x.abs() < a - eps && y.abs() < b - eps {
                    NodeTag::Exterior
                } else if (x.abs() - aa).abs() < eps
                    || (y.abs() - bb).abs() < eps
                    || ((x.abs() - a).abs() < eps && y.abs() < b + eps)
                    || ((y.abs() - b).abs() < eps && x.abs() < a + eps)
                {
                    NodeTag::Boundary
                } else {
                    NodeTag::Interior
                };
                assert_eq!(d.tag(i, j), expected, "node ({i},{j}) at ({x},{y})");
                if expected == NodeTag::Interior {
                    interior += 1;
                }
            }
        }
        assert_eq!(interior, 24);
        assert_eq!(d.interior_nodes().len(), 24);
    }

    #[test]
    fn annulus_mask_is_reflection_symmetric() {
        let d = make_annular_domain(1.0, 1.0, 2.0, 2.0, 17, 17).unwrap();
        for j in 0..d.ny {
            for i in 0..d.nx {
                assert_eq!(d.tag(i, j), d.tag(d.nx - 1 - i, j));
                assert_eq!(d.tag(i, j), d.tag(i, d.ny - 1 - j));
            }
        }
    }

    #[test]
    fn annulus_rejects_bad_nesting() {
        assert!(make_annular_domain(2.0, 1.0, 1.0, 2.0, 9, 9).is_err());
    }

    #[test]
    fn annulus_rejects_misaligned_spacing_with_suggestion() {
        // a/dx = 1.3*(n-1)/(2*2) is not integral for n = 9
        let err = make_annular_domain(1.3, 1.0, 2.0, 2.0, 9, 9).unwrap_err();
        match err {
            Error::IncompatibleGrid { suggested_nx, .. } => {
                let n = suggested_nx.expect("a suggestion should exist");
                // verify the suggestion actually works
                assert!(make_annular_domain(1.3, 1.0, 2.0, 2.0, n, 9).is_ok());
            }
            other => panic!("expected IncompatibleGrid, got {other:?}"),
        }
    }

    #[test]
    fn annulus_interior_never_touches_exterior() {
        for n in [9, 13, 17, 33] {
            let d = make_annular_domain(1.0, 1.0, 2.0, 2.0, n, n).unwrap();
            d.check_mask_invariant().unwrap();
        }
    }
}
