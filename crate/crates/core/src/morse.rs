//! Minimal foliation functions and tangency counting.
//!
//! A foliation is either the family of vertical planes orthogonal to a
//! horizontal unit vector v (levels of `F_v(p) = v·p`) or the vertical
//! translates of a complete translating graph h (levels of
//! `H(x,y,z) = z - h(x,y)`).
//!
//! For a surface given as a graph u, a vertical-plane leaf is never tangent
//! (the tangent plane of a graph is never vertical), so that count is 0. A
//! graph-family leaf is tangent exactly where `Du = Dh`; tangencies are
//! located by sign-change cells of the vector field `Du - Dh` and counted
//! with winding-number multiplicity, which is robust to flat near-tangencies
//! and survives grid refinement once clusters separate.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::closed_form::ClosedFormFamily;
use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::NodeTag;
use crate::ode::{ProfileCurve, RadialProfile};

/// Complete translating graphs usable as foliation generators.
#[derive(Clone, Debug)]
pub enum GraphKind {
    ClosedForm(ClosedFormFamily),
    /// Bowl sampled from its radial profile, oriented the way the main
    /// equation's solutions open: `h(x,y) = -u_bowl(sqrt(x^2+y^2))`.
    Bowl(RadialProfile),
}

/// A minimal foliation function.
#[derive(Clone, Debug)]
pub enum FoliationFunction {
    /// Levels of `v·p` for a horizontal unit vector.
    VerticalPlane { v: [f64; 2] },
    /// Levels of `z - h(R_{-angle} (x,y))`: the generator rotated about the
    /// z-axis by `angle`.
    GraphFamily { h: GraphKind, angle: f64 },
}

impl FoliationFunction {
    pub fn vertical_plane(v: [f64; 2]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "foliation direction must be a unit horizontal vector, |v| = {norm}"
            )));
        }
        Ok(FoliationFunction::VerticalPlane { v })
    }

    pub fn graph_family(h: GraphKind, angle: f64) -> Self {
        FoliationFunction::GraphFamily { h, angle }
    }

    /// Height of the generator at (x, y), None outside its strip.
    fn generator_value(&self, x: f64, y: f64) -> Option<f64> {
        match self {
            FoliationFunction::VerticalPlane { .. } => None,
            FoliationFunction::GraphFamily { h, angle } => {
                let (c, s) = (angle.cos(), angle.sin());
                let (xr, yr) = (c * x + s * y, -s * x + c * y);
                match h {
                    GraphKind::ClosedForm(fam) => fam.evaluate(xr, yr).ok(),
                    GraphKind::Bowl(p) => {
                        let r = (xr * xr + yr * yr).sqrt();
                        (r <= p.r_max()).then(|| -p.value_at(r))
                    }
                }
            }
        }
    }
}

/// One detected tangency cluster.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// |winding number| of `Du - Dh` around the cluster.
    pub multiplicity: usize,
    /// Cluster bounding box `[x_min, x_max, y_min, y_max]`.
    pub bbox: [f64; 4],
}

/// Tangency count with the context of the Morse–Radó right-hand side when
/// it was computed.
#[derive(Clone, Debug, Default)]
pub struct CriticalPointReport {
    pub points: Vec<CriticalPoint>,
    /// Total count with multiplicity.
    pub total: usize,
    pub rhs: Option<i64>,
    pub q_count: Option<usize>,
    pub a_count: Option<usize>,
    pub euler_char: Option<i64>,
    /// Cluster radius used by the detector (cells).
    pub cluster_radius: usize,
    /// Padded cluster boxes intersect: the radius is too coarse to separate
    /// the tangencies.
    pub overlapping_clusters: bool,
    /// The generator was undefined on part of the domain; the count covers
    /// the overlap only.
    pub restricted: bool,
    /// A winding ring could not be completed for some cluster; its
    /// multiplicity defaulted to 1.
    pub ring_incomplete: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Tangency count of the graph of `u` against the foliation.
///
/// Vertical-plane foliations return 0 on any graph. Graph-family foliations
/// detect cells where both components of `Du - Dh` change sign, cluster
/// them within `cluster_radius` cells, and count each cluster with its
/// winding-number multiplicity.
pub fn count_critical_points_graph(
    field: &HeightField,
    fol: &FoliationFunction,
    cluster_radius: usize,
) -> Result<CriticalPointReport> {
    if matches!(fol, FoliationFunction::VerticalPlane { .. }) {
        // a graph has no vertical tangent planes
        return Ok(CriticalPointReport {
            cluster_radius,
            ..Default::default()
        });
    }
    let d = field.domain();
    let (nx, ny) = (d.nx, d.ny);
    // sample the generator on the grid; both gradients are then taken with
    // the same central differences, so identical surfaces cancel exactly
    let mut hval = vec![f64::NAN; nx * ny];
    let mut restricted = false;
    for j in 0..ny {
        for i in 0..nx {
            if d.tag(i, j) == NodeTag::Exterior {
                continue;
            }
            match fol.generator_value(d.node_x(i), d.node_y(j)) {
                Some(v) => hval[j * nx + i] = v,
                None => restricted = true,
            }
        }
    }
    let mut gx = vec![f64::NAN; nx * ny];
    let mut gy = vec![f64::NAN; nx * ny];
    let mut defined_any = false;
    let mut coincidence_scale = 0.0f64;
    for &(i, j) in d.interior_nodes() {
        let c = j * nx + i;
        let stencil = [c + 1, c - 1, c + nx, c - nx];
        if stencil.iter().any(|&k| hval[k].is_nan()) {
            restricted = true;
            continue;
        }
        let ux = (field.value(i + 1, j) - field.value(i - 1, j)) / (2.0 * d.dx);
        let uy = (field.value(i, j + 1) - field.value(i, j - 1)) / (2.0 * d.dy);
        let hx = (hval[c + 1] - hval[c - 1]) / (2.0 * d.dx);
        let hy = (hval[c + nx] - hval[c - nx]) / (2.0 * d.dy);
        gx[c] = ux - hx;
        gy[c] = uy - hy;
        defined_any = true;
        coincidence_scale = coincidence_scale.max(gx[c].abs()).max(gy[c].abs());
    }
    if !defined_any {
        return Err(Error::OutsideDomain(
            "the foliation generator is undefined on the whole domain".into(),
        ));
    }
    if coincidence_scale < 1e-10 {
        return Err(Error::LeafCoincidence);
    }

    // cells whose four corners straddle zero in both components
    let straddles = |vals: [f64; 4]| -> bool {
        if vals.iter().any(|v| v.is_nan()) {
            return false;
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0 && !(lo == 0.0 && hi == 0.0)
    };
    let mut flagged: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let ids = [j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1];
            let cx = [gx[ids[0]], gx[ids[1]], gx[ids[2]], gx[ids[3]]];
            let cy = [gy[ids[0]], gy[ids[1]], gy[ids[2]], gy[ids[3]]];
            if straddles(cx) && straddles(cy) {
                flagged.push((i, j));
            }
        }
    }

    // cluster flagged cells within the Chebyshev radius
    let mut cluster_of = vec![usize::MAX; flagged.len()];
    let mut clusters: Vec<Vec<(usize, usize)>> = Vec::new();
    for k in 0..flagged.len() {
        if cluster_of[k] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut queue = VecDeque::from([k]);
        cluster_of[k] = id;
        let mut members = vec![flagged[k]];
        while let Some(a) = queue.pop_front() {
            for bk in 0..flagged.len() {
                if cluster_of[bk] != usize::MAX {
                    continue;
                }
                let (ai, aj) = flagged[a];
                let (bi, bj) = flagged[bk];
                let dist = (ai as i64 - bi as i64)
                    .abs()
                    .max((aj as i64 - bj as i64).abs()) as usize;
                if dist <= cluster_radius {
                    cluster_of[bk] = id;
                    members.push(flagged[bk]);
                    queue.push_back(bk);
                }
            }
        }
        clusters.push(members);
    }

    let g_defined = |i: usize, j: usize| !gx[j * nx + i].is_nan();
    let mut report = CriticalPointReport {
        cluster_radius,
        restricted,
        ..Default::default()
    };
    let mut boxes: Vec<(usize, usize, usize, usize)> = Vec::new();
    for members in &clusters {
        let i_lo = members.iter().map(|m| m.0).min().unwrap();
        let i_hi = members.iter().map(|m| m.0).max().unwrap() + 1;
        let j_lo = members.iter().map(|m| m.1).min().unwrap();
        let j_hi = members.iter().map(|m| m.1).max().unwrap() + 1;
        // winding of g along the padded node ring around the cluster
        let mut winding: Option<i64> = None;
        let mut used_box = (i_lo, i_hi, j_lo, j_hi);
        for pad in (0..=2usize).rev() {
            let (pi_lo, pj_lo) = (i_lo.saturating_sub(pad), j_lo.saturating_sub(pad));
            let (pi_hi, pj_hi) = ((i_hi + pad).min(nx - 1), (j_hi + pad).min(ny - 1));
            let mut ring: Vec<(usize, usize)> = Vec::new();
            for i in pi_lo..=pi_hi {
                ring.push((i, pj_lo));
            }
            for j in pj_lo + 1..=pj_hi {
                ring.push((pi_hi, j));
            }
            for i in (pi_lo..pi_hi).rev() {
                ring.push((i, pj_hi));
            }
            for j in (pj_lo + 1..pj_hi).rev() {
                ring.push((pi_lo, j));
            }
            if ring.iter().any(|&(i, j)| !g_defined(i, j)) {
                continue;
            }
            if ring
                .iter()
                .any(|&(i, j)| gx[j * nx + i].abs() + gy[j * nx + i].abs() < 1e-14)
            {
                continue;
            }
            let mut total = 0.0f64;
            let mut prev = gy[ring[0].1 * nx + ring[0].0].atan2(gx[ring[0].1 * nx + ring[0].0]);
            for &(i, j) in ring.iter().skip(1).chain(std::iter::once(&ring[0])) {
                let a = gy[j * nx + i].atan2(gx[j * nx + i]);
                total += wrap_angle(a - prev);
                prev = a;
            }
            winding = Some((total / (2.0 * PI)).round() as i64);
            used_box = (pi_lo, pi_hi, pj_lo, pj_hi);
            break;
        }
        let mult = match winding {
            Some(w) => w.unsigned_abs() as usize,
            None => {
                report.ring_incomplete = true;
                1
            }
        };
        if mult == 0 {
            continue;
        }
        // cluster centroid at cell centers
        let cx: f64 = members
            .iter()
            .map(|&(i, _)| d.node_x(i) + 0.5 * d.dx)
            .sum::<f64>()
            / members.len() as f64;
        let cy: f64 = members
            .iter()
            .map(|&(_, j)| d.node_y(j) + 0.5 * d.dy)
            .sum::<f64>()
            / members.len() as f64;
        let iz = ((cx - d.node_x(0)) / d.dx).round() as usize;
        let jz = ((cy - d.node_y(0)) / d.dy).round() as usize;
        let z = field.value(iz.min(nx - 1), jz.min(ny - 1));
        report.points.push(CriticalPoint {
            x: cx,
            y: cy,
            z,
            multiplicity: mult,
            bbox: [
                d.node_x(i_lo),
                d.node_x(i_hi),
                d.node_y(j_lo),
                d.node_y(j_hi),
            ],
        });
        report.total += mult;
        boxes.push(used_box);
    }
    for a in 0..boxes.len() {
        for b in a + 1..boxes.len() {
            let (ai0, ai1, aj0, aj1) = boxes[a];
            let (bi0, bi1, bj0, bj1) = boxes[b];
            if ai0 <= bi1 && bi0 <= ai1 && aj0 <= bj1 && bj0 <= aj1 {
                report.overlapping_clusters = true;
            }
        }
    }
    Ok(report)
}

/// Tangencies of a rotational profile surface with a vertical-plane
/// foliation: they sit where the surface normal is horizontal, i.e. where
/// `cos θ` crosses zero along the profile, and each crossing contributes the
/// two circle points in the directions ±v.
pub fn count_critical_points_rotational(
    curve: &ProfileCurve,
    v: [f64; 2],
) -> Result<CriticalPointReport> {
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "foliation direction must be a unit horizontal vector, |v| = {norm}"
        )));
    }
    let n = curve.s.len();
    let mut report = CriticalPointReport {
        cluster_radius: 0,
        ..Default::default()
    };
    let cos_t: Vec<f64> = curve.theta.iter().map(|t| t.cos()).collect();
    for k in 0..n - 1 {
        let (a, b) = (cos_t[k], cos_t[k + 1]);
        if a == 0.0 || a * b >= 0.0 {
            continue;
        }
        let w = a / (a - b);
        let r = curve.r[k] * (1.0 - w) + curve.r[k + 1] * w;
        let z = curve.z[k] * (1.0 - w) + curve.z[k + 1] * w;
        for sign in [1.0f64, -1.0] {
            report.points.push(CriticalPoint {
                x: sign * v[0] * r,
                y: sign * v[1] * r,
                z,
                multiplicity: 1,
                bbox: [sign * v[0] * r, sign * v[0] * r, sign * v[1] * r, sign * v[1] * r],
            });
            report.total += 1;
        }
    }
    Ok(report)
}

/// Boundary curves for the Morse–Radó right-hand side. Each strictly convex
/// curve carries exactly one local minimum of `F_v`; a rectangle does too
/// provided v stays at least one degree away from both edge directions
/// (corner minima count once).
#[derive(Clone, Copy, Debug)]
pub enum BoundaryCurve {
    StrictlyConvex,
    AxisRectangle { half_x: f64, half_y: f64 },
}

#[derive(Clone, Debug)]
pub struct RhsReport {
    pub q_count: usize,
    pub a_count: usize,
    pub euler_char: i64,
    pub rhs: i64,
    /// The graph-family bound over nested rectangles is imported as the
    /// constant 8, not recomputed.
    pub imported: bool,
}

pub const GRAPH_FAMILY_ANNULUS_BOUND: i64 = 8;

/// `|Q| - |A| - χ(M ∩ W)`. `surface_min_flags[k]` states whether the k-th
/// boundary minimum of `F_v` is also a local minimum on the surface; the
/// ones that are not make up A.
pub fn morse_rado_rhs(
    boundary: &[BoundaryCurve],
    fol: &FoliationFunction,
    euler_char: i64,
    surface_min_flags: &[bool],
) -> Result<RhsReport> {
    let v = match fol {
        FoliationFunction::VerticalPlane { v } => *v,
        FoliationFunction::GraphFamily { .. } => {
            return Ok(RhsReport {
                q_count: 0,
                a_count: 0,
                euler_char,
                rhs: GRAPH_FAMILY_ANNULUS_BOUND,
                imported: true,
            });
        }
    };
    let one_degree = (PI / 180.0).sin();
    for c in boundary {
        if let BoundaryCurve::AxisRectangle { .. } = c {
            // minima of v·p on an axis rectangle degenerate to a whole edge
            // when v is parallel to it
            if v[0].abs() < one_degree || v[1].abs() < one_degree {
                return Err(Error::InvalidParameter(
                    "foliation direction within 1 degree of a rectangle edge: \
                     the boundary minimum is a segment, not a point"
                        .into(),
                ));
            }
        }
    }
    let q_count = boundary.len();
    if surface_min_flags.len() != q_count {
        return Err(Error::InvalidParameter(format!(
            "need one surface-minimum flag per boundary curve ({q_count}), got {}",
            surface_min_flags.len()
        )));
    }
    let a_count = surface_min_flags.iter().filter(|f| !**f).count();
    Ok(RhsReport {
        q_count,
        a_count,
        euler_char,
        rhs: q_count as i64 - a_count as i64 - euler_char,
        imported: false,
    })
}

/// CSV report: one row per tangency point.
pub fn report_csv(report: &CriticalPointReport) -> String {
    let mut out = String::from("x,y,z,multiplicity\n");
    for p in &report.points {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{}", p.x, p.y, p.z, p.multiplicity);
    }
    let _ = writeln!(out, "# total = {}", report.total);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_rectangle_domain;

    #[test]
    fn vertical_plane_count_is_zero_on_graphs() {
        let d = make_rectangle_domain(1.0, 1.0, 17, 17).unwrap();
        let f = HeightField::from_fn(d, |x, y| 0.5 * x * x - 0.2 * y).unwrap();
        let fol = FoliationFunction::vertical_plane([1.0, 0.0]).unwrap();
        let rep = count_critical_points_graph(&f, &fol, 3).unwrap();
        assert_eq!(rep.total, 0);
    }

    #[test]
    fn leaf_coincidence_detected() {
        let d = make_rectangle_domain(1.0, 0.6, 17, 17).unwrap();
        let fam = ClosedFormFamily::shifted(std::f64::consts::FRAC_PI_4).unwrap();
        let f = HeightField::sample_closed_form(d, fam).unwrap();
        let fol = FoliationFunction::graph_family(
            GraphKind::ClosedForm(ClosedFormFamily::GrimReaper),
            0.0,
        );
        match count_critical_points_graph(&f, &fol, 3) {
            Err(Error::LeafCoincidence) => {}
            other => panic!("expected leaf coincidence, got {other:?}"),
        }
    }

    #[test]
    fn paraboloid_cap_against_grim_reaper_has_one_tangency() {
        // u = -(x^2 + y^2)/2 has Du = (-x, -y); against h = log cos y the
        // unique tangency solves x = 0, y = tan y, i.e. the origin.
        let d = make_rectangle_domain(1.0, 1.0, 33, 33).unwrap();
        let f = HeightField::from_fn(d, |x, y| -0.5 * (x * x + y * y)).unwrap();
        let fol = FoliationFunction::graph_family(
            GraphKind::ClosedForm(ClosedFormFamily::GrimReaper),
            0.0,
        );
        let rep = count_critical_points_graph(&f, &fol, 3).unwrap();
        assert_eq!(rep.total, 1, "points {:?}", rep.points);
        let p = &rep.points[0];
        assert!(p.x.abs() < 0.1 && p.y.abs() < 0.1);
        assert!(p.bbox[0] <= 0.0 && p.bbox[1] >= 0.0);
        assert!(p.bbox[2] <= 0.0 && p.bbox[3] >= 0.0);
    }

    #[test]
    fn monkey_saddle_counts_multiplicity_two() {
        // u - h = x^3 - 3xy^2 has the degenerate saddle gradient
        // 3(x^2 - y^2, -2xy), an isolated zero of winding -2 at the origin
        let d = make_rectangle_domain(1.0, 1.0, 65, 65).unwrap();
        let f = HeightField::from_fn(d.clone(), |x, y| {
            x * x * x - 3.0 * x * y * y + y.cos().ln()
        })
        .unwrap();
        let fol = FoliationFunction::graph_family(
            GraphKind::ClosedForm(ClosedFormFamily::GrimReaper),
            0.0,
        );
        let rep = count_critical_points_graph(&f, &fol, 3).unwrap();
        assert_eq!(rep.total, 2, "points {:?}", rep.points);
        assert!(rep
            .points
            .iter()
            .any(|p| p.bbox[0] <= 0.0 && p.bbox[1] >= 0.0 && p.bbox[2] <= 0.0 && p.bbox[3] >= 0.0));

        // multiplicity is stable under refinement once clusters separate
        let d2 = make_rectangle_domain(1.0, 1.0, 129, 129).unwrap();
        let f2 = HeightField::from_fn(d2, |x, y| x * x * x - 3.0 * x * y * y + y.cos().ln()).unwrap();
        let rep2 = count_critical_points_graph(&f2, &fol, 3).unwrap();
        assert_eq!(rep2.total, rep.total);
    }

    #[test]
    fn rotational_counts_two_neck_points() {
        let c = crate::ode::catenoid_profile(1.0, 3.0, 1e-3).unwrap();
        let rep = count_critical_points_rotational(&c, [1.0, 0.0]).unwrap();
        assert_eq!(rep.total, 2);
        let mut xs: Vec<f64> = rep.points.iter().map(|p| p.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0] + 1.0).abs() < 1e-5);
        assert!((xs[1] - 1.0).abs() < 1e-5);
        assert!(rep.points.iter().all(|p| p.y.abs() < 1e-12));
        assert!(rep.points.iter().all(|p| p.z.abs() < 1e-5));
    }

    #[test]
    fn rotational_quarter_neck_along_y() {
        let c = crate::ode::catenoid_profile(0.25, 2.0, 1e-3).unwrap();
        let rep = count_critical_points_rotational(&c, [0.0, 1.0]).unwrap();
        assert_eq!(rep.total, 2);
        let mut ys: Vec<f64> = rep.points.iter().map(|p| p.y).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ys[0] + 0.25).abs() < 1e-5);
        assert!((ys[1] - 0.25).abs() < 1e-5);
    }

    #[test]
    fn rhs_two_nested_convex_curves() {
        let fol = FoliationFunction::vertical_plane([1.0, 0.0]).unwrap();
        let rep = morse_rado_rhs(
            &[BoundaryCurve::StrictlyConvex, BoundaryCurve::StrictlyConvex],
            &fol,
            0,
            &[true, true],
        )
        .unwrap();
        assert_eq!(rep.rhs, 2);
        assert!(!rep.imported);
    }

    #[test]
    fn rhs_single_disk() {
        let fol = FoliationFunction::vertical_plane([0.6, 0.8]).unwrap();
        let rep = morse_rado_rhs(&[BoundaryCurve::StrictlyConvex], &fol, 1, &[true]).unwrap();
        assert_eq!(rep.rhs, 0);
    }

    #[test]
    fn rhs_rejects_edge_parallel_direction() {
        let fol = FoliationFunction::vertical_plane([1.0, 0.0]).unwrap();
        let res = morse_rado_rhs(
            &[BoundaryCurve::AxisRectangle {
                half_x: 1.0,
                half_y: 1.0,
            }],
            &fol,
            1,
            &[true],
        );
        assert!(res.is_err());
    }

    #[test]
    fn rhs_graph_family_is_imported_eight() {
        let fol = FoliationFunction::graph_family(
            GraphKind::ClosedForm(ClosedFormFamily::GrimReaper),
            0.3,
        );
        let rep = morse_rado_rhs(&[], &fol, 0, &[]).unwrap();
        assert_eq!(rep.rhs, 8);
        assert!(rep.imported);
    }
}
