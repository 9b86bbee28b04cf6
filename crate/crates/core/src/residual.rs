//! Translator PDE residuals and the conformal area functional.
//!
//! A graph `z = u(x,y)` translates under mean curvature flow exactly when
//! `div(Du/W) = -1/W`, `W = sqrt(1+|Du|^2)`; multiplied through by `W^3`
//! this is the strong form
//!
//! ```text
//! (1+u_y^2) u_xx - 2 u_x u_y u_xy + (1+u_x^2) u_yy + t (1 + u_x^2 + u_y^2) = 0
//! ```
//!
//! at `t = 1`. The parameter `t` interpolates from the minimal surface
//! equation (`t = 0`, metric family `e^{-tz} δ` at the euclidean end) to the
//! translator equation. `log cos y` and the tilted profiles satisfy the
//! `t = 1` form exactly, which the oracle tests check at second order.

use crate::error::Result;
use crate::field::HeightField;
use crate::grid::NodeTag;

/// Central-difference derivatives at one interior node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NodeDerivs {
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uyy: f64,
    pub uxy: f64,
}

#[inline]
pub(crate) fn node_derivs(u: &[f64], nx: usize, i: usize, j: usize, dx: f64, dy: f64) -> NodeDerivs {
    let c = j * nx + i;
    let (e, w, n, s) = (c + 1, c - 1, c + nx, c - nx);
    let (ne, nw, se, sw) = (c + nx + 1, c + nx - 1, c - nx + 1, c - nx - 1);
    NodeDerivs {
        ux: (u[e] - u[w]) / (2.0 * dx),
        uy: (u[n] - u[s]) / (2.0 * dy),
        uxx: (u[e] - 2.0 * u[c] + u[w]) / (dx * dx),
        uyy: (u[n] - 2.0 * u[c] + u[s]) / (dy * dy),
        uxy: (u[ne] - u[nw] - u[se] + u[sw]) / (4.0 * dx * dy),
    }
}

#[inline]
pub(crate) fn strong_residual(d: &NodeDerivs, t: f64) -> f64 {
    (1.0 + d.uy * d.uy) * d.uxx - 2.0 * d.ux * d.uy * d.uxy + (1.0 + d.ux * d.ux) * d.uyy
        + t * (1.0 + d.ux * d.ux + d.uy * d.uy)
}

/// Strong-form residual at every interior node, in
/// `domain().interior_nodes()` order. `t = 1` is the translator equation,
/// `t = 0` the minimal surface equation.
pub fn translator_residual(f: &HeightField, t: f64) -> Vec<f64> {
    let d = f.domain();
    let u = f.values();
    d.interior_nodes()
        .iter()
        .map(|&(i, j)| strong_residual(&node_derivs(u, d.nx, i, j, d.dx, d.dy), t))
        .collect()
}

/// Independent divergence-form residual: flux differences of `Du/W` across
/// cell faces plus `t/W` at the node, scaled by `W^3` at the node so the two
/// discretizations approximate the same quantity.
pub fn translator_residual_divergence(f: &HeightField, t: f64) -> Vec<f64> {
    let d = f.domain();
    let u = f.values();
    let (nx, dx, dy) = (d.nx, d.dx, d.dy);
    let flux_x = |i: usize, j: usize| -> f64 {
        // face between (i,j) and (i+1,j)
        let c = j * nx + i;
        let p = (u[c + 1] - u[c]) / dx;
        let q = (u[c + nx] + u[c + nx + 1] - u[c - nx] - u[c - nx + 1]) / (4.0 * dy);
        p / (1.0 + p * p + q * q).sqrt()
    };
    let flux_y = |i: usize, j: usize| -> f64 {
        let c = j * nx + i;
        let q = (u[c + nx] - u[c]) / dy;
        let p = (u[c + 1] + u[c + nx + 1] - u[c - 1] - u[c + nx - 1]) / (4.0 * dx);
        q / (1.0 + p * p + q * q).sqrt()
    };
    d.interior_nodes()
        .iter()
        .map(|&(i, j)| {
            let nd = node_derivs(u, nx, i, j, dx, dy);
            let w2 = 1.0 + nd.ux * nd.ux + nd.uy * nd.uy;
            let w = w2.sqrt();
            let div = (flux_x(i, j) - flux_x(i - 1, j)) / dx + (flux_y(i, j) - flux_y(i, j - 1)) / dy;
            (div + t / w) * w2 * w
        })
        .collect()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Area of the graph of `u` in the conformal metric `e^{-z} δ`:
/// midpoint-rule sum of `e^{-u} sqrt(1+|Du|^2) dx dy` over cells whose four
/// corners are interior or boundary. For `u ≡ 0` this is the euclidean area
/// of the covered region.
pub fn ilmanen_area(f: &HeightField) -> f64 {
    let d = f.domain();
    let u = f.values();
    let mut area = 0.0;
    for j in 0..d.ny - 1 {
        for i in 0..d.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            if corners.iter().any(|&(a, b)| d.tag(a, b) == NodeTag::Exterior) {
                continue;
            }
            let c = d.idx(i, j);
            let (v00, v10, v01, v11) = (u[c], u[c + 1], u[c + d.nx], u[c + d.nx + 1]);
            let mid = 0.25 * (v00 + v10 + v01 + v11);
            let gx = (v10 + v11 - v00 - v01) / (2.0 * d.dx);
            let gy = (v01 + v11 - v00 - v10) / (2.0 * d.dy);
            area += (-mid).exp() * (1.0 + gx * gx + gy * gy).sqrt() * d.dx * d.dy;
        }
    }
    area
}

/// Least-squares slope of `log(err)` against `log(h)`; used by the
/// refinement-order checks.
pub fn fit_log_slope(hs: &[f64], errs: &[f64]) -> Result<f64> {
    assert_eq!(hs.len(), errs.len());
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(crate::error::Error::InvalidParameter(
            "refinement levels must differ".into(),
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::ClosedFormFamily;
    use crate::grid::make_rectangle_domain;
    use crate::grid::make_annular_domain;

    #[test]
    fn flat_field_is_minimal() {
        let d = make_rectangle_domain(1.0, 1.0, 9, 9).unwrap();
        let f = HeightField::zero(d);
        assert_eq!(max_abs(&translator_residual(&f, 0.0)), 0.0);
        // and at t=1 the residual is exactly t at every node
        let r = translator_residual(&f, 1.0);
        assert!(r.iter().all(|&v| v == 1.0));
    }

    fn residual_on_refinements(fam: ClosedFormFamily, l: f64, b: f64, ns: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for &n in ns {
            let d = make_rectangle_domain(l, b, n, n).unwrap();
            let h = d.dx.max(d.dy);
            let f = HeightField::sample_closed_form(d, fam).unwrap();
            hs.push(h);
            errs.push(max_abs(&translator_residual(&f, 1.0)));
        }
        (hs, errs)
    }

    #[test]
    fn grim_reaper_residual_second_order() {
        let (hs, errs) =
            residual_on_refinements(ClosedFormFamily::GrimReaper, 1.0, 1.0, &[65, 129, 257]);
        let slope = fit_log_slope(&hs, &errs).unwrap();
        assert!((1.7..=2.3).contains(&slope), "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn tilted_grim_reaper_residual_second_order() {
        let fam = ClosedFormFamily::tilted(std::f64::consts::PI, true).unwrap();
        let (hs, errs) = residual_on_refinements(fam, 1.5, 2.0, &[65, 129, 257]);
        let slope = fit_log_slope(&hs, &errs).unwrap();
        assert!((1.7..=2.3).contains(&slope), "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn area_of_flat_rectangle() {
        let d = make_rectangle_domain(1.0, 1.0, 33, 33).unwrap();
        let f = HeightField::zero(d);
        assert!((ilmanen_area(&f) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn area_scales_conformally_for_constants() {
        let d = make_rectangle_domain(1.0, 1.0, 17, 17).unwrap();
        let c = 0.8;
        let f = HeightField::from_fn(d, |_, _| c).unwrap();
        assert!((ilmanen_area(&f) - 4.0 * (-c).exp()).abs() < 1e-12);
    }

    #[test]
    fn area_of_flat_annulus() {
        let d = make_annular_domain(1.0, 1.0, 2.0, 2.0, 17, 17).unwrap();
        let f = HeightField::zero(d);
        assert!((ilmanen_area(&f) - 12.0).abs() < 1e-12);
    }
}
