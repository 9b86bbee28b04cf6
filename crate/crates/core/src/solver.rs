//! Zero-boundary Dirichlet solves for the translator graph equation.
//!
//! The problem at metric parameter `t` is `translator_residual(u, t) = 0` at
//! interior nodes with `u = 0` on the boundary. Continuation starts from the
//! exact solution `u ≡ 0` at `t = 0` and marches a uniform schedule to
//! `t = 1`, halving the step on Newton failure (up to 10 halvings). Each
//! stage runs damped Newton with the exact 9-point Jacobian of the strong
//! form; the inner linear solves are ILU(0)-preconditioned BiCGSTAB in a
//! fixed iteration order.
//!
//! Symmetry of solutions is verified, never imposed: the solver always works
//! on the full grid.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::{GridDomain, NodeTag};
use crate::linsolve::{bicgstab, ilu0, Csr};
use crate::residual::{node_derivs, strong_residual};

/// Newton/continuation controls.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Max-norm residual target per continuation stage.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Initial step fraction in (0, 1] for the backtracking line search.
    pub damping: f64,
    /// Number of uniform continuation steps from t = 0 to t = 1.
    pub continuation_steps: usize,
    /// Relative tolerance of the inner linear solve.
    pub linear_tol: f64,
    /// Abort threshold on max |u|.
    pub divergence_height: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-12,
            max_newton_iters: 50,
            damping: 1.0,
            continuation_steps: 8,
            linear_tol: 1e-10,
            divergence_height: 1e6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol >= 1e-13) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol = {} must be >= 1e-13",
                self.newton_tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping = {} must lie in (0, 1]",
                self.damping
            )));
        }
        if self.continuation_steps == 0 || self.max_newton_iters == 0 {
            return Err(Error::InvalidParameter(
                "continuation_steps and max_newton_iters must be positive".into(),
            ));
        }
        if !(self.linear_tol > 0.0) || !(self.divergence_height > 0.0) {
            return Err(Error::InvalidParameter(
                "linear_tol and divergence_height must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a continuation solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub field: HeightField,
    pub converged: bool,
    /// Max-norm residual at the last accepted state.
    pub residual_norm: f64,
    pub t_reached: f64,
    /// Total Newton iterations across all continuation stages.
    pub iterations: usize,
    /// Height at node (0,0); NaN when the origin is exterior (annuli).
    pub center_height: f64,
    /// Set when the solve aborted because max |u| crossed `divergence_height`.
    pub height_blow_up: bool,
    /// Failure description for non-converged solves.
    pub diagnostic: Option<String>,
}

struct Stencil {
    /// Interior node index per grid node, usize::MAX elsewhere.
    unknown_of_node: Vec<usize>,
}

fn build_stencil(domain: &GridDomain) -> Stencil {
    let mut unknown_of_node = vec![usize::MAX; domain.node_count()];
    for (k, &(i, j)) in domain.interior_nodes().iter().enumerate() {
        unknown_of_node[domain.idx(i, j)] = k;
    }
    Stencil { unknown_of_node }
}

fn residual_vec(field: &HeightField, t: f64, out: &mut Vec<f64>) {
    let d = field.domain();
    let u = field.values();
    out.clear();
    out.extend(
        d.interior_nodes()
            .iter()
            .map(|&(i, j)| strong_residual(&node_derivs(u, d.nx, i, j, d.dx, d.dy), t)),
    );
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Assemble the Jacobian of the strong-form residual with respect to the
/// interior unknowns. Boundary neighbors contribute to the residual only.
fn assemble_jacobian(field: &HeightField, t: f64, st: &Stencil) -> Csr {
    let d = field.domain();
    let u = field.values();
    let (nx, dx, dy) = (d.nx, d.dx, d.dy);
    let interior = d.interior_nodes();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(interior.len());
    for &(i, j) in interior {
        let nd = node_derivs(u, nx, i, j, dx, dy);
        let ax = 1.0 + nd.uy * nd.uy; // coefficient of uxx
        let ay = 1.0 + nd.ux * nd.ux; // coefficient of uyy
        let d_ux = -2.0 * nd.uy * nd.uxy + 2.0 * nd.ux * nd.uyy + 2.0 * t * nd.ux;
        let d_uy = 2.0 * nd.uy * nd.uxx - 2.0 * nd.ux * nd.uxy + 2.0 * t * nd.uy;
        let d_uxy = -2.0 * nd.ux * nd.uy;
        let c = j * nx + i;
        // (node index, dR/d value)
        let entries = [
            (c, -2.0 * ax / (dx * dx) - 2.0 * ay / (dy * dy)),
            (c + 1, ax / (dx * dx) + d_ux / (2.0 * dx)),
            (c - 1, ax / (dx * dx) - d_ux / (2.0 * dx)),
            (c + nx, ay / (dy * dy) + d_uy / (2.0 * dy)),
            (c - nx, ay / (dy * dy) - d_uy / (2.0 * dy)),
            (c + nx + 1, d_uxy / (4.0 * dx * dy)),
            (c - nx - 1, d_uxy / (4.0 * dx * dy)),
            (c + nx - 1, -d_uxy / (4.0 * dx * dy)),
            (c - nx + 1, -d_uxy / (4.0 * dx * dy)),
        ];
        let mut row = Vec::with_capacity(9);
        for (node, dv) in entries {
            let col = st.unknown_of_node[node];
            if col != usize::MAX {
                row.push((col, dv));
            }
        }
        rows.push(row);
    }
    Csr::from_rows(rows)
}

enum StageFailure {
    NoProgress(String),
    BlowUp,
}

/// Damped Newton at fixed `t`. Returns the iteration count on success.
fn newton_stage(
    field: &mut HeightField,
    t: f64,
    cfg: &SolverConfig,
    st: &Stencil,
) -> std::result::Result<(usize, f64), StageFailure> {
    let n = field.domain().interior_nodes().len();
    let mut rhs = Vec::with_capacity(n);
    residual_vec(field, t, &mut rhs);
    let mut rnorm = max_norm(&rhs);
    let max_linear_iters = (200 + 8 * (n as f64).sqrt() as usize).max(2000);
    for iter in 0..cfg.max_newton_iters {
        if rnorm <= cfg.newton_tol {
            return Ok((iter, rnorm));
        }
        if field.max_abs_value() > cfg.divergence_height {
            return Err(StageFailure::BlowUp);
        }
        let jac = assemble_jacobian(field, t, st);
        let pre = ilu0(&jac).map_err(|e| StageFailure::NoProgress(e.to_string()))?;
        let neg: Vec<f64> = rhs.iter().map(|v| -v).collect();
        let mut delta = vec![0.0; n];
        let lin = bicgstab(&jac, &pre, &neg, &mut delta, cfg.linear_tol, max_linear_iters)
            .map_err(|e| StageFailure::NoProgress(e.to_string()))?;
        log::debug!(
            "newton iter {iter}: t = {t:.6}, residual {rnorm:.3e}, linear iters {}",
            lin.iterations
        );
        // backtracking on the residual max-norm, factor 1/2, accept any decrease
        let base: Vec<f64> = field
            .domain()
            .interior_nodes()
            .iter()
            .map(|&(i, j)| field.value(i, j))
            .collect();
        let mut alpha = cfg.damping;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = base
                .iter()
                .zip(&delta)
                .map(|(u, d)| u + alpha * d)
                .collect();
            field.set_interior(&trial);
            residual_vec(field, t, &mut rhs);
            let rn = max_norm(&rhs);
            if rn.is_finite() && rn < rnorm {
                rnorm = rn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            field.set_interior(&base);
            residual_vec(field, t, &mut rhs);
            log::debug!("newton line search exhausted at t = {t:.6}, residual {rnorm:.3e}");
            return Err(StageFailure::NoProgress(format!(
                "line search exhausted at t = {t}, residual {rnorm:.3e}"
            )));
        }
    }
    if rnorm <= cfg.newton_tol {
        return Ok((cfg.max_newton_iters, rnorm));
    }
    Err(StageFailure::NoProgress(format!(
        "newton did not converge at t = {t}, residual {rnorm:.3e}"
    )))
}

/// Continuation solve on a rectangle or annulus domain with zero boundary
/// values. Non-convergence is reported in the returned [`Solution`], not as
/// an error.
pub fn solve(domain: &GridDomain, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    if domain.interior_nodes().is_empty() {
        return Err(Error::InvalidParameter("domain has no interior nodes".into()));
    }
    let st = build_stencil(domain);
    let mut field = HeightField::zero(domain.clone());
    let mut total_iters = 0usize;
    let mut t = 0.0f64;
    let base_step = 1.0 / cfg.continuation_steps as f64;

    // t = 0 stage: u ≡ 0 solves it exactly, so this normally costs nothing.
    match newton_stage(&mut field, 0.0, cfg, &st) {
        Ok((iters, _)) => total_iters += iters,
        Err(f) => return Ok(failed_solution(field, 0.0, total_iters, f)),
    }

    let mut step = base_step;
    while t < 1.0 - 1e-14 {
        let target = (t + step).min(1.0);
        let mut trial = field.clone();
        match newton_stage(&mut trial, target, cfg, &st) {
            Ok((iters, _)) => {
                field = trial;
                t = target;
                total_iters += iters;
                step = base_step;
            }
            Err(StageFailure::BlowUp) => {
                return Ok(failed_solution(field, t, total_iters, StageFailure::BlowUp));
            }
            Err(f) => {
                step *= 0.5;
                log::debug!("stage at t = {target:.6} failed; halving step to {step:.3e}");
                if step < base_step / 1024.0 {
                    // 10 halvings exhausted
                    return Ok(failed_solution(field, t, total_iters, f));
                }
            }
        }
    }
    let mut rhs = Vec::new();
    residual_vec(&field, 1.0, &mut rhs);
    let residual_norm = max_norm(&rhs);
    let center_height = field.center_value();
    Ok(Solution {
        field,
        converged: residual_norm <= cfg.newton_tol,
        residual_norm,
        t_reached: 1.0,
        iterations: total_iters,
        center_height,
        height_blow_up: false,
        diagnostic: None,
    })
}

fn failed_solution(field: HeightField, t: f64, iterations: usize, failure: StageFailure) -> Solution {
    let mut rhs = Vec::new();
    residual_vec(&field, t, &mut rhs);
    let center_height = field.center_value();
    let (blow_up, diagnostic) = match failure {
        StageFailure::BlowUp => (true, format!("height exceeded the divergence threshold at t = {t}")),
        StageFailure::NoProgress(msg) => (false, msg),
    };
    Solution {
        field,
        converged: false,
        residual_norm: max_norm(&rhs),
        t_reached: t,
        iterations,
        center_height,
        height_blow_up: blow_up,
        diagnostic: Some(diagnostic),
    }
}

/// Single-stage solve at a fixed `t`, starting from zero heights. Exposed
/// for oracle tests; `solve` is the production entry point.
pub fn solve_fixed_t(domain: &GridDomain, t: f64, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let st = build_stencil(domain);
    let mut field = HeightField::zero(domain.clone());
    let outcome = newton_stage(&mut field, t, cfg, &st);
    let mut rhs = Vec::new();
    residual_vec(&field, t, &mut rhs);
    let center_height = field.center_value();
    match outcome {
        Ok((iters, rnorm)) => Ok(Solution {
            field,
            converged: true,
            residual_norm: rnorm,
            t_reached: t,
            iterations: iters,
            center_height,
            height_blow_up: false,
            diagnostic: None,
        }),
        Err(f) => Ok(failed_solution(field, t, 0, f)),
    }
}

/// Zero-boundary solve on the annular region between nested rectangles.
pub fn solve_annulus_family(
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    nx: usize,
    ny: usize,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let domain = crate::grid::make_annular_domain(a, b, aa, bb, nx, ny)?;
    solve(&domain, cfg)
}

/// Node-by-node ordering report for nested solutions.
#[derive(Clone, Debug)]
pub struct OrderingReport {
    /// Min of `hi - lo` over shared interior nodes.
    pub min_diff: f64,
    /// Shared interior nodes where `hi - lo < -tolerance`.
    pub violations: Vec<(usize, usize)>,
    pub tolerance: f64,
    pub shared_nodes: usize,
}

/// Compare two fields on nested grids with equal spacings. `lo`'s region
/// must be contained in `hi`'s and every `lo` node must coincide with an
/// `hi` node.
pub fn compare_fields(lo: &HeightField, hi: &HeightField, tolerance: f64) -> Result<OrderingReport> {
    let (dl, dh) = (lo.domain(), hi.domain());
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * (1.0 + p.abs().max(q.abs()));
    if !close(dl.dx, dh.dx) || !close(dl.dy, dh.dy) {
        return Err(Error::NotNested(format!(
            "spacings differ: ({}, {}) vs ({}, {})",
            dl.dx, dl.dy, dh.dx, dh.dy
        )));
    }
    let off_x = (dl.x0() - dh.x0()) / dh.dx;
    let off_y = (dl.y0() - dh.y0()) / dh.dy;
    if (off_x - off_x.round()).abs() > 1e-6 || (off_y - off_y.round()).abs() > 1e-6 {
        return Err(Error::NotNested("node lattices are not aligned".into()));
    }
    let (off_x, off_y) = (off_x.round() as i64, off_y.round() as i64);
    if off_x < 0
        || off_y < 0
        || off_x as usize + dl.nx > dh.nx
        || off_y as usize + dl.ny > dh.ny
    {
        return Err(Error::NotNested("lo region is not contained in hi region".into()));
    }
    let mut min_diff = f64::INFINITY;
    let mut violations = Vec::new();
    let mut shared = 0usize;
    for &(i, j) in dl.interior_nodes() {
        let (ih, jh) = (i + off_x as usize, j + off_y as usize);
        if dh.tag(ih, jh) != NodeTag::Interior {
            continue;
        }
        shared += 1;
        let diff = hi.value(ih, jh) - lo.value(i, j);
        if diff < min_diff {
            min_diff = diff;
        }
        if diff < -tolerance {
            violations.push((i, j));
        }
    }
    Ok(OrderingReport {
        min_diff,
        violations,
        tolerance,
        shared_nodes: shared,
    })
}

/// Discrete argmax over non-exterior nodes. Exact ties are broken toward
/// the origin: smallest (|x|, |y|, x, y).
pub fn argmax_node(f: &HeightField) -> (usize, usize) {
    let d = f.domain();
    let mut best: Option<((usize, usize), f64)> = None;
    let key = |i: usize, j: usize| {
        let di = (i as i64 - d.ic() as i64).abs();
        let dj = (j as i64 - d.jc() as i64).abs();
        (di, dj, i as i64, j as i64)
    };
    for j in 0..d.ny {
        for i in 0..d.nx {
            if d.tag(i, j) == NodeTag::Exterior {
                continue;
            }
            let v = f.value(i, j);
            match &mut best {
                None => best = Some(((i, j), v)),
                Some((node, bv)) => {
                    if v > *bv || (v == *bv && key(i, j) < key(node.0, node.1)) {
                        *node = (i, j);
                        *bv = v;
                    }
                }
            }
        }
    }
    best.expect("domain has nodes").0
}

/// Reflection-asymmetry magnitudes of a field on a symmetric grid.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryReport {
    /// max |u(x,y) - u(-x,y)|
    pub x_asymmetry: f64,
    /// max |u(x,y) - u(x,-y)|
    pub y_asymmetry: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.x_asymmetry.max(self.y_asymmetry)
    }
}

pub fn symmetrize_check(f: &HeightField) -> SymmetryReport {
    let d = f.domain();
    let mut x_asym = 0.0f64;
    let mut y_asym = 0.0f64;
    for j in 0..d.ny {
        for i in 0..d.nx {
            if d.tag(i, j) == NodeTag::Exterior {
                continue;
            }
            let v = f.value(i, j);
            let mx = f.value(d.nx - 1 - i, j);
            let my = f.value(i, d.ny - 1 - j);
            if mx.is_finite() {
                x_asym = x_asym.max((v - mx).abs());
            }
            if my.is_finite() {
                y_asym = y_asym.max((v - my).abs());
            }
        }
    }
    SymmetryReport {
        x_asymmetry: x_asym,
        y_asymmetry: y_asym,
    }
}

/// Sidecar metadata in `key = value` lines.
pub fn solution_meta_string(sol: &Solution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "converged = {}", sol.converged);
    let _ = writeln!(s, "residual_norm = {:.16e}", sol.residual_norm);
    let _ = writeln!(s, "t_reached = {:.16e}", sol.t_reached);
    let _ = writeln!(s, "iterations = {}", sol.iterations);
    let _ = writeln!(
        s,
        "center_height = {}",
        if sol.center_height.is_nan() {
            "nan".to_string()
        } else {
            format!("{:.16e}", sol.center_height)
        }
    );
    let _ = writeln!(s, "height_blow_up = {}", sol.height_blow_up);
    s
}

pub fn write_solution_meta(sol: &Solution, path: &Path) -> Result<()> {
    std::fs::write(path, solution_meta_string(sol))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_rectangle_domain;
    use crate::residual::{node_derivs, strong_residual};

    /// Finite-difference check of the assembled Jacobian.
    #[test]
    fn jacobian_matches_finite_differences() {
        let d = make_rectangle_domain(1.0, 0.8, 7, 7).unwrap();
        let f0 = HeightField::from_fn(d.clone(), |x, y| 0.3 * (x * 1.7).sin() * (y * 0.9).cos()).unwrap();
        let st = build_stencil(&d);
        let t = 0.7;
        let jac = assemble_jacobian(&f0, t, &st);
        let n = d.interior_nodes().len();
        let eps = 1e-6;
        let res_of = |f: &HeightField| -> Vec<f64> {
            d.interior_nodes()
                .iter()
                .map(|&(i, j)| strong_residual(&node_derivs(f.values(), d.nx, i, j, d.dx, d.dy), t))
                .collect()
        };
        let base: Vec<f64> = d.interior_nodes().iter().map(|&(i, j)| f0.value(i, j)).collect();
        for col in 0..n {
            let mut up = base.clone();
            up[col] += eps;
            let mut fu = f0.clone();
            fu.set_interior(&up);
            let mut dn = base.clone();
            dn[col] -= eps;
            let mut fd = f0.clone();
            fd.set_interior(&dn);
            let (ru, rd) = (res_of(&fu), res_of(&fd));
            for row in 0..n {
                let fd_val = (ru[row] - rd[row]) / (2.0 * eps);
                let mut jv = 0.0;
                for k in jac.row_ptr[row]..jac.row_ptr[row + 1] {
                    if jac.col[k] == col {
                        jv = jac.val[k];
                    }
                }
                assert!(
                    (fd_val - jv).abs() < 1e-5 * (1.0 + jv.abs()),
                    "row {row} col {col}: fd {fd_val} vs jac {jv}"
                );
            }
        }
    }

    #[test]
    fn t_zero_needs_no_iterations() {
        let d = make_rectangle_domain(2.0, 1.0, 9, 9).unwrap();
        let sol = solve_fixed_t(&d, 0.0, &SolverConfig::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.residual_norm, 0.0);
    }

    #[test]
    fn small_rectangle_dome_is_positive_with_origin_max() {
        let d = make_rectangle_domain(2.0, std::f64::consts::FRAC_PI_4, 33, 17).unwrap();
        let sol = solve(&d, &SolverConfig::default()).unwrap();
        assert!(sol.converged, "residual {}", sol.residual_norm);
        assert!(sol.center_height > 0.0);
        for &(i, j) in sol.field.domain().interior_nodes() {
            assert!(sol.field.value(i, j) > 0.0);
        }
        assert_eq!(argmax_node(&sol.field), (d.ic(), d.jc()));
        let sym = symmetrize_check(&sol.field);
        assert!(sym.max() <= 1e-10, "asymmetry {:?}", sym);
    }

    #[test]
    fn argmax_tie_break_prefers_origin() {
        let d = make_rectangle_domain(1.0, 1.0, 9, 9).unwrap();
        let f = HeightField::zero(d.clone());
        assert_eq!(argmax_node(&f), (d.ic(), d.jc()));
    }

    #[test]
    fn compare_rejects_non_nested() {
        let d1 = make_rectangle_domain(1.0, 1.0, 9, 9).unwrap();
        let d2 = make_rectangle_domain(2.0, 1.0, 9, 9).unwrap(); // different dx
        let f1 = HeightField::zero(d1);
        let f2 = HeightField::zero(d2);
        assert!(compare_fields(&f1, &f2, 0.0).is_err());
    }

    #[test]
    fn compare_identical_fields_min_zero() {
        let d = make_rectangle_domain(1.0, 1.0, 9, 9).unwrap();
        let f = HeightField::from_fn(d, |x, y| x * y).unwrap();
        let rep = compare_fields(&f, &f, 0.0).unwrap();
        assert_eq!(rep.min_diff, 0.0);
        assert!(rep.violations.is_empty());
    }
}
