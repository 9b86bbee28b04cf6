//! Rotationally invariant translators: the bowl profile ODE and the
//! translating-catenoid profile system, both integrated with the classical
//! 4-stage one-step scheme at fixed step.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Radial graph profile: `u(0) = u'(0) = 0`, `u'' = (1+u'^2)(1 - u'/r)`,
/// sampled at `r = k h`. Near the axis `u = r^2/4 + r^4/128 + O(r^6)`; the
/// first step is bootstrapped from that series.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub step: f64,
}

impl RadialProfile {
    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn bracket(&self, r: f64) -> usize {
        let k = (r / self.step).floor() as usize;
        k.min(self.r.len() - 2)
    }

    /// Cubic Hermite interpolation of the height.
    pub fn value_at(&self, r: f64) -> f64 {
        assert!(r >= 0.0 && r <= self.r_max() + 1e-12, "r = {r} out of range");
        let k = self.bracket(r);
        let h = self.step;
        let s = (r - self.r[k]) / h;
        let (u0, u1, m0, m1) = (self.u[k], self.u[k + 1], self.du[k] * h, self.du[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * u0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * u1
            + (s3 - s2) * m1
    }

    /// Interpolated radial slope.
    pub fn slope_at(&self, r: f64) -> f64 {
        assert!(r >= 0.0 && r <= self.r_max() + 1e-12);
        let k = self.bracket(r);
        let s = (r - self.r[k]) / self.step;
        self.du[k] * (1.0 - s) + self.du[k + 1] * s
    }
}

fn bowl_rhs(r: f64, u_slope: f64) -> f64 {
    (1.0 + u_slope * u_slope) * (1.0 - u_slope / r)
}

/// Integrate the bowl profile on `[0, r_max]`.
pub fn bowl_profile(r_max: f64, h: f64) -> Result<RadialProfile> {
    if !(r_max > 0.0) {
        return Err(Error::InvalidParameter(format!("r_max = {r_max} must be positive")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    if h > 0.02 {
        return Err(Error::InvalidParameter(format!(
            "step h = {h} too large for a stable bowl integration (need h <= 0.02)"
        )));
    }
    let n = (r_max / h).ceil() as usize;
    let mut r = Vec::with_capacity(n + 1);
    let mut u = Vec::with_capacity(n + 1);
    let mut du = Vec::with_capacity(n + 1);
    r.push(0.0);
    u.push(0.0);
    du.push(0.0);
    // series bootstrap over the removable singularity at r = 0
    let r1 = h;
    let mut uu = r1 * r1 / 4.0 + r1.powi(4) / 128.0;
    let mut up = r1 / 2.0 + r1.powi(3) / 32.0;
    r.push(r1);
    u.push(uu);
    du.push(up);
    let mut rr = r1;
    for _ in 1..n {
        let k1u = up;
        let k1p = bowl_rhs(rr, up);
        let k2u = up + 0.5 * h * k1p;
        let k2p = bowl_rhs(rr + 0.5 * h, up + 0.5 * h * k1p);
        let k3u = up + 0.5 * h * k2p;
        let k3p = bowl_rhs(rr + 0.5 * h, up + 0.5 * h * k2p);
        let k4u = up + h * k3p;
        let k4p = bowl_rhs(rr + h, up + h * k3p);
        uu += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        rr += h;
        if !up.is_finite() || !uu.is_finite() {
            return Err(Error::IntegrationAborted(format!(
                "bowl profile lost finiteness at r = {rr}"
            )));
        }
        r.push(rr);
        u.push(uu);
        du.push(up);
    }
    Ok(RadialProfile { r, u, du, step: h })
}

/// Arclength profile of a translating catenoid with neck radius `lambda`:
/// `r' = cos θ, z' = sin θ, θ' = -sin θ / r - cos θ`, with `r(0) = λ`,
/// `θ(0) = π/2`, `z(0) = 0`, integrated in both arclength directions.
///
/// Samples run from `s = -s_max` to `s = +s_max`; `neck_index` marks `s = 0`.
/// The two wings are genuinely different curves (the translation direction
/// breaks the up/down symmetry); what is shared is the neck: `r >= λ` with
/// equality only at `s = 0`.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    pub neck_radius: f64,
    pub neck_index: usize,
    pub step: f64,
}

fn catenoid_rhs(state: [f64; 3]) -> [f64; 3] {
    let [r, _z, theta] = state;
    [theta.cos(), theta.sin(), -theta.sin() / r - theta.cos()]
}

fn rk4_step(state: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = catenoid_rhs(state);
    let mid1 = [
        state[0] + 0.5 * h * k1[0],
        state[1] + 0.5 * h * k1[1],
        state[2] + 0.5 * h * k1[2],
    ];
    let k2 = catenoid_rhs(mid1);
    let mid2 = [
        state[0] + 0.5 * h * k2[0],
        state[1] + 0.5 * h * k2[1],
        state[2] + 0.5 * h * k2[2],
    ];
    let k3 = catenoid_rhs(mid2);
    let end = [
        state[0] + h * k3[0],
        state[1] + h * k3[1],
        state[2] + h * k3[2],
    ];
    let k4 = catenoid_rhs(end);
    [
        state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        state[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

pub fn catenoid_profile(lambda: f64, s_max: f64, h: f64) -> Result<ProfileCurve> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "neck radius lambda = {lambda} must be positive"
        )));
    }
    if !(s_max > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter("s_max and h must be positive".into()));
    }
    if h > lambda / 20.0 {
        return Err(Error::InvalidParameter(format!(
            "step h = {h} too large for neck radius {lambda} (need h <= lambda/20)"
        )));
    }
    let n = (s_max / h).ceil() as usize;
    let total = 2 * n + 1;
    let mut s = vec![0.0; total];
    let mut r = vec![0.0; total];
    let mut z = vec![0.0; total];
    let mut theta = vec![0.0; total];
    let neck = [lambda, 0.0, std::f64::consts::FRAC_PI_2];
    s[n] = 0.0;
    r[n] = neck[0];
    z[n] = neck[1];
    theta[n] = neck[2];
    for dir in [1i64, -1i64] {
        let mut state = neck;
        for k in 1..=n {
            state = rk4_step(state, dir as f64 * h);
            if state[0] < 1e-9 {
                return Err(Error::IntegrationAborted(format!(
                    "profile hit the rotation axis at s = {} (orientation/sign error)",
                    dir as f64 * k as f64 * h
                )));
            }
            let idx = (n as i64 + dir * k as i64) as usize;
            s[idx] = dir as f64 * k as f64 * h;
            r[idx] = state[0];
            z[idx] = state[1];
            theta[idx] = state[2];
        }
    }
    Ok(ProfileCurve {
        s,
        r,
        z,
        theta,
        neck_radius: lambda,
        neck_index: n,
        step: h,
    })
}

/// Necksize of a rotational surface: min over s of r(s). For catenoid
/// profiles this equals the neck radius; a radial graph meets the axis, so
/// the degenerate answer there is 0.
pub fn necksize_rotational(c: &ProfileCurve) -> f64 {
    c.r.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Pointwise defect `|H + e3·ν|` along the curve, computed from
/// finite-difference geometry of `(r(s), z(s))` alone (the tangent angle is
/// re-derived from the samples, making the check independent of the
/// integrated θ). The surface normal used is `ν = (sinθ cosφ, sinθ sinφ, -cosθ)`,
/// horizontal and outward at the neck.
pub fn curvature_defect(c: &ProfileCurve) -> Vec<f64> {
    let n = c.s.len();
    let h = c.step;
    if n < 5 {
        return Vec::new();
    }
    let mut theta_geo = vec![0.0; n];
    for k in 1..n - 1 {
        let dr = (c.r[k + 1] - c.r[k - 1]) / (2.0 * h);
        let dz = (c.z[k + 1] - c.z[k - 1]) / (2.0 * h);
        theta_geo[k] = dz.atan2(dr);
    }
    let mut defect = Vec::with_capacity(n - 4);
    for k in 2..n - 2 {
        let dtheta = (theta_geo[k + 1] - theta_geo[k - 1]) / (2.0 * h);
        let t = theta_geo[k];
        // H = -θ' - sinθ/r, e3·ν = -cosθ
        defect.push((-dtheta - t.sin() / c.r[k] - t.cos()).abs());
    }
    defect
}

/// Height function of one wing: samples re-indexed by increasing radius.
#[derive(Clone, Debug)]
pub struct WingHeight {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
}

impl WingHeight {
    pub fn r_range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    /// Linear interpolation; radii must be inside `r_range`.
    pub fn z_at(&self, r: f64) -> f64 {
        let k = match self.r.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(k) => return self.z[k],
            Err(k) => k,
        };
        assert!(k > 0 && k < self.r.len(), "r = {r} outside the wing");
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let w = (r - r0) / (r1 - r0);
        self.z[k - 1] * (1.0 - w) + self.z[k] * w
    }
}

/// Split the profile at the neck into its two wings. Radius is strictly
/// monotone along each wing away from the neck, so each wing is a graph
/// over `r`.
pub fn wing_heights(c: &ProfileCurve) -> (WingHeight, WingHeight) {
    let n = c.neck_index;
    let upper = WingHeight {
        r: c.r[n..].to_vec(),
        z: c.z[n..].to_vec(),
    };
    let mut r_lo: Vec<f64> = c.r[..=n].to_vec();
    let mut z_lo: Vec<f64> = c.z[..=n].to_vec();
    r_lo.reverse();
    z_lo.reverse();
    (upper, WingHeight { r: r_lo, z: z_lo })
}

/// Best-offset sup distance between a wing and the bowl profile oriented
/// the way the wings open: minimizes `sup_r |z_wing(r) + u_bowl(r) - c|`
/// over the vertical offset `c`, sampling `samples` radii in `[r_lo, r_hi]`.
pub fn wing_bowl_distance(
    wing: &WingHeight,
    bowl: &RadialProfile,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..samples {
        let r = r_lo + (r_hi - r_lo) * k as f64 / (samples - 1) as f64;
        let d = wing.z_at(r) + bowl.value_at(r);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (hi - lo) / 2.0
}

/// CSV with columns `s,r,z,theta` (17 significant digits).
pub fn profile_csv(c: &ProfileCurve) -> String {
    let mut out = String::from("s,r,z,theta\n");
    for k in 0..c.s.len() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            c.s[k], c.r[k], c.z[k], c.theta[k]
        );
    }
    out
}

pub fn write_profile_csv(c: &ProfileCurve, path: &Path) -> Result<()> {
    std::fs::write(path, profile_csv(c))?;
    Ok(())
}

/// CSV with columns `r,u,du` for the radial profile.
pub fn radial_profile_csv(p: &RadialProfile) -> String {
    let mut out = String::from("r,u,du\n");
    for k in 0..p.r.len() {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p.r[k], p.u[k], p.du[k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowl_initial_conditions_exact() {
        let p = bowl_profile(1.0, 1e-3).unwrap();
        assert_eq!(p.u[0], 0.0);
        assert_eq!(p.du[0], 0.0);
    }

    #[test]
    fn bowl_opens_like_quarter_r_squared() {
        let p = bowl_profile(0.01, 1e-4).unwrap();
        let k = (1e-3 / 1e-4) as usize;
        let r = p.r[k];
        assert!((r - 1e-3).abs() < 1e-15);
        assert!((p.u[k] / (r * r) - 0.25).abs() < 1e-6);
    }

    /// Residual of the profile as a surface of revolution, with the second
    /// derivative taken by finite differences of the slope samples.
    #[test]
    fn bowl_radial_residual_small() {
        let h = 1e-4;
        let p = bowl_profile(1.5, h).unwrap();
        let k = (1.0 / h).round() as usize;
        let upp = (p.du[k + 1] - p.du[k - 1]) / (2.0 * h);
        let res = upp - (1.0 + p.du[k] * p.du[k]) * (1.0 - p.du[k] / p.r[k]);
        assert!(res.abs() < 1e-8, "residual {res}");
    }

    #[test]
    fn bowl_slope_positive_and_entire() {
        let p = bowl_profile(50.0, 5e-3).unwrap();
        assert!(p.du.iter().skip(1).all(|&v| v > 0.0));
        assert!(p.du.last().unwrap().is_finite());
    }

    #[test]
    fn bowl_rejects_coarse_step() {
        assert!(bowl_profile(1.0, 0.5).is_err());
    }

    #[test]
    fn bowl_refinement_is_fourth_order() {
        // coarse steps keep the truncation error above roundoff
        let hs = [1.6e-2, 8e-3, 4e-3];
        let reference = bowl_profile(2.0, 1e-3).unwrap();
        let target = reference.value_at(2.0);
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| (bowl_profile(2.0, h).unwrap().value_at(2.0) - target).abs())
            .collect();
        let slope = crate::residual::fit_log_slope(&hs, &errs).unwrap();
        assert!((2.5..=4.5).contains(&slope), "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn catenoid_neck_data_exact() {
        let c = catenoid_profile(1.0, 2.0, 1e-3).unwrap();
        assert_eq!(c.r[c.neck_index], 1.0);
        assert_eq!(c.z[c.neck_index], 0.0);
        assert_eq!(c.theta[c.neck_index], std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn catenoid_radius_minimum_at_neck() {
        let c = catenoid_profile(0.25, 3.0, 1e-4).unwrap();
        assert_eq!(necksize_rotational(&c), 0.25);
        let min_idx = c
            .r
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(min_idx, c.neck_index);
        for (k, &r) in c.r.iter().enumerate() {
            if k != c.neck_index {
                assert!(r > 0.25);
            }
        }
    }

    #[test]
    fn catenoid_curvature_defect_small() {
        let c = catenoid_profile(1.0, 5.0, 1e-4).unwrap();
        let d = curvature_defect(&c);
        let max = d.iter().cloned().fold(0.0f64, f64::max);
        assert!(max < 1e-6, "max defect {max}");
    }

    #[test]
    fn catenoid_wings_are_radius_monotone() {
        let c = catenoid_profile(0.5, 4.0, 1e-4).unwrap();
        let (up, lo) = wing_heights(&c);
        for w in [&up, &lo] {
            for k in 1..w.r.len() {
                assert!(w.r[k] >= w.r[k - 1]);
            }
        }
    }

    #[test]
    fn catenoid_rejects_coarse_step() {
        assert!(catenoid_profile(0.01, 1.0, 1e-2).is_err());
    }

    #[test]
    fn small_neck_wings_approach_bowl() {
        let c = catenoid_profile(0.01, 9.0, 1e-4).unwrap();
        let bowl = bowl_profile(3.5, 1e-3).unwrap();
        let (up, lo) = wing_heights(&c);
        for wing in [&up, &lo] {
            let (_, r_hi) = wing.r_range();
            assert!(r_hi > 3.0, "wing too short: r_max = {r_hi}");
            let d = wing_bowl_distance(wing, &bowl, 1.0, 3.0, 201);
            assert!(d < 0.05, "wing-bowl distance {d}");
        }
    }
}
