//! Limit planes and great circles of the profile.
//!
//! As `x → ±∞` the profile approaches the great circles `C±` cut out by the
//! planes through the origin with normals `B⁺ = (B₁, B₂, B₃)` and
//! `B⁻ = (−B₁, B₂, B₃)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{resolution_floor, BoundCheck};
use crate::constants::{compute_constants, LimitConstants};
use crate::error::{Error, Result};
use crate::frame::{reflect, Trace};
use crate::params::Params;
use crate::vec3::{dot, norm, scale, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleGeom {
    pub b_plus: Vec3,
    pub b_minus: Vec3,
    /// `arccos(B⁺·B⁻) = arccos(1 − 2B₁²)`.
    pub angle_normals: f64,
    /// `π − angle_normals = arccos(2B₁² − 1)`.
    pub angle_circles: f64,
}

fn clamped_acos(v: f64) -> f64 {
    v.clamp(-1.0, 1.0).acos()
}

pub fn build_geometry(lc: &LimitConstants) -> Result<CircleGeom> {
    let len = norm(&lc.b);
    if !(len >= 0.5) {
        return Err(Error::DegenerateGeometry { norm: len });
    }
    if (len - 1.0).abs() > 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "|B| = {len} is not within 1e-3 of 1"
        )));
    }
    let b_plus = scale(&lc.b, 1.0 / len);
    let b_minus = [-b_plus[0], b_plus[1], b_plus[2]];
    let angle_normals = clamped_acos(dot(&b_plus, &b_minus));
    Ok(CircleGeom {
        b_plus,
        b_minus,
        angle_normals,
        angle_circles: PI - angle_normals,
    })
}

fn check_unit(v: &Vec3, tol: f64, what: &str) -> Result<()> {
    let len = norm(v);
    if (len - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a unit vector, |v| = {len}"
        )));
    }
    Ok(())
}

pub fn dist_to_plane(point: &Vec3, normal: &Vec3) -> Result<f64> {
    check_unit(normal, 1e-9, "normal")?;
    Ok(dot(point, normal).abs())
}

/// Chordal distance from a point of the sphere to the great circle with the
/// given normal: `√(2 − 2√(1 − d²))`, `d` the distance to the plane.
pub fn dist_to_circle(point: &Vec3, normal: &Vec3) -> Result<f64> {
    check_unit(point, 1e-6, "point")?;
    let d = dist_to_plane(point, normal)?.min(1.0);
    // 2 − 2√(1 − d²) written without cancellation.
    let r = (1.0 - d * d).sqrt();
    Ok((2.0 * d * d / (1.0 + r)).sqrt())
}

/// Distance envelope `30√2 β/(cα²) |x| e^{−αx²/4}`.
pub fn dist_envelope(p: &Params, x: f64) -> f64 {
    30.0 * 2f64.sqrt() * p.beta / (p.c * p.alpha * p.alpha)
        * x.abs()
        * (-0.25 * p.alpha * x * x).exp()
}

/// Distance from `m(x)` to `C⁺` (x > 0) or `C⁻` (x < 0, via the parity map)
/// against the explicit envelope, factor 1.
pub fn dist_bound_check(
    trace: &Trace,
    lc: &LimitConstants,
    geom: &CircleGeom,
    xs: &[f64],
) -> Result<BoundCheck> {
    let p = &trace.params;
    let fl = resolution_floor(trace, lc);
    let mut defect = Vec::with_capacity(xs.len());
    let mut envelope = Vec::with_capacity(xs.len());
    for &x in xs {
        let ax = x.abs();
        if !(ax >= 1.0 && ax <= trace.x_max) {
            return Err(Error::OutOfRange {
                what: "|x|",
                value: ax,
                lo: 1.0,
                hi: trace.x_max,
            });
        }
        let s = trace.frame_at(ax)?;
        let (m, normal) = if x > 0.0 {
            (s.frame.m, geom.b_plus)
        } else {
            (reflect(&s).frame.m, geom.b_minus)
        };
        defect.push(dist_to_circle(&m, &normal)?);
        envelope.push(dist_envelope(p, x));
    }
    Ok(BoundCheck::new(
        "dist1",
        1.0,
        xs.to_vec(),
        defect,
        envelope,
        vec![fl; xs.len()],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBound {
    /// `β√π/√α`; the bound is claimed only for `c` at or above it.
    pub c_threshold: f64,
    pub applicable: bool,
    pub b1_sq: f64,
    /// `πβ²/(c²α)`.
    pub bound: f64,
    pub angle_circles: f64,
    /// `arccos(−1 + 2πβ²/(c²α))` when the argument lies in `[−1, 1]`.
    pub angle_circles_min: Option<f64>,
    /// Always true when not applicable.
    pub pass: bool,
}

pub fn angle_bound_check(p: &Params, lc: &LimitConstants) -> Result<AngleBound> {
    let geom = build_geometry(lc)?;
    let c_threshold = p.beta * PI.sqrt() / p.alpha.sqrt();
    let applicable = p.c >= c_threshold;
    let b1_sq = geom.b_plus[0] * geom.b_plus[0];
    let bound = PI * p.beta * p.beta / (p.c * p.c * p.alpha);
    let arg = -1.0 + 2.0 * bound;
    let angle_circles_min = (-1.0..=1.0).contains(&arg).then(|| arg.acos());
    // Resolution of B₁² from the extractor's error estimate.
    let slack = 2.0 * geom.b_plus[0].abs() * lc.err_est + lc.err_est * lc.err_est;
    Ok(AngleBound {
        c_threshold,
        applicable,
        b1_sq,
        bound,
        angle_circles: geom.angle_circles,
        angle_circles_min,
        pass: !applicable || b1_sq <= bound + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRow {
    pub c: f64,
    pub alpha: f64,
    pub b1: f64,
    pub angle_normals: f64,
    pub angle_circles: f64,
    pub err_est: f64,
    pub x_used: f64,
    /// Truncation budget prevented reaching `tol`.
    pub flagged: bool,
}

/// Circle angles along a list of `(c, α)` points, computed in parallel.
pub fn angle_limit_scan(points: &[(f64, f64)], tol: f64, budget: f64) -> Result<Vec<AngleRow>> {
    points
        .par_iter()
        .map(|&(c, alpha)| {
            let p = Params::new(c, alpha)?;
            let (_, lc) = compute_constants(&p, tol, None, budget)?;
            let g = build_geometry(&lc)?;
            Ok(AngleRow {
                c,
                alpha,
                b1: lc.b[0],
                angle_normals: g.angle_normals,
                angle_circles: g.angle_circles,
                err_est: lc.err_est,
                x_used: lc.x_used,
                flagged: lc.degraded,
            })
        })
        .collect()
}

/// Whether `angle_circles` increases along the scan.
pub fn increasing_toward_pi(rows: &[AngleRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].angle_circles >= w[0].angle_circles)
        && rows.iter().all(|r| r.angle_circles <= PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_and_circle_distances() {
        let e1 = [1.0, 0.0, 0.0];
        let e3 = [0.0, 0.0, 1.0];
        assert_eq!(dist_to_plane(&e1, &e3).unwrap(), 0.0);
        assert_eq!(dist_to_plane(&e3, &e3).unwrap(), 1.0);
        assert_eq!(dist_to_circle(&e1, &e3).unwrap(), 0.0);
        assert!((dist_to_circle(&e3, &e3).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(dist_to_plane(&e1, &[0.0, 0.0, 2.0]).is_err());
        assert!(dist_to_circle(&[2.0, 0.0, 0.0], &e3).is_err());
    }
}
