//! Areas of intersections of spherical caps on the unit sphere.
//!
//! A cap is `{u : c . u >= kappa}` with unit centre `c` and `0 <= kappa <= 1`,
//! so its angular radius `acos(kappa)` is at most a right angle and every cap
//! (and every intersection of caps) is spherically convex.
//!
//! The boundary of an intersection is a cycle of small-circle arcs. The arcs
//! are found by intersecting, on each boundary circle, the azimuth intervals
//! that lie inside the other caps. With three arcs meeting at three
//! vertices the area is the spherical triangle on the vertices plus three
//! circular segments; other shapes (lens, a cap with two notches, a single
//! enclosed cap) use Gauss-Bonnet on the arc cycle. Configurations within
//! `CAP_BOUNDARY` of a change of shape are integrated numerically instead.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::numint::quadrature::adaptive_gauss_kronrod;
use crate::tolerances::CAP_BOUNDARY;

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn scaled(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
fn normalized(a: &Vec3) -> Vec3 {
    scaled(a, 1.0 / dot3(a, a).sqrt())
}

/// Angle between unit vectors, accurate for nearly parallel vectors too.
#[inline]
fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    let c = cross(a, b);
    dot3(&c, &c).sqrt().atan2(dot3(a, b))
}

/// Angle `A` of a spherical triangle opposite side `aa`, from the spherical
/// law of cosines `cos A = (cos aa - cos bb cos cc) / (sin bb sin cc)`.
pub fn spherical_angle(aa: f64, bb: f64, cc: f64) -> Result<f64> {
    let inside = |x: f64| x > 0.0 && x < PI;
    let slack = 1e-12;
    if !(inside(aa) && inside(bb) && inside(cc))
        || aa > bb + cc + slack
        || bb > aa + cc + slack
        || cc > aa + bb + slack
        || aa + bb + cc > TAU + slack
    {
        return Err(Error::DegenerateTriangle(aa, bb, cc));
    }
    let cos_a = (aa.cos() - bb.cos() * cc.cos()) / (bb.sin() * cc.sin());
    Ok(cos_a.clamp(-1.0, 1.0).acos())
}

/// Area of the spherical triangle with two sides `theta` enclosing the
/// angle `phi <= pi`.
fn isosceles_area(theta: f64, phi: f64) -> Result<f64> {
    if phi <= 0.0 || theta <= 0.0 {
        return Ok(0.0);
    }
    let cos_base = theta.cos().powi(2) + theta.sin().powi(2) * phi.cos();
    let base = cos_base.clamp(-1.0, 1.0).acos();
    if base <= 0.0 {
        return Ok(0.0);
    }
    if (theta - PI / 2.0).abs() < 1e-15 {
        return Ok(phi);
    }
    let beta = spherical_angle(theta, theta, base)?;
    Ok(phi + 2.0 * beta - PI)
}

/// Area between a small-circle arc of angular radius `theta`, azimuthal
/// extent `phi`, and the great-circle chord joining its ends.
fn segment_area(theta: f64, phi: f64) -> Result<f64> {
    let sector = phi * (1.0 - theta.cos());
    if phi <= PI {
        Ok(sector - isosceles_area(theta, phi)?)
    } else {
        Ok(sector + isosceles_area(theta, TAU - phi)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Cap {
    pub centre: Vec3,
    pub kappa: f64,
}

impl Cap {
    fn sin(&self) -> f64 {
        (1.0 - self.kappa * self.kappa).max(0.0).sqrt()
    }
}

/// Orthonormal pair spanning the plane perpendicular to `c`.
fn frame(c: &Vec3) -> (Vec3, Vec3) {
    let pick = if c[0].abs() < 0.6 {
        [1.0, 0.0, 0.0]
    } else if c[1].abs() < 0.6 {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalized(&cross(c, &pick));
    let e2 = cross(c, &e1);
    (e1, e2)
}

/// Azimuth interval on a circle, `[start, start + len]` mod `2 pi`, with the
/// caps whose boundaries cut it at each end (`None` for a full circle).
#[derive(Clone, Copy, Debug)]
struct Arc {
    start: f64,
    len: f64,
    start_cap: Option<usize>,
    end_cap: Option<usize>,
}

const FULL: Arc = Arc {
    start: 0.0,
    len: TAU,
    start_cap: None,
    end_cap: None,
};

/// The shape of an intersection became ambiguous at the working tolerance.
struct Ambiguous;

/// Azimuths `phi` on the circle `cos t * c + sin t * (cos phi e1 + sin phi e2)`
/// that lie in `cap`. `None` means the whole circle, `Some(None)` nothing.
fn azimuth_interval(
    c: &Vec3,
    e: &(Vec3, Vec3),
    cos_t: f64,
    sin_t: f64,
    cap: &Cap,
) -> std::result::Result<Option<Option<(f64, f64)>>, Ambiguous> {
    let g = dot3(c, &cap.centre);
    let x = sin_t * dot3(&e.0, &cap.centre);
    let y = sin_t * dot3(&e.1, &cap.centre);
    let r = x.hypot(y);
    let rhs = cap.kappa - cos_t * g;
    if r < CAP_BOUNDARY {
        if rhs.abs() < CAP_BOUNDARY {
            return Err(Ambiguous);
        }
        return Ok(if rhs <= 0.0 { None } else { Some(None) });
    }
    let t = rhs / r;
    if (t.abs() - 1.0).abs() < CAP_BOUNDARY {
        return Err(Ambiguous);
    }
    if t <= -1.0 {
        return Ok(None);
    }
    if t >= 1.0 {
        return Ok(Some(None));
    }
    let centre = y.atan2(x);
    let half = t.acos();
    Ok(Some(Some(((centre - half).rem_euclid(TAU), 2.0 * half))))
}

/// Intersection of arc lists on one circle.
fn intersect(arcs: &[Arc], other: &Arc) -> std::result::Result<Vec<Arc>, Ambiguous> {
    if other.len >= TAU {
        return Ok(arcs.to_vec());
    }
    let mut out = Vec::new();
    for arc in arcs {
        if arc.len >= TAU {
            out.push(*other);
            continue;
        }
        let s = (other.start - arc.start).rem_euclid(TAU);
        for shift in [s, s - TAU] {
            let lo = shift.max(0.0);
            let hi = (shift + other.len).min(arc.len);
            let ends_close = (shift.abs() < CAP_BOUNDARY && shift != 0.0)
                || (shift + other.len - arc.len).abs() < CAP_BOUNDARY;
            if ends_close || (hi - lo).abs() < CAP_BOUNDARY && hi > lo - CAP_BOUNDARY {
                return Err(Ambiguous);
            }
            if hi <= lo {
                continue;
            }
            out.push(Arc {
                start: (arc.start + lo).rem_euclid(TAU),
                len: hi - lo,
                start_cap: if shift > 0.0 { other.start_cap } else { arc.start_cap },
                end_cap: if shift + other.len < arc.len { other.end_cap } else { arc.end_cap },
            });
        }
    }
    Ok(out)
}

fn point_on(cap: &Cap, e: &(Vec3, Vec3), phi: f64) -> Vec3 {
    let s = cap.sin();
    let (sp, cp) = phi.sin_cos();
    let mut p = scaled(&cap.centre, cap.kappa);
    for (i, x) in p.iter_mut().enumerate() {
        *x += s * (cp * e.0[i] + sp * e.1[i]);
    }
    p
}

/// Area of the intersection of the caps (at most a handful), in steradians.
pub(crate) fn caps_intersection_area(caps: &[Cap]) -> f64 {
    if caps.iter().any(|c| c.kappa >= 1.0) {
        return 0.0;
    }
    // identical centres: only the smallest cap matters
    let mut distinct: Vec<Cap> = Vec::with_capacity(caps.len());
    for cap in caps {
        match distinct
            .iter_mut()
            .find(|d| angle_between(&d.centre, &cap.centre) < 1e-14)
        {
            Some(d) => d.kappa = d.kappa.max(cap.kappa),
            None => distinct.push(*cap),
        }
    }
    match analytic_area(&distinct) {
        Ok(area) => area,
        Err(Ambiguous) => ring_quadrature_area(&distinct),
    }
}

fn analytic_area(caps: &[Cap]) -> std::result::Result<f64, Ambiguous> {
    if caps.len() == 1 {
        return Ok(TAU * (1.0 - caps[0].kappa));
    }
    let theta: Vec<f64> = caps.iter().map(|c| c.kappa.acos()).collect();
    for i in 0..caps.len() {
        for j in 0..i {
            let gap = angle_between(&caps[i].centre, &caps[j].centre) - theta[i] - theta[j];
            if gap.abs() < CAP_BOUNDARY {
                return Err(Ambiguous);
            }
            if gap > 0.0 {
                return Ok(0.0);
            }
        }
    }
    let frames: Vec<(Vec3, Vec3)> = caps.iter().map(|c| frame(&c.centre)).collect();
    let mut boundary: Vec<(usize, Arc)> = Vec::new();
    for (i, cap) in caps.iter().enumerate() {
        let mut arcs = vec![FULL];
        for (j, other) in caps.iter().enumerate() {
            if i == j {
                continue;
            }
            match azimuth_interval(&cap.centre, &frames[i], cap.kappa, cap.sin(), other)? {
                None => {}
                Some(None) => {
                    arcs.clear();
                    break;
                }
                Some(Some((start, len))) => {
                    let arc = Arc {
                        start,
                        len,
                        start_cap: Some(j),
                        end_cap: Some(j),
                    };
                    arcs = intersect(&arcs, &arc)?;
                }
            }
        }
        boundary.extend(arcs.into_iter().map(|a| (i, a)));
    }
    if boundary.is_empty() {
        return Ok(0.0);
    }
    let vertices = boundary.iter().filter(|(_, a)| a.len < TAU).count();
    let three_sided = vertices == 3 && {
        let mut owners: Vec<usize> = boundary.iter().map(|(i, _)| *i).collect();
        owners.sort_unstable();
        owners.dedup();
        owners.len() == 3
    };
    if three_sided {
        if let Ok(area) = triangle_and_segments(caps, &frames, &boundary) {
            return Ok(area);
        }
        return Err(Ambiguous);
    }
    Ok(gauss_bonnet(caps, &frames, &boundary))
}

/// Spherical triangle on the three vertices plus the three circular
/// segments cut off by the sides.
fn triangle_and_segments(
    caps: &[Cap],
    frames: &[(Vec3, Vec3)],
    boundary: &[(usize, Arc)],
) -> Result<f64> {
    let vertex: Vec<Vec3> = boundary
        .iter()
        .map(|(i, a)| point_on(&caps[*i], &frames[*i], a.start))
        .map(|p| normalized(&p))
        .collect();
    let side = |p: usize, q: usize| angle_between(&vertex[p], &vertex[q]);
    let (s01, s12, s20) = (side(0, 1), side(1, 2), side(2, 0));
    let a0 = spherical_angle(s12, s01, s20)?;
    let a1 = spherical_angle(s20, s01, s12)?;
    let a2 = spherical_angle(s01, s12, s20)?;
    let mut area = a0 + a1 + a2 - PI;
    for (i, arc) in boundary {
        area += segment_area(caps[*i].kappa.acos(), arc.len)?;
    }
    Ok(area)
}

/// `2 pi - (total geodesic curvature of the arcs) - (sum of turning angles)`.
fn gauss_bonnet(caps: &[Cap], frames: &[(Vec3, Vec3)], boundary: &[(usize, Arc)]) -> f64 {
    let mut area = TAU;
    for (i, arc) in boundary {
        let cap = &caps[*i];
        area -= arc.len * cap.kappa;
        if let Some(j) = arc.end_cap {
            let x = normalized(&point_on(cap, &frames[*i], arc.start + arc.len));
            let t_in = cross(&cap.centre, &x);
            let t_out = cross(&caps[j].centre, &x);
            let turn = dot3(&cross(&t_in, &t_out), &x).atan2(dot3(&t_in, &t_out));
            area -= turn;
        }
    }
    area.max(0.0)
}

/// Area by integrating, over colatitude `t` around the centre of the
/// smallest cap, the azimuthal measure inside all the other caps.
pub(crate) fn ring_quadrature_area(caps: &[Cap]) -> f64 {
    let Some(base) = caps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.kappa.total_cmp(&b.1.kappa))
        .map(|(i, _)| i)
    else {
        return 4.0 * PI;
    };
    let c = caps[base].centre;
    let e = frame(&c);
    let theta = caps[base].kappa.clamp(-1.0, 1.0).acos();
    let ring = |t: f64| -> f64 {
        let (sin_t, cos_t) = t.sin_cos();
        let mut arcs = vec![FULL];
        for (j, cap) in caps.iter().enumerate() {
            if j == base {
                continue;
            }
            let g = dot3(&c, &cap.centre);
            let x = sin_t * dot3(&e.0, &cap.centre);
            let y = sin_t * dot3(&e.1, &cap.centre);
            let r = x.hypot(y);
            let rhs = cap.kappa - cos_t * g;
            let interval = if r <= 0.0 {
                if rhs <= 0.0 { None } else { Some(None) }
            } else {
                let q = rhs / r;
                if q <= -1.0 {
                    None
                } else if q >= 1.0 {
                    Some(None)
                } else {
                    let half = q.acos();
                    Some(Some(((y.atan2(x) - half).rem_euclid(TAU), 2.0 * half)))
                }
            };
            match interval {
                None => {}
                Some(None) => return 0.0,
                Some(Some((start, len))) => {
                    let other = Arc { start, len, start_cap: None, end_cap: None };
                    arcs = intersect_loose(&arcs, &other);
                }
            }
        }
        arcs.iter().map(|a| a.len).sum::<f64>() * sin_t
    };
    // the integrand has kinks where a boundary circle touches the ring or
    // two boundary circles cross on it
    let mut breaks = vec![0.0, theta];
    for (j, cap) in caps.iter().enumerate() {
        if j == base {
            continue;
        }
        let gap = angle_between(&c, &cap.centre);
        let r = cap.kappa.clamp(-1.0, 1.0).acos();
        breaks.extend([(gap - r).abs(), gap + r]);
        for other in &caps[..j] {
            for u in circle_crossings(cap, other) {
                breaks.push(angle_between(&c, &u));
            }
        }
    }
    breaks.retain(|t| *t >= 0.0 && *t <= theta);
    breaks.sort_by(f64::total_cmp);
    let (area, _) = adaptive_gauss_kronrod(ring, &breaks, 1e-13)
        .unwrap_or_else(|e| match e {
            Error::ToleranceNotMet { estimate, error, .. } => (estimate, error),
            _ => unreachable!("adaptive quadrature only fails on tolerance"),
        });
    area.max(0.0)
}

/// Points where the boundary circles of two caps cross.
fn circle_crossings(p: &Cap, q: &Cap) -> Vec<Vec3> {
    let g = dot3(&p.centre, &q.centre);
    let det = 1.0 - g * g;
    if det < 1e-15 {
        return Vec::new();
    }
    // u = x p + y q + z (p x q) with p . u = kp, q . u = kq, |u| = 1
    let x = (p.kappa - g * q.kappa) / det;
    let y = (q.kappa - g * p.kappa) / det;
    let rest = 1.0 - (x * x + y * y + 2.0 * x * y * g);
    if rest < 0.0 {
        return Vec::new();
    }
    let z = (rest / det).sqrt();
    let n = cross(&p.centre, &q.centre);
    [z, -z]
        .iter()
        .map(|&z| std::array::from_fn(|i| x * p.centre[i] + y * q.centre[i] + z * n[i]))
        .collect()
}

/// [`intersect`] without the ambiguity guard.
fn intersect_loose(arcs: &[Arc], other: &Arc) -> Vec<Arc> {
    let mut out = Vec::new();
    for arc in arcs {
        if arc.len >= TAU {
            out.push(*other);
            continue;
        }
        let s = (other.start - arc.start).rem_euclid(TAU);
        for shift in [s, s - TAU] {
            let lo = shift.max(0.0);
            let hi = (shift + other.len).min(arc.len);
            if hi > lo {
                out.push(Arc { start: arc.start + lo, len: hi - lo, start_cap: None, end_cap: None });
            }
        }
    }
    out
}
