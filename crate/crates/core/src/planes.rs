//! Vertical subgroups, the splitting `p = p_W · p_V`, cones, distance to
//! vertical planes and the shear map `P_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{Angle, HPoint};
use crate::tolerance::Tolerance;

/// `W = V × R` with `V` the horizontal line at angle θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalSubgroup {
    pub theta: Angle,
}

impl VerticalSubgroup {
    pub fn new(theta: f64) -> Self {
        VerticalSubgroup { theta: Angle::new(theta) }
    }

    /// The `(y, t)`-plane, i.e. θ = π/2.
    pub fn yt() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2)
    }

    /// Unit vector spanning `V`.
    pub fn along(&self) -> [f64; 2] {
        let (c, s) = self.theta.direction();
        [c, s]
    }

    /// Unit normal `n_θ = (sin θ, −cos θ)`; for `W_{y,t}` this is `(1, 0)`.
    pub fn normal(&self) -> [f64; 2] {
        let (c, s) = self.theta.direction();
        [s, if c == 0.0 { 0.0 } else { -c }]
    }

    /// Coordinates `(v, τ)` of a point of `W`, with `w = (v·u, τ)`.
    pub fn coords(&self, w: HPoint) -> (f64, f64) {
        let u = self.along();
        (u[0] * w.x + u[1] * w.y, w.t)
    }

    pub fn from_coords(&self, v: f64, tau: f64) -> HPoint {
        let u = self.along();
        HPoint::new(v * u[0], v * u[1], tau)
    }

    /// Normal offset of the horizontal part; zero exactly on `W`.
    pub fn normal_offset(&self, p: HPoint) -> f64 {
        let n = self.normal();
        n[0] * p.x + n[1] * p.y
    }

    pub fn contains(&self, p: HPoint, tol: Tolerance) -> bool {
        tol.le(self.normal_offset(p).abs(), 0.0)
    }
}

/// Coset `z·W`, stored as `{p : ⟨p_H, n_θ⟩ = offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalPlane {
    pub subgroup: VerticalSubgroup,
    pub offset: f64,
}

impl VerticalPlane {
    pub fn new(subgroup: VerticalSubgroup, offset: f64) -> Self {
        VerticalPlane { subgroup, offset }
    }

    /// The coset `z·W`.
    pub fn through(z: HPoint, subgroup: VerticalSubgroup) -> Self {
        VerticalPlane { subgroup, offset: subgroup.normal_offset(z) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub subgroup: VerticalSubgroup,
    pub alpha: f64,
}

impl ConeSpec {
    pub fn new(subgroup: VerticalSubgroup, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Config(format!("cone aperture must be positive, got {alpha}")));
        }
        Ok(ConeSpec { subgroup, alpha })
    }
}

/// Returns `(p_W, p_V)` with `p = p_W · p_V`.
pub fn split(p: HPoint, w: VerticalSubgroup) -> (HPoint, HPoint) {
    let u = w.along();
    let n = w.normal();
    let v = u[0] * p.x + u[1] * p.y;
    let a = n[0] * p.x + n[1] * p.y;
    // t − 2ω(vu, an) with ω(z, z') = (xy' − yx')/4
    let omega = 0.25 * v * a * (u[0] * n[1] - u[1] * n[0]);
    let pw = HPoint::new(v * u[0], v * u[1], p.t - 2.0 * omega);
    let pv = HPoint::new(a * n[0], a * n[1], 0.0);
    (pw, pv)
}

pub fn project_w(p: HPoint, w: VerticalSubgroup) -> HPoint {
    split(p, w).0
}

pub fn project_v(p: HPoint, w: VerticalSubgroup) -> HPoint {
    split(p, w).1
}

pub fn dist_to_plane(p: HPoint, plane: &VerticalPlane) -> f64 {
    (plane.subgroup.normal_offset(p) - plane.offset).abs()
}

pub fn in_cone(base: HPoint, p: HPoint, cone: &ConeSpec) -> bool {
    let (pw, pv) = split(base.inv() * p, cone.subgroup);
    pw.norm() <= cone.alpha * pv.norm()
}

/// `P_p(w) = π_W(p·w)` for `w` on `W`.
pub fn shear(p: HPoint, w: HPoint, subgroup: VerticalSubgroup) -> Result<HPoint> {
    let off = subgroup.normal_offset(w);
    if !Tolerance::DEFAULT.le(off.abs(), 0.0) {
        return Err(Error::NotInSubgroup(off));
    }
    Ok(project_w(p * w, subgroup))
}

/// `P_p` written in `(v, τ)` coordinates of `W`; no membership check needed.
pub fn shear_coords(p: HPoint, v: f64, tau: f64, subgroup: VerticalSubgroup) -> (f64, f64) {
    subgroup.coords(project_w(p * subgroup.from_coords(v, tau), subgroup))
}

/// Central-difference Jacobian determinant of `P_p` at `(v, τ)`.
pub fn shear_jacobian_det(p: HPoint, v: f64, tau: f64, subgroup: VerticalSubgroup, h: f64) -> f64 {
    let f = |a: f64, b: f64| shear_coords(p, a, b, subgroup);
    let (a1, b1) = f(v + h, tau);
    let (a0, b0) = f(v - h, tau);
    let (c1, d1) = f(v, tau + h);
    let (c0, d0) = f(v, tau - h);
    let j11 = (a1 - a0) / (2.0 * h);
    let j21 = (b1 - b0) / (2.0 * h);
    let j12 = (c1 - c0) / (2.0 * h);
    let j22 = (d1 - d0) / (2.0 * h);
    j11 * j22 - j12 * j21
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::{dist, rotate};
    use proptest::prelude::*;

    fn near(a: HPoint, b: HPoint, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && (a.t - b.t).abs() <= tol
    }

    #[test]
    fn split_example() {
        let (pw, pv) = split(HPoint::new(1.0, 2.0, 3.0), VerticalSubgroup::yt());
        assert_eq!(pw, HPoint::new(0.0, 2.0, 4.0));
        assert_eq!(pv, HPoint::new(1.0, 0.0, 0.0));
        assert_eq!(pw * pv, HPoint::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn split_fixes_each_factor() {
        let w = VerticalSubgroup::new(0.7);
        let on_w = w.from_coords(1.3, -0.4);
        let (a, b) = split(on_w, w);
        assert!(near(a, on_w, 1e-15) && near(b, HPoint::IDENTITY, 1e-15));
        let n = w.normal();
        let on_v = HPoint::new(2.0 * n[0], 2.0 * n[1], 0.0);
        let (a, b) = split(on_v, w);
        assert!(near(a, HPoint::IDENTITY, 1e-15) && near(b, on_v, 1e-15));
    }

    #[test]
    fn plane_distance_examples() {
        let plane = VerticalPlane::new(VerticalSubgroup::yt(), 0.0);
        assert_eq!(dist_to_plane(HPoint::new(3.0, 5.0, 7.0), &plane), 3.0);
        for k in 0..8 {
            let p = VerticalPlane::new(VerticalSubgroup::new(k as f64 * 0.4), 0.0);
            assert_eq!(dist_to_plane(HPoint::new(0.0, 0.0, 9.0), &p), 0.0);
        }
    }

    #[test]
    fn cone_examples() {
        let w = VerticalSubgroup::yt();
        let x = HPoint::new(0.4, 1.0, -2.0);
        assert!(in_cone(x, x, &ConeSpec::new(w, 0.1).unwrap()));
        let p = HPoint::new(1.0, 0.1, 0.0);
        let crit = 0.05f64.sqrt();
        assert!(in_cone(HPoint::IDENTITY, p, &ConeSpec::new(w, crit + 1e-12).unwrap()));
        assert!(!in_cone(HPoint::IDENTITY, p, &ConeSpec::new(w, crit - 1e-9).unwrap()));
        assert!(in_cone(HPoint::IDENTITY, HPoint::new(1.0, 0.0, 0.0), &ConeSpec::new(w, 1e-9).unwrap()));
        assert!(ConeSpec::new(w, 0.0).is_err());
    }

    #[test]
    fn shear_rejects_points_off_w() {
        let w = VerticalSubgroup::yt();
        assert!(matches!(shear(HPoint::IDENTITY, HPoint::new(0.5, 0.0, 0.0), w), Err(Error::NotInSubgroup(_))));
        let pt = HPoint::new(0.0, 0.2, 0.3);
        assert_eq!(shear(HPoint::IDENTITY, pt, w).unwrap(), pt);
    }

    fn c() -> impl Strategy<Value = f64> {
        -5.0..5.0f64
    }

    proptest! {
        #[test]
        fn recomposition(x in c(), y in c(), t in c(), th in 0.0..3.2f64) {
            let p = HPoint::new(x, y, t);
            let w = VerticalSubgroup::new(th);
            let (pw, pv) = split(p, w);
            prop_assert!(near(pw * pv, p, 1e-10));
            prop_assert!(w.contains(pw, Tolerance::DEFAULT));
            prop_assert!(pv.t == 0.0);
            let along = w.along();
            prop_assert!((pv.x * along[0] + pv.y * along[1]).abs() < 1e-12);
        }

        #[test]
        fn projections_idempotent(x in c(), y in c(), t in c(), th in 0.0..3.2f64) {
            let p = HPoint::new(x, y, t);
            let w = VerticalSubgroup::new(th);
            let pw = project_w(p, w);
            let pv = project_v(p, w);
            prop_assert!(near(project_w(pw, w), pw, 1e-12));
            prop_assert!(near(project_v(pv, w), pv, 1e-12));
        }

        #[test]
        fn rotation_equivariance(x in c(), y in c(), t in c(), th in 0.0..3.2f64, rot in -4.0..4.0f64) {
            let p = HPoint::new(x, y, t);
            let w = VerticalSubgroup::new(th);
            let rw = VerticalSubgroup::new(th + rot);
            let lhs = project_w(rotate(rot, p), rw);
            let rhs = rotate(rot, project_w(p, w));
            prop_assert!(near(lhs, rhs, 1e-10));
        }

        #[test]
        fn shear_inverse(px in c(), py in c(), pt in c(), v in c(), tau in c()) {
            let w = VerticalSubgroup::yt();
            let p = HPoint::new(px, py, pt);
            let a = w.from_coords(v, tau);
            let b = shear(p, a, w).unwrap();
            let back = shear(p.inv(), b, w).unwrap();
            prop_assert!(near(back, a, 1e-10));
            let det = shear_jacobian_det(p, v, tau, w, 1e-4);
            prop_assert!((det - 1.0).abs() <= 1e-8);
        }

        #[test]
        fn change_of_midpoint(seed in 0u64..1000, th in 0.0..3.2f64, off in -0.5..0.5f64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = 1.0;
            let pts: Vec<HPoint> = (0..20)
                .map(|_| HPoint::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7), rng.gen_range(-1.0..1.0)))
                .collect();
            let w = VerticalSubgroup::new(th);
            let plane = VerticalPlane::new(w, off);
            let rhs = pts.iter().map(|p| dist_to_plane(*p, &plane)).fold(0.0, f64::max) / r;
            let mut lhs = 0.0f64;
            for a in &pts {
                for b in &pts {
                    lhs = lhs.max(dist_to_plane(*a, &VerticalPlane::through(*b, w)) / r);
                }
            }
            prop_assert!(lhs <= 2.0 * rhs + 1e-12);
            // distance via the metric itself is never below the closed form
            let q = w.from_coords(0.3, 0.1) * HPoint::new(off * w.normal()[0], off * w.normal()[1], 0.0);
            prop_assert!(dist(pts[0], q) + 1e-12 >= dist_to_plane(pts[0], &plane));
        }
    }
}
