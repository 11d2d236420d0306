//! Planar convex hull and minimum-width strip by rotating calipers.

type P = [f64; 2];

fn cross(o: P, a: P, b: P) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull without collinear vertices (monotone chain).
pub fn convex_hull(points: &[P]) -> Vec<P> {
    let mut pts: Vec<P> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<P> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], *p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<P> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], *p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// The strip `{p : lo ≤ ⟨p, normal⟩ ≤ hi}` of least width containing a set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    pub normal: P,
    pub lo: f64,
    pub hi: f64,
}

impl Strip {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn project(hull: &[P], n: P) -> (f64, f64) {
    hull.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        let v = p[0] * n[0] + p[1] * n[1];
        (a.min(v), b.max(v))
    })
}

/// Minimum-width strip; `None` for an empty input.
pub fn min_width_strip(points: &[P]) -> Option<Strip> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => None,
        1 => {
            let n = [1.0, 0.0];
            let v = hull[0][0];
            Some(Strip { normal: n, lo: v, hi: v })
        }
        2 => {
            let e = [hull[1][0] - hull[0][0], hull[1][1] - hull[0][1]];
            let len = e[0].hypot(e[1]);
            let n = [-e[1] / len, e[0] / len];
            let (lo, hi) = project(&hull, n);
            Some(Strip { normal: n, lo, hi })
        }
        h => {
            let mut best: Option<(f64, usize)> = None;
            let mut j = 1usize;
            for i in 0..h {
                let a = hull[i];
                let b = hull[(i + 1) % h];
                while cross(a, b, hull[(j + 1) % h]) > cross(a, b, hull[j]) {
                    j = (j + 1) % h;
                }
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let w = cross(a, b, hull[j]) / len;
                if best.map_or(true, |(bw, _)| w < bw) {
                    best = Some((w, i));
                }
            }
            let (_, i) = best?;
            let a = hull[i];
            let b = hull[(i + 1) % h];
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let n = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
            let (lo, hi) = project(&hull, n);
            Some(Strip { normal: n, lo, hi })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn square_width() {
        let s = min_width_strip(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(s.width(), 1.0);
    }

    #[test]
    fn degenerate_sets() {
        assert!(min_width_strip(&[]).is_none());
        assert_eq!(min_width_strip(&[[2.0, 3.0]]).unwrap().width(), 0.0);
        let s = min_width_strip(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.5, 0.5]]).unwrap();
        assert!(s.width().abs() < 1e-15);
        assert_eq!(convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).len(), 2);
    }

    #[test]
    fn agrees_with_exhaustive_edges() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(3..40);
            let pts: Vec<P> = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)]).collect();
            let hull = convex_hull(&pts);
            let mut exhaustive = f64::INFINITY;
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let w = hull.iter().map(|p| cross(a, b, *p).abs() / len).fold(0.0, f64::max);
                exhaustive = exhaustive.min(w);
            }
            let s = min_width_strip(&pts).unwrap();
            assert!((s.width() - exhaustive).abs() < 1e-12);
            for p in &pts {
                let v = p[0] * s.normal[0] + p[1] * s.normal[1];
                assert!(v >= s.lo - 1e-12 && v <= s.hi + 1e-12);
            }
        }
    }
}
