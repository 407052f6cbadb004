//! Small planar geometry kernels shared by the other modules.

use std::f64::consts::PI;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed shoelace area; positive for counterclockwise vertex order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(&poly[i], &poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Eigenvalues `(lo, hi)` of a symmetric 2×2 matrix.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let c = m[(1, 1)];
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    let r = half_diff.hypot(b);
    (mean - r, mean + r)
}

/// Unit eigenvector of a symmetric 2×2 matrix for eigenvalue `lambda`.
pub fn sym_eigenvector(m: &Mat2, lambda: f64) -> Vec2 {
    let a = m[(0, 0)] - lambda;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let c = m[(1, 1)] - lambda;
    // rows (a, b) and (b, c) are both orthogonal to the eigenvector
    let v1 = Vec2::new(-b, a);
    let v2 = Vec2::new(-c, b);
    let v = if v1.norm_squared() >= v2.norm_squared() { v1 } else { v2 };
    let n = v.norm();
    if n == 0.0 {
        Vec2::new(1.0, 0.0)
    } else {
        v / n
    }
}

/// Convex hull (counterclockwise, collinear points dropped) by monotone chain.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    // exact orientation test: a tolerance here can pop an extreme point of a
    // nearly vertical run, which is not between its neighbours
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() + 1);
    for p in pts.iter() {
        while hull.len() >= 2
            && cross(&(hull[hull.len() - 1] - hull[hull.len() - 2]), &(p - hull[hull.len() - 2]))
                <= 0.0
        {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&(hull[hull.len() - 1] - hull[hull.len() - 2]), &(p - hull[hull.len() - 2]))
                <= 0.0
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Clips a convex polygon by the half-plane `{x : <n, x> <= c}`.
pub fn clip_halfplane(poly: &[Vec2], n: &Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let k = poly.len();
    for i in 0..k {
        let p = poly[i];
        let q = poly[(i + 1) % k];
        let fp = n.dot(&p) - c;
        let fq = n.dot(&q) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Barycentric coordinates of `p` in triangle `(a, b, c)`.
pub fn barycentric(p: &Vec2, a: &Vec2, b: &Vec2, c: &Vec2) -> [f64; 3] {
    let det = cross(&(b - a), &(c - a));
    let l1 = cross(&(b - p), &(c - p)) / det;
    let l2 = cross(&(c - p), &(a - p)) / det;
    [l1, l2, 1.0 - l1 - l2]
}

/// Area of the intersection of the triangle `(a, b, c)` with the closed disc
/// of radius `r` centered at `center`.
pub fn triangle_disc_intersection_area(tri: [Vec2; 3], center: &Vec2, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let p: Vec<Vec2> = tri.iter().map(|v| v - center).collect();
    let mut s = 0.0;
    for i in 0..3 {
        s += origin_sector_segment_area(&p[i], &p[(i + 1) % 3], r);
    }
    s.abs()
}

/// Signed area of `disc(0, r) ∩ triangle(0, a, b)`.
fn origin_sector_segment_area(a: &Vec2, b: &Vec2, r: f64) -> f64 {
    let cr = cross(a, b);
    if cr.abs() < 1e-300 {
        return 0.0;
    }
    let sign = cr.signum();
    let d = b - a;
    let aa = d.norm_squared();
    let bb = a.dot(&d);
    let cc = a.norm_squared() - r * r;
    let disc = bb * bb - aa * cc;
    let r2 = r * r;
    let sector = |u: &Vec2, v: &Vec2| -> f64 {
        let ang = cross(u, v).atan2(u.dot(v)).abs();
        0.5 * r2 * ang
    };
    let tri_area = |u: &Vec2, v: &Vec2| -> f64 { 0.5 * cross(u, v).abs() };
    if disc <= 0.0 {
        // the line misses the open disc
        return sign * sector(a, b);
    }
    let sq = disc.sqrt();
    let t1 = ((-bb - sq) / aa).clamp(0.0, 1.0);
    let t2 = ((-bb + sq) / aa).clamp(0.0, 1.0);
    let in_a = cc <= 0.0;
    let in_b = b.norm_squared() <= r2;
    let area = if in_a && in_b {
        tri_area(a, b)
    } else if in_a {
        let q = a + d * t2;
        tri_area(a, &q) + sector(&q, b)
    } else if in_b {
        let q = a + d * t1;
        sector(a, &q) + tri_area(&q, b)
    } else if t1 < t2 && (-bb - sq) / aa < 1.0 && (-bb + sq) / aa > 0.0 {
        let q1 = a + d * t1;
        let q2 = a + d * t2;
        sector(a, &q1) + tri_area(&q1, &q2) + sector(&q2, b)
    } else {
        sector(a, b)
    };
    sign * area
}

/// Length of the part of segment `pq` inside the closed disc `(center, r)`.
pub fn segment_disc_overlap(p: &Vec2, q: &Vec2, center: &Vec2, r: f64) -> f64 {
    let d = q - p;
    let len2 = d.norm_squared();
    if len2 == 0.0 || r <= 0.0 {
        return 0.0;
    }
    let m = p - center;
    let b = m.dot(&d);
    let disc = b * b - len2 * (m.norm_squared() - r * r);
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let s0 = ((-b - sq) / len2).max(0.0);
    let s1 = ((-b + sq) / len2).min(1.0);
    (s1 - s0).max(0.0) * len2.sqrt()
}

/// Area of a disc of radius `r` (helper for readability in tests and fixtures).
pub fn disc_area(r: f64) -> f64 {
    PI * r * r
}

/// Fraction of triangle `(p0, p1, p2)` where the affine interpolant of the
/// vertex values `f` is at most `level`.
pub fn sublevel_fraction(f: [f64; 3], level: f64) -> f64 {
    let (lo, hi) = (f[0].min(f[1]).min(f[2]), f[0].max(f[1]).max(f[2]));
    if level >= hi {
        return 1.0;
    }
    if level < lo {
        return 0.0;
    }
    // work in barycentric coordinates on the reference triangle
    let refs = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let poly: Vec<Vec2> = refs.to_vec();
    // f(x, y) = f0 + (f1 - f0) x + (f2 - f0) y <= level
    let n = Vec2::new(f[1] - f[0], f[2] - f[0]);
    let c = level - f[0];
    if n.norm_squared() == 0.0 {
        return if c >= 0.0 { 1.0 } else { 0.0 };
    }
    let clipped = clip_halfplane(&poly, &n, c);
    (signed_area(&clipped) / 0.5).clamp(0.0, 1.0)
}
