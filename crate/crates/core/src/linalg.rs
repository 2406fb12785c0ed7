//! Small dense helpers for 2- and 3-dimensional systems.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn trace3(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Sum of the principal 2x2 minors.
pub fn minor_sum3(m: &Mat3) -> f64 {
    (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
}

/// Infinity norm (max absolute row sum).
pub fn inf_norm3(m: &Mat3) -> f64 {
    m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Unit vector spanning the kernel of `m - lambda I`, assuming it is one-dimensional.
pub fn null_vector(m: &Mat3, lambda: f64) -> Vec3 {
    let mut rows = *m;
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let candidates = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])];
    let best = candidates.iter().max_by(|a, b| norm(a).total_cmp(&norm(b))).copied().unwrap_or([0.0; 3]);
    let n = norm(&best);
    [best[0] / n, best[1] / n, best[2] / n]
}

/// Solves the 2x2 system `m x = b`; `None` when `|det m|` is below `tiny`.
pub fn solve2(m: &[[f64; 2]; 2], b: &[f64; 2], tiny: f64) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.abs() > tiny) {
        return None;
    }
    Some([(b[0] * m[1][1] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - b[0] * m[1][0]) / det])
}

/// A root of a real polynomial, stored as `(re, im)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub re: f64,
    pub im: f64,
}

fn polish(c2: f64, c1: f64, c0: f64, mut x: f64) -> f64 {
    for _ in 0..20 {
        let p = ((x + c2) * x + c1) * x + c0;
        let dp = (3.0 * x + 2.0 * c2) * x + c1;
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        let done = step.abs() <= 1e-16 * x.abs().max(1e-300);
        x = next;
        if done {
            break;
        }
    }
    x
}

/// Roots of `x^3 + c2 x^2 + c1 x + c0`, real roots first and sorted in
/// descending order. Real roots are Newton-polished on the cubic.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Root; 3] {
    // depressed cubic t^3 + p t + q with x = t - c2/3
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc <= 0.0 && p < 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let mut xs: Vec<f64> = (0..3)
            .map(|k| {
                let t = 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
                polish(c2, c1, c0, t - shift)
            })
            .collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        [Root { re: xs[0], im: 0.0 }, Root { re: xs[1], im: 0.0 }, Root { re: xs[2], im: 0.0 }]
    } else {
        let s = disc.max(0.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        let x = polish(c2, c1, c0, t - shift);
        // deflate: x^2 + b x + c
        let b = c2 + x;
        let c = c1 + b * x;
        let d = b * b / 4.0 - c;
        if d >= 0.0 {
            let sq = d.sqrt();
            let mut xs = [x, polish(c2, c1, c0, -b / 2.0 + sq), polish(c2, c1, c0, -b / 2.0 - sq)];
            xs.sort_by(|a, b| b.total_cmp(a));
            xs.map(|re| Root { re, im: 0.0 })
        } else {
            let im = (-d).sqrt();
            [Root { re: x, im: 0.0 }, Root { re: -b / 2.0, im }, Root { re: -b / 2.0, im: -im }]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_three_real_roots() {
        // (x - 0.01)(x + 2)(x + 3)
        let (a, b, c) = (0.01, -2.0, -3.0);
        let c2 = -(a + b + c);
        let c1 = a * b + a * c + b * c;
        let c0 = -a * b * c;
        let r = cubic_roots(c2, c1, c0);
        assert!((r[0].re - 0.01).abs() < 1e-15);
        assert!((r[1].re + 2.0).abs() < 1e-13);
        assert!((r[2].re + 3.0).abs() < 1e-13);
        assert!(r.iter().all(|x| x.im == 0.0));
    }

    #[test]
    fn cubic_with_complex_pair() {
        // (x - 0.5)(x^2 + 2x + 5): roots 0.5, -1 +- 2i
        let c2 = 2.0 - 0.5;
        let c1 = 5.0 - 1.0;
        let c0 = -2.5;
        let r = cubic_roots(c2, c1, c0);
        assert!((r[0].re - 0.5).abs() < 1e-14);
        assert!((r[1].re + 1.0).abs() < 1e-13 && (r[1].im.abs() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn null_vector_of_diagonal() {
        let m = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
        let v = null_vector(&m, 2.0);
        assert!((v[1].abs() - 1.0).abs() < 1e-15);
    }
}
