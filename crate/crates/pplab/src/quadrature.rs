//! Adaptive quadrature used for ball masses without a closed form.
//!
//! Balls are integrated in polar coordinates: a radial adaptive Simpson
//! pass over `rho -> rho^(d-1) * (angular average)`, with the angular
//! integral itself computed adaptively (d=2) or by an escalating product
//! Gauss-Legendre x trapezoid rule on the sphere (d=3).

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with absolute tolerance `tol` on `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of `f` over the ball B(center, radius), relative tolerance `rel_tol`.
///
/// The caller guarantees `f` is finite on the ball. A crude first pass
/// fixes the absolute tolerance handed to the adaptive passes.
pub fn ball_integral(
    f: &impl Fn(&[f64]) -> f64,
    center: &[f64],
    radius: f64,
    rel_tol: f64,
) -> f64 {
    if radius == 0.0 {
        return 0.0;
    }
    let d = center.len();
    let rough = rough_ball_estimate(f, center, radius);
    let abs_tol = (rel_tol * rough.abs()).max(1e-300);
    match d {
        1 => adaptive_simpson(
            &|x| f(&[x]),
            center[0] - radius,
            center[0] + radius,
            abs_tol,
        ),
        2 => {
            let angular_tol = abs_tol / (radius * radius);
            let radial = |rho: f64| -> f64 {
                if rho == 0.0 {
                    return 0.0;
                }
                let ring = adaptive_simpson(
                    &|theta: f64| f(&[center[0] + rho * theta.cos(), center[1] + rho * theta.sin()]),
                    0.0,
                    2.0 * std::f64::consts::PI,
                    angular_tol,
                );
                rho * ring
            };
            adaptive_simpson(&radial, 0.0, radius, abs_tol)
        }
        3 => {
            let radial = |rho: f64| -> f64 {
                if rho == 0.0 {
                    return 0.0;
                }
                rho * rho * sphere_integral(f, center, rho, rel_tol)
            };
            adaptive_simpson(&radial, 0.0, radius, abs_tol)
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

fn rough_ball_estimate(f: &impl Fn(&[f64]) -> f64, center: &[f64], radius: f64) -> f64 {
    let d = center.len();
    let volume = crate::geom::unit_ball_volume(d) * radius.powi(d as i32);
    // midpoint sample of |f| on a small stencil
    let mut acc = f(center).abs();
    let mut n = 1usize;
    for k in 0..d {
        for s in [-0.5, 0.5] {
            let mut x = center.to_vec();
            x[k] += s * radius;
            acc += f(&x).abs();
            n += 1;
        }
    }
    volume * acc / n as f64
}

/// Surface integral of `f` over the sphere of radius `rho` around `center`,
/// by Gauss-Legendre in the polar cosine crossed with trapezoid in azimuth,
/// escalating the order until two successive levels agree.
fn sphere_integral(f: &impl Fn(&[f64]) -> f64, center: &[f64], rho: f64, rel_tol: f64) -> f64 {
    let mut prev = f64::NAN;
    let mut n = 8usize;
    loop {
        let val = sphere_product_rule(f, center, rho, n);
        if !prev.is_nan() && (val - prev).abs() <= rel_tol.max(1e-13) * val.abs().max(1e-300) {
            return val;
        }
        if n >= 256 {
            return val;
        }
        prev = val;
        n *= 2;
    }
}

fn sphere_product_rule(f: &impl Fn(&[f64]) -> f64, center: &[f64], rho: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let m = 2 * n;
    let mut acc = 0.0;
    for (u, w) in nodes.iter().zip(&weights) {
        // u = cos(polar angle)
        let s = (1.0 - u * u).sqrt();
        let mut ring = 0.0;
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let x = [
                center[0] + rho * s * phi.cos(),
                center[1] + rho * s * phi.sin(),
                center[2] + rho * u,
            ];
            ring += f(&x);
        }
        acc += w * ring * 2.0 * std::f64::consts::PI / m as f64;
    }
    acc
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(&|x| x * x * x + 2.0 * x, 0.0, 2.0, 1e-12);
        assert_relative_eq!(v, 4.0 + 4.0, max_relative = 1e-12);
    }

    #[test]
    fn simpson_handles_kinks() {
        // |x - 0.3| over (0,1): 0.3^2/2 + 0.7^2/2
        let v = adaptive_simpson(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-10);
        assert_relative_eq!(v, 0.045 + 0.245, max_relative = 1e-7);
    }

    #[test]
    fn disk_area() {
        let v = ball_integral(&|_: &[f64]| 1.0, &[0.4, -0.2], 1.0, 1e-9);
        assert_relative_eq!(v, PI, max_relative = 1e-8);
    }

    #[test]
    fn interval_mass() {
        let v = ball_integral(&|x: &[f64]| 2.0 + x[0], &[1.0], 0.5, 1e-9);
        // int_{0.5}^{1.5} (2+x) dx = 2 + 1
        assert_relative_eq!(v, 3.0, max_relative = 1e-9);
    }

    #[test]
    fn ball_volume_3d() {
        let v = ball_integral(&|_: &[f64]| 1.0, &[0.0, 0.0, 0.0], 0.7, 1e-9);
        assert_relative_eq!(v, 4.0 / 3.0 * PI * 0.7f64.powi(3), max_relative = 1e-8);
    }

    #[test]
    fn linear_density_disk_recovers_center_value() {
        // odd part integrates out: int_{B(x,r)} (1 + y0) dy = (1 + x0) * pi r^2
        let v = ball_integral(&|y: &[f64]| 1.0 + y[0], &[0.25, 0.1], 0.3, 1e-9);
        assert_relative_eq!(v, 1.25 * PI * 0.09, max_relative = 1e-8);
    }

    #[test]
    fn step_density_disk() {
        // f = 1 for y0 < 0, 3 for y0 >= 0, ball at origin: mean 2
        let f = |y: &[f64]| if y[0] < 0.0 { 1.0 } else { 3.0 };
        let v = ball_integral(&f, &[0.0, 0.0], 1.0, 1e-8);
        assert_relative_eq!(v, 2.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        let (x, w) = gauss_legendre(8);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(v, 2.0 / 11.0, max_relative = 1e-12);
    }
}
