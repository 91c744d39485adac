//! Small dense linear-algebra kernels: monic cubic roots and a cyclic
//! Jacobi eigensolver for symmetric matrices.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

/// Relative discriminant magnitude below which the closed form is
/// abandoned in favour of the companion-matrix eigenvalues.
const DEGENERATE_DISCRIMINANT: f64 = 1e-14;

/// Roots of `l^3 + a l^2 + b l + c`, real roots first (ascending), then the
/// complex pair with the positive imaginary part first.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let scale = a.abs().max(b.abs().sqrt()).max(c.abs().cbrt());
    if scale == 0.0 {
        return [Complex64::new(0.0, 0.0); 3];
    }
    if !scale.is_finite() {
        return [Complex64::new(f64::NAN, f64::NAN); 3];
    }

    // Depressed cubic t^3 + p t + q with l = t - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc.abs() <= DEGENERATE_DISCRIMINANT * scale.powi(6) {
        return companion_roots(a, b, c);
    }

    if disc > 0.0 {
        // One real root; take the cube root without cancellation.
        let sq = disc.sqrt();
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        let real = polish(a, b, c, u + v - shift);
        let (z1, z2) = deflate(a, b, real);
        let mut pair = [z1, z2];
        pair.sort_by(|x, y| y.im.total_cmp(&x.im));
        [Complex64::new(real, 0.0), pair[0], pair[1]]
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut r = [0.0; 3];
        for (k, rk) in r.iter_mut().enumerate() {
            let t = m * (theta - 2.0 * PI * k as f64 / 3.0).cos();
            *rk = polish(a, b, c, t - shift);
        }
        r.sort_by(f64::total_cmp);
        r.map(|x| Complex64::new(x, 0.0))
    }
}

/// Eigenvalues of the companion matrix of `l^3 + a l^2 + b l + c`.
pub fn companion_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let m = Matrix3::new(-a, -b, -c, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2]];
    sort_roots(&mut out);
    out
}

/// Canonical root order: real roots ascending, then complex by real
/// part with positive imaginary part first.
pub fn sort_roots(r: &mut [Complex64]) {
    r.sort_by(|x, y| {
        let xr = x.im == 0.0;
        let yr = y.im == 0.0;
        yr.cmp(&xr)
            .then(x.re.total_cmp(&y.re))
            .then(y.im.total_cmp(&x.im))
    });
}

fn polish(a: f64, b: f64, c: f64, mut x: f64) -> f64 {
    for _ in 0..2 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = x - f / df;
        if !next.is_finite() {
            break;
        }
        // Accept only if the residual does not grow.
        let fn_ = ((next + a) * next + b) * next + c;
        if fn_.abs() <= f.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Quadratic factor left after removing the real root `rho`.
fn deflate(a: f64, b: f64, rho: f64) -> (Complex64, Complex64) {
    let qb = a + rho;
    let qc = b + rho * qb;
    quadratic_roots(qb, qc)
}

/// Roots of `l^2 + b l + c`.
pub fn quadratic_roots(b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + b.signum() * s);
        if q == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        (Complex64::new(q, 0.0), Complex64::new(c / q, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im))
    }
}

/// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi
/// rotations. Sweeps stop once the off-diagonal Frobenius norm falls below
/// `tol` times the matrix norm.
pub fn jacobi_eigenvalues<const N: usize>(m: &[[f64; N]; N], tol: f64) -> [f64; N] {
    let mut a = *m;
    let norm = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return [0.0; N];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= tol * norm {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [0.0; N];
    for (i, e) in ev.iter_mut().enumerate() {
        *e = a[i][i];
    }
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SMatrix;
    use proptest::prelude::*;

    fn residual(a: f64, b: f64, c: f64, z: Complex64) -> f64 {
        (((z + a) * z + b) * z + c).norm()
    }

    #[test]
    fn triple_root() {
        let r = cubic_roots(3.0, 3.0, 1.0);
        for z in r {
            // a triple root is only determined to ~cbrt(eps)
            assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-4, "{z}");
        }
    }

    #[test]
    fn three_distinct_real() {
        // (l+1)(l+2)(l+3)
        let r = cubic_roots(6.0, 11.0, 6.0);
        let want = [-3.0, -2.0, -1.0];
        for (z, w) in r.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-13 && z.im == 0.0);
        }
    }

    #[test]
    fn complex_pair() {
        // (l+1)(l^2 + 1)
        let r = cubic_roots(1.0, 1.0, 1.0);
        assert!((r[0].re + 1.0).abs() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((r[2] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_polynomial() {
        assert!(cubic_roots(0.0, 0.0, 0.0).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn jacobi_diagonal_and_known() {
        let m = [[2.0, 1.0], [1.0, 2.0]];
        let ev = jacobi_eigenvalues(&m, 1e-12);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cubic_matches_companion(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
            let fast = cubic_roots(a, b, c);
            let oracle = companion_roots(a, b, c);
            for z in fast {
                prop_assert!(residual(a, b, c, z) < 1e-9 * (1.0 + z.norm().powi(3)));
                let nearest = oracle.iter().map(|o| (o - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest < 1e-6, "{:?} vs {:?}", fast, oracle);
            }
        }

        #[test]
        fn jacobi_matches_nalgebra(v in prop::collection::vec(-10.0..10.0f64, 21)) {
            let mut m = [[0.0; 6]; 6];
            let mut k = 0;
            for i in 0..6 {
                for j in i..6 {
                    m[i][j] = v[k];
                    m[j][i] = v[k];
                    k += 1;
                }
            }
            let ours = jacobi_eigenvalues(&m, 1e-12);
            let na = SMatrix::<f64, 6, 6>::from_fn(|i, j| m[i][j]);
            let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.iter().zip(&theirs) {
                prop_assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", ours, theirs);
            }
        }
    }
}
