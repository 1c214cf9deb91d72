//! Matrix exponential by scaling and squaring with a [13/13] Padé
//! approximant. Constant-coefficient tail propagation runs through here, so
//! accuracy at moderate norms matters more than speed.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};

const THETA_13: f64 = 5.371920351148152;

const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Solve A X = B by Gaussian elimination with partial pivoting.
fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let m = b.cols();
    let mut aug = ComplexMatrix::zeros(n, n + m);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        for j in 0..m {
            aug[(i, n + j)] = b[(i, j)];
        }
    }
    for k in 0..n {
        let mut p = k;
        let mut best = aug[(k, k)].norm();
        for i in k + 1..n {
            if aug[(i, k)].norm() > best {
                best = aug[(i, k)].norm();
                p = i;
            }
        }
        if p != k {
            for j in 0..n + m {
                let tmp = aug[(k, j)];
                aug[(k, j)] = aug[(p, j)];
                aug[(p, j)] = tmp;
            }
        }
        let piv = aug[(k, k)];
        for i in k + 1..n {
            let f = aug[(i, k)] / piv;
            if f == ZERO {
                continue;
            }
            for j in k..n + m {
                let s = f * aug[(k, j)];
                aug[(i, j)] -= s;
            }
        }
    }
    let mut x = ComplexMatrix::zeros(n, m);
    for j in 0..m {
        for i in (0..n).rev() {
            let mut acc = aug[(i, n + j)];
            for l in i + 1..n {
                acc -= aug[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = acc / aug[(i, i)];
        }
    }
    x
}

/// exp(A) for square A.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    assert!(a.is_square(), "expm: matrix must be square");
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let norm = a.norm_one();
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(Complex64::new((0.5f64).powi(s as i32), 0.0));

    let id = ComplexMatrix::identity(n);
    let a2 = scaled.mul(&scaled).unwrap();
    let a4 = a2.mul(&a2).unwrap();
    let a6 = a4.mul(&a2).unwrap();

    let cb = |x: f64| Complex64::new(x, 0.0);
    let inner_u = a6
        .scale(cb(B[13]))
        .add(&a4.scale(cb(B[11])))
        .unwrap()
        .add(&a2.scale(cb(B[9])))
        .unwrap();
    let u_poly = a6
        .mul(&inner_u)
        .unwrap()
        .add(&a6.scale(cb(B[7])))
        .unwrap()
        .add(&a4.scale(cb(B[5])))
        .unwrap()
        .add(&a2.scale(cb(B[3])))
        .unwrap()
        .add(&id.scale(cb(B[1])))
        .unwrap();
    let u = scaled.mul(&u_poly).unwrap();

    let inner_v = a6
        .scale(cb(B[12]))
        .add(&a4.scale(cb(B[10])))
        .unwrap()
        .add(&a2.scale(cb(B[8])))
        .unwrap();
    let v = a6
        .mul(&inner_v)
        .unwrap()
        .add(&a6.scale(cb(B[6])))
        .unwrap()
        .add(&a4.scale(cb(B[4])))
        .unwrap()
        .add(&a2.scale(cb(B[2])))
        .unwrap()
        .add(&id.scale(cb(B[0])))
        .unwrap();

    let num = v.add(&u).unwrap();
    let den = v.sub(&u).unwrap();
    let mut e = solve(&den, &num);
    for _ in 0..s {
        e = e.mul(&e).unwrap();
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE};

    #[test]
    fn diagonal() {
        let a = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.5)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::new(1.0f64.exp(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - Complex64::new(-2.0, 0.5).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        let e = expm(&a);
        let (c, s) = (1.0f64.cos(), 1.0f64.sin());
        assert!((e[(0, 0)].re - c).abs() < 1e-14);
        assert!((e[(0, 1)].re - s).abs() < 1e-14);
        assert!((e[(1, 0)].re + s).abs() < 1e-14);
        assert!((e[(1, 1)].re - c).abs() < 1e-14);
    }

    #[test]
    fn nilpotent() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let e = expm(&a);
        assert!((e[(0, 0)] - ONE).norm() < 1e-15);
        assert!((e[(0, 1)] - ONE).norm() < 1e-15);
        assert!((e[(1, 1)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn semigroup_property() {
        let a = ComplexMatrix::new(
            3,
            3,
            vec![
                Complex64::new(0.3, 0.1),
                Complex64::new(-1.0, 0.4),
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, -0.7),
                Complex64::new(0.5, 0.0),
                Complex64::new(1.1, 0.2),
                Complex64::new(0.4, 0.4),
                Complex64::new(-0.3, 0.0),
                Complex64::new(-0.9, 0.1),
            ],
        )
        .unwrap();
        let whole = expm(&a.scale(Complex64::new(2.0, 0.0)));
        let half = expm(&a);
        let prod = half.mul(&half).unwrap();
        assert!(whole.sub(&prod).unwrap().max_abs() < 1e-12);
        let _ = I;
    }

    #[test]
    fn large_norm_scaling() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 20.0, -20.0, 0.0]).unwrap();
        let e = expm(&a);
        let (c, s) = (20.0f64.cos(), 20.0f64.sin());
        assert!((e[(0, 0)].re - c).abs() < 1e-11);
        assert!((e[(0, 1)].re - s).abs() < 1e-11);
    }
}
