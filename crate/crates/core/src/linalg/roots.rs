use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Complex roots of `c[0] + c[1] x + … + c[n] xⁿ` (`c[n] ≠ 0`) from the
/// eigenvalues of the companion matrix, each refined by a few Newton steps.
/// Simultaneous Aberth iteration takes over when the Schur iteration does
/// not converge.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let raw: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect(),
        None => aberth(&c),
    };
    let mut roots: Vec<Complex64> = raw.into_iter().map(|z| newton_polish(&c, z)).collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn aberth(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    // Cauchy bound for the initial circle
    let radius = 1.0 + c[..n].iter().map(|a| (a / c[n]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (p, dp) = horner(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn newton_polish(c: &[f64], mut z: Complex64) -> Complex64 {
    let mut best = (horner(c, z).0.norm(), z);
    for _ in 0..8 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        z -= p / dp;
        let r = horner(c, z).0.norm();
        if r < best.0 {
            best = (r, z);
        } else {
            break;
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_and_quartic_roots() {
        let r = poly_roots(&[-1.0, 0.0, 1.0]);
        assert!((r[0].re + 1.0).abs() < 1e-14 && (r[1].re - 1.0).abs() < 1e-14);
        // (x²+1)(x²+4)
        let r = poly_roots(&[4.0, 0.0, 5.0, 0.0, 1.0]);
        let mut ims: Vec<f64> = r.iter().map(|z| z.im.abs()).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] - 1.0).abs() < 1e-12 && (ims[3] - 2.0).abs() < 1e-12);
        assert!(poly_roots(&[3.0]).is_empty());
    }

    #[test]
    fn schur_stall_falls_back() {
        // x⁴ − 4x² + 8 stalls the unshifted Schur iteration
        let r = poly_roots(&[8.0, 0.0, -4.0, 0.0, 1.0]);
        assert_eq!(r.len(), 4);
        for z in &r {
            assert!(horner(&[8.0, 0.0, -4.0, 0.0, 1.0], *z).0.norm() < 1e-10);
        }
        let r = aberth(&[-6.0, 11.0, -6.0, 1.0]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
