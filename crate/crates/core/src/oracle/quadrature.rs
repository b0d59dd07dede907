//! Adaptive composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{NpfError, Result};

const ORDER: usize = 16;
const MAX_DEPTH: usize = 40;

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=ORDER {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn panel(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

fn refine(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid)?;
    let right = panel(f, mid, b)?;
    let split = left + right;
    if (split - whole).abs() <= tol {
        return Ok(split);
    }
    if depth >= MAX_DEPTH {
        return Err(NpfError::OraclePrecision(format!(
            "no convergence on [{a}, {b}] after {MAX_DEPTH} bisections"
        )));
    }
    Ok(refine(f, a, mid, left, 0.5 * tol, depth + 1)? + refine(f, mid, b, right, 0.5 * tol, depth + 1)?)
}

/// `∫_a^b f` to within `rel_tol · max(1, |I|)`.
pub fn integrate(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let whole = panel(&mut f, a, b)?;
    if !whole.is_finite() {
        return Err(NpfError::OraclePrecision("non-finite integrand".into()));
    }
    let tol = rel_tol * whole.abs().max(1.0);
    refine(&mut f, a, b, whole, tol, 0)
}

/// Iterated integral over a box, innermost coordinate last.
pub fn integrate_box(f: &dyn Fn(&[f64]) -> Result<f64>, bounds: &[(f64, f64)], rel_tol: f64) -> Result<f64> {
    fn go(f: &dyn Fn(&[f64]) -> Result<f64>, bounds: &[(f64, f64)], prefix: &mut Vec<f64>, rel_tol: f64) -> Result<f64> {
        let depth = prefix.len();
        let (a, b) = bounds[depth];
        integrate(
            |x| {
                prefix.push(x);
                let v = if depth + 1 == bounds.len() { f(prefix) } else { go(f, bounds, prefix, rel_tol) };
                prefix.pop();
                v
            },
            a,
            b,
            rel_tol,
        )
    }
    go(f, bounds, &mut Vec::with_capacity(bounds.len()), rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_two() {
        let (nodes, weights) = rule();
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(nodes.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn polynomials_and_trig() {
        let v = integrate(|x| Ok(x.powi(7) - 3.0 * x * x), -1.0, 2.0, 1e-12).unwrap();
        assert!((v - (255.0 / 8.0 - 9.0)).abs() < 1e-11);
        let s = integrate(|t| Ok(t.sin().powi(2)), 0.0, 2.0 * PI, 1e-10).unwrap();
        assert!((s - PI).abs() < 1e-10);
        let peaked = integrate(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, 1e-10).unwrap();
        assert!((peaked - 2.0 * 100.0 * (100.0f64).atan()).abs() < 1e-6);
    }

    #[test]
    fn box_integral() {
        let area = integrate_box(&|u: &[f64]| Ok(u[0].sin()), &[(0.0, PI), (0.0, 2.0 * PI)], 1e-10).unwrap();
        assert!((area - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn errors_propagate() {
        assert!(integrate(|_| Err(NpfError::OutsideDomain("x".into())), 0.0, 1.0, 1e-8).is_err());
        assert!(matches!(integrate(|x| Ok(1.0 / x), 0.0, 1.0, 1e-8), Err(NpfError::OraclePrecision(_))));
    }
}
