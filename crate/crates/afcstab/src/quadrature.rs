//! Symmetric Gauss quadrature rules on the reference triangle.
//!
//! Points are stored in barycentric coordinates with weights summing to one;
//! integrals are obtained by multiplying with the physical triangle area.

/// A quadrature point: barycentric coordinates and weight.
#[derive(Debug, Clone, Copy)]
pub struct QPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

fn perm3(a: f64, b: f64, w: f64) -> [QPoint; 3] {
    [
        QPoint { bary: [a, b, b], weight: w },
        QPoint { bary: [b, a, b], weight: w },
        QPoint { bary: [b, b, a], weight: w },
    ]
}

fn perm6(a: f64, b: f64, c: f64, w: f64) -> [QPoint; 6] {
    [
        QPoint { bary: [a, b, c], weight: w },
        QPoint { bary: [a, c, b], weight: w },
        QPoint { bary: [b, a, c], weight: w },
        QPoint { bary: [b, c, a], weight: w },
        QPoint { bary: [c, a, b], weight: w },
        QPoint { bary: [c, b, a], weight: w },
    ]
}

/// Degree-4 rule with 6 points (Dunavant).
pub fn degree4() -> Vec<QPoint> {
    let mut pts = Vec::with_capacity(6);
    pts.extend(perm3(0.816847572980459, 0.091576213509771, 0.109951743655322));
    pts.extend(perm3(0.108103018168070, 0.445948490915965, 0.223381589678011));
    pts
}

/// Degree-5 rule with 7 points (Dunavant); used for quadrature sanity checks.
pub fn degree5() -> Vec<QPoint> {
    let mut pts = Vec::with_capacity(7);
    pts.push(QPoint {
        bary: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        weight: 0.225,
    });
    pts.extend(perm3(0.797426985353087, 0.101286507323456, 0.125939180544827));
    pts.extend(perm3(0.059715871789770, 0.470142064105115, 0.132394152788506));
    pts
}

/// Degree-6 rule with 12 points (Dunavant); used for error norms.
pub fn degree6() -> Vec<QPoint> {
    let mut pts = Vec::with_capacity(12);
    pts.extend(perm3(0.873821971016996, 0.063089014491502, 0.050844906370207));
    pts.extend(perm3(0.501426509658179, 0.249286745170910, 0.116786275726379));
    pts.extend(perm6(
        0.636502499121399,
        0.310352451033785,
        0.053145049844816,
        0.082851075618374,
    ));
    pts
}

/// Maps barycentric coordinates to a physical point of the triangle (a, b, c).
pub fn bary_to_xy(bary: [f64; 3], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    [
        bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
        bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &[QPoint], f: impl Fn(f64, f64) -> f64) -> f64 {
        // reference triangle (0,0), (1,0), (0,1); area 1/2
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        rule.iter()
            .map(|q| {
                let p = bary_to_xy(q.bary, a, b, c);
                0.5 * q.weight * f(p[0], p[1])
            })
            .sum()
    }

    /// Exact value of the integral of x^p y^q over the reference triangle.
    fn monomial_exact(p: u32, q: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn rules_are_exact_to_stated_degree() {
        for (rule, deg) in [(degree4(), 4u32), (degree5(), 5), (degree6(), 6)] {
            let wsum: f64 = rule.iter().map(|p| p.weight).sum();
            assert!((wsum - 1.0).abs() < 1e-12);
            for p in 0..=deg {
                for q in 0..=(deg - p) {
                    let got = integrate(&rule, |x, y| x.powi(p as i32) * y.powi(q as i32));
                    let want = monomial_exact(p, q);
                    assert!(
                        (got - want).abs() < 1e-14,
                        "degree {deg} rule on x^{p} y^{q}: {got} vs {want}"
                    );
                }
            }
        }
    }
}
