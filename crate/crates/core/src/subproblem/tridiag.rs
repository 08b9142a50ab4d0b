//! Kernels on symmetric tridiagonal matrices produced by Lanczos: Sturm
//! bisection for the smallest eigenvalue, shifted `LDL^T` solves, and the
//! secular-equation solvers for the projected trust-region and cubic models.

/// Symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`
/// (`beta.len() == alpha.len() - 1`).
#[derive(Debug, Clone, Default)]
pub struct Tridiagonal {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn matvec(&self, y: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut out = vec![0.0; k];
        for i in 0..k {
            let mut v = self.alpha[i] * y[i];
            if i > 0 {
                v += self.beta[i - 1] * y[i - 1];
            }
            if i + 1 < k {
                v += self.beta[i] * y[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let k = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..k {
            let mut r = 0.0;
            if i > 0 {
                r += self.beta[i - 1].abs();
            }
            if i + 1 < k {
                r += self.beta[i].abs();
            }
            lo = lo.min(self.alpha[i] - r);
            hi = hi.max(self.alpha[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly less than `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let off = if i > 0 { self.beta[i - 1] * self.beta[i - 1] } else { 0.0 };
            q = self.alpha[i] - x - if i > 0 { off / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::MIN_POSITIVE.sqrt();
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by bisection, accurate to a few ulps of the
    /// spectral scale.
    pub fn min_eigenvalue(&self) -> f64 {
        assert!(!self.is_empty());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T + shift I) y = rhs` by `LDL^T`; `None` unless the shifted
    /// matrix is numerically positive definite.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let k = self.len();
        let mut d = vec![0.0; k];
        let mut l = vec![0.0; k];
        d[0] = self.alpha[0] + shift;
        if d[0] <= 0.0 {
            return None;
        }
        for i in 1..k {
            l[i] = self.beta[i - 1] / d[i - 1];
            d[i] = self.alpha[i] + shift - l[i] * self.beta[i - 1];
            if d[i] <= 0.0 || !d[i].is_finite() {
                return None;
            }
        }
        let mut z = rhs.to_vec();
        for i in 1..k {
            z[i] -= l[i] * z[i - 1];
        }
        for i in 0..k {
            z[i] /= d[i];
        }
        for i in (0..k.saturating_sub(1)).rev() {
            z[i] -= l[i + 1] * z[i + 1];
        }
        Some(z)
    }

    /// Unit eigenvector for the eigenvalue closest to `lambda` from below, by
    /// inverse iteration.
    pub fn eigenvector_near(&self, lambda: f64) -> Vec<f64> {
        let k = self.len();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1e-300);
        let mut v = vec![1.0 / (k as f64).sqrt(); k];
        // alternate signs avoid an accidental orthogonal start
        for (i, vi) in v.iter_mut().enumerate() {
            if i % 2 == 1 {
                *vi = -*vi * 0.7;
            }
        }
        let mut gap = 1e-10 * scale;
        for _ in 0..8 {
            match self.solve_shifted(-(lambda - gap), &v) {
                Some(w) => {
                    let n = crate::linalg::norm(&w);
                    if !(n.is_finite() && n > 0.0) {
                        gap *= 10.0;
                        continue;
                    }
                    v = w.into_iter().map(|x| x / n).collect();
                }
                None => gap *= 10.0,
            }
        }
        v
    }
}

/// Solution of a projected model in tridiagonal coordinates.
#[derive(Debug, Clone)]
pub struct ProjectedSolution {
    pub y: Vec<f64>,
    pub lambda: f64,
    pub model: f64,
}

fn projected_model(t: &Tridiagonal, gnorm: f64, y: &[f64], sigma: f64) -> f64 {
    let ty = t.matvec(y);
    let quad: f64 = y.iter().zip(&ty).map(|(a, b)| a * b).sum();
    let ny = crate::linalg::norm(y);
    gnorm * y[0] + 0.5 * quad + sigma / 3.0 * ny * ny * ny
}

enum Target {
    Radius(f64),
    Cubic(f64),
}

impl Target {
    fn value(&self, lambda: f64) -> f64 {
        match *self {
            Target::Radius(delta) => delta,
            Target::Cubic(sigma) => lambda / sigma,
        }
    }
}

/// Minimizes `gnorm * y_0 + 1/2 y^T T y` subject to `||y|| <= delta`.
pub fn solve_trust_region(t: &Tridiagonal, gnorm: f64, delta: f64) -> ProjectedSolution {
    let sol = solve_secular(t, gnorm, Target::Radius(delta));
    let model = projected_model(t, gnorm, &sol.0, 0.0);
    ProjectedSolution { y: sol.0, lambda: sol.1, model }
}

/// Minimizes `gnorm * y_0 + 1/2 y^T T y + sigma/3 ||y||^3`.
pub fn solve_cubic(t: &Tridiagonal, gnorm: f64, sigma: f64) -> ProjectedSolution {
    let sol = solve_secular(t, gnorm, Target::Cubic(sigma));
    let model = projected_model(t, gnorm, &sol.0, sigma);
    ProjectedSolution { y: sol.0, lambda: sol.1, model }
}

/// Finds `lambda >= max(0, -lambda_min(T))` with `(T + lambda I) y = -gnorm e_1`
/// and `||y|| = target(lambda)` (or `lambda = 0` with `||y|| <= delta` for an
/// interior trust-region solution). Safeguarded Newton on
/// `1/||y(lambda)|| - 1/target(lambda)`, which is increasing in `lambda`.
fn solve_secular(t: &Tridiagonal, gnorm: f64, target: Target) -> (Vec<f64>, f64) {
    let k = t.len();
    let mut rhs = vec![0.0; k];
    rhs[0] = -gnorm;
    if gnorm == 0.0 {
        return hard_case(t, &rhs, t.min_eigenvalue(), &target, 0.0);
    }
    let lmin = t.min_eigenvalue();
    let (glo, ghi) = t.gershgorin();
    let scale = glo.abs().max(ghi.abs()).max(gnorm).max(1e-300);

    // Interior trust-region solution.
    if let Target::Radius(delta) = target {
        if lmin > 0.0 {
            if let Some(y) = t.solve_shifted(0.0, &rhs) {
                if crate::linalg::norm(&y) <= delta {
                    return (y, 0.0);
                }
            }
        }
    }

    // Work with mu = lambda - offset on T + offset I, so that shifts just
    // above the singular point keep full relative precision.
    let offset = (-lmin).max(0.0);
    let base = if offset > 0.0 {
        Tridiagonal { alpha: t.alpha.iter().map(|a| a + offset).collect(), beta: t.beta.clone() }
    } else {
        t.clone()
    };

    let h = |mu: f64| -> Option<(f64, f64, Vec<f64>)> {
        let lambda = mu + offset;
        let y = base.solve_shifted(mu, &rhs)?;
        let ny = crate::linalg::norm(&y);
        let z = base.solve_shifted(mu, &y)?;
        let yz: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut val = 1.0 / ny;
        let mut der = yz / (ny * ny * ny);
        match target {
            Target::Radius(delta) => val -= 1.0 / delta,
            Target::Cubic(sigma) => {
                val -= sigma / lambda;
                der += sigma / (lambda * lambda);
            }
        }
        Some((val, der, y))
    };

    // Lower end of the bracket: zero when T is positive definite (the
    // function is negative there), otherwise just above the singular shift.
    let mut a = 0.0;
    if lmin <= 0.0 {
        let mut eps = 1e-15 * scale;
        let mut lower = None;
        for _ in 0..40 {
            if let Some(v) = h(eps) {
                lower = Some((eps, v));
                break;
            }
            eps *= 10.0;
        }
        let Some((mu, (ha, _, ya))) = lower else {
            return hard_case(t, &rhs, lmin, &target, offset);
        };
        if ha >= 0.0 {
            // ||y|| is already at or below the target at the smallest
            // admissible shift: (near) hard case.
            if ha.abs() <= 1e-12 * (1.0 / crate::linalg::norm(&ya)).max(1e-300) {
                return (ya, mu + offset);
            }
            return hard_case(t, &rhs, lmin, &target, mu + offset);
        }
        a = mu;
    }

    let mut b = (match target {
        Target::Radius(delta) => gnorm / delta - lmin,
        Target::Cubic(sigma) => 0.5 * (-lmin + (lmin * lmin + 4.0 * sigma * gnorm).sqrt()),
    } - offset)
        .max(a)
        * (1.0 + 1e-12)
        + 1e-300;
    for _ in 0..200 {
        match h(b) {
            Some((hb, _, _)) if hb >= 0.0 => break,
            _ => b = 2.0 * b + scale,
        }
    }

    let mut mu = b;
    let mut last = None;
    for _ in 0..200 {
        let Some((val, der, y)) = h(mu) else {
            a = mu;
            mu = 0.5 * (a + b);
            continue;
        };
        let tgt = target.value(mu + offset);
        let ny = crate::linalg::norm(&y);
        if (ny - tgt).abs() <= 1e-13 * tgt || b - a <= f64::EPSILON * b.abs() {
            return (y, mu + offset);
        }
        if val < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        let newton = mu - val / der;
        let next = if der > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let stalled = (next - mu).abs() <= 2.0 * f64::EPSILON * mu.abs();
        last = Some((y, mu + offset));
        if stalled {
            break;
        }
        mu = next;
    }
    last.unwrap_or_else(|| (vec![0.0; k], a + offset))
}

/// Adds a multiple of the leftmost eigenvector so that `||y|| = target`.
fn hard_case(t: &Tridiagonal, rhs: &[f64], lmin: f64, target: &Target, lambda: f64) -> (Vec<f64>, f64) {
    let k = t.len();
    let lambda = lambda.max(-lmin).max(0.0);
    let tgt = target.value(lambda);
    let y = if rhs.iter().all(|v| *v == 0.0) {
        vec![0.0; k]
    } else {
        t.solve_shifted(lambda, rhs).filter(|y| crate::linalg::all_finite(y)).unwrap_or_else(|| vec![0.0; k])
    };
    if lmin >= 0.0 && matches!(target, Target::Radius(_)) {
        return (y, lambda);
    }
    let u = t.eigenvector_near(lmin);
    let ny2 = crate::linalg::dot(&y, &y);
    let yu = crate::linalg::dot(&y, &u);
    let extra = (tgt * tgt - ny2).max(0.0);
    // tau solves ||y + tau u||^2 = tgt^2; pick the root that lowers the model
    let disc = (yu * yu + extra).sqrt();
    let t1 = -yu + disc;
    let t2 = -yu - disc;
    let pick = |tau: f64| {
        let mut c = y.clone();
        crate::linalg::axpy(tau, &u, &mut c);
        c
    };
    let c1 = pick(t1);
    let c2 = pick(t2);
    let sigma = match target {
        Target::Cubic(s) => *s,
        Target::Radius(_) => 0.0,
    };
    let gnorm = -rhs[0];
    if projected_model(t, gnorm, &c1, sigma) <= projected_model(t, gnorm, &c2, sigma) {
        (c1, lambda)
    } else {
        (c2, lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_bisection_on_diagonal() {
        let t = Tridiagonal { alpha: vec![3.0, -2.0, 5.0], beta: vec![0.0, 0.0] };
        assert!((t.min_eigenvalue() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn sturm_bisection_two_by_two() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let t = Tridiagonal { alpha: vec![2.0, 2.0], beta: vec![1.0] };
        assert!((t.min_eigenvalue() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shifted_solve_matches_matvec() {
        let t = Tridiagonal { alpha: vec![4.0, 3.0, 5.0, 2.0], beta: vec![1.0, -0.5, 0.25] };
        let rhs = [1.0, 2.0, -1.0, 0.5];
        let y = t.solve_shifted(0.3, &rhs).unwrap();
        let back = t.matvec(&y);
        for i in 0..4 {
            assert!((back[i] + 0.3 * y[i] - rhs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn one_dimensional_cubic() {
        let t = Tridiagonal { alpha: vec![1.0], beta: vec![] };
        let sol = solve_cubic(&t, 1.0, 1.0);
        let golden = (1.0 - 5f64.sqrt()) / 2.0;
        assert!((sol.y[0] - golden).abs() < 1e-12);
    }

    #[test]
    fn trust_region_boundary_on_indefinite() {
        let t = Tridiagonal { alpha: vec![-1.0], beta: vec![] };
        let sol = solve_trust_region(&t, 1.0, 2.0);
        assert!((sol.y[0] + 2.0).abs() < 1e-12);
        assert!((sol.model - (-2.0 - 2.0)).abs() < 1e-12);
    }
}
