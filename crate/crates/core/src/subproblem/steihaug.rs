use super::{SubproblemResult, Termination};
use crate::linalg::{axpy, boundary_step, dot, norm};
use crate::oracle::LinearOperator;

/// Truncated conjugate gradients on the trust-region model (Steihaug).
///
/// Stops when the CG residual satisfies `||r|| <= tol * ||g||`, when an
/// iterate would leave the ball, or when a direction of non-positive
/// curvature appears; the last two follow the current direction to the
/// boundary. The model decreases monotonically along the path, so the result
/// is never worse than the Cauchy point.
pub fn solve_tr_subproblem(
    op: &mut dyn LinearOperator,
    g: &[f64],
    delta: f64,
    tol: f64,
    max_iter: usize,
) -> SubproblemResult {
    let dim = g.len();
    assert!(delta > 0.0, "trust-region radius must be positive");
    let gnorm = norm(g);
    if gnorm == 0.0 {
        return SubproblemResult::zero(dim);
    }
    let stop = tol * gnorm;

    let mut z = vec![0.0; dim];
    // r = g + H z, the model gradient at z; hz tracks H z for the model value
    let mut r = g.to_vec();
    let mut hz = vec![0.0; dim];
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut rr = gnorm * gnorm;
    let mut hvps = 0;

    let model = |s: &[f64], hs: &[f64]| dot(g, s) + 0.5 * dot(s, hs);

    let finish = |z: &[f64], hz: &[f64], d: &[f64], bd: &[f64], tau: f64| {
        let mut s = z.to_vec();
        axpy(tau, d, &mut s);
        let mut hs = hz.to_vec();
        axpy(tau, bd, &mut hs);
        (model(&s, &hs), s)
    };

    for _ in 0..max_iter.max(1) {
        let bd = op.apply(&d);
        hvps += 1;
        let dbd = dot(&d, &bd);
        if dbd <= 0.0 {
            let tau = boundary_step(&z, &d, delta);
            let (m, s) = finish(&z, &hz, &d, &bd, tau);
            return SubproblemResult {
                step: s,
                model_value: m,
                hvp_count: hvps,
                termination: Termination::NegativeCurvature,
            };
        }
        let alpha = rr / dbd;
        let mut z_next = z.clone();
        axpy(alpha, &d, &mut z_next);
        if norm(&z_next) >= delta {
            let tau = boundary_step(&z, &d, delta);
            let (m, s) = finish(&z, &hz, &d, &bd, tau);
            return SubproblemResult {
                step: s,
                model_value: m,
                hvp_count: hvps,
                termination: Termination::BoundaryHit,
            };
        }
        z = z_next;
        axpy(alpha, &bd, &mut hz);
        axpy(alpha, &bd, &mut r);
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= stop {
            return SubproblemResult {
                model_value: model(&z, &hz),
                step: z,
                hvp_count: hvps,
                termination: Termination::InteriorConvergence,
            };
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = -ri + beta * *di;
        }
    }

    SubproblemResult { model_value: model(&z, &hz), step: z, hvp_count: hvps, termination: Termination::MaxIterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblem::DenseSymmetric;

    #[test]
    fn newton_step_inside_region() {
        let mut h = DenseSymmetric::diagonal(&[1.0, 1.0]);
        let res = solve_tr_subproblem(&mut h, &[1.0, 0.0], 10.0, 1e-10, 10);
        assert_eq!(res.termination, Termination::InteriorConvergence);
        assert!((res.step[0] + 1.0).abs() < 1e-14 && res.step[1].abs() < 1e-14);
        assert!((res.model_value + 0.5).abs() < 1e-14);
        assert_eq!(res.hvp_count, h.applications());
    }

    #[test]
    fn clipped_steepest_descent() {
        let mut h = DenseSymmetric::diagonal(&[1.0, 1.0]);
        let res = solve_tr_subproblem(&mut h, &[1.0, 0.0], 0.5, 1e-10, 10);
        assert_eq!(res.termination, Termination::BoundaryHit);
        assert!((res.step[0] + 0.5).abs() < 1e-14);
        assert!((res.model_value + 0.375).abs() < 1e-14);
    }

    #[test]
    fn negative_curvature_to_boundary() {
        let mut h = DenseSymmetric::diagonal(&[1.0, -1.0]);
        let res = solve_tr_subproblem(&mut h, &[0.0, 1.0], 1.0, 1e-10, 10);
        assert_eq!(res.termination, Termination::NegativeCurvature);
        assert!(res.step[0].abs() < 1e-14 && (res.step[1] + 1.0).abs() < 1e-14);
        assert!((res.model_value + 1.5).abs() < 1e-14);
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let mut h = DenseSymmetric::diagonal(&[2.0, 3.0]);
        let res = solve_tr_subproblem(&mut h, &[0.0, 0.0], 1.0, 1e-10, 10);
        assert_eq!(res.step, vec![0.0, 0.0]);
        assert_eq!(res.model_value, 0.0);
        assert_eq!(res.hvp_count, 0);
        assert_eq!(res.termination, Termination::InteriorConvergence);
    }

    #[test]
    fn iteration_cap_is_respected() {
        let mut h = DenseSymmetric::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let res = solve_tr_subproblem(&mut h, &[1.0, 1.0, 1.0, 1.0], 100.0, 1e-14, 2);
        assert_eq!(res.hvp_count, 2);
        assert_eq!(res.termination, Termination::MaxIterations);
        assert!(res.model_value < 0.0);
    }
}
