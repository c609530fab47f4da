//! Dense complex kernels used by the solvers.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::complex_normal;
use crate::{CMat, CVec};

const HERMITIAN_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 500;
const POWER_ITER_TOL: f64 = 1e-8;
const POWER_ITER_RESIDUAL: f64 = 1e-5;

/// Square matrix with `||A - A^H||_F < 1e-10 ||A||_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} is not square",
                a.shape()
            )));
        }
        let norm = a.norm();
        let asym = (&a - a.adjoint()).norm();
        if asym > HERMITIAN_TOL * norm {
            return Err(Error::NotHermitian(asym / norm));
        }
        Ok(Self(a))
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing rounding noise.
    pub(crate) fn from_parts_unchecked(a: CMat) -> Self {
        let sym = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        Self(sym)
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Solves `A X = B` for positive definite `A` by Cholesky factorization.
pub fn hermitian_solve(a: &HermitianMatrix, b: &CMat) -> Result<CMat> {
    if b.nrows() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} rows, matrix is {}x{}",
            b.nrows(),
            a.dim(),
            a.dim()
        )));
    }
    let chol = a.0.clone().cholesky().ok_or(Error::Singular)?;
    // complex square roots succeed on negative pivots, so check them explicitly
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(Error::Singular);
    }
    Ok(chol.solve(b))
}

#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: CVec,
    pub iterations: usize,
    pub residual: f64,
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration.
pub fn dominant_eigenvalue(a: &HermitianMatrix) -> f64 {
    dominant_eigenpair(a, None).value
}

/// Power iteration from `start` (or a fixed pseudo-random vector). Stops once
/// the Rayleigh quotient changes by less than 1e-8 relative and the residual
/// `||Av - lv||` is below `1e-5 l`, or after 500 iterations.
pub fn dominant_eigenpair(a: &HermitianMatrix, start: Option<&CVec>) -> EigenEstimate {
    let n = a.dim();
    let m = &a.0;
    let zero = EigenEstimate {
        value: 0.0,
        vector: CVec::zeros(n),
        iterations: 0,
        residual: 0.0,
    };
    if m.norm() == 0.0 {
        return zero;
    }
    let mut v = match start {
        Some(s) if s.len() == n && s.norm() > 0.0 => s.normalize(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
            DVector::from_fn(n, |_, _| complex_normal(&mut rng)).normalize()
        }
    };
    let mut av = m * &v;
    let mut lambda = v.dotc(&av).re;
    let mut residual = (&av - &v * Complex64::new(lambda, 0.0)).norm();
    let mut iterations = 0;
    while iterations < POWER_ITER_MAX {
        iterations += 1;
        let norm = av.norm();
        if norm == 0.0 {
            // start vector in the null space; restart along the largest column
            let (col, _) = (0..n)
                .map(|j| (j, m.column(j).norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            v = m.column(col).normalize();
        } else {
            v = av / Complex64::new(norm, 0.0);
        }
        av = m * &v;
        let next = v.dotc(&av).re;
        residual = (&av - &v * Complex64::new(next, 0.0)).norm();
        let change = (next - lambda).abs();
        lambda = next;
        if change <= POWER_ITER_TOL * lambda.abs() && residual <= POWER_ITER_RESIDUAL * lambda.abs()
        {
            break;
        }
    }
    EigenEstimate {
        value: lambda.max(0.0),
        vector: v,
        iterations,
        residual,
    }
}

/// How [`project_per_antenna`] maps a matrix into the per-antenna power set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// Nearest feasible point: rows above the cap are shrunk onto it.
    #[default]
    Euclidean,
    /// Every row rescaled to the cap exactly; maximizes `Re tr(W^H S)`.
    Boundary,
    /// Row `i` scaled by `r / ||s_i||^2` (not feasible in general). Kept for A/B runs.
    InverseSquaredNorm,
}

/// Maps each row `s_i` of `s` according to `mode`, with cap `r = sqrt(p_tx / n_rows)`.
pub fn project_per_antenna(s: &CMat, p_tx: f64, mode: ProjectionMode) -> Result<CMat> {
    let cap = (p_tx / s.nrows() as f64).sqrt();
    let mut out = s.clone();
    for i in 0..s.nrows() {
        let norm = s.row(i).norm();
        let scale = match mode {
            ProjectionMode::Euclidean => {
                // rows already on the boundary up to rounding stay untouched
                if norm > cap * (1.0 + 1e-13) {
                    cap / norm
                } else {
                    1.0
                }
            }
            ProjectionMode::Boundary | ProjectionMode::InverseSquaredNorm if norm == 0.0 => {
                return Err(Error::DegenerateRow { row: i });
            }
            ProjectionMode::Boundary => cap / norm,
            ProjectionMode::InverseSquaredNorm => cap / (norm * norm),
        };
        if scale != 1.0 {
            out.row_mut(i).scale_mut(scale);
        }
    }
    Ok(out)
}

/// Both sides of `tr(W W^H A) >= 2 Re tr(P W^H A) - tr(P P^H A)`.
pub fn quadratic_minorizer(w: &CMat, p: &CMat, a: &HermitianMatrix) -> (f64, f64) {
    let a = &a.0;
    let lhs = (w * w.adjoint() * a).trace().re;
    let rhs = 2.0 * (p * w.adjoint() * a).trace().re - (p * p.adjoint() * a).trace().re;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;
    use nalgebra::{dmatrix, DMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm(a: CMat) -> HermitianMatrix {
        HermitianMatrix::new(a).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = dmatrix![c(1.0, 0.0), c(2.0, 0.0); c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            HermitianMatrix::new(a),
            Err(Error::NotHermitian(_))
        ));
        assert!(HermitianMatrix::new(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn solve_identity_and_scalar() {
        let mut r = rng(1);
        let b = random_cmat(&mut r, 4, 3);
        let x = hermitian_solve(&herm(CMat::identity(4, 4)), &b).unwrap();
        assert!((x - &b).norm() < 1e-15);
        let two = CMat::identity(3, 3) * c(2.0, 0.0);
        let x = hermitian_solve(&herm(two), &CMat::identity(3, 3)).unwrap();
        assert!((x - CMat::identity(3, 3) * c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_random_pd_residual() {
        let mut r = rng(2);
        for _ in 0..20 {
            let a = random_psd(&mut r, 8) + CMat::identity(8, 8) * c(0.1, 0.0);
            let b = random_cmat(&mut r, 8, 3);
            let a = HermitianMatrix::from_parts_unchecked(a);
            let x = hermitian_solve(&a, &b).unwrap();
            assert!((a.as_matrix() * x - &b).norm() <= 1e-8 * b.norm());
        }
    }

    #[test]
    fn solve_flags_indefinite() {
        let a = herm(dmatrix![c(1.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(
            hermitian_solve(&a, &CMat::identity(2, 2)),
            Err(Error::Singular)
        ));
        assert!(hermitian_solve(&a, &CMat::identity(3, 3)).is_err());
    }

    #[test]
    fn eigen_closed_forms() {
        assert!((dominant_eigenvalue(&herm(CMat::identity(4, 4))) - 1.0).abs() < 1e-12);
        let a = herm(dmatrix![c(2.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(2.0, 0.0)]);
        // eigenvalues of [[a,b],[b,a]] are a +- b
        assert!((dominant_eigenvalue(&a) - 3.0).abs() < 3e-6);
        assert_eq!(dominant_eigenvalue(&herm(CMat::zeros(3, 3))), 0.0);
    }

    #[test]
    fn eigen_matches_full_decomposition() {
        let mut r = rng(3);
        for n in [2, 5, 16, 32] {
            let a = random_psd(&mut r, n);
            let full = a.clone().symmetric_eigenvalues().max();
            let est = dominant_eigenpair(&HermitianMatrix::from_parts_unchecked(a), None);
            assert!(
                (est.value - full).abs() <= 1e-6 * full,
                "n={n}: {} vs {full}",
                est.value
            );
        }
    }

    #[test]
    fn eigen_dominates_rayleigh_quotients() {
        let mut r = rng(4);
        let a = random_psd(&mut r, 10);
        let lam = dominant_eigenvalue(&HermitianMatrix::from_parts_unchecked(a.clone()));
        for _ in 0..100 {
            let x = random_cmat(&mut r, 10, 1);
            let q = (x.adjoint() * &a * &x)[(0, 0)].re / x.norm_squared();
            assert!(lam >= q - 1e-6 * lam);
        }
    }

    #[test]
    fn eigen_low_rank_with_null_start() {
        // start vector orthogonal to the range of a rank-one matrix
        let u = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let a = HermitianMatrix::from_parts_unchecked(&u * u.adjoint() * c(5.0, 0.0));
        let start = CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let est = dominant_eigenpair(&a, Some(&start));
        assert!((est.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let s = dmatrix![c(0.6, 0.0), c(0.0, 0.8); c(0.1, 0.0), c(0.0, 0.0)];
        let e = project_per_antenna(&s, 2.0, ProjectionMode::Euclidean).unwrap();
        assert_eq!(e, s);
        let s = dmatrix![c(3.0, 0.0), c(4.0, 0.0); c(0.0, 0.0), c(0.5, 0.0)];
        let b = project_per_antenna(&s, 2.0, ProjectionMode::Boundary).unwrap();
        assert!((b[(0, 0)] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((b[(0, 1)] - c(0.8, 0.0)).norm() < 1e-15);
        assert!((b.row(1).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_rejects_zero_rows() {
        let s = DMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            project_per_antenna(&s, 1.0, ProjectionMode::Boundary),
            Err(Error::DegenerateRow { row: 1 })
        ));
        assert!(project_per_antenna(&s, 1.0, ProjectionMode::Euclidean).is_ok());
    }

    #[test]
    fn printed_formula_scales_by_inverse_square() {
        let s = DMatrix::from_row_slice(1, 2, &[c(3.0, 0.0), c(4.0, 0.0)]);
        let p = project_per_antenna(&s, 1.0, ProjectionMode::InverseSquaredNorm).unwrap();
        assert!((p.row(0).norm() - 1.0 / 5.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn projection_properties(seed in 0u64..10_000, p_tx in 0.01f64..100.0, scale in 0.01f64..10.0) {
            let mut r = rng(seed);
            let s = random_cmat(&mut r, 6, 3) * c(scale, 0.0);
            let cap = p_tx / 6.0;
            let e = project_per_antenna(&s, p_tx, ProjectionMode::Euclidean).unwrap();
            let ee = project_per_antenna(&e, p_tx, ProjectionMode::Euclidean).unwrap();
            proptest::prop_assert_eq!(&e, &ee);
            let b = project_per_antenna(&s, p_tx, ProjectionMode::Boundary).unwrap();
            for i in 0..6 {
                proptest::prop_assert!(e.row(i).norm_squared() <= cap * (1.0 + 1e-12));
                proptest::prop_assert!(e.row(i).norm() <= s.row(i).norm() * (1.0 + 1e-15));
                proptest::prop_assert!((b.row(i).norm_squared() - cap).abs() <= 1e-12 * cap);
            }
        }

        #[test]
        fn minorizer_inequality(seed in 0u64..10_000) {
            let mut r = rng(seed);
            let w = random_cmat(&mut r, 5, 3);
            let p = random_cmat(&mut r, 5, 3);
            let a = HermitianMatrix::from_parts_unchecked(random_psd(&mut r, 5));
            let (lhs, rhs) = quadratic_minorizer(&w, &p, &a);
            proptest::prop_assert!(lhs >= rhs - 1e-10 * lhs.abs().max(1.0));
            let (l2, r2) = quadratic_minorizer(&w, &w, &a);
            proptest::prop_assert!((l2 - r2).abs() <= 1e-10 * l2.abs().max(1.0));
        }
    }

    #[test]
    fn minorizer_zero_matrix() {
        let mut r = rng(5);
        let w = random_cmat(&mut r, 4, 2);
        let p = random_cmat(&mut r, 4, 2);
        let (l, rr) = quadratic_minorizer(&w, &p, &herm(CMat::zeros(4, 4)));
        assert_eq!((l, rr), (0.0, 0.0));
    }

    #[test]
    fn minorizer_strict_when_w_differs_and_a_pd() {
        let mut r = rng(6);
        let a = HermitianMatrix::from_parts_unchecked(random_psd(&mut r, 4) + CMat::identity(4, 4));
        let w = random_cmat(&mut r, 4, 2);
        let p = &w + random_cmat(&mut r, 4, 2) * c(1e-3, 0.0);
        let (l, rr) = quadratic_minorizer(&w, &p, &a);
        assert!(l - rr > 0.0);
    }
}
