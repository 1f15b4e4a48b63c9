//! Gaussian states described by first and second moments.
//!
//! Units: ħ = 1, quadratures ordered `(x1, p1, x2, p2, ...)`, vacuum variance 1/2.
//! Wigner functions use the phase-space measure `dx dp / 2π`, so a single-mode
//! Gaussian reads `W(r) = exp(-½ dᵀ Σ⁻¹ d) / √det Σ` and integrates to `2π`.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{QidError, Result};
use crate::qudit::C64;

/// Uncertainty-relation tolerance on `Σ + iJ/2 ≥ 0`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Largest squeezing for which grid-based operations are attempted.
pub const XI_GRID_MAX: f64 = 3.0;

/// Squeezing `ξ ≥ 0` of the regularized position/momentum eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SqueezingParam(f64);

impl SqueezingParam {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(QidError::NegativeSqueezing(xi));
        }
        Ok(SqueezingParam(xi))
    }

    #[inline]
    pub fn xi(self) -> f64 {
        self.0
    }

    /// Mean excitation number `n̄ = sinh² ξ`.
    pub fn nbar(self) -> f64 {
        self.0.sinh().powi(2)
    }

    pub fn within_grid_range(self) -> bool {
        self.0 <= XI_GRID_MAX
    }

    pub fn check_grid_range(self) -> Result<()> {
        if self.within_grid_range() {
            Ok(())
        } else {
            Err(QidError::SqueezingTooLarge { xi: self.0, max: XI_GRID_MAX })
        }
    }
}

/// Symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 || !n.is_multiple_of(2) || cov.shape() != (n, n) {
            return Err(QidError::InvalidCovariance(format!(
                "mean of length {n} with a {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let asymmetry = (&cov - cov.transpose()).amax();
        if asymmetry > 1e-12 {
            return Err(QidError::InvalidCovariance(format!("not symmetric (defect {asymmetry:e})")));
        }
        let state = GaussianState { mean, cov };
        let min = state.uncertainty_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -UNCERTAINTY_TOL {
            return Err(QidError::InvalidCovariance(format!("violates the uncertainty relation ({min:e})")));
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState { mean: DVector::zeros(2 * modes), cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5 }
    }

    /// Coherent state centred on the phase-space point `(Re z, Im z)`.
    pub fn coherent(z: C64) -> Self {
        GaussianState { mean: DVector::from_vec(vec![z.re, z.im]), cov: DMatrix::identity(2, 2) * 0.5 }
    }

    /// Thermal state with `n̄` mean excitations.
    pub fn thermal(nbar: f64) -> Self {
        GaussianState { mean: DVector::zeros(2), cov: DMatrix::identity(2, 2) * (0.5 + nbar) }
    }

    /// Pure state with real wavefunction `exp(-½ xᵀ Q x)` (Q positive definite).
    pub fn from_real_quadratic(q: &DMatrix<f64>) -> Result<Self> {
        let modes = q.nrows();
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| QidError::InvalidCovariance("singular quadratic form".into()))?;
        let mut cov = DMatrix::zeros(2 * modes, 2 * modes);
        for i in 0..modes {
            for j in 0..modes {
                cov[(2 * i, 2 * j)] = 0.5 * q_inv[(i, j)];
                cov[(2 * i + 1, 2 * j + 1)] = 0.5 * q[(i, j)];
            }
        }
        Self::new(DVector::zeros(2 * modes), cov)
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Eigenvalues of `Σ + iJ/2`; all non-negative for a physical state.
    pub fn uncertainty_eigenvalues(&self) -> Vec<f64> {
        let j = symplectic_form(self.modes());
        let m = DMatrix::from_fn(self.cov.nrows(), self.cov.ncols(), |r, c| C64::new(self.cov[(r, c)], 0.5 * j[(r, c)]));
        nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    }

    /// Reduction to the listed modes, in the order given.
    pub fn reduce(&self, modes: &[usize]) -> Result<GaussianState> {
        let count = self.modes();
        if modes.is_empty() || modes.iter().any(|&m| m >= count) {
            return Err(QidError::InvalidArgument(format!("cannot select modes {modes:?} of {count}")));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_fn(idx.len(), |i, _| self.mean[idx[i]]);
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(a + b);
        mean.rows_mut(0, a).copy_from(&self.mean);
        mean.rows_mut(a, b).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Evolution under a linear symplectic map: `(S μ, S Σ Sᵀ)`.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<GaussianState> {
        if s.shape() != self.cov.shape() {
            return Err(QidError::DimensionMismatch(format!(
                "{}x{} map on {} modes",
                s.nrows(),
                s.ncols(),
                self.modes()
            )));
        }
        let cov = s * &self.cov * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianState::new(s * &self.mean, cov)
    }

    /// Phase-space transpose, `p -> -p` on every mode (`|z> -> |z*>` for coherent states).
    pub fn transpose(&self) -> GaussianState {
        let n = self.mean.len();
        let flip = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let mean = self.mean.component_mul(&flip);
        let cov = DMatrix::from_fn(n, n, |r, c| self.cov[(r, c)] * flip[r] * flip[c]);
        GaussianState { mean, cov }
    }

    /// Wigner function at a phase-space point, `dx dp / 2π` normalization.
    pub fn wigner(&self, point: &[f64]) -> f64 {
        let d = DVector::from_fn(self.mean.len(), |i, _| point[i] - self.mean[i]);
        let inv = self.cov.clone().try_inverse().expect("covariance is positive definite");
        let quad = (d.transpose() * inv * &d)[(0, 0)];
        (-0.5 * quad).exp() / self.cov.determinant().sqrt()
    }

    pub fn is_coherent(&self, tol: f64) -> bool {
        self.modes() == 1 && (&self.cov - DMatrix::identity(2, 2) * 0.5).amax() <= tol
    }
}

/// Regularized position eigenstate `|x0(ξ)>`: variances `e^{-2ξ}/2`, `e^{2ξ}/2`.
pub fn regularized_x0(xi: SqueezingParam) -> GaussianState {
    let e = (2.0 * xi.xi()).exp();
    GaussianState { mean: DVector::zeros(2), cov: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5 / e, 0.5 * e])) }
}

/// Regularized momentum eigenstate `|p0(ξ)>`.
pub fn regularized_p0(xi: SqueezingParam) -> GaussianState {
    let e = (2.0 * xi.xi()).exp();
    GaussianState { mean: DVector::zeros(2), cov: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5 * e, 0.5 / e])) }
}

/// Two-mode squeezed vacuum with `Var(x1 - x2) = Var(p1 + p2) = e^{-2ξ}`.
pub fn regularized_epr(xi: SqueezingParam) -> GaussianState {
    let c = (2.0 * xi.xi()).cosh() * 0.5;
    let s = (2.0 * xi.xi()).sinh() * 0.5;
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]);
    GaussianState { mean: DVector::zeros(4), cov }
}

/// Either mode of the two-mode squeezed vacuum: thermal with `n̄ = sinh² ξ`.
pub fn thermal_reduction(xi: SqueezingParam) -> GaussianState {
    regularized_epr(xi).reduce(&[0]).expect("two-mode state")
}

/// Position block of the QID: `z1 = x1 - x2 + x3`, `z2 = x1 + x2`, `z3 = x1 + x3`.
pub fn qid_position_map() -> Matrix3<f64> {
    Matrix3::new(1.0, -1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0)
}

/// Symplectic matrix of the QID on `(x1, p1, x2, p2, x3, p3)`: positions map by
/// `A`, momenta by `A^{-T}`.
pub fn qid_symplectic() -> DMatrix<f64> {
    let a = qid_position_map();
    let b = a.try_inverse().expect("unimodular").transpose();
    let mut s = DMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            s[(2 * i, 2 * j)] = a[(i, j)];
            s[(2 * i + 1, 2 * j + 1)] = b[(i, j)];
        }
    }
    s
}

/// Single-mode Gaussian fidelity (Uhlmann), valid for mixed states.
pub fn gaussian_fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    for s in [a, b] {
        if s.modes() != 1 {
            return Err(QidError::UnsupportedModes(s.modes()));
        }
    }
    let sum = a.cov() + b.cov();
    let delta = sum.determinant();
    let purity_term = ((4.0 * a.cov().determinant() - 1.0) * (4.0 * b.cov().determinant() - 1.0) / 4.0).max(0.0);
    let d = a.mean() - b.mean();
    let inv = sum.try_inverse().ok_or_else(|| QidError::InvalidCovariance("singular sum".into()))?;
    let exponent = -0.5 * (d.transpose() * inv * &d)[(0, 0)];
    let f = exponent.exp() / ((delta + purity_term).sqrt() - purity_term.sqrt());
    Ok(f.clamp(0.0, 1.0))
}

/// Program for the coherent-state cloner: wavefunction
/// `exp(-(x2² + x3²)/2)` placed on `|x2>|x2 + x3>`, i.e. `exp(-½ yᵀ Q y)` with
/// `Q = [[2, -1], [-1, 1]]` in the register coordinates `y`.
pub fn coherent_cloner_program() -> GaussianState {
    let q = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]);
    GaussianState::from_real_quadratic(&q).expect("positive definite form")
}

/// The three single-mode outputs of the coherent-state cloner.
#[derive(Clone, Debug)]
pub struct CoherentClonerOutput {
    pub outputs: [GaussianState; 3],
}

impl CoherentClonerOutput {
    /// Fidelities of outputs 1 and 2 with the input.
    pub fn clone_fidelities(&self, input: &GaussianState) -> Result<[f64; 2]> {
        Ok([gaussian_fidelity(input, &self.outputs[0])?, gaussian_fidelity(input, &self.outputs[1])?])
    }

    /// Fidelity of output 3 with the transposed input.
    pub fn anticlone_fidelity(&self, input: &GaussianState) -> Result<f64> {
        gaussian_fidelity(&input.transpose(), &self.outputs[2])
    }
}

/// Runs a coherent input through the QID with the Gaussian cloner program.
pub fn coherent_cloner(input: &GaussianState) -> Result<CoherentClonerOutput> {
    if input.modes() != 1 {
        return Err(QidError::UnsupportedModes(input.modes()));
    }
    if !input.is_coherent(UNCERTAINTY_TOL) {
        return Err(QidError::NotCoherent("covariance differs from identity/2".into()));
    }
    let joint = input.tensor(&coherent_cloner_program()).transform(&qid_symplectic())?;
    Ok(CoherentClonerOutput { outputs: [joint.reduce(&[0])?, joint.reduce(&[1])?, joint.reduce(&[2])?] })
}
