//! Exact output fidelities for superpositions of Gaussian wavefunctions.
//!
//! Wavefunctions here use the ordinary `δ`-normalized position basis, so that
//! `∫ |ψ|² dx = 1`. A wavefunction `φ` written against kets normalized as
//! `<x|y> = √2π δ(x - y)` corresponds to `ψ = φ / (2π)^{1/4}` per mode.
//!
//! Every fidelity of the distributor reduces to a finite sum of Gaussian
//! integrals over four real variables, each evaluated in closed form.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::gaussian::qid_position_map;
use super::kernel::KernelTriple;
use crate::error::{QidError, Result};
use crate::qudit::C64;

/// `coef · exp(-½ vᵀ Q v + lᵀ v)` with real symmetric `Q` and complex `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTerm {
    pub coef: C64,
    pub q: DMatrix<f64>,
    pub l: DVector<C64>,
}

impl GaussianTerm {
    pub fn new(coef: C64, q: DMatrix<f64>, l: DVector<C64>) -> Result<Self> {
        let n = l.len();
        if q.shape() != (n, n) || n == 0 {
            return Err(QidError::DimensionMismatch(format!("{}x{} form with {n} linear terms", q.nrows(), q.ncols())));
        }
        if (&q - q.transpose()).amax() > 1e-12 {
            return Err(QidError::InvalidArgument("quadratic form is not symmetric".into()));
        }
        Ok(GaussianTerm { coef, q, l })
    }

    pub fn vars(&self) -> usize {
        self.l.len()
    }

    pub fn eval(&self, v: &[f64]) -> C64 {
        let v = DVector::from_column_slice(v);
        let quad = (v.transpose() * &self.q * &v)[(0, 0)];
        let lin: C64 = self.l.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        self.coef * (lin - 0.5 * quad).exp()
    }

    pub fn conj(&self) -> Self {
        GaussianTerm { coef: self.coef.conj(), q: self.q.clone(), l: self.l.map(|c| c.conj()) }
    }

    /// Product over disjoint variables, `self` first.
    pub fn tensor(&self, other: &GaussianTerm) -> Self {
        let (a, b) = (self.vars(), other.vars());
        let mut q = DMatrix::zeros(a + b, a + b);
        q.view_mut((0, 0), (a, a)).copy_from(&self.q);
        q.view_mut((a, a), (b, b)).copy_from(&other.q);
        let l = DVector::from_iterator(a + b, self.l.iter().chain(other.l.iter()).copied());
        GaussianTerm { coef: self.coef * other.coef, q, l }
    }

    /// Product over the same variables.
    pub fn product(&self, other: &GaussianTerm) -> Self {
        GaussianTerm { coef: self.coef * other.coef, q: &self.q + &other.q, l: &self.l + &other.l }
    }

    /// Change of variables `v = M w`.
    pub fn substitute(&self, m: &DMatrix<f64>) -> Self {
        let mc = m.map(|v| C64::new(v, 0.0));
        GaussianTerm { coef: self.coef, q: m.transpose() * &self.q * m, l: mc.transpose() * &self.l }
    }

    /// `∫ dⁿv`; requires `Q` positive definite.
    pub fn integral(&self) -> Result<C64> {
        let n = self.vars();
        let chol = nalgebra::Cholesky::new(self.q.clone())
            .ok_or_else(|| QidError::InvalidArgument("quadratic form is not positive definite".into()))?;
        let det = chol.determinant();
        let qc = chol.inverse().map(|v| C64::new(v, 0.0));
        let exponent = 0.5 * (self.l.transpose() * qc * &self.l)[(0, 0)];
        Ok(self.coef * exponent.exp() * (2.0 * PI).powf(n as f64 / 2.0) / det.sqrt())
    }
}

/// Finite sum of Gaussian terms over a common set of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction {
    vars: usize,
    terms: Vec<GaussianTerm>,
}

impl Wavefunction {
    pub fn new(terms: Vec<GaussianTerm>) -> Result<Self> {
        let vars = terms.first().ok_or_else(|| QidError::InvalidArgument("no terms".into()))?.vars();
        if terms.iter().any(|t| t.vars() != vars) {
            return Err(QidError::DimensionMismatch("terms over different variable counts".into()));
        }
        Ok(Wavefunction { vars, terms })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn eval(&self, v: &[f64]) -> C64 {
        self.terms.iter().map(|t| t.eval(v)).sum()
    }

    pub fn conj(&self) -> Self {
        Wavefunction { vars: self.vars, terms: self.terms.iter().map(GaussianTerm::conj).collect() }
    }

    pub fn tensor(&self, other: &Wavefunction) -> Self {
        let terms = self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.tensor(b))).collect();
        Wavefunction { vars: self.vars + other.vars, terms }
    }

    pub fn product(&self, other: &Wavefunction) -> Result<Self> {
        if self.vars != other.vars {
            return Err(QidError::DimensionMismatch(format!("{} vs {} variables", self.vars, other.vars)));
        }
        let terms = self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.product(b))).collect();
        Ok(Wavefunction { vars: self.vars, terms })
    }

    pub fn substitute(&self, m: &DMatrix<f64>) -> Self {
        Wavefunction { vars: m.ncols(), terms: self.terms.iter().map(|t| t.substitute(m)).collect() }
    }

    pub fn integral(&self) -> Result<C64> {
        self.terms.iter().map(GaussianTerm::integral).sum()
    }

    /// `∫ |ψ|²`.
    pub fn norm_sqr(&self) -> Result<f64> {
        Ok(self.product(&self.conj())?.integral()?.re)
    }

    /// Coherent state centred on the phase-space point `(Re z, Im z)`.
    pub fn coherent(z: C64) -> Self {
        let coef = C64::new(PI.powf(-0.25) * (-0.5 * z.re * z.re).exp(), 0.0);
        let term = GaussianTerm { coef, q: DMatrix::from_element(1, 1, 1.0), l: DVector::from_element(1, z) };
        Wavefunction { vars: 1, terms: vec![term] }
    }

    /// Distributor program `α |Ξ₀₀(ξ)> + β |x₀(ξ)>|p₀(ξ)>` on two modes.
    pub fn distributor_program(triple: &KernelTriple) -> Self {
        let e = (2.0 * triple.xi().xi()).exp();
        let (s, d) = (0.5 * e + 0.5 / e, 0.5 / e - 0.5 * e);
        let prefactor = 1.0 / PI.sqrt();
        let entangled = GaussianTerm {
            coef: C64::new(triple.alpha() * prefactor, 0.0),
            q: DMatrix::from_row_slice(2, 2, &[s, d, d, s]),
            l: DVector::zeros(2),
        };
        let product = GaussianTerm {
            coef: C64::new(triple.beta() * prefactor, 0.0),
            q: DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]),
            l: DVector::zeros(2),
        };
        Wavefunction { vars: 2, terms: vec![entangled, product] }
    }

    /// Program of the coherent-state cloner: `exp(-(x₂² + x₃²)/2)` placed on
    /// `|x₂>|x₂ + x₃>`.
    pub fn coherent_cloner_program() -> Self {
        let term = GaussianTerm {
            coef: C64::new(1.0 / PI.sqrt(), 0.0),
            q: DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]),
            l: DVector::zeros(2),
        };
        Wavefunction { vars: 2, terms: vec![term] }
    }
}

/// `∫ |Ω|²` for the joint output `Ω(z) = ψ(x₁) μ(x₂, x₃)`, `z = A x`.
pub fn joint_norm(psi: &Wavefunction, program: &Wavefunction) -> Result<f64> {
    check_inputs(psi, program)?;
    let joint = joint_output(psi, program);
    joint.norm_sqr()
}

fn check_inputs(psi: &Wavefunction, program: &Wavefunction) -> Result<()> {
    if psi.vars() != 1 || program.vars() != 2 {
        return Err(QidError::DimensionMismatch(format!(
            "expected 1-mode input and 2-mode program, got {} and {}",
            psi.vars(),
            program.vars()
        )));
    }
    Ok(())
}

fn joint_output(psi: &Wavefunction, program: &Wavefunction) -> Wavefunction {
    let a_inv = qid_position_map().try_inverse().expect("unimodular");
    let m = DMatrix::from_fn(3, 3, |r, c| a_inv[(r, c)]);
    psi.tensor(program).substitute(&m)
}

/// `<t|ρ_j|t>` for output `j ∈ {1, 2, 3}` of the continuous distributor.
pub fn output_overlap(psi: &Wavefunction, program: &Wavefunction, output: usize, target: &Wavefunction) -> Result<f64> {
    check_inputs(psi, program)?;
    if !(1..=3).contains(&output) {
        return Err(QidError::IndexOutOfRange { index: output, bound: 4 });
    }
    if target.vars() != 1 {
        return Err(QidError::DimensionMismatch("target must be a single mode".into()));
    }
    let joint = joint_output(psi, program);
    // Variables w = (y, y', r₁, r₂): the kept coordinate on each side and the traced pair.
    let place = |kept: usize| {
        let mut m = DMatrix::zeros(3, 4);
        let mut traced = 2;
        for row in 0..3 {
            if row + 1 == output {
                m[(row, kept)] = 1.0;
            } else {
                m[(row, traced)] = 1.0;
                traced += 1;
            }
        }
        m
    };
    let pick = |col: usize| DMatrix::from_fn(1, 4, |_, c| if c == col { 1.0 } else { 0.0 });
    let bra = target.conj().substitute(&pick(0));
    let ket = target.substitute(&pick(1));
    let integrand = bra
        .product(&joint.substitute(&place(0)))?
        .product(&joint.conj().substitute(&place(1)))?
        .product(&ket)?;
    let value = integrand.integral()?;
    if value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        return Err(QidError::InvalidArgument(format!("fidelity has imaginary part {}", value.im)));
    }
    Ok(value.re.clamp(0.0, 1.0))
}

/// Fidelities of outputs 1 and 2 with `ψ` and of output 3 with `ψ*`.
pub fn distributor_fidelities(psi: &Wavefunction, program: &Wavefunction) -> Result<[f64; 3]> {
    let conj = psi.conj();
    Ok([
        output_overlap(psi, program, 1, psi)?,
        output_overlap(psi, program, 2, psi)?,
        output_overlap(psi, program, 3, &conj)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::gaussian::SqueezingParam;
    use crate::cv::quad::integrate_line;
    use approx::assert_abs_diff_eq;

    fn xi(v: f64) -> SqueezingParam {
        SqueezingParam::new(v).unwrap()
    }

    #[test]
    fn gaussian_integral_matches_quadrature() {
        let t = GaussianTerm::new(
            C64::new(0.7, 0.2),
            DMatrix::from_element(1, 1, 1.7),
            DVector::from_element(1, C64::new(0.3, -0.8)),
        )
        .unwrap();
        let re = integrate_line(|x| t.eval(&[x]).re, 0.0, 1.0, 1e-14, 1e-12).value;
        let im = integrate_line(|x| t.eval(&[x]).im, 0.0, 1.0, 1e-14, 1e-12).value;
        let exact = t.integral().unwrap();
        assert_abs_diff_eq!(exact.re, re, epsilon = 1e-11);
        assert_abs_diff_eq!(exact.im, im, epsilon = 1e-11);
        let bad = GaussianTerm::new(C64::new(1.0, 0.0), DMatrix::from_element(1, 1, -1.0), DVector::zeros(1)).unwrap();
        assert!(bad.integral().is_err());
    }

    #[test]
    fn normalizations() {
        for z in [C64::new(0.0, 0.0), C64::new(1.5, -0.4)] {
            assert_abs_diff_eq!(Wavefunction::coherent(z).norm_sqr().unwrap(), 1.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(Wavefunction::coherent_cloner_program().norm_sqr().unwrap(), 1.0, epsilon = 1e-13);
        for v in [0.0, 0.5, 1.0, 2.0] {
            for alpha in [0.0, 0.4, 1.0] {
                let triple = KernelTriple::from_alpha(xi(v), alpha).unwrap();
                let program = Wavefunction::distributor_program(&triple);
                assert_abs_diff_eq!(program.norm_sqr().unwrap(), 1.0, epsilon = 1e-12);
                let psi = Wavefunction::coherent(C64::new(0.3, 0.9));
                assert_abs_diff_eq!(joint_norm(&psi, &program).unwrap(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coherent_overlap() {
        let a = Wavefunction::coherent(C64::new(0.0, 0.0));
        let b = Wavefunction::coherent(C64::new(0.8, 0.5));
        let amp = a.conj().product(&b).unwrap().integral().unwrap();
        assert_abs_diff_eq!(amp.norm_sqr(), (-0.89f64 / 2.0).exp(), epsilon = 1e-13);
    }

    #[test]
    fn endpoints() {
        // α = 1 leaves the input on output 1.
        let psi = Wavefunction::coherent(C64::new(0.4, -1.2));
        let triple = KernelTriple::new(xi(1.0), 1.0, 0.0).unwrap();
        let f = distributor_fidelities(&psi, &Wavefunction::distributor_program(&triple)).unwrap();
        let e = 2f64.exp();
        // K₁ acts as Gaussian noise of covariance e^{-2ξ}.
        assert_abs_diff_eq!(f[0], 1.0 / (1.0 + 1.0 / e), epsilon = 1e-12);
        let triple = KernelTriple::new(xi(1.0), 0.0, 1.0).unwrap();
        let f = distributor_fidelities(&psi, &Wavefunction::distributor_program(&triple)).unwrap();
        // Output 2 picks up position noise from mode 2 and momentum noise from mode 3,
        // each of variance e^{-2ξ}/2.
        assert_abs_diff_eq!(f[1], 1.0 / (1.0 + 0.5 / e), epsilon = 1e-12);
    }

    #[test]
    fn coherent_cloner_dual_route() {
        let program = Wavefunction::coherent_cloner_program();
        for z in [C64::new(0.0, 0.0), C64::new(3.0, 4.0)] {
            let f = distributor_fidelities(&Wavefunction::coherent(z), &program).unwrap();
            assert_abs_diff_eq!(f[0], 2.0 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(f[1], 2.0 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(f[2], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn argument_checks() {
        let psi = Wavefunction::coherent(C64::new(0.0, 0.0));
        let program = Wavefunction::coherent_cloner_program();
        assert!(output_overlap(&psi, &program, 4, &psi).is_err());
        assert!(output_overlap(&program, &program, 1, &psi).is_err());
    }
}
