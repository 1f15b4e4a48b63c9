//! Integral kernels of the continuous-variable distributor.
//!
//! Output 1 of the continuous QID is `ρ₁(y, y') ∝ ∫ dη K(y - y'; η) ψ(y - η) ψ*(y' - η)`
//! with `K = α² K₁ + β² K₂ + αβ K₃`. `K₁` comes from the entangled part of the
//! program, `K₂` from the product part and `K₃` from their interference.

use std::f64::consts::PI;

use super::gaussian::SqueezingParam;
use super::quad::{integrate_line, integrate_pieces, trapezoid};
use super::wigner::{GridSpec, WignerGrid};
use crate::error::{QidError, Result};

const QUAD_ABS: f64 = 1e-13;
const QUAD_REL: f64 = 1e-10;

/// The three kernel components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `K₁`: entangled program part; a narrow peak that keeps the input.
    Retain,
    /// `K₂`: product program part; thermal-like noise.
    Noise,
    /// `K₃`: interference between the two parts.
    Cross,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Retain, Kernel::Noise, Kernel::Cross];

    pub fn index(self) -> usize {
        match self {
            Kernel::Retain => 1,
            Kernel::Noise => 2,
            Kernel::Cross => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Kernel::Retain),
            2 => Ok(Kernel::Noise),
            3 => Ok(Kernel::Cross),
            _ => Err(QidError::InvalidArgument(format!("kernel index {i} (expected 1, 2 or 3)"))),
        }
    }
}

/// Overlap weight `4/√(4 + 2 sinh² 2ξ)` between the two program parts.
pub fn cross_weight(xi: SqueezingParam) -> f64 {
    4.0 / (4.0 + 2.0 * (2.0 * xi.xi()).sinh().powi(2)).sqrt()
}

/// Residual of the program normalization `α² + β² + αβ·w(ξ) - 1`.
pub fn cv_norm_constraint(alpha: f64, beta: f64, xi: SqueezingParam) -> f64 {
    alpha * alpha + beta * beta + alpha * beta * cross_weight(xi) - 1.0
}

/// Non-negative `β` satisfying the normalization for a given `α ∈ [0, 1]`.
pub fn cv_solve_beta(alpha: f64, xi: SqueezingParam) -> f64 {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1], got {alpha}");
    let h = 0.5 * cross_weight(xi) * alpha;
    let disc = h * h - alpha * alpha + 1.0;
    assert!(disc >= 0.0, "no real root");
    (disc.sqrt() - h).max(0.0)
}

/// Symmetric weights `α = β` satisfying the normalization.
pub fn cv_symmetric_alpha(xi: SqueezingParam) -> f64 {
    1.0 / (2.0 + cross_weight(xi)).sqrt()
}

/// Kernel weights `(ξ, α, β)` obeying the normalization condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelTriple {
    xi: SqueezingParam,
    alpha: f64,
    beta: f64,
}

impl KernelTriple {
    pub fn new(xi: SqueezingParam, alpha: f64, beta: f64) -> Result<Self> {
        let residual = cv_norm_constraint(alpha, beta, xi);
        if residual.abs() > 1e-10 {
            return Err(QidError::ConstraintViolated(residual));
        }
        Ok(KernelTriple { xi, alpha, beta })
    }

    /// `β` solved from `α`.
    pub fn from_alpha(xi: SqueezingParam, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(QidError::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Self::new(xi, alpha, cv_solve_beta(alpha, xi))
    }

    pub fn symmetric(xi: SqueezingParam) -> Self {
        let a = cv_symmetric_alpha(xi);
        KernelTriple { xi, alpha: a, beta: a }
    }

    pub fn xi(&self) -> SqueezingParam {
        self.xi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Coefficient of each kernel in the total: `α²`, `β²`, `αβ`.
    pub fn coefficient(&self, which: Kernel) -> f64 {
        match which {
            Kernel::Retain => self.alpha * self.alpha,
            Kernel::Noise => self.beta * self.beta,
            Kernel::Cross => self.alpha * self.beta,
        }
    }

    /// Full kernel `K(x̄; η)`.
    pub fn eval(&self, xbar: f64, eta: f64) -> f64 {
        Kernel::ALL.iter().map(|&k| self.coefficient(k) * kernel_eval(k, self.xi, xbar, eta)).sum()
    }
}

struct CrossCoefficients {
    prefactor: f64,
    a: f64,
    c: f64,
    b: f64,
}

fn cross_coefficients(xi: f64) -> CrossCoefficients {
    let d = 3.0 * (-2.0 * xi).exp() + (2.0 * xi).exp();
    let e4 = (-4.0 * xi).exp();
    CrossCoefficients {
        prefactor: 2.0 / d.sqrt(),
        a: (1.0 + e4) / d,
        c: (2.0 + (2.0 * xi).sinh().powi(2)) / d,
        b: (1.0 - e4) / d,
    }
}

/// Closed-form kernel component `K_j(x̄; η)`.
pub fn kernel_eval(which: Kernel, xi: SqueezingParam, xbar: f64, eta: f64) -> f64 {
    let xi = xi.xi();
    match which {
        Kernel::Retain => {
            let e = (2.0 * xi).exp();
            xi.exp() * (-xbar * xbar / (2.0 * e) - e * eta * eta / 2.0).exp()
        }
        Kernel::Noise => {
            let c = (2.0 * xi).cosh();
            (-c * xbar * xbar / 2.0 - eta * eta / (2.0 * c)).exp() / c.sqrt()
        }
        Kernel::Cross => {
            let k = cross_coefficients(xi);
            let base = -k.a * xbar * xbar - k.c * eta * eta;
            let lin = k.b * eta * xbar;
            k.prefactor * ((base + lin).exp() + (base - lin).exp())
        }
    }
}

/// Second derivative `∂²K_j/∂x̄²` at `x̄ = 0`.
pub fn kernel_curvature(which: Kernel, xi: SqueezingParam, eta: f64) -> f64 {
    let at_zero = kernel_eval(which, xi, 0.0, eta);
    let v = xi.xi();
    match which {
        Kernel::Retain => -(-2.0 * v).exp() * at_zero,
        Kernel::Noise => -(2.0 * v).cosh() * at_zero,
        Kernel::Cross => {
            let k = cross_coefficients(v);
            (k.b * k.b * eta * eta - 2.0 * k.a) * at_zero
        }
    }
}

/// Entangled part of the program wavefunction.
pub fn program_entangled(xi: SqueezingParam, x2: f64, x3: f64) -> f64 {
    let e = (2.0 * xi.xi()).exp();
    std::f64::consts::SQRT_2 * (-e * (x2 - x3).powi(2) / 4.0 - (x2 + x3).powi(2) / (4.0 * e)).exp()
}

/// Product part `φ_x0(x2) φ_p0(x3)` of the program wavefunction.
pub fn program_product(xi: SqueezingParam, x2: f64, x3: f64) -> f64 {
    let e = (2.0 * xi.xi()).exp();
    std::f64::consts::SQRT_2 * (-e * x2 * x2 / 2.0 - x3 * x3 / (2.0 * e)).exp()
}

/// Kernel component by direct quadrature over the program wavefunctions,
/// `K(x̄; η) = (1/2√2π) ∫ dχ μ(u(x̄)) μ(u(0))` with
/// `u(x) = ((χ - η)/2 - x, (χ + η)/2 - x)`.
pub fn kernel_eval_quadrature(which: Kernel, xi: SqueezingParam, xbar: f64, eta: f64) -> f64 {
    let arg = |chi: f64, x: f64| ((chi - eta) / 2.0 - x, (chi + eta) / 2.0 - x);
    let integrand = |chi: f64| {
        let (a1, b1) = arg(chi, xbar);
        let (a0, b0) = arg(chi, 0.0);
        match which {
            Kernel::Retain => program_entangled(xi, a1, b1) * program_entangled(xi, a0, b0),
            Kernel::Noise => program_product(xi, a1, b1) * program_product(xi, a0, b0),
            Kernel::Cross => {
                program_entangled(xi, a1, b1) * program_product(xi, a0, b0)
                    + program_product(xi, a1, b1) * program_entangled(xi, a0, b0)
            }
        }
    };
    let narrow = 2.0 * (-xi.xi()).exp();
    let broad = 2.0 * xi.xi().exp();
    let peaks = [0.0, 2.0 * xbar, eta, eta + 2.0 * xbar];
    let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min) - 40.0 * broad;
    let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 40.0 * broad;
    let mut breaks = vec![lo, hi];
    for p in peaks {
        for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
            breaks.push(p + k * narrow);
        }
    }
    integrate_pieces(integrand, &breaks, QUAD_ABS, QUAD_REL).value / (2.0 * (2.0 * PI).sqrt())
}

/// Width scale of `K_j(0; η)` in `η`.
fn eta_scale(which: Kernel, xi: SqueezingParam) -> f64 {
    let v = xi.xi();
    match which {
        Kernel::Retain => (-v).exp(),
        Kernel::Noise => (2.0 * v).cosh().sqrt(),
        Kernel::Cross => (1.0 / (2.0 * cross_coefficients(v).c)).sqrt(),
    }
}

/// `(1/√2π) ∫ dη K_j(0; η)` by adaptive quadrature of the closed form.
pub fn kernel_norm(which: Kernel, xi: SqueezingParam) -> f64 {
    let q = integrate_line(|eta| kernel_eval(which, xi, 0.0, eta), 0.0, eta_scale(which, xi), QUAD_ABS, QUAD_REL);
    q.value / (2.0 * PI).sqrt()
}

/// Same normalization with the kernel itself obtained by quadrature.
pub fn kernel_norm_quadrature(which: Kernel, xi: SqueezingParam) -> f64 {
    let q = integrate_line(
        |eta| kernel_eval_quadrature(which, xi, 0.0, eta),
        0.0,
        eta_scale(which, xi),
        1e-11,
        1e-9,
    );
    q.value / (2.0 * PI).sqrt()
}

/// Exact normalization of each component.
pub fn kernel_norm_exact(which: Kernel, xi: SqueezingParam) -> f64 {
    match which {
        Kernel::Retain | Kernel::Noise => 1.0,
        Kernel::Cross => cross_weight(xi),
    }
}

/// Weight and per-weight second moments of a kernel's Wigner function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelMoments {
    pub weight: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl KernelMoments {
    pub fn width(&self) -> f64 {
        self.var_x.min(self.var_p).sqrt()
    }
}

/// Moments of `W^{K_j}` under `dx dp / 2π`, computed from the kernel directly.
pub fn kernel_moments(which: Kernel, xi: SqueezingParam) -> KernelMoments {
    let scale = eta_scale(which, xi);
    let norm = (2.0 * PI).sqrt();
    let weight = kernel_norm(which, xi);
    let mx = integrate_line(|eta| eta * eta * kernel_eval(which, xi, 0.0, eta), 0.0, scale, QUAD_ABS, QUAD_REL).value
        / norm;
    let mp = -integrate_line(|eta| kernel_curvature(which, xi, eta), 0.0, scale, QUAD_ABS, QUAD_REL).value / norm;
    KernelMoments { weight, var_x: mx / weight, var_p: mp / weight }
}

/// Closed-form Wigner function `W^{K_j}(x, p)` of a kernel component.
pub fn kernel_wigner_eval(which: Kernel, xi: SqueezingParam, x: f64, p: f64) -> f64 {
    let v = xi.xi();
    match which {
        Kernel::Retain => {
            let e = (2.0 * v).exp();
            e * (-e * (x * x + p * p) / 2.0).exp()
        }
        Kernel::Noise => {
            let c = (2.0 * v).cosh();
            (-(x * x + p * p) / (2.0 * c)).exp() / c
        }
        Kernel::Cross => {
            let k = cross_coefficients(v);
            let gauss = (PI / k.a).sqrt() * ((k.b * k.b * x * x - p * p) / (4.0 * k.a) - k.c * x * x).exp();
            k.prefactor * 2.0 * gauss * (k.b * x * p / (2.0 * k.a)).cos() / (2.0 * PI).sqrt()
        }
    }
}

/// `W^{K_j}(x, p) = (1/√2π) ∫ dz e^{ipz} K_j(z; x)` by trapezoid quadrature of
/// the kernel values.
pub fn kernel_wigner_fourier(which: Kernel, xi: SqueezingParam, x: f64, p: f64) -> f64 {
    let v = xi.xi();
    let (z_coef, shift) = match which {
        Kernel::Retain => ((-2.0 * v).exp() / 2.0, 0.0),
        Kernel::Noise => ((2.0 * v).cosh() / 2.0, 0.0),
        Kernel::Cross => {
            let k = cross_coefficients(v);
            (k.a, (k.b * x).abs() / (2.0 * k.a))
        }
    };
    let sigma = (1.0 / (2.0 * z_coef)).sqrt();
    let half = shift + 14.0 * sigma;
    let h = (2.0 * PI / (p.abs() + 12.0 / sigma)).min(sigma / 2.0);
    let nodes = (2.0 * half / h).ceil() as usize + 1;
    // The kernels are even in z, so only the cosine part survives.
    trapezoid(|z| (p * z).cos() * kernel_eval(which, xi, z, x), -half, half, nodes) / (2.0 * PI).sqrt()
}

/// Large-squeezing form of `W^{K₃}`: `2√2 exp(-e^{2ξ}(x² + p²)/4)`.
pub fn kernel_wigner_asymptotic(xi: SqueezingParam, x: f64, p: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (-(2.0 * xi.xi()).exp() * (x * x + p * p) / 4.0).exp()
}

/// Kernel Wigner function on a grid, refusing unresolvable widths.
pub fn kernel_wigner(which: Kernel, xi: SqueezingParam, spec: &GridSpec) -> Result<WignerGrid> {
    xi.check_grid_range()?;
    let width = kernel_moments(which, xi).width();
    let spacing = spec.dx().max(spec.dp());
    if width < 2.0 * spacing {
        return Err(QidError::Unresolved { width, spacing });
    }
    Ok(WignerGrid::from_fn(spec.clone(), |x, p| kernel_wigner_eval(which, xi, x, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xi(v: f64) -> SqueezingParam {
        SqueezingParam::new(v).unwrap()
    }

    const XIS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

    #[test]
    fn constraint_examples() {
        assert_abs_diff_eq!(cv_norm_constraint(1.0, 0.0, xi(0.7)), 0.0, epsilon = 1e-15);
        // ξ = 0: α + β = 1.
        for a in [0.0, 0.25, 0.6, 1.0] {
            assert_abs_diff_eq!(cv_solve_beta(a, xi(0.0)), 1.0 - a, epsilon = 1e-14);
        }
        let h = 0.5f64.sqrt();
        assert!(cv_norm_constraint(h, h, xi(12.0)).abs() < 1e-5);
        for v in XIS {
            for a in [0.0, 0.3, 0.7, 1.0] {
                let b = cv_solve_beta(a, xi(v));
                assert!(b >= 0.0);
                assert!(cv_norm_constraint(a, b, xi(v)).abs() < 1e-12);
            }
            let s = cv_symmetric_alpha(xi(v));
            assert!(cv_norm_constraint(s, s, xi(v)).abs() < 1e-14);
        }
        assert!(KernelTriple::new(xi(1.0), 0.8, 0.8).is_err());
        assert!(KernelTriple::from_alpha(xi(1.0), 1.3).is_err());
    }

    #[test]
    fn kernel_origin_values() {
        for v in XIS {
            assert_abs_diff_eq!(kernel_eval(Kernel::Retain, xi(v), 0.0, 0.0), v.exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(
                kernel_eval(Kernel::Noise, xi(v), 0.0, 0.0),
                1.0 / (2.0 * v).cosh().sqrt(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn normalizations_by_quadrature() {
        assert_abs_diff_eq!(cross_weight(xi(0.0)), 2.0, epsilon = 1e-15);
        for v in XIS {
            for k in Kernel::ALL {
                assert_abs_diff_eq!(kernel_norm(k, xi(v)), kernel_norm_exact(k, xi(v)), epsilon = 1e-8);
            }
        }
        assert_abs_diff_eq!(kernel_norm(Kernel::Cross, xi(0.5)), 1.538_21, epsilon = 1e-5);
        assert_abs_diff_eq!(kernel_norm(Kernel::Cross, xi(1.0)), 0.726_57, epsilon = 1e-5);
    }

    #[test]
    fn closed_forms_match_direct_quadrature() {
        for v in [0.0, 0.5, 1.0, 2.0] {
            for k in Kernel::ALL {
                for &(xb, eta) in &[(0.0, 0.0), (0.4, -0.3), (-1.2, 0.8), (2.0, 1.5), (0.3, 3.0)] {
                    let closed = kernel_eval(k, xi(v), xb, eta);
                    let quad = kernel_eval_quadrature(k, xi(v), xb, eta);
                    assert!((closed - quad).abs() < 1e-9 * (1.0 + closed.abs()), "{k:?} ξ={v} ({xb},{eta}): {closed} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn normalization_with_quadrature_kernel() {
        for v in [0.0, 1.0] {
            for k in Kernel::ALL {
                assert_abs_diff_eq!(kernel_norm_quadrature(k, xi(v)), kernel_norm_exact(k, xi(v)), epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn curvature_matches_finite_difference() {
        let h = 1e-3;
        for k in Kernel::ALL {
            for eta in [0.0, 0.4, -1.1] {
                let s = xi(0.6);
                let fd = (kernel_eval(k, s, h, eta) - 2.0 * kernel_eval(k, s, 0.0, eta) + kernel_eval(k, s, -h, eta))
                    / (h * h);
                assert!((fd - kernel_curvature(k, s, eta)).abs() < 1e-5, "{k:?}");
            }
        }
    }

    #[test]
    fn wigner_closed_forms_match_fourier() {
        for v in [0.0, 0.5, 1.0, 2.0] {
            for k in Kernel::ALL {
                for &(x, p) in &[(0.0, 0.0), (0.3, 0.2), (-0.7, 1.1), (1.5, -2.0), (0.05, 4.0)] {
                    let closed = kernel_wigner_eval(k, xi(v), x, p);
                    let numeric = kernel_wigner_fourier(k, xi(v), x, p);
                    assert!((closed - numeric).abs() < 1e-10 * (1.0 + closed.abs()), "{k:?} ξ={v}: {closed} vs {numeric}");
                }
            }
        }
        assert_abs_diff_eq!(kernel_wigner_eval(Kernel::Retain, xi(2.0), 0.0, 0.0), 4f64.exp(), epsilon = 1e-10);
    }

    #[test]
    fn cross_wigner_approaches_asymptotic_form() {
        let s = xi(6.0);
        let scale = (-6.0f64).exp();
        for &(x, p) in &[(0.0, 0.0), (1.0, 0.0), (0.5, 1.5)] {
            let (xs, ps) = (x * scale, p * scale);
            let exact = kernel_wigner_eval(Kernel::Cross, s, xs, ps);
            let approx = kernel_wigner_asymptotic(s, xs, ps);
            assert!((exact - approx).abs() < 1e-3 * approx.max(1e-3), "{exact} vs {approx}");
        }
    }

    #[test]
    fn moments() {
        for v in XIS {
            let m = kernel_moments(Kernel::Retain, xi(v));
            assert_abs_diff_eq!(m.weight, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(m.var_x, (-2.0 * v).exp(), epsilon = 1e-9);
            assert_abs_diff_eq!(m.var_p, (-2.0 * v).exp(), epsilon = 1e-9);
            let m = kernel_moments(Kernel::Noise, xi(v));
            assert_abs_diff_eq!(m.var_x, (2.0 * v).cosh(), epsilon = 1e-8);
            assert_abs_diff_eq!(m.var_p, (2.0 * v).cosh(), epsilon = 1e-8);
            let m = kernel_moments(Kernel::Cross, xi(v));
            assert_abs_diff_eq!(m.weight, cross_weight(xi(v)), epsilon = 1e-9);
        }
    }

    #[test]
    fn grid_guard() {
        let spec = GridSpec::square(10.0, 64).unwrap();
        assert!(matches!(kernel_wigner(Kernel::Retain, xi(2.0), &spec), Err(QidError::Unresolved { .. })));
        assert!(kernel_wigner(Kernel::Noise, xi(2.0), &spec).is_ok());
        assert!(matches!(kernel_wigner(Kernel::Noise, xi(3.5), &spec), Err(QidError::SqueezingTooLarge { .. })));
        let fine = GridSpec::square(12.0, 256).unwrap();
        let g = kernel_wigner(Kernel::Noise, xi(1.0), &fine).unwrap();
        assert_abs_diff_eq!(g.normalization(), 1.0, epsilon = 1e-4);
    }
}
