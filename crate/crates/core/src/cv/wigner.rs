//! Wigner functions sampled on rectangular phase-space grids, the output
//! convolution of the distributor and grid fidelities.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::gaussian::{GaussianState, XI_GRID_MAX};
use super::kernel::{kernel_moments, kernel_wigner_eval, Kernel, KernelTriple};
use crate::error::{QidError, Result};
use crate::format::{sci, Sci};

pub const GRID_SCHEMA_VERSION: u32 = 1;

/// Default half-width of a grid in units of the widest standard deviation.
pub const GRID_SIGMAS: f64 = 8.0;

/// Default number of points per axis.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Lattice `x_i = x_min + i·Δx` (`i < nx`), `p_j = p_min + j·Δp` (`j < np`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
    nx: usize,
    np: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        let finite = [x_min, x_max, p_min, p_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || p_max <= p_min || nx < 2 || np < 2 {
            return Err(QidError::InvalidArgument(format!(
                "grid [{x_min}, {x_max}]x[{p_min}, {p_max}] with {nx}x{np} points"
            )));
        }
        Ok(GridSpec { x_min, x_max, p_min, p_max, nx, np })
    }

    /// `[-half, half]²` with `n` points per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    /// Square grid spanning `±8 σ_max`.
    pub fn covering(sigma_max: f64, n: usize) -> Result<Self> {
        Self::square(GRID_SIGMAS * sigma_max, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn p_min(&self) -> f64 {
        self.p_min
    }
    pub fn p_max(&self) -> f64 {
        self.p_max
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn np(&self) -> usize {
        self.np
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.nx != other.nx || self.np != other.np {
            return Err(QidError::IncompatibleGrids(format!(
                "{}x{} vs {}x{} points",
                self.nx, self.np, other.nx, other.np
            )));
        }
        let tol = 1e-12 * (1.0 + self.x_max.abs().max(self.p_max.abs()));
        let bounds = [
            (self.x_min, other.x_min),
            (self.x_max, other.x_max),
            (self.p_min, other.p_min),
            (self.p_max, other.p_max),
        ];
        if bounds.iter().any(|(a, b)| (a - b).abs() > tol) {
            return Err(QidError::IncompatibleGrids("bounds differ".into()));
        }
        Ok(())
    }
}

/// Real samples of a single-mode Wigner function, row-major with `x` as the
/// slow index: `values[i·np + j] = W(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct GridJsonOut<'a> {
    schema_version: u32,
    #[serde(flatten)]
    spec: &'a GridSpec,
    values: Vec<Sci>,
}

#[derive(Deserialize)]
struct GridJsonIn {
    #[serde(flatten)]
    spec: GridSpec,
    values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.nx * spec.np {
            return Err(QidError::IncompatibleGrids(format!(
                "{} values for {}x{} points",
                values.len(),
                spec.nx,
                spec.np
            )));
        }
        Ok(WignerGrid { spec, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(spec: GridSpec, f: F) -> Self {
        let mut values = Vec::with_capacity(spec.nx * spec.np);
        for i in 0..spec.nx {
            let x = spec.x(i);
            for j in 0..spec.np {
                values.push(f(x, spec.p(j)));
            }
        }
        WignerGrid { spec, values }
    }

    pub fn from_gaussian(state: &GaussianState, spec: GridSpec) -> Result<Self> {
        if state.modes() != 1 {
            return Err(QidError::UnsupportedModes(state.modes()));
        }
        Ok(Self::from_fn(spec, |x, p| state.wigner(&[x, p])))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    /// `(1/2π) Σ W Δx Δp`; equals 1 for a normalized state.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.dx() * self.spec.dp() / (2.0 * PI)
    }

    /// `(1/2π) Σ W_a W_b Δx Δp`.
    pub fn overlap(&self, other: &WignerGrid) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum * self.spec.dx() * self.spec.dp() / (2.0 * PI))
    }

    pub fn max_abs_diff(&self, other: &WignerGrid) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: f64) -> WignerGrid {
        WignerGrid { spec: self.spec.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// `Σ cᵢ Wᵢ` over grids sharing one lattice.
    pub fn combine(terms: &[(f64, &WignerGrid)]) -> Result<WignerGrid> {
        let (_, first) = terms.first().ok_or_else(|| QidError::InvalidArgument("no terms".into()))?;
        let mut values = vec![0.0; first.values.len()];
        for (c, g) in terms {
            first.spec.check_same(&g.spec)?;
            for (v, w) in values.iter_mut().zip(&g.values) {
                *v += c * w;
            }
        }
        Ok(WignerGrid { spec: first.spec.clone(), values })
    }

    /// Mean and variance of `x` and `p` under the grid distribution.
    pub fn moments(&self) -> [f64; 4] {
        let norm: f64 = self.values.iter().sum();
        let (mut mx, mut mp) = (0.0, 0.0);
        for i in 0..self.spec.nx {
            for j in 0..self.spec.np {
                let w = self.get(i, j);
                mx += w * self.spec.x(i);
                mp += w * self.spec.p(j);
            }
        }
        mx /= norm;
        mp /= norm;
        let (mut vx, mut vp) = (0.0, 0.0);
        for i in 0..self.spec.nx {
            for j in 0..self.spec.np {
                let w = self.get(i, j);
                vx += w * (self.spec.x(i) - mx).powi(2);
                vp += w * (self.spec.p(j) - mp).powi(2);
            }
        }
        [mx, mp, vx / norm, vp / norm]
    }

    /// Discrete `½ (a ∂²_x + b ∂²_p) W` with zero values beyond the edges.
    fn diffusion(&self, a: f64, b: f64) -> WignerGrid {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let (hx, hp) = (self.spec.dx().powi(2), self.spec.dp().powi(2));
        let at = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= nx as isize || j >= np as isize {
                0.0
            } else {
                self.get(i as usize, j as usize)
            }
        };
        let mut values = Vec::with_capacity(nx * np);
        for i in 0..nx as isize {
            for j in 0..np as isize {
                let c = at(i, j);
                let dxx = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / hx;
                let dpp = (at(i, j + 1) - 2.0 * c + at(i, j - 1)) / hp;
                values.push(0.5 * (a * dxx + b * dpp));
            }
        }
        WignerGrid { spec: self.spec.clone(), values }
    }

    /// `(1/2π) ∫∫ K(x', p') W(x - x', p - p') dx' dp'` on this grid, with the
    /// kernel sampled at lattice differences and the sum done by FFT.
    pub fn convolve<F: Fn(f64, f64) -> f64>(&self, kernel: F) -> WignerGrid {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let (dx, dp) = (self.spec.dx(), self.spec.dp());
        let (kx, kp) = (2 * nx - 1, 2 * np - 1);
        let (lx, lp) = (smooth_size(nx + kx - 1), smooth_size(np + kp - 1));

        let mut planner = FftPlanner::<f64>::new();
        let (fwd_p, fwd_x) = (planner.plan_fft_forward(lp), planner.plan_fft_forward(lx));
        let (inv_p, inv_x) = (planner.plan_fft_inverse(lp), planner.plan_fft_inverse(lx));

        let mut signal = vec![Complex::new(0.0, 0.0); lx * lp];
        for i in 0..nx {
            for j in 0..np {
                signal[i * lp + j].re = self.get(i, j);
            }
        }
        let mut response = vec![Complex::new(0.0, 0.0); lx * lp];
        for i in 0..kx {
            let x = (i as f64 - (nx - 1) as f64) * dx;
            for j in 0..kp {
                let p = (j as f64 - (np - 1) as f64) * dp;
                response[i * lp + j].re = kernel(x, p);
            }
        }

        let spectrum = |buf: &mut Vec<Complex<f64>>| {
            fwd_p.process(buf);
            *buf = transpose(buf, lx, lp);
            fwd_x.process(buf);
        };
        spectrum(&mut signal);
        spectrum(&mut response);
        for (s, r) in signal.iter_mut().zip(&response) {
            *s *= r;
        }
        inv_x.process(&mut signal);
        let mut full = transpose(&signal, lp, lx);
        inv_p.process(&mut full);

        let scale = dx * dp / (2.0 * PI) / (lx * lp) as f64;
        let mut values = Vec::with_capacity(nx * np);
        for i in 0..nx {
            for j in 0..np {
                values.push(full[(i + nx - 1) * lp + j + np - 1].re * scale);
            }
        }
        WignerGrid { spec: self.spec.clone(), values }
    }

    /// CSV with header `x,p,value`, one row per lattice point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["x", "p", "value"])?;
        for i in 0..self.spec.nx {
            for j in 0..self.spec.np {
                out.write_record([sci(self.spec.x(i)), sci(self.spec.p(j)), sci(self.get(i, j))])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// JSON object with the lattice description and row-major `values`.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let doc = GridJsonOut {
            schema_version: GRID_SCHEMA_VERSION,
            spec: &self.spec,
            values: self.values.iter().map(|&v| Sci(v)).collect(),
        };
        serde_json::to_writer(writer, &doc)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self> {
        let doc: GridJsonIn = serde_json::from_reader(reader)?;
        let spec = GridSpec::new(doc.spec.x_min, doc.spec.x_max, doc.spec.p_min, doc.spec.p_max, doc.spec.nx, doc.spec.np)?;
        Self::new(spec, doc.values)
    }
}

fn transpose(buf: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); buf.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = buf[r * cols + c];
        }
    }
    out
}

/// Smallest `m ≥ n` of the form `2^a 3^b 5^c`.
fn smooth_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for f in [2, 3, 5] {
                while r % f == 0 {
                    r /= f;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

/// How one kernel term was applied to the input grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TermMethod {
    /// Full FFT convolution with the sampled kernel Wigner function.
    Convolved,
    /// Kernel narrower than the lattice: weight times input plus second-moment diffusion.
    Narrow,
    /// Large-squeezing limit: weight times input.
    Delta,
}

/// The three kernel contributions to output 1, each before its `α²`, `β²`,
/// `αβ` coefficient.
#[derive(Clone, Debug)]
pub struct OutputTerms {
    pub triple: KernelTriple,
    pub terms: [WignerGrid; 3],
    pub methods: [TermMethod; 3],
}

impl OutputTerms {
    pub fn term(&self, which: Kernel) -> &WignerGrid {
        &self.terms[which.index() - 1]
    }

    pub fn total(&self) -> Result<WignerGrid> {
        let parts: Vec<(f64, &WignerGrid)> =
            Kernel::ALL.iter().map(|&k| (self.triple.coefficient(k), self.term(k))).collect();
        WignerGrid::combine(&parts)
    }

    /// Contribution of each coefficient-weighted term to `⟨ψ|ρ₁|ψ⟩`.
    pub fn fidelity_terms(&self, input: &WignerGrid) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for k in Kernel::ALL {
            out[k.index() - 1] = self.triple.coefficient(k) * input.overlap(self.term(k))?;
        }
        Ok(out)
    }
}

/// Output-1 Wigner function split by kernel,
/// `W_out(x, p) = (1/2π) ∫∫ W^K(x', p') W_in(x - x', p + p') dx' dp'`.
///
/// Kernels wider than two lattice spacings are convolved directly. Narrower
/// ones are applied through their weight and second moments. Beyond the grid
/// squeezing limit the narrow kernels act as weighted deltas.
pub fn output_wigner_terms(input: &WignerGrid, triple: &KernelTriple) -> Result<OutputTerms> {
    let xi = triple.xi();
    let spacing = input.spec.dx().max(input.spec.dp());
    let apply = |which: Kernel| -> (WignerGrid, TermMethod) {
        let moments = kernel_moments(which, xi);
        if moments.width() >= 2.0 * spacing {
            (input.convolve(|x, p| kernel_wigner_eval(which, xi, x, -p)), TermMethod::Convolved)
        } else if xi.xi() <= XI_GRID_MAX {
            let spread = input.diffusion(moments.var_x, moments.var_p);
            let g = WignerGrid::combine(&[(moments.weight, input), (moments.weight, &spread)]).expect("same lattice");
            (g, TermMethod::Narrow)
        } else {
            (input.scaled(moments.weight), TermMethod::Delta)
        }
    };
    let (r, n, c) = (apply(Kernel::Retain), apply(Kernel::Noise), apply(Kernel::Cross));
    Ok(OutputTerms { triple: *triple, methods: [r.1, n.1, c.1], terms: [r.0, n.0, c.0] })
}

/// Output-1 Wigner function of the continuous distributor.
pub fn output_wigner(input: &WignerGrid, triple: &KernelTriple) -> Result<WignerGrid> {
    output_wigner_terms(input, triple)?.total()
}

/// `⟨ψ|ρ|ψ⟩ = (1/2π) ∫∫ W_in W_out` by grid quadrature.
pub fn cv_fidelity(input: &WignerGrid, output: &WignerGrid) -> Result<f64> {
    input.overlap(output)
}
