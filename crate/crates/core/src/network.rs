//! The quantum information distributor circuit on three qudit registers.
//!
//! Register 1 carries the input, registers 2 and 3 the program. The circuit is
//! `U = D31 · D21† · D13 · D12` where `Dab` adds register `a` into register `b`.
//! It is phase-free in the x-basis, so it is applied as an index permutation
//! `(n, m, k) -> (n - m + k, m + n, k + n)`; the dense gate-by-gate form is kept
//! as a test oracle for small dimensions.

use nalgebra::DMatrix;

use crate::error::{QidError, Result};
use crate::qudit::{
    displacement, entangled_state, fidelity, flat_index, labels_of, p_basis, superpose, transpose_op,
    x_basis, Dim, DensityOperator, Operator, PartialTrace, PureState, C64, EXACT_TOL, PIPELINE_TOL,
};

/// Largest dimension for which the dense `N³ × N³` oracle may be built.
pub const DENSE_ORACLE_CAP: usize = 8;

fn conditional_shift(dim: Dim, direction: i64) -> Operator {
    let n = dim.get();
    let dims = [dim, dim];
    let mut matrix = DMatrix::zeros(n * n, n * n);
    for k in 0..n {
        for m in 0..n {
            let target = dim.wrap(m as i64 + direction * k as i64);
            matrix[(flat_index(&dims, &[k, target]), flat_index(&dims, &[k, m]))] = C64::new(1.0, 0.0);
        }
    }
    Operator::new(dims.to_vec(), matrix).expect("square matrix of matching size")
}

/// Conditional adder `|k>|m> -> |k>|k+m mod N>` (control first).
pub fn conditional_add(dim: Dim) -> Operator {
    conditional_shift(dim, 1)
}

/// Conditional subtractor `|k>|m> -> |k>|m-k mod N>`, the adjoint of [`conditional_add`].
pub fn conditional_sub(dim: Dim) -> Operator {
    conditional_shift(dim, -1)
}

/// A gate that permutes product basis labels, optionally with unit-modulus phases.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationGate {
    dims: Vec<Dim>,
    map: Vec<u32>,
    phases: Option<Vec<C64>>,
}

impl PermutationGate {
    /// `map[i]` is the flat output index of flat input index `i`.
    pub fn new(dims: Vec<Dim>, map: Vec<usize>, phases: Option<Vec<C64>>) -> Result<Self> {
        let size: usize = dims.iter().map(|d| d.get()).product();
        if map.len() != size {
            return Err(QidError::DimensionMismatch(format!("map of length {} for size {size}", map.len())));
        }
        let mut hits = vec![0u32; size];
        for &target in &map {
            if target >= size {
                return Err(QidError::IndexOutOfRange { index: target, bound: size });
            }
            hits[target] += 1;
        }
        if hits.iter().any(|&h| h != 1) {
            return Err(QidError::InvalidArgument("map is not a bijection".into()));
        }
        if let Some(phases) = &phases {
            if phases.len() != size || phases.iter().any(|p| (p.norm() - 1.0).abs() > EXACT_TOL) {
                return Err(QidError::InvalidArgument("phases must be unit-modulus, one per label".into()));
            }
        }
        let map = map.into_iter().map(|t| t as u32).collect();
        Ok(PermutationGate { dims, map, phases })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn target(&self, index: usize) -> usize {
        self.map[index] as usize
    }

    /// Output labels for a given input label.
    pub fn image(&self, labels: &[usize]) -> Vec<usize> {
        labels_of(&self.dims, self.target(flat_index(&self.dims, labels)))
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.dims() != self.dims.as_slice() {
            return Err(QidError::DimensionMismatch(format!(
                "gate on {:?} applied to a state on {:?}",
                self.dims,
                state.dims()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.map.len()];
        let input = state.amplitudes();
        match &self.phases {
            None => {
                for (i, &t) in self.map.iter().enumerate() {
                    out[t as usize] = input[i];
                }
            }
            Some(phases) => {
                for (i, &t) in self.map.iter().enumerate() {
                    out[t as usize] = phases[i] * input[i];
                }
            }
        }
        PureState::new(self.dims.clone(), out)
    }

    /// Dense matrix form.
    pub fn to_operator(&self) -> Operator {
        let size = self.map.len();
        let mut matrix = DMatrix::zeros(size, size);
        for (i, &t) in self.map.iter().enumerate() {
            matrix[(t as usize, i)] = self.phases.as_ref().map_or(C64::new(1.0, 0.0), |p| p[i]);
        }
        Operator::new(self.dims.clone(), matrix).expect("square matrix of matching size")
    }
}

/// The QID unitary as the permutation `(n, m, k) -> (n - m + k, m + n, k + n) mod N`.
pub fn build_qid_unitary(dim: Dim) -> PermutationGate {
    let dims = vec![dim; 3];
    let size = dim.get().pow(3);
    let map = (0..size)
        .map(|i| {
            let l = labels_of(&dims, i);
            let (n, m, k) = (l[0] as i64, l[1] as i64, l[2] as i64);
            flat_index(&dims, &[dim.wrap(n - m + k), dim.wrap(m + n), dim.wrap(k + n)])
        })
        .collect();
    PermutationGate::new(dims, map, None).expect("QID map is a bijection")
}

/// The four conditional shifts in application order, as (gate, [control, target]).
pub fn qid_gate_sequence(dim: Dim) -> [(Operator, [usize; 2]); 4] {
    let add = conditional_add(dim);
    let sub = conditional_sub(dim);
    [(add.clone(), [0, 1]), (add.clone(), [0, 2]), (sub, [1, 0]), (add, [2, 0])]
}

/// Applies `D31 · D21† · D13 · D12` gate by gate with dense two-register matrices.
pub fn apply_gate_sequence(state: &PureState) -> Result<PureState> {
    let dim = state.dims()[0];
    if state.dims() != [dim; 3] {
        return Err(QidError::DimensionMismatch("the QID acts on three equal registers".into()));
    }
    qid_gate_sequence(dim)
        .iter()
        .try_fold(state.clone(), |s, (gate, regs)| s.apply_local(gate, regs))
}

/// Dense `N³ × N³` unitary assembled from the gate sequence.
pub fn qid_dense_unitary(dim: Dim) -> Result<Operator> {
    if dim.get() > DENSE_ORACLE_CAP {
        return Err(QidError::DimensionTooLarge { dim: dim.get(), cap: DENSE_ORACLE_CAP });
    }
    let dims = vec![dim; 3];
    let size = dim.get().pow(3);
    let mut matrix = DMatrix::zeros(size, size);
    for col in 0..size {
        let image = apply_gate_sequence(&PureState::basis(dims.clone(), &labels_of(&dims, col))?)?;
        for (row, a) in image.amplitudes().iter().enumerate() {
            matrix[(row, col)] = *a;
        }
    }
    Operator::new(dims, matrix)
}

/// Residual of `α² + β² + 2αβ/N = 1`.
pub fn norm_residual(dim: Dim, alpha: f64, beta: f64) -> f64 {
    alpha * alpha + beta * beta + 2.0 * alpha * beta / dim.get() as f64 - 1.0
}

/// Non-negative `β` completing `α` to a normalized program state.
pub fn solve_beta(dim: Dim, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(QidError::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let a_over_n = alpha / dim.get() as f64;
    let disc = a_over_n * a_over_n - alpha * alpha + 1.0;
    let beta = -a_over_n + disc.sqrt();
    assert!(beta >= -EXACT_TOL, "no non-negative root for alpha={alpha}");
    Ok(beta.max(0.0))
}

/// `α = β` solution, the symmetric cloner.
pub fn cloner_alpha(dim: Dim) -> f64 {
    let n = dim.get() as f64;
    (n / (2.0 * (n + 1.0))).sqrt()
}

/// Two-register program `|Φ>_23` fed to the distributor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramState {
    dim: Dim,
    params: Option<(f64, f64)>,
    ket: PureState,
}

impl ProgramState {
    /// `α|Ξ00> + β|x0>|p0>`; `(α, β)` must satisfy the normalization condition within 1e-10.
    pub fn two_parameter(dim: Dim, alpha: f64, beta: f64) -> Result<Self> {
        let residual = norm_residual(dim, alpha, beta);
        if residual.abs() > PIPELINE_TOL {
            return Err(QidError::ConstraintViolated(residual));
        }
        let xi = entangled_state(dim, 0, 0)?;
        let product = x_basis(dim, 0)?.tensor(&p_basis(dim, 0)?);
        let amps = superpose(&[(C64::new(alpha, 0.0), &xi), (C64::new(beta, 0.0), &product)])?;
        let ket = PureState::new(vec![dim, dim], amps)?;
        Ok(ProgramState { dim, params: Some((alpha, beta)), ket })
    }

    /// Symmetric cloner program, `α = β`.
    pub fn cloner(dim: Dim) -> Result<Self> {
        let a = cloner_alpha(dim);
        Self::two_parameter(dim, a, a)
    }

    /// Arbitrary normalized two-register program ket.
    pub fn general(ket: PureState) -> Result<Self> {
        let dim = match ket.dims() {
            [a, b] if a == b => *a,
            dims => {
                return Err(QidError::DimensionMismatch(format!(
                    "program needs two equal registers, got {dims:?}"
                )))
            }
        };
        Ok(ProgramState { dim, params: None, ket })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// `(α, β)` for the two-parameter family.
    pub fn params(&self) -> Option<(f64, f64)> {
        self.params
    }

    pub fn ket(&self) -> &PureState {
        &self.ket
    }
}

pub fn program_state(dim: Dim, alpha: f64, beta: f64) -> Result<ProgramState> {
    ProgramState::two_parameter(dim, alpha, beta)
}

/// Reduced outputs of the distributor, with the joint state when simulated.
#[derive(Clone, Debug)]
pub struct DistributorOutput {
    pub rho: [DensityOperator; 3],
    pub joint: Option<PureState>,
}

impl DistributorOutput {
    pub fn rho1(&self) -> &DensityOperator {
        &self.rho[0]
    }
    pub fn rho2(&self) -> &DensityOperator {
        &self.rho[1]
    }
    pub fn rho3(&self) -> &DensityOperator {
        &self.rho[2]
    }

    /// Largest elementwise deviation between corresponding outputs.
    pub fn max_deviation(&self, other: &DistributorOutput) -> f64 {
        self.rho.iter().zip(&other.rho).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }
}

fn reduce(joint: &PureState) -> Result<[DensityOperator; 3]> {
    Ok([joint.partial_trace(&[0])?, joint.partial_trace(&[1])?, joint.partial_trace(&[2])?])
}

/// Runs the circuit on `psi ⊗ program` and traces out each register in turn.
pub fn distribute(psi: &PureState, program: &ProgramState) -> Result<DistributorOutput> {
    let dim = psi.single_dim()?;
    if dim != program.dim {
        return Err(QidError::DimensionMismatch(format!(
            "input of dimension {dim} with a program of dimension {}",
            program.dim
        )));
    }
    dim.check_simulation_cap()?;
    let joint = build_qid_unitary(dim).apply(&psi.tensor(&program.ket))?;
    Ok(DistributorOutput { rho: reduce(&joint)?, joint: Some(joint) })
}

/// Closed-form outputs for the two-parameter program family.
pub fn predicted_outputs(dim: Dim, alpha: f64, beta: f64, psi: &PureState) -> Result<DistributorOutput> {
    if psi.single_dim()? != dim {
        return Err(QidError::DimensionMismatch("input dimension differs from dim".into()));
    }
    let residual = norm_residual(dim, alpha, beta);
    if residual.abs() > PIPELINE_TOL {
        return Err(QidError::ConstraintViolated(residual));
    }
    let n = dim.get() as f64;
    let projector = psi.density();
    let transposed = transpose_op(&projector);
    let identity = DMatrix::<C64>::identity(dim.get(), dim.get());
    let mix = |state: &DensityOperator, weight: f64, noise: f64| {
        let matrix = state.matrix() * C64::new(weight, 0.0) + &identity * C64::new(noise, 0.0);
        DensityOperator::new(vec![dim], matrix)
    };
    let cross = 2.0 * alpha * beta / n;
    Ok(DistributorOutput {
        rho: [
            mix(&projector, alpha * alpha + cross, beta * beta / n)?,
            mix(&projector, beta * beta + cross, alpha * alpha / n)?,
            mix(&transposed, cross, (n - 2.0 * alpha * beta) / (n * n))?,
        ],
        joint: None,
    })
}

/// Scaling factor `s = (N+2) / (2(N+1))` of the symmetric clones.
pub fn clone_scaling(dim: Dim) -> f64 {
    let n = dim.get() as f64;
    (n + 2.0) / (2.0 * (n + 1.0))
}

/// Clone fidelity `s + (1-s)/N = (N+3) / (2(N+1))`.
pub fn clone_fidelity(dim: Dim) -> f64 {
    let n = dim.get() as f64;
    (n + 3.0) / (2.0 * (n + 1.0))
}

/// Outcome of comparing shifted-input outputs against shifted outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport {
    pub n: i64,
    pub m: i64,
    /// Largest elementwise deviation over the three reduced outputs.
    pub max_deviation: f64,
    /// Change in output fidelity caused by the shift, per register. Register 3
    /// is scored against the transposed (complex-conjugated) input.
    pub fidelity_deltas: [f64; 3],
}

/// Checks that displacing the input by `R_x(n) R_p(m)` displaces outputs 1 and 2
/// by the same amount and output 3 by `R_x(n) R_p(-m)`.
pub fn covariance_check(psi: &PureState, program: &ProgramState, n: i64, m: i64) -> Result<CovarianceReport> {
    let dim = psi.single_dim()?;
    let shift = displacement(dim, n, m);
    let mirrored = displacement(dim, n, -m);
    let base = distribute(psi, program)?;
    let shifted_psi = shift.apply(psi)?;
    let moved = distribute(&shifted_psi, program)?;

    let expected = [
        base.rho[0].conjugate_by(&shift)?,
        base.rho[1].conjugate_by(&shift)?,
        base.rho[2].conjugate_by(&mirrored)?,
    ];
    let max_deviation = expected.iter().zip(&moved.rho).map(|(e, r)| e.max_abs_diff(r)).fold(0.0, f64::max);

    let conj = |s: &PureState| PureState::new(s.dims().to_vec(), s.amplitudes().iter().map(|a| a.conj()).collect());
    let fidelity_deltas = [
        (fidelity(&moved.rho[0], &shifted_psi)? - fidelity(&base.rho[0], psi)?).abs(),
        (fidelity(&moved.rho[1], &shifted_psi)? - fidelity(&base.rho[1], psi)?).abs(),
        (fidelity(&moved.rho[2], &conj(&shifted_psi)?)? - fidelity(&base.rho[2], &conj(psi)?)?).abs(),
    ];
    Ok(CovarianceReport { n, m, max_deviation, fidelity_deltas })
}

/// Coin-flip distributor: each of `m_out` outputs holds one of the `m_in` inputs
/// with probability `m_in / m_out`, otherwise a random state whose mean fidelity
/// with the input is `overlap`.
pub fn classical_distributor_fidelity(m_in: u32, m_out: u32, overlap: f64) -> Result<f64> {
    if m_in == 0 {
        return Err(QidError::InvalidArgument("m_in must be positive".into()));
    }
    if m_out < m_in {
        return Err(QidError::InvalidArgument(format!("m_out ({m_out}) below m_in ({m_in})")));
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(QidError::InvalidArgument(format!("overlap must lie in [0, 1], got {overlap}")));
    }
    let routed = m_in as f64 / m_out as f64;
    Ok(routed + (1.0 - routed) * overlap)
}

/// Negativity of the two-register reduction of `joint` onto `pair`:
/// the sum of the magnitudes of the negative eigenvalues of its partial transpose.
pub fn negativity(joint: &PureState, pair: [usize; 2]) -> Result<f64> {
    let rho = joint.partial_trace(&pair)?;
    let transposed = rho.partial_transpose(&[1])?;
    Ok(transposed.eigenvalues().into_iter().filter(|&v| v < 0.0).map(f64::abs).sum())
}
