//! Finite-dimensional qudit objects.
//!
//! Every object is stored densely in the position (`x`) basis. Multi-register
//! objects use register-major flat indexing: the label `(k1, k2, ..., kr)` of
//! registers with dimensions `(N1, ..., Nr)` lives at flat index
//! `k1*N2*...*Nr + k2*N3*...*Nr + ... + kr`, so the last register varies fastest.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QidError, Result};

pub type C64 = Complex64;

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for chained floating-point pipelines.
pub const PIPELINE_TOL: f64 = 1e-10;

/// Hilbert-space dimension of a single register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    /// Largest dimension accepted for tripartite pure-state simulation.
    pub const SIMULATION_CAP: usize = 64;

    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(QidError::InvalidDimension(n));
        }
        Ok(Dim(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Reduces an arbitrary integer label modulo the dimension.
    #[inline]
    pub fn wrap(self, k: i64) -> usize {
        k.rem_euclid(self.0 as i64) as usize
    }

    /// Fails when the dimension is above [`Dim::SIMULATION_CAP`].
    pub fn check_simulation_cap(self) -> Result<()> {
        if self.0 > Self::SIMULATION_CAP {
            return Err(QidError::DimensionTooLarge { dim: self.0, cap: Self::SIMULATION_CAP });
        }
        Ok(())
    }

    /// Phase `exp(i 2π k / N)`.
    #[inline]
    pub fn root_of_unity(self, k: i64) -> C64 {
        let reduced = self.wrap(k) as f64;
        C64::from_polar(1.0, 2.0 * PI * reduced / self.0 as f64)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn total_size(dims: &[Dim]) -> usize {
    dims.iter().map(|d| d.get()).product()
}

/// Flat index of a register-major label.
pub fn flat_index(dims: &[Dim], labels: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), labels.len());
    labels.iter().zip(dims).fold(0, |acc, (&k, d)| acc * d.get() + k)
}

/// Register labels of a flat index.
pub fn labels_of(dims: &[Dim], mut index: usize) -> Vec<usize> {
    let mut labels = vec![0; dims.len()];
    for (slot, d) in labels.iter_mut().zip(dims).rev() {
        *slot = index % d.get();
        index /= d.get();
    }
    labels
}

/// Splits the flat index space into a selected subsystem and its complement.
///
/// `table[rest * local_size + local]` is the flat index whose labels on the
/// selected registers form `local` (in the order given) and whose remaining
/// labels form `rest` (in ascending register order).
struct Split {
    local_size: usize,
    rest_size: usize,
    table: Vec<usize>,
}

impl Split {
    fn new(dims: &[Dim], selected: &[usize]) -> Self {
        let local_dims: Vec<Dim> = selected.iter().map(|&r| dims[r]).collect();
        let rest: Vec<usize> = (0..dims.len()).filter(|r| !selected.contains(r)).collect();
        let rest_dims: Vec<Dim> = rest.iter().map(|&r| dims[r]).collect();
        let local_size = total_size(&local_dims);
        let rest_size = total_size(&rest_dims);
        let mut table = vec![0; local_size * rest_size];
        for flat in 0..total_size(dims) {
            let labels = labels_of(dims, flat);
            let local_labels: Vec<usize> = selected.iter().map(|&r| labels[r]).collect();
            let rest_labels: Vec<usize> = rest.iter().map(|&r| labels[r]).collect();
            let local = flat_index(&local_dims, &local_labels);
            let other = flat_index(&rest_dims, &rest_labels);
            table[other * local_size + local] = flat;
        }
        Split { local_size, rest_size, table }
    }

    #[inline]
    fn flat(&self, rest: usize, local: usize) -> usize {
        self.table[rest * self.local_size + local]
    }
}

fn check_register_set(count: usize, registers: &[usize], allow_full: bool) -> Result<()> {
    if registers.is_empty() {
        return Err(QidError::InvalidRegisters("empty register set".into()));
    }
    if !allow_full && registers.len() >= count {
        return Err(QidError::InvalidRegisters("register set must be a proper subset".into()));
    }
    for (i, &r) in registers.iter().enumerate() {
        if r >= count {
            return Err(QidError::IndexOutOfRange { index: r, bound: count });
        }
        if registers[..i].contains(&r) {
            return Err(QidError::InvalidRegisters(format!("register {r} listed twice")));
        }
    }
    Ok(())
}

/// Normalized pure state over one or more registers.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<Dim>,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already be normalized within [`EXACT_TOL`].
    pub fn new(dims: Vec<Dim>, amps: Vec<C64>) -> Result<Self> {
        let state = Self::unnormalized(dims, amps)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(QidError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(dims: Vec<Dim>, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::unnormalized(dims, amps)?;
        let norm = state.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QidError::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        state.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(state)
    }

    fn unnormalized(dims: Vec<Dim>, amps: Vec<C64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(QidError::DimensionMismatch("a state needs at least one register".into()));
        }
        let size = total_size(&dims);
        if amps.len() != size {
            return Err(QidError::DimensionMismatch(format!(
                "{} amplitudes for a space of size {size}",
                amps.len()
            )));
        }
        Ok(PureState { dims, amps })
    }

    /// Product basis state `|k1>|k2>...` in the x-basis.
    pub fn basis(dims: Vec<Dim>, labels: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(QidError::DimensionMismatch(format!(
                "{} labels for {} registers",
                labels.len(),
                dims.len()
            )));
        }
        for (&k, d) in labels.iter().zip(&dims) {
            if k >= d.get() {
                return Err(QidError::IndexOutOfRange { index: k, bound: d.get() });
            }
        }
        let mut amps = vec![C64::new(0.0, 0.0); total_size(&dims)];
        amps[flat_index(&dims, labels)] = C64::new(1.0, 0.0);
        Ok(PureState { dims, amps })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn num_registers(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, labels: &[usize]) -> C64 {
        self.amps[flat_index(&self.dims, labels)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Single-register dimension; fails on multi-register states.
    pub fn single_dim(&self) -> Result<Dim> {
        match self.dims.as_slice() {
            [d] => Ok(*d),
            _ => Err(QidError::DimensionMismatch(format!(
                "expected a single-register state, got {} registers",
                self.dims.len()
            ))),
        }
    }

    /// Tensor product `self ⊗ other`, registers of `self` first.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        PureState { dims, amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dims != other.dims {
            return Err(QidError::DimensionMismatch("inner product of unlike states".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`, which equals 1 exactly when the states agree up to a global phase.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Applies `op` to the listed registers; `op`'s registers map onto them in order.
    pub fn apply_local(&self, op: &Operator, registers: &[usize]) -> Result<PureState> {
        check_register_set(self.dims.len(), registers, true)?;
        let targets: Vec<Dim> = registers.iter().map(|&r| self.dims[r]).collect();
        if targets != op.dims {
            return Err(QidError::DimensionMismatch(format!(
                "operator on {:?} applied to registers of dimensions {:?}",
                op.dims, targets
            )));
        }
        let split = Split::new(&self.dims, registers);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut local_in = vec![C64::new(0.0, 0.0); split.local_size];
        for rest in 0..split.rest_size {
            for (l, slot) in local_in.iter_mut().enumerate() {
                *slot = self.amps[split.flat(rest, l)];
            }
            for row in 0..split.local_size {
                let mut acc = C64::new(0.0, 0.0);
                for (col, a) in local_in.iter().enumerate() {
                    acc += op.matrix[(row, col)] * a;
                }
                out[split.flat(rest, row)] = acc;
            }
        }
        Ok(PureState { dims: self.dims.clone(), amps: out })
    }

    /// Projector `|self><self|` over all registers.
    pub fn density(&self) -> DensityOperator {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityOperator { dims: self.dims.clone(), matrix: &v * v.adjoint() }
    }
}

/// Weighted sum of states over the same registers, without normalization checks.
pub(crate) fn superpose(terms: &[(C64, &PureState)]) -> Result<Vec<C64>> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| QidError::InvalidArgument("empty superposition".into()))?;
    let mut amps = vec![C64::new(0.0, 0.0); first.amps.len()];
    for (w, s) in terms {
        if s.dims != first.dims {
            return Err(QidError::DimensionMismatch("superposition of unlike states".into()));
        }
        for (acc, a) in amps.iter_mut().zip(&s.amps) {
            *acc += w * a;
        }
    }
    Ok(amps)
}

/// Dense operator on one or more registers.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<Dim>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(dims: Vec<Dim>, matrix: DMatrix<C64>) -> Result<Self> {
        let size = total_size(&dims);
        if dims.is_empty() || matrix.nrows() != size || matrix.ncols() != size {
            return Err(QidError::DimensionMismatch(format!(
                "{}x{} matrix for registers {:?}",
                matrix.nrows(),
                matrix.ncols(),
                dims
            )));
        }
        Ok(Operator { dims, matrix })
    }

    pub fn identity(dims: Vec<Dim>) -> Self {
        let size = total_size(&dims);
        Operator { dims, matrix: DMatrix::identity(size, size) }
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator { dims: self.dims.clone(), matrix: self.matrix.adjoint() }
    }

    /// Operator product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dims != rhs.dims {
            return Err(QidError::DimensionMismatch("composition of unlike operators".into()));
        }
        Ok(Operator { dims: self.dims.clone(), matrix: &self.matrix * &rhs.matrix })
    }

    /// Kronecker product, registers of `self` first.
    pub fn kron(&self, rhs: &Operator) -> Operator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&rhs.dims);
        Operator { dims, matrix: self.matrix.kronecker(&rhs.matrix) }
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator { dims: self.dims.clone(), matrix: &self.matrix * factor }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let all: Vec<usize> = (0..state.num_registers()).collect();
        state.apply_local(self, &all)
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self.matrix.adjoint() * &self.matrix;
        let n = product.nrows();
        max_abs_diff(&product, &DMatrix::identity(n, n))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

/// Largest elementwise modulus of `a - b`; infinite for mismatched shapes.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Hermitian, positive, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: Vec<Dim>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity within [`PIPELINE_TOL`].
    pub fn new(dims: Vec<Dim>, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::unchecked(dims, matrix)?;
        rho.validate(PIPELINE_TOL)?;
        Ok(rho)
    }

    pub(crate) fn unchecked(dims: Vec<Dim>, matrix: DMatrix<C64>) -> Result<Self> {
        let size = total_size(&dims);
        if dims.is_empty() || matrix.nrows() != size || matrix.ncols() != size {
            return Err(QidError::DimensionMismatch(format!(
                "{}x{} matrix for registers {:?}",
                matrix.nrows(),
                matrix.ncols(),
                dims
            )));
        }
        Ok(DensityOperator { dims, matrix })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > tol {
            return Err(QidError::InvalidDensity(format!("not Hermitian (defect {herm:e})")));
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(QidError::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(QidError::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `(1/N) 1` on a single register.
    pub fn maximally_mixed(dim: Dim) -> Self {
        let n = dim.get();
        DensityOperator {
            dims: vec![dim],
            matrix: DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0),
        }
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let hermitian = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut values: Vec<f64> = SymmetricEigen::new(hermitian).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &Operator) -> Result<DensityOperator> {
        if unitary.dims != self.dims {
            return Err(QidError::DimensionMismatch("conjugation by an unlike operator".into()));
        }
        let matrix = &unitary.matrix * &self.matrix * unitary.matrix.adjoint();
        Ok(DensityOperator { dims: self.dims.clone(), matrix })
    }

    /// Partial transpose of the listed registers, in the x-basis.
    pub fn partial_transpose(&self, registers: &[usize]) -> Result<DensityOperator> {
        check_register_set(self.dims.len(), registers, true)?;
        let size = self.matrix.nrows();
        let mut out = DMatrix::zeros(size, size);
        for row in 0..size {
            let row_labels = labels_of(&self.dims, row);
            for col in 0..size {
                let mut r = row_labels.clone();
                let mut c = labels_of(&self.dims, col);
                for &reg in registers {
                    std::mem::swap(&mut r[reg], &mut c[reg]);
                }
                out[(flat_index(&self.dims, &r), flat_index(&self.dims, &c))] = self.matrix[(row, col)];
            }
        }
        Ok(DensityOperator { dims: self.dims.clone(), matrix: out })
    }
}

/// Objects that can be reduced to a subset of their registers.
pub trait PartialTrace {
    /// Reduced density operator on `keep` (ascending register order in the result).
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator>;
}

fn sorted_keep(count: usize, keep: &[usize]) -> Result<Vec<usize>> {
    check_register_set(count, keep, false)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    Ok(keep)
}

impl PartialTrace for PureState {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let keep = sorted_keep(self.dims.len(), keep)?;
        let split = Split::new(&self.dims, &keep);
        // Rows indexed by kept labels, columns by traced labels; rho = A A†.
        let a = DMatrix::from_fn(split.local_size, split.rest_size, |l, r| self.amps[split.flat(r, l)]);
        let dims = keep.iter().map(|&r| self.dims[r]).collect();
        Ok(DensityOperator { dims, matrix: &a * a.adjoint() })
    }
}

impl PartialTrace for DensityOperator {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let keep = sorted_keep(self.dims.len(), keep)?;
        let split = Split::new(&self.dims, &keep);
        let matrix = DMatrix::from_fn(split.local_size, split.local_size, |i, j| {
            (0..split.rest_size)
                .map(|r| self.matrix[(split.flat(r, i), split.flat(r, j))])
                .sum::<C64>()
        });
        let dims = keep.iter().map(|&r| self.dims[r]).collect();
        Ok(DensityOperator { dims, matrix })
    }
}

pub fn partial_trace<S: PartialTrace + ?Sized>(state: &S, keep: &[usize]) -> Result<DensityOperator> {
    state.partial_trace(keep)
}

/// `<ψ|ρ|ψ>` for a single-register `ρ`, clipped to `[0, 1]`.
pub fn fidelity(rho: &DensityOperator, psi: &PureState) -> Result<f64> {
    let dim = psi.single_dim()?;
    if rho.dims != [dim] {
        return Err(QidError::DimensionMismatch(format!(
            "density operator on {:?} against a state of dimension {dim}",
            rho.dims
        )));
    }
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let value = (v.adjoint() * &rho.matrix * &v)[(0, 0)];
    Ok(value.re.clamp(0.0, 1.0))
}

/// Matrix transpose in the x-basis.
pub fn transpose_op(rho: &DensityOperator) -> DensityOperator {
    DensityOperator { dims: rho.dims.clone(), matrix: rho.matrix.transpose() }
}

/// Discrete Fourier operator with `F[k][l] = exp(i 2π k l / N) / √N`.
///
/// Column `l` holds the x-basis amplitudes of the momentum eigenstate `|p_l>`.
pub fn fourier_operator(dim: Dim) -> Operator {
    let n = dim.get();
    let scale = 1.0 / (n as f64).sqrt();
    let matrix = DMatrix::from_fn(n, n, |k, l| dim.root_of_unity((k * l) as i64) * scale);
    Operator { dims: vec![dim], matrix }
}

/// Cyclic position shift `|x_k> -> |x_{k+n}>`.
pub fn shift_x(dim: Dim, n: i64) -> Operator {
    let size = dim.get();
    let mut matrix = DMatrix::zeros(size, size);
    for k in 0..size {
        matrix[(dim.wrap(k as i64 + n), k)] = C64::new(1.0, 0.0);
    }
    Operator { dims: vec![dim], matrix }
}

/// Momentum shift, diagonal in the x-basis with entries `exp(i 2π m l / N)`.
pub fn shift_p(dim: Dim, m: i64) -> Operator {
    let diagonal: Vec<C64> = (0..dim.get()).map(|l| dim.root_of_unity(m * l as i64)).collect();
    Operator { dims: vec![dim], matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diagonal)) }
}

/// Discrete displacement `R_x(n) R_p(m)`.
pub fn displacement(dim: Dim, n: i64, m: i64) -> Operator {
    Operator { dims: vec![dim], matrix: shift_x(dim, n).matrix * shift_p(dim, m).matrix }
}

/// `X = Σ k |x_k><x_k|`.
pub fn position_operator(dim: Dim) -> Operator {
    let diagonal = nalgebra::DVector::from_fn(dim.get(), |k, _| C64::new(k as f64, 0.0));
    Operator { dims: vec![dim], matrix: DMatrix::from_diagonal(&diagonal) }
}

/// `P = Σ l |p_l><p_l|`, expressed in the x-basis.
pub fn momentum_operator(dim: Dim) -> Operator {
    let f = fourier_operator(dim).matrix;
    let diagonal = nalgebra::DVector::from_fn(dim.get(), |l, _| C64::new(l as f64, 0.0));
    Operator { dims: vec![dim], matrix: &f * DMatrix::from_diagonal(&diagonal) * f.adjoint() }
}

/// Position eigenstate `|x_k>`.
pub fn x_basis(dim: Dim, k: usize) -> Result<PureState> {
    PureState::basis(vec![dim], &[k])
}

/// Momentum eigenstate `|p_l>` in x-basis amplitudes.
pub fn p_basis(dim: Dim, l: usize) -> Result<PureState> {
    if l >= dim.get() {
        return Err(QidError::IndexOutOfRange { index: l, bound: dim.get() });
    }
    let scale = 1.0 / (dim.get() as f64).sqrt();
    let amps = (0..dim.get()).map(|k| dim.root_of_unity((k * l) as i64) * scale).collect();
    Ok(PureState { dims: vec![dim], amps })
}

/// Maximally entangled two-register state
/// `|Ξ_mn> = N^{-1/2} Σ_k exp(i 2π m k / N) |x_k>|x_{k-n}>`.
pub fn entangled_state(dim: Dim, m: usize, n: usize) -> Result<PureState> {
    let size = dim.get();
    for index in [m, n] {
        if index >= size {
            return Err(QidError::IndexOutOfRange { index, bound: size });
        }
    }
    let dims = vec![dim, dim];
    let scale = 1.0 / (size as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); size * size];
    for k in 0..size {
        let second = dim.wrap(k as i64 - n as i64);
        amps[flat_index(&dims, &[k, second])] = dim.root_of_unity((m * k) as i64) * scale;
    }
    Ok(PureState { dims, amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dim(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dim_rejects_small_values() {
        assert!(matches!(Dim::new(1), Err(QidError::InvalidDimension(1))));
        assert!(Dim::new(0).is_err());
        assert!(matches!(dim(65).check_simulation_cap(), Err(QidError::DimensionTooLarge { .. })));
        assert!(dim(64).check_simulation_cap().is_ok());
    }

    #[test]
    fn fourier_entries() {
        let f2 = fourier_operator(dim(2));
        assert_abs_diff_eq!(f2.entry(1, 1).re, -1.0 / 2f64.sqrt(), epsilon = EXACT_TOL);
        assert_abs_diff_eq!(f2.entry(0, 1).re, 1.0 / 2f64.sqrt(), epsilon = EXACT_TOL);
        let f3 = fourier_operator(dim(3));
        let expected = C64::from_polar(1.0, 4.0 * PI / 3.0) / 3f64.sqrt();
        assert_abs_diff_eq!((f3.entry(1, 2) - expected).norm(), 0.0, epsilon = EXACT_TOL);
        for n in 2..=9 {
            assert!(fourier_operator(dim(n)).is_unitary(EXACT_TOL));
        }
    }

    #[test]
    fn fourier_diagonalizes_momentum_shift() {
        for n in 2..=6 {
            let d = dim(n);
            let f = fourier_operator(d);
            // In the p-basis R_p(1) is the cyclic shift |p_l> -> |p_{l+1}>.
            let in_p_basis = f.adjoint().compose(&shift_p(d, 1)).unwrap().compose(&f).unwrap();
            assert!(in_p_basis.max_abs_diff(&shift_x(d, 1)) < EXACT_TOL);
        }
    }

    #[test]
    fn shift_x_wraps() {
        let d = dim(3);
        let moved = shift_x(d, 1).apply(&x_basis(d, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(moved.overlap(&x_basis(d, 0).unwrap()).unwrap(), 1.0, epsilon = EXACT_TOL);
        for n in 2..=7 {
            let d = dim(n);
            let id = Operator::identity(vec![d]);
            assert!(shift_x(d, n as i64).max_abs_diff(&id) < EXACT_TOL);
            assert!(shift_p(d, n as i64).max_abs_diff(&id) < EXACT_TOL);
            assert!(shift_x(d, -1).max_abs_diff(&shift_x(d, n as i64 - 1)) < EXACT_TOL);
        }
    }

    #[test]
    fn shifts_are_powers_of_unit_shift() {
        for n in 2..=6 {
            let d = dim(n);
            let mut power_x = Operator::identity(vec![d]);
            let mut power_p = Operator::identity(vec![d]);
            for k in 0..(2 * n as i64) {
                assert!(shift_x(d, k).max_abs_diff(&power_x) < EXACT_TOL);
                assert!(shift_p(d, k).max_abs_diff(&power_p) < EXACT_TOL);
                power_x = shift_x(d, 1).compose(&power_x).unwrap();
                power_p = shift_p(d, 1).compose(&power_p).unwrap();
            }
        }
    }

    #[test]
    fn qubit_shifts_anticommute() {
        let d = dim(2);
        let xp = shift_x(d, 1).compose(&shift_p(d, 1)).unwrap();
        let px = shift_p(d, 1).compose(&shift_x(d, 1)).unwrap();
        assert!(xp.max_abs_diff(&px.scale(c(-1.0, 0.0))) < EXACT_TOL);
    }

    #[test]
    fn qubit_bell_state() {
        let xi = entangled_state(dim(2), 0, 0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(xi.amplitude(&[0, 0]).re, s, epsilon = EXACT_TOL);
        assert_abs_diff_eq!(xi.amplitude(&[1, 1]).re, s, epsilon = EXACT_TOL);
        assert_abs_diff_eq!(xi.amplitude(&[0, 1]).norm(), 0.0);
        assert!(entangled_state(dim(2), 2, 0).is_err());
    }

    #[test]
    fn entangled_states_from_local_shifts() {
        // With |x_k> -> |x_{k+n}>, reaching |Ξ_mn> takes R_x(-n) on the second register.
        for n in 2..=5 {
            let d = dim(n);
            let base = entangled_state(d, 0, 0).unwrap();
            for m in 0..n {
                for s in 0..n {
                    let local = displacement(d, -(s as i64), m as i64);
                    let built = base.apply_local(&local, &[1]).unwrap();
                    let direct = entangled_state(d, m, s).unwrap();
                    let diff = built
                        .amplitudes()
                        .iter()
                        .zip(direct.amplitudes())
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max);
                    assert!(diff < EXACT_TOL, "N={n} m={m} n={s}");
                }
            }
        }
    }

    #[test]
    fn entangled_states_are_joint_eigenstates() {
        for n in 2..=5 {
            let d = dim(n);
            let f_adj = fourier_operator(d).adjoint();
            for m in 0..n {
                for s in 0..n {
                    let xi = entangled_state(d, m, s).unwrap();
                    // Position difference fixed at s (mod N).
                    for k2 in 0..n {
                        for k3 in 0..n {
                            if d.wrap(k2 as i64 - k3 as i64) != s {
                                assert!(xi.amplitude(&[k2, k3]).norm() < PIPELINE_TOL);
                            }
                        }
                    }
                    // Momentum sum fixed at m (mod N).
                    let in_p = xi.apply_local(&f_adj, &[0]).unwrap().apply_local(&f_adj, &[1]).unwrap();
                    for l2 in 0..n {
                        for l3 in 0..n {
                            if (l2 + l3) % n != m {
                                assert!(in_p.amplitude(&[l2, l3]).norm() < PIPELINE_TOL);
                            }
                        }
                    }
                    // Modular form: exp(i2π(X2-X3)/N) and exp(i2π(P2+P3)/N) have eigenphases n and m.
                    let ex = shift_p(d, 1);
                    let phase_x = xi.apply_local(&ex, &[0]).unwrap().apply_local(&ex.adjoint(), &[1]).unwrap();
                    let expected = d.root_of_unity(s as i64);
                    assert!((xi.inner(&phase_x).unwrap() - expected).norm() < PIPELINE_TOL);
                    let ep = shift_x(d, -1);
                    let phase_p = xi.apply_local(&ep, &[0]).unwrap().apply_local(&ep, &[1]).unwrap();
                    let expected = d.root_of_unity(m as i64);
                    assert!((xi.inner(&phase_p).unwrap() - expected).norm() < PIPELINE_TOL);
                }
            }
        }
    }

    #[test]
    fn generators_match_shift_operators() {
        // R_p(1) = exp(i 2π X / N) and R_x(1) = exp(-i 2π P / N); both X and P are diagonal in some basis.
        for n in 2..=5 {
            let d = dim(n);
            let x = position_operator(d);
            let diag: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * x.entry(k, k).re / n as f64)).collect();
            let rp = Operator::new(vec![d], DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))).unwrap();
            assert!(rp.max_abs_diff(&shift_p(d, 1)) < EXACT_TOL);
            let f = fourier_operator(d);
            let p_diag = f.adjoint().compose(&momentum_operator(d)).unwrap().compose(&f).unwrap();
            let rx_diag: Vec<C64> = (0..n)
                .map(|l| C64::from_polar(1.0, -2.0 * PI * p_diag.entry(l, l).re / n as f64))
                .collect();
            let rx = f
                .compose(&Operator::new(vec![d], DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rx_diag))).unwrap())
                .unwrap()
                .compose(&f.adjoint())
                .unwrap();
            assert!(rx.max_abs_diff(&shift_x(d, 1)) < 1e-10);
        }
    }

    #[test]
    fn partial_trace_examples() {
        for n in 2..=6 {
            let xi = entangled_state(dim(n), 0, 0).unwrap();
            let mixed = DensityOperator::maximally_mixed(dim(n));
            assert!(xi.partial_trace(&[0]).unwrap().max_abs_diff(&mixed) < EXACT_TOL);
            assert!(xi.partial_trace(&[1]).unwrap().max_abs_diff(&mixed) < EXACT_TOL);
        }
        let d = dim(3);
        let a = PureState::normalized(vec![d], vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)]).unwrap();
        let b = PureState::normalized(vec![d], vec![c(0.3, 0.0), c(0.0, 0.0), c(0.0, -1.0)]).unwrap();
        let product = a.tensor(&b);
        assert!(product.partial_trace(&[0]).unwrap().max_abs_diff(&a.density()) < EXACT_TOL);
        assert!(product.partial_trace(&[1]).unwrap().max_abs_diff(&b.density()) < EXACT_TOL);
    }

    #[test]
    fn partial_trace_small_qubit_case() {
        // (|00> + |01>)/√2 reduces to |0><0| on the first register.
        let d = dim(2);
        let s = 1.0 / 2f64.sqrt();
        let state = PureState::new(vec![d, d], vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let rho = state.partial_trace(&[0]).unwrap();
        let expected = x_basis(d, 0).unwrap().density();
        assert!(rho.max_abs_diff(&expected) < EXACT_TOL);
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let xi = entangled_state(dim(2), 0, 0).unwrap();
        assert!(matches!(xi.partial_trace(&[]), Err(QidError::InvalidRegisters(_))));
        assert!(matches!(xi.partial_trace(&[0, 1]), Err(QidError::InvalidRegisters(_))));
        assert!(matches!(xi.partial_trace(&[2]), Err(QidError::IndexOutOfRange { .. })));
        assert!(xi.density().partial_trace(&[1, 0]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let d = dim(4);
        let psi = PureState::normalized(vec![d], vec![c(1.0, 1.0), c(0.5, 0.0), c(0.0, -0.2), c(2.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(fidelity(&psi.density(), &psi).unwrap(), 1.0, epsilon = EXACT_TOL);
        assert_abs_diff_eq!(fidelity(&DensityOperator::maximally_mixed(d), &psi).unwrap(), 0.25, epsilon = EXACT_TOL);
        let other = x_basis(dim(3), 0).unwrap();
        assert!(matches!(fidelity(&psi.density(), &other), Err(QidError::DimensionMismatch(_))));
    }

    #[test]
    fn transpose_examples() {
        let d = dim(2);
        let real = DensityOperator::new(
            vec![d],
            DMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.3, 0.0)]),
        )
        .unwrap();
        assert_eq!(transpose_op(&real), real);
        let complex = DensityOperator::new(
            vec![d],
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0)]),
        )
        .unwrap();
        let t = transpose_op(&complex);
        assert_eq!(t.entry(1, 0), c(0.0, 0.5));
        assert!(t.validate(PIPELINE_TOL).is_ok());
        assert_eq!(transpose_op(&t), complex);
    }

    #[test]
    fn density_validation() {
        let d = dim(2);
        let bad_trace = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.6, 0.0), c(0.6, 0.0)]));
        assert!(DensityOperator::new(vec![d], bad_trace).is_err());
        let negative = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        assert!(DensityOperator::new(vec![d], negative).is_err());
        let non_hermitian = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityOperator::new(vec![d], non_hermitian).is_err());
    }

    #[test]
    fn state_construction_errors() {
        let d = dim(2);
        assert!(matches!(
            PureState::new(vec![d], vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(QidError::NotNormalized(_))
        ));
        assert!(PureState::new(vec![d], vec![c(1.0, 0.0)]).is_err());
        assert!(PureState::normalized(vec![d], vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(PureState::basis(vec![d, d], &[0, 2]).is_err());
    }

    #[test]
    fn label_round_trip() {
        let dims = vec![dim(3), dim(2), dim(5)];
        for i in 0..30 {
            assert_eq!(flat_index(&dims, &labels_of(&dims, i)), i);
        }
        assert_eq!(flat_index(&dims, &[1, 0, 2]), 12);
    }
}
