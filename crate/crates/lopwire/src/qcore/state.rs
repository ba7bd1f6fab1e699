use super::{max_dist, min_eig, CMat, QError, C64, TOL};

/// Density operator: Hermitian, unit trace, positive semidefinite (all within `TOL`).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, QError> {
        Self::with_tol(mat, TOL)
    }

    pub fn with_tol(mat: CMat, tol: f64) -> Result<Self, QError> {
        if !mat.is_square() {
            return Err(QError::Dim { expected: mat.nrows(), got: mat.ncols() });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QError::NonFinite);
        }
        if max_dist(&mat, &mat.adjoint()) > tol {
            return Err(QError::NotDensity("not Hermitian".into()));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(QError::NotDensity(format!("trace {tr}")));
        }
        let me = min_eig(&mat);
        if me < -tol {
            return Err(QError::NotDensity(format!("minimum eigenvalue {me}")));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix without checks. Callers own the invariants.
    pub fn from_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    /// Divides by the trace. Fails on a (numerically) zero trace.
    pub fn normalized(mat: CMat) -> Result<Self, QError> {
        let tr = mat.trace().re;
        if tr.abs() < 1e-300 {
            return Err(QError::NotDensity("zero trace".into()));
        }
        Self::new(mat / C64::new(tr, 0.0))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.ket();
        Self { mat: &v * v.adjoint() }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { mat: CMat::identity(d, d) / C64::new(d as f64, 0.0) }
    }

    pub fn diagonal(p: &[f64]) -> Result<Self, QError> {
        let mut m = CMat::zeros(p.len(), p.len());
        for (i, &x) in p.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        Self { mat: self.mat.kronecker(&other.mat) }
    }

    /// <psi|rho|psi>.
    pub fn fidelity_pure(&self, psi: &PureState) -> f64 {
        let v = psi.ket();
        (v.adjoint() * &self.mat * &v)[(0, 0)].re
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self, QError> {
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > TOL {
            return Err(QError::NotNormalized(n));
        }
        Ok(Self { amps })
    }

    /// Rescales to unit norm.
    pub fn normalize(amps: Vec<C64>) -> Result<Self, QError> {
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(QError::NotNormalized(n));
        }
        Ok(Self { amps: amps.into_iter().map(|z| z / n).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self, QError> {
        Self::normalize(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Uniform superposition over `d` basis states.
    pub fn maximally_coherent(d: usize) -> Self {
        let a = 1.0 / (d as f64).sqrt();
        Self { amps: vec![C64::new(a, 0.0); d] }
    }

    pub fn ghz(n: usize) -> Self {
        let d = 1usize << n;
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[d - 1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amps }
    }

    /// Equal superposition of the `n` one-hot qubit strings.
    pub fn w(n: usize) -> Self {
        let d = 1usize << n;
        let mut amps = vec![C64::new(0.0, 0.0); d];
        let a = 1.0 / (n as f64).sqrt();
        for k in 0..n {
            amps[1 << k] = C64::new(a, 0.0);
        }
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn ket(&self) -> CMat {
        CMat::from_column_slice(self.amps.len(), 1, &self.amps)
    }

    pub fn kron(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace() {
        let m = CMat::identity(2, 2);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn w_and_ghz_norms() {
        assert!((PureState::w(3).density().purity() - 1.0).abs() < 1e-14);
        assert_eq!(PureState::ghz(3).amplitudes()[7].re, std::f64::consts::FRAC_1_SQRT_2);
    }
}
