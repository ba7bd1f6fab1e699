use super::{herm_eig, max_dist, CMat, DensityMatrix, QError, TOL};

/// Finite Kraus set with a common input and output dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    /// Shapes are checked; completeness is not (sub-normalized branches are allowed).
    pub fn new(kraus: Vec<CMat>) -> Result<Self, QError> {
        let first = kraus.first().ok_or_else(|| QError::BadKraus("empty Kraus list".into()))?;
        let (out_dim, in_dim) = first.shape();
        for k in &kraus {
            if k.shape() != (out_dim, in_dim) {
                return Err(QError::BadKraus(format!(
                    "shape {:?} differs from {:?}",
                    k.shape(),
                    (out_dim, in_dim)
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(QError::NonFinite);
            }
        }
        Ok(Self { in_dim, out_dim, kraus })
    }

    /// Like `new`, but also requires completeness within `TOL`.
    pub fn full(kraus: Vec<CMat>) -> Result<Self, QError> {
        let ch = Self::new(kraus)?;
        let r = ch.completeness_residual();
        if r > TOL {
            return Err(QError::BadKraus(format!("completeness residual {r:e}")));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self { in_dim: d, out_dim: d, kraus: vec![CMat::identity(d, d)] }
    }

    pub fn unitary(u: CMat) -> Result<Self, QError> {
        Self::new(vec![u])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn into_kraus(self) -> Vec<CMat> {
        self.kraus
    }

    pub fn gram(&self) -> CMat {
        let mut s = CMat::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        s
    }

    /// max |sum K^dag K - I|.
    pub fn completeness_residual(&self) -> f64 {
        max_dist(&self.gram(), &CMat::identity(self.in_dim, self.in_dim))
    }

    pub fn is_full(&self, tol: f64) -> bool {
        self.completeness_residual() <= tol
    }

    /// `after` applied to the output of `self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<QuantumChannel, QError> {
        if after.in_dim != self.out_dim {
            return Err(QError::Dim { expected: self.out_dim, got: after.in_dim });
        }
        let mut ks = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                ks.push(b * a);
            }
        }
        QuantumChannel::new(ks)
    }

    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut ks = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                ks.push(a.kronecker(b));
            }
        }
        QuantumChannel {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            kraus: ks,
        }
    }

    /// Raw Kraus action on any square operator (linear, no checks beyond shape).
    pub fn apply_raw(&self, rho: &CMat) -> CMat {
        apply_kraus(&self.kraus, rho)
    }
}

pub fn apply_kraus(kraus: &[CMat], rho: &CMat) -> CMat {
    let out = kraus.first().map(|k| k.nrows()).unwrap_or(0);
    let mut acc = CMat::zeros(out, out);
    for k in kraus {
        acc += k * rho * k.adjoint();
    }
    acc
}

/// Output of `apply_channel`. For sub-normalized Kraus sets the trace drops
/// below the input trace and `completeness_residual` exceeds `TOL`.
#[derive(Clone, Debug)]
pub struct ChannelImage {
    pub matrix: CMat,
    pub trace: f64,
    pub completeness_residual: f64,
}

impl ChannelImage {
    pub fn is_full(&self) -> bool {
        self.completeness_residual <= TOL
    }

    pub fn into_density(self) -> Result<DensityMatrix, QError> {
        DensityMatrix::normalized(self.matrix)
    }
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<ChannelImage, QError> {
    if ch.in_dim() != rho.dim() {
        return Err(QError::Dim { expected: ch.in_dim(), got: rho.dim() });
    }
    let gram = ch.gram();
    let top = herm_eig(&gram).0.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if top > 1.0 + TOL {
        return Err(QError::OverComplete(top));
    }
    let matrix = ch.apply_raw(rho.matrix());
    let trace = matrix.trace().re;
    Ok(ChannelImage {
        matrix,
        trace,
        completeness_residual: max_dist(&gram, &CMat::identity(ch.in_dim(), ch.in_dim())),
    })
}

/// Choi matrix sum_ij |i><j| (x) ch(|i><j|), input factor first.
pub fn choi_of(ch: &QuantumChannel) -> CMat {
    choi_from_kraus(ch.kraus(), ch.in_dim(), ch.out_dim())
}

pub(crate) fn choi_from_kraus(kraus: &[CMat], din: usize, dout: usize) -> CMat {
    let n = din * dout;
    let mut out = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, 1);
    for k in kraus {
        for i in 0..din {
            for o in 0..dout {
                v[(i * dout + o, 0)] = k[(o, i)];
            }
        }
        out += &v * v.adjoint();
    }
    out
}

/// Max-norm distance between Choi matrices; infinite on shape mismatch.
pub fn choi_distance(a: &QuantumChannel, b: &QuantumChannel) -> f64 {
    if a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() {
        return f64::INFINITY;
    }
    max_dist(&choi_of(a), &choi_of(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{basis_ket, cr, C64};

    fn proj(d: usize, i: usize) -> CMat {
        let k = basis_ket(d, i);
        &k * k.adjoint()
    }

    #[test]
    fn identity_leaves_state() {
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let out = apply_channel(&QuantumChannel::identity(2), &rho).unwrap();
        assert!(max_dist(&out.matrix, rho.matrix()) < 1e-15);
        assert!(out.is_full());
    }

    #[test]
    fn swap_relabels() {
        let x = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let out = apply_channel(&QuantumChannel::unitary(x).unwrap(), &rho).unwrap();
        assert!(max_dist(&out.matrix, DensityMatrix::diagonal(&[0.7, 0.3]).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn dephasing_kills_coherence() {
        let ch = QuantumChannel::full(vec![proj(2, 0), proj(2, 1)]).unwrap();
        let plus = crate::qcore::PureState::maximally_coherent(2).density();
        let out = apply_channel(&ch, &plus).unwrap();
        assert!(max_dist(&out.matrix, DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn choi_of_identity() {
        let c = choi_of(&QuantumChannel::identity(2));
        for (r, col, v) in [(0, 0, 1.0), (0, 3, 1.0), (3, 0, 1.0), (3, 3, 1.0), (1, 1, 0.0)] {
            assert_eq!(c[(r, col)].re, v);
        }
    }

    #[test]
    fn dephasing_choi_is_representation_free() {
        let a = QuantumChannel::full(vec![proj(2, 0), proj(2, 1)]).unwrap();
        let z = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let b = QuantumChannel::full(vec![CMat::identity(2, 2) * h, z * h]).unwrap();
        assert!(choi_distance(&a, &b) < 1e-15);
        let ab = a.then(&QuantumChannel::identity(2)).unwrap();
        assert!(choi_distance(&a, &ab) < 1e-15);
    }

    #[test]
    fn overcomplete_rejected() {
        let ch = QuantumChannel::new(vec![CMat::identity(2, 2), CMat::identity(2, 2)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(apply_channel(&ch, &rho), Err(QError::OverComplete(_))));
    }

    #[test]
    fn subnormalized_is_flagged() {
        let ch = QuantumChannel::new(vec![proj(2, 0)]).unwrap();
        let out = apply_channel(&ch, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(!out.is_full());
        assert!((out.trace - 0.5).abs() < 1e-15);
    }
}
