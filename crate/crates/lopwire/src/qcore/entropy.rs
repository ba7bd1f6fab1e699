use super::{herm_eig, CMat, QError, C64, EIG_CUTOFF};

/// -sum x log2 x over eigenvalues above `EIG_CUTOFF`.
pub fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter().filter(|&&x| x > EIG_CUTOFF).map(|&x| -x * x.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &CMat) -> f64 {
    entropy_of_spectrum(&herm_eig(rho).0)
}

/// S(rho||sigma) in bits; `f64::INFINITY` when supp(rho) is not inside supp(sigma).
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64, QError> {
    if rho.shape() != sigma.shape() {
        return Err(QError::Dim { expected: rho.nrows(), got: sigma.nrows() });
    }
    let (svals, svecs) = herm_eig(sigma);
    let mut cross = 0.0;
    for (k, &s) in svals.iter().enumerate() {
        let v = svecs.column(k);
        let w = (v.adjoint() * rho * v)[(0, 0)].re;
        if s > EIG_CUTOFF {
            cross += w * s.log2();
        } else if w > EIG_CUTOFF {
            return Ok(f64::INFINITY);
        }
    }
    let (rvals, _) = herm_eig(rho);
    let neg_s: f64 = rvals.iter().filter(|&&x| x > EIG_CUTOFF).map(|&x| x * x.log2()).sum();
    Ok((neg_s - cross).max(0.0))
}

/// Zeroes every entry whose row and column differ on a masked subsystem.
/// With the wire registers masked this is the projection onto the
/// wire-incoherent part; quantum registers are untouched.
pub fn dephase(rho: &CMat, dims: &[usize], mask: &[bool]) -> Result<CMat, QError> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total || mask.len() != dims.len() {
        return Err(QError::Dim { expected: total, got: rho.nrows() });
    }
    let key: Vec<usize> = (0..total)
        .map(|mut idx| {
            let mut k = 0;
            let mut scale = 1;
            for s in (0..dims.len()).rev() {
                let digit = idx % dims[s];
                idx /= dims[s];
                if mask[s] {
                    k += digit * scale;
                    scale *= dims[s];
                }
            }
            k
        })
        .collect();
    let mut out = rho.clone();
    for r in 0..total {
        for c in 0..total {
            if key[r] != key[c] {
                out[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{DensityMatrix, PureState};

    #[test]
    fn self_divergence_is_zero() {
        let rho = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        assert!(relative_entropy(rho.matrix(), rho.matrix()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn plus_against_mixed_is_one_bit() {
        let plus = PureState::maximally_coherent(2).density();
        let mixed = DensityMatrix::maximally_mixed(2);
        let s = relative_entropy(plus.matrix(), mixed.matrix()).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let a = PureState::basis(2, 0).density();
        let b = PureState::basis(2, 1).density();
        assert!(relative_entropy(a.matrix(), b.matrix()).unwrap().is_infinite());
    }

    #[test]
    fn dephase_plus_gives_mixed() {
        let plus = PureState::maximally_coherent(2).density();
        let d = dephase(plus.matrix(), &[2], &[true]).unwrap();
        assert!(crate::qcore::max_dist(&d, DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn dephase_leaves_quantum_part() {
        let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap().density();
        let d = dephase(bell.matrix(), &[2, 2], &[false, false]).unwrap();
        assert_eq!(&d, bell.matrix());
    }
}
