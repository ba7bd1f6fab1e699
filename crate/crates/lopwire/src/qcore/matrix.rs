use super::{CMat, QError, C64};

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Column vector |i> of dimension `d`.
pub fn basis_ket(d: usize, i: usize) -> CMat {
    let mut k = CMat::zeros(d, 1);
    k[(i, 0)] = C64::new(1.0, 0.0);
    k
}

pub fn ket_from(amps: &[C64]) -> CMat {
    CMat::from_column_slice(amps.len(), 1, amps)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    let mut acc = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for m in ms {
        acc = acc.kronecker(m);
    }
    acc
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Max-norm distance; infinite when shapes differ.
pub fn max_dist(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_dist(m, &m.adjoint()) <= tol
}

/// Eigenvalues and eigenvectors of the Hermitian part of `m`.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn min_eig(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    herm_eig(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = f(v);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative rounding noise is clipped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |v| v.max(0.0).sqrt())
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix with eigenvalue cutoff.
pub fn pinv_herm(m: &CMat, cutoff: f64) -> CMat {
    spectral_map(m, |v| if v.abs() > cutoff { 1.0 / v } else { 0.0 })
}

/// Numerical rank from singular values.
pub fn rank(m: &CMat, cutoff: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().singular_values().iter().filter(|s| **s > cutoff).count()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn offsets(sel: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let total: usize = sel.iter().map(|&k| dims[k]).product();
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut off = 0;
        for &k in sel.iter().rev() {
            off += (idx % dims[k]) * strides[k];
            idx /= dims[k];
        }
        out.push(off);
    }
    out
}

/// Traces out every subsystem not listed in `order` and returns the remaining
/// operator with its factors arranged as listed.
pub fn reduce(rho: &CMat, dims: &[usize], order: &[usize]) -> Result<CMat, QError> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(QError::Dim { expected: total, got: rho.nrows() });
    }
    for (a, &k) in order.iter().enumerate() {
        if k >= dims.len() || order[..a].contains(&k) {
            return Err(QError::BadSubsystem(format!("index {k} in {order:?}")));
        }
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !order.contains(k)).collect();
    let st = strides(dims);
    let ko = offsets(order, dims, &st);
    let to = offsets(&traced, dims, &st);
    let kd = ko.len();
    let mut out = CMat::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &to {
                acc += rho[(ko[a] + t, ko[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace keeping the listed subsystems in their original order.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat, QError> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != keep.len() {
        return Err(QError::BadSubsystem(format!("repeated index in {keep:?}")));
    }
    reduce(rho, dims, &k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::cr;

    #[test]
    fn reduce_reorders_product() {
        let a = CMat::from_row_slice(2, 2, &[cr(0.3), cr(0.0), cr(0.0), cr(0.7)]);
        let b = CMat::from_row_slice(3, 3, &[
            cr(0.2), cr(0.0), cr(0.0),
            cr(0.0), cr(0.5), cr(0.0),
            cr(0.0), cr(0.0), cr(0.3),
        ]);
        let ab = a.kronecker(&b);
        assert!(max_dist(&reduce(&ab, &[2, 3], &[1, 0]).unwrap(), &b.kronecker(&a)) < 1e-15);
        assert!(max_dist(&partial_trace(&ab, &[2, 3], &[0]).unwrap(), &a) < 1e-15);
        assert!(max_dist(&partial_trace(&ab, &[2, 3], &[1]).unwrap(), &b) < 1e-15);
    }

    #[test]
    fn pinv_on_singular() {
        let m = CMat::from_row_slice(2, 2, &[cr(2.0), cr(0.0), cr(0.0), cr(0.0)]);
        let p = pinv_herm(&m, 1e-10);
        assert!((p[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
        assert_eq!(rank(&m, 1e-10), 1);
    }
}
