//! Seeded random states, unitaries and channels for property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMat, DensityMatrix, PureState, QuantumChannel, C64};

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar unitary: QR of a Ginibre matrix with the diagonal phases of R removed.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn haar_pure(d: usize, rng: &mut impl Rng) -> PureState {
    let amps: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    PureState::normalize(amps).expect("Gaussian vector is nonzero")
}

/// Full-rank mixed state G G† / tr from a square Ginibre matrix.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_unchecked(m / C64::new(tr, 0.0))
}

/// Random channel with `n_kraus` operators from the blocks of a Haar isometry.
pub fn random_channel(din: usize, dout: usize, n_kraus: usize, rng: &mut impl Rng) -> QuantumChannel {
    let big = dout * n_kraus;
    assert!(big >= din, "isometry needs dout * n_kraus >= din");
    let u = haar_unitary(big, rng);
    let kraus = (0..n_kraus)
        .map(|a| u.view((a * dout, 0), (dout, din)).into_owned())
        .collect();
    QuantumChannel::new(kraus).expect("blocks have equal shapes")
}

pub fn random_unitary_channel(d: usize, rng: &mut impl Rng) -> QuantumChannel {
    QuantumChannel::new(vec![haar_unitary(d, rng)]).expect("square")
}
