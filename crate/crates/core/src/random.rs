//! Exact-validity samplers for states, effects, measurements and channels.
//!
//! Every sampler produces objects that satisfy their invariants by
//! construction, without rejection sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::granules::{Effect, Povm, Pvm};
use crate::linalg::{self, c, CMat, ComplexMatrix, HermitianOperator};
use crate::states::{BlochVector, DensityOperator, StateVector};

/// Matrix of i.i.d. standard complex Gaussians.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// GUE-style Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    HermitianOperator::new((&g + g.adjoint()) * c(0.5, 0.0)).expect("symmetrized")
}

/// PSD matrix `G G†`.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    HermitianOperator::new(&g * g.adjoint()).expect("Gram matrix is Hermitian")
}

/// Effect `(G − λ_min I)/(λ_max − λ_min)`, spectrum exactly in `[0, 1]`.
pub fn effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Effect {
    let g = hermitian(rng, dim);
    let eig = linalg::eig_hermitian(&g).expect("finite Hermitian input");
    let (lo, hi) = (eig.min(), eig.max());
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let e = eig.reassemble(eig.values.iter().map(|&l| ((l - lo) / span).clamp(0.0, 1.0)));
    Effect::from_hermitian(e).expect("spectrum clamped to [0, 1]")
}

/// POVM `E_j = S^{-1/2} A_j S^{-1/2}` with `S = Σ A_j`.
pub fn povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let parts: Vec<HermitianOperator> = (0..outcomes).map(|_| psd(rng, dim)).collect();
    let sum = parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, a| acc.add(a).expect("equal dims"));
    let inv_sqrt = sum
        .map_spectrum(|l| 1.0 / l.sqrt())
        .expect("finite Hermitian input")
        .into_matrix();
    let effects = parts
        .iter()
        .map(|a| {
            let m = &inv_sqrt * a.matrix() * &inv_sqrt;
            Effect::from_hermitian(HermitianOperator::new(m).expect("congruence preserves Hermiticity"))
                .expect("S^{-1/2} A S^{-1/2} ⪯ I")
        })
        .collect();
    Povm::new(effects).expect("completeness by construction")
}

/// Haar unitary via QR of a complex Gaussian matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    isometry(rng, dim, dim)
}

/// `rows × cols` isometry (`V†V = I`); panics unless `rows ≥ cols`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let g = gaussian_matrix(rng, dim, 1);
    StateVector::normalized(g.iter().copied().collect()).expect("nonzero Gaussian vector")
}

/// Full-rank Hilbert–Schmidt random state `GG†/Tr(GG†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    density_with_rank(rng, dim, dim)
}

/// Random state of rank at most `rank`.
pub fn density_with_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityOperator::new(m / c(tr, 0.0)).expect("normalized Gram matrix")
}

/// Bloch vector uniform in the unit ball.
pub fn bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let dir: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(f64::MIN_POSITIVE);
    let radius: f64 = rng.random::<f64>().cbrt();
    let s = radius / n;
    BlochVector::new(dir[0] * s, dir[1] * s, dir[2] * s).expect("inside unit ball")
}

/// PVM from a random unitary with columns split into `outcomes` nonempty groups.
pub fn pvm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Pvm {
    assert!(outcomes >= 1 && outcomes <= dim);
    let u = unitary(rng, dim);
    // first `outcomes` columns seed each group, the rest land uniformly
    let mut groups: Vec<Vec<usize>> = (0..outcomes).map(|g| vec![g]).collect();
    for col in outcomes..dim {
        groups[rng.random_range(0..outcomes)].push(col);
    }
    let projectors = groups
        .iter()
        .map(|cols| {
            let v = u.select_columns(cols.iter());
            Effect::from_hermitian(HermitianOperator::new(&v * v.adjoint()).expect("Gram"))
                .expect("projector")
        })
        .collect();
    Pvm::new(projectors).expect("orthogonal decomposition of a unitary basis")
}

/// Channel whose Kraus operators are the environment blocks of a random isometry;
/// needs `dim_out · num_kraus ≥ dim_in`.
pub fn channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, num_kraus: usize) -> KrausChannel {
    let v = isometry(rng, dim_out * num_kraus, dim_in);
    let kraus = (0..num_kraus)
        .map(|j| {
            ComplexMatrix::from_matrix(v.rows(j * dim_out, dim_out).into_owned()).expect("finite")
        })
        .collect();
    KrausChannel::new(kraus).expect("V†V = I gives Σ K†K = I")
}

/// `count` effects diagonal in a shared random basis; sharp families use 0/1 spectra.
pub fn commuting_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize, sharp: bool) -> Vec<Effect> {
    let u = unitary(rng, dim);
    (0..count)
        .map(|_| {
            let spectrum: Vec<f64> = (0..dim)
                .map(|_| {
                    if sharp {
                        if rng.random::<bool>() { 1.0 } else { 0.0 }
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            let d = HermitianOperator::from_real_diagonal(&spectrum).into_matrix();
            let m = &u * d * u.adjoint();
            Effect::from_hermitian(HermitianOperator::new(m).expect("unitary conjugation"))
                .expect("spectrum in [0, 1]")
        })
        .collect()
}
