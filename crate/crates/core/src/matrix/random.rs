use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use super::{CMatrix, HermMatrix, PosDefMatrix, SpectralDecomp, C64};

/// Deterministic RNG used for every sampled quantity in the crate.
pub type TrialRng = rand_chacha::ChaCha8Rng;

/// Entries are i.i.d. standard complex Gaussians (`E|z|^2 = 1`).
pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// GUE-style Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermMatrix {
    let g = random_complex_gaussian(rng, dim, dim);
    HermMatrix::hermitian_part(&g)
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal pushed back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = random_complex_gaussian(rng, dim, dim);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random positive definite matrix with spectrum inside
/// `[1/sqrt(cond_cap), sqrt(cond_cap)]`.
///
/// Starts from a Wishart draw `G G*`, compresses its log-spectrum to fit the
/// band when needed and applies a random log-shift so overall scale varies
/// between draws. `cond_cap` below 1 is treated as 1.
pub fn random_posdef_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, cond_cap: f64) -> PosDefMatrix {
    assert!(dim > 0, "dimension must be positive");
    let g = random_complex_gaussian(rng, dim, dim);
    let wishart = HermMatrix::hermitian_part(&(&g * g.adjoint()));
    let eig = wishart.eig();

    // Leave a little room so the re-solved spectrum stays inside the band.
    let half_width = 0.5 * cond_cap.max(1.0).ln() * (1.0 - 1e-6);
    let logs: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| l.max(f64::MIN_POSITIVE).ln())
        .collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let kappa = if spread > 2.0 * half_width {
        if spread > 0.0 {
            2.0 * half_width / spread
        } else {
            0.0
        }
    } else {
        1.0
    };
    let mid = 0.5 * (lo + hi);
    let slack = (half_width - 0.5 * kappa * spread).max(0.0);
    let u: f64 = rng.random_range(-1.0..=1.0);
    let shift = u * slack;
    let values: Vec<f64> = logs
        .iter()
        .map(|&l| (kappa * (l - mid) + shift).exp())
        .collect();

    let base = SpectralDecomp {
        eigenvalues: values,
        unitary: eig.unitary,
    }
    .reconstruct();
    PosDefMatrix::new(base).expect("spectrum is bounded away from zero")
}

/// Seeded convenience wrapper around [`random_posdef_with`].
pub fn random_posdef(dim: usize, seed: u64, cond_cap: f64) -> PosDefMatrix {
    let mut rng = TrialRng::seed_from_u64(seed);
    random_posdef_with(&mut rng, dim, cond_cap)
}
