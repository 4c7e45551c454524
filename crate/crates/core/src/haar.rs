//! Haar-random isometries and their second-order moments.
//!
//! For an isometry `W` from dimension `d1` into dimension `d2` the fourth
//! moments take the form
//!
//! ```text
//! E[W_ij conj(W_kl) W_ab conj(W_cd)] = c  (δik δjl δac δbd + δic δjd δka δlb)
//!                                   + c' (δik δjd δac δlb + δic δjl δka δbd)
//! ```
//!
//! where `i, k, a, c` are output indices and `j, l, b, d` input indices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::rng::{derive_seed, stream_rng};
use crate::stats::mean_stderr;
use crate::{Error, Result, C64};

/// Columns-orthonormal `d_out x d_in` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    d_in: usize,
    d_out: usize,
    entries: DMatrix<C64>,
}

impl Isometry {
    /// Draws a Haar-distributed isometry from `rng`.
    ///
    /// A complex Gaussian matrix is QR-factorised and the phases of the
    /// diagonal of `R` are moved into `Q`, which makes the factorisation unique
    /// and the result exactly Haar.
    pub fn sample<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Result<Self> {
        check_dims(d_in, d_out)?;
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let gauss = DMatrix::<C64>::from_fn(d_out, d_in, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        });
        let qr = gauss.qr();
        let mut q = qr.q();
        let r = qr.r();
        for col in 0..d_in {
            let diag = r[(col, col)];
            let norm = diag.norm();
            let phase = if norm > 0.0 {
                diag / norm
            } else {
                C64::new(1.0, 0.0)
            };
            for row in 0..d_out {
                q[(row, col)] *= phase;
            }
        }
        Ok(Isometry {
            d_in,
            d_out,
            entries: q,
        })
    }

    /// Wraps an explicit matrix, checking the isometry condition to `tol`.
    pub fn from_matrix(entries: DMatrix<C64>, tol: f64) -> Result<Self> {
        let (d_out, d_in) = entries.shape();
        check_dims(d_in, d_out)?;
        let iso = Isometry {
            d_in,
            d_out,
            entries,
        };
        let err = iso.orthonormality_error();
        if err > tol {
            return Err(Error::InvalidDimension(format!(
                "matrix is not an isometry (max |W†W - I| = {err:e})"
            )));
        }
        Ok(iso)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    /// `max |(W†W - I)_{ij}|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.entries.adjoint() * &self.entries;
        let mut worst = 0.0f64;
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn check_dims(d_in: usize, d_out: usize) -> Result<()> {
    if d_in == 0 || d_out < d_in {
        return Err(Error::InvalidDimension(format!(
            "isometry needs d_out >= d_in >= 1, got d_in={d_in}, d_out={d_out}"
        )));
    }
    Ok(())
}

/// Haar isometry drawn from stream 0 of `seed`.
pub fn sample_isometry(d_in: usize, d_out: usize, seed: u64) -> Result<Isometry> {
    Isometry::sample(d_in, d_out, &mut stream_rng(seed, 0))
}

/// The constants `c`, `c'` of the second-order moment identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentConstants {
    pub c: f64,
    pub c_prime: f64,
    pub d1: usize,
    pub d2: usize,
}

/// Closed forms for `c` and `c'`.
///
/// With `X = d1²d2² + d1d2` and `Y = d1²d2 + d1d2²` they solve
/// `d1² = cX + c'Y` and `d1 = c'X + cY`.
pub fn moment_constants(d1: usize, d2: usize) -> Result<MomentConstants> {
    if d1 == 0 || d2 < d1 {
        return Err(Error::InvalidDimension(format!(
            "moment constants need d2 >= d1 >= 1, got d1={d1}, d2={d2}"
        )));
    }
    if d1 == 1 || d2 == 1 {
        return Err(Error::DegenerateMoment { d1, d2 });
    }
    let (a, b) = (d1 as f64, d2 as f64);
    let x = a * a * b * b + a * b;
    let y = a * a * b + a * b * b;
    let den = x * x - y * y;
    Ok(MomentConstants {
        c: (a * a * x - a * y) / den,
        c_prime: (a * x - a * a * y) / den,
        d1,
        d2,
    })
}

/// `E[ψ_i conj(ψ_k) ψ_a conj(ψ_c)]` coefficient for a Haar-random unit
/// vector in dimension `d2` (the `d1 = 1` case, where `c` and `c'` are not
/// separately defined): the moment is `(δik δac + δic δka) / (d2 (d2 + 1))`.
pub fn pure_state_moment(d2: usize) -> f64 {
    let d = d2 as f64;
    1.0 / (d * (d + 1.0))
}

/// One of the four delta patterns of the moment identity, used as a
/// contraction against both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Contraction {
    /// `δik δjl δac δbd`
    Identity,
    /// `δic δjd δka δlb`
    Swap,
    /// `δik δjd δac δlb`
    CrossInput,
    /// `δic δjl δka δbd`
    CrossOutput,
}

impl Contraction {
    pub const ALL: [Contraction; 4] = [
        Contraction::Identity,
        Contraction::Swap,
        Contraction::CrossInput,
        Contraction::CrossOutput,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Contraction::Identity => "identity",
            Contraction::Swap => "swap",
            Contraction::CrossInput => "cross_input",
            Contraction::CrossOutput => "cross_output",
        }
    }

    /// Value of the pattern contracted with the right-hand side of the identity.
    pub fn closed_form(self, mc: &MomentConstants) -> f64 {
        let (a, b) = (mc.d1 as f64, mc.d2 as f64);
        let x = a * a * b * b + a * b;
        let y = a * a * b + a * b * b;
        match self {
            Contraction::Identity | Contraction::Swap => mc.c * x + mc.c_prime * y,
            Contraction::CrossInput | Contraction::CrossOutput => mc.c_prime * x + mc.c * y,
        }
    }

    /// The pattern contracted with `W ⊗ W̄ ⊗ W ⊗ W̄` for one sample.
    fn contract(self, w: &DMatrix<C64>) -> f64 {
        match self {
            Contraction::Identity | Contraction::Swap => w.norm_squared().powi(2),
            Contraction::CrossInput => (w.adjoint() * w).norm_squared(),
            Contraction::CrossOutput => (w * w.adjoint()).norm_squared(),
        }
    }
}

impl MomentConstants {
    /// Right-hand side of the identity at explicit indices
    /// `[i, j, k, l, a, b, c, d]`.
    pub fn identity_rhs(&self, idx: [usize; 8]) -> f64 {
        let [i, j, k, l, a, b, c, d] = idx;
        let dl = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
        self.c * (dl(i, k) * dl(j, l) * dl(a, c) * dl(b, d) + dl(i, c) * dl(j, d) * dl(k, a) * dl(l, b))
            + self.c_prime
                * (dl(i, k) * dl(j, d) * dl(a, c) * dl(l, b)
                    + dl(i, c) * dl(j, l) * dl(k, a) * dl(b, d))
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McEstimate {
    fn from_samples(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        McEstimate {
            mean,
            stderr,
            trials: xs.len(),
        }
    }

    /// `|mean - target|` in units of the standard error, with an absolute
    /// floor `abs_floor` for zero-variance estimates.
    pub fn within(&self, target: f64, sigmas: f64, abs_floor: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr + abs_floor
    }
}

fn draws(d1: usize, d2: usize, trials: usize, seed: u64) -> Result<impl Iterator<Item = DMatrix<C64>>> {
    check_dims(d1, d2)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok((0..trials as u64).map(move |t| {
        Isometry::sample(d1, d2, &mut stream_rng(derive_seed(seed, t), 0))
            .expect("dimensions checked")
            .into_entries()
    }))
}

/// Monte Carlo average of a delta-pattern contraction of
/// `W_ij conj(W_kl) W_ab conj(W_cd)`.
pub fn fourth_moment_mc(
    d1: usize,
    d2: usize,
    contraction: Contraction,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    let xs: Vec<f64> = draws(d1, d2, trials, seed)?.map(|w| contraction.contract(&w)).collect();
    Ok(McEstimate::from_samples(&xs))
}

/// Monte Carlo average of the real part of a single moment
/// `W_ij conj(W_kl) W_ab conj(W_cd)` at indices `[i, j, k, l, a, b, c, d]`.
pub fn moment_entry_mc(
    d1: usize,
    d2: usize,
    idx: [usize; 8],
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    let [i, j, k, l, a, b, c, d] = idx;
    if [i, k, a, c].iter().any(|&o| o >= d2) || [j, l, b, d].iter().any(|&n| n >= d1) {
        return Err(Error::InvalidDimension(format!(
            "moment indices {idx:?} out of range for d1={d1}, d2={d2}"
        )));
    }
    let xs: Vec<f64> = draws(d1, d2, trials, seed)?
        .map(|w| (w[(i, j)] * w[(k, l)].conj() * w[(a, b)] * w[(c, d)].conj()).re)
        .collect();
    Ok(McEstimate::from_samples(&xs))
}

/// Index patterns that isolate `c`, `c'` and `c + c'` individually.
///
/// Each entry is `(label, indices, coefficient of c, coefficient of c')`.
pub fn probe_moments() -> [(&'static str, [usize; 8], f64, f64); 3] {
    [
        // |W00|^2 |W11|^2: only the first identity term survives.
        ("abs2_w00_abs2_w11", [0, 0, 0, 0, 1, 1, 1, 1], 1.0, 0.0),
        // W00 conj(W01) W11 conj(W10): only the two cross terms survive.
        ("w00_w01_w11_w10", [0, 0, 0, 1, 1, 1, 1, 0], 0.0, 1.0),
        // |W00|^4: all four terms.
        ("abs4_w00", [0, 0, 0, 0, 0, 0, 0, 0], 2.0, 2.0),
    ]
}
