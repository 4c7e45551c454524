//! The correlation super-operator of a single isometry and its singular
//! spectrum.
//!
//! An isometry `W: C^{d_A} -> C^{d_B} (x) C^{d_E}` (output index `b * d_E + e`)
//! defines `E(O) = sqrt(d_B / d_A) tr_E(W O W^dagger)`. With Kraus operators
//! `K_e[b, a] = W[b d_E + e, a]` this is `s sum_e K_e O K_e^dagger`.
//!
//! Operators are vectorised row-major (`O[a, a']` at `a d_A + a'`), so the
//! matrix of `E` is `s sum_e K_e (x) conj(K_e)`, of shape `d_B^2 x d_A^2`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::haar::{moment_constants, sample_isometry, Isometry};
use crate::rng::derive_seed;
use crate::stats::SampleStats;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuperOperatorSpec {
    pub d_a: usize,
    pub d_b: usize,
    pub d_e: usize,
    pub seed: u64,
}

impl SuperOperatorSpec {
    pub fn new(d_a: usize, d_b: usize, d_e: usize, seed: u64) -> Result<Self> {
        let s = SuperOperatorSpec { d_a, d_b, d_e, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_a == 0 || self.d_b == 0 || self.d_e == 0 {
            return Err(Error::InvalidSpec(format!("dimensions must be positive: {self}")));
        }
        if self.d_b.checked_mul(self.d_e).is_none_or(|p| p < self.d_a) {
            return Err(Error::InvalidSpec(format!("need d_B * d_E >= d_A: {self}")));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SuperOperatorSpec { seed, ..self }
    }

    /// `d_B / (d_A d_E)`.
    pub fn x(&self) -> f64 {
        self.d_b as f64 / (self.d_a * self.d_e) as f64
    }

    /// `d_A / (d_B d_E)`.
    pub fn y(&self) -> f64 {
        self.d_a as f64 / (self.d_b * self.d_e) as f64
    }

    fn scale(&self) -> f64 {
        (self.d_b as f64 / self.d_a as f64).sqrt()
    }
}

impl std::fmt::Display for SuperOperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "dA={} dB={} dE={}", self.d_a, self.d_b, self.d_e)
    }
}

#[derive(Debug, Clone)]
pub struct SuperOperator {
    spec: SuperOperatorSpec,
    kraus: Vec<DMatrix<C64>>,
}

pub fn build_superop(spec: &SuperOperatorSpec) -> Result<SuperOperator> {
    spec.validate()?;
    let w = sample_isometry(spec.d_a, spec.d_b * spec.d_e, spec.seed)?;
    Ok(SuperOperator::from_isometry(*spec, &w))
}

impl SuperOperator {
    pub fn from_isometry(spec: SuperOperatorSpec, w: &Isometry) -> Self {
        let m = w.entries();
        let kraus = (0..spec.d_e)
            .map(|e| DMatrix::from_fn(spec.d_b, spec.d_a, |b, a| m[(b * spec.d_e + e, a)]))
            .collect();
        SuperOperator { spec, kraus }
    }

    pub fn spec(&self) -> &SuperOperatorSpec {
        &self.spec
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    /// `E(O)` for a `d_A x d_A` operator.
    pub fn apply(&self, o: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.spec.d_b, self.spec.d_b);
        for k in &self.kraus {
            out += k * o * k.adjoint();
        }
        out * C64::new(self.spec.scale(), 0.0)
    }

    /// `E^dagger(P) = s sum_e K_e^dagger P K_e`.
    pub fn apply_adjoint(&self, p: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.spec.d_a, self.spec.d_a);
        for k in &self.kraus {
            out += k.adjoint() * p * k;
        }
        out * C64::new(self.spec.scale(), 0.0)
    }

    /// Row-major matricisation, `d_B^2 x d_A^2`.
    pub fn matrix(&self) -> DMatrix<C64> {
        let (da, db) = (self.spec.d_a, self.spec.d_b);
        let s = self.spec.scale();
        let mut m = DMatrix::<C64>::zeros(db * db, da * da);
        for k in &self.kraus {
            for b in 0..db {
                for bp in 0..db {
                    for a in 0..da {
                        let kba = k[(b, a)] * s;
                        for ap in 0..da {
                            m[(b * db + bp, a * da + ap)] += kba * k[(bp, ap)].conj();
                        }
                    }
                }
            }
        }
        m
    }

    /// `M M^dagger = s^2 sum_{e,f} A_ef (x) conj(A_ef)` with `A_ef = K_e K_f^dagger`;
    /// `d_B^2 x d_B^2` regardless of `d_A`.
    pub fn gram(&self) -> DMatrix<C64> {
        let db = self.spec.d_b;
        let s2 = self.spec.scale().powi(2);
        let mut g = DMatrix::<C64>::zeros(db * db, db * db);
        for ke in &self.kraus {
            for kf in &self.kraus {
                let a = ke * kf.adjoint();
                let ac = a.map(|z| z.conj());
                for b in 0..db {
                    for c in 0..db {
                        let abc = a[(b, c)] * s2;
                        if abc == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for bp in 0..db {
                            for cp in 0..db {
                                g[(b * db + bp, c * db + cp)] += abc * ac[(bp, cp)];
                            }
                        }
                    }
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    /// Descending, `d_B^2` values (zero-padded when `d_A < d_B`).
    pub values: Vec<f64>,
    pub spec: SuperOperatorSpec,
}

impl SingularSpectrum {
    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Singular values from the eigenvalues of the `d_B^2 x d_B^2` Gram matrix.
pub fn singular_spectrum(spec: &SuperOperatorSpec) -> Result<SingularSpectrum> {
    let op = build_superop(spec)?;
    Ok(spectrum_of(&op))
}

pub fn spectrum_of(op: &SuperOperator) -> SingularSpectrum {
    let mut values: Vec<f64> = op.gram().symmetric_eigenvalues().iter().map(|&x| x.max(0.0).sqrt()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    SingularSpectrum { values, spec: op.spec }
}

/// Singular values from a dense SVD of the row-major matrix.
pub fn spectrum_by_svd(op: &SuperOperator) -> SingularSpectrum {
    descending_padded(op.matrix().singular_values().as_slice(), op.spec)
}

fn descending_padded(sv: &[f64], spec: SuperOperatorSpec) -> SingularSpectrum {
    let mut values = sv.to_vec();
    values.resize(spec.d_b * spec.d_b, 0.0);
    values.sort_by(|a, b| b.total_cmp(a));
    SingularSpectrum { values, spec }
}

/// Mean of `lambda(i)` over seeds `derive_seed(seed, t)`.
pub fn mean_spectrum(spec: &SuperOperatorSpec, seeds: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; spec.d_b * spec.d_b];
    for t in 0..seeds {
        let sp = singular_spectrum(&spec.with_seed(derive_seed(spec.seed, t as u64)))?;
        for (a, v) in acc.iter_mut().zip(&sp.values) {
            *a += v / seeds as f64;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusCheck {
    pub mc: SampleStats,
    /// Haar average of the squared Frobenius norm, when the moment constants exist.
    pub closed_form: Option<f64>,
}

/// Expected `sum_i lambda(i)^2 = |M|_F^2` from the second-moment constants
/// with `d1 = d_A`, `d2 = d_B d_E`.
pub fn frobenius_closed_form(d_a: usize, d_b: usize, d_e: usize) -> Result<f64> {
    let mc = moment_constants(d_a, d_b * d_e)?;
    let (a, b, e) = (d_a as f64, d_b as f64, d_e as f64);
    let s2 = b / a;
    Ok(s2 * (mc.c * (a * b * e * e + a * a * b * b * e) + mc.c_prime * (a * a * b * e * e + a * b * b * e)))
}

pub fn frobenius_check(spec: &SuperOperatorSpec, trials: usize, seed: u64) -> Result<FrobeniusCheck> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let samples = (0..trials)
        .map(|t| {
            let op = build_superop(&spec.with_seed(derive_seed(seed, t as u64)))?;
            Ok(op.gram().trace().re)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FrobeniusCheck {
        mc: SampleStats::from_samples(samples),
        closed_form: frobenius_closed_form(spec.d_a, spec.d_b, spec.d_e).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rescale {
    /// `lambda sqrt(d)` against `i / d^2`; needs `d_A = d_B = d_E = d`.
    SqrtD,
    /// `(lambda - shift) d_B^alpha` against `i / d_B^2`.
    Affine { shift: f64, alpha: f64 },
    /// `lambda` against `i / d_B^2`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseRow {
    pub spec: usize,
    pub i: usize,
    pub x: f64,
    pub y: f64,
}

/// Rescaled spectra of one draw per spec, leaving out `lambda(0)`.
pub fn collapse_experiment(specs: &[SuperOperatorSpec], rescale: Rescale) -> Result<Vec<CollapseRow>> {
    let spectra = specs
        .iter()
        .map(|s| singular_spectrum(s).map(|sp| sp.values))
        .collect::<Result<Vec<_>>>()?;
    collapse_rows(specs, &spectra, rescale)
}

/// Rescales given spectra (e.g. seed averages) as in [`collapse_experiment`].
pub fn collapse_rows(specs: &[SuperOperatorSpec], spectra: &[Vec<f64>], rescale: Rescale) -> Result<Vec<CollapseRow>> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("collapse needs at least one spec".into()));
    }
    let mut rows = Vec::new();
    for (idx, (spec, values)) in specs.iter().zip(spectra).enumerate() {
        let db = spec.d_b as f64;
        let (xscale, yfn): (f64, Box<dyn Fn(f64) -> f64>) = match rescale {
            Rescale::SqrtD => {
                if spec.d_a != spec.d_b || spec.d_b != spec.d_e {
                    return Err(Error::InvalidSpec(format!("sqrt-d rescaling needs a square spec, got {spec}")));
                }
                (db * db, Box::new(move |l| l * db.sqrt()))
            }
            Rescale::Affine { shift, alpha } => (db * db, Box::new(move |l| (l - shift) * db.powf(alpha))),
            Rescale::Raw => (db * db, Box::new(|l| l)),
        };
        for (i, &l) in values.iter().enumerate().skip(1) {
            rows.push(CollapseRow {
                spec: idx,
                i,
                x: i as f64 / xscale,
                y: yfn(l),
            });
        }
    }
    Ok(rows)
}

/// Mismatch between two rescaled curves: mean absolute difference on a grid
/// of 19 points in `[0.05, 0.95]`, divided by the joint range of `y`.
/// Curves are `(x, y)` points sorted by `x`.
pub fn collapse_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let grid = (0..19).map(|t| 0.05 + 0.05 * t as f64);
    let diff: f64 = grid.map(|x| (interp(a, x) - interp(b, x)).abs()).sum::<f64>() / 19.0;
    let ys = a.iter().chain(b).map(|p| p.1);
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    diff / (hi - lo).max(f64::MIN_POSITIVE)
}

fn interp(pts: &[(f64, f64)], x: f64) -> f64 {
    match pts.iter().position(|p| p.0 >= x) {
        None => pts.last().map_or(f64::NAN, |p| p.1),
        Some(0) => pts[0].1,
        Some(i) => {
            let (x0, y0) = pts[i - 1];
            let (x1, y1) = pts[i];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

/// Points of one spec's curve from a collapse table.
pub fn curve(rows: &[CollapseRow], spec: usize) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.spec == spec).map(|r| (r.x, r.y)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondSingularRow {
    pub d: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `sqrt(y) = 1 / sqrt(d)` in the square case.
    pub sqrt_y: f64,
}

/// Statistics of `lambda(1)` for square specs `d_A = d_B = d_E = d`.
pub fn second_singular_scaling(ds: &[usize], trials: usize, seed: u64) -> Result<Vec<SecondSingularRow>> {
    ds.iter()
        .enumerate()
        .map(|(j, &d)| {
            let base = derive_seed(seed, j as u64);
            let samples = (0..trials)
                .map(|t| {
                    let spec = SuperOperatorSpec::new(d, d, d, derive_seed(base, t as u64))?;
                    Ok(singular_spectrum(&spec)?.values[1])
                })
                .collect::<Result<Vec<f64>>>()?;
            let st = SampleStats::from_samples(samples);
            Ok(SecondSingularRow {
                d,
                mean: st.mean,
                stderr: st.stderr,
                sqrt_y: 1.0 / (d as f64).sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(d: usize) -> DMatrix<C64> {
        DMatrix::identity(d, d)
    }

    #[test]
    fn spec_ratios_and_validation() {
        let s = SuperOperatorSpec::new(80, 10, 10, 0).unwrap();
        assert!((s.x() - 10.0 / 800.0).abs() < 1e-15);
        assert!((s.y() - 0.8).abs() < 1e-15);
        assert!(SuperOperatorSpec::new(101, 10, 10, 0).is_err());
        assert!(SuperOperatorSpec::new(0, 10, 10, 0).is_err());
    }

    #[test]
    fn unitary_case_is_flat() {
        let sp = singular_spectrum(&SuperOperatorSpec::new(8, 8, 1, 3).unwrap()).unwrap();
        assert_eq!(sp.values.len(), 64);
        assert!(sp.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn gram_route_matches_svd() {
        for (a, b, e) in [(3, 2, 2), (4, 3, 2), (2, 3, 3), (5, 5, 1)] {
            let op = build_superop(&SuperOperatorSpec::new(a, b, e, 17).unwrap()).unwrap();
            let g = spectrum_of(&op);
            let s = spectrum_by_svd(&op);
            assert_eq!(g.values.len(), b * b);
            for (x, y) in g.values.iter().zip(&s.values) {
                assert!((x - y).abs() < 1e-7, "{a},{b},{e}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn matrix_agrees_with_apply() {
        let op = build_superop(&SuperOperatorSpec::new(3, 2, 2, 5).unwrap()).unwrap();
        let m = op.matrix();
        let o = DMatrix::from_fn(3, 3, |r, c| C64::new(r as f64 - 0.5 * c as f64, (r * c) as f64));
        let vec_o = DMatrix::from_fn(9, 1, |i, _| o[(i / 3, i % 3)]);
        let out = &m * vec_o;
        let direct = op.apply(&o);
        for b in 0..2 {
            for bp in 0..2 {
                assert!((out[(b * 2 + bp, 0)] - direct[(b, bp)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_maps_identity_to_scaled_identity() {
        let spec = SuperOperatorSpec::new(6, 3, 4, 1).unwrap();
        let op = build_superop(&spec).unwrap();
        let r = op.apply_adjoint(&identity(3));
        let want = identity(6) * C64::new((3.0f64 / 6.0).sqrt(), 0.0);
        assert!((r - want).camax() < 1e-12);
    }

    #[test]
    fn positive_inputs_give_positive_outputs() {
        let op = build_superop(&SuperOperatorSpec::new(4, 3, 3, 8).unwrap()).unwrap();
        let v = DMatrix::from_fn(4, 1, |i, _| C64::new(1.0 + i as f64, -(i as f64)));
        let out = op.apply(&(&v * v.adjoint()));
        assert!(out.symmetric_eigenvalues().iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn frobenius_closed_form_in_unitary_case() {
        for d in [2usize, 3, 7] {
            assert!((frobenius_closed_form(d, d, 1).unwrap() - (d * d) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn rescalings() {
        let specs = [SuperOperatorSpec::new(4, 4, 4, 1).unwrap()];
        let rows = collapse_rows(&specs, &[vec![1.0, 0.5, 0.25, 0.0]], Rescale::SqrtD).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], CollapseRow { spec: 0, i: 1, x: 1.0 / 16.0, y: 1.0 });
        let aff = collapse_rows(&specs, &[vec![1.0, 0.5]], Rescale::Affine { shift: 0.25, alpha: 0.5 }).unwrap();
        assert!((aff[0].y - 0.5).abs() < 1e-15);
        let rect = [SuperOperatorSpec::new(8, 4, 4, 1).unwrap()];
        assert!(collapse_rows(&rect, &[vec![1.0, 0.5]], Rescale::SqrtD).is_err());
        assert!(collapse_rows(&[], &[], Rescale::Raw).is_err());
    }

    #[test]
    fn collapse_distance_of_identical_and_shifted_curves() {
        let a: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 1.0 - i as f64 / 10.0)).collect();
        assert_eq!(collapse_distance(&a, &a), 0.0);
        let b: Vec<(f64, f64)> = a.iter().map(|&(x, y)| (x, y + 0.1)).collect();
        assert!((collapse_distance(&a, &b) - 0.1 / 1.1).abs() < 1e-12);
    }
}
