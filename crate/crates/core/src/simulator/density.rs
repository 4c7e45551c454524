use nalgebra::DMatrix;
use serde::Serialize;

use super::state::DenseState;
use crate::network::{w_partner, Interval, Stage};
use crate::{Error, Result, C64};

/// Eigenvalues below this are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Largest dimension for which a full density matrix is formed.
pub const DENSE_DIM_LIMIT: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dims: Vec<usize>,
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Ascending eigenvalues with values below [`EIGEN_CLAMP`] set to 0.
    pub fn eigenvalues(&self) -> Vec<f64> {
        clamped_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn entropy_vn(rho: &DensityMatrix) -> f64 {
    vn_from_spectrum(&rho.eigenvalues())
}

pub fn entropy_renyi2(rho: &DensityMatrix) -> f64 {
    -rho.purity().ln()
}

pub fn vn_from_spectrum(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn clamped_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .symmetric_eigenvalues()
        .iter()
        .map(|&x| if x < EIGEN_CLAMP { 0.0 } else { x })
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Reorders the amplitudes so that `sites` (in the given order) become the
/// most significant indices, followed by the remaining sites in ring order.
/// Returns the row-major `d_sites x d_rest` matrix and its shape.
pub(crate) fn split(state: &DenseState, sites: &[usize]) -> (Vec<C64>, usize, usize) {
    let n = state.n_sites();
    let mut chosen = vec![false; n];
    for &s in sites {
        chosen[s] = true;
    }
    let perm: Vec<usize> = sites.iter().copied().chain((0..n).filter(|&s| !chosen[s])).collect();
    let dims = &state.site_dims;
    let mut strides = vec![1usize; n];
    for s in (0..n.saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let new_dims: Vec<usize> = perm.iter().map(|&s| dims[s]).collect();
    let new_strides: Vec<usize> = perm.iter().map(|&s| strides[s]).collect();
    let d_sites: usize = new_dims[..sites.len()].iter().product();
    let d_rest = state.amplitudes.len() / d_sites;

    // Trailing sites that keep their original position form contiguous
    // blocks that can be copied whole.
    let mut outer = n;
    while outer > 0 && perm[outer - 1] == outer - 1 && outer - 1 >= sites.len() {
        outer -= 1;
    }
    let block: usize = dims[outer..].iter().product();

    // Odometer over the remaining new index order, tracking the old offset.
    let mut out = Vec::with_capacity(state.amplitudes.len());
    let mut counter = vec![0usize; outer];
    let mut offset = 0usize;
    for _ in 0..state.amplitudes.len() / block {
        out.extend_from_slice(&state.amplitudes[offset..offset + block]);
        for t in (0..outer).rev() {
            counter[t] += 1;
            offset += new_strides[t];
            if counter[t] < new_dims[t] {
                break;
            }
            offset -= new_strides[t] * new_dims[t];
            counter[t] = 0;
        }
    }
    (out, d_sites, d_rest)
}

/// `M M^dagger` for a row-major `rows x cols` matrix.
pub(crate) fn gram(m: &[C64], rows: usize, cols: usize) -> DMatrix<C64> {
    let mut g = DMatrix::<C64>::zeros(rows, rows);
    for a in 0..rows {
        let ra = &m[a * cols..(a + 1) * cols];
        for b in 0..=a {
            let rb = &m[b * cols..(b + 1) * cols];
            let mut acc = C64::new(0.0, 0.0);
            for (x, y) in ra.iter().zip(rb) {
                acc += x * y.conj();
            }
            g[(a, b)] = acc;
            g[(b, a)] = acc.conj();
        }
    }
    g
}

fn transpose(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut t = vec![C64::new(0.0, 0.0); m.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = m[r * cols + c];
        }
    }
    t
}

fn check_ring(state: &DenseState, iv: &Interval) -> Result<()> {
    if iv.level != state.level || iv.stage != state.stage {
        return Err(Error::Usage(format!(
            "interval {iv} does not live on the state's ring (level {}, {})",
            state.level, state.stage
        )));
    }
    if iv.ring() != state.n_sites() as u64 || iv.len > iv.ring() || iv.start >= iv.ring() {
        return Err(Error::Usage(format!("interval {iv} is malformed")));
    }
    Ok(())
}

fn interval_sites(iv: &Interval) -> Vec<usize> {
    iv.sites().map(|s| s as usize).collect()
}

/// Partial trace onto `iv`. The empty interval gives the 1x1 matrix `[1]`.
pub fn reduced_density(state: &DenseState, iv: &Interval) -> Result<DensityMatrix> {
    check_ring(state, iv)?;
    set_density(state, &interval_sites(iv))
}

/// Partial trace onto an arbitrary ordered set of sites.
pub fn set_density(state: &DenseState, sites: &[usize]) -> Result<DensityMatrix> {
    let dims: Vec<usize> = sites.iter().map(|&s| state.site_dims[s]).collect();
    let d: usize = dims.iter().product();
    if d > DENSE_DIM_LIMIT {
        return Err(Error::Feasibility(format!(
            "reduced density of dimension {d} exceeds the dense limit {DENSE_DIM_LIMIT}"
        )));
    }
    let (m, rows, cols) = split(state, sites);
    Ok(DensityMatrix {
        dims,
        matrix: gram(&m, rows, cols),
    })
}

/// Nonzero spectrum of the reduced state on `sites`, computed on whichever
/// side of the cut is smaller.
pub fn set_spectrum(state: &DenseState, sites: &[usize]) -> (Vec<f64>, f64) {
    let (m, rows, cols) = split(state, sites);
    let g = if rows <= cols {
        gram(&m, rows, cols)
    } else {
        gram(&transpose(&m, rows, cols), cols, rows)
    };
    let purity = g.iter().map(|z| z.norm_sqr()).sum();
    (clamped_eigenvalues(&g), purity)
}

/// Von Neumann and Renyi-2 entropies in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entropies {
    pub s: f64,
    pub s2: f64,
}

pub fn set_entropies(state: &DenseState, sites: &[usize]) -> Entropies {
    if sites.is_empty() || sites.len() == state.n_sites() {
        return Entropies { s: 0.0, s2: 0.0 };
    }
    let (p, purity) = set_spectrum(state, sites);
    Entropies {
        s: vn_from_spectrum(&p),
        s2: -purity.ln(),
    }
}

pub fn interval_entropies(state: &DenseState, iv: &Interval) -> Result<Entropies> {
    check_ring(state, iv)?;
    Ok(set_entropies(state, &interval_sites(iv)))
}

pub fn mutual_information(state: &DenseState, left: &Interval, right: &Interval) -> Result<f64> {
    check_ring(state, left)?;
    check_ring(state, right)?;
    if left.is_empty() || right.is_empty() {
        return Ok(0.0);
    }
    if !left.disjoint(right) {
        return Err(Error::Usage(format!("intervals {left} and {right} overlap")));
    }
    let (a, b) = (interval_sites(left), interval_sites(right));
    let union: Vec<usize> = a.iter().chain(&b).copied().collect();
    Ok(set_entropies(state, &a).s + set_entropies(state, &b).s - set_entropies(state, &union).s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationProxies {
    /// `|rho_XY - rho_X (x) rho_Y|_1`.
    pub trace_norm_bound: f64,
    /// `sqrt(d_X) * min(schmidt_max * sqrt(d_a_eff), sqrt(tr rho_BE^2))`.
    pub l2_bound: f64,
    /// Largest eigenvalue of `rho_BE`, where `BE` is `X` together with the
    /// disentangler partners of its sites.
    pub schmidt_max: f64,
    /// Numerical rank of `rho_BE`.
    pub d_a_eff: usize,
}

impl CorrelationProxies {
    const ZERO: CorrelationProxies = CorrelationProxies {
        trace_norm_bound: 0.0,
        l2_bound: 0.0,
        schmidt_max: 0.0,
        d_a_eff: 0,
    };
}

/// Partner of `site` under the isometry that produced the state's stage.
fn stage_partner(state: &DenseState, site: u64) -> u64 {
    match state.stage {
        Stage::AfterW => w_partner(state.level, site),
        Stage::AfterV => site ^ 1,
    }
}

pub fn correlation_proxies(state: &DenseState, x: &Interval, y: &Interval) -> Result<CorrelationProxies> {
    check_ring(state, x)?;
    check_ring(state, y)?;
    if x.is_empty() || y.is_empty() {
        return Ok(CorrelationProxies::ZERO);
    }
    if !x.disjoint(y) || x.followed_by(y) || y.followed_by(x) {
        return Err(Error::Usage(format!("{x} and {y} must be disjoint and separated by a site")));
    }
    let xs = interval_sites(x);
    let ys = interval_sites(y);
    let xy: Vec<usize> = xs.iter().chain(&ys).copied().collect();
    let rho = set_density(state, &xy)?;
    let dx: usize = xs.iter().map(|&s| state.site_dims[s]).product();
    let dy = rho.dim() / dx;
    let (rx, ry) = partial_traces(&rho.matrix, dx, dy);
    let mut diff = rho.matrix.clone();
    for a in 0..dx {
        for b in 0..dy {
            for c in 0..dx {
                for d in 0..dy {
                    diff[(a * dy + b, c * dy + d)] -= rx[(a, c)] * ry[(b, d)];
                }
            }
        }
    }
    let trace_norm_bound = diff.symmetric_eigenvalues().iter().map(|v| v.abs()).sum();

    let mut be = xs.clone();
    for &s in &xs {
        let p = stage_partner(state, s as u64) as usize;
        if !be.contains(&p) {
            be.push(p);
        }
    }
    let (p, purity) = set_spectrum(state, &be);
    let schmidt_max = p.last().copied().unwrap_or(0.0);
    let d_a_eff = p.iter().filter(|&&v| v > 1e-10).count();
    let l2_bound = (dx as f64).sqrt() * (schmidt_max * (d_a_eff as f64).sqrt()).min(purity.sqrt());
    Ok(CorrelationProxies {
        trace_norm_bound,
        l2_bound,
        schmidt_max,
        d_a_eff,
    })
}

/// `(tr_Y rho, tr_X rho)` for `rho` on `X (x) Y`.
pub fn partial_traces(rho: &DMatrix<C64>, dx: usize, dy: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut rx = DMatrix::<C64>::zeros(dx, dx);
    let mut ry = DMatrix::<C64>::zeros(dy, dy);
    for a in 0..dx {
        for c in 0..dx {
            for b in 0..dy {
                rx[(a, c)] += rho[(a * dy + b, c * dy + b)];
            }
        }
    }
    for b in 0..dy {
        for d in 0..dy {
            for a in 0..dx {
                ry[(b, d)] += rho[(a * dy + b, a * dy + d)];
            }
        }
    }
    (rx, ry)
}
