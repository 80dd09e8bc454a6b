//! Takagi factorization `A = Q·diag(σ)·Qᵀ` of complex symmetric matrices.
//!
//! The factorization is read off an SVD `A = F·K·Gᴴ`: for a symmetric
//! `A` each left singular vector is paired with the conjugate of its right
//! singular vector up to a phase, so `Q = F·diag(e^{jφ})` with
//! `φ = ∠diag(FᴴG*)/2`. When singular values repeat the SVD pairing inside the
//! repeated subspace is arbitrary and the phase formula breaks down; that
//! subspace is then factored on its own (see [`takagi_factorize`]).

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::channel::complex_gaussian;
use crate::error::invalid;
use crate::{CMat, CVec, Error, Result, C64};

/// Tolerances shared by the Takagi routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max `|A_ij − A_ji|`, relative to `max(1, ‖A‖_F)`.
    pub symmetry: f64,
    /// Allowed deviation of `‖u‖` from one for direction vectors.
    pub unit_norm: f64,
    /// Reconstruction and unitarity target.
    pub reconstruction: f64,
    /// Below this `|(FᴴG*)_ii|` the SVD pairing is treated as inconsistent.
    pub degenerate: f64,
    /// Relative gap below which neighbouring singular values are grouped.
    pub cluster_gap: f64,
    /// Singular values below `null · σ_max` are treated as exact zeros.
    pub null: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    symmetry: 1e-12,
    unit_norm: 1e-10,
    reconstruction: 1e-10,
    degenerate: 1e-8,
    cluster_gap: 1e-6,
    null: 1e-12,
};

/// A square complex matrix with `A = Aᵀ` (no conjugation).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSymmetricMatrix(CMat);

impl ComplexSymmetricMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() {
            return Err(invalid!(
                "matrix is {}x{}, expected square",
                entries.nrows(),
                entries.ncols()
            ));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let asym = max_asymmetry(&entries);
        let bound = TOLERANCES.symmetry * entries.norm().max(1.0);
        if asym > bound {
            return Err(invalid!(
                "matrix is not symmetric: max |A_ij - A_ji| = {asym:e}"
            ));
        }
        Ok(Self(entries))
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// `Q` unitary and `sigma` non-negative, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct TakagiResult {
    pub q: CMat,
    pub sigma: Vec<f64>,
}

impl TakagiResult {
    /// `Q·diag(σ)·Qᵀ`.
    pub fn reconstruct(&self) -> CMat {
        let mut scaled = self.q.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        &scaled * self.q.transpose()
    }
}

pub(crate) fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

fn check_unit(u: &CVec, what: &str) -> Result<()> {
    let norm = u.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > TOLERANCES.unit_norm {
        return Err(invalid!("{what} must have unit norm, got {norm}"));
    }
    Ok(())
}

/// Rank-2 coupling matrix `½(u_R·u_Tᴴ + (u_R·u_Tᴴ)ᵀ)` of a group.
pub fn build_coupling_matrix(u_r: &CVec, u_t: &CVec) -> Result<ComplexSymmetricMatrix> {
    if u_r.len() != u_t.len() || u_r.is_empty() {
        return Err(invalid!(
            "direction vectors have lengths {} and {}",
            u_r.len(),
            u_t.len()
        ));
    }
    check_unit(u_r, "u_R")?;
    check_unit(u_t, "u_T")?;
    let n = u_r.len();
    let a = CMat::from_fn(n, n, |i, j| {
        (u_r[i] * u_t[j].conj() + u_r[j] * u_t[i].conj()) * 0.5
    });
    Ok(ComplexSymmetricMatrix(a))
}

/// Takagi factorization via SVD phase correction.
///
/// Singular values are grouped into clusters whose members lie within
/// `cluster_gap · σ_max` of each other. Isolated singular values take the
/// closed-form phase `φ_i = ∠(FᴴG*)_ii / 2`. For repeated values (or an
/// isolated value whose pairing coefficient is not unit-modulus) the block
/// `M = F_cᴴ·A·F_c*` is formed in the cluster's left singular subspace and
/// factored through the real symmetric embedding `[[Re M, Im M], [Im M, −Re M]]`,
/// whose positive eigenpairs `(σ, [x; y])` give Takagi vectors `x + jy`.
/// Exact-null singular values keep the SVD basis and report `σ = 0`.
pub fn takagi_factorize(a: &ComplexSymmetricMatrix) -> Result<TakagiResult> {
    let m = a.as_matrix();
    let n = m.nrows();
    if n == 0 {
        return Ok(TakagiResult {
            q: CMat::zeros(0, 0),
            sigma: Vec::new(),
        });
    }
    let (u, sv, v_t) = svd(m)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let s_max = sv[order[0]];

    let mut q = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);

    if s_max == 0.0 {
        return Ok(TakagiResult {
            q: CMat::identity(n, n),
            sigma: alloc::vec![0.0; n],
        });
    }

    let null_floor = TOLERANCES.null * s_max;
    let gap = TOLERANCES.cluster_gap * s_max;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        let is_null = sv[order[start]] <= null_floor;
        while end < n {
            let prev = sv[order[end - 1]];
            let next = sv[order[end]];
            let same = if is_null {
                next <= null_floor
            } else {
                next > null_floor && prev - next <= gap
            };
            if !same {
                break;
            }
            end += 1;
        }
        let cols = &order[start..end];

        if is_null {
            for &c in cols {
                q.set_column(sigma.len(), &u.column(c));
                sigma.push(0.0);
            }
        } else if let Some(phase) = single_phase(cols, &u, &v_t) {
            let c = cols[0];
            let col = u.column(c) * C64::from_polar(1.0, phase);
            q.set_column(sigma.len(), &col);
            sigma.push(sv[c]);
        } else {
            let f_c = CMat::from_fn(n, cols.len(), |i, k| u[(i, cols[k])]);
            let (w, s_c) = factor_subspace(&f_c, m);
            let q_c = &f_c * w;
            for (k, s) in s_c.into_iter().enumerate() {
                q.set_column(sigma.len(), &q_c.column(k));
                sigma.push(s);
            }
        }
        start = end;
    }

    // Fallback clusters may interleave with neighbours after factoring.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let q_sorted = CMat::from_fn(n, n, |i, k| q[(i, idx[k])]);
    let sigma_sorted = idx.iter().map(|&k| sigma[k]).collect();
    let out = TakagiResult {
        q: q_sorted,
        sigma: sigma_sorted,
    };
    let scale = m.norm().max(1.0);
    let rec = (out.reconstruct() - m).norm();
    let unit = (out.q.adjoint() * &out.q - CMat::identity(n, n)).norm();
    if !(rec <= TOLERANCES.reconstruction * scale) || !(unit <= TOLERANCES.reconstruction) {
        return Err(Error::Numerical(alloc::format!(
            "Takagi factor inaccurate (reconstruction {rec:e}, unitarity {unit:e})"
        )));
    }
    Ok(out)
}

/// SVD `A = F·diag(σ)·Gᴴ` from the Hermitian dilation `[[0, A], [Aᴴ, 0]]`,
/// whose eigenpairs are `(±σ, [f; ±g]/√2)`. Returns `(F, σ, Gᴴ)`.
///
/// Left vectors of null singular values are an orthonormal completion of
/// the others; their rows of `Gᴴ` are zero and must not be used.
fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let n = a.nrows();
    let zero = C64::new(0.0, 0.0);
    let dilation = CMat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) => a[(j, i - n)].conj(),
        _ => zero,
    });
    let eig = SymmetricEigen::try_new(dilation, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigen-decomposition did not converge".into()))?;
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite singular values".into()));
    }
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let s_max = eig.eigenvalues[order[0]].max(0.0);
    let floor = TOLERANCES.null * s_max;

    let mut f = CMat::zeros(n, n);
    let mut g_adj = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for &e in order.iter().take(n) {
        let value = eig.eigenvalues[e];
        if !(value > floor) {
            break;
        }
        let v = eig.eigenvectors.column(e);
        let k = sigma.len();
        let mut left = v.rows(0, n).into_owned();
        let right = v.rows(n, n).into_owned();
        for j in 0..k {
            let prev = f.column(j);
            let proj = prev.dotc(&left);
            left -= prev * proj;
        }
        let norm = left.norm();
        if !(norm > 0.0) {
            return Err(Error::Numerical("singular vectors collapsed".into()));
        }
        f.set_column(k, &(left / C64::new(norm, 0.0)));
        let rnorm = right.norm();
        g_adj.set_row(k, &(right / C64::new(rnorm, 0.0)).adjoint());
        sigma.push(value);
    }
    complete_basis(&mut f, sigma.len());
    sigma.resize(n, 0.0);
    Ok((f, sigma, g_adj))
}

/// Fills columns `k..` of `f` with an orthonormal complement of columns `..k`.
fn complete_basis(f: &mut CMat, k: usize) {
    let n = f.nrows();
    for col in k..n {
        let mut best: Option<(f64, CVec)> = None;
        for e in 0..n {
            let mut v = CVec::zeros(n);
            v[e] = C64::new(1.0, 0.0);
            for j in 0..col {
                let prev = f.column(j);
                let proj = prev.dotc(&v);
                v -= prev * proj;
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        if let Some((norm, v)) = best {
            f.set_column(col, &(v / C64::new(norm, 0.0)));
        }
    }
}

fn single_phase(cols: &[usize], u: &CMat, v_t: &CMat) -> Option<f64> {
    match cols {
        [c] => pairing_phase(u, v_t, *c),
        _ => None,
    }
}

/// `∠(FᴴG*)_ii / 2`, or `None` when the coefficient is not unit-modulus.
fn pairing_phase(u: &CMat, v_t: &CMat, i: usize) -> Option<f64> {
    // G* column i is row i of V^T without conjugation.
    let coeff: C64 = (0..u.nrows()).map(|r| u[(r, i)].conj() * v_t[(i, r)]).sum();
    let mag = coeff.norm();
    if mag < TOLERANCES.degenerate || (mag - 1.0).abs() > TOLERANCES.cluster_gap {
        return None;
    }
    Some(coeff.arg() / 2.0)
}

/// Takagi-factors `A` restricted to the column span of `f_c`.
///
/// Returns `W` (k×k unitary) and the non-negative values so that
/// `F_c·W·diag(σ)·(F_c·W)ᵀ` reproduces that part of `A`.
fn factor_subspace(f_c: &CMat, a: &CMat) -> (CMat, Vec<f64>) {
    let k = f_c.ncols();
    let mut block = f_c.adjoint() * a * f_c.map(|z| z.conj());
    let bt = block.transpose();
    block = (block + bt) * C64::new(0.5, 0.0);

    let embed = DMatrix::<f64>::from_fn(2 * k, 2 * k, |i, j| {
        let (bi, ii) = (i / k, i % k);
        let (bj, jj) = (j / k, j % k);
        let z = block[(ii, jj)];
        match (bi, bj) {
            (0, 0) => z.re,
            (1, 1) => -z.re,
            _ => z.im,
        }
    });
    let eig = SymmetricEigen::new(embed);
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut w = CMat::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    for (col, &e) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(e);
        for r in 0..k {
            w[(r, col)] = C64::new(v[r], v[r + k]);
        }
        s.push(eig.eigenvalues[e].max(0.0));
    }
    (w, s)
}

/// Unitary symmetric `Θ★ = Q·Qᵀ` with `u_Rᴴ·Θ★·u_T = 1`.
pub fn optimal_group_block(u_r: &CVec, u_t: &CVec) -> Result<CMat> {
    let a = build_coupling_matrix(u_r, u_t)?;
    let t = takagi_factorize(&a)?;
    let theta = &t.q * t.q.transpose();
    let tt = theta.transpose();
    Ok((theta + tt) * C64::new(0.5, 0.0))
}

/// Random unitary symmetric matrix `U·Uᵀ` with `U` Haar distributed.
pub fn random_unitary_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let u = random_unitary(n, rng);
    let theta = &u * u.transpose();
    let tt = theta.transpose();
    (theta + tt) * C64::new(0.5, 0.0)
}

/// Haar unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm > 0.0 {
            let ph = d / norm;
            let col = q.column(j) * ph;
            q.set_column(j, &col);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit(n: usize, rng: &mut ChaCha8Rng) -> CVec {
        let v = CVec::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        v / C64::from(norm)
    }

    fn assert_takagi(a: &CMat, t: &TakagiResult) {
        let n = a.nrows();
        let unitarity = (t.q.adjoint() * &t.q - CMat::identity(n, n)).norm();
        assert!(unitarity <= 1e-10, "unitarity error {unitarity:e}");
        let recon = (a - t.reconstruct()).norm();
        assert!(
            recon <= 1e-10 * a.norm().max(1.0),
            "reconstruction error {recon:e}"
        );
        assert!(t.sigma.iter().all(|&s| s >= 0.0));
        assert!(t.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn coupling_matrix_examples() {
        let one = CVec::from_element(1, c(1.0, 0.0));
        let a = build_coupling_matrix(&one, &one).unwrap();
        assert_eq!(a.as_matrix()[(0, 0)], c(1.0, 0.0));

        let j = CVec::from_element(1, c(0.0, 1.0));
        let a = build_coupling_matrix(&j, &one).unwrap();
        assert_eq!(a.as_matrix()[(0, 0)], c(0.0, 1.0));

        let e1 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let a = build_coupling_matrix(&e1, &e2).unwrap();
        let expected =
            CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert_eq!(a.as_matrix(), &expected);
    }

    #[test]
    fn coupling_matrix_rejects_unnormalized_input() {
        let v = CVec::from_element(2, c(1.0, 0.0));
        let e1 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            build_coupling_matrix(&v, &e1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_coupling_matrix(&e1, &v),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rejects_non_symmetric_and_non_finite() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            ComplexSymmetricMatrix::new(m),
            Err(Error::InvalidArgument(_))
        ));
        let m = CMat::from_element(2, 2, c(f64::NAN, 0.0));
        assert!(matches!(
            ComplexSymmetricMatrix::new(m),
            Err(Error::Numerical(_))
        ));
        let m = CMat::zeros(2, 3);
        assert!(matches!(
            ComplexSymmetricMatrix::new(m),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn identity_and_scalar() {
        let a = CMat::identity(2, 2);
        let t = takagi_factorize(&ComplexSymmetricMatrix::new(a.clone()).unwrap()).unwrap();
        assert_takagi(&a, &t);
        assert!((t.sigma[0] - 1.0).abs() < 1e-14 && (t.sigma[1] - 1.0).abs() < 1e-14);

        let a = CMat::from_element(1, 1, c(0.0, 1.0));
        let t = takagi_factorize(&ComplexSymmetricMatrix::new(a.clone()).unwrap()).unwrap();
        assert_takagi(&a, &t);
        let q2 = t.q[(0, 0)] * t.q[(0, 0)];
        assert!((q2 - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn exchange_matrix_has_unit_values() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let t = takagi_factorize(&ComplexSymmetricMatrix::new(a.clone()).unwrap()).unwrap();
        assert_takagi(&a, &t);
        assert!((t.sigma[0] - 1.0).abs() < 1e-12 && (t.sigma[1] - 1.0).abs() < 1e-12);

        // One valid Q from the hand derivation.
        let s = FRAC_1_SQRT_2;
        let q = CMat::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(s, 0.0), c(0.0, -s)]);
        assert!((&q * q.transpose() - &a).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let a = CMat::zeros(3, 3);
        let t = takagi_factorize(&ComplexSymmetricMatrix::new(a.clone()).unwrap()).unwrap();
        assert_takagi(&a, &t);
        assert_eq!(t.sigma, vec![0.0; 3]);
    }

    #[test]
    fn coupling_matrix_is_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 4, 8, 16] {
            let a = build_coupling_matrix(&unit(n, &mut rng), &unit(n, &mut rng)).unwrap();
            let t = takagi_factorize(&a).unwrap();
            assert_takagi(a.as_matrix(), &t);
            assert!(t.sigma.iter().filter(|&&s| s > 1e-10).count() <= 2);
        }
    }

    #[test]
    fn orthogonal_directions_give_repeated_values() {
        // u_R ⟂ u_T* makes both nonzero singular values equal to ½.
        let e1 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e2 = CVec::from_vec(vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let a = build_coupling_matrix(&e1, &e2).unwrap();
        let t = takagi_factorize(&a).unwrap();
        assert_takagi(a.as_matrix(), &t);
        assert!((t.sigma[0] - 0.5).abs() < 1e-14 && (t.sigma[1] - 0.5).abs() < 1e-14);
        let theta = optimal_group_block(&e1, &e2).unwrap();
        let gain = (e1.adjoint() * &theta * &e2)[(0, 0)];
        assert!((gain - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_block_is_phase_alignment() {
        for (tr, tt) in [(0.3, -1.2), (3.0, 2.9), (-2.5, 2.5), (PI, 0.0)] {
            let u_r = CVec::from_element(1, C64::from_polar(1.0, tr));
            let u_t = CVec::from_element(1, C64::from_polar(1.0, tt));
            let theta = optimal_group_block(&u_r, &u_t).unwrap();
            let expected = C64::from_polar(1.0, tr - tt);
            assert!((theta[(0, 0)] - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn aligned_directions() {
        let e1 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let theta = optimal_group_block(&e1, &e1).unwrap();
        let gain = (e1.adjoint() * &theta * &e1)[(0, 0)];
        assert!((gain - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_block_attains_unit_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (u_r, u_t) = (unit(4, &mut rng), unit(4, &mut rng));
            let theta = optimal_group_block(&u_r, &u_t).unwrap();
            let gain = (u_r.adjoint() * &theta * &u_t)[(0, 0)];
            assert!(
                (gain.re - 1.0).abs() <= 1e-9 && gain.im.abs() <= 1e-10,
                "{gain}"
            );
            assert!((theta.adjoint() * &theta - CMat::identity(4, 4)).norm() < 1e-10);
            assert!(max_asymmetry(&theta) < 1e-12);
        }
    }

    #[test]
    fn random_unitary_symmetric_is_deterministic_and_valid() {
        let a = random_unitary_symmetric(3, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_unitary_symmetric(3, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert!((a.adjoint() * &a - CMat::identity(3, 3)).norm() < 1e-10);
        assert!(max_asymmetry(&a) < 1e-12);

        let s = random_unitary_symmetric(1, &mut ChaCha8Rng::seed_from_u64(9));
        assert!((s[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_blocks_respect_cauchy_schwarz() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (u_r, u_t) = (unit(4, &mut rng), unit(4, &mut rng));
        let worst = (0..1000)
            .map(|_| {
                let theta = random_unitary_symmetric(4, &mut rng);
                (u_r.adjoint() * theta * &u_t)[(0, 0)].norm()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1.0 + 1e-9);
    }
}
