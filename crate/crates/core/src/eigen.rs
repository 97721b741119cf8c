//! Top-2 eigenpairs of S = AᵀA by block power iteration.
//!
//! S is never formed: each step applies two sparse products per vector and
//! re-orthonormalizes the pair with Gram-Schmidt. The principal eigenvector
//! ranks items (authorities), its image under A ranks transactions (hubs),
//! and the gap between the two eigenvalues drives the online deferral bound.
//! A dense Jacobi solver, sharing no code with the iteration, serves as the
//! test oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::SparseMatrix;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("empty model: the matrix has no entries")]
    EmptyModel,
    #[error("oracle limited to dimension {max}, got {got}")]
    OracleTooLarge { max: usize, got: usize },
    #[error("oracle input is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Successive-iterate change threshold on the ranked vectors.
    pub tol: f64,
    /// Iteration cap; `None` uses 10000.
    pub max_iter: Option<usize>,
    /// Seed for the default random orthogonal start.
    pub seed: u64,
    /// Gap below `gap_floor_rel * lambda1` flags the estimate degenerate.
    pub gap_floor_rel: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: None,
            seed: 42,
            gap_floor_rel: 1e-9,
        }
    }
}

const FALLBACK_MAX_ITER: usize = 10_000;

/// Iteration budget for a known eigenvalue ratio: ten times the geometric
/// estimate ceil(ln(1/tol) / ln(lambda1/lambda2)), capped at 10000. Callers
/// warm-starting from a previous estimate use this; with no ratio known the
/// solver falls back to the cap.
pub fn suggested_max_iter(tol: f64, lambda1: f64, lambda2: f64) -> usize {
    if !(tol > 0.0) || lambda1 <= 0.0 || lambda2 < 0.0 || lambda2 >= lambda1 {
        return FALLBACK_MAX_ITER;
    }
    if lambda2 == 0.0 {
        return 10;
    }
    let per_digit = (1.0 / tol).ln() / (lambda1 / lambda2).ln();
    let suggested = 10.0 * per_digit.ceil();
    if suggested.is_finite() && suggested >= 1.0 {
        (suggested as usize).min(FALLBACK_MAX_ITER)
    } else {
        FALLBACK_MAX_ITER
    }
}

/// Converged (or cut off) top-2 eigen information for S = AᵀA.
#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Principal eigenvector of AᵀA, unit length n.
    pub authority: Vec<f64>,
    /// Second orthonormal eigenvector estimate, length n (zero when n = 1).
    pub second: Vec<f64>,
    /// A·authority normalized, unit length m.
    pub hub: Vec<f64>,
    pub iterations: usize,
    /// Exact ‖S·authority − lambda1·authority‖₂ at return.
    pub residual: f64,
    /// Exact ‖S·second − lambda2·second‖₂ at return.
    pub second_residual: f64,
    pub converged: bool,
    pub degenerate: bool,
}

impl EigenEstimate {
    pub fn eigengap(&self) -> f64 {
        (self.lambda1 - self.lambda2).max(0.0)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// ‖a − b‖₂ after flipping b to the same orientation as a.
fn aligned_change(a: &[f64], b: &[f64]) -> f64 {
    let s = if dot(a, b) < 0.0 { -1.0 } else { 1.0 };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - s * y) * (x - s * y))
        .sum::<f64>()
        .sqrt()
}

/// Flip a vector so its largest-magnitude entry is positive (first such
/// entry on ties). Deterministic orientation for snapshots and tests.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Remove the y1 component from v and normalize; false when v collapses.
fn orthonormalize_against(v: &mut [f64], y1: &[f64]) -> bool {
    let p = dot(v, y1);
    for (x, &y) in v.iter_mut().zip(y1) {
        *x -= p * y;
    }
    normalize(v) > 1e-12
}

/// Deterministic unit vector orthogonal to y1 (first basis vector with a
/// usable complement). Used when the iterate collapses onto span{y1}.
fn complement_of(y1: &[f64]) -> Vec<f64> {
    let n = y1.len();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let p = dot(&e, y1);
        for (x, &y) in e.iter_mut().zip(y1) {
            *x -= p * y;
        }
        if normalize(&mut e) > 0.5 {
            return e;
        }
    }
    unreachable!("no orthogonal complement in dimension >= 2");
}

struct TailGate {
    prev_change: f64,
    change: f64,
    estimate: f64,
}

impl TailGate {
    fn new() -> Self {
        TailGate {
            prev_change: f64::INFINITY,
            change: f64::INFINITY,
            estimate: f64::INFINITY,
        }
    }

    /// Record this iteration's successive change and refresh the geometric
    /// tail estimate change·r/(1−r), r = change ratio. The estimate stays
    /// infinite until the ratio settles below 1, so the gate never fires
    /// earlier than the plain change ≤ tol rule.
    fn record(&mut self, change: f64) {
        self.estimate = if change == 0.0 {
            0.0
        } else if self.change.is_finite() && self.change > 0.0 {
            let r = change / self.change;
            if r < 1.0 {
                change * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        self.prev_change = self.change;
        self.change = change;
    }

    fn passed(&self, tol: f64) -> bool {
        self.change <= tol && (self.estimate <= tol || self.change <= 1e-15)
    }
}

/// Top-2 eigenpairs of AᵀA by block power iteration with per-step
/// Gram-Schmidt. `init` supplies warm-start vectors (shorter vectors are
/// zero-padded when the catalog has grown); otherwise a seeded random
/// orthogonal pair starts the iteration. Non-convergence within the budget
/// returns the current estimate flagged, never an error.
pub fn block_power_top2(
    a: &SparseMatrix,
    init: Option<(&[f64], &[f64])>,
    opts: &SolveOptions,
) -> Result<EigenEstimate, EigenError> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 || a.nnz() == 0 {
        return Err(EigenError::EmptyModel);
    }
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let max_iter = opts.max_iter.unwrap_or(FALLBACK_MAX_ITER).max(1);

    let pad = |v: &[f64]| -> Vec<f64> {
        let mut out = v.to_vec();
        out.resize(n, 0.0);
        out
    };
    let (mut x1, mut x2) = match init {
        Some((v1, v2)) => (pad(v1), pad(v2)),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            // strictly positive start keeps the Perron component large
            let v1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let v2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (v1, v2)
        }
    };
    if normalize(&mut x1) <= 1e-12 {
        // warm start degenerated to zero, fall back to a flat start
        x1 = vec![1.0 / (n as f64).sqrt(); n];
    }
    let track_second = n >= 2;
    if track_second && !orthonormalize_against(&mut x2, &x1) {
        x2 = complement_of(&x1);
    }

    let s_apply = |v: &[f64]| a.mul_transpose_vec(&a.mul_vec(v));

    let mut gate1 = TailGate::new();
    let mut gate2 = TailGate::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut y1 = s_apply(&x1);
        if normalize(&mut y1) <= 0.0 {
            // x1 fell into the null space; restart it flat and keep going
            y1 = vec![1.0 / (n as f64).sqrt(); n];
        }
        gate1.record(aligned_change(&y1, &x1));
        x1 = y1;

        if track_second {
            let mut y2 = s_apply(&x2);
            let survived = orthonormalize_against(&mut y2, &x1);
            if !survived {
                // S·x2 collapsed onto span{x1}: x2 sits in the null space of
                // S (rank-1 case), so the re-orthogonalized old iterate is
                // already an eigenvector for lambda2 = 0.
                y2 = x2.clone();
                if !orthonormalize_against(&mut y2, &x1) {
                    y2 = complement_of(&x1);
                }
            }
            gate2.record(aligned_change(&y2, &x2));
            x2 = y2;
        }

        if gate1.passed(opts.tol) && (!track_second || gate2.passed(opts.tol)) {
            converged = true;
            break;
        }
    }

    fix_sign(&mut x1);
    let ax1 = a.mul_vec(&x1);
    let mut lambda1 = dot(&ax1, &ax1);
    let mut hub = ax1;
    normalize(&mut hub);
    fix_sign(&mut hub);

    let (mut lambda2, mut second) = if track_second {
        let ax2 = a.mul_vec(&x2);
        fix_sign(&mut x2);
        (dot(&ax2, &ax2), x2)
    } else {
        (0.0, vec![0.0; n])
    };

    if lambda2 > lambda1 * (1.0 + 1e-9) {
        // only reachable when cut off far from convergence; the margin keeps
        // ulp-level ties on degenerate spectra from displacing the
        // nonnegative principal iterate
        std::mem::swap(&mut lambda1, &mut lambda2);
        std::mem::swap(&mut x1, &mut second);
        let ax1 = a.mul_vec(&x1);
        hub = ax1;
        normalize(&mut hub);
        fix_sign(&mut hub);
    }
    // rounding on degenerate spectra can leave lambda2 an ulp above lambda1
    lambda2 = lambda2.min(lambda1);
    let authority = x1;

    let resid = |v: &[f64], lambda: f64| -> f64 {
        if norm2(v) == 0.0 {
            return 0.0;
        }
        let sv = s_apply(v);
        sv.iter()
            .zip(v)
            .map(|(s, x)| (s - lambda * x) * (s - lambda * x))
            .sum::<f64>()
            .sqrt()
    };
    let residual = resid(&authority, lambda1);
    let second_residual = resid(&second, lambda2);
    let degenerate = (lambda1 - lambda2) < opts.gap_floor_rel * lambda1;

    Ok(EigenEstimate {
        lambda1,
        lambda2,
        authority,
        second,
        hub,
        iterations,
        residual,
        second_residual,
        converged,
        degenerate,
    })
}

/// Dense AᵀA for handing to the oracle in tests.
pub fn dense_gram(a: &SparseMatrix) -> Vec<Vec<f64>> {
    let n = a.ncols();
    let mut s = vec![vec![0.0; n]; n];
    for r in 0..a.nrows() {
        let row = a.row_entries(r as u32);
        for &(i, wi) in row {
            for &(j, wj) in row {
                s[i as usize][j as usize] += wi * wj;
            }
        }
    }
    s
}

const ORACLE_MAX_DIM: usize = 64;

/// Full spectrum of a small dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues sorted descending with matching
/// eigenvectors (`vectors[k]` pairs with `values[k]`). Independent of the
/// power-method code path; this is the test oracle.
pub fn dense_eig_oracle(m: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = m.len();
    if n > ORACLE_MAX_DIM {
        return Err(EigenError::OracleTooLarge {
            max: ORACLE_MAX_DIM,
            got: n,
        });
    }
    let mut scale = 0.0f64;
    for row in m {
        assert_eq!(row.len(), n, "matrix must be square");
        for &x in row {
            scale = scale.max(x.abs());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[i][j] - m[j][i]).abs() > 1e-9 * scale.max(1.0) {
                return Err(EigenError::NotSymmetric { row: i, col: j });
            }
        }
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    // force exact symmetry so rotations stay clean
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    let frob = {
        let mut s = 0.0;
        for row in &a {
            for &x in row {
                s += x * x;
            }
        }
        s.sqrt()
    };
    let target = 1e-13 * frob.max(1.0);

    for _sweep in 0..64 {
        if off(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= target / (n as f64 * n as f64).max(1.0) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| {
            let mut vec_col: Vec<f64> = (0..n).map(|row| v[row][col]).collect();
            fix_sign(&mut vec_col);
            vec_col
        })
        .collect();
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_bipartite;
    use crate::txstore::parse_baskets;

    const SQRT3: f64 = 1.732050807568877;

    fn worked_matrix() -> SparseMatrix {
        build_bipartite(&parse_baskets("1 2\n2 3\n2\n").unwrap())
    }

    // aligned distance ≈ angle for small angles, and unlike acos(dot) it
    // does not lose resolution near zero
    fn angle(a: &[f64], b: &[f64]) -> f64 {
        aligned_change(a, b)
    }

    #[test]
    fn worked_fixture_matches_closed_form() {
        let est = block_power_top2(&worked_matrix(), None, &SolveOptions::default()).unwrap();
        assert!(est.converged);
        assert!(!est.degenerate);
        assert!((est.lambda1 - (2.0 + SQRT3)).abs() < 1e-9, "lambda1 = {}", est.lambda1);
        assert!((est.lambda2 - 1.0).abs() < 1e-9, "lambda2 = {}", est.lambda2);
        assert!((est.eigengap() - (1.0 + SQRT3)).abs() < 1e-9);
        let auth_true = {
            let mut v = vec![1.0, 1.0 + SQRT3, 1.0];
            normalize(&mut v);
            v
        };
        let hub_true = {
            let mut v = vec![2.0 + SQRT3, 2.0 + SQRT3, 1.0 + SQRT3];
            normalize(&mut v);
            v
        };
        assert!(angle(&est.authority, &auth_true) < 1e-8);
        assert!(angle(&est.hub, &hub_true) < 1e-8);
        for (got, want) in est.authority.iter().zip([0.3251, 0.8881, 0.3251]) {
            assert!((got - want).abs() < 1e-4);
        }
        for (got, want) in est.hub.iter().zip([0.6280, 0.6280, 0.4597]) {
            assert!((got - want).abs() < 1e-4);
        }
    }

    #[test]
    fn identity_is_degenerate() {
        let store = parse_baskets("a\nb\n").unwrap();
        let a = build_bipartite(&store);
        let est = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        assert!((est.lambda1 - 1.0).abs() < 1e-10);
        assert!((est.lambda2 - 1.0).abs() < 1e-10);
        assert!(est.degenerate);
        assert!(est.eigengap() < 1e-9);
    }

    #[test]
    fn rank_one_row_has_zero_second_eigenvalue() {
        let a = build_bipartite(&parse_baskets("a b\n").unwrap());
        let est = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        assert!((est.lambda1 - 2.0).abs() < 1e-10);
        assert!(est.lambda2.abs() < 1e-10);
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((est.authority[0] - inv).abs() < 1e-8);
        assert!((est.authority[1] - inv).abs() < 1e-8);
        assert_eq!(est.hub.len(), 1);
        assert!((est.hub[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_column_matrix() {
        let a = build_bipartite(&parse_baskets("a\na\n").unwrap());
        let est = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        assert!((est.lambda1 - 2.0).abs() < 1e-12);
        assert_eq!(est.lambda2, 0.0);
        assert_eq!(est.second, vec![0.0]);
        assert!((est.hub[0] - est.hub[1]).abs() < 1e-12);
    }

    #[test]
    fn diagonal_gap() {
        let mut a = SparseMatrix::zero(2, 2);
        a.set(0, 0, 3.0f64.sqrt());
        a.set(1, 1, 1.0);
        let est = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        assert!((est.lambda1 - 3.0).abs() < 1e-10);
        assert!((est.lambda2 - 1.0).abs() < 1e-10);
        assert!((est.eigengap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_is_an_empty_model() {
        let a = SparseMatrix::zero(3, 3);
        let err = block_power_top2(&a, None, &SolveOptions::default()).unwrap_err();
        assert!(err.to_string().contains("empty model"));
    }

    #[test]
    fn unit_norms_and_residual_contract() {
        let est = block_power_top2(&worked_matrix(), None, &SolveOptions::default()).unwrap();
        assert!((norm2(&est.authority) - 1.0).abs() < 1e-12);
        assert!((norm2(&est.hub) - 1.0).abs() < 1e-12);
        assert!((norm2(&est.second) - 1.0).abs() < 1e-12);
        assert!(est.authority.iter().all(|&x| x >= -1e-12));
        assert!(est.hub.iter().all(|&x| x >= -1e-12));
        // residual is the exact defect, so the invariant holds with equality
        let a = worked_matrix();
        let sx = a.mul_transpose_vec(&a.mul_vec(&est.authority));
        let defect: f64 = sx
            .iter()
            .zip(&est.authority)
            .map(|(s, x)| (s - est.lambda1 * x) * (s - est.lambda1 * x))
            .sum::<f64>()
            .sqrt();
        assert!(defect <= est.residual + 1e-15);
    }

    #[test]
    fn warm_start_converges_within_two_iterations() {
        let a = worked_matrix();
        let opts = SolveOptions::default();
        let est = block_power_top2(&a, None, &opts).unwrap();
        let warm =
            block_power_top2(&a, Some((&est.authority, &est.second)), &opts).unwrap();
        assert!(warm.converged);
        assert!(warm.iterations <= 2, "took {} iterations", warm.iterations);
        assert!((warm.lambda1 - est.lambda1).abs() < 1e-10);
    }

    #[test]
    fn warm_start_pads_when_catalog_grows() {
        let a = worked_matrix();
        let est = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        let mut store = parse_baskets("1 2\n2 3\n2\n").unwrap();
        store
            .apply_event(&crate::txstore::UpdateEvent::add(1, "4", &["4", "5"]))
            .unwrap();
        let grown = build_bipartite(&store);
        let warm = block_power_top2(
            &grown,
            Some((&est.authority, &est.second)),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(warm.converged);
        assert_eq!(warm.authority.len(), 5);
    }

    #[test]
    fn values_scale_quadratically_vectors_stay_put() {
        let a = worked_matrix();
        let mut scaled = SparseMatrix::zero(a.nrows(), a.ncols());
        for r in 0..a.nrows() {
            for &(c, w) in a.row_entries(r as u32) {
                scaled.set(r as u32, c, 3.0 * w);
            }
        }
        let base = block_power_top2(&a, None, &SolveOptions::default()).unwrap();
        let big = block_power_top2(&scaled, None, &SolveOptions::default()).unwrap();
        assert!((big.lambda1 - 9.0 * base.lambda1).abs() < 1e-8 * big.lambda1);
        assert!((big.lambda2 - 9.0 * base.lambda2).abs() < 1e-8 * big.lambda1);
        assert!(angle(&big.authority, &base.authority) < 1e-8);
        assert!(angle(&big.hub, &base.hub) < 1e-8);
    }

    #[test]
    fn oracle_on_worked_gram_matrix() {
        let s = dense_gram(&worked_matrix());
        assert_eq!(
            s,
            vec![
                vec![1.0, 1.0, 0.0],
                vec![1.0, 3.0, 1.0],
                vec![0.0, 1.0, 1.0],
            ]
        );
        let (values, vectors) = dense_eig_oracle(&s).unwrap();
        let expected = [2.0 + SQRT3, 1.0, 2.0 - SQRT3];
        for (got, want) in values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
        // vectors are orthonormal and actually eigenvectors
        for k in 0..3 {
            assert!((norm2(&vectors[k]) - 1.0).abs() < 1e-12);
            for i in 0..3 {
                let sv: f64 = (0..3).map(|j| s[i][j] * vectors[k][j]).sum();
                assert!((sv - values[k] * vectors[k][i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn oracle_degenerate_spectra() {
        let eye = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let (values, _) = dense_eig_oracle(&eye).unwrap();
        assert_eq!(values, vec![1.0, 1.0, 1.0]);
        let two = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let (values, vectors) = dense_eig_oracle(&two).unwrap();
        assert_eq!(values, vec![2.0, 2.0]);
        assert!(dot(&vectors[0], &vectors[1]).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_bad_input() {
        let big = vec![vec![0.0; 65]; 65];
        assert!(matches!(
            dense_eig_oracle(&big),
            Err(EigenError::OracleTooLarge { .. })
        ));
        let skew = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
        assert!(matches!(
            dense_eig_oracle(&skew),
            Err(EigenError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn suggested_iterations_track_the_gap() {
        assert_eq!(suggested_max_iter(1e-10, 4.0, 0.0), 10);
        let easy = suggested_max_iter(1e-10, 4.0, 1.0);
        let hard = suggested_max_iter(1e-10, 4.0, 3.9);
        assert!(easy < hard);
        assert_eq!(suggested_max_iter(1e-10, 1.0, 1.0), 10_000);
        assert!(suggested_max_iter(1e-10, 4.0, 3.999999) <= 10_000);
    }
}
