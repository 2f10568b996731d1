#![allow(dead_code)]

use grc_krylov::problems::{gen_pde1, gen_toeplitz, rhs_all_ones, Pde1Spec, ToeplitzSpec};
use grc_krylov::{SparseMatrixCsr, TripletList};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Problem {
    pub name: String,
    pub a: SparseMatrixCsr,
    pub b: Vec<f64>,
}

/// Nonsymmetric, indefinite: diagonal entries of random sign plus
/// `per_row` random off-diagonal couplings.
pub fn random_indefinite(seed: u64, n: usize, per_row: usize) -> SparseMatrixCsr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TripletList::new(n);
    for i in 0..n {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        t.push(i, i, sign * rng.gen_range(1.0..3.0));
        for _ in 0..per_row {
            let k = rng.gen_range(0..n);
            if k != i {
                t.push(i, k, rng.gen_range(-1.0..1.0));
            }
        }
    }
    SparseMatrixCsr::from_triplets(&t).unwrap()
}

/// Dense, strictly row diagonally dominant, nonsymmetric.
pub fn random_diag_dominant(seed: u64, n: usize) -> (SparseMatrixCsr, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0f64; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let off: f64 = row.iter().map(|v| v.abs()).sum::<f64>() - row[i].abs();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        row[i] = sign * (off + rng.gen_range(0.5..2.0));
    }
    let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (SparseMatrixCsr::from_dense(&rows).unwrap(), b)
}

pub fn to_dense(a: &SparseMatrixCsr) -> DMatrix<f64> {
    DMatrix::from_fn(a.n(), a.n(), |i, k| a.get(i, k))
}

/// Dense LU direct solve.
pub fn dense_solve(a: &SparseMatrixCsr, b: &[f64]) -> Vec<f64> {
    to_dense(a)
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular")
        .as_slice()
        .to_vec()
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &SparseMatrixCsr) -> f64 {
    let sv = to_dense(a).singular_values();
    sv.max() / sv.min()
}

pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn inf_rel_error(x: &[f64], reference: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(reference).map(|(a, b)| a - b).collect();
    inf_norm(&diff) / inf_norm(reference)
}

pub fn residual(a: &SparseMatrixCsr, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x).unwrap();
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

pub fn banded_toeplitz(gamma: f64) -> SparseMatrixCsr {
    gen_toeplitz(&ToeplitzSpec {
        n: 100,
        stencil: vec![(0, 2.0), (1, 1.0), (-3, gamma)],
    })
    .unwrap()
}

/// Every problem the suites iterate over.
pub fn catalogue() -> Vec<Problem> {
    let mut out = Vec::new();
    for (nx, c) in [(5usize, 1000.0), (4, 0.0), (6, 100.0), (3, 1000.0)] {
        let (a, b) = gen_pde1(&Pde1Spec { nx, c }).unwrap();
        out.push(Problem {
            name: format!("pde1_nx{nx}_c{c}"),
            b: b.clone(),
            a: a.clone(),
        });
        out.push(Problem {
            name: format!("pde1_nx{nx}_c{c}_ones"),
            b: rhs_all_ones(&a),
            a,
        });
    }
    for gamma in [1.4, 2.0, 2.3] {
        let a = banded_toeplitz(gamma);
        out.push(Problem {
            name: format!("toeplitz100_gamma{gamma}"),
            b: rhs_all_ones(&a),
            a,
        });
    }
    for seed in 0..50 {
        let a = random_indefinite(seed, 100, 8);
        out.push(Problem {
            name: format!("random_indefinite_{seed}"),
            b: rhs_all_ones(&a),
            a,
        });
    }
    for seed in 0..20 {
        let (a, b) = random_diag_dominant(1000 + seed, 20);
        out.push(Problem {
            name: format!("diag_dominant_{seed}"),
            a,
            b,
        });
    }
    out
}
