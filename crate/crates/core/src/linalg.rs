use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
///
/// Column `k` of `vectors` is the normalized eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn eigh(matrix: &DMatrix<f64>) -> Eigh {
    let decomposition = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..decomposition.eigenvalues.len()).collect();
    order.sort_by(|a, b| {
        decomposition.eigenvalues[*a]
            .total_cmp(&decomposition.eigenvalues[*b])
            .then(a.cmp(b))
    });
    let values = order.iter().map(|k| decomposition.eigenvalues[*k]).collect();
    let vectors = decomposition.eigenvectors.select_columns(order.iter());
    Eigh { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(matrix.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrix_backward_error() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let residual = &m * &e.vectors - &e.vectors * DMatrix::from_diagonal(&e.values.clone().into());
        assert!(residual.amax() < 1e-13);
        let sqrt2 = 2f64.sqrt();
        for (got, want) in e.values.iter().zip([2.0 - sqrt2, 2.0, 2.0 + sqrt2]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(eigvalsh(&m).len(), 3);
    }
}
