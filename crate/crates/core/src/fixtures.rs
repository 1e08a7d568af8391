//! Small reference instances.

use crate::numerics::DenseMatrix;

/// A 4-vertex weighted graph whose ratio-cut optimum ({0, 3} / {1, 2}, value 1.3)
/// differs from the partition closest to its relaxed solution ({0, 1, 2} / {3}, value 2.0).
pub fn four_node_weights() -> DenseMatrix {
    DenseMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.5, 0.1, 0.8, //
            0.5, 0.0, 0.4, 0.2, //
            0.1, 0.4, 0.0, 0.5, //
            0.8, 0.2, 0.5, 0.0,
        ],
    )
}
