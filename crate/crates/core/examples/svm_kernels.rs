//! SMO-trained SVMs with linear and RBF kernels.

use hopeclf::corpus::Label;
use hopeclf::features::{SparseMatrix, SparseVector};
use hopeclf::models::{scale_gamma, train_svm, KernelConfig, SvmParams};

fn main() {
    // two symmetric points: w = (1, 0), b = 0, both multipliers 0.5
    let x = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
    let y = [Label::Hope, Label::NotHope];
    let linear = SvmParams {
        kernel: KernelConfig::linear(),
        ..SvmParams::default()
    };
    let (svm, report) = train_svm(&x, &y, &linear).unwrap();
    let primal = svm.to_linear().unwrap();
    println!("linear: alpha {:?}, w {:?}, b {:.3}", report.alpha, primal.weights, primal.bias);

    // XOR needs a non-linear kernel
    let xor = SparseMatrix::from_dense(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    let yx = [Label::Hope, Label::Hope, Label::NotHope, Label::NotHope];
    println!("scale gamma for XOR: {:.4}", scale_gamma(&xor));
    let rbf = SvmParams {
        c: 10.0,
        kernel: KernelConfig::rbf(Some(1.0)),
        ..SvmParams::default()
    };
    let (model, report) = train_svm(&xor, &yx, &rbf).unwrap();
    println!(
        "rbf: {} iterations, {} support vectors, max KKT violation {:.1e}, duality gap {:.1e}",
        report.iterations,
        report.support_indices.len(),
        report.max_violation,
        report.duality_gap
    );
    for (row, label) in xor.rows().iter().zip(&yx) {
        let f = model.decision_function(row).unwrap();
        println!("  {:?} gold {label:<8} f = {f:+.4}", row.to_dense(2));
    }
    let q = SparseVector::from_dense(&[0.9, 0.9]);
    println!("  [0.9, 0.9] -> {}", model.predict(&q).unwrap());
}
