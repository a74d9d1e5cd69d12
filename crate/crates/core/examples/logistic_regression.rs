//! L2 logistic regression: training trace and a gradient check.

use hopeclf::corpus::Label;
use hopeclf::features::{SparseMatrix, SparseVector};
use hopeclf::models::{logreg_gradient, logreg_objective, train_logreg, LogRegParams};

fn main() {
    let x = SparseMatrix::from_dense(&[
        vec![1.0, 2.0, 0.0],
        vec![0.5, 0.0, 1.0],
        vec![0.0, 1.0, 1.0],
        vec![2.0, 0.0, 0.5],
        vec![0.0, 0.0, 3.0],
    ]);
    let y = [Label::Hope, Label::NotHope, Label::NotHope, Label::Hope, Label::NotHope];

    let params = LogRegParams {
        c: 10.0,
        ..Default::default()
    };
    let (model, report) = train_logreg(&x, &y, &params).unwrap();
    println!(
        "converged {} after {} iterations, |grad|inf = {:.2e}",
        report.converged, report.iterations, report.gradient_norm
    );
    for (i, f) in report.objective_trace.iter().enumerate().take(8) {
        println!("  iter {i:>2}  J = {f:.8}");
    }
    println!("w = {:?}, b = {:.4}", model.weights, model.bias);

    let q = SparseVector::from_dense(&[1.0, 1.0, 0.0]);
    println!("P(Hope | [1, 1, 0]) = {:.4}", model.probability(&q).unwrap());

    // central differences against the analytic gradient at an arbitrary point
    let w = [0.3, -0.2, 0.1];
    let b = 0.05;
    let (g, gb) = logreg_gradient(&x, &y, &w, b, params.c);
    let h = 1e-5;
    for j in 0..3 {
        let mut up = w;
        let mut down = w;
        up[j] += h;
        down[j] -= h;
        let fd = (logreg_objective(&x, &y, &up, b, params.c) - logreg_objective(&x, &y, &down, b, params.c)) / (2.0 * h);
        println!("dJ/dw{j}: analytic {:+.8}  numeric {fd:+.8}", g[j]);
    }
    println!("dJ/db : analytic {gb:+.8}");
}
