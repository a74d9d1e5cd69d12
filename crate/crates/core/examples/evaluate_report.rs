//! Per-class, macro and weighted metrics, printed both ways.

use hopeclf::corpus::Label::{self, Hope, NotHope};
use hopeclf::metrics::{evaluate, format_report, parse_machine_report, ReportStyle};

fn main() {
    let gold = [Hope, Hope, Hope, Hope, NotHope, NotHope, NotHope, NotHope, NotHope, NotHope];
    let pred = [Hope, Hope, Hope, NotHope, Hope, Hope, NotHope, NotHope, NotHope, NotHope];
    let report = evaluate(&gold, &pred).unwrap();

    for label in Label::ALL {
        let m = report.class(label);
        println!(
            "{label:<8} P {:.4} R {:.4} F1 {:.4} support {}",
            m.precision, m.recall, m.f1, m.support
        );
    }
    println!("macro F1 {:.4}\n", report.macro_f1());
    print!("{}", format_report(&report, ReportStyle::Table));

    let machine = format_report(&report, ReportStyle::Machine);
    println!("\n{machine}");
    assert_eq!(parse_machine_report(&machine).unwrap(), report);

    // a constant predictor divides by zero; the report says so
    let constant = evaluate(&gold, &[Hope; 10]).unwrap();
    println!("constant predictor: zero_division = {}", constant.zero_division);
}
