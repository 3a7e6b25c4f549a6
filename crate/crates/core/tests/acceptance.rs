//! Release gate: runs every verification criterion sequentially and prints
//! one pass/fail line per criterion. Also reachable as `smdk verify`.

fn main() {
    let reports = smdk::acceptance::run_all();
    for report in &reports {
        println!("{}", report.line());
    }
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
