//! Runs the ten acceptance criteria and prints one line per criterion.

use std::io::Write;

use landau_cli::suite::Suite;

#[test]
fn all_criteria() {
    let mut suite = Suite::new(1);
    let mut failed = Vec::new();
    for id in 1..=10 {
        let o = suite.run(id);
        let _ = writeln!(std::io::stdout().lock(), "{}", o.line());
        if !o.pass {
            failed.push(format!("{}: {}", o.id, o.summary));
        }
    }
    assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
}
