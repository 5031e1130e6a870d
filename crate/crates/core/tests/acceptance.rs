use std::io::Write;

use bergman_core::acceptance::{run, CRITERIA};

#[test]
fn acceptance() {
    // written straight to stdout so the verdict lines survive output capture
    let mut out = std::io::stdout();
    writeln!(out).unwrap();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        let r = run(id);
        writeln!(out, "{r}").unwrap();
        out.flush().unwrap();
        if !r.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
