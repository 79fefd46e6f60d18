//! Hosts the `acceptance` test target; run with `cargo test -p quench-validation`.
