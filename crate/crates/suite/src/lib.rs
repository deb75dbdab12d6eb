//! Holds the `acceptance` test target. Run it on its own with
//! `cargo test -p qstoch-suite --test acceptance -- --nocapture`.
