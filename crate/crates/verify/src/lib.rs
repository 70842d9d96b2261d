//! Acceptance checks for the `molring` workspace live in `tests/acceptance.rs`
//! and run with `cargo test -p molring-verify --test acceptance`.
