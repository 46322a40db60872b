//! Holds the `acceptance` test target; run it with `cargo test -p gapfuse-system-tests --test acceptance`.
