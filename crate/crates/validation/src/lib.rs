//! Holds the `acceptance` test target. See `tests/acceptance.rs`.
