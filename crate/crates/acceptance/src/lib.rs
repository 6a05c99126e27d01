//! Acceptance criteria for `optomech-entangle`; see `tests/acceptance.rs`.
