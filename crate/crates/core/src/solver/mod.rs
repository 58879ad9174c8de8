//! Solver (in progress).
