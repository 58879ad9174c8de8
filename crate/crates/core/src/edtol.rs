//! EDT0L engine (in progress).
