//! Group frontend (in progress).
