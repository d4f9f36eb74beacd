//! Solution construction by monotone iteration (in progress).
