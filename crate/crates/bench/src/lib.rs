//! Benchmark inputs shared by the criterion targets.

use villadsen_core::{LineBundle, VectorBundle};

/// `copies` lines on each interval `[1, w]`, `w = 1..=width`.
pub fn nested_family(width: usize, copies: usize) -> Vec<Vec<usize>> {
    (1..=width)
        .flat_map(|w| std::iter::repeat_n((1..=w).collect::<Vec<_>>(), copies))
        .collect()
}

/// Sum of `ξ_S` over the nested family, on `width` spheres.
pub fn nested_bundle(width: usize, copies: usize) -> VectorBundle {
    let lines = nested_family(width, copies)
        .into_iter()
        .map(|s| LineBundle::xi(width, s).expect("indices lie in range"))
        .collect();
    VectorBundle::from_lines(width, lines).expect("lines share the ambient space")
}
