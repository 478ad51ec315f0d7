//! Shared fixtures for the criterion benches.

use subcount::data::{generate_synthetic, Shape, SyntheticSpec};
use subcount::{Category, CategoryView};

/// `n` users with small counts in a category of size `d`.
pub fn sparse_view(n: usize, d: usize) -> CategoryView {
    let pattern = [0, 0, 0, 1, 1, 2, 3, 5];
    let counts: Vec<usize> = (0..n).map(|u| pattern[(u * 7919) % pattern.len()].min(d)).collect();
    CategoryView::from_counts(d, &counts).expect("counts fit in d")
}

/// Zipf transactions over 2000 items, category `1..=100`.
pub fn zipf_view(n: usize) -> CategoryView {
    let data = generate_synthetic(&SyntheticSpec {
        n,
        domain_size: 2000,
        shape: Shape::Zipf(1.2),
        mean_set_size: 8.0,
        seed: 1,
    })
    .expect("valid spec");
    CategoryView::new(&data, &Category::range(1, 100).expect("valid range"))
}
