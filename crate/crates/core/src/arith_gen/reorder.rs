/// Permutation that sorts dimensions by ascending `key` (ties keep their
/// original order). Feeding a serial accumulator in this order puts the
/// dimensions with the largest contributions nearest the output.
pub fn reorder_dimensions(key: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]));
    order
}
