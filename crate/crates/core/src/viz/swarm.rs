use std::cmp::Ordering;

/// Beeswarm-style vertical stacking of 1D values.
///
/// Dots of diameter `lane_height` are visited in ascending `x` (ties by id)
/// and each goes to the first lane, in the order `0, +1, −1, +2, −2, …`,
/// whose most recent dot is at least one diameter away. Returns `(x, y)` per
/// input position; `y` is the lane index times `lane_height`.
pub fn swarm_coordinates(ids: &[String], values: &[f64], lane_height: f64) -> Vec<(f64, f64)> {
    assert_eq!(ids.len(), values.len(), "ids and values must align");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then_with(|| ids[a].cmp(&ids[b]))
    });

    // last x placed in lane 0, +1, -1, +2, -2, ... (index = position in that order)
    let mut lane_last: Vec<f64> = Vec::new();
    let mut out = vec![(0.0, 0.0); values.len()];
    for &i in &order {
        let x = values[i];
        let slot = lane_last
            .iter()
            .position(|&last| x - last >= lane_height)
            .unwrap_or(lane_last.len());
        if slot == lane_last.len() {
            lane_last.push(x);
        } else {
            lane_last[slot] = x;
        }
        out[i] = (x, lane_of_slot(slot) as f64 * lane_height);
    }
    out
}

fn lane_of_slot(slot: usize) -> i64 {
    let k = slot.div_ceil(2) as i64;
    if slot % 2 == 1 {
        k
    } else {
        -k
    }
}
