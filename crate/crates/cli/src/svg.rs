//! Ternary heatmap rendering for k=3 strategies: each lattice point becomes
//! a hexagonal cell whose darkness is linear in its weight.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 700.0;
const MARGIN: f64 = 60.0;

/// Triangle vertices for barycentric coordinates w1, w2, w3 (coordinate i
/// maps to vertex i): top, bottom left, bottom right.
const VERTICES: [(f64, f64); 3] = [
    (WIDTH / 2.0, MARGIN),
    (MARGIN + 3.4, HEIGHT - MARGIN + 21.0),
    (WIDTH - MARGIN - 3.4, HEIGHT - MARGIN + 21.0),
];

fn project(coords: &[f64], bound: f64) -> (f64, f64) {
    let mut x = 0.0;
    let mut y = 0.0;
    for (i, &c) in coords.iter().enumerate() {
        let w = (c + bound) / (3.0 * bound);
        x += w * VERTICES[i].0;
        y += w * VERTICES[i].1;
    }
    (x, y)
}

/// Renders zero-sum 3-coordinate points with weights. `bound` is the lower
/// bound B of the plot region (coordinates live in [-B, 2B]); `step` is the
/// lattice spacing used to size the hexagonal cells.
pub fn ternary_heatmap(entries: &[(Vec<f64>, f64)], bound: f64, step: f64) -> String {
    let origin = project(&[0.0, 0.0, 0.0], bound);
    let neighbor = project(&[step, -step, 0.0], bound);
    let dx = neighbor.0 - origin.0;
    let dy = neighbor.1 - origin.1;
    let spacing = (dx * dx + dy * dy).sqrt();
    let radius = spacing / 3.0f64.sqrt();
    let base_angle = dy.atan2(dx) + std::f64::consts::PI / 6.0;

    let max_weight = entries.iter().map(|e| e.1).fold(0.0f64, f64::max).max(1e-300);
    let mut body = String::new();
    body.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    for (coords, weight) in entries {
        let (cx, cy) = project(coords, bound);
        let mut points = String::new();
        for j in 0..6 {
            let angle = base_angle + j as f64 * std::f64::consts::PI / 3.0;
            let px = cx + radius * angle.cos();
            let py = cy + radius * angle.sin();
            points.push_str(&format!("{px:.2},{py:.2} "));
        }
        body.push_str(&format!(
            "<polygon points=\"{}\" fill=\"black\" fill-opacity=\"{:.4}\"/>\n",
            points.trim_end(),
            weight / max_weight
        ));
    }
    body.push_str(&format!(
        "<polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        VERTICES[0].0, VERTICES[0].1, VERTICES[1].0, VERTICES[1].1, VERTICES[2].0, VERTICES[2].1
    ));
    let labels = [
        (VERTICES[0].0, VERTICES[0].1 - 14.0, "x1"),
        (VERTICES[1].0 - 20.0, VERTICES[1].1 + 20.0, "x2"),
        (VERTICES[2].0 + 4.0, VERTICES[2].1 + 20.0, "x3"),
    ];
    for (x, y, text) in labels {
        body.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"18\">{text}</text>\n"
        ));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n{body}</svg>\n"
    )
}
