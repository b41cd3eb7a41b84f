//! Deformed-grid visualization: black grid lines on white, every `stride`-th
//! vertex row and column (plus the last of each), drawn through the mapped
//! vertex positions.

use qcwarp_core::{DeformationMap, Point, RasterImage};

pub fn viz_grid(map: &DeformationMap, stride: usize) -> RasterImage {
    let mesh = map.mesh();
    let (w, h) = (mesh.width_v(), mesh.height_v());
    let stride = stride.max(1);
    let mut canvas = RasterImage::from_fn(w, h, 1, |_, _, _| 1.0).expect("valid canvas shape");

    let mut rows: Vec<usize> = (0..h).step_by(stride).collect();
    if *rows.last().unwrap() != h - 1 {
        rows.push(h - 1);
    }
    let mut cols: Vec<usize> = (0..w).step_by(stride).collect();
    if *cols.last().unwrap() != w - 1 {
        cols.push(w - 1);
    }

    for &r in &rows {
        for c in 0..w - 1 {
            let a = map.position(mesh.vertex_index(r, c));
            let b = map.position(mesh.vertex_index(r, c + 1));
            draw_segment(&mut canvas, a, b);
        }
    }
    for &c in &cols {
        for r in 0..h - 1 {
            let a = map.position(mesh.vertex_index(r, c));
            let b = map.position(mesh.vertex_index(r + 1, c));
            draw_segment(&mut canvas, a, b);
        }
    }
    canvas
}

fn draw_segment(canvas: &mut RasterImage, a: Point, b: Point) {
    let length = (b - a).norm();
    let steps = (2.0 * length).ceil().max(1.0) as usize;
    for t in 0..=steps {
        let s = t as f64 / steps as f64;
        let p = a + (b - a) * s;
        let x = p.x.round_ties_even() as i64;
        let y = p.y.round_ties_even() as i64;
        if x >= 0 && y >= 0 && (x as usize) < canvas.width() && (y as usize) < canvas.height() {
            canvas.set(x as usize, y as usize, 0, 0.0);
        }
    }
}
