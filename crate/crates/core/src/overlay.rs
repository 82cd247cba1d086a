use crate::imageio::RgbImage;
use crate::instance::BinaryMask;
use crate::pipeline::Lane;

/// Gray level of lane-marking pixels in the overlay background.
const MASK_GRAY: u8 = 110;

pub const LANE_COLORS: [[u8; 3]; 6] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
];

fn stamp(img: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    for dy in -1..=1 {
        for dx in -1..=1 {
            img.put(x + dx, y + dy, color);
        }
    }
}

/// Bresenham segment with a 3×3 brush.
fn draw_segment(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        stamp(img, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Mask in gray with each lane's image polyline drawn 3 px wide in a fixed color.
pub fn render_overlay(mask: &BinaryMask, lanes: &[Lane]) -> RgbImage {
    let mut img = RgbImage::new(mask.width(), mask.height());
    for (px, &b) in img.data.iter_mut().zip(mask.bits()) {
        if b {
            *px = [MASK_GRAY; 3];
        }
    }
    for lane in lanes {
        let color = LANE_COLORS[lane.curve.cluster_id % LANE_COLORS.len()];
        let pts: Vec<(i64, i64)> = lane
            .polyline
            .points()
            .iter()
            // clamp keeps far-off samples from producing huge Bresenham walks
            .map(|p| (p.x.floor().clamp(-1e5, 1e5) as i64, p.y.floor().clamp(-1e5, 1e5) as i64))
            .collect();
        for w in pts.windows(2) {
            draw_segment(&mut img, w[0], w[1], color);
        }
    }
    img
}
