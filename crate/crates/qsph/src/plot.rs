//! Quick-look PNGs. Not part of the artifact contract.

use std::path::Path;

use image::{Rgb, RgbImage};
use qsph_core::sph::Vec2;

use crate::error::{CliError, CliResult};

const SIZE: u32 = 320;

/// Blue-white-red map of `v` in `[-1, 1]`.
fn diverging(v: f64) -> Rgb<u8> {
    let t = v.clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a.abs())).round() as u8;
    if t >= 0.0 {
        Rgb([255, fade(t), fade(t)])
    } else {
        Rgb([fade(t), fade(t), 255])
    }
}

/// Scatter of lattice values coloured symmetrically about zero. Each point
/// fills the square cell around it.
pub fn heatmap(path: &Path, positions: &[Vec2], values: &[f64]) -> CliResult<()> {
    let mut img = RgbImage::from_pixel(SIZE, SIZE, Rgb([255, 255, 255]));
    if positions.is_empty() {
        return save(&img, path);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in positions {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let n = (positions.len() as f64).sqrt().max(1.0);
    let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let cell = ((SIZE as f64 / n).ceil() as u32).max(1);
    for (p, v) in positions.iter().zip(values) {
        let px = ((p[0] - lo[0]) / span[0] * (SIZE - cell) as f64) as u32;
        let py = ((hi[1] - p[1]) / span[1] * (SIZE - cell) as f64) as u32;
        let c = diverging(v / scale);
        for dx in 0..cell {
            for dy in 0..cell {
                if px + dx < SIZE && py + dy < SIZE {
                    img.put_pixel(px + dx, py + dy, c);
                }
            }
        }
    }
    save(&img, path)
}

/// Line plot of several `(x, y)` series on shared axes; `log_y` plots
/// `log10 y` over the positive entries.
pub fn lines(path: &Path, series: &[(Vec<f64>, Vec<f64>)], log_y: bool) -> CliResult<()> {
    const COLORS: [Rgb<u8>; 6] = [
        Rgb([31, 119, 180]),
        Rgb([214, 39, 40]),
        Rgb([44, 160, 44]),
        Rgb([148, 103, 189]),
        Rgb([255, 127, 14]),
        Rgb([23, 190, 207]),
    ];
    let mut img = RgbImage::from_pixel(SIZE, SIZE, Rgb([255, 255, 255]));
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(xs, ys)| xs.iter().zip(ys).filter(|(_, &y)| !log_y || y > 0.0).map(|(&x, &y)| (x, tf(y))).filter(|(x, y)| x.is_finite() && y.is_finite()).collect())
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let m = 16.0;
    let w = SIZE as f64 - 2.0 * m;
    let to_px = |(x, y): (f64, f64)| (m + (x - x0) / (x1 - x0) * w, m + (y1 - y) / (y1 - y0) * w);
    for k in 0..SIZE {
        img.put_pixel(m as u32, k.min(SIZE - 1), Rgb([0, 0, 0]));
        img.put_pixel(k, (SIZE as f64 - m) as u32, Rgb([0, 0, 0]));
    }
    for (s, p) in pts.iter().enumerate() {
        let c = COLORS[s % COLORS.len()];
        for pair in p.windows(2) {
            let (a, b) = (to_px(pair[0]), to_px(pair[1]));
            let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
            for t in 0..=steps {
                let f = t as f64 / steps as f64;
                let (x, y) = (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
                if x >= 0.0 && y >= 0.0 && (x as u32) < SIZE && (y as u32) < SIZE {
                    img.put_pixel(x as u32, y as u32, c);
                }
            }
        }
    }
    save(&img, path)
}

fn save(img: &RgbImage, path: &Path) -> CliResult<()> {
    img.save(path).map_err(|e| CliError::io(path, e))
}
