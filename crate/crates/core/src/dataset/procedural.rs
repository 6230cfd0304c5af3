//! Procedural scenes: a smoothly textured background with randomly placed
//! textured discs and convex polygons, each carrying its own label.

use std::f64::consts::PI;

use rand::Rng;

use super::{LabelMap, SegmentedSample};
use crate::error::{invalid, Result};
use crate::imaging::Image;

#[derive(Clone, Copy, Debug)]
enum Pattern {
    Stripes { freq: f64, angle: f64 },
    Checker { cell: f64 },
    Rings { freq: f64 },
    Noise,
}

#[derive(Clone, Debug)]
struct Texture {
    pattern: Pattern,
    dark: [f64; 3],
    light: [f64; 3],
    phase: f64,
}

impl Texture {
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let pattern = match rng.random_range(0..4) {
            0 => Pattern::Stripes {
                freq: 2.0 * PI / rng.random_range(2.5..6.0),
                angle: rng.random_range(0.0..PI),
            },
            1 => Pattern::Checker {
                cell: rng.random_range(1.5..4.0),
            },
            2 => Pattern::Rings {
                freq: 2.0 * PI / rng.random_range(3.0..6.0),
            },
            _ => Pattern::Noise,
        };
        let mut color = || -> [f64; 3] { [rng.random(), rng.random(), rng.random()] };
        let a = color();
        let b = color();
        let dark = [a[0] * 0.45, a[1] * 0.45, a[2] * 0.45];
        let light = [0.55 + b[0] * 0.45, 0.55 + b[1] * 0.45, 0.55 + b[2] * 0.45];
        Self {
            pattern,
            dark,
            light,
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }

    fn mix<R: Rng + ?Sized>(&self, y: f64, x: f64, cy: f64, cx: f64, rng: &mut R) -> f64 {
        match self.pattern {
            Pattern::Stripes { freq, angle } => {
                0.5 + 0.5 * (freq * (x * angle.cos() + y * angle.sin()) + self.phase).sin()
            }
            Pattern::Checker { cell } => {
                let k = ((y / cell).floor() + (x / cell).floor()) as i64;
                if k.rem_euclid(2) == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            Pattern::Rings { freq } => 0.5 + 0.5 * (freq * ((y - cy).hypot(x - cx)) + self.phase).sin(),
            Pattern::Noise => rng.random(),
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Disc { cy: f64, cx: f64, r: f64 },
    Polygon { cy: f64, cx: f64, vertices: Vec<(f64, f64)> },
}

impl Shape {
    fn random<R: Rng + ?Sized>(h: usize, w: usize, rng: &mut R) -> Self {
        let side = h.min(w) as f64;
        let cy = rng.random_range(0.0..h as f64);
        let cx = rng.random_range(0.0..w as f64);
        let r = rng.random_range(0.15 * side..0.4 * side).max(1.0);
        if rng.random_bool(0.5) {
            Shape::Disc { cy, cx, r }
        } else {
            let n = rng.random_range(3..=6);
            let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            angles.sort_by(f64::total_cmp);
            let vertices = angles
                .into_iter()
                .map(|a| (cy + r * a.sin(), cx + r * a.cos()))
                .collect();
            Shape::Polygon { cy, cx, vertices }
        }
    }

    fn center(&self) -> (f64, f64) {
        match self {
            Shape::Disc { cy, cx, .. } | Shape::Polygon { cy, cx, .. } => (*cy, *cx),
        }
    }

    fn contains(&self, y: f64, x: f64) -> bool {
        match self {
            Shape::Disc { cy, cx, r } => (y - cy).powi(2) + (x - cx).powi(2) <= r * r,
            Shape::Polygon { vertices, .. } => {
                // Vertices are sorted by angle, so the polygon is star-shaped
                // around its center; use the even-odd rule.
                let mut inside = false;
                let n = vertices.len();
                for i in 0..n {
                    let (yi, xi) = vertices[i];
                    let (yj, xj) = vertices[(i + n - 1) % n];
                    if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                        inside = !inside;
                    }
                }
                inside
            }
        }
    }
}

fn attempt<R: Rng + ?Sized>(width: usize, height: usize, n_objects: usize, rng: &mut R) -> (Vec<f32>, Vec<u8>) {
    let waves: Vec<(f64, f64, f64, [f64; 3])> = (0..3)
        .map(|_| {
            let period = rng.random_range(5.0..14.0);
            let angle = rng.random_range(0.0..PI);
            let phase = rng.random_range(0.0..2.0 * PI);
            let amp = [rng.random_range(0.05..0.2), rng.random_range(0.05..0.2), rng.random_range(0.05..0.2)];
            (2.0 * PI / period, angle, phase, amp)
        })
        .collect();
    let base: [f64; 3] = [rng.random_range(0.3..0.7), rng.random_range(0.3..0.7), rng.random_range(0.3..0.7)];

    let mut pixels = vec![0.0f32; height * width * 3];
    let mut labels = vec![0u8; height * width];
    for y in 0..height {
        for x in 0..width {
            for c in 0..3 {
                let mut v = base[c];
                for (freq, angle, phase, amp) in &waves {
                    v += amp[c] * (freq * (x as f64 * angle.cos() + y as f64 * angle.sin()) + phase).sin();
                }
                pixels[(y * width + x) * 3 + c] = v.clamp(0.0, 1.0) as f32;
            }
        }
    }

    for label in 1..=n_objects {
        let shape = Shape::random(height, width, rng);
        let texture = Texture::random(rng);
        let (cy, cx) = shape.center();
        for y in 0..height {
            for x in 0..width {
                let (fy, fx) = (y as f64 + 0.5, x as f64 + 0.5);
                if !shape.contains(fy, fx) {
                    continue;
                }
                let t = texture.mix(fy, fx, cy, cx, rng);
                for c in 0..3 {
                    let v = texture.dark[c] + t * (texture.light[c] - texture.dark[c]);
                    pixels[(y * width + x) * 3 + c] = v.clamp(0.0, 1.0) as f32;
                }
                labels[y * width + x] = label as u8;
            }
        }
    }
    (pixels, labels)
}

/// Generates a `height × width` scene with `n_objects` labelled objects.
/// Draws are repeated until every label `0..=n_objects` covers at least one
/// pixel.
pub fn generate_procedural_sample<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    n_objects: usize,
    rng: &mut R,
) -> Result<SegmentedSample> {
    if n_objects == 0 || n_objects > 255 {
        return Err(invalid(format!("n_objects must be in 1..=255, got {n_objects}")));
    }
    if width == 0 || height == 0 || width * height < n_objects + 1 {
        return Err(invalid("image too small for the requested objects"));
    }
    for _ in 0..10_000 {
        let (pixels, labels) = attempt(width, height, n_objects, rng);
        let mut seen = vec![false; n_objects + 1];
        labels.iter().for_each(|&l| seen[l as usize] = true);
        if seen.iter().all(|&s| s) {
            return SegmentedSample::new(Image::new(height, width, 3, pixels)?, LabelMap::new(height, width, labels)?);
        }
    }
    Err(invalid("could not place every object visibly; try fewer objects or a larger image"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_object_has_two_labels() {
        let s = generate_procedural_sample(32, 32, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut labels: Vec<u8> = s.mask.labels().to_vec();
        labels.sort();
        labels.dedup();
        assert_eq!(labels, vec![0, 1]);
    }

    #[test]
    fn same_seed_same_sample() {
        let a = generate_procedural_sample(40, 30, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = generate_procedural_sample(40, 30, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_label_is_visible() {
        for seed in 0..20 {
            let s = generate_procedural_sample(32, 32, 5, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for l in 0..=5u8 {
                assert!(s.mask.labels().contains(&l), "seed {seed} label {l}");
            }
            assert_eq!(s.object_count(), 5);
        }
    }

    #[test]
    fn rejects_zero_objects() {
        assert!(generate_procedural_sample(8, 8, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
