//! Fixation heatmaps: a Gaussian-KDE raster over the screen rectangle,
//! embedded as a PNG inside an SVG with vector AOI outlines on top.

use std::fmt::Write as _;

use gazekit_core::events::FixationEvent;
use gazekit_core::geometry::{Rect, ScreenGeometry};

/// Duration-weighted Gaussian density of fixation centroids, rasterized at
/// screen resolution and normalized to a peak of 1. Kernels are truncated at
/// three sigma.
pub fn kde_raster(
    fixations: &[&FixationEvent],
    geometry: &ScreenGeometry,
    sigma_px: f64,
) -> Vec<f32> {
    let (w, h) = (
        geometry.resolution_px.0 as usize,
        geometry.resolution_px.1 as usize,
    );
    let mut grid = vec![0.0f64; w * h];
    let radius = (3.0 * sigma_px).ceil() as i64;
    let inv_two_sigma2 = 1.0 / (2.0 * sigma_px * sigma_px);
    for f in fixations {
        let cx = f.centroid_px.x;
        let cy = f.centroid_px.y;
        let weight = f.duration_ms as f64;
        let x0 = ((cx as i64) - radius).max(0);
        let x1 = ((cx as i64) + radius).min(w as i64 - 1);
        let y0 = ((cy as i64) - radius).max(0);
        let y1 = ((cy as i64) + radius).min(h as i64 - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let d2 = dx * dx + dy * dy;
                if d2 > (radius * radius) as f64 {
                    continue;
                }
                grid[y as usize * w + x as usize] += weight * (-d2 * inv_two_sigma2).exp();
            }
        }
    }
    let max = grid.iter().cloned().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    grid.into_iter().map(|v| (v * scale) as f32).collect()
}

/// Map a normalized density to a blue-through-red heat color with alpha.
fn colorize(v: f32) -> [u8; 3] {
    // Anchors: deep blue, cyan, yellow, red.
    const STOPS: [(f32, [f32; 3]); 4] = [
        (0.0, [15.0, 20.0, 80.0]),
        (0.33, [30.0, 180.0, 200.0]),
        (0.66, [235.0, 220.0, 60.0]),
        (1.0, [210.0, 30.0, 25.0]),
    ];
    let v = v.clamp(0.0, 1.0);
    for pair in STOPS.windows(2) {
        let (a, ca) = pair[0];
        let (b, cb) = pair[1];
        if v <= b {
            let t = if b > a { (v - a) / (b - a) } else { 0.0 };
            return [
                (ca[0] + t * (cb[0] - ca[0])) as u8,
                (ca[1] + t * (cb[1] - ca[1])) as u8,
                (ca[2] + t * (cb[2] - ca[2])) as u8,
            ];
        }
    }
    [210, 30, 25]
}

// --- Minimal PNG encoder (RGB8, stored deflate blocks) ---------------------

fn crc32(data: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (n, slot) in table.iter_mut().enumerate() {
        let mut c = n as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 { 0xedb8_8320 ^ (c >> 1) } else { c >> 1 };
        }
        *slot = c;
    }
    let mut crc = 0xffff_ffffu32;
    for &b in data {
        crc = table[((crc ^ b as u32) & 0xff) as usize] ^ (crc >> 8);
    }
    crc ^ 0xffff_ffff
}

fn adler32(data: &[u8]) -> u32 {
    let mut a: u32 = 1;
    let mut b: u32 = 0;
    for &byte in data {
        a = (a + byte as u32) % 65521;
        b = (b + a) % 65521;
    }
    (b << 16) | a
}

fn png_chunk(out: &mut Vec<u8>, kind: &[u8; 4], payload: &[u8]) {
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(kind);
    out.extend_from_slice(payload);
    let mut crc_input = Vec::with_capacity(4 + payload.len());
    crc_input.extend_from_slice(kind);
    crc_input.extend_from_slice(payload);
    out.extend_from_slice(&crc32(&crc_input).to_be_bytes());
}

/// Encode an RGB8 image as an uncompressed PNG (zlib stored blocks). Slower
/// to store than a compressed PNG but dependency-free and byte-deterministic.
pub fn encode_png_rgb(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), (width * height * 3) as usize);
    // Filter byte 0 at the start of every scanline.
    let mut raw = Vec::with_capacity(pixels.len() + height as usize);
    for row in 0..height as usize {
        raw.push(0u8);
        let start = row * width as usize * 3;
        raw.extend_from_slice(&pixels[start..start + width as usize * 3]);
    }
    // zlib wrapper with stored (uncompressed) deflate blocks.
    let mut z = vec![0x78u8, 0x01];
    for (i, chunk) in raw.chunks(65535).enumerate() {
        let last = (i + 1) * 65535 >= raw.len();
        z.push(if last { 1 } else { 0 });
        let len = chunk.len() as u16;
        z.extend_from_slice(&len.to_le_bytes());
        z.extend_from_slice(&(!len).to_le_bytes());
        z.extend_from_slice(chunk);
    }
    z.extend_from_slice(&adler32(&raw).to_be_bytes());

    let mut png = Vec::new();
    png.extend_from_slice(&[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]);
    let mut ihdr = Vec::new();
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]); // 8-bit RGB
    png_chunk(&mut png, b"IHDR", &ihdr);
    png_chunk(&mut png, b"IDAT", &z);
    png_chunk(&mut png, b"IEND", &[]);
    png
}

pub fn base64(data: &[u8]) -> String {
    const ALPHABET: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    let mut out = String::with_capacity(data.len().div_ceil(3) * 4);
    for chunk in data.chunks(3) {
        let b = [
            chunk[0],
            chunk.get(1).copied().unwrap_or(0),
            chunk.get(2).copied().unwrap_or(0),
        ];
        let n = ((b[0] as u32) << 16) | ((b[1] as u32) << 8) | b[2] as u32;
        out.push(ALPHABET[(n >> 18) as usize & 63] as char);
        out.push(ALPHABET[(n >> 12) as usize & 63] as char);
        out.push(if chunk.len() > 1 { ALPHABET[(n >> 6) as usize & 63] as char } else { '=' });
        out.push(if chunk.len() > 2 { ALPHABET[n as usize & 63] as char } else { '=' });
    }
    out
}

/// Render the heatmap SVG: the KDE raster as an embedded PNG with the face
/// slots (and the word rect, when present) outlined on top.
pub fn heatmap_svg(
    fixations: &[&FixationEvent],
    geometry: &ScreenGeometry,
    sigma_px: f64,
    face_rects: &[Rect],
    word_rect: Option<Rect>,
    title: &str,
) -> String {
    let (w, h) = (geometry.resolution_px.0, geometry.resolution_px.1);
    let grid = kde_raster(fixations, geometry, sigma_px);
    let mut pixels = Vec::with_capacity(grid.len() * 3);
    for v in &grid {
        let [r, g, b] = colorize(*v);
        pixels.extend_from_slice(&[r, g, b]);
    }
    let png = encode_png_rgb(w, h, &pixels);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, "<title>{title}</title>");
    let _ = writeln!(
        svg,
        r#"<image x="0" y="0" width="{w}" height="{h}" href="data:image/png;base64,{}"/>"#,
        base64(&png)
    );
    for r in face_rects {
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="white" stroke-width="2"/>"#,
            r.x, r.y, r.w, r.h
        );
    }
    if let Some(r) = word_rect {
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="white" stroke-width="2" stroke-dasharray="6 4"/>"#,
            r.x, r.y, r.w, r.h
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use gazekit_core::aoi::AoiAssignment;
    use gazekit_core::geometry::Point;

    fn fixation(x: f64, y: f64, dur: u64) -> FixationEvent {
        FixationEvent {
            start_ms: 0,
            end_ms: dur,
            duration_ms: dur,
            centroid_px: Point::new(x, y),
            fixation_index_in_trial: 1,
            avg_pupil_au: 900.0,
            step_index: 1,
            assignment: AoiAssignment::none(),
        }
    }

    #[test]
    fn kde_peaks_at_the_fixation() {
        let g = ScreenGeometry::default();
        let f = fixation(512.0, 384.0, 300);
        let grid = kde_raster(&[&f], &g, 25.0);
        let w = g.resolution_px.0 as usize;
        let peak = grid[384 * w + 512];
        assert!((peak - 1.0).abs() < 1e-6);
        // 3-sigma truncation: zero far away.
        assert_eq!(grid[10 * w + 10], 0.0);
        // Symmetric falloff.
        assert!((grid[384 * w + 532] - grid[384 * w + 492]).abs() < 1e-6);
    }

    #[test]
    fn kde_weighs_by_duration() {
        let g = ScreenGeometry::default();
        let short = fixation(200.0, 200.0, 100);
        let long = fixation(800.0, 500.0, 400);
        let grid = kde_raster(&[&short, &long], &g, 25.0);
        let w = g.resolution_px.0 as usize;
        let at_short = grid[200 * w + 200];
        let at_long = grid[500 * w + 800];
        assert!((at_long - 1.0).abs() < 1e-6);
        assert!((at_short - 0.25).abs() < 0.01, "{at_short}");
    }

    #[test]
    fn png_structure_is_wellformed() {
        let png = encode_png_rgb(3, 2, &[255u8; 18]);
        assert_eq!(&png[0..8], &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]);
        assert_eq!(&png[12..16], b"IHDR");
        assert!(png.windows(4).any(|w| w == b"IDAT"));
        assert_eq!(&png[png.len() - 8..png.len() - 4], b"IEND");
    }

    #[test]
    fn base64_known_vectors() {
        assert_eq!(base64(b""), "");
        assert_eq!(base64(b"f"), "Zg==");
        assert_eq!(base64(b"fo"), "Zm8=");
        assert_eq!(base64(b"foo"), "Zm9v");
        assert_eq!(base64(b"foobar"), "Zm9vYmFy");
    }

    #[test]
    fn svg_is_deterministic_and_carries_overlays() {
        let g = ScreenGeometry::default();
        let f = fixation(300.0, 300.0, 250);
        let rects = [Rect::new(80.0, 80.0, 200.0, 200.0)];
        let a = heatmap_svg(&[&f], &g, 25.0, &rects, Some(Rect::new(362.0, 354.0, 300.0, 60.0)), "t");
        let b = heatmap_svg(&[&f], &g, 25.0, &rects, Some(Rect::new(362.0, 354.0, 300.0, 60.0)), "t");
        assert_eq!(a, b);
        assert!(a.contains("<image"));
        assert_eq!(a.matches("<rect").count(), 2);
    }
}
