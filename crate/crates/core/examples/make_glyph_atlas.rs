//! Regenerates `assets/glyphs.png` and `assets/glyphs.json`.
//!
//! cargo run -p tivi-core --example make_glyph_atlas -- crates/core/assets

use std::path::PathBuf;

const W: usize = 5;
const H: usize = 7;

const FONT: &[(char, [&str; H])] = &[
    ('0', [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."]),
    ('1', ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    ('2', [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"]),
    ('3', ["#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."]),
    ('4', ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."]),
    ('5', ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."]),
    ('6', ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."]),
    ('7', ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."]),
    ('8', [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."]),
    ('9', [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."]),
    ('A', [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    ('B', ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."]),
    ('C', [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."]),
    ('D', ["###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."]),
    ('+', [".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."]),
    ('-', [".....", ".....", ".....", "#####", ".....", ".....", "....."]),
    ('×', [".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "....."]),
    ('÷', [".....", "..#..", ".....", "#####", ".....", "..#..", "....."]),
    ('=', [".....", ".....", "#####", ".....", "#####", ".....", "....."]),
];

fn main() -> anyhow::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/assets".into()));
    std::fs::create_dir_all(&out)?;
    let stride = W + 1;
    let width = stride * FONT.len() - 1;
    let mut px = vec![255u8; width * H];
    let mut index = Vec::new();
    for (i, (ch, rows)) in FONT.iter().enumerate() {
        let x0 = i * stride;
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c == '#' {
                    px[y * width + x0 + x] = 0;
                }
            }
        }
        index.push(serde_json::json!({ "ch": ch.to_string(), "x": x0, "y": 0 }));
    }
    let file = std::fs::File::create(out.join("glyphs.png"))?;
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), width as u32, H as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    enc.write_header()?.write_image_data(&px)?;
    let json = serde_json::json!({ "cell_width": W, "cell_height": H, "glyphs": index });
    std::fs::write(out.join("glyphs.json"), serde_json::to_string_pretty(&json)? + "\n")?;
    Ok(())
}
