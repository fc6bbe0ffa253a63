//! Oracles shared by the integration tests and the acceptance suite.

use image::GrayImage;

/// Reference LBP: neighbours read by angle, bits joined as a string, uniform
/// patterns enumerated by a rank over all 256 codes.
pub fn oracle_bin(img: &GrayImage, x: i64, y: i64) -> usize {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let get = |xx: i64, yy: i64| img.get_pixel(xx.clamp(0, w - 1) as u32, yy.clamp(0, h - 1) as u32)[0];
    let c = get(x, y);
    // clockwise from straight up, image rows growing downwards
    let mut bits = String::new();
    for k in 0..8 {
        let angle = std::f64::consts::FRAC_PI_2 - k as f64 * std::f64::consts::FRAC_PI_4;
        let dx = angle.cos().round() as i64;
        let dy = -(angle.sin().round() as i64);
        bits.insert(0, if get(x + dx, y + dy) >= c { '1' } else { '0' });
    }
    let code = u8::from_str_radix(&bits, 2).unwrap();
    let changes = |v: u8| {
        let s: Vec<char> = format!("{v:08b}").chars().collect();
        (0..8).filter(|&i| s[i] != s[(i + 1) % 8]).count()
    };
    if changes(code) > 2 {
        return 58;
    }
    (0..code).filter(|&v| changes(v) <= 2).count()
}
