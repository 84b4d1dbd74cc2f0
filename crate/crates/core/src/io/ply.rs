//! ASCII PLY point clouds: element vertex with float64 x, y, z properties.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Point3, PointCloud};

pub fn ply_string(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(64 + cloud.len() * 24);
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    out
}

pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, ply_string(cloud))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_ply(path: &Path, frame: Frame) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_ply(&text, frame)
}

/// Parses an ASCII PLY with a single vertex element carrying exactly the
/// x, y, z properties (float/double). Errors carry 1-based line numbers.
pub fn parse_ply(text: &str, frame: Frame) -> Result<PointCloud> {
    let fail = |line: usize, message: &str| Error::PlyParse { line, message: message.into() };
    let mut lines = text.lines().enumerate();

    let mut next_content = |expect: &str| -> Result<(usize, String)> {
        for (idx, raw) in lines.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("comment") {
                continue;
            }
            return Ok((idx + 1, line.to_string()));
        }
        Err(fail(text.lines().count(), &format!("unexpected end of file, expected {expect}")))
    };

    let (n, magic) = next_content("'ply'")?;
    if magic != "ply" {
        return Err(fail(n, "expected 'ply' magic"));
    }
    let (n, format) = next_content("format line")?;
    if format != "format ascii 1.0" {
        return Err(fail(n, "only 'format ascii 1.0' is supported"));
    }
    let (n, element) = next_content("'element vertex <count>'")?;
    let count: usize = match element.split_whitespace().collect::<Vec<_>>()[..] {
        ["element", "vertex", c] => c
            .parse()
            .map_err(|_| fail(n, "invalid vertex count"))?,
        _ => return Err(fail(n, "expected 'element vertex <count>'")),
    };

    for expected in ["x", "y", "z"] {
        let (n, prop) = next_content("property line")?;
        match prop.split_whitespace().collect::<Vec<_>>()[..] {
            ["property", ty, name]
                if matches!(ty, "double" | "float" | "float32" | "float64") && name == expected => {}
            _ => {
                return Err(fail(n, &format!("expected 'property <float type> {expected}'")));
            }
        }
    }
    let (n, end) = next_content("'end_header'")?;
    if end != "end_header" {
        return Err(fail(n, "expected 'end_header' (only x y z vertex properties supported)"));
    }

    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, row) = next_content("vertex row")?;
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(fail(n, &format!("expected 3 coordinates, got {}", fields.len())));
        }
        let mut coords = [0.0f64; 3];
        for (k, f) in fields.iter().enumerate() {
            coords[k] = f
                .parse()
                .map_err(|_| fail(n, &format!("invalid float '{f}'")))?;
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }

    PointCloud::new(points, frame).map_err(|e| match e {
        Error::EmptyPointCloud => fail(3, "vertex count must be positive"),
        Error::NonFinitePoint { index } => fail(8 + index, "non-finite coordinate"),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let cloud = PointCloud::new(
            (0..64)
                .map(|_| {
                    Point3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect(),
            Frame::Nocs,
        )
        .unwrap();
        let text = ply_string(&cloud);
        let back = parse_ply(&text, Frame::Nocs).unwrap();
        assert_eq!(cloud.points(), back.points());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n1 oops 1\n";
        match parse_ply(text, Frame::Nocs) {
            Err(Error::PlyParse { line, .. }) => assert_eq!(line, 9),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_binary_format() {
        let text = "ply\nformat binary_little_endian 1.0\n";
        assert!(matches!(parse_ply(text, Frame::Nocs), Err(Error::PlyParse { line: 2, .. })));
    }

    #[test]
    fn accepts_comments_and_float_type_names() {
        let text = "ply\ncomment made elsewhere\nformat ascii 1.0\nelement vertex 1\nproperty float32 x\nproperty float32 y\nproperty float32 z\nend_header\n0.5 -0.25 1\n";
        let cloud = parse_ply(text, Frame::Camera).unwrap();
        assert_eq!(cloud.points()[0], Point3::new(0.5, -0.25, 1.0));
    }
}
