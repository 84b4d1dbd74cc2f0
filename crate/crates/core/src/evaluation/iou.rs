//! Exact intersection-over-union of oriented boxes via half-space
//! intersection: enumerate candidate vertices from plane triples, then sum
//! face-pyramid volumes about the centroid.

use crate::geometry::{Mat3, OrientedBox3D, Vec3};

/// Exact IoU of two oriented boxes; symmetric, in [0, 1], 0 when disjoint.
pub fn oriented_iou(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let inter = intersection_volume(a, b);
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Volume of the convex polytope a ∩ b.
pub fn intersection_volume(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let mut planes: Vec<(Vec3, f64)> = Vec::with_capacity(12);
    planes.extend_from_slice(&a.halfspaces());
    planes.extend_from_slice(&b.halfspaces());

    // Geometry-scale tolerance: offsets grow with |center| and extents.
    let scale = planes.iter().map(|(_, d)| d.abs()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;

    let vertices = enumerate_vertices(&planes, tol);
    if vertices.len() < 4 {
        return 0.0;
    }

    let centroid = vertices.iter().fold(Vec3::zeros(), |acc, v| acc + v) / vertices.len() as f64;

    // Coincident planes (identical or touching boxes) would double-count a
    // face; keep one representative of each outward-facing plane.
    let mut face_planes: Vec<(Vec3, f64)> = Vec::with_capacity(12);
    for (n, d) in &planes {
        let dup = face_planes
            .iter()
            .any(|(n2, d2)| (n - n2).norm() <= 1e-9 && (d - d2).abs() <= tol);
        if !dup {
            face_planes.push((*n, *d));
        }
    }

    let mut volume = 0.0;
    for (n, d) in &face_planes {
        let on_face: Vec<Vec3> = vertices
            .iter()
            .filter(|v| (n.dot(v) - d).abs() <= 2.0 * tol)
            .copied()
            .collect();
        if on_face.len() < 3 {
            continue;
        }
        volume += face_pyramid_volume(&on_face, n, &centroid);
    }
    volume
}

/// Solves all plane triples and keeps points satisfying every half-space.
fn enumerate_vertices(planes: &[(Vec3, f64)], tol: f64) -> Vec<Vec3> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let m = planes.len();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let a = Mat3::from_rows(&[
                    planes[i].0.transpose(),
                    planes[j].0.transpose(),
                    planes[k].0.transpose(),
                ]);
                let det = a.determinant();
                if det.abs() < 1e-9 {
                    continue;
                }
                let rhs = Vec3::new(planes[i].1, planes[j].1, planes[k].1);
                let Some(inv) = a.try_inverse() else { continue };
                let x = inv * rhs;
                if planes.iter().all(|(n, d)| n.dot(&x) <= d + tol)
                    && !vertices.iter().any(|v| (v - x).norm() <= tol)
                {
                    vertices.push(x);
                }
            }
        }
    }
    vertices
}

/// Volume of the pyramid from `apex` over the convex face polygon spanned by
/// `points` (all on one plane with outward normal `normal`).
fn face_pyramid_volume(points: &[Vec3], normal: &Vec3, apex: &Vec3) -> f64 {
    // 2D basis in the face plane.
    let u = pick_orthogonal(normal);
    let w = normal.cross(&u);
    let center = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64;
    let mut ordered: Vec<(f64, Vec3)> = points
        .iter()
        .map(|p| {
            let rel = p - center;
            (rel.dot(&w).atan2(rel.dot(&u)), *p)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let base = ordered[0].1;
    let mut volume = 0.0;
    for window in ordered[1..].windows(2) {
        let e1 = window[0].1 - base;
        let e2 = window[1].1 - base;
        let tet = (base - apex).dot(&e1.cross(&e2)) / 6.0;
        volume += tet.abs();
    }
    volume
}

fn pick_orthogonal(n: &Vec3) -> Vec3 {
    let candidate = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    n.cross(&candidate).normalize()
}
