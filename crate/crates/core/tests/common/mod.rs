#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varifold_motion::{KernelFamily, RigidMotion, TriangleMesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Triangle soup over a shared vertex pool; faces use distinct vertices.
pub fn random_mesh(rng: &mut ChaCha8Rng, faces: usize) -> TriangleMesh<f64> {
    let nv = (faces / 2 + 3).max(3);
    let verts: Vec<[f64; 3]> = (0..nv)
        .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
        .collect();
    let tris = (0..faces)
        .map(|_| loop {
            let f: [usize; 3] = std::array::from_fn(|_| rng.random_range(0..nv));
            if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                break f;
            }
        })
        .collect();
    TriangleMesh::new(verts, tris).unwrap()
}

pub fn random_motion(rng: &mut ChaCha8Rng) -> RigidMotion<f64> {
    let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let t: [f64; 3] = std::array::from_fn(|_| rng.random_range(-10.0..10.0));
    RigidMotion::from_quaternion(q, t)
}

pub fn transform_mesh(mesh: &TriangleMesh<f64>, m: &RigidMotion<f64>) -> TriangleMesh<f64> {
    let verts = mesh.vertices().iter().map(|&p| m.apply_point(p)).collect();
    TriangleMesh::new(verts, mesh.faces().to_vec()).unwrap()
}

/// Shuffles the vertex array, rewires faces, permutes the face list and
/// cyclically rotates each face's corners (orientation preserved).
pub fn reparameterize(mesh: &TriangleMesh<f64>, rng: &mut ChaCha8Rng) -> TriangleMesh<f64> {
    let n = mesh.vertices().len();
    let mut new_of_old: Vec<usize> = (0..n).collect();
    shuffle(&mut new_of_old, rng);
    let mut verts = vec![[0.0; 3]; n];
    for (old, &new) in new_of_old.iter().enumerate() {
        verts[new] = mesh.vertices()[old];
    }
    let mut faces: Vec<[usize; 3]> = mesh
        .faces()
        .iter()
        .map(|f| {
            let f = f.map(|v| new_of_old[v]);
            match rng.random_range(0..3) {
                0 => f,
                1 => [f[1], f[2], f[0]],
                _ => [f[2], f[0], f[1]],
            }
        })
        .collect();
    shuffle(&mut faces, rng);
    TriangleMesh::new(verts, faces).unwrap()
}

pub fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

fn face_data(mesh: &TriangleMesh<f64>) -> Vec<([f64; 3], [f64; 3], f64)> {
    let v = mesh.vertices();
    mesh.faces()
        .iter()
        .filter_map(|&[a, b, c]| {
            let e1: Vec<f64> = (0..3).map(|k| v[b][k] - v[a][k]).collect();
            let e2: Vec<f64> = (0..3).map(|k| v[c][k] - v[a][k]).collect();
            let n = [
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ];
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if len / 2.0 <= mesh.default_drop_tolerance() {
                return None;
            }
            let center = std::array::from_fn(|k| (v[a][k] + v[b][k] + v[c][k]) / 3.0);
            Some((center, n.map(|x| x / len), len / 2.0))
        })
        .collect()
}

/// Direct double loop over faces straight from the vertex buffer.
pub fn naive_product(
    a: &TriangleMesh<f64>,
    b: &TriangleMesh<f64>,
    family: KernelFamily,
    sigma: f64,
    sigma_o: f64,
) -> f64 {
    let (fa, fb) = (face_data(a), face_data(b));
    let mut total = 0.0;
    for (ci, ni, ai) in &fa {
        for (cj, nj, aj) in &fb {
            let d2: f64 = (0..3).map(|k| (ci[k] - cj[k]).powi(2)).sum();
            let u: f64 = (0..3).map(|k| ni[k] * nj[k]).sum();
            let gamma = match family {
                KernelFamily::Current => u,
                KernelFamily::AbsoluteVarifold => u.abs(),
                KernelFamily::OrientedVarifold => (2.0 * u / (sigma_o * sigma_o)).exp(),
            };
            total += ai * aj * (-d2 / (sigma * sigma)).exp() * gamma;
        }
    }
    total
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Random symmetric PSD matrix `X Xᵀ` with unit diagonal.
pub fn random_correlation(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let mut x = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
    for mut row in x.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    let j = &x * x.transpose();
    (&j + j.transpose()) * 0.5
}
