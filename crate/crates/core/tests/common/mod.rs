#![allow(dead_code)]

use geomint::Vec3;

/// Solves `(φ′ − μ₁)′ = 0` on a padded line by finite volumes and returns
/// `H_x = −φ′` at the chain sites.
///
/// The fine grid has `refine` cells per chain spacing and extends `pad`
/// chain lengths past both ends, where `μ = 0`. The left end carries zero
/// flux and the right end `φ = 0`, which is the decay condition for a slab.
/// Nodes sit at cell centers so every chain site falls on a cell face, and
/// `μ₁` between sites is linear.
pub fn fd_demag_x(m: &[Vec3], spacing: f64, refine: usize, pad: f64) -> Vec<f64> {
    let n = m.len();
    let length = (n - 1) as f64 * spacing;
    let hf = spacing / refine as f64;
    let pad_cells = ((pad * length.max(spacing)) / hf).ceil() as usize;
    let cells = 2 * pad_cells + (n - 1) * refine;
    let origin = -(pad_cells as f64) * hf;

    let mu1 = |x: f64| -> f64 {
        if x < -1e-12 * spacing || x > length + 1e-12 * spacing {
            return 0.0;
        }
        let s = (x / spacing).clamp(0.0, (n - 1) as f64);
        let j = (s.floor() as usize).min(n.saturating_sub(2));
        let w = s - j as f64;
        m[j].x * (1.0 - w) + m[(j + 1).min(n - 1)].x * w
    };
    // Face k is at origin + k·hf, k = 0..=cells; node i sits between faces i and i+1.
    let face_mu: Vec<f64> = (0..=cells).map(|k| mu1(origin + k as f64 * hf)).collect();

    // Rows: i = 0..cells-1 with flux_i = (φ_i − φ_{i−1})/hf − μ_face_i, flux_0 = 0,
    // and the last node pinned to φ = 0 through a ghost at the last face.
    let size = cells;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut rhs = vec![0.0; size];
    for i in 0..size {
        // flux_{i+1} − flux_i = 0, fluxes across interior faces.
        let right_face = i + 1;
        if right_face < cells {
            diag[i] -= 1.0;
            upper[i] += 1.0;
            rhs[i] += hf * face_mu[right_face];
        } else {
            // Dirichlet φ = 0 on the last face: half-cell distance.
            diag[i] -= 2.0;
            rhs[i] += hf * face_mu[right_face];
        }
        if i > 0 {
            diag[i] -= 1.0;
            lower[i] += 1.0;
            rhs[i] -= hf * face_mu[i];
        }
    }
    let phi = thomas(&lower, &diag, &upper, &rhs);

    (0..n)
        .map(|j| {
            let k = pad_cells + j * refine;
            -((phi[k] - phi[k - 1]) / hf)
        })
        .collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}
