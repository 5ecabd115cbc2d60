//! Small fixed-size helpers shared by the benchmark problems and baselines.
//! 3x3 matrices are row-major `[f64; 9]`.

pub(crate) fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Skew matrix of `w = (a, b, c)`: rows `[0, -c, b; c, 0, -a; -b, a, 0]`.
pub(crate) fn hat3(w: &[f64]) -> [f64; 9] {
    [
        0.0, -w[2], w[1], //
        w[2], 0.0, -w[0], //
        -w[1], w[0], 0.0,
    ]
}

pub(crate) fn matmul3(a: &[f64], b: &[f64]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] =
                a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
        }
    }
    out
}

pub(crate) fn det3(r: &[f64]) -> f64 {
    r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6])
        + r[2] * (r[3] * r[7] - r[4] * r[6])
}

/// Rotation matrix about coordinate axis `axis` through `angle`, built from
/// the embedded 2x2 rotation (exact on the fixed axis).
pub(crate) fn axis_rotation3(axis: usize, angle: f64) -> [f64; 9] {
    let (s, c) = angle.sin_cos();
    let j = (axis + 1) % 3;
    let k = (axis + 2) % 3;
    let mut out = [0.0; 9];
    out[3 * axis + axis] = 1.0;
    out[3 * j + j] = c;
    out[3 * j + k] = -s;
    out[3 * k + j] = s;
    out[3 * k + k] = c;
    out
}

/// Rotates `v` in place about coordinate axis `axis` through `angle`,
/// touching only the two off-axis components.
pub(crate) fn rotate_about_axis3(v: &mut [f64], axis: usize, angle: f64) {
    let (s, c) = angle.sin_cos();
    let j = (axis + 1) % 3;
    let k = (axis + 2) % 3;
    let vj = v[j];
    let vk = v[k];
    v[j] = c * vj - s * vk;
    v[k] = s * vj + c * vk;
}

/// Rodrigues rotation from an axis-angle vector (used by the samplers).
pub(crate) fn rotation_from_axis_angle(w: &[f64]) -> [f64; 9] {
    let theta = norm3(w);
    if theta < 1e-12 {
        return [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    }
    let axis = [w[0] / theta, w[1] / theta, w[2] / theta];
    let k = hat3(&axis);
    let k2 = matmul3(&k, &k);
    let (s, c) = theta.sin_cos();
    let mut out = [0.0; 9];
    for i in 0..9 {
        out[i] = s * k[i] + (1.0 - c) * k2[i];
    }
    out[0] += 1.0;
    out[4] += 1.0;
    out[8] += 1.0;
    out
}
