//! Linear 3D frame model of the wave wall.
//!
//! The centerline `y(t)` lies in the global x–y plane, x along the joint axis,
//! z along the extrusion. Each element carries a thin rectangular section
//! (`t_h` through the wall, `depth` along the extrusion) whose principal axes
//! roll about the tangent from 0 at the clamped end to `alpha` at the free
//! end. The free block is rigid: loads act at the center of its far face and
//! are transferred to the last wave node as a force plus the couple of the
//! lever arm.

use std::f64::consts::PI;

use crate::joint::{wave_offset, wave_slope, JointConfig};

use super::{FailureReason, Material, StiffnessTriple};

/// Extrusion depth of the wall, equal to the block face it attaches to (mm).
pub const WALL_DEPTH: f64 = 16.0;
/// Axial size of the rigid block between the wave end and the load point (mm).
pub const BLOCK_LENGTH: f64 = 11.0;
/// Condition numbers above this are treated as a singular system.
pub const CONDITION_LIMIT: f64 = 1e12;

type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Axial coordinates of `n_elem + 1` nodes, equally spaced in a measure that
/// weighs arc length and tangent turning equally so the sharp crests get
/// their share of nodes.
fn arc_length_stations(cfg: &JointConfig, n_elem: usize) -> Vec<f64> {
    const OVERSAMPLE: usize = 32;
    let m = n_elem * OVERSAMPLE;
    let h = cfg.l_t / m as f64;
    let speed = |t: f64| (1.0 + wave_slope(cfg, t).powi(2)).sqrt();
    let angle = |t: f64| wave_slope(cfg, t).atan();
    let mut arc = Vec::with_capacity(m + 1);
    let mut turn = Vec::with_capacity(m + 1);
    arc.push(0.0);
    turn.push(0.0);
    let mut prev = speed(0.0);
    let mut prev_angle = angle(0.0);
    for k in 0..m {
        let t0 = k as f64 * h;
        let mid = speed(t0 + 0.5 * h);
        let next = speed(t0 + h);
        let next_angle = angle(t0 + h);
        arc.push(arc[k] + h / 6.0 * (prev + 4.0 * mid + next));
        turn.push(turn[k] + (next_angle - prev_angle).abs());
        prev = next;
        prev_angle = next_angle;
    }
    let (arc_total, turn_total) = (arc[m], turn[m]);
    let cum: Vec<f64> = if turn_total > 0.0 {
        arc.iter().zip(&turn).map(|(a, b)| 0.5 * (a / arc_total + b / turn_total)).collect()
    } else {
        arc.iter().map(|a| a / arc_total).collect()
    };
    let mut out = Vec::with_capacity(n_elem + 1);
    out.push(0.0);
    let mut k = 0;
    for e in 1..n_elem {
        let s = e as f64 / n_elem as f64;
        while cum[k + 1] < s {
            k += 1;
        }
        let frac = (s - cum[k]) / (cum[k + 1] - cum[k]);
        out.push((k as f64 + frac) * h);
    }
    out.push(cfg.l_t);
    out
}

struct Section {
    ea: f64,
    gj: f64,
    /// bending about the local through-wall axis (deflection along the extrusion)
    ei_stiff: f64,
    /// bending about the local extrusion axis (deflection through the wall)
    ei_soft: f64,
}

impl Section {
    fn new(cfg: &JointConfig, mat: &Material) -> Self {
        let e = mat.young_modulus_mpa();
        let g = mat.shear_modulus_mpa();
        let t = cfg.t_h;
        let d = WALL_DEPTH;
        let r = t / d;
        let j = d * t.powi(3) * (1.0 / 3.0 - 0.21 * r * (1.0 - r.powi(4) / 12.0));
        Section { ea: e * t * d, gj: g * j, ei_stiff: e * t * d.powi(3) / 12.0, ei_soft: e * d * t.powi(3) / 12.0 }
    }
}

#[cfg(test)]
/// 12×12 local stiffness, DOF order `[u v w θx θy θz]` per node.
fn local_stiffness(s: &Section, l: f64) -> [[f64; 12]; 12] {
    let mut k = [[0.0; 12]; 12];
    let ea = s.ea / l;
    let gj = s.gj / l;
    // deflection v (local y) uses the soft inertia, w (local z) the stiff one
    let iz = s.ei_soft;
    let iy = s.ei_stiff;
    let (l2, l3) = (l * l, l * l * l);
    let mut set = |i: usize, j: usize, v: f64| {
        k[i][j] = v;
        k[j][i] = v;
    };
    set(0, 0, ea);
    set(0, 6, -ea);
    set(6, 6, ea);
    set(3, 3, gj);
    set(3, 9, -gj);
    set(9, 9, gj);

    set(1, 1, 12.0 * iz / l3);
    set(1, 5, 6.0 * iz / l2);
    set(1, 7, -12.0 * iz / l3);
    set(1, 11, 6.0 * iz / l2);
    set(5, 5, 4.0 * iz / l);
    set(5, 7, -6.0 * iz / l2);
    set(5, 11, 2.0 * iz / l);
    set(7, 7, 12.0 * iz / l3);
    set(7, 11, -6.0 * iz / l2);
    set(11, 11, 4.0 * iz / l);

    set(2, 2, 12.0 * iy / l3);
    set(2, 4, -6.0 * iy / l2);
    set(2, 8, -12.0 * iy / l3);
    set(2, 10, -6.0 * iy / l2);
    set(4, 4, 4.0 * iy / l);
    set(4, 8, 6.0 * iy / l2);
    set(4, 10, 2.0 * iy / l);
    set(8, 8, 12.0 * iy / l3);
    set(8, 10, 6.0 * iy / l2);
    set(10, 10, 4.0 * iy / l);
    k
}

/// Rows are the local axes expressed in global coordinates.
fn local_frame(tangent: Vec3, roll: f64) -> [Vec3; 3] {
    let l = norm(tangent);
    let e1 = [tangent[0] / l, tangent[1] / l, tangent[2] / l];
    let z = [0.0, 0.0, 1.0];
    let n = cross(z, e1);
    let nl = norm(n);
    let e2 = [n[0] / nl, n[1] / nl, n[2] / nl];
    let e3 = cross(e1, e2);
    let (s, c) = roll.sin_cos();
    let r2 = [c * e2[0] + s * e3[0], c * e2[1] + s * e3[1], c * e2[2] + s * e3[2]];
    let r3 = [-s * e2[0] + c * e3[0], -s * e2[1] + c * e3[1], -s * e2[2] + c * e3[2]];
    [e1, r2, r3]
}

#[cfg(test)]
/// Global element stiffness `Tᵀ k T` with `T = diag(R, R, R, R)`.
fn global_stiffness(k: &[[f64; 12]; 12], r: &[Vec3; 3]) -> [[f64; 12]; 12] {
    // kt = k T
    let mut kt = [[0.0; 12]; 12];
    for i in 0..12 {
        for bj in 0..4 {
            for c in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    acc += k[i][bj * 3 + a] * r[a][c];
                }
                kt[i][bj * 3 + c] = acc;
            }
        }
    }
    let mut out = [[0.0; 12]; 12];
    for bi in 0..4 {
        for c in 0..3 {
            for j in 0..12 {
                let mut acc = 0.0;
                for a in 0..3 {
                    acc += r[a][c] * kt[bi * 3 + a][j];
                }
                out[bi * 3 + c][j] = acc;
            }
        }
    }
    out
}

/// Element compliance at its free end in local axes, for the element clamped
/// at its start. Order `[u v w θx θy θz]`.
fn local_compliance(s: &Section, l: f64) -> [[f64; 6]; 6] {
    let mut f = [[0.0; 6]; 6];
    let (l2, l3) = (l * l, l * l * l);
    f[0][0] = l / s.ea;
    f[3][3] = l / s.gj;
    // v, θz under (Fy, Mz)
    f[1][1] = l3 / (3.0 * s.ei_soft);
    f[1][5] = l2 / (2.0 * s.ei_soft);
    f[5][1] = f[1][5];
    f[5][5] = l / s.ei_soft;
    // w, θy under (Fz, My)
    f[2][2] = l3 / (3.0 * s.ei_stiff);
    f[2][4] = -l2 / (2.0 * s.ei_stiff);
    f[4][2] = f[2][4];
    f[4][4] = l / s.ei_stiff;
    f
}

fn skew(r: Vec3) -> [[f64; 3]; 3] {
    [[0.0, -r[2], r[1]], [r[2], 0.0, -r[0]], [-r[1], r[0], 0.0]]
}

/// Centerline nodes and the local frame of every element.
fn discretize(cfg: &JointConfig, mesh_density: usize) -> Result<(Vec<Vec3>, Vec<[Vec3; 3]>), FailureReason> {
    let n_elem = ((mesh_density as f64 * cfg.n_r).round() as usize).max(mesh_density);
    let stations = arc_length_stations(cfg, n_elem);
    let nodes: Vec<Vec3> = stations.iter().map(|&t| [t, wave_offset(cfg, t), 0.0]).collect();
    let twist = cfg.alpha.to_radians();
    let mut frames = Vec::with_capacity(n_elem);
    for e in 0..n_elem {
        let d = sub(nodes[e + 1], nodes[e]);
        if !(norm(d) > 0.0) {
            return Err(FailureReason::InvalidGeometry("zero-length element".into()));
        }
        let t_mid = 0.5 * (stations[e] + stations[e + 1]);
        frames.push(local_frame(d, twist * t_mid / cfg.l_t));
    }
    Ok((nodes, frames))
}

/// Compliance of the last node of the clamped-free chain: 6×6 map from the
/// force and moment applied there to its displacement and rotation.
///
/// The chain is statically determinate, so this is the exact condensation
/// of the assembled frame stiffness onto the tip, accumulated element by
/// element without forming the global system.
fn tip_compliance(nodes: &[Vec3], frames: &[[Vec3; 3]], section: &Section) -> [[f64; 6]; 6] {
    let tip = *nodes.last().unwrap();
    let mut total = [[0.0; 6]; 6];
    for (e, r) in frames.iter().enumerate() {
        let end = nodes[e + 1];
        let fl = local_compliance(section, norm(sub(end, nodes[e])));
        // A = R_e · T_e maps tip loads to local loads at the element end:
        // F_end = F, M_end = M + (tip − end) × F
        let s = skew(sub(tip, end));
        let mut a = [[0.0; 6]; 6];
        for i in 0..3 {
            for c in 0..3 {
                a[i][c] = r[i][c];
                a[3 + i][3 + c] = r[i][c];
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += r[i][k] * s[k][c];
                }
                a[3 + i][c] = acc;
            }
        }
        // total += Aᵀ F A
        let mut fa = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                fa[i][j] = (0..6).map(|k| fl[i][k] * a[k][j]).sum();
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                total[i][j] += (0..6).map(|k| a[k][i] * fa[k][j]).sum::<f64>();
            }
        }
    }
    total
}

/// 1-norm condition number of the tip compliance after symmetric diagonal
/// equilibration.
fn equilibrated_condition(f: &[[f64; 6]; 6]) -> f64 {
    let mut m = nalgebra::Matrix6::<f64>::zeros();
    for i in 0..6 {
        for j in 0..6 {
            m[(i, j)] = f[i][j] / (f[i][i] * f[j][j]).sqrt();
        }
    }
    let norm1 = |m: &nalgebra::Matrix6<f64>| m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    match m.try_inverse() {
        Some(inv) => norm1(&m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

pub(super) fn solve(cfg: &JointConfig, mat: &Material, mesh_density: usize) -> Result<StiffnessTriple, FailureReason> {
    let (nodes, frames) = discretize(cfg, mesh_density)?;
    let section = Section::new(cfg, mat);
    let f = tip_compliance(&nodes, &frames, &section);
    if (0..6).any(|i| !(f[i][i] > 0.0 && f[i][i].is_finite())) {
        return Err(FailureReason::SingularSystem { condition: f64::INFINITY });
    }
    let condition = equilibrated_condition(&f);
    if !(condition <= CONDITION_LIMIT) {
        return Err(FailureReason::SingularSystem { condition });
    }

    let tip = *nodes.last().unwrap();
    let load_point = [cfg.l_t + BLOCK_LENGTH, 0.0, 0.0];
    let arm = sub(load_point, tip);

    // (force at load point, couple) -> displacement of the load point, rotation of the block
    let respond = |force: Vec3, couple: Vec3| -> (Vec3, Vec3) {
        let m = cross(arm, force);
        let load = [force[0], force[1], force[2], m[0] + couple[0], m[1] + couple[1], m[2] + couple[2]];
        let mut q = [0.0; 6];
        for (i, qi) in q.iter_mut().enumerate() {
            *qi = (0..6).map(|j| f[i][j] * load[j]).sum();
        }
        let th = [q[3], q[4], q[5]];
        let rot = cross(th, arm);
        ([q[0] + rot[0], q[1] + rot[1], q[2] + rot[2]], th)
    };

    let delta_xi = respond([0.0, 0.0, 1.0], [0.0; 3]).0[2];
    let delta_eta = respond([0.0, 1.0, 0.0], [0.0; 3]).0[1];
    let twist_deg = respond([0.0; 3], [1.0, 0.0, 0.0]).1[0] * 180.0 / PI;

    let k = StiffnessTriple::new(1.0 / delta_xi, 1.0 / delta_eta, 1.0 / twist_deg);
    if k.as_array().iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(k)
    } else {
        Err(FailureReason::NonPositiveStiffness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stations_are_monotone_and_span_joint() {
        let cfg = JointConfig::new(20.0, 4.0, 10.0, 0.5, 12.0);
        let s = arc_length_stations(&cfg, 64);
        assert_eq!(s.len(), 65);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[64], 20.0);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn local_frame_is_orthonormal() {
        let r = local_frame([1.0, 2.0, 0.0], 0.3);
        for i in 0..3 {
            assert!((norm(r[i]) - 1.0).abs() < 1e-14);
            for j in (i + 1)..3 {
                assert!(dot(r[i], r[j]).abs() < 1e-14);
            }
        }
        let c = cross(r[0], r[1]);
        assert!((dot(c, r[2]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn straight_cantilever_matches_beam_theory() {
        // A vanishing-amplitude wave is a straight strip of length l_t. The tip
        // stiffness of a cantilever under an end load at distance l+a with a
        // rigid extension a is 1 / ((l³/3 + a l² + a² l) / EI).
        let cfg = JointConfig::new(20.0, 3.0, 1.0 + 1e-9, 0.5, 0.0);
        let mat = Material::default();
        let k = solve(&cfg, &mat, 8).unwrap();
        let (l, a) = (20.0_f64, BLOCK_LENGTH);
        let flex = |ei: f64| (l.powi(3) / 3.0 + a * l * l + a * a * l) / ei;
        let s = Section::new(&cfg, &mat);
        assert!((k.k_xi * flex(s.ei_stiff) - 1.0).abs() < 1e-6, "{}", k.k_xi * flex(s.ei_stiff));
        assert!((k.k_eta * flex(s.ei_soft) - 1.0).abs() < 1e-6);
        let torsion = 1.0 / (l / s.gj * 180.0 / PI);
        assert!((k.k_zeta / torsion - 1.0).abs() < 1e-6);
    }

    /// Assemble the full frame stiffness and solve it with the banded LU; the
    /// tip block of the inverse must agree with the condensed compliance.
    #[test]
    fn condensed_compliance_matches_assembled_solve() {
        use super::super::band::BandMatrix;
        let mat = Material::default();
        for cfg in [JointConfig::new(20.0, 4.0, 10.0, 0.5, 12.0), JointConfig::new(30.0, 3.0, 8.0, 0.6, 0.0)] {
            let (nodes, frames) = discretize(&cfg, 6).unwrap();
            let section = Section::new(&cfg, &mat);
            let n_elem = frames.len();
            let n_free = 6 * n_elem;
            let mut kmat = BandMatrix::zeros(n_free, 11, 11);
            for e in 0..n_elem {
                let len = norm(sub(nodes[e + 1], nodes[e]));
                let kg = global_stiffness(&local_stiffness(&section, len), &frames[e]);
                for a in 0..12 {
                    let na = e + a / 6;
                    if na == 0 {
                        continue;
                    }
                    for b in 0..12 {
                        let nb = e + b / 6;
                        if nb == 0 {
                            continue;
                        }
                        kmat.add(6 * (na - 1) + a % 6, 6 * (nb - 1) + b % 6, kg[a][b]);
                    }
                }
            }
            let lu = kmat.factor().unwrap();
            let f = tip_compliance(&nodes, &frames, &section);
            let base = n_free - 6;
            for j in 0..6 {
                let mut rhs = vec![0.0; n_free];
                rhs[base + j] = 1.0;
                lu.solve_in_place(&mut rhs);
                for i in 0..6 {
                    let scale = (f[i][i] * f[j][j]).sqrt();
                    assert!((rhs[base + i] - f[i][j]).abs() < 1e-7 * scale, "{cfg} ({i},{j}): {} vs {}", rhs[base + i], f[i][j]);
                }
            }
        }
    }
}
