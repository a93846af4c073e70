//! Field containers, the staggered curl pair and the energy functional.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::materials::PhysicalConstants;
use rayon::prelude::*;
use std::io::Write;

/// Electromagnetic unknowns on the staggered lattice: `Dz` on nodes, `Bx`
/// and `By` on faces, all at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub dz: Vec<f64>,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(dom: &Domain) -> Self {
        let l = dom.layout;
        FieldState {
            dz: vec![0.0; l.node_count()],
            bx: vec![0.0; l.bx_count()],
            by: vec![0.0; l.by_count()],
            t: 0.0,
        }
    }

    /// Samples `dz(x, y)` on interior nodes and `b(x, y)` on every face whose
    /// midpoint lies in the physical domain.
    pub fn sample(
        dom: &Domain,
        dz: impl Fn(f64, f64) -> f64,
        b: impl Fn(f64, f64) -> (f64, f64),
    ) -> Self {
        let l = dom.layout;
        let bx = (0..l.bx_count())
            .map(|k| {
                if dom.bx_inside[k] {
                    let (x, y) = dom.bx_xy(k);
                    b(x, y).0
                } else {
                    0.0
                }
            })
            .collect();
        let by = (0..l.by_count())
            .map(|k| {
                if dom.by_inside[k] {
                    let (x, y) = dom.by_xy(k);
                    b(x, y).1
                } else {
                    0.0
                }
            })
            .collect();
        FieldState {
            dz: dom.sample_interior(dz),
            bx,
            by,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dz.iter().chain(&self.bx).chain(&self.by).all(|v| v.is_finite())
    }

    /// `n ^ D = 0`: Dz vanishes on every non-interior node.
    pub fn satisfies_boundary(&self, dom: &Domain) -> bool {
        self.dz
            .iter()
            .zip(&dom.interior)
            .all(|(&v, &inside)| inside || v == 0.0)
    }

    pub fn check_shape(&self, dom: &Domain) -> Result<()> {
        let l = dom.layout;
        if self.dz.len() != l.node_count()
            || self.bx.len() != l.bx_count()
            || self.by.len() != l.by_count()
        {
            return Err(Error::config(
                "initial",
                "field arrays do not match the grid size",
            ));
        }
        Ok(())
    }
}

/// Temperature on nodes, zero on the Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    pub theta: Vec<f64>,
    pub t: f64,
}

impl ThetaField {
    pub fn zeros(dom: &Domain) -> Self {
        ThetaField {
            theta: vec![0.0; dom.node_count()],
            t: 0.0,
        }
    }

    pub fn sample(dom: &Domain, f: impl Fn(f64, f64) -> f64) -> Self {
        ThetaField {
            theta: dom.sample_interior(f),
            t: 0.0,
        }
    }

    pub fn satisfies_boundary(&self, dom: &Domain) -> bool {
        self.theta
            .iter()
            .zip(&dom.interior)
            .all(|(&v, &inside)| inside || v == 0.0)
    }
}

/// `E(t_n)` on the uniform time grid `t_n = n dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrajectory {
    pub samples: Vec<f64>,
    pub dt: f64,
    /// A-priori bound defining the admissible set; `None` if not known.
    pub bound: Option<f64>,
}

impl EnergyTrajectory {
    pub fn constant(value: f64, steps: usize, dt: f64) -> Self {
        EnergyTrajectory {
            samples: vec![value; steps + 1],
            dt,
            bound: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        crate::reduce::max_abs(&self.samples)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |E| <= bound`; vacuously true without a bound.
    pub fn in_admissible_set(&self) -> bool {
        self.bound.is_none_or(|n| self.sup_norm() <= n)
    }

    /// `max_n |self_n - other_n|`.
    pub fn sup_distance(&self, other: &EnergyTrajectory) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Discrete curl of the in-plane field, on nodes:
/// `(By(i+1/2,j) - By(i-1/2,j))/h - (Bx(i,j+1/2) - Bx(i,j-1/2))/h` at
/// interior nodes, zero elsewhere.
pub fn curl_b(bx: &[f64], by: &[f64], dom: &Domain) -> Vec<f64> {
    let mut out = vec![0.0; dom.node_count()];
    curl_b_into(bx, by, dom, &mut out);
    out
}

pub fn curl_b_into(bx: &[f64], by: &[f64], dom: &Domain, out: &mut [f64]) {
    let l = dom.layout;
    let inv_h = 1.0 / dom.h;
    let cols = l.node_cols();
    out.par_chunks_mut(cols).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            let k = l.node(i, j);
            *v = if dom.interior[k] {
                let dby = by[l.by(i, j)] - by[l.by(i - 1, j)];
                let dbx = bx[l.bx(i, j)] - bx[l.bx(i, j - 1)];
                (dby - dbx) * inv_h
            } else {
                0.0
            };
        }
    });
}

/// Discrete curl of the out-of-plane field, on faces:
/// x-component `(Dz(i,j+1) - Dz(i,j))/h` and y-component
/// `-(Dz(i+1,j) - Dz(i,j))/h`.
pub fn curl_d(dz: &[f64], dom: &Domain) -> (Vec<f64>, Vec<f64>) {
    let l = dom.layout;
    let mut cx = vec![0.0; l.bx_count()];
    let mut cy = vec![0.0; l.by_count()];
    curl_d_into(dz, dom, &mut cx, &mut cy);
    (cx, cy)
}

pub fn curl_d_into(dz: &[f64], dom: &Domain, cx: &mut [f64], cy: &mut [f64]) {
    let l = dom.layout;
    let inv_h = 1.0 / dom.h;
    cx.par_chunks_mut(l.nx + 1)
        .enumerate()
        .for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = (dz[l.node(i, j + 1)] - dz[l.node(i, j)]) * inv_h;
            }
        });
    cy.par_chunks_mut(l.nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = -(dz[l.node(i + 1, j)] - dz[l.node(i, j)]) * inv_h;
        }
    });
}

/// `1/2 [ (1/eps) |D|^2 + (1/mu) |B|^2 ]` with the domain quadrature.
pub fn total_energy(state: &FieldState, dom: &Domain, consts: &PhysicalConstants) -> f64 {
    let d2 = dom.node_dot(&state.dz, &state.dz);
    let b2 = dom.face_dot(&state.bx, &state.by, &state.bx, &state.by);
    0.5 * (d2 / consts.eps + b2 / consts.mu)
}

/// The quadratic form conserved by leapfrog when there is no damping and no
/// source: `1/2 [ (1/eps) |D^n|^2 + (1/mu) <B^{n-1/2}, B^{n+1/2}> ]`.
pub fn staggered_energy(
    dz: &[f64],
    b_prev: (&[f64], &[f64]),
    b_next: (&[f64], &[f64]),
    dom: &Domain,
    consts: &PhysicalConstants,
) -> f64 {
    let d2 = dom.node_dot(dz, dz);
    let bb = dom.face_dot(b_prev.0, b_prev.1, b_next.0, b_next.1);
    0.5 * (d2 / consts.eps + bb / consts.mu)
}

/// Face field averaged onto nodes, for output only.
pub fn interpolate_b_to_nodes(bx: &[f64], by: &[f64], dom: &Domain) -> (Vec<f64>, Vec<f64>) {
    let l = dom.layout;
    let mut nbx = vec![0.0; l.node_count()];
    let mut nby = vec![0.0; l.node_count()];
    for j in 0..=l.ny {
        for i in 0..=l.nx {
            let k = l.node(i, j);
            nbx[k] = match (j > 0, j < l.ny) {
                (true, true) => 0.5 * (bx[l.bx(i, j - 1)] + bx[l.bx(i, j)]),
                (false, _) => bx[l.bx(i, j)],
                (_, false) => bx[l.bx(i, j - 1)],
            };
            nby[k] = match (i > 0, i < l.nx) {
                (true, true) => 0.5 * (by[l.by(i - 1, j)] + by[l.by(i, j)]),
                (false, _) => by[l.by(i, j)],
                (_, false) => by[l.by(i - 1, j)],
            };
        }
    }
    (nbx, nby)
}

/// Formats a value with 17 significant digits.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x,y,Dz,Bx_interp,By_interp,theta` for every node.
pub fn write_field_snapshot<W: Write>(
    mut out: W,
    fields: &FieldState,
    theta: &ThetaField,
    dom: &Domain,
) -> std::io::Result<()> {
    let (nbx, nby) = interpolate_b_to_nodes(&fields.bx, &fields.by, dom);
    writeln!(out, "x,y,Dz,Bx_interp,By_interp,theta")?;
    for k in 0..dom.node_count() {
        let (x, y) = dom.node_xy(k);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_full(x),
            fmt_full(y),
            fmt_full(fields.dz[k]),
            fmt_full(nbx[k]),
            fmt_full(nby[k]),
            fmt_full(theta.theta[k])
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainKind};
    use crate::oracle::annulus_b0;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Domain {
        build_domain(DomainKind::unit_square(), n).unwrap()
    }

    fn max_interior(field: &[f64], dom: &Domain) -> f64 {
        field
            .iter()
            .zip(&dom.interior)
            .filter(|(_, &m)| m)
            .fold(0.0_f64, |a, (v, _)| a.max(v.abs()))
    }

    #[test]
    fn curl_of_constant_b_vanishes() {
        let d = unit(16);
        let s = FieldState::sample(&d, |_, _| 0.0, |_, _| (0.3, -1.7));
        let c = curl_b(&s.bx, &s.by, &d);
        assert!(c.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn curl_of_linear_by_is_one() {
        let d = unit(16);
        let s = FieldState::sample(&d, |_, _| 0.0, |x, _| (0.0, x));
        let c = curl_b(&s.bx, &s.by, &d);
        for (v, &inside) in c.iter().zip(&d.interior) {
            let want = if inside { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn curl_of_annulus_b0_is_second_order_small() {
        let mut maxes = Vec::new();
        for n in [64, 128] {
            let d = build_domain(DomainKind::Annulus, n).unwrap();
            let s = FieldState::sample(&d, |_, _| 0.0, |x, y| annulus_b0(x, y).unwrap());
            maxes.push(max_interior(&curl_b(&s.bx, &s.by, &d), &d));
        }
        let ratio = maxes[0] / maxes[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{maxes:?}");
    }

    #[test]
    fn curl_d_zero_and_linear() {
        let d = unit(16);
        let (cx, cy) = curl_d(&vec![0.0; d.node_count()], &d);
        assert!(cx.iter().chain(&cy).all(|&v| v == 0.0));

        let dz = d.sample_interior(|_, y| y);
        let (cx, _) = curl_d(&dz, &d);
        let l = d.layout;
        for j in 1..l.ny - 1 {
            for i in 1..l.nx {
                assert!((cx[l.bx(i, j)] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curl_d_of_sine_mode_is_second_order() {
        let err = |n| {
            let d = unit(n);
            let dz = d.sample_interior(|x, y| (PI * x).sin() * (PI * y).sin());
            let (cx, cy) = curl_d(&dz, &d);
            let mut e = 0.0_f64;
            for (k, v) in cx.iter().enumerate() {
                let (x, y) = d.bx_xy(k);
                e = e.max((v - PI * (PI * x).sin() * (PI * y).cos()).abs());
            }
            for (k, v) in cy.iter().enumerate() {
                let (x, y) = d.by_xy(k);
                e = e.max((v + PI * (PI * x).cos() * (PI * y).sin()).abs());
            }
            e
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 3.8 && ratio < 4.2, "ratio {ratio}");
    }

    #[test]
    fn energy_examples() {
        let c = PhysicalConstants::unit();
        let d = unit(32);
        assert_eq!(total_energy(&FieldState::zeros(&d), &d, &c), 0.0);
        let s = FieldState::sample(&d, |_, _| 0.0, |_, _| (1.0, 0.0));
        assert!((total_energy(&s, &d, &c) - 0.5).abs() < 1e-12);
        assert_eq!(
            staggered_energy(&s.dz, (&s.bx, &s.by), (&s.bx, &s.by), &d, &c),
            total_energy(&s, &d, &c)
        );
    }

    #[test]
    fn annulus_b0_energy() {
        let c = PhysicalConstants::unit();
        let d = build_domain(DomainKind::Annulus, 256).unwrap();
        let s = FieldState::sample(&d, |_, _| 0.0, |x, y| annulus_b0(x, y).unwrap());
        let want = PI * 2f64.ln() / 2.0;
        let got = total_energy(&s, &d, &c);
        assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
    }

    #[test]
    fn snapshot_has_header_and_one_row_per_node() {
        let d = unit(8);
        let s = FieldState::sample(&d, |x, _| x, |_, y| (y, 1.0));
        let mut buf = Vec::new();
        write_field_snapshot(&mut buf, &s, &ThetaField::zeros(&d), &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,Dz,Bx_interp,By_interp,theta");
        assert_eq!(lines.len(), 1 + d.node_count());
        // By = 1 everywhere interpolates to 1
        let row: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[4], 1.0);
    }
}
