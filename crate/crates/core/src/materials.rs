//! Material constants, the conductivity law `sigma(theta)` and the charge
//! source `Gz(x, y, t)`.

use crate::domain::Domain;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Dielectric constant, magnetic permeability and thermal diffusivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl PhysicalConstants {
    pub fn new(eps: f64, mu: f64, kappa: f64) -> Result<Self> {
        for (key, v) in [
            ("constants.eps", eps),
            ("constants.mu", mu),
            ("constants.kappa", kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(PhysicalConstants { eps, mu, kappa })
    }

    pub fn unit() -> Self {
        PhysicalConstants {
            eps: 1.0,
            mu: 1.0,
            kappa: 1.0,
        }
    }

    /// Wave speed `1 / sqrt(eps mu)`.
    pub fn wave_speed(&self) -> f64 {
        1.0 / (self.eps * self.mu).sqrt()
    }
}

/// Temperature dependence of the electrical conductivity. Laws are
/// position-independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConductivityLaw {
    Constant(f64),
    /// `clamp(a + b xi, lo, hi)`.
    AffineClamped { a: f64, b: f64, lo: f64, hi: f64 },
    /// Piecewise linear through `(xi[k], sigma[k])`, constant beyond the ends.
    Tabulated { xi: Vec<f64>, sigma: Vec<f64> },
}

impl ConductivityLaw {
    pub fn tabulated(xi: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if xi.len() < 2 || xi.len() != sigma.len() {
            return Err(Error::config(
                "conductivity.params",
                "a table needs at least two (xi, sigma) rows of equal length",
            ));
        }
        if xi.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(Error::config("conductivity.params", "table values must be finite"));
        }
        if let Some(w) = xi.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "conductivity.params",
                format!("xi must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        Ok(ConductivityLaw::Tabulated { xi, sigma })
    }

    /// Reads a two-column `xi,sigma` CSV. A non-numeric first row is taken
    /// as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let shown = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: shown.clone(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut xi = Vec::new();
        let mut sigma = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                path: shown.clone(),
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    path: shown,
                    message: format!("row {}: expected 2 columns, found {}", row + 1, rec.len()),
                });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    xi.push(a);
                    sigma.push(b);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        path: shown,
                        message: format!("row {}: not a number", row + 1),
                    })
                }
            }
        }
        Self::tabulated(xi, sigma)
    }

    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            ConductivityLaw::Constant(c) => *c,
            ConductivityLaw::AffineClamped { a, b, lo, hi } => (a + b * xi).clamp(*lo, *hi),
            ConductivityLaw::Tabulated { xi: xs, sigma } => {
                let last = xs.len() - 1;
                if xi <= xs[0] {
                    return sigma[0];
                }
                if xi >= xs[last] {
                    return sigma[last];
                }
                let k = xs.partition_point(|&v| v <= xi) - 1;
                let w = (xi - xs[k]) / (xs[k + 1] - xs[k]);
                sigma[k] + w * (sigma[k + 1] - sigma[k])
            }
        }
    }

    pub fn is_temperature_independent(&self) -> bool {
        match self {
            ConductivityLaw::Constant(_) => true,
            ConductivityLaw::AffineClamped { b, lo, hi, .. } => *b == 0.0 || lo == hi,
            ConductivityLaw::Tabulated { sigma, .. } => sigma.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

/// A conductivity law with its declared bounds `|sigma| <= sigma0` and
/// `|d sigma / d xi| <= sigma1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductivityModel {
    pub law: ConductivityLaw,
    pub sigma0: f64,
    pub sigma1: f64,
}

/// Sample count used by [`check_bounds`].
pub const BOUND_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub sigma0_ok: bool,
    pub sigma1_ok: bool,
    pub max_value: f64,
    pub max_value_xi: f64,
    pub max_slope: f64,
    pub max_slope_xi: f64,
}

impl ConductivityModel {
    pub fn constant(value: f64) -> Self {
        ConductivityModel {
            law: ConductivityLaw::Constant(value),
            sigma0: value.abs(),
            sigma1: 0.0,
        }
    }

    /// Samples `[-theta_max, theta_max]` and reports the largest value and
    /// finite-difference slope. For tables, the secant slope of every
    /// segment touching the range is included as well.
    pub fn check_bounds(&self, theta_max: f64) -> BoundReport {
        let m = BOUND_SAMPLES;
        let step = 2.0 * theta_max / (m - 1) as f64;
        let at = |k: usize| -theta_max + k as f64 * step;
        let mut max_value = 0.0_f64;
        let mut max_value_xi = at(0);
        let mut max_slope = 0.0_f64;
        let mut max_slope_xi = at(0);
        let mut prev = self.law.eval(at(0));
        for k in 0..m {
            let xi = at(k);
            let v = self.law.eval(xi);
            if v.abs() > max_value {
                max_value = v.abs();
                max_value_xi = xi;
            }
            if k > 0 && step > 0.0 {
                let s = (v - prev).abs() / step;
                if s > max_slope {
                    max_slope = s;
                    max_slope_xi = xi;
                }
            }
            prev = v;
        }
        if let ConductivityLaw::Tabulated { xi, sigma } = &self.law {
            for k in 0..xi.len() - 1 {
                if xi[k + 1] >= -theta_max && xi[k] <= theta_max {
                    let s = ((sigma[k + 1] - sigma[k]) / (xi[k + 1] - xi[k])).abs();
                    if s > max_slope {
                        max_slope = s;
                        max_slope_xi = xi[k];
                    }
                }
                for (x, v) in [(xi[k], sigma[k]), (xi[k + 1], sigma[k + 1])] {
                    if x.abs() <= theta_max && v.abs() > max_value {
                        max_value = v.abs();
                        max_value_xi = x;
                    }
                }
            }
        }
        BoundReport {
            sigma0_ok: max_value <= self.sigma0,
            sigma1_ok: max_slope <= self.sigma1 * (1.0 + 1e-6),
            max_value,
            max_value_xi,
            max_slope,
            max_slope_xi,
        }
    }

    /// Rejects the model if either declared bound fails on
    /// `[-theta_max, theta_max]`.
    pub fn validate_bounds(&self, theta_max: f64) -> Result<BoundReport> {
        if !(self.sigma0.is_finite() && self.sigma0 >= 0.0) {
            return Err(Error::config("conductivity.sigma0", "must be finite and >= 0"));
        }
        if !(self.sigma1.is_finite() && self.sigma1 >= 0.0) {
            return Err(Error::config("conductivity.sigma1", "must be finite and >= 0"));
        }
        let r = self.check_bounds(theta_max);
        if !r.sigma0_ok {
            return Err(Error::BoundViolation {
                xi: r.max_value_xi,
                message: format!("|sigma| = {} exceeds sigma0 = {}", r.max_value, self.sigma0),
            });
        }
        if !r.sigma1_ok {
            return Err(Error::BoundViolation {
                xi: r.max_slope_xi,
                message: format!("slope {} exceeds sigma1 = {}", r.max_slope, self.sigma1),
            });
        }
        Ok(r)
    }
}

/// Node-wise `sigma(theta)` on interior nodes, zero elsewhere.
pub fn sigma_field(model: &ConductivityModel, theta: &[f64], dom: &Domain) -> Result<Vec<f64>> {
    let mut out = vec![0.0; dom.node_count()];
    sigma_field_into(model, theta, dom, &mut out)?;
    Ok(out)
}

pub fn sigma_field_into(
    model: &ConductivityModel,
    theta: &[f64],
    dom: &Domain,
    out: &mut [f64],
) -> Result<()> {
    for (k, v) in out.iter_mut().enumerate() {
        if dom.interior[k] {
            let t = theta[k];
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    step: 0,
                    message: format!("temperature at node {k} is {t}"),
                });
            }
            *v = model.law.eval(t);
        } else {
            *v = 0.0;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeProfile {
    Constant { amplitude: f64 },
    Sine { amplitude: f64, omega: f64, phase: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { amplitude } => amplitude,
            TimeProfile::Sine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            TimeProfile::Constant { amplitude } => amplitude.abs(),
            TimeProfile::Sine { amplitude, .. } => amplitude.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpatialProfile {
    Uniform,
    Gaussian { x0: f64, y0: f64, width: f64 },
}

impl SpatialProfile {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            SpatialProfile::Uniform => 1.0,
            SpatialProfile::Gaussian { x0, y0, width } => {
                let r2 = (x - x0).powi(2) + (y - y0).powi(2);
                (-r2 / (width * width)).exp()
            }
        }
    }
}

/// Out-of-plane charge source `Gz(x, y, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceG {
    Zero,
    Separable {
        time: TimeProfile,
        space: SpatialProfile,
    },
}

impl SourceG {
    pub fn is_zero(&self) -> bool {
        matches!(self, SourceG::Zero)
    }

    /// Pre-samples the spatial factor on interior nodes.
    pub fn on_grid(&self, dom: &Domain) -> GridSource {
        match self {
            SourceG::Zero => GridSource {
                profile: None,
                time: TimeProfile::Constant { amplitude: 0.0 },
            },
            SourceG::Separable { time, space } => GridSource {
                profile: Some(dom.sample_interior(|x, y| space.eval(x, y))),
                time: *time,
            },
        }
    }
}

/// A separable source sampled on a particular grid.
#[derive(Debug, Clone)]
pub struct GridSource {
    profile: Option<Vec<f64>>,
    time: TimeProfile,
}

impl GridSource {
    pub fn zero() -> Self {
        GridSource {
            profile: None,
            time: TimeProfile::Constant { amplitude: 0.0 },
        }
    }

    /// `(time factor, spatial profile)` at time `t`, or `None` for no source.
    pub fn at(&self, t: f64) -> Option<(f64, &[f64])> {
        self.profile.as_deref().map(|p| (self.time.eval(t), p))
    }

    pub fn sample(&self, t: f64, n: usize) -> Vec<f64> {
        match self.at(t) {
            Some((s, p)) => p.iter().map(|v| s * v).collect(),
            None => vec![0.0; n],
        }
    }

    /// `sup_t |G(t)|^2` with the nodal quadrature.
    pub fn sup_norm_sq(&self, dom: &Domain) -> f64 {
        match &self.profile {
            Some(p) => self.time.sup().powi(2) * dom.node_dot(p, p),
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainKind};

    fn affine(lo: f64, hi: f64, sigma1: f64) -> ConductivityModel {
        ConductivityModel {
            law: ConductivityLaw::AffineClamped {
                a: 0.0,
                b: 1.0,
                lo,
                hi,
            },
            sigma0: hi,
            sigma1,
        }
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(PhysicalConstants::new(1.0, 1.0, 1.0).is_ok());
        let err = PhysicalConstants::new(1.0, 0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("constants.mu"));
        assert!(PhysicalConstants::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_field_examples() {
        let d = build_domain(DomainKind::unit_square(), 8).unwrap();
        let interior_values = |m: &ConductivityModel, theta: f64| {
            let th = vec![theta; d.node_count()];
            let s = sigma_field(m, &th, &d).unwrap();
            (0..d.node_count())
                .filter(|&k| d.interior[k])
                .map(|k| s[k])
                .collect::<Vec<_>>()
        };
        assert!(interior_values(&ConductivityModel::constant(2.0), 7.0)
            .iter()
            .all(|&v| v == 2.0));
        let m = affine(0.0, 5.0, 1.0);
        assert!(interior_values(&m, 3.0).iter().all(|&v| v == 3.0));
        // 0 + 1 * 9 lies above hi = 5
        let oracle = 5.0;
        assert!(interior_values(&m, 9.0).iter().all(|&v| v == oracle));

        let mut bad = vec![0.0; d.node_count()];
        bad[d.layout.node(4, 4)] = f64::NAN;
        assert!(sigma_field(&m, &bad, &d).is_err());
    }

    #[test]
    fn bound_validation() {
        let c = ConductivityModel {
            law: ConductivityLaw::Constant(2.0),
            sigma0: 2.0,
            sigma1: 0.0,
        };
        let r = c.validate_bounds(10.0).unwrap();
        assert!(r.sigma0_ok && r.sigma1_ok);

        let err = affine(0.0, 5.0, 0.5).validate_bounds(10.0).unwrap_err();
        assert!(matches!(err, Error::BoundViolation { .. }));
        assert!(affine(0.0, 5.0, 1.0).validate_bounds(10.0).is_ok());
    }

    #[test]
    fn jagged_table_rejected_by_secant_slope() {
        let xi: Vec<f64> = vec![0.0, 1.0, 1.001, 2.0, 3.0];
        let sigma: Vec<f64> = vec![1.0, 1.2, 1.5, 1.4, 1.3];
        // direct oracle: largest secant slope of the table
        let max_secant = xi
            .windows(2)
            .zip(sigma.windows(2))
            .map(|(x, s)| ((s[1] - s[0]) / (x[1] - x[0])).abs())
            .fold(0.0_f64, f64::max);
        assert!((max_secant - 300.0).abs() < 1e-6);
        let law = ConductivityLaw::tabulated(xi, sigma).unwrap();
        let declared = ConductivityModel {
            law: law.clone(),
            sigma0: 2.0,
            sigma1: 0.9 * max_secant,
        };
        assert!(matches!(
            declared.validate_bounds(5.0),
            Err(Error::BoundViolation { .. })
        ));
        let honest = ConductivityModel {
            law,
            sigma0: 2.0,
            sigma1: max_secant,
        };
        assert!(honest.validate_bounds(5.0).is_ok());
    }

    #[test]
    fn table_interpolates_and_extrapolates_flat() {
        let law = ConductivityLaw::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 0.0]).unwrap();
        assert_eq!(law.eval(-5.0), 1.0);
        assert_eq!(law.eval(0.5), 1.5);
        assert_eq!(law.eval(2.0), 1.0);
        assert_eq!(law.eval(10.0), 0.0);
        assert!(ConductivityLaw::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn negative_conductivity_is_allowed() {
        let m = ConductivityModel {
            law: ConductivityLaw::Constant(-0.5),
            sigma0: 0.5,
            sigma1: 0.0,
        };
        assert!(m.validate_bounds(1.0).is_ok());
    }

    #[test]
    fn table_from_csv_with_header() {
        let dir = std::env::temp_dir().join(format!("maxheat-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sigma.csv");
        std::fs::write(&path, "xi,sigma\n0,1\n1,2\n2,2.5\n").unwrap();
        let law = ConductivityLaw::from_csv(&path).unwrap();
        assert_eq!(law.eval(1.5), 2.25);
        std::fs::write(&path, "0,1\n0,2\n").unwrap();
        assert!(ConductivityLaw::from_csv(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest::proptest! {
        #[test]
        fn clamped_law_stays_in_range(a in -5.0..5.0f64, b in -5.0..5.0f64,
                                      lo in -3.0..0.0f64, width in 0.0..6.0f64,
                                      xi in -1e3..1e3f64) {
            let hi = lo + width;
            let v = ConductivityLaw::AffineClamped { a, b, lo, hi }.eval(xi);
            proptest::prop_assert!(v >= lo && v <= hi);
        }
    }
}
