//! JSON scene descriptions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{CappedBall, CurvatureCap, Cubic, Domain, RoundedPolygon, Shape};
use crate::grid::{Grid, GridField, SampledFunction};
use crate::medium::{IncidentField, MediumScene};
use crate::point::Point;
use crate::source::{Intensity, SourceScene};
use crate::transmission::RadialITP;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub dimension: usize,
    pub wavenumber: f64,
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incident: Option<IncidentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    Star { center: Vec<f64>, cos: Vec<f64>, #[serde(default)] sin: Vec<f64> },
    Polygon { vertices: Vec<[f64; 2]>, rounding: f64 },
    CappedBall { center_height: f64, radius: f64, cap: CapSpec },
    Union { components: Vec<DomainSpec>, #[serde(default)] separation: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L", default = "one")]
    pub l: f64,
    #[serde(rename = "M", default = "two")]
    pub m: f64,
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default)]
    pub cubic: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

fn herglotz_default() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64, #[serde(default)] imag: f64 },
    Expression { expr: String, #[serde(default)] imag: Option<String> },
    /// Node values on a regular grid, interpolated by cubics.
    Grid {
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        values: Vec<f64>,
        #[serde(default)]
        imag: Vec<f64>,
        #[serde(default = "half")]
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentSpec {
    PlaneWave { direction: Vec<f64> },
    /// Density given as a field of the direction vector.
    Herglotz { #[serde(default = "herglotz_default")] directions: usize, density: FieldSpec },
    Cgo { rho_re: Vec<f64>, rho_im: Vec<f64> },
}

fn point(v: &[f64], dim: usize, what: &str) -> Result<Point> {
    if v.len() != dim {
        return Err(Error::Config(format!("{what} needs {dim} coordinates, got {}", v.len())));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(v);
    Ok(p)
}

impl DomainSpec {
    fn shapes(&self, dim: usize) -> Result<Vec<Shape>> {
        Ok(match self {
            DomainSpec::Ball { center, radius } => vec![Shape::Ball { center: point(center, dim, "ball centre")?, radius: *radius }],
            DomainSpec::Box { lo, hi } => vec![Shape::Box { lo: point(lo, dim, "box corner")?, hi: point(hi, dim, "box corner")? }],
            DomainSpec::Annulus { center, inner, outer } => {
                vec![Shape::Annulus { center: point(center, dim, "annulus centre")?, inner: *inner, outer: *outer }]
            }
            DomainSpec::Star { center, cos, sin } => vec![Shape::StarPolar { center: point(center, dim, "star centre")?, cos: cos.clone(), sin: sin.clone() }],
            DomainSpec::Polygon { vertices, rounding } => vec![Shape::RoundedPolygon(RoundedPolygon { vertices: vertices.clone(), radius: *rounding })],
            DomainSpec::CappedBall { center_height, radius, cap } => {
                let cubic = match &cap.cubic {
                    Some(c) => Cubic { coeffs: c.clone() },
                    None => Cubic::zero(dim),
                };
                let cap = CurvatureCap::new(dim, cap.k, cubic, cap.l, cap.m, cap.delta)?;
                vec![Shape::CappedBall(CappedBall::new(cap, *center_height, *radius)?)]
            }
            DomainSpec::Union { components, .. } => {
                let mut all = vec![];
                for c in components {
                    all.extend(c.shapes(dim)?);
                }
                all
            }
        })
    }

    pub fn build(&self, dim: usize) -> Result<Domain> {
        let domain = Domain::new(dim, self.shapes(dim)?)?;
        match self {
            DomainSpec::Union { separation: Some(gap), .. } => domain.with_separation(*gap),
            _ => Ok(domain),
        }
    }
}

impl FieldSpec {
    pub fn build(&self, dim: usize) -> Result<Intensity> {
        match self {
            FieldSpec::Constant { value, imag } => {
                let c = C::new(*value, *imag);
                Ok(Intensity::function(move |_| c))
            }
            FieldSpec::Expression { expr, imag } => {
                let re = Expr::parse(expr, dim)?;
                let im = imag.as_deref().map(|s| Expr::parse(s, dim)).transpose()?;
                Ok(Intensity::function(move |x| C::new(re.eval(x), im.as_ref().map_or(0.0, |e| e.eval(x)))))
            }
            FieldSpec::Grid { origin, spacing, shape, values, imag, alpha } => {
                if shape.len() != dim {
                    return Err(Error::Config(format!("grid shape needs {dim} entries")));
                }
                let mut s = [1; 3];
                s[..dim].copy_from_slice(shape);
                let grid = Grid::new(dim, point(origin, dim, "grid origin")?, *spacing, s)?;
                if values.len() != grid.len() || !(imag.is_empty() || imag.len() == grid.len()) {
                    return Err(Error::Config(format!("grid needs {} values", grid.len())));
                }
                let vals = values.iter().enumerate().map(|(i, v)| C::new(*v, imag.get(i).copied().unwrap_or(0.0))).collect();
                let n = grid.len();
                let field = GridField { grid, values: vals };
                Ok(Intensity::Sampled(SampledFunction::new(field, vec![true; n], *alpha)?))
            }
        }
    }
}

impl IncidentSpec {
    pub fn build(&self, dim: usize) -> Result<IncidentField> {
        match self {
            IncidentSpec::PlaneWave { direction } => IncidentField::plane_wave(point(direction, dim, "direction")?),
            IncidentSpec::Herglotz { directions, density } => {
                let g = density.build(dim)?;
                IncidentField::herglotz(dim, *directions, |d| g.eval(d))
            }
            IncidentSpec::Cgo { rho_re, rho_im } => {
                let (re, im) = (point(rho_re, dim, "rho_re")?, point(rho_im, dim, "rho_im")?);
                let rho = [C::new(re[0], im[0]), C::new(re[1], im[1]), C::new(re[2], im[2])];
                let dot: C = rho.iter().map(|z| z * z).sum();
                if dot.norm() > 1e-10 * rho.iter().map(|z| z.norm_sqr()).sum::<f64>() {
                    return Err(Error::Config("CGO vector must satisfy rho . rho = 0".into()));
                }
                Ok(IncidentField::Cgo { rho })
            }
        }
    }
}

impl SceneSpec {
    pub fn from_json(s: &str) -> Result<SceneSpec> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("scene: {e}")))
    }

    fn check_dim(&self) -> Result<()> {
        if !(self.dimension == 2 || self.dimension == 3) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        Ok(())
    }

    /// Source scene; a missing intensity is the zero source.
    pub fn source_scene(&self) -> Result<SourceScene> {
        self.check_dim()?;
        let phi = match &self.intensity {
            Some(f) => f.build(self.dimension)?,
            None => Intensity::constant(0.0),
        };
        SourceScene::new(self.domain.build(self.dimension)?, phi, self.wavenumber)
    }

    /// Medium scene; the incident wave defaults to a plane wave along `x1`.
    pub fn medium_scene(&self) -> Result<MediumScene> {
        self.check_dim()?;
        let contrast = self.contrast.as_ref().ok_or_else(|| Error::Config("medium scene needs a contrast".into()))?.build(self.dimension)?;
        let incident = match &self.incident {
            Some(i) => i.build(self.dimension)?,
            None => IncidentField::plane_wave([1.0, 0.0, 0.0])?,
        };
        MediumScene::new(self.domain.build(self.dimension)?, contrast, self.wavenumber, incident)
    }
}

/// Transmission problem description: `{radius, contrast, dimension}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItpSpec {
    pub radius: f64,
    pub contrast: f64,
    #[serde(default = "default_dim")]
    pub dimension: usize,
}

fn default_dim() -> usize {
    2
}

impl ItpSpec {
    pub fn from_json(s: &str) -> Result<ItpSpec> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("transmission config: {e}")))
    }

    pub fn build(&self) -> Result<RadialITP> {
        RadialITP::new(self.radius, self.contrast, self.dimension, 0)
    }
}
