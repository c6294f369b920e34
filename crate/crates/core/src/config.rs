//! JSON configuration files for groups, submanifolds and decay geometries.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_elliptic, build_rotation, build_translation, BallAutomorphism};
use crate::poincare::{
    klein_rep, triangle23_spec, GroupSpec, ThirdVertex, UnitaryRep, HYPERIDEAL_LENGTH,
};
use crate::submanifold::{parallel_segments, ParamSubmanifold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// `params = [theta]`, rotation about the origin with `J = e^{i theta}`.
    Rotation,
    /// `params = [re, im]`, the boost taking 0 to `re + i im`.
    Translation,
    /// `params = [re, im, theta]`, rotation by `theta` about `re + i im`.
    Elliptic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GeneratorConfig {
    pub fn build(&self) -> Result<BallAutomorphism> {
        let want = match self.kind {
            GeneratorKind::Rotation => 1,
            GeneratorKind::Translation => 2,
            GeneratorKind::Elliptic => 3,
        };
        if self.params.len() != want {
            return Err(Error::Config(format!(
                "{:?} generator takes {want} params, got {}",
                self.kind,
                self.params.len()
            )));
        }
        let p = &self.params;
        match self.kind {
            GeneratorKind::Rotation => Ok(build_rotation(p[0])),
            GeneratorKind::Translation => build_translation(Complex64::new(p[0], p[1])),
            GeneratorKind::Elliptic => build_elliptic(Complex64::new(p[0], p[1]), p[2]),
        }
    }
}

/// Each image is `2 m^2` reals, row-major, `re, im` interleaved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationConfig {
    pub m: usize,
    pub generator_images: Vec<Vec<f64>>,
}

impl RepresentationConfig {
    pub fn from_rep(rep: &UnitaryRep) -> Self {
        let m = rep.m;
        let generator_images = rep
            .generator_images
            .iter()
            .map(|u| {
                let mut v = Vec::with_capacity(2 * m * m);
                for i in 0..m {
                    for j in 0..m {
                        v.push(u[(i, j)].re);
                        v.push(u[(i, j)].im);
                    }
                }
                v
            })
            .collect();
        Self { m, generator_images }
    }

    pub fn build(&self) -> Result<UnitaryRep> {
        let m = self.m;
        let mut images = Vec::with_capacity(self.generator_images.len());
        for (i, v) in self.generator_images.iter().enumerate() {
            if v.len() != 2 * m * m {
                return Err(Error::Config(format!(
                    "image {i} has {} reals, expected {}",
                    v.len(),
                    2 * m * m
                )));
            }
            images.push(DMatrix::from_fn(m, m, |r, c| {
                let o = 2 * (r * m + c);
                Complex64::new(v[o], v[o + 1])
            }));
        }
        UnitaryRep::new(m, images)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub generators: Vec<GeneratorConfig>,
    /// Trivial one-dimensional representation when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepresentationConfig>,
}

pub const BUILTIN_GROUPS: [&str; 6] = [
    "cyclic3",
    "cyclic4",
    "cyclic6",
    "triangle237",
    "triangle237_klein",
    "triangle23_hyperideal",
];

impl GroupConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group config serializes")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let rotation = |order: u32| GeneratorConfig {
            kind: GeneratorKind::Rotation,
            params: vec![2.0 * PI / order as f64],
            name: Some(format!("r{order}")),
        };
        let triangle = |third: ThirdVertex| -> Result<Vec<GeneratorConfig>> {
            let spec = triangle23_spec(third)?;
            let b = half_turn_center(&spec.generators[1]);
            Ok(vec![
                GeneratorConfig {
                    kind: GeneratorKind::Rotation,
                    params: vec![2.0 * PI / 3.0],
                    name: Some("a".into()),
                },
                GeneratorConfig {
                    kind: GeneratorKind::Elliptic,
                    params: vec![b, 0.0, PI],
                    name: Some("b".into()),
                },
            ])
        };
        let cfg = match name {
            "cyclic3" => Self::plain(vec![rotation(3)]),
            "cyclic4" => Self::plain(vec![rotation(4)]),
            "cyclic6" => Self::plain(vec![rotation(6)]),
            "triangle237" => Self::plain(triangle(ThirdVertex::Elliptic(7))?),
            "triangle237_klein" => Self {
                generators: triangle(ThirdVertex::Elliptic(7))?,
                representation: Some(RepresentationConfig::from_rep(&klein_rep())),
            },
            "triangle23_hyperideal" => Self::plain(triangle(ThirdVertex::Hyperbolic(HYPERIDEAL_LENGTH))?),
            _ => {
                return Err(Error::Config(format!(
                    "unknown group '{name}', expected a file or one of {}",
                    BUILTIN_GROUPS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    /// A built-in name or a path to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if BUILTIN_GROUPS.contains(&name_or_path) {
            return Self::builtin(name_or_path);
        }
        Self::from_json(&read(name_or_path)?)
    }

    fn plain(generators: Vec<GeneratorConfig>) -> Self {
        Self {
            generators,
            representation: None,
        }
    }

    pub fn build(&self) -> Result<(GroupSpec, UnitaryRep)> {
        let gens = self
            .generators
            .iter()
            .map(GeneratorConfig::build)
            .collect::<Result<Vec<_>>>()?;
        let names = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| g.name.clone().unwrap_or_else(|| format!("g{}", i + 1)))
            .collect();
        let spec = GroupSpec::new(gens, names)?;
        let rep = match &self.representation {
            Some(r) => r.build()?,
            None => UnitaryRep::trivial(self.generators.len()),
        };
        if rep.generator_images.len() != self.generators.len() {
            return Err(Error::Config(format!(
                "{} generator images for {} generators",
                rep.generator_images.len(),
                self.generators.len()
            )));
        }
        Ok((spec, rep))
    }
}

/// Fixed point of a half-turn on the real axis.
fn half_turn_center(half_turn: &BallAutomorphism) -> f64 {
    // the half-turn about q sends 0 to 2q / (1 + q^2)
    let m = half_turn.matrix();
    let image = (m[(0, 1)] / m[(1, 1)]).re;
    image / (1.0 + (1.0 - image * image).sqrt())
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| Error::Config(format!("{path}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmanifoldKind {
    Segment,
    Circle,
    Disc,
    CrHemiball,
    AffineSegment,
    PlanarPatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmanifoldConfig {
    #[serde(rename = "type")]
    pub kind: SubmanifoldKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Segment direction angle `e^{i phi}` in the first coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Affine segment base point, `2n` reals `re, im` interleaved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub param_box: Option<Vec<(f64, f64)>>,
    /// Positive factor multiplying the chart's natural density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
}

fn complex_vec(name: &str, v: &Option<Vec<f64>>) -> Result<Vec<Complex64>> {
    let v = v.as_ref().ok_or_else(|| Error::Config(format!("missing '{name}'")))?;
    if v.len() % 2 != 0 {
        return Err(Error::Config(format!("'{name}' needs an even number of reals")));
    }
    Ok(v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

impl SubmanifoldConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<ParamSubmanifold> {
        let alpha = || self.alpha.ok_or_else(|| Error::Config("missing 'alpha'".into()));
        let mut s = match self.kind {
            SubmanifoldKind::Segment => ParamSubmanifold::segment(self.n, alpha()?, self.phi.unwrap_or(0.0))?,
            SubmanifoldKind::Circle => ParamSubmanifold::circle(self.n, alpha()?)?,
            SubmanifoldKind::Disc => ParamSubmanifold::disc(self.n, alpha()?)?,
            SubmanifoldKind::CrHemiball => ParamSubmanifold::cr_hemiball(self.n, alpha()?)?,
            SubmanifoldKind::AffineSegment => {
                let base = complex_vec("base", &self.base)?;
                let direction = complex_vec("direction", &self.direction)?;
                if base.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        got: base.len(),
                    });
                }
                let range = self.range.ok_or_else(|| Error::Config("missing 'range'".into()))?;
                ParamSubmanifold::affine_segment(base, direction, range)?
            }
            SubmanifoldKind::PlanarPatch => {
                let h = self
                    .half_width
                    .ok_or_else(|| Error::Config("missing 'half_width'".into()))?;
                ParamSubmanifold::planar_patch(self.n, h)?
            }
        };
        if let Some(b) = &self.param_box {
            s = s.with_box(b.clone())?;
        }
        if let Some(d) = self.density {
            s = s.with_density_scale(d)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub x: SubmanifoldConfig,
    pub y: SubmanifoldConfig,
}

pub const BUILTIN_DECAY: [&str; 1] = ["parallel"];

/// Offset and half length of the built-in parallel segments.
pub const PARALLEL_OFFSET: f64 = 0.3;
pub const PARALLEL_HALF_LENGTH: f64 = 0.4;

impl DecayConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(name_or_path: &str) -> Result<Self> {
        if name_or_path == "parallel" {
            let seg = |x: f64| SubmanifoldConfig {
                kind: SubmanifoldKind::AffineSegment,
                n: 1,
                alpha: None,
                phi: None,
                base: Some(vec![x, 0.0]),
                direction: Some(vec![0.0, 1.0]),
                range: Some((-PARALLEL_HALF_LENGTH, PARALLEL_HALF_LENGTH)),
                half_width: None,
                param_box: None,
                density: None,
            };
            return Ok(Self {
                x: seg(-PARALLEL_OFFSET),
                y: seg(PARALLEL_OFFSET),
            });
        }
        Self::from_json(&read(name_or_path)?)
    }

    pub fn build(&self) -> Result<(ParamSubmanifold, ParamSubmanifold)> {
        let x = self.x.build()?;
        let y = self.y.build()?;
        if x.ambient_dim() != y.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: x.ambient_dim(),
                got: y.ambient_dim(),
            });
        }
        Ok((x, y))
    }
}

/// The built-in parallel pair, built directly.
pub fn parallel_pair() -> Result<(ParamSubmanifold, ParamSubmanifold)> {
    parallel_segments(PARALLEL_OFFSET, PARALLEL_HALF_LENGTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::triangle237_spec;

    #[test]
    fn builtin_groups_build() {
        for name in BUILTIN_GROUPS {
            let (spec, rep) = GroupConfig::builtin(name).unwrap().build().unwrap();
            assert_eq!(spec.generators.len(), rep.generator_images.len());
        }
    }

    #[test]
    fn triangle_round_trips() {
        let (spec, _) = GroupConfig::builtin("triangle237").unwrap().build().unwrap();
        let direct = triangle237_spec().unwrap();
        for (a, b) in spec.generators.iter().zip(&direct.generators) {
            let d = (a.matrix() - b.matrix()).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = GroupConfig::builtin("triangle237_klein").unwrap();
        let back = GroupConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
        let (_, rep) = back.build().unwrap();
        assert_eq!(rep.m, 3);
    }

    #[test]
    fn bad_configs() {
        assert!(GroupConfig::from_json("{\"generators\": [{\"kind\": \"rotation\", \"params\": []}]}")
            .unwrap()
            .build()
            .is_err());
        assert!(GroupConfig::from_json("{\"generators\": [{\"kind\": \"spiral\", \"params\": [1]}]}").is_err());
        let bad_rep = "{\"generators\": [{\"kind\": \"rotation\", \"params\": [1]}],
            \"representation\": {\"m\": 1, \"generator_images\": [[2, 0]]}}";
        assert!(GroupConfig::from_json(bad_rep).unwrap().build().is_err());
        assert!(GroupConfig::load("no_such_group").is_err());
    }

    #[test]
    fn submanifold_config() {
        let s = SubmanifoldConfig::from_json("{\"type\": \"segment\", \"n\": 2, \"alpha\": 0.5, \"density\": 2.0}")
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(s.q(), 1);
        assert!((s.density(&[0.1]) - 2.0).abs() < 1e-15);
        assert!(SubmanifoldConfig::from_json("{\"type\": \"disc\", \"n\": 2}").unwrap().build().is_err());
    }

    #[test]
    fn parallel_builtin_matches() {
        let (x, y) = DecayConfig::load("parallel").unwrap().build().unwrap();
        let (x0, y0) = parallel_pair().unwrap();
        assert_eq!(x, x0);
        assert_eq!(y, y0);
    }
}
