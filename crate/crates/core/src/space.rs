//! Bounded, mixed continuous/integer design space for the nanohelix system.
//!
//! Every other subsystem works in terms of [`ParameterSpace`] and
//! [`ParameterVector`]: the surrogate validates inputs against the space, the
//! optimizer partitions it, and the analysis toolkit measures distances in it.
//! Values are plain `f64` throughout; integral dimensions hold exact integers.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("invalid bounds for `{name}`: [{lower}, {upper}]")]
    InvalidBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("integral dimension `{0}` contains no integer")]
    EmptyIntegerInterval(String),
    #[error("duplicate dimension name `{0}`")]
    DuplicateDimension(String),
    #[error("parameter space must have at least one dimension")]
    EmptySpace,
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("`{dim}` = {value} is outside [{lower}, {upper}]")]
    OutOfBounds {
        dim: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("`{dim}` = {value} must be an integer")]
    NonIntegral { dim: String, value: f64 },
    #[error("vector is missing dimension `{0}`")]
    MissingDimension(String),
    #[error("vectors do not share dimension `{0}`")]
    DimensionMismatch(String),
}

/// One bounded dimension. `integral` dims only admit integer values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integral: bool,
}

impl ParameterDim {
    pub fn continuous(name: &str, lower: f64, upper: f64) -> Result<Self, SpaceError> {
        Self::build(name, lower, upper, false)
    }

    pub fn integral(name: &str, lower: f64, upper: f64) -> Result<Self, SpaceError> {
        Self::build(name, lower, upper, true)
    }

    fn build(name: &str, lower: f64, upper: f64, integral: bool) -> Result<Self, SpaceError> {
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(SpaceError::InvalidBounds {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        if integral && lower.ceil() > upper.floor() {
            return Err(SpaceError::EmptyIntegerInterval(name.to_string()));
        }
        Ok(Self {
            name: name.to_string(),
            lower,
            upper,
            integral,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Fraction of the dim's range covered by `[lo, hi]`.
    pub fn normalized_width(&self, lo: f64, hi: f64) -> f64 {
        (hi - lo) / self.width()
    }

    fn check(&self, value: f64) -> Result<(), SpaceError> {
        if !value.is_finite() || value < self.lower || value > self.upper {
            return Err(SpaceError::OutOfBounds {
                dim: self.name.clone(),
                value,
                lower: self.lower,
                upper: self.upper,
            });
        }
        if self.integral && value.fract() != 0.0 {
            return Err(SpaceError::NonIntegral {
                dim: self.name.clone(),
                value,
            });
        }
        Ok(())
    }
}

/// Ordered list of uniquely named dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    dims: Vec<ParameterDim>,
}

impl ParameterSpace {
    pub fn new(dims: Vec<ParameterDim>) -> Result<Self, SpaceError> {
        if dims.is_empty() {
            return Err(SpaceError::EmptySpace);
        }
        for (i, dim) in dims.iter().enumerate() {
            if dims[..i].iter().any(|d| d.name == dim.name) {
                return Err(SpaceError::DuplicateDimension(dim.name.clone()));
            }
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[ParameterDim] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, name: &str) -> Option<&ParameterDim> {
        self.dims.iter().find(|d| d.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.dim(name).is_some()
    }

    /// Checks every entry of `vec`: known name, within bounds, integral where
    /// required. Partial vectors are fine; use [`Self::require_complete`] when
    /// all dims must be present.
    pub fn validate(&self, vec: &ParameterVector) -> Result<(), SpaceError> {
        for (name, &value) in vec.iter() {
            let dim = self
                .dim(name)
                .ok_or_else(|| SpaceError::UnknownDimension(name.clone()))?;
            dim.check(value)?;
        }
        Ok(())
    }

    /// `validate` plus a presence check for every dimension of the space.
    pub fn require_complete(&self, vec: &ParameterVector) -> Result<(), SpaceError> {
        self.validate(vec)?;
        for dim in &self.dims {
            if vec.get(&dim.name).is_none() {
                return Err(SpaceError::MissingDimension(dim.name.clone()));
            }
        }
        Ok(())
    }

    /// Clips each entry into its bounds; integral dims are rounded to the
    /// nearest integer (ties half-up) before clipping. The result validates.
    pub fn clamp(&self, vec: &ParameterVector) -> Result<ParameterVector, SpaceError> {
        let mut out = BTreeMap::new();
        for (name, &value) in vec.iter() {
            let dim = self
                .dim(name)
                .ok_or_else(|| SpaceError::UnknownDimension(name.clone()))?;
            let mut v = if dim.integral { round_half_up(value) } else { value };
            v = v.clamp(dim.lower, dim.upper);
            if dim.integral {
                // clipping to a fractional bound must still land on an integer
                v = v.clamp(dim.lower.ceil(), dim.upper.floor());
            }
            out.insert(name.clone(), v);
        }
        Ok(ParameterVector { entries: out })
    }

    /// One uniform draw per dimension; integral dims are uniform over their
    /// integer lattice. Identical seeds give identical output.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterVector {
        let mut entries = BTreeMap::new();
        for dim in &self.dims {
            entries.insert(dim.name.clone(), sample_dim(rng, dim, dim.lower, dim.upper));
        }
        ParameterVector { entries }
    }

    /// Midpoint of every dim, integral dims rounded half-up onto the lattice.
    pub fn midpoints(&self) -> ParameterVector {
        let mut entries = BTreeMap::new();
        for dim in &self.dims {
            let mid = 0.5 * (dim.lower + dim.upper);
            let v = if dim.integral {
                round_half_up(mid).clamp(dim.lower.ceil(), dim.upper.floor())
            } else {
                mid
            };
            entries.insert(dim.name.clone(), v);
        }
        ParameterVector { entries }
    }
}

/// Uniform draw within `[lo, hi]` of `dim` (integer lattice for integral dims).
pub(crate) fn sample_dim<R: Rng + ?Sized>(rng: &mut R, dim: &ParameterDim, lo: f64, hi: f64) -> f64 {
    if dim.integral {
        let lo_i = lo.ceil() as i64;
        let hi_i = hi.floor() as i64;
        rng.random_range(lo_i..=hi_i) as f64
    } else if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Named point of the design space. Serializes as a flat `name -> number`
/// JSON object (the wire form used by the virtual lab and run logs).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector {
    entries: BTreeMap<String, f64>,
}

impl ParameterVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self {
            entries: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.entries.insert(name.to_string(), value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.entries.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    /// Entries of `other` written over a copy of `self`.
    pub fn merged_with(&self, other: &ParameterVector) -> ParameterVector {
        let mut entries = self.entries.clone();
        for (k, v) in other.iter() {
            entries.insert(k.clone(), *v);
        }
        ParameterVector { entries }
    }
}

/// Euclidean norm of raw coordinate differences. Both vectors must carry
/// exactly the same dimension set.
pub fn distance(a: &ParameterVector, b: &ParameterVector) -> Result<f64, SpaceError> {
    for name in a.names() {
        if b.get(name).is_none() {
            return Err(SpaceError::DimensionMismatch(name.to_string()));
        }
    }
    for name in b.names() {
        if a.get(name).is_none() {
            return Err(SpaceError::DimensionMismatch(name.to_string()));
        }
    }
    let sum: f64 = a
        .iter()
        .map(|(name, &va)| {
            let vb = b.get(name).expect("checked above");
            (va - vb) * (va - vb)
        })
        .sum();
    Ok(sum.sqrt())
}

/// The nine-dimensional nanohelix design space, bounds digit-for-digit.
pub fn default_nanohelix_space() -> ParameterSpace {
    ParameterSpace::new(vec![
        ParameterDim::continuous("angle", 0.123160654, 1.009814211).unwrap(),
        ParameterDim::continuous("curl", 0.628318531, 8.078381109).unwrap(),
        ParameterDim::continuous("fiber_radius", 20.0, 60.0).unwrap(),
        ParameterDim::continuous("height", 43.32551229, 954.9296586).unwrap(),
        ParameterDim::continuous("helix_radius", 20.0, 90.0).unwrap(),
        ParameterDim::integral("n_turns", 3.0, 10.0).unwrap(),
        ParameterDim::continuous("pitch", 60.0, 200.0).unwrap(),
        ParameterDim::continuous("total_fiber_length", 303.7757835, 1127.781297).unwrap(),
        ParameterDim::continuous("total_length", 300.0, 650.0).unwrap(),
    ])
    .expect("static dims are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn midpoint_vector(space: &ParameterSpace) -> ParameterVector {
        space.midpoints()
    }

    #[test]
    fn nanohelix_space_has_expected_bounds() {
        let space = default_nanohelix_space();
        assert_eq!(space.len(), 9);
        let hr = space.dim("helix_radius").unwrap();
        assert_eq!((hr.lower, hr.upper), (20.0, 90.0));
        let angle = space.dim("angle").unwrap();
        assert_eq!(angle.lower, 0.123160654);
        assert_eq!(angle.upper, 1.009814211);
        let curl = space.dim("curl").unwrap();
        assert_eq!((curl.lower, curl.upper), (0.628318531, 8.078381109));
        let height = space.dim("height").unwrap();
        assert_eq!((height.lower, height.upper), (43.32551229, 954.9296586));
        let tfl = space.dim("total_fiber_length").unwrap();
        assert_eq!((tfl.lower, tfl.upper), (303.7757835, 1127.781297));
        let tl = space.dim("total_length").unwrap();
        assert_eq!((tl.lower, tl.upper), (300.0, 650.0));
        let pitch = space.dim("pitch").unwrap();
        assert_eq!((pitch.lower, pitch.upper), (60.0, 200.0));
        let fr = space.dim("fiber_radius").unwrap();
        assert_eq!((fr.lower, fr.upper), (20.0, 60.0));

        let integrals: Vec<_> = space.dims().iter().filter(|d| d.integral).collect();
        assert_eq!(integrals.len(), 1);
        assert_eq!(integrals[0].name, "n_turns");
        assert_eq!((integrals[0].lower, integrals[0].upper), (3.0, 10.0));
    }

    #[test]
    fn validate_accepts_in_bounds_vector() {
        let space = default_nanohelix_space();
        let mut vec = midpoint_vector(&space);
        vec.set("helix_radius", 55.0);
        let before = vec.clone();
        assert!(space.validate(&vec).is_ok());
        assert_eq!(vec, before);
    }

    #[test]
    fn validate_rejects_out_of_bounds() {
        let space = default_nanohelix_space();
        let vec = ParameterVector::from_pairs([("helix_radius", 150.0)]);
        match space.validate(&vec) {
            Err(SpaceError::OutOfBounds { dim, value, .. }) => {
                assert_eq!(dim, "helix_radius");
                assert_eq!(value, 150.0);
            }
            other => panic!("expected OutOfBounds, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_non_integral_turns() {
        let space = default_nanohelix_space();
        let vec = ParameterVector::from_pairs([("n_turns", 4.5)]);
        assert!(matches!(
            space.validate(&vec),
            Err(SpaceError::NonIntegral { .. })
        ));
    }

    #[test]
    fn validate_rejects_unknown_dimension() {
        let space = default_nanohelix_space();
        let vec = ParameterVector::from_pairs([("twist", 1.0)]);
        assert_eq!(
            space.validate(&vec),
            Err(SpaceError::UnknownDimension("twist".into()))
        );
    }

    #[test]
    fn validate_rejects_non_finite() {
        let space = default_nanohelix_space();
        let vec = ParameterVector::from_pairs([("helix_radius", f64::NAN)]);
        assert!(matches!(
            space.validate(&vec),
            Err(SpaceError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn clamp_clips_and_rounds() {
        let space = default_nanohelix_space();
        let clamped = space
            .clamp(&ParameterVector::from_pairs([("helix_radius", 150.0)]))
            .unwrap();
        assert_eq!(clamped.get("helix_radius"), Some(90.0));

        let clamped = space
            .clamp(&ParameterVector::from_pairs([("n_turns", 4.4)]))
            .unwrap();
        assert_eq!(clamped.get("n_turns"), Some(4.0));

        // half-up tie
        let clamped = space
            .clamp(&ParameterVector::from_pairs([("n_turns", 4.5)]))
            .unwrap();
        assert_eq!(clamped.get("n_turns"), Some(5.0));
    }

    #[test]
    fn clamp_is_identity_in_bounds() {
        let space = default_nanohelix_space();
        let vec = midpoint_vector(&space);
        assert_eq!(space.clamp(&vec).unwrap(), vec);
    }

    #[test]
    fn sample_uniform_is_seed_deterministic() {
        let space = default_nanohelix_space();
        let a = space.sample_uniform(&mut ChaCha8Rng::seed_from_u64(7));
        let b = space.sample_uniform(&mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert!(space.require_complete(&a).is_ok());
    }

    #[test]
    fn n_turns_sampling_covers_lattice_uniformly() {
        let space = default_nanohelix_space();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 8];
        let n = 10_000;
        for _ in 0..n {
            let v = space.sample_uniform(&mut rng);
            let turns = v.get("n_turns").unwrap();
            assert_eq!(turns.fract(), 0.0);
            let idx = turns as usize - 3;
            counts[idx] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert!(
                (freq - 0.125).abs() <= 0.02,
                "n_turns={} frequency {freq} outside 0.125 +/- 0.02",
                i + 3
            );
        }
    }

    #[test]
    fn distance_matches_hand_values() {
        let a = ParameterVector::from_pairs([("x", 0.0), ("y", 0.0)]);
        let b = ParameterVector::from_pairs([("x", 3.0), ("y", 4.0)]);
        assert_eq!(distance(&a, &b).unwrap(), 5.0);
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_mismatched_dims() {
        let a = ParameterVector::from_pairs([("x", 0.0)]);
        let b = ParameterVector::from_pairs([("y", 0.0)]);
        assert!(matches!(
            distance(&a, &b),
            Err(SpaceError::DimensionMismatch(_))
        ));
        // superset on one side only
        let c = ParameterVector::from_pairs([("x", 0.0), ("y", 1.0)]);
        assert!(matches!(
            distance(&a, &c),
            Err(SpaceError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn vector_serializes_as_flat_object() {
        let vec = ParameterVector::from_pairs([("helix_radius", 55.0), ("n_turns", 4.0)]);
        let json = serde_json::to_string(&vec).unwrap();
        assert_eq!(json, r#"{"helix_radius":55.0,"n_turns":4.0}"#);
        let back: ParameterVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec);
    }

    #[test]
    fn dim_constructors_reject_bad_bounds() {
        assert!(ParameterDim::continuous("a", 2.0, 1.0).is_err());
        assert!(ParameterDim::continuous("a", 1.0, 1.0).is_err());
        assert!(matches!(
            ParameterDim::integral("a", 3.2, 3.8),
            Err(SpaceError::EmptyIntegerInterval(_))
        ));
        assert!(ParameterSpace::new(vec![]).is_err());
        let d = ParameterDim::continuous("a", 0.0, 1.0).unwrap();
        assert!(matches!(
            ParameterSpace::new(vec![d.clone(), d]),
            Err(SpaceError::DuplicateDimension(_))
        ));
    }
}
