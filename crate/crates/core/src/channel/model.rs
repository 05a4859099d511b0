use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::ComplexMatrix;

/// Uniform planar arrays at both ends of the link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub tx_rows: usize,
    pub tx_cols: usize,
    pub rx_rows: usize,
    pub rx_cols: usize,
    /// Element spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub element_spacing: f64,
}

fn default_spacing() -> f64 {
    0.5
}

impl ArrayGeometry {
    pub fn new(tx: (usize, usize), rx: (usize, usize)) -> Self {
        Self {
            tx_rows: tx.0,
            tx_cols: tx.1,
            rx_rows: rx.0,
            rx_cols: rx.1,
            element_spacing: default_spacing(),
        }
    }

    pub fn n_t(&self) -> usize {
        self.tx_rows * self.tx_cols
    }

    pub fn n_r(&self) -> usize {
        self.rx_rows * self.rx_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t() == 0 || self.n_r() == 0 {
            return Err(Error::InvalidParameter(format!(
                "array geometry needs positive element counts, got tx {}x{} rx {}x{}",
                self.tx_rows, self.tx_cols, self.rx_rows, self.rx_cols
            )));
        }
        if !(self.element_spacing.is_finite() && self.element_spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    Rayleigh,
    Clustered,
}

impl ChannelModel {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Rayleigh => "rayleigh",
            Self::Clustered => "clustered",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModelConfig {
    pub model: ChannelModel,
    pub clusters: usize,
    pub rays_per_cluster: usize,
    /// Laplacian spread of ray angles around the cluster centre, degrees.
    pub angle_spread_deg: f64,
    pub geometry: ArrayGeometry,
}

impl ChannelModelConfig {
    /// Sparse indoor-style clustered channel on the given arrays.
    pub fn clustered(geometry: ArrayGeometry) -> Self {
        Self {
            model: ChannelModel::Clustered,
            clusters: 3,
            rays_per_cluster: 5,
            angle_spread_deg: 5.0,
            geometry,
        }
    }

    pub fn rayleigh(geometry: ArrayGeometry) -> Self {
        Self {
            model: ChannelModel::Rayleigh,
            ..Self::clustered(geometry)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.model == ChannelModel::Clustered {
            if self.clusters == 0 || self.rays_per_cluster == 0 {
                return Err(Error::InvalidParameter(
                    "clustered model needs at least one cluster and one ray".into(),
                ));
            }
            if !(self.angle_spread_deg.is_finite() && self.angle_spread_deg >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "angle spread must be nonnegative, got {}",
                    self.angle_spread_deg
                )));
            }
        }
        Ok(())
    }
}

/// One downlink channel matrix `H_k` (N_r x N_t) per user.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    users: Vec<ComplexMatrix>,
    pub seed: u64,
    pub model_tag: String,
}

impl ChannelRealization {
    pub fn new(users: Vec<ComplexMatrix>, seed: u64, model_tag: impl Into<String>) -> Result<Self> {
        let first = users
            .first()
            .ok_or_else(|| Error::Schema("a channel realization needs at least one user".into()))?;
        let shape = first.shape();
        if let Some(k) = users.iter().position(|h| h.shape() != shape) {
            return Err(Error::Schema(format!(
                "user {k} channel is {:?}, expected {shape:?}",
                users[k].shape()
            )));
        }
        if users.iter().any(|h| !h.is_finite()) {
            return Err(Error::Schema("channel entries must be finite".into()));
        }
        Ok(Self {
            users,
            seed,
            model_tag: model_tag.into(),
        })
    }

    pub fn users(&self) -> &[ComplexMatrix] {
        &self.users
    }

    pub fn user(&self, k: usize) -> &ComplexMatrix {
        &self.users[k]
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_r(&self) -> usize {
        self.users[0].rows()
    }

    pub fn n_t(&self) -> usize {
        self.users[0].cols()
    }
}

/// Unit-modulus planar-array response for polar angle `theta` and azimuth
/// `phi`. Element `(p, q)` (row `p`, column `q`) has phase
/// `2π d (p sinθ sinφ + q cosθ)`; entries are ordered row-major.
pub fn upa_steering_vector(rows: usize, cols: usize, spacing: f64, theta: f64, phi: f64) -> Vec<Complex64> {
    let u = theta.sin() * phi.sin();
    let w = theta.cos();
    let mut out = Vec::with_capacity(rows * cols);
    for p in 0..rows {
        for q in 0..cols {
            let phase = 2.0 * PI * spacing * (p as f64 * u + q as f64 * w);
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}

/// Generates `k` user channels, deterministic in `(config, k, seed)`.
pub fn generate(config: &ChannelModelConfig, k: usize, seed: u64) -> Result<ChannelRealization> {
    config.validate()?;
    if k == 0 {
        return Err(Error::InvalidParameter("user count K must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = (0..k)
        .map(|_| match config.model {
            ChannelModel::Rayleigh => rayleigh_user(&config.geometry, &mut rng),
            ChannelModel::Clustered => clustered_user(config, &mut rng),
        })
        .collect();
    ChannelRealization::new(users, seed, config.model.tag())
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rayleigh_user(geometry: &ArrayGeometry, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(geometry.n_r(), geometry.n_t(), |_, _| complex_normal(rng))
}

/// Zero-mean Laplacian sample with standard deviation `std`.
fn laplacian(rng: &mut impl Rng, std: f64) -> f64 {
    let b = std / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn clustered_user(config: &ChannelModelConfig, rng: &mut impl Rng) -> ComplexMatrix {
    let g = &config.geometry;
    let (n_r, n_t) = (g.n_r(), g.n_t());
    let spread = config.angle_spread_deg.to_radians();
    let paths = (config.clusters * config.rays_per_cluster) as f64;
    let amp = 1.0 / paths.sqrt();

    let mut h = ComplexMatrix::zeros(n_r, n_t);
    for _ in 0..config.clusters {
        // Cluster centres: azimuth in the front half-space, polar angle
        // within 45 degrees of broadside.
        let tx_phi = rng.random_range(-PI / 2.0..PI / 2.0);
        let tx_theta = rng.random_range(PI / 4.0..3.0 * PI / 4.0);
        let rx_phi = rng.random_range(-PI..PI);
        let rx_theta = rng.random_range(PI / 4.0..3.0 * PI / 4.0);
        for _ in 0..config.rays_per_cluster {
            let gain = complex_normal(rng) * amp;
            let at = upa_steering_vector(
                g.tx_rows,
                g.tx_cols,
                g.element_spacing,
                tx_theta + laplacian(rng, spread),
                tx_phi + laplacian(rng, spread),
            );
            let ar = upa_steering_vector(
                g.rx_rows,
                g.rx_cols,
                g.element_spacing,
                rx_theta + laplacian(rng, spread),
                rx_phi + laplacian(rng, spread),
            );
            // H += gain · a_r a_t†
            for (i, a) in ar.iter().enumerate() {
                let ga = gain * a;
                for (j, b) in at.iter().enumerate() {
                    h[(i, j)] += ga * b.conj();
                }
            }
        }
    }
    h
}
