//! Monte-Carlo estimates of the graph weights `W_Γ = ∫ ∧_e dθ_e`.
//!
//! The configuration space is gauge-fixed by putting the first ground point at
//! `0` and the last at `1`. Coordinates are `(Re p₁, Im p₁, …, Re p_n, Im p_n,
//! q₂, …, q_{m−1})`, and the form becomes `det J · dx` with `J` the Jacobian of
//! the edge angles. Sampling is importance-weighted: the interior ground points
//! are uniform on the ordered simplex and each `p_k` is drawn from a mixture
//! concentrated near the ground points and the earlier `p_j`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{AdmissibleGraph, Vertex};

/// Gauge and orientation conventions of cached estimates.
pub const NORMALIZATION_VERSION: &str = "gauge:q1=0,qm=1;orientation:v1";

pub const CHUNK_SIZE: usize = 4096;

const GLOBAL_WEIGHT: f64 = 0.4;
const GROUND_RADIUS: f64 = 1.0;
const GLOBAL_SCALE: f64 = 1.0;

/// `θ(z_i, z_j) = Arg((z_j − z_i)/(z_j − z̄_i)) / 2π` in `[0, 1)`.
pub fn theta(zi: Complex64, zj: Complex64) -> f64 {
    let a = ((zj - zi) / (zj - zi.conj())).arg() / (2.0 * PI);
    if a < 0.0 {
        a + 1.0
    } else {
        a
    }
}

/// Partial derivatives of `θ(z_i, z_j)` with respect to
/// `(Re z_i, Im z_i, Re z_j, Im z_j)`.
pub fn dtheta(zi: Complex64, zj: Complex64) -> [f64; 4] {
    let i = Complex64::i();
    let a = (zj - zi).inv();
    let b = (zj - zi.conj()).inv();
    let s = 1.0 / (2.0 * PI);
    [
        s * (-a + b).im,
        s * (-i * a - i * b).im,
        s * (a - b).im,
        s * (i * a - i * b).im,
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub p: Vec<Complex64>,
    /// All ground points, `q[0] = 0` and `q[m−1] = 1`.
    pub q: Vec<f64>,
}

impl Configuration {
    /// `θ` of the edge from first-type vertex `i` to `j`.
    pub fn theta(&self, i: usize, j: Vertex) -> Result<f64> {
        if j == Vertex::First(i) {
            return Err(Error::Invalid("coincident points".into()));
        }
        let (zi, zj) = (self.p[i - 1], self.point(j));
        if zi == zj {
            return Err(Error::Invalid("coincident points".into()));
        }
        Ok(theta(zi, zj))
    }

    /// The image under `z ↦ az + b` with `a > 0`, `b` real.
    pub fn transform(&self, a: f64, b: f64) -> Configuration {
        Configuration {
            p: self.p.iter().map(|z| z * a + b).collect(),
            q: self.q.iter().map(|x| a * x + b).collect(),
        }
    }

    fn point(&self, v: Vertex) -> Complex64 {
        match v {
            Vertex::First(k) => self.p[k - 1],
            Vertex::Second(l) => Complex64::new(self.q[l - 1], 0.0),
        }
    }
}

/// Sign relating the coordinate orientation to the natural one. Pinned by
/// `W(wedge) = 1/2` and `W(star_m) = 1/m!`.
fn orientation(m: usize) -> Result<f64> {
    match m {
        2 | 4 => Ok(1.0),
        3 => Ok(-1.0),
        _ => Err(Error::Unsupported(format!("weights with {m} ground vertices"))),
    }
}

/// `det J` at a configuration (without the orientation sign).
pub fn form_density(g: &AdmissibleGraph, c: &Configuration) -> f64 {
    let n = g.n();
    let dim = 2 * n + g.m() - 2;
    let mut jac = DMatrix::<f64>::zeros(dim, dim);
    let coord = |v: Vertex| -> Option<(usize, bool)> {
        match v {
            Vertex::First(k) => Some((2 * (k - 1), true)),
            Vertex::Second(l) if l > 1 && l < g.m() => Some((2 * n + l - 2, false)),
            Vertex::Second(_) => None,
        }
    };
    for (row, &(s, t)) in g.edges().iter().enumerate() {
        let d = dtheta(c.p[s - 1], c.point(t));
        jac[(row, 2 * (s - 1))] += d[0];
        jac[(row, 2 * (s - 1) + 1)] += d[1];
        match coord(t) {
            Some((col, true)) => {
                jac[(row, col)] += d[2];
                jac[(row, col + 1)] += d[3];
            }
            Some((col, false)) => jac[(row, col)] += d[2],
            None => {}
        }
    }
    let lu = jac.lu();
    if (0..dim).any(|i| lu.u()[(i, i)] == 0.0) {
        return 0.0;
    }
    lu.determinant()
}

/// Draws a configuration and returns it with its proposal density.
pub fn sample_configuration<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Configuration, f64) {
    let mut q: Vec<f64> = (0..m.saturating_sub(2)).map(|_| rng.gen::<f64>()).collect();
    q.sort_by(f64::total_cmp);
    q.insert(0, 0.0);
    q.push(1.0);
    let mut density: f64 = (1..=m.saturating_sub(2)).map(|k| k as f64).product();
    let mut p: Vec<Complex64> = Vec::with_capacity(n);
    for _ in 0..n {
        let local = m + p.len();
        let w_local = (1.0 - GLOBAL_WEIGHT) / local as f64;
        let u: f64 = rng.gen();
        let z = if u < GLOBAL_WEIGHT {
            let r = GLOBAL_SCALE * (PI / 2.0 * rng.gen::<f64>()).tan();
            let phi = PI * rng.gen::<f64>();
            Complex64::new(0.5, 0.0) + Complex64::from_polar(r, phi)
        } else {
            let j = (((u - GLOBAL_WEIGHT) / w_local) as usize).min(local - 1);
            if j < m {
                let r = GROUND_RADIUS * rng.gen::<f64>();
                Complex64::new(q[j], 0.0) + Complex64::from_polar(r, PI * rng.gen::<f64>())
            } else {
                let c = p[j - m];
                let r = c.im / 2.0 * rng.gen::<f64>();
                c + Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
            }
        };
        // mixture density at z
        let mut g = 0.0;
        let rc = (z - Complex64::new(0.5, 0.0)).norm();
        g += GLOBAL_WEIGHT * 2.0 * GLOBAL_SCALE / (PI * PI * (GLOBAL_SCALE * GLOBAL_SCALE + rc * rc) * rc);
        for &ql in &q {
            let r = (z - Complex64::new(ql, 0.0)).norm();
            if r < GROUND_RADIUS {
                g += w_local / (PI * GROUND_RADIUS * r);
            }
        }
        for c in &p {
            let rho = c.im / 2.0;
            let r = (z - c).norm();
            if r < rho {
                g += w_local / (2.0 * PI * rho * r);
            }
        }
        density *= g;
        p.push(z);
    }
    (Configuration { p, q }, density)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// Draws discarded because the integrand was not finite.
    pub rejected: usize,
}

impl WeightEstimate {
    pub fn exact(value: f64) -> Self {
        WeightEstimate { value, std_error: 0.0, samples: 0, seed: 0, rejected: 0 }
    }
}

fn graph_seed(g: &AdmissibleGraph, seed: u64) -> u64 {
    // FNV-1a of the canonical form, so distinct graphs draw independent streams
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in g.hash().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

#[derive(Clone, Copy, Default)]
struct Chunk {
    sum: f64,
    sum_sq: f64,
    rejected: usize,
}

fn run_chunk(g: &AdmissibleGraph, gseed: u64, index: usize, draws: usize) -> Chunk {
    let mut rng = ChaCha8Rng::seed_from_u64(gseed);
    rng.set_stream(index as u64);
    let mut out = Chunk::default();
    let mut done = 0;
    while done < draws {
        let (c, dens) = sample_configuration(&mut rng, g.n(), g.m());
        let v = form_density(g, &c) / dens;
        if !v.is_finite() {
            out.rejected += 1;
            continue;
        }
        out.sum += v;
        out.sum_sq += v * v;
        done += 1;
    }
    out
}

/// Estimates `W_Γ` from `samples` draws. Irrelevant graphs are exactly zero.
/// The result depends only on `(Γ, samples, seed)`, not on threading.
pub fn weight_mc(g: &AdmissibleGraph, samples: usize, seed: u64) -> Result<WeightEstimate> {
    if !g.relevance().relevant {
        return Ok(WeightEstimate::exact(0.0));
    }
    let sign = orientation(g.m())?;
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is needed".into()));
    }
    let gseed = graph_seed(g, seed);
    let chunks: Vec<(usize, usize)> =
        (0..samples.div_ceil(CHUNK_SIZE)).map(|i| (i, CHUNK_SIZE.min(samples - i * CHUNK_SIZE))).collect();
    #[cfg(feature = "parallel")]
    let parts: Vec<Chunk> = {
        use rayon::prelude::*;
        chunks.par_iter().map(|&(i, k)| run_chunk(g, gseed, i, k)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Chunk> = chunks.iter().map(|&(i, k)| run_chunk(g, gseed, i, k)).collect();
    let mut total = Chunk::default();
    for c in parts {
        total.sum += c.sum;
        total.sum_sq += c.sum_sq;
        total.rejected += c.rejected;
    }
    let nf = samples as f64;
    let mean = total.sum / nf;
    let var = if samples > 1 { (total.sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
    Ok(WeightEstimate { value: sign * mean, std_error: (var / nf).sqrt(), samples, seed, rejected: total.rejected })
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    hash: String,
    n: usize,
    m: usize,
    edges: Vec<[i64; 2]>,
    #[serde(flatten)]
    estimate: WeightEstimate,
    version: String,
}

/// Append-only JSON-lines store of estimates keyed by graph, sample count
/// and seed. Lines with another normalization version or that fail to parse
/// are ignored.
pub struct WeightCache {
    path: PathBuf,
    entries: HashMap<(String, usize, u64), WeightEstimate>,
    skipped: usize,
}

impl WeightCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        let mut skipped = 0;
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(l) if l.version == NORMALIZATION_VERSION => {
                        entries.insert((l.hash, l.estimate.samples, l.estimate.seed), l.estimate);
                    }
                    _ => skipped += 1,
                }
            }
        }
        Ok(WeightCache { path, entries, skipped })
    }

    /// Lines ignored while loading.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, g: &AdmissibleGraph, samples: usize, seed: u64) -> Option<&WeightEstimate> {
        self.entries.get(&(g.hash(), samples, seed))
    }

    pub fn insert(&mut self, g: &AdmissibleGraph, est: &WeightEstimate) -> Result<()> {
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let line = CacheLine {
            hash: g.hash(),
            n: g.n(),
            m: g.m(),
            edges: g.encoded_edges(),
            estimate: est.clone(),
            version: NORMALIZATION_VERSION.into(),
        };
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(&line)?)?;
        self.entries.insert((g.hash(), est.samples, est.seed), est.clone());
        Ok(())
    }
}

/// [`weight_mc`] through an optional cache. Exact zeros are not stored.
pub fn weight(g: &AdmissibleGraph, samples: usize, seed: u64, cache: Option<&mut WeightCache>) -> Result<WeightEstimate> {
    if !g.relevance().relevant {
        return Ok(WeightEstimate::exact(0.0));
    }
    match cache {
        Some(c) => {
            if let Some(e) = c.get(g, samples, seed) {
                return Ok(e.clone());
            }
            let e = weight_mc(g, samples, seed)?;
            c.insert(g, &e)?;
            Ok(e)
        }
        None => weight_mc(g, samples, seed),
    }
}
