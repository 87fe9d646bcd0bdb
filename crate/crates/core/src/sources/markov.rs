use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, SimRng};
use super::source::SeriesSource;
use crate::{Error, Result};

const MAX_STATES: usize = 64;
const ROW_SUM_TOL: f64 = 1e-12;

/// Initial law of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StartLaw {
    /// Initial state drawn from π. Required for exact mixing coefficients.
    #[default]
    Stationary,
    /// Fixed initial state followed by `burn_in` discarded transitions.
    State { state: usize, burn_in: usize },
}

/// On-disk chain description: `{"name", "states", "P", "f"}` with `P`
/// given row-major, either flat (`states²` numbers) or as nested rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    #[serde(default)]
    pub name: String,
    pub states: usize,
    #[serde(rename = "P")]
    pub p: Matrix,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

/// Stationary finite-state chain observed through `f`, with `f` centred
/// under π at construction so that `E η_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainFile", into = "ChainFile")]
pub struct FiniteMarkovChain {
    name: String,
    s: usize,
    p: Vec<f64>,
    pi: Vec<f64>,
    f: Vec<f64>,
    cumulative: Vec<f64>,
    start: StartLaw,
}

impl FiniteMarkovChain {
    pub fn new(rows: Vec<Vec<f64>>, f: Vec<f64>) -> Result<Self> {
        let s = rows.len();
        if rows.iter().any(|r| r.len() != s) {
            return Err(Error::Structure("transition matrix is not square".into()));
        }
        Self::from_flat(s, rows.into_iter().flatten().collect(), f)
    }

    pub fn from_flat(s: usize, p: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_STATES).contains(&s) {
            return Err(Error::Structure(format!(
                "state count {s} outside [2, {MAX_STATES}]"
            )));
        }
        if p.len() != s * s {
            return Err(Error::Structure(format!(
                "expected {} transition entries, got {}",
                s * s,
                p.len()
            )));
        }
        if f.len() != s {
            return Err(Error::Structure(format!(
                "state map has {} values for {s} states",
                f.len()
            )));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Structure(format!("invalid transition probability {v}")));
        }
        if let Some(v) = f.iter().find(|v| !v.is_finite()) {
            return Err(Error::Structure(format!("non-finite state value {v}")));
        }
        for (i, row) in p.chunks_exact(s).enumerate() {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Structure(format!("row {i} sums to {total}")));
            }
        }
        let pi = stationary_from_flat(s, &p)?;
        let mean: f64 = pi.iter().zip(&f).map(|(a, b)| a * b).sum();
        let f = f.into_iter().map(|v| v - mean).collect();
        let cumulative = p
            .chunks_exact(s)
            .flat_map(|row| {
                let mut acc = 0.0;
                let mut out: Vec<f64> = row
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect();
                out[s - 1] = f64::INFINITY;
                out
            })
            .collect();
        Ok(Self {
            name: String::new(),
            s,
            p,
            pi,
            f,
            cumulative,
            start: StartLaw::Stationary,
        })
    }

    /// Two-state chain `[[1-a, a], [b, 1-b]]`; second eigenvalue `1 - a - b`.
    pub fn two_state(a: f64, b: f64, f: [f64; 2]) -> Result<Self> {
        Self::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]], f.to_vec())
    }

    /// Chain whose rows all equal `law`: an i.i.d. sequence.
    pub fn iid(law: &[f64], f: Vec<f64>) -> Result<Self> {
        Self::new(vec![law.to_vec(); law.len()], f)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_start(mut self, start: StartLaw) -> Result<Self> {
        if let StartLaw::State { state, .. } = start {
            if state >= self.s {
                return Err(Error::Structure(format!("start state {state} out of range")));
            }
        }
        self.start = start;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> usize {
        self.s
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.p[from * self.s + to]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn start(&self) -> StartLaw {
        self.start
    }

    /// Strictly positive transitions: ψ(n) then decays geometrically.
    pub fn is_certified(&self) -> bool {
        self.start == StartLaw::Stationary && self.p.iter().all(|&v| v > 0.0)
    }

    /// `P^n` by repeated squaring, row-major.
    pub fn power(&self, n: usize) -> Vec<f64> {
        let s = self.s;
        let mut result = identity(s);
        let mut base = self.p.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = matmul(s, &result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = matmul(s, &base, &base);
            }
        }
        result
    }

    fn draw(cumulative: &[f64], rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
    }

    fn step(&self, state: usize, rng: &mut SimRng) -> usize {
        Self::draw(&self.cumulative[state * self.s..(state + 1) * self.s], rng)
    }

    fn initial_state(&self, rng: &mut SimRng) -> usize {
        match self.start {
            StartLaw::Stationary => {
                let mut acc = 0.0;
                let mut cum: Vec<f64> = self
                    .pi
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect();
                cum[self.s - 1] = f64::INFINITY;
                Self::draw(&cum, rng)
            }
            StartLaw::State { state, burn_in } => {
                let mut x = state;
                for _ in 0..burn_in {
                    x = self.step(x, rng);
                }
                x
            }
        }
    }

    /// Writes the state path (not the values) into `out`.
    pub fn path(&self, rng: &mut SimRng, out: &mut [usize]) {
        if out.is_empty() {
            return;
        }
        let mut x = self.initial_state(rng);
        out[0] = x;
        for slot in out.iter_mut().skip(1) {
            x = self.step(x, rng);
            *slot = x;
        }
    }
}

impl SeriesSource for FiniteMarkovChain {
    fn fill(&self, rng: &mut SimRng, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let mut x = self.initial_state(rng);
        out[0] = self.f[x];
        for slot in out.iter_mut().skip(1) {
            x = self.step(x, rng);
            *slot = self.f[x];
        }
    }

    fn mean(&self) -> f64 {
        0.0
    }
}

impl TryFrom<ChainFile> for FiniteMarkovChain {
    type Error = Error;

    fn try_from(file: ChainFile) -> Result<Self> {
        let chain = match file.p {
            Matrix::Flat(p) => Self::from_flat(file.states, p, file.f)?,
            Matrix::Rows(rows) => {
                if rows.len() != file.states {
                    return Err(Error::Structure(format!(
                        "declared {} states, matrix has {} rows",
                        file.states,
                        rows.len()
                    )));
                }
                Self::new(rows, file.f)?
            }
        };
        Ok(chain.with_name(file.name))
    }
}

impl From<FiniteMarkovChain> for ChainFile {
    fn from(chain: FiniteMarkovChain) -> Self {
        ChainFile {
            name: chain.name,
            states: chain.s,
            p: Matrix::Flat(chain.p),
            f: chain.f,
        }
    }
}

fn identity(s: usize) -> Vec<f64> {
    let mut out = vec![0.0; s * s];
    for i in 0..s {
        out[i * s + i] = 1.0;
    }
    out
}

fn matmul(s: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s * s];
    for i in 0..s {
        for l in 0..s {
            let ail = a[i * s + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..s {
                out[i * s + j] += ail * b[l * s + j];
            }
        }
    }
    out
}

fn reaches_all(s: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; s];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for (j, seen_j) in seen.iter_mut().enumerate() {
            if !*seen_j && edge(i, j) {
                *seen_j = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|v| v)
}

/// Stationary law by Grassmann–Taksar–Heyman elimination.
fn stationary_from_flat(s: usize, p: &[f64]) -> Result<Vec<f64>> {
    let forward = reaches_all(s, |i, j| p[i * s + j] > 0.0);
    let backward = reaches_all(s, |i, j| p[j * s + i] > 0.0);
    if !(forward && backward) {
        return Err(Error::Structure("transition matrix is reducible".into()));
    }
    let mut a = p.to_vec();
    for k in (1..s).rev() {
        let out: f64 = (0..k).map(|j| a[k * s + j]).sum();
        if out <= 0.0 {
            return Err(Error::Structure("transition matrix is reducible".into()));
        }
        for i in 0..k {
            a[i * s + k] /= out;
        }
        for i in 0..k {
            let aik = a[i * s + k];
            for j in 0..k {
                a[i * s + j] += aik * a[k * s + j];
            }
        }
    }
    let mut pi = vec![0.0; s];
    pi[0] = 1.0;
    for k in 1..s {
        pi[k] = (0..k).map(|i| pi[i] * a[i * s + k]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

/// Stationary distribution of an irreducible row-stochastic matrix.
pub fn stationary_dist(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let s = rows.len();
    if s == 0 || rows.iter().any(|r| r.len() != s) {
        return Err(Error::Structure("transition matrix is not square".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Structure("invalid transition probability".into()));
    }
    if s == 1 {
        return Ok(vec![1.0]);
    }
    stationary_from_flat(s, &flat)
}

/// `max_{x,y} |P^n(x,y)/π(y) - 1|` for a stationary chain.
pub fn psi_coefficient(chain: &FiniteMarkovChain, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("gap must be positive".into()));
    }
    if chain.start != StartLaw::Stationary {
        return Err(Error::Domain(
            "mixing coefficient requires a stationary start".into(),
        ));
    }
    if chain.pi.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("stationary law has a null state".into()));
    }
    let s = chain.s;
    // identical rows: P^n = P and π is that row, so ψ vanishes exactly
    if chain.p.chunks_exact(s).all(|r| r == &chain.p[..s]) {
        return Ok(0.0);
    }
    let pn = chain.power(n);
    let mut worst = 0.0_f64;
    for x in 0..s {
        for y in 0..s {
            worst = worst.max((pn[x * s + y] / chain.pi[y] - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Stationary path of `f` values; see [`super::rng`] for the stream layout
/// (this uses stream 0 of `seed`).
pub fn simulate_chain(chain: &FiniteMarkovChain, length: usize, seed: u64) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::Domain("length must be positive".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![0.0; length];
    chain.fill(&mut rng, &mut out);
    Ok(out)
}

/// Tabulated ψ(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    psi: BTreeMap<usize, f64>,
    /// Values computed exactly from a model rather than assumed.
    pub certified: bool,
}

impl MixingProfile {
    pub fn assumed(psi: BTreeMap<usize, f64>) -> Result<Self> {
        if let Some((n, v)) = psi.iter().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("psi({n}) = {v} is not a finite nonnegative value")));
        }
        Ok(Self {
            psi,
            certified: false,
        })
    }

    /// ψ ≡ 0 on the given gaps (independent data).
    pub fn independent(gaps: impl IntoIterator<Item = usize>) -> Self {
        Self {
            psi: gaps.into_iter().map(|n| (n, 0.0)).collect(),
            certified: true,
        }
    }

    /// `ψ(n) = c·n^{-decay}` on the given gaps.
    pub fn power_law(c: f64, decay: f64, gaps: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::assumed(
            gaps.into_iter()
                .map(|n| (n, c * (n as f64).powf(-decay)))
                .collect(),
        )
    }

    pub fn from_chain(
        chain: &FiniteMarkovChain,
        gaps: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let psi = gaps
            .into_iter()
            .map(|n| psi_coefficient(chain, n).map(|v| (n, v)))
            .collect::<Result<_>>()?;
        Ok(Self {
            psi,
            certified: chain.is_certified(),
        })
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.psi.get(&n).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.psi.iter().map(|(&n, &v)| (n, v))
    }

    /// `ψ(n)·n^{(1+ρ)/α}` for each tabulated gap. Bounded values are
    /// consistent with the decay rate `ψ(n) = O(n^{-(1+ρ)/α})`; this is a
    /// diagnostic, not a proof.
    pub fn rate_check(&self, alpha: f64, rho: f64) -> Vec<(usize, f64)> {
        let e = (1.0 + rho) / alpha;
        self.iter().map(|(n, v)| (n, v * (n as f64).powf(e))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoukhanCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Exact check of `|E XY - EX·EY| <= ψ(gap)·E|X|·E|Y|` with
/// `Y = g(state_1)` and `X = h(state_{1+gap})` under the stationary law.
pub fn doukhan_gap_check(
    chain: &FiniteMarkovChain,
    g: &[f64],
    h: &[f64],
    gap: usize,
) -> Result<DoukhanCheck> {
    let s = chain.s;
    if g.len() != s || h.len() != s {
        return Err(Error::Domain(format!(
            "functionals must have {s} values, got {} and {}",
            g.len(),
            h.len()
        )));
    }
    let psi = psi_coefficient(chain, gap)?;
    let pn = chain.power(gap);
    let pi = &chain.pi;
    let mut exy = 0.0;
    for x in 0..s {
        for y in 0..s {
            exy += pi[x] * pn[x * s + y] * g[x] * h[y];
        }
    }
    let ex: f64 = (0..s).map(|y| pi[y] * h[y]).sum();
    let ey: f64 = (0..s).map(|x| pi[x] * g[x]).sum();
    let eabs_x: f64 = (0..s).map(|y| pi[y] * h[y].abs()).sum();
    let eabs_y: f64 = (0..s).map(|x| pi[x] * g[x].abs()).sum();
    let lhs = (exy - ex * ey).abs();
    let rhs = psi * eabs_x * eabs_y;
    Ok(DoukhanCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook() -> FiniteMarkovChain {
        FiniteMarkovChain::two_state(0.1, 0.2, [1.0, -2.0]).unwrap()
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_dist(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(pi, vec![0.5, 0.5]);
        // balance: 0.1 π0 = 0.2 π1, π0 + π1 = 1
        let pi = stationary_dist(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15 && (pi[1] - 1.0 / 3.0).abs() < 1e-15);
        // cyclic permutation-symmetric chain
        let rows = vec![
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ];
        for v in stationary_dist(&rows).unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_rejects_reducible() {
        let rows = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(matches!(stationary_dist(&rows), Err(Error::Structure(_))));
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(stationary_dist(&rows), Err(Error::Structure(_))));
    }

    #[test]
    fn stationary_residual_small_on_periodic_chain() {
        let rows = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let pi = stationary_dist(&rows).unwrap();
        for v in pi {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn construction_validates() {
        assert!(FiniteMarkovChain::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]], vec![0., 1.]).is_err());
        assert!(FiniteMarkovChain::new(vec![vec![1.0]], vec![0.]).is_err());
        assert!(FiniteMarkovChain::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![0.]).is_err());
        assert!(FiniteMarkovChain::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]], vec![0., 1.]).is_err());
    }

    #[test]
    fn values_are_centred() {
        let c = textbook();
        let mean: f64 = c.stationary().iter().zip(c.values()).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let iid = FiniteMarkovChain::iid(&[0.3, 0.7], vec![1.0, 0.0]).unwrap();
        for n in 1..6 {
            assert_eq!(psi_coefficient(&iid, n).unwrap(), 0.0);
        }
        let c = textbook();
        assert!((psi_coefficient(&c, 1).unwrap() - 1.4).abs() < 1e-12);
        assert!((psi_coefficient(&c, 2).unwrap() - 0.98).abs() < 1e-12);
        assert!(psi_coefficient(&c, 0).is_err());
    }

    #[test]
    fn psi_requires_stationary_start() {
        let c = textbook()
            .with_start(StartLaw::State { state: 0, burn_in: 10 })
            .unwrap();
        assert!(matches!(psi_coefficient(&c, 1), Err(Error::Domain(_))));
        assert!(!c.is_certified());
    }

    #[test]
    fn doukhan_examples() {
        let iid = FiniteMarkovChain::iid(&[0.25, 0.25, 0.5], vec![1.0, 2.0, 3.0]).unwrap();
        let r = doukhan_gap_check(&iid, &[1.0, -4.0, 2.0], &[0.5, 0.0, 7.0], 3).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.holds);

        // exhaustive sum over (x, y) weighted by π(x)P(x, y)
        let c = textbook();
        let f = c.values().to_vec();
        let pi = [2.0 / 3.0, 1.0 / 3.0];
        let p = [[0.9, 0.1], [0.2, 0.8]];
        let mut exy = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                exy += pi[x] * p[x][y] * f[x] * f[y];
            }
        }
        let r = doukhan_gap_check(&c, &f, &f, 1).unwrap();
        assert!((r.lhs - exy.abs()).abs() < 1e-14);
        let eabs: f64 = pi.iter().zip(&f).map(|(a, b)| a * b.abs()).sum();
        assert!((r.rhs - 1.4 * eabs * eabs).abs() < 1e-12);
        assert!(r.holds);

        let r = doukhan_gap_check(&c, &[0.0, 0.0], &f, 2).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, 0.0, true));
    }

    #[test]
    fn simulate_support_and_determinism() {
        let pm = FiniteMarkovChain::iid(&[0.5, 0.5], vec![-1.0, 1.0]).unwrap();
        let v = simulate_chain(&pm, 1, 99).unwrap();
        assert!(v[0] == -1.0 || v[0] == 1.0);
        let a = simulate_chain(&textbook(), 1000, 5).unwrap();
        let b = simulate_chain(&textbook(), 1000, 5).unwrap();
        assert_eq!(a, b);
        assert!(simulate_chain(&pm, 0, 1).is_err());
    }

    #[test]
    fn chain_file_round_trip() {
        let json = r#"{"name": "demo", "states": 2, "P": [0.9, 0.1, 0.2, 0.8], "f": [1, -2]}"#;
        let c: FiniteMarkovChain = serde_json::from_str(json).unwrap();
        assert_eq!(c.name(), "demo");
        assert_eq!(c.transition(1, 0), 0.2);
        let nested = r#"{"states": 2, "P": [[0.9, 0.1], [0.2, 0.8]], "f": [1, -2]}"#;
        let d: FiniteMarkovChain = serde_json::from_str(nested).unwrap();
        assert_eq!(c.stationary(), d.stationary());
        let back: FiniteMarkovChain = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.stationary(), c.stationary());
        let bad = r#"{"states": 2, "P": [0.9, 0.2, 0.2, 0.8], "f": [1, -2]}"#;
        assert!(serde_json::from_str::<FiniteMarkovChain>(bad).is_err());
    }

    #[test]
    fn profile_from_chain() {
        let c = FiniteMarkovChain::two_state(0.3, 0.4, [0.0, 1.0]).unwrap();
        let prof = MixingProfile::from_chain(&c, 1..=5).unwrap();
        assert!(prof.certified);
        assert_eq!(prof.get(3), Some(psi_coefficient(&c, 3).unwrap()));
        assert_eq!(prof.get(6), None);
        assert!(MixingProfile::assumed([(1, -0.5)].into_iter().collect()).is_err());
        let pl = MixingProfile::power_law(2.0, 3.0, [2]).unwrap();
        assert_eq!(pl.get(2), Some(0.25));
        assert_eq!(pl.rate_check(0.5, 0.5), vec![(2, 0.25 * 8.0)]);
    }
}
