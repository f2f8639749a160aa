//! Classical function tables, preimage superposition states and cloning oracles.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::matrix::{inner, CMatrix, C64, ZERO};
use crate::qcore::state::check_dim;
use crate::qcore::{bottom_index, tolerance, DimTag, OperatorMatrix, PureState, QuantumState};

pub type Label = u32;

/// Widest table accepted at all (counts-only work); matrices use [`SizeLimits`].
pub const MAX_TABLE_BITS: usize = 24;
pub const DEFAULT_CAP: usize = 6;

/// Bounds on the widths accepted by matrix-building operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeLimits {
    pub cap: usize,
    /// Enforce m ≥ 2n.
    pub strict: bool,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits { cap: DEFAULT_CAP, strict: false }
    }
}

impl SizeLimits {
    /// Default limits, with the cap taken from `NOGOLAB_CAP` when set.
    pub fn from_env() -> Self {
        let cap = std::env::var("NOGOLAB_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CAP);
        SizeLimits { cap, strict: false }
    }

    pub fn check(&self, m: usize, n: usize) -> Result<()> {
        if n == 0 || n > m {
            return Err(Error::InvalidWidths { m, n, reason: "need 1 ≤ n ≤ m" });
        }
        if m > self.cap {
            return Err(Error::CapExceeded { m, cap: self.cap });
        }
        if self.strict && m < 2 * n {
            return Err(Error::InvalidWidths { m, n, reason: "strict mode needs m ≥ 2n" });
        }
        Ok(())
    }
}

/// Truth table of f: {0,1}^m → {0,1}^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassicalFunction {
    m: usize,
    n: usize,
    table: Vec<Label>,
}

impl ClassicalFunction {
    pub fn new(m: usize, n: usize, table: Vec<Label>) -> Result<Self> {
        if m > MAX_TABLE_BITS || n > 31 {
            return Err(Error::InvalidWidths { m, n, reason: "table too wide" });
        }
        check_dim(1 << m, table.len())?;
        if table.iter().any(|&y| (y as u64) >= (1u64 << n)) {
            return Err(Error::InvalidWidths { m, n, reason: "entry exceeds codomain" });
        }
        Ok(ClassicalFunction { m, n, table })
    }

    /// Uniform random table without the matrix cap (for counts-only work).
    pub fn sample_table<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n > 31 || m > MAX_TABLE_BITS {
            return Err(Error::InvalidWidths { m, n, reason: "table too wide" });
        }
        let size = 1u32 << n;
        let table = (0..1usize << m).map(|_| rng.random_range(0..size)).collect();
        Ok(ClassicalFunction { m, n, table })
    }

    pub fn constant(m: usize, n: usize, z: Label) -> Result<Self> {
        Self::new(m, n, vec![z; 1 << m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[Label] {
        &self.table
    }

    pub fn domain_size(&self) -> usize {
        self.table.len()
    }

    pub fn codomain_size(&self) -> usize {
        1 << self.n
    }

    /// Dimension of the ⊥-augmented register, 2^m + 1.
    pub fn aug_dim(&self) -> usize {
        self.table.len() + 1
    }

    pub fn eval(&self, x: usize) -> Label {
        self.table[x]
    }

    pub fn preimages(&self, z: Label) -> Vec<usize> {
        (0..self.table.len()).filter(|&x| self.table[x] == z).collect()
    }

    /// Preimage counts indexed by label.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.codomain_size()];
        for &y in &self.table {
            c[y as usize] += 1;
        }
        c
    }

    pub fn image(&self) -> BTreeSet<Label> {
        self.table.iter().copied().collect()
    }

    pub fn in_image(&self, z: Label) -> bool {
        self.table.contains(&z)
    }

    /// One line per input, "x_bits y_bits", inputs in increasing order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (x, &y) in self.table.iter().enumerate() {
            let _ = writeln!(s, "{:0mw$b} {:0nw$b}", x, y, mw = self.m.max(1), nw = self.n);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut widths: Option<(usize, usize)> = None;
        let mut table = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (xs, ys) = match (parts.next(), parts.next(), parts.next()) {
                (Some(x), Some(y), None) => (x, y),
                _ => return Err(Error::Parse(format!("line {}: expected two fields", lineno + 1))),
            };
            let (mw, nw) = *widths.get_or_insert((xs.len(), ys.len()));
            if xs.len() != mw || ys.len() != nw {
                return Err(Error::Parse(format!("line {}: inconsistent widths", lineno + 1)));
            }
            let x = usize::from_str_radix(xs, 2).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let y = Label::from_str_radix(ys, 2).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if x != table.len() {
                return Err(Error::Parse(format!("line {}: inputs out of order", lineno + 1)));
            }
            table.push(y);
        }
        let (mw, n) = widths.ok_or_else(|| Error::Parse("empty table".into()))?;
        let m = table.len().trailing_zeros() as usize;
        if !table.len().is_power_of_two() || (m != mw && !(m == 0 && mw == 1)) {
            return Err(Error::Parse(format!("{} lines do not form a table over {mw}-bit inputs", table.len())));
        }
        Self::new(m, n, table)
    }
}

/// Uniform random function, subject to the size limits.
pub fn sample_random_function<R: Rng + ?Sized>(m: usize, n: usize, limits: &SizeLimits, rng: &mut R) -> Result<ClassicalFunction> {
    limits.check(m, n)?;
    ClassicalFunction::sample_table(m, n, rng)
}

/// ψ_z: uniform superposition over f⁻¹(z), in augmented(m).
pub fn preimage_state(f: &ClassicalFunction, z: Label) -> Result<PureState> {
    let pre = f.preimages(z);
    if pre.is_empty() {
        return Err(Error::NoPreimage { z });
    }
    let a = C64::new(1.0 / (pre.len() as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; f.aug_dim()];
    for x in pre {
        amps[x] = a;
    }
    Ok(PureState::from_parts(amps, DimTag::Augmented(f.m())))
}

/// The preimage superposition set, one state per label in the image.
pub fn preimage_states(f: &ClassicalFunction) -> Vec<(Label, PureState)> {
    f.image().into_iter().map(|z| (z, preimage_state(f, z).expect("label in image"))).collect()
}

/// |x⟩|y⟩ ↦ |x⟩|y ⊕ f(x)⟩ on m + n qubits.
pub fn xor_oracle(f: &ClassicalFunction) -> OperatorMatrix {
    let nn = f.codomain_size();
    let perm: Vec<usize> =
        (0..f.domain_size() * nn).map(|i| (i / nn) * nn + ((i % nn) ^ f.eval(i / nn) as usize)).collect();
    OperatorMatrix::unitary_unchecked(
        CMatrix::permutation(&perm),
        DimTag::Product(vec![DimTag::Qubits(f.m()), DimTag::Qubits(f.n())]),
    )
}

/// C_S = I + Σ |ψ⟩⟨ψ| ⊗ (|ψ⟩⟨⊥| + |⊥⟩⟨ψ| − |⊥⟩⟨⊥| − |ψ⟩⟨ψ|) on augmented(m)².
pub fn cloning_oracle_for_set(m: usize, states: &[PureState]) -> Result<OperatorMatrix> {
    let d = (1usize << m) + 1;
    let bot = bottom_index(m);
    let tol = tolerance();
    for s in states {
        check_dim(d, s.dim())?;
        let leak = s.amplitudes()[bot].norm();
        if leak > tol {
            return Err(Error::NotOrthonormal { deviation: leak });
        }
    }
    let mut worst = 0.0f64;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            worst = worst.max(inner(states[i].amplitudes(), states[j].amplitudes()).norm());
        }
    }
    if worst > tol {
        return Err(Error::NotOrthonormal { deviation: worst });
    }

    let mut c = CMatrix::identity(d * d);
    for s in states {
        let psi = s.amplitudes();
        let support: Vec<usize> = (0..d).filter(|&a| a != bot && psi[a] != ZERO).collect();
        // Q on support ∪ {⊥}, with ⊥ stored last.
        let mut idx = support.clone();
        idx.push(bot);
        let k = idx.len();
        let mut q = vec![ZERO; k * k];
        for (r, &a) in support.iter().enumerate() {
            q[r * k + (k - 1)] = psi[a];
            q[(k - 1) * k + r] = psi[a].conj();
            for (t, &b) in support.iter().enumerate() {
                q[r * k + t] = -psi[a] * psi[b].conj();
            }
        }
        q[k * k - 1] = C64::new(-1.0, 0.0);
        for &a in &support {
            for &b in &support {
                let p = psi[a] * psi[b].conj();
                for (r, &cc) in idx.iter().enumerate() {
                    for (t, &e) in idx.iter().enumerate() {
                        let v = q[r * k + t];
                        if v != ZERO {
                            c[(a * d + cc, b * d + e)] += p * v;
                        }
                    }
                }
            }
        }
    }
    Ok(OperatorMatrix::unitary_unchecked(c, DimTag::pair(m)))
}

/// Cloning oracle for the whole preimage superposition set of `f`.
pub fn full_cloning_oracle(f: &ClassicalFunction) -> OperatorMatrix {
    let states: Vec<PureState> = preimage_states(f).into_iter().map(|(_, s)| s).collect();
    cloning_oracle_for_set(f.m(), &states).expect("preimage states are orthonormal")
}

/// Cloning oracle for the singleton {ψ_z}.
pub fn z_cloning_oracle(f: &ClassicalFunction, z: Label) -> Result<OperatorMatrix> {
    let psi = preimage_state(f, z)?;
    cloning_oracle_for_set(f.m(), &[psi])
}

/// H together with its two oracles.
#[derive(Clone, Debug)]
pub struct SchemeInstance {
    pub h: ClassicalFunction,
    pub xor_oracle: OperatorMatrix,
    pub clone_oracle: OperatorMatrix,
    pub labels_in_image: BTreeSet<Label>,
}

impl SchemeInstance {
    pub fn new(h: ClassicalFunction) -> Self {
        let xor_oracle = xor_oracle(&h);
        let clone_oracle = full_cloning_oracle(&h);
        let labels_in_image = h.image();
        SchemeInstance { h, xor_oracle, clone_oracle, labels_in_image }
    }

    pub fn sample<R: Rng + ?Sized>(m: usize, n: usize, limits: &SizeLimits, rng: &mut R) -> Result<Self> {
        Ok(Self::new(sample_random_function(m, n, limits, rng)?))
    }
}

/// Image of a uniformly random input.
pub fn sample_label<R: Rng + ?Sized>(inst: &SchemeInstance, rng: &mut R) -> Label {
    sample_label_of(&inst.h, rng)
}

pub fn sample_label_of<R: Rng + ?Sized>(f: &ClassicalFunction, rng: &mut R) -> Label {
    f.eval(rng.random_range(0..f.domain_size()))
}

/// P(z) = |f⁻¹(z)| / 2^m, indexed by label.
pub fn label_distribution(f: &ClassicalFunction) -> Vec<f64> {
    let total = f.domain_size() as f64;
    f.counts().into_iter().map(|c| c as f64 / total).collect()
}

/// Fidelity of `state` with ψ_z.
pub fn verify<S: QuantumState>(state: &S, z: Label, f: &ClassicalFunction) -> Result<f64> {
    let psi = preimage_state(f, z)?;
    state.fidelity_with(&psi)
}
