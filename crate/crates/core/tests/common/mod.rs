//! A deliberately naive reference implementation of the reservoir: dense
//! nested loops, a Taylor-series exponential and explicit Kronecker
//! products. Nothing here calls into the crate's linear algebra.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn zeros(d: usize) -> Mat {
    vec![vec![C::new(0.0, 0.0); d]; d]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut c = zeros(d);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn dagger(a: &Mat) -> Mat {
    let d = a.len();
    let mut c = zeros(d);
    for i in 0..d {
        for j in 0..d {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

/// Bit of qubit `q` (1-based, qubit 1 most significant) in basis index `b`.
pub fn bit(b: usize, q: usize, n: usize) -> usize {
    (b >> (n - q)) & 1
}

pub fn hamiltonian(n: usize, h: f64, j: &dyn Fn(usize, usize) -> f64) -> Mat {
    let d = 1 << n;
    let mut m = zeros(d);
    for b in 0..d {
        let mut z = 0.0;
        for q in 1..=n {
            z += if bit(b, q, n) == 0 { 1.0 } else { -1.0 };
        }
        m[b][b] += C::new(0.5 * h * z, 0.0);
        for p in 1..=n {
            for q in p + 1..=n {
                let flipped = b ^ (1 << (n - p)) ^ (1 << (n - q));
                m[flipped][b] += C::new(j(p, q), 0.0);
            }
        }
    }
    m
}

/// e^{−iHt} by scaling and squaring a 30-term Taylor series.
pub fn expm(h: &Mat, t: f64) -> Mat {
    let d = h.len();
    let norm: f64 = h.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let scale = C::new(0.0, -t / 2f64.powi(squarings));
    let a: Mat = h.iter().map(|r| r.iter().map(|z| z * scale).collect()).collect();
    let mut result = zeros(d);
    let mut term = zeros(d);
    for i in 0..d {
        result[i][i] = C::new(1.0, 0.0);
        term[i][i] = C::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = mul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result
}

pub fn pauli(axis: usize) -> [[C; 2]; 2] {
    let o = C::new(0.0, 0.0);
    let l = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match axis {
        0 => [[o, l], [l, o]],
        1 => [[o, -i], [i, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// ⟨∏ σ^{axis}_{site}⟩ = Σ ρ[a][b]·P[b][a] with P built entry by entry.
pub fn expect(rho: &Mat, n: usize, factors: &[(usize, usize)]) -> f64 {
    let d = rho.len();
    let mut total = C::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            let mut p = C::new(1.0, 0.0);
            for q in 1..=n {
                let entry = match factors.iter().find(|f| f.0 == q) {
                    Some(&(_, axis)) => pauli(axis)[bit(b, q, n)][bit(a, q, n)],
                    None => C::new(if bit(a, q, n) == bit(b, q, n) { 1.0 } else { 0.0 }, 0.0),
                };
                p *= entry;
            }
            total += rho[a][b] * p;
        }
    }
    total.re
}

pub fn observables(rho: &Mat, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..=n {
        for a in 0..3 {
            out.push(expect(rho, n, &[(i, a)]));
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            for a in 0..3 {
                out.push(expect(rho, n, &[(i, a), (j, a)]));
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    out.push(expect(rho, n, &[(i, a), (j, b)]));
                }
            }
        }
    }
    out
}

pub fn naive_run(n: usize, h: f64, dt: f64, j: &dyn Fn(usize, usize) -> f64, inputs: &[f64]) -> Vec<f64> {
    let d = 1 << n;
    let half = d / 2;
    let u = expm(&hamiltonian(n, h, j), dt);
    let ud = dagger(&u);
    let mut rho = zeros(d);
    rho[0][0] = C::new(1.0, 0.0);
    let mut sums = vec![0.0; observables(&rho, n).len()];
    for &s in inputs {
        let psi = [(1.0 - s).sqrt(), s.sqrt()];
        let mut rest = zeros(half);
        for a in 0..half {
            for b in 0..half {
                rest[a][b] = rho[a][b] + rho[half + a][half + b];
            }
        }
        let mut injected = zeros(d);
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..half {
                    for b in 0..half {
                        injected[x * half + a][y * half + b] = rest[a][b] * (psi[x] * psi[y]);
                    }
                }
            }
        }
        rho = mul(&mul(&u, &injected), &ud);
        for (acc, v) in sums.iter_mut().zip(observables(&rho, n)) {
            *acc += v;
        }
    }
    sums.iter().map(|s| s / inputs.len() as f64).collect()
}

/// Tr₁ρ by summing the two diagonal blocks of the first qubit.
pub fn partial_trace_first(rho: &Mat) -> Mat {
    let half = rho.len() / 2;
    let mut out = zeros(half);
    for a in 0..half {
        for b in 0..half {
            out[a][b] = rho[a][b] + rho[half + a][half + b];
        }
    }
    out
}
