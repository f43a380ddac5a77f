//! Wigner 3j and 6j symbols from the Racah formulas, evaluated with
//! log-factorials. Arguments are doubled (`j2 = 2j`) so half-integers are exact.

use std::sync::OnceLock;

use crate::error::Result;
use crate::species::label::doubled;

const LOG_FACT_LEN: usize = 1024;

fn log_factorial(n: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LOG_FACT_LEN];
        for k in 1..LOG_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    assert!(n >= 0 && (n as usize) < LOG_FACT_LEN, "factorial argument {n} out of range");
    table[n as usize]
}

fn triangle_ok(a2: i32, b2: i32, c2: i32) -> bool {
    a2 >= 0
        && b2 >= 0
        && c2 >= 0
        && (a2 + b2 + c2) % 2 == 0
        && c2 <= a2 + b2
        && c2 >= (a2 - b2).abs()
}

/// `ln Delta(abc)` with `Delta = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!`.
fn log_triangle(a2: i32, b2: i32, c2: i32) -> f64 {
    log_factorial((a2 + b2 - c2) / 2) + log_factorial((a2 - b2 + c2) / 2)
        + log_factorial((-a2 + b2 + c2) / 2)
        - log_factorial((a2 + b2 + c2) / 2 + 1)
}

fn parity_sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(j1 j2 j3; m1 m2 m3)` with doubled arguments. Zero whenever a selection
/// rule fails, including mismatched integer/half-integer parity.
pub fn wigner3j_doubled(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || !triangle_ok(j1, j2, j3) {
        return 0.0;
    }
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if m.abs() > j || (j + m) % 2 != 0 {
            return 0.0;
        }
    }
    if m1 == 0 && m2 == 0 && m3 == 0 && ((j1 + j2 + j3) / 2) % 2 == 1 {
        return 0.0;
    }
    // Integer quantities entering the Racah sum.
    let a = (j1 + j2 - j3) / 2;
    let b = (j1 - m1) / 2;
    let c = (j2 + m2) / 2;
    let d = (j3 - j2 + m1) / 2;
    let e = (j3 - j1 - m2) / 2;
    let t_min = 0.max(-d).max(-e);
    let t_max = a.min(b).min(c);
    if t_min > t_max {
        return 0.0;
    }
    let prefactor = 0.5
        * (log_triangle(j1, j2, j3)
            + log_factorial((j1 + m1) / 2)
            + log_factorial((j1 - m1) / 2)
            + log_factorial((j2 + m2) / 2)
            + log_factorial((j2 - m2) / 2)
            + log_factorial((j3 + m3) / 2)
            + log_factorial((j3 - m3) / 2));
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let denom = log_factorial(t)
            + log_factorial(d + t)
            + log_factorial(e + t)
            + log_factorial(a - t)
            + log_factorial(b - t)
            + log_factorial(c - t);
        sum += parity_sign(t) * (prefactor - denom).exp();
    }
    parity_sign((j1 - j2 - m3) / 2) * sum
}

/// `{j1 j2 j3; j4 j5 j6}` with doubled arguments; zero when any triad fails.
pub fn wigner6j_doubled(j1: i32, j2: i32, j3: i32, j4: i32, j5: i32, j6: i32) -> f64 {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if !triads.iter().all(|&(a, b, c)| triangle_ok(a, b, c)) {
        return 0.0;
    }
    let prefactor: f64 = triads.iter().map(|&(a, b, c)| 0.5 * log_triangle(a, b, c)).sum();
    let s = triads.map(|(a, b, c)| (a + b + c) / 2);
    let p = [(j1 + j2 + j4 + j5) / 2, (j2 + j3 + j5 + j6) / 2, (j3 + j1 + j6 + j4) / 2];
    let t_min = *s.iter().max().unwrap();
    let t_max = *p.iter().min().unwrap();
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let denom: f64 = s.iter().map(|&x| log_factorial(t - x)).sum::<f64>()
            + p.iter().map(|&x| log_factorial(x - t)).sum::<f64>();
        sum += parity_sign(t) * (log_factorial(t + 1) + prefactor - denom).exp();
    }
    sum
}

/// Checked 3j symbol on real-valued half-integers.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    let [j1, j2, j3, m1, m2, m3] = doubled_all([j1, j2, j3, m1, m2, m3])?;
    for j in [j1, j2, j3] {
        if j < 0 {
            return Err(crate::error::Error::domain("negative angular momentum"));
        }
    }
    Ok(wigner3j_doubled(j1, j2, j3, m1, m2, m3))
}

/// Checked 6j symbol on real-valued half-integers.
pub fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> Result<f64> {
    let js = doubled_all([j1, j2, j3, j4, j5, j6])?;
    if js.iter().any(|&j| j < 0) {
        return Err(crate::error::Error::domain("negative angular momentum"));
    }
    let [a, b, c, d, e, f] = js;
    Ok(wigner6j_doubled(a, b, c, d, e, f))
}

fn doubled_all(xs: [f64; 6]) -> Result<[i32; 6]> {
    let mut out = [0; 6];
    for (o, x) in out.iter_mut().zip(xs) {
        *o = doubled(x)?;
    }
    Ok(out)
}
