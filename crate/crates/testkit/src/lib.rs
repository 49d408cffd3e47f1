//! Slow, obviously-correct reference implementations. Nothing here depends on
//! the production crates, so agreement between the two is meaningful.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

/// Every set partition of `n` items as a restricted growth string:
/// `p[0] = 0` and `p[i] ≤ 1 + max(p[..i])`.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for c in 0..=limit {
            prefix.push(c);
            grow(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// Bell numbers B(0..=n) by the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Item-by-item BCubed straight from the definition: for each item, the share
/// of its predicted cluster (itself included) that shares its gold label, and
/// dually for recall. Returns `(precision, recall, f1)`.
pub fn bcubed_bruteforce(predicted: &[usize], gold: &[usize]) -> (f64, f64, f64) {
    let n = predicted.len();
    if n == 0 {
        return (1.0, 1.0, 1.0);
    }
    let mut p_sum = BigRational::from_integer(0.into());
    let mut r_sum = BigRational::from_integer(0.into());
    for i in 0..n {
        let same_pred = (0..n).filter(|&j| predicted[j] == predicted[i]).count();
        let same_gold = (0..n).filter(|&j| gold[j] == gold[i]).count();
        let both = (0..n)
            .filter(|&j| predicted[j] == predicted[i] && gold[j] == gold[i])
            .count();
        p_sum += ratio(both as i64, same_pred as i64);
        r_sum += ratio(both as i64, same_gold as i64);
    }
    let p = p_sum / BigRational::from_integer(BigInt::from(n));
    let r = r_sum / BigRational::from_integer(BigInt::from(n));
    let f = harmonic(&p, &r);
    (to_f64(&p), to_f64(&r), to_f64(&f))
}

/// Pair counting over all `i < j`. Returns `(precision, recall, f1)` with 0/0 taken as 1.
pub fn pairwise_bruteforce(predicted: &[usize], gold: &[usize]) -> (f64, f64, f64) {
    let n = predicted.len();
    let (mut tp, mut pp, mut gp) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = predicted[i] == predicted[j];
            let b = gold[i] == gold[j];
            tp += i64::from(a && b);
            pp += i64::from(a);
            gp += i64::from(b);
        }
    }
    let p = if pp == 0 { ratio(1, 1) } else { ratio(tp, pp) };
    let r = if gp == 0 { ratio(1, 1) } else { ratio(tp, gp) };
    let f = harmonic(&p, &r);
    (to_f64(&p), to_f64(&r), to_f64(&f))
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn harmonic(p: &BigRational, r: &BigRational) -> BigRational {
    let zero = BigRational::from_integer(0.into());
    if p + r == zero {
        zero
    } else {
        BigRational::from_integer(2.into()) * p * r / (p + r)
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("finite rational")
}

/// Modularity by the textbook double sum over the full adjacency matrix.
pub fn modularity_bruteforce(n: usize, edges: &[(usize, usize, f64)], partition: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if partition[i] == partition[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every partition of the nodes, with the first partition attaining it.
pub fn exhaustive_max_modularity(n: usize, edges: &[(usize, usize, f64)]) -> (f64, Vec<usize>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for p in set_partitions(n) {
        let q = modularity_bruteforce(n, edges, &p);
        if q > best.0 {
            best = (q, p);
        }
    }
    best
}

/// Random undirected graph on `n` nodes: each pair is an edge with
/// probability `density`, weights uniform in [0.31, 1].
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j, rng.gen_range(0.31..=1.0)));
            }
        }
    }
    edges
}

/// The valence formula in exact rational arithmetic:
/// `2 · (tf0/total0) / (tf0/total0 + tf1/total1) − 1`.
pub fn valence_rational(tf0: u64, total0: u64, tf1: u64, total1: u64) -> BigRational {
    let a = BigRational::new(BigInt::from(tf0), BigInt::from(total0));
    let b = BigRational::new(BigInt::from(tf1), BigInt::from(total1));
    BigRational::from_integer(2.into()) * &a / (&a + &b) - BigRational::from_integer(1.into())
}

pub fn valence_oracle(tf0: u64, total0: u64, tf1: u64, total1: u64) -> f64 {
    to_f64(&valence_rational(tf0, total0, tf1, total1))
}

/// Propaganda bucket lookup against a literal interval table.
pub fn propaganda_bucket_oracle(p: f64) -> &'static str {
    const TABLE: [(f64, f64, &str); 5] = [
        (0.0, 0.2, "very_unlikely"),
        (0.2, 0.4, "unlikely"),
        (0.4, 0.6, "somehow"),
        (0.6, 0.8, "likely"),
        (0.8, f64::INFINITY, "very_likely"),
    ];
    TABLE
        .iter()
        .find(|(lo, hi, _)| *lo <= p && p < *hi)
        .map(|t| t.2)
        .expect("p within [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_are_bell_numbers() {
        for n in 0..=7 {
            assert_eq!(set_partitions(n).len() as u64, bell(n));
        }
        assert_eq!(bell(6), 203);
        assert_eq!(bell(10), 115_975);
    }

    #[test]
    fn valence_examples() {
        assert_eq!(valence_oracle(30, 100, 10, 100), 0.5);
        assert_eq!(valence_oracle(5, 10, 0, 10), 1.0);
        assert_eq!(valence_oracle(1, 10, 2, 20), 0.0);
    }

    #[test]
    fn bcubed_example() {
        assert_eq!(bcubed_bruteforce(&[0, 0], &[0, 1]).0, 0.5);
    }
}
