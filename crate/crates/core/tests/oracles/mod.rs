//! Slow, independent reference implementations used to check the library.
#![allow(dead_code)]

use indexscope_core::linalg::Matrix;
use rand::Rng;

pub fn random_adjacency<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    adj
}

/// Triangles over connected triples by explicit enumeration.
pub fn transitivity(adj: &[Vec<bool>]) -> f64 {
    let n = adj.len();
    let mut closed = 0usize;
    let mut triples = 0usize;
    for centre in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if a != centre && b != centre && adj[centre][a] && adj[centre][b] {
                    triples += 1;
                    if adj[a][b] {
                        closed += 1;
                    }
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// `(component count, largest component size)` via union–find.
pub fn components(adj: &[Vec<bool>]) -> (usize, usize) {
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    let count = sizes.iter().filter(|&&s| s > 0).count();
    (count, sizes.into_iter().max().unwrap_or(0))
}

/// Largest clique over all vertex subsets; ties resolved towards the
/// lexicographically smallest sorted vertex list.
pub fn max_clique(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    assert!(n <= 20, "exhaustive search only for small graphs");
    let mut best: Vec<usize> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        if members.len() < best.len() {
            continue;
        }
        let is_clique = members
            .iter()
            .enumerate()
            .all(|(k, &a)| members[k + 1..].iter().all(|&b| adj[a][b]));
        if is_clique && (members.len() > best.len() || members < best) {
            best = members;
        }
    }
    best
}

/// Kruskal minimum spanning tree weight.
pub fn kruskal_weight(d: &Matrix) -> (f64, usize) {
    let n = d.dim();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((d[(i, j)], i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut used = 0;
    for (w, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += w;
            used += 1;
        }
    }
    (total, used)
}

/// Random metric: Euclidean distances between points in the unit cube.
pub fn random_metric<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    Matrix::from_fn(n, |i, j| {
        pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Periodogram `|Σ x_t e^{-2πikt/n}|²` by direct summation.
pub fn dft_power(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                re += v * phase.cos();
                im += v * phase.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// Relative RMS gap between two periodograms, skipping the mean term.
pub fn spectrum_rel_rms(reference: &[f64], other: &[f64]) -> f64 {
    let num: f64 = reference[1..]
        .iter()
        .zip(&other[1..])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let den: f64 = reference[1..].iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Mean squared residual after a degree-`m` least-squares fit in `i = 1..s`,
/// solved through the normal equations.
pub fn detrended_variance(segment: &[f64], m: usize) -> f64 {
    let s = segment.len();
    let xs: Vec<f64> = (1..=s).map(|i| i as f64).collect();
    let mut ata = vec![vec![0.0; m + 1]; m + 1];
    let mut aty = vec![0.0; m + 1];
    for (x, y) in xs.iter().zip(segment) {
        for r in 0..=m {
            aty[r] += x.powi(r as i32) * y;
            for c in 0..=m {
                ata[r][c] += x.powi((r + c) as i32);
            }
        }
    }
    let coef = solve(ata, aty);
    xs.iter()
        .zip(segment)
        .map(|(x, y)| {
            let fit: f64 = coef
                .iter()
                .enumerate()
                .map(|(k, c)| c * x.powi(k as i32))
                .sum();
            (y - fit).powi(2)
        })
        .sum::<f64>()
        / s as f64
}

/// Slope of `log2 Σ_boxes μ^q` against `-log2` of the box size, which for a
/// binomial cascade is `τ(q) = -log2(a^q + (1-a)^q)`.
pub fn partition_tau(x: &[f64], q: f64) -> f64 {
    let total: f64 = x.iter().sum();
    let n = x.len();
    let mut pts = Vec::new();
    let mut size = 1;
    while size <= n / 2 {
        let z: f64 = x
            .chunks(size)
            .map(|c| (c.iter().sum::<f64>() / total).powf(q))
            .sum();
        pts.push(((size as f64 / n as f64).log2(), z.log2()));
        size *= 2;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
