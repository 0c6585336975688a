//! Timings for the main kernels: the ma transform, the gari product, the
//! balancing involution, braid normal forms and the graded pentagon solver.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use moulds::bal::{bal, p4_blocks};
use moulds::braid::{grt_solve, pentagon_braid, BraidAlgebra, BraidElement};
use moulds::flexion::gari;
use moulds::mould::Mould;
use moulds::ncseries::{ma, random_dagger, random_group_like, NCSeries};
use moulds::{Alphabet, FamilyTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn trivial() -> Arc<Alphabet> {
    Arc::new(Alphabet::trivial())
}

fn bench_ma(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [4, 6] {
        let h = random_dagger(trivial(), n, &mut rng);
        c.bench_function(&format!("ma/degree-{n}"), |b| b.iter(|| ma(black_box(&h)).unwrap()));
    }
}

fn bench_gari(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [4, 5] {
        let a = ma(&random_group_like(trivial(), n, &mut rng)).unwrap();
        let p = ma(&random_group_like(trivial(), n, &mut rng)).unwrap();
        c.bench_function(&format!("gari/length-{n}"), |b| b.iter(|| gari(black_box(&a), black_box(&p)).unwrap()));
    }
}

fn bench_bal(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = Mould::random_poly(FamilyTag::Pol, p4_blocks(), 3, 2, &mut rng).unwrap();
    c.bench_function("bal/length-3", |b| b.iter(|| bal(black_box(&m)).unwrap()));
}

fn bench_braid(c: &mut Criterion) {
    let alg = BraidAlgebra::new(4, 4).unwrap();
    let t = |i, j| BraidElement::gen(&alg, i, j).unwrap();
    let x = t(0, 1).add(&t(1, 3)).unwrap().add(&t(0, 2)).unwrap();
    let y = t(2, 3).add(&t(0, 3)).unwrap().add(&t(1, 2)).unwrap();
    c.bench_function("braid/normal-form-degree-4", |b| {
        b.iter(|| black_box(&x).mul(&y).unwrap().mul(&x).unwrap().mul(&y).unwrap())
    });
    let one = NCSeries::one(trivial(), 1);
    let sigma = grt_solve(3, &one, &alg).unwrap().representative(4);
    let phi = sigma.exp_circledast().unwrap();
    c.bench_function("braid/pentagon-degree-4", |b| b.iter(|| pentagon_braid(black_box(&phi), &one, &alg).unwrap()));
}

fn bench_grt(c: &mut Criterion) {
    let alg = BraidAlgebra::new(4, 4).unwrap();
    let one = NCSeries::one(trivial(), 1);
    let mut g = c.benchmark_group("grt-solve");
    g.sample_size(10);
    for d in [3, 4] {
        g.bench_function(format!("degree-{d}"), |b| b.iter(|| grt_solve(d, &one, &alg).unwrap()));
    }
    g.finish();
}

criterion_group!(kernels, bench_ma, bench_gari, bench_bal, bench_braid, bench_grt);
criterion_main!(kernels);
