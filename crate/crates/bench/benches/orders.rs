use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use intervals::catalog::triple;
use intervals::constructed::{eval_triple, Mode};
use intervals::order::verify_order_axioms;
use intervals::word::w;

fn leq_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("leq");
    for (construction, id) in [
        ("fp", "ones"),
        ("upsv", "constant-2"),
        ("increment", "ones"),
    ] {
        let t = triple(construction, id).unwrap();
        let u = t.universe(&w("010")).unwrap();
        let order = t.order();
        g.bench_with_input(BenchmarkId::new(construction, u.len()), &u, |b, u| {
            b.iter(|| {
                u.iter()
                    .filter(|a| order.leq(a, &u[u.len() / 2]).unwrap())
                    .count()
            })
        });
    }
    g.finish();
}

fn axioms(c: &mut Criterion) {
    let t = triple("upsv", "constant-2").unwrap();
    let u = t.universe(&w("1")).unwrap();
    c.bench_function("axioms/upsv", |b| {
        b.iter(|| verify_order_axioms(t.order(), black_box(&u)))
    });
}

fn walks(c: &mut Criterion) {
    let mut g = c.benchmark_group("walk");
    for (construction, id, x) in [
        ("fp", "value", "111"),
        ("offset", "majority", "111"),
        ("increment", "value", "111"),
    ] {
        let t = triple(construction, id).unwrap();
        let x = w(x);
        g.bench_function(construction, |b| {
            b.iter(|| eval_triple(&t, &x, Mode::Walk).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, leq_matrix, axioms, walks);
criterion_main!(benches);
