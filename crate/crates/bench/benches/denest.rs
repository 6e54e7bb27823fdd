use criterion::{criterion_group, criterion_main, Criterion};
use einsum_core::rewrite::{
    apply_contraction_path, denest_fully, general_denest_at, ContractionPath,
};
use einsum_core::{expression_generator, parse_expression, Expr, GeneratorConfig};

fn einsum(text: &str) -> einsum_core::Einsum {
    match parse_expression(text).unwrap() {
        Expr::Einsum(node) => node,
        _ => unreachable!(),
    }
}

fn rewrites(c: &mut Criterion) {
    let nine =
        einsum("#(a,b,c,d,e,abbcde->bc; v1, v2, v3, v4, v5, #(i,j,k,l->iijkkl; v6, v7, v8, v9))");
    c.bench_function("general-denest/nine-vector", |b| {
        b.iter(|| general_denest_at(&nine, 5).unwrap())
    });

    let flat = einsum("#(ab,bc,cd,de,ef,fg,g->a; A, B, C, D, E, F, v)");
    let path: ContractionPath = "[(6,7),(5,6),(4,5),(3,4),(2,3),(1,2)]".parse().unwrap();
    let nested = apply_contraction_path(&flat, &path).unwrap();
    c.bench_function("apply-path/seven-operands", |b| {
        b.iter(|| apply_contraction_path(&flat, &path).unwrap())
    });
    c.bench_function("denest-fully/seven-operands", |b| {
        b.iter(|| denest_fully(&nested))
    });

    let generated: Vec<Expr> = (0..64)
        .map(|s| expression_generator(&GeneratorConfig::with_seed(s)).0)
        .collect();
    c.bench_function("denest-fully/generated", |b| {
        b.iter(|| generated.iter().map(denest_fully).count())
    });
}

criterion_group!(benches, rewrites);
criterion_main!(benches);
