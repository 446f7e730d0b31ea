mod common;

#[test]
fn embeddings_are_ring_homomorphisms() {
    common::homomorphism(1000).unwrap();
}

#[test]
fn beta_product_norm_matches_delta() {
    common::norm_product_identity().unwrap();
}

#[test]
fn closed_form_vandermonde_bound_dominates_samples() {
    common::schur_dominates(20_000).unwrap();
}

#[test]
fn gamma_survives_generator_round_trip() {
    common::gamma_roundtrip(100).unwrap();
}

#[test]
fn factorization_agrees_with_exhaustive_search() {
    common::factorization_oracle(50).unwrap();
}

#[test]
fn reference_polynomials_vanish_at_their_parameters() {
    common::golden_residuals().unwrap();
}
