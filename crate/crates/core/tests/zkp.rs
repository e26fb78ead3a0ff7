use std::collections::HashSet;
use std::path::PathBuf;

use bls12_381::{G2Affine, G2Projective};
use platoon_auth::zkp::{
    self, advance_digest, count_pairings, derive_digest, hash_to_group, key_gen, key_gen_with_rng, pairing,
    proof_aggregate, proof_gen, vectors, verifier_key_aggregate, verify, verify_at, verify_sequential, AggregatedProof,
    AggregatedVerifierKey, Digest, KeyElement, ProofElement, ProverKey, Scalar, TruckIdentity, VerifierKey, ZkpError,
};
use rand::rngs::ChaCha20Rng;
use rand::{Rng, RngExt, SeedableRng};

const VECTOR_SEED: u64 = 0x5eed_0001;
const VECTOR_COUNT: usize = 24;

fn vectors_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/vectors.txt")
}

/// Double-and-add over the big-endian scalar bits, independent of the
/// library's multiplication.
fn oracle_g2_pow(sk: &Scalar) -> G2Affine {
    let g = G2Projective::generator();
    let mut acc = G2Projective::identity();
    for byte in sk.to_bytes() {
        for bit in (0..8).rev() {
            acc = acc.double();
            if (byte >> bit) & 1 == 1 {
                acc += g;
            }
        }
    }
    G2Affine::from(acc)
}

fn keys(rng: &mut ChaCha20Rng, n: usize, truck: &str) -> (Vec<ProverKey>, Vec<VerifierKey>) {
    (0..n)
        .map(|i| key_gen_with_rng(rng, &format!("Company_{i}"), truck))
        .unzip()
}

#[test]
fn verifier_key_matches_square_and_multiply_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for i in 0..20 {
        let (sk, vk) = key_gen_with_rng(&mut rng, "Company_A", &format!("T{i}"));
        assert_eq!(vk.pk().as_affine(), &oracle_g2_pow(sk.scalar()));
    }
    let two = Scalar::from_u64(2);
    let expected = G2Affine::from(G2Projective::generator().double());
    assert_eq!(KeyElement::generator().mul(&two).as_affine(), &expected);
}

#[test]
fn pairing_is_bilinear() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let g1 = ProofElement::generator();
    let g2 = KeyElement::generator();
    let base = pairing(&g1, &g2);
    for _ in 0..100 {
        let a = Scalar::random(&mut rng);
        let b = Scalar::random(&mut rng);
        let ab = Scalar::from_bytes(&mul_mod(&a, &b)).unwrap();
        let lhs = pairing(&g1.mul(&a), &g2.mul(&b));
        assert_eq!(lhs, base.pow(&ab));
        assert_eq!(lhs, pairing(&g1.mul(&b), &g2.mul(&a)));
    }
}

/// `a·b mod r` through the backend scalar field, as bytes.
fn mul_mod(a: &Scalar, b: &Scalar) -> [u8; 32] {
    let prod = a.inner() * b.inner();
    let mut le = prod.to_bytes();
    le.reverse();
    le
}

fn add_mod(a: &Scalar, b: &Scalar) -> Scalar {
    let sum = a.inner() + b.inner();
    let mut be = sum.to_bytes();
    be.reverse();
    Scalar::from_bytes(&be).unwrap()
}

#[test]
fn aggregation_is_homomorphic_for_n_up_to_ten() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    for n in 1..=10 {
        let identity = TruckIdentity::register(format!("mac-{n}").into_bytes(), &mut rng);
        let chain = derive_digest(&identity);
        let (sks, vks) = keys(&mut rng, n, "T");
        let proofs: Vec<_> = sks.iter().map(|sk| proof_gen(&chain, sk)).collect();
        let agg = proof_aggregate(&proofs).unwrap();
        let apk = verifier_key_aggregate(&vks).unwrap();

        let sum = sks
            .iter()
            .skip(1)
            .fold(*sks[0].scalar(), |acc, sk| add_mod(&acc, sk.scalar()));
        assert_eq!(agg.omega(), &hash_to_group(chain.current()).mul(&sum), "n = {n}");
        assert_eq!(apk.pk().as_affine(), &oracle_g2_pow(&sum), "n = {n}");
        assert!(verify(&agg, chain.current(), &apk).unwrap());
        assert!(verify_sequential(&proofs, chain.current(), &vks).unwrap());
    }
}

#[test]
fn wrong_digest_key_or_subset_is_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let chain = derive_digest(&TruckIdentity::register(b"00:11:22".to_vec(), &mut rng));
    let (sks, vks) = keys(&mut rng, 4, "T");
    let proofs: Vec<_> = sks.iter().map(|sk| proof_gen(&chain, sk)).collect();
    let agg = proof_aggregate(&proofs).unwrap();
    let apk = verifier_key_aggregate(&vks).unwrap();

    assert!(!verify(&agg, &Digest::of(b"other"), &apk).unwrap());

    let (_, stranger) = key_gen_with_rng(&mut rng, "Company_0", "T");
    let mut swapped = vks.clone();
    swapped[0] = stranger;
    assert!(!verify(&agg, chain.current(), &verifier_key_aggregate(&swapped).unwrap()).unwrap());

    let partial = proof_aggregate(&proofs[..3]).unwrap();
    assert!(matches!(
        verify(&partial, chain.current(), &apk),
        Err(ZkpError::CountMismatch { .. })
    ));

    let mut forged = proofs.clone();
    forged[2].omega = hash_to_group(chain.current()).mul(&Scalar::from_u64(7));
    assert!(!verify(&proof_aggregate(&forged).unwrap(), chain.current(), &apk).unwrap());
    assert!(!verify_sequential(&forged, chain.current(), &vks).unwrap());
}

#[test]
fn proof_for_one_round_fails_at_the_next() {
    let mut rng = ChaCha20Rng::seed_from_u64(15);
    let chain = derive_digest(&TruckIdentity::register(b"aa:bb".to_vec(), &mut rng));
    let (sks, vks) = keys(&mut rng, 3, "T");
    let apk = verifier_key_aggregate(&vks).unwrap();
    let agg = proof_aggregate(&sks.iter().map(|sk| proof_gen(&chain, sk)).collect::<Vec<_>>()).unwrap();
    let next = advance_digest(&chain);

    assert!(verify_at(&agg, &chain, &apk).unwrap());
    assert!(!verify_at(&agg, &next, &apk).unwrap());
    assert!(!verify(&agg, next.current(), &apk).unwrap());

    let fresh = proof_aggregate(&sks.iter().map(|sk| proof_gen(&next, sk)).collect::<Vec<_>>()).unwrap();
    assert!(verify_at(&fresh, &next, &apk).unwrap());
    let mixed = vec![proof_gen(&chain, &sks[0]), proof_gen(&next, &sks[1])];
    assert!(matches!(proof_aggregate(&mixed), Err(ZkpError::MixedRounds { .. })));
}

#[test]
fn digest_chain_is_iterated_sha256() {
    use sha2::{Digest as _, Sha256};
    let identity = TruckIdentity::new(b"02:42:ac:11:00:02".to_vec(), [9u8; 16]);
    let mut expected: [u8; 32] = Sha256::new()
        .chain_update(b"02:42:ac:11:00:02")
        .chain_update([9u8; 16])
        .finalize()
        .into();
    let mut chain = derive_digest(&identity);
    for round in 0..5 {
        assert_eq!(chain.current().as_bytes(), &expected);
        assert_eq!(chain.round(), round);
        expected = Sha256::digest(expected).into();
        chain = chain.advance();
    }
}

#[test]
fn hash_to_group_has_no_collisions_over_ten_thousand_digests() {
    let mut seen = HashSet::with_capacity(10_000);
    for i in 0u32..10_000 {
        let point = hash_to_group(&Digest::of(&i.to_be_bytes()));
        assert!(point.is_in_subgroup() && !point.is_identity());
        assert!(seen.insert(point.to_bytes()), "collision at {i}");
    }
}

#[test]
fn verify_uses_two_pairings_and_sequential_uses_two_per_proof() {
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let chain = derive_digest(&TruckIdentity::register(b"pc".to_vec(), &mut rng));
    for n in [1, 4, 10] {
        let (sks, vks) = keys(&mut rng, n, "T");
        let proofs: Vec<_> = sks.iter().map(|sk| proof_gen(&chain, sk)).collect();
        let agg = proof_aggregate(&proofs).unwrap();
        let apk = verifier_key_aggregate(&vks).unwrap();
        assert_eq!(count_pairings(|| verify(&agg, chain.current(), &apk)).1, 2);
        assert_eq!(
            count_pairings(|| verify_sequential(&proofs, chain.current(), &vks)).1,
            2 * n as u64
        );
    }
}

#[test]
fn serialized_forms_round_trip_and_reject_garbage() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let chain = derive_digest(&TruckIdentity::register(b"ser".to_vec(), &mut rng)).advance();
    let (sks, vks) = keys(&mut rng, 3, "T");
    let agg = proof_aggregate(&sks.iter().map(|sk| proof_gen(&chain, sk)).collect::<Vec<_>>()).unwrap();
    let apk = verifier_key_aggregate(&vks).unwrap();

    assert_eq!(AggregatedProof::from_bytes(&agg.to_bytes()).unwrap(), agg);
    assert_eq!(AggregatedVerifierKey::from_bytes(&apk.to_bytes()).unwrap(), apk);
    assert!(AggregatedProof::from_bytes(&agg.to_bytes()[1..]).is_err());
    assert!(AggregatedVerifierKey::from_bytes(&[0u8; zkp::AGGREGATED_KEY_BYTES]).is_err());
    let mut noise = [0u8; zkp::AGGREGATED_PROOF_BYTES];
    rng.fill_bytes(&mut noise);
    noise[8..12].copy_from_slice(&1u32.to_be_bytes());
    let _ = AggregatedProof::from_bytes(&noise);
}

#[test]
fn seeded_key_gen_is_deterministic_and_scoped() {
    let (a, _) = key_gen(Some(3), "Company_A", "T1");
    let (b, _) = key_gen(Some(3), "Company_A", "T1");
    let (c, _) = key_gen(Some(3), "Company_B", "T1");
    let (d, _) = key_gen(Some(3), "Company_A", "T2");
    assert_eq!(a, b);
    assert_ne!(a.scalar(), c.scalar());
    assert_ne!(a.scalar(), d.scalar());
}

#[test]
fn golden_vectors_recompute() {
    let text = std::fs::read_to_string(vectors_path()).expect("golden vectors present");
    let parsed = vectors::parse_file(&text).unwrap();
    assert_eq!(parsed.len(), VECTOR_COUNT);
    assert!(parsed.iter().any(|v| v.expect) && parsed.iter().any(|v| !v.expect));
    for (i, v) in parsed.iter().enumerate() {
        for (sk, pk) in v.sks.iter().zip(&v.pks) {
            assert_eq!(pk.as_affine(), &oracle_g2_pow(sk), "vector {i}");
        }
        let keys: Vec<VerifierKey> = v
            .pks
            .iter()
            .enumerate()
            .map(|(c, pk)| VerifierKey::new(*pk, format!("Company_{}", c + 1), "T").unwrap())
            .collect();
        let apk = verifier_key_aggregate(&keys).unwrap();
        assert_eq!(apk.pk(), &v.apk, "vector {i}");
        let agg_bytes = {
            let mut b = Vec::with_capacity(zkp::AGGREGATED_PROOF_BYTES);
            b.extend_from_slice(&v.round.to_be_bytes());
            b.extend_from_slice(&(v.sks.len() as u32).to_be_bytes());
            b.extend_from_slice(&v.omega.to_bytes());
            b
        };
        let agg = AggregatedProof::from_bytes(&agg_bytes).unwrap();
        assert_eq!(verify(&agg, &v.digest, &apk).unwrap(), v.expect, "vector {i}");
    }
    assert_eq!(vectors::generate(VECTOR_SEED, VECTOR_COUNT), parsed);
}

#[test]
#[ignore = "rewrites tests/data/vectors.txt"]
fn regenerate_golden_vectors() {
    let mut text = String::from("# round,sks,pks,digest,omega,apk,expect\n");
    for v in vectors::generate(VECTOR_SEED, VECTOR_COUNT) {
        text.push_str(&v.to_line());
        text.push('\n');
    }
    let path = vectors_path();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

#[test]
fn random_sk_sets_verify_end_to_end() {
    let mut rng = ChaCha20Rng::seed_from_u64(18);
    for _ in 0..30 {
        let n = rng.random_range(1..=10usize);
        let mut mac = vec![0u8; 6];
        rng.fill_bytes(&mut mac);
        let mut chain = derive_digest(&TruckIdentity::register(mac, &mut rng));
        for _ in 0..rng.random_range(0..4u32) {
            chain = chain.advance();
        }
        let (sks, vks) = keys(&mut rng, n, "T");
        let agg = proof_aggregate(&sks.iter().map(|sk| proof_gen(&chain, sk)).collect::<Vec<_>>()).unwrap();
        assert!(verify_at(&agg, &chain, &verifier_key_aggregate(&vks).unwrap()).unwrap());
    }
}
