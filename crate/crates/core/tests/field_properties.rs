use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_send::field::{is_irreducible, Field, FieldError, FieldSpec};

/// Carry-less product followed by schoolbook long division by the modulus.
fn oracle_mul(a: u64, b: u64, modulus: u128, k: u32) -> u64 {
    let mut prod: u128 = 0;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            prod ^= (a as u128) << i;
        }
    }
    for shift in (0..=127 - k).rev() {
        if (prod >> (shift + k)) & 1 == 1 {
            prod ^= modulus << shift;
        }
    }
    prod as u64
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn oracle_irreducible(f: u64) -> bool {
    let deg = 63 - f.leading_zeros();
    for g in 2u64..(1 << (deg / 2 + 1)) {
        let gd = 63 - g.leading_zeros();
        let mut r = f;
        while r != 0 && 63 - r.leading_zeros() >= gd {
            r ^= g << (63 - r.leading_zeros() - gd);
        }
        if r == 0 {
            return false;
        }
    }
    deg >= 1
}

#[test]
fn field_axioms_exhaustive_small() {
    for k in 1..=4 {
        let f = Field::with_degree(k).unwrap();
        let q = 1u64 << k;
        for a in 0..q {
            assert_eq!(f.add(a, a), 0);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            for b in 0..q {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..q {
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }
}

#[test]
fn multiplicative_group_is_cyclic() {
    for k in 1..=10 {
        let f = Field::with_degree(k).unwrap();
        let order = (1u64 << k) - 1;
        let has_generator = (1..=order).any(|g| {
            let mut seen = vec![false; order as usize + 1];
            let mut x = 1;
            for _ in 0..order {
                if seen[x as usize] {
                    return false;
                }
                seen[x as usize] = true;
                x = f.mul(x, g);
            }
            x == 1
        });
        assert!(has_generator, "k={k}");
    }
}

#[test]
fn multiplication_matches_long_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1e1d);
    for k in [2, 3, 8, 10, 13, 16, 24, 33, 48, 64] {
        let spec = FieldSpec::new(k).unwrap();
        let f = Field::new(spec);
        for _ in 0..10_000 {
            let a = rng.random::<u64>() & spec.mask();
            let b = rng.random::<u64>() & spec.mask();
            let want = oracle_mul(a, b, spec.modulus(), k);
            assert_eq!(f.mul(a, b), want, "k={k} a={a:#x} b={b:#x}");
            assert_eq!(spec.mul_raw(a, b), want);
        }
    }
}

#[test]
fn default_moduli_agree_with_trial_division() {
    for k in 1..=16u32 {
        let spec = FieldSpec::new(k).unwrap();
        let m = spec.modulus() as u64;
        assert!(oracle_irreducible(m), "k={k}");
        let least = ((1u64 << k)..m).find(|&g| oracle_irreducible(g));
        assert_eq!(least, None, "k={k} has a smaller irreducible");
        for g in (1u64 << k)..(1u64 << (k + 1)).min(1 << 13) {
            assert_eq!(is_irreducible(g as u128), oracle_irreducible(g), "{g:#b}");
        }
    }
}

#[test]
fn frobenius_fixes_the_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in [4, 10, 16, 31, 64] {
        let spec = FieldSpec::new(k).unwrap();
        let f = Field::new(spec);
        for _ in 0..200 {
            let a = rng.random::<u64>() & spec.mask();
            let b = rng.random::<u64>() & spec.mask();
            let mut x = a;
            for _ in 0..k {
                x = f.mul(x, x);
            }
            assert_eq!(x, a);
            let s = f.add(a, b);
            assert_eq!(f.mul(s, s), f.add(f.mul(a, a), f.mul(b, b)));
        }
    }
}

#[test]
fn typed_elements_check_their_field() {
    let a = FieldSpec::new(3).unwrap().element(0b011).unwrap();
    let b = FieldSpec::new(3).unwrap().element(0b101).unwrap();
    assert_eq!(a.add(&b).unwrap().value(), 0b110);
    let x = FieldSpec::new(3).unwrap().element(0b010).unwrap();
    let x2 = FieldSpec::new(3).unwrap().element(0b100).unwrap();
    assert_eq!(x.mul(&x2).unwrap().value(), 0b011);
    let other = FieldSpec::new(4).unwrap().one();
    assert!(matches!(
        a.add(&other),
        Err(FieldError::SpecMismatch { .. })
    ));
    assert!(matches!(
        a.mul(&other),
        Err(FieldError::SpecMismatch { .. })
    ));
    assert_eq!(
        FieldSpec::new(3).unwrap().zero().inv(),
        Err(FieldError::DivisionByZero)
    );
    assert_eq!(FieldSpec::new(0), Err(FieldError::UnsupportedDegree(0)));
    assert_eq!(FieldSpec::new(65), Err(FieldError::UnsupportedDegree(65)));
    assert_eq!(
        FieldSpec::with_modulus(4, 0b0101),
        Err(FieldError::Reducible(4))
    );
    assert!(FieldSpec::with_modulus(4, 0b1001).is_ok());
}

proptest! {
    #[test]
    fn inverse_and_division(k in 1u32..=64, a in any::<u64>(), b in any::<u64>()) {
        let spec = FieldSpec::new(k).unwrap();
        let f = Field::new(spec);
        let a = a & spec.mask();
        let b = b & spec.mask();
        if a != 0 {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), 1);
            prop_assert_eq!(spec.inv_raw(a), Some(inv));
            prop_assert_eq!(f.div(f.mul(b, a), a).unwrap(), b);
        } else {
            prop_assert_eq!(f.inv(a), None);
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication(k in 1u32..=20, a in any::<u64>(), e in 0u64..300) {
        let spec = FieldSpec::new(k).unwrap();
        let f = Field::new(spec);
        let a = a & spec.mask();
        let mut want = 1;
        for _ in 0..e {
            want = f.mul(want, a);
        }
        prop_assert_eq!(f.pow(a, e), want);
        prop_assert_eq!(spec.pow_raw(a, e), want);
    }
}
