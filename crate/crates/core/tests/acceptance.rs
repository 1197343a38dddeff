//! One test per acceptance criterion. Each prints its PASS/FAIL line; the
//! checks run one at a time so that wall-clock budgets are not shared.

use std::io::Write;
use std::sync::Mutex;

use mdalab::acceptance::{find, DEFAULT_SEED};

static SERIAL: Mutex<()> = Mutex::new(());

fn check(id: &str) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let criterion = find(id).unwrap_or_else(|| panic!("no check named {id}"));
    let outcome = criterion.run(DEFAULT_SEED);
    let _ = writeln!(std::io::stderr().lock(), "{outcome}");
    assert!(outcome.passed, "{id} did not pass");
}

macro_rules! criteria {
    ($($name:ident => $id:literal),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                check($id);
            }
        )*

        #[test]
        fn every_check_has_a_test() {
            let mut ids: Vec<&str> = vec![$($id),*];
            ids.sort_unstable();
            let mut all: Vec<&str> = mdalab::acceptance::criteria().iter().map(|c| c.id).collect();
            all.sort_unstable();
            assert_eq!(ids, all);
        }
    };
}

criteria! {
    volume_formula => "volume-formula",
    lambda_invariance => "lambda-invariance",
    fourier_support => "fourier-support",
    shell_decay => "shell-decay",
    cover_inclusions => "cover-inclusions",
    property_p => "property-p",
    second_moment_identity => "second-moment-identity",
    surface_decay => "surface-decay",
    curved_etp_envelope => "curved-etp-envelope",
    quasi_independence => "quasi-independence",
    gallagher_monotonicity => "gallagher-monotonicity",
    gcd_lattice => "gcd-lattice",
    exponents => "exponents",
    gallagher_threshold => "gallagher-threshold",
    functional_constant => "functional-constant",
}
