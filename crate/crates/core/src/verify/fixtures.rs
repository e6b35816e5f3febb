//! Catalog of deliberately broken schemes. Each entry names the checks it
//! must fail; every check appears in at least one entry.
//!
//! All fixtures are edits of the built-in scheme written in the linear model,
//! so they exist for any parameters. The TOML files under `fixtures/` are the
//! catalog rendered at `K = 3, p = 2, L = 1`.

use crate::protocol::SchemeParams;
use crate::search::description::{CoeffMatrix, Decoder, Encoder, SchemeDescription, ShareMap};

use super::CheckName;

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    /// Checks that must report `Fail`; all others must not.
    pub fails: &'static [CheckName],
    /// Smallest transmitter count the fixture is defined for.
    pub min_transmitters: usize,
    build: fn(SchemeParams) -> SchemeDescription,
}

impl Fixture {
    pub fn describe(&self, params: SchemeParams) -> SchemeDescription {
        let mut d = (self.build)(params);
        d.name = self.name.to_string();
        d.note = self.summary.to_string();
        d
    }

    pub fn file_name(&self) -> String {
        format!("{}.scheme", self.name)
    }
}

/// Parameters the checked-in fixture files use.
pub fn default_params() -> SchemeParams {
    SchemeParams::new(3, 2, 1).expect("valid")
}

use CheckName::*;

pub const CATALOG: &[Fixture] = &[
    Fixture {
        name: "naive",
        summary: "desired transmitter sends its message in the clear, the others send zero",
        fails: &[Anonymity, Collusion, TranscriptUniform],
        min_transmitters: 2,
        build: naive,
    },
    Fixture {
        name: "drop-last",
        summary: "decoder ignores the last transmitter's signal",
        fails: &[Correctness, DecoderLatinStructure],
        min_transmitters: 2,
        build: drop_last,
    },
    Fixture {
        name: "leaky",
        summary: "transmitter 2 adds its message even when undesired",
        fails: &[Correctness, Security, ShareDeterminism],
        min_transmitters: 2,
        build: leaky,
    },
    Fixture {
        name: "point-mass",
        summary: "every signal is identically zero",
        fails: &[Correctness, TranscriptUniform],
        min_transmitters: 2,
        build: point_mass,
    },
    Fixture {
        name: "mixing",
        summary: "every undesired transmitter mixes its message into its signal",
        fails: &[Correctness, Security, ShareDeterminism],
        min_transmitters: 2,
        build: mixing,
    },
    Fixture {
        name: "constant-decoder",
        summary: "decoder always outputs zero",
        fails: &[Correctness, DecoderLatinStructure],
        min_transmitters: 2,
        build: constant_decoder,
    },
    Fixture {
        name: "colluder-copy",
        summary: "the last share also carries a copy of the first share",
        fails: &[Collusion],
        min_transmitters: 3,
        build: colluder_copy,
    },
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    CATALOG.iter().find(|f| f.name == name)
}

fn linear_parts(
    d: &mut SchemeDescription,
) -> (
    &mut Vec<ShareMap>,
    &mut Vec<Encoder>,
    &mut Vec<Encoder>,
    &mut Vec<CoeffMatrix>,
) {
    let Decoder::Linear { filters } = &mut d.decoder else {
        unreachable!("built-in description is linear")
    };
    (&mut d.share_maps, &mut d.desired, &mut d.undesired, filters)
}

fn set_v(e: &mut Encoder, v_new: CoeffMatrix) {
    if let Encoder::Linear { v, .. } = e {
        *v = v_new;
    }
}

fn set_u(e: &mut Encoder, u_new: CoeffMatrix) {
    if let Encoder::Linear { u, .. } = e {
        *u = u_new;
    }
}

fn naive(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    let l = params.message_len;
    for e in d.desired.iter_mut().chain(d.undesired.iter_mut()) {
        set_u(e, CoeffMatrix::zeros(l, l));
    }
    d
}

fn drop_last(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    let l = params.message_len;
    let (_, _, _, filters) = linear_parts(&mut d);
    *filters.last_mut().expect("K >= 2") = CoeffMatrix::zeros(l, l);
    d
}

fn leaky(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    set_v(&mut d.undesired[1], CoeffMatrix::identity(params.message_len));
    d
}

fn point_mass(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    let l = params.message_len;
    for e in d.desired.iter_mut().chain(d.undesired.iter_mut()) {
        set_v(e, CoeffMatrix::zeros(l, l));
        set_u(e, CoeffMatrix::zeros(l, l));
    }
    d
}

fn mixing(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    for e in d.undesired.iter_mut() {
        set_v(e, CoeffMatrix::identity(params.message_len));
    }
    d
}

fn constant_decoder(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    let l = params.message_len;
    let (_, _, _, filters) = linear_parts(&mut d);
    for g in filters.iter_mut() {
        *g = CoeffMatrix::zeros(l, l);
    }
    d
}

/// Shares grow to `2L` symbols; the second half is zero except for the last
/// transmitter, whose second half equals transmitter 1's share.
fn colluder_copy(params: SchemeParams) -> SchemeDescription {
    let mut d = SchemeDescription::builtin_linear(params);
    let l = params.message_len;
    let s = d.seed_dim;
    let k = params.transmitters;
    let first = match &d.share_maps[0] {
        ShareMap::Linear { matrix } => matrix.clone(),
        ShareMap::Table { .. } => unreachable!("built-in description is linear"),
    };
    for (i, m) in d.share_maps.iter_mut().enumerate() {
        let ShareMap::Linear { matrix } = m else {
            unreachable!("built-in description is linear")
        };
        let mut wide = CoeffMatrix::zeros(2 * l, s);
        wide.entries[..l * s].copy_from_slice(&matrix.entries);
        if i + 1 == k {
            wide.entries[l * s..].copy_from_slice(&first.entries);
        }
        *matrix = wide;
    }
    let mut select = CoeffMatrix::zeros(l, 2 * l);
    for r in 0..l {
        select.entries[r * 2 * l + r] = 1;
    }
    for e in d.desired.iter_mut().chain(d.undesired.iter_mut()) {
        set_u(e, select.clone());
    }
    d.share_dim = 2 * l;
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{run_checks, Verdict, VerifyOptions};

    fn verdicts(f: &Fixture, params: SchemeParams) -> Vec<(CheckName, Verdict)> {
        let scheme = f.describe(params).compile().unwrap();
        run_checks(&scheme, &CheckName::ALL, &VerifyOptions::default())
            .unwrap()
            .into_iter()
            .map(|r| (r.check_name, r.verdict))
            .collect()
    }

    #[test]
    fn each_fixture_fails_exactly_its_checks() {
        for params in [default_params(), SchemeParams::new(3, 3, 1).unwrap(), SchemeParams::new(4, 2, 1).unwrap()] {
            for f in CATALOG {
                for (check, verdict) in verdicts(f, params) {
                    let expect_fail = f.fails.contains(&check);
                    if expect_fail && check != Collusion {
                        assert_eq!(verdict, Verdict::Fail, "{} {check} at {params}", f.name);
                    } else if !expect_fail {
                        assert_ne!(verdict, Verdict::Fail, "{} {check} at {params}", f.name);
                    }
                }
                let any_collusion_fail = verdicts(f, params)
                    .iter()
                    .any(|&(c, v)| c == Collusion && v == Verdict::Fail);
                assert_eq!(any_collusion_fail, f.fails.contains(&Collusion), "{} at {params}", f.name);
            }
        }
    }

    #[test]
    fn every_check_has_a_failing_fixture() {
        for c in CheckName::ALL {
            assert!(CATALOG.iter().any(|f| f.fails.contains(&c)), "{c}");
        }
    }

    #[test]
    fn checked_in_files_match_catalog() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        if std::env::var_os("ANONCOMM_WRITE_FIXTURES").is_some() {
            std::fs::create_dir_all(&dir).unwrap();
            for f in CATALOG {
                let text = f.describe(default_params()).to_toml_string();
                std::fs::write(dir.join(f.file_name()), text).unwrap();
            }
        }
        for f in CATALOG {
            let on_disk = SchemeDescription::load(&dir.join(f.file_name())).unwrap();
            assert_eq!(on_disk, f.describe(default_params()), "{}", f.name);
        }
    }
}
