use std::collections::BTreeMap;

use blockplan::catalog::{self, repair_row, validate_row, Catalog, Provenance};
use blockplan::design::{expand_blocks, GeneratorMatrix};
use blockplan::effects::FractionSpec;
use blockplan::graphs::RequirementsGraph;
use blockplan::oracle::verify_design;
use blockplan::synth::{self, ScanConfig, SynthesisRequest};

fn rows(r: &[&[u8]]) -> GeneratorMatrix {
    GeneratorMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn repairs_are_rederived() {
    let (fractions, records) = Catalog::parse_records(catalog::EMBEDDED).unwrap();
    let mut repaired = 0;
    for (r, fix) in &records {
        let f = fractions.iter().find(|f| f.id == r.fraction_id).unwrap();
        let derived = repair_row(r, f).unwrap();
        match fix {
            Some(groups) => {
                repaired += 1;
                assert!(!validate_row(r, f).is_valid(), "{}", r.label());
                assert_eq!(&derived.grouping, groups, "{}", r.label());
            }
            None => assert_eq!(derived.grouping, r.grouping, "{}", r.label()),
        }
    }
    assert_eq!(repaired, 3);
    let cat = Catalog::embedded().unwrap();
    let tagged = cat
        .entries()
        .iter()
        .filter(|e| e.provenance == Provenance::Repaired)
        .count();
    assert_eq!(tagged, 3);
}

#[test]
fn ds31_counts() {
    let x = rows(&[&[1, 0, 1, 1, 0, 0, 0], &[0, 1, 0, 1, 1, 1, 1]]);
    let f = FractionSpec::parse(7, "ABCEFG").unwrap();
    let d = expand_blocks(&x, &f).unwrap();
    let r = verify_design(&d, None).unwrap();
    assert!(r.passed());
    assert_eq!(r.main_effects_estimable, 7);
    assert_eq!(r.interactions_estimable, 14);
    assert_eq!(d.run_count(), 64);
}

#[test]
fn example_10_design() {
    let x = rows(&[&[1, 0, 1, 1, 1, 1, 1, 1], &[0, 1, 1, 0, 0, 1, 1, 0]]);
    let f = FractionSpec::parse(8, "ABCDH BCEFG").unwrap();
    let d = expand_blocks(&x, &f).unwrap();
    let principal: Vec<String> = d.to_document().blocks[0].clone();
    assert_eq!(principal, ["(1)", "bcfg", "acdefgh", "abdeh"]);
    let r = verify_design(&d, None).unwrap();
    assert!(r.passed());
    assert_eq!(r.interactions_estimable, 19);
}

#[test]
fn example_7_user_fraction() {
    let mut g = RequirementsGraph::complete(9).unwrap();
    for (a, b) in [(6, 7), (6, 8), (7, 8)] {
        g.remove_edge(a, b);
    }
    let f = FractionSpec::parse(9, "ABEGH ABCDEFI").unwrap();
    let req = SynthesisRequest::full(9, 3, g).with_fraction(f);
    let out = synth::synthesize(&req, None).unwrap();
    let r = out.success().expect("alias-free design");
    assert_eq!(r.profile.compact(), "3111111");
    assert_eq!(r.estimable_count(), 33);
    assert_eq!(r.design.run_count(), 128);
    // the labels of a supplied fraction are kept
    assert_eq!(r.design.fraction.render_words(), ["ABEGH", "ABCDEFI"]);
    assert_eq!(
        r.grouping.groups().iter().find(|g| g.len() == 3).unwrap(),
        &vec![6, 7, 8]
    );
    assert!(verify_design(&r.design, Some(&r.prediction()))
        .unwrap()
        .passed());
}

#[test]
fn scan_profiles_do_not_depend_on_first_column() {
    let f = FractionSpec::parse(7, "F1F2F3F4F5F7").unwrap();
    let mut seen = BTreeMap::new();
    for first in 0..3 {
        let cfg = ScanConfig {
            first_column: first,
            ..ScanConfig::default()
        };
        let keys: Vec<String> = synth::scan_profiles(&f, 2, &cfg)
            .unwrap()
            .keys()
            .map(|k| k.compact())
            .collect();
        seen.insert(first, keys);
    }
    let first = seen[&0].clone();
    assert!(seen.values().all(|k| *k == first), "{seen:?}");
}

#[test]
fn document_round_trip() {
    let g = RequirementsGraph::parse(7, "AB AC AD BC BE CD DF EF EG FG").unwrap();
    let out = synth::synthesize(&SynthesisRequest::full(7, 2, g), None).unwrap();
    let r = out.success().unwrap();
    let json = serde_json::to_string(&r.to_document()).unwrap();
    let back: synth::ResultDocument = serde_json::from_str(&json).unwrap();
    let d = blockplan::BlockedDesign::from_document(&back.design).unwrap();
    let rep = verify_design(&d, Some(&back.prediction().unwrap())).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.interactions_estimable, 16);
}
