//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (no libtest harness) so the lines are always shown.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use geodiff::apk::{open_apk_bytes, CertificateSummary};
use geodiff::availability::{exclusivity_stats, FixtureFetcher, InstallMarkers, ProbePolicy, Prober, Region, Verdict};
use geodiff::features::{extract_features, FeatureSet, LibraryPrefixCatalog};
use geodiff::geotwins::{
    cluster_families, dhash::LumaImage, dhash, find_candidates, hamming, normalized_levenshtein, CatalogEntry,
    GeoTwinPair, Thresholds,
};
use geodiff::json::{round4, to_canonical_string};
use geodiff::similarity::{certificate_similarity, compare, jaccard, modified_jaccard, Feature};
use geodiff::stats::default_sample_size;
use geodiff::testkit::{ApkBuilder, DexClass, TestCert};
use image::{imageops, DynamicImage, Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

// ---------------------------------------------------------------- criterion 1

fn sample_sizes() -> Outcome {
    let a = default_sample_size(48178).map_err(|e| e.to_string())?;
    let b = default_sample_size(81963).map_err(|e| e.to_string())?;
    check(a == 382 && b == 383, || format!("got {a} and {b}, expected 382 and 383"))?;
    Ok(format!("N=48178 -> {a}, N=81963 -> {b}"))
}

// ---------------------------------------------------------------- criterion 2

fn complete_pairs(names: &[String]) -> Vec<GeoTwinPair> {
    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pairs.push(GeoTwinPair { a: names[i].clone(), b: names[j].clone(), nld: 0.1, hamming: 0 });
        }
    }
    pairs
}

fn family_identity() -> Outcome {
    for n in 2..=12usize {
        let names: Vec<String> = (0..n).map(|i| format!("com.fam{n}.m{i:02}")).collect();
        // a spanning chain and the complete graph must give the same family
        let chain: Vec<GeoTwinPair> = names
            .windows(2)
            .map(|w| GeoTwinPair { a: w[0].clone(), b: w[1].clone(), nld: 0.1, hamming: 0 })
            .collect();
        for pairs in [chain, complete_pairs(&names)] {
            let f = cluster_families(&pairs);
            check(f.len() == 1 && f[0].members.len() == n, || format!("n={n}: {} families", f.len()))?;
            let expected = (n * (n - 1) / 2) as u64;
            check(f[0].pair_count == expected, || format!("n={n}: pair_count {} != {expected}", f[0].pair_count))?;
        }
    }
    let three = cluster_families(&complete_pairs(&["a.x".into(), "b.x".into(), "c.x".into()])[..2]);
    check(three[0].pair_count == 3, || "three-member family does not yield 3 pairs".into())?;
    let amex: Vec<String> = [
        "com.americanexpress.android.acctsvcs.us",
        "com.americanexpress.android.acctsvcs.uk",
        "com.americanexpress.android.acctsvcs.au",
        "com.americanexpress.android.acctsvcs.ca",
        "com.americanexpress.android.acctsvcs.in",
        "com.americanexpress.android.acctsvcs.mx",
        "com.americanexpress.android.acctsvcs.jp",
        "com.americanexpress.android.acctsvcs.sg",
        "com.americanexpress.android.acctsvcs.hk",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let entries: Vec<CatalogEntry> = amex.iter().map(|n| CatalogEntry::new(n.as_str(), 0x5a5a_0000_ffff_1234)).collect();
    let pairs = find_candidates(&entries, Thresholds::default());
    let families = cluster_families(&pairs);
    check(pairs.len() == 36, || format!("9 variants admitted {} pairs", pairs.len()))?;
    check(families.len() == 1 && families[0].pair_count == 36, || format!("{families:?}"))?;
    Ok("sizes 2..=12 give n(n-1)/2; n=3 -> 3; nine-variant family -> 36".into())
}

// ---------------------------------------------------------------- criterion 3

fn brute_set(a: &BTreeSet<u8>, b: &BTreeSet<u8>) -> f64 {
    let (mut inter, mut union) = (0, 0);
    for x in 0..=u8::MAX {
        let (ia, ib) = (a.contains(&x), b.contains(&x));
        inter += u32::from(ia && ib);
        union += u32::from(ia || ib);
    }
    if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    }
}

fn brute_files(l: &BTreeMap<String, String>, r: &BTreeMap<String, String>) -> f64 {
    let paths: BTreeSet<&String> = l.keys().chain(r.keys()).collect();
    if paths.is_empty() {
        return 1.0;
    }
    let mut weight = 0.0;
    for p in &paths {
        weight += match (l.get(*p), r.get(*p)) {
            (Some(x), Some(y)) if x == y => 1.0,
            (Some(_), Some(_)) => 0.5,
            _ => 0.0,
        };
    }
    weight / paths.len() as f64
}

fn brute_cert(l: Option<&CertificateSummary>, r: Option<&CertificateSummary>) -> f64 {
    match (l, r) {
        (None, None) => 1.0,
        (Some(l), Some(r)) => {
            let keys: BTreeSet<&String> = l.flattened.keys().chain(r.flattened.keys()).collect();
            if keys.is_empty() {
                return 1.0;
            }
            let same = keys.iter().filter(|k| matches!((l.flattened.get(**k), r.flattened.get(**k)), (Some(x), Some(y)) if x == y)).count();
            same as f64 / keys.len() as f64
        }
        _ => 0.0,
    }
}

fn random_set(rng: &mut ChaCha8Rng) -> BTreeSet<u8> {
    let n = rng.random_range(0..=12);
    (0..n).map(|_| rng.random_range(0..16u8)).collect()
}

fn random_map(rng: &mut ChaCha8Rng) -> BTreeMap<String, String> {
    let n = rng.random_range(0..=12);
    (0..n)
        .map(|_| (format!("p{}", rng.random_range(0..16)), format!("h{}", rng.random_range(0..3))))
        .collect()
}

fn random_cert(rng: &mut ChaCha8Rng) -> Option<CertificateSummary> {
    rng.random_bool(0.8).then(|| CertificateSummary { flattened: random_map(rng), fingerprint_sha256: String::new() })
}

fn strings(set: &BTreeSet<u8>) -> BTreeSet<String> {
    set.iter().map(|x| format!("s{x}")).collect()
}

fn random_features(rng: &mut ChaCha8Rng) -> (FeatureSet, [BTreeSet<u8>; 5]) {
    let raw = [random_set(rng), random_set(rng), random_set(rng), random_set(rng), random_set(rng)];
    let f = FeatureSet {
        app_id: "x@0".into(),
        package_name: "x".into(),
        permissions: strings(&raw[0]),
        components: strings(&raw[1]),
        certificate: random_cert(rng),
        third_party_libs: strings(&raw[2]),
        native_libs: strings(&raw[3]),
        urls: strings(&raw[4]),
        files: random_map(rng),
        smali_files: random_map(rng),
    };
    (f, raw)
}

fn scoring_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..10_000 {
        let (a, ra) = random_features(&mut rng);
        let (b, rb) = random_features(&mut rng);
        for (x, y) in ra.iter().zip(&rb) {
            check(jaccard(&strings(x), &strings(y)) == brute_set(x, y), || format!("case {case}: jaccard"))?;
        }
        for (l, r) in [(&a.files, &b.files), (&a.smali_files, &b.smali_files)] {
            check(modified_jaccard(l, r).score == brute_files(l, r), || format!("case {case}: modified jaccard"))?;
        }
        let (ca, cb) = (a.certificate.as_ref(), b.certificate.as_ref());
        check(certificate_similarity(ca, cb) == brute_cert(ca, cb), || format!("case {case}: certificate"))?;

        let report = compare(&a, &b);
        let expected = [
            brute_set(&ra[0], &rb[0]),
            brute_set(&ra[1], &rb[1]),
            brute_cert(ca, cb),
            brute_set(&ra[2], &rb[2]),
            brute_set(&ra[3], &rb[3]),
            brute_set(&ra[4], &rb[4]),
            brute_files(&a.files, &b.files),
            brute_files(&a.smali_files, &b.smali_files),
        ];
        check(report.features.len() == 8, || format!("case {case}: {} features", report.features.len()))?;
        for (s, e) in report.features.iter().zip(expected) {
            check(s.score == e, || format!("case {case}: {} {} != {e}", s.feature, s.score))?;
        }
        let mean = expected.iter().sum::<f64>() / 8.0;
        check((report.overall - mean).abs() <= 1e-12, || format!("case {case}: overall {}", report.overall))?;
    }
    Ok("10000 random pairs agree with brute force; overall within 1e-12".into())
}

// ---------------------------------------------------------------- criterion 4

/// Full-matrix edit distance, written independently of the library.
fn dp_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn dp_nld(a: &str, b: &str) -> f64 {
    let m = a.chars().count().max(b.chars().count());
    if m == 0 {
        0.0
    } else {
        dp_levenshtein(a, b) as f64 / m as f64
    }
}

fn brute_candidates(catalog: &[CatalogEntry], t: Thresholds) -> Vec<(String, String, u32, f64)> {
    let mut out = Vec::new();
    for i in 0..catalog.len() {
        for j in i + 1..catalog.len() {
            let (x, y) = (&catalog[i], &catalog[j]);
            let d = (x.icon_hash ^ y.icon_hash).count_ones();
            if d > t.hamming_max {
                continue;
            }
            let tokens_ok = !x.country_tokens.is_empty()
                && !y.country_tokens.is_empty()
                && x.country_tokens != y.country_tokens;
            if !tokens_ok {
                continue;
            }
            let nld = dp_nld(&x.package_name, &y.package_name);
            if nld <= t.nld_max {
                let (a, b) = if x.package_name < y.package_name { (x, y) } else { (y, x) };
                out.push((a.package_name.clone(), b.package_name.clone(), d, nld));
            }
        }
    }
    out.sort_by(|p, q| (&p.0, &p.1).cmp(&(&q.0, &q.1)));
    out
}

const BRANDS: &[&str] = &["unison", "martinus", "guidatv", "wallet", "bank", "news", "radio", "maps", "shop", "taxi"];
const COUNTRIES: &[&str] = &["jp", "de", "fr", "at", "sk", "cz", "us", "gb", "br", "in", "es", "it", "kr", "mx"];
const FILLERS: &[&str] = &["com", "app", "mobile", "android", "client", "co"];

fn random_name(rng: &mut ChaCha8Rng, brand: &str) -> String {
    let cc = COUNTRIES[rng.random_range(0..COUNTRIES.len())];
    let filler = FILLERS[rng.random_range(0..FILLERS.len())];
    let mut name = match rng.random_range(0..4) {
        0 => format!("{cc}.{filler}.{brand}"),
        1 => format!("com.{brand}.{filler}.{cc}"),
        2 => format!("com.{brand}{}.{filler}", rng.random_range(0..3)),
        _ => format!("{cc}.{brand}.{filler}"),
    };
    if rng.random_bool(0.2) {
        // a one-letter spelling variant inside the brand
        let pos = name.len() - 2;
        name.replace_range(pos..pos + 1, "x");
    }
    name
}

fn random_catalog(rng: &mut ChaCha8Rng, size: usize) -> Vec<CatalogEntry> {
    let mut names = BTreeSet::new();
    let mut entries = Vec::new();
    while entries.len() < size {
        let brand = BRANDS[rng.random_range(0..BRANDS.len())];
        let centre: u64 = rng.random();
        let cluster = rng.random_range(1..=12);
        for _ in 0..cluster {
            let mut hash = centre;
            for _ in 0..rng.random_range(0..=8) {
                hash ^= 1 << rng.random_range(0..64);
            }
            let variant = format!("{brand}{}", rng.random_range(0..4));
            let name = random_name(rng, &variant);
            if names.insert(name.clone()) {
                entries.push(CatalogEntry::new(name, hash));
            }
            if entries.len() == size {
                break;
            }
        }
    }
    entries
}

fn mining_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Thresholds::default();
    let mut total_pairs = 0;
    for case in 0..200 {
        let size = if case % 20 == 0 { 2000 } else { rng.random_range(1..=2000) };
        let catalog = random_catalog(&mut rng, size);
        let expected = brute_candidates(&catalog, t);
        let got: Vec<(String, String, u32, f64)> =
            find_candidates(&catalog, t).into_iter().map(|p| (p.a, p.b, p.hamming, p.nld)).collect();
        check(got == expected, || {
            format!("catalog {case} ({size} entries): index {} pairs, brute force {}", got.len(), expected.len())
        })?;
        total_pairs += got.len();
    }
    check(total_pairs > 0, || "no pair admitted in any catalog; generator too sparse".into())?;
    Ok(format!("200 catalogs, {total_pairs} admitted pairs, index == brute force"))
}

// ---------------------------------------------------------------- criterion 5

fn nld_boundary() -> Outcome {
    let unison = ("jp.co.atm.unison", "en.co.atm.unison");
    let books = ("sk.martinus.knihovratok", "cz.martinus.knihovratek");
    let u = normalized_levenshtein(unison.0, unison.1);
    let s = normalized_levenshtein(books.0, books.1);
    check(u == 0.125 && u == dp_nld(unison.0, unison.1), || format!("unison NLD {u}"))?;
    check(s == 3.0 / 23.0 && s == dp_nld(books.0, books.1), || format!("martinus NLD {s}"))?;
    check(u <= 0.2 && s <= 0.2, || "above threshold".into())?;
    for (a, b) in [unison, books] {
        let pairs = find_candidates(&[CatalogEntry::new(a, 7), CatalogEntry::new(b, 7)], Thresholds::default());
        check(pairs.len() == 1, || format!("{a} / {b} not admitted as twins"))?;
    }
    Ok(format!("unison {u}, martinus {s:.6} (3/23), both admitted"))
}

// ---------------------------------------------------------------- criterion 6

fn gradient(rng: &mut ChaCha8Rng) -> RgbImage {
    let (w, h) = (rng.random_range(16..=64), rng.random_range(16..=64));
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let colours: [[f64; 3]; 2] = [
        [rng.random_range(0.0..255.0), rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)],
        [rng.random_range(0.0..255.0), rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)],
    ];
    let wave = rng.random_range(0.5..2.5);
    RgbImage::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        let t = ((u * dx + v * dy) * wave).sin() * 0.5 + 0.5;
        let c = |k: usize| (colours[0][k] + (colours[1][k] - colours[0][k]) * t).round() as u8;
        Rgb([c(0), c(1), c(2)])
    })
}

fn dhash_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let flat = DynamicImage::ImageRgb8(RgbImage::from_pixel(40, 40, Rgb([120, 80, 200])));
    check(dhash(&flat).map_err(|e| e.to_string())? == 0, || "uniform image hash is not zero".into())?;
    let mut within = 0;
    let mut worst = 0;
    for _ in 0..100 {
        let img = gradient(&mut rng);
        let up = imageops::resize(&img, img.width() * 2, img.height() * 2, imageops::FilterType::Triangle);
        let h1 = dhash(&DynamicImage::ImageRgb8(img.clone())).map_err(|e| e.to_string())?;
        let again = dhash(&DynamicImage::ImageRgb8(img)).map_err(|e| e.to_string())?;
        check(hamming(h1, again) == 0, || "self-distance is not 0".into())?;
        let h2 = dhash(&DynamicImage::ImageRgb8(up)).map_err(|e| e.to_string())?;
        let d = hamming(h1, h2);
        worst = worst.max(d);
        within += usize::from(d <= 10);
    }
    check(within >= 95, || format!("only {within}/100 upscales within Hamming 10"))?;
    let ramp = LumaImage::new(9, 8, (0..72).map(|i| f64::from(9 - (i % 9) as u8)).collect());
    check(geodiff::geotwins::dhash::dhash_luma(&ramp) == u64::MAX, || "ramp is not all ones".into())?;
    Ok(format!("{within}/100 upscales within 10 (worst {worst})"))
}

// ---------------------------------------------------------------- criterion 7

fn fixture_differential() -> Outcome {
    let signer = TestCert::self_signed("Release Key");
    let catalog = LibraryPrefixCatalog::new(["okhttp3"]).map_err(|e| e.to_string())?;
    let base = |extra_permission: bool, config: &[u8], extra_class: bool| {
        let mut b = ApkBuilder::new("org.geo.demo")
            .permission("android.permission.INTERNET")
            .permission("android.permission.CAMERA")
            .activity(".Main")
            .class(DexClass::new("Lorg/geo/demo/Main;").method(&[0x0e]))
            .class(DexClass::new("Lokhttp3/Client;").method(&[0x12, 0x0f]))
            .dex_string("https://api.example.com/v1")
            .native_lib("arm64-v8a", "libnative.so", b"\x7fELF native")
            .file("assets/config.json", config)
            .file("res/raw/readme.txt", b"plain text")
            .sign_v2(&signer);
        if extra_permission {
            b = b.permission("android.permission.ACCESS_FINE_LOCATION");
        }
        if extra_class {
            b = b.class(DexClass::new("Lorg/geo/demo/Extra;").method(&[0x0e]));
        }
        b.build()
    };
    let left = open_apk_bytes(Path::new("left.apk"), &base(false, b"{\"region\":\"jp\"}", false))
        .map_err(|e| e.to_string())?;
    let right = open_apk_bytes(Path::new("right.apk"), &base(true, b"{\"region\":\"en\"}", true))
        .map_err(|e| e.to_string())?;
    let (l, r) = (extract_features(&left, &catalog), extract_features(&right, &catalog));

    // permissions 2/3; files: manifest, classes.dex and config.json changed,
    // native lib and readme identical -> (2 + 3*0.5)/5; smali 2 of 3 classes
    let golden = [
        (Feature::Permissions, "0.6667"),
        (Feature::Components, "1.0000"),
        (Feature::Certificates, "1.0000"),
        (Feature::ThirdPartyLibs, "1.0000"),
        (Feature::NativeLibs, "1.0000"),
        (Feature::Urls, "1.0000"),
        (Feature::Files, "0.7000"),
        (Feature::SmaliFiles, "0.6667"),
    ];
    let report = compare(&l, &r);
    for (feature, want) in golden {
        let got = format!("{:.4}", report.score(feature).unwrap_or(f64::NAN));
        check(got == want, || format!("{feature}: {got} != {want}"))?;
    }
    // (2/3 + 5 + 0.7 + 2/3) / 8
    let overall = format!("{:.4}", report.overall);
    check(overall == "0.8792", || format!("overall {overall} != 0.8792"))?;
    check(round4(report.overall) == 0.8792, || "serialized overall differs".into())?;
    let same = compare(&l, &l);
    check(same.overall == 1.0, || format!("compare(a, a) = {}", same.overall))?;
    Ok(format!("all 8 goldens match, overall {overall}, self-compare 1.0"))
}

// ---------------------------------------------------------------- criterion 8

const REGIONS: [&str; 7] = ["us", "gb", "de", "in", "jp", "br", "au"];

/// Per region: `A` install page, `U` page without the button, `D` 404,
/// `E` server error.
const CORPUS: [(&str, &str); 20] = [
    ("com.corpus.p01", "AAAAAAA"),
    ("com.corpus.p02", "AAAAAAA"),
    ("com.corpus.p03", "AAAAAAA"),
    ("com.corpus.p04", "AAAAAAA"),
    ("com.corpus.p05", "AAAAAAA"),
    ("com.corpus.p06", "AAAAAAA"),
    ("com.corpus.p07", "AAAAAAA"),
    ("com.corpus.p08", "AAAAAAA"),
    ("com.corpus.p09", "AAAAAAU"),
    ("com.corpus.p10", "AAAAAUU"),
    ("com.corpus.p11", "UAAAAAA"),
    ("com.corpus.p12", "AAUUUUU"),
    ("com.corpus.p13", "UUUUAUU"),
    ("com.corpus.p14", "UUUUAUU"),
    ("com.corpus.p15", "UUUAUUU"),
    ("com.corpus.p16", "AUUUUUU"),
    ("com.corpus.p17", "UUUUUUU"),
    ("com.corpus.p18", "AAADAAA"),
    ("com.corpus.p19", "DDDDDDD"),
    ("com.corpus.p20", "AAAAAAE"),
];

fn availability_aggregation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, region) in REGIONS.iter().enumerate() {
        let rdir = dir.path().join(region);
        std::fs::create_dir(&rdir).map_err(|e| e.to_string())?;
        for (package, row) in CORPUS {
            let html = rdir.join(format!("{package}.html"));
            let status = rdir.join(format!("{package}.status"));
            let write = |p: &Path, body: &str| std::fs::write(p, body).map_err(|e| e.to_string());
            match row.as_bytes()[i] {
                b'A' => write(&html, "<html><button aria-label=\"Install\">Install</button></html>")?,
                b'U' => write(&html, "<html><p>This app is not available for your device</p></html>")?,
                b'D' => write(&status, "404")?,
                _ => {
                    write(&html, "<html><button aria-label=\"Install\">Install</button></html>")?;
                    write(&status, "500")?;
                }
            }
        }
    }
    let regions: Vec<Region> = REGIONS.iter().map(|r| Region::new(*r)).collect();
    let fetcher = FixtureFetcher::new(dir.path());
    let markers = InstallMarkers::bundled();
    let prober = Prober {
        regions: &regions,
        fetcher: &fetcher,
        markers: &markers,
        policy: ProbePolicy { retries: 1, delay: Duration::ZERO },
        frozen_time: Some("2025-01-01T00:00:00Z".into()),
    };
    let packages: Vec<String> = CORPUS.iter().map(|(p, _)| p.to_string()).collect();
    let records = prober.probe_all(&packages);
    check(records[19].per_region["au"] == Verdict::Unavailable && records[19].diagnostics.contains_key("au"), || {
        "server error not recorded as unavailable with diagnostic".into()
    })?;
    let ids: Vec<String> = REGIONS.iter().map(|r| r.to_string()).collect();
    let stats = exclusivity_stats(&records, &ids);

    // 18 retained: 8 everywhere, 3 in six, 1 in five, 1 in two, 4 in one, 1 nowhere
    let expected_csv = "locations,apps,percentage\n\
        7,8,44.44\n6,3,16.67\n5,1,5.56\n4,0,0.00\n3,0,0.00\n2,1,5.56\n1,4,22.22\n0,1,5.56\n";
    check(stats.retained == 18 && stats.excluded_delisted == 2, || {
        format!("retained {}, excluded {}", stats.retained, stats.excluded_delisted)
    })?;
    check(stats.to_csv() == expected_csv, || format!("histogram:\n{}", stats.to_csv()))?;
    let exclusive: BTreeMap<&str, usize> = stats.exclusive.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let expected_exclusive =
        BTreeMap::from([("us", 1), ("gb", 0), ("de", 0), ("in", 1), ("jp", 2), ("br", 0), ("au", 0)]);
    check(exclusive == expected_exclusive, || format!("exclusive {exclusive:?}"))?;
    Ok("20-package corpus: histogram and exclusivity counts match".into())
}

// ---------------------------------------------------------------- criterion 9

fn report_schema() -> Outcome {
    let apk = ApkBuilder::new("org.schema.app").permission("P").build();
    let a = open_apk_bytes(Path::new("s.apk"), &apk).map_err(|e| e.to_string())?;
    let f = extract_features(&a, &LibraryPrefixCatalog::bundled());
    let report: serde_json::Value =
        serde_json::from_str(&to_canonical_string(&compare(&f, &f)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for key in ["left_id", "right_id", "features", "overall"] {
        check(report.get(key).is_some(), || format!("report lacks {key}"))?;
    }
    let features = report["features"].as_array().ok_or("features is not a list")?;
    check(features.len() == 8, || format!("{} feature rows", features.len()))?;
    for row in features {
        let d = &row["detail"];
        let counted = d.get("union").is_some() || d.get("total").is_some();
        check(row["feature"].is_string() && row["score"].is_number() && counted, || format!("incomplete row {row}"))?;
    }
    let left_id = report["left_id"].as_str().unwrap_or_default();
    check(left_id.starts_with("org.schema.app@") && left_id.len() == "org.schema.app@".len() + 64, || {
        format!("id {left_id} lacks package and file hash")
    })?;
    Ok("report carries ids, 8 scored rows with recomputable counts; \
        corpus-level averages, base.apk divergence rates and availability splits of a store-scale \
        study need the original store downloads and are not reproduced here"
        .into())
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 sample-size reproduction", sample_sizes, Duration::from_secs(1)),
        ("2 GeoFamily pair counts", family_identity, Duration::from_secs(1)),
        ("3 scoring oracle equivalence", scoring_oracles, Duration::from_secs(30)),
        ("4 mining oracle equivalence", mining_oracle, Duration::from_secs(120)),
        ("5 NLD boundary fidelity", nld_boundary, Duration::from_secs(1)),
        ("6 dHash properties", dhash_properties, Duration::from_secs(30)),
        ("7 end-to-end fixture differential", fixture_differential, Duration::from_secs(10)),
        ("8 availability aggregation", availability_aggregation, Duration::from_secs(5)),
        ("9 corpus-scale tables (schema only)", report_schema, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= budget {
                Ok(msg)
            } else {
                Err(format!("took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {name} [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
