use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dualscore_ffi::*;

const ORIGIN: [u8; 5] = [DS_ORIGIN_ID, DS_ORIGIN_ID, DS_ORIGIN_ID, DS_ORIGIN_OOD, DS_ORIGIN_OOD];
const CORRECT: [u8; 5] = [1, 1, 0, 0, 0];
const S_ID: [f64; 5] = [0.9, 0.8, 0.7, 0.6, 0.95];
const S_OOD: [f64; 5] = [0.9, 0.8, 0.2, 0.1, 0.05];

fn fixture() -> *mut DsEvalSet {
    let mut set = ptr::null_mut();
    let status = unsafe {
        dualscore_evalset_from_arrays(5, ORIGIN.as_ptr(), CORRECT.as_ptr(), S_ID.as_ptr(), S_OOD.as_ptr(), &mut set)
    };
    assert_eq!(status, DsStatus::Ok);
    set
}

fn last_error() -> String {
    let p = dualscore_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fixture_metrics_through_the_abi() {
    let set = fixture();
    let (id, ood) = (c"s_id", c"s_ood");
    unsafe {
        assert_eq!(dualscore_evalset_len(set), 5);
        assert_eq!(dualscore_evalset_n_id(set), 3);
        assert_eq!(dualscore_evalset_n_ood(set), 2);

        let (mut f1, mut tau_id, mut tau_ood) = (0.0, 0.0, 0.0);
        assert_eq!(dualscore_ds_f1(set, id.as_ptr(), ood.as_ptr(), 0, &mut f1, &mut tau_id, &mut tau_ood), DsStatus::Ok);
        assert_eq!((f1, tau_id, tau_ood), (0.8, 0.8, 0.1));
        assert!(dualscore_last_error().is_null());

        let mut aurc = -1.0;
        assert_eq!(dualscore_ds_aurc(set, id.as_ptr(), ood.as_ptr(), 0, 200, &mut aurc), DsStatus::Ok);
        assert!((0.0..=1.0).contains(&aurc));

        let (mut single, mut tau) = (0.0, 0.0);
        assert_eq!(dualscore_single_f1(set, id.as_ptr(), 0, &mut single, &mut tau), DsStatus::Ok);
        assert!((single - 2.0 / 3.0).abs() < 1e-12);
        let mut single_aurc = 0.0;
        assert_eq!(dualscore_single_aurc(set, id.as_ptr(), 0, 200, &mut single_aurc), DsStatus::Ok);
        assert!(aurc <= single_aurc + 1e-12);

        let mut value = 0.0;
        assert_eq!(dualscore_auroc(set, ood.as_ptr(), &mut value), DsStatus::Ok);
        assert_eq!(value, 1.0);
        assert_eq!(dualscore_fpr_at_95_tpr(set, ood.as_ptr(), &mut value), DsStatus::Ok);
        assert_eq!(value, 0.0);
        assert_eq!(dualscore_aupr(set, ood.as_ptr(), &mut value), DsStatus::Ok);
        assert_eq!(value, 1.0);

        dualscore_evalset_free(set);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let set = fixture();
    let mut value = 0.0;
    unsafe {
        assert_eq!(dualscore_auroc(set, c"missing".as_ptr(), &mut value), DsStatus::UnknownChannel);
        assert!(last_error().contains("missing"));
        assert_eq!(dualscore_auroc(ptr::null(), c"s_id".as_ptr(), &mut value), DsStatus::NullPointer);
        assert_eq!(dualscore_auroc(set, ptr::null(), &mut value), DsStatus::NullPointer);
        assert_eq!(dualscore_auroc(set, c"s_id".as_ptr(), ptr::null_mut()), DsStatus::NullPointer);
        assert_eq!(dualscore_ds_aurc(set, c"s_id".as_ptr(), c"s_ood".as_ptr(), 0, 0, &mut value), DsStatus::InvalidArgument);
        dualscore_evalset_free(set);
        dualscore_evalset_free(ptr::null_mut());
        assert_eq!(dualscore_evalset_len(ptr::null()), 0);
    }

    let bad_origin = [0u8, 7];
    let mut out = ptr::null_mut();
    let status = unsafe {
        dualscore_evalset_from_arrays(2, bad_origin.as_ptr(), [1u8, 0].as_ptr(), [0.0, 1.0].as_ptr(), [0.0, 1.0].as_ptr(), &mut out)
    };
    assert_eq!(status, DsStatus::InvalidArgument);
    assert!(out.is_null());

    let only_ood = [DS_ORIGIN_OOD; 2];
    let status = unsafe {
        dualscore_evalset_from_arrays(2, only_ood.as_ptr(), [0u8, 0].as_ptr(), [0.0, 1.0].as_ptr(), [0.0, 1.0].as_ptr(), &mut out)
    };
    assert_eq!(status, DsStatus::EmptyIdPopulation);

    let nan = [f64::NAN, 1.0];
    let status = unsafe {
        dualscore_evalset_from_arrays(2, [0u8, 0].as_ptr(), [1u8, 0].as_ptr(), nan.as_ptr(), [0.0, 1.0].as_ptr(), &mut out)
    };
    assert_eq!(status, DsStatus::NonFiniteScore);
}

#[test]
fn load_scores_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.csv");
    std::fs::write(&path, dualscore::fixtures::FIVE_SAMPLE_CSV).unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut set = ptr::null_mut();
    unsafe {
        assert_eq!(dualscore_evalset_load(c_path.as_ptr(), &mut set), DsStatus::Ok);
        assert_eq!(dualscore_evalset_n_ood(set), 2);
        dualscore_evalset_free(set);
        let absent = CString::new(dir.path().join("absent.csv").to_str().unwrap()).unwrap();
        assert_eq!(dualscore_evalset_load(absent.as_ptr(), &mut set), DsStatus::IoError);
    }
}

#[test]
fn logit_scores() {
    let z = [2.0, -1.0, 0.5];
    let (mut m, mut e) = (0.0, 0.0);
    unsafe {
        assert_eq!(dualscore_msp(z.as_ptr(), 3, &mut m), DsStatus::Ok);
        assert_eq!(dualscore_energy(z.as_ptr(), 3, 1.0, &mut e), DsStatus::Ok);
        assert_eq!(dualscore_energy(z.as_ptr(), 3, 0.0, &mut e), DsStatus::InvalidArgument);
        assert_eq!(dualscore_msp(z.as_ptr(), 0, &mut m), DsStatus::InvalidArgument);
    }
    let sum: f64 = z.iter().map(|v| v.exp()).sum();
    assert!((m - 2f64.exp() / sum).abs() < 1e-15);
    assert!((e - sum.ln()).abs() < 1e-12);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dualscore_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libdualscore_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let build = Command::new("cc")
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "n=5 ds_f1=0.8000 unknown=8");
}
