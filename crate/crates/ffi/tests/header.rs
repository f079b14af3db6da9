use std::fs;
use std::path::Path;
use std::process::Command;

const EXPORTS: &[&str] = &[
    "nl_last_error_message",
    "nl_string_free",
    "nl_box_npr",
    "nl_box_even_parity",
    "nl_box_correlated",
    "nl_box_full_correlation",
    "nl_box_from_json",
    "nl_box_to_json",
    "nl_box_free",
    "nl_box_party_count",
    "nl_box_probability_str",
    "nl_box_is_non_signaling",
    "nl_box_is_local",
    "nl_box_equal",
    "nl_compose_triangle",
    "nl_anf_parse",
    "nl_anf_free",
    "nl_anf_evaluate",
    "nl_anf_n_scratch",
    "nl_anf_n_distill_bound",
    "nl_anf_amplifiable",
    "nl_anf_report",
    "nl_t_map",
    "nl_distill_csv",
];

fn header() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nonlocal.h")
}

#[test]
fn header_declares_every_export() {
    let text = fs::read_to_string(header()).unwrap();
    for name in EXPORTS {
        let declared = [' ', '*'].iter().any(|c| text.contains(&format!("{c}{name}(")));
        assert!(declared, "{name} missing from header");
    }
    assert!(text.contains("typedef struct NlBox NlBox;"));
    assert!(text.contains("NL_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    fs::write(
        &src,
        "#include \"nonlocal.h\"\n\
         int main(void) { NlBox *b = 0; NlStatus s = nl_box_npr(2, &b); nl_box_free(b); return s != NL_STATUS_OK; }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not found; skipping {lang} check");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
