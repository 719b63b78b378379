fn main() {
    std::process::exit(wfr_cli::run(std::env::args_os().collect()));
}
