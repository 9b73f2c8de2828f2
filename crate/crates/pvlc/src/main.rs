fn main() {
    std::process::exit(pvlc::cli::run(std::env::args_os()));
}
