fn main() {
    std::process::exit(gaborcs::harness::cli::run(std::env::args_os()));
}
